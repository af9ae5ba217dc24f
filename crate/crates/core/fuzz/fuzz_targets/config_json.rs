#![no_main]

use cocycle_lab_core::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_json_str(text) {
        let report = cfg.validate();
        if report.is_ok() {
            // A valid config must round-trip and build.
            let again = ExperimentConfig::from_value(cfg.to_value()).expect("round trip");
            assert_eq!(again.to_value(), cfg.to_value());
            let _ = cfg.build_cocycle();
        }
    }
});
