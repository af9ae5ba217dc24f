#![no_main]

use cocycle_lab_core::config::parse_system;
use cocycle_lab_core::systems::System;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = parse_system(text) {
        if let Ok(system) = System::new(spec) {
            let x = system.sample_point(0);
            assert_eq!(system.step_inverse(&system.step(&x)), x);
        }
    }
});
