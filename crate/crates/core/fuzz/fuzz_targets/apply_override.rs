#![no_main]

use cocycle_lab_core::config::{apply_override, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // First line is the base document, the rest are assignments.
    let mut lines = text.lines();
    let base = lines.next().unwrap_or("{}");
    let Ok(mut doc) = serde_json::from_str::<serde_json::Value>(base) else {
        return;
    };
    for assignment in lines {
        if apply_override(&mut doc, assignment).is_err() {
            return;
        }
    }
    let _ = ExperimentConfig::from_value(doc).map(|c| c.validate());
});
