#![no_main]

use cocycle_lab_core::cocycle::Cocycle;
use cocycle_lab_core::config::{parse_cocycle, parse_system};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // "system;cocycle"
    let Some((system, cocycle)) = text.split_once(';') else {
        return;
    };
    let (Ok(system), Ok(spec)) = (parse_system(system), parse_cocycle(cocycle)) else {
        return;
    };
    if let Ok(f) = Cocycle::from_specs(system, spec) {
        let x = f.system().sample_point(1);
        let _ = f.eval_sum(&x, 16);
        let _ = f.eval_sum(&x, -16);
    }
});
