//! Replays the checked-in fuzz seeds through the parsers they target.

use std::path::{Path, PathBuf};

use cocycle_lab_core::cocycle::Cocycle;
use cocycle_lab_core::config::{apply_override, parse_cocycle, parse_system, ExperimentConfig};
use cocycle_lab_core::systems::System;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds_parse_and_validate() {
    for (path, text) in seeds("config_json") {
        let cfg = ExperimentConfig::from_json_str(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(cfg.validate().is_ok(), "{}", path.display());
        assert_eq!(ExperimentConfig::from_value(cfg.to_value()).unwrap(), cfg);
        cfg.build_cocycle().unwrap();
    }
}

#[test]
fn override_seeds_apply() {
    for (path, text) in seeds("apply_override") {
        let mut lines = text.lines();
        let mut doc: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        for a in lines {
            apply_override(&mut doc, a).unwrap_or_else(|e| panic!("{}: {a}: {e}", path.display()));
        }
        let cfg = ExperimentConfig::from_value(doc).unwrap();
        assert!(cfg.validate().is_ok(), "{}", path.display());
    }
}

#[test]
fn system_seeds_build() {
    for (path, text) in seeds("parse_system") {
        let spec = parse_system(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let system = System::new(spec).unwrap();
        let x = system.sample_point(0);
        assert_eq!(system.step_inverse(&system.step(&x)), x);
    }
}

#[test]
fn cocycle_seeds_build() {
    for (path, text) in seeds("parse_cocycle") {
        let (system, cocycle) = text.split_once(';').unwrap();
        let f = Cocycle::from_specs(
            parse_system(system).unwrap(),
            parse_cocycle(cocycle).unwrap(),
        )
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let x = f.system().sample_point(1);
        f.eval_sum(&x, 16).unwrap();
        f.eval_sum(&x, -16).unwrap();
    }
}

#[test]
fn malformed_inputs_are_errors_not_panics() {
    for text in [
        "",
        "product(",
        "product(rotation)",
        "iid:gaussian:99",
        "odometer:x",
        "rotation:1.5",
    ] {
        assert!(parse_system(text).is_err(), "{text:?}");
    }
    for text in [
        "",
        "constant:",
        "indicator:x",
        "coordinate|warp",
        "constant:1|coboundary:trig:1",
    ] {
        assert!(parse_cocycle(text).is_err(), "{text:?}");
    }
    let deep = format!(
        "{}rotation{}",
        "product(rotation,".repeat(40),
        ")".repeat(40)
    );
    assert!(parse_system(&deep).is_err());
    let mut doc = serde_json::json!({});
    assert!(apply_override(&mut doc, "no_equals_sign").is_err());
}
