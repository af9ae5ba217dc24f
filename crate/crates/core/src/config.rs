//! Experiment configuration: a JSON document with a schema version, a master
//! seed, the system and cocycle, and one block per command.
//!
//! Overrides use `dotted.path=value`, where the value is JSON when it parses
//! as JSON and a string otherwise.  `system=` and `cocycle=` also accept a
//! compact notation:
//!
//! ```text
//! system   rotation:golden | rotation:<alpha u64 or fraction> | odometer:<base>
//!          iid:pm1 | iid:lattice:<d> | iid:cauchy:<scale> | iid:gaussian:<d>
//!          product(<system>,<system>)
//! cocycle  <base>[|<modifier>]...
//!   base      constant:<v>[,<v>...] | indicator:<β> | indicator_minus_mean:<β>
//!             coordinate | abs_coordinate | odometer_orbit
//!   modifier  drift:<c>[,<c>...] | symmetrize | precompose
//!             coboundary:trig:<A>:<freq> | coboundary:clamp:<M> | coboundary:digit:<i>
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cocycle::{BaseFunction, BoundedFunctionSpec, Cocycle, CocycleSpec, Modifier};
use crate::diagnostics::{
    Resolution, SuiteParams, DEFAULT_HORIZON, DEFAULT_THRESHOLD, MIN_SAMPLES,
};
use crate::empirics::{MonitorGrid, Normalization, MIN_RELIABLE_COUNT};
use crate::error::{LabError, Result};
use crate::systems::{Marginal, System, SystemSpec, GOLDEN_ALPHA};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateBlock {
    pub n_max: u64,
    /// Defaults to 0.5 for integer-valued cocycles and 0.05 otherwise.
    pub epsilons: Option<Vec<f64>>,
    pub m: usize,
    pub threshold: f64,
}

impl Default for EstimateBlock {
    fn default() -> Self {
        EstimateBlock {
            n_max: DEFAULT_HORIZON,
            epsilons: None,
            m: 500,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanBlock {
    /// Explicit grid; otherwise `lo..=hi` in steps of `step` (d = 1).
    pub grid: Option<Vec<Vec<f64>>>,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub n: u64,
    pub epsilon: f64,
    pub threshold: f64,
    pub m: usize,
}

impl Default for ScanBlock {
    fn default() -> Self {
        ScanBlock {
            grid: None,
            lo: 0.0,
            hi: 1.0,
            step: 0.05,
            n: DEFAULT_HORIZON,
            epsilon: 0.05,
            threshold: DEFAULT_THRESHOLD,
            m: 500,
        }
    }
}

impl ScanBlock {
    pub fn resolved_grid(&self) -> Result<Vec<Vec<f64>>> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => crate::diagnostics::linear_grid(self.lo, self.hi, self.step),
        }
    }

    pub fn resolution(&self) -> Resolution {
        Resolution {
            n: self.n,
            epsilon: self.epsilon,
            threshold: self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelBlock {
    pub n_list: Vec<u64>,
    pub eta: f64,
    pub k_max: u32,
    pub m: usize,
    pub m_out: usize,
    pub pair_budget: usize,
}

impl Default for KernelBlock {
    fn default() -> Self {
        KernelBlock {
            n_list: vec![100, 1_000],
            eta: 0.5,
            k_max: 6,
            m: 2_000,
            m_out: 10_000,
            pair_budget: crate::kernels::DEFAULT_PAIR_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorBlock {
    /// Base horizon k of the ladder 2^n k.
    pub k0: u64,
    /// Top rung N of the ladder, at most 12.
    pub ladder_len: u32,
    pub eta: f64,
    pub grid: MonitorGrid,
    pub m: usize,
    pub normalization: Normalization,
    pub kernel: Option<KernelBlock>,
}

impl Default for MonitorBlock {
    fn default() -> Self {
        MonitorBlock {
            k0: 1,
            ladder_len: 10,
            eta: 0.1,
            grid: MonitorGrid::default(),
            m: 500,
            normalization: Normalization::InverseDim,
            kernel: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub master_seed: u64,
    pub system: SystemSpec,
    pub cocycle: CocycleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorBlock>,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Declared wall-time budget of a full run, in seconds.
    #[serde(default)]
    pub budget_seconds: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl ExperimentConfig {
    pub fn new(system: SystemSpec, cocycle: CocycleSpec) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            master_seed: 0,
            system,
            cocycle,
            estimate: None,
            scan: None,
            suite: None,
            monitor: None,
            output_dir: None,
            budget_seconds: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        Ok(serde_json::from_value(value)?)
    }

    /// Reads a config file and applies `key=value` overrides in order.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value = serde_json::from_str(&text)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn estimate_block(&self) -> EstimateBlock {
        self.estimate.clone().unwrap_or_default()
    }

    pub fn scan_block(&self) -> ScanBlock {
        self.scan.clone().unwrap_or_default()
    }

    pub fn suite_block(&self) -> SuiteParams {
        self.suite.clone().unwrap_or_default()
    }

    pub fn monitor_block(&self) -> MonitorBlock {
        self.monitor.clone().unwrap_or_default()
    }

    pub fn build_cocycle(&self) -> Result<Cocycle> {
        Cocycle::from_specs(self.system.clone(), self.cocycle.clone())
    }

    /// Checks every invariant and flags underpowered settings.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        if self.schema_version != SCHEMA_VERSION {
            r.errors.push(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let cocycle = match System::new(self.system.clone()) {
            Err(e) => {
                r.errors.push(format!("system: {e}"));
                None
            }
            Ok(sys) => match Cocycle::new(sys, self.cocycle.clone()) {
                Err(e) => {
                    r.errors.push(format!("cocycle: {e}"));
                    None
                }
                Ok(c) => Some(c),
            },
        };
        let dim = cocycle.as_ref().map(Cocycle::dim);
        if self.budget_seconds.is_some_and(|b| !(b > 0.0)) {
            r.errors.push("budget_seconds must be positive".into());
        }

        if let Some(e) = &self.estimate {
            self.validate_estimate(e, &mut r);
        }
        if let Some(s) = &self.scan {
            validate_scan(s, dim, &mut r);
        }
        if let Some(p) = &self.suite {
            validate_suite(p, &mut r);
        }
        if let Some(mo) = &self.monitor {
            validate_monitor(mo, dim, &mut r);
        }
        r
    }
}

impl ExperimentConfig {
    fn validate_estimate(&self, e: &EstimateBlock, r: &mut ValidationReport) {
        if e.n_max == 0 {
            r.errors.push("estimate.n_max must be positive".into());
        }
        if e.m < MIN_SAMPLES {
            r.errors
                .push(format!("estimate.m must be at least {MIN_SAMPLES}"));
        }
        if let Some(eps) = &e.epsilons {
            if eps.is_empty() || eps.iter().any(|v| !(*v > 0.0)) {
                r.errors
                    .push("estimate.epsilons must be positive and nonempty".into());
            }
        }
        if !(e.threshold > 0.0 && e.threshold < 1.0) {
            r.errors
                .push("estimate.threshold must lie in (0, 1)".into());
        }
        underpowered(r, "estimate", e.m, e.threshold);
    }
}

fn validate_scan(s: &ScanBlock, dim: Option<usize>, r: &mut ValidationReport) {
    if let Err(err) = s.resolution().validate() {
        r.errors.push(format!("scan: {err}"));
    }
    if s.m < MIN_SAMPLES {
        r.errors
            .push(format!("scan.m must be at least {MIN_SAMPLES}"));
    }
    match s.resolved_grid() {
        Err(err) => r.errors.push(format!("scan: {err}")),
        Ok(g) => {
            if let Some(d) = dim {
                if g.iter().any(|c| c.len() != d) {
                    r.errors
                        .push(format!("scan grid points must have dimension {d}"));
                }
            }
        }
    }
    underpowered(r, "scan", s.m, s.threshold);
}

fn validate_suite(p: &SuiteParams, r: &mut ValidationReport) {
    if let Err(err) = p.validate() {
        r.errors.push(format!("suite: {err}"));
    }
    if let Some(m) = p.m {
        if m < MIN_SAMPLES {
            r.errors
                .push(format!("suite.m must be at least {MIN_SAMPLES}"));
        }
    }
}

fn validate_monitor(mo: &MonitorBlock, dim: Option<usize>, r: &mut ValidationReport) {
    if mo.ladder_len < 3 || mo.ladder_len > 12 {
        r.errors
            .push("monitor.ladder_len must lie in 3..=12 (at least 4 rungs)".into());
    }
    if mo.k0 == 0 {
        r.errors.push("monitor.k0 must be positive".into());
    }
    if !(mo.eta > 0.0) {
        r.errors.push("monitor.eta must be positive".into());
    }
    if mo.m == 0 {
        r.errors.push("monitor.m must be positive".into());
    }
    if mo.grid.l_values.is_empty()
        || mo.grid.epsilon_values.is_empty()
        || mo
            .grid
            .l_values
            .iter()
            .chain(&mo.grid.epsilon_values)
            .any(|v| !(*v > 0.0))
    {
        r.errors
            .push("monitor grid values must be positive and nonempty".into());
    }
    if let Some(d) = dim {
        let finest = mo.eta * 2f64.powf(-(mo.ladder_len as f64) / d as f64);
        let expected = mo.m as f64 * (2.0 * finest).powi(d as i32);
        if expected < MIN_RELIABLE_COUNT {
            r.warnings.push(format!(
                    "monitor: the finest ball (radius {finest:.3e}) holds {expected:.2} expected samples under a unit density; \
                     below {MIN_RELIABLE_COUNT} the ball masses are not sample-supported"
                ));
        }
    }
    if let Some(k) = &mo.kernel {
        if !(k.eta > 0.0 && k.eta <= 1.0) {
            r.errors
                .push("monitor.kernel.eta must lie in (0, 1]".into());
        }
        if k.n_list.is_empty() || k.n_list.contains(&0) {
            r.errors
                .push("monitor.kernel.n_list must hold positive horizons".into());
        }
        if k.m == 0 || k.m_out == 0 {
            r.errors
                .push("monitor.kernel sample counts must be positive".into());
        }
        if k.pair_budget < crate::kernels::MIN_PAIR_BUDGET {
            r.errors.push(format!(
                "monitor.kernel.pair_budget must be at least {}",
                crate::kernels::MIN_PAIR_BUDGET
            ));
        }
        if k.k_max > 30 {
            r.errors
                .push("monitor.kernel.k_max is limited to 30".into());
        }
    }
}

fn underpowered(r: &mut ValidationReport, block: &str, m: usize, threshold: f64) {
    let se = (threshold * (1.0 - threshold) / m as f64).sqrt();
    if 3.0 * se > 0.05 {
        r.warnings.push(format!(
            "{block}: with m = {m} the 3-SE band around threshold {threshold} is ±{:.3}; verdicts near the threshold are unreliable",
            3.0 * se
        ));
    }
}

/// Applies one `dotted.path=value` override to a JSON config document.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| LabError::config(format!("override {assignment:?} is not key=value")))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(LabError::config(format!(
            "override key {path:?} is malformed"
        )));
    }
    let value = override_value(path, raw.trim())?;
    let mut cur = doc;
    let mut parts = path.split('.').peekable();
    while let Some(key) = parts.next() {
        let obj = cur.as_object_mut().ok_or_else(|| {
            LabError::config(format!("override path {path:?} crosses a non-object"))
        })?;
        if parts.peek().is_none() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(serde_json::Map::new()));
    }
    unreachable!("path has at least one segment")
}

fn override_value(path: &str, raw: &str) -> Result<Value> {
    let json = serde_json::from_str::<Value>(raw).ok();
    match (path, json) {
        ("system", Some(v)) if v.is_object() => Ok(v),
        ("system", _) => Ok(serde_json::to_value(parse_system(raw)?)?),
        ("cocycle", Some(v)) if v.is_object() => Ok(v),
        ("cocycle", _) => Ok(serde_json::to_value(parse_cocycle(raw)?)?),
        (_, Some(v)) => Ok(v),
        (_, None) => Ok(Value::String(raw.to_string())),
    }
}

fn number(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| LabError::config(format!("{what}: {s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(LabError::config(format!("{what}: {s:?} is not finite")));
    }
    Ok(v)
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',').map(|p| number(p, what)).collect()
}

fn integer<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| LabError::config(format!("{what}: {s:?} is not a valid integer")))
}

/// Parses the compact system notation.
pub fn parse_system(text: &str) -> Result<SystemSpec> {
    parse_system_depth(text.trim(), 0)
}

fn parse_system_depth(text: &str, depth: usize) -> Result<SystemSpec> {
    if depth > 16 {
        return Err(LabError::config("system notation nests too deeply"));
    }
    if let Some(inner) = text
        .strip_prefix("product(")
        .and_then(|t| t.strip_suffix(')'))
    {
        let split = top_level_comma(inner)
            .ok_or_else(|| LabError::config(format!("product needs two systems: {text:?}")))?;
        let left = parse_system_depth(inner[..split].trim(), depth + 1)?;
        let right = parse_system_depth(inner[split + 1..].trim(), depth + 1)?;
        return Ok(SystemSpec::Product {
            left: Box::new(left),
            right: Box::new(right),
        });
    }
    let (head, rest) = text.split_once(':').unwrap_or((text, ""));
    match head {
        "rotation" => {
            let alpha = match rest {
                "golden" | "" => GOLDEN_ALPHA,
                r if r.contains('.') => {
                    let x = number(r, "rotation angle")?;
                    if !(x > 0.0 && x < 1.0) {
                        return Err(LabError::config("rotation angle must lie in (0, 1)"));
                    }
                    (x * 2f64.powi(64)) as u64
                }
                r => integer(r, "rotation alpha")?,
            };
            Ok(SystemSpec::Rotation { alpha })
        }
        "odometer" => Ok(SystemSpec::Odometer {
            base: if rest.is_empty() {
                3
            } else {
                integer(rest, "odometer base")?
            },
        }),
        "iid" => {
            let (kind, arg) = rest.split_once(':').unwrap_or((rest, ""));
            let marginal = match kind {
                "pm1" => Marginal::UniformPm1,
                "lattice" => Marginal::LatticeUniform {
                    dim: if arg.is_empty() {
                        1
                    } else {
                        integer(arg, "lattice dimension")?
                    },
                },
                "cauchy" => Marginal::Cauchy {
                    scale: if arg.is_empty() {
                        1.0
                    } else {
                        number(arg, "cauchy scale")?
                    },
                },
                "gaussian" => {
                    let d: usize = if arg.is_empty() {
                        1
                    } else {
                        integer(arg, "gaussian dimension")?
                    };
                    if d == 0 || d > 16 {
                        return Err(LabError::config("gaussian dimension must lie in 1..=16"));
                    }
                    Marginal::Gaussian {
                        mean: vec![0.0; d],
                        covariance: (0..d)
                            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                            .collect(),
                    }
                }
                other => return Err(LabError::config(format!("unknown marginal {other:?}"))),
            };
            Ok(SystemSpec::IidShift { marginal })
        }
        other => Err(LabError::config(format!("unknown system {other:?}"))),
    }
}

fn top_level_comma(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

/// Parses the compact cocycle notation.
pub fn parse_cocycle(text: &str) -> Result<CocycleSpec> {
    let mut parts = text.split('|').map(str::trim);
    let base_text = parts.next().unwrap_or("");
    let (head, arg) = base_text.split_once(':').unwrap_or((base_text, ""));
    let base = match head {
        "constant" => BaseFunction::Constant {
            value: numbers(arg, "constant value")?,
        },
        "indicator" => BaseFunction::Indicator {
            beta: number(arg, "indicator β")?,
        },
        "indicator_minus_mean" => BaseFunction::IndicatorMinusMean {
            beta: number(arg, "indicator β")?,
        },
        "coordinate" => BaseFunction::CoordinateRead { absolute: false },
        "abs_coordinate" => BaseFunction::CoordinateRead { absolute: true },
        "odometer_orbit" => BaseFunction::OdometerOrbit,
        other => return Err(LabError::config(format!("unknown cocycle base {other:?}"))),
    };
    let mut spec = CocycleSpec::new(base);
    for m in parts {
        let (head, arg) = m.split_once(':').unwrap_or((m, ""));
        let modifier = match head {
            "drift" => Modifier::SubtractDrift {
                c: numbers(arg, "drift")?,
            },
            "symmetrize" => Modifier::Symmetrize,
            "precompose" => Modifier::PrecomposeStep,
            "coboundary" => Modifier::AddCoboundary {
                b: parse_bounded(arg)?,
            },
            other => return Err(LabError::config(format!("unknown modifier {other:?}"))),
        };
        spec.modifiers.push(modifier);
    }
    Ok(spec)
}

fn parse_bounded(text: &str) -> Result<BoundedFunctionSpec> {
    let fields: Vec<&str> = text.split(':').collect();
    match fields.as_slice() {
        ["trig", a, f] => Ok(BoundedFunctionSpec::TrigOfRotation {
            amplitude: number(a, "amplitude")?,
            frequency: number(f, "frequency")?,
        }),
        ["clamp", c] => Ok(BoundedFunctionSpec::BoundedCoordinateRead {
            clamp: number(c, "clamp")?,
        }),
        ["digit", p] => Ok(BoundedFunctionSpec::DigitRead {
            position: integer(p, "digit position")?,
        }),
        _ => Err(LabError::config(format!(
            "unknown bounded function {text:?}"
        ))),
    }
}
