//! Command execution and artifact writing.
//!
//! Every run writes `report.json` (a pure function of the effective config
//! and the code version), `manifest.json` (config hash, version, wall time)
//! and `curves/*.csv` into the output directory.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cocycle::{
    odometer_orbit_cocycle, oracle_orbit_cocycle, BaseFunction, BoundedFunctionSpec, Cocycle,
    CocycleSpec, Modifier,
};
use crate::config::ExperimentConfig;
use crate::diagnostics::{
    default_epsilon, drift_scan, recurrence_estimate, run_gallery, run_suite, suite_theorem3,
    Check, Curve, Resolution, SuiteParams, SuiteStatus,
};
use crate::empirics::{
    monitor_ineq7_grid, monitor_ineq8_grid, sigma_family, sigma_n, tau_k, BallMeasure,
    EmpiricalMeasure, MonitorGrid, Normalization,
};
use crate::error::{LabError, Result};
use crate::kernels::{
    half_mass_constant, theorem12_bound, theorem14_bound, BoundOptions, TriangleKernel,
};
use crate::rng::{derive_seed, sample_seed};
use crate::systems::{Marginal, SystemPoint, SystemSpec};
use crate::vector::{KahanSum, Vector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_OUT_DIR: &str = "cocycle-lab-out";
/// Largest top horizon 2^N k accepted by the monitor.
const MONITOR_MAX_HORIZON: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Scan,
    Suite(String),
    Gallery(String),
    Monitor,
    Selftest,
    Validate,
}

impl Command {
    pub fn label(&self) -> String {
        match self {
            Command::Estimate => "estimate".into(),
            Command::Scan => "scan".into(),
            Command::Suite(n) => format!("suite {n}"),
            Command::Gallery(n) => format!("gallery {n}"),
            Command::Monitor => "monitor".into(),
            Command::Selftest => "selftest".into(),
            Command::Validate => "validate".into(),
        }
    }

    fn seed_path(&self) -> String {
        self.label().replace(' ', "/")
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` lets the pool pick.
    pub workers: Option<usize>,
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub out_dir: Option<PathBuf>,
    pub report: Value,
    /// One-line human summary.
    pub summary: String,
}

struct Produced {
    result: Value,
    curves: Vec<Curve>,
    exit_code: i32,
    summary: String,
}

/// Runs a command inside a dedicated worker pool.
pub fn run(command: &Command, options: &RunOptions) -> Result<RunOutcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = options.workers {
        if w == 0 {
            return Err(LabError::config("--workers must be positive"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| LabError::Resource(format!("cannot start worker pool: {e}")))?;
    let workers = pool.current_num_threads();
    pool.install(|| run_in_pool(command, options, workers))
}

fn load_config(options: &RunOptions) -> Result<ExperimentConfig> {
    let path = options
        .config
        .as_ref()
        .ok_or_else(|| LabError::config("--config is required for this command"))?;
    let mut cfg = ExperimentConfig::load(path, &options.overrides)?;
    if let Some(s) = options.seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn run_in_pool(command: &Command, options: &RunOptions, workers: usize) -> Result<RunOutcome> {
    let started = Instant::now();
    if *command == Command::Validate {
        let cfg = load_config(options)?;
        let v = cfg.validate();
        let summary = format!(
            "{} error(s), {} warning(s)",
            v.errors.len(),
            v.warnings.len()
        );
        return Ok(RunOutcome {
            exit_code: if v.is_ok() { 0 } else { 2 },
            out_dir: None,
            report: serde_json::to_value(&v)?,
            summary,
        });
    }

    let cfg = match (command, &options.config) {
        (Command::Selftest, None) => None,
        _ => Some(load_config(options)?),
    };
    if let Some(cfg) = &cfg {
        let v = cfg.validate();
        if !v.is_ok() {
            return Err(LabError::config(v.errors.join("; ")));
        }
    }
    let master_seed = cfg
        .as_ref()
        .map_or(options.seed.unwrap_or(0), |c| c.master_seed);
    let seed = derive_seed(master_seed, &command.seed_path());

    let produced = match command {
        Command::Estimate => run_estimate(cfg.as_ref().expect("config"), seed)?,
        Command::Scan => run_scan(cfg.as_ref().expect("config"), seed)?,
        Command::Suite(name) => run_named(cfg.as_ref().expect("config"), seed, Some(name), None)?,
        Command::Gallery(name) => run_named(cfg.as_ref().expect("config"), seed, None, Some(name))?,
        Command::Monitor => run_monitor(cfg.as_ref().expect("config"), seed)?,
        Command::Selftest => run_selftest(seed)?,
        Command::Validate => unreachable!("handled above"),
    };

    let config_value = cfg.as_ref().map(ExperimentConfig::to_value);
    let report = json!({
        "command": command.label(),
        "version": VERSION,
        "master_seed": master_seed,
        "config": config_value,
        "result": produced.result,
    });
    let out_dir = options
        .out
        .clone()
        .or_else(|| {
            cfg.as_ref()
                .and_then(|c| c.output_dir.clone())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    write_artifacts(&out_dir, &report, &produced.curves)?;
    let manifest = json!({
        "command": command.label(),
        "version": VERSION,
        "config_hash": config_value.as_ref().map(config_hash),
        "master_seed": master_seed,
        "workers": workers,
        "started_unix_seconds": SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(RunOutcome {
        exit_code: produced.exit_code,
        out_dir: Some(out_dir),
        report,
        summary: produced.summary,
    })
}

/// SHA-256 of the compact JSON serialization of the effective config.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("value serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_artifacts(dir: &Path, report: &Value, curves: &[Curve]) -> Result<()> {
    let curve_dir = dir.join("curves");
    std::fs::create_dir_all(&curve_dir)
        .map_err(|e| LabError::Resource(format!("cannot create {}: {e}", curve_dir.display())))?;
    write_json(&dir.join("report.json"), report)?;
    for c in curves {
        let mut w = csv::Writer::from_path(curve_dir.join(format!("{}.csv", c.name)))?;
        w.write_record(&c.header)?;
        for row in &c.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn run_estimate(cfg: &ExperimentConfig, seed: u64) -> Result<Produced> {
    let f = cfg.build_cocycle()?;
    let e = &cfg.estimate_block();
    let eps = e
        .epsilons
        .clone()
        .unwrap_or_else(|| vec![default_epsilon(&f)]);
    let report = recurrence_estimate(&f, e.n_max, &eps, e.m, seed)?;
    let res = Resolution {
        n: e.n_max,
        epsilon: eps[0],
        threshold: e.threshold,
    };
    let verdict = report.verdict(&res)?;
    let fraction = report.near_return_fraction(e.n_max, eps[0])?;
    let summary = report.summary();
    Ok(Produced {
        result: json!({
            "resolution": res,
            "verdict": verdict,
            "near_return_fraction": fraction,
            "recurrence": report,
        }),
        curves: vec![summary.curve("fraction_vs_n")],
        exit_code: 0,
        summary: format!(
            "{} (fraction {fraction:.4} at N = {}, ε = {})",
            verdict.word(),
            e.n_max,
            eps[0]
        ),
    })
}

fn run_scan(cfg: &ExperimentConfig, seed: u64) -> Result<Produced> {
    let f = cfg.build_cocycle()?;
    let s = &cfg.scan_block();
    let grid = s.resolved_grid()?;
    let scan = drift_scan(&f, &grid, s.resolution(), s.m, seed)?;
    let flagged = scan.flagged().len();
    Ok(Produced {
        curves: vec![scan.curve("verdict_vs_c")],
        summary: format!("{flagged} of {} drifts flagged", grid.len()),
        result: serde_json::to_value(&scan)?,
        exit_code: 0,
    })
}

fn run_named(
    cfg: &ExperimentConfig,
    seed: u64,
    suite: Option<&str>,
    gallery: Option<&str>,
) -> Result<Produced> {
    let params = SuiteParams {
        seed,
        ..cfg.suite_block()
    };
    let result = match (suite, gallery) {
        (Some(name), _) => run_suite(name, &cfg.build_cocycle()?, &params)?,
        (_, Some(name)) => run_gallery(name, &params)?,
        _ => unreachable!("one of suite or gallery"),
    };
    let summary = format!(
        "{}: {:?}{}",
        result.suite,
        result.status,
        result
            .conclusion
            .as_ref()
            .map(|c| format!(", {c}"))
            .unwrap_or_default()
    );
    Ok(Produced {
        curves: result.curves.clone(),
        result: serde_json::to_value(&result)?,
        exit_code: 0,
        summary,
    })
}

/// Local-limit monitors on the τ ladder k0·2^n, n = 0..=N, plus the dyadic
/// kernel bound when a kernel block is present.
fn run_monitor(cfg: &ExperimentConfig, seed: u64) -> Result<Produced> {
    let f = cfg.build_cocycle()?;
    let mo = &cfg.monitor_block();
    let top = mo
        .k0
        .checked_shl(mo.ladder_len)
        .filter(|&t| t <= MONITOR_MAX_HORIZON)
        .ok_or_else(|| {
            LabError::config(format!(
                "monitor ladder top k0·2^N exceeds {MONITOR_MAX_HORIZON}"
            ))
        })?;
    let horizons: Vec<u64> = (1..=top).collect();
    let sigmas = sigma_family(
        &f,
        &horizons,
        mo.normalization,
        mo.m,
        derive_seed(seed, "sigma"),
    )?;
    let refs: Vec<&EmpiricalMeasure> = sigmas.iter().collect();
    let ladder_k: Vec<u64> = (0..=mo.ladder_len).map(|n| mo.k0 << n).collect();
    let taus = ladder_k
        .iter()
        .map(|&k| tau_k(&refs[..k as usize]))
        .collect::<Result<Vec<_>>>()?;
    let seq: Vec<(u64, &dyn BallMeasure)> = ladder_k
        .iter()
        .zip(&taus)
        .map(|(&k, t)| (k, t as &dyn BallMeasure))
        .collect();
    let ladder: Vec<&dyn BallMeasure> = taus.iter().map(|t| t as &dyn BallMeasure).collect();
    let g7 = monitor_ineq7_grid(&seq, mo.eta, &mo.grid)?;
    let g8 = monitor_ineq8_grid(&ladder, mo.eta, &mo.grid)?;

    let mut curves = vec![
        Curve {
            name: "ineq7".into(),
            header: ["l", "epsilon", "tail_max", "bound", "violated"]
                .map(String::from)
                .to_vec(),
            rows: g7
                .cells
                .iter()
                .map(|c| {
                    vec![
                        format!("{:?}", c.l),
                        format!("{:?}", c.epsilon),
                        format!("{:?}", c.tail_max),
                        format!("{:?}", c.bound),
                        c.violated.to_string(),
                    ]
                })
                .collect(),
        },
        Curve {
            name: "ineq8".into(),
            header: ["l", "epsilon", "partial_sum", "bound", "violated"]
                .map(String::from)
                .to_vec(),
            rows: g8
                .cells
                .iter()
                .map(|c| {
                    vec![
                        format!("{:?}", c.l),
                        format!("{:?}", c.epsilon),
                        format!("{:?}", c.partial_sum),
                        format!("{:?}", c.bound),
                        c.violated.to_string(),
                    ]
                })
                .collect(),
        },
    ];
    let mut result = json!({
        "ladder": ladder_k,
        "limsup_surrogate": "maximum over the second half of the ladder; vague limits along subsequences are not estimated",
        "ineq7": g7,
        "ineq8": g8,
        "recurrence_evidence": g8.violated_everywhere || g7.violated_everywhere,
    });

    if let Some(k) = &mo.kernel {
        let d = f.dim();
        let norm = if d == 1 {
            Normalization::One
        } else {
            Normalization::InverseDim
        };
        let ks = sigma_family(&f, &k.n_list, norm, k.m, derive_seed(seed, "kernel/sigma"))?;
        let options = BoundOptions {
            m_out: k.m_out,
            pair_budget: k.pair_budget,
            check_phi: true,
            seed: derive_seed(seed, "kernel/bound"),
        };
        let k_range: Vec<u32> = (0..=k.k_max).collect();
        let bound = match half_mass_constant(&ks) {
            Some(kc) if d == 1 => Some(theorem12_bound(&ks, kc, k.eta, &k_range, &options)?),
            Some(kc) => Some(theorem14_bound(&ks, kc, k.eta, &k_range, d, &options)?),
            None => None,
        };
        if let Some(b) = &bound {
            let mut buf = Vec::new();
            b.write_csv(&mut buf)?;
            let text = String::from_utf8(buf).expect("csv is utf-8");
            let mut lines = csv::Reader::from_reader(text.as_bytes());
            let header = lines.headers()?.iter().map(String::from).collect();
            let rows = lines
                .records()
                .map(|r| r.map(|r| r.iter().map(String::from).collect()))
                .collect::<std::result::Result<_, _>>()?;
            curves.push(Curve {
                name: "kernel_bound".into(),
                header,
                rows,
            });
        }
        result["kernel_bound"] = serde_json::to_value(&bound)?;
    }
    let summary = format!(
        "ineq7 violated everywhere: {}, ineq8 violated everywhere: {}",
        g7.violated_everywhere, g8.violated_everywhere
    );
    Ok(Produced {
        result,
        curves,
        exit_code: 0,
        summary,
    })
}

/// System/cocycle pairs exercised by the invariant battery and the shipped
/// configs.
pub fn shipped_pairs() -> Vec<(SystemSpec, CocycleSpec)> {
    let rot = SystemSpec::golden_rotation();
    let trig = BoundedFunctionSpec::TrigOfRotation {
        amplitude: 0.1,
        frequency: 1.0,
    };
    let cauchy = SystemSpec::iid(Marginal::Cauchy { scale: 1.0 });
    vec![
        (rot.clone(), CocycleSpec::constant(&[1.0])),
        (
            rot.clone(),
            CocycleSpec::new(BaseFunction::Indicator { beta: 1.0 / 3.0 }),
        ),
        (
            rot.clone(),
            CocycleSpec::new(BaseFunction::IndicatorMinusMean { beta: 0.3 }),
        ),
        (
            rot.clone(),
            CocycleSpec::new(BaseFunction::Indicator { beta: 1.0 / 3.0 })
                .with(Modifier::AddCoboundary { b: trig }),
        ),
        (
            rot.clone(),
            CocycleSpec::new(BaseFunction::Indicator { beta: 1.0 / 3.0 })
                .with(Modifier::PrecomposeStep),
        ),
        (
            rot.square(),
            CocycleSpec::new(BaseFunction::IndicatorMinusMean { beta: 0.3 })
                .with(Modifier::Symmetrize),
        ),
        (
            SystemSpec::iid(Marginal::UniformPm1),
            CocycleSpec::coordinate_read(),
        ),
        (
            SystemSpec::iid(Marginal::LatticeUniform { dim: 2 }),
            CocycleSpec::coordinate_read(),
        ),
        (
            SystemSpec::iid(Marginal::LatticeUniform { dim: 3 }),
            CocycleSpec::coordinate_read(),
        ),
        (
            SystemSpec::iid(Marginal::LatticeUniform { dim: 2 }).square(),
            CocycleSpec::coordinate_read().with(Modifier::Symmetrize),
        ),
        (cauchy.clone(), CocycleSpec::coordinate_read()),
        (
            cauchy,
            CocycleSpec::new(BaseFunction::CoordinateRead { absolute: true }),
        ),
        (
            SystemSpec::iid(Marginal::Gaussian {
                mean: vec![0.0, 0.0],
                covariance: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            }),
            CocycleSpec::coordinate_read(),
        ),
        (
            SystemSpec::MarkovShift {
                transition: vec![vec![0.5, 0.5], vec![0.25, 0.75]],
                stationary: vec![1.0 / 3.0, 2.0 / 3.0],
            },
            CocycleSpec::new(BaseFunction::LatticeStep {
                steps: vec![vec![2.0], vec![-1.0]],
            }),
        ),
        (
            SystemSpec::Odometer { base: 3 },
            CocycleSpec::new(BaseFunction::OdometerOrbit),
        ),
        (
            SystemSpec::Odometer { base: 3 },
            CocycleSpec::new(BaseFunction::OdometerOrbit).minus_drift(&[0.5]),
        ),
    ]
}

/// Checks f(m+n, x) = f(m, T^n x) + f(n, x) on `points` sampled points over
/// (m, n) ∈ [−range, range]²; returns the largest defect.  The left side and
/// f(n, x) come from `eval_sum`; f(·, T^n x) is accumulated independently by
/// walking forward and backward from T^n x.
pub fn cocycle_identity_defect(
    cocycle: &Cocycle,
    points: usize,
    range: i64,
    seed: u64,
) -> Result<f64> {
    if range < 0 {
        return Err(LabError::config("range must be nonnegative"));
    }
    let system = cocycle.system();
    let d = cocycle.dim();
    let r = range as usize;
    let mut worst: f64 = 0.0;
    for i in 0..points as u64 {
        let x = system.sample_point(sample_seed(seed, i));
        let sums: Vec<_> = (-2 * range..=2 * range)
            .map(|n| cocycle.eval_sum(&x, n))
            .collect::<Result<_>>()?;
        let at = |n: i64| &sums[(n + 2 * range) as usize];
        // y walks 0, 1, …, range and then −1, …, −range.
        let mut forward = x.clone();
        let mut backward = x.clone();
        for step in 0..=2 * range {
            let (n, y) = if step <= range {
                if step > 0 {
                    system.step_mut(&mut forward);
                }
                (step, &forward)
            } else {
                system.step_inverse_mut(&mut backward);
                (range - step, &backward)
            };
            // along[m + range] = f(m, y)
            let mut along = vec![Vector::zeros(d); 2 * r + 1];
            let mut acc = KahanSum::new(d);
            let mut p = y.clone();
            for k in 1..=r {
                acc.add(&cocycle.eval_f(&p)?);
                system.step_mut(&mut p);
                along[r + k] = acc.value();
            }
            let mut acc = KahanSum::new(d);
            let mut p = y.clone();
            for k in 1..=r {
                system.step_inverse_mut(&mut p);
                acc.add(&cocycle.eval_f(&p)?);
                along[r - k] = -acc.value();
            }
            for m in -range..=range {
                let rhs = &along[(m + range) as usize] + at(n);
                worst = worst.max((at(m + n) - &rhs).max_norm());
            }
        }
    }
    Ok(worst)
}

fn run_selftest(seed: u64) -> Result<Produced> {
    let mut checks: Vec<Check> = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };

    let mut identity_ok = true;
    let mut worst_detail = String::new();
    for (i, (s, c)) in shipped_pairs().into_iter().enumerate() {
        let label = s.label();
        let f = Cocycle::from_specs(s, c)?;
        let defect =
            cocycle_identity_defect(&f, 5, 8, derive_seed(seed, &format!("identity/{i}")))?;
        let tol = if f.is_integer_valued() { 0.0 } else { 1e-9 };
        if defect > tol {
            identity_ok = false;
            worst_detail = format!("pair {i} on {label}: defect {defect:e}");
        }
    }
    push("cocycle_identity", identity_ok, worst_detail);

    let odo = Cocycle::from_specs(
        SystemSpec::Odometer { base: 3 },
        CocycleSpec::new(BaseFunction::OdometerOrbit),
    )?;
    let mut odo_ok = true;
    for i in 0..200 {
        if let SystemPoint::Odometer(p) = odo
            .system()
            .sample_point(sample_seed(derive_seed(seed, "odometer"), i))
        {
            odo_ok &= oracle_orbit_cocycle(&p, 1 << 20)? == odometer_orbit_cocycle(&p);
        }
    }
    push(
        "odometer_closed_form",
        odo_ok,
        "200 sampled points against T′ iteration".into(),
    );

    let k1 = TriangleKernel::new(0.1, 1)?.trapezoid_integral(10_000)?;
    let k2 = TriangleKernel::new(0.1, 2)?.trapezoid_integral(2_000)?;
    push(
        "kernel_integral",
        (k1 - 1.0).abs() < 1e-9 && (k2 - 1.0).abs() < 1e-9,
        format!("d = 1: {k1:.12}, d = 2: {k2:.12}"),
    );

    let srw = Cocycle::from_specs(
        SystemSpec::iid(Marginal::UniformPm1),
        CocycleSpec::coordinate_read(),
    )?;
    let sigma = sigma_n(
        &srw,
        100,
        Normalization::Exponent(0.5),
        2_000,
        derive_seed(seed, "sigma"),
    )?;
    let etas = [0.05, 0.1, 0.5, 1.0, 2.0, 1e9];
    let masses: Vec<f64> = etas.iter().map(|&e| sigma.ball_mass(e)).collect();
    let reflected = sigma.reflect();
    push(
        "ball_mass_monotone_and_reflect",
        masses.windows(2).all(|w| w[0] <= w[1])
            && (masses[5] - sigma.total_mass()).abs() < 1e-12
            && etas
                .iter()
                .all(|&e| reflected.ball_mass(e) == sigma.ball_mass(e))
            && reflected.reflect().samples() == sigma.samples(),
        format!("masses {masses:?}"),
    );

    let res = Resolution {
        n: 2_000,
        epsilon: 0.5,
        threshold: 0.9,
    };
    let est_seed = derive_seed(seed, "estimate");
    let scan = drift_scan(
        &srw,
        &[vec![-0.1], vec![0.0], vec![0.1]],
        res,
        200,
        est_seed,
    )?;
    let est = recurrence_estimate(&srw, 2_000, &[0.5], 200, est_seed)?;
    let est_again = recurrence_estimate(&srw, 2_000, &[0.5], 200, est_seed)?;
    push(
        "scan_zero_cell_matches_estimate",
        scan.cells[1].summary == est.summary(),
        String::new(),
    );
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| LabError::Resource(e.to_string()))?
        .install(|| recurrence_estimate(&srw, 2_000, &[0.5], 200, est_seed))?;
    push(
        "deterministic",
        est == est_again && est == single,
        "repeat and single-worker runs".into(),
    );

    let long = recurrence_estimate(&srw, 10_000, &[0.5], 300, derive_seed(seed, "srw"))?;
    let p = long.near_return_fraction(10_000, 0.5)?;
    push(
        "srw_returns",
        p >= 0.9,
        format!("return-by-10^4 fraction {p:.4} at m = 300"),
    );

    let drift = Cocycle::from_specs(SystemSpec::golden_rotation(), CocycleSpec::constant(&[1.0]))?;
    let t3 = suite_theorem3(
        &drift,
        &SuiteParams {
            n_max: Some(1_000),
            m: Some(100),
            m_measure: 200,
            seed: derive_seed(seed, "theorem3"),
            ..SuiteParams::default()
        },
    )?;
    push(
        "theorem3_pure_drift",
        t3.status == SuiteStatus::Consistent && t3.conclusion.as_deref() == Some("transient"),
        format!("{:?} {:?}", t3.status, t3.conclusion),
    );

    let grid = MonitorGrid::default();
    let zero = EmpiricalMeasure::point_mass(crate::vector::Vector::scalar(0.0));
    let one = EmpiricalMeasure::point_mass(crate::vector::Vector::scalar(1.0));
    let zl: Vec<&dyn BallMeasure> = (0..=10).map(|_| &zero as &dyn BallMeasure).collect();
    let ol: Vec<&dyn BallMeasure> = (0..=10).map(|_| &one as &dyn BallMeasure).collect();
    let oseq: Vec<(u64, &dyn BallMeasure)> = (0..=10)
        .map(|n| (1u64 << n, &one as &dyn BallMeasure))
        .collect();
    let z8 = monitor_ineq8_grid(&zl, 0.1, &grid)?;
    let o8 = monitor_ineq8_grid(&ol, 0.5, &grid)?;
    let o7 = monitor_ineq7_grid(&oseq, 0.5, &grid)?;
    push(
        "monitors",
        z8.violated_everywhere && o8.respected_everywhere && o7.respected_everywhere,
        String::new(),
    );

    let sym = Cocycle::from_specs(
        SystemSpec::golden_rotation().square(),
        CocycleSpec::new(BaseFunction::IndicatorMinusMean { beta: 0.3 }).with(Modifier::Symmetrize),
    )?;
    let mut diag_ok = true;
    for i in 0..20 {
        let x = sym
            .system()
            .components()
            .expect("product")
            .0
            .sample_point(sample_seed(seed, i));
        let pair = SystemPoint::pair(x.clone(), x);
        diag_ok &= sym.eval_sum(&pair, 500)?.max_norm() == 0.0;
    }
    push("symmetrized_diagonal", diag_ok, String::new());

    let all = checks.iter().all(|c| c.passed);
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    Ok(Produced {
        summary: if all {
            format!("all {} checks passed", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
        result: json!({"checks": checks, "all_pass": all}),
        curves: Vec::new(),
        exit_code: if all { 0 } else { 1 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_labels() {
        assert_eq!(
            Command::Suite("theorem3".into()).seed_path(),
            "suite/theorem3"
        );
        assert_eq!(Command::Monitor.label(), "monitor");
    }

    #[test]
    fn hash_is_stable() {
        let v = json!({"a": 1});
        assert_eq!(config_hash(&v), config_hash(&v.clone()));
        assert_eq!(config_hash(&v).len(), 64);
    }

    #[test]
    fn identity_defect_is_zero_for_integer_walk() {
        let f = Cocycle::from_specs(
            SystemSpec::iid(Marginal::UniformPm1),
            CocycleSpec::coordinate_read(),
        )
        .unwrap();
        assert_eq!(cocycle_identity_defect(&f, 3, 5, 1).unwrap(), 0.0);
    }
}
