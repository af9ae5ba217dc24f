//! Recurrence estimation at a declared resolution, drift scans over candidate
//! recurrence sets, and the theorem suites.
//!
//! "Recurrent at resolution (N, ε, threshold)" means that at least a
//! `threshold` fraction of sampled orbits reach ‖f(n, x)‖ < ε for some
//! 1 ≤ n ≤ N.  It is the only recurrence verdict this module ever issues.
//! Suites compare such verdicts with what a theorem predicts and report
//! "hypothesis unmet", "consistent" or "inconsistent at stated power"; they
//! never claim a theorem is false.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cocycle::{BaseFunction, BoundedFunctionSpec, Cocycle, CocycleSpec, Modifier};
use crate::empirics::{
    sigma_family, tightness_check, EmpiricalMeasure, Normalization, TightnessReport,
};
use crate::error::{LabError, Result};
use crate::kernels::{
    half_mass_constant, theorem12_bound, theorem14_bound, BoundOptions, BoundReport, SE_GUARD,
};
use crate::rng::{derive_seed, sample_seed};
use crate::stats::{ks_p_value, ks_statistic, mean, median, normal_cdf, proportion_se, variance};
use crate::systems::{Marginal, System, SystemSpec};
use crate::vector::{KahanSum, Vector};

pub const DEFAULT_THRESHOLD: f64 = 0.95;
pub const DEFAULT_HORIZON: u64 = 100_000;
pub const MIN_SAMPLES: usize = 100;

/// ε = 0.5 detects exact returns of integer-valued sums; 0.05 otherwise.
pub fn default_epsilon(cocycle: &Cocycle) -> f64 {
    if cocycle.is_integer_valued() {
        0.5
    } else {
        0.05
    }
}

/// Powers of two below `n_max`, then `n_max`.
pub fn checkpoint_horizons(n_max: u64) -> Vec<u64> {
    let mut h: Vec<u64> = (0..64)
        .map(|i| 1u64 << i)
        .take_while(|&p| p < n_max)
        .collect();
    h.push(n_max);
    h
}

/// Evenly spaced scalar drifts lo, lo + step, …, hi, rounded to 12 decimals
/// so that grid labels are the decimal values they look like.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<Vec<f64>>> {
    if !(step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(LabError::config("grid needs lo ≤ hi and a positive step"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(LabError::config("grid has more than 10^5 cells"));
    }
    Ok((0..=count)
        .map(|i| vec![((lo + i as f64 * step) * 1e12).round() / 1e12])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n: u64,
    pub epsilon: f64,
    pub threshold: f64,
}

impl Resolution {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::config("horizon N must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(LabError::config("ε must be positive"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(LabError::config("threshold must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceVerdict {
    RecurrentAtResolution,
    NotFlagged,
}

impl RecurrenceVerdict {
    pub fn is_flagged(self) -> bool {
        self == RecurrenceVerdict::RecurrentAtResolution
    }

    /// "recurrent" or "transient", the wording used in suite conclusions.
    pub fn word(self) -> &'static str {
        if self.is_flagged() {
            "recurrent"
        } else {
            "transient"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub horizons: Vec<u64>,
    pub epsilons: Vec<f64>,
    pub sample_count: usize,
    pub seed: u64,
    /// min_{1≤n≤N} ‖f(n, x_i)‖, one row per sample, one column per horizon.
    pub min_norms: Vec<Vec<f64>>,
    /// One row per ε: the first n with ‖f(n, x_i)‖ < ε for each sample.
    pub first_near_return_times: Vec<Vec<Option<u64>>>,
}

impl RecurrenceReport {
    pub fn n_max(&self) -> u64 {
        *self.horizons.last().expect("horizons are nonempty")
    }

    /// Fraction of samples with min_{n ≤ N} ‖f(n, x)‖ < ε.  ε must be one of
    /// the recorded ε values, or N one of the checkpoint horizons.
    pub fn near_return_fraction(&self, n: u64, eps: f64) -> Result<f64> {
        if n > self.n_max() {
            return Err(LabError::InsufficientData(format!(
                "horizon {n} beyond the simulated {}",
                self.n_max()
            )));
        }
        let m = self.sample_count as f64;
        if let Some(j) = self.epsilons.iter().position(|&e| e == eps) {
            let hits = self.first_near_return_times[j]
                .iter()
                .filter(|t| t.is_some_and(|t| t <= n))
                .count();
            return Ok(hits as f64 / m);
        }
        if let Some(h) = self.horizons.iter().position(|&hn| hn == n) {
            let hits = self.min_norms.iter().filter(|row| row[h] < eps).count();
            return Ok(hits as f64 / m);
        }
        Err(LabError::config(format!(
            "ε = {eps} was not recorded and N = {n} is not a checkpoint"
        )))
    }

    pub fn standard_error(&self, n: u64, eps: f64) -> Result<f64> {
        Ok(proportion_se(
            self.near_return_fraction(n, eps)?,
            self.sample_count,
        ))
    }

    pub fn verdict(&self, resolution: &Resolution) -> Result<RecurrenceVerdict> {
        let p = self.near_return_fraction(resolution.n, resolution.epsilon)?;
        Ok(if p >= resolution.threshold {
            RecurrenceVerdict::RecurrentAtResolution
        } else {
            RecurrenceVerdict::NotFlagged
        })
    }

    pub fn summary(&self) -> RecurrenceSummary {
        let fractions = self
            .epsilons
            .iter()
            .map(|&e| {
                self.horizons
                    .iter()
                    .map(|&n| self.near_return_fraction(n, e).expect("recorded ε"))
                    .collect()
            })
            .collect();
        RecurrenceSummary {
            horizons: self.horizons.clone(),
            epsilons: self.epsilons.clone(),
            sample_count: self.sample_count,
            seed: self.seed,
            fractions,
        }
    }
}

/// Near-return fractions without the per-sample statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceSummary {
    pub horizons: Vec<u64>,
    pub epsilons: Vec<f64>,
    pub sample_count: usize,
    pub seed: u64,
    /// One row per ε, one column per horizon.
    pub fractions: Vec<Vec<f64>>,
}

impl RecurrenceSummary {
    pub fn curve(&self, name: &str) -> Curve {
        let mut rows = Vec::new();
        for (e, row) in self.epsilons.iter().zip(&self.fractions) {
            for (n, p) in self.horizons.iter().zip(row) {
                rows.push(vec![
                    n.to_string(),
                    format!("{e:?}"),
                    format!("{p:?}"),
                    format!("{:?}", proportion_se(*p, self.sample_count)),
                ]);
            }
        }
        Curve {
            name: name.to_string(),
            header: vec!["n".into(), "epsilon".into(), "fraction".into(), "se".into()],
            rows,
        }
    }
}

struct Track {
    acc: KahanSum,
    min: f64,
    mins: Vec<f64>,
    first: Vec<Option<u64>>,
}

/// Streams each sampled orbit once and tracks f(n, x) − n·c for every drift c.
/// The accumulation order matches evaluating the cocycle with a
/// `subtract_drift` modifier, so results agree bit for bit.
fn orbit_scan(
    cocycle: &Cocycle,
    drifts: &[Vector],
    n_max: u64,
    eps: &[f64],
    m: usize,
    seed: u64,
) -> Result<Vec<RecurrenceReport>> {
    if m < MIN_SAMPLES {
        return Err(LabError::config(format!(
            "at least {MIN_SAMPLES} samples are required"
        )));
    }
    if n_max == 0 {
        return Err(LabError::config("horizon N must be positive"));
    }
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(LabError::config("ε values must be positive"));
    }
    let d = cocycle.dim();
    if drifts.iter().any(|c| c.dim() != d) {
        return Err(LabError::config(
            "drift dimension does not match the cocycle",
        ));
    }
    let horizons = checkpoint_horizons(n_max);
    let system = cocycle.system();

    let per_sample: Vec<Vec<Track>> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut x = system.sample_point(sample_seed(seed, i));
            cocycle.check_orbit(&x, n_max)?;
            let mut tracks: Vec<Track> = drifts
                .iter()
                .map(|_| Track {
                    acc: KahanSum::new(d),
                    min: f64::INFINITY,
                    mins: Vec::with_capacity(horizons.len()),
                    first: vec![None; eps.len()],
                })
                .collect();
            let mut next_h = 0;
            for n in 1..=n_max {
                let v = cocycle.eval_unchecked(&x);
                system.step_mut(&mut x);
                let checkpoint = horizons[next_h] == n;
                for (t, c) in tracks.iter_mut().zip(drifts) {
                    t.acc.add(&(&v - c));
                    let norm = t.acc.value().max_norm();
                    if norm < t.min {
                        t.min = norm;
                    }
                    for (slot, &e) in t.first.iter_mut().zip(eps) {
                        if slot.is_none() && norm < e {
                            *slot = Some(n);
                        }
                    }
                    if checkpoint {
                        t.mins.push(t.min);
                    }
                }
                if checkpoint {
                    next_h += 1;
                }
            }
            Ok(tracks)
        })
        .collect::<Result<_>>()?;

    let mut reports: Vec<RecurrenceReport> = drifts
        .iter()
        .map(|_| RecurrenceReport {
            horizons: horizons.clone(),
            epsilons: eps.to_vec(),
            sample_count: m,
            seed,
            min_norms: Vec::with_capacity(m),
            first_near_return_times: vec![Vec::with_capacity(m); eps.len()],
        })
        .collect();
    for tracks in per_sample {
        for (r, t) in reports.iter_mut().zip(tracks) {
            r.min_norms.push(t.mins);
            for (row, f) in r.first_near_return_times.iter_mut().zip(t.first) {
                row.push(f);
            }
        }
    }
    Ok(reports)
}

/// Runs `m` orbits of length `n_max` from x_i ~ μ drawn with per-sample seeds
/// derived from `seed`.
pub fn recurrence_estimate(
    cocycle: &Cocycle,
    n_max: u64,
    eps_list: &[f64],
    m: usize,
    seed: u64,
) -> Result<RecurrenceReport> {
    let zero = Vector::zeros(cocycle.dim());
    orbit_scan(cocycle, &[zero], n_max, eps_list, m, seed).map(|mut v| v.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftCell {
    pub c: Vec<f64>,
    pub fraction: f64,
    pub standard_error: f64,
    pub verdict: RecurrenceVerdict,
    pub summary: RecurrenceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftScanReport {
    pub resolution: Resolution,
    pub sample_count: usize,
    pub seed: u64,
    /// Per-coordinate [min, max] of the grid.
    pub bounding_box: Vec<[f64; 2]>,
    pub cells: Vec<DriftCell>,
}

impl DriftScanReport {
    pub fn flagged(&self) -> Vec<&[f64]> {
        self.cells
            .iter()
            .filter(|c| c.verdict.is_flagged())
            .map(|c| c.c.as_slice())
            .collect()
    }

    pub fn verdicts(&self) -> Vec<RecurrenceVerdict> {
        self.cells.iter().map(|c| c.verdict).collect()
    }

    pub fn curve(&self, name: &str) -> Curve {
        let d = self.bounding_box.len();
        let mut header: Vec<String> = (1..=d).map(|i| format!("c{i}")).collect();
        header.extend(["fraction", "se", "verdict"].map(String::from));
        let rows = self
            .cells
            .iter()
            .map(|cell| {
                let mut row: Vec<String> = cell.c.iter().map(|v| format!("{v:?}")).collect();
                row.push(format!("{:?}", cell.fraction));
                row.push(format!("{:?}", cell.standard_error));
                row.push(cell.verdict.word().to_string());
                row
            })
            .collect();
        Curve {
            name: name.to_string(),
            header,
            rows,
        }
    }
}

/// For every c in `grid`, the recurrence estimate of f − c at `resolution`.
/// All cells share the same sample points (common random numbers), so the
/// c = 0 cell coincides with [`recurrence_estimate`] at the same seed.
pub fn drift_scan(
    cocycle: &Cocycle,
    grid: &[Vec<f64>],
    resolution: Resolution,
    m: usize,
    seed: u64,
) -> Result<DriftScanReport> {
    resolution.validate()?;
    if grid.is_empty() {
        return Err(LabError::config("drift grid is empty"));
    }
    if grid.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LabError::config("drift grid must be finite"));
    }
    let d = cocycle.dim();
    let drifts: Vec<Vector> = grid.iter().map(|c| Vector::from_slice(c)).collect();
    let reports = orbit_scan(
        cocycle,
        &drifts,
        resolution.n,
        &[resolution.epsilon],
        m,
        seed,
    )?;
    let bounding_box = (0..d)
        .map(|i| {
            let vals = grid.iter().filter_map(|c| c.get(i).copied());
            let lo = vals.clone().fold(f64::INFINITY, f64::min);
            let hi = vals.fold(f64::NEG_INFINITY, f64::max);
            [lo, hi]
        })
        .collect();
    let cells = grid
        .iter()
        .zip(reports)
        .map(|(c, r)| {
            let fraction = r.near_return_fraction(resolution.n, resolution.epsilon)?;
            Ok(DriftCell {
                c: c.clone(),
                fraction,
                standard_error: proportion_se(fraction, m),
                verdict: r.verdict(&resolution)?,
                summary: r.summary(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(DriftScanReport {
        resolution,
        sample_count: m,
        seed,
        bounding_box,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianDriftReport {
    pub n_list: Vec<u64>,
    /// median of f(n, ·)/n.
    pub medians: Vec<f64>,
    /// a_n = −median(f(n, ·))/n.
    pub a_n: Vec<f64>,
    /// Median of a_n over the upper half of `n_list`.
    pub t: f64,
    /// sup_n |a_n − t|.
    pub sup_deviation: f64,
    /// −t, the drift handed to a scan.
    pub candidate_drift: f64,
}

/// Median centering of f(n, ·)/n for d = 1.
pub fn median_drift_estimate(
    cocycle: &Cocycle,
    n_list: &[u64],
    m: usize,
    seed: u64,
) -> Result<MedianDriftReport> {
    if cocycle.dim() != 1 {
        return Err(LabError::Unsupported(
            "median drift estimate needs d = 1".into(),
        ));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::config(
            "n list must be strictly increasing and nonempty",
        ));
    }
    let sigmas = sigma_family(cocycle, n_list, Normalization::One, m, seed)?;
    let medians: Vec<f64> = sigmas
        .iter()
        .map(|s| median(&s.samples().iter().map(|v| v[0]).collect::<Vec<_>>()))
        .collect();
    let a_n: Vec<f64> = medians.iter().map(|v| -v).collect();
    let t = median(&a_n[a_n.len() / 2..]);
    let sup_deviation = a_n.iter().map(|a| (a - t).abs()).fold(0.0, f64::max);
    Ok(MedianDriftReport {
        n_list: n_list.to_vec(),
        medians,
        a_n,
        t,
        sup_deviation,
        candidate_drift: -t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteStatus {
    HypothesisUnmet,
    Consistent,
    InconsistentAtStatedPower,
}

impl SuiteStatus {
    fn from_checks(hypothesis: &[Check], conclusion: &[Check]) -> Self {
        if !hypothesis.iter().all(|c| c.passed) {
            SuiteStatus::HypothesisUnmet
        } else if conclusion.iter().all(|c| c.passed) {
            SuiteStatus::Consistent
        } else {
            SuiteStatus::InconsistentAtStatedPower
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail: detail.into(),
    }
}

/// A table meant for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub status: SuiteStatus,
    pub conclusion: Option<String>,
    pub resolution: Option<Resolution>,
    pub hypothesis_checks: Vec<Check>,
    pub conclusion_checks: Vec<Check>,
    pub reports: BTreeMap<String, Value>,
    #[serde(skip)]
    pub curves: Vec<Curve>,
}

impl SuiteResult {
    fn new(suite: &str) -> Self {
        SuiteResult {
            suite: suite.to_string(),
            status: SuiteStatus::Consistent,
            conclusion: None,
            resolution: None,
            hypothesis_checks: Vec::new(),
            conclusion_checks: Vec::new(),
            reports: BTreeMap::new(),
            curves: Vec::new(),
        }
    }

    fn attach<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        self.reports
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    fn finish(mut self) -> Self {
        self.status = SuiteStatus::from_checks(&self.hypothesis_checks, &self.conclusion_checks);
        self
    }

    pub fn inconsistent(&self) -> bool {
        self.status == SuiteStatus::InconsistentAtStatedPower
    }
}

/// Knobs shared by the suites.  Unset options fall back to per-suite defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteParams {
    pub n_max: Option<u64>,
    pub epsilon: Option<f64>,
    pub threshold: Option<f64>,
    /// Orbits per recurrence estimate.
    pub m: Option<usize>,
    /// Samples per empirical measure.
    pub m_measure: usize,
    /// Horizons of the empirical measures.
    pub n_list: Vec<u64>,
    pub tightness_k: Vec<f64>,
    pub tightness_eps: Vec<f64>,
    /// Explicit drift grid; scans default to a suite-specific grid.
    pub drift_grid: Option<Vec<Vec<f64>>>,
    pub grid_step: f64,
    pub eta: f64,
    pub k_max: Option<u32>,
    pub m_out: usize,
    pub pair_budget: usize,
    /// Run the Z³ lattice negative control next to the two-dimensional check.
    pub companion: bool,
    pub coboundary: Option<BoundedFunctionSpec>,
    /// Also compare f with f∘T.
    pub compare_precompose: bool,
    /// Integral of the rotation indicator in the gallery.
    pub beta: f64,
    pub seed: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            n_max: None,
            epsilon: None,
            threshold: None,
            m: None,
            m_measure: 2_000,
            n_list: vec![100, 1_000, 10_000],
            tightness_k: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            tightness_eps: vec![0.5, 0.25, 0.1],
            drift_grid: None,
            grid_step: 0.05,
            eta: 0.5,
            k_max: None,
            m_out: 10_000,
            pair_budget: crate::kernels::DEFAULT_PAIR_BUDGET,
            companion: true,
            coboundary: None,
            compare_precompose: true,
            beta: 1.0 / 3.0,
            seed: 0,
        }
    }
}

impl SuiteParams {
    fn resolution(&self, cocycle: &Cocycle, n_default: u64, threshold_default: f64) -> Resolution {
        Resolution {
            n: self.n_max.unwrap_or(n_default),
            epsilon: self.epsilon.unwrap_or_else(|| default_epsilon(cocycle)),
            threshold: self.threshold.unwrap_or(threshold_default),
        }
    }

    fn scan_resolution(&self, n_default: u64, eps_default: f64) -> Resolution {
        Resolution {
            n: self.n_max.unwrap_or(n_default),
            epsilon: self.epsilon.unwrap_or(eps_default),
            threshold: self.threshold.unwrap_or(DEFAULT_THRESHOLD),
        }
    }

    fn samples(&self, default: usize) -> usize {
        self.m.unwrap_or(default)
    }

    fn sub_seed(&self, path: &str) -> u64 {
        derive_seed(self.seed, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty()
            || self.n_list.windows(2).any(|w| w[1] <= w[0])
            || self.n_list[0] == 0
        {
            return Err(LabError::config(
                "suite.n_list must be positive and strictly increasing",
            ));
        }
        if self.tightness_k.iter().any(|k| !(*k > 0.0))
            || self.tightness_eps.iter().any(|e| !(*e > 0.0 && *e < 1.0))
        {
            return Err(LabError::config(
                "tightness grid needs K > 0 and ε in (0, 1)",
            ));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(LabError::config("suite.eta must lie in (0, 1]"));
        }
        if !(self.grid_step > 0.0) {
            return Err(LabError::config("suite.grid_step must be positive"));
        }
        if self.m_measure == 0 || self.m_out == 0 {
            return Err(LabError::config("sample counts must be positive"));
        }
        Ok(())
    }
}

/// Passes with the first (ε, K) cell, strongest ε first, smallest K first,
/// for which every measure holds mass > ε in the closed K-ball.
fn tightness_on_grid(
    measures: &[EmpiricalMeasure],
    params: &SuiteParams,
) -> Result<(Check, Vec<TightnessReport>)> {
    let mut eps = params.tightness_eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    let mut ks = params.tightness_k.clone();
    ks.sort_by(f64::total_cmp);
    let mut tried = Vec::new();
    for &e in &eps {
        for &k in &ks {
            let r = tightness_check(measures, k, e)?;
            let pass = r.pass;
            tried.push(r);
            if pass {
                let detail = format!("mass > {e} within K = {k} at every horizon");
                return Ok((check("uniform_tightness", true, detail), tried));
            }
        }
    }
    let worst = tried
        .iter()
        .map(|r| r.worst_mass)
        .fold(f64::INFINITY, f64::min);
    Ok((
        check(
            "uniform_tightness",
            false,
            format!("no (K, ε) cell of the grid holds; smallest worst mass {worst:.4}"),
        ),
        tried,
    ))
}

fn verdict_check(
    name: &str,
    report: &RecurrenceReport,
    res: &Resolution,
    expect: RecurrenceVerdict,
) -> Result<(Check, RecurrenceVerdict)> {
    let p = report.near_return_fraction(res.n, res.epsilon)?;
    let v = report.verdict(res)?;
    Ok((
        check(
            name,
            v == expect,
            format!(
                "near-return fraction {p:.4} (SE {:.4}) at N = {}, ε = {}, threshold {}; expected {}",
                proportion_se(p, report.sample_count),
                res.n,
                res.epsilon,
                res.threshold,
                expect.word()
            ),
        ),
        v,
    ))
}

/// Integrable f in d = 1: recurrent iff ∫ f dμ = 0.
pub fn suite_theorem3(cocycle: &Cocycle, params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("theorem3");
    let res = params.resolution(cocycle, DEFAULT_HORIZON, DEFAULT_THRESHOLD);
    out.resolution = Some(res);
    out.hypothesis_checks.push(check(
        "dimension_one",
        cocycle.dim() == 1,
        format!("d = {}", cocycle.dim()),
    ));
    if cocycle.dim() != 1 {
        return Ok(out.finish());
    }
    let sigma1 = sigma_family(
        cocycle,
        &[1],
        Normalization::One,
        params.m_measure,
        params.sub_seed("theorem3/integral"),
    )?;
    let values: Vec<f64> = sigma1[0].samples().iter().map(|v| v[0]).collect();
    let mu = mean(&values);
    let se = if values.len() > 1 {
        (variance(&values) / values.len() as f64).sqrt()
    } else {
        0.0
    };
    let zero_mean = mu.abs() <= (SE_GUARD * se).max(1e-12);
    out.hypothesis_checks.push(check(
        "integral_finite",
        mu.is_finite() && se.is_finite(),
        format!("Monte Carlo ∫ f dμ = {mu:.6} ± {se:.6}"),
    ));
    out.attach(
        "integral",
        &serde_json::json!({"mean": mu, "se": se, "zero_mean": zero_mean}),
    )?;

    let report = recurrence_estimate(
        cocycle,
        res.n,
        &[res.epsilon],
        params.samples(500),
        params.sub_seed("theorem3/estimate"),
    )?;
    let expect = if zero_mean {
        RecurrenceVerdict::RecurrentAtResolution
    } else {
        RecurrenceVerdict::NotFlagged
    };
    let name = if zero_mean {
        "zero_mean_implies_recurrent"
    } else {
        "nonzero_mean_implies_transient"
    };
    let (c, v) = verdict_check(name, &report, &res, expect)?;
    out.conclusion_checks.push(c);
    out.conclusion = Some(v.word().to_string());
    let summary = report.summary();
    out.curves.push(summary.curve("theorem3_fraction"));
    out.attach("recurrence", &summary)?;
    Ok(out.finish())
}

/// f(n, ·)/n → 0 in measure implies recurrence.
pub fn suite_theorem4(cocycle: &Cocycle, params: &SuiteParams) -> Result<SuiteResult> {
    const LEVEL: f64 = 0.05;
    let mut out = SuiteResult::new("theorem4");
    let res = params.resolution(cocycle, DEFAULT_HORIZON, DEFAULT_THRESHOLD);
    out.resolution = Some(res);
    let sigmas = sigma_family(
        cocycle,
        &params.n_list,
        Normalization::One,
        params.m_measure,
        params.sub_seed("theorem4/sigma"),
    )?;
    let masses: Vec<f64> = sigmas
        .iter()
        .map(|s| 1.0 - s.closed_ball_mass(LEVEL))
        .collect();
    let se: Vec<f64> = masses
        .iter()
        .map(|&p| proportion_se(p, params.m_measure))
        .collect();
    let decreasing = masses
        .windows(2)
        .zip(se.windows(2))
        .all(|(p, s)| p[1] <= p[0] + SE_GUARD * s[0].hypot(s[1]));
    let last = *masses.last().expect("nonempty n list");
    out.hypothesis_checks.push(check(
        "weak_law",
        decreasing && last < LEVEL,
        format!(
            "mass of |f(n,·)/n| > {LEVEL} along n = {:?}: {masses:?}",
            params.n_list
        ),
    ));
    out.attach(
        "wlln_masses",
        &serde_json::json!({"n": params.n_list, "mass": masses, "se": se}),
    )?;

    let report = recurrence_estimate(
        cocycle,
        res.n,
        &[res.epsilon],
        params.samples(500),
        params.sub_seed("theorem4/estimate"),
    )?;
    let (c, v) = verdict_check(
        "recurrent",
        &report,
        &res,
        RecurrenceVerdict::RecurrentAtResolution,
    )?;
    out.conclusion_checks.push(c);
    out.conclusion = Some(v.word().to_string());
    let summary = report.summary();
    out.curves.push(summary.curve("theorem4_fraction"));
    out.attach("recurrence", &summary)?;
    Ok(out.finish())
}

fn local_grid(center: f64, step: f64) -> Vec<Vec<f64>> {
    (-2..=2)
        .map(|j| vec![((center + f64::from(j) * step) * 1e12).round() / 1e12])
        .collect()
}

/// Tight unnormalized sums imply a nonempty recurrence set.
pub fn suite_theorem9(cocycle: &Cocycle, params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("theorem9");
    out.hypothesis_checks.push(check(
        "dimension_one",
        cocycle.dim() == 1,
        format!("d = {}", cocycle.dim()),
    ));
    if cocycle.dim() != 1 {
        return Ok(out.finish());
    }
    let sigmas = sigma_family(
        cocycle,
        &params.n_list,
        Normalization::Exponent(0.0),
        params.m_measure,
        params.sub_seed("theorem9/sigma"),
    )?;
    let (tight, tried) = tightness_on_grid(&sigmas, params)?;
    out.hypothesis_checks.push(tight);
    out.attach("tightness", &tried)?;
    let res = params.scan_resolution(DEFAULT_HORIZON, 0.05);
    out.resolution = Some(res);
    if !out.hypothesis_checks.iter().all(|c| c.passed) {
        return Ok(out.finish());
    }
    let centering = median_drift_estimate(
        cocycle,
        &params.n_list,
        params.m_measure,
        params.sub_seed("theorem9/median"),
    )?;
    let grid = params
        .drift_grid
        .clone()
        .unwrap_or_else(|| local_grid(centering.candidate_drift, params.grid_step));
    let scan = drift_scan(
        cocycle,
        &grid,
        res,
        params.samples(300),
        params.sub_seed("theorem9/scan"),
    )?;
    let flagged = scan.flagged().len();
    out.conclusion_checks.push(check(
        "recurrence_set_nonempty",
        flagged > 0,
        format!(
            "{flagged} of {} drifts flagged around candidate {:.6}",
            grid.len(),
            centering.candidate_drift
        ),
    ));
    out.conclusion = Some(
        if flagged > 0 {
            "recurrent"
        } else {
            "transient"
        }
        .to_string(),
    );
    out.curves.push(scan.curve("theorem9_scan"));
    out.attach("median_drift", &centering)?;
    out.attach("scan", &scan)?;
    Ok(out.finish())
}

fn lattice_companion(dim: usize) -> Result<Cocycle> {
    Cocycle::from_specs(
        SystemSpec::iid(Marginal::LatticeUniform { dim }),
        CocycleSpec::coordinate_read(),
    )
}

/// Two-dimensional CLT scaling implies recurrence, with a Z³ lattice negative
/// control reported alongside.
pub fn suite_theorem10(cocycle: &Cocycle, params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("theorem10");
    let d = cocycle.dim();
    out.hypothesis_checks
        .push(check("dimension_two", d == 2, format!("d = {d}")));
    // Z² returns by N = 10^5 only about 78% of the time; 0.95 is out of reach.
    let res = params.resolution(cocycle, DEFAULT_HORIZON, 0.7);
    out.resolution = Some(res);
    if d != 2 {
        return Ok(out.finish());
    }
    let n_ks = *params.n_list.last().expect("nonempty n list");
    let sigma = sigma_family(
        cocycle,
        &[n_ks],
        Normalization::Exponent(0.5),
        params.m_measure,
        params.sub_seed("theorem10/sigma"),
    )?
    .remove(0);
    let mut ks_rows = Vec::new();
    let mut all_ok = true;
    for i in 0..d {
        let xs: Vec<f64> = sigma.samples().iter().map(|v| v[i]).collect();
        let (mu, sd) = (mean(&xs), variance(&xs).sqrt());
        let stat = ks_statistic(&xs, |x| normal_cdf(x, mu, sd));
        let p = ks_p_value(stat, xs.len());
        all_ok &= sd > 0.0 && p >= 0.01 / d as f64;
        ks_rows.push(
            serde_json::json!({"coordinate": i, "mean": mu, "sd": sd, "ks": stat, "p_value": p}),
        );
    }
    out.hypothesis_checks.push(check(
        "gaussian_limit",
        all_ok,
        format!("coordinate KS against fitted normals at n = {n_ks}, Bonferroni level 0.01"),
    ));
    out.attach("gaussian_fit", &ks_rows)?;

    let m = params.samples(1_000);
    let main = recurrence_estimate(
        cocycle,
        res.n,
        &[res.epsilon],
        m,
        params.sub_seed("theorem10/estimate"),
    )?;
    let (c, v) = verdict_check(
        "recurrent",
        &main,
        &res,
        RecurrenceVerdict::RecurrentAtResolution,
    )?;
    out.conclusion_checks.push(c);
    out.conclusion = Some(v.word().to_string());
    let summary = main.summary();
    out.curves.push(summary.curve("theorem10_fraction"));
    out.attach("recurrence", &summary)?;

    if params.companion {
        let z3 = lattice_companion(3)?;
        let comp = recurrence_estimate(
            &z3,
            res.n,
            &[0.5],
            m,
            params.sub_seed("theorem10/companion"),
        )?;
        let p2 = main.near_return_fraction(res.n, res.epsilon)?;
        let p3 = comp.near_return_fraction(res.n, 0.5)?;
        let se = proportion_se(p2, m).hypot(proportion_se(p3, m));
        out.conclusion_checks.push(check(
            "z3_contrast",
            p2 - p3 - SE_GUARD * se >= 0.3,
            format!("fraction {p2:.4} against the Z³ lattice walk's {p3:.4}; separation must exceed 0.3 after a 3-SE guard"),
        ));
        let cs = comp.summary();
        out.curves.push(cs.curve("theorem10_z3_fraction"));
        out.attach("z3_companion", &cs)?;
    }
    Ok(out.finish())
}

fn kernel_options(params: &SuiteParams, path: &str) -> BoundOptions {
    BoundOptions {
        m_out: params.m_out,
        pair_budget: params.pair_budget,
        check_phi: true,
        seed: params.sub_seed(path),
    }
}

fn bound_check(name: &str, r: &BoundReport) -> Check {
    let failing = r
        .rows
        .iter()
        .filter(|row| row.verdict != crate::kernels::Verdict::Pass)
        .count();
    check(
        name,
        r.all_pass,
        format!(
            "{:?} with K = {:.4}, η = {}; {failing} of {} rows below floor",
            r.status,
            r.k_constant,
            r.eta,
            r.rows.len()
        ),
    )
}

/// Tight f(n, ·)/n implies the symmetrized cocycle is recurrent; conversely a
/// scan around the median centering should flag a drift of f.
pub fn suite_theorem12(cocycle: &Cocycle, params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("theorem12");
    out.hypothesis_checks.push(check(
        "dimension_one",
        cocycle.dim() == 1,
        format!("d = {}", cocycle.dim()),
    ));
    if cocycle.dim() != 1 {
        return Ok(out.finish());
    }
    let sigmas = sigma_family(
        cocycle,
        &params.n_list,
        Normalization::One,
        params.m_measure,
        params.sub_seed("theorem12/sigma"),
    )?;
    let (tight, tried) = tightness_on_grid(&sigmas, params)?;
    out.hypothesis_checks.push(tight);
    out.attach("tightness", &tried)?;

    let tilde = cocycle.symmetrized()?;
    let res = params.resolution(&tilde, DEFAULT_HORIZON, DEFAULT_THRESHOLD);
    out.resolution = Some(res);
    let m = params.samples(500);
    let report = recurrence_estimate(
        &tilde,
        res.n,
        &[res.epsilon],
        m,
        params.sub_seed("theorem12/symmetrized"),
    )?;
    let (c, v) = verdict_check(
        "symmetrized_recurrent",
        &report,
        &res,
        RecurrenceVerdict::RecurrentAtResolution,
    )?;
    out.conclusion_checks.push(c);
    out.conclusion = Some(v.word().to_string());
    let summary = report.summary();
    out.curves
        .push(summary.curve("theorem12_symmetrized_fraction"));
    out.attach("symmetrized_recurrence", &summary)?;

    if let Some(k) = half_mass_constant(&sigmas) {
        let k_range: Vec<u32> = (0..=params.k_max.unwrap_or(8)).collect();
        let bound = theorem12_bound(
            &sigmas,
            k,
            params.eta,
            &k_range,
            &kernel_options(params, "theorem12/kernel"),
        )?;
        out.conclusion_checks
            .push(bound_check("dyadic_small_ball_bound", &bound));
        out.attach("kernel_bound", &bound)?;
    }

    // Reverse direction: tightness of f̃(n, ·)/n, then a centered scan of f.
    let tilde_sigmas = sigma_family(
        &tilde,
        &params.n_list,
        Normalization::One,
        params.m_measure,
        params.sub_seed("theorem12/sigma_tilde"),
    )?;
    let (tight_tilde, _) = tightness_on_grid(&tilde_sigmas, params)?;
    if tight_tilde.passed {
        let centering = median_drift_estimate(
            cocycle,
            &params.n_list,
            params.m_measure,
            params.sub_seed("theorem12/median"),
        )?;
        let grid = params
            .drift_grid
            .clone()
            .unwrap_or_else(|| local_grid(centering.candidate_drift, params.grid_step));
        let scan_res = params.resolution(cocycle, DEFAULT_HORIZON, DEFAULT_THRESHOLD);
        let scan_res = Resolution {
            epsilon: params.epsilon.unwrap_or(0.05),
            ..scan_res
        };
        let scan = drift_scan(
            cocycle,
            &grid,
            scan_res,
            params.samples(300),
            params.sub_seed("theorem12/scan"),
        )?;
        let flagged = scan.flagged().len();
        out.conclusion_checks.push(check(
            "reverse_recurrence_set_nonempty",
            flagged > 0,
            format!(
                "{flagged} of {} drifts flagged around candidate {:.6}",
                grid.len(),
                centering.candidate_drift
            ),
        ));
        out.curves.push(scan.curve("theorem12_reverse_scan"));
        out.attach("median_drift", &centering)?;
        out.attach("reverse_scan", &scan)?;
    } else {
        out.attach(
            "reverse",
            &serde_json::json!({"skipped": "f̃(n,·)/n not tight on the grid"}),
        )?;
    }
    Ok(out.finish())
}

/// d ≥ 2: tight f(n, ·)/n^{1/d} implies the symmetrized cocycle is recurrent.
pub fn suite_theorem14(cocycle: &Cocycle, params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("theorem14");
    let d = cocycle.dim();
    out.hypothesis_checks
        .push(check("dimension_at_least_two", d >= 2, format!("d = {d}")));
    if d < 2 {
        return Ok(out.finish());
    }
    let sigmas = sigma_family(
        cocycle,
        &params.n_list,
        Normalization::InverseDim,
        params.m_measure,
        params.sub_seed("theorem14/sigma"),
    )?;
    let (tight, tried) = tightness_on_grid(&sigmas, params)?;
    out.hypothesis_checks.push(tight);
    out.attach("tightness", &tried)?;

    let tilde = cocycle.symmetrized()?;
    let threshold = if d == 2 { 0.7 } else { DEFAULT_THRESHOLD };
    let res = params.resolution(&tilde, DEFAULT_HORIZON, threshold);
    out.resolution = Some(res);
    let report = recurrence_estimate(
        &tilde,
        res.n,
        &[res.epsilon],
        params.samples(500),
        params.sub_seed("theorem14/symmetrized"),
    )?;
    let (c, v) = verdict_check(
        "symmetrized_recurrent",
        &report,
        &res,
        RecurrenceVerdict::RecurrentAtResolution,
    )?;
    out.conclusion_checks.push(c);
    out.conclusion = Some(v.word().to_string());
    let summary = report.summary();
    out.curves
        .push(summary.curve("theorem14_symmetrized_fraction"));
    out.attach("symmetrized_recurrence", &summary)?;

    if let Some(k) = half_mass_constant(&sigmas) {
        let k_range: Vec<u32> = (0..=params.k_max.unwrap_or(6)).collect();
        let bound = theorem14_bound(
            &sigmas,
            k,
            params.eta,
            &k_range,
            d,
            &kernel_options(params, "theorem14/kernel"),
        )?;
        out.conclusion_checks
            .push(bound_check("dyadic_small_ball_bound", &bound));
        out.attach("kernel_bound", &bound)?;
    }
    Ok(out.finish())
}

fn default_coboundary(system: &System) -> Result<BoundedFunctionSpec> {
    match system.spec() {
        SystemSpec::Rotation { .. } => Ok(BoundedFunctionSpec::TrigOfRotation {
            amplitude: 0.1,
            frequency: 1.0,
        }),
        SystemSpec::Odometer { .. } => Ok(BoundedFunctionSpec::DigitRead { position: 0 }),
        SystemSpec::IidShift { .. } => {
            Ok(BoundedFunctionSpec::BoundedCoordinateRead { clamp: 0.1 })
        }
        _ => Err(LabError::config(
            "no default bounded function for this system; set suite.coboundary",
        )),
    }
}

/// Cohomologous cocycles: f versus f + b∘T − b, and optionally f versus f∘T.
pub fn suite_prop2_invariance(cocycle: &Cocycle, params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("prop2_invariance");
    let b = match &params.coboundary {
        Some(b) => b.clone(),
        None => default_coboundary(cocycle.system())?,
    };
    let f_prime = cocycle.with_modifier(Modifier::AddCoboundary { b: b.clone() })?;
    let slack = 2.0 * b.sup_bound(cocycle.system());
    out.hypothesis_checks.push(check(
        "bounded_transfer_function",
        slack.is_finite(),
        format!("sup|b| = {}", slack / 2.0),
    ));
    let res = params.resolution(cocycle, DEFAULT_HORIZON, DEFAULT_THRESHOLD);
    out.resolution = Some(res);
    let m = params.samples(500);
    let seed = params.sub_seed("prop2/estimate");
    let eps = res.epsilon;
    let tiny = 1e-9;
    let mut eps_f = vec![eps, eps + slack + tiny];
    if eps - slack - tiny > 0.0 {
        eps_f.push(eps - slack - tiny);
    }
    let rf = recurrence_estimate(cocycle, res.n, &eps_f, m, seed)?;
    let rg = recurrence_estimate(&f_prime, res.n, &[eps], m, seed)?;

    let mut sandwich = true;
    for &n in &rf.horizons {
        let mid = rg.near_return_fraction(n, eps)?;
        let hi = rf.near_return_fraction(n, eps + slack + tiny)?;
        let lo = if eps - slack - tiny > 0.0 {
            rf.near_return_fraction(n, eps - slack - tiny)?
        } else {
            0.0
        };
        sandwich &= lo <= mid && mid <= hi;
    }
    out.conclusion_checks.push(check(
        "coboundary_sandwich",
        sandwich,
        format!("fraction of f′ at ε lies between those of f at ε ∓ 2 sup|b| = ε ∓ {slack} at every checkpoint"),
    ));
    let vf = rf.verdict(&res)?;
    let vg = rg.verdict(&res)?;
    out.conclusion_checks.push(check(
        "verdicts_agree",
        vf == vg,
        format!(
            "f: {}, f + b∘T − b: {} at N = {}",
            vf.word(),
            vg.word(),
            res.n
        ),
    ));
    out.conclusion = Some(vf.word().to_string());
    let (sf, sg) = (rf.summary(), rg.summary());
    out.curves.push(sf.curve("prop2_f_fraction"));
    out.curves.push(sg.curve("prop2_coboundary_fraction"));
    out.attach("f", &sf)?;
    out.attach("f_coboundary", &sg)?;

    if let Some(grid) = &params.drift_grid {
        let scan_res = Resolution {
            epsilon: params.epsilon.unwrap_or(0.05),
            ..res
        };
        let scan_seed = params.sub_seed("prop2/scan");
        let ms = params.samples(300);
        let base = drift_scan(cocycle, grid, scan_res, ms, scan_seed)?;
        let cob = drift_scan(&f_prime, grid, scan_res, ms, scan_seed)?;
        let disagree = disagreements(&base, &cob);
        out.conclusion_checks.push(check(
            "scan_agreement_coboundary",
            disagree.is_empty(),
            format!("cells that differ: {disagree:?}"),
        ));
        out.curves.push(base.curve("prop2_scan_f"));
        out.curves.push(cob.curve("prop2_scan_coboundary"));
        out.attach("scan_f", &base)?;
        out.attach("scan_coboundary", &cob)?;
        if params.compare_precompose {
            let shifted = cocycle.with_modifier(Modifier::PrecomposeStep)?;
            let pre = drift_scan(&shifted, grid, scan_res, ms, scan_seed)?;
            let disagree = disagreements(&base, &pre);
            out.conclusion_checks.push(check(
                "scan_agreement_precompose",
                disagree.is_empty(),
                format!("cells that differ: {disagree:?}"),
            ));
            out.curves.push(pre.curve("prop2_scan_precompose"));
            out.attach("scan_precompose", &pre)?;
        }
    }
    Ok(out.finish())
}

fn disagreements(a: &DriftScanReport, b: &DriftScanReport) -> Vec<Vec<f64>> {
    a.cells
        .iter()
        .zip(&b.cells)
        .filter(|(x, y)| x.verdict != y.verdict)
        .map(|(x, _)| x.c.clone())
        .collect()
}

/// Rotation indicator 1_{[0, β)}: the recurrence set is {β}.
pub fn gallery_example8_1(params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("example8_1");
    let f = Cocycle::from_specs(
        SystemSpec::golden_rotation(),
        CocycleSpec::new(BaseFunction::Indicator { beta: params.beta }),
    )?;
    let res = params.scan_resolution(DEFAULT_HORIZON, 0.05);
    out.resolution = Some(res);
    let grid = match &params.drift_grid {
        Some(g) => g.clone(),
        None => linear_grid(0.0, 1.0, params.grid_step)?,
    };
    let scan = drift_scan(
        &f,
        &grid,
        res,
        params.samples(500),
        params.sub_seed("example8_1/scan"),
    )?;
    let near = |c: &[f64]| (c[0] - params.beta).abs() <= params.grid_step + 1e-12;
    let flagged = scan.flagged();
    let expected: Vec<Vec<f64>> = grid.iter().filter(|c| near(c)).cloned().collect();
    out.conclusion_checks.push(check(
        "flags_exactly_cells_near_integral",
        flagged.iter().map(|c| c.to_vec()).collect::<Vec<_>>() == expected,
        format!(
            "flagged {flagged:?}; cells within {} of β = {}: {expected:?}",
            params.grid_step, params.beta
        ),
    ));
    out.conclusion = Some(format!(
        "{} of {} drifts flagged",
        flagged.len(),
        grid.len()
    ));
    out.curves.push(scan.curve("example8_1_scan"));
    out.attach("scan", &scan)?;
    Ok(out.finish())
}

fn cauchy_walk(absolute: bool) -> Result<Cocycle> {
    Cocycle::from_specs(
        SystemSpec::iid(Marginal::Cauchy { scale: 1.0 }),
        CocycleSpec::new(BaseFunction::CoordinateRead { absolute }),
    )
}

fn cauchy_gallery(name: &str, absolute: bool, params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new(name);
    let f = cauchy_walk(absolute)?;
    let res = params.scan_resolution(DEFAULT_HORIZON, 0.1);
    out.resolution = Some(res);
    let grid = match &params.drift_grid {
        Some(g) => g.clone(),
        None => linear_grid(-2.0, 2.0, 1.0)?,
    };
    let scan = drift_scan(
        &f,
        &grid,
        res,
        params.samples(500),
        params.sub_seed(&format!("{name}/scan")),
    )?;
    let flagged = scan.flagged().len();
    let (label, passed) = if absolute {
        ("no_drift_flagged", flagged == 0)
    } else {
        ("every_drift_flagged", flagged == grid.len())
    };
    out.conclusion_checks.push(check(
        label,
        passed,
        format!("{flagged} of {} drifts flagged", grid.len()),
    ));
    out.conclusion = Some(format!("{flagged} of {} drifts flagged", grid.len()));
    out.curves.push(scan.curve(&format!("{name}_scan")));
    out.attach("scan", &scan)?;
    Ok(out.finish())
}

/// |Cauchy| steps: f ≥ 0 with infinite integral, empty recurrence set.
pub fn gallery_example8_2(params: &SuiteParams) -> Result<SuiteResult> {
    cauchy_gallery("example8_2", true, params)
}

/// Cauchy steps: every drift is recurrent.
pub fn gallery_example8_3(params: &SuiteParams) -> Result<SuiteResult> {
    cauchy_gallery("example8_3", false, params)
}

/// The tri-adic odometer orbit cocycle.  Its recurrence set and complement
/// are both dense; at finite resolution the landscape is reported, not judged.
pub fn gallery_example8_5(params: &SuiteParams) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("example8_5");
    let f = Cocycle::from_specs(
        SystemSpec::Odometer { base: 3 },
        CocycleSpec::new(BaseFunction::OdometerOrbit),
    )?;
    let gate_m = 200;
    let mut gate_ok = true;
    for i in 0..gate_m {
        let x = f
            .system()
            .sample_point(sample_seed(params.sub_seed("example8_5/oracle"), i));
        let crate::systems::SystemPoint::Odometer(p) = &x else {
            unreachable!("odometer point")
        };
        gate_ok &= crate::cocycle::oracle_orbit_cocycle(p, 1 << 20)?
            == crate::cocycle::odometer_orbit_cocycle(p);
    }
    out.hypothesis_checks.push(check(
        "closed_form_matches_oracle",
        gate_ok,
        format!("closed form against T′ iteration on {gate_m} sampled points"),
    ));
    if !gate_ok {
        return Ok(out.finish());
    }
    let res = params.scan_resolution(1_000_000, 0.05);
    out.resolution = Some(res);
    let grid = match &params.drift_grid {
        Some(g) => g.clone(),
        None => linear_grid(-3.0, 3.0, params.grid_step)?,
    };
    let scan = drift_scan(
        &f,
        &grid,
        res,
        params.samples(100),
        params.sub_seed("example8_5/scan"),
    )?;
    let flagged = scan.flagged().len();
    out.conclusion_checks.push(check(
        "landscape",
        true,
        format!(
            "{flagged} flagged and {} unflagged of {} drifts (descriptive only)",
            grid.len() - flagged,
            grid.len()
        ),
    ));
    out.conclusion = Some(format!("{flagged} of {} drifts flagged", grid.len()));
    out.curves.push(scan.curve("example8_5_scan"));
    out.attach("scan", &scan)?;
    Ok(out.finish())
}

pub const SUITES: [&str; 7] = [
    "theorem3",
    "theorem4",
    "theorem9",
    "theorem10",
    "theorem12",
    "theorem14",
    "prop2_invariance",
];
pub const GALLERY: [&str; 4] = ["example8_1", "example8_2", "example8_3", "example8_5"];

pub fn run_suite(name: &str, cocycle: &Cocycle, params: &SuiteParams) -> Result<SuiteResult> {
    params.validate()?;
    match name {
        "theorem3" => suite_theorem3(cocycle, params),
        "theorem4" => suite_theorem4(cocycle, params),
        "theorem9" => suite_theorem9(cocycle, params),
        "theorem10" => suite_theorem10(cocycle, params),
        "theorem12" => suite_theorem12(cocycle, params),
        "theorem14" => suite_theorem14(cocycle, params),
        "prop2_invariance" => suite_prop2_invariance(cocycle, params),
        other => Err(LabError::config(format!(
            "unknown suite {other:?}; expected one of {SUITES:?}"
        ))),
    }
}

pub fn run_gallery(name: &str, params: &SuiteParams) -> Result<SuiteResult> {
    params.validate()?;
    match name {
        "example8_1" => gallery_example8_1(params),
        "example8_2" => gallery_example8_2(params),
        "example8_3" => gallery_example8_3(params),
        "example8_5" => gallery_example8_5(params),
        other => Err(LabError::config(format!(
            "unknown gallery entry {other:?}; expected one of {GALLERY:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: f64) -> Cocycle {
        Cocycle::from_specs(SystemSpec::golden_rotation(), CocycleSpec::constant(&[v])).unwrap()
    }

    fn srw1() -> Cocycle {
        Cocycle::from_specs(
            SystemSpec::iid(Marginal::UniformPm1),
            CocycleSpec::coordinate_read(),
        )
        .unwrap()
    }

    #[test]
    fn zero_returns_immediately() {
        let r = recurrence_estimate(&constant(0.0), 10, &[1e-6], 100, 1).unwrap();
        assert_eq!(r.near_return_fraction(1, 1e-6).unwrap(), 1.0);
    }

    #[test]
    fn pure_drift_never_returns() {
        let r = recurrence_estimate(&constant(1.0), 64, &[0.99], 100, 1).unwrap();
        assert_eq!(r.near_return_fraction(64, 0.99).unwrap(), 0.0);
        assert!(r.min_norms.iter().all(|row| row.iter().all(|&v| v == 1.0)));
    }

    #[test]
    fn fractions_are_monotone() {
        let r = recurrence_estimate(&srw1(), 1000, &[0.5, 1.5, 2.5], 200, 3).unwrap();
        let s = r.summary();
        for row in &s.fractions {
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
        for h in 0..s.horizons.len() {
            assert!(
                s.fractions[0][h] <= s.fractions[1][h] && s.fractions[1][h] <= s.fractions[2][h]
            );
        }
        for row in &r.min_norms {
            assert!(row.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn scan_zero_cell_matches_estimate() {
        let f = srw1();
        let res = Resolution {
            n: 500,
            epsilon: 0.5,
            threshold: 0.5,
        };
        let scan = drift_scan(&f, &[vec![-0.5], vec![0.0], vec![0.5]], res, 150, 9).unwrap();
        let est = recurrence_estimate(&f, 500, &[0.5], 150, 9).unwrap();
        assert_eq!(scan.cells[1].summary, est.summary());
    }

    #[test]
    fn scan_cell_matches_explicit_drift_modifier() {
        let base = Cocycle::from_specs(
            SystemSpec::golden_rotation(),
            CocycleSpec::new(BaseFunction::Indicator { beta: 0.3 }),
        )
        .unwrap();
        let res = Resolution {
            n: 300,
            epsilon: 0.05,
            threshold: 0.5,
        };
        let scan = drift_scan(&base, &[vec![0.25]], res, 100, 4).unwrap();
        let drifted = base
            .with_modifier(Modifier::SubtractDrift { c: vec![0.25] })
            .unwrap();
        let est = recurrence_estimate(&drifted, 300, &[0.05], 100, 4).unwrap();
        assert_eq!(scan.cells[0].summary, est.summary());
    }

    #[test]
    fn median_drift_of_constant() {
        let r = median_drift_estimate(&constant(0.75), &[1, 10, 100], 50, 0).unwrap();
        assert!(r.a_n.iter().all(|a| (a + 0.75).abs() < 1e-12));
        assert!((r.candidate_drift - 0.75).abs() < 1e-12);
    }

    #[test]
    fn theorem3_on_pure_drift_is_transient() {
        let params = SuiteParams {
            n_max: Some(200),
            m: Some(100),
            m_measure: 100,
            ..SuiteParams::default()
        };
        let r = suite_theorem3(&constant(1.0), &params).unwrap();
        assert_eq!(r.conclusion.as_deref(), Some("transient"));
        assert_eq!(r.status, SuiteStatus::Consistent);
    }

    #[test]
    fn theorem4_rejects_pure_drift() {
        let params = SuiteParams {
            n_max: Some(100),
            m: Some(100),
            m_measure: 100,
            ..SuiteParams::default()
        };
        let r = suite_theorem4(&constant(1.0), &params).unwrap();
        assert_eq!(r.status, SuiteStatus::HypothesisUnmet);
    }

    #[test]
    fn linear_grid_labels() {
        let g = linear_grid(0.0, 1.0, 0.05).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[7], vec![0.35]);
        assert_eq!(g[20], vec![1.0]);
    }

    #[test]
    fn checkpoints() {
        assert_eq!(checkpoint_horizons(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(checkpoint_horizons(8), vec![1, 2, 4, 8]);
        assert_eq!(checkpoint_horizons(1), vec![1]);
    }
}
