//! Empirical laws of normalized cocycle sums f(n, ·)/n^γ and the queries the
//! recurrence criteria are phrased in: max-norm ball masses, tightness,
//! density at zero, and monitors for the local limit bounds
//!
//! ```text
//! limsup_k τ_k(B(η)) ≤ 2^d L ε^{-d} λ(B(η))
//! limsup_k Σ_{n=0}^{N} 2^n τ_{2^n k}(B(2^{-n/d} η)) ≤ 2^{d+1} d L^d ε^{-d} λ(B(η))
//! ```
//!
//! where λ(B(η)) = (2η)^d.  Every limsup is replaced by a maximum over the
//! second half of the available horizons; this is a finite-data surrogate and
//! the reports say so.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{Cocycle, CocycleSpec};
use crate::error::{LabError, Result};
use crate::rng::sample_seed;
use crate::systems::SystemSpec;
use crate::vector::Vector;

const MASS_TOL: f64 = 1e-12;
/// Expected ball count below which a density estimate is flagged unreliable.
pub const MIN_RELIABLE_COUNT: f64 = 20.0;

/// Exponent γ in f(n, ·)/n^γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// γ = 1/d.
    InverseDim,
    /// γ = 1.
    One,
    Exponent(f64),
}

impl Normalization {
    pub fn exponent(&self, dim: usize) -> f64 {
        match self {
            Normalization::InverseDim => 1.0 / dim as f64,
            Normalization::One => 1.0,
            Normalization::Exponent(g) => *g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub system: SystemSpec,
    pub cocycle: CocycleSpec,
    pub n: u64,
    pub exponent: f64,
    pub seed: u64,
    pub sample_count: usize,
}

/// Weighted samples in ℝ^d.  Non-finite samples are dropped into
/// `overflow_mass` so that total mass is still accounted for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    dim: usize,
    samples: Vec<Vector>,
    weights: Vec<f64>,
    overflow_mass: f64,
    provenance: Option<Provenance>,
}

/// Anything that can report the mass of an open max-norm ball around 0.
pub trait BallMeasure: Sync {
    fn dim(&self) -> usize;
    fn ball_mass(&self, eta: f64) -> f64;
}

impl EmpiricalMeasure {
    /// Uniform weights 1/m.
    pub fn from_samples(dim: usize, samples: Vec<Vector>) -> Result<Self> {
        let m = samples.len();
        if m == 0 {
            return Err(LabError::config(
                "empirical measure needs at least one sample",
            ));
        }
        let w = 1.0 / m as f64;
        Self::from_weighted(dim, samples, vec![w; m])
    }

    pub fn from_weighted(dim: usize, samples: Vec<Vector>, weights: Vec<f64>) -> Result<Self> {
        if samples.len() != weights.len() {
            return Err(LabError::config("samples and weights differ in length"));
        }
        if samples.iter().any(|s| s.dim() != dim) {
            return Err(LabError::config("sample dimension mismatch"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(LabError::config("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + MASS_TOL {
            return Err(LabError::config(format!("total mass {total} exceeds 1")));
        }
        let mut kept = Vec::with_capacity(samples.len());
        let mut kept_w = Vec::with_capacity(samples.len());
        let mut overflow = 0.0;
        for (s, w) in samples.into_iter().zip(weights) {
            if s.is_finite() {
                kept.push(s);
                kept_w.push(w);
            } else {
                overflow += w;
            }
        }
        Ok(EmpiricalMeasure {
            dim,
            samples: kept,
            weights: kept_w,
            overflow_mass: overflow,
            provenance: None,
        })
    }

    pub fn point_mass(at: Vector) -> Self {
        EmpiricalMeasure {
            dim: at.dim(),
            samples: vec![at],
            weights: vec![1.0],
            overflow_mass: 0.0,
            provenance: None,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[Vector] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn overflow_mass(&self) -> f64 {
        self.overflow_mass
    }

    /// Finite plus overflow mass.
    pub fn total_mass(&self) -> f64 {
        self.finite_mass() + self.overflow_mass
    }

    pub fn finite_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Number of samples the measure was built from, overflow included.
    pub fn sample_count(&self) -> usize {
        self.provenance
            .as_ref()
            .map_or(self.samples.len(), |p| p.sample_count)
    }

    /// Mass of the closed box {‖v‖ ≤ radius}.
    pub fn closed_ball_mass(&self, radius: f64) -> f64 {
        self.samples
            .iter()
            .zip(&self.weights)
            .filter(|(s, _)| s.max_norm() <= radius)
            .map(|(_, w)| w)
            .sum()
    }

    /// σ̄(B) = σ(−B).
    pub fn reflect(&self) -> Self {
        EmpiricalMeasure {
            dim: self.dim,
            samples: self.samples.iter().map(|s| -s.clone()).collect(),
            weights: self.weights.clone(),
            overflow_mass: self.overflow_mass,
            provenance: None,
        }
    }

    /// Monte Carlo convolution: `m_out` weight-proportional draws of a from
    /// `self` and b from `other`, emitting a + b with uniform weights.  The
    /// output mass is the product of the input finite masses.
    pub fn convolve(&self, other: &EmpiricalMeasure, m_out: usize, seed: u64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(LabError::config(
                "convolution of measures with different dimensions",
            ));
        }
        if self.is_empty() || other.is_empty() || m_out == 0 {
            return Err(LabError::config("convolution of an empty measure"));
        }
        let pick_a = WeightedIndex::new(&self.weights)
            .map_err(|e| LabError::config(format!("weights: {e}")))?;
        let pick_b = WeightedIndex::new(&other.weights)
            .map_err(|e| LabError::config(format!("weights: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<Vector> = (0..m_out)
            .map(|_| {
                let a = &self.samples[pick_a.sample(&mut rng)];
                let b = &other.samples[pick_b.sample(&mut rng)];
                a + b
            })
            .collect();
        let mass = self.finite_mass() * other.finite_mass();
        let w = mass / m_out as f64;
        let mut out = EmpiricalMeasure::from_weighted(self.dim, samples, vec![w; m_out])?;
        out.overflow_mass = self.total_mass() * other.total_mass() - mass;
        Ok(out)
    }

    /// σ̃ = σ ∗ σ̄, the law of X − X′.
    pub fn symmetrized(&self, m_out: usize, seed: u64) -> Result<Self> {
        self.convolve(&self.reflect(), m_out, seed)
    }

    pub fn mean(&self) -> Vector {
        let mass = self.finite_mass();
        let mut acc = Vector::zeros(self.dim);
        for (s, w) in self.samples.iter().zip(&self.weights) {
            acc += &s.scaled(*w / mass);
        }
        acc
    }

    /// Half-width r of the smallest closed ball around 0 holding more than
    /// `fraction` of the mass.
    pub fn mass_radius(&self, fraction: f64) -> Option<f64> {
        let mut pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| (s.max_norm(), *w))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut i = 0;
        while i < pts.len() {
            let r = pts[i].0;
            while i < pts.len() && pts[i].0 == r {
                acc += pts[i].1;
                i += 1;
            }
            if acc > fraction {
                return Some(r);
            }
        }
        None
    }

    /// One sample per row: coordinates then weight.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        w.write_record(&header)?;
        for (s, wt) in self.samples.iter().zip(&self.weights) {
            let mut row: Vec<String> = s.iter().map(|v| format!("{v:?}")).collect();
            row.push(format!("{wt:?}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self, etas: &[f64]) -> MeasureSummary {
        MeasureSummary {
            dim: self.dim,
            sample_count: self.sample_count(),
            total_mass: self.total_mass(),
            overflow_mass: self.overflow_mass,
            provenance: self.provenance.clone(),
            ball_masses: etas
                .iter()
                .map(|&eta| BallMassRow {
                    eta,
                    mass: self.ball_mass(eta),
                })
                .collect(),
        }
    }
}

impl BallMeasure for EmpiricalMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    /// Mass of the open ball B(η) = {‖v‖_∞ < η}.
    fn ball_mass(&self, eta: f64) -> f64 {
        self.samples
            .iter()
            .zip(&self.weights)
            .filter(|(s, _)| s.max_norm() < eta)
            .map(|(_, w)| w)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallMassRow {
    pub eta: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub dim: usize,
    pub sample_count: usize,
    pub total_mass: f64,
    pub overflow_mass: f64,
    pub provenance: Option<Provenance>,
    pub ball_masses: Vec<BallMassRow>,
}

/// τ_k = (1/k) Σ_{l ≤ k} σ_l, holding its components by reference.
#[derive(Debug, Clone)]
pub struct AveragedMeasure<'a> {
    components: Vec<&'a EmpiricalMeasure>,
}

impl<'a> AveragedMeasure<'a> {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[&'a EmpiricalMeasure] {
        &self.components
    }
}

impl BallMeasure for AveragedMeasure<'_> {
    fn dim(&self) -> usize {
        self.components[0].dim
    }

    fn ball_mass(&self, eta: f64) -> f64 {
        let total: f64 = self.components.iter().map(|m| m.ball_mass(eta)).sum();
        total / self.components.len() as f64
    }
}

pub fn tau_k<'a>(components: &[&'a EmpiricalMeasure]) -> Result<AveragedMeasure<'a>> {
    let first = components
        .first()
        .ok_or_else(|| LabError::config("tau_k needs at least one component"))?;
    if components.iter().any(|m| m.dim != first.dim) {
        return Err(LabError::config("tau_k components have mixed dimensions"));
    }
    let exps: Vec<f64> = components
        .iter()
        .filter_map(|m| m.provenance.as_ref().map(|p| p.exponent))
        .collect();
    if exps.windows(2).any(|w| w[0] != w[1]) {
        return Err(LabError::config(
            "tau_k components use different normalizations",
        ));
    }
    Ok(AveragedMeasure {
        components: components.to_vec(),
    })
}

/// σ_n: law of f(n, x)/n^γ over `m` sample points x_i ~ μ.
pub fn sigma_n(
    cocycle: &Cocycle,
    n: u64,
    normalization: Normalization,
    m: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    sigma_family(cocycle, &[n], normalization, m, seed).map(|mut v| v.remove(0))
}

/// σ_n for several horizons from one pass per sample orbit.  The measures
/// share sample points, so they are dependent across n; each one on its own is
/// an i.i.d. sample of its law.
pub fn sigma_family(
    cocycle: &Cocycle,
    horizons: &[u64],
    normalization: Normalization,
    m: usize,
    seed: u64,
) -> Result<Vec<EmpiricalMeasure>> {
    if m == 0 {
        return Err(LabError::config("sample count must be positive"));
    }
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(LabError::config("horizons must be positive"));
    }
    let mut order: Vec<usize> = (0..horizons.len()).collect();
    order.sort_by_key(|&i| horizons[i]);
    let max_n = horizons[order[order.len() - 1]];
    let system = cocycle.system();
    let d = cocycle.dim();
    let gamma = normalization.exponent(d);

    let per_sample: Vec<Vec<Vector>> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let x = system.sample_point(sample_seed(seed, i));
            let mut out = vec![Vector::zeros(d); horizons.len()];
            let mut next = 0;
            for (n, value) in cocycle.eval_sum_stream(&x, max_n)? {
                while next < order.len() && horizons[order[next]] == n {
                    out[order[next]] = value.scaled(1.0 / (n as f64).powf(gamma));
                    next += 1;
                }
                if next == order.len() {
                    break;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    horizons
        .iter()
        .enumerate()
        .map(|(h, &n)| {
            let samples = per_sample.iter().map(|row| row[h].clone()).collect();
            Ok(
                EmpiricalMeasure::from_samples(d, samples)?.with_provenance(Provenance {
                    system: system.spec().clone(),
                    cocycle: cocycle.spec().clone(),
                    n,
                    exponent: gamma,
                    seed,
                    sample_count: m,
                }),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub pass: bool,
    pub radius: f64,
    pub epsilon: f64,
    pub worst_index: usize,
    /// Horizon of the worst measure when provenance is known.
    pub worst_n: Option<u64>,
    pub worst_mass: f64,
}

/// Passes iff every measure gives mass > ε to the closed ball of radius K.
pub fn tightness_check(
    measures: &[EmpiricalMeasure],
    radius: f64,
    epsilon: f64,
) -> Result<TightnessReport> {
    if !(radius > 0.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LabError::config("tightness needs K > 0 and ε in (0, 1)"));
    }
    if measures.is_empty() {
        return Err(LabError::InsufficientData("no measures to check".into()));
    }
    let (worst_index, worst_mass) = measures
        .iter()
        .map(|m| m.closed_ball_mass(radius))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    Ok(TightnessReport {
        pass: worst_mass > epsilon,
        radius,
        epsilon,
        worst_index,
        worst_n: measures[worst_index].provenance.as_ref().map(|p| p.n),
        worst_mass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub eta: f64,
    pub mass: f64,
    /// ball_mass / η^d.
    pub ratio: f64,
    pub standard_error: f64,
    pub reliable: bool,
}

/// Ratio curve ρ(B(η))/η^d along a decreasing η grid with binomial errors.
pub fn density_at_zero(measure: &EmpiricalMeasure, eta_grid: &[f64]) -> Result<Vec<DensityPoint>> {
    if eta_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(LabError::config("η grid must be positive"));
    }
    if eta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::config("η grid must be strictly decreasing"));
    }
    let m = measure.sample_count() as f64;
    let d = measure.dim as i32;
    Ok(eta_grid
        .iter()
        .map(|&eta| {
            let mass = measure.ball_mass(eta);
            let scale = eta.powi(d);
            let p = mass.clamp(0.0, 1.0);
            DensityPoint {
                eta,
                mass,
                ratio: mass / scale,
                standard_error: (p * (1.0 - p) / m).sqrt() / scale,
                reliable: mass * m >= MIN_RELIABLE_COUNT,
            }
        })
        .collect())
}

/// Volume (2η)^d of the max-norm ball.
pub fn ball_volume(eta: f64, dim: usize) -> f64 {
    (2.0 * eta).powi(dim as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ineq7Report {
    pub eta: f64,
    pub l: f64,
    pub epsilon: f64,
    /// Horizons k over which the limsup surrogate is taken.
    pub tail_horizons: Vec<u64>,
    pub tail_max: f64,
    pub bound: f64,
    pub violated: bool,
}

/// max over the second half of the τ_k sequence vs 2^d L ε^{-d} (2η)^d.
pub fn monitor_ineq7(
    taus: &[(u64, &dyn BallMeasure)],
    eta: f64,
    l: f64,
    epsilon: f64,
) -> Result<Ineq7Report> {
    if taus.len() < 4 {
        return Err(LabError::InsufficientData(format!(
            "monitor needs at least 4 horizons, got {}",
            taus.len()
        )));
    }
    if !(eta > 0.0 && l > 0.0 && epsilon > 0.0) {
        return Err(LabError::config("η, L and ε must be positive"));
    }
    let mut sorted: Vec<_> = taus.to_vec();
    sorted.sort_by_key(|(k, _)| *k);
    let d = sorted[0].1.dim();
    let tail = &sorted[sorted.len() / 2..];
    let tail_max = tail
        .iter()
        .map(|(_, t)| t.ball_mass(eta))
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = 2f64.powi(d as i32) * l * epsilon.powi(-(d as i32)) * ball_volume(eta, d);
    Ok(Ineq7Report {
        eta,
        l,
        epsilon,
        tail_horizons: tail.iter().map(|(k, _)| *k).collect(),
        tail_max,
        bound,
        violated: tail_max > bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ineq8Report {
    pub eta: f64,
    pub l: f64,
    pub epsilon: f64,
    /// 2^n τ_{2^n k}(B(2^{-n/d} η)) for n = 0..=N.
    pub terms: Vec<f64>,
    pub partial_sum: f64,
    pub bound: f64,
    pub violated: bool,
}

/// `ladder[n]` is the measure at horizon 2^n k, n = 0..=N.
pub fn monitor_ineq8(
    ladder: &[&dyn BallMeasure],
    eta: f64,
    l: f64,
    epsilon: f64,
) -> Result<Ineq8Report> {
    if ladder.len() < 4 {
        return Err(LabError::InsufficientData(format!(
            "ladder needs at least 4 rungs, got {}",
            ladder.len()
        )));
    }
    if ladder.len() > 13 {
        return Err(LabError::config("dyadic ladder is limited to N ≤ 12"));
    }
    if !(eta > 0.0 && l > 0.0 && epsilon > 0.0) {
        return Err(LabError::config("η, L and ε must be positive"));
    }
    let d = ladder[0].dim();
    if ladder.iter().any(|m| m.dim() != d) {
        return Err(LabError::config("ladder measures have mixed dimensions"));
    }
    let terms: Vec<f64> = ladder
        .iter()
        .enumerate()
        .map(|(n, m)| {
            let radius = eta * 2f64.powf(-(n as f64) / d as f64);
            2f64.powi(n as i32) * m.ball_mass(radius)
        })
        .collect();
    let partial_sum = terms.iter().sum();
    let di = d as i32;
    let bound = 2f64.powi(di + 1) * d as f64 * l.powi(di) * epsilon.powi(-di) * ball_volume(eta, d);
    Ok(Ineq8Report {
        eta,
        l,
        epsilon,
        terms,
        partial_sum,
        bound,
        violated: partial_sum > bound,
    })
}

/// (L, ε) cells the monitors are evaluated on; the bounds are existential in
/// (L, ε), so only "violated on the whole grid" counts as recurrence evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorGrid {
    pub l_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
}

impl Default for MonitorGrid {
    fn default() -> Self {
        MonitorGrid {
            l_values: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            epsilon_values: (0..=6).map(|i| 2f64.powi(-i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridVerdict<R> {
    pub cells: Vec<R>,
    /// Every cell violated: evidence of recurrence at this grid resolution.
    pub violated_everywhere: bool,
    /// No cell violated.
    pub respected_everywhere: bool,
}

pub fn monitor_ineq7_grid(
    taus: &[(u64, &dyn BallMeasure)],
    eta: f64,
    grid: &MonitorGrid,
) -> Result<GridVerdict<Ineq7Report>> {
    let mut cells = Vec::new();
    for &l in &grid.l_values {
        for &e in &grid.epsilon_values {
            cells.push(monitor_ineq7(taus, eta, l, e)?);
        }
    }
    Ok(GridVerdict {
        violated_everywhere: cells.iter().all(|c| c.violated),
        respected_everywhere: cells.iter().all(|c| !c.violated),
        cells,
    })
}

pub fn monitor_ineq8_grid(
    ladder: &[&dyn BallMeasure],
    eta: f64,
    grid: &MonitorGrid,
) -> Result<GridVerdict<Ineq8Report>> {
    let mut cells = Vec::new();
    for &l in &grid.l_values {
        for &e in &grid.epsilon_values {
            cells.push(monitor_ineq8(ladder, eta, l, e)?);
        }
    }
    Ok(GridVerdict {
        violated_everywhere: cells.iter().all(|c| c.violated),
        respected_everywhere: cells.iter().all(|c| !c.violated),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_measure(values: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_samples(1, values.iter().map(|&v| Vector::scalar(v)).collect())
            .unwrap()
    }

    #[test]
    fn ball_mass_examples() {
        assert_eq!(
            EmpiricalMeasure::point_mass(Vector::scalar(0.0)).ball_mass(1e-6),
            1.0
        );
        let corner = EmpiricalMeasure::point_mass(Vector::from_slice(&[1.0, 1.0]));
        assert_eq!(corner.ball_mass(1.0), 0.0);
        let m = scalar_measure(&[-0.5, 0.5, 1.5]);
        assert!((m.ball_mass(1.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tau_examples() {
        let a = EmpiricalMeasure::point_mass(Vector::scalar(0.0));
        let b = EmpiricalMeasure::point_mass(Vector::scalar(2.0));
        let t = tau_k(&[&a, &b]).unwrap();
        assert_eq!(t.ball_mass(1.0), 0.5);
        let single = tau_k(&[&a]).unwrap();
        assert_eq!(single.ball_mass(0.3), a.ball_mass(0.3));
        let c = EmpiricalMeasure::point_mass(Vector::from_slice(&[0.0, 0.0]));
        assert!(tau_k(&[&a, &c]).is_err());
    }

    #[test]
    fn reflect_is_involution() {
        let m = scalar_measure(&[-0.25, 0.5, 3.0]);
        assert_eq!(m.reflect().reflect().samples(), m.samples());
    }

    #[test]
    fn convolve_point_masses() {
        let a = EmpiricalMeasure::point_mass(Vector::scalar(1.5));
        let b = EmpiricalMeasure::point_mass(Vector::scalar(-4.0));
        let c = a.convolve(&b, 50, 1).unwrap();
        assert!(c.samples().iter().all(|s| s[0] == -2.5));
        assert!((c.total_mass() - 1.0).abs() < 1e-12);
        let empty_dim = EmpiricalMeasure::point_mass(Vector::from_slice(&[0.0, 0.0]));
        assert!(a.convolve(&empty_dim, 10, 1).is_err());
    }

    #[test]
    fn non_finite_samples_go_to_overflow() {
        let m = scalar_measure(&[f64::INFINITY, 0.0, 1.0, f64::NAN]);
        assert_eq!(m.len(), 2);
        assert!((m.overflow_mass() - 0.5).abs() < 1e-15);
        assert!((m.total_mass() - 1.0).abs() < 1e-15);
        assert_eq!(m.ball_mass(1e9), 0.5);
    }

    #[test]
    fn tightness_examples() {
        let zeros: Vec<_> = (0..5)
            .map(|_| EmpiricalMeasure::point_mass(Vector::scalar(0.0)))
            .collect();
        assert!(tightness_check(&zeros, 0.1, 0.99).unwrap().pass);
        let c = 0.5;
        let drifting: Vec<_> = (1..=10)
            .map(|n| EmpiricalMeasure::point_mass(Vector::scalar(n as f64 * c)))
            .collect();
        let r = tightness_check(&drifting, 2.0, 0.5).unwrap();
        assert!(!r.pass);
        assert!(r.worst_index >= 4);
        assert!(tightness_check(&zeros, 0.0, 0.5).is_err());
    }

    #[test]
    fn density_of_atom_diverges() {
        let m = EmpiricalMeasure::point_mass(Vector::scalar(0.0));
        let curve = density_at_zero(&m, &[1.0, 0.1, 0.01]).unwrap();
        assert_eq!(curve[2].ratio, 100.0);
        assert!(density_at_zero(&m, &[0.1, 1.0]).is_err());
    }

    #[test]
    fn mass_radius_strictly_exceeds_fraction() {
        let m = scalar_measure(&[0.1, -0.2, 0.3, 0.4]);
        assert_eq!(m.mass_radius(0.5), Some(0.3));
        assert!(m.closed_ball_mass(0.3) > 0.5);
    }

    #[test]
    fn monitors_need_enough_horizons() {
        let a = EmpiricalMeasure::point_mass(Vector::scalar(0.0));
        let seq: Vec<(u64, &dyn BallMeasure)> =
            (1..=3).map(|k| (k, &a as &dyn BallMeasure)).collect();
        assert!(matches!(
            monitor_ineq7(&seq, 0.1, 1.0, 1.0),
            Err(LabError::InsufficientData(_))
        ));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let m = scalar_measure(&[0.5, -1.0]);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("x1,weight"));
        assert_eq!(text.lines().count(), 3);
    }
}
