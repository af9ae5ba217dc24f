//! Triangle smoothing kernels and the dyadic small-ball lower bounds.
//!
//! With h_δ the indicator of [−δ/2, δ/2]^d, the kernel is
//! g_δ = δ^{−2d} h_δ ∗ h_δ, a product of 1-d triangles (δ − |z_i|)/δ².
//! For a probability σ with σ([−K/2, K/2]^d) > 1/2 the autocorrelation
//! φ_δ(z) = E g_δ(X − X′ + z) satisfies φ_δ(0) > 1/(4(2K+2)^d), hence
//!
//! ```text
//! 2^{dk} σ̃([−2^{−k}η, 2^{−k}η]^d) ≥ η^d / (4(2K+2)^d)
//! ```
//!
//! for σ̃ the law of X − X′.  In d = 1 the floor is η/(8K+8).

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirics::EmpiricalMeasure;
use crate::error::{LabError, Result};
use crate::rng::derive_seed;

/// Smallest pair budget accepted by [`phi_delta`].
pub const MIN_PAIR_BUDGET: usize = 10_000;
pub const DEFAULT_PAIR_BUDGET: usize = 1_000_000;
/// Width of every statistical guard, in standard errors.
pub const SE_GUARD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleKernel {
    delta: f64,
    dim: usize,
}

impl TriangleKernel {
    pub fn new(delta: f64, dim: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(LabError::config(format!(
                "kernel width δ = {delta} is outside (0, 1)"
            )));
        }
        if dim == 0 {
            return Err(LabError::config("kernel dimension must be positive"));
        }
        Ok(TriangleKernel { delta, dim })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// δ^{−d}, the value at the origin.
    pub fn peak(&self) -> f64 {
        self.delta.powi(-(self.dim as i32))
    }

    #[inline]
    pub fn eval(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim);
        let d = self.delta;
        let mut v = 1.0;
        for &zi in z {
            let a = zi.abs();
            if a >= d {
                return 0.0;
            }
            v *= (d - a) / (d * d);
        }
        v
    }

    /// Trapezoid rule over [−δ, δ]^d with `intervals` cells per axis (d ≤ 2).
    pub fn trapezoid_integral(&self, intervals: usize) -> Result<f64> {
        if self.dim > 2 {
            return Err(LabError::Unsupported(
                "quadrature is implemented for d ≤ 2".into(),
            ));
        }
        if intervals == 0 {
            return Err(LabError::config("quadrature needs at least one interval"));
        }
        let h = 2.0 * self.delta / intervals as f64;
        let node = |i: usize| -self.delta + i as f64 * h;
        let weight = |i: usize| if i == 0 || i == intervals { 0.5 } else { 1.0 };
        if self.dim == 1 {
            let s: f64 = (0..=intervals)
                .map(|i| weight(i) * self.eval(&[node(i)]))
                .sum();
            return Ok(s * h);
        }
        let rows: Vec<f64> = (0..=intervals)
            .into_par_iter()
            .map(|i| {
                let x = node(i);
                let s: f64 = (0..=intervals)
                    .map(|j| weight(j) * self.eval(&[x, node(j)]))
                    .sum();
                weight(i) * s
            })
            .collect();
        Ok(rows.iter().sum::<f64>() * h * h)
    }
}

pub fn g_delta(z: &[f64], delta: f64) -> Result<f64> {
    Ok(TriangleKernel::new(delta, z.len())?.eval(z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
    /// True when computed by full pair enumeration (standard error 0).
    pub exact: bool,
}

/// φ_δ(z) = E g_δ(X − X′ + z) for X, X′ i.i.d. from `sigma`.  Enumerates all
/// pairs when m² ≤ `pair_budget`, otherwise averages over `pair_budget`
/// weight-proportional pairs drawn from `seed`.  Normalized by the finite mass
/// of `sigma`.
pub fn phi_delta(
    z: &[f64],
    sigma: &EmpiricalMeasure,
    delta: f64,
    pair_budget: usize,
    seed: u64,
) -> Result<Estimate> {
    if sigma.is_empty() {
        return Err(LabError::config("φ of an empty measure"));
    }
    if z.len() != sigma.dim() {
        return Err(LabError::config(
            "shift dimension does not match the measure",
        ));
    }
    if pair_budget < MIN_PAIR_BUDGET {
        return Err(LabError::config(format!(
            "pair budget must be at least {MIN_PAIR_BUDGET}"
        )));
    }
    let kernel = TriangleKernel::new(delta, sigma.dim())?;
    let xs = sigma.samples();
    let ws = sigma.weights();
    let mass = sigma.finite_mass();
    let m = xs.len();
    let mut buf = vec![0.0; z.len()];
    let diff = |a: &[f64], b: &[f64], out: &mut [f64]| {
        for i in 0..out.len() {
            out[i] = a[i] - b[i] + z[i];
        }
    };

    if m.checked_mul(m).is_some_and(|p| p <= pair_budget) {
        let mut total = 0.0;
        for (a, wa) in xs.iter().zip(ws) {
            let mut row = 0.0;
            for (b, wb) in xs.iter().zip(ws) {
                diff(a, b, &mut buf);
                row += wb * kernel.eval(&buf);
            }
            total += wa * row;
        }
        return Ok(Estimate {
            value: total / (mass * mass),
            standard_error: 0.0,
            exact: true,
        });
    }

    let pick = WeightedIndex::new(ws).map_err(|e| LabError::config(format!("weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..pair_budget {
        let a = &xs[pick.sample(&mut rng)];
        let b = &xs[pick.sample(&mut rng)];
        diff(a, b, &mut buf);
        let v = kernel.eval(&buf);
        s += v;
        s2 += v * v;
    }
    let n = pair_budget as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(Estimate {
        value: mean,
        standard_error: (var / n).sqrt(),
        exact: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiGridPoint {
    pub z: Vec<f64>,
    pub phi: Estimate,
    /// φ(0) ≥ φ(z) − 3·SE.
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiMaxReport {
    pub delta: f64,
    pub phi_at_zero: Estimate,
    pub points: Vec<PhiGridPoint>,
    pub pass: bool,
}

/// Checks that φ_δ is maximal at the origin over `z_grid` up to the guard.
/// All grid points share one pair sample, so errors are positively correlated.
pub fn phi_max_check(
    sigma: &EmpiricalMeasure,
    delta: f64,
    z_grid: &[Vec<f64>],
    pair_budget: usize,
    seed: u64,
) -> Result<PhiMaxReport> {
    let zero = vec![0.0; sigma.dim()];
    if !z_grid.iter().any(|z| z.iter().all(|&v| v == 0.0)) {
        return Err(LabError::config("z grid must contain the origin"));
    }
    let phi0 = phi_delta(&zero, sigma, delta, pair_budget, seed)?;
    let points = z_grid
        .par_iter()
        .map(|z| {
            let phi = phi_delta(z, sigma, delta, pair_budget, seed)?;
            let se = phi0.standard_error.hypot(phi.standard_error);
            Ok(PhiGridPoint {
                z: z.clone(),
                dominated: phi0.value >= phi.value - SE_GUARD * se,
                phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhiMaxReport {
        delta,
        pass: points.iter().all(|p| p.dominated),
        phi_at_zero: phi0,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiCheck {
    pub delta: f64,
    pub value: f64,
    pub floor: f64,
    pub se: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: u64,
    pub k: u32,
    pub lhs: f64,
    pub floor: f64,
    pub se: f64,
    pub verdict: Verdict,
    /// φ_δ(0) at δ = 2^{−k}η, present when δ < 1.
    pub phi: Option<PhiCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    PreconditionFailed,
    Checked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub status: BoundStatus,
    pub dim: usize,
    pub k_constant: f64,
    pub eta: f64,
    /// Smallest σ_n([−K/2, K/2]^d) over the inputs, with its horizon.
    pub worst_half_mass: f64,
    pub worst_n: u64,
    pub rows: Vec<BoundRow>,
    /// Every row and every φ check passed.  False when the precondition fails.
    pub all_pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    /// Pairs drawn for each Monte Carlo convolution σ_n ∗ σ̄_n.
    pub m_out: usize,
    pub pair_budget: usize,
    pub check_phi: bool,
    pub seed: u64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            m_out: 10_000,
            pair_budget: DEFAULT_PAIR_BUDGET,
            check_phi: true,
            seed: 0,
        }
    }
}

/// Smallest K with σ_n([−K/2, K/2]^d) > 1/2 for every given σ_n.
pub fn half_mass_constant(sigmas: &[EmpiricalMeasure]) -> Option<f64> {
    let mut k: f64 = 0.0;
    for s in sigmas {
        k = k.max(2.0 * s.mass_radius(0.5)?);
    }
    if k == 0.0 {
        k = 1e-9;
    }
    Some(k)
}

/// d = 1 case: floor η/(8K+8).
pub fn theorem12_bound(
    sigmas: &[EmpiricalMeasure],
    k_constant: f64,
    eta: f64,
    k_range: &[u32],
    options: &BoundOptions,
) -> Result<BoundReport> {
    if sigmas.iter().any(|s| s.dim() != 1) {
        return Err(LabError::config(
            "the one-dimensional bound needs scalar measures",
        ));
    }
    dyadic_bound(sigmas, k_constant, eta, k_range, 1, options)
}

/// Floor η^d/(4(2K+2)^d) with 2^{dk} scaling.
pub fn theorem14_bound(
    sigmas: &[EmpiricalMeasure],
    k_constant: f64,
    eta: f64,
    k_range: &[u32],
    dim: usize,
    options: &BoundOptions,
) -> Result<BoundReport> {
    if sigmas.iter().any(|s| s.dim() != dim) {
        return Err(LabError::config("measure dimension does not match d"));
    }
    dyadic_bound(sigmas, k_constant, eta, k_range, dim, options)
}

fn dyadic_bound(
    sigmas: &[EmpiricalMeasure],
    k_constant: f64,
    eta: f64,
    k_range: &[u32],
    dim: usize,
    options: &BoundOptions,
) -> Result<BoundReport> {
    if sigmas.is_empty() {
        return Err(LabError::config("no measures supplied"));
    }
    if !(k_constant > 0.0) {
        return Err(LabError::config("K must be positive"));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(LabError::config("η must lie in (0, 1]"));
    }
    if k_range.iter().any(|&k| k > 30) {
        return Err(LabError::config("k is limited to 30"));
    }
    if options.m_out == 0 {
        return Err(LabError::config("m_out must be positive"));
    }
    let horizon = |i: usize| sigmas[i].provenance().map_or(i as u64, |p| p.n);
    let (worst_i, worst_half_mass) = sigmas
        .iter()
        .map(|s| s.closed_ball_mass(k_constant / 2.0) / s.total_mass().max(f64::MIN_POSITIVE))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let mut report = BoundReport {
        status: BoundStatus::PreconditionFailed,
        dim,
        k_constant,
        eta,
        worst_half_mass,
        worst_n: horizon(worst_i),
        rows: Vec::new(),
        all_pass: false,
    };
    if worst_half_mass <= 0.5 {
        return Ok(report);
    }

    let di = dim as i32;
    let phi_floor = 1.0 / (4.0 * (2.0 * k_constant + 2.0).powi(di));
    let floor = eta.powi(di) * phi_floor;
    let rows: Vec<Vec<BoundRow>> = sigmas
        .par_iter()
        .enumerate()
        .map(|(i, sigma)| {
            let n = horizon(i);
            let conv_seed = derive_seed(options.seed, &format!("kernels/convolve/{n}"));
            let tilde = sigma.symmetrized(options.m_out, conv_seed)?;
            k_range
                .iter()
                .map(|&k| {
                    let scale = 2f64.powi(di * k as i32);
                    let radius = eta * 2f64.powi(-(k as i32));
                    let p = tilde.closed_ball_mass(radius) / tilde.total_mass();
                    // A zero count still carries one count's worth of uncertainty.
                    let p_se = p.max(1.0 / options.m_out as f64);
                    let se = scale * (p_se * (1.0 - p_se).max(0.0) / options.m_out as f64).sqrt();
                    let lhs = scale * p;
                    let phi = if options.check_phi && radius < 1.0 {
                        let phi_seed = derive_seed(options.seed, &format!("kernels/phi/{n}/{k}"));
                        let zero = vec![0.0; dim];
                        let est = phi_delta(&zero, sigma, radius, options.pair_budget, phi_seed)?;
                        Some(PhiCheck {
                            delta: radius,
                            value: est.value,
                            floor: phi_floor,
                            se: est.standard_error,
                            verdict: Verdict::from_bool(
                                est.value > phi_floor - SE_GUARD * est.standard_error,
                            ),
                        })
                    } else {
                        None
                    };
                    Ok(BoundRow {
                        n,
                        k,
                        lhs,
                        floor,
                        se,
                        verdict: Verdict::from_bool(lhs >= floor - SE_GUARD * se),
                        phi,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    report.rows = rows.into_iter().flatten().collect();
    report.status = BoundStatus::Checked;
    report.all_pass = report.rows.iter().all(|r| {
        r.verdict == Verdict::Pass && r.phi.as_ref().is_none_or(|p| p.verdict == Verdict::Pass)
    });
    Ok(report)
}

impl BoundReport {
    /// One CSV row per (n, k).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "k",
            "lhs",
            "floor",
            "se",
            "verdict",
            "phi0",
            "phi_floor",
            "phi_se",
        ])?;
        for r in &self.rows {
            let (p, pf, ps) =
                r.phi
                    .as_ref()
                    .map_or((String::new(), String::new(), String::new()), |p| {
                        (
                            format!("{:?}", p.value),
                            format!("{:?}", p.floor),
                            format!("{:?}", p.se),
                        )
                    });
            w.write_record([
                r.n.to_string(),
                r.k.to_string(),
                format!("{:?}", r.lhs),
                format!("{:?}", r.floor),
                format!("{:?}", r.se),
                format!("{:?}", r.verdict).to_lowercase(),
                p,
                pf,
                ps,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::Vector;

    #[test]
    fn kernel_shape() {
        assert!((g_delta(&[0.0], 0.25).unwrap() - 4.0).abs() < 1e-12);
        assert!((g_delta(&[0.0, 0.0], 0.5).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(g_delta(&[0.25], 0.25).unwrap(), 0.0);
        assert_eq!(g_delta(&[0.0, -0.3], 0.25).unwrap(), 0.0);
        assert!(g_delta(&[0.0], 1.0).is_err());
        assert!(g_delta(&[0.0], 0.0).is_err());
    }

    #[test]
    fn trapezoid_is_one() {
        for &d in &[0.5, 0.1, 0.02] {
            let k = TriangleKernel::new(d, 1).unwrap();
            assert!((k.trapezoid_integral(10_000).unwrap() - 1.0).abs() < 1e-9);
        }
        assert!(TriangleKernel::new(0.5, 3)
            .unwrap()
            .trapezoid_integral(10)
            .is_err());
    }

    #[test]
    fn phi_of_point_mass_is_kernel() {
        let s = EmpiricalMeasure::point_mass(Vector::scalar(3.0));
        for &z in &[0.0, 0.05, -0.07, 0.2] {
            let e = phi_delta(&[z], &s, 0.1, MIN_PAIR_BUDGET, 1).unwrap();
            assert!(e.exact);
            assert!((e.value - g_delta(&[z], 0.1).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_autocorrelation() {
        let s = EmpiricalMeasure::from_samples(1, vec![Vector::scalar(-1.0), Vector::scalar(1.0)])
            .unwrap();
        let d = 0.1;
        let at = |z: f64| phi_delta(&[z], &s, d, MIN_PAIR_BUDGET, 0).unwrap().value;
        assert!((at(0.0) - 0.5 / d).abs() < 1e-12);
        assert!((at(2.0) - 0.25 / d).abs() < 1e-12);
        assert!((at(-2.0) - 0.25 / d).abs() < 1e-12);
        let grid: Vec<Vec<f64>> = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&z| vec![z])
            .collect();
        assert!(
            phi_max_check(&s, d, &grid, MIN_PAIR_BUDGET, 0)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn point_mass_bound_rows() {
        let s = EmpiricalMeasure::point_mass(Vector::scalar(0.0));
        let r = theorem12_bound(&[s], 1.0, 1.0, &[0, 1, 2, 3], &BoundOptions::default()).unwrap();
        assert_eq!(r.status, BoundStatus::Checked);
        for row in &r.rows {
            assert_eq!(row.lhs, 2f64.powi(row.k as i32));
        }
        assert!(r.all_pass);
        let s2 = EmpiricalMeasure::point_mass(Vector::from_slice(&[0.0, 0.0]));
        let r2 = theorem14_bound(&[s2], 1.0, 1.0, &[0, 1, 2], 2, &BoundOptions::default()).unwrap();
        assert_eq!(r2.rows[2].lhs, 16.0);
        assert!((r2.rows[0].floor - 1.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn precondition_failure_is_a_report() {
        let s = EmpiricalMeasure::point_mass(Vector::scalar(5.0));
        let r = theorem12_bound(&[s], 1.0, 0.5, &[0], &BoundOptions::default()).unwrap();
        assert_eq!(r.status, BoundStatus::PreconditionFailed);
        assert!(r.rows.is_empty());
        assert!(!r.all_pass);
    }
}
