//! Measure-preserving systems (X, μ, T) with exact forward and backward
//! iteration.
//!
//! Infinite objects (odometer digits, shift coordinates) are generated lazily
//! from a counter-based hash keyed by `(stream_seed, index)`, so points are
//! cheap to clone and every coordinate is reproducible.  Changes made by the
//! dynamics (odometer carries) are stored separately from the generative
//! stream.
//!
//! The rotation runs on the 2^64-cycle `Z / 2^64 Z`: stepping is exact modular
//! addition, so `step_inverse ∘ step` is the identity bit for bit.  Treating a
//! rotation of that finite cycle as an irrational rotation is a modeling
//! approximation.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng::{below, hash2, unit_open};
use crate::vector::Vector;

/// Fixed-point truncation of the fractional part of the golden ratio.
pub const GOLDEN_ALPHA: u64 = 0x9E37_79B9_7F4A_7C15;

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-9;
const MAX_MARKOV_STATES: usize = 64;
const COALESCENCE_SEARCH_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Marginal {
    /// Uniform on {−1, +1}.
    UniformPm1,
    /// Uniform on the 2d unit vectors ±e_i of ℤ^d.
    LatticeUniform {
        dim: usize,
    },
    Cauchy {
        scale: f64,
    },
    Gaussian {
        mean: Vec<f64>,
        covariance: Vec<Vec<f64>>,
    },
    Discrete {
        support: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// x ↦ x + α on the unit interval, α given as a 64-bit fraction.
    Rotation { alpha: u64 },
    /// Add one with carry on {0, …, base−1}^ℕ.
    Odometer { base: u8 },
    /// Two-sided shift of an i.i.d. process.
    IidShift { marginal: Marginal },
    /// Two-sided shift of a stationary finite-state Markov chain.
    MarkovShift {
        transition: Vec<Vec<f64>>,
        stationary: Vec<f64>,
    },
    /// Product T × S acting independently on both factors.
    Product {
        left: Box<SystemSpec>,
        right: Box<SystemSpec>,
    },
}

impl SystemSpec {
    pub fn golden_rotation() -> Self {
        SystemSpec::Rotation {
            alpha: GOLDEN_ALPHA,
        }
    }

    pub fn iid(marginal: Marginal) -> Self {
        SystemSpec::IidShift { marginal }
    }

    /// The square S = T × T used by symmetrized cocycles.
    pub fn square(&self) -> Self {
        SystemSpec::Product {
            left: Box::new(self.clone()),
            right: Box::new(self.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SystemSpec::Rotation { alpha } => format!("rotation({alpha:#018x})"),
            SystemSpec::Odometer { base } => format!("odometer({base})"),
            SystemSpec::IidShift { marginal } => format!("iid_shift({})", marginal.label()),
            SystemSpec::MarkovShift { transition, .. } => {
                format!("markov_shift({} states)", transition.len())
            }
            SystemSpec::Product { left, right } => {
                format!("product({}, {})", left.label(), right.label())
            }
        }
    }
}

impl Marginal {
    pub fn label(&self) -> String {
        match self {
            Marginal::UniformPm1 => "uniform_pm1".into(),
            Marginal::LatticeUniform { dim } => format!("lattice_uniform({dim})"),
            Marginal::Cauchy { scale } => format!("cauchy({scale})"),
            Marginal::Gaussian { mean, .. } => format!("gaussian(d={})", mean.len()),
            Marginal::Discrete { support, .. } => format!("discrete({} atoms)", support.len()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Marginal::UniformPm1 | Marginal::Cauchy { .. } => 1,
            Marginal::LatticeUniform { dim } => *dim,
            Marginal::Gaussian { mean, .. } => mean.len(),
            Marginal::Discrete { support, .. } => support.first().map_or(0, Vec::len),
        }
    }
}

/// A point of the unit interval as a 64-bit fixed-point fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RotationPoint {
    pub frac: u64,
}

impl RotationPoint {
    pub fn as_unit(&self) -> f64 {
        self.frac as f64 / 18_446_744_073_709_551_616.0
    }
}

/// A digit sequence whose first `materialized_len` digits are stored and whose
/// tail is read from the stream keyed by `stream_seed`.
///
/// The stored prefix is kept canonical: it never ends in a digit equal to the
/// stream digit at that position, so equality of points is equality of digit
/// sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OdometerPoint {
    digits: Vec<u8>,
    stream_seed: u64,
}

impl OdometerPoint {
    pub fn from_stream(stream_seed: u64) -> Self {
        OdometerPoint {
            digits: Vec::new(),
            stream_seed,
        }
    }

    /// A point with an explicit leading prefix; later digits come from the stream.
    pub fn with_prefix(stream_seed: u64, prefix: &[u8], base: u8) -> Result<Self> {
        if let Some(bad) = prefix.iter().find(|&&d| d >= base) {
            return Err(LabError::config(format!(
                "digit {bad} out of range for base {base}"
            )));
        }
        let mut p = OdometerPoint {
            digits: prefix.to_vec(),
            stream_seed,
        };
        p.canonicalize(base);
        Ok(p)
    }

    pub fn stream_seed(&self) -> u64 {
        self.stream_seed
    }

    pub fn materialized_len(&self) -> usize {
        self.digits.len()
    }

    fn stream_digit(&self, base: u8, i: usize) -> u8 {
        below(hash2(self.stream_seed, i as u64), u64::from(base)) as u8
    }

    pub fn digit(&self, base: u8, i: usize) -> u8 {
        match self.digits.get(i) {
            Some(&d) => d,
            None => self.stream_digit(base, i),
        }
    }

    /// Digits `0..len`, materialized or not.
    pub fn prefix(&self, base: u8, len: usize) -> Vec<u8> {
        (0..len).map(|i| self.digit(base, i)).collect()
    }

    fn set(&mut self, base: u8, i: usize, value: u8) {
        while self.digits.len() <= i {
            let next = self.stream_digit(base, self.digits.len());
            self.digits.push(next);
        }
        self.digits[i] = value;
    }

    fn canonicalize(&mut self, base: u8) {
        while let Some(&last) = self.digits.last() {
            if last == self.stream_digit(base, self.digits.len() - 1) {
                self.digits.pop();
            } else {
                break;
            }
        }
    }

    fn increment(&mut self, base: u8) {
        let top = base - 1;
        let mut i = 0;
        loop {
            let d = self.digit(base, i);
            if d == top {
                self.set(base, i, 0);
                i += 1;
            } else {
                self.set(base, i, d + 1);
                break;
            }
        }
        self.canonicalize(base);
    }

    fn decrement(&mut self, base: u8) {
        let top = base - 1;
        let mut i = 0;
        loop {
            let d = self.digit(base, i);
            if d == 0 {
                self.set(base, i, top);
                i += 1;
            } else {
                self.set(base, i, d - 1);
                break;
            }
        }
        self.canonicalize(base);
    }
}

/// One coordinate of a shift-space point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    Real(Vector),
    Symbol(u32),
}

impl Coordinate {
    pub fn as_vector(&self) -> Vector {
        match self {
            Coordinate::Real(v) => v.clone(),
            Coordinate::Symbol(s) => Vector::scalar(f64::from(*s)),
        }
    }
}

/// A point of a two-sided sequence space; the coordinate at relative time `t`
/// is the stream value at absolute index `origin_offset + t` unless overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftPoint {
    pub origin_offset: i64,
    pub stream_seed: u64,
    /// Keyed by absolute index.
    #[serde(default)]
    pub overrides: BTreeMap<i64, Coordinate>,
}

impl ShiftPoint {
    pub fn from_stream(stream_seed: u64) -> Self {
        ShiftPoint {
            origin_offset: 0,
            stream_seed,
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub left: SystemPoint,
    pub right: SystemPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemPoint {
    Rotation(RotationPoint),
    Odometer(OdometerPoint),
    Shift(ShiftPoint),
    Product(Box<ProductPoint>),
}

impl SystemPoint {
    pub fn pair(left: SystemPoint, right: SystemPoint) -> Self {
        SystemPoint::Product(Box::new(ProductPoint { left, right }))
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Pm1,
    Lattice {
        dim: usize,
    },
    Cauchy {
        scale: f64,
    },
    Gaussian {
        mean: Vec<f64>,
        chol: Vec<Vec<f64>>,
    },
    Discrete {
        support: Vec<Vector>,
        cumulative: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
struct MarkovChain {
    cumulative: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
enum Kind {
    Rotation { alpha: u64 },
    Odometer { base: u8 },
    Iid(Sampler),
    Markov(MarkovChain),
    Product(Box<System>, Box<System>),
}

/// A validated system ready for iteration.
#[derive(Debug, Clone)]
pub struct System {
    spec: SystemSpec,
    kind: Kind,
}

impl System {
    pub fn new(spec: SystemSpec) -> Result<Self> {
        let kind = match &spec {
            SystemSpec::Rotation { alpha } => {
                if *alpha == 0 {
                    return Err(LabError::config("rotation angle must be nonzero"));
                }
                Kind::Rotation { alpha: *alpha }
            }
            SystemSpec::Odometer { base } => {
                if *base < 2 {
                    return Err(LabError::config("odometer base must be at least 2"));
                }
                Kind::Odometer { base: *base }
            }
            SystemSpec::IidShift { marginal } => Kind::Iid(build_sampler(marginal)?),
            SystemSpec::MarkovShift {
                transition,
                stationary,
            } => Kind::Markov(build_chain(transition, stationary)?),
            SystemSpec::Product { left, right } => Kind::Product(
                Box::new(System::new((**left).clone())?),
                Box::new(System::new((**right).clone())?),
            ),
        };
        Ok(System { spec, kind })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn is_shift(&self) -> bool {
        matches!(self.kind, Kind::Iid(_) | Kind::Markov(_))
    }

    pub fn odometer_base(&self) -> Option<u8> {
        match self.kind {
            Kind::Odometer { base } => Some(base),
            _ => None,
        }
    }

    pub fn components(&self) -> Option<(&System, &System)> {
        match &self.kind {
            Kind::Product(l, r) => Some((l, r)),
            _ => None,
        }
    }

    /// Number of Markov states, `None` for other systems.
    pub fn markov_states(&self) -> Option<usize> {
        match &self.kind {
            Kind::Markov(chain) => Some(chain.cumulative.len()),
            _ => None,
        }
    }

    /// Dimension of a shift coordinate (Markov symbols count as 1).
    pub fn coordinate_dim(&self) -> Option<usize> {
        match &self.kind {
            Kind::Iid(s) => Some(match s {
                Sampler::Pm1 | Sampler::Cauchy { .. } => 1,
                Sampler::Lattice { dim } => *dim,
                Sampler::Gaussian { mean, .. } => mean.len(),
                Sampler::Discrete { support, .. } => support[0].dim(),
            }),
            Kind::Markov(_) => Some(1),
            _ => None,
        }
    }

    /// Whether every coordinate value is an integer vector.
    pub fn integer_coordinates(&self) -> bool {
        match &self.kind {
            Kind::Iid(Sampler::Pm1 | Sampler::Lattice { .. }) | Kind::Markov(_) => true,
            Kind::Iid(Sampler::Discrete { support, .. }) => {
                support.iter().all(|v| v.iter().all(|x| x.fract() == 0.0))
            }
            _ => false,
        }
    }

    /// Whether `x` is a point of this system.
    pub fn owns(&self, x: &SystemPoint) -> bool {
        match (&self.kind, x) {
            (Kind::Rotation { .. }, SystemPoint::Rotation(_)) => true,
            (Kind::Odometer { .. }, SystemPoint::Odometer(_)) => true,
            (Kind::Iid(_) | Kind::Markov(_), SystemPoint::Shift(_)) => true,
            (Kind::Product(l, r), SystemPoint::Product(p)) => l.owns(&p.left) && r.owns(&p.right),
            _ => false,
        }
    }

    /// A point distributed according to the invariant measure.
    pub fn sample_point(&self, seed: u64) -> SystemPoint {
        match &self.kind {
            Kind::Rotation { .. } => SystemPoint::Rotation(RotationPoint {
                frac: hash2(seed, 1),
            }),
            Kind::Odometer { .. } => {
                SystemPoint::Odometer(OdometerPoint::from_stream(hash2(seed, 2)))
            }
            Kind::Iid(_) | Kind::Markov(_) => {
                SystemPoint::Shift(ShiftPoint::from_stream(hash2(seed, 3)))
            }
            Kind::Product(l, r) => SystemPoint::pair(
                l.sample_point(hash2(seed, 11)),
                r.sample_point(hash2(seed, 12)),
            ),
        }
    }

    pub fn step(&self, x: &SystemPoint) -> SystemPoint {
        let mut y = x.clone();
        self.step_mut(&mut y);
        y
    }

    pub fn step_inverse(&self, x: &SystemPoint) -> SystemPoint {
        let mut y = x.clone();
        self.step_inverse_mut(&mut y);
        y
    }

    /// Applies T in place.
    ///
    /// # Panics
    /// If `x` is not a point of this system (see [`System::owns`]).
    pub fn step_mut(&self, x: &mut SystemPoint) {
        match (&self.kind, x) {
            (Kind::Rotation { alpha }, SystemPoint::Rotation(p)) => {
                p.frac = p.frac.wrapping_add(*alpha)
            }
            (Kind::Odometer { base }, SystemPoint::Odometer(p)) => p.increment(*base),
            (Kind::Iid(_) | Kind::Markov(_), SystemPoint::Shift(p)) => p.origin_offset += 1,
            (Kind::Product(l, r), SystemPoint::Product(p)) => {
                l.step_mut(&mut p.left);
                r.step_mut(&mut p.right);
            }
            _ => panic!("point does not belong to {}", self.spec.label()),
        }
    }

    /// Applies T^{-1} in place.
    ///
    /// # Panics
    /// If `x` is not a point of this system.
    pub fn step_inverse_mut(&self, x: &mut SystemPoint) {
        match (&self.kind, x) {
            (Kind::Rotation { alpha }, SystemPoint::Rotation(p)) => {
                p.frac = p.frac.wrapping_sub(*alpha)
            }
            (Kind::Odometer { base }, SystemPoint::Odometer(p)) => p.decrement(*base),
            (Kind::Iid(_) | Kind::Markov(_), SystemPoint::Shift(p)) => p.origin_offset -= 1,
            (Kind::Product(l, r), SystemPoint::Product(p)) => {
                l.step_inverse_mut(&mut p.left);
                r.step_inverse_mut(&mut p.right);
            }
            _ => panic!("point does not belong to {}", self.spec.label()),
        }
    }

    /// The coordinate X_t of a shift-space point, relative to its origin.
    pub fn read_coordinate(&self, x: &SystemPoint, t: i64) -> Result<Coordinate> {
        match (&self.kind, x) {
            (Kind::Iid(_) | Kind::Markov(_), SystemPoint::Shift(p)) => {
                Ok(self.coordinate_at(p, p.origin_offset + t))
            }
            (Kind::Iid(_) | Kind::Markov(_), _) => Err(LabError::config(
                "point does not belong to the shift system",
            )),
            _ => Err(LabError::Unsupported(format!(
                "read_coordinate on non-shift system {}",
                self.spec.label()
            ))),
        }
    }

    /// Coordinate at absolute index; caller guarantees this is a shift system.
    pub(crate) fn coordinate_at(&self, p: &ShiftPoint, index: i64) -> Coordinate {
        if let Some(c) = p.overrides.get(&index) {
            return c.clone();
        }
        match &self.kind {
            Kind::Iid(sampler) => {
                Coordinate::Real(sampler.value(hash2(p.stream_seed, index as u64)))
            }
            Kind::Markov(chain) => Coordinate::Symbol(chain.state_at(p.stream_seed, index)),
            _ => unreachable!("coordinate_at on non-shift system"),
        }
    }
}

impl Sampler {
    fn value(&self, key: u64) -> Vector {
        match self {
            Sampler::Pm1 => Vector::scalar(if key >> 63 == 1 { 1.0 } else { -1.0 }),
            Sampler::Lattice { dim } => {
                let idx = below(key, 2 * *dim as u64) as usize;
                let mut v = Vector::zeros(*dim);
                v[idx / 2] = if idx.is_multiple_of(2) { 1.0 } else { -1.0 };
                v
            }
            Sampler::Cauchy { scale } => {
                Vector::scalar(scale * (PI * (unit_open(key) - 0.5)).tan())
            }
            Sampler::Gaussian { mean, chol } => {
                let z: Vec<f64> = (0..mean.len() as u64)
                    .map(|j| {
                        let u1 = unit_open(hash2(key, 2 * j));
                        let u2 = unit_open(hash2(key, 2 * j + 1));
                        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
                    })
                    .collect();
                mean.iter()
                    .zip(chol)
                    .map(|(m, row)| m + row.iter().zip(&z).map(|(l, zj)| l * zj).sum::<f64>())
                    .collect()
            }
            Sampler::Discrete {
                support,
                cumulative,
            } => {
                let u = unit_open(key);
                let idx = cumulative
                    .partition_point(|&c| c <= u)
                    .min(support.len() - 1);
                support[idx].clone()
            }
        }
    }
}

impl MarkovChain {
    #[inline]
    fn update(&self, state: u32, u: f64) -> u32 {
        let row = &self.cumulative[state as usize];
        row.partition_point(|&c| c <= u).min(row.len() - 1) as u32
    }

    /// Stationary state at absolute time `t` by coupling from the past: every
    /// start state at time t − L is driven by the shared innovations
    /// u_s = hash(seed, s) and L doubles until all trajectories agree.  The
    /// resulting process satisfies X_t = F(X_{t−1}, u_t) for every t.
    fn state_at(&self, seed: u64, t: i64) -> u32 {
        let states = self.cumulative.len() as u32;
        let mut lookback: i64 = 1;
        loop {
            let mut current: Vec<u32> = (0..states).collect();
            for s in (t - lookback + 1)..=t {
                let u = unit_open(hash2(seed, s as u64));
                for c in current.iter_mut() {
                    *c = self.update(*c, u);
                }
                current.sort_unstable();
                current.dedup();
            }
            if current.len() == 1 {
                return current[0];
            }
            lookback *= 2;
        }
    }
}

fn build_sampler(marginal: &Marginal) -> Result<Sampler> {
    Ok(match marginal {
        Marginal::UniformPm1 => Sampler::Pm1,
        Marginal::LatticeUniform { dim } => {
            if *dim == 0 {
                return Err(LabError::config("lattice dimension must be positive"));
            }
            Sampler::Lattice { dim: *dim }
        }
        Marginal::Cauchy { scale } => {
            if !(scale.is_finite() && *scale > 0.0) {
                return Err(LabError::config("cauchy scale must be positive"));
            }
            Sampler::Cauchy { scale: *scale }
        }
        Marginal::Gaussian { mean, covariance } => {
            let d = mean.len();
            if d == 0 || covariance.len() != d || covariance.iter().any(|r| r.len() != d) {
                return Err(LabError::config("gaussian mean/covariance shapes disagree"));
            }
            if mean
                .iter()
                .chain(covariance.iter().flatten())
                .any(|v| !v.is_finite())
            {
                return Err(LabError::config("gaussian parameters must be finite"));
            }
            Sampler::Gaussian {
                mean: mean.clone(),
                chol: cholesky(covariance)?,
            }
        }
        Marginal::Discrete { support, weights } => {
            if support.is_empty() || support.len() != weights.len() {
                return Err(LabError::config("discrete support and weights must match"));
            }
            let d = support[0].len();
            if d == 0 || support.iter().any(|v| v.len() != d) {
                return Err(LabError::config(
                    "discrete support points must share a dimension",
                ));
            }
            if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(LabError::config("discrete weights must be nonnegative"));
            }
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(LabError::config(format!(
                    "discrete weights sum to {total}, expected 1"
                )));
            }
            Sampler::Discrete {
                support: support.iter().map(|v| Vector::from_slice(v)).collect(),
                cumulative: cumulative(weights),
            }
        }
    })
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = a.len();
    for (i, row) in a.iter().enumerate() {
        for (j, &aij) in row.iter().enumerate().take(i) {
            if (aij - a[j][i]).abs() > 1e-12 * (1.0 + aij.abs()) {
                return Err(LabError::config("gaussian covariance must be symmetric"));
            }
        }
    }
    let mut l = vec![vec![0.0; d]; d];
    for j in 0..d {
        let pivot = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if pivot < -1e-12 {
            return Err(LabError::config(
                "gaussian covariance must be positive semidefinite",
            ));
        }
        if pivot <= 1e-12 {
            continue;
        }
        let root = pivot.sqrt();
        l[j][j] = root;
        for i in (j + 1)..d {
            let s = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = s / root;
        }
    }
    Ok(l)
}

fn build_chain(transition: &[Vec<f64>], stationary: &[f64]) -> Result<MarkovChain> {
    let s = transition.len();
    if s == 0 || s > MAX_MARKOV_STATES {
        return Err(LabError::config(format!(
            "markov chain needs 1..={MAX_MARKOV_STATES} states, got {s}"
        )));
    }
    if stationary.len() != s || transition.iter().any(|r| r.len() != s) {
        return Err(LabError::config(
            "markov transition matrix must be square and match the stationary vector",
        ));
    }
    for (i, row) in transition.iter().enumerate() {
        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(LabError::config(format!(
                "transition row {i} has a negative entry"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(LabError::config(format!(
                "transition row {i} sums to {sum}, expected 1 within {ROW_SUM_TOL}"
            )));
        }
    }
    if stationary.iter().any(|p| !(p.is_finite() && *p >= 0.0))
        || (stationary.iter().sum::<f64>() - 1.0).abs() > STATIONARY_TOL
    {
        return Err(LabError::config(
            "stationary vector must be a probability vector",
        ));
    }
    for j in 0..s {
        let pj: f64 = (0..s).map(|i| stationary[i] * transition[i][j]).sum();
        if (pj - stationary[j]).abs() > STATIONARY_TOL {
            return Err(LabError::config(format!(
                "stationary vector violates πP = π at state {j} (off by {:e})",
                pj - stationary[j]
            )));
        }
    }
    let chain = MarkovChain {
        cumulative: transition.iter().map(|r| cumulative(r)).collect(),
    };
    check_coalescence(&chain)?;
    Ok(chain)
}

/// Coupling from the past needs some finite word of update maps that sends
/// every state to one state.  The update F(·, u) is piecewise constant in u,
/// so a breadth-first search over reachable state subsets decides this.
fn check_coalescence(chain: &MarkovChain) -> Result<()> {
    let s = chain.cumulative.len();
    let mut breaks: Vec<f64> = chain.cumulative.iter().flatten().copied().collect();
    breaks.push(0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut maps: Vec<Vec<u32>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let u = 0.5 * (w[0] + w[1]);
            (0..s as u32).map(|i| chain.update(i, u)).collect()
        })
        .collect();
    maps.sort();
    maps.dedup();

    let full: u64 = if s == 64 { u64::MAX } else { (1u64 << s) - 1 };
    let mut seen = HashSet::from([full]);
    let mut queue = VecDeque::from([full]);
    while let Some(set) = queue.pop_front() {
        if set.count_ones() == 1 {
            return Ok(());
        }
        for map in &maps {
            let image = (0..s)
                .filter(|i| set >> i & 1 == 1)
                .fold(0u64, |acc, i| acc | 1u64 << map[i]);
            if seen.insert(image) {
                if seen.len() > COALESCENCE_SEARCH_LIMIT {
                    return Err(LabError::config(
                        "markov coalescence search exceeded its budget",
                    ));
                }
                queue.push_back(image);
            }
        }
    }
    Err(LabError::config(
        "markov chain never coalesces under the shared-innovation coupling (e.g. a deterministic permutation); not supported",
    ))
}
