//! Cocycles f(n, x) = f(T^{n−1}x) + … + f(x) over a [`System`] and the
//! operations that build new cocycles from old ones: drift subtraction,
//! coboundary perturbation f + b∘T − b, composition with T, symmetrization
//! f̃(x, y) = f(x) − f(y), and the skew product (x, g) ↦ (Tx, f(x) + g).

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::systems::{Coordinate, OdometerPoint, System, SystemPoint, SystemSpec};
use crate::vector::{KahanSum, Vector};

/// Default cap on |n| for a single cocycle sum.
pub const DEFAULT_HORIZON_BOUND: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseFunction {
    Constant {
        value: Vec<f64>,
    },
    /// 1 on [0, β) of a rotation.
    Indicator {
        beta: f64,
    },
    /// 1_{[0, β)} − β on a rotation.
    IndicatorMinusMean {
        beta: f64,
    },
    /// Reads X_0 of a shift; `absolute` reads |X_0| coordinatewise.
    CoordinateRead {
        #[serde(default)]
        absolute: bool,
    },
    /// The integer-valued f with Tx = T′^{f(x)} x on the tri-adic odometer,
    /// where T′ = φ∘T∘φ and φ swaps the digits 1 and 2.
    OdometerOrbit,
    /// Maps Markov symbol s to `steps[s]`.
    LatticeStep {
        steps: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundedFunctionSpec {
    /// X_0 clamped coordinatewise to [−clamp, clamp].
    BoundedCoordinateRead { clamp: f64 },
    /// amplitude · sin(2π · frequency · x) on a rotation.
    TrigOfRotation { amplitude: f64, frequency: f64 },
    /// The digit at `position` of an odometer point.
    DigitRead { position: usize },
}

impl BoundedFunctionSpec {
    /// Recorded sup-norm bound M of b.
    pub fn sup_bound(&self, system: &System) -> f64 {
        match self {
            BoundedFunctionSpec::BoundedCoordinateRead { clamp } => *clamp,
            BoundedFunctionSpec::TrigOfRotation { amplitude, .. } => amplitude.abs(),
            BoundedFunctionSpec::DigitRead { .. } => {
                f64::from(system.odometer_base().unwrap_or(1)) - 1.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Modifier {
    /// f ↦ f − c.
    SubtractDrift { c: Vec<f64> },
    /// f ↦ f + b∘T − b.
    AddCoboundary { b: BoundedFunctionSpec },
    /// f ↦ f̃ on the product system, f̃(x, y) = f(x) − f(y).
    Symmetrize,
    /// f ↦ f∘T.
    PrecomposeStep,
}

/// A base function followed by modifiers applied left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    pub base: BaseFunction,
    #[serde(default)]
    pub modifiers: Vec<Modifier>,
}

impl CocycleSpec {
    pub fn new(base: BaseFunction) -> Self {
        CocycleSpec {
            base,
            modifiers: Vec::new(),
        }
    }

    pub fn constant(value: &[f64]) -> Self {
        Self::new(BaseFunction::Constant {
            value: value.to_vec(),
        })
    }

    pub fn coordinate_read() -> Self {
        Self::new(BaseFunction::CoordinateRead { absolute: false })
    }

    pub fn with(mut self, modifier: Modifier) -> Self {
        self.modifiers.push(modifier);
        self
    }

    pub fn minus_drift(self, c: &[f64]) -> Self {
        self.with(Modifier::SubtractDrift { c: c.to_vec() })
    }

    pub fn is_symmetrized(&self) -> bool {
        self.modifiers.contains(&Modifier::Symmetrize)
    }
}

#[derive(Debug, Clone)]
enum BoundedFn {
    Clamp(f64),
    Trig { amplitude: f64, frequency: f64 },
    Digit { position: usize, base: u8 },
}

#[derive(Debug, Clone)]
enum Node {
    Constant(Vector),
    Indicator { threshold: u128, offset: f64 },
    Coordinate { absolute: bool },
    OdometerOrbit,
    LatticeStep(Vec<Vector>),
    Drift(Box<Node>, Vector),
    Coboundary(Box<Node>, BoundedFn),
    Precompose(Box<Node>),
    Symmetrize(Box<Node>),
}

/// A cocycle compiled against its system.
#[derive(Debug, Clone)]
pub struct Cocycle {
    system: System,
    spec: CocycleSpec,
    root: Node,
    dim: usize,
    integer_valued: bool,
    coboundary_bound: f64,
    horizon_bound: u64,
}

impl Cocycle {
    pub fn new(system: System, spec: CocycleSpec) -> Result<Self> {
        let symmetrized = spec.is_symmetrized();
        if spec
            .modifiers
            .iter()
            .filter(|m| **m == Modifier::Symmetrize)
            .count()
            > 1
        {
            return Err(LabError::config("symmetrize may appear at most once"));
        }
        let base_system = if symmetrized {
            match system.components() {
                Some((l, r)) if l.spec() == r.spec() => l.clone(),
                Some(_) => {
                    return Err(LabError::config(
                        "symmetrize needs a product of two copies of the same system",
                    ))
                }
                None => return Err(LabError::config("symmetrize requires a product system")),
            }
        } else {
            if system.components().is_some() {
                return Err(LabError::config(
                    "base functions act on a single system; add the symmetrize modifier for products",
                ));
            }
            system.clone()
        };

        let (mut root, mut dim, mut integer) = compile_base(&spec.base, &base_system)?;
        let mut on_product = false;
        let mut coboundary_bound = 0.0;
        for m in &spec.modifiers {
            match m {
                Modifier::SubtractDrift { c } => {
                    if c.len() != dim {
                        return Err(LabError::config(format!(
                            "drift has dimension {}, cocycle has {dim}",
                            c.len()
                        )));
                    }
                    integer &= c.iter().all(|v| v.fract() == 0.0);
                    root = Node::Drift(Box::new(root), Vector::from_slice(c));
                }
                Modifier::AddCoboundary { b } => {
                    if on_product {
                        return Err(LabError::config(
                            "add_coboundary after symmetrize is not supported",
                        ));
                    }
                    let compiled = compile_bounded(b, &base_system, dim)?;
                    integer &= matches!(compiled, BoundedFn::Digit { .. });
                    coboundary_bound += b.sup_bound(&base_system);
                    root = Node::Coboundary(Box::new(root), compiled);
                }
                Modifier::PrecomposeStep => root = Node::Precompose(Box::new(root)),
                Modifier::Symmetrize => {
                    on_product = true;
                    root = Node::Symmetrize(Box::new(root));
                }
            }
        }
        if dim == 0 {
            return Err(LabError::config("cocycle dimension must be positive"));
        }
        dim = dim.max(1);
        Ok(Cocycle {
            system,
            spec,
            root,
            dim,
            integer_valued: integer,
            coboundary_bound,
            horizon_bound: DEFAULT_HORIZON_BOUND,
        })
    }

    pub fn from_specs(system: SystemSpec, spec: CocycleSpec) -> Result<Self> {
        Cocycle::new(System::new(system)?, spec)
    }

    pub fn with_horizon_bound(mut self, bound: u64) -> Self {
        self.horizon_bound = bound;
        self
    }

    /// Same system, one more modifier.
    pub fn with_modifier(&self, modifier: Modifier) -> Result<Self> {
        Cocycle::new(self.system.clone(), self.spec.clone().with(modifier))
            .map(|c| c.with_horizon_bound(self.horizon_bound))
    }

    /// f̃ on the square of this cocycle's system.
    pub fn symmetrized(&self) -> Result<Self> {
        let square = System::new(self.system.spec().square())?;
        Cocycle::new(square, self.spec.clone().with(Modifier::Symmetrize))
            .map(|c| c.with_horizon_bound(self.horizon_bound))
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn spec(&self) -> &CocycleSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon_bound(&self) -> u64 {
        self.horizon_bound
    }

    /// Whether all values of f are integer vectors (sums are then exact).
    pub fn is_integer_valued(&self) -> bool {
        self.integer_valued
    }

    /// Total recorded Σ sup|b| over coboundary modifiers; |f′(n,x) − f(n,x)| ≤ 2× this.
    pub fn coboundary_bound(&self) -> f64 {
        self.coboundary_bound
    }

    fn check_point(&self, x: &SystemPoint) -> Result<()> {
        if self.system.owns(x) {
            Ok(())
        } else {
            Err(LabError::config(format!(
                "point does not belong to {}",
                self.system.spec().label()
            )))
        }
    }

    fn check_horizon(&self, n: u64) -> Result<()> {
        if n > self.horizon_bound {
            Err(LabError::Resource(format!(
                "horizon {n} exceeds bound {}",
                self.horizon_bound
            )))
        } else {
            Ok(())
        }
    }

    pub fn eval_f(&self, x: &SystemPoint) -> Result<Vector> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &SystemPoint) -> Vector {
        eval_node(&self.root, &self.system, x)
    }

    /// f(n, x) for any signed n with |n| within the horizon bound.
    pub fn eval_sum(&self, x: &SystemPoint, n: i64) -> Result<Vector> {
        self.check_point(x)?;
        let steps = n.unsigned_abs();
        self.check_horizon(steps)?;
        if n == 0 {
            return Ok(Vector::zeros(self.dim));
        }
        if n > 0 {
            return Ok(self.forward_sum(x.clone(), steps));
        }
        let mut start = x.clone();
        for _ in 0..steps {
            self.system.step_inverse_mut(&mut start);
        }
        Ok(-self.forward_sum(start, steps))
    }

    fn forward_sum(&self, mut p: SystemPoint, steps: u64) -> Vector {
        let mut acc = KahanSum::new(self.dim);
        for _ in 0..steps {
            acc.add(&self.eval_unchecked(&p));
            self.system.step_mut(&mut p);
        }
        acc.value()
    }

    /// Yields (n, f(n, x)) for n = 1..=len in a single pass over the orbit.
    pub fn eval_sum_stream(&self, x: &SystemPoint, len: u64) -> Result<SumStream<'_>> {
        self.check_point(x)?;
        self.check_horizon(len)?;
        Ok(SumStream {
            cocycle: self,
            point: x.clone(),
            n: 0,
            len,
            acc: KahanSum::new(self.dim),
        })
    }

    /// Validates a point and an orbit length before a hand-rolled orbit loop.
    pub(crate) fn check_orbit(&self, x: &SystemPoint, len: u64) -> Result<()> {
        self.check_point(x)?;
        self.check_horizon(len)
    }

    /// One step of the skew product T_f(x, g) = (Tx, f(x) + g).
    pub fn skew_step(&self, s: &SkewState) -> Result<SkewState> {
        let v = self.eval_f(&s.base_point)?;
        if s.fiber.dim() != self.dim {
            return Err(LabError::config(
                "fiber dimension does not match the cocycle",
            ));
        }
        Ok(SkewState {
            base_point: self.system.step(&s.base_point),
            fiber: &s.fiber + &v,
        })
    }
}

/// Single-consumer stream of cocycle sums along one orbit.
pub struct SumStream<'a> {
    cocycle: &'a Cocycle,
    point: SystemPoint,
    n: u64,
    len: u64,
    acc: KahanSum,
}

impl Iterator for SumStream<'_> {
    type Item = (u64, Vector);

    fn next(&mut self) -> Option<Self::Item> {
        if self.n >= self.len {
            return None;
        }
        let v = self.cocycle.eval_unchecked(&self.point);
        self.acc.add(&v);
        self.cocycle.system.step_mut(&mut self.point);
        self.n += 1;
        Some((self.n, self.acc.value()))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.len - self.n) as usize;
        (left, Some(left))
    }
}

/// A point (x, g) of X × ℝ^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewState {
    pub base_point: SystemPoint,
    pub fiber: Vector,
}

fn compile_base(base: &BaseFunction, system: &System) -> Result<(Node, usize, bool)> {
    let is_rotation = matches!(system.spec(), SystemSpec::Rotation { .. });
    Ok(match base {
        BaseFunction::Constant { value } => {
            if value.iter().any(|v| !v.is_finite()) {
                return Err(LabError::config("constant cocycle must be finite"));
            }
            (
                Node::Constant(Vector::from_slice(value)),
                value.len(),
                value.iter().all(|v| v.fract() == 0.0),
            )
        }
        BaseFunction::Indicator { beta } | BaseFunction::IndicatorMinusMean { beta } => {
            if !is_rotation {
                return Err(LabError::config(
                    "indicator cocycles need a rotation system",
                ));
            }
            if !(*beta > 0.0 && *beta <= 1.0) {
                return Err(LabError::config("indicator length β must lie in (0, 1]"));
            }
            let threshold = (*beta * 18_446_744_073_709_551_616.0) as u128;
            let centered = matches!(base, BaseFunction::IndicatorMinusMean { .. });
            let offset = if centered { *beta } else { 0.0 };
            (Node::Indicator { threshold, offset }, 1, !centered)
        }
        BaseFunction::CoordinateRead { absolute } => {
            let dim = system
                .coordinate_dim()
                .ok_or_else(|| LabError::config("coordinate_read needs a shift system"))?;
            (
                Node::Coordinate {
                    absolute: *absolute,
                },
                dim,
                system.integer_coordinates(),
            )
        }
        BaseFunction::OdometerOrbit => {
            if system.odometer_base() != Some(3) {
                return Err(LabError::config(
                    "odometer_orbit needs the tri-adic odometer (base 3)",
                ));
            }
            (Node::OdometerOrbit, 1, true)
        }
        BaseFunction::LatticeStep { steps } => {
            let states = system
                .markov_states()
                .ok_or_else(|| LabError::config("lattice_step needs a markov shift"))?;
            if steps.len() != states {
                return Err(LabError::config(format!(
                    "lattice_step has {} steps for {states} markov states",
                    steps.len()
                )));
            }
            let dim = steps[0].len();
            if steps
                .iter()
                .any(|s| s.len() != dim || s.iter().any(|v| !v.is_finite()))
            {
                return Err(LabError::config(
                    "lattice steps must be finite and share a dimension",
                ));
            }
            let integer = steps.iter().flatten().all(|v| v.fract() == 0.0);
            (
                Node::LatticeStep(steps.iter().map(|s| Vector::from_slice(s)).collect()),
                dim,
                integer,
            )
        }
    })
}

fn compile_bounded(b: &BoundedFunctionSpec, system: &System, dim: usize) -> Result<BoundedFn> {
    Ok(match b {
        BoundedFunctionSpec::BoundedCoordinateRead { clamp } => {
            let cdim = system
                .coordinate_dim()
                .ok_or_else(|| LabError::config("bounded_coordinate_read needs a shift system"))?;
            if cdim != dim && cdim != 1 {
                return Err(LabError::config(
                    "bounded coordinate dimension does not match the cocycle",
                ));
            }
            if !(clamp.is_finite() && *clamp > 0.0) {
                return Err(LabError::config("clamp must be positive and finite"));
            }
            BoundedFn::Clamp(*clamp)
        }
        BoundedFunctionSpec::TrigOfRotation {
            amplitude,
            frequency,
        } => {
            if !matches!(system.spec(), SystemSpec::Rotation { .. }) {
                return Err(LabError::config("trig_of_rotation needs a rotation system"));
            }
            if !(amplitude.is_finite() && frequency.is_finite()) {
                return Err(LabError::config("trig parameters must be finite"));
            }
            BoundedFn::Trig {
                amplitude: *amplitude,
                frequency: *frequency,
            }
        }
        BoundedFunctionSpec::DigitRead { position } => {
            let base = system
                .odometer_base()
                .ok_or_else(|| LabError::config("digit_read needs an odometer system"))?;
            BoundedFn::Digit {
                position: *position,
                base,
            }
        }
    })
}

fn eval_node(node: &Node, system: &System, x: &SystemPoint) -> Vector {
    match node {
        Node::Constant(v) => v.clone(),
        Node::Indicator { threshold, offset } => {
            let SystemPoint::Rotation(p) = x else {
                unreachable!("validated rotation")
            };
            let hit = if u128::from(p.frac) < *threshold {
                1.0
            } else {
                0.0
            };
            Vector::scalar(hit - offset)
        }
        Node::Coordinate { absolute } => {
            let SystemPoint::Shift(p) = x else {
                unreachable!("validated shift")
            };
            let mut v = system.coordinate_at(p, p.origin_offset).as_vector();
            if *absolute {
                v.iter_mut().for_each(|c| *c = c.abs());
            }
            v
        }
        Node::OdometerOrbit => {
            let SystemPoint::Odometer(p) = x else {
                unreachable!("validated odometer")
            };
            Vector::scalar(odometer_orbit_cocycle(p) as f64)
        }
        Node::LatticeStep(steps) => {
            let SystemPoint::Shift(p) = x else {
                unreachable!("validated shift")
            };
            match system.coordinate_at(p, p.origin_offset) {
                Coordinate::Symbol(s) => steps[s as usize].clone(),
                Coordinate::Real(_) => unreachable!("markov coordinates are symbols"),
            }
        }
        Node::Drift(inner, c) => &eval_node(inner, system, x) - c,
        Node::Coboundary(inner, b) => {
            let next = system.step(x);
            let mut v = eval_node(inner, system, x);
            let delta =
                &eval_bounded(b, system, &next, v.dim()) - &eval_bounded(b, system, x, v.dim());
            v += &delta;
            v
        }
        Node::Precompose(inner) => eval_node(inner, system, &system.step(x)),
        Node::Symmetrize(inner) => {
            let SystemPoint::Product(p) = x else {
                unreachable!("validated product")
            };
            let (left, right) = system.components().expect("validated product");
            &eval_node(inner, left, &p.left) - &eval_node(inner, right, &p.right)
        }
    }
}

fn eval_bounded(b: &BoundedFn, system: &System, x: &SystemPoint, dim: usize) -> Vector {
    let broadcast = |v: f64| Vector::from(vec![v; dim]);
    match b {
        BoundedFn::Clamp(m) => {
            let SystemPoint::Shift(p) = x else {
                unreachable!("validated shift")
            };
            let raw = system.coordinate_at(p, p.origin_offset).as_vector();
            let clamped: Vector = raw.iter().map(|c| c.clamp(-m, *m)).collect();
            if clamped.dim() == dim {
                clamped
            } else {
                broadcast(clamped[0])
            }
        }
        BoundedFn::Trig {
            amplitude,
            frequency,
        } => {
            let SystemPoint::Rotation(p) = x else {
                unreachable!("validated rotation")
            };
            broadcast(amplitude * (std::f64::consts::TAU * frequency * p.as_unit()).sin())
        }
        BoundedFn::Digit { position, base } => {
            let SystemPoint::Odometer(p) = x else {
                unreachable!("validated odometer")
            };
            broadcast(f64::from(p.digit(*base, *position)))
        }
    }
}

/// φ: swaps the digits 1 and 2, leaving 0 fixed.
#[inline]
pub fn swap_digit(d: u8) -> u8 {
    match d {
        1 => 2,
        2 => 1,
        other => other,
    }
}

/// Base-3 value of a digit prefix (digit 0 least significant) after φ.
fn swapped_value(prefix: &[u8]) -> i128 {
    prefix
        .iter()
        .rev()
        .fold(0i128, |acc, &d| acc * 3 + i128::from(swap_digit(d)))
}

/// Carry positions beyond this make 3^{j+1} overflow i128; reached with
/// probability 3^{-76}.
const MAX_CARRY_INDEX: usize = 76;

/// Closed form of the orbit cocycle of the tri-adic odometer.
///
/// With j the first index where x differs from 2, Tx and x agree beyond j, and
/// T′^k = φ∘T^k∘φ, so T′^k x = Tx exactly when k is the difference of the
/// φ-swapped base-3 values of the two prefixes up to j.
pub fn odometer_orbit_cocycle(x: &OdometerPoint) -> i64 {
    let j = (0..)
        .find(|&i| x.digit(3, i) != 2)
        .expect("a point with an infinite run of 2s has measure zero");
    if j >= MAX_CARRY_INDEX {
        return if x.digit(3, j) == 0 {
            i64::MAX
        } else {
            i64::MIN
        };
    }
    let before = x.prefix(3, j + 1);
    let mut after = vec![0u8; j + 1];
    after[j] = before[j] + 1;
    let k = swapped_value(&after) - swapped_value(&before);
    k.clamp(i128::from(i64::MIN), i128::from(i64::MAX)) as i64
}

/// Finite window of tri-adic digits with a signed count of carries that left
/// the window, so that comparisons against a target are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriadicWindow {
    pub digits: Vec<u8>,
    pub overflow: i64,
}

impl TriadicWindow {
    pub fn new(digits: Vec<u8>) -> Self {
        TriadicWindow {
            digits,
            overflow: 0,
        }
    }

    /// φ on the window.
    pub fn swap(&mut self) {
        self.digits.iter_mut().for_each(|d| *d = swap_digit(*d));
    }

    pub fn increment(&mut self) {
        for d in self.digits.iter_mut() {
            if *d == 2 {
                *d = 0;
            } else {
                *d += 1;
                return;
            }
        }
        self.overflow += 1;
    }

    pub fn decrement(&mut self) {
        for d in self.digits.iter_mut() {
            if *d == 0 {
                *d = 2;
            } else {
                *d -= 1;
                return;
            }
        }
        self.overflow -= 1;
    }

    /// T′ = φ∘T∘φ.
    pub fn conjugate_step(&mut self) {
        self.swap();
        self.increment();
        self.swap();
    }

    /// T′^{-1} = φ∘T^{-1}∘φ.
    pub fn conjugate_step_inverse(&mut self) {
        self.swap();
        self.decrement();
        self.swap();
    }
}

/// Brute-force search for k with T′^k x = Tx, trying k = 0, 1, −1, 2, −2, …
///
/// Comparison is on the first j + 5 digits (j the carry index of x) with the
/// window's carry-out count required to be zero.
pub fn oracle_orbit_cocycle(x: &OdometerPoint, k_max: u64) -> Result<i64> {
    let j = (0..).find(|&i| x.digit(3, i) != 2).unwrap_or(0);
    let width = j + 1 + 4;
    let start = TriadicWindow::new(x.prefix(3, width));
    let mut target = start.clone();
    target.increment();
    target.overflow = 0;

    if start == target {
        return Ok(0);
    }
    let mut forward = start.clone();
    let mut backward = start;
    for k in 1..=k_max {
        forward.conjugate_step();
        if forward == target {
            return Ok(k as i64);
        }
        backward.conjugate_step_inverse();
        if backward == target {
            return Ok(-(k as i64));
        }
    }
    Err(LabError::SearchExhausted { k_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Marginal, GOLDEN_ALPHA};

    fn rotation() -> System {
        System::new(SystemSpec::golden_rotation()).unwrap()
    }

    #[test]
    fn constant_and_zero_horizon() {
        let c = Cocycle::new(rotation(), CocycleSpec::constant(&[1.0])).unwrap();
        let x = c.system().sample_point(3);
        assert_eq!(c.eval_f(&x).unwrap(), Vector::scalar(1.0));
        assert_eq!(c.eval_sum(&x, 0).unwrap(), Vector::scalar(0.0));
        assert_eq!(c.eval_sum(&x, 57).unwrap(), Vector::scalar(57.0));
        assert_eq!(c.eval_sum(&x, -57).unwrap(), Vector::scalar(-57.0));
    }

    #[test]
    fn indicator_minus_mean_value() {
        let c = Cocycle::new(
            rotation(),
            CocycleSpec::new(BaseFunction::IndicatorMinusMean { beta: 1.0 / 3.0 }),
        )
        .unwrap();
        let inside = SystemPoint::Rotation(crate::systems::RotationPoint { frac: 1 << 60 });
        let v = c.eval_f(&inside).unwrap()[0];
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn symmetrize_on_diagonal_is_zero() {
        let sys = System::new(SystemSpec::iid(Marginal::Cauchy { scale: 1.0 })).unwrap();
        let c = Cocycle::new(sys, CocycleSpec::coordinate_read()).unwrap();
        let s = c.symmetrized().unwrap();
        let x = c.system().sample_point(4);
        let diag = SystemPoint::pair(x.clone(), x);
        assert_eq!(s.eval_f(&diag).unwrap(), Vector::scalar(0.0));
        assert_eq!(s.eval_sum(&diag, 300).unwrap(), Vector::scalar(0.0));
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let err = Cocycle::new(
            rotation(),
            CocycleSpec::constant(&[1.0]).minus_drift(&[1.0, 2.0]),
        );
        assert!(matches!(err, Err(LabError::Config(_))));
    }

    #[test]
    fn horizon_bound_is_enforced() {
        let c = Cocycle::new(rotation(), CocycleSpec::constant(&[1.0]))
            .unwrap()
            .with_horizon_bound(10);
        let x = c.system().sample_point(1);
        assert!(matches!(c.eval_sum(&x, 11), Err(LabError::Resource(_))));
        assert!(matches!(c.eval_sum(&x, -11), Err(LabError::Resource(_))));
        assert!(c.eval_sum_stream(&x, 11).is_err());
    }

    #[test]
    fn skew_steps_accumulate_fiber() {
        let c = Cocycle::new(rotation(), CocycleSpec::constant(&[1.0])).unwrap();
        let mut s = SkewState {
            base_point: c.system().sample_point(2),
            fiber: Vector::scalar(0.0),
        };
        for _ in 0..3 {
            s = c.skew_step(&s).unwrap();
        }
        assert_eq!(s.fiber, Vector::scalar(3.0));
    }

    #[test]
    fn orbit_cocycle_at_zero_sequence() {
        let x = OdometerPoint::with_prefix(1, &[0, 0, 0], 3).unwrap();
        assert_eq!(odometer_orbit_cocycle(&x), 2);
        assert_eq!(oracle_orbit_cocycle(&x, 10).unwrap(), 2);
    }

    #[test]
    fn oracle_for_one_and_two_leading() {
        let x = OdometerPoint::with_prefix(1, &[1, 0, 0], 3).unwrap();
        assert_eq!(
            oracle_orbit_cocycle(&x, 10).unwrap(),
            odometer_orbit_cocycle(&x)
        );
        let y = OdometerPoint::with_prefix(1, &[2, 0, 0], 3).unwrap();
        let k = oracle_orbit_cocycle(&y, 9).unwrap();
        assert!((-9..=9).contains(&k));
        assert_eq!(k, odometer_orbit_cocycle(&y));
    }

    #[test]
    fn oracle_reports_exhaustion() {
        let y = OdometerPoint::with_prefix(1, &[2, 2, 2, 0], 3).unwrap();
        assert!(matches!(
            oracle_orbit_cocycle(&y, 2),
            Err(LabError::SearchExhausted { k_max: 2 })
        ));
    }

    #[test]
    fn telescoped_coboundary_is_bounded() {
        let base = CocycleSpec::new(BaseFunction::Indicator { beta: 0.3 });
        let f = Cocycle::new(rotation(), base.clone()).unwrap();
        let g = f
            .with_modifier(Modifier::AddCoboundary {
                b: BoundedFunctionSpec::TrigOfRotation {
                    amplitude: 0.1,
                    frequency: 1.0,
                },
            })
            .unwrap();
        assert_eq!(g.coboundary_bound(), 0.1);
        let x = f.system().sample_point(9);
        for n in [1, 10, 1000] {
            let d = (g.eval_sum(&x, n).unwrap()[0] - f.eval_sum(&x, n).unwrap()[0]).abs();
            assert!(d <= 0.2 + 1e-9);
        }
        assert_eq!(GOLDEN_ALPHA & 1, 1);
    }
}
