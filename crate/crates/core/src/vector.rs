use std::ops::{Add, AddAssign, Deref, DerefMut, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A point of ℝ^d. Dimensions up to four live inline.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(SmallVec<[f64; 4]>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(smallvec::smallvec![0.0; dim])
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Vector(SmallVec::from_slice(values))
    }

    pub fn scalar(value: f64) -> Self {
        Vector(smallvec::smallvec![value])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Vector(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.to_vec()
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(SmallVec::from_vec(v))
    }
}

impl FromIterator<f64> for Vector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Vector(iter.into_iter().collect())
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        self.0
            .iter()
            .zip(rhs.0.iter())
            .map(|(a, b)| a + b)
            .collect()
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        self.0
            .iter()
            .zip(rhs.0.iter())
            .map(|(a, b)| a - b)
            .collect()
    }
}

impl AddAssign<&Vector> for Vector {
    fn add_assign(&mut self, rhs: &Vector) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(mut self) -> Vector {
        for v in self.0.iter_mut() {
            *v = -*v;
        }
        self
    }
}

/// Compensated (Neumaier) running sum of vectors.
#[derive(Debug, Clone)]
pub struct KahanSum {
    sum: Vector,
    compensation: Vector,
}

impl KahanSum {
    pub fn new(dim: usize) -> Self {
        KahanSum {
            sum: Vector::zeros(dim),
            compensation: Vector::zeros(dim),
        }
    }

    pub fn starting_at(start: Vector) -> Self {
        let dim = start.dim();
        KahanSum {
            sum: start,
            compensation: Vector::zeros(dim),
        }
    }

    #[inline]
    pub fn add(&mut self, v: &[f64]) {
        for ((s, c), &x) in self.sum.iter_mut().zip(self.compensation.iter_mut()).zip(v) {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        }
    }

    pub fn value(&self) -> Vector {
        &self.sum + &self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_small_increments() {
        let mut k = KahanSum::new(1);
        let mut naive = 0.0;
        for _ in 0..10_000_000 {
            k.add(&[0.1]);
            naive += 0.1;
        }
        let exact = 1_000_000.0;
        assert!((k.value()[0] - exact).abs() < 1e-9);
        assert!((naive - exact).abs() > 1e-6);
    }

    #[test]
    fn max_norm_of_mixed_signs() {
        assert_eq!(Vector::from_slice(&[-3.0, 2.0]).max_norm(), 3.0);
    }
}
