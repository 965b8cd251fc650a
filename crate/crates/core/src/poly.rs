//! Holomorphic functions on the disk and Taylor polynomials.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circle::unit;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, two_pi, Real};

/// A function holomorphic on the open unit disk.
pub trait Holomorphic<T: Real>: Sync {
    fn value(&self, z: Complex<T>) -> Result<Complex<T>>;

    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>>;

    /// `f′(r e^{2πij/count})` for `j < count`.
    fn derivative_on_ring(&self, r: T, count: usize) -> Result<Vec<Complex<T>>> {
        (0..count)
            .map(|j| self.derivative(unit(two_pi::<T>() * from_usize::<T>(j) / from_usize::<T>(count)) * r))
            .collect()
    }

    /// Ring sample count at which trapezoid sums of `|f′|²` become exact (or
    /// sufficiently resolved); `0` when the function has no such scale.
    fn ring_samples(&self) -> usize {
        0
    }
}

/// `Σ a_n z^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TaylorPoly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> TaylorPoly<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::input("polynomial needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::input("polynomial coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); n + 1];
        coeffs[n] = Complex::new(T::one(), T::zero());
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[T]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect())
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

impl<T: Real> Holomorphic<T> for TaylorPoly<T> {
    fn value(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c))
    }

    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (n, &c)| acc * z + c * from_usize::<T>(n)))
    }

    fn derivative_on_ring(&self, r: T, count: usize) -> Result<Vec<Complex<T>>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let mut buf = vec![Complex::new(T::zero(), T::zero()); count];
        let mut rp = T::one();
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            // coefficient of z^{j-1} in f′, folded modulo count
            buf[(j - 1) % count] += *c * (from_usize::<T>(j) * rp);
            rp = rp * r;
        }
        T::fft(&mut buf, true);
        Ok(buf)
    }

    fn ring_samples(&self) -> usize {
        (2 * self.degree()).max(1).next_power_of_two()
    }
}

/// Holomorphic function given by closures (used for diagnostics and tests).
pub struct FnHolomorphic<F, G> {
    pub value: F,
    pub derivative: G,
}

impl<T, F, G> Holomorphic<T> for FnHolomorphic<F, G>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T> + Sync,
    G: Fn(Complex<T>) -> Complex<T> + Sync,
{
    fn value(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok((self.value)(z))
    }

    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok((self.derivative)(z))
    }
}
