//! Increasing weights `w : [0, π] → ℝ⁺` used to prescribe `|f*| = w(d(·,E))`.

use crate::scalar::Real;

pub trait WeightProfile<T: Real>: Sync {
    fn value(&self, t: T) -> T;

    fn derivative(&self, t: T) -> T;

    /// Points where `w` is not smooth, sorted.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }

    fn describe(&self) -> String;
}

/// `w(t) = scale·t^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerWeight<T> {
    pub beta: T,
    pub scale: T,
}

impl<T: Real> PowerWeight<T> {
    pub fn new(beta: T) -> Self {
        Self { beta, scale: T::one() }
    }
}

impl<T: Real> WeightProfile<T> for PowerWeight<T> {
    fn value(&self, t: T) -> T {
        self.scale * t.max(T::zero()).powf(self.beta)
    }

    fn derivative(&self, t: T) -> T {
        if t <= T::zero() {
            return if self.beta > T::one() { T::zero() } else { T::infinity() };
        }
        self.scale * self.beta * t.powf(self.beta - T::one())
    }

    fn describe(&self) -> String {
        format!("{}·t^{}", self.scale, self.beta)
    }
}

/// `w ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantWeight<T>(pub T);

impl<T: Real> WeightProfile<T> for ConstantWeight<T> {
    fn value(&self, _t: T) -> T {
        self.0
    }

    fn derivative(&self, _t: T) -> T {
        T::zero()
    }

    fn describe(&self) -> String {
        format!("constant {}", self.0)
    }
}
