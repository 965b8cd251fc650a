//! Geometry on the unit circle and trapezoid quadrature for `|dζ|` integrals.
//!
//! Angles are stored in `[0, 2π)`; all arc arithmetic is mod `2π`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, two_pi, Real};

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let tau = two_pi::<T>();
    let mut r = theta % tau;
    if r < T::zero() {
        r += tau;
    }
    if r >= tau {
        r -= tau;
    }
    r
}

/// Arclength distance on the unit circle, in `[0, π]`.
pub fn circle_distance<T: Real>(theta1: T, theta2: T) -> T {
    let d = wrap_angle(theta1 - theta2);
    d.min(two_pi::<T>() - d)
}

/// Chordal length `|ζ - ζ'|` of an arc of length `d`.
#[inline]
pub fn chord<T: Real>(arclength: T) -> T {
    lit::<T>(2.0) * (arclength / lit(2.0)).sin()
}

#[inline]
pub fn unit<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Closed arc `[start, start + length]` traversed counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc<T> {
    start: T,
    length: T,
}

impl<T: Real> Arc<T> {
    pub fn new(start: T, length: T) -> Result<Self> {
        if !start.is_finite() || !length.is_finite() {
            return Err(Error::input("arc endpoints must be finite"));
        }
        if length <= T::zero() || length > two_pi::<T>() {
            return Err(Error::input(format!("arc length {length} outside (0, 2π]")));
        }
        Ok(Self { start: wrap_angle(start), length })
    }

    /// Arc of the given length whose midpoint sits at `center`.
    pub fn centered(center: T, length: T) -> Result<Self> {
        Self::new(center - length / lit(2.0), length)
    }

    pub fn full() -> Self {
        Self { start: T::zero(), length: two_pi() }
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// End angle, not wrapped (may exceed `2π`).
    pub fn end_unwrapped(&self) -> T {
        self.start + self.length
    }

    pub fn end(&self) -> T {
        wrap_angle(self.start + self.length)
    }

    pub fn midpoint(&self) -> T {
        wrap_angle(self.start + self.length / lit(2.0))
    }

    pub fn is_full(&self) -> bool {
        self.length >= two_pi::<T>()
    }

    /// Counter-clockwise offset of `theta` from the arc start, in `[0, 2π)`.
    pub fn offset(&self, theta: T) -> T {
        wrap_angle(theta - self.start)
    }

    pub fn contains(&self, theta: T) -> bool {
        self.is_full() || self.offset(theta) <= self.length
    }

    /// Arclength distance from `theta` to the closed arc.
    pub fn distance(&self, theta: T) -> T {
        if self.contains(theta) {
            return T::zero();
        }
        circle_distance(theta, self.start).min(circle_distance(theta, self.end()))
    }

    /// Euclidean distance from a disk point to the arc.
    pub fn disk_distance(&self, z: Complex<T>) -> T {
        let r = z.norm();
        if r == T::zero() {
            return T::one();
        }
        let theta = z.arg();
        if self.contains(theta) {
            return T::one() - r;
        }
        let a = (z - unit(self.start)).norm();
        let b = (z - unit(self.end())).norm();
        a.min(b)
    }
}

/// Euclidean distance from `z` to the boundary points of a finite arc union (∂Γ).
///
/// Returns `+∞` when the union has no boundary (empty or full circle).
pub fn disk_distance_to_endpoints<T: Real>(arcs: &[Arc<T>], z: Complex<T>) -> T {
    arcs.iter()
        .filter(|a| !a.is_full())
        .flat_map(|a| [a.start(), a.end()])
        .map(|t| (z - unit(t)).norm())
        .fold(T::infinity(), T::min)
}

/// Euclidean distance from `z` to a finite arc union (`+∞` for the empty union).
pub fn disk_distance_to_union<T: Real>(arcs: &[Arc<T>], z: Complex<T>) -> T {
    arcs.iter().map(|a| a.disk_distance(z)).fold(T::infinity(), T::min)
}

/// Uniform grid `θ_k = 2πk/n` with trapezoid weights `2π/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::input(format!("circle grid needs an even n >= 8, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle<T: Real>(&self, k: usize) -> T {
        two_pi::<T>() * from_usize::<T>(k) / from_usize::<T>(self.n)
    }

    pub fn angles<T: Real>(&self) -> Vec<T> {
        (0..self.n).map(|k| self.angle(k)).collect()
    }

    pub fn spacing<T: Real>(&self) -> T {
        two_pi::<T>() / from_usize::<T>(self.n)
    }

    pub fn weight<T: Real>(&self) -> T {
        self.spacing()
    }

    pub fn sample<T: Real, F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        (0..self.n).map(|k| f(self.angle(k))).collect()
    }

    /// Trapezoid approximation of `∫_T g |dζ|`.
    pub fn integrate<T: Real>(&self, samples: &[T]) -> Result<T> {
        integrate_circle(self, samples)
    }
}

pub fn integrate_circle<T: Real>(grid: &CircleGrid, samples: &[T]) -> Result<T> {
    if samples.len() != grid.len() {
        return Err(Error::input(format!(
            "expected {} samples, got {}",
            grid.len(),
            samples.len()
        )));
    }
    let mut acc = T::zero();
    for (index, &v) in samples.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index });
        }
        acc += v;
    }
    Ok(acc * grid.weight::<T>())
}
