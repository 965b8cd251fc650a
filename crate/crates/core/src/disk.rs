//! Tensor-product quadrature on the unit disk.
//!
//! The radial variable is `s = r²` (so `dA = ½ ds dθ`), integrated by
//! Gauss–Legendre on a mesh graded geometrically towards `s = 1`: the
//! layers are `[0, ½], [½, ¾], …, [1 - 2^{-L}, 1]`. Angles use the uniform
//! trapezoid rule, with a per-ring count that grows linearly with the layer
//! index.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circle::unit;
use crate::error::{Error, Result};
use crate::gauss::GaussLegendre;
use crate::scalar::{from_usize, lit, two_pi, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskGridParams {
    /// Gauss–Legendre nodes per radial layer.
    pub radial_order: usize,
    /// Number of geometric layers accumulating at `|z| = 1`.
    pub boundary_layers: usize,
    /// Angular samples on the innermost layer.
    pub angular_base: usize,
    /// Extra angular samples per additional layer.
    pub angular_growth: usize,
}

impl Default for DiskGridParams {
    fn default() -> Self {
        Self { radial_order: 16, boundary_layers: 40, angular_base: 96, angular_growth: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ring<T> {
    pub radius: T,
    /// `s = r²`.
    pub s: T,
    /// `1 − s`, computed without cancellation.
    pub one_minus_s: T,
    /// Radial weight in `s`, including the factor ½ from `dA = ½ ds dθ`.
    pub radial_weight: T,
    pub layer: usize,
    pub angular_count: usize,
}

impl<T: Real> Ring<T> {
    pub fn angle(&self, j: usize) -> T {
        two_pi::<T>() * from_usize::<T>(j) / from_usize::<T>(self.angular_count)
    }

    pub fn point(&self, j: usize) -> Complex<T> {
        unit(self.angle(j)) * self.radius
    }

    /// Area weight of one node on this ring.
    pub fn node_weight(&self) -> T {
        self.radial_weight * two_pi::<T>() / from_usize::<T>(self.angular_count)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiskGrid<T> {
    params: DiskGridParams,
    rings: Vec<Ring<T>>,
}

impl<T: Real> DiskGrid<T> {
    pub fn new(params: DiskGridParams) -> Result<Self> {
        if params.radial_order == 0 || params.angular_base < 4 {
            return Err(Error::input("disk grid needs radial_order >= 1 and angular_base >= 4"));
        }
        let rule = GaussLegendre::<T>::new(params.radial_order);
        let half = lit::<T>(0.5);
        let mut rings = Vec::new();
        // Layer j covers [1 - 2^{-j}, 1 - 2^{-j-1}]; the last covers [1 - 2^{-L}, 1].
        for layer in 0..=params.boundary_layers {
            let a = T::one() - half.powi(layer as i32);
            let b = if layer == params.boundary_layers {
                T::one()
            } else {
                T::one() - half.powi(layer as i32 + 1)
            };
            let a = if layer == 0 { T::zero() } else { a };
            let angular_count = params.angular_base + params.angular_growth * layer;
            let tail = T::one() - b;
            for (s, w) in rule.mapped(a, b) {
                rings.push(Ring {
                    radius: s.sqrt(),
                    s,
                    one_minus_s: tail + (b - s),
                    radial_weight: w * half,
                    layer,
                    angular_count,
                });
            }
        }
        Ok(Self { params, rings })
    }

    pub fn params(&self) -> DiskGridParams {
        self.params
    }

    pub fn rings(&self) -> &[Ring<T>] {
        &self.rings
    }

    pub fn node_count(&self) -> usize {
        self.rings.iter().map(|r| r.angular_count).sum()
    }

    /// All nodes with their area weights.
    pub fn points(&self) -> impl Iterator<Item = (Complex<T>, T)> + '_ {
        self.rings.iter().flat_map(|ring| {
            let w = ring.node_weight();
            (0..ring.angular_count).map(move |j| (ring.point(j), w))
        })
    }

    /// Sum of all weights; tends to `π` as the grid refines.
    pub fn total_weight(&self) -> T {
        self.rings
            .iter()
            .fold(T::zero(), |acc, r| acc + r.radial_weight * two_pi::<T>())
    }
}

/// `∫_D f dA` on the given grid.
pub fn integrate_disk<T: Real, F: Fn(Complex<T>) -> T + Sync>(grid: &DiskGrid<T>, f: F) -> T {
    use rayon::prelude::*;
    let per_ring: Vec<T> = grid
        .rings()
        .par_iter()
        .map(|ring| {
            let sum = (0..ring.angular_count).fold(T::zero(), |acc, j| acc + f(ring.point(j)));
            sum * ring.node_weight()
        })
        .collect();
    per_ring.iter().fold(T::zero(), |a, &b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> DiskGrid<f64> {
        DiskGrid::new(DiskGridParams::default()).unwrap()
    }

    #[test]
    fn constant_and_radial_examples() {
        let g = grid();
        assert!((integrate_disk(&g, |_| 1.0) - PI).abs() < 1e-10);
        assert!((integrate_disk(&g, |z| z.norm_sqr()) - PI / 2.0).abs() < 1e-10);
        let v = integrate_disk(&g, |z| (1.0 - z.norm_sqr()).powf(0.5));
        assert!((v - 2.0 * PI / 3.0).abs() < 1e-8, "{v}");
        assert!((g.total_weight() - PI).abs() < 1e-12);
    }

    #[test]
    fn nodes_strictly_inside_with_positive_weights() {
        let g = grid();
        for (z, w) in g.points() {
            assert!(z.norm() < 1.0);
            assert!(w > 0.0);
        }
    }

    #[test]
    fn error_decreases_under_ring_doubling() {
        // ∫_D cos(3|z|²) dA = π sin(3)/3
        let exact = PI * 3f64.sin() / 3.0;
        let mut last = f64::INFINITY;
        for order in [1usize, 2, 4] {
            let g = DiskGrid::<f64>::new(DiskGridParams {
                radial_order: order,
                boundary_layers: 2,
                angular_base: 8,
                angular_growth: 0,
            })
            .unwrap();
            let err = (integrate_disk(&g, |z| (3.0 * z.norm_sqr()).cos()) - exact).abs();
            assert!(err < last, "order {order}: {err} !< {last}");
            last = err;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn angular_counts_grow_linearly() {
        let g = grid();
        let first = g.rings().first().unwrap();
        let last = g.rings().last().unwrap();
        assert_eq!(first.angular_count, 96);
        assert_eq!(last.angular_count, 96 + 8 * 40);
    }
}
