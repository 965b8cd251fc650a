//! Outer functions synthesized from sampled boundary log-modulus.
//!
//! Two evaluators share one [`BoundaryModulus`]:
//!
//! * [`OuterFunction`] applies the trapezoid rule to the Herglotz integral
//!   over a finite arc union `Γ`; it is only trusted for `|z| ≤ 1 − 4·(2π/n)`.
//! * [`SpectralOuter`] is `exp(P)` for the polynomial `P` whose real part on
//!   the circle is the trigonometric interpolant of the data. It is entire,
//!   outer, and can be evaluated up to and on the circle; it agrees with the
//!   trapezoid evaluator to `O(|z|^{n/2})`.

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cantor::CantorLevel;
use crate::circle::{disk_distance_to_endpoints, disk_distance_to_union, unit, Arc, CircleGrid};
use crate::disk::DiskGrid;
use crate::error::{Error, Result};
use crate::poly::Holomorphic;
use crate::scalar::{from_usize, lit, to_f64, two_pi, Real};
use crate::weight::WeightProfile;

/// Largest fraction of `−∞` samples accepted in raw data before the modulus
/// is treated as vanishing on a set of positive measure.
pub const MAX_ZERO_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipReport {
    pub floor: Option<f64>,
    pub clipped: usize,
    pub fraction: f64,
    /// Samples that were `−∞`.
    pub zeros: usize,
    /// Change of the mean log-modulus caused by clipping finite samples
    /// (samples equal to `−∞` are excluded from this figure).
    pub finite_bias: f64,
}

/// `log|f*|` sampled on a uniform circle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundaryModulus<T> {
    grid: CircleGrid,
    logmod: Vec<T>,
    clip: ClipReport,
}

impl<T: Real> BoundaryModulus<T> {
    /// Samples below `floor` (including `−∞`) are raised to `floor`.
    pub fn new(grid: CircleGrid, raw: Vec<T>, floor: Option<T>) -> Result<Self> {
        Self::build(grid, raw, floor, true)
    }

    fn build(grid: CircleGrid, raw: Vec<T>, floor: Option<T>, cap_zeros: bool) -> Result<Self> {
        if raw.len() != grid.len() {
            return Err(Error::input(format!("expected {} samples, got {}", grid.len(), raw.len())));
        }
        let mut logmod = raw;
        let mut clipped = 0usize;
        let mut zeros = 0usize;
        let mut bias = T::zero();
        for (index, v) in logmod.iter_mut().enumerate() {
            if v.is_nan() || *v == T::infinity() {
                return Err(Error::NonFinite { index });
            }
            match floor {
                Some(fl) if *v < fl => {
                    if v.is_finite() {
                        bias += fl - *v;
                    } else {
                        zeros += 1;
                    }
                    *v = fl;
                    clipped += 1;
                }
                None if *v == T::neg_infinity() => {
                    return Err(Error::input("−∞ log-modulus samples need a clipping floor"));
                }
                _ => {}
            }
        }
        let fraction = clipped as f64 / grid.len() as f64;
        let zero_fraction = zeros as f64 / grid.len() as f64;
        if cap_zeros && zero_fraction > MAX_ZERO_FRACTION {
            return Err(Error::input(format!(
                "{:.1}% of samples are zeros: the modulus vanishes on too large a set to be log-integrable",
                100.0 * zero_fraction
            )));
        }
        let clip = ClipReport {
            floor: floor.map(to_f64),
            clipped,
            fraction,
            zeros,
            finite_bias: to_f64(bias) / grid.len() as f64,
        };
        Ok(Self { grid, logmod, clip })
    }

    pub fn from_fn<F: Fn(T) -> T>(grid: CircleGrid, f: F, floor: Option<T>) -> Result<Self> {
        Self::new(grid, grid.sample(f), floor)
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn samples(&self) -> &[T] {
        &self.logmod
    }

    pub fn clip_report(&self) -> &ClipReport {
        &self.clip
    }

    /// `(1/2π)∫ log|f*|`, i.e. `log|f(0)|` for `Γ = T`.
    pub fn mean(&self) -> T {
        self.logmod.iter().fold(T::zero(), |a, &b| a + b) / from_usize(self.logmod.len())
    }

    pub fn max(&self) -> T {
        self.logmod.iter().cloned().fold(T::neg_infinity(), T::max)
    }

    /// Shifts the data so that `max log|f*| = 0` (hence `‖f‖_∞ ≤ 1`); returns the shift.
    pub fn normalize(&mut self) -> T {
        let m = self.max();
        for v in &mut self.logmod {
            *v -= m;
        }
        if let Some(fl) = self.clip.floor.as_mut() {
            *fl -= to_f64(m);
        }
        m
    }

    /// CSV rows `theta,logmod`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["theta", "logmod"])?;
        for (k, v) in self.logmod.iter().enumerate() {
            wtr.write_record([
                format!("{:.17e}", to_f64(self.grid.angle::<T>(k))),
                format!("{:.17e}", to_f64(*v)),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads `theta,logmod` rows; the angles must form the uniform grid.
    /// Entries `-inf` are accepted when a floor is given.
    pub fn read_csv<R: Read>(input: R, floor: Option<T>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut thetas = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                let s = rec.get(i).ok_or_else(|| Error::input("short CSV row"))?.trim();
                s.parse::<f64>().map_err(|e| Error::input(format!("bad number {s:?}: {e}")))
            };
            thetas.push(parse(0)?);
            values.push(lit::<T>(parse(1)?));
        }
        let grid = CircleGrid::new(thetas.len())?;
        for (k, &t) in thetas.iter().enumerate() {
            if (t - grid.angle::<f64>(k)).abs() > 1e-9 {
                return Err(Error::input(format!("row {k}: theta {t} is not on the uniform grid")));
            }
        }
        Self::new(grid, values, floor)
    }
}

/// Half-open membership `θ ∈ [start, start + length)`, so that complementary
/// arcs partition the grid.
fn in_arc<T: Real>(arc: &Arc<T>, theta: T) -> bool {
    arc.is_full() || arc.offset(theta) < arc.length()
}

/// Complement of a finite union of disjoint arcs.
pub fn complement_arcs<T: Real>(arcs: &[Arc<T>]) -> Result<Vec<Arc<T>>> {
    if arcs.is_empty() {
        return Ok(vec![Arc::full()]);
    }
    if arcs.iter().any(|a| a.is_full()) {
        return Ok(Vec::new());
    }
    let mut sorted: Vec<Arc<T>> = arcs.to_vec();
    sorted.sort_by(|a, b| a.start().partial_cmp(&b.start()).expect("finite"));
    let mut out = Vec::new();
    for i in 0..sorted.len() {
        let end = sorted[i].end_unwrapped();
        let next = if i + 1 < sorted.len() { sorted[i + 1].start() } else { sorted[0].start() + two_pi() };
        let len = next - end;
        if len > T::zero() {
            out.push(Arc::new(end, len)?);
        }
    }
    Ok(out)
}

/// `f_Γ(z) = exp((1/2π)∫_Γ (ζ+z)/(ζ−z) log|f*(ζ)| |dζ|)` by the trapezoid rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OuterFunction<T> {
    modulus: BoundaryModulus<T>,
    gamma: Vec<Arc<T>>,
    /// `log|f*|` on `Γ`, zero off `Γ`.
    masked: Vec<T>,
}

pub fn synthesize<T: Real>(modulus: &BoundaryModulus<T>, gamma: &[Arc<T>]) -> OuterFunction<T> {
    let grid = modulus.grid();
    let masked = (0..grid.len())
        .map(|k| {
            let th = grid.angle::<T>(k);
            if gamma.iter().any(|a| in_arc(a, th)) {
                modulus.samples()[k]
            } else {
                T::zero()
            }
        })
        .collect();
    OuterFunction { modulus: modulus.clone(), gamma: gamma.to_vec(), masked }
}

impl<T: Real> OuterFunction<T> {
    /// Outer function with `Γ = T`.
    pub fn new(modulus: &BoundaryModulus<T>) -> Self {
        synthesize(modulus, &[Arc::full()])
    }

    pub fn modulus(&self) -> &BoundaryModulus<T> {
        &self.modulus
    }

    pub fn gamma(&self) -> &[Arc<T>] {
        &self.gamma
    }

    pub fn masked_logmod(&self) -> &[T] {
        &self.masked
    }

    /// Largest `|z|` at which the trapezoid Herglotz sum is trusted.
    pub fn max_radius(&self) -> T {
        T::one() - lit::<T>(4.0) * self.modulus.grid().spacing::<T>()
    }

    fn check_margin(&self, z: Complex<T>) -> Result<()> {
        let r = z.norm();
        if r > self.max_radius() {
            return Err(Error::PrecisionMargin { radius: to_f64(r), max_radius: to_f64(self.max_radius()) });
        }
        Ok(())
    }

    /// `log f_Γ(z)` and `f_Γ′(z)/f_Γ(z)`.
    fn log_and_logderiv(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let grid = self.modulus.grid();
        let n = from_usize::<T>(grid.len());
        let mut h = Complex::new(T::zero(), T::zero());
        let mut d = Complex::new(T::zero(), T::zero());
        for (k, &l) in self.masked.iter().enumerate() {
            if l == T::zero() {
                continue;
            }
            let zeta = unit(grid.angle::<T>(k));
            let inv = (zeta - z).inv();
            h += (zeta + z) * inv * l;
            d += zeta * inv * inv * (l * lit(2.0));
        }
        (h / n, d / n)
    }

    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.check_margin(z)?;
        Ok(self.log_and_logderiv(z).0.exp())
    }

    pub fn eval_deriv(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.check_margin(z)?;
        let (h, d) = self.log_and_logderiv(z);
        Ok(h.exp() * d)
    }

    /// `f_Γ(0) = exp((1/2π)∫_Γ log|f*|)`, exact for the trapezoid data.
    pub fn value_at_zero(&self) -> T {
        let n = from_usize::<T>(self.masked.len());
        (self.masked.iter().fold(T::zero(), |a, &b| a + b) / n).exp()
    }
}

impl<T: Real> Holomorphic<T> for OuterFunction<T> {
    fn value(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.eval(z)
    }

    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.eval_deriv(z)
    }
}

/// Boundary modulus `log w(d(θ, E_N))`, clipped at `log w(a_N/2)`.
///
/// Zeros occur only on `E_N` (a discretization of a null set) once `w > 0`
/// at `a_N/2`, so the zero-fraction cap of [`BoundaryModulus::new`] is not applied.
pub fn modulus_from_weight<T: Real, W: WeightProfile<T> + ?Sized>(
    w: &W,
    level: &CantorLevel<T>,
    grid: CircleGrid,
) -> Result<BoundaryModulus<T>> {
    use rayon::prelude::*;
    let floor_w = w.value(level.arc_length() / lit(2.0));
    if !(floor_w > T::zero()) || !floor_w.is_finite() {
        return Err(Error::input(format!(
            "weight {} is not positive at a_N/2; not an outer-function modulus",
            w.describe()
        )));
    }
    let raw: Vec<T> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let v = w.value(level.distance(grid.angle::<T>(k)));
            if v > T::zero() {
                v.ln()
            } else {
                T::neg_infinity()
            }
        })
        .collect();
    BoundaryModulus::build(grid, raw, Some(floor_w.ln()), false)
}

/// The outer function `f_w` with `|f_w*| = w(d(·,E))`, `Γ = T`.
pub fn outer_from_weight<T: Real, W: WeightProfile<T> + ?Sized>(
    w: &W,
    level: &CantorLevel<T>,
    grid: CircleGrid,
) -> Result<OuterFunction<T>> {
    Ok(OuterFunction::new(&modulus_from_weight(w, level, grid)?))
}

/// `exp(P)` with `Re P` on the circle equal to the trigonometric interpolant
/// of the (masked) log-modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectralOuter<T> {
    n: usize,
    /// `c_0, …, c_{n/2}` with `P(z) = Σ c_m z^m`.
    log_coeffs: Vec<Complex<T>>,
    /// Taylor coefficients of `exp(P)` up to `oversample·n`.
    taylor: Vec<Complex<T>>,
    /// Share of `Σ|a_j|²` carried by the top quarter of the computed coefficients.
    tail_fraction: T,
    oversample: usize,
    /// Grid samples that were raised to the clipping floor.
    clipped: Vec<bool>,
}

impl<T: Real> SpectralOuter<T> {
    pub fn new(f: &OuterFunction<T>, oversample: usize) -> Result<Self> {
        if oversample < 2 {
            return Err(Error::input("oversample must be at least 2"));
        }
        let n = f.masked.len();
        let mut buf: Vec<Complex<T>> = f.masked.iter().map(|&l| Complex::new(l, T::zero())).collect();
        T::fft(&mut buf, false);
        let nf = from_usize::<T>(n);
        let half = n / 2;
        let mut log_coeffs = Vec::with_capacity(half + 1);
        log_coeffs.push(Complex::new(buf[0].re / nf, T::zero()));
        for c in buf.iter().take(half).skip(1) {
            log_coeffs.push(c * (lit::<T>(2.0) / nf));
        }
        log_coeffs.push(Complex::new(buf[half].re / nf, T::zero()));

        let m = oversample * n;
        let values = eval_poly_on_ring(&log_coeffs, T::one(), m);
        let mut taylor: Vec<Complex<T>> = values.into_iter().map(|p| p.exp()).collect();
        T::fft(&mut taylor, false);
        let mf = from_usize::<T>(m);
        for a in &mut taylor {
            *a = *a / mf;
        }
        let total = taylor.iter().fold(T::zero(), |s, a| s + a.norm_sqr());
        let tail = taylor[3 * m / 4..].iter().fold(T::zero(), |s, a| s + a.norm_sqr());
        let tail_fraction = if total > T::zero() { tail / total } else { T::zero() };
        let clipped = match f.modulus.clip.floor {
            Some(fl) => f
                .modulus
                .samples()
                .iter()
                .zip(&f.masked)
                .map(|(&v, &l)| l != T::zero() && to_f64(v) <= fl)
                .collect(),
            None => vec![false; n],
        };
        Ok(Self { n, log_coeffs, taylor, tail_fraction, oversample, clipped })
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn log_coeffs(&self) -> &[Complex<T>] {
        &self.log_coeffs
    }

    pub fn taylor(&self) -> &[Complex<T>] {
        &self.taylor
    }

    pub fn tail_fraction(&self) -> T {
        self.tail_fraction
    }

    pub fn value_at_zero(&self) -> T {
        self.log_coeffs[0].re.exp()
    }

    /// Whether the grid sample nearest to `theta` was clipped.
    pub fn clipped_near(&self, theta: T) -> bool {
        let h = two_pi::<T>() / from_usize::<T>(self.n);
        let k = (crate::circle::wrap_angle(theta) / h).round().to_usize().unwrap_or(0) % self.n;
        self.clipped[k]
    }

    fn log_and_deriv(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let zero = Complex::new(T::zero(), T::zero());
        let mut p = zero;
        let mut dp = zero;
        for &c in self.log_coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `u(θ) = Re P(e^{iθ})` and `u′(θ)` at `θ_j = φ + 2πj/count`.
    pub fn boundary_on_shifted_grid(&self, phi: T, count: usize) -> Result<(Vec<T>, Vec<T>)> {
        if count <= self.log_coeffs.len() {
            return Err(Error::input("boundary grid must be finer than the log-coefficient band"));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let mut a = vec![zero; count];
        let mut b = vec![zero; count];
        for (m, &c) in self.log_coeffs.iter().enumerate() {
            let mf = from_usize::<T>(m);
            let rot = unit(mf * phi);
            a[m] = c * rot;
            b[m] = c * rot * Complex::new(T::zero(), mf);
        }
        T::fft(&mut a, true);
        T::fft(&mut b, true);
        Ok((a.iter().map(|v| v.re).collect(), b.iter().map(|v| v.re).collect()))
    }

    /// `u(θ)` and `u′(θ)` at a single angle.
    pub fn boundary_at(&self, theta: T) -> (T, T) {
        let mut u = T::zero();
        let mut du = T::zero();
        for (m, &c) in self.log_coeffs.iter().enumerate() {
            let mf = from_usize::<T>(m);
            let e = c * unit(mf * theta);
            u += e.re;
            du -= e.im * mf;
        }
        (u, du)
    }
}

/// `P(r e^{2πij/count})` by folding coefficients modulo `count` and one inverse FFT.
fn eval_poly_on_ring<T: Real>(coeffs: &[Complex<T>], r: T, count: usize) -> Vec<Complex<T>> {
    let mut buf = vec![Complex::new(T::zero(), T::zero()); count];
    let mut rp = T::one();
    for (m, &c) in coeffs.iter().enumerate() {
        buf[m % count] += c * rp;
        rp = rp * r;
    }
    T::fft(&mut buf, true);
    buf
}

impl<T: Real> Holomorphic<T> for SpectralOuter<T> {
    fn value(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.log_and_deriv(z).0.exp())
    }

    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        let (p, dp) = self.log_and_deriv(z);
        Ok(dp * p.exp())
    }

    fn derivative_on_ring(&self, r: T, count: usize) -> Result<Vec<Complex<T>>> {
        let p = eval_poly_on_ring(&self.log_coeffs, r, count);
        let dcoeffs: Vec<Complex<T>> = self
            .log_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, &c)| c * from_usize::<T>(m))
            .collect();
        let dp = eval_poly_on_ring(&dcoeffs, r, count);
        Ok(p.into_iter().zip(dp).map(|(p, dp)| dp * p.exp()).collect())
    }

    fn ring_samples(&self) -> usize {
        self.oversample * self.n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KorenblumAudit {
    pub f0_abs: f64,
    pub points_checked: usize,
    /// Grid points outside the trusted radius of the trapezoid evaluator.
    pub points_skipped: usize,
    /// `max |f_Γ′(z)|·dist(z,Γ)² / (2 log(1/|f(0)|))`.
    pub max_gamma_ratio: f64,
    /// `max |f_Γ′(z)| / (|f′(z)| + dist(z,∂Γ)^{−4})`.
    pub empirical_constant: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks `|f_Γ′(z)| ≤ 2 log(1/|f(0)|)/dist(z,Γ)²` on a disk grid and reports
/// the smallest constant in `|f_Γ′| ≤ C(|f′| + dist(z,∂Γ)^{−4})`.
pub fn korenblum_audit<T: Real>(
    modulus: &BoundaryModulus<T>,
    gamma: &[Arc<T>],
    grid: &DiskGrid<T>,
    tolerance: f64,
) -> Result<KorenblumAudit> {
    use rayon::prelude::*;
    let slack = T::epsilon() * lit(64.0) * (T::one() + modulus.max().abs());
    if modulus.max() > slack {
        return Err(Error::HypothesisViolated("‖f‖_∞ ≤ 1 required: normalize the modulus first".into()));
    }
    let f = OuterFunction::new(modulus);
    let fg = synthesize(modulus, gamma);
    let f0 = f.value_at_zero();
    if f0 == T::zero() {
        return Err(Error::HypothesisViolated("f(0) = 0: the bound is degenerate".into()));
    }
    let denom = lit::<T>(2.0) * (T::one() / f0).ln();
    let limit = f.max_radius();
    let points: Vec<Complex<T>> = grid.points().map(|(z, _)| z).collect();
    let results: Vec<Option<(T, T)>> = points
        .par_iter()
        .map(|&z| {
            if z.norm() > limit {
                return Ok(None);
            }
            let dg = fg.eval_deriv(z)?.norm();
            let dist = disk_distance_to_union(gamma, z);
            let ratio = if dg == T::zero() {
                T::zero()
            } else if denom > T::zero() {
                dg * dist * dist / denom
            } else {
                T::infinity()
            };
            let df = f.eval_deriv(z)?.norm();
            let db = disk_distance_to_endpoints(gamma, z);
            let boundary_term = if db.is_finite() { db.powi(-4) } else { T::zero() };
            let scale = df + boundary_term;
            let c = if dg == T::zero() { T::zero() } else { dg / scale };
            Ok(Some((ratio, c)))
        })
        .collect::<Result<_>>()?;
    let mut checked = 0usize;
    let mut max_ratio = T::zero();
    let mut max_c = T::zero();
    for (ratio, c) in results.iter().flatten() {
        checked += 1;
        max_ratio = max_ratio.max(*ratio);
        max_c = max_c.max(*c);
    }
    let max_ratio = to_f64(max_ratio);
    Ok(KorenblumAudit {
        f0_abs: to_f64(f0),
        points_checked: checked,
        points_skipped: points.len() - checked,
        max_gamma_ratio: max_ratio,
        empirical_constant: to_f64(max_c),
        tolerance,
        pass: max_ratio <= 1.0 + tolerance,
    })
}
