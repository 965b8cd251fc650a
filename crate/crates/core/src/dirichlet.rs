//! Weighted Dirichlet integrals `D_α`, local Dirichlet integrals, and the
//! inequality audits built on them.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cantor::CantorLevel;
use crate::circle::{unit, Arc, CircleGrid};
use crate::disk::{DiskGrid, DiskGridParams, Ring};
use crate::error::{Error, Result};
use crate::gauss::GaussLegendre;
use crate::outer::{outer_from_weight, SpectralOuter};
use crate::poly::{Holomorphic, TaylorPoly};
use crate::scalar::{from_usize, lit, to_f64, two_pi, Real};
use crate::special::beta_int_table;
use crate::weight::WeightProfile;

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::input(format!("α = {alpha} outside [0, 1]")));
    }
    Ok(())
}

fn ring_count<T: Real, F: Holomorphic<T> + ?Sized>(f: &F, ring: &Ring<T>) -> usize {
    ring.angular_count.max(f.ring_samples())
}

/// `(1/π)∫_D |f′|²(1−|z|²)^α dA` on `grid`.
pub fn dirichlet_area<T: Real, F: Holomorphic<T> + ?Sized>(f: &F, alpha: T, grid: &DiskGrid<T>) -> Result<T> {
    check_alpha(alpha)?;
    let parts: Vec<T> = grid
        .rings()
        .par_iter()
        .map(|ring| {
            let count = ring_count(f, ring);
            let d = f.derivative_on_ring(ring.radius, count)?;
            let mut sum = T::zero();
            for (index, v) in d.iter().enumerate() {
                let m = v.norm_sqr();
                if !m.is_finite() {
                    return Err(Error::NonFinite { index });
                }
                sum += m;
            }
            Ok(sum * ring.radial_weight * two_pi::<T>() / from_usize::<T>(count) * ring.one_minus_s.powf(alpha))
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold(T::zero(), |a, &b| a + b) / T::PI())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffReport {
    pub value: f64,
    /// `Σ (n+1)^{1−α}|a_n|²`.
    pub weighted_sum: f64,
    /// `(|a_0|² + D_α(p)) / Σ (n+1)^{1−α}|a_n|²`.
    pub equivalence_ratio: f64,
}

/// `Σ_{n≥1} n²·B(n, α+1)·|a_n|²`.
pub fn dirichlet_coeff_exact<T: Real>(p: &TaylorPoly<T>, alpha: T) -> Result<T> {
    dirichlet_from_coeffs(p.coeffs(), alpha)
}

/// Same diagonal form for an arbitrary coefficient slice.
pub fn dirichlet_from_coeffs<T: Real>(coeffs: &[Complex<T>], alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    if coeffs.len() < 2 {
        return Ok(T::zero());
    }
    let betas = beta_int_table(coeffs.len() - 1, alpha + T::one());
    let mut terms: Vec<T> = coeffs
        .iter()
        .skip(1)
        .zip(&betas)
        .enumerate()
        .map(|(i, (c, &b))| {
            let n = from_usize::<T>(i + 1);
            n * n * b * c.norm_sqr()
        })
        .collect();
    // Summing small to large keeps long tails accurate.
    terms.sort_by(|a, b| a.partial_cmp(b).expect("finite terms"));
    Ok(terms.iter().fold(T::zero(), |a, &b| a + b))
}

pub fn dirichlet_coeff_report<T: Real>(p: &TaylorPoly<T>, alpha: T) -> Result<CoeffReport> {
    let value = dirichlet_coeff_exact(p, alpha)?;
    let weighted = p
        .coeffs()
        .iter()
        .enumerate()
        .fold(T::zero(), |a, (n, c)| a + from_usize::<T>(n + 1).powf(T::one() - alpha) * c.norm_sqr());
    let a0 = p.coeffs()[0].norm_sqr();
    let ratio = if weighted > T::zero() { to_f64((a0 + value) / weighted) } else { f64::NAN };
    Ok(CoeffReport { value: to_f64(value), weighted_sum: to_f64(weighted), equivalence_ratio: ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaStatus {
    Converged,
    /// The value kept growing under refinement.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletReport {
    pub alpha: f64,
    pub area_value: f64,
    pub coeff_value: Option<f64>,
    pub f0_abs: f64,
    pub norm_alpha: f64,
    pub method: String,
    pub grid: DiskGridParams,
    /// Area values on successively refined grids.
    pub refinement: Vec<f64>,
    pub status: AreaStatus,
}

/// Refinement used for the boundedness diagnostic.
pub fn refine_params(p: DiskGridParams) -> DiskGridParams {
    DiskGridParams {
        radial_order: p.radial_order + 8,
        boundary_layers: p.boundary_layers + 12,
        angular_base: 2 * p.angular_base,
        angular_growth: 2 * p.angular_growth,
    }
}

/// Area value with a two-step refinement check; growth beyond `tolerance`
/// (relative) marks the value as unbounded.
pub fn dirichlet_report<T: Real, F: Holomorphic<T> + ?Sized>(
    f: &F,
    alpha: T,
    params: DiskGridParams,
    coeffs: Option<&[Complex<T>]>,
    tolerance: f64,
) -> Result<DirichletReport> {
    let mut values = Vec::new();
    let mut p = params;
    for _ in 0..3 {
        let grid = DiskGrid::<T>::new(p)?;
        values.push(to_f64(dirichlet_area(f, alpha, &grid)?));
        p = refine_params(p);
    }
    let growing = values.windows(2).all(|w| w[1] - w[0] > tolerance * w[0].abs().max(f64::MIN_POSITIVE));
    let status = if growing { AreaStatus::Unbounded } else { AreaStatus::Converged };
    let area = values[0];
    let f0 = to_f64(f.value(Complex::new(T::zero(), T::zero()))?.norm());
    let coeff_value = coeffs.map(|c| dirichlet_from_coeffs(c, alpha)).transpose()?.map(to_f64);
    Ok(DirichletReport {
        alpha: to_f64(alpha),
        area_value: area,
        coeff_value,
        f0_abs: f0,
        norm_alpha: f0 * f0 + area,
        method: "graded Gauss–Legendre in r², trapezoid in θ".into(),
        grid: params,
        refinement: values,
        status,
    })
}

/// Area form `(1/π)∫_D |f′|² P(z, e^{iφ}) dA` for several boundary angles.
///
/// On each ring `|f′|²` is sampled without aliasing and the Poisson
/// integral is applied in Fourier space, which resolves the kernel's peak
/// at every radius.
pub fn local_dirichlet_area<T: Real, F: Holomorphic<T> + ?Sized>(
    f: &F,
    zetas: &[T],
    grid: &DiskGrid<T>,
) -> Result<Vec<T>> {
    let parts: Vec<Vec<T>> = grid
        .rings()
        .par_iter()
        .map(|ring| {
            let count = (2 * ring_count(f, ring)).next_power_of_two();
            let d = f.derivative_on_ring(ring.radius, count)?;
            let mut g: Vec<Complex<T>> = d.iter().map(|v| Complex::new(v.norm_sqr(), T::zero())).collect();
            if let Some(index) = g.iter().position(|v| !v.re.is_finite()) {
                return Err(Error::NonFinite { index });
            }
            T::fft(&mut g, false);
            let nf = from_usize::<T>(count);
            let half = count / 2;
            let out = zetas
                .iter()
                .map(|&phi| {
                    let mut acc = g[0].re / nf;
                    let mut rk = T::one();
                    let step = unit(phi);
                    let mut e = Complex::new(T::one(), T::zero());
                    for gk in g.iter().take(half).skip(1) {
                        rk = rk * ring.radius;
                        e = e * step;
                        if rk < T::epsilon() * lit(1e-3) {
                            break;
                        }
                        acc += lit::<T>(2.0) * rk * (gk * e).re / nf;
                    }
                    acc * ring.radial_weight * lit(2.0)
                })
                .collect();
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![T::zero(); zetas.len()];
    for p in &parts {
        for (t, v) in total.iter_mut().zip(p) {
            *t += *v;
        }
    }
    Ok(total)
}

/// Boundary form of the local Dirichlet integral at `ζ = e^{iφ}`,
/// `(1/2π)∫ |f*(ζ)|²(e^{2Δ} − 1 − 2Δ)/|ζ−ζ′|² |dζ′|` with
/// `Δ = log|f*(ζ′)| − log|f*(ζ)|`.
///
/// The trapezoid grid starts at `φ`; the diagonal node takes the integrand's
/// limit `2|f*(ζ)|²(∂_θ log|f*|)²`.
pub fn local_dirichlet_boundary<T: Real>(f: &SpectralOuter<T>, phi: T, upsample: usize) -> Result<T> {
    if f.clipped_near(phi) {
        return Err(Error::HypothesisViolated(format!(
            "|f*| vanishes (was clipped) at θ = {phi}; the boundary form is indeterminate there"
        )));
    }
    let count = upsample.max(2) * f.grid_len();
    let (u, du) = f.boundary_on_shifted_grid(phi, count)?;
    let h = two_pi::<T>() / from_usize::<T>(count);
    let two = lit::<T>(2.0);
    let u0 = u[0];
    let b = (two * u0).exp();
    let mut terms: Vec<T> = (1..count)
        .map(|j| {
            let delta = u[j] - u0;
            let half_angle = h * from_usize::<T>(j) / two;
            let chord2 = (two * half_angle.sin()).powi(2);
            b * ((two * delta).exp_m1() - two * delta) / chord2
        })
        .collect();
    terms.push(two * b * du[0] * du[0]);
    terms.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let sum = terms.iter().fold(T::zero(), |a, &b| a + b);
    Ok(sum / from_usize::<T>(count))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMethod {
    Area,
    Boundary,
}

pub fn local_dirichlet<T: Real>(
    f: &SpectralOuter<T>,
    zeta: T,
    method: LocalMethod,
    grid: &DiskGrid<T>,
    upsample: usize,
) -> Result<T> {
    match method {
        LocalMethod::Area => Ok(local_dirichlet_area(f, &[zeta], grid)?[0]),
        LocalMethod::Boundary => local_dirichlet_boundary(f, zeta, upsample),
    }
}

/// A positive boundary function tested against `(1/|I|)∫_I h ≥ |I|^α`.
pub trait BoundaryWeight<T: Real>: Sync {
    fn value(&self, theta: T) -> T;

    /// `(1/|I|)∫_I h`.
    fn arc_mean(&self, arc: &Arc<T>) -> T;

    fn describe(&self) -> String;
}

/// `h = scale·d(·, E_N)^α`.
pub struct DistancePowerWeight<'a, T> {
    pub level: &'a CantorLevel<T>,
    pub alpha: T,
    pub scale: T,
}

impl<T: Real> BoundaryWeight<T> for DistancePowerWeight<'_, T> {
    fn value(&self, theta: T) -> T {
        self.scale * self.level.distance(theta).powf(self.alpha)
    }

    fn arc_mean(&self, arc: &Arc<T>) -> T {
        self.scale * self.level.mean_distance_power(arc, self.alpha)
    }

    fn describe(&self) -> String {
        format!("{}·d(·,E_{})^{}", self.scale, self.level.level(), self.alpha)
    }
}

pub struct ConstantBoundaryWeight<T>(pub T);

impl<T: Real> BoundaryWeight<T> for ConstantBoundaryWeight<T> {
    fn value(&self, _theta: T) -> T {
        self.0
    }

    fn arc_mean(&self, _arc: &Arc<T>) -> T {
        self.0
    }

    fn describe(&self) -> String {
        format!("constant {}", self.0)
    }
}

/// Constant making `d(·,E)^α / C` satisfy the arc-mean condition for a
/// set with `λ_E = lambda`: `C = min{1/2 − λ, 1/4}^{α+1}/(α+1)`.
pub fn kset_constant(lambda: f64, alpha: f64) -> f64 {
    (0.5 - lambda).min(0.25).powf(alpha + 1.0) / (alpha + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HjensenGate {
    pub arcs_checked: usize,
    /// `min_I (1/|I|)∫_I h / |I|^α`.
    pub worst_ratio: f64,
    pub worst_arc_start: f64,
    pub worst_arc_length: f64,
    pub pass: bool,
}

/// Checks the arc-mean condition on all dyadic arcs `[2πk/2^j, 2π(k+1)/2^j)`, `j ≤ depth`.
pub fn hjensen_gate<T: Real, H: BoundaryWeight<T> + ?Sized>(h: &H, alpha: T, depth: usize) -> Result<HjensenGate> {
    if depth > 24 {
        return Err(Error::input("dyadic depth above 24"));
    }
    let arcs: Vec<(usize, usize)> = (0..=depth).flat_map(|j| (0..(1usize << j)).map(move |k| (j, k))).collect();
    let ratios: Vec<(T, T, T)> = arcs
        .par_iter()
        .map(|&(j, k)| {
            let len = two_pi::<T>() / from_usize::<T>(1 << j);
            let start = len * from_usize::<T>(k);
            let arc = if j == 0 { Arc::full() } else { Arc::new(start, len)? };
            Ok((h.arc_mean(&arc) / len.powf(alpha), start, len))
        })
        .collect::<Result<_>>()?;
    let worst = ratios
        .iter()
        .cloned()
        .fold((T::infinity(), T::zero(), T::zero()), |a, b| if b.0 < a.0 { b } else { a });
    Ok(HjensenGate {
        arcs_checked: ratios.len(),
        worst_ratio: to_f64(worst.0),
        worst_arc_start: to_f64(worst.1),
        worst_arc_length: to_f64(worst.2),
        pass: worst.0 >= T::one(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonAudit {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub resolution: usize,
    pub gate: HjensenGate,
    pub pass: bool,
}

/// `D_α(f) ≤ (1/π)∬ (|f*(ζ)|²−|f*(ζ′)|²)(log|f*(ζ)|−log|f*(ζ′)|)/|ζ−ζ′|² (h(ζ)+h(ζ′))`.
///
/// The double integral is a trapezoid sum on the data grid; the diagonal
/// uses the limit `4|f*|²(∂_θ log|f*|)² h`.
pub fn carleson_substitute_audit<T: Real, H: BoundaryWeight<T> + ?Sized>(
    f: &SpectralOuter<T>,
    h: &H,
    alpha: T,
    disk: &DiskGrid<T>,
    gate_depth: usize,
    tolerance: f64,
) -> Result<CarlesonAudit> {
    let gate = hjensen_gate(h, alpha, gate_depth)?;
    if !gate.pass {
        return Err(Error::HypothesisViolated(format!(
            "h = {} fails the arc-mean condition: ratio {:.4e} on arc [{:.6}, +{:.6})",
            h.describe(),
            gate.worst_ratio,
            gate.worst_arc_start,
            gate.worst_arc_length
        )));
    }
    let lhs = dirichlet_area(f, alpha, disk)?;
    let n = f.grid_len();
    let (u, du) = f.boundary_on_shifted_grid(T::zero(), 2 * n)?;
    let u: Vec<T> = u.into_iter().step_by(2).collect();
    let du: Vec<T> = du.into_iter().step_by(2).collect();
    let grid = CircleGrid::new(n)?;
    let hv: Vec<T> = (0..n).map(|k| h.value(grid.angle::<T>(k))).collect();
    let m2: Vec<T> = u.iter().map(|&x| (x + x).exp()).collect();
    let step = grid.spacing::<T>();
    let two = lit::<T>(2.0);
    // chord² depends only on the index difference.
    let inv_chord2: Vec<T> = (0..n)
        .map(|d| if d == 0 { T::zero() } else { T::one() / (two * (step * from_usize::<T>(d) / two).sin()).powi(2) })
        .collect();
    let rows: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = lit::<T>(4.0) * m2[i] * du[i] * du[i] * hv[i];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = if j > i { j - i } else { i - j };
                acc += (m2[i] - m2[j]) * (u[i] - u[j]) * inv_chord2[d] * (hv[i] + hv[j]);
            }
            acc
        })
        .collect();
    let rhs = rows.iter().fold(T::zero(), |a, &b| a + b) * step * step / T::PI();
    let (lhs, rhs) = (to_f64(lhs), to_f64(rhs));
    let ratio = ratio_or_zero(lhs, rhs);
    Ok(CarlesonAudit { lhs, rhs, ratio, tolerance, resolution: n, gate, pass: lhs <= rhs * (1.0 + tolerance) + 1e-14 })
}

fn ratio_or_zero(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs.abs() < 1e-14 {
        0.0
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaScan {
    pub gammas: Vec<f64>,
    /// Largest relative increase of consecutive slopes of `t ↦ w(t^γ)` (≤ 0 means concave).
    pub worst_violation: Vec<f64>,
    pub passing_gamma: Option<f64>,
}

/// Scans `γ ∈ (2/(1−α), 20]` for concavity of `t ↦ w(t^γ)` on a log grid of
/// `t^γ ∈ [t_min, π]`.
pub fn gamma_concavity_scan<T: Real, W: WeightProfile<T> + ?Sized>(
    w: &W,
    alpha: f64,
    t_min: f64,
    gammas: usize,
    samples: usize,
    slack: f64,
) -> Result<GammaScan> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input("the concavity scan needs α ∈ (0, 1)"));
    }
    if !(t_min > 0.0 && t_min < std::f64::consts::PI) || samples < 3 || gammas == 0 {
        return Err(Error::input("bad concavity-scan parameters"));
    }
    let g_lo = 2.0 / (1.0 - alpha);
    let g_hi = 20.0;
    if g_lo >= g_hi {
        return Err(Error::input("no γ in (2/(1−α), 20] for this α"));
    }
    let list: Vec<f64> = (1..=gammas).map(|i| g_lo + (g_hi - g_lo) * i as f64 / gammas as f64).collect();
    let (l0, l1) = (t_min.ln(), std::f64::consts::PI.ln());
    let worst: Vec<f64> = list
        .par_iter()
        .map(|&gamma| {
            let pts: Vec<(f64, f64)> = (0..samples)
                .map(|i| {
                    let x = (l0 + (l1 - l0) * i as f64 / (samples - 1) as f64).exp();
                    (x.powf(1.0 / gamma), to_f64(w.value(lit(x))))
                })
                .collect();
            let slopes: Vec<f64> = pts.windows(2).map(|p| (p[1].1 - p[0].1) / (p[1].0 - p[0].0)).collect();
            slopes
                .windows(2)
                .map(|s| (s[1] - s[0]) / s[0].abs().max(f64::MIN_POSITIVE))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let passing = list.iter().zip(&worst).find(|(_, &v)| v <= slack).map(|(&g, _)| g);
    Ok(GammaScan { gammas: list, worst_violation: worst, passing_gamma: passing })
}

/// `∫ w′(t)² t^{1+α} N_E(t) dt` over `[t_lo, π]`.
pub fn fw_bound_integral<T: Real, W: WeightProfile<T> + ?Sized>(
    w: &W,
    level: &CantorLevel<T>,
    alpha: T,
    t_lo: T,
) -> T {
    let mut brk = level.gap_profile().breakpoints(t_lo, T::PI());
    brk.extend(w.breakpoints().into_iter().filter(|&b| b > t_lo && b < T::PI()));
    brk.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    brk.dedup();
    let rule = GaussLegendre::<T>::new(20);
    let mut total = T::zero();
    for seg in brk.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let count = T::from_u128(level.counting_function((a + b) / lit(2.0))).expect("count");
        // Integrate in log t, splitting long ranges into factor-2 pieces.
        let pieces = ((b / a).ln() / lit::<T>(2.0).ln()).ceil().max(T::one()).to_usize().unwrap_or(1);
        let (la, lb) = (a.ln(), b.ln());
        for p in 0..pieces {
            let x0 = la + (lb - la) * from_usize::<T>(p) / from_usize::<T>(pieces);
            let x1 = la + (lb - la) * from_usize::<T>(p + 1) / from_usize::<T>(pieces);
            total += rule.integrate(x0, x1, |x| {
                let t = x.exp();
                let d = w.derivative(t);
                d * d * t.powf(T::one() + alpha) * t
            }) * count;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwParams {
    pub grid_size: usize,
    pub oversample: usize,
    pub disk: DiskGridParams,
    pub gamma_count: usize,
    pub gamma_samples: usize,
    pub concavity_slack: f64,
}

impl Default for FwParams {
    fn default() -> Self {
        Self {
            grid_size: 4096,
            oversample: 4,
            disk: DiskGridParams::default(),
            gamma_count: 32,
            gamma_samples: 400,
            concavity_slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwEstimate {
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub f0_abs: f64,
    pub taylor_tail: f64,
    pub grid_size: usize,
    pub depth: usize,
    pub concavity: GammaScan,
}

/// `D_α(f_w)` against `∫ w′² t^{1+α} N_E dt` without the concavity gate.
///
/// The modulus is clipped at `w(a_N/2)`, so the integral starts at `a_N/2`.
pub fn fw_estimate<T: Real, W: WeightProfile<T> + ?Sized>(
    w: &W,
    level: &CantorLevel<T>,
    alpha: T,
    params: &FwParams,
) -> Result<FwEstimate> {
    let t_lo = level.arc_length() / lit(2.0);
    let concavity = gamma_concavity_scan(
        w,
        to_f64(alpha),
        to_f64(t_lo),
        params.gamma_count,
        params.gamma_samples,
        params.concavity_slack,
    )?;
    let f = outer_from_weight(w, level, CircleGrid::new(params.grid_size)?)?;
    let s = SpectralOuter::new(&f, params.oversample)?;
    let lhs = to_f64(dirichlet_area(&s, alpha, &DiskGrid::new(params.disk)?)?);
    let rhs = to_f64(fw_bound_integral(w, level, alpha, t_lo));
    Ok(FwEstimate {
        alpha: to_f64(alpha),
        lhs,
        rhs,
        ratio: ratio_or_zero(lhs, rhs),
        f0_abs: to_f64(s.value_at_zero()),
        taylor_tail: to_f64(s.tail_fraction()),
        grid_size: params.grid_size,
        depth: level.level(),
        concavity,
    })
}

/// [`fw_estimate`] behind the concavity hypothesis: refused when no scanned
/// `γ` makes `t ↦ w(t^γ)` concave.
pub fn fw_estimate_audit<T: Real, W: WeightProfile<T> + ?Sized>(
    w: &W,
    level: &CantorLevel<T>,
    alpha: T,
    params: &FwParams,
) -> Result<FwEstimate> {
    let est = fw_estimate(w, level, alpha, params)?;
    if est.concavity.passing_gamma.is_none() {
        let scan = &est.concavity;
        let best = scan.worst_violation.iter().cloned().fold(f64::INFINITY, f64::min);
        return Err(Error::HypothesisViolated(format!(
            "t ↦ w(t^γ) is not concave for any scanned γ ∈ [{:.3}, {:.3}] (smallest violation {:.3e}); weight {}",
            scan.gammas[0],
            scan.gammas[scan.gammas.len() - 1],
            best,
            w.describe()
        )));
    }
    Ok(est)
}

/// Audit rows for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub case: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub resolution: usize,
}
