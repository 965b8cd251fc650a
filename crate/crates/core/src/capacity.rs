//! α-energies of measures on the circle, equilibrium measures and the
//! integral test for zero capacity of Cantor sets.
//!
//! Kernel: `k_α(t) = t^{-α}` for `α > 0` and `log(1/t)` for `α = 0`, applied
//! to the chordal distance `|ζ − ζ'| = 2 sin(d/2)`.

use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cantor::CantorSpec;
use crate::error::{Error, Result};
use crate::frank_wolfe::{minimize_on_simplex, SolverOutcome, SolverParams, SymMatrix};
use crate::gauss::GaussLegendre;
use crate::scalar::{from_usize, lit, to_f64, two_pi, Real};
use crate::circle::{circle_distance, wrap_angle, Arc};

/// A kernel or energy value; `Infinite` is kept distinct from large finite values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Energy<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Energy<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Energy::Finite(v) => Some(v),
            Energy::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Energy::Infinite)
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha >= T::zero() && alpha < T::one()) {
        return Err(Error::input(format!("α = {alpha} outside [0, 1)")));
    }
    Ok(())
}

/// `k_α(t)`; `t = 0` gives [`Energy::Infinite`].
pub fn kernel<T: Real>(alpha: T, t: T) -> Result<Energy<T>> {
    check_alpha(alpha)?;
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::input(format!("kernel argument t = {t} must be finite and >= 0")));
    }
    if t == T::zero() {
        return Ok(Energy::Infinite);
    }
    Ok(Energy::Finite(kernel_unchecked(alpha, t)))
}

#[inline]
fn kernel_unchecked<T: Real>(alpha: T, t: T) -> T {
    if alpha == T::zero() {
        -t.ln()
    } else {
        t.powf(-alpha)
    }
}

/// Chordal distance between `e^{iθ1}` and `e^{iθ2}`.
#[inline]
pub fn chordal<T: Real>(theta1: T, theta2: T) -> T {
    lit::<T>(2.0) * ((theta1 - theta2) / lit(2.0)).sin().abs()
}

/// Mean self-energy `S_α(h)` of the uniform probability measure on an arc of length `2h`.
///
/// Arclength part in closed form; the chordal correction (smooth) by Gauss–Legendre.
pub fn self_energy<T: Real>(alpha: T, h: T) -> Result<Energy<T>> {
    check_alpha(alpha)?;
    if !(h >= T::zero()) || h >= T::PI() {
        return Err(Error::input(format!("smear half-width {h} outside [0, π)")));
    }
    if h == T::zero() {
        return Ok(Energy::Infinite);
    }
    let l = lit::<T>(2.0) * h;
    let one = T::one();
    let two = lit::<T>(2.0);
    let base = if alpha == T::zero() {
        lit::<T>(1.5) - l.ln()
    } else {
        two * l.powf(-alpha) / ((one - alpha) * (two - alpha))
    };
    // (2/L²) ∫_0^L (L − s)·[k(2 sin(s/2)) − k(s)] ds, with s = L x² to smooth the endpoint.
    let gl = GaussLegendre::<T>::new(24);
    let corr = gl.integrate(T::zero(), one, |x| {
        let s = l * x * x;
        let half = s / two;
        let sinc = if half == T::zero() { one } else { half.sin() / half };
        let diff = if alpha == T::zero() { -sinc.ln() } else { s.powf(-alpha) * (sinc.powf(-alpha) - one) };
        (l - s) * diff * two * l * x
    });
    Ok(Energy::Finite(base + two * corr / (l * l)))
}

/// Atoms on the circle, each spread uniformly over `[θ_i − h_i, θ_i + h_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiscreteMeasure<T> {
    atoms: Vec<T>,
    weights: Vec<T>,
    smear: Vec<T>,
}

impl<T: Real> DiscreteMeasure<T> {
    pub fn new(atoms: Vec<T>, weights: Vec<T>, smear: Vec<T>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() || atoms.len() != smear.len() {
            return Err(Error::input("atoms, weights and smear must be nonempty and of equal length"));
        }
        if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
            return Err(Error::input("weights must be finite and nonnegative"));
        }
        if smear.iter().any(|&h| !(h >= T::zero()) || h >= T::PI()) {
            return Err(Error::input("smear half-widths must lie in [0, π)"));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::input("atom angles must be finite"));
        }
        let total = weights.iter().fold(T::zero(), |a, &b| a + b);
        let tol = crate::scalar::eps_floor::<T>(1e-12) * from_usize::<T>(atoms.len().max(1));
        if (total - T::one()).abs() > tol {
            return Err(Error::input(format!("weights sum to {total}, expected 1")));
        }
        let atoms = atoms.into_iter().map(wrap_angle).collect();
        Ok(Self { atoms, weights, smear })
    }

    /// Equal weights, smear half of the nearest-neighbour spacing.
    pub fn equal_weights(atoms: Vec<T>) -> Result<Self> {
        let n = atoms.len();
        let smear = nearest_neighbor_half_spacing(&atoms)?;
        Self::new(atoms, vec![T::one() / from_usize(n); n], smear)
    }

    /// Uniform probability measure on a union of disjoint arcs, each cut into
    /// `cells_per_arc` equal cells; each cell becomes one atom smeared over the cell.
    pub fn uniform_on_arcs(arcs: &[Arc<T>], cells_per_arc: usize) -> Result<Self> {
        if arcs.is_empty() || cells_per_arc == 0 {
            return Err(Error::input("need at least one arc and one cell per arc"));
        }
        let total = arcs.iter().fold(T::zero(), |a, arc| a + arc.length());
        let m = from_usize::<T>(cells_per_arc);
        let (mut atoms, mut weights, mut smear) = (Vec::new(), Vec::new(), Vec::new());
        for arc in arcs {
            let cell = arc.length() / m;
            for c in 0..cells_per_arc {
                atoms.push(arc.start() + cell * (from_usize::<T>(c) + lit(0.5)));
                weights.push(cell / total);
                smear.push(cell / lit(2.0));
            }
        }
        Self::new(atoms, weights, smear)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn smear(&self) -> &[T] {
        &self.smear
    }

    /// `μ̂(n) = Σ_i w_i e^{−inθ_i}·sinc(n h_i)` (Fourier coefficient of the smeared measure).
    pub fn fourier_coefficient(&self, n: usize) -> Complex<T> {
        let nf = from_usize::<T>(n);
        self.atoms
            .iter()
            .zip(&self.weights)
            .zip(&self.smear)
            .fold(Complex::new(T::zero(), T::zero()), |acc, ((&th, &w), &h)| {
                let x = nf * h;
                let sinc = if x == T::zero() { T::one() } else { x.sin() / x };
                let ph = -nf * th;
                acc + Complex::new(ph.cos(), ph.sin()) * (w * sinc)
            })
    }

    /// CSV rows `angle,weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["angle", "weight"])?;
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            wtr.write_record([format!("{:.17e}", to_f64(*a)), format!("{:.17e}", to_f64(*w))])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Half of the circular nearest-neighbour spacing of each point.
pub fn nearest_neighbor_half_spacing<T: Real>(angles: &[T]) -> Result<Vec<T>> {
    let n = angles.len();
    if n < 2 {
        return Err(Error::input("need at least two support points"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let wrapped: Vec<T> = angles.iter().map(|&a| wrap_angle(a)).collect();
    order.sort_by(|&i, &j| wrapped[i].partial_cmp(&wrapped[j]).expect("finite angles"));
    let mut out = vec![T::zero(); n];
    for (pos, &i) in order.iter().enumerate() {
        let prev = order[(pos + n - 1) % n];
        let next = order[(pos + 1) % n];
        let d = circle_distance(wrapped[i], wrapped[prev]).min(circle_distance(wrapped[i], wrapped[next]));
        if d == T::zero() {
            return Err(Error::input("support points must be distinct"));
        }
        out[i] = d / lit(2.0);
    }
    Ok(out)
}

/// `Σ_{i≠j} w_i w_j k_α(|ζ_i − ζ_j|)`.
pub fn energy_offdiagonal<T: Real>(mu: &DiscreteMeasure<T>, alpha: T) -> Result<Energy<T>> {
    use rayon::prelude::*;
    check_alpha(alpha)?;
    let n = mu.len();
    let rows: Vec<Option<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let c = chordal(mu.atoms[i], mu.atoms[j]);
                if c == T::zero() {
                    if mu.weights[i] > T::zero() && mu.weights[j] > T::zero() {
                        return None;
                    }
                    continue;
                }
                acc += mu.weights[j] * kernel_unchecked(alpha, c);
            }
            Some(mu.weights[i] * acc)
        })
        .collect();
    let mut total = T::zero();
    for r in rows {
        match r {
            Some(v) => total += v,
            None => return Ok(Energy::Infinite),
        }
    }
    Ok(Energy::Finite(total))
}

/// Off-diagonal energy plus the smeared self-energies `Σ w_i² S_α(h_i)`.
pub fn energy_kernel<T: Real>(mu: &DiscreteMeasure<T>, alpha: T) -> Result<Energy<T>> {
    let off = match energy_offdiagonal(mu, alpha)? {
        Energy::Finite(v) => v,
        Energy::Infinite => return Ok(Energy::Infinite),
    };
    let mut diag = T::zero();
    for (&w, &h) in mu.weights.iter().zip(&mu.smear) {
        if w == T::zero() {
            continue;
        }
        match self_energy(alpha, h)? {
            Energy::Finite(s) => diag += w * w * s,
            Energy::Infinite => return Ok(Energy::Infinite),
        }
    }
    Ok(Energy::Finite(off + diag))
}

/// `Σ_{n=0}^{N} |μ̂(n)|² / (1+n)^{1−α}`.
pub fn energy_fourier<T: Real>(mu: &DiscreteMeasure<T>, alpha: T, modes: usize) -> Result<T> {
    use rayon::prelude::*;
    check_alpha(alpha)?;
    if modes < 1 {
        return Err(Error::input("need at least one Fourier mode"));
    }
    let terms: Vec<T> = (0..=modes)
        .into_par_iter()
        .map(|n| mu.fourier_coefficient(n).norm_sqr() * from_usize::<T>(n + 1).powf(alpha - T::one()))
        .collect();
    Ok(terms.iter().fold(T::zero(), |a, &b| a + b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub alpha: f64,
    /// `None` when the kernel energy is infinite.
    pub kernel_energy: Option<f64>,
    pub fourier_energy: f64,
    pub truncation: usize,
    pub atoms: usize,
}

pub fn energy_report<T: Real>(mu: &DiscreteMeasure<T>, alpha: T, modes: usize) -> Result<EnergyReport> {
    Ok(EnergyReport {
        alpha: to_f64(alpha),
        kernel_energy: energy_kernel(mu, alpha)?.finite().map(to_f64),
        fourier_energy: to_f64(energy_fourier(mu, alpha, modes)?),
        truncation: modes,
        atoms: mu.len(),
    })
}

/// Energy matrix of a smeared support: `k_α(chord)` off the diagonal, `S_α(h_i)` on it.
pub fn energy_matrix<T: Real>(support: &[T], smear: &[T], alpha: T) -> Result<SymMatrix<T>> {
    check_alpha(alpha)?;
    let diag: Vec<T> = smear
        .iter()
        .map(|&h| self_energy(alpha, h).and_then(|e| e.finite().ok_or_else(|| Error::input("zero smear"))))
        .collect::<Result<_>>()?;
    Ok(SymMatrix::from_fn(support.len(), |i, j| {
        if i == j {
            diag[i]
        } else {
            kernel_unchecked(alpha, chordal(support[i], support[j]))
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Equilibrium<T> {
    pub measure: DiscreteMeasure<T>,
    pub energy: T,
    pub fw_gap: T,
    pub spread: T,
    pub iterations: usize,
    pub converged: bool,
    pub polished: bool,
    pub trace: Vec<T>,
}

impl<T: Real> Equilibrium<T> {
    /// `1/energy`; meaningful only for positive energy.
    pub fn capacity_estimate(&self) -> Option<T> {
        (self.energy > T::zero()).then(|| T::one() / self.energy)
    }

    pub fn trace_nonincreasing(&self) -> bool {
        SolverOutcome {
            weights: vec![],
            energy: self.energy,
            fw_gap: self.fw_gap,
            spread: self.spread,
            iterations: self.iterations,
            converged: self.converged,
            polished: self.polished,
            trace: self.trace.clone(),
        }
        .trace_nonincreasing()
    }
}

/// Minimum-energy probability measure on a finite smeared support.
///
/// Non-convergence within the budget is reported through `converged = false`.
pub fn equilibrium_measure<T: Real>(support: &[T], alpha: T, params: &SolverParams) -> Result<Equilibrium<T>> {
    let mut distinct: Vec<T> = support.iter().map(|&a| wrap_angle(a)).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::input("need at least two distinct support points"));
    }
    let smear = nearest_neighbor_half_spacing(support)?;
    let k = energy_matrix(support, &smear, alpha)?;
    let out = minimize_on_simplex(&k, params)?;
    let measure = DiscreteMeasure::new(support.to_vec(), normalize(out.weights), smear)?;
    Ok(Equilibrium {
        measure,
        energy: out.energy,
        fw_gap: out.fw_gap,
        spread: out.spread,
        iterations: out.iterations,
        converged: out.converged,
        polished: out.polished,
        trace: out.trace,
    })
}

fn normalize<T: Real>(mut w: Vec<T>) -> Vec<T> {
    let s = w.iter().fold(T::zero(), |a, &b| a + b);
    for x in &mut w {
        *x = *x / s;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Zero,
    Positive,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderParams {
    /// Rungs used for the final decision.
    pub rungs: usize,
    /// Minimal growth of `J` per e-fold of `1/ε` for divergence.
    pub slope_threshold: f64,
    /// Slopes must not shrink faster than `1 − ratio_tolerance` per rung for divergence.
    pub ratio_tolerance: f64,
}

impl Default for LadderParams {
    fn default() -> Self {
        Self { rungs: 3, slope_threshold: 0.1, ratio_tolerance: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub epsilon: f64,
    pub integral: f64,
    /// `ΔJ / log(ε_prev/ε)`; absent on the first rung.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderDiagnostics {
    pub verdict: Verdict,
    pub rungs: Vec<Rung>,
    /// Geometric mean of successive slope ratios over the decision window.
    pub slope_ratio: f64,
    /// Smallest slope in the decision window.
    pub min_slope: f64,
    pub params: LadderParams,
}

/// Classifies `J(ε)` on a decreasing ladder as divergent (`Zero`) or Cauchy (`Positive`).
///
/// Divergence needs the last slopes to stay above the threshold and not to
/// decay geometrically; geometric decay of the slopes means `J` converges.
pub fn classify_ladder(epsilons: &[f64], integrals: &[f64], params: &LadderParams) -> Result<LadderDiagnostics> {
    if epsilons.len() != integrals.len() || epsilons.len() < params.rungs + 2 {
        return Err(Error::input(format!(
            "ladder needs at least {} rungs, got {}",
            params.rungs + 2,
            epsilons.len()
        )));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) || epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::input("ladder must be positive and strictly decreasing"));
    }
    let mut rungs = Vec::with_capacity(epsilons.len());
    let mut slopes = Vec::new();
    for k in 0..epsilons.len() {
        let slope = (k > 0).then(|| (integrals[k] - integrals[k - 1]) / (epsilons[k - 1] / epsilons[k]).ln());
        if let Some(s) = slope {
            slopes.push(s);
        }
        rungs.push(Rung { epsilon: epsilons[k], integral: integrals[k], slope });
    }
    let window = &slopes[slopes.len() - params.rungs..];
    let prev = &slopes[slopes.len() - params.rungs - 1..slopes.len() - 1];
    let min_slope = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let slope_ratio = if window.iter().chain(prev).all(|&s| s > 0.0) {
        let log_sum: f64 = window.iter().zip(prev).map(|(a, b)| (a / b).ln()).sum();
        (log_sum / params.rungs as f64).exp()
    } else {
        0.0
    };
    let verdict = if slope_ratio < 1.0 - params.ratio_tolerance {
        Verdict::Positive
    } else if min_slope >= params.slope_threshold {
        Verdict::Zero
    } else {
        Verdict::Inconclusive
    };
    Ok(LadderDiagnostics { verdict, rungs, slope_ratio, min_slope, params: *params })
}

/// `∫_ε^π dt / (t^α |E_t|)`, piecewise Gauss–Legendre in `log t` between breakpoints of `|E_t|`.
pub fn capacity_integral<T: Real>(spec: &CantorSpec<T>, alpha: T, epsilon: T) -> Result<T> {
    check_alpha(alpha)?;
    let level = spec.level(spec.depth())?;
    let profile = level.gap_profile();
    let gl = GaussLegendre::<T>::new(16);
    let b = profile.breakpoints(epsilon, T::PI());
    let mut total = T::zero();
    for w in b.windows(2) {
        total += gl.integrate(w[0].ln(), w[1].ln(), |x| {
            let t = x.exp();
            t.powf(T::one() - alpha) / profile.measure(t)
        });
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityTest {
    pub alpha: f64,
    pub depth: usize,
    pub diagnostics: LadderDiagnostics,
}

impl CapacityTest {
    pub fn verdict(&self) -> Verdict {
        self.diagnostics.verdict
    }
}

/// Zero-capacity test for a Cantor set: divergence of `∫_0^π dt/(t^α|E_t|)`,
/// probed on the ladder `ε_k = a_k`, `k = 1..depth` (where `|E_t|` of `E_depth` is exact for `E`).
pub fn cantor_capacity_zero_test<T: Real>(
    spec: &CantorSpec<T>,
    alpha: T,
    params: &LadderParams,
) -> Result<CapacityTest> {
    check_alpha(alpha)?;
    let eps: Vec<T> = spec.lengths()[1..].to_vec();
    let integrals: Vec<f64> = eps
        .iter()
        .map(|&e| capacity_integral(spec, alpha, e).map(to_f64))
        .collect::<Result<_>>()?;
    let eps: Vec<f64> = eps.into_iter().map(to_f64).collect();
    Ok(CapacityTest {
        alpha: to_f64(alpha),
        depth: spec.depth(),
        diagnostics: classify_ladder(&eps, &integrals, params)?,
    })
}

/// Uniform grid on an arc, symmetric about its midpoint.
pub fn arc_support<T: Real>(arc: &Arc<T>, points: usize) -> Vec<T> {
    let m = from_usize::<T>(points);
    (0..points)
        .map(|i| arc.start() + arc.length() * (from_usize::<T>(i) + lit(0.5)) / m)
        .collect()
}

/// Uniform grid on the whole circle.
pub fn circle_support<T: Real>(points: usize) -> Vec<T> {
    (0..points)
        .map(|i| two_pi::<T>() * from_usize::<T>(i) / from_usize::<T>(points))
        .collect()
}
