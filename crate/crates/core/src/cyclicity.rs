//! Cyclicity machinery for Cantor sets of zero capacity: the auxiliary
//! function `φ`, its regularization `ψ`, the weights `w_δ`, the campaign that
//! tracks the surrogates of cyclicity along a `δ`-ladder, and the zero-set
//! diagnostic for a given boundary modulus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cantor::{lambda_and_mu, CantorLevel, CantorSpec};
use crate::capacity::{
    arc_support, cantor_capacity_zero_test, classify_ladder, equilibrium_measure, CapacityTest, LadderDiagnostics,
    LadderParams, Verdict,
};
use crate::circle::{Arc, CircleGrid};
use crate::dirichlet::{dirichlet_area, fw_bound_integral, gamma_concavity_scan, FwParams};
use crate::disk::DiskGrid;
use crate::error::{Error, Result};
use crate::frank_wolfe::SolverParams;
use crate::gauss::GaussLegendre;
use crate::outer::{modulus_from_weight, BoundaryModulus, OuterFunction, SpectralOuter};
use crate::scalar::{lit, to_f64, Real};
use crate::weight::WeightProfile;

pub const SCHEMA_VERSION: u32 = 1;

/// `(ρ, σ)` at one and two thirds of the window
/// `((1−α)/2, min{1−α, (1−α+μ)/2})`.
pub fn select_params(alpha: f64, mu: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0) {
        return Err(Error::InvalidSpec(format!("μ = {mu}: the window for (ρ, σ) is empty")));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::input(format!("α = {alpha} outside [0, 1)")));
    }
    let lo = (1.0 - alpha) / 2.0;
    let hi = (1.0 - alpha).min((1.0 - alpha + mu) / 2.0);
    let w = hi - lo;
    Ok((lo + w / 3.0, lo + 2.0 * w / 3.0))
}

/// `φ(t) = max{min{|E_t|, t^σ}, t^{1−α}}`.
#[derive(Debug, Clone)]
pub struct Phi<T> {
    level: CantorLevel<T>,
    alpha: T,
    sigma: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiHypotheses {
    pub samples: usize,
    /// `φ(t)/t` nonincreasing on the samples.
    pub ratio_decreasing: bool,
    /// `φ > 0` on the samples and `φ(t) ≤ t^σ` on those with `t ≤ 1`
    /// (beyond 1 the term `t^{1−α}` exceeds `t^σ`).
    pub bounded: bool,
}

impl<T: Real> Phi<T> {
    pub fn new(level: CantorLevel<T>, alpha: T, sigma: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha < T::one()) {
            return Err(Error::input(format!("α = {alpha} outside [0, 1)")));
        }
        if !(sigma > T::zero() && sigma < T::one() - alpha) {
            return Err(Error::input(format!("σ = {sigma} outside (0, 1−α)")));
        }
        Ok(Self { level, alpha, sigma })
    }

    pub fn level(&self) -> &CantorLevel<T> {
        &self.level
    }

    /// Smallest `t` at which `|E_t|` of the stored level stands for the set.
    pub fn t_min(&self) -> T {
        self.level.arc_length() / lit(2.0)
    }

    pub fn value(&self, t: T) -> T {
        let e = self.level.neighborhood_measure(t);
        e.min(t.powf(self.sigma)).max(t.powf(T::one() - self.alpha))
    }

    pub fn breakpoints(&self, lo: T, hi: T) -> Vec<T> {
        self.level.gap_profile().breakpoints(lo, hi)
    }

    pub fn check_hypotheses(&self, nodes: &[T]) -> PhiHypotheses {
        let vals: Vec<T> = nodes.iter().map(|&t| self.value(t)).collect();
        let tol = T::one() + lit::<T>(8.0) * T::epsilon();
        let ratio_decreasing = nodes
            .windows(2)
            .zip(vals.windows(2))
            .all(|(t, v)| v[1] / t[1] <= v[0] / t[0] * tol);
        let bounded = nodes
            .iter()
            .zip(&vals)
            .all(|(&t, &v)| v > T::zero() && (t > T::one() || v <= t.powf(self.sigma) * tol));
        PhiHypotheses { samples: nodes.len(), ratio_decreasing, bounded }
    }

    /// `∫_ε^π dt/(t^α φ(t))`.
    pub fn reciprocal_integral(&self, eps: T) -> T {
        let rule = GaussLegendre::<T>::new(16);
        let mut brk = self.breakpoints(eps, T::PI());
        refine_log(&mut brk);
        let mut total = T::zero();
        for w in brk.windows(2) {
            total += rule.integrate(w[0].ln(), w[1].ln(), |x| {
                let t = x.exp();
                t.powf(T::one() - self.alpha) / self.value(t)
            });
        }
        total
    }
}

/// Splits intervals longer than a factor 2 so that Gauss–Legendre in `log t`
/// sees smooth pieces.
fn refine_log<T: Real>(brk: &mut Vec<T>) {
    let mut out = Vec::with_capacity(brk.len());
    for w in brk.windows(2) {
        out.push(w[0]);
        let pieces = ((w[1] / w[0]).ln() / lit::<T>(2.0).ln()).ceil().to_usize().unwrap_or(1).max(1);
        for p in 1..pieces {
            let f = T::from_usize(p).expect("small") / T::from_usize(pieces).expect("small");
            out.push((w[0].ln() + (w[1].ln() - w[0].ln()) * f).exp());
        }
    }
    if let Some(&last) = brk.last() {
        out.push(last);
    }
    *brk = out;
}

/// `ψ(t) = t^ρ·sup_{s≤t} φ(s)/s^ρ` on a log grid plus the breakpoints of
/// `φ`, interpolated as a power law between nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegularizedWeight<T> {
    pub alpha: T,
    pub rho: T,
    pub sigma: T,
    nodes: Vec<T>,
    phi: Vec<T>,
    /// Running maximum of `φ/t^ρ`.
    envelope: Vec<T>,
    psi: Vec<T>,
    /// Power-law exponent of `ψ` on each cell.
    exps: Vec<T>,
    /// `∫_{t_i}^π ds/(s^α ψ(s))`.
    tail: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub samples: usize,
    /// `ψ/t^ρ` nondecreasing.
    pub ratio_nondecreasing: bool,
    /// `φ ≤ ψ`, and `ψ ≤ t^σ` for `t ≤ 1`, up to a few ulps.
    pub sandwich: bool,
    pub max_relative_violation: f64,
}

pub fn regularize<T: Real>(phi: &Phi<T>, rho: T, samples_per_decade: usize) -> Result<RegularizedWeight<T>> {
    let (alpha, sigma) = (phi.alpha, phi.sigma);
    if !(rho > T::zero() && rho < sigma) {
        return Err(Error::input(format!("ρ = {rho} outside (0, σ = {sigma})")));
    }
    if samples_per_decade < 4 {
        return Err(Error::input("at least 4 samples per decade"));
    }
    let lo = phi.t_min();
    let hi = T::PI();
    let decades = to_f64((hi / lo).log10());
    let count = ((decades * samples_per_decade as f64).ceil() as usize).max(2);
    let mut nodes: Vec<T> = (0..=count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * lit::<T>(i as f64 / count as f64)).exp())
        .collect();
    nodes.extend(phi.breakpoints(lo, hi));
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    nodes.retain(|&t| t >= lo && t <= hi);
    nodes.dedup_by(|a, b| (*a - *b).abs() <= lit::<T>(1e-12) * *b);
    *nodes.last_mut().expect("nonempty") = hi;
    nodes[0] = lo;
    if nodes.len() < 2 {
        return Err(Error::Resolution("ψ needs at least two nodes".into()));
    }

    let hyp = phi.check_hypotheses(&nodes);
    if !hyp.ratio_decreasing {
        return Err(Error::HypothesisViolated("φ(t)/t is not decreasing on the sample grid".into()));
    }
    if !hyp.bounded {
        return Err(Error::HypothesisViolated("0 < φ(t) ≤ t^σ (t ≤ 1) fails on the sample grid".into()));
    }

    let phis: Vec<T> = nodes.iter().map(|&t| phi.value(t)).collect();
    let mut envelope = Vec::with_capacity(nodes.len());
    let mut m = T::zero();
    for (&t, &p) in nodes.iter().zip(&phis) {
        m = m.max(p / t.powf(rho));
        envelope.push(m);
    }
    let psi: Vec<T> = nodes.iter().zip(&envelope).map(|(&t, &m)| t.powf(rho) * m).collect();
    let exps: Vec<T> = (0..nodes.len() - 1)
        .map(|i| (psi[i + 1] / psi[i]).ln() / (nodes[i + 1] / nodes[i]).ln())
        .collect();
    let mut tail = vec![T::zero(); nodes.len()];
    for i in (0..nodes.len() - 1).rev() {
        tail[i] = tail[i + 1] + cell_integral(nodes[i], psi[i], exps[i], alpha, nodes[i], nodes[i + 1]);
    }
    Ok(RegularizedWeight { alpha, rho, sigma, nodes, phi: phis, envelope, psi, exps, tail })
}

/// `∫_a^b s^{−α}/ψ(s) ds` with `ψ(s) = ψ_i (s/t_i)^p`.
fn cell_integral<T: Real>(ti: T, psii: T, p: T, alpha: T, a: T, b: T) -> T {
    let e1 = T::one() - alpha - p;
    let c = ti.powf(p) / psii;
    let l = (b / a).ln();
    let base = if e1.abs() * l < lit(1e-12) {
        l
    } else {
        (e1 * l).exp_m1() / e1
    };
    c * a.powf(e1) * base
}

impl<T: Real> RegularizedWeight<T> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn t_min(&self) -> T {
        self.nodes[0]
    }

    fn cell(&self, t: T) -> usize {
        match self.nodes.binary_search_by(|x| x.partial_cmp(&t).expect("finite")) {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.nodes.len() - 2),
        }
    }

    pub fn value(&self, t: T) -> T {
        let i = self.cell(t);
        self.psi[i] * (t / self.nodes[i]).powf(self.exps[i])
    }

    /// `I(t) = ∫_t^π ds/(s^α ψ(s))`, exact for the power-law interpolant.
    pub fn tail_integral(&self, t: T) -> T {
        if t >= T::PI() {
            return T::zero();
        }
        let i = self.cell(t);
        let (ti, ti1) = (self.nodes[i], self.nodes[i + 1]);
        self.tail[i + 1] + cell_integral(ti, self.psi[i], self.exps[i], self.alpha, t, ti1)
    }

    pub fn check(&self) -> EnvelopeCheck {
        let tol = lit::<T>(8.0) * T::epsilon();
        let ratio_nondecreasing = self.envelope.windows(2).all(|w| w[1] >= w[0]);
        let mut worst = T::zero();
        for i in 0..self.nodes.len() {
            let t = self.nodes[i];
            let low = (self.phi[i] - self.psi[i]) / self.psi[i];
            let high = if t <= T::one() { (self.psi[i] - t.powf(self.sigma)) / self.psi[i] } else { T::zero() };
            worst = worst.max(low).max(high);
        }
        EnvelopeCheck {
            samples: self.nodes.len(),
            ratio_nondecreasing,
            sandwich: worst <= tol,
            max_relative_violation: to_f64(worst),
        }
    }

    /// Classifies `∫_ε^π dt/(t^α ψ)` on a decreasing ladder.
    pub fn divergence_ladder(&self, eps: &[T], params: &LadderParams) -> Result<LadderDiagnostics> {
        if eps.iter().any(|&e| e < self.t_min()) {
            return Err(Error::input("ladder reaches below the resolved range of ψ"));
        }
        let j: Vec<f64> = eps.iter().map(|&e| to_f64(self.tail_integral(e))).collect();
        let e: Vec<f64> = eps.iter().map(|&e| to_f64(e)).collect();
        classify_ladder(&e, &j, params)
    }
}

/// The three-piece weight: `(δ^ρ/ψ(δ)) t^{1−α−ρ}` on `[0, δ]`,
/// `A_δ − log I(t)` on `(δ, η_δ]`, and `1` beyond.
#[derive(Debug, Clone)]
pub struct WDelta<'a, T> {
    pub delta: T,
    pub a_delta: T,
    pub eta_delta: T,
    pub alpha: T,
    pub rho: T,
    coeff: T,
    psi: &'a RegularizedWeight<T>,
}

pub fn build_wdelta<T: Real>(psi: &RegularizedWeight<T>, delta: T, alpha: T) -> Result<WDelta<'_, T>> {
    if !(delta > T::zero() && delta < T::FRAC_PI_2()) {
        return Err(Error::input(format!("δ = {delta} outside (0, π/2)")));
    }
    if delta < psi.t_min() {
        return Err(Error::Resolution(format!("δ = {delta} below the resolved range of ψ")));
    }
    let rho = psi.rho;
    let psid = psi.value(delta);
    let i_delta = psi.tail_integral(delta);
    if !(i_delta > T::zero() && i_delta.is_finite()) {
        return Err(Error::Resolution(format!("∫_δ^π ds/(s^αψ) = {i_delta} is not a positive number")));
    }
    let start = delta.powf(T::one() - alpha) / psid;
    let a_delta = start + i_delta.ln();
    // A_δ − log I(t) increases from `start ≤ 1` to +∞ on [δ, π).
    let target = (a_delta - T::one()).exp();
    let eta = if start >= T::one() {
        delta
    } else {
        let (mut lo, mut hi) = (delta, T::PI());
        for _ in 0..200 {
            let mid = (lo + hi) / lit(2.0);
            if psi.tail_integral(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * hi {
                break;
            }
        }
        if !(hi < T::PI()) && psi.tail_integral(lo) > target {
            return Err(Error::Resolution("η_δ bisection did not bracket a root".into()));
        }
        hi
    };
    Ok(WDelta { delta, a_delta, eta_delta: eta, alpha, rho, coeff: delta.powf(rho) / psid, psi })
}

impl<T: Real> WDelta<'_, T> {
    /// Largest jump at `δ` and `η_δ`.
    pub fn continuity_error(&self) -> T {
        let below = self.coeff * self.delta.powf(T::one() - self.alpha - self.rho);
        let above = self.a_delta - self.psi.tail_integral(self.delta).ln();
        let at_eta = self.a_delta - self.psi.tail_integral(self.eta_delta).ln();
        let e1 = (below - above).abs();
        let e2 = if self.eta_delta > self.delta { (at_eta - T::one()).abs() } else { T::zero() };
        e1.max(e2)
    }

    /// `sup_{t≤δ} w_δ(t)/t^{1−α−ρ}`.
    pub fn small_scale_constant(&self) -> T {
        self.coeff
    }
}

impl<T: Real> WeightProfile<T> for WDelta<'_, T> {
    fn value(&self, t: T) -> T {
        if t <= T::zero() {
            T::zero()
        } else if t <= self.delta {
            self.coeff * t.powf(T::one() - self.alpha - self.rho)
        } else if t <= self.eta_delta {
            (self.a_delta - self.psi.tail_integral(t).ln()).min(T::one())
        } else {
            T::one()
        }
    }

    fn derivative(&self, t: T) -> T {
        if t <= T::zero() {
            T::infinity()
        } else if t <= self.delta {
            self.coeff * (T::one() - self.alpha - self.rho) * t.powf(-self.alpha - self.rho)
        } else if t <= self.eta_delta {
            T::one() / (t.powf(self.alpha) * self.psi.value(t) * self.psi.tail_integral(t))
        } else {
            T::zero()
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        let mut b = vec![self.delta];
        b.extend(self.psi.nodes().iter().cloned().filter(|&x| x > self.delta && x < self.eta_delta));
        b.push(self.eta_delta);
        b.dedup();
        b
    }

    fn describe(&self) -> String {
        format!(
            "w_δ (δ = {:.6e}, A_δ = {:.6}, η_δ = {:.6e})",
            to_f64(self.delta),
            to_f64(self.a_delta),
            to_f64(self.eta_delta)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignParams {
    pub deltas: Vec<f64>,
    /// Depth of `E_N` whose distance function defines `|f*|`.
    pub level_depth: usize,
    /// Depth used for `|E_t|` inside `φ` and for the capacity test.
    pub psi_depth: usize,
    pub capacity_depth: usize,
    pub samples_per_decade: usize,
    pub offset_threshold: f64,
    pub fw: FwParams,
}

impl Default for CampaignParams {
    fn default() -> Self {
        Self {
            deltas: (3..=10).map(|k| std::f64::consts::PI * 0.5f64.powi(k)).collect(),
            level_depth: 8,
            psi_depth: 64,
            capacity_depth: 16,
            samples_per_decade: 64,
            offset_threshold: 0.1,
            fw: FwParams { grid_size: 8192, ..FwParams::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungRecord {
    pub delta: f64,
    pub a_delta: f64,
    pub eta_delta: f64,
    pub f0: f64,
    pub dirichlet: f64,
    pub norm_alpha: f64,
    pub fw_bound: f64,
    pub fw_ratio: f64,
    /// γ making `t ↦ w_δ(t^γ)` concave, if the scan found one.
    pub concavity_gamma: Option<f64>,
    pub offset_fraction: f64,
    pub continuity_error: f64,
    pub clipped_fraction: f64,
    pub taylor_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateVerdicts {
    /// Offset fraction first/last rung; must be ≥ 2.
    pub offset_shrink: f64,
    pub boundary: bool,
    pub f0_nondecreasing: bool,
    pub f0_final: f64,
    pub value_at_zero: bool,
    pub norm_spread: f64,
    pub norm_bounded: bool,
    pub fw_ratio_spread: f64,
    pub fw_ratio_bounded: bool,
    /// Whether the concavity hypothesis of the `f_w` estimate held on every rung.
    pub fw_gate_passed: bool,
}

impl SurrogateVerdicts {
    pub fn all_pass(&self) -> bool {
        self.boundary && self.f0_nondecreasing && self.value_at_zero && self.norm_bounded && self.fw_ratio_bounded
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub sigma: f64,
    pub capacity: CapacityTest,
    pub envelope: EnvelopeCheck,
    pub divergence: LadderDiagnostics,
    pub records: Vec<RungRecord>,
    pub verdicts: SurrogateVerdicts,
}

impl CampaignReport {
    pub const CSV_HEADER: [&'static str; 13] = [
        "delta",
        "A_delta",
        "eta_delta",
        "f0",
        "dirichlet",
        "norm_alpha",
        "fw_bound",
        "fw_ratio",
        "concavity_gamma",
        "offset_fraction",
        "continuity_error",
        "clipped_fraction",
        "taylor_tail",
    ];

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.records {
            let g = r.concavity_gamma.map(|g| format!("{g:.17e}")).unwrap_or_default();
            w.write_record([
                format!("{:.17e}", r.delta),
                format!("{:.17e}", r.a_delta),
                format!("{:.17e}", r.eta_delta),
                format!("{:.17e}", r.f0),
                format!("{:.17e}", r.dirichlet),
                format!("{:.17e}", r.norm_alpha),
                format!("{:.17e}", r.fw_bound),
                format!("{:.17e}", r.fw_ratio),
                g,
                format!("{:.17e}", r.offset_fraction),
                format!("{:.17e}", r.continuity_error),
                format!("{:.17e}", r.clipped_fraction),
                format!("{:.17e}", r.taylor_tail),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn deep_spec<T: Real>(spec: &CantorSpec<T>, depth: usize) -> Result<CantorSpec<T>> {
    spec.with_depth(depth).or_else(|_| Ok(spec.clone()))
}

/// `ψ` for a Cantor set at a given `α`, with `(ρ, σ)` from [`select_params`].
pub fn regularized_for_set<T: Real>(
    spec: &CantorSpec<T>,
    alpha: T,
    psi_depth: usize,
    samples_per_decade: usize,
) -> Result<RegularizedWeight<T>> {
    let (_, mu) = lambda_and_mu(spec)?;
    let (rho, sigma) = select_params(to_f64(alpha), to_f64(mu))?;
    let deep = deep_spec(spec, psi_depth)?;
    let phi = Phi::new(deep.level(deep.depth())?, alpha, lit(sigma))?;
    regularize(&phi, lit(rho), samples_per_decade)
}

/// Builds `f_{w_δ}` along the `δ`-ladder and evaluates the surrogates of
/// cyclicity. Refused unless the capacity test says the set has capacity zero.
pub fn cyclicity_run<T: Real>(spec: &CantorSpec<T>, alpha: T, params: &CampaignParams) -> Result<CampaignReport> {
    let (lambda, mu) = lambda_and_mu(spec)?;
    let cap_spec = deep_spec(spec, params.capacity_depth)?;
    let capacity = cantor_capacity_zero_test(&cap_spec, alpha, &LadderParams::default())?;
    if capacity.verdict() != Verdict::Zero {
        return Err(Error::HypothesisViolated(format!(
            "capacity test at α = {} returned {:?}; cyclicity needs a set of α-capacity zero",
            to_f64(alpha),
            capacity.verdict()
        )));
    }
    let (rho, sigma) = select_params(to_f64(alpha), to_f64(mu))?;
    let psi = regularized_for_set(spec, alpha, params.psi_depth, params.samples_per_decade)?;
    let envelope = psi.check();
    // The ladder spans the whole resolved range of ψ: near the threshold the
    // integral only turns divergent below the depth of the capacity test.
    let psi_spec = deep_spec(spec, params.psi_depth)?;
    let ladder: Vec<T> = psi_spec.lengths()[1..].iter().cloned().filter(|&e| e >= psi.t_min()).collect();
    let divergence = psi.divergence_ladder(&ladder, &LadderParams::default())?;

    let level_spec = deep_spec(spec, params.level_depth)?;
    let level = level_spec.level(params.level_depth.min(level_spec.depth()))?;
    if params.deltas.is_empty() {
        return Err(Error::input("empty δ-ladder"));
    }
    if params.deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::input("δ-ladder must be strictly decreasing"));
    }
    if to_f64(level.arc_length()) > params.deltas[params.deltas.len() - 1] {
        return Err(Error::Resolution(format!(
            "δ = {} is below the set resolution a_N = {}",
            params.deltas[params.deltas.len() - 1],
            to_f64(level.arc_length())
        )));
    }
    let grid = CircleGrid::new(params.fw.grid_size)?;
    let disk = DiskGrid::<T>::new(params.fw.disk)?;
    let records: Vec<RungRecord> = params
        .deltas
        .par_iter()
        .map(|&d| campaign_rung(&psi, &level, grid, &disk, alpha, lit(d), params))
        .collect::<Result<_>>()?;
    let verdicts = surrogate_verdicts(&records);
    Ok(CampaignReport {
        schema_version: SCHEMA_VERSION,
        alpha: to_f64(alpha),
        lambda: to_f64(lambda),
        mu: to_f64(mu),
        rho,
        sigma,
        capacity,
        envelope,
        divergence,
        records,
        verdicts,
    })
}

fn campaign_rung<T: Real>(
    psi: &RegularizedWeight<T>,
    level: &CantorLevel<T>,
    grid: CircleGrid,
    disk: &DiskGrid<T>,
    alpha: T,
    delta: T,
    params: &CampaignParams,
) -> Result<RungRecord> {
    let w = build_wdelta(psi, delta, alpha)?;
    let modulus = modulus_from_weight(&w, level, grid)?;
    let offset = modulus
        .samples()
        .iter()
        .filter(|&&l| to_f64(l.exp() - T::one()).abs() > params.offset_threshold)
        .count() as f64
        / grid.len() as f64;
    let f = OuterFunction::new(&modulus);
    let s = SpectralOuter::new(&f, params.fw.oversample)?;
    let dirichlet = to_f64(dirichlet_area(&s, alpha, disk)?);
    let f0 = to_f64(s.value_at_zero());
    let t_lo = level.arc_length() / lit(2.0);
    let fw_bound = to_f64(fw_bound_integral(&w, level, alpha, t_lo));
    let scan = gamma_concavity_scan(
        &w,
        to_f64(alpha),
        to_f64(t_lo),
        params.fw.gamma_count,
        params.fw.gamma_samples,
        params.fw.concavity_slack,
    )?;
    Ok(RungRecord {
        delta: to_f64(delta),
        a_delta: to_f64(w.a_delta),
        eta_delta: to_f64(w.eta_delta),
        f0,
        dirichlet,
        norm_alpha: (f0 * f0 + dirichlet).sqrt(),
        fw_bound,
        fw_ratio: if fw_bound > 0.0 { dirichlet / fw_bound } else { 0.0 },
        concavity_gamma: scan.passing_gamma,
        offset_fraction: offset,
        continuity_error: to_f64(w.continuity_error()),
        clipped_fraction: modulus.clip_report().fraction,
        taylor_tail: to_f64(s.tail_fraction()),
    })
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = v.fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else if max <= 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn surrogate_verdicts(r: &[RungRecord]) -> SurrogateVerdicts {
    let first = &r[0];
    let last = &r[r.len() - 1];
    let offset_shrink = if last.offset_fraction > 0.0 {
        first.offset_fraction / last.offset_fraction
    } else if first.offset_fraction > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    let boundary = offset_shrink >= 2.0 || (first.offset_fraction == 0.0 && last.offset_fraction == 0.0);
    let f0_nondecreasing = r.windows(2).all(|w| w[1].f0 >= w[0].f0);
    let norm_spread = spread(r.iter().map(|x| x.norm_alpha));
    let fw_ratio_spread = spread(r.iter().map(|x| x.fw_ratio));
    SurrogateVerdicts {
        offset_shrink,
        boundary,
        f0_nondecreasing,
        f0_final: last.f0,
        value_at_zero: last.f0 >= 0.9,
        norm_spread,
        norm_bounded: norm_spread <= 10.0,
        fw_ratio_spread,
        fw_ratio_bounded: fw_ratio_spread <= 10.0,
        fw_gate_passed: r.iter().all(|x| x.concavity_gamma.is_some()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetRung {
    pub epsilon: f64,
    pub measure: f64,
    pub components: usize,
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NecessaryVerdict {
    /// `|f*| ≥ threshold` on the grid.
    EmptyZeroSet,
    /// Sublevel sets do not shrink: the zero set has positive measure.
    NotCyclicPositiveMeasure,
    /// Minimal energy saturates: the zero set has positive capacity.
    NotCyclicPositiveCapacity,
    /// Minimal energy grows without visible bound.
    ConsistentWithCapacityZero,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub schema_version: u32,
    pub alpha: f64,
    pub threshold: f64,
    pub rungs: Vec<ZeroSetRung>,
    pub ladder: Option<LadderDiagnostics>,
    pub verdict: NecessaryVerdict,
}

/// Connected runs of grid indices where `in_set` holds, merged across `θ = 0`.
fn grid_components(mask: &[bool]) -> Vec<(usize, usize)> {
    let n = mask.len();
    if mask.iter().all(|&b| b) {
        return vec![(0, n)];
    }
    let start = mask.iter().position(|&b| !b).expect("some false");
    let mut out = Vec::new();
    let mut run: Option<usize> = None;
    for step in 1..=n {
        let k = (start + step) % n;
        match (mask[k], run) {
            (true, None) => run = Some(k),
            (false, Some(s)) => {
                out.push((s, (k + n - s) % n));
                run = None;
            }
            _ => {}
        }
    }
    out
}

/// Tracks the sublevel sets `{|f*| < ε}` along `ε = threshold·10^{−j}` and the
/// minimal `α`-energy of a probability measure on their arc covers.
pub fn necessary_condition_check<T: Real>(
    modulus: &BoundaryModulus<T>,
    alpha: T,
    threshold: f64,
    rungs: usize,
    support_points: usize,
) -> Result<NecessaryReport> {
    if !(threshold > 0.0) || rungs < 2 {
        return Err(Error::input("threshold must be positive and the ladder needs at least 2 rungs"));
    }
    let grid = modulus.grid();
    let h = grid.spacing::<f64>();
    let floor = modulus.clip_report().floor;
    let mut out = Vec::new();
    for j in 0..rungs {
        let eps = threshold * 10f64.powi(-(j as i32));
        if let Some(fl) = floor {
            if eps.ln() <= fl {
                break;
            }
        }
        let mask: Vec<bool> = modulus.samples().iter().map(|&l| to_f64(l) < eps.ln()).collect();
        let comps = grid_components(&mask);
        let measure = comps.iter().map(|c| c.1 as f64 * h).sum::<f64>();
        out.push((eps, comps, measure));
    }
    let base = |rungs: Vec<ZeroSetRung>, ladder, verdict| NecessaryReport {
        schema_version: SCHEMA_VERSION,
        alpha: to_f64(alpha),
        threshold,
        rungs,
        ladder,
        verdict,
    };
    if out.is_empty() || out[0].2 == 0.0 {
        let rungs = out
            .iter()
            .map(|(e, c, m)| ZeroSetRung { epsilon: *e, measure: *m, components: c.len(), energy: None })
            .collect();
        return Ok(base(rungs, None, NecessaryVerdict::EmptyZeroSet));
    }
    let first = out[0].2;
    let last = out[out.len() - 1].2;
    if out.len() >= 2 && last >= 0.5 * first && last > 0.0 {
        let rungs = out
            .iter()
            .map(|(e, c, m)| ZeroSetRung { epsilon: *e, measure: *m, components: c.len(), energy: None })
            .collect();
        return Ok(base(rungs, None, NecessaryVerdict::NotCyclicPositiveMeasure));
    }
    let params = SolverParams { record_trace: false, ..SolverParams::default() };
    let mut records = Vec::new();
    for (eps, comps, measure) in &out {
        if comps.is_empty() {
            records.push(ZeroSetRung { epsilon: *eps, measure: 0.0, components: 0, energy: None });
            continue;
        }
        let mut support: Vec<T> = Vec::new();
        for &(s, len) in comps {
            let arc = Arc::new(lit::<T>((s as f64 - 0.5) * h), lit::<T>(len as f64 * h))?;
            let pts = ((support_points as f64 * len as f64 * h / measure).round() as usize).max(1);
            support.extend(arc_support(&arc, pts));
        }
        if support.len() < 2 {
            let (s, len) = comps[0];
            let arc = Arc::new(lit::<T>((s as f64 - 0.5) * h), lit::<T>(len as f64 * h))?;
            support = arc_support(&arc, 2);
        }
        let eq = equilibrium_measure(&support, alpha, &params)?;
        records.push(ZeroSetRung {
            epsilon: *eps,
            measure: *measure,
            components: comps.len(),
            energy: Some(to_f64(eq.energy)),
        });
    }
    // Distinct, strictly shrinking measures drive the ladder.
    let mut scale = Vec::new();
    let mut energy = Vec::new();
    for r in &records {
        if let Some(e) = r.energy {
            if scale.last().is_none_or(|&m: &f64| r.measure < m) {
                scale.push(r.measure);
                energy.push(e);
            }
        }
    }
    let lp = LadderParams::default();
    if scale.len() < lp.rungs + 2 {
        return Ok(base(records, None, NecessaryVerdict::Inconclusive));
    }
    let diag = classify_ladder(&scale, &energy, &lp)?;
    let verdict = match diag.verdict {
        Verdict::Zero => NecessaryVerdict::ConsistentWithCapacityZero,
        Verdict::Positive => NecessaryVerdict::NotCyclicPositiveCapacity,
        Verdict::Inconclusive => NecessaryVerdict::Inconclusive,
    };
    Ok(base(records, Some(diag), verdict))
}

/// `∫_ε^π dt/(t^αφ) / log ∫_ε^π dt/(t^α|E_t|)` along a ladder.
pub fn claim_chain_ratios<T: Real>(phi: &Phi<T>, spec: &CantorSpec<T>, eps: &[T]) -> Result<Vec<f64>> {
    eps.iter()
        .map(|&e| {
            let lhs = phi.reciprocal_integral(e);
            let rhs = crate::capacity::capacity_integral(spec, phi.alpha, e)?;
            Ok(to_f64(lhs / rhs.ln()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_examples() {
        let (r, s) = select_params(0.7, 0.369).unwrap();
        assert!((r - 0.2).abs() < 1e-12 && (s - 0.25).abs() < 1e-12);
        let (r, s) = select_params(0.0, 0.5).unwrap();
        assert!((r - 0.583_333_333_333_333_4).abs() < 1e-12 && (s - 2.0 / 3.0).abs() < 1e-12);
        assert!(select_params(0.5, 0.0).is_err());
    }

    #[test]
    fn components_wrap_around_zero() {
        let mask = [true, false, false, true, true, false, true];
        let c = grid_components(&mask);
        assert_eq!(c, vec![(3, 2), (6, 2)]);
    }

    fn middle_thirds_psi(alpha: f64) -> RegularizedWeight<f64> {
        let spec = CantorSpec::<f64>::middle_thirds(40).unwrap();
        regularized_for_set(&spec, alpha, 40, 32).unwrap()
    }

    #[test]
    fn envelope_conclusions_hold() {
        let psi = middle_thirds_psi(0.7);
        let c = psi.check();
        assert!(c.ratio_nondecreasing && c.sandwich, "{c:?}");
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        let psi = middle_thirds_psi(0.7);
        let rule = GaussLegendre::<f64>::new(30);
        let (a, b) = (0.01, 0.5);
        let mut brk: Vec<f64> = psi.nodes().iter().cloned().filter(|&x| x > a && x < b).collect();
        brk.insert(0, a);
        brk.push(b);
        let direct: f64 = brk
            .windows(2)
            .map(|w| rule.integrate(w[0], w[1], |s| 1.0 / (s.powf(0.7) * psi.value(s))))
            .sum();
        let exact = psi.tail_integral(a) - psi.tail_integral(b);
        assert!((direct - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn wdelta_is_continuous_and_increasing() {
        let psi = middle_thirds_psi(0.7);
        let w = build_wdelta(&psi, std::f64::consts::PI / 64.0, 0.7).unwrap();
        assert!(w.continuity_error() < 1e-9);
        assert!(w.eta_delta > w.delta && w.eta_delta <= std::f64::consts::PI);
        assert!((w.value(w.eta_delta) - 1.0).abs() < 1e-9);
        let mut prev = 0.0;
        for k in 1..2000 {
            let t = std::f64::consts::PI * k as f64 / 2000.0;
            let v = w.value(t);
            assert!(v >= prev - 1e-15, "t={t}");
            prev = v;
        }
    }

    #[test]
    fn power_phi_fixed_points() {
        let spec = CantorSpec::<f64>::middle_thirds(30).unwrap();
        let level = spec.level(30).unwrap();
        // σ close to 1−α and a set neighborhood always larger than t^σ for t < π ⇒ φ = t^σ.
        let phi = Phi::new(level, 0.5, 0.45).unwrap();
        let t: f64 = 1e-6;
        assert!((phi.value(t) - t.powf(0.45)).abs() < 1e-15 || phi.value(t) == t.powf(0.5));
    }

    #[test]
    fn necessary_condition_examples() {
        let grid = CircleGrid::new(1024).unwrap();
        let m = BoundaryModulus::from_fn(grid, |t: f64| 0.3 * t.cos() - 0.5, None).unwrap();
        let r = necessary_condition_check(&m, 0.5, 0.01, 6, 64).unwrap();
        assert_eq!(r.verdict, NecessaryVerdict::EmptyZeroSet);
        let arc = BoundaryModulus::from_fn(
            grid,
            |t: f64| if (1.0..1.2).contains(&t) { f64::NEG_INFINITY } else { 0.0 },
            Some(-700.0),
        )
        .unwrap();
        let r = necessary_condition_check(&arc, 0.5, 0.5, 6, 64).unwrap();
        assert_eq!(r.verdict, NecessaryVerdict::NotCyclicPositiveMeasure);
    }
}
