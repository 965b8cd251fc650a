//! Generalized Cantor sets on the circle.
//!
//! Start from a closed arc of length `a_0` centred at angle 0, remove an open
//! middle arc so that two arcs of length `a_1` remain, and repeat. `E_n` is the
//! union of the `2^n` arcs of length `a_n`; `E` is the intersection.
//!
//! Internally positions are measured by the counter-clockwise offset `u` from
//! the start of the initial arc, so `E_0 = [0, a_0]` and the outer gap is
//! `[a_0, 2π]`. Nothing here materializes the `2^n` arcs unless asked to:
//! distances, `|E_t|` and gap counts only need the length sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{wrap_angle, Arc};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, two_pi, Real};

/// Deepest supported construction level (gap counts are `u128`).
pub const MAX_DEPTH: usize = 120;
/// Deepest level for which [`CantorLevel::arcs`] will materialize arcs.
pub const MAX_MATERIALIZED_LEVEL: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSpec {
    pub a0: f64,
    pub ratio: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpec {
    pub a0: f64,
    pub ratios: Vec<f64>,
}

/// JSON form: `{"a0", "ratio", "depth"}` or `{"a0", "ratios"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CantorSpecRepr {
    Geometric(GeometricSpec),
    Explicit(ExplicitSpec),
}

/// Validated length sequence `a_0 > a_1 > … > a_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CantorSpecRepr", into = "CantorSpecRepr", bound = "T: Real")]
pub struct CantorSpec<T> {
    repr: CantorSpecRepr,
    lengths: Vec<T>,
}

impl<T: Real> TryFrom<CantorSpecRepr> for CantorSpec<T> {
    type Error = Error;

    fn try_from(repr: CantorSpecRepr) -> Result<Self> {
        let (a0, ratios) = match &repr {
            CantorSpecRepr::Geometric(g) => (g.a0, vec![g.ratio; g.depth]),
            CantorSpecRepr::Explicit(e) => (e.a0, e.ratios.clone()),
        };
        if !a0.is_finite() || a0 <= 0.0 || a0 > std::f64::consts::TAU {
            return Err(Error::InvalidSpec(format!("a0 = {a0} must lie in (0, 2π]")));
        }
        if ratios.len() > MAX_DEPTH {
            return Err(Error::InvalidSpec(format!(
                "depth {} exceeds the supported maximum {MAX_DEPTH}",
                ratios.len()
            )));
        }
        for (n, &r) in ratios.iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::InvalidSpec(format!("ratio a_{}/a_{n} = {r} must be positive", n + 1)));
            }
            if r >= 0.5 {
                return Err(Error::InvalidSpec(format!(
                    "ratio a_{}/a_{n} = {r}: the set needs sup a_(n+1)/a_n < 1/2",
                    n + 1
                )));
            }
        }
        let mut lengths = Vec::with_capacity(ratios.len() + 1);
        let mut a = lit::<T>(a0);
        lengths.push(a);
        for &r in &ratios {
            a = a * lit::<T>(r);
            if a <= T::zero() || !a.is_normal() {
                return Err(Error::InvalidSpec(format!(
                    "a_{} underflows the scalar type; reduce depth",
                    lengths.len()
                )));
            }
            lengths.push(a);
        }
        Ok(Self { repr, lengths })
    }
}

impl<T> From<CantorSpec<T>> for CantorSpecRepr {
    fn from(spec: CantorSpec<T>) -> Self {
        spec.repr
    }
}

impl<T: Real> CantorSpec<T> {
    /// `a_n = a0·ratio^n` for `n ≤ depth`.
    pub fn geometric(a0: f64, ratio: f64, depth: usize) -> Result<Self> {
        CantorSpecRepr::Geometric(GeometricSpec { a0, ratio, depth }).try_into()
    }

    /// `a_{n+1} = ratios[n]·a_n`.
    pub fn explicit(a0: f64, ratios: Vec<f64>) -> Result<Self> {
        CantorSpecRepr::Explicit(ExplicitSpec { a0, ratios }).try_into()
    }

    /// Middle-thirds set with `a_0 = π`.
    pub fn middle_thirds(depth: usize) -> Result<Self> {
        Self::geometric(std::f64::consts::PI, 1.0 / 3.0, depth)
    }

    pub fn repr(&self) -> &CantorSpecRepr {
        &self.repr
    }

    /// Same lengths truncated (or the geometric rule extended) to `depth`.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        match &self.repr {
            CantorSpecRepr::Geometric(g) => Self::geometric(g.a0, g.ratio, depth),
            CantorSpecRepr::Explicit(e) => {
                if depth > e.ratios.len() {
                    return Err(Error::LevelOutOfRange { requested: depth, depth: e.ratios.len() });
                }
                Self::explicit(e.a0, e.ratios[..depth].to_vec())
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.lengths.len() - 1
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn length(&self, n: usize) -> T {
        self.lengths[n]
    }

    /// Length of a level-`k` gap (`k ≥ 1`): `a_{k-1} − 2a_k`; `k = 0` is the outer gap `2π − a_0`.
    pub fn gap(&self, k: usize) -> T {
        if k == 0 {
            two_pi::<T>() - self.lengths[0]
        } else {
            self.lengths[k - 1] - lit::<T>(2.0) * self.lengths[k]
        }
    }

    pub fn level(&self, n: usize) -> Result<CantorLevel<T>> {
        build_level(self, n)
    }
}

/// `(λ_E, μ)` with `λ_E = sup a_{n+1}/a_n` over the prefix and `μ = 1 − log2/log(1/λ_E)`.
pub fn lambda_and_mu<T: Real>(spec: &CantorSpec<T>) -> Result<(T, T)> {
    let l = spec.lengths();
    if l.len() < 2 {
        return Err(Error::InvalidSpec("λ_E needs at least one ratio (depth ≥ 1)".into()));
    }
    let lambda = l.windows(2).map(|w| w[1] / w[0]).fold(T::zero(), T::max);
    if lambda >= lit(0.5) {
        return Err(Error::InvalidSpec(format!("λ_E = {lambda} must be < 1/2")));
    }
    let mu = T::one() - T::LN_2() / (T::one() / lambda).ln();
    Ok((lambda, mu))
}

/// `E_n`: the union of `2^n` arcs of length `a_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CantorLevel<T> {
    spec: CantorSpec<T>,
    level: usize,
}

pub fn build_level<T: Real>(spec: &CantorSpec<T>, n: usize) -> Result<CantorLevel<T>> {
    if n > spec.depth() {
        return Err(Error::LevelOutOfRange { requested: n, depth: spec.depth() });
    }
    Ok(CantorLevel { spec: spec.clone(), level: n })
}

impl<T: Real> CantorLevel<T> {
    pub fn spec(&self) -> &CantorSpec<T> {
        &self.spec
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `a_n`, which also bounds `|d(·,E) − d(·,E_n)|`.
    pub fn arc_length(&self) -> T {
        self.spec.length(self.level)
    }

    /// Start angle of the initial arc.
    pub fn base_angle(&self) -> T {
        wrap_angle(-self.spec.length(0) / lit(2.0))
    }

    fn offset_of(&self, theta: T) -> T {
        wrap_angle(theta - self.base_angle())
    }

    /// Offsets (from the initial arc start) of the `2^n` arc starts, sorted.
    pub fn arc_offsets(&self) -> Result<Vec<T>> {
        if self.level > MAX_MATERIALIZED_LEVEL {
            return Err(Error::input(format!(
                "refusing to materialize 2^{} arcs (limit level {MAX_MATERIALIZED_LEVEL})",
                self.level
            )));
        }
        let mut offsets = vec![T::zero()];
        for k in 0..self.level {
            let shift = self.spec.length(k) - self.spec.length(k + 1);
            offsets = offsets.iter().flat_map(|&o| [o, o + shift]).collect();
        }
        Ok(offsets)
    }

    pub fn arcs(&self) -> Result<Vec<Arc<T>>> {
        let len = self.arc_length();
        let base = self.base_angle();
        self.arc_offsets()?
            .into_iter()
            .map(|o| Arc::new(base + o, len))
            .collect()
    }

    /// Gaps of `E_n` as `(offset, length)` pairs, including the outer gap, sorted by offset.
    pub fn gap_intervals(&self) -> Result<Vec<(T, T)>> {
        let offsets = self.arc_offsets()?;
        let len = self.arc_length();
        let mut gaps: Vec<(T, T)> = offsets
            .windows(2)
            .map(|w| (w[0] + len, w[1] - w[0] - len))
            .collect();
        let outer = self.spec.gap(0);
        if outer > T::zero() {
            gaps.push((self.spec.length(0), outer));
        }
        Ok(gaps)
    }

    /// Arclength distance from `θ` to `E_n`.
    pub fn distance(&self, theta: T) -> T {
        let u = self.offset_of(theta);
        let a0 = self.spec.length(0);
        if u > a0 {
            return (u - a0).min(two_pi::<T>() - u);
        }
        let mut origin = T::zero();
        for k in 0..self.level {
            let ak = self.spec.length(k);
            let ak1 = self.spec.length(k + 1);
            let x = u - origin;
            if x <= ak1 {
                continue;
            }
            if x >= ak - ak1 {
                origin += ak - ak1;
                continue;
            }
            return (x - ak1).min(ak - ak1 - x);
        }
        T::zero()
    }

    pub fn gap_profile(&self) -> GapProfile<T> {
        GapProfile::new(self)
    }

    /// `|E_t|`: measure of the closed `t`-neighbourhood of `E_n`.
    pub fn neighborhood_measure(&self, t: T) -> T {
        self.gap_profile().measure(t)
    }

    /// `N_E(t) = 2·#{complementary components of E_n longer than 2t}`.
    pub fn counting_function(&self, t: T) -> u128 {
        self.gap_profile().count(t)
    }

    /// Mean of `d(·,E_n)^α` over an arc, computed exactly.
    pub fn mean_distance_power(&self, arc: &Arc<T>, alpha: T) -> T {
        let tables = SubtreeIntegrals::new(self, alpha);
        tables.mean(self, arc)
    }
}

/// Free-function forms of the main queries.
pub fn distance_to_set<T: Real>(theta: T, level: &CantorLevel<T>) -> T {
    level.distance(theta)
}

pub fn neighborhood_measure<T: Real>(level: &CantorLevel<T>, t: T) -> T {
    level.neighborhood_measure(t)
}

pub fn counting_function<T: Real>(level: &CantorLevel<T>, t: T) -> u128 {
    level.counting_function(t)
}

/// Gap lengths of `E_n` grouped by level.
///
/// `|E_t| = 2^n a_n + Σ_gaps min(g, 2t)`, which is piecewise linear in `t`
/// with breakpoints at `g/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile<T> {
    base: T,
    /// `(gap length, multiplicity)` sorted by decreasing length; zero-length gaps dropped.
    gaps: Vec<(T, u128)>,
}

impl<T: Real> GapProfile<T> {
    fn new(level: &CantorLevel<T>) -> Self {
        let spec = &level.spec;
        let n = level.level;
        let base = lit::<T>(2.0).powi(n as i32) * spec.length(n);
        let mut gaps = Vec::with_capacity(n + 1);
        if spec.gap(0) > T::zero() {
            gaps.push((spec.gap(0), 1u128));
        }
        for k in 1..=n {
            gaps.push((spec.gap(k), 1u128 << (k - 1)));
        }
        gaps.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite gaps"));
        Self { base, gaps }
    }

    /// Total length of the arcs of `E_n`.
    pub fn base(&self) -> T {
        self.base
    }

    pub fn gaps(&self) -> &[(T, u128)] {
        &self.gaps
    }

    pub fn measure(&self, t: T) -> T {
        let two_t = lit::<T>(2.0) * t.max(T::zero());
        let mut total = self.base;
        for &(g, m) in &self.gaps {
            total += mult::<T>(m) * g.min(two_t);
        }
        total.min(two_pi())
    }

    pub fn count(&self, t: T) -> u128 {
        let two_t = lit::<T>(2.0) * t;
        2 * self.gaps.iter().filter(|(g, _)| *g > two_t).map(|&(_, m)| m).sum::<u128>()
    }

    /// Sorted breakpoints `g/2` of `t ↦ |E_t|` inside `(lo, hi)`, with `lo` and `hi` added.
    pub fn breakpoints(&self, lo: T, hi: T) -> Vec<T> {
        let mut b: Vec<T> = self
            .gaps
            .iter()
            .map(|&(g, _)| g / lit(2.0))
            .filter(|&x| x > lo && x < hi)
            .collect();
        b.push(lo);
        b.push(hi);
        b.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        b.dedup();
        b
    }
}

fn mult<T: Real>(m: u128) -> T {
    T::from_u128(m).expect("multiplicity representable")
}

/// `∫_{t_min}^π |E_t|/t dt` with `t_min = a_n/2`, exact for the piecewise linear `|E_t|`.
pub fn carleson_integral<T: Real>(level: &CantorLevel<T>) -> T {
    let profile = level.gap_profile();
    let lo = level.arc_length() / lit(2.0);
    let hi = T::PI();
    let b = profile.breakpoints(lo, hi);
    let mut total = T::zero();
    for w in b.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let (m0, m1) = (profile.measure(x0), profile.measure(x1));
        let slope = (m1 - m0) / (x1 - x0);
        let intercept = m0 - slope * x0;
        total += intercept * (x1 / x0).ln() + slope * (x1 - x0);
    }
    total
}

/// Least-squares slope of `log|E_t|` against `log t` on a log grid over `[a_n, a_1]`.
pub fn growth_exponent_fit<T: Real>(level: &CantorLevel<T>, samples: usize) -> Result<T> {
    if level.level < 2 || samples < 2 {
        return Err(Error::input("growth fit needs level >= 2 and at least 2 samples"));
    }
    let profile = level.gap_profile();
    let lo = to_f64(level.arc_length()).ln();
    let hi = to_f64(level.spec.length(1)).ln();
    let pts: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            (x, to_f64(profile.measure(lit(x.exp()))).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(lit(sxy / sxx))
}

/// Audit of `|E_t| ≤ C t^μ` on a log grid of `t` in `[a_n/2, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthAudit {
    pub mu: f64,
    pub lambda: f64,
    /// `3·a_0^{log2/log(1/λ)}`.
    pub stated_constant: f64,
    /// `max |E_t|/t^μ` over the grid.
    pub empirical_constant: f64,
    pub worst_t: f64,
    pub samples: usize,
}

pub fn growth_constant_audit<T: Real>(level: &CantorLevel<T>, samples: usize) -> Result<GrowthAudit> {
    let (lambda, mu) = lambda_and_mu(&level.spec)?;
    let (lambda, mu) = (to_f64(lambda), to_f64(mu));
    let a0 = to_f64(level.spec.length(0));
    let beta = std::f64::consts::LN_2 / (1.0 / lambda).ln();
    let profile = level.gap_profile();
    let lo = (to_f64(level.arc_length()) / 2.0).ln();
    let hi = std::f64::consts::PI.ln();
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..samples.max(2) {
        let t = (lo + (hi - lo) * i as f64 / (samples.max(2) - 1) as f64).exp();
        let r = to_f64(profile.measure(lit(t))) / t.powf(mu);
        if r > worst.0 {
            worst = (r, t);
        }
    }
    Ok(GrowthAudit {
        mu,
        lambda,
        stated_constant: 3.0 * a0.powf(beta),
        empirical_constant: worst.0,
        worst_t: worst.1,
        samples: samples.max(2),
    })
}

/// Exact integrals of `d^α` over whole subtrees of the construction.
struct SubtreeIntegrals<T> {
    alpha: T,
    /// `full[k]`: `∫ d(·,E_n)^α` over one level-`k` arc.
    full: Vec<T>,
}

impl<T: Real> SubtreeIntegrals<T> {
    fn new(level: &CantorLevel<T>, alpha: T) -> Self {
        let n = level.level;
        let spec = &level.spec;
        let mut full = vec![T::zero(); n + 1];
        for k in (0..n).rev() {
            full[k] = lit::<T>(2.0) * full[k + 1] + tent_full(spec.gap(k + 1), alpha);
        }
        Self { alpha, full }
    }

    fn mean(&self, level: &CantorLevel<T>, arc: &Arc<T>) -> T {
        let tau = two_pi::<T>();
        let s = level.offset_of(arc.start());
        let e = s + arc.length();
        let integral = if e <= tau {
            self.interval(level, s, e)
        } else {
            self.interval(level, s, tau) + self.interval(level, T::zero(), e - tau)
        };
        integral / arc.length()
    }

    /// `∫_x^y d^α du` for `0 ≤ x ≤ y ≤ 2π` in offset coordinates.
    fn interval(&self, level: &CantorLevel<T>, x: T, y: T) -> T {
        let a0 = level.spec.length(0);
        let outer = tent_part(a0, two_pi(), x, y, self.alpha);
        outer + self.node(level, 0, T::zero(), x, y)
    }

    fn node(&self, level: &CantorLevel<T>, k: usize, origin: T, x: T, y: T) -> T {
        let ak = level.spec.length(k);
        let (lo, hi) = (x.max(origin), y.min(origin + ak));
        if lo >= hi || k == level.level {
            return T::zero();
        }
        if lo <= origin && hi >= origin + ak {
            return self.full[k];
        }
        let ak1 = level.spec.length(k + 1);
        let gap = tent_part(origin + ak1, origin + ak - ak1, lo, hi, self.alpha);
        gap + self.node(level, k + 1, origin, lo, hi)
            + self.node(level, k + 1, origin + ak - ak1, lo, hi)
    }
}

/// `∫` of `dist(·, {L, R})^α` over a whole gap of length `g`.
fn tent_full<T: Real>(g: T, alpha: T) -> T {
    if g <= T::zero() {
        return T::zero();
    }
    lit::<T>(2.0) * (g / lit(2.0)).powf(alpha + T::one()) / (alpha + T::one())
}

/// `∫_{[x,y] ∩ [l,r]} dist(u, {l, r})^α du`.
fn tent_part<T: Real>(l: T, r: T, x: T, y: T, alpha: T) -> T {
    let (x, y) = (x.max(l), y.min(r));
    if x >= y {
        return T::zero();
    }
    let m = (l + r) / lit(2.0);
    let p = alpha + T::one();
    let f = |v: T| v.max(T::zero()).powf(p) / p;
    let mut total = T::zero();
    // Rising half: distance u − l.
    let (a, b) = (x, y.min(m));
    if a < b {
        total += f(b - l) - f(a - l);
    }
    // Falling half: distance r − u.
    let (a, b) = (x.max(m), y);
    if a < b {
        total += f(r - a) - f(r - b);
    }
    total
}

/// Result of the arc-average lower bound audit `(1/|I|)∫_I d^α ≥ C|I|^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsetAudit {
    pub alpha: f64,
    pub lambda: f64,
    /// `min{1/2 − λ, 1/4}^{α+1}/(α+1)`.
    pub constant: f64,
    /// Arcs shorter than this are skipped: they may sit inside a gap of `E` deeper than `n`.
    pub min_length: f64,
    pub worst_ratio: f64,
    pub worst_start: f64,
    pub worst_length: f64,
    pub arcs_checked: usize,
    pub pass: bool,
}

/// Samples arcs and reports the smallest `[(1/|I|)∫_I d(·,E_n)^α] / |I|^α`.
///
/// Since `d(·,E) ≥ d(·,E_n)`, the reported ratio is a lower bound for the one of `E`.
pub fn kset_lower_bound_audit<T: Real>(
    level: &CantorLevel<T>,
    alpha: T,
    trials: usize,
    seed: u64,
) -> Result<KsetAudit> {
    if alpha < T::zero() || alpha >= T::one() {
        return Err(Error::input(format!("α = {alpha} outside [0, 1)")));
    }
    let (lambda, _) = lambda_and_mu(&level.spec)?;
    let c = (lit::<T>(0.5) - lambda).min(lit(0.25));
    let constant = c.powf(alpha + T::one()) / (alpha + T::one());
    let min_length = level.arc_length() / c;
    let tables = SubtreeIntegrals::new(level, alpha);
    let tau = two_pi::<T>();

    let mut candidates: Vec<Arc<T>> = vec![Arc::full()];
    let base = level.base_angle();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = to_f64(min_length.min(tau)).ln();
    let hi = to_f64(tau).ln();
    for _ in 0..trials {
        let len = lit::<T>(rng.random_range(lo..=hi).exp()).min(tau);
        let start = lit::<T>(rng.random_range(0.0..std::f64::consts::TAU));
        candidates.push(Arc::new(start, len)?);
    }
    // Structured arcs: construction arcs and gaps of the first few levels.
    let shallow = level.spec.level(level.level.min(6))?;
    for (o, len) in shallow.gap_intervals()? {
        candidates.push(Arc::new(base + o, len)?);
    }
    for o in shallow.arc_offsets()? {
        candidates.push(Arc::new(base + o, shallow.arc_length())?);
    }

    let mut worst = (T::infinity(), T::zero(), T::zero());
    let mut checked = 0usize;
    for arc in candidates.iter().filter(|a| a.length() >= min_length) {
        checked += 1;
        let ratio = tables.mean(level, arc) / arc.length().powf(alpha);
        if ratio < worst.0 {
            worst = (ratio, arc.start(), arc.length());
        }
    }
    Ok(KsetAudit {
        alpha: to_f64(alpha),
        lambda: to_f64(lambda),
        constant: to_f64(constant),
        min_length: to_f64(min_length),
        worst_ratio: to_f64(worst.0),
        worst_start: to_f64(worst.1),
        worst_length: to_f64(worst.2),
        arcs_checked: checked,
        pass: worst.0 >= constant,
    })
}

/// `|E_t|` by inflating every materialized arc and merging overlaps.
pub fn neighborhood_measure_by_merging<T: Real>(level: &CantorLevel<T>, t: T) -> Result<T> {
    let tau = two_pi::<T>();
    let len = level.arc_length();
    let t = t.max(T::zero());
    if len + lit::<T>(2.0) * t >= tau {
        return Ok(tau);
    }
    let mut intervals: Vec<(T, T)> = level
        .arc_offsets()?
        .into_iter()
        .map(|o| (o - t, o + len + t))
        .collect();
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let mut merged: Vec<(T, T)> = Vec::new();
    for (a, b) in intervals {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    // Close the circle: the last interval may wrap onto the first.
    if merged.len() > 1 {
        let first = merged[0];
        let last = merged.last_mut().expect("nonempty");
        if last.1 - tau >= first.0 {
            last.1 = last.1.max(first.1 + tau);
            merged.remove(0);
        }
    }
    let total = merged.iter().fold(T::zero(), |acc, (a, b)| acc + (*b - *a));
    Ok(total.min(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn thirds(depth: usize) -> CantorSpec<f64> {
        CantorSpec::middle_thirds(depth).unwrap()
    }

    #[test]
    fn first_levels_match_hand_geometry() {
        let spec = thirds(12);
        let l0 = spec.level(0).unwrap();
        let arcs = l0.arcs().unwrap();
        assert_eq!(arcs.len(), 1);
        assert!((arcs[0].length() - PI).abs() < 1e-15);

        let l1 = spec.level(1).unwrap();
        let gaps = l1.gap_intervals().unwrap();
        assert_eq!(l1.arcs().unwrap().len(), 2);
        assert!((gaps[0].1 - PI / 3.0).abs() < 1e-14);

        let l2 = spec.level(2).unwrap();
        let arcs = l2.arcs().unwrap();
        assert_eq!(arcs.len(), 4);
        let gaps = l2.gap_intervals().unwrap();
        assert!((gaps[0].1 - PI / 9.0).abs() < 1e-14);
        assert!((gaps[2].1 - PI / 9.0).abs() < 1e-14);
        assert!((gaps[1].1 - PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn nesting_at_endpoints() {
        let spec = thirds(8);
        for n in 0..6 {
            let outer = spec.level(n).unwrap().arc_offsets().unwrap();
            let inner = spec.level(n + 1).unwrap().arc_offsets().unwrap();
            let (an, an1) = (spec.length(n), spec.length(n + 1));
            for (i, &o) in outer.iter().enumerate() {
                assert!((inner[2 * i] - o).abs() < 1e-14);
                assert!((inner[2 * i + 1] + an1 - (o + an)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn distance_examples() {
        let l = thirds(12).level(1).unwrap();
        assert_eq!(l.distance(0.0 - PI / 2.0 + 0.1), 0.0);
        // The first-level gap is centred at angle 0.
        assert!((l.distance(0.0) - PI / 6.0).abs() < 1e-14);
        assert!((l.distance(PI) - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn neighborhood_examples() {
        let spec = thirds(12);
        let l1 = spec.level(1).unwrap();
        assert!((l1.neighborhood_measure(0.0) - 2.0 * PI / 3.0).abs() < 1e-14);
        assert!((l1.neighborhood_measure(PI / 12.0) - PI).abs() < 1e-14);
        assert!((l1.neighborhood_measure(PI) - 2.0 * PI).abs() < 1e-14);
        let l5 = spec.level(5).unwrap();
        let expect = 32.0 * PI / 243.0;
        assert!((l5.neighborhood_measure(0.0) - expect).abs() < 1e-13);
    }

    #[test]
    fn counting_examples() {
        let spec = thirds(12);
        let l = spec.level(12).unwrap();
        assert_eq!(l.counting_function(PI / 7.0), 4);
        assert_eq!(l.counting_function(PI), 0);
        // Below every gap half-length all 2^12 components count.
        let tiny = spec.gap(12) / 2.0 * 0.99;
        assert_eq!(l.counting_function(tiny), 2 * (1u128 << 12));
    }

    #[test]
    fn lambda_mu_examples() {
        let (l, m) = lambda_and_mu(&thirds(10)).unwrap();
        assert!((l - 1.0 / 3.0).abs() < 1e-15);
        assert!((m - (1.0 - 2f64.ln() / 3f64.ln())).abs() < 1e-15);
        assert!((m - 0.36907).abs() < 1e-5);
        let s = CantorSpec::<f64>::geometric(PI, 0.25, 10).unwrap();
        let (l, m) = lambda_and_mu(&s).unwrap();
        assert!((l - 0.25).abs() < 1e-15 && (m - 0.5).abs() < 1e-14);
        assert!(CantorSpec::<f64>::geometric(PI, 0.5, 10).is_err());
        assert!(CantorSpec::<f64>::explicit(PI, vec![0.3, 0.5]).is_err());
    }

    #[test]
    fn spec_validation_and_json() {
        assert!(CantorSpec::<f64>::geometric(7.0, 0.3, 4).is_err());
        assert!(CantorSpec::<f64>::geometric(0.0, 0.3, 4).is_err());
        assert!(thirds(3).level(4).is_err());
        let s: CantorSpec<f64> = serde_json::from_str(r#"{"a0": 3.0, "ratio": 0.25, "depth": 5}"#).unwrap();
        assert_eq!(s.depth(), 5);
        let e: CantorSpec<f64> = serde_json::from_str(r#"{"a0": 3.0, "ratios": [0.3, 0.2]}"#).unwrap();
        assert!((e.length(2) - 3.0 * 0.3 * 0.2).abs() < 1e-15);
        assert!(serde_json::from_str::<CantorSpec<f64>>(r#"{"a0": 3.0, "ratio": 0.6, "depth": 5}"#).is_err());
        let round: CantorSpec<f64> = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(round, e);
    }

    #[test]
    fn merged_measure_matches_gap_formula() {
        let spec = CantorSpec::<f64>::explicit(2.5, vec![0.3, 0.45, 0.2, 0.4, 0.33, 0.1, 0.25]).unwrap();
        for n in 0..=7 {
            let l = spec.level(n).unwrap();
            for i in 0..200 {
                let t = 4.0 * (i as f64 / 200.0).powi(3);
                let a = l.neighborhood_measure(t);
                let b = neighborhood_measure_by_merging(&l, t).unwrap();
                assert!((a - b).abs() < 1e-12, "n={n} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact_measure() {
        let l = thirds(10).level(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = 200_000;
        for &t in &[0.0, 0.003, 0.02, 0.1] {
            let hits = (0..samples)
                .filter(|_| l.distance(rng.random_range(0.0..2.0 * PI)) <= t)
                .count() as f64;
            let p = l.neighborhood_measure(t) / (2.0 * PI);
            let sigma = (p * (1.0 - p) / samples as f64).sqrt();
            assert!((hits / samples as f64 - p).abs() <= 3.0 * sigma + 1e-12, "t={t}");
        }
    }

    #[test]
    fn distance_matches_brute_force_over_arcs() {
        let l = thirds(10).level(5).unwrap();
        let arcs = l.arcs().unwrap();
        for i in 0..2000 {
            let th = 2.0 * PI * i as f64 / 2000.0 + 1e-4;
            let brute = arcs.iter().map(|a| a.distance(th)).fold(f64::INFINITY, f64::min);
            assert!((l.distance(th) - brute).abs() < 1e-13);
        }
    }

    #[test]
    fn mean_distance_power_matches_riemann_sum() {
        let l = thirds(10).level(5).unwrap();
        for &(start, len, alpha) in &[(0.3, 1.1, 0.5), (5.9, 1.5, 0.2), (0.0, 2.0 * PI, 0.7), (2.0, 0.05, 0.0)] {
            let arc = Arc::new(start, len).unwrap();
            let exact = l.mean_distance_power(&arc, alpha);
            let m = 400_000;
            let riemann: f64 = (0..m)
                .map(|i| {
                    let d = l.distance(start + len * (i as f64 + 0.5) / m as f64);
                    if d > 0.0 { d.powf(alpha) } else { 0.0 }
                })
                .sum::<f64>()
                / m as f64;
            assert!((exact - riemann).abs() < 1e-5, "{exact} vs {riemann}");
        }
    }

    #[test]
    fn carleson_integral_stabilizes_with_depth() {
        let spec = thirds(20);
        let vals: Vec<f64> = (8..=14).map(|n| carleson_integral(&spec.level(n).unwrap())).collect();
        let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        // Cauchy differences contract by 2λ = 2/3 per level.
        for d in diffs.windows(2) {
            assert!((d[1] / d[0] - 2.0 / 3.0).abs() < 0.02, "{diffs:?}");
        }
    }

    #[test]
    fn carleson_integral_single_arc_closed_form() {
        // Depth 0: |E_t| = a0 + min(2π − a0, 2t).
        let a0 = 1.0;
        let l = CantorSpec::<f64>::geometric(a0, 0.3, 0).unwrap().level(0).unwrap();
        let g = 2.0 * PI - a0;
        let lo = a0 / 2.0;
        let hi = PI.min(g / 2.0);
        let mut exact = a0 * (hi / lo).ln() + 2.0 * (hi - lo);
        if g / 2.0 < PI {
            exact += 2.0 * PI * (PI / (g / 2.0)).ln();
        }
        assert!((carleson_integral(&l) - exact).abs() < 1e-12);
    }

    #[test]
    fn growth_exponent_close_to_mu() {
        let l = thirds(14).level(14).unwrap();
        let s = growth_exponent_fit(&l, 200).unwrap();
        assert!((s - 0.36907).abs() < 0.05, "{s}");
    }

    #[test]
    fn kset_audit_passes_for_middle_thirds() {
        let l = thirds(12).level(12).unwrap();
        for alpha in [0.0, 0.3, 0.7] {
            let audit = kset_lower_bound_audit(&l, alpha, 500, 11).unwrap();
            assert!(audit.pass, "{audit:?}");
        }
        let full = l.mean_distance_power(&Arc::full(), 0.0);
        assert!(full >= 1.0 / 6.0);
    }

    #[test]
    fn f32_construction_works() {
        let spec = CantorSpec::<f32>::middle_thirds(10).unwrap();
        let l = spec.level(10).unwrap();
        assert!((l.distance(0.0) - std::f32::consts::PI / 6.0).abs() < 1e-6);
        assert_eq!(l.counting_function(std::f32::consts::PI / 7.0), 4);
    }

    proptest! {
        #[test]
        fn measure_monotone_and_counting_antitone(t1 in 0.0f64..4.0, t2 in 0.0f64..4.0) {
            let l = thirds(30).level(30).unwrap();
            let (a, b) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(l.neighborhood_measure(a) <= l.neighborhood_measure(b));
            prop_assert!(l.neighborhood_measure(b) <= 2.0 * PI);
            if a > 0.0 {
                prop_assert!(l.counting_function(a) >= l.counting_function(b));
            }
        }

        #[test]
        fn coarse_distance_bounds_fine_distance(theta in 0.0f64..6.3, n in 1usize..10) {
            let spec = thirds(12);
            let coarse = spec.level(n).unwrap();
            let fine = spec.level(12).unwrap();
            let (dc, df) = (coarse.distance(theta), fine.distance(theta));
            prop_assert!(dc <= df + 1e-14);
            prop_assert!(df - dc <= spec.length(n) + 1e-14);
        }
    }
}
