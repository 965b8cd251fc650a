//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use dirlab::cantor::{lambda_and_mu, CantorLevel, CantorSpec};
use dirlab::capacity::{
    arc_support, cantor_capacity_zero_test, energy_fourier, energy_kernel, equilibrium_measure, DiscreteMeasure,
    LadderParams, Verdict,
};
use dirlab::circle::{Arc, CircleGrid};
use dirlab::cyclicity::{cyclicity_run, regularized_for_set, CampaignParams};
use dirlab::dirichlet::{
    carleson_substitute_audit, dirichlet_area, dirichlet_coeff_exact, kset_constant, local_dirichlet_area,
    local_dirichlet_boundary, DistancePowerWeight,
};
use dirlab::disk::{DiskGrid, DiskGridParams};
use dirlab::frank_wolfe::SolverParams;
use dirlab::outer::{korenblum_audit, modulus_from_weight, BoundaryModulus, OuterFunction, SpectralOuter};
use dirlab::poly::TaylorPoly;
use dirlab::weight::PowerWeight;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            out.pass = false;
            out.detail.push_str(&format!("; runtime {elapsed:.1?} exceeds {limit:?}"));
        }
    }
    (out, elapsed)
}

/// Outer functions shared by the local-integral and boundary-weight audits.
fn boundary_corpus(n: usize, level: &CantorLevel<f64>) -> Vec<(String, SpectralOuter<f64>)> {
    let grid = CircleGrid::new(n).unwrap();
    let floor = (2.0 * (PI / (2.0 * n as f64)).sin()).ln();
    let m = BoundaryModulus::from_fn(grid, |t: f64| (2.0 * (t / 2.0).sin().abs()).ln(), Some(floor)).unwrap();
    let mut out = vec![("1-z".to_string(), SpectralOuter::new(&OuterFunction::new(&m), 4).unwrap())];
    for beta in [1.0, 2.0, 4.0] {
        let m = modulus_from_weight(&PowerWeight::new(beta), level, grid).unwrap();
        out.push((format!("f_w[t^{beta}]"), SpectralOuter::new(&OuterFunction::new(&m), 4).unwrap()));
    }
    out
}

fn quadrature_vs_coefficients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = DiskGrid::<f64>::new(DiskGridParams::default()).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let degree = rng.random_range(1..=32usize);
        let coeffs: Vec<Complex<f64>> = (0..=degree)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let p = TaylorPoly::new(coeffs).unwrap();
        for alpha in [0.0, 0.3, 0.5, 0.7, 1.0] {
            let q = dirichlet_area(&p, alpha, &grid).unwrap();
            let exact = dirichlet_coeff_exact(&p, alpha).unwrap();
            worst = worst.max((q - exact).abs() / exact);
        }
    }
    Outcome::new(worst <= 1e-6, format!("worst relative error {worst:.2e} over 20 polynomials × 5 α"))
}

fn local_forms_agree(corpus: &[(String, SpectralOuter<f64>)]) -> Outcome {
    let disk = DiskGrid::<f64>::new(DiskGridParams::default()).unwrap();
    let zetas: Vec<f64> = (0..8).map(|k| 0.1 + 2.0 * PI * k as f64 / 8.0).collect();
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    for (_, f) in corpus {
        let area = local_dirichlet_area(f, &zetas, &disk).unwrap();
        for (&z, &a) in zetas.iter().zip(&area) {
            let b = local_dirichlet_boundary(f, z, 16).unwrap();
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            evaluated += 1;
        }
    }
    let pass = evaluated == 8 * corpus.len() && worst <= 1e-3;
    Outcome::new(pass, format!("{evaluated} points, worst relative gap {worst:.2e}"))
}

fn carleson_audit(corpus: &[(String, SpectralOuter<f64>)]) -> Outcome {
    let disk = DiskGrid::<f64>::new(DiskGridParams::default()).unwrap();
    let spec = CantorSpec::<f64>::middle_thirds(40).unwrap();
    let (lambda, _) = lambda_and_mu(&spec).unwrap();
    let deep = spec.level(40).unwrap();
    let mut violations = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_gate = f64::INFINITY;
    for (name, f) in corpus {
        for alpha in [0.3, 0.5, 0.7] {
            let h = DistancePowerWeight { level: &deep, alpha, scale: 1.0 / kset_constant(lambda, alpha) };
            match carleson_substitute_audit(f, &h, alpha, &disk, 12, 1e-3) {
                Ok(a) => {
                    worst_ratio = worst_ratio.max(a.ratio);
                    worst_gate = worst_gate.min(a.gate.worst_ratio);
                    if !a.pass {
                        violations.push(format!("{name} α={alpha} ratio {:.4}", a.ratio));
                    }
                }
                Err(e) => violations.push(format!("{name} α={alpha}: {e}")),
            }
        }
    }
    Outcome::new(
        violations.is_empty(),
        format!(
            "{} violations, max lhs/rhs {worst_ratio:.2e}, smallest dyadic arc-mean ratio {worst_gate:.3} {:?}",
            violations.len(),
            violations
        ),
    )
}

fn gamma_localization() -> Outcome {
    let n = 1024;
    let grid = CircleGrid::new(n).unwrap();
    let disk = DiskGrid::<f64>::new(DiskGridParams { boundary_layers: 12, ..DiskGridParams::default() }).unwrap();
    let level = CantorSpec::<f64>::middle_thirds(6).unwrap().level(6).unwrap();
    let floor = (2.0 * (PI / (2.0 * n as f64)).sin()).ln();
    let mut moduli = vec![
        ("1-z", BoundaryModulus::from_fn(grid, |t: f64| (2.0 * (t / 2.0).sin().abs()).ln(), Some(floor)).unwrap()),
        ("d^4", modulus_from_weight(&PowerWeight::new(4.0), &level, grid).unwrap()),
        ("smooth", BoundaryModulus::from_fn(grid, |t: f64| 0.6 * t.cos() - 0.3 * (2.0 * t).sin(), None).unwrap()),
    ];
    let gammas = [("circle", vec![Arc::full()]), ("half", vec![Arc::new(0.0, PI).unwrap()]), ("empty", vec![])];
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (_, m) in moduli.iter_mut() {
        m.normalize();
        for (_, g) in &gammas {
            let a = korenblum_audit(m, g, &disk, 1e-2).unwrap();
            worst = worst.max(a.max_gamma_ratio);
            checked += a.points_checked;
        }
    }
    Outcome::new(worst <= 1.01, format!("max ratio {worst:.4} over {checked} point evaluations"))
}

fn capacity_threshold() -> Outcome {
    let spec = CantorSpec::<f64>::middle_thirds(16).unwrap();
    let params = LadderParams::default();
    let mut wrong = Vec::new();
    let positive = (0..=29).map(|k| 0.02 * k as f64);
    let zero = (0..=15).map(|k| 0.68 + 0.02 * k as f64);
    for (alphas, expected) in [(positive.collect::<Vec<_>>(), Verdict::Positive), (zero.collect(), Verdict::Zero)] {
        for a in alphas {
            let v = cantor_capacity_zero_test(&spec, a, &params).unwrap().verdict();
            if v != expected {
                wrong.push(format!("α={a:.2}: {v:?}"));
            }
        }
    }
    Outcome::new(wrong.is_empty(), format!("α ∈ [0, 0.58] positive, α ∈ [0.68, 0.98] zero; mismatches {wrong:?}"))
}

fn equilibrium_solver() -> Outcome {
    let arc = Arc::new(0.4, 1.3).unwrap();
    let support = arc_support(&arc, 256);
    let mut details = Vec::new();
    let mut pass = true;
    for alpha in [0.3, 0.5, 0.7] {
        let eq = equilibrium_measure(&support, alpha, &SolverParams::default()).unwrap();
        let w = eq.measure.weights();
        let wmax = w.iter().cloned().fold(0.0, f64::max);
        let asym = (0..128).map(|i| (w[i] - w[255 - i]).abs()).fold(0.0, f64::max) / wmax;
        let ok = eq.converged && eq.fw_gap <= 1e-4 && asym <= 1e-6 && eq.trace_nonincreasing();
        pass &= ok;
        details.push(format!(
            "α={alpha}: gap {:.1e} in {} it, asymmetry {asym:.1e}, monotone {}",
            eq.fw_gap,
            eq.iterations,
            eq.trace_nonincreasing()
        ));
    }
    Outcome::new(pass, details.join("; "))
}

/// Random probability measure with `atoms` atoms: one, two or four arcs with
/// random masses, each cut into equal smeared cells.
fn random_measure(rng: &mut ChaCha8Rng, atoms: usize) -> DiscreteMeasure<f64> {
    let arcs = [1usize, 2, 4][rng.random_range(0..3)];
    let cells = atoms / arcs;
    let mut start = rng.random_range(0.0..2.0 * PI);
    let mut pieces = Vec::new();
    for _ in 0..arcs {
        let len = rng.random_range(0.05..1.2);
        let mass: f64 = rng.random_range(0.1..1.0);
        pieces.push((start, len, mass));
        start += len + rng.random_range(0.05..0.4);
    }
    let total: f64 = pieces.iter().map(|p| p.2).sum();
    let (mut theta, mut weights, mut smear) = (Vec::new(), Vec::new(), Vec::new());
    for (s, len, mass) in pieces {
        let cell = len / cells as f64;
        for c in 0..cells {
            theta.push(s + cell * (c as f64 + 0.5));
            weights.push(mass / total / cells as f64);
            smear.push(cell / 2.0);
        }
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    DiscreteMeasure::new(theta, weights, smear).unwrap()
}

fn ratio_interval(alpha: f64, atoms: usize, modes: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for _ in 0..50 {
        let mu = random_measure(&mut rng, atoms);
        let k = energy_kernel(&mu, alpha).unwrap().finite().unwrap();
        let f = energy_fourier(&mu, alpha, modes).unwrap();
        lo = lo.min(k / f);
        hi = hi.max(k / f);
    }
    (lo, hi)
}

fn energy_equivalence() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for alpha in [0.3, 0.5, 0.7] {
        let (lo1, hi1) = ratio_interval(alpha, 64, 2048);
        let (lo2, hi2) = ratio_interval(alpha, 128, 4096);
        let shift = ((lo2 - lo1) / lo1).abs().max(((hi2 - hi1) / hi1).abs());
        pass &= lo1 > 0.0 && hi1.is_finite() && shift < 0.1;
        details.push(format!("α={alpha}: [{lo1:.4}, {hi1:.4}] → [{lo2:.4}, {hi2:.4}] (shift {:.2}%)", 100.0 * shift));
    }
    Outcome::new(pass, details.join("; "))
}

fn cyclicity_campaign() -> Outcome {
    let spec = CantorSpec::<f64>::middle_thirds(64).unwrap();
    let report = cyclicity_run(&spec, 0.7, &CampaignParams::default()).unwrap();
    let v = &report.verdicts;
    let norms: Vec<f64> = report.records.iter().map(|r| r.norm_alpha).collect();
    let nmax = norms.iter().cloned().fold(0.0, f64::max);
    let nmin = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = v.f0_nondecreasing
        && v.f0_final >= 0.9
        && nmax / nmin <= 10.0
        && v.offset_shrink >= 2.0
        && v.fw_ratio_bounded
        && report.records.len() == 8;
    Outcome::new(
        pass,
        format!(
            "|f(0)| {:.4} → {:.4}, norm spread {:.3}, off-1 shrink {:.2}×, f_w ratio spread {:.3} \
             (concavity gate passed on all rungs: {})",
            report.records[0].f0,
            v.f0_final,
            nmax / nmin,
            v.offset_shrink,
            v.fw_ratio_spread,
            v.fw_gate_passed
        ),
    )
}

fn regularization() -> Outcome {
    let cases = [(1.0 / 3.0, 0.64), (1.0 / 3.0, 0.65), (1.0 / 3.0, 0.7), (1.0 / 3.0, 0.8), (1.0 / 3.0, 0.95), (0.25, 0.6), (0.25, 0.8), (0.4, 0.9)];
    let mut pass = true;
    let mut details = Vec::new();
    for (ratio, alpha) in cases {
        let spec = CantorSpec::<f64>::geometric(PI, ratio, 64).unwrap();
        let cap_spec = spec.with_depth(16).unwrap();
        let cap = cantor_capacity_zero_test(&cap_spec, alpha, &LadderParams::default()).unwrap();
        let psi = regularized_for_set(&spec, alpha, 64, 64).unwrap();
        let check = psi.check();
        let eps: Vec<f64> = spec.lengths()[1..].iter().cloned().filter(|&e| e >= psi.t_min()).collect();
        let ladder = psi.divergence_ladder(&eps, &LadderParams::default()).unwrap();
        let ok = cap.verdict() == Verdict::Zero
            && check.ratio_nondecreasing
            && check.sandwich
            && ladder.verdict == Verdict::Zero;
        pass &= ok;
        details.push(format!(
            "λ={ratio:.3} α={alpha}: criterion {:?}, monotone {}, sandwich {}, ladder {:?}",
            cap.verdict(),
            check.ratio_nondecreasing,
            check.sandwich,
            ladder.verdict
        ));
    }
    Outcome::new(pass, details.join("; "))
}

#[test]
fn acceptance_criteria() {
    let level = CantorSpec::<f64>::middle_thirds(6).unwrap().level(6).unwrap();
    let corpus = boundary_corpus(2048, &level);
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let results = [
        ("exact-oracle quadrature", timed(Some(Duration::from_secs(60)), quadrature_vs_coefficients)),
        ("local Dirichlet integral identity", timed(minutes(5), || local_forms_agree(&corpus))),
        ("boundary-weight Dirichlet bound", timed(None, || carleson_audit(&corpus))),
        ("Γ-localized derivative bound", timed(None, gamma_localization)),
        ("capacity threshold", timed(minutes(2), capacity_threshold)),
        ("equilibrium solver", timed(None, equilibrium_solver)),
        ("energy-form equivalence", timed(None, energy_equivalence)),
        ("cyclicity campaign", timed(minutes(15), cyclicity_campaign)),
        ("regularized envelope", timed(None, regularization)),
    ];
    let mut failed = Vec::new();
    for (i, (name, (out, elapsed))) in results.iter().enumerate() {
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}]: {tag} ({:.1}s) {}", i + 1, elapsed.as_secs_f64(), out.detail);
        if !out.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
