use std::f64::consts::PI;

use dirlab::cantor::CantorSpec;
use dirlab::capacity::{
    classify_ladder, energy_fourier, energy_kernel, equilibrium_measure, DiscreteMeasure, LadderParams, Verdict,
};
use dirlab::circle::CircleGrid;
use dirlab::cyclicity::{build_wdelta, regularized_for_set};
use dirlab::dirichlet::{dirichlet_area, dirichlet_coeff_exact};
use dirlab::disk::{DiskGrid, DiskGridParams};
use dirlab::frank_wolfe::SolverParams;
use dirlab::outer::{BoundaryModulus, OuterFunction};
use dirlab::poly::TaylorPoly;
use dirlab::weight::WeightProfile;
use num_complex::Complex;
use proptest::prelude::*;

fn poly(coeffs: &[(f64, f64)]) -> TaylorPoly<f64> {
    TaylorPoly::new(coeffs.iter().map(|&(re, im)| Complex::new(re, im)).collect()).unwrap()
}

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dirichlet_integral_decreases_with_alpha(c in coeffs(12), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let p = poly(&c);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let dl = dirichlet_coeff_exact(&p, lo).unwrap();
        let dh = dirichlet_coeff_exact(&p, hi).unwrap();
        prop_assert!(dh <= dl * (1.0 + 1e-12), "D_{hi} = {dh} > D_{lo} = {dl}");
    }

    #[test]
    fn dirichlet_integral_is_quadratic(c in coeffs(8), s in -3.0f64..3.0, alpha in 0.0f64..=1.0) {
        let p = poly(&c);
        let scaled: Vec<(f64, f64)> = c.iter().map(|&(re, im)| (s * re, s * im)).collect();
        let d = dirichlet_coeff_exact(&p, alpha).unwrap();
        let ds = dirichlet_coeff_exact(&poly(&scaled), alpha).unwrap();
        prop_assert!((ds - s * s * d).abs() <= 1e-12 * (1.0 + ds.abs()));
    }

    #[test]
    fn single_precision_tracks_double(c in coeffs(6), alpha in 0.0f64..=1.0) {
        let p64 = poly(&c);
        let p32 = TaylorPoly::<f32>::new(
            c.iter().map(|&(re, im)| Complex::new(re as f32, im as f32)).collect(),
        ).unwrap();
        let d64 = dirichlet_coeff_exact(&p64, alpha).unwrap();
        let d32 = dirichlet_coeff_exact(&p32, alpha as f32).unwrap() as f64;
        prop_assert!((d64 - d32).abs() <= 1e-5 * (1.0 + d64));
    }

    #[test]
    fn ladder_separates_log_growth_from_convergence(c in 0.2f64..5.0, s in 0.2f64..2.0) {
        let eps: Vec<f64> = (1..=12).map(|k| 3f64.powi(-k)).collect();
        let log_growth: Vec<f64> = eps.iter().map(|e| c * (1.0 / e).ln()).collect();
        let cauchy: Vec<f64> = eps.iter().map(|e| c * (1.0 - e.powf(s))).collect();
        let p = LadderParams::default();
        prop_assert_eq!(classify_ladder(&eps, &log_growth, &p).unwrap().verdict, Verdict::Zero);
        prop_assert_eq!(classify_ladder(&eps, &cauchy, &p).unwrap().verdict, Verdict::Positive);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn area_quadrature_matches_coefficients(c in coeffs(10), alpha in 0.0f64..=1.0) {
        let grid = DiskGrid::<f64>::new(DiskGridParams::default()).unwrap();
        let p = poly(&c);
        let q = dirichlet_area(&p, alpha, &grid).unwrap();
        let exact = dirichlet_coeff_exact(&p, alpha).unwrap();
        prop_assert!((q - exact).abs() <= 1e-8 * exact.max(1e-300));
    }

    #[test]
    fn outer_functions_multiply(
        a in prop::collection::vec(-0.5f64..0.5, 4),
        b in prop::collection::vec(-0.5f64..0.5, 4),
        r in 0.0f64..0.8,
        theta in 0.0f64..(2.0 * PI),
    ) {
        let grid = CircleGrid::new(256).unwrap();
        let trig = |c: Vec<f64>| move |t: f64| c[0] * t.cos() + c[1] * t.sin() + c[2] * (2.0 * t).cos() + c[3] * (3.0 * t).sin();
        let (fa, fb) = (trig(a.clone()), trig(b.clone()));
        let ma = BoundaryModulus::from_fn(grid, &fa, None).unwrap();
        let mb = BoundaryModulus::from_fn(grid, &fb, None).unwrap();
        let mab = BoundaryModulus::from_fn(grid, |t| fa(t) + fb(t), None).unwrap();
        let z = Complex::from_polar(r, theta);
        let prod = OuterFunction::new(&ma).eval(z).unwrap() * OuterFunction::new(&mb).eval(z).unwrap();
        let joint = OuterFunction::new(&mab).eval(z).unwrap();
        prop_assert!((prod - joint).norm() <= 1e-12 * joint.norm());
    }

    #[test]
    fn energies_are_positive_and_equilibrium_is_minimal(
        atoms in prop::collection::vec(0.0f64..(2.0 * PI), 6..24),
        alpha in 0.05f64..0.95,
    ) {
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        atoms.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        prop_assume!(atoms.len() >= 3 && atoms[atoms.len() - 1] - atoms[0] < 2.0 * PI - 1e-3);
        let uniform = DiscreteMeasure::equal_weights(atoms.clone()).unwrap();
        let ek = energy_kernel(&uniform, alpha).unwrap().finite().unwrap();
        prop_assert!(ek > 0.0);
        prop_assert!(energy_fourier(&uniform, alpha, 2048).unwrap() > 0.0);
        let eq = equilibrium_measure(&atoms, alpha, &SolverParams::default()).unwrap();
        prop_assert!(eq.energy <= ek * (1.0 + 1e-12));
        prop_assert!(eq.trace_nonincreasing());
    }

    #[test]
    fn envelope_conclusions_hold(ratio in 0.1f64..0.45, excess in 0.02f64..0.3) {
        let spec = CantorSpec::<f64>::geometric(PI, ratio, 40).unwrap();
        let mu = 1.0 - 2f64.ln() / (1.0 / ratio).ln();
        let alpha = (1.0 - mu + excess).min(0.97);
        let psi = regularized_for_set(&spec, alpha, 40, 16).unwrap();
        let c = psi.check();
        prop_assert!(c.ratio_nondecreasing && c.sandwich, "{c:?}");
    }

    #[test]
    fn wdelta_is_continuous_and_nondecreasing(k in 3i32..12, alpha in 0.66f64..0.95) {
        let spec = CantorSpec::<f64>::middle_thirds(40).unwrap();
        let psi = regularized_for_set(&spec, alpha, 40, 16).unwrap();
        let w = build_wdelta(&psi, PI * 0.5f64.powi(k), alpha).unwrap();
        prop_assert!(w.continuity_error() < 1e-9);
        let mut prev = 0.0;
        for i in 1..=400 {
            let t = PI * (i as f64 / 400.0).powi(3);
            let v = w.value(t);
            prop_assert!(v >= prev * (1.0 - 1e-12), "w_δ({t}) = {v} < {prev}");
            prev = v;
        }
        prop_assert!((w.value(PI) - 1.0).abs() < 1e-9);
    }
}
