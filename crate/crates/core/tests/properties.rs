use std::f64::consts::FRAC_PI_2;

use lportho_core::geometry::{angle, dualize, is_orthogonal, pythagorean_defect, weak_inner_product};
use lportho_core::signal::{check_energy_conservation, fif_decompose, FifOptions};
use lportho_core::toeplitz::{
    build_toeplitz, lp_circulant_minimizer, lp_matrix_norm, CirculantMatrix, ModelSymbol, ToeplitzOperator,
};
use lportho_core::{DiscreteFunction, PExponent, Signal};
use proptest::prelude::*;

fn vec_pair(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_len).prop_flat_map(|n| {
        (
            prop::collection::vec(-100.0..100.0f64, n),
            prop::collection::vec(-100.0..100.0f64, n),
        )
    })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), 1.0..6.0f64]
}

fn funcs(f: Vec<f64>, g: Vec<f64>) -> (DiscreteFunction, DiscreteFunction) {
    (DiscreteFunction::new(f).unwrap(), DiscreteFunction::new(g).unwrap())
}

fn scale(f: &DiscreteFunction, g: &DiscreteFunction, p: PExponent) -> f64 {
    (f.norm_pow(p) + g.norm_pow(p)).max(1.0)
}

proptest! {
    #[test]
    fn defect_is_twice_the_weak_product((f, g) in vec_pair(64), p in exponent()) {
        let (f, g) = funcs(f, g);
        let p = PExponent::new(p).unwrap();
        let w = weak_inner_product(&f, &g, p).unwrap();
        let d = pythagorean_defect(&f, &g, p).unwrap();
        prop_assert!((d - 2.0 * w).abs() <= 1e-11 * scale(&f, &g, p));
    }

    #[test]
    fn l2_product_is_the_dot_product((f, g) in vec_pair(64)) {
        let (f, g) = funcs(f, g);
        let p = PExponent::new(2.0).unwrap();
        let dot: f64 = f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum();
        prop_assert!((weak_inner_product(&f, &g, p).unwrap() - dot).abs() <= 1e-11 * scale(&f, &g, p));
    }

    #[test]
    fn l1_product_closed_form_and_sign((f, g) in vec_pair(64)) {
        let (f, g) = funcs(f, g);
        let p = PExponent::new(1.0).unwrap();
        let n1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let sum: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect();
        let expect = 0.5 * (n1(&sum) - n1(f.values()) - n1(g.values()));
        let w = weak_inner_product(&f, &g, p).unwrap();
        prop_assert!((w - expect).abs() <= 1e-12 * scale(&f, &g, p));
        prop_assert!(w <= 1e-12 * scale(&f, &g, p));
    }

    #[test]
    fn duality_pairing_gives_the_norm(f in prop::collection::vec(-50.0..50.0f64, 1..64), p in exponent()) {
        let f = DiscreteFunction::new(f).unwrap();
        let p = PExponent::new(p).unwrap();
        let fs = dualize(&f, p);
        let pair: f64 = f.values().iter().zip(fs.values()).map(|(a, b)| a * b).sum();
        prop_assert!((pair - f.norm_pow(p)).abs() <= 1e-12 * f.norm_pow(p).max(1.0));
    }

    #[test]
    fn joint_sign_flip_is_invisible((f, g) in vec_pair(64), p in exponent()) {
        let (f, g) = funcs(f, g);
        let p = PExponent::new(p).unwrap();
        let a = weak_inner_product(&f, &g, p).unwrap();
        let b = weak_inner_product(&f.negated(), &g.negated(), p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * scale(&f, &g, p));
    }

    #[test]
    fn disjoint_supports_are_orthogonal((f, g) in vec_pair(64), p in exponent()) {
        let n = f.len();
        let f: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { f[i] } else { 0.0 }).collect();
        let g: Vec<f64> = (0..n).map(|i| if i % 2 == 1 { g[i] } else { 0.0 }).collect();
        let (f, g) = funcs(f, g);
        let p = PExponent::new(p).unwrap();
        prop_assert!(is_orthogonal(&f, &g, p, 1e-10).unwrap());
        prop_assert!((angle(&f, &g, p).unwrap() - FRAC_PI_2).abs() <= 1e-9);
    }

    #[test]
    fn angle_side_follows_defect_sign((f, g) in vec_pair(16), p in exponent()) {
        let (f, g) = funcs(f, g);
        let p = PExponent::new(p).unwrap();
        let d = pythagorean_defect(&f, &g, p).unwrap();
        let a = angle(&f, &g, p).unwrap();
        prop_assert!(a > 0.0 && a < std::f64::consts::PI);
        // arccot is decreasing and equals pi/2 only at 0
        if d == 0.0 {
            prop_assert_eq!(a, FRAC_PI_2);
        } else if d < 0.0 {
            prop_assert!(a >= FRAC_PI_2);
        } else {
            prop_assert!(a <= FRAC_PI_2);
        }
    }
}

fn signal(max_half: usize) -> impl Strategy<Value = Vec<f64>> {
    (16..=max_half).prop_flat_map(|m| prop::collection::vec(-5.0..5.0f64, 2 * m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_reconstructs_and_conserves(s in signal(128), h1 in 1usize..4, extra in 1usize..6) {
        let s = Signal::new(s).unwrap();
        let d = fif_decompose(&s, &FifOptions::new(vec![h1, h1 + extra])).unwrap();
        prop_assert!(d.reconstruction_error() <= 1e-10 * s.l2_norm().max(1.0));
        let r = check_energy_conservation(&d, 1e-10).unwrap();
        prop_assert!(r.conserved, "gap {}", r.conservation_gap);
        prop_assert!(r.unwanted_frequencies.is_empty());
    }

    #[test]
    fn different_schedules_both_conserve(s in signal(64)) {
        let s = Signal::new(s).unwrap();
        for hw in [vec![1], vec![2, 5], vec![1, 3, 8]] {
            let d = fif_decompose(&s, &FifOptions::new(hw)).unwrap();
            prop_assert!(check_energy_conservation(&d, 1e-10).unwrap().conserved);
        }
    }
}

fn toeplitz(max_n: usize) -> impl Strategy<Value = ToeplitzOperator> {
    (1..=max_n)
        .prop_flat_map(|n| prop::collection::vec(-10.0..10.0f64, 2 * n - 1))
        .prop_map(|d| ToeplitzOperator::from_diagonals(d).unwrap())
}

fn distance(t: &ToeplitzOperator, c: &[f64], p: f64) -> f64 {
    let cm = CirculantMatrix::new(c.to_vec()).unwrap();
    lp_matrix_norm(&(t.to_dense() - cm.to_dense()), p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn minimizer_beats_perturbations(
        t in toeplitz(12),
        p in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0)],
        seed in prop::collection::vec(-1.0..1.0f64, 12),
        size in prop_oneof![Just(1e-6), Just(1e-3), Just(1.0)],
    ) {
        let c = lp_circulant_minimizer(&t, p).unwrap();
        let best = distance(&t, c.first_column(), p);
        let moved: Vec<f64> = c.first_column().iter().zip(&seed).map(|(v, e)| v + size * e).collect();
        prop_assert!(best <= distance(&t, &moved, p) * (1.0 + 1e-12));
    }

    #[test]
    fn first_offdiagonal_approaches_the_band(
        a in 0.0..10.0f64, b in 0.1..10.0f64, g in 0.0..10.0f64, p in 1.05..10.0f64,
    ) {
        let sym = ModelSymbol::new(a, b, g).unwrap();
        let gaps: Vec<f64> = [10usize, 100, 1000]
            .iter()
            .map(|&n| {
                let t = build_toeplitz(&sym.into(), n).unwrap();
                (lp_circulant_minimizer(&t, p).unwrap().first_column()[1] - sym.psi()).abs()
            })
            .collect();
        prop_assert!(gaps[0] >= gaps[1] && gaps[1] >= gaps[2], "{gaps:?}");
    }
}
