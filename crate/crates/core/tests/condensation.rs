use gp_power::posy::{one_plus, PosyError, Posynomial, VarId, DEFAULT_TERM_CAP};
use gp_power::power::condense::{aux_objective, condense_agm, condense_proposed};
use proptest::prelude::*;

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n).prop_map(|v| v.into_iter().map(|e| 10f64.powf(e)).collect())
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n)
}

fn draw() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    prop::sample::select(vec![1usize, 2, 4, 8]).prop_flat_map(|n| (point(n), point(n), weights(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn condensation_never_exceeds_g((s0, s, w) in draw()) {
        let c = condense_proposed(&s0, &w).unwrap();
        let g = aux_objective(&s, &w);
        prop_assert!(c.eval(&s) <= g * (1.0 + 1e-12), "{} > {}", c.eval(&s), g);
    }

    #[test]
    fn condensation_is_exact_at_expansion_point((s0, _s, w) in draw()) {
        let c = condense_proposed(&s0, &w).unwrap();
        let g = aux_objective(&s0, &w);
        prop_assert!((c.eval(&s0) - g).abs() <= 1e-12 * g);
    }

    #[test]
    fn condensation_gradient_matches_g((s0, _s, w) in draw()) {
        let c = condense_proposed(&s0, &w).unwrap();
        let analytic = c.gradient(&s0);
        // g is separable in log form, so each partial is g times the central
        // difference of w_i ln(1 + s_i); this keeps roundoff far below 1e-6
        let g0 = aux_objective(&s0, &w);
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..s0.len() {
            let h = 1e-6 * s0[i];
            let fd = g0 * w[i] * ((s0[i] + h).ln_1p() - (s0[i] - h).ln_1p()) / (2.0 * h);
            err += (fd - analytic[i]).powi(2);
            norm += analytic[i].powi(2);
        }
        prop_assert!(err.sqrt() <= 1e-6 * norm.sqrt().max(f64::MIN_POSITIVE), "{} vs {}", err.sqrt(), norm.sqrt());
    }

    #[test]
    fn exponents_stay_below_weights((s0, _s, w) in draw()) {
        let c = condense_proposed(&s0, &w).unwrap();
        for (d, wi) in c.d().iter().zip(&w) {
            prop_assert!(*d >= 0.0 && (*d < *wi || *wi == 0.0));
        }
        prop_assert_eq!(c.stored_quantities(), s0.len() + 1);
    }

    #[test]
    fn factorwise_agm_equivalence(s0 in -3.0f64..3.0, pts in prop::collection::vec(-3.0f64..3.0, 100)) {
        let s0 = 10f64.powf(s0);
        let prop = condense_proposed(&[s0], &[1.0]).unwrap();
        let agm = condense_agm(&one_plus::<f64>(VarId(0)), &[s0]).unwrap();
        for e in pts {
            let s = 10f64.powf(e);
            let a = prop.eval(&[s]);
            let b = agm.eval(&[s]).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        }
    }
}

#[test]
fn proposed_form_stores_n_plus_one() {
    for n in 1..=48 {
        let c = condense_proposed(&vec![0.5; n], &vec![1.0; n]).unwrap();
        assert_eq!(c.stored_quantities(), n + 1);
        assert_eq!(c.d().len(), n);
    }
}

#[test]
fn expanded_product_has_two_to_the_n_terms() {
    for n in 1..=12 {
        let factors: Vec<Posynomial<f64>> = (0..n).map(|i| one_plus(VarId(i))).collect();
        let g = Posynomial::expand_product(&factors, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(g.len(), 1 << n);
        let x0 = vec![0.7; n];
        let m = condense_agm(&g, &x0).unwrap();
        let gx = g.eval(&x0).unwrap();
        assert!((m.eval(&x0).unwrap() - gx).abs() <= 1e-12 * gx);
    }
}

#[test]
fn expanded_product_is_refused_from_21_factors() {
    for n in [21, 24, 48] {
        let factors: Vec<Posynomial<f64>> = (0..n).map(|i| one_plus(VarId(i))).collect();
        let e = Posynomial::expand_product(&factors, DEFAULT_TERM_CAP).unwrap_err();
        assert_eq!(
            e,
            PosyError::TermCapExceeded {
                requested: 1u128 << n,
                cap: DEFAULT_TERM_CAP
            }
        );
    }
}
