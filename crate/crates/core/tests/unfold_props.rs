use proptest::prelude::*;

use pseudohopf::field::PiecewiseField;
use pseudohopf::unfold::{lemma1_check, lemma1_exact, unfold, verify_contact_ladder, UnfoldingParams};

/// Ordered `Λ` for `k` with gaps of at least `0.2`, from unit-interval draws.
fn ordered_lambda(k: u32, raw: &[f64]) -> Vec<f64> {
    let n = 2 * k as usize - 2;
    let mut out = vec![-(0.2 + 2.0 * raw[0])];
    let mut x = 0.0;
    for r in raw.iter().take(n).skip(1) {
        x += 0.2 + r;
        out.push(x);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ladder_holds_for_ordered_lambda(
        k in 2u32..=3,
        raw in prop::collection::vec(0.0f64..1.0, 4),
        c in prop_oneof![-1.5f64..-0.2, 0.2f64..1.5],
    ) {
        let lambda = ordered_lambda(k, &raw);
        let span = lambda.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        // keep the outer folds well inside the radius where 1 − c·x stays positive
        let eps = 0.05 / (span * c.abs()).max(1.0);
        let z = PiecewiseField::sys_a(k, c);
        let p = UnfoldingParams::new(k, lambda, eps);
        let (u, _) = unfold(&z, &p).unwrap();
        let r = verify_contact_ladder(&u, &p).unwrap();
        prop_assert!(r.pass, "{:?}", r.failures);
    }

    #[test]
    fn extrapolated_coefficients_match_exact(
        k in 2u32..=3,
        raw in prop::collection::vec(0.0f64..1.0, 4),
    ) {
        let lambda = ordered_lambda(k, &raw);
        let z = PiecewiseField::sys_a(k, 0.7);
        let f = lemma1_check(&z, k, &lambda).unwrap();
        let e = lemma1_exact(&z, k, &lambda).unwrap();
        prop_assert!(f.max_residual < 1e-8);
        prop_assert_eq!(e.max_residual, 0.0);
        for (a, b) in f.c_plus.iter().zip(&e.c_plus).chain(f.dc_minus.iter().zip(&e.dc_minus)) {
            prop_assert!((a - b).abs() < 1e-7 * b.abs().max(1.0), "{} vs {}", a, b);
        }
    }
}
