use multiflow::core::{Interval, Polynomial};
use multiflow::expr::parse_polynomial;
use proptest::prelude::*;

fn coefficient() -> impl Strategy<Value = Interval> {
    prop_oneof![
        (-1e3f64..1e3).prop_map(Interval::point),
        (-1e3f64..1e3, 0f64..10.0).prop_map(|(a, w)| Interval::new(a, a + w).unwrap()),
        (-20i32..20).prop_map(|k| Interval::point(k as f64 * 0.25)),
    ]
}

fn polynomial(nvars: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((coefficient(), prop::collection::vec(0u32..4, nvars + 1)), 0..6).prop_map(move |terms| {
        terms.into_iter().fold(Polynomial::zero(nvars), |acc, (c, exps)| {
            let mut m = Polynomial::constant(nvars, c);
            for (i, &k) in exps.iter().enumerate() {
                let base = if i < nvars { Polynomial::var(nvars, i) } else { Polynomial::lambda(nvars) };
                m = m.mul(&base.pow(k));
            }
            acc.add(&m)
        })
    })
}

proptest! {
    #[test]
    fn printed_polynomials_parse_back((n, p) in (1usize..4).prop_flat_map(|n| (Just(n), polynomial(n)))) {
        let text = p.to_string();
        let q = parse_polynomial(&text, n).map_err(|e| TestCaseError::fail(format!("{text}: {e:?}")))?;
        prop_assert_eq!(q, p, "{}", text);
    }
}
