//! Property tests for field and series arithmetic and the serialized forms.

use std::sync::OnceLock;

use explicit_weights::cli::{parse_weight, RunConfig};
use explicit_weights::ffield::{FieldElem, Tower};
use explicit_weights::series::{Base, TensorRing, TensorSeries};
use proptest::prelude::*;

fn tower() -> &'static Tower {
    static T: OnceLock<Tower> = OnceLock::new();
    T.get_or_init(|| Tower::new(3, 2, 1).unwrap())
}

fn elem() -> impl Strategy<Value = FieldElem> {
    let t = tower();
    (0..t.e.order()).prop_map(move |n| t.e.from_index(n))
}

/// A series over L with support in [lo, 6) and sparse coefficients.
fn series(lo: i64) -> impl Strategy<Value = TensorSeries> {
    let t = tower();
    let slots = t.dl() * (6 - lo) as usize;
    proptest::collection::vec(proptest::option::weighted(0.3, elem()), slots).prop_map(move |cs| {
        let mut x = TensorSeries::zero(t, Base::L, lo, 6);
        for (k, c) in cs.into_iter().enumerate() {
            if let Some(c) = c {
                x.set_coeff(k % t.dl(), lo + (k / t.dl()) as i64, c);
            }
        }
        x
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_distributes(a in elem(), b in elem(), c in elem()) {
        let e = &tower().e;
        prop_assert_eq!(e.mul(&a, &e.add(&b, &c)), e.add(&e.mul(&a, &b), &e.mul(&a, &c)));
        prop_assert_eq!(e.mul(&e.mul(&a, &b), &c), e.mul(&a, &e.mul(&b, &c)));
    }

    #[test]
    fn field_inverse_and_frobenius(a in elem(), b in elem()) {
        let e = &tower().e;
        if !a.is_zero() {
            prop_assert!(e.is_one(&e.mul(&a, &e.inv(&a))));
        }
        prop_assert_eq!(e.frobenius(&e.add(&a, &b)), e.add(&e.frobenius(&a), &e.frobenius(&b)));
        prop_assert_eq!(e.frobenius(&a), e.pow(&a, 3));
        prop_assert_eq!(e.from_coeff_string(&e.to_coeff_string(&a)), Some(a));
    }

    #[test]
    fn series_ring_laws(x in series(-2), y in series(-2), z in series(0)) {
        let r = TensorRing::new(tower());
        prop_assert_eq!(r.mul(&x, &y).unwrap(), r.mul(&y, &x).unwrap());
        let lhs = r.mul(&r.mul(&x, &y).unwrap(), &z).unwrap();
        let rhs = r.mul(&x, &r.mul(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(lhs.truncate(4), rhs.truncate(4));
        let phi_prod = r.phi(&r.mul(&x, &y).unwrap(), 1);
        let prod_phi = r.mul(&r.phi(&x, 1), &r.phi(&y, 1)).unwrap();
        prop_assert_eq!(phi_prod.truncate(6), prod_phi.truncate(6));
    }

    #[test]
    fn series_inverse(x in series(1)) {
        let t = tower();
        let r = TensorRing::new(t);
        let u = r.add(&r.one(Base::L, 6), &x).unwrap();
        let prod = r.mul(&u, &r.inv(&u).unwrap()).unwrap();
        prop_assert_eq!(prod.truncate(6), r.one(Base::L, 6));
    }

    #[test]
    fn series_json_round_trip(x in series(-3)) {
        let r = TensorRing::new(tower());
        prop_assert_eq!(r.from_json(&r.to_json(&x)).unwrap(), x);
    }

    #[test]
    fn weight_strings_parse(a0 in 0i64..3, a1 in 0i64..3, b0 in 0i64..3, b1 in 0i64..3) {
        let w = parse_weight(&format!("{},{}/{},{}", a0 + b0, a1 + b1, b0, b1), 2).unwrap();
        prop_assert_eq!(w.a, vec![a0 + b0, a1 + b1]);
        prop_assert_eq!(w.b, vec![b0, b1]);
    }

    #[test]
    fn run_config_json_is_total(s in "\\PC{0,40}") {
        let _ = RunConfig::from_json(&s);
    }
}
