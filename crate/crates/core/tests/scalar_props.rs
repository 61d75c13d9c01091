use a2planar::scalar::{eval_at_root, qint, CycloScalar, LaurentScalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn laurent() -> impl Strategy<Value = LaurentScalar> {
    prop::collection::vec((-9i64..=9, -5i64..=5), 0..6).prop_map(|terms| {
        let mut x = LaurentScalar::zero();
        for (e, c) in terms {
            x = x + LaurentScalar::monomial(e, BigRational::from_integer(BigInt::from(c)));
        }
        x
    })
}

fn close(a: num_complex::Complex64, b: num_complex::Complex64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn ring_axioms(a in laurent(), b in laurent(), c in laurent()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn conjugation_is_an_involutive_ring_map(a in laurent(), b in laurent()) {
        prop_assert_eq!(a.conjugate().conjugate(), a.clone());
        prop_assert_eq!((&a * &b).conjugate(), &a.conjugate() * &b.conjugate());
        prop_assert_eq!((&a + &b).conjugate(), &a.conjugate() + &b.conjugate());
    }

    #[test]
    fn evaluation_is_a_ring_map(a in laurent(), b in laurent(), n in 4u32..10) {
        prop_assert!(close((&a * &b).eval_complex(n), a.eval_complex(n) * b.eval_complex(n)));
        prop_assert!(close((&a + &b).eval_complex(n), a.eval_complex(n) + b.eval_complex(n)));
        prop_assert!(close(a.conjugate().eval_complex(n), a.eval_complex(n).conj()));
    }

    #[test]
    fn exact_root_matches_floating_point(a in laurent(), b in laurent(), n in 4u32..9) {
        let x = eval_at_root(&a, n).unwrap();
        prop_assert!(close(x.to_complex(), a.eval_complex(n)));
        let y = eval_at_root(&b, n).unwrap();
        prop_assert_eq!(eval_at_root(&(&a * &b), n).unwrap(), &x * &y);
        prop_assert_eq!(x.conjugate(), eval_at_root(&a.conjugate(), n).unwrap());
    }

    #[test]
    fn cyclotomic_inverse(a in laurent(), n in 4u32..9) {
        let x = eval_at_root(&a, n).unwrap();
        match x.inverse() {
            Some(inv) => prop_assert_eq!(&x * &inv, CycloScalar::one(n)),
            None => prop_assert!(x.is_zero()),
        }
    }

    #[test]
    fn exact_division_round_trips(a in laurent(), b in laurent()) {
        prop_assume!(!b.is_zero());
        let p = &a * &b;
        prop_assert_eq!(p.div_exact(&b), Some(a));
    }

    #[test]
    fn json_round_trip(a in laurent()) {
        prop_assert_eq!(LaurentScalar::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn quantum_integer_recursion(m in 1i64..12) {
        prop_assert_eq!(&qint(2) * &qint(m), &qint(m + 1) + &qint(m - 1));
    }
}

#[test]
fn quantum_integers_at_roots() {
    // [n] vanishes at q = exp(i pi / n) and [3] = [2]^2 - 1
    for n in 4..10u32 {
        assert!(eval_at_root(&qint(n as i64), n).unwrap().is_zero());
        assert!(!eval_at_root(&qint(n as i64 - 1), n).unwrap().is_zero());
    }
    assert_eq!(qint(3), &qint(2) * &qint(2) - LaurentScalar::one());
    assert_eq!(LaurentScalar::delta(), qint(2));
    assert_eq!(LaurentScalar::alpha(), qint(3));
    assert!(eval_at_root(&LaurentScalar::alpha(), 4).unwrap().to_complex().im.abs() < 1e-12);
}
