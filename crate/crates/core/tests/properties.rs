use proptest::prelude::*;

use orbitq::hyperg::{kernel_coefficients, pochhammer};
use orbitq::ladder::j_identity_check;
use orbitq::{commutator, q, Ctx, Monomial, OperatorExpr, Polynomial, Rational, VariableContext};

fn ctx() -> Ctx {
    VariableContext::new(&["x", "y", "z"]).unwrap().into_ctx()
}

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=9).prop_map(|(n, d)| q(n, d))
}

fn poly() -> impl Strategy<Value = Vec<(i64, [u32; 3])>> {
    prop::collection::vec((-5i64..=5, [0u32..4, 0u32..4, 0u32..4]), 0..5)
}

fn build(c: &Ctx, terms: &[(i64, [u32; 3])]) -> Polynomial {
    let mut p = Polynomial::zero(c);
    for (k, e) in terms {
        p.add_term(Monomial::from_exponents(e.to_vec()), Rational::from_int(*k));
    }
    p
}

/// Operators of the form `p * d^w` for a random polynomial `p` and a
/// derivative word `w` of length at most 2.
fn operator() -> impl Strategy<Value = (Vec<(i64, [u32; 3])>, Vec<usize>)> {
    (poly(), prop::collection::vec(0usize..3, 0..3))
}

fn build_op(c: &Ctx, (p, w): &(Vec<(i64, [u32; 3])>, Vec<usize>)) -> OperatorExpr {
    OperatorExpr::Mul(build(c, p)).compose(OperatorExpr::Deriv(w.clone()))
}

proptest! {
    #[test]
    fn rational_field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        let s = a.to_string();
        let (n, d) = s.split_once('/').unwrap();
        prop_assert!(n.parse::<i64>().is_ok() && d.parse::<i64>().unwrap() > 0);
    }

    #[test]
    fn product_rule(p in poly(), r in poly(), v in 0usize..3) {
        let c = ctx();
        let (p, r) = (build(&c, &p), build(&c, &r));
        let lhs = p.mul(&r).unwrap().diff_indices(&[v]).unwrap();
        let rhs = p.diff_indices(&[v]).unwrap().mul(&r).unwrap()
            .add(&p.mul(&r.diff_indices(&[v]).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn commutator_is_extensional(a in operator(), b in operator(), f in poly()) {
        let c = ctx();
        let (a, b, f) = (build_op(&c, &a), build_op(&c, &b), build(&c, &f));
        let direct = a.apply(&b.apply(&f).unwrap()).unwrap()
            .sub(&b.apply(&a.apply(&f).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(commutator(&a, &b).apply(&f).unwrap(), direct);
    }

    #[test]
    fn jacobi(a in operator(), b in operator(), d in operator(), f in poly()) {
        let c = ctx();
        let (a, b, d, f) = (build_op(&c, &a), build_op(&c, &b), build_op(&c, &d), build(&c, &f));
        let total = commutator(&a, &commutator(&b, &d))
            .plus(commutator(&b, &commutator(&d, &a)))
            .plus(commutator(&d, &commutator(&a, &b)));
        prop_assert!(total.apply(&f).unwrap().is_zero());
    }

    #[test]
    fn j_identity(a in [rational(), rational(), rational(), rational()], b in rational()) {
        prop_assume!(![q(0, 1), q(-1, 1), q(-2, 1)].contains(&b));
        prop_assert!(j_identity_check(&a, &b).unwrap());
    }

    #[test]
    fn kernel_coefficient_closed_form(r0 in 1i64..20, a in 1i64..20, b in 1i64..20, n in 0u32..12) {
        let (r0, a, b) = (q(r0, 4), q(a, 3), q(b, 2));
        let p = kernel_coefficients(&r0, &a, &b, n).unwrap();
        let fact: Rational = (1..=n as i64).map(Rational::from_int).product();
        let want = pochhammer(&(&r0 + &Rational::one()), n) / (fact * pochhammer(&a, n) * pochhammer(&b, n));
        prop_assert_eq!(&p[n as usize], &want);
    }
}
