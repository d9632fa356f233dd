//! Exact hypergeometric coefficients.
//!
//! Reproducing-kernel coefficients `p_n = (r0+1)_n / (n! (a)_n (b)_n)` and
//! partial sums of `2F1(a, b; 1+r0; -y)` with a rigorous tail bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Rising factorial `(x)_n = x (x+1) ... (x+n-1)`.
pub fn pochhammer(x: &Rational, n: u32) -> Rational {
    (0..n as i64).map(|k| x + &Rational::from_int(k)).product()
}

fn require_positive(r0: &Rational, a: &Rational, b: &Rational) -> Result<()> {
    if r0.is_positive() && a.is_positive() && b.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "series parameters must be positive (r0 = {r0}, a = {a}, b = {b})"
        )))
    }
}

/// `p_0, ..., p_N` with `p_n = (r0+1)_n / (n! (a)_n (b)_n)`.
pub fn kernel_coefficients(r0: &Rational, a: &Rational, b: &Rational, terms: u32) -> Result<Vec<Rational>> {
    require_positive(r0, a, b)?;
    let one = Rational::one();
    let mut out = Vec::with_capacity(terms as usize + 1);
    let mut p = Rational::one();
    out.push(p.clone());
    for k in 0..terms as i64 {
        let kr = Rational::from_int(k);
        p = p * (r0 + &one + &kr) / ((a + &kr) * (b + &kr) * (&kr + &one));
        out.push(p.clone());
    }
    Ok(out)
}

/// Coefficients `c_n = (a)_n (b)_n / ((1+r0)_n n!)` of `(-y)^n`.
pub fn matrix_series_coefficients(r0: &Rational, a: &Rational, b: &Rational, terms: u32) -> Vec<Rational> {
    let one = Rational::one();
    let mut out = Vec::with_capacity(terms as usize + 2);
    let mut c = Rational::one();
    out.push(c.clone());
    for k in 0..terms as i64 {
        let kr = Rational::from_int(k);
        c = c * (a + &kr) * (b + &kr) / ((&one + r0 + &kr) * (&kr + &one));
        out.push(c.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesValue {
    pub value: Rational,
    pub remainder_bound: Rational,
    pub terms: u32,
}

/// Partial sum `sum_{n <= N} c_n (-y)^n` of `2F1(a, b; 1+r0; -y)` with a
/// bound on the omitted tail.
///
/// For `n > N` the term ratio is `|y| (n+a)(n+b)/((n+1)(n+1+r0))`, which is
/// at most `|y| (1 + (A+B)/(N+2))` with `A = |a+b-2-r0|`, `B = |ab-1-r0|`.
/// When that ratio `rho` is below one the tail is bounded by
/// `|c_{N+1} y^{N+1}| / (1 - rho)`; otherwise `N` is too small for a bound
/// and a domain error is returned.
pub fn matrix_coefficient(
    r0: &Rational,
    a: &Rational,
    b: &Rational,
    y: &Rational,
    terms: u32,
) -> Result<SeriesValue> {
    require_positive(r0, a, b)?;
    let one = Rational::one();
    if y.abs() >= one {
        return Err(Error::Domain(format!(
            "|y| = {} is not below 1; the series form does not apply",
            y.abs()
        )));
    }
    let coeffs = matrix_series_coefficients(r0, a, b, terms + 1);
    let neg_y = -y;
    let mut value = Rational::zero();
    let mut pow = Rational::one();
    for c in coeffs.iter().take(terms as usize + 1) {
        value += c * &pow;
        pow = &pow * &neg_y;
    }
    let two = Rational::from_int(2);
    let big_a = (a + b - &two - r0).abs();
    let big_b = (a * b - &one - r0).abs();
    let rho = y.abs() * (&one + (big_a + big_b) / Rational::from_int(terms as i64 + 2));
    if rho >= one {
        return Err(Error::Domain(format!(
            "tail ratio bound {rho} is not below 1 at {terms} terms; use more terms"
        )));
    }
    let next = (&coeffs[terms as usize + 1] * &pow).abs();
    Ok(SeriesValue {
        value,
        remainder_bound: next / (&one - &rho),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn rising_factorials() {
        assert_eq!(pochhammer(&q(3, 2), 2), q(15, 4));
        assert_eq!(pochhammer(&q(-7, 3), 0), q(1, 1));
        let mut fact = 1i64;
        for n in 1..15u32 {
            fact *= n as i64;
            assert_eq!(pochhammer(&q(1, 1), n), Rational::from_int(fact));
        }
    }

    #[test]
    fn kernel_examples() {
        let p = kernel_coefficients(&q(1, 1), &q(1, 1), &q(1, 1), 2).unwrap();
        assert_eq!(p[0], q(1, 1));
        assert_eq!(p[2], q(3, 4));
        let p = kernel_coefficients(&q(5, 2), &q(3, 2), &q(2, 1), 1).unwrap();
        assert_eq!(p[1], q(7, 6));
        assert!(kernel_coefficients(&q(-1, 1), &q(1, 1), &q(1, 1), 1).is_err());
    }

    #[test]
    fn kernel_ratio() {
        let (r0, a, b) = (q(7, 2), q(5, 3), q(9, 4));
        let p = kernel_coefficients(&r0, &a, &b, 12).unwrap();
        for k in 0..12 {
            let kr = Rational::from_int(k as i64);
            let expect = (&r0 + Rational::one() + &kr) / ((&a + &kr) * (&b + &kr) * (&kr + Rational::one()));
            assert_eq!(&p[k + 1] / &p[k], expect);
        }
    }

    #[test]
    fn matrix_coefficient_examples() {
        let v = matrix_coefficient(&q(5, 2), &q(3, 2), &q(2, 1), &q(0, 1), 10).unwrap();
        assert_eq!(v.value, q(1, 1));
        assert_eq!(v.remainder_bound, q(0, 1));
        let c = matrix_series_coefficients(&q(1, 1), &q(1, 1), &q(1, 1), 15);
        for (n, cn) in c.iter().enumerate() {
            assert_eq!(*cn, q(1, n as i64 + 1));
        }
        assert!(matches!(
            matrix_coefficient(&q(1, 1), &q(1, 1), &q(1, 1), &q(1, 1), 5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tail_bound_e6() {
        let (r0, a, b) = (q(5, 2), q(3, 2), q(2, 1));
        let y = q(1, 4);
        let v20 = matrix_coefficient(&r0, &a, &b, &y, 20).unwrap();
        assert!(v20.remainder_bound < q(1, 1_000_000));
        let v40 = matrix_coefficient(&r0, &a, &b, &y, 40).unwrap();
        assert!((&v40.value - &v20.value).abs() <= v20.remainder_bound);
    }
}
