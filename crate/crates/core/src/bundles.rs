//! Half-form bundle classification.
//!
//! A case admits at most two half-form bundles, distinguished by whether the
//! square of the vacuum section is `L0` or `f0 L0`. Existence reduces to a
//! parity test on character exponents.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jordan::{exceptional_vacuum, Family, JordanCase};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Twist {
    #[serde(rename = "L0")]
    Lambda0,
    #[serde(rename = "f0L0")]
    F0Lambda0,
}

impl fmt::Display for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Twist::Lambda0 => "L0",
            Twist::F0Lambda0 => "f0L0",
        })
    }
}

impl FromStr for Twist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L0" | "Lambda0" | "l0" => Ok(Twist::Lambda0),
            "f0L0" | "f0Lambda0" | "f0l0" => Ok(Twist::F0Lambda0),
            _ => Err(Error::InvalidInput(format!("unknown twist {s:?} (expected L0 or f0L0)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleModel {
    pub case_id: String,
    pub twist: Twist,
    pub alpha: u32,
    pub zeta0_exponents: Vec<u32>,
    pub r0: Rational,
    pub vacuum_label: String,
    /// `None` until the ladder computation fills them, and for invalid
    /// bundles.
    pub a: Option<Rational>,
    pub b: Option<Rational>,
    pub valid: bool,
}

/// `u_n = 2 + d_n (q_n - 1)` and the least `alpha >= 1` with
/// `alpha w_n >= u_n` for every block.
pub fn alpha_of(c: &JordanCase) -> (u32, Vec<u32>) {
    let u: Vec<u32> = c.blocks.iter().map(|b| 2 + b.d * (b.q - 1)).collect();
    let alpha = c
        .blocks
        .iter()
        .zip(&u)
        .map(|(b, &un)| un.div_ceil(b.w))
        .max()
        .unwrap_or(1)
        .max(1);
    (alpha, u)
}

fn exponents(c: &JordanCase, k: u32, u: &[u32]) -> Option<Vec<u32>> {
    let e: Vec<u32> = c.blocks.iter().zip(u).map(|(b, &un)| k * b.w - un).collect();
    e.iter().all(|x| x % 2 == 0).then_some(e)
}

fn vacuum_label(c: &JordanCase, twist: Twist) -> String {
    match (c.family, twist) {
        (Family::Exceptional, _) => exceptional_vacuum(&c.id).unwrap_or("").to_string(),
        (Family::So { p: 3, q: 3 }, Twist::F0Lambda0) => "C^2 ⊗ C^2".to_string(),
        (Family::So { p: 3, q }, Twist::Lambda0) if q % 2 == 0 => format!("S^{}C^2 ⊗ C", q - 3),
        (Family::So { p, q }, Twist::Lambda0) => format!("S_o^{}C^{p} ⊗ C", (q - p) / 2),
        (Family::Sl { n: 3 }, Twist::Lambda0) => "C^2".to_string(),
        (Family::Sl { n: 3 }, Twist::F0Lambda0) => "S^3C^2".to_string(),
        (Family::Sl { .. }, Twist::Lambda0) => "C".to_string(),
        (Family::Sl { n }, Twist::F0Lambda0) => format!("C^{n}"),
        (Family::So { .. }, Twist::F0Lambda0) => String::new(),
    }
}

/// All half-form bundles of a case: zero, one or two entries, `L0` first.
/// The `a`, `b`, `valid` fields are left unset; see
/// [`crate::ladder::evaluate_bundles`] for the completed rows.
pub fn classify_bundles(c: &JordanCase) -> Vec<BundleModel> {
    let (alpha, u) = alpha_of(c);
    let mut out = Vec::new();
    for (twist, k) in [(Twist::Lambda0, alpha), (Twist::F0Lambda0, alpha + 1)] {
        if let Some(e) = exponents(c, k, &u) {
            out.push(BundleModel {
                case_id: c.id.clone(),
                twist,
                alpha,
                zeta0_exponents: e,
                r0: Rational::new(k as i64, 2),
                vacuum_label: vacuum_label(c, twist),
                a: None,
                b: None,
                valid: false,
            });
        }
    }
    out
}

/// Order of the component group, `gcd(w_1, ..., w_l)`.
pub fn pi1_component_order(c: &JordanCase) -> u32 {
    c.blocks.iter().fold(0u32, |g, b| g.gcd(&b.w))
}

/// When both twists exist, they must be genuinely different bundles: every
/// `w_n` is even and the two `r0` differ by one half.
pub fn twists_distinct(c: &JordanCase, bundles: &[BundleModel]) -> bool {
    match bundles {
        [x, y] => {
            c.blocks.iter().all(|b| b.w % 2 == 0)
                && &y.r0 - &x.r0 == Rational::half()
                && x.twist != y.twist
        }
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jordan::{lookup_case, sweep_ids};
    use crate::rational::q;

    fn case(id: &str) -> JordanCase {
        lookup_case(id).unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_of(&case("E6:6")), (5, vec![5]));
        assert_eq!(alpha_of(&case("SL:3")), (1, vec![2]));
        assert_eq!(alpha_of(&case("G2:2")), (2, vec![2, 2]));
        assert_eq!(alpha_of(&case("E8:8")).0, 14);
    }

    #[test]
    fn classification_examples() {
        assert!(classify_bundles(&case("SO:4,5")).is_empty());
        let sl4 = classify_bundles(&case("SL:4"));
        assert_eq!(sl4.len(), 2);
        assert_eq!((sl4[0].twist, sl4[0].r0.clone()), (Twist::Lambda0, q(1, 2)));
        assert_eq!((sl4[1].twist, sl4[1].r0.clone()), (Twist::F0Lambda0, q(1, 1)));
        let so36 = classify_bundles(&case("SO:3,6"));
        assert_eq!(so36.len(), 1);
        assert_eq!(so36[0].r0, q(2, 1));
        assert_eq!(so36[0].vacuum_label, "S^3C^2 ⊗ C");
        let g2 = classify_bundles(&case("G2:2"));
        assert_eq!(g2[0].zeta0_exponents, vec![4, 0]);
        assert_eq!(classify_bundles(&case("SL:3"))[0].zeta0_exponents, vec![2]);
    }

    #[test]
    fn component_orders() {
        assert_eq!(pi1_component_order(&case("E8:8")), 1);
        assert_eq!(pi1_component_order(&case("SL:5")), 2);
        assert_eq!(pi1_component_order(&case("SL:3")), 4);
    }

    #[test]
    fn twist_invariants_over_sweep() {
        for id in sweep_ids(12, 12) {
            let c = case(&id);
            let bs = classify_bundles(&c);
            assert!(twists_distinct(&c, &bs), "{id}");
            for b in &bs {
                assert!(b.r0.is_positive());
                let k = if b.twist == Twist::Lambda0 { b.alpha } else { b.alpha + 1 };
                assert_eq!(b.r0, q(k as i64, 2));
            }
        }
    }

    #[test]
    fn twist_text() {
        assert_eq!("f0L0".parse::<Twist>().unwrap(), Twist::F0Lambda0);
        assert_eq!(Twist::Lambda0.to_string(), "L0");
        assert!("L1".parse::<Twist>().is_err());
    }
}
