//! Registry of the non-Hermitian cases and their Jordan block data.
//!
//! Each case is a list of blocks `(q, d, w)`: the degree and root
//! multiplicity of one simple Jordan component and the exponent of its norm
//! in the degree-4 polynomial. Exceptional rows come from `data/cases.toml`
//! through the build script; the two infinite families follow block rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub(crate) struct RawCase {
    pub id: &'static str,
    pub m: u32,
    pub blocks: &'static [(u32, u32, u32)],
    pub k: &'static str,
    pub p: &'static str,
    pub g: &'static str,
    pub group: &'static str,
    pub vacuum: &'static str,
    pub note: &'static str,
}

include!(concat!(env!("OUT_DIR"), "/cases.rs"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JordanBlock {
    pub q: u32,
    pub d: u32,
    pub w: u32,
}

impl JordanBlock {
    pub fn new(q: u32, d: u32, w: u32) -> Self {
        JordanBlock { q, d, w }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseLabels {
    pub k: String,
    pub p: String,
    pub g: String,
    pub group: String,
}

/// Which registry rule produced a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Exceptional,
    So { p: u32, q: u32 },
    Sl { n: u32 },
}

/// Complex simple Lie algebra type, used for the dimension check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexType {
    Sl(u32),
    So(u32),
    Sp(u32),
    G2,
    F4,
    E6,
    E7,
    E8,
}

impl ComplexType {
    /// Complex dimension of the minimal orbit's projectivized cone `Y`.
    pub fn dim_y(self) -> u32 {
        match self {
            ComplexType::Sl(n) => n - 1,
            ComplexType::So(n) => n - 3,
            ComplexType::Sp(n2) => n2 / 2,
            ComplexType::G2 => 3,
            ComplexType::F4 => 8,
            ComplexType::E6 => 11,
            ComplexType::E7 => 17,
            ComplexType::E8 => 29,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JordanCase {
    pub id: String,
    pub blocks: Vec<JordanBlock>,
    pub m: u32,
    pub labels: CaseLabels,
    pub family: Family,
    pub algebra: ComplexType,
    /// Free-form remark carried with the registry row.
    pub note: String,
}

impl JordanCase {
    /// Total Jordan degree `q = sum q_n`.
    pub fn degree(&self) -> u32 {
        self.blocks.iter().map(|b| b.q).sum()
    }

    pub fn weights(&self) -> Vec<u32> {
        self.blocks.iter().map(|b| b.w).collect()
    }
}

/// Vacuum label for an exceptional row, if the id names one.
pub(crate) fn exceptional_vacuum(id: &str) -> Option<&'static str> {
    EXCEPTIONAL.iter().find(|r| r.id == id).map(|r| r.vacuum)
}

fn exceptional_type(g: &str) -> ComplexType {
    match g {
        "G2" => ComplexType::G2,
        "F4" => ComplexType::F4,
        "E6" => ComplexType::E6,
        "E7" => ComplexType::E7,
        "E8" => ComplexType::E8,
        other => panic!("unknown exceptional algebra {other} in case table"),
    }
}

fn so_side(s: u32) -> Vec<JordanBlock> {
    match s {
        3 => vec![JordanBlock::new(1, 0, 2)],
        4 => vec![JordanBlock::new(1, 0, 1), JordanBlock::new(1, 0, 1)],
        _ => vec![JordanBlock::new(2, s - 4, 1)],
    }
}

fn so_case(p: u32, q: u32) -> JordanCase {
    let mut blocks = so_side(p);
    blocks.extend(so_side(q));
    JordanCase {
        id: format!("SO:{p},{q}"),
        blocks,
        m: p + q - 4,
        labels: CaseLabels {
            k: format!("so_{p} + so_{q}"),
            p: format!("C^{p} ⊗ C^{q}"),
            g: format!("so_{}", p + q),
            group: format!("SO~({p},{q})"),
        },
        family: Family::So { p, q },
        algebra: ComplexType::So(p + q),
        note: String::new(),
    }
}

fn sl_case(n: u32) -> JordanCase {
    let blocks = match n {
        3 => vec![JordanBlock::new(1, 0, 4)],
        4 => vec![JordanBlock::new(1, 0, 2), JordanBlock::new(1, 0, 2)],
        _ => vec![JordanBlock::new(2, n - 4, 2)],
    };
    JordanCase {
        id: format!("SL:{n}"),
        blocks,
        m: n - 2,
        labels: CaseLabels {
            k: format!("so_{n}"),
            p: format!("S_o^2 C^{n}"),
            g: format!("sl_{n}"),
            group: format!("SL~({n},R)"),
        },
        family: Family::Sl { n },
        algebra: ComplexType::Sl(n),
        note: String::new(),
    }
}

fn parse_u32(s: &str, id: &str) -> Result<u32> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad parameter in case id {id:?}")))
}

/// Looks up a case by identifier: an exceptional id such as `E6:6`,
/// `SO:p,q` with `3 <= p <= q`, or `SL:n` with `n >= 3`.
pub fn lookup_case(id: &str) -> Result<JordanCase> {
    let id = id.trim();
    if let Some(r) = EXCEPTIONAL.iter().find(|r| r.id == id) {
        return Ok(JordanCase {
            id: r.id.to_string(),
            blocks: r
                .blocks
                .iter()
                .map(|&(q, d, w)| JordanBlock::new(q, d, w))
                .collect(),
            m: r.m,
            labels: CaseLabels {
                k: r.k.to_string(),
                p: r.p.to_string(),
                g: r.g.to_string(),
                group: r.group.to_string(),
            },
            family: Family::Exceptional,
            algebra: exceptional_type(r.g),
            note: r.note.to_string(),
        });
    }
    let (fam, params) = id
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("unknown case {id:?}")))?;
    match fam {
        "SO" => {
            let (p, q) = params
                .split_once(',')
                .ok_or_else(|| Error::InvalidInput(format!("SO case needs p,q: {id:?}")))?;
            let (p, q) = (parse_u32(p, id)?, parse_u32(q, id)?);
            if p < 3 || q < p {
                return Err(Error::InvalidInput(format!(
                    "SO:p,q requires 3 <= p <= q, got {p},{q}"
                )));
            }
            Ok(so_case(p, q))
        }
        "SL" => {
            let n = parse_u32(params, id)?;
            if n < 3 {
                return Err(Error::InvalidInput(format!("SL:n requires n >= 3, got {n}")));
            }
            Ok(sl_case(n))
        }
        _ => Err(Error::InvalidInput(format!("unknown case {id:?}"))),
    }
}

/// Ids of every exceptional row, in table order.
pub fn exceptional_ids() -> Vec<&'static str> {
    EXCEPTIONAL.iter().map(|r| r.id).collect()
}

/// Exceptional rows, then `SO:p,q` for `3 <= p <= q <= pmax`, then `SL:n`
/// for `3 <= n <= nmax`.
pub fn sweep_ids(pmax: u32, nmax: u32) -> Vec<String> {
    let mut ids: Vec<String> = exceptional_ids().into_iter().map(String::from).collect();
    for p in 3..=pmax {
        for q in p..=pmax {
            ids.push(format!("SO:{p},{q}"));
        }
    }
    for n in 3..=nmax {
        ids.push(format!("SL:{n}"));
    }
    ids
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedVectors {
    pub v: Vec<u32>,
    pub delta: Vec<u32>,
    /// Zero-based start index of each block in the q-vectors.
    pub offsets: Vec<usize>,
}

/// The q-vectors `v` and `delta`: within block `n`, slot `j` (1-based) gets
/// `v = w_n` and `delta = d_n (q_n - j)`.
pub fn derived_vectors(c: &JordanCase) -> DerivedVectors {
    let mut v = Vec::new();
    let mut delta = Vec::new();
    let mut offsets = Vec::new();
    for b in &c.blocks {
        offsets.push(v.len());
        for j in 1..=b.q {
            v.push(b.w);
            delta.push(b.d * (b.q - j));
        }
    }
    DerivedVectors { v, delta, offsets }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: Rational,
    pub rhs: Rational,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, lhs: i64, rhs: i64) -> Self {
        IdentityCheck {
            name: name.to_string(),
            lhs: Rational::from_int(lhs),
            rhs: Rational::from_int(rhs),
            passed: lhs == rhs,
        }
    }
}

/// Checks the numerical identities every registry row must satisfy. Failures
/// are reported in the returned list, not as errors.
pub fn validate_case(c: &JordanCase) -> Vec<IdentityCheck> {
    let qw: i64 = c.blocks.iter().map(|b| (b.q * b.w) as i64).sum();
    let dq: i64 = c
        .blocks
        .iter()
        .map(|b| (b.d * b.q * (b.q.saturating_sub(1)) / 2) as i64)
        .sum();
    let q = c.degree() as i64;
    let dv = derived_vectors(c);
    let xi: i64 = dv.v.iter().map(|&x| x as i64).sum();
    let mut out = vec![
        IdentityCheck::new("sum q_n w_n = 4", qw, 4),
        IdentityCheck::new("|Xi| = sum v_i = 4", xi, 4),
        IdentityCheck::new("sum d_n q_n (q_n - 1)/2 = m - q", dq, c.m as i64 - q),
        IdentityCheck::new("dim Y = m + 1", c.algebra.dim_y() as i64, c.m as i64 + 1),
    ];
    let blocks_ok = c.blocks.iter().all(|b| b.q >= 1 && b.q <= 4 && b.w >= 1);
    out.push(IdentityCheck::new("block ranges", blocks_ok as i64, 1));
    out
}

pub fn all_pass(checks: &[IdentityCheck]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// The JSON shape of a registry row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CaseRecord {
    pub id: String,
    pub blocks: Vec<[u32; 3]>,
    pub m: u32,
    pub labels: CaseLabels,
}

impl From<&JordanCase> for CaseRecord {
    fn from(c: &JordanCase) -> Self {
        CaseRecord {
            id: c.id.clone(),
            blocks: c.blocks.iter().map(|b| [b.q, b.d, b.w]).collect(),
            m: c.m,
            labels: c.labels.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks(c: &JordanCase) -> Vec<(u32, u32, u32)> {
        c.blocks.iter().map(|b| (b.q, b.d, b.w)).collect()
    }

    #[test]
    fn exceptional_rows() {
        let c = lookup_case("E6:6").unwrap();
        assert_eq!(blocks(&c), vec![(4, 1, 1)]);
        assert_eq!(c.m, 10);
        let c = lookup_case("G2:2").unwrap();
        assert_eq!(blocks(&c), vec![(1, 0, 3), (1, 0, 1)]);
        assert_eq!(c.m, 2);
    }

    #[test]
    fn family_rules() {
        let c = lookup_case("SO:3,4").unwrap();
        assert_eq!(blocks(&c), vec![(1, 0, 2), (1, 0, 1), (1, 0, 1)]);
        assert_eq!(c.m, 3);
        assert_eq!(blocks(&lookup_case("SO:5,7").unwrap()), vec![(2, 1, 1), (2, 3, 1)]);
        assert_eq!(blocks(&lookup_case("SL:8").unwrap()), vec![(2, 4, 2)]);
        assert_eq!(blocks(&lookup_case("SL:4").unwrap()), vec![(1, 0, 2), (1, 0, 2)]);
        assert_eq!(blocks(&lookup_case("SL:3").unwrap()), vec![(1, 0, 4)]);
    }

    #[test]
    fn bad_ids() {
        for id in ["SO:2,5", "SO:5,4", "SL:2", "SL:x", "E9:1", "SO:4", ""] {
            assert!(matches!(lookup_case(id), Err(Error::InvalidInput(_))), "{id}");
        }
    }

    #[test]
    fn vectors() {
        let dv = derived_vectors(&lookup_case("E6:6").unwrap());
        assert_eq!(dv.v, vec![1, 1, 1, 1]);
        assert_eq!(dv.delta, vec![3, 2, 1, 0]);
        let dv = derived_vectors(&lookup_case("G2:2").unwrap());
        assert_eq!((dv.v, dv.delta), (vec![3, 1], vec![0, 0]));
        let dv = derived_vectors(&lookup_case("SL:8").unwrap());
        assert_eq!((dv.v, dv.delta), (vec![2, 2], vec![4, 0]));
        let dv = derived_vectors(&lookup_case("F4:4").unwrap());
        assert_eq!(dv.offsets, vec![0, 3]);
    }

    #[test]
    fn identities_hold_across_sweep() {
        for id in sweep_ids(12, 12) {
            let c = lookup_case(&id).unwrap();
            let checks = validate_case(&c);
            assert!(all_pass(&checks), "{id}: {checks:?}");
            assert_eq!(lookup_case(&id).unwrap(), c);
        }
    }

    #[test]
    fn corrupted_case_fails() {
        let mut c = lookup_case("SL:4").unwrap();
        c.blocks = vec![JordanBlock::new(2, 0, 2), JordanBlock::new(2, 0, 2)];
        let checks = validate_case(&c);
        assert!(!checks[0].passed);
        assert_eq!(checks[0].lhs, Rational::from_int(8));
    }
}
