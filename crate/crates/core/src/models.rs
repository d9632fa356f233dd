//! Concrete operator models.
//!
//! Three realizations on polynomial spaces: the harmonic oscillator in `n`
//! variables, the eight-variable model of `so(4,4)` and the four-variable
//! model of split `G2`. Each model carries a graded basis, its Lie operators,
//! the generators `f_g` with their lowering partners `T_g`, and enough data
//! to solve for the invariant Hermitian form level by level.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bundles::Twist;
use crate::error::{Error, Result};
use crate::exactalg::{Ctx, Monomial, Polynomial, VariableContext};
use crate::opcalc::{commutator, matrix_on_basis, span_structure, OperatorExpr, OperatorSpan};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Oscillator(u32),
    So44,
    G2,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Oscillator(n) => write!(f, "oscillator({n})"),
            ModelKind::So44 => f.write_str("so44"),
            ModelKind::G2 => f.write_str("g2"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// Accepts `so44`, `g2`, `oscillator`, `oscillator(n)` and `oscillator:n`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "so44" | "so(4,4)" => return Ok(ModelKind::So44),
            "g2" => return Ok(ModelKind::G2),
            "oscillator" | "osc" => return Ok(ModelKind::Oscillator(1)),
            _ => {}
        }
        let bad = || Error::InvalidInput(format!("unknown model {s:?} (so44, g2, oscillator(n))"));
        let rest = s
            .strip_prefix("oscillator")
            .or_else(|| s.strip_prefix("osc"))
            .ok_or_else(bad)?;
        let rest = rest.trim_start_matches([':', '(']).trim_end_matches(')');
        let n: u32 = rest.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(Error::InvalidInput("oscillator needs n >= 1".into()));
        }
        Ok(ModelKind::Oscillator(n))
    }
}

/// A degree-one generator of the model.
#[derive(Debug, Clone)]
pub struct GeneratorInfo {
    pub label: String,
    /// Multiplier `f_g`, a single monomial with coefficient one.
    pub f: Polynomial,
    pub conjugate: usize,
    /// Lowering partner as written next to `f_g` in the Lie operator.
    pub t: OperatorExpr,
    /// The Hermitian adjoint of `f_g` is `adjoint_sign * T_{conjugate}`.
    pub adjoint_sign: Rational,
}

impl GeneratorInfo {
    pub fn monomial(&self) -> &Monomial {
        self.f.terms().next().expect("generator is a monomial").0
    }
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub ctx: Ctx,
    pub generators: Vec<GeneratorInfo>,
    pub compact_ops: Vec<OperatorExpr>,
    pub compact_labels: Vec<String>,
    /// `(X, Y)` with `B(X s, t) = B(s, Y t)`, indices into `compact_ops`.
    pub compact_adjoints: Vec<(usize, usize)>,
    /// Full operator list spanning the Lie algebra.
    pub lie_ops: Vec<OperatorExpr>,
    pub lie_labels: Vec<String>,
    /// Indices in `lie_ops` of the raising and lowering members of an
    /// `sl2` triple.
    pub sl2: (usize, usize),
    /// Energy operator, acting on level `n` by `r0 + n`.
    pub grading: OperatorExpr,
    pub r0: Rational,
    pub vacuum: Monomial,
}

fn mono(exps: Vec<u32>) -> Monomial {
    Monomial::from_exponents(exps)
}

fn monomials_of_degree(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return if deg == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=deg).rev() {
        for mut rest in monomials_of_degree(nvars - 1, deg - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn x_dx(ctx: &Ctx, x: usize, d: usize) -> OperatorExpr {
    let mut e = vec![0; ctx.len()];
    e[x] = 1;
    OperatorExpr::Mul(Polynomial::monomial(ctx, mono(e))).compose(OperatorExpr::Deriv(vec![d]))
}

/// `E = x_a d_b`, `F = x_b d_a`, `H = x_a d_a - x_b d_b` for a pair of
/// variables; appended with their adjoint pairing.
fn push_sl2(parts: &mut Parts, ctx: &Ctx, a: usize, b: usize, tag: &str) {
    let k = parts.compact.len();
    parts.compact.push(x_dx(ctx, a, b));
    parts.compact.push(x_dx(ctx, b, a));
    parts.compact.push(x_dx(ctx, a, a).minus(x_dx(ctx, b, b)));
    parts.labels.push(format!("E{tag}"));
    parts.labels.push(format!("F{tag}"));
    parts.labels.push(format!("H{tag}"));
    parts.adjoints.extend([(k, k + 1), (k + 1, k), (k + 2, k + 2)]);
}

#[derive(Default)]
struct Parts {
    compact: Vec<OperatorExpr>,
    labels: Vec<String>,
    adjoints: Vec<(usize, usize)>,
}

/// `kappa / (beta (beta + 1))` applied after differentiating along `word`.
fn lowering(word: Vec<usize>, kappa: Rational) -> OperatorExpr {
    OperatorExpr::Compose(vec![
        OperatorExpr::Scalar(kappa),
        OperatorExpr::grade_div("beta", Rational::zero(), Rational::one()),
        OperatorExpr::grade_div("beta", Rational::one(), Rational::one()),
        OperatorExpr::Deriv(word),
    ])
}

fn word_of(exps: &[u32]) -> Vec<usize> {
    exps.iter()
        .enumerate()
        .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    kind: ModelKind,
    ctx: Ctx,
    parts: Parts,
    generators: Vec<GeneratorInfo>,
    sl2_gens: (usize, usize),
    grading: OperatorExpr,
    r0: Rational,
    vacuum: Monomial,
) -> ModelSpec {
    let mut lie_ops = parts.compact.clone();
    let mut lie_labels = parts.labels.clone();
    for g in &generators {
        lie_ops.push(OperatorExpr::Mul(g.f.clone()).plus(g.t.clone()));
        lie_labels.push(format!("pi[{}]", g.label));
    }
    let off = parts.compact.len();
    ModelSpec {
        kind,
        ctx,
        generators,
        compact_ops: parts.compact,
        compact_labels: parts.labels,
        compact_adjoints: parts.adjoints,
        lie_ops,
        lie_labels,
        sl2: (off + sl2_gens.0, off + sl2_gens.1),
        grading,
        r0,
        vacuum,
    }
}

fn build_oscillator(n: u32) -> Result<ModelSpec> {
    let n = n as usize;
    let names: Vec<String> = (1..=n).map(|j| format!("z{j}")).collect();
    let ctx = VariableContext::new(&names)?
        .with_grading("E", vec![Rational::one(); n], Rational::new(n as i64, 2))?
        .into_ctx();
    let var = |j: usize| {
        let mut e = vec![0; n];
        e[j] = 1;
        Polynomial::monomial(&ctx, mono(e))
    };

    let mut parts = Parts::default();
    let mut index = HashMap::new();
    for j in 0..n {
        for k in 0..n {
            let mut op = x_dx(&ctx, j, k);
            if j == k {
                op = op.plus(OperatorExpr::Scalar(Rational::half()));
            }
            index.insert((j, k), parts.compact.len());
            parts.compact.push(op);
            parts.labels.push(format!("z{}d{}", j + 1, k + 1));
        }
    }
    for j in 0..n {
        for k in 0..n {
            parts.adjoints.push((index[&(j, k)], index[&(k, j)]));
        }
    }

    let generators: Vec<GeneratorInfo> = (0..n)
        .map(|j| GeneratorInfo {
            label: format!("z{}", j + 1),
            f: var(j),
            conjugate: j,
            t: OperatorExpr::Deriv(vec![j]),
            adjoint_sign: Rational::one(),
        })
        .collect();

    // Quadratic operators: the generator list itself is Heisenberg, not part
    // of the symplectic algebra.
    let mut lie_ops = parts.compact.clone();
    let mut lie_labels = parts.labels.clone();
    let mut raise = None;
    let mut lower = None;
    for j in 0..n {
        for k in j..n {
            if j == 0 && k == 0 {
                raise = Some(lie_ops.len());
            }
            lie_ops.push(OperatorExpr::Mul(var(j).mul(&var(k))?));
            lie_labels.push(format!("z{}z{}", j + 1, k + 1));
        }
    }
    for j in 0..n {
        for k in j..n {
            if j == 0 && k == 0 {
                lower = Some(lie_ops.len());
            }
            lie_ops.push(OperatorExpr::Deriv(vec![j, k]));
            lie_labels.push(format!("d{}d{}", j + 1, k + 1));
        }
    }

    let grading = OperatorExpr::grade_op(&ctx, "E")?;
    Ok(ModelSpec {
        kind: ModelKind::Oscillator(n as u32),
        generators,
        compact_ops: parts.compact,
        compact_labels: parts.labels,
        compact_adjoints: parts.adjoints,
        lie_ops,
        lie_labels,
        sl2: (raise.unwrap(), lower.unwrap()),
        grading,
        r0: Rational::new(n as i64, 2),
        vacuum: Monomial::one(n),
        ctx,
    })
}

fn build_so44() -> Result<ModelSpec> {
    let names: Vec<String> = (1..=4)
        .flat_map(|p| (1..=2).map(move |i| format!("x{p}{i}")))
        .collect();
    let mut beta = vec![Rational::zero(); 8];
    beta[0] = Rational::one();
    beta[1] = Rational::one();
    let ctx = VariableContext::new(&names)?
        .with_grading("beta", beta, Rational::one())?
        .into_ctx();
    let var = |p: usize, i: usize| 2 * (p - 1) + (i - 1);

    let mut parts = Parts::default();
    for p in 1..=4 {
        push_sl2(&mut parts, &ctx, var(p, 1), var(p, 2), &p.to_string());
    }

    let mut generators = Vec::new();
    let mut code = HashMap::new();
    for i in 1..=2usize {
        for j in 1..=2usize {
            for k in 1..=2usize {
                for l in 1..=2usize {
                    code.insert((i, j, k, l), generators.len());
                    let mut m = vec![0u32; 8];
                    let mut bar = vec![0u32; 8];
                    for (p, s) in [(1, i), (2, j), (3, k), (4, l)] {
                        m[var(p, s)] = 1;
                        bar[var(p, 3 - s)] = 1;
                    }
                    let sign: i64 = if (i + j + k + l) % 2 == 0 { 1 } else { -1 };
                    generators.push(GeneratorInfo {
                        label: format!("{i}{j}{k}{l}"),
                        f: Polynomial::monomial(&ctx, mono(m)),
                        conjugate: 0,
                        t: lowering(word_of(&bar), Rational::from_int(-sign)),
                        adjoint_sign: Rational::from_int(-sign),
                    });
                }
            }
        }
    }
    for (&(i, j, k, l), &g) in &code {
        generators[g].conjugate = code[&(3 - i, 3 - j, 3 - k, 3 - l)];
    }
    let grading = OperatorExpr::grade_op(&ctx, "beta")?;
    let sl2 = (code[&(1, 1, 1, 1)], code[&(2, 2, 2, 2)]);
    Ok(finish(
        ModelKind::So44,
        ctx,
        parts,
        generators,
        sl2,
        grading,
        Rational::one(),
        Monomial::one(8),
    ))
}

fn build_g2() -> Result<ModelSpec> {
    let ctx = VariableContext::new(&["u1", "u2", "x1", "x2"])?
        .with_grading(
            "beta",
            vec![Rational::zero(), Rational::zero(), Rational::one(), Rational::one()],
            Rational::one(),
        )?
        .into_ctx();
    let (u, x) = (|i: usize| i - 1, |j: usize| j + 1);

    let mut parts = Parts::default();
    push_sl2(&mut parts, &ctx, u(1), u(2), "u");
    push_sl2(&mut parts, &ctx, x(1), x(2), "x");

    let kappa = Rational::new(1, 27);
    let mut generators = Vec::new();
    let mut code = HashMap::new();
    for cubic in [true, false] {
        for i in 1..=2usize {
            for j in 1..=2usize {
                let i2 = 3 - i;
                let j2 = 3 - j;
                let mut m = vec![0u32; 4];
                let mut bar = vec![0u32; 4];
                if cubic {
                    m[u(i)] = 3;
                    bar[u(i2)] = 3;
                } else {
                    m[u(i)] = 2;
                    m[u(i2)] = 1;
                    bar[u(i2)] = 2;
                    bar[u(i)] = 1;
                }
                m[x(j)] = 1;
                bar[x(j2)] = 1;
                // The mixed words pick up an extra sign under u_i -> +-d/du_{i'}.
                let parity = (i + j) % 2 == 0;
                let sign: i64 = if parity == cubic { 1 } else { -1 };
                let label = if cubic {
                    format!("u{i}^3*x{j}")
                } else {
                    format!("u{i}^2*u{i2}*x{j}")
                };
                code.insert((cubic, i, j), generators.len());
                generators.push(GeneratorInfo {
                    label,
                    f: Polynomial::monomial(&ctx, mono(m)),
                    conjugate: 0,
                    t: lowering(word_of(&bar), -&kappa * Rational::from_int(sign)),
                    adjoint_sign: Rational::from_int(-sign),
                });
            }
        }
    }
    for (&(cubic, i, j), &g) in &code {
        generators[g].conjugate = code[&(cubic, 3 - i, 3 - j)];
    }
    let grading = OperatorExpr::grade_op(&ctx, "beta")?;
    let sl2 = (code[&(true, 1, 1)], code[&(true, 2, 2)]);
    Ok(finish(
        ModelKind::G2,
        ctx,
        parts,
        generators,
        sl2,
        grading,
        Rational::one(),
        mono(vec![2, 0, 0, 0]),
    ))
}

pub fn build_model(kind: ModelKind) -> Result<ModelSpec> {
    match kind {
        ModelKind::Oscillator(0) => Err(Error::InvalidInput("oscillator needs n >= 1".into())),
        ModelKind::Oscillator(n) => build_oscillator(n),
        ModelKind::So44 => build_so44(),
        ModelKind::G2 => build_g2(),
    }
}

impl ModelSpec {
    /// Level of a monomial, or `None` when it is not in the model space.
    pub fn level_of(&self, m: &Monomial) -> Option<u32> {
        let e = m.exponents();
        match self.kind {
            ModelKind::Oscillator(_) => Some(m.degree()),
            ModelKind::So44 => {
                let n = e[0] + e[1];
                (1..4)
                    .all(|p| e[2 * p] + e[2 * p + 1] == n)
                    .then_some(n)
            }
            ModelKind::G2 => {
                let n = e[2] + e[3];
                (e[0] + e[1] == 3 * n + 2).then_some(n)
            }
        }
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.level_of(m).is_some()
    }

    /// All model monomials of level `n`, in ascending monomial order.
    pub fn level_basis(&self, n: u32) -> Vec<Monomial> {
        let mut out: Vec<Monomial> = match self.kind {
            ModelKind::Oscillator(k) => monomials_of_degree(k as usize, n).into_iter().map(mono).collect(),
            ModelKind::So44 => {
                let mut out = vec![vec![]];
                for _ in 0..4 {
                    out = out
                        .into_iter()
                        .flat_map(|prefix: Vec<u32>| {
                            (0..=n).rev().map(move |a| {
                                let mut v = prefix.clone();
                                v.extend([a, n - a]);
                                v
                            })
                        })
                        .collect();
                }
                out.into_iter().map(mono).collect()
            }
            ModelKind::G2 => {
                let du = 3 * n + 2;
                (0..=du)
                    .rev()
                    .flat_map(|a| (0..=n).rev().map(move |b| mono(vec![a, du - a, b, n - b])))
                    .collect()
            }
        };
        out.sort();
        out
    }

    /// Levels `0..=max_level` concatenated.
    pub fn truncated_basis(&self, max_level: u32) -> Vec<Monomial> {
        (0..=max_level).flat_map(|n| self.level_basis(n)).collect()
    }

    /// Monomial spanning the highest-weight line at level `n`.
    pub fn hw_monomial(&self, n: u32) -> Monomial {
        let e = match self.kind {
            ModelKind::Oscillator(k) => {
                let mut e = vec![0; k as usize];
                e[0] = n;
                e
            }
            ModelKind::So44 => vec![n, 0, n, 0, n, 0, n, 0],
            ModelKind::G2 => vec![3 * n + 2, 0, n, 0],
        };
        mono(e)
    }

    /// Registry case and twist whose ladder data this model realizes.
    pub fn ladder_case(&self) -> Option<(&'static str, Twist)> {
        match self.kind {
            ModelKind::So44 => Some(("SO:4,4", Twist::Lambda0)),
            ModelKind::G2 => Some(("G2:2", Twist::Lambda0)),
            ModelKind::Oscillator(_) => None,
        }
    }

    /// `s` as a polynomial in this model's context.
    pub fn poly(&self, m: &Monomial) -> Polynomial {
        Polynomial::monomial(&self.ctx, m.clone())
    }

    /// The adjoint partner `A_g = adjoint_sign * T_{conj(g)}` of `f_g`.
    pub fn adjoint_partner(&self, g: usize) -> OperatorExpr {
        let info = &self.generators[g];
        self.generators[info.conjugate]
            .t
            .clone()
            .scale(info.adjoint_sign.clone())
    }
}

// Sparse row-major matrices over the rationals.
type SparseRow = BTreeMap<usize, Rational>;

fn axpy(y: &mut SparseRow, a: &Rational, x: &SparseRow) {
    if a.is_zero() {
        return;
    }
    for (k, v) in x {
        let e = y.entry(*k).or_insert_with(Rational::zero);
        *e += a * v;
        if e.is_zero() {
            y.remove(k);
        }
    }
}

/// Rows indexed by codomain basis, from an operator matrix.
fn rows_of(m: &crate::opcalc::OperatorMatrix) -> Vec<SparseRow> {
    let mut rows = vec![SparseRow::new(); m.rows.len()];
    for (&(i, j), v) in m.nonzero() {
        rows[i].insert(j, v.clone());
    }
    rows
}

/// Columns indexed by domain basis: `cols[j]` maps codomain index to value.
fn cols_of(m: &crate::opcalc::OperatorMatrix) -> Vec<SparseRow> {
    let mut cols = vec![SparseRow::new(); m.cols.len()];
    for (&(i, j), v) in m.nonzero() {
        cols[j].insert(i, v.clone());
    }
    cols
}

#[derive(Debug, Clone, Serialize)]
pub struct Sl2Check {
    pub raising: String,
    pub lowering: String,
    pub in_compact_span: bool,
    pub diagonal: bool,
    pub nonzero: bool,
    /// `[h, e] = lambda e`; `[h, ebar] = -lambda ebar` is part of `passed`.
    pub lambda: Option<Rational>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub model: String,
    pub max_level: u32,
    pub basis_size: usize,
    pub count: usize,
    pub rank: usize,
    pub closed: bool,
    /// Structure constants agree between `max_level - 1` and `max_level`.
    pub stable: bool,
    pub failures: Vec<(String, String)>,
    pub degree_contract: bool,
    pub grading_ok: bool,
    pub sl2: Sl2Check,
}

impl BracketReport {
    pub fn passed(&self) -> bool {
        self.closed
            && self.rank == self.count
            && self.stable
            && self.degree_contract
            && self.grading_ok
            && self.sl2.passed
    }
}

/// Generators raise level by one, their partners lower by one (and kill
/// level 0), compact operators preserve level.
fn degree_contract(m: &ModelSpec, max_level: u32) -> Result<bool> {
    let levels: Vec<Vec<Monomial>> = (0..=max_level + 1).map(|n| m.level_basis(n)).collect();
    for n in 0..=max_level as usize {
        for op in &m.compact_ops {
            if !matrix_on_basis(op, &m.ctx, &levels[n], None)?.is_closed() {
                return Ok(false);
            }
        }
        for g in &m.generators {
            let up = OperatorExpr::Mul(g.f.clone());
            if !matrix_on_basis(&up, &m.ctx, &levels[n], Some(&levels[n + 1]))?.is_closed() {
                return Ok(false);
            }
            let down: &[Monomial] = if n == 0 { &[] } else { &levels[n - 1] };
            if !matrix_on_basis(&g.t, &m.ctx, &levels[n], Some(down))?.is_closed() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The grading acts on level `n` as the scalar `r0 + n`.
fn grading_ok(m: &ModelSpec, max_level: u32) -> Result<bool> {
    for n in 0..=max_level {
        let basis = m.level_basis(n);
        let mat = matrix_on_basis(&m.grading, &m.ctx, &basis, None)?;
        let want = &m.r0 + &Rational::from_int(n as i64);
        if !mat.is_closed() || !mat.is_diagonal() {
            return Ok(false);
        }
        if (0..basis.len()).any(|i| mat.get(i, i) != want) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn sl2_check(m: &ModelSpec, basis: &[Monomial]) -> Result<Sl2Check> {
    let (ei, fi) = m.sl2;
    let e = &m.lie_ops[ei];
    let f = &m.lie_ops[fi];
    let h = commutator(e, f);
    let compact = OperatorSpan::new(&m.ctx, &m.compact_ops, basis)?;
    let in_compact_span = compact.express(&h)?.is_some();
    let mat = matrix_on_basis(&h, &m.ctx, basis, None)?;
    let diagonal = mat.is_closed() && mat.is_diagonal();
    let nonzero = mat.nonzero().next().is_some();
    let lambda = OperatorSpan::new(&m.ctx, std::slice::from_ref(e), basis)?
        .express(&commutator(&h, e))?
        .map(|c| c[0].clone());
    let mu = OperatorSpan::new(&m.ctx, std::slice::from_ref(f), basis)?
        .express(&commutator(&h, f))?
        .map(|c| c[0].clone());
    let opposite = match (&lambda, &mu) {
        (Some(l), Some(u)) => !l.is_zero() && *u == -l,
        _ => false,
    };
    Ok(Sl2Check {
        raising: m.lie_labels[ei].clone(),
        lowering: m.lie_labels[fi].clone(),
        in_compact_span,
        diagonal,
        nonzero,
        lambda,
        passed: in_compact_span && diagonal && nonzero && opposite,
    })
}

/// Closure, rank and structure-constant stability of the model's Lie
/// operators on levels `0..=max_level`, with the degree contract, the
/// grading eigenvalues and an `sl2` triple check.
pub fn verify_brackets(m: &ModelSpec, max_level: u32) -> Result<BracketReport> {
    if max_level < 2 {
        return Err(Error::InvalidInput("bracket verification needs at least 2 levels".into()));
    }
    let basis = m.truncated_basis(max_level);
    let top = span_structure(&m.ctx, &m.lie_ops, &basis)?;
    let below = span_structure(&m.ctx, &m.lie_ops, &m.truncated_basis(max_level - 1))?;
    let stable = match (&top.constants, &below.constants) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    let failures = top
        .failures
        .iter()
        .map(|&(i, j)| (m.lie_labels[i].clone(), m.lie_labels[j].clone()))
        .collect();
    Ok(BracketReport {
        model: m.kind.to_string(),
        max_level,
        basis_size: basis.len(),
        count: top.count,
        rank: top.rank,
        closed: top.closed,
        stable,
        failures,
        degree_contract: degree_contract(m, max_level)?,
        grading_ok: grading_ok(m, max_level)?,
        sl2: sl2_check(m, &basis)?,
    })
}

/// Invariant form restricted to one level, in the level basis.
#[derive(Debug, Clone)]
pub struct LevelGram {
    pub level: u32,
    pub basis: Vec<Monomial>,
    rows: Vec<SparseRow>,
}

impl LevelGram {
    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.rows[i].get(&j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.basis.binary_search(m).ok()
    }

    pub fn norm_of(&self, m: &Monomial) -> Option<Rational> {
        self.index_of(m).map(|i| self.get(i, i))
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, r)| r.keys().all(|&j| j == i))
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct GramReport {
    pub model: String,
    pub levels: Vec<LevelGram>,
    pub well_defined: bool,
    pub symmetric: bool,
    pub positive: bool,
    pub adjoint: bool,
    pub compact_invariant: bool,
    pub failures: Vec<String>,
}

impl GramReport {
    pub fn passed(&self) -> bool {
        self.well_defined && self.symmetric && self.positive && self.adjoint && self.compact_invariant
    }
}

/// Unique solution of a square-or-tall linear system, if there is one.
fn solve_unique(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>, unknowns: usize) -> Option<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..unknowns {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        b[row] = &b[row] * &inv;
        let pivot = a[row].clone();
        for (r, line) in a.iter_mut().enumerate() {
            if r != row && !line[col].is_zero() {
                let f = line[col].clone();
                for (x, y) in line.iter_mut().zip(&pivot).take(unknowns) {
                    *x -= &(&f * y);
                }
                let d = &f * &b[row];
                b[r] -= &d;
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() < unknowns || b[row..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); unknowns];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = b[r].clone();
    }
    Some(x)
}

fn level0_gram(m: &ModelSpec) -> Result<LevelGram> {
    let basis = m.level_basis(0);
    let d = basis.len();
    let s0 = basis
        .binary_search(&m.vacuum)
        .map_err(|_| Error::Consistency("vacuum monomial is not at level 0".into()))?;
    let mats = m
        .compact_ops
        .iter()
        .map(|op| {
            let mat = matrix_on_basis(op, &m.ctx, &basis, None)?;
            mat.require_closed(&m.ctx)?;
            Ok(mat.to_dense())
        })
        .collect::<Result<Vec<_>>>()?;
    let unknown = |i: usize, j: usize| i * d + j;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &(x, y) in &m.compact_adjoints {
        let (xm, ym) = (&mats[x], &mats[y]);
        for i in 0..d {
            for j in 0..d {
                // sum_k X[k][i] G[k][j] - sum_k G[i][k] Y[k][j] = 0
                let mut eq = vec![Rational::zero(); d * d];
                for k in 0..d {
                    eq[unknown(k, j)] += &xm[k][i];
                    eq[unknown(i, k)] -= &ym[k][j];
                }
                rows.push(eq);
                rhs.push(Rational::zero());
            }
        }
    }
    let mut norm = vec![Rational::zero(); d * d];
    norm[unknown(s0, s0)] = Rational::one();
    rows.push(norm);
    rhs.push(Rational::one());
    let sol = solve_unique(rows, rhs, d * d).ok_or_else(|| {
        Error::Consistency("level-0 form is not determined by the compact operators".into())
    })?;
    let rows = (0..d)
        .map(|i| {
            (0..d)
                .filter(|&j| !sol[unknown(i, j)].is_zero())
                .map(|j| (j, sol[unknown(i, j)].clone()))
                .collect()
        })
        .collect();
    Ok(LevelGram { level: 0, basis, rows })
}

/// `G[i] * M` for the row-major sparse `M` (rows indexed like `G`'s columns).
fn row_times(row: &SparseRow, m: &[SparseRow]) -> SparseRow {
    let mut out = SparseRow::new();
    for (k, v) in row {
        axpy(&mut out, v, &m[*k]);
    }
    out
}

/// Exact positivity test: LDL on each connected block of the sparsity
/// pattern, requiring every pivot to be positive.
fn positive_definite(g: &LevelGram) -> bool {
    let n = g.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for (i, r) in g.rows.iter().enumerate() {
        for &j in r.keys() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        blocks.entry(r).or_default().push(i);
    }
    blocks.values().all(|idx| {
        let mut a: Vec<Vec<Rational>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| g.get(i, j)).collect())
            .collect();
        let k = idx.len();
        for p in 0..k {
            if !a[p][p].is_positive() {
                return false;
            }
            let (top, rest) = a.split_at_mut(p + 1);
            let pivot = &top[p];
            for line in rest.iter_mut().take(k - p - 1) {
                if line[p].is_zero() {
                    continue;
                }
                let f = &line[p] / &pivot[p];
                for (x, y) in line[p..k].iter_mut().zip(&pivot[p..k]) {
                    *x -= &(&f * y);
                }
            }
        }
        true
    })
}

/// Solves for the invariant form on levels `0..=max_level`.
///
/// Level 0 comes from the compact adjoint relations and `B(s0, s0) = 1`.
/// Each level-`n` basis monomial is written as `f_g c` with `c` at level
/// `n-1`, and its row is `B(c, A_g .)` where `A_g` is the adjoint partner of
/// `f_g`. The report then checks that every other factorization gives the
/// same row, symmetry, positivity, adjointness `f_g^† = A_g` between
/// consecutive levels and invariance under the compact operators.
pub fn solve_gram(m: &ModelSpec, max_level: u32) -> Result<GramReport> {
    if max_level < 1 {
        return Err(Error::InvalidInput("Gram solve needs at least 1 level".into()));
    }
    let mut failures = Vec::new();
    let mut well_defined = true;
    let mut levels = vec![level0_gram(m)?];
    let ngen = m.generators.len();
    let partners: Vec<OperatorExpr> = (0..ngen).map(|g| m.adjoint_partner(g)).collect();

    // down[n][g]: rows (level n-1) of A_g on level n.
    let mut down: Vec<Vec<Vec<SparseRow>>> = vec![vec![]];
    for n in 1..=max_level {
        let prev = &levels[n as usize - 1];
        let basis = m.level_basis(n);
        let a_rows = partners
            .par_iter()
            .map(|a| {
                let mat = matrix_on_basis(a, &m.ctx, &basis, Some(&prev.basis))?;
                mat.require_closed(&m.ctx)?;
                Ok(rows_of(&mat))
            })
            .collect::<Result<Vec<_>>>()?;

        let rows_and_checks = basis
            .par_iter()
            .map(|b| {
                let factorizations: Vec<(usize, usize)> = m
                    .generators
                    .iter()
                    .enumerate()
                    .filter_map(|(g, info)| {
                        let c = b.div(info.monomial())?;
                        prev.index_of(&c).map(|ci| (g, ci))
                    })
                    .collect();
                let Some(&(g0, c0)) = factorizations.first() else {
                    return (SparseRow::new(), vec![format!(
                        "level {n}: {} has no factorization",
                        m.ctx.format_monomial(b)
                    )]);
                };
                let row = row_times(&prev.rows[c0], &a_rows[g0]);
                let mut bad = Vec::new();
                for &(g, c) in &factorizations[1..] {
                    if row_times(&prev.rows[c], &a_rows[g]) != row {
                        bad.push(format!(
                            "level {n}: factorizations of {} through {} and {} disagree",
                            m.ctx.format_monomial(b),
                            m.generators[g0].label,
                            m.generators[g].label
                        ));
                    }
                }
                (row, bad)
            })
            .collect::<Vec<_>>();
        let mut rows = Vec::with_capacity(basis.len());
        for (row, bad) in rows_and_checks {
            if !bad.is_empty() {
                well_defined = false;
                failures.extend(bad);
            }
            rows.push(row);
        }
        levels.push(LevelGram { level: n, basis, rows });
        down.push(a_rows);
    }

    let mut symmetric = true;
    let mut positive = true;
    for g in &levels {
        let sym = g
            .rows
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().all(|(&j, v)| g.get(j, i) == *v));
        if !sym {
            symmetric = false;
            failures.push(format!("level {}: form is not symmetric", g.level));
        }
        if !positive_definite(g) {
            positive = false;
            failures.push(format!("level {}: form is not positive definite", g.level));
        }
    }

    // f_g^† = A_g: for s at level n-1 and t at level n,
    // B(f_g s, t) = B(s, A_g t).
    let mut adjoint = true;
    for n in 1..=max_level as usize {
        let (lo, hi) = (&levels[n - 1], &levels[n]);
        let bad = (0..ngen)
            .into_par_iter()
            .map(|g| {
                let up = matrix_on_basis(&OperatorExpr::Mul(m.generators[g].f.clone()), &m.ctx, &lo.basis, Some(&hi.basis))?;
                up.require_closed(&m.ctx)?;
                let cols = cols_of(&up);
                for (j, col) in cols.iter().enumerate() {
                    let lhs = row_times(col, &hi.rows);
                    let rhs = row_times(&lo.rows[j], &down[n][g]);
                    if lhs != rhs {
                        return Ok(Some(format!(
                            "level {n}: f[{}] is not adjoint to its partner on {}",
                            m.generators[g].label,
                            m.ctx.format_monomial(&lo.basis[j])
                        )));
                    }
                }
                Ok(None)
            })
            .collect::<Result<Vec<_>>>()?;
        for msg in bad.into_iter().flatten() {
            adjoint = false;
            failures.push(msg);
        }
    }

    // B(X s, t) = B(s, Y t) on every level.
    let mut compact_invariant = true;
    for g in &levels {
        for &(x, y) in &m.compact_adjoints {
            let xm = matrix_on_basis(&m.compact_ops[x], &m.ctx, &g.basis, None)?;
            let ym = matrix_on_basis(&m.compact_ops[y], &m.ctx, &g.basis, None)?;
            let (xc, yr) = (cols_of(&xm), rows_of(&ym));
            let ok = (0..g.dim()).all(|i| row_times(&xc[i], &g.rows) == row_times(&g.rows[i], &yr));
            if !ok {
                compact_invariant = false;
                failures.push(format!(
                    "level {}: form is not invariant under {} / {}",
                    g.level, m.compact_labels[x], m.compact_labels[y]
                ));
            }
        }
    }

    Ok(GramReport {
        model: m.kind.to_string(),
        levels,
        well_defined,
        symmetric,
        positive,
        adjoint,
        compact_invariant,
        failures,
    })
}

fn factorial(n: u32) -> Rational {
    (1..=n as i64).map(Rational::from_int).product()
}

/// Norm of the level-`n` highest-weight monomial divided by `(n!)^2`.
pub fn model_hw_norm(m: &ModelSpec, report: &GramReport, n: u32) -> Result<Rational> {
    let g = report
        .levels
        .get(n as usize)
        .ok_or_else(|| Error::InvalidInput(format!("Gram was not solved through level {n}")))?;
    let norm = g
        .norm_of(&m.hw_monomial(n))
        .ok_or_else(|| Error::Consistency("highest-weight monomial missing from basis".into()))?;
    let f = factorial(n);
    Ok(norm / (&f * &f))
}

/// Compares [`model_hw_norm`] with the ladder norm of the matching case.
pub fn hw_norm_agrees(m: &ModelSpec, report: &GramReport, n: u32) -> Result<Rational> {
    let (id, twist) = m
        .ladder_case()
        .ok_or_else(|| Error::Unsupported(format!("{} has no ladder case", m.kind)))?;
    let c = crate::jordan::lookup_case(id)?;
    let bm = crate::ladder::evaluate_bundles(&c)
        .into_iter()
        .find(|b| b.twist == twist && b.valid)
        .ok_or_else(|| Error::Consistency(format!("{id} has no valid {twist} bundle")))?;
    let (_, want) = crate::ladder::ladder_norms(&bm.r0, bm.a.as_ref().unwrap(), bm.b.as_ref().unwrap(), n)?;
    let got = model_hw_norm(m, report, n)?;
    if got == want {
        Ok(got)
    } else {
        Err(Error::Consistency(format!(
            "{}: level {n} Gram norm {got} differs from ladder norm {want}",
            m.kind
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn model_sizes() {
        let m = build_model(ModelKind::So44).unwrap();
        assert_eq!((m.ctx.len(), m.generators.len(), m.compact_ops.len(), m.lie_ops.len()), (8, 16, 12, 28));
        let m = build_model(ModelKind::G2).unwrap();
        assert_eq!((m.ctx.len(), m.generators.len(), m.compact_ops.len(), m.lie_ops.len()), (4, 8, 6, 14));
        let m = build_model(ModelKind::Oscillator(2)).unwrap();
        assert_eq!(m.lie_ops.len(), 10);
        assert!(build_model(ModelKind::Oscillator(0)).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("so44".parse::<ModelKind>().unwrap(), ModelKind::So44);
        assert_eq!("oscillator(3)".parse::<ModelKind>().unwrap(), ModelKind::Oscillator(3));
        assert_eq!("oscillator:2".parse::<ModelKind>().unwrap(), ModelKind::Oscillator(2));
        assert!("f4".parse::<ModelKind>().is_err());
    }

    #[test]
    fn bases() {
        let m = build_model(ModelKind::So44).unwrap();
        assert_eq!(m.level_basis(1).len(), 16);
        assert_eq!(m.level_basis(2).len(), 81);
        assert!(m.level_basis(2).iter().all(|b| m.level_of(b) == Some(2)));
        let g = build_model(ModelKind::G2).unwrap();
        let names: Vec<String> = g.level_basis(0).iter().map(|b| g.ctx.format_monomial(b)).collect();
        assert_eq!(names.len(), 3);
        for want in ["u1^2", "u1*u2", "u2^2"] {
            assert!(names.contains(&want.to_string()), "{names:?}");
        }
        let o = build_model(ModelKind::Oscillator(2)).unwrap();
        assert_eq!(o.level_basis(3).len(), 4);
    }

    #[test]
    fn conjugates_are_involutive() {
        for kind in [ModelKind::So44, ModelKind::G2] {
            let m = build_model(kind).unwrap();
            for (g, info) in m.generators.iter().enumerate() {
                assert_eq!(m.generators[info.conjugate].conjugate, g);
                assert_ne!(info.conjugate, g);
            }
        }
    }

    #[test]
    fn so44_level_one_gram() {
        let m = build_model(ModelKind::So44).unwrap();
        let rep = solve_gram(&m, 1).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        let g1 = &rep.levels[1];
        assert!(g1.is_diagonal());
        for i in 0..16 {
            assert_eq!(g1.get(i, i), q(1, 2));
        }
    }

    #[test]
    fn g2_level_zero_gram() {
        let m = build_model(ModelKind::G2).unwrap();
        let rep = solve_gram(&m, 1).unwrap();
        let g0 = &rep.levels[0];
        let u = |s: &str| m.ctx.parse_monomial(s).unwrap();
        assert_eq!(g0.norm_of(&u("u1^2")), Some(q(1, 1)));
        assert_eq!(g0.norm_of(&u("u1*u2")), Some(q(1, 2)));
        assert_eq!(g0.norm_of(&u("u2^2")), Some(q(1, 1)));
        assert!(g0.is_diagonal());
    }

    #[test]
    fn oscillator_closure_and_norms() {
        let m = build_model(ModelKind::Oscillator(1)).unwrap();
        let rep = verify_brackets(&m, 6).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.rank, 3);
        let gram = solve_gram(&m, 5).unwrap();
        assert!(gram.passed());
        let mut f = Rational::one();
        for n in 0..=5u32 {
            if n > 0 {
                f = f * Rational::from_int(n as i64);
            }
            assert_eq!(gram.levels[n as usize].norm_of(&m.hw_monomial(n)), Some(f.clone()));
        }
    }

    #[test]
    fn small_hw_norms() {
        for kind in [ModelKind::So44, ModelKind::G2] {
            let m = build_model(kind).unwrap();
            let rep = solve_gram(&m, 2).unwrap();
            assert!(rep.passed(), "{kind}: {:?}", rep.failures);
            for n in 0..=2 {
                hw_norm_agrees(&m, &rep, n).unwrap();
            }
        }
        let m = build_model(ModelKind::G2).unwrap();
        let rep = solve_gram(&m, 2).unwrap();
        assert_eq!(model_hw_norm(&m, &rep, 2).unwrap(), q(280, 243));
        assert_eq!(model_hw_norm(&m, &rep, 0).unwrap(), q(1, 1));
    }

    #[test]
    fn g2_closes() {
        let m = build_model(ModelKind::G2).unwrap();
        let rep = verify_brackets(&m, 2).unwrap();
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
        assert!(rep.passed());
        assert_eq!(rep.rank, 14);
    }
}
