//! Linear operators on polynomials.
//!
//! An [`OperatorExpr`] is a small expression tree: leaves multiply by a
//! polynomial, differentiate along a word of variables, scale, or divide
//! each graded component by an affine function of its grade. Interior nodes
//! add, scale and compose. Operators are compared extensionally by their
//! action on a finite monomial basis.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::exactalg::{Ctx, Monomial, Polynomial};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub enum OperatorExpr {
    /// Multiplication by a scalar.
    Scalar(Rational),
    /// Multiplication by a polynomial.
    Mul(Polynomial),
    /// Iterated partial derivative along a word of variable indices.
    Deriv(Vec<usize>),
    /// Divides the grade-`g` component by `c0 + c1 * g`.
    GradeDiv {
        grading: String,
        c0: Rational,
        c1: Rational,
    },
    Sum(Vec<OperatorExpr>),
    Scale(Rational, Box<OperatorExpr>),
    /// `Compose([a, b, c])` is `a . b . c`; `c` acts first.
    Compose(Vec<OperatorExpr>),
}

impl OperatorExpr {
    pub fn identity() -> Self {
        OperatorExpr::Scalar(Rational::one())
    }

    pub fn mul(p: Polynomial) -> Self {
        OperatorExpr::Mul(p)
    }

    pub fn mul_var(ctx: &Ctx, name: &str) -> Result<Self> {
        Ok(OperatorExpr::Mul(Polynomial::var(ctx, name)?))
    }

    pub fn deriv(ctx: &Ctx, word: &[&str]) -> Result<Self> {
        let idx = word
            .iter()
            .map(|n| ctx.index_of(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(OperatorExpr::Deriv(idx))
    }

    /// `1 / (c0 + c1 * grade)` on each graded component.
    pub fn grade_div(grading: &str, c0: Rational, c1: Rational) -> Self {
        OperatorExpr::GradeDiv {
            grading: grading.to_string(),
            c0,
            c1,
        }
    }

    /// The grading operator itself, `c0 + c1 * grade`, as a multiplier on
    /// components. Expressed as a composite so it needs no extra leaf type.
    pub fn grade_op(ctx: &Ctx, grading: &str) -> Result<Self> {
        let g = ctx.grading(grading)?;
        let mut terms = vec![OperatorExpr::Scalar(g.shift.clone())];
        for (i, w) in g.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            if Some(i) == ctx.distinguished() {
                return Err(Error::Unsupported(
                    "grading operator with weight on the half-integer variable".into(),
                ));
            }
            let mut m = vec![0u32; ctx.len()];
            m[i] = 1;
            let x = Polynomial::monomial(ctx, Monomial::from_exponents(m));
            terms.push(OperatorExpr::Scale(
                w.clone(),
                Box::new(OperatorExpr::Compose(vec![
                    OperatorExpr::Mul(x),
                    OperatorExpr::Deriv(vec![i]),
                ])),
            ));
        }
        Ok(OperatorExpr::Sum(terms))
    }

    pub fn scale(self, c: Rational) -> Self {
        OperatorExpr::Scale(c, Box::new(self))
    }

    pub fn compose(self, inner: OperatorExpr) -> Self {
        OperatorExpr::Compose(vec![self, inner])
    }

    pub fn plus(self, other: OperatorExpr) -> Self {
        OperatorExpr::Sum(vec![self, other])
    }

    pub fn minus(self, other: OperatorExpr) -> Self {
        OperatorExpr::Sum(vec![self, other.scale(-Rational::one())])
    }

    pub fn apply(&self, s: &Polynomial) -> Result<Polynomial> {
        apply(self, s)
    }

    pub fn apply_monomial(&self, ctx: &Ctx, m: &Monomial) -> Result<Polynomial> {
        apply(self, &Polynomial::monomial(ctx, m.clone()))
    }
}

pub fn apply(op: &OperatorExpr, s: &Polynomial) -> Result<Polynomial> {
    let ctx = s.ctx();
    match op {
        OperatorExpr::Scalar(c) => Ok(s.scale(c)),
        OperatorExpr::Mul(p) => p.mul(s),
        OperatorExpr::Deriv(word) => s.diff_indices(word),
        OperatorExpr::GradeDiv { grading, c0, c1 } => {
            let g = ctx.grading(grading)?;
            let mut out = Polynomial::zero(ctx);
            for (m, c) in s.terms() {
                let value = c0 + &(c1 * &ctx.grade_with(m, g));
                if value.is_zero() {
                    return Err(Error::SingularGrade {
                        monomial: ctx.format_monomial(m),
                        grading: grading.clone(),
                    });
                }
                out.add_term(m.clone(), c / &value);
            }
            Ok(out)
        }
        OperatorExpr::Sum(parts) => {
            let mut out = Polynomial::zero(ctx);
            for p in parts {
                out.add_scaled(&apply(p, s)?, &Rational::one())?;
            }
            Ok(out)
        }
        OperatorExpr::Scale(c, inner) => Ok(apply(inner, s)?.scale(c)),
        OperatorExpr::Compose(chain) => {
            let mut cur = s.clone();
            for f in chain.iter().rev() {
                if cur.is_zero() {
                    break;
                }
                cur = apply(f, &cur)?;
            }
            Ok(cur)
        }
    }
}

/// `a . b - b . a`.
pub fn commutator(a: &OperatorExpr, b: &OperatorExpr) -> OperatorExpr {
    OperatorExpr::Sum(vec![
        OperatorExpr::Compose(vec![a.clone(), b.clone()]),
        OperatorExpr::Scale(
            -Rational::one(),
            Box::new(OperatorExpr::Compose(vec![b.clone(), a.clone()])),
        ),
    ])
}

/// Exact matrix of an operator on an explicit monomial basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub rows: Vec<Monomial>,
    pub cols: Vec<Monomial>,
    entries: BTreeMap<(usize, usize), Rational>,
    /// Monomials in the image that are not in `rows`.
    pub escaping: Vec<Monomial>,
}

impl OperatorMatrix {
    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.entries.iter()
    }

    pub fn is_closed(&self) -> bool {
        self.escaping.is_empty()
    }

    pub fn require_closed(&self, ctx: &Ctx) -> Result<()> {
        if self.is_closed() {
            Ok(())
        } else {
            Err(Error::OutOfTruncation(
                self.escaping.iter().map(|m| ctx.format_monomial(m)).collect(),
            ))
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries
            .keys()
            .all(|&(i, j)| self.rows[i] == self.cols[j])
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.cols.len()]; self.rows.len()];
        for (&(i, j), v) in &self.entries {
            out[i][j] = v.clone();
        }
        out
    }
}

/// Matrix of `op` with columns indexed by `domain` and rows by `codomain`
/// (defaults to `domain`). Image terms outside the codomain are recorded in
/// `escaping`, never dropped silently.
pub fn matrix_on_basis(
    op: &OperatorExpr,
    ctx: &Ctx,
    domain: &[Monomial],
    codomain: Option<&[Monomial]>,
) -> Result<OperatorMatrix> {
    let rows: Vec<Monomial> = codomain.unwrap_or(domain).to_vec();
    let index: std::collections::HashMap<&Monomial, usize> =
        rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    if index.len() != rows.len() {
        return Err(Error::InvalidInput("codomain basis has repeated monomials".into()));
    }
    let images = domain
        .par_iter()
        .map(|m| op.apply_monomial(ctx, m))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = BTreeMap::new();
    let mut escaping = Vec::new();
    for (j, img) in images.into_iter().enumerate() {
        for (m, c) in img.into_terms() {
            match index.get(&m) {
                Some(&i) => {
                    entries.insert((i, j), c);
                }
                None => {
                    if !escaping.contains(&m) {
                        escaping.push(m);
                    }
                }
            }
        }
    }
    escaping.sort();
    Ok(OperatorMatrix {
        rows,
        cols: domain.to_vec(),
        entries,
        escaping,
    })
}

type SparseVec = BTreeMap<(u32, Monomial), Rational>;

fn vectorize(images: Vec<Polynomial>) -> SparseVec {
    let mut v = SparseVec::new();
    for (col, img) in images.into_iter().enumerate() {
        for (m, c) in img.into_terms() {
            v.insert((col as u32, m), c);
        }
    }
    v
}

fn axpy(y: &mut SparseVec, a: &Rational, x: &SparseVec) {
    for (k, v) in x {
        let delta = a * v;
        match y.entry(k.clone()) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if !delta.is_zero() {
                    e.insert(delta);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += delta;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

struct Pivot {
    key: (u32, Monomial),
    vec: SparseVec,
    /// Coefficients of this pivot vector in terms of the original operators.
    combo: Vec<Rational>,
}

/// Row-reduced span of a list of operators, each flattened to its action on
/// a fixed basis. Supports exact membership tests and coordinate solves.
pub struct OperatorSpan {
    ctx: Ctx,
    basis: Vec<Monomial>,
    ops: Vec<OperatorExpr>,
    pivots: Vec<Pivot>,
    dependent: Vec<usize>,
}

impl OperatorSpan {
    pub fn new(ctx: &Ctx, ops: &[OperatorExpr], basis: &[Monomial]) -> Result<Self> {
        let vectors = ops
            .par_iter()
            .map(|op| {
                let imgs = basis
                    .iter()
                    .map(|m| op.apply_monomial(ctx, m))
                    .collect::<Result<Vec<_>>>()?;
                Ok(vectorize(imgs))
            })
            .collect::<Result<Vec<_>>>()?;

        let n = ops.len();
        let mut pivots: Vec<Pivot> = Vec::new();
        let mut dependent = Vec::new();
        for (k, mut v) in vectors.into_iter().enumerate() {
            let mut combo = vec![Rational::zero(); n];
            combo[k] = Rational::one();
            for p in &pivots {
                if let Some(c) = v.get(&p.key).cloned() {
                    let neg = -c;
                    axpy(&mut v, &neg, &p.vec);
                    for (a, b) in combo.iter_mut().zip(&p.combo) {
                        *a += &neg * b;
                    }
                }
            }
            let Some((key, lead)) = v.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
                dependent.push(k);
                continue;
            };
            let inv = lead.recip();
            for c in v.values_mut() {
                *c = &*c * &inv;
            }
            for c in combo.iter_mut() {
                *c = &*c * &inv;
            }
            for p in pivots.iter_mut() {
                if let Some(c) = p.vec.get(&key).cloned() {
                    let neg = -c;
                    axpy(&mut p.vec, &neg, &v);
                    for (a, b) in p.combo.iter_mut().zip(&combo) {
                        *a += &neg * b;
                    }
                }
            }
            pivots.push(Pivot { key, vec: v, combo });
        }
        Ok(OperatorSpan {
            ctx: ctx.clone(),
            basis: basis.to_vec(),
            ops: ops.to_vec(),
            pivots,
            dependent,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Indices of operators that were linearly dependent on earlier ones.
    pub fn dependent(&self) -> &[usize] {
        &self.dependent
    }

    fn solve_vec(&self, mut target: SparseVec) -> Option<Vec<Rational>> {
        let mut coeffs = vec![Rational::zero(); self.ops.len()];
        for p in &self.pivots {
            if let Some(c) = target.get(&p.key).cloned() {
                for (a, b) in coeffs.iter_mut().zip(&p.combo) {
                    *a += &c * b;
                }
                axpy(&mut target, &-c, &p.vec);
            }
        }
        if target.is_empty() {
            Some(coeffs)
        } else {
            None
        }
    }

    /// Coefficients `c` with `op = sum_k c_k ops[k]` on the basis, if any.
    pub fn express(&self, op: &OperatorExpr) -> Result<Option<Vec<Rational>>> {
        let imgs = self
            .basis
            .iter()
            .map(|m| op.apply_monomial(&self.ctx, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.solve_vec(vectorize(imgs)))
    }

    fn commutator_images(&self, i: usize, j: usize) -> Result<Vec<Polynomial>> {
        let (a, b) = (&self.ops[i], &self.ops[j]);
        self.basis
            .iter()
            .map(|m| {
                let s = Polynomial::monomial(&self.ctx, m.clone());
                let ab = a.apply(&b.apply(&s)?)?;
                let ba = b.apply(&a.apply(&s)?)?;
                ab.sub(&ba)
            })
            .collect()
    }
}

/// Outcome of a closure test for a list of operators.
#[derive(Debug, Clone)]
pub struct ClosureReport {
    pub count: usize,
    pub rank: usize,
    pub closed: bool,
    /// `constants[i][j][k]`: coefficient of `ops[k]` in `[ops[i], ops[j]]`.
    /// Present only when the list is closed and independent.
    pub constants: Option<Vec<Vec<Vec<Rational>>>>,
    /// Pairs whose commutator is not in the span.
    pub failures: Vec<(usize, usize)>,
}

impl ClosureReport {
    pub fn is_lie_algebra(&self) -> bool {
        self.closed && self.rank == self.count
    }
}

/// Solves `[ops[i], ops[j]] = sum_k c^k_ij ops[k]` exactly on `basis` for all
/// pairs. Pairs are evaluated in parallel; the result does not depend on
/// scheduling.
pub fn span_structure(ctx: &Ctx, ops: &[OperatorExpr], basis: &[Monomial]) -> Result<ClosureReport> {
    let span = OperatorSpan::new(ctx, ops, basis)?;
    let n = ops.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let solved = pairs
        .par_iter()
        .map(|&(i, j)| {
            let imgs = span.commutator_images(i, j)?;
            Ok(((i, j), span.solve_vec(vectorize(imgs))))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut failures = Vec::new();
    let mut constants = vec![vec![vec![Rational::zero(); n]; n]; n];
    for ((i, j), sol) in solved {
        match sol {
            Some(c) => {
                constants[j][i] = c.iter().map(|x| -x).collect();
                constants[i][j] = c;
            }
            None => failures.push((i, j)),
        }
    }
    let closed = failures.is_empty();
    let independent = span.rank() == n;
    Ok(ClosureReport {
        count: n,
        rank: span.rank(),
        closed,
        constants: (closed && independent).then_some(constants),
        failures,
    })
}
