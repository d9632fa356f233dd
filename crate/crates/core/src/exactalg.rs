//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`VariableContext`] names the variables and carries any number of
//! affine gradings. One variable may be marked as distinguished; its
//! exponent is allowed to be any half-integer (negative included), which is
//! how sections on the double cover `C[f0^{1/2}, f0^{-1/2}, f1, ..]` are
//! represented. Every other exponent is a non-negative integer.
//!
//! Terms are kept in a `BTreeMap` under a graded ordering so that iteration
//! and printing are deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// An affine weight function `sum_i weight_i * exp_i + shift` on monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    pub name: String,
    pub weights: Vec<Rational>,
    pub shift: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableContext {
    names: Vec<String>,
    gradings: Vec<Grading>,
    distinguished: Option<usize>,
}

pub type Ctx = Arc<VariableContext>;

impl VariableContext {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(Error::InvalidInput("empty variable name".into()));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidInput(format!("duplicate variable {n:?}")));
            }
        }
        Ok(VariableContext {
            names,
            gradings: Vec::new(),
            distinguished: None,
        })
    }

    /// Marks `name` as the single variable allowed half-integer exponents.
    pub fn with_distinguished(mut self, name: &str) -> Result<Self> {
        if self.distinguished.is_some() {
            return Err(Error::InvalidInput(
                "only one distinguished variable per context".into(),
            ));
        }
        self.distinguished = Some(self.index_of(name)?);
        Ok(self)
    }

    pub fn with_grading(mut self, name: &str, weights: Vec<Rational>, shift: Rational) -> Result<Self> {
        if weights.len() != self.names.len() {
            return Err(Error::InvalidInput(format!(
                "grading {name:?} has {} weights for {} variables",
                weights.len(),
                self.names.len()
            )));
        }
        if self.gradings.iter().any(|g| g.name == name) {
            return Err(Error::InvalidInput(format!("duplicate grading {name:?}")));
        }
        self.gradings.push(Grading {
            name: name.to_string(),
            weights,
            shift,
        });
        Ok(self)
    }

    pub fn into_ctx(self) -> Ctx {
        Arc::new(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn distinguished(&self) -> Option<usize> {
        self.distinguished
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable {name:?}")))
    }

    pub fn grading(&self, name: &str) -> Result<&Grading> {
        self.gradings
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| Error::UnknownGrading(name.to_string()))
    }

    pub fn gradings(&self) -> &[Grading] {
        &self.gradings
    }

    pub fn grade_of(&self, m: &Monomial, grading: &str) -> Result<Rational> {
        let g = self.grading(grading)?;
        Ok(self.grade_with(m, g))
    }

    pub(crate) fn grade_with(&self, m: &Monomial, g: &Grading) -> Rational {
        let mut acc = g.shift.clone();
        for (i, (w, &e)) in g.weights.iter().zip(&m.exps).enumerate() {
            if w.is_zero() {
                continue;
            }
            if Some(i) == self.distinguished {
                acc += w * &Rational::new(m.half as i64, 2);
            } else if e != 0 {
                acc += w * &Rational::from_int(e as i64);
            }
        }
        acc
    }

    /// Parses `x`, `x^3`, `x*y^2`, `f0^-1/2` style monomials. `1` is the unit.
    pub fn parse_monomial(&self, s: &str) -> Result<Monomial> {
        let mut m = Monomial::one(self.len());
        let s = s.trim();
        if s == "1" {
            return Ok(m);
        }
        for factor in s.split('*') {
            let (name, exp) = match factor.split_once('^') {
                Some((n, e)) => (n.trim(), e.trim()),
                None => (factor.trim(), "1"),
            };
            let idx = self.index_of(name)?;
            let e: Rational = exp.parse()?;
            if Some(idx) == self.distinguished {
                let twice = &e * &Rational::from_int(2);
                let twice = twice
                    .to_i64()
                    .ok_or_else(|| Error::InvalidInput(format!("exponent {exp} is not a half-integer")))?;
                m.half += twice as i32;
            } else {
                let e = e
                    .to_i64()
                    .filter(|&e| e >= 0)
                    .ok_or_else(|| Error::InvalidInput(format!("exponent {exp} of {name} must be a non-negative integer")))?;
                m.exps[idx] += e as u32;
            }
        }
        Ok(m)
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, name) in self.names.iter().enumerate() {
            if Some(i) == self.distinguished {
                match m.half {
                    0 => {}
                    2 => parts.push(name.clone()),
                    h if h % 2 == 0 => parts.push(format!("{name}^{}", h / 2)),
                    h => parts.push(format!("{name}^{h}/2")),
                }
                continue;
            }
            match m.exps[i] {
                0 => {}
                1 => parts.push(name.clone()),
                e => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Exponent vector. For the distinguished variable (if any) the slot in
/// `exps` stays zero and twice its exponent lives in `half`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
    half: i32,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            exps: vec![0; nvars],
            half: 0,
        }
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial { exps, half: 0 }
    }

    pub fn with_half_exponent(mut self, twice: i32) -> Self {
        self.half = twice;
        self
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.exps[var]
    }

    /// Twice the exponent of the distinguished variable.
    pub fn twice_distinguished(&self) -> i32 {
        self.half
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    /// Integer part of the total degree (distinguished slot excluded).
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
            half: self.half + other.half,
        }
    }

    /// `self / other` when `other` divides `self` in the integer slots.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Monomial {
            exps,
            half: self.half - other.half,
        })
    }

    fn twice_total(&self) -> i64 {
        2 * self.degree() as i64 + self.half as i64
    }
}

impl Ord for Monomial {
    /// Graded order: lower total degree first, then larger leading exponents.
    fn cmp(&self, other: &Self) -> Ordering {
        self.twice_total()
            .cmp(&other.twice_total())
            .then_with(|| other.exps.cmp(&self.exps))
            .then_with(|| self.half.cmp(&other.half))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone)]
pub struct Polynomial {
    ctx: Ctx,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        same_ctx(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

fn same_ctx(a: &Ctx, b: &Ctx) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Polynomial {
    pub fn zero(ctx: &Ctx) -> Self {
        Polynomial {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Ctx, c: Rational) -> Self {
        Self::term(ctx, Monomial::one(ctx.len()), c)
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn term(ctx: &Ctx, m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn monomial(ctx: &Ctx, m: Monomial) -> Self {
        Self::term(ctx, m, Rational::one())
    }

    pub fn var(ctx: &Ctx, name: &str) -> Result<Self> {
        let idx = ctx.index_of(name)?;
        let mut m = Monomial::one(ctx.len());
        if Some(idx) == ctx.distinguished() {
            m.half = 2;
        } else {
            m.exps[idx] = 1;
        }
        Ok(Self::monomial(ctx, m))
    }

    /// Builds a polynomial from `(coefficient, monomial text)` pairs.
    pub fn from_terms(ctx: &Ctx, terms: &[(Rational, &str)]) -> Result<Self> {
        let mut p = Self::zero(ctx);
        for (c, m) in terms {
            p.add_term(ctx.parse_monomial(m)?, c.clone());
        }
        Ok(p)
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Rational> {
        self.terms
    }

    /// Adds `c * m` in place, pruning a cancelled coefficient.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_ctx(&self, other: &Polynomial) -> Result<()> {
        if same_ctx(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other, &Rational::one());
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other, &-Rational::one());
        Ok(out)
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Polynomial, scale: &Rational) -> Result<()> {
        self.check_ctx(other)?;
        self.add_assign_unchecked(other, scale);
        Ok(())
    }

    fn add_assign_unchecked(&mut self, other: &Polynomial, scale: &Rational) {
        if scale.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * scale);
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-Rational::one())
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ctx(other)?;
        let mut out = Polynomial::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Polynomial {
        let mut out = Polynomial::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            out.add_term(ma.mul(m), ca * c);
        }
        out
    }

    /// Iterated partial derivative along a word of variable indices.
    pub fn diff_indices(&self, word: &[usize]) -> Result<Polynomial> {
        if let Some(d) = self.ctx.distinguished() {
            if word.contains(&d) {
                return Err(Error::Unsupported(format!(
                    "differentiation in the half-integer variable {}",
                    self.ctx.names()[d]
                )));
            }
        }
        if let Some(&bad) = word.iter().find(|&&v| v >= self.ctx.len()) {
            return Err(Error::InvalidInput(format!("variable index {bad} out of range")));
        }
        let mut counts = vec![0u32; self.ctx.len()];
        for &v in word {
            counts[v] += 1;
        }
        let mut out = Polynomial::zero(&self.ctx);
        for (m, c) in &self.terms {
            if let Some((dm, factor)) = diff_monomial(m, &counts) {
                out.add_term(dm, c * &factor);
            }
        }
        Ok(out)
    }

    pub fn diff(&self, word: &[&str]) -> Result<Polynomial> {
        let idx = word
            .iter()
            .map(|n| self.ctx.index_of(n))
            .collect::<Result<Vec<_>>>()?;
        self.diff_indices(&idx)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }
}

/// Derivative of a single monomial by `counts[v]`-fold differentiation in
/// each variable. Returns `None` when the result vanishes.
pub(crate) fn diff_monomial(m: &Monomial, counts: &[u32]) -> Option<(Monomial, Rational)> {
    let mut exps = m.exps.clone();
    let mut factor: i64 = 1;
    let mut big = Rational::one();
    for (e, &k) in exps.iter_mut().zip(counts) {
        if k == 0 {
            continue;
        }
        if *e < k {
            return None;
        }
        for j in 0..k {
            let f = (*e - j) as i64;
            match factor.checked_mul(f) {
                Some(v) => factor = v,
                None => {
                    big = big * Rational::from_int(factor);
                    factor = f;
                }
            }
        }
        *e -= k;
    }
    Some((
        Monomial { exps, half: m.half },
        big * Rational::from_int(factor),
    ))
}

pub fn poly_mul(a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
    a.mul(b)
}

pub fn poly_diff(a: &Polynomial, word: &[&str]) -> Result<Polynomial> {
    a.diff(word)
}

pub fn grade_of(ctx: &VariableContext, m: &Monomial, grading: &str) -> Result<Rational> {
    ctx.grade_of(m, grading)
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let mono = self.ctx.format_monomial(m);
            if c.is_one() {
                write!(f, "{mono}")?;
            } else if mono == "1" {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
