//! Sparse exact multivariate polynomials and the monomial bases of
//! `P(N,V)` and `P(N-Δ,V) ⊕ P(N,V)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, binomial, Rational};

/// Exponent vector of `x_1^{n_1} ... x_V^{n_V}`.
///
/// Ordered graded-lexicographically: lower total degree first, then
/// larger exponents on earlier variables first (`x1 < x2` within degree one).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(vars: usize) -> Self {
        Monomial(vec![0; vars])
    }

    /// `x_k` for `k` in `1..=vars`.
    pub fn var(vars: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= vars, "variable x{k} outside 1..={vars}");
        let mut e = vec![0; vars];
        e[k - 1] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.vars(), other.vars(), "monomial variable count mismatch");
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Polynomial with exact rational coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Poly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: Rational) -> Self {
        Self::term(Monomial::one(vars), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero(m.vars());
        p.add_term(m, c);
        p
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(m, Rational::one())
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        assert_eq!(m.vars(), self.vars, "monomial variable count mismatch");
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m);
        match slot {
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

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.vars);
        }
        Poly {
            vars: self.vars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    fn check_vars(&self, other: &Poly) {
        assert_eq!(self.vars, other.vars, "polynomial variable count mismatch");
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.check_vars(rhs);
        let mut out = Poly::zero(self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})*{m}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    #[serde(rename = "V")]
    vars: usize,
    terms: Vec<PolyTermRepr>,
}

#[derive(Serialize, Deserialize)]
struct PolyTermRepr {
    exp: Vec<u32>,
    coeff: String,
}

impl From<Poly> for PolyRepr {
    fn from(p: Poly) -> Self {
        PolyRepr {
            vars: p.vars,
            terms: p
                .terms
                .into_iter()
                .map(|(m, c)| PolyTermRepr { exp: m.0, coeff: rational::format(&c) })
                .collect(),
        }
    }
}

impl TryFrom<PolyRepr> for Poly {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        let mut p = Poly::zero(r.vars);
        for t in r.terms {
            if t.exp.len() != r.vars {
                return Err(Error::LengthMismatch { expected: r.vars, got: t.exp.len() });
            }
            let m = Monomial(t.exp);
            if p.terms.contains_key(&m) {
                return Err(Error::Parse(format!("duplicate monomial {m}")));
            }
            p.add_term(m, rational::parse(&t.coeff)?);
        }
        Ok(p)
    }
}

/// Parameters of `P(N,V)`, or of `P(N-Δ,V) ⊕ P(N,V)` when `delta` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceSpec {
    vars: usize,
    degree: u32,
    delta: Option<u32>,
}

impl SpaceSpec {
    pub fn scalar(vars: usize, degree: u32) -> Result<Self> {
        Self::new(vars, degree, None)
    }

    pub fn graded(vars: usize, degree: u32, delta: u32) -> Result<Self> {
        Self::new(vars, degree, Some(delta))
    }

    pub fn new(vars: usize, degree: u32, delta: Option<u32>) -> Result<Self> {
        if vars == 0 {
            return Err(Error::InvalidSpec("V must be at least 1".into()));
        }
        if let Some(d) = delta {
            if d > degree {
                return Err(Error::InvalidSpec(format!("Δ={d} exceeds N={degree}")));
            }
        }
        Ok(SpaceSpec { vars, degree, delta })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// `N`, the degree bound of the lower block (or of the whole scalar space).
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn delta(&self) -> Option<u32> {
        self.delta
    }

    pub fn is_graded(&self) -> bool {
        self.delta.is_some()
    }

    /// `M = N-Δ`, the degree bound of the upper block.
    pub fn upper_degree(&self) -> Option<u32> {
        self.delta.map(|d| self.degree - d)
    }
}

/// Which component of the space a basis vector lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    Scalar,
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisVector {
    pub block: Block,
    pub monomial: Monomial,
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.block {
            Block::Scalar => write!(f, "{}", self.monomial),
            Block::Upper => write!(f, "({}, 0)", self.monomial),
            Block::Lower => write!(f, "(0, {})", self.monomial),
        }
    }
}

/// All monomials in `vars` variables of total degree at most `degree`, graded-lex order.
pub fn monomials_up_to(vars: usize, degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=degree {
        let mut cur = vec![0u32; vars];
        homogeneous(&mut cur, 0, d, &mut out);
    }
    out
}

fn homogeneous(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Monomial>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(Monomial(cur.clone()));
        cur[pos] = 0;
        return;
    }
    // descending exponent on the earlier variable gives the graded-lex order
    for e in (0..=left).rev() {
        cur[pos] = e;
        homogeneous(cur, pos + 1, left - e, out);
    }
    cur[pos] = 0;
}

/// Ordered basis of the space: the scalar monomials, or the upper block
/// followed by the lower block for a graded space.
pub fn basis(spec: &SpaceSpec) -> Vec<BasisVector> {
    match spec.delta {
        None => monomials_up_to(spec.vars, spec.degree)
            .into_iter()
            .map(|monomial| BasisVector { block: Block::Scalar, monomial })
            .collect(),
        Some(d) => {
            let upper = monomials_up_to(spec.vars, spec.degree - d)
                .into_iter()
                .map(|monomial| BasisVector { block: Block::Upper, monomial });
            let lower = monomials_up_to(spec.vars, spec.degree)
                .into_iter()
                .map(|monomial| BasisVector { block: Block::Lower, monomial });
            upper.chain(lower).collect()
        }
    }
}

/// `C(N+V,V)`, plus `C(N-Δ+V,V)` for graded spaces.
pub fn dimension(spec: &SpaceSpec) -> u64 {
    let v = spec.vars as u64;
    let n = spec.degree as u64;
    let lower = binomial(n + v, v);
    match spec.delta {
        None => lower,
        Some(d) => lower + binomial(n - d as u64 + v, v),
    }
}

/// Whether `p` lies in `P(degree, V)`.
pub fn member_degree(p: &Poly, degree: u32) -> bool {
    p.terms.keys().all(|m| m.degree() <= degree)
}

/// Membership of a scalar polynomial in `P(N,V)`; for a graded spec the
/// test is against the lower block `P(N,V)`.
pub fn member(p: &Poly, spec: &SpaceSpec) -> bool {
    assert_eq!(p.vars, spec.vars, "polynomial variable count mismatch");
    member_degree(p, spec.degree)
}
