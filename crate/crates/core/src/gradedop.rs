//! 2×2 matrices of Weyl-algebra operators acting on `P(N-Δ,V) ⊕ P(N,V)`.
//!
//! The column vector is `(upper, lower)` with the upper block `P(N-Δ,V)`.
//! Diagonal entries are the bosonic part, off-diagonal entries the fermionic
//! part. `σ₊` is the elementary matrix with only the `ef` (upper-right)
//! entry, `σ₋` the one with only the `fe` (lower-left) entry; the imaginary
//! unit in `(σ₁ ± iσ₂)/2` never appears.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyspace::Poly;
use crate::rational::Rational;
use crate::weylop::DiffOp;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GradedRepr", into = "GradedRepr")]
pub struct GradedOp {
    pub ee: DiffOp,
    pub ef: DiffOp,
    pub fe: DiffOp,
    pub ff: DiffOp,
}

/// Element of `P(N-Δ,V) ⊕ P(N,V)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedVector {
    pub upper: Poly,
    pub lower: Poly,
}

impl GradedVector {
    pub fn new(upper: Poly, lower: Poly) -> Self {
        assert_eq!(upper.vars(), lower.vars(), "graded vector variable count mismatch");
        GradedVector { upper, lower }
    }

    pub fn zero(vars: usize) -> Self {
        GradedVector { upper: Poly::zero(vars), lower: Poly::zero(vars) }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.is_zero() && self.lower.is_zero()
    }
}

impl fmt::Display for GradedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.upper, self.lower)
    }
}

impl GradedOp {
    pub fn new(ee: DiffOp, ef: DiffOp, fe: DiffOp, ff: DiffOp) -> Self {
        let v = ee.vars();
        for e in [&ef, &fe, &ff] {
            assert_eq!(e.vars(), v, "graded operator entry variable count mismatch");
        }
        GradedOp { ee, ef, fe, ff }
    }

    pub fn zero(vars: usize) -> Self {
        let z = DiffOp::zero(vars);
        GradedOp { ee: z.clone(), ef: z.clone(), fe: z.clone(), ff: z }
    }

    pub fn identity(vars: usize) -> Self {
        Self::diag(DiffOp::identity(vars), DiffOp::identity(vars))
    }

    pub fn diag(upper: DiffOp, lower: DiffOp) -> Self {
        let z = DiffOp::zero(upper.vars());
        Self::new(upper, z.clone(), z, lower)
    }

    /// `op · σ₊`: maps the lower block into the upper block.
    pub fn raising(op: DiffOp) -> Self {
        let z = DiffOp::zero(op.vars());
        GradedOp { ee: z.clone(), ef: op, fe: z.clone(), ff: z }
    }

    /// `op · σ₋`: maps the upper block into the lower block.
    pub fn lowering(op: DiffOp) -> Self {
        let z = DiffOp::zero(op.vars());
        GradedOp { ee: z.clone(), ef: z.clone(), fe: op, ff: z }
    }

    pub fn sigma_plus(vars: usize) -> Self {
        Self::raising(DiffOp::identity(vars))
    }

    pub fn sigma_minus(vars: usize) -> Self {
        Self::lowering(DiffOp::identity(vars))
    }

    /// Embeds a scalar operator as `diag(op, op)`.
    pub fn scalar(op: DiffOp) -> Self {
        Self::diag(op.clone(), op)
    }

    pub fn vars(&self) -> usize {
        self.ee.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(|e| e.is_zero())
    }

    pub fn entries(&self) -> [&DiffOp; 4] {
        [&self.ee, &self.ef, &self.fe, &self.ff]
    }

    /// Off-diagonal part vanishes.
    pub fn is_bosonic(&self) -> bool {
        self.ef.is_zero() && self.fe.is_zero()
    }

    /// Diagonal part vanishes.
    pub fn is_fermionic(&self) -> bool {
        self.ee.is_zero() && self.ff.is_zero()
    }

    pub fn bosonic_part(&self) -> GradedOp {
        Self::diag(self.ee.clone(), self.ff.clone())
    }

    pub fn fermionic_part(&self) -> GradedOp {
        let z = DiffOp::zero(self.vars());
        GradedOp { ee: z.clone(), ef: self.ef.clone(), fe: self.fe.clone(), ff: z }
    }

    pub fn scale(&self, c: &Rational) -> GradedOp {
        GradedOp {
            ee: self.ee.scale(c),
            ef: self.ef.scale(c),
            fe: self.fe.scale(c),
            ff: self.ff.scale(c),
        }
    }

    pub fn apply(&self, v: &GradedVector) -> GradedVector {
        GradedVector {
            upper: &self.ee.apply(&v.upper) + &self.ef.apply(&v.lower),
            lower: &self.fe.apply(&v.upper) + &self.ff.apply(&v.lower),
        }
    }

    pub fn compose(&self, g: &GradedOp) -> GradedOp {
        fn mul_add(a: &DiffOp, b: &DiffOp, c: &DiffOp, d: &DiffOp) -> DiffOp {
            let left = if a.is_zero() || b.is_zero() { DiffOp::zero(a.vars()) } else { a.compose(b) };
            if c.is_zero() || d.is_zero() {
                left
            } else {
                &left + &c.compose(d)
            }
        }
        GradedOp {
            ee: mul_add(&self.ee, &g.ee, &self.ef, &g.fe),
            ef: mul_add(&self.ee, &g.ef, &self.ef, &g.ff),
            fe: mul_add(&self.fe, &g.ee, &self.ff, &g.fe),
            ff: mul_add(&self.fe, &g.ef, &self.ff, &g.ff),
        }
    }

    pub fn commutator(&self, g: &GradedOp) -> GradedOp {
        &self.compose(g) - &g.compose(self)
    }

    pub fn anticommutator(&self, g: &GradedOp) -> GradedOp {
        &self.compose(g) + &g.compose(self)
    }

    pub fn pow(&self, n: u32) -> GradedOp {
        (0..n).fold(GradedOp::identity(self.vars()), |acc, _| acc.compose(self))
    }
}

impl Add for &GradedOp {
    type Output = GradedOp;
    fn add(self, g: &GradedOp) -> GradedOp {
        GradedOp {
            ee: &self.ee + &g.ee,
            ef: &self.ef + &g.ef,
            fe: &self.fe + &g.fe,
            ff: &self.ff + &g.ff,
        }
    }
}

impl Sub for &GradedOp {
    type Output = GradedOp;
    fn sub(self, g: &GradedOp) -> GradedOp {
        GradedOp {
            ee: &self.ee - &g.ee,
            ef: &self.ef - &g.ef,
            fe: &self.fe - &g.fe,
            ff: &self.ff - &g.ff,
        }
    }
}

impl Neg for &GradedOp {
    type Output = GradedOp;
    fn neg(self) -> GradedOp {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for GradedOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.ee, self.ef, self.fe, self.ff)
    }
}

#[derive(Serialize, Deserialize)]
struct GradedRepr {
    ee: DiffOp,
    ef: DiffOp,
    fe: DiffOp,
    ff: DiffOp,
}

impl From<GradedOp> for GradedRepr {
    fn from(g: GradedOp) -> Self {
        GradedRepr { ee: g.ee, ef: g.ef, fe: g.fe, ff: g.ff }
    }
}

impl TryFrom<GradedRepr> for GradedOp {
    type Error = Error;
    fn try_from(r: GradedRepr) -> Result<Self> {
        let v = r.ee.vars();
        for e in [&r.ef, &r.fe, &r.ff] {
            if e.vars() != v {
                return Err(Error::VarMismatch { left: v, right: e.vars() });
            }
        }
        Ok(GradedOp { ee: r.ee, ef: r.ef, fe: r.fe, ff: r.ff })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::Monomial;
    use crate::rational::int;

    #[test]
    fn sigma_actions() {
        let one = Poly::constant(1, int(1));
        let v = GradedVector::new(one.clone(), Poly::zero(1));
        assert_eq!(GradedOp::sigma_minus(1).apply(&v), GradedVector::new(Poly::zero(1), one));
        assert!(GradedOp::sigma_plus(1).apply(&v).is_zero());
    }

    #[test]
    fn sigma_algebra() {
        let m = GradedOp::sigma_minus(2);
        let p = GradedOp::sigma_plus(2);
        assert!(m.compose(&m).is_zero());
        assert!(p.compose(&p).is_zero());
        assert_eq!(m.anticommutator(&p), GradedOp::identity(2));
    }

    #[test]
    fn grading_of_brackets() {
        let b1 = GradedOp::diag(DiffOp::euler(1), DiffOp::partial(1, 1));
        let b2 = GradedOp::diag(DiffOp::x(1, 1), DiffOp::euler(1));
        let f1 = GradedOp::lowering(DiffOp::x(1, 1));
        let f2 = GradedOp::raising(DiffOp::partial(1, 1));
        assert!(b1.commutator(&b2).is_bosonic());
        assert!(b1.commutator(&f1).is_fermionic());
        assert!(f1.anticommutator(&f2).is_bosonic());
        let mixed = &b1 + &f1;
        assert!(!mixed.is_bosonic() && !mixed.is_fermionic());
    }

    #[test]
    fn apply_lowering_monomial() {
        let q = GradedOp::lowering(DiffOp::x(1, 1).scale(&int(-1)));
        let v = GradedVector::new(Poly::constant(1, int(1)), Poly::zero(1));
        let out = q.apply(&v);
        assert!(out.upper.is_zero());
        assert_eq!(out.lower, Poly::term(Monomial::var(1, 1), int(-1)));
    }

    #[test]
    fn json_round_trip() {
        let g = &GradedOp::diag(DiffOp::euler(2), DiffOp::identity(2)) + &GradedOp::raising(DiffOp::partial(2, 1));
        let s = serde_json::to_string(&g).unwrap();
        let back: GradedOp = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
