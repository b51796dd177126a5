//! Linear differential operators with polynomial coefficients, kept in
//! normal form `Σ p_α(x) ∂^α` (multiplications left of derivatives).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyspace::{Monomial, Poly};
use crate::rational::{self, falling, Rational};

/// Derivative orders `(k_1, ..., k_V)` of `∂_1^{k_1} ... ∂_V^{k_V}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivMulti(Vec<u32>);

impl DerivMulti {
    pub fn new(orders: Vec<u32>) -> Self {
        DerivMulti(orders)
    }

    pub fn none(vars: usize) -> Self {
        DerivMulti(vec![0; vars])
    }

    /// `∂_k` for `k` in `1..=vars`.
    pub fn single(vars: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= vars, "derivative ∂{k} outside 1..={vars}");
        let mut o = vec![0; vars];
        o[k - 1] = 1;
        DerivMulti(o)
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }
}

type TermKey = (Monomial, DerivMulti);

/// Element of the Weyl algebra in `V` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DiffOpRepr", into = "DiffOpRepr")]
pub struct DiffOp {
    vars: usize,
    terms: BTreeMap<TermKey, Rational>,
}

impl DiffOp {
    pub fn zero(vars: usize) -> Self {
        DiffOp { vars, terms: BTreeMap::new() }
    }

    pub fn identity(vars: usize) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn constant(vars: usize, c: Rational) -> Self {
        Self::term(vars, Monomial::one(vars), DerivMulti::none(vars), c)
    }

    pub fn term(vars: usize, m: Monomial, d: DerivMulti, c: Rational) -> Self {
        let mut op = DiffOp::zero(vars);
        op.add_term(m, d, c);
        op
    }

    /// Multiplication by `p`.
    pub fn multiplication(p: &Poly) -> Self {
        let mut op = DiffOp::zero(p.vars());
        for (m, c) in p.terms() {
            op.add_term(m.clone(), DerivMulti::none(p.vars()), c.clone());
        }
        op
    }

    /// Multiplication by `x_k`.
    pub fn x(vars: usize, k: usize) -> Self {
        Self::term(vars, Monomial::var(vars, k), DerivMulti::none(vars), Rational::one())
    }

    /// `∂/∂x_k`.
    pub fn partial(vars: usize, k: usize) -> Self {
        Self::term(vars, Monomial::one(vars), DerivMulti::single(vars, k), Rational::one())
    }

    /// Euler operator `D = Σ_j x_j ∂_j`.
    pub fn euler(vars: usize) -> Self {
        let mut op = DiffOp::zero(vars);
        for k in 1..=vars {
            op.add_term(Monomial::var(vars, k), DerivMulti::single(vars, k), Rational::one());
        }
        op
    }

    pub fn vars(&self) -> usize {
        self.vars
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

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &DerivMulti, &Rational)> {
        self.terms.iter().map(|((m, d), c)| (m, d, c))
    }

    pub fn coeff(&self, m: &Monomial, d: &DerivMulti) -> Rational {
        self.terms
            .get(&(m.clone(), d.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Highest derivative order, `None` for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(_, d)| d.order()).max()
    }

    /// The scalar `c` when the operator is `c·1`.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let ((m, d), c) = self.terms.iter().next().unwrap();
                (m.degree() == 0 && d.order() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, d: DerivMulti, c: Rational) {
        assert_eq!(m.vars(), self.vars, "operator variable count mismatch");
        assert_eq!(d.0.len(), self.vars, "operator variable count mismatch");
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((m, d)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> DiffOp {
        if c.is_zero() {
            return DiffOp::zero(self.vars);
        }
        DiffOp {
            vars: self.vars,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    fn check_vars(&self, other_vars: usize) {
        assert_eq!(self.vars, other_vars, "operator variable count mismatch");
    }

    /// Image of `p`.
    pub fn apply(&self, p: &Poly) -> Poly {
        self.check_vars(p.vars());
        let mut out = Poly::zero(self.vars);
        for ((a, alpha), c) in &self.terms {
            for (m, pc) in p.terms() {
                if alpha.0.iter().zip(m.exponents()).any(|(k, e)| k > e) {
                    continue;
                }
                let mut weight = BigInt::one();
                let mut exps = Vec::with_capacity(self.vars);
                for ((k, e), ae) in alpha.0.iter().zip(m.exponents()).zip(a.exponents()) {
                    weight *= falling(*e, *k);
                    exps.push(ae + e - k);
                }
                out.add_term(Monomial::new(exps), c * pc * Rational::from_integer(weight));
            }
        }
        out
    }

    /// Normal form of `self ∘ other`, via
    /// `∂^α x^β = Σ_γ C(α,γ) β!/(β-γ)! x^{β-γ} ∂^{α-γ}`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        self.check_vars(other.vars);
        let mut out = DiffOp::zero(self.vars);
        for ((a, alpha), c1) in &self.terms {
            for ((b, beta), c2) in &other.terms {
                let c = c1 * c2;
                let limits: Vec<u32> =
                    alpha.0.iter().zip(b.exponents()).map(|(x, y)| *x.min(y)).collect();
                let mut gamma = vec![0u32; self.vars];
                loop {
                    let mut weight = BigInt::one();
                    let mut mono = Vec::with_capacity(self.vars);
                    let mut der = Vec::with_capacity(self.vars);
                    for j in 0..self.vars {
                        let g = gamma[j];
                        weight *= binom_big(alpha.0[j], g) * falling(b.exponents()[j], g);
                        mono.push(a.exponents()[j] + b.exponents()[j] - g);
                        der.push(alpha.0[j] - g + beta.0[j]);
                    }
                    out.add_term(
                        Monomial::new(mono),
                        DerivMulti(der),
                        &c * Rational::from_integer(weight),
                    );
                    if !next_multi(&mut gamma, &limits) {
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        &self.compose(other) - &other.compose(self)
    }

    pub fn anticommutator(&self, other: &DiffOp) -> DiffOp {
        &self.compose(other) + &other.compose(self)
    }

    /// `self^n`, with `self^0 = 1`.
    pub fn pow(&self, n: u32) -> DiffOp {
        (0..n).fold(DiffOp::identity(self.vars), |acc, _| acc.compose(self))
    }
}

fn binom_big(n: u32, k: u32) -> BigInt {
    BigInt::from(rational::binomial(n as u64, k as u64))
}

/// Odometer over `0..=limits[j]`; false once exhausted.
fn next_multi(cur: &mut [u32], limits: &[u32]) -> bool {
    for j in 0..cur.len() {
        if cur[j] < limits[j] {
            cur[j] += 1;
            return true;
        }
        cur[j] = 0;
    }
    false
}

impl Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        self.check_vars(rhs.vars);
        let mut out = self.clone();
        for ((m, d), c) in &rhs.terms {
            out.add_term(m.clone(), d.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        self.check_vars(rhs.vars);
        let mut out = self.clone();
        for ((m, d), c) in &rhs.terms {
            out.add_term(m.clone(), d.clone(), -c);
        }
        out
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, ((m, d), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            if m.degree() > 0 {
                write!(f, "*{m}")?;
            }
            for (j, &k) in d.0.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*d{}", j + 1)?,
                    _ => write!(f, "*d{}^{k}", j + 1)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DiffOpRepr {
    #[serde(rename = "V")]
    vars: usize,
    terms: Vec<DiffTermRepr>,
}

#[derive(Serialize, Deserialize)]
struct DiffTermRepr {
    exp: Vec<u32>,
    deriv: Vec<u32>,
    coeff: String,
}

impl From<DiffOp> for DiffOpRepr {
    fn from(op: DiffOp) -> Self {
        DiffOpRepr {
            vars: op.vars,
            terms: op
                .terms
                .into_iter()
                .map(|((m, d), c)| DiffTermRepr {
                    exp: m.exponents().to_vec(),
                    deriv: d.0,
                    coeff: rational::format(&c),
                })
                .collect(),
        }
    }
}

impl TryFrom<DiffOpRepr> for DiffOp {
    type Error = Error;
    fn try_from(r: DiffOpRepr) -> Result<Self> {
        let mut op = DiffOp::zero(r.vars);
        for t in r.terms {
            for len in [t.exp.len(), t.deriv.len()] {
                if len != r.vars {
                    return Err(Error::LengthMismatch { expected: r.vars, got: len });
                }
            }
            let key = (Monomial::new(t.exp), DerivMulti(t.deriv));
            if op.terms.contains_key(&key) {
                return Err(Error::Parse("duplicate operator term".into()));
            }
            op.add_term(key.0, key.1, rational::parse(&t.coeff)?);
        }
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::monomials_up_to;
    use crate::rational::int;
    use proptest::prelude::*;

    fn mono(e: &[u32]) -> Poly {
        Poly::monomial(Monomial::new(e.to_vec()))
    }

    #[test]
    fn apply_examples() {
        let d = DiffOp::euler(2);
        assert_eq!(d.apply(&mono(&[1, 1])), mono(&[1, 1]).scale(&int(2)));
        let d1 = DiffOp::partial(1, 1);
        assert_eq!(d1.apply(&mono(&[2])), mono(&[1]).scale(&int(2)));
        let j00 = &DiffOp::euler(1) - &DiffOp::constant(1, int(2));
        assert!(j00.apply(&mono(&[2])).is_zero());
    }

    #[test]
    fn compose_examples() {
        let x = DiffOp::x(1, 1);
        let d = DiffOp::partial(1, 1);
        // ∂x = x∂ + 1
        assert_eq!(d.compose(&x), &DiffOp::euler(1) + &DiffOp::identity(1));
        assert_eq!(x.compose(&d), DiffOp::euler(1));
        assert_eq!(d.commutator(&x), DiffOp::identity(1));
        assert!(d.commutator(&d).is_zero());
    }

    #[test]
    fn euler_squared_two_vars() {
        let d = DiffOp::euler(2);
        let mut expected = DiffOp::euler(2);
        for j in 1..=2 {
            for k in 1..=2 {
                let mut mon = vec![0; 2];
                mon[j - 1] += 1;
                mon[k - 1] += 1;
                let mut der = vec![0; 2];
                der[j - 1] += 1;
                der[k - 1] += 1;
                expected.add_term(Monomial::new(mon), DerivMulti::new(der), int(1));
            }
        }
        let dd = d.compose(&d);
        assert_eq!(dd, expected);
        // independent check: D² m = deg(m)² m on all monomials of degree ≤ 3
        for m in monomials_up_to(2, 3) {
            let deg = m.degree() as i64;
            let p = Poly::monomial(m);
            assert_eq!(dd.apply(&p), p.scale(&int(deg * deg)));
        }
    }

    #[test]
    fn commutator_with_shifted_euler() {
        let j00 = &DiffOp::euler(1) - &DiffOp::constant(1, int(3));
        let d = DiffOp::partial(1, 1);
        assert_eq!(j00.commutator(&d), -&d);
        for m in monomials_up_to(1, 3) {
            let p = Poly::monomial(m);
            let lhs = &j00.apply(&d.apply(&p)) - &d.apply(&j00.apply(&p));
            assert_eq!(lhs, -&d.apply(&p));
        }
    }

    #[test]
    fn json_round_trip() {
        let op = &DiffOp::euler(2).scale(&crate::rational::frac(-1, 3)) + &DiffOp::partial(2, 2);
        let s = serde_json::to_string(&op).unwrap();
        let back: DiffOp = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    fn arb_op(vars: usize) -> impl Strategy<Value = DiffOp> {
        let term = (
            proptest::collection::vec(0u32..=2, vars),
            proptest::collection::vec(0u32..=2, vars),
            -3i64..=3,
        );
        proptest::collection::vec(term, 0..4).prop_map(move |ts| {
            let mut op = DiffOp::zero(vars);
            for (m, d, c) in ts {
                // keep coefficient degree and order within 2
                if m.iter().sum::<u32>() <= 2 && d.iter().sum::<u32>() <= 2 {
                    op.add_term(Monomial::new(m), DerivMulti::new(d), int(c));
                }
            }
            op
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn compose_agrees_with_sequential_apply(
            (f, g) in (1usize..=3).prop_flat_map(|v| (arb_op(v), arb_op(v)))
        ) {
            let fg = f.compose(&g);
            for m in monomials_up_to(f.vars(), 5) {
                let p = Poly::monomial(m);
                prop_assert_eq!(fg.apply(&p), f.apply(&g.apply(&p)));
            }
        }

        #[test]
        fn jacobi_identity(
            (f, g, h) in (1usize..=2).prop_flat_map(|v| (arb_op(v), arb_op(v), arb_op(v)))
        ) {
            let a = f.commutator(&g.commutator(&h));
            let b = g.commutator(&h.commutator(&f));
            let c = h.commutator(&f.commutator(&g));
            prop_assert!((&(&a + &b) + &c).is_zero());
        }
    }
}
