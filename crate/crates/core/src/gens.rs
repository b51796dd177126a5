//! Factories for the named operators: the `gl(V+1)` generators in scalar and
//! graded form, the fermionic multiplets `Q_[A]` and `Q̄^[B]`, the grading
//! operator, Casimirs, the symmetrized `W` tensors, and the `α_k` solver.
//!
//! Index convention: `j_scalar(a, b, ..)` is `J_a^b` with `a` the lower and
//! `b` the upper index. Index `0` is the affine slot (`x_0 ≡ 1`).

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradedop::GradedOp;
use crate::polyspace::{Monomial, SpaceSpec};
use crate::rational::{factorial, frac, int, Rational};
use crate::symm::permutations;
use crate::weylop::{DerivMulti, DiffOp};

/// Sorted multiset of `Δ` indices drawn from `0..=V`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(mut entries: Vec<usize>) -> Self {
        entries.sort_unstable();
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of nonzero entries: the degree of `x_{a_1}...x_{a_Δ}`.
    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|&&a| a != 0).count()
    }

    pub fn zero_count(&self) -> usize {
        self.len() - self.nonzero_count()
    }

    /// `[Â_i, a]`: drop the entry at position `i`, insert `a`, re-sort.
    pub fn replace(&self, i: usize, a: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[i] = a;
        MultiIndex::new(e)
    }

    fn check(&self, ctx: &GenContext) -> Result<()> {
        if self.len() != ctx.delta as usize {
            return Err(Error::LengthMismatch { expected: ctx.delta as usize, got: self.len() });
        }
        for &a in &self.0 {
            check_index(a, ctx.vars)?;
        }
        Ok(())
    }

    /// Every multiset of size `delta` over `0..=vars`, in lexicographic order.
    pub fn all(vars: usize, delta: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(delta);
        fn rec(start: usize, vars: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if left == 0 {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for a in start..=vars {
                cur.push(a);
                rec(a, vars, left - 1, cur, out);
                cur.pop();
            }
        }
        rec(0, vars, delta, &mut cur, &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// `V`, `N` and `Δ` of `P(N-Δ,V) ⊕ P(N,V)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GenContext {
    pub vars: usize,
    pub degree: u32,
    pub delta: u32,
}

impl GenContext {
    pub fn new(vars: usize, degree: u32, delta: u32) -> Result<Self> {
        SpaceSpec::graded(vars, degree, delta)?;
        Ok(GenContext { vars, degree, delta })
    }

    pub fn space(&self) -> SpaceSpec {
        SpaceSpec::graded(self.vars, self.degree, self.delta).expect("validated on construction")
    }
}

/// Coefficients `α_0..=α_Δ` of `{Q, Q̄} = Σ_k α_k W(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaCoefficients {
    pub delta: u32,
    pub values: Vec<Rational>,
}

impl AlphaCoefficients {
    pub fn get(&self, k: usize) -> &Rational {
        &self.values[k]
    }

    /// `α_Δ, α_{Δ-2}, ...`: the entries that can be nonzero, highest first.
    pub fn leading_parity(&self) -> Vec<Rational> {
        (0..=self.delta as usize)
            .rev()
            .step_by(2)
            .map(|k| self.values[k].clone())
            .collect()
    }
}

fn check_index(a: usize, vars: usize) -> Result<()> {
    if a > vars {
        Err(Error::IndexOutOfRange { index: a, max: vars })
    } else {
        Ok(())
    }
}

fn shifted_euler(vars: usize, shift: &Rational) -> DiffOp {
    &DiffOp::euler(vars) - &DiffOp::constant(vars, shift.clone())
}

/// `J_a^b(N)` acting on `P(N,V)`:
/// `J_0^0 = D-N`, `J_0^k = ∂_k`, `J_k^0 = -x_k(D-N)`, `J_k^l = -x_k ∂_l`.
pub fn j_scalar(a: usize, b: usize, degree: u32, vars: usize) -> Result<DiffOp> {
    check_index(a, vars)?;
    check_index(b, vars)?;
    let n = int(degree as i64);
    Ok(match (a, b) {
        (0, 0) => shifted_euler(vars, &n),
        (0, k) => DiffOp::partial(vars, k),
        (k, 0) => -&DiffOp::x(vars, k).compose(&shifted_euler(vars, &n)),
        (k, l) => -&DiffOp::x(vars, k).compose(&DiffOp::partial(vars, l)),
    })
}

/// Traceless generators `J̃_a^b = J_a^b - C_1/(V+1) δ_a^b` with `C_1 = -N`.
pub fn j_sl(a: usize, b: usize, degree: u32, vars: usize) -> Result<DiffOp> {
    let j = j_scalar(a, b, degree, vars)?;
    if a != b {
        return Ok(j);
    }
    let shift = frac(degree as i64, vars as i64 + 1);
    Ok(&j + &DiffOp::constant(vars, shift))
}

/// `J_a^b(N,Δ) = diag(J_a^b(N-Δ), J_a^b(N)) - ½ diag(1+Δ, 1-Δ) δ_a^b`.
pub fn j_graded(a: usize, b: usize, ctx: &GenContext) -> Result<GradedOp> {
    let upper = j_scalar(a, b, ctx.degree - ctx.delta, ctx.vars)?;
    let lower = j_scalar(a, b, ctx.degree, ctx.vars)?;
    if a != b {
        return Ok(GradedOp::diag(upper, lower));
    }
    let d = ctx.delta as i64;
    Ok(GradedOp::diag(
        &upper - &DiffOp::constant(ctx.vars, frac(1 + d, 2)),
        &lower - &DiffOp::constant(ctx.vars, frac(1 - d, 2)),
    ))
}

/// `Q_[A] = (-1)^δ x_{a_1}...x_{a_Δ} σ₋`, `δ` the number of nonzero entries.
pub fn q_gen(a: &MultiIndex, ctx: &GenContext) -> Result<GradedOp> {
    a.check(ctx)?;
    let mut exps = vec![0u32; ctx.vars];
    for &k in a.entries().iter().filter(|&&k| k != 0) {
        exps[k - 1] += 1;
    }
    let sign = if a.nonzero_count() % 2 == 0 { int(1) } else { int(-1) };
    let op = DiffOp::term(ctx.vars, Monomial::new(exps), DerivMulti::none(ctx.vars), sign);
    Ok(GradedOp::lowering(op))
}

/// Scalar part `q̄^[B] = Π_{m=1}^{z} (D-N+Δ-m) · ∂_{b_{z+1}}...∂_{b_Δ}` with
/// `z` the number of zero entries of `B`.
pub fn qbar_scalar(b: &MultiIndex, ctx: &GenContext) -> Result<DiffOp> {
    b.check(ctx)?;
    let mut orders = vec![0u32; ctx.vars];
    for &k in b.entries().iter().filter(|&&k| k != 0) {
        orders[k - 1] += 1;
    }
    let mut op = DiffOp::term(ctx.vars, Monomial::one(ctx.vars), DerivMulti::new(orders), int(1));
    let base = ctx.degree as i64 - ctx.delta as i64;
    for m in 1..=b.zero_count() as i64 {
        op = shifted_euler(ctx.vars, &int(base + m)).compose(&op);
    }
    Ok(op)
}

/// `Q̄^[B] = q̄^[B] σ₊`.
pub fn qbar_gen(b: &MultiIndex, ctx: &GenContext) -> Result<GradedOp> {
    Ok(GradedOp::raising(qbar_scalar(b, ctx)?))
}

/// Grading operator `T = Σ_a J_a^a(N,Δ)`.
pub fn grading_t(ctx: &GenContext) -> GradedOp {
    (0..=ctx.vars).fold(GradedOp::zero(ctx.vars), |acc, a| {
        &acc + &j_graded(a, a, ctx).expect("diagonal index in range")
    })
}

/// `C_p = Σ J_{a_1}^{a_2} J_{a_2}^{a_3} ... J_{a_p}^{a_1}` on `P(N,V)`; acts as
/// `(-1)^p N (N+V)^{p-1}`.
pub fn casimir(p: u32, degree: u32, vars: usize) -> DiffOp {
    let n = vars + 1;
    let gen: Vec<Vec<DiffOp>> = (0..n)
        .map(|a| (0..n).map(|b| j_scalar(a, b, degree, vars).unwrap()).collect())
        .collect();
    trace_power(&gen, p, DiffOp::zero(vars), DiffOp::identity(vars), |x, y| x.compose(y), |x, y| x + y)
}

/// The other contraction `Σ J_{a_2}^{a_1} J_{a_3}^{a_2} ... J_{a_1}^{a_p}`. Also
/// central, and equal to [`casimir`] for `p ≤ 2`; from `p = 3` on its value
/// is a different polynomial in `N`.
pub fn casimir_transposed(p: u32, degree: u32, vars: usize) -> DiffOp {
    let n = vars + 1;
    // gen[u][l] = J_l^u
    let gen: Vec<Vec<DiffOp>> = (0..n)
        .map(|u| (0..n).map(|l| j_scalar(l, u, degree, vars).unwrap()).collect())
        .collect();
    trace_power(&gen, p, DiffOp::zero(vars), DiffOp::identity(vars), |x, y| x.compose(y), |x, y| x + y)
}

/// Casimir `C_p` built from the graded generators `J_a^b(N,Δ)`.
pub fn graded_casimir(p: u32, ctx: &GenContext) -> GradedOp {
    let n = ctx.vars + 1;
    let gen: Vec<Vec<GradedOp>> = (0..n)
        .map(|a| (0..n).map(|b| j_graded(a, b, ctx).unwrap()).collect())
        .collect();
    trace_power(
        &gen,
        p,
        GradedOp::zero(ctx.vars),
        GradedOp::identity(ctx.vars),
        |x, y| x.compose(y),
        |x, y| x + y,
    )
}

/// `Σ_{a_1..a_p} M[a_1][a_2] M[a_2][a_3] ... M[a_p][a_1]` for a matrix of operators.
fn trace_power<T: Clone>(
    m: &[Vec<T>],
    p: u32,
    zero: T,
    one: T,
    mul: impl Fn(&T, &T) -> T,
    add: impl Fn(&T, &T) -> T,
) -> T {
    let n = m.len();
    if p == 0 {
        // trace of the identity matrix of operators
        return (0..n).fold(zero, |acc, _| add(&acc, &one));
    }
    let mut power: Vec<Vec<T>> = m.to_vec();
    for _ in 1..p {
        power = (0..n)
            .map(|x| {
                (0..n)
                    .map(|z| (0..n).fold(zero.clone(), |acc, y| add(&acc, &mul(&m[x][y], &power[y][z]))))
                    .collect()
            })
            .collect();
    }
    (0..n).fold(zero, |acc, x| add(&acc, &power[x][x]))
}

/// Memoized builder for `W_[A]^[B](k)`.
///
/// `W_[A]^[B](k) = (Δ!)^{-2} S[A] S[B] (J_{a_1}^{b_1}...J_{a_k}^{b_k} δ_{a_{k+1}}^{b_{k+1}}...δ_{a_Δ}^{b_Δ})`
/// with the graded generators; repeated indices keep the same `(Δ!)^{-2}` weight.
pub struct WTable {
    ctx: GenContext,
    gens: Vec<Vec<GradedOp>>,
    chains: HashMap<Vec<(usize, usize)>, GradedOp>,
    perms: Vec<Vec<usize>>,
}

impl WTable {
    pub fn new(ctx: GenContext) -> Self {
        let n = ctx.vars + 1;
        let gens = (0..n)
            .map(|a| (0..n).map(|b| j_graded(a, b, &ctx).unwrap()).collect())
            .collect();
        WTable { ctx, gens, chains: HashMap::new(), perms: permutations(ctx.delta as usize) }
    }

    pub fn context(&self) -> &GenContext {
        &self.ctx
    }

    fn chain(&mut self, key: &[(usize, usize)]) -> GradedOp {
        if let Some(op) = self.chains.get(key) {
            return op.clone();
        }
        let op = match key.split_last() {
            None => GradedOp::identity(self.ctx.vars),
            Some((&(a, b), rest)) => {
                let prefix = self.chain(rest);
                prefix.compose(&self.gens[a][b])
            }
        };
        self.chains.insert(key.to_vec(), op.clone());
        op
    }

    pub fn w(&mut self, a: &MultiIndex, b: &MultiIndex, k: usize) -> Result<GradedOp> {
        a.check(&self.ctx)?;
        b.check(&self.ctx)?;
        let delta = self.ctx.delta as usize;
        if k > delta {
            return Err(Error::IndexOutOfRange { index: k, max: delta });
        }
        let (ae, be) = (a.entries(), b.entries());
        let mut counts: HashMap<Vec<(usize, usize)>, i64> = HashMap::new();
        for s in &self.perms {
            for t in &self.perms {
                if (k..delta).any(|i| ae[s[i]] != be[t[i]]) {
                    continue;
                }
                let key: Vec<(usize, usize)> = (0..k).map(|i| (ae[s[i]], be[t[i]])).collect();
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        let mut keys: Vec<_> = counts.into_iter().collect();
        keys.sort();
        let mut out = GradedOp::zero(self.ctx.vars);
        for (key, count) in keys {
            out = &out + &self.chain(&key).scale(&int(count));
        }
        let norm = factorial(delta as u64);
        Ok(out.scale(&Rational::new(num_bigint::BigInt::one(), &norm * &norm)))
    }
}

/// `W_[A]^[B](k)` without memoization across calls.
pub fn w_tensor(a: &MultiIndex, b: &MultiIndex, k: usize, ctx: &GenContext) -> Result<GradedOp> {
    WTable::new(*ctx).w(a, b, k)
}

/// Solves `Π_{j=0}^{Δ-1} (y+j) = Σ_k α_k (y + (Δ-1)/2)^k` exactly.
pub fn solve_alpha(delta: u32) -> AlphaCoefficients {
    // rising product in y, coefficients lowest degree first
    let mut prod = vec![Rational::one()];
    for j in 0..delta {
        prod = poly_mul(&prod, &[int(j as i64), int(1)]);
    }
    // re-expand around t = y + c, i.e. substitute y = t - c (Horner)
    let c = frac(delta as i64 - 1, 2);
    let shift = [-c, int(1)];
    let mut out = vec![Rational::zero()];
    for coeff in prod.iter().rev() {
        out = poly_mul(&out, &shift);
        out[0] += coeff;
    }
    out.truncate(delta as usize + 1);
    out.resize(delta as usize + 1, Rational::zero());
    AlphaCoefficients { delta, values: out }
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
