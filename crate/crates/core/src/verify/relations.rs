//! Operator-level checks of the defining relations, and the inverse
//! problem of fitting `α_k` from the representation.

use std::collections::BTreeSet;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::{locate, matrix_of, scalar_generators, graded_generators, check_invariance, CheckReport, Params};
use crate::error::{Error, Result};
use crate::expr::Operator;
use crate::gens::{self, AlphaCoefficients, GenContext, MultiIndex, WTable};
use crate::gradedop::GradedOp;
use crate::linalg::{solve, Solution};
use crate::rational::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `[J_a^b, J_c^d] = δ_a^d J_c^b - δ_c^b J_a^d`, scalar or graded.
    GlComm,
    /// `[J_a^b, Q_[A]] = k δ_a^b Q_[A] - Σ δ_{a_k}^b Q_[Â_k, a]`.
    AdjointQ,
    /// `[J_a^b, Q̄^[A]] = -k δ_a^b Q̄^[A] + Σ δ_a^{a_k} Q̄^[Â_k, b]`.
    AdjointQbar,
    /// `[T, J] = 0`, `[T, Q] = ΔV Q`, `[T, Q̄] = -ΔV Q̄`.
    Grading,
    /// `Q Q = 0` and `Q̄ Q̄ = 0`.
    Nilpotent,
    /// `{Q_[A], Q̄^[B]} = Σ_k α_k W(k)`.
    Anticomm,
    /// `C_p = (-1)^p N (N+V)^{p-1}` on `P(N,V)`.
    Casimir,
    /// `[{Q_A,Q̄^B},Q_C] + [{Q_C,Q̄^B},Q_A] = 0` and its `Q̄Q̄Q` partner.
    Jacobi,
    /// Every generator preserves the space.
    Invariance,
}

impl Relation {
    pub const ALL: [Relation; 9] = [
        Relation::GlComm,
        Relation::AdjointQ,
        Relation::AdjointQbar,
        Relation::Grading,
        Relation::Nilpotent,
        Relation::Anticomm,
        Relation::Casimir,
        Relation::Jacobi,
        Relation::Invariance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Relation::GlComm => "gl_comm",
            Relation::AdjointQ => "adjoint_q",
            Relation::AdjointQbar => "adjoint_qbar",
            Relation::Grading => "grading",
            Relation::Nilpotent => "nilpotent",
            Relation::Anticomm => "anticomm",
            Relation::Casimir => "casimir",
            Relation::Jacobi => "jacobi",
            Relation::Invariance => "invariance",
        }
    }

    /// Whether the relation needs `Δ`.
    pub fn needs_delta(&self) -> bool {
        !matches!(self, Relation::GlComm | Relation::Casimir | Relation::Invariance)
    }
}

impl FromStr for Relation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown relation {s:?}")))
    }
}

/// One instance of a relation: a label and the residual that must vanish.
type Case = (String, Operator);

fn first_failure(cases: Vec<Case>) -> Option<Case> {
    cases.into_iter().find(|(_, r)| !r.is_zero())
}

/// Evaluates `f` on every item (in parallel when enabled) and keeps only
/// nonzero residuals, preserving item order.
fn residuals<T: Sync>(items: &[T], f: impl Fn(&T) -> Case + Sync + Send) -> (usize, Option<Case>) {
    #[cfg(feature = "parallel")]
    let all: Vec<Case> = {
        use crate::par::*;
        items.par_iter().map(&f).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let all: Vec<Case> = items.iter().map(&f).collect();
    (all.len(), first_failure(all))
}

fn report(rel: Relation, params: Params, checked: usize, failure: Option<Case>, value: Option<Rational>) -> Result<CheckReport> {
    let spec = params.space()?;
    let counterexample = failure.map(|(case, r)| locate(case, &r, &spec));
    Ok(CheckReport {
        relation: rel.name().into(),
        params,
        passed: counterexample.is_none(),
        checked,
        value,
        counterexample,
    })
}

fn delta(a: usize, b: usize) -> Rational {
    if a == b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

fn ops_sub(a: &Operator, b: &Operator) -> Operator {
    a.sub(b).expect("same ambient space")
}

fn gl_comm(params: Params) -> Result<CheckReport> {
    let n = params.vars + 1;
    let j: Vec<Vec<Operator>> = match params.delta {
        Some(_) => {
            let ctx = params.context()?;
            (0..n).map(|a| (0..n).map(|b| gens::j_graded(a, b, &ctx).unwrap().into()).collect()).collect()
        }
        None => (0..n)
            .map(|a| (0..n).map(|b| gens::j_scalar(a, b, params.degree, params.vars).unwrap().into()).collect())
            .collect(),
    };
    let tuples: Vec<[usize; 4]> = (0..n * n * n * n).map(|i| [i / (n * n * n), i / (n * n) % n, i / n % n, i % n]).collect();
    let (checked, failure) = residuals(&tuples, |&[a, b, c, d]| {
        let lhs = j[a][b].commutator(&j[c][d]).unwrap();
        let rhs = ops_sub(&j[c][b].scale(&delta(a, d)), &j[a][d].scale(&delta(c, b)));
        (format!("a={a} b={b} c={c} d={d}"), ops_sub(&lhs, &rhs))
    });
    report(Relation::GlComm, params, checked, failure, None)
}

/// `r / q` when `r` is a scalar multiple of the nonzero `q`.
fn ratio(r: &GradedOp, q: &GradedOp) -> Option<Rational> {
    let (entry_r, entry_q) = r.entries().into_iter().zip(q.entries()).find(|(_, eq)| !eq.is_zero())?;
    let (m, d, c) = entry_q.terms().next()?;
    let k = entry_r.coeff(m, d) / c;
    (*r == q.scale(&k)).then_some(k)
}

struct Multiplets {
    ctx: GenContext,
    multis: Vec<MultiIndex>,
    j: Vec<Vec<GradedOp>>,
    q: Vec<GradedOp>,
    qbar: Vec<GradedOp>,
}

impl Multiplets {
    fn new(ctx: GenContext) -> Self {
        let n = ctx.vars + 1;
        let multis = MultiIndex::all(ctx.vars, ctx.delta as usize);
        let j = (0..n).map(|a| (0..n).map(|b| gens::j_graded(a, b, &ctx).unwrap()).collect()).collect();
        let q = multis.iter().map(|m| gens::q_gen(m, &ctx).unwrap()).collect();
        let qbar = multis.iter().map(|m| gens::qbar_gen(m, &ctx).unwrap()).collect();
        Multiplets { ctx, multis, j, q, qbar }
    }

    fn pos(&self, m: &MultiIndex) -> usize {
        self.multis.iter().position(|x| x == m).expect("multi-index of the multiplet")
    }

    fn index_triples(&self) -> Vec<(usize, usize, usize)> {
        let n = self.ctx.vars + 1;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for i in 0..self.multis.len() {
                    out.push((a, b, i));
                }
            }
        }
        out
    }
}

/// `Σ_{k: A_k = from} G_[A with a_k → to]`, the multiplet sum of the adjoint action.
fn replaced_sum(m: &Multiplets, ops: &[GradedOp], idx: &MultiIndex, from: usize, to: usize) -> GradedOp {
    let mut out = GradedOp::zero(m.ctx.vars);
    for (i, &x) in idx.entries().iter().enumerate() {
        if x == from {
            out = &out + &ops[m.pos(&idx.replace(i, to))];
        }
    }
    out
}

fn adjoint(params: Params, bar: bool) -> Result<CheckReport> {
    let ctx = params.context()?;
    let m = Multiplets::new(ctx);
    let ops = if bar { &m.qbar } else { &m.q };
    let rel = if bar { Relation::AdjointQbar } else { Relation::AdjointQ };
    // extract k from the diagonal action on every member
    let mut k: Option<Rational> = None;
    for a in 0..=ctx.vars {
        for (i, idx) in m.multis.iter().enumerate() {
            let comm = m.j[a][a].commutator(&ops[i]);
            let sum = replaced_sum(&m, ops, idx, a, a);
            let r = if bar { &sum - &comm } else { &comm + &sum };
            let case = format!("a=b={a} A={idx}");
            match ratio(&r, &ops[i]) {
                Some(v) if k.as_ref().is_none_or(|k| *k == v) => k = Some(v),
                _ => {
                    let fail = (case, Operator::Graded(r));
                    return report(rel, params, 0, Some(fail), k);
                }
            }
        }
    }
    let kd = int(ctx.delta as i64);
    let triples = m.index_triples();
    let (checked, failure) = residuals(&triples, |&(a, b, i)| {
        let idx = &m.multis[i];
        let lhs = m.j[a][b].commutator(&ops[i]);
        let rhs = if bar {
            &replaced_sum(&m, ops, idx, a, b) - &ops[i].scale(&(&kd * delta(a, b)))
        } else {
            &ops[i].scale(&(&kd * delta(a, b))) - &replaced_sum(&m, ops, idx, b, a)
        };
        (format!("a={a} b={b} A={idx}"), Operator::Graded(&lhs - &rhs))
    });
    report(rel, params, checked, failure, k)
}

fn grading(params: Params) -> Result<CheckReport> {
    let ctx = params.context()?;
    let m = Multiplets::new(ctx);
    let t = gens::grading_t(&ctx);
    let weight = int(ctx.delta as i64 * ctx.vars as i64);
    let mut cases: Vec<(String, GradedOp, Rational)> = Vec::new();
    for a in 0..=ctx.vars {
        for b in 0..=ctx.vars {
            cases.push((format!("J(a={a},b={b})"), m.j[a][b].clone(), Rational::zero()));
        }
    }
    for (i, idx) in m.multis.iter().enumerate() {
        cases.push((format!("Q{idx}"), m.q[i].clone(), weight.clone()));
        cases.push((format!("Qbar{idx}"), m.qbar[i].clone(), -weight.clone()));
    }
    let (checked, failure) = residuals(&cases, |(name, g, w)| {
        (name.clone(), Operator::Graded(&t.commutator(g) - &g.scale(w)))
    });
    report(Relation::Grading, params, checked, failure, Some(weight))
}

fn nilpotent(params: Params) -> Result<CheckReport> {
    let ctx = params.context()?;
    let m = Multiplets::new(ctx);
    let n = m.multis.len();
    let pairs: Vec<(usize, usize, bool)> =
        (0..n).flat_map(|i| (0..n).flat_map(move |j| [(i, j, false), (i, j, true)])).collect();
    let (checked, failure) = residuals(&pairs, |&(i, j, bar)| {
        let (ops, name) = if bar { (&m.qbar, "Qbar") } else { (&m.q, "Q") };
        let label = format!("{name}{} {name}{}", m.multis[i], m.multis[j]);
        (label, Operator::Graded(ops[i].compose(&ops[j])))
    });
    report(Relation::Nilpotent, params, checked, failure, None)
}

fn w_combination(table: &mut WTable, alpha: &AlphaCoefficients, a: &MultiIndex, b: &MultiIndex) -> GradedOp {
    let vars = table.context().vars;
    (0..alpha.values.len()).fold(GradedOp::zero(vars), |acc, k| {
        if alpha.values[k].is_zero() {
            acc
        } else {
            &acc + &table.w(a, b, k).expect("valid W indices").scale(&alpha.values[k])
        }
    })
}

fn anticomm(params: Params) -> Result<CheckReport> {
    let ctx = params.context()?;
    let m = Multiplets::new(ctx);
    let alpha = gens::solve_alpha(ctx.delta);
    let n = m.multis.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let case = |table: &mut WTable, &(i, j): &(usize, usize)| {
        let (a, b) = (&m.multis[i], &m.multis[j]);
        let lhs = m.q[i].anticommutator(&m.qbar[j]);
        let rhs = w_combination(table, &alpha, a, b);
        (format!("A={a} B={b}"), Operator::Graded(&lhs - &rhs))
    };
    #[cfg(feature = "parallel")]
    let all: Vec<Case> = {
        use crate::par::*;
        pairs.par_iter().map_init(|| WTable::new(ctx), case).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let all: Vec<Case> = {
        let mut table = WTable::new(ctx);
        pairs.iter().map(|p| case(&mut table, p)).collect()
    };
    let checked = all.len();
    report(Relation::Anticomm, params, checked, first_failure(all), None)
}

/// Matrix-level check on `P(N,V)`: the Casimirs act as the expected scalars.
fn casimir(params: Params) -> Result<CheckReport> {
    let spec = crate::polyspace::SpaceSpec::scalar(params.vars, params.degree)?;
    let (v, n) = (params.vars as i64, params.degree as i64);
    let mut checked = 0;
    for p in 1..=params.vars as u32 + 1 {
        checked += 1;
        let op = gens::casimir(p, params.degree, params.vars);
        let expected = int(if p % 2 == 0 { 1 } else { -1 } * n) * num_traits::pow(int(n + v), p as usize - 1);
        let mat = matrix_of(&op.clone().into(), &spec)?;
        if mat.matrix.as_scalar() != Some(expected.clone()) {
            let residual = Operator::Scalar(&op - &crate::weylop::DiffOp::constant(params.vars, expected));
            let scalar = Params { delta: None, ..params };
            return report(Relation::Casimir, scalar, checked, Some((format!("p={p}"), residual)), None);
        }
    }
    report(Relation::Casimir, Params { delta: None, ..params }, checked, None, None)
}

fn jacobi(params: Params) -> Result<CheckReport> {
    let ctx = params.context()?;
    let m = Multiplets::new(ctx);
    let n = m.multis.len();
    let qqbar: Vec<Vec<GradedOp>> =
        (0..n).map(|i| (0..n).map(|j| m.q[i].anticommutator(&m.qbar[j])).collect()).collect();
    let triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |l| (i, j, l)))).collect();
    let (checked, failure) = residuals(&triples, |&(i, j, l)| {
        // [{Q_A,Q̄^B},Q_C] + [{Q_C,Q̄^B},Q_A] and [{Q_A,Q̄^B},Q̄^D] + [{Q_A,Q̄^D},Q̄^B]
        let qqq = &qqbar[i][j].commutator(&m.q[l]) + &qqbar[l][j].commutator(&m.q[i]);
        let qbb = &qqbar[i][j].commutator(&m.qbar[l]) + &qqbar[i][l].commutator(&m.qbar[j]);
        let (a, b, c) = (&m.multis[i], &m.multis[j], &m.multis[l]);
        let residual = if qqq.is_zero() { qbb } else { qqq };
        (format!("A={a} B={b} C={c}"), Operator::Graded(residual))
    });
    report(Relation::Jacobi, params, checked, failure, None)
}

fn invariance(params: Params) -> Result<CheckReport> {
    let spec = params.space()?;
    let ops = match params.delta {
        Some(_) => graded_generators(&params.context()?),
        None => scalar_generators(params.vars, params.degree),
    };
    Ok(check_invariance(&ops, &spec))
}

/// Checks one relation exactly at the operator level (matrix level for the
/// Casimir values and invariance).
pub fn check_relation(rel: Relation, params: Params) -> Result<CheckReport> {
    params.space()?;
    if rel.needs_delta() && params.delta.is_none() {
        return Err(Error::InvalidSpec(format!("relation {} needs Δ", rel.name())));
    }
    match rel {
        Relation::GlComm => gl_comm(params),
        Relation::AdjointQ => adjoint(params, false),
        Relation::AdjointQbar => adjoint(params, true),
        Relation::Grading => grading(params),
        Relation::Nilpotent => nilpotent(params),
        Relation::Anticomm => anticomm(params),
        Relation::Casimir => casimir(params),
        Relation::Jacobi => jacobi(params),
        Relation::Invariance => invariance(params),
    }
}

/// Solves `{Q_[A], Q̄^[B]} = Σ_k α_k W(k)` for `α` over every `(A, B)` and
/// every normal-form coefficient.
pub fn fit_anticommutator(ctx: &GenContext) -> Result<AlphaCoefficients> {
    let m = Multiplets::new(*ctx);
    let mut table = WTable::new(*ctx);
    let unknowns = ctx.delta as usize + 1;
    let mut rows: BTreeSet<(Vec<Rational>, Rational)> = BTreeSet::new();
    for (i, a) in m.multis.iter().enumerate() {
        for (j, b) in m.multis.iter().enumerate() {
            let lhs = m.q[i].anticommutator(&m.qbar[j]);
            let ws: Vec<GradedOp> = (0..unknowns).map(|k| table.w(a, b, k)).collect::<Result<_>>()?;
            let mut keys = BTreeSet::new();
            for op in std::iter::once(&lhs).chain(&ws) {
                for (e, entry) in op.entries().into_iter().enumerate() {
                    for (mono, d, _) in entry.terms() {
                        keys.insert((e, mono.clone(), d.clone()));
                    }
                }
            }
            for (e, mono, d) in keys {
                let row: Vec<Rational> = ws.iter().map(|w| w.entries()[e].coeff(&mono, &d)).collect();
                rows.insert((row, lhs.entries()[e].coeff(&mono, &d)));
            }
        }
    }
    let (a, b): (Vec<Vec<Rational>>, Vec<Rational>) = rows.into_iter().unzip();
    match solve(&a, &b) {
        Solution::Unique(values) => Ok(AlphaCoefficients { delta: ctx.delta, values }),
        Solution::Underdetermined { rank } => Err(Error::DegenerateFit { rank, needed: unknowns }),
        Solution::Inconsistent => Err(Error::InconsistentFit),
    }
}
