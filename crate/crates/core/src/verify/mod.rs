//! Matrix representations on explicit bases, invariance checks, relation
//! checks, anticommutator fitting and exact spectra.

mod relations;
mod spectrum;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Operator;
use crate::gens::{self, GenContext, MultiIndex};
use crate::gradedop::GradedVector;
use crate::linalg::QMatrix;
use crate::polyspace::{basis, BasisVector, Block, Monomial, Poly, SpaceSpec};
use crate::rational::{ser, Rational};

pub use relations::{check_relation, fit_anticommutator, Relation};
pub use spectrum::{spectrum, within_tolerance, Eigenvalue, SpectrumOptions, SpectrumReport, UnresolvedFactor, FLOAT_TOLERANCE};

/// Exact matrix of an operator in the canonical basis of a space; column `j`
/// holds the image of basis vector `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpMatrix {
    pub spec: SpaceSpec,
    pub basis: Vec<BasisVector>,
    pub matrix: QMatrix,
}

fn index_of(basis: &[BasisVector]) -> HashMap<(Block, Monomial), usize> {
    basis.iter().enumerate().map(|(i, b)| ((b.block, b.monomial.clone()), i)).collect()
}

fn basis_input(b: &BasisVector, vars: usize) -> (Option<Poly>, Poly) {
    let m = Poly::monomial(b.monomial.clone());
    match b.block {
        Block::Scalar => (None, m),
        Block::Upper => (Some(m), Poly::zero(vars)),
        Block::Lower => (Some(Poly::zero(vars)), m),
    }
}

/// Image of one basis vector as `(block, polynomial)` pieces.
fn image(op: &Operator, b: &BasisVector, vars: usize) -> Vec<(Block, Poly)> {
    match (op, basis_input(b, vars)) {
        (Operator::Scalar(s), (None, m)) => vec![(Block::Scalar, s.apply(&m))],
        (op, (upper, lower)) => {
            let g = op.to_graded();
            let out = g.apply(&GradedVector::new(upper.unwrap_or_else(|| Poly::zero(vars)), lower));
            vec![(Block::Upper, out.upper), (Block::Lower, out.lower)]
        }
    }
}

fn check_shape(op: &Operator, spec: &SpaceSpec) -> Result<()> {
    if op.vars() != spec.vars() {
        return Err(Error::VarMismatch { left: spec.vars(), right: op.vars() });
    }
    if op.is_graded() && !spec.is_graded() {
        return Err(Error::InvalidSpec("graded operator on a scalar space".into()));
    }
    Ok(())
}

/// Matrix of `op` on `spec`; scalar operators act diagonally on graded spaces.
pub fn matrix_of(op: &Operator, spec: &SpaceSpec) -> Result<OpMatrix> {
    check_shape(op, spec)?;
    let basis = basis(spec);
    let index = index_of(&basis);
    let n = basis.len();
    let mut matrix = QMatrix::zeros(n, n);
    for (j, b) in basis.iter().enumerate() {
        for (block, poly) in image(op, b, spec.vars()) {
            for (m, c) in poly.terms() {
                let Some(&i) = index.get(&(block, m.clone())) else {
                    let offending = BasisVector { block, monomial: m.clone() };
                    return Err(Error::NotInvariant { basis: b.to_string(), offending: offending.to_string() });
                };
                matrix.set(i, j, c.clone());
            }
        }
    }
    Ok(OpMatrix { spec: *spec, basis, matrix })
}

/// `V`, `N`, `Δ` of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Params {
    #[serde(rename = "V")]
    pub vars: usize,
    #[serde(rename = "N")]
    pub degree: u32,
    pub delta: Option<u32>,
}

impl Params {
    pub fn new(vars: usize, degree: u32, delta: Option<u32>) -> Self {
        Params { vars, degree, delta }
    }

    pub fn space(&self) -> Result<SpaceSpec> {
        SpaceSpec::new(self.vars, self.degree, self.delta)
    }

    pub fn context(&self) -> Result<GenContext> {
        match self.delta {
            Some(d) => GenContext::new(self.vars, self.degree, d),
            None => Err(Error::InvalidSpec("this check needs Δ".into())),
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V={} N={}", self.vars, self.degree)?;
        if let Some(d) = self.delta {
            write!(f, " Δ={d}")?;
        }
        Ok(())
    }
}

/// First failing instance of a check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Which generators or indices failed, e.g. `a=0 b=1 c=1 d=0`.
    pub case: String,
    /// First basis vector on which the discrepancy acts nontrivially.
    pub basis: Option<String>,
    pub discrepancy: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub relation: String,
    pub params: Params,
    pub passed: bool,
    /// Number of instances compared.
    pub checked: usize,
    /// Extracted constant, e.g. `k` of the adjoint action.
    #[serde(serialize_with = "ser::opt", skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
    pub counterexample: Option<Counterexample>,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{} [{}]: {status} ({} checked)", self.relation, self.params, self.checked)?;
        if let Some(v) = &self.value {
            write!(f, ", value {v}")?;
        }
        if let Some(c) = &self.counterexample {
            write!(f, "\n  at {}: ", c.case)?;
            if let Some(b) = &c.basis {
                write!(f, "on {b} ")?;
            }
            write!(f, "discrepancy {}", c.discrepancy)?;
        }
        Ok(())
    }
}

/// Counterexample for a nonzero residual, located on the first basis vector
/// of `spec` it does not annihilate.
fn locate(case: String, residual: &Operator, spec: &SpaceSpec) -> Counterexample {
    let promoted;
    let op = if spec.is_graded() {
        promoted = Operator::Graded(residual.to_graded());
        &promoted
    } else {
        residual
    };
    for b in basis(spec) {
        if op.is_graded() != spec.is_graded() {
            break;
        }
        let pieces = image(op, &b, spec.vars());
        if pieces.iter().any(|(_, p)| !p.is_zero()) {
            let shown = match pieces.as_slice() {
                [(_, p)] => p.to_string(),
                [(_, u), (_, l)] => format!("({u}, {l})"),
                _ => unreachable!(),
            };
            return Counterexample { case, basis: Some(b.to_string()), discrepancy: shown };
        }
    }
    Counterexample { case, basis: None, discrepancy: residual.to_string() }
}

/// The gl(V+1) generators `J_a^b(N)` with labels.
pub fn scalar_generators(vars: usize, degree: u32) -> Vec<(String, Operator)> {
    let mut out = Vec::new();
    for a in 0..=vars {
        for b in 0..=vars {
            let op = gens::j_scalar(a, b, degree, vars).expect("indices in range");
            out.push((format!("J(a={a},b={b})"), op.into()));
        }
    }
    out
}

/// `J_a^b(N,Δ)`, every `Q_[A]` and every `Q̄^[B]`.
pub fn graded_generators(ctx: &GenContext) -> Vec<(String, Operator)> {
    let mut out = Vec::new();
    for a in 0..=ctx.vars {
        for b in 0..=ctx.vars {
            out.push((format!("J(a={a},b={b})"), gens::j_graded(a, b, ctx).expect("indices in range").into()));
        }
    }
    for m in MultiIndex::all(ctx.vars, ctx.delta as usize) {
        out.push((format!("Q{m}"), gens::q_gen(&m, ctx).expect("valid multi-index").into()));
        out.push((format!("Qbar{m}"), gens::qbar_gen(&m, ctx).expect("valid multi-index").into()));
    }
    out
}

/// Passes iff every operator maps every basis vector of `spec` into `spec`.
pub fn check_invariance(ops: &[(String, Operator)], spec: &SpaceSpec) -> CheckReport {
    let params = Params::new(spec.vars(), spec.degree(), spec.delta());
    let mut report = CheckReport {
        relation: "invariance".into(),
        params,
        passed: true,
        checked: 0,
        value: None,
        counterexample: None,
    };
    for (name, op) in ops {
        report.checked += 1;
        match matrix_of(op, spec) {
            Ok(_) => {}
            Err(Error::NotInvariant { basis, offending }) => {
                report.passed = false;
                report.counterexample =
                    Some(Counterexample { case: name.clone(), basis: Some(basis), discrepancy: offending });
                break;
            }
            Err(e) => {
                report.passed = false;
                report.counterexample = Some(Counterexample { case: name.clone(), basis: None, discrepancy: e.to_string() });
                break;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::weylop::DiffOp;

    #[test]
    fn j00_on_p11() {
        let spec = SpaceSpec::scalar(1, 1).unwrap();
        let m = matrix_of(&gens::j_scalar(0, 0, 1, 1).unwrap().into(), &spec).unwrap();
        assert_eq!(m.matrix, QMatrix::from_rows(vec![vec![int(-1), int(0)], vec![int(0), int(0)]]));
    }

    #[test]
    fn j10_is_nilpotent() {
        let spec = SpaceSpec::scalar(1, 1).unwrap();
        let m = matrix_of(&gens::j_scalar(1, 0, 1, 1).unwrap().into(), &spec).unwrap().matrix;
        // 1 ↦ N x = x, x ↦ 0
        assert_eq!(m.get(1, 0), &int(1));
        assert!((&m * &m).is_zero());
    }

    #[test]
    fn x_squared_is_not_invariant() {
        let spec = SpaceSpec::scalar(1, 1).unwrap();
        let x2 = DiffOp::x(1, 1).pow(2);
        match matrix_of(&x2.into(), &spec) {
            Err(Error::NotInvariant { basis, offending }) => {
                assert_eq!(basis, "1");
                assert_eq!(offending, "x1^2");
            }
            other => panic!("expected NotInvariant, got {other:?}"),
        }
    }

    #[test]
    fn qbar_zero_at_delta_one_is_invariant() {
        let ctx = GenContext::new(2, 3, 1).unwrap();
        let q = gens::qbar_gen(&MultiIndex::new(vec![0]), &ctx).unwrap();
        assert!(matrix_of(&q.into(), &ctx.space()).is_ok());
    }

    #[test]
    fn invariance_reports() {
        let spec = SpaceSpec::scalar(2, 3).unwrap();
        assert!(check_invariance(&scalar_generators(2, 3), &spec).passed);
        let ctx = GenContext::new(2, 3, 2).unwrap();
        assert!(check_invariance(&graded_generators(&ctx), &ctx.space()).passed);
        let bad = vec![("x1".to_string(), Operator::Scalar(DiffOp::x(2, 1)))];
        let r = check_invariance(&bad, &spec);
        assert!(!r.passed);
        let c = r.counterexample.unwrap();
        assert_eq!(c.basis.as_deref(), Some("x1^3"));
    }

    #[test]
    fn graded_on_scalar_space_is_rejected() {
        let ctx = GenContext::new(1, 2, 1).unwrap();
        let t = gens::grading_t(&ctx);
        assert!(matrix_of(&t.into(), &SpaceSpec::scalar(1, 2).unwrap()).is_err());
    }
}
