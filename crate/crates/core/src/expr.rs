//! JSON expression language for building operators.
//!
//! A document is `{"V": v, "N": n, "delta": d, "expr": node}` (`delta`
//! optional). Leaves are generators:
//!
//! * `{"gen":"J","a":0,"b":1}`: `J_a^b`, graded when `delta` is given
//! * `{"gen":"Jt","a":..,"b":..}`: traceless `J̃_a^b` on `P(N,V)`
//! * `{"gen":"Q","idx":[..]}`, `{"gen":"Qbar","idx":[..]}`, `{"gen":"T"}`
//! * `{"gen":"W","A":[..],"B":[..],"k":k}`, `{"gen":"Cas","p":p}`
//! * `{"gen":"D"}`, `{"gen":"id"}`, `{"gen":"x","k":k}`, `{"gen":"d","k":k}`
//! * `{"op": <DiffOp JSON>}`, `{"graded": <GradedOp JSON>}`
//!
//! Internal nodes are `{"node":"add"|"mul"|"commutator"|"anticommutator","args":[..]}`,
//! `{"node":"scale","by":"p/q","args":[e]}` and `{"node":"pow","n":n,"args":[e]}`.
//! `mul` composes left to right as written. Scalar operators are promoted
//! to `diag(s, s)` when combined with graded ones.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gens::{self, GenContext, MultiIndex};
use crate::gradedop::{GradedOp, GradedVector};
use crate::polyspace::{Poly, SpaceSpec};
use crate::rational::{self, int};
use crate::weylop::DiffOp;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Scalar(DiffOp),
    Graded(GradedOp),
}

impl Operator {
    pub fn vars(&self) -> usize {
        match self {
            Operator::Scalar(op) => op.vars(),
            Operator::Graded(g) => g.vars(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Operator::Scalar(op) => op.is_zero(),
            Operator::Graded(g) => g.is_zero(),
        }
    }

    pub fn is_graded(&self) -> bool {
        matches!(self, Operator::Graded(_))
    }

    pub fn to_graded(&self) -> GradedOp {
        match self {
            Operator::Scalar(op) => GradedOp::scalar(op.clone()),
            Operator::Graded(g) => g.clone(),
        }
    }

    fn binary(
        &self,
        other: &Operator,
        scalar: impl Fn(&DiffOp, &DiffOp) -> DiffOp,
        graded: impl Fn(&GradedOp, &GradedOp) -> GradedOp,
    ) -> Result<Operator> {
        if self.vars() != other.vars() {
            return Err(Error::VarMismatch { left: self.vars(), right: other.vars() });
        }
        Ok(match (self, other) {
            (Operator::Scalar(a), Operator::Scalar(b)) => Operator::Scalar(scalar(a, b)),
            _ => Operator::Graded(graded(&self.to_graded(), &other.to_graded())),
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.binary(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.binary(other, |a, b| a - b, |a, b| a - b)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.binary(other, DiffOp::compose, GradedOp::compose)
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.binary(other, DiffOp::commutator, GradedOp::commutator)
    }

    pub fn anticommutator(&self, other: &Operator) -> Result<Operator> {
        self.binary(other, DiffOp::anticommutator, GradedOp::anticommutator)
    }

    pub fn scale(&self, c: &rational::Rational) -> Operator {
        match self {
            Operator::Scalar(op) => Operator::Scalar(op.scale(c)),
            Operator::Graded(g) => Operator::Graded(g.scale(c)),
        }
    }

    pub fn pow(&self, n: u32) -> Operator {
        match self {
            Operator::Scalar(op) => Operator::Scalar(op.pow(n)),
            Operator::Graded(g) => Operator::Graded(g.pow(n)),
        }
    }
}

impl std::fmt::Display for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Operator::Scalar(op) => write!(f, "{op}"),
            Operator::Graded(g) => write!(f, "{g}"),
        }
    }
}

impl From<DiffOp> for Operator {
    fn from(op: DiffOp) -> Self {
        Operator::Scalar(op)
    }
}

impl From<GradedOp> for Operator {
    fn from(g: GradedOp) -> Self {
        Operator::Graded(g)
    }
}

/// `V`, `N` and optional `Δ` shared by every node of a document.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExprContext {
    pub vars: usize,
    pub degree: u32,
    pub delta: Option<u32>,
}

impl ExprContext {
    pub fn space(&self) -> Result<SpaceSpec> {
        SpaceSpec::new(self.vars, self.degree, self.delta)
    }

    fn graded(&self, what: &str) -> Result<GenContext> {
        match self.delta {
            Some(d) => GenContext::new(self.vars, self.degree, d),
            None => Err(Error::Parse(format!("generator {what} needs \"delta\" in the context"))),
        }
    }
}

/// A parsed document: its context and the evaluated operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub context: ExprContext,
    pub operator: Operator,
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?} in {v}")))
}

fn uint(v: &Value, key: &str) -> Result<u64> {
    field(v, key)?
        .as_u64()
        .ok_or_else(|| Error::Parse(format!("field {key:?} must be a non-negative integer")))
}

fn multi(v: &Value, key: &str) -> Result<MultiIndex> {
    let arr = field(v, key)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("field {key:?} must be an array")))?;
    let idx = arr
        .iter()
        .map(|x| x.as_u64().map(|n| n as usize).ok_or_else(|| Error::Parse(format!("bad index {x}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiIndex::new(idx))
}

fn ratio(v: &Value) -> Result<rational::Rational> {
    match v {
        Value::String(s) => rational::parse(s),
        Value::Number(n) if n.is_i64() => Ok(int(n.as_i64().unwrap())),
        other => Err(Error::Parse(format!("expected a rational string, got {other}"))),
    }
}

fn var_index(v: &Value, ctx: &ExprContext) -> Result<usize> {
    let k = uint(v, "k")? as usize;
    if k == 0 || k > ctx.vars {
        return Err(Error::IndexOutOfRange { index: k, max: ctx.vars });
    }
    Ok(k)
}

fn generator(v: &Value, name: &str, ctx: &ExprContext) -> Result<Operator> {
    let vars = ctx.vars;
    Ok(match name {
        "J" => {
            let (a, b) = (uint(v, "a")? as usize, uint(v, "b")? as usize);
            match ctx.delta {
                Some(_) => gens::j_graded(a, b, &ctx.graded("J")?)?.into(),
                None => gens::j_scalar(a, b, ctx.degree, vars)?.into(),
            }
        }
        "Jt" => gens::j_sl(uint(v, "a")? as usize, uint(v, "b")? as usize, ctx.degree, vars)?.into(),
        "Q" => gens::q_gen(&multi(v, "idx")?, &ctx.graded("Q")?)?.into(),
        "Qbar" => gens::qbar_gen(&multi(v, "idx")?, &ctx.graded("Qbar")?)?.into(),
        "T" => gens::grading_t(&ctx.graded("T")?).into(),
        "W" => gens::w_tensor(&multi(v, "A")?, &multi(v, "B")?, uint(v, "k")? as usize, &ctx.graded("W")?)?.into(),
        "Cas" => {
            let p = uint(v, "p")? as u32;
            match ctx.delta {
                Some(_) => gens::graded_casimir(p, &ctx.graded("Cas")?).into(),
                None => gens::casimir(p, ctx.degree, vars).into(),
            }
        }
        "D" => DiffOp::euler(vars).into(),
        "id" => DiffOp::identity(vars).into(),
        "x" => DiffOp::x(vars, var_index(v, ctx)?).into(),
        "d" => DiffOp::partial(vars, var_index(v, ctx)?).into(),
        other => return Err(Error::Parse(format!("unknown generator {other:?}"))),
    })
}

fn args(v: &Value) -> Result<&Vec<Value>> {
    field(v, "args")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"args\" must be an array".into()))
}

fn single_arg(v: &Value, node: &str, ctx: &ExprContext) -> Result<Operator> {
    match args(v)?.as_slice() {
        [x] => eval(x, ctx),
        _ => Err(Error::Parse(format!("{node:?} takes exactly one argument"))),
    }
}

fn checked_vars(op: Operator, ctx: &ExprContext) -> Result<Operator> {
    if op.vars() != ctx.vars {
        return Err(Error::VarMismatch { left: ctx.vars, right: op.vars() });
    }
    Ok(op)
}

/// Evaluates one node in a context.
pub fn eval(v: &Value, ctx: &ExprContext) -> Result<Operator> {
    if let Some(name) = v.get("gen") {
        let name = name.as_str().ok_or_else(|| Error::Parse("\"gen\" must be a string".into()))?;
        return generator(v, name, ctx);
    }
    if let Some(op) = v.get("op") {
        let op: DiffOp = serde_json::from_value(op.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        return checked_vars(op.into(), ctx);
    }
    if let Some(g) = v.get("graded") {
        let g: GradedOp = serde_json::from_value(g.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        return checked_vars(g.into(), ctx);
    }
    let node = field(v, "node")?
        .as_str()
        .ok_or_else(|| Error::Parse("\"node\" must be a string".into()))?;
    match node {
        "add" | "mul" => {
            let mut items = args(v)?.iter().map(|x| eval(x, ctx));
            let first = items
                .next()
                .ok_or_else(|| Error::Parse(format!("{node:?} needs at least one argument")))??;
            items.try_fold(first, |acc, x| if node == "add" { acc.add(&x?) } else { acc.compose(&x?) })
        }
        "commutator" | "anticommutator" => match args(v)?.as_slice() {
            [x, y] => {
                let (x, y) = (eval(x, ctx)?, eval(y, ctx)?);
                if node == "commutator" {
                    x.commutator(&y)
                } else {
                    x.anticommutator(&y)
                }
            }
            _ => Err(Error::Parse(format!("{node:?} takes exactly two arguments"))),
        },
        "scale" => Ok(single_arg(v, node, ctx)?.scale(&ratio(field(v, "by")?)?)),
        "pow" => Ok(single_arg(v, node, ctx)?.pow(uint(v, "n")? as u32)),
        other => Err(Error::Parse(format!("unknown node {other:?}"))),
    }
}

fn context_of(doc: &Value) -> Result<ExprContext> {
    let vars = uint(doc, "V")? as usize;
    let degree = match doc.get("N") {
        Some(_) => uint(doc, "N")? as u32,
        None => 0,
    };
    let delta = match doc.get("delta") {
        Some(Value::Null) | None => None,
        Some(_) => Some(uint(doc, "delta")? as u32),
    };
    let ctx = ExprContext { vars, degree, delta };
    ctx.space()?;
    Ok(ctx)
}

/// Parses and evaluates a whole document.
pub fn parse_document(text: &str) -> Result<Document> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let context = context_of(&doc)?;
    let operator = eval(field(&doc, "expr")?, &context)?;
    Ok(Document { context, operator })
}

/// Applies an operator to a polynomial, or to `(upper, lower)` for graded operators.
pub fn apply(op: &Operator, upper: Option<&Poly>, lower: &Poly) -> GradedVector {
    match (op, upper) {
        (Operator::Scalar(s), None) => GradedVector::new(Poly::zero(s.vars()), s.apply(lower)),
        (op, upper) => {
            let up = upper.cloned().unwrap_or_else(|| Poly::zero(op.vars()));
            op.to_graded().apply(&GradedVector::new(up, lower.clone()))
        }
    }
}
