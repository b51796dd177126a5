use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::{json, Value};

use qes_core::abstract_jacobi::{self, JacobiReport};
use qes_core::expr::{self, Operator};
use qes_core::gens::{self, GenContext};
use qes_core::polyspace::{basis, dimension};
use qes_core::rational::{self, int, Rational};
use qes_core::symm::{count_constraints, ConstraintCase};
use qes_core::verify::{self, CheckReport, Eigenvalue, Params, Relation, SpectrumOptions};
use qes_core::{Error, Poly, SpaceSpec};

#[derive(Parser)]
#[command(name = "qes", version, about = "Exact operator calculus on P(N,V) and P(N-Δ,V) ⊕ P(N,V)")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args, Clone, Copy)]
struct Space {
    /// Number of variables.
    #[arg(long = "V")]
    vars: usize,
    /// Degree bound of the lower block.
    #[arg(long = "N")]
    degree: u32,
    /// Grading shift; selects P(N-Δ,V) ⊕ P(N,V).
    #[arg(long)]
    delta: Option<u32>,
}

impl Space {
    fn spec(&self) -> qes_core::Result<SpaceSpec> {
        SpaceSpec::new(self.vars, self.degree, self.delta)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monomial basis of P(N,V), graded-lex order; upper block first when graded.
    Basis(Space),
    /// dim P(N,V) = C(N+V,V), plus C(N-Δ+V,V) when graded.
    Dim(Space),
    /// Evaluate an expression document and print the operator in normal form
    /// (x left, ∂ right).
    Gen {
        /// Expression document, or `-` for stdin.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Apply the operator of an expression document to a polynomial.
    Apply {
        #[arg(long)]
        spec: PathBuf,
        /// Polynomial JSON {"V":v,"terms":[{"exp":[..],"coeff":"p/q"}]}; lower block when graded.
        #[arg(long)]
        poly: String,
        /// Upper block polynomial for graded operators.
        #[arg(long)]
        upper: Option<String>,
    },
    /// Check a defining relation exactly:
    /// gl_comm [J_a^b, J_c^d] = δ_a^d J_c^b - δ_c^b J_a^d;
    /// adjoint_q [J_a^b, Q_A] = k δ_a^b Q_A - Σ δ^b_{a_i} Q_{A: a_i→a};
    /// adjoint_qbar [J_a^b, Q̄^A] = -k δ_a^b Q̄^A + Σ δ_a^{a_i} Q̄^{A: a_i→b};
    /// grading [T, Q] = ΔV Q, [T, Q̄] = -ΔV Q̄, [T, J] = 0;
    /// nilpotent Q Q = Q̄ Q̄ = 0;
    /// anticomm {Q_A, Q̄^B} = Σ_k α_k W_A^B(k);
    /// casimir C_p = (-1)^p N (N+V)^{p-1} on P(N,V);
    /// jacobi the QQQ̄ and Q̄Q̄Q super-Jacobi identities;
    /// invariance every generator preserves the space.
    /// Exits 0 only if every requested relation holds.
    Check {
        /// Relation name, or `all`.
        #[arg(long)]
        relation: String,
        #[command(flatten)]
        space: Space,
    },
    /// α_0..α_Δ from Π_{j<Δ}(y+j) = Σ_k α_k (y + (Δ-1)/2)^k.
    Alpha {
        #[arg(long)]
        delta: u32,
    },
    /// Fit α_k from the representation: solve {Q_A, Q̄^B} = Σ_k α_k W_A^B(k) over every (A,B).
    Fit {
        #[arg(long = "V")]
        vars: usize,
        #[arg(long = "N")]
        degree: u32,
        #[arg(long)]
        delta: u32,
    },
    /// Rank of the constraints S_Y {Q,Q} = 0 on the symmetric unknowns {Q_A, Q_C}.
    /// Case 1: one row of length 2Δ, closed form C(2Δ+V,V).
    /// Case 2: rows (Δ, Δ), closed forms Δ(Δ-1)/2 at V=1 and V(V+1)(V²+9V-4)/12 at Δ=2.
    Count {
        #[arg(long)]
        case: u32,
        #[arg(long = "V")]
        vars: usize,
        #[arg(long)]
        delta: u32,
    },
    /// Coefficients X_1, Y_1, X_2, Y_2 of O_1, O_2 in the Jacobi expansion X + k Y,
    /// with the admissible k; all p with 2p ≤ Δ unless --p is given.
    Jacobi {
        #[arg(long)]
        delta: u32,
        #[arg(long)]
        p: Option<u32>,
    },
    /// Admissible k for every 1 ≤ Δ ≤ Δ_max, 2p ≤ Δ. Exits 0 only if the sets are
    /// {Δ} at p = 0, {-1} at Δ = 2p and empty otherwise.
    Classify {
        #[arg(long = "delta-max")]
        delta_max: u32,
    },
    /// Exact spectrum of the operator of an expression document on its space.
    /// The eigenvalue count equals the dimension of the space.
    Spectrum {
        /// Expression document, or `-` for stdin.
        #[arg(long)]
        spec: PathBuf,
        /// Report floating roots for factors that do not split over Q or Q(√d).
        #[arg(long = "float")]
        float_fallback: bool,
    },
}

/// Failure of a command: exit code and a structured report.
struct Failure {
    code: u8,
    report: Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::NotInvariant { .. } => (1, "NotInvariant"),
            Error::DegenerateFit { .. } => (1, "DegenerateFit"),
            Error::InconsistentFit => (1, "InconsistentFit"),
            Error::InvalidSpec(_) => (2, "InvalidSpec"),
            Error::IndexOutOfRange { .. } => (2, "IndexOutOfRange"),
            Error::LengthMismatch { .. } => (2, "LengthMismatch"),
            Error::VarMismatch { .. } => (2, "VarMismatch"),
            Error::InvalidYoung(_) => (2, "InvalidYoung"),
            Error::OddDelta(_) => (2, "OddDelta"),
            Error::Parse(_) => (2, "Parse"),
        };
        let mut report = json!({ "kind": kind, "message": e.to_string() });
        match e {
            Error::NotInvariant { basis, offending } => {
                report["basis"] = json!(basis);
                report["offending"] = json!(offending);
            }
            Error::DegenerateFit { rank, needed } => {
                report["rank"] = json!(rank);
                report["needed"] = json!(needed);
            }
            _ => {}
        }
        Failure { code, report: json!({ "error": report }) }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, report: json!({ "error": { "kind": "Usage", "message": msg.into() } }) }
}

/// Printed output plus the exit code of a command that ran to completion.
struct Output {
    json: Value,
    text: String,
    ok: bool,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, ok: true }
    }
}

fn read_spec(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

fn parse_poly(text: &str) -> Result<Poly, Failure> {
    serde_json::from_str(text).map_err(|e| usage(format!("polynomial: {e}")))
}

fn rationals(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(|r| Value::String(rational::format(r))).collect())
}

fn joined(rs: &[Rational]) -> String {
    rs.iter().map(rational::format).collect::<Vec<_>>().join(", ")
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// `{"Δ,p": [k, ..]}` in `(Δ, p)` order.
struct AdmissibleSets<'a>(&'a [JacobiReport]);

impl Serialize for AdmissibleSets<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for r in self.0 {
            let ks: Vec<String> = r.admissible_k.iter().map(rational::format).collect();
            map.serialize_entry(&format!("{},{}", r.delta, r.p), &ks)?;
        }
        map.end()
    }
}

fn expected_admissible(r: &JacobiReport) -> Vec<Rational> {
    if r.p == 0 {
        vec![int(r.delta as i64)]
    } else if r.delta == 2 * r.p {
        vec![int(-1)]
    } else {
        Vec::new()
    }
}

fn jacobi_text(r: &JacobiReport) -> String {
    let show = |v: &Option<Rational>| v.as_ref().map_or("-".to_string(), rational::format);
    format!(
        "Δ={} p={}: X1={} Y1={} X2={} Y2={} admissible k: {{{}}}",
        r.delta,
        r.p,
        show(&r.x1),
        show(&r.y1),
        show(&r.x2),
        show(&r.y2),
        joined(&r.admissible_k)
    )
}

fn eigen_text(e: &Eigenvalue) -> String {
    match e {
        Eigenvalue::Rational { value, multiplicity } => format!("{} (×{multiplicity})", rational::format(value)),
        Eigenvalue::Quadratic { b, c, multiplicity } => {
            format!("roots of λ² + ({})λ + ({}) (×{multiplicity})", rational::format(b), rational::format(c))
        }
        Eigenvalue::Approx { re, im, residual, multiplicity } => {
            format!("≈ {re:.12} {im:+.12}i (×{multiplicity}, residual {residual:.1e})")
        }
    }
}

fn run(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Basis(space) => {
            let spec = space.spec()?;
            let names: Vec<String> = basis(&spec).iter().map(ToString::to_string).collect();
            Ok(Output::ok(json!({ "basis": names }), names.join("\n")))
        }
        Command::Dim(space) => {
            let d = dimension(&space.spec()?);
            Ok(Output::ok(json!({ "dim": d }), d.to_string()))
        }
        Command::Gen { spec } => {
            let doc = expr::parse_document(&read_spec(&spec)?)?;
            let text = operator_text(&doc.operator);
            Ok(Output::ok(json!({ "operator": to_json(&doc.operator) }), text))
        }
        Command::Apply { spec, poly, upper } => {
            let doc = expr::parse_document(&read_spec(&spec)?)?;
            let lower = parse_poly(&poly)?;
            let upper = upper.as_deref().map(parse_poly).transpose()?;
            for p in std::iter::once(&lower).chain(upper.as_ref()) {
                if p.vars() != doc.context.vars {
                    return Err(Error::VarMismatch { left: doc.context.vars, right: p.vars() }.into());
                }
            }
            if upper.is_some() && !doc.operator.is_graded() && doc.context.delta.is_none() {
                return Err(usage("--upper needs a graded operator or a delta in the document"));
            }
            let graded = doc.operator.is_graded() || upper.is_some();
            let out = expr::apply(&doc.operator, upper.as_ref().filter(|_| graded), &lower);
            if graded {
                let text = format!("({}, {})", out.upper, out.lower);
                Ok(Output::ok(json!({ "upper": to_json(&out.upper), "lower": to_json(&out.lower) }), text))
            } else {
                Ok(Output::ok(json!({ "result": to_json(&out.lower) }), out.lower.to_string()))
            }
        }
        Command::Check { relation, space } => {
            let relations: Vec<Relation> = if relation == "all" {
                Relation::ALL.into_iter().filter(|r| space.delta.is_some() || !r.needs_delta()).collect()
            } else {
                vec![relation.parse().map_err(Failure::from)?]
            };
            let params = Params::new(space.vars, space.degree, space.delta);
            let reports: Vec<CheckReport> =
                relations.into_iter().map(|r| verify::check_relation(r, params)).collect::<Result<_, _>>()?;
            let ok = reports.iter().all(|r| r.passed);
            let text = reports.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n");
            let json = match reports.as_slice() {
                [single] => to_json(single),
                many => json!({ "reports": to_json(&many), "passed": ok }),
            };
            Ok(Output { json, text, ok })
        }
        Command::Alpha { delta } => {
            let a = gens::solve_alpha(delta);
            Ok(Output::ok(json!({ "alpha": rationals(&a.values) }), alpha_text(&a.values)))
        }
        Command::Fit { vars, degree, delta } => {
            let ctx = GenContext::new(vars, degree, delta)?;
            let a = verify::fit_anticommutator(&ctx)?;
            Ok(Output::ok(json!({ "alpha": rationals(&a.values) }), alpha_text(&a.values)))
        }
        Command::Count { case, vars, delta } => {
            let case = ConstraintCase::from_number(case)?;
            let c = count_constraints(case, vars, delta)?;
            let json = json!({ "rank": c.rank, "unknowns": c.unknowns, "closed_form": c.closed_form });
            Ok(Output::ok(json, c.to_string()))
        }
        Command::Jacobi { delta, p } => {
            let reports = match p {
                Some(p) => vec![abstract_jacobi::jacobi(delta, p)?],
                None if delta == 0 => return Err(usage("--delta must be at least 1")),
                None => (0..=delta / 2).map(|p| abstract_jacobi::jacobi(delta, p)).collect::<Result<_, _>>()?,
            };
            let text = reports.iter().map(jacobi_text).collect::<Vec<_>>().join("\n");
            let json = match reports.as_slice() {
                [single] => to_json(single),
                many => to_json(&many),
            };
            Ok(Output::ok(json, text))
        }
        Command::Classify { delta_max } => {
            let reports = abstract_jacobi::classify(delta_max)?;
            let ok = reports.iter().all(|r| r.admissible_k == expected_admissible(r));
            let text = reports.iter().map(jacobi_text).collect::<Vec<_>>().join("\n");
            let json = json!({ "admissible": to_json(&AdmissibleSets(&reports)), "passed": ok });
            Ok(Output { json, text, ok })
        }
        Command::Spectrum { spec, float_fallback } => {
            let doc = expr::parse_document(&read_spec(&spec)?)?;
            let space = doc.context.space()?;
            let report = verify::spectrum(&doc.operator, &space, SpectrumOptions { float_fallback })?;
            let mut lines = vec![format!("dim {}", report.dim)];
            lines.extend(report.eigenvalues.iter().map(eigen_text));
            for u in &report.unresolved {
                lines.push(format!("unresolved factor [{}] (×{})", joined(&u.coefficients), u.multiplicity));
            }
            Ok(Output::ok(to_json(&report), lines.join("\n")))
        }
    }
}

fn operator_text(op: &Operator) -> String {
    match op {
        Operator::Scalar(s) => s.to_string(),
        Operator::Graded(g) => g.to_string(),
    }
}

fn alpha_text(values: &[Rational]) -> String {
    values.iter().enumerate().map(|(k, a)| format!("α_{k} = {}", rational::format(a))).collect::<Vec<_>>().join("\n")
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("QES_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| usage("QES_THREADS must be a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(out) => {
            match cli.format {
                Format::Json => println!("{}", out.json),
                Format::Text => println!("{}", out.text),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            match cli.format {
                Format::Json => println!("{}", f.report),
                Format::Text => eprintln!("error: {}", f.report["error"]["message"].as_str().unwrap_or_default()),
            }
            ExitCode::from(f.code)
        }
    }
}
