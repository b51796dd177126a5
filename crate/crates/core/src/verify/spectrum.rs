//! Exact spectra of operators restricted to an invariant space.
//!
//! The characteristic polynomial is exact. It is split into square-free
//! parts (Yun), then each part is searched for rational roots and rational
//! quadratic factors. Floating point only proposes candidates; every
//! accepted factor is verified by exact division.

use nalgebra::{Complex, DMatrix};
use num_traits::{One, Zero};
use serde::Serialize;

use super::matrix_of;
use crate::error::Result;
use crate::expr::Operator;
use crate::polyspace::SpaceSpec;
use crate::rational::{ser, to_f64, Rational};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpectrumOptions {
    /// Report floating approximations for factors with no rational splitting.
    pub float_fallback: bool,
}

/// Bound on the relative residual of floating eigenvalues.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Eigenvalue {
    Rational {
        #[serde(serialize_with = "ser::one")]
        value: Rational,
        multiplicity: usize,
    },
    /// Both roots of `λ² + bλ + c`, irreducible over `Q`.
    Quadratic {
        #[serde(serialize_with = "ser::one")]
        b: Rational,
        #[serde(serialize_with = "ser::one")]
        c: Rational,
        multiplicity: usize,
    },
    Approx {
        re: f64,
        im: f64,
        /// `|p(λ)| / Σ|p_k||λ|^k` for the factor `p` the root came from.
        residual: f64,
        multiplicity: usize,
    },
}

impl Eigenvalue {
    /// Number of roots (with multiplicity) this entry accounts for.
    pub fn count(&self) -> usize {
        match self {
            Eigenvalue::Rational { multiplicity, .. } | Eigenvalue::Approx { multiplicity, .. } => *multiplicity,
            Eigenvalue::Quadratic { multiplicity, .. } => 2 * multiplicity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub dim: usize,
    /// `det(λI - M)`, lowest degree first.
    #[serde(serialize_with = "ser::seq")]
    pub charpoly: Vec<Rational>,
    pub eigenvalues: Vec<Eigenvalue>,
    /// Factors left unsplit, lowest degree first, with their multiplicity.
    pub unresolved: Vec<UnresolvedFactor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnresolvedFactor {
    #[serde(serialize_with = "ser::seq")]
    pub coefficients: Vec<Rational>,
    pub multiplicity: usize,
}

impl SpectrumReport {
    /// Eigenvalues accounted for, with multiplicity, including unresolved factors.
    pub fn count(&self) -> usize {
        self.eigenvalues.iter().map(Eigenvalue::count).sum::<usize>()
            + self.unresolved.iter().map(|u| (u.coefficients.len() - 1) * u.multiplicity).sum::<usize>()
    }

    /// All eigenvalues are exact.
    pub fn is_exact(&self) -> bool {
        self.unresolved.is_empty() && !self.eigenvalues.iter().any(|e| matches!(e, Eigenvalue::Approx { .. }))
    }

    pub fn rational_eigenvalues(&self) -> Vec<(Rational, usize)> {
        self.eigenvalues
            .iter()
            .filter_map(|e| match e {
                Eigenvalue::Rational { value, multiplicity } => Some((value.clone(), *multiplicity)),
                _ => None,
            })
            .collect()
    }
}

type Poly = Vec<Rational>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn degree(p: &Poly) -> usize {
    p.len().saturating_sub(1)
}

fn monic(p: Poly) -> Poly {
    let lead = p.last().cloned().unwrap_or_else(Rational::one);
    p.into_iter().map(|c| c / &lead).collect()
}

fn derivative(p: &Poly) -> Poly {
    if p.len() <= 1 {
        return vec![Rational::zero()];
    }
    p.iter().enumerate().skip(1).map(|(k, c)| c * Rational::from_integer((k as i64).into())).collect()
}

fn divrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let b = trim(b.clone());
    let mut r = trim(a.clone());
    if r.len() < b.len() {
        return (vec![Rational::zero()], r);
    }
    let lead = b.last().unwrap().clone();
    let mut q = vec![Rational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &f * c;
        }
        q[shift] = f;
        r.pop();
        r = trim(r);
        if r.is_empty() {
            r.push(Rational::zero());
        }
    }
    (q, r)
}

fn is_zero(p: &Poly) -> bool {
    p.iter().all(Zero::is_zero)
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut x, mut y) = (trim(a.clone()), trim(b.clone()));
    while !is_zero(&y) {
        let (_, r) = divrem(&x, &y);
        x = y;
        y = r;
    }
    monic(x)
}

fn exact_div(a: &Poly, b: &Poly) -> Poly {
    let (q, r) = divrem(a, b);
    debug_assert!(is_zero(&r), "inexact division");
    trim(q)
}

/// Yun's square-free decomposition of a monic polynomial: `(a_i, i)` with `f = Π a_i^i`.
fn square_free(f: &Poly) -> Vec<(Poly, usize)> {
    let mut out = Vec::new();
    if degree(f) == 0 {
        return out;
    }
    let mut c = gcd(f, &derivative(f));
    let mut w = exact_div(f, &c);
    let mut i = 1;
    while degree(&c) > 0 {
        let y = gcd(&w, &c);
        let z = exact_div(&w, &y);
        if degree(&z) > 0 {
            out.push((monic(z), i));
        }
        i += 1;
        w = y.clone();
        c = exact_div(&c, &y);
    }
    if degree(&w) > 0 {
        out.push((monic(w), i));
    }
    out
}

fn eval_c(p: &[f64], z: Complex<f64>) -> Complex<f64> {
    p.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn relative_residual(p: &[f64], z: Complex<f64>) -> f64 {
    let scale: f64 = p.iter().rev().fold(0.0, |acc, &c| acc * z.norm() + c.abs());
    eval_c(p, z).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Floating roots of a monic square-free polynomial, polished by Newton steps.
fn float_roots(p: &Poly) -> Vec<Complex<f64>> {
    let d = degree(p);
    if d == 0 {
        return Vec::new();
    }
    let pf: Vec<f64> = p.iter().map(to_f64).collect();
    let mut comp = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -pf[i];
    }
    let dp: Vec<f64> = derivative(p).iter().map(to_f64).collect();
    comp.complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..50 {
                let fz = eval_c(&pf, z);
                let dz = eval_c(&dp, z);
                if dz.norm() == 0.0 {
                    break;
                }
                let step = fz / dz;
                z -= step;
                if step.norm() <= 1e-15 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

fn nearest(x: f64, denom: &Rational) -> Option<Rational> {
    let scaled = (x * to_f64(denom)).round();
    if !scaled.is_finite() || scaled.abs() > 9.0e15 {
        return None;
    }
    Some(Rational::from_integer((scaled as i64).into()) / denom)
}

fn divides(p: &Poly, f: &Poly) -> Option<Poly> {
    let (q, r) = divrem(p, f);
    is_zero(&r).then(|| trim(q))
}

/// Splits one square-free factor into verified rational roots and quadratics;
/// returns what is left.
fn split(mut p: Poly, denom: &Rational, mult: usize, out: &mut Vec<Eigenvalue>) -> Poly {
    let roots = float_roots(&p);
    let mut pending: Vec<Complex<f64>> = Vec::new();
    for z in roots {
        let tol = 0.5 / to_f64(denom);
        let candidate = (z.im.abs() < tol).then(|| nearest(z.re, denom)).flatten();
        let accepted = candidate.and_then(|r| {
            let lin = vec![-r.clone(), Rational::one()];
            divides(&p, &lin).map(|q| (r, q))
        });
        match accepted {
            Some((r, q)) => {
                p = q;
                out.push(Eigenvalue::Rational { value: r, multiplicity: mult });
            }
            None => pending.push(z),
        }
    }
    // λ² + bλ + c with L·b, L²·c integers when L·M is integral
    let d2 = denom * denom;
    let mut used = vec![false; pending.len()];
    for i in 0..pending.len() {
        for j in i + 1..pending.len() {
            if used[i] || used[j] || degree(&p) < 2 {
                continue;
            }
            let s = pending[i] + pending[j];
            let t = pending[i] * pending[j];
            if s.im.abs() * to_f64(denom) > 0.5 || t.im.abs() * to_f64(&d2) > 0.5 {
                continue;
            }
            let (Some(b), Some(c)) = (nearest(-s.re, denom), nearest(t.re, &d2)) else { continue };
            let quad = vec![c.clone(), b.clone(), Rational::one()];
            if let Some(q) = divides(&p, &quad) {
                used[i] = true;
                used[j] = true;
                p = q;
                out.push(Eigenvalue::Quadratic { b, c, multiplicity: mult });
            }
        }
    }
    p
}

fn sort_key(e: &Eigenvalue) -> (u8, Rational, Rational) {
    match e {
        Eigenvalue::Rational { value, .. } => (0, value.clone(), Rational::zero()),
        Eigenvalue::Quadratic { b, c, .. } => (1, b.clone(), c.clone()),
        Eigenvalue::Approx { .. } => (2, Rational::zero(), Rational::zero()),
    }
}

/// Spectrum of `op` on `spec`.
pub fn spectrum(op: &Operator, spec: &SpaceSpec, opts: SpectrumOptions) -> Result<SpectrumReport> {
    let m = matrix_of(op, spec)?.matrix;
    let dim = m.rows();
    let charpoly = m.charpoly();
    let denom = Rational::from_integer(m.to_rows().iter().flatten().fold(num_bigint::BigInt::one(), |acc, x| {
        num_integer::Integer::lcm(&acc, x.denom())
    }));
    let mut eigenvalues = Vec::new();
    let mut unresolved = Vec::new();
    for (factor, mult) in square_free(&charpoly) {
        let rest = split(factor, &denom, mult, &mut eigenvalues);
        if degree(&rest) == 0 {
            continue;
        }
        if opts.float_fallback {
            let pf: Vec<f64> = rest.iter().map(to_f64).collect();
            let mut approx: Vec<Eigenvalue> = float_roots(&rest)
                .into_iter()
                .map(|z| Eigenvalue::Approx {
                    re: z.re,
                    im: z.im,
                    residual: relative_residual(&pf, z),
                    multiplicity: mult,
                })
                .collect();
            approx.sort_by(|x, y| match (x, y) {
                (Eigenvalue::Approx { re: a, im: b, .. }, Eigenvalue::Approx { re: c, im: d, .. }) => {
                    a.total_cmp(c).then(b.total_cmp(d))
                }
                _ => std::cmp::Ordering::Equal,
            });
            eigenvalues.extend(approx);
        } else {
            unresolved.push(UnresolvedFactor { coefficients: rest, multiplicity: mult });
        }
    }
    eigenvalues.sort_by_key(sort_key);
    Ok(SpectrumReport { dim, charpoly, eigenvalues, unresolved })
}

/// Whether every floating eigenvalue of the report meets [`FLOAT_TOLERANCE`].
pub fn within_tolerance(report: &SpectrumReport) -> bool {
    report.eigenvalues.iter().all(|e| match e {
        Eigenvalue::Approx { residual, .. } => *residual <= FLOAT_TOLERANCE,
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gens::{self, GenContext};
    use crate::polyspace::{basis, Block};
    use crate::rational::{frac, int};
    use crate::weylop::DiffOp;

    #[test]
    fn euler_on_p21() {
        let spec = SpaceSpec::scalar(1, 2).unwrap();
        let r = spectrum(&DiffOp::euler(1).into(), &spec, SpectrumOptions::default()).unwrap();
        assert_eq!(r.rational_eigenvalues(), vec![(int(0), 1), (int(1), 1), (int(2), 1)]);
        assert!(r.is_exact());
    }

    #[test]
    fn j00_multiplicities() {
        let (v, n) = (2, 3);
        let spec = SpaceSpec::scalar(v, n).unwrap();
        let r = spectrum(&gens::j_scalar(0, 0, n, v).unwrap().into(), &spec, SpectrumOptions::default()).unwrap();
        let got = r.rational_eigenvalues();
        assert_eq!(got.len(), n as usize + 1);
        for (d, (val, mult)) in got.iter().enumerate() {
            assert_eq!(*val, int(d as i64 - n as i64));
            assert_eq!(*mult, d + 1);
        }
        assert_eq!(r.count(), r.dim);
    }

    #[test]
    fn grading_sectors_differ_by_delta_v() {
        let ctx = GenContext::new(2, 3, 1).unwrap();
        let spec = ctx.space();
        let r = spectrum(&gens::grading_t(&ctx).into(), &spec, SpectrumOptions::default()).unwrap();
        let vals = r.rational_eigenvalues();
        assert_eq!(vals.len(), 2);
        assert_eq!(&vals[1].0 - &vals[0].0, int(2));
        let upper = basis(&spec).iter().filter(|b| b.block == Block::Upper).count();
        assert!(vals.iter().any(|(_, m)| *m == upper));
    }

    #[test]
    fn quadratic_and_float() {
        // ∂ + 2 J_1^0 on P(1,1): 1 ↦ 2x, x ↦ 1, so λ² - 2
        let spec = SpaceSpec::scalar(1, 1).unwrap();
        let op = &DiffOp::partial(1, 1) + &gens::j_scalar(1, 0, 1, 1).unwrap().scale(&int(2));
        let r = spectrum(&op.clone().into(), &spec, SpectrumOptions::default()).unwrap();
        assert_eq!(r.eigenvalues, vec![Eigenvalue::Quadratic { b: int(0), c: int(-2), multiplicity: 1 }]);
        assert_eq!(r.count(), 2);
        let cubic = op.pow(3);
        let spec = SpaceSpec::scalar(1, 1).unwrap();
        let r = spectrum(&cubic.into(), &spec, SpectrumOptions { float_fallback: true }).unwrap();
        assert_eq!(r.count(), 2);
        assert!(within_tolerance(&r));
    }

    #[test]
    fn fractional_eigenvalues() {
        let spec = SpaceSpec::scalar(1, 2).unwrap();
        let op = DiffOp::euler(1).scale(&frac(1, 3));
        let r = spectrum(&op.into(), &spec, SpectrumOptions::default()).unwrap();
        assert_eq!(r.rational_eigenvalues(), vec![(int(0), 1), (frac(1, 3), 1), (frac(2, 3), 1)]);
    }

    #[test]
    fn square_free_parts() {
        // (λ-1)^2 (λ+2)
        let f = vec![int(2), int(-3), int(0), int(1)];
        let parts = square_free(&f);
        assert_eq!(parts, vec![(vec![int(2), int(1)], 1), (vec![int(-1), int(1)], 2)]);
    }
}
