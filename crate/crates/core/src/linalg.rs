//! Exact linear algebra over `Q` and `Z`: matrices, ranks, linear solves and
//! characteristic polynomials. No floating point.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Dense matrix with exact rational entries, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn scale(&self, c: &Rational) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// `Some(c)` when the matrix equals `c·I`.
    pub fn as_scalar(&self) -> Option<Rational> {
        if self.rows != self.cols {
            return None;
        }
        if self.rows == 0 {
            return Some(Rational::zero());
        }
        let c = self.get(0, 0).clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if (i == j && *v != c) || (i != j && !v.is_zero()) {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn rank(&self) -> usize {
        rank(&self.to_rows())
    }

    /// Characteristic polynomial `det(λI - M)`, lowest degree first, monic.
    pub fn charpoly(&self) -> Vec<Rational> {
        assert_eq!(self.rows, self.cols, "characteristic polynomial of a non-square matrix");
        charpoly(self)
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch");
        let mut out = QMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shape mismatch");
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(rows: &mut [Vec<Rational>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank over `Q`.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Outcome of solving `A x = b` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<Rational>),
    /// Consistent but rank deficient.
    Underdetermined { rank: usize },
    Inconsistent,
}

/// Solves the (possibly overdetermined) system `A x = b` over `Q`.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Solution {
    assert_eq!(a.len(), b.len(), "system shape mismatch");
    let n = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&n) {
        return Solution::Inconsistent;
    }
    if pivots.len() < n {
        return Solution::Underdetermined { rank: pivots.len() };
    }
    Solution::Unique((0..n).map(|i| aug[i][n].clone()).collect())
}

/// Incremental fraction-free row echelon over `Z` for sparse integer rows.
///
/// Each pivot row is kept primitive (content 1, positive pivot), so entries
/// stay small and no rational arithmetic is needed.
#[derive(Clone, Debug, Default)]
pub struct IntEchelon {
    pivots: BTreeMap<usize, BTreeMap<usize, BigInt>>,
}

impl IntEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `row` against the basis; returns whether it was independent.
    pub fn insert(&mut self, row: BTreeMap<usize, BigInt>) -> bool {
        match self.reduce(row) {
            Some(r) => {
                let lead = *r.keys().next().unwrap();
                self.pivots.insert(lead, r);
                true
            }
            None => false,
        }
    }

    /// Whether `row` lies in the current span.
    pub fn contains(&self, row: BTreeMap<usize, BigInt>) -> bool {
        self.reduce(row).is_none()
    }

    fn reduce(&self, mut row: BTreeMap<usize, BigInt>) -> Option<BTreeMap<usize, BigInt>> {
        row.retain(|_, v| !v.is_zero());
        let mut from = 0usize;
        loop {
            let lead = row.range(from..).find(|(c, _)| self.pivots.contains_key(c)).map(|(c, _)| *c);
            let Some(c) = lead else { break };
            let p = &self.pivots[&c];
            let pv = &p[&c];
            let rv = row[&c].clone();
            let g = pv.gcd(&rv);
            let (fr, fp) = (pv / &g, &rv / &g);
            for v in row.values_mut() {
                *v *= &fr;
            }
            for (k, v) in p {
                let e = row.entry(*k).or_insert_with(BigInt::zero);
                *e -= &fp * v;
            }
            row.retain(|_, v| !v.is_zero());
            from = c + 1;
        }
        if row.is_empty() {
            return None;
        }
        let content = row.values().fold(BigInt::zero(), |g, v| g.gcd(v));
        let sign = if row.values().next().unwrap().is_negative() { -BigInt::one() } else { BigInt::one() };
        let d = content * sign;
        for v in row.values_mut() {
            *v = &*v / &d;
        }
        Some(row)
    }
}

/// Rank over `Z` (equivalently `Q`) of sparse integer rows.
pub fn int_rank<I>(rows: I) -> usize
where
    I: IntoIterator<Item = BTreeMap<usize, BigInt>>,
{
    let mut e = IntEchelon::new();
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

fn lcm_of_denominators(m: &QMatrix) -> BigInt {
    m.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Berkowitz algorithm on the integer matrix `L·M` (`L` the common
/// denominator), then rescaled: division-free on the integer side.
fn charpoly(m: &QMatrix) -> Vec<Rational> {
    let n = m.rows;
    let (l, int_poly) = integer_charpoly(m);
    // det(μI - L·M) = L^n det(λI - M) with μ = Lλ, so c_k(λ) = c_k(μ)·L^{k-n}
    let mut out = Vec::with_capacity(n + 1);
    let mut lpow = BigInt::one();
    let mut pows = vec![BigInt::one(); n + 1];
    for k in 1..=n {
        lpow *= &l;
        pows[k] = lpow.clone();
    }
    // int_poly is highest-first: int_poly[i] multiplies μ^{n-i}
    for k in 0..=n {
        let coeff = &int_poly[n - k];
        out.push(Rational::new(coeff.clone(), pows[n - k].clone()));
    }
    out
}

/// `(L, det(μI - L·M))` with `L` the common denominator of `M`; the
/// polynomial is monic over `Z`, highest degree first.
pub fn integer_charpoly(m: &QMatrix) -> (BigInt, Vec<BigInt>) {
    assert_eq!(m.rows, m.cols, "characteristic polynomial of a non-square matrix");
    let n = m.rows;
    let l = lcm_of_denominators(m);
    let a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| (m.get(i, j) * Rational::from_integer(l.clone())).to_integer()).collect())
        .collect();
    (l, berkowitz(&a))
}

/// Coefficients of `det(λI - A)`, highest degree first, over `Z`.
pub fn berkowitz(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = a.len();
    let mut p = vec![BigInt::one()];
    for r in 0..n {
        let mut t = vec![BigInt::zero(); r + 2];
        t[0] = BigInt::one();
        t[1] = -a[r][r].clone();
        let mut v: Vec<BigInt> = (0..r).map(|i| a[i][r].clone()).collect();
        for k in 0..r {
            let rv: BigInt = (0..r).map(|j| &a[r][j] * &v[j]).sum();
            t[k + 2] = -rv;
            if k + 1 < r {
                v = (0..r).map(|i| (0..r).map(|j| &a[i][j] * &v[j]).sum()).collect();
            }
        }
        let mut next = vec![BigInt::zero(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for j in 0..=i.min(r) {
                if !t[i - j].is_zero() && !p[j].is_zero() {
                    *slot += &t[i - j] * &p[j];
                }
            }
        }
        p = next;
    }
    p
}

/// `Π` of `(1..=n)`-style determinant by cofactor expansion; test oracle only.
#[cfg(test)]
pub(crate) fn det_by_permutations(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut total = Rational::zero();
    for perm in crate::symm::permutations(n) {
        let sign = crate::symm::Perm::from_images(perm.clone()).sign();
        let prod = (0..n).fold(Rational::one(), |acc, i| acc * &m[i][perm[i]]);
        if sign > 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use proptest::prelude::*;

    fn qm(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    #[test]
    fn rank_examples() {
        assert_eq!(qm(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(qm(&[&[1, 2], &[3, 4]]).rank(), 2);
        assert_eq!(qm(&[&[0, 0], &[0, 0]]).rank(), 0);
    }

    #[test]
    fn solve_cases() {
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)], vec![int(2), int(0)]];
        assert_eq!(solve(&a, &[int(3), int(1), int(4)]), Solution::Unique(vec![int(2), int(1)]));
        assert_eq!(solve(&a, &[int(3), int(1), int(5)]), Solution::Inconsistent);
        let b = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert_eq!(solve(&b, &[int(1), int(2)]), Solution::Underdetermined { rank: 1 });
    }

    #[test]
    fn charpoly_small() {
        // [[2,1],[1,2]]: λ² - 4λ + 3
        assert_eq!(qm(&[&[2, 1], &[1, 2]]).charpoly(), vec![int(3), int(-4), int(1)]);
        let m = QMatrix::from_rows(vec![vec![frac(1, 2), int(0)], vec![int(0), frac(-1, 3)]]);
        // (λ - 1/2)(λ + 1/3) = λ² - λ/6 - 1/6
        assert_eq!(m.charpoly(), vec![frac(-1, 6), frac(-1, 6), int(1)]);
        assert_eq!(QMatrix::zeros(0, 0).charpoly(), vec![int(1)]);
    }

    #[test]
    fn int_echelon_span() {
        let mut e = IntEchelon::new();
        let row = |v: &[(usize, i64)]| v.iter().map(|&(c, x)| (c, BigInt::from(x))).collect::<BTreeMap<_, _>>();
        assert!(e.insert(row(&[(0, 2), (1, 4)])));
        assert!(!e.insert(row(&[(0, -1), (1, -2)])));
        assert!(e.insert(row(&[(1, 3), (2, 1)])));
        assert!(e.contains(row(&[(0, 1), (1, 5), (2, 1)])));
        assert!(!e.contains(row(&[(2, 1)])));
        assert_eq!(e.rank(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn charpoly_constant_term_is_signed_det(
            entries in proptest::collection::vec((-4i64..=4, 1i64..=3), 16)
        ) {
            let n = 4;
            let rows: Vec<Vec<Rational>> = (0..n)
                .map(|i| (0..n).map(|j| { let (p, q) = entries[i * n + j]; frac(p, q) }).collect())
                .collect();
            let m = QMatrix::from_rows(rows.clone());
            let cp = m.charpoly();
            prop_assert_eq!(cp.len(), n + 1);
            prop_assert_eq!(&cp[n], &int(1));
            // det(-M) = (-1)^n det(M) = c_0
            prop_assert_eq!(&cp[0], &det_by_permutations(&rows));
            // trace
            let tr = (0..n).fold(int(0), |acc, i| acc + m.get(i, i));
            prop_assert_eq!(&cp[n - 1], &(-tr));
        }

        #[test]
        fn int_rank_matches_rational_rank(
            entries in proptest::collection::vec(-2i64..=2, 20)
        ) {
            let rows: Vec<Vec<Rational>> = entries.chunks(5).map(|r| r.iter().map(|&x| int(x)).collect()).collect();
            let sparse = entries.chunks(5).map(|r| {
                r.iter().enumerate().map(|(c, &x)| (c, BigInt::from(x))).collect::<BTreeMap<_, _>>()
            });
            prop_assert_eq!(int_rank(sparse), rank(&rows));
        }
    }
}
