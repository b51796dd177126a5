//! Formal expansion of the Jacobi identity `[{Q,Q̄},Q]` for the abstract
//! superalgebra with a two-row constraint `S_Y {Q,Q} = 0`.
//!
//! Terms have the shape `W(w) Q_[q] V[v]`: `W(w) = δ_w^{b_1}`, `Q` carries
//! `Δ` symmetric labels, `V` is the ordered chain of `J`s whose lower indices
//! are `v` (the `b`s are fixed spectators). Labels are `a_1..a_Δ` (`0..Δ`)
//! and `c_1..c_Δ` (`Δ..2Δ`). The Young element acts by relabelling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{ser, Rational};
use crate::symm::{permutations, YoungElement};

/// Largest `Δ` the packed term keys support.
pub const MAX_DELTA: u32 = 7;

type Label = u8;

/// One term `W(w) Q_[q] V[v] δ[s]`; `spectators` are labels carried by plain
/// Kronecker deltas when the chain is shorter than `Δ - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormalTerm {
    pub w_slot: Label,
    pub q_indices: Vec<Label>,
    pub v_sequence: Vec<Label>,
    pub spectators: Vec<Label>,
}

impl FormalTerm {
    fn canonical(mut self) -> Self {
        self.q_indices.sort_unstable();
        self.spectators.sort_unstable();
        self
    }

    fn relabel(&self, map: &[Label]) -> FormalTerm {
        let m = |l: &Label| map[*l as usize];
        FormalTerm {
            w_slot: map[self.w_slot as usize],
            q_indices: self.q_indices.iter().map(m).collect(),
            v_sequence: self.v_sequence.iter().map(m).collect(),
            spectators: self.spectators.iter().map(m).collect(),
        }
        .canonical()
    }

    fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        std::iter::once(self.w_slot)
            .chain(self.q_indices.iter().copied())
            .chain(self.v_sequence.iter().copied())
            .chain(self.spectators.iter().copied())
    }

    fn pack(&self) -> u64 {
        self.labels().fold(0u64, |acc, l| (acc << 4) | l as u64)
    }

    fn unpack(key: u64, delta: usize, chain: usize) -> FormalTerm {
        let n = 2 * delta;
        let labels: Vec<Label> = (0..n).map(|i| ((key >> (4 * (n - 1 - i))) & 0xf) as Label).collect();
        let v_len = chain - 1;
        FormalTerm {
            w_slot: labels[0],
            q_indices: labels[1..=delta].to_vec(),
            v_sequence: labels[delta + 1..delta + 1 + v_len].to_vec(),
            spectators: labels[delta + 1 + v_len..].to_vec(),
        }
    }

    /// Each of the `2Δ` labels occurs exactly once.
    pub fn uses_all_labels(&self, delta: usize) -> bool {
        let mut seen = vec![false; 2 * delta];
        for l in self.labels() {
            if l as usize >= 2 * delta || seen[l as usize] {
                return false;
            }
            seen[l as usize] = true;
        }
        seen.into_iter().all(|s| s)
    }
}

fn label_name(l: Label, delta: usize) -> String {
    if (l as usize) < delta {
        format!("a{}", l + 1)
    } else {
        format!("c{}", l as usize - delta + 1)
    }
}

/// Integer-weighted sum of formal terms for a fixed `Δ` and chain length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSum {
    delta: usize,
    chain: usize,
    terms: BTreeMap<u64, i64>,
}

impl FormalSum {
    fn empty(delta: usize, chain: usize) -> Self {
        FormalSum { delta, chain, terms: BTreeMap::new() }
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Number of `J` factors in each `W`-chain.
    pub fn chain(&self) -> usize {
        self.chain
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, t: &FormalTerm) -> Rational {
        let c = self.terms.get(&t.clone().canonical().pack()).copied().unwrap_or(0);
        Rational::from_integer(BigInt::from(c))
    }

    pub fn terms(&self) -> impl Iterator<Item = (FormalTerm, Rational)> + '_ {
        self.terms.iter().map(|(&k, &c)| {
            (FormalTerm::unpack(k, self.delta, self.chain), Rational::from_integer(BigInt::from(c)))
        })
    }

    pub fn neg(&self) -> FormalSum {
        FormalSum {
            delta: self.delta,
            chain: self.chain,
            terms: self.terms.iter().map(|(&k, &c)| (k, -c)).collect(),
        }
    }

    pub fn display_term(&self, t: &FormalTerm) -> String {
        let n = |l: &Label| label_name(*l, self.delta);
        let q: Vec<String> = t.q_indices.iter().map(n).collect();
        let v: Vec<String> = t.v_sequence.iter().map(n).collect();
        let mut s = format!("W({}) Q[{}] V[{}]", n(&t.w_slot), q.join(","), v.join(","));
        if !t.spectators.is_empty() {
            let d: Vec<String> = t.spectators.iter().map(n).collect();
            s.push_str(&format!(" δ[{}]", d.join(",")));
        }
        s
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (t, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}) {}", self.display_term(&t))?;
        }
        Ok(())
    }
}

fn check_range(delta: u32, p: u32) -> Result<()> {
    if delta == 0 || delta > MAX_DELTA {
        return Err(Error::InvalidYoung(format!("Δ must lie in 1..={MAX_DELTA}, got {delta}")));
    }
    YoungElement::new(delta, p).map(|_| ())
}

fn a(i: usize) -> Label {
    (i - 1) as Label
}

fn c(delta: usize, j: usize) -> Label {
    (delta + j - 1) as Label
}

/// `V[Ĉ_j]` in every order `S[Ĉ_j]` produces; the first `chain - 1` labels
/// feed the `J`s and the rest become spectators.
fn chain_orders(delta: usize, j: usize, chain: usize) -> Vec<(Vec<Label>, Vec<Label>)> {
    let rest: Vec<Label> = (1..=delta).filter(|&m| m != j).map(|m| c(delta, m)).collect();
    permutations(rest.len())
        .into_iter()
        .map(|s| {
            let ordered: Vec<Label> = s.iter().map(|&i| rest[i]).collect();
            (ordered[..chain - 1].to_vec(), ordered[chain - 1..].to_vec())
        })
        .collect()
}

fn base_y(delta: usize, chain: usize) -> Vec<(FormalTerm, i64)> {
    let q: Vec<Label> = (1..=delta).map(a).collect();
    let mut out = Vec::new();
    for j in 1..=delta {
        for (v, s) in chain_orders(delta, j, chain) {
            let t = FormalTerm { w_slot: c(delta, j), q_indices: q.clone(), v_sequence: v, spectators: s };
            out.push((t.canonical(), 1));
        }
    }
    out
}

fn base_x(delta: usize, chain: usize) -> Vec<(FormalTerm, i64)> {
    let mut out = Vec::new();
    for i in 1..=delta {
        for j in 1..=delta {
            let q: Vec<Label> = std::iter::once(c(delta, j))
                .chain((1..=delta).filter(|&m| m != i).map(a))
                .collect();
            for (v, s) in chain_orders(delta, j, chain) {
                let t = FormalTerm { w_slot: a(i), q_indices: q.clone(), v_sequence: v, spectators: s };
                out.push((t.canonical(), -1));
            }
        }
    }
    out
}

/// Relabellings `ℓ ↦ π(τ(ℓ))` of `S_Y = R E_x` with their signs: `τ` runs over
/// the products of exchanges `(a_k c_k)`, `π` over the row permutations `R`.
fn young_relabellings(y: &YoungElement) -> (Vec<Vec<Label>>, Vec<(Vec<Label>, i64)>) {
    let delta = y.delta as usize;
    let n = 2 * delta;
    let two_p = 2 * y.p as usize;
    let mut exchanges = Vec::new();
    for mask in 0u32..(1 << two_p) {
        let mut map: Vec<Label> = (0..n as Label).collect();
        for k in 0..two_p {
            if mask & (1 << k) != 0 {
                map.swap(k, delta + k);
            }
        }
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        exchanges.push((map, sign));
    }
    let row1 = y.row1();
    let row2 = y.row2();
    let p2 = permutations(row2.len());
    let mut rows = Vec::new();
    for s1 in permutations(row1.len()) {
        for s2 in &p2 {
            let mut map: Vec<Label> = (0..n as Label).collect();
            for (k, &slot) in row1.iter().enumerate() {
                map[slot] = row1[s1[k]] as Label;
            }
            for (k, &slot) in row2.iter().enumerate() {
                map[slot] = row2[s2[k]] as Label;
            }
            rows.push(map);
        }
    }
    (rows, exchanges)
}

fn expand(delta: u32, p: u32, chain: usize, base: Vec<(FormalTerm, i64)>) -> Result<FormalSum> {
    check_range(delta, p)?;
    let d = delta as usize;
    if chain > d {
        return Err(Error::IndexOutOfRange { index: chain, max: d });
    }
    if chain == 0 {
        return Ok(FormalSum::empty(d, chain));
    }
    let y = YoungElement::new(delta, p)?;
    let (rows, exchanges) = young_relabellings(&y);
    // E_x is applied once to the base terms, R then acts on the result
    let mut after_x: HashMap<FormalTerm, i64> = HashMap::new();
    for (t, c) in &base {
        for (tau, sign) in &exchanges {
            *after_x.entry(t.relabel(tau)).or_insert(0) += c * sign;
        }
    }
    let mut seeds: Vec<(FormalTerm, i64)> = after_x.into_iter().filter(|(_, c)| *c != 0).collect();
    seeds.sort();
    let act = |pi: &Vec<Label>| -> HashMap<u64, i64> {
        let mut acc = HashMap::new();
        for (t, c) in &seeds {
            *acc.entry(t.relabel(pi).pack()).or_insert(0) += c;
        }
        acc
    };
    let merge = |mut x: HashMap<u64, i64>, y: HashMap<u64, i64>| {
        for (k, v) in y {
            *x.entry(k).or_insert(0) += v;
        }
        x
    };
    #[cfg(feature = "parallel")]
    let total = {
        use crate::par::*;
        rows.par_iter().map(act).reduce(HashMap::new, merge)
    };
    #[cfg(not(feature = "parallel"))]
    let total = rows.iter().map(act).fold(HashMap::new(), merge);
    let terms = total.into_iter().filter(|(_, c)| *c != 0).collect();
    Ok(FormalSum { delta: d, chain, terms })
}

/// `X = -S_Y Σ_{i,j} W(a_i) Q_[c_j, Â_i] S[Ĉ_j] V[Ĉ_j]`, fully expanded.
pub fn build_x(delta: u32, p: u32) -> Result<FormalSum> {
    build_x_chain(delta, p, delta as usize)
}

/// `Y = S_Y Σ_j W(c_j) Q_[A] S[Ĉ_j] V[Ĉ_j]`, fully expanded.
pub fn build_y(delta: u32, p: u32) -> Result<FormalSum> {
    build_y_chain(delta, p, delta as usize)
}

/// `X` with the `W` chain cut to `chain` generators; the remaining lower
/// labels ride on Kronecker deltas as in `W(k)` for `k < Δ`.
pub fn build_x_chain(delta: u32, p: u32, chain: usize) -> Result<FormalSum> {
    let base = if chain == 0 { Vec::new() } else { base_x(delta as usize, chain.min(delta as usize)) };
    expand(delta, p, chain, base)
}

pub fn build_y_chain(delta: u32, p: u32, chain: usize) -> Result<FormalSum> {
    let base = if chain == 0 { Vec::new() } else { base_y(delta as usize, chain.min(delta as usize)) };
    expand(delta, p, chain, base)
}

/// `O_1 = W(c_1) Q_[A] V[Ĉ_1]` in natural order; defined when `p ≥ 1`.
pub fn o1(delta: u32, p: u32, chain: usize) -> Option<FormalTerm> {
    let d = delta as usize;
    (p >= 1 && chain >= 1).then(|| {
        let rest: Vec<Label> = (2..=d).map(|j| c(d, j)).collect();
        FormalTerm {
            w_slot: c(d, 1),
            q_indices: (1..=d).map(a).collect(),
            v_sequence: rest[..chain - 1].to_vec(),
            spectators: rest[chain - 1..].to_vec(),
        }
    })
}

/// `O_2 = W(c_Δ) Q_[A] V[Ĉ_Δ]` in natural order; defined when `2p < Δ`.
pub fn o2(delta: u32, p: u32, chain: usize) -> Option<FormalTerm> {
    let d = delta as usize;
    (2 * p < delta && chain >= 1).then(|| {
        let rest: Vec<Label> = (1..d).map(|j| c(d, j)).collect();
        FormalTerm {
            w_slot: c(d, d),
            q_indices: (1..=d).map(a).collect(),
            v_sequence: rest[..chain - 1].to_vec(),
            spectators: rest[chain - 1..].to_vec(),
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JacobiReport {
    pub delta: u32,
    pub p: u32,
    #[serde(serialize_with = "ser::opt")]
    pub x1: Option<Rational>,
    #[serde(serialize_with = "ser::opt")]
    pub y1: Option<Rational>,
    #[serde(serialize_with = "ser::opt")]
    pub x2: Option<Rational>,
    #[serde(serialize_with = "ser::opt")]
    pub y2: Option<Rational>,
    #[serde(serialize_with = "ser::seq")]
    pub admissible_k: Vec<Rational>,
}

/// Solution set of `x + k y = 0`: `None` means every `k`.
fn linear_condition(x: &Rational, y: &Rational) -> Option<Vec<Rational>> {
    use num_traits::Zero;
    if y.is_zero() {
        if x.is_zero() {
            None
        } else {
            Some(Vec::new())
        }
    } else {
        Some(vec![-x / y])
    }
}

/// Reads off the coefficients of `O_1`, `O_2` and intersects the conditions
/// `X_i + k Y_i = 0` over the defined operators.
pub fn extract_coefficients(x: &FormalSum, y: &FormalSum, delta: u32, p: u32) -> JacobiReport {
    let chain = x.chain();
    let pick = |t: &Option<FormalTerm>, s: &FormalSum| t.as_ref().map(|t| s.coefficient(t));
    let (t1, t2) = (o1(delta, p, chain), o2(delta, p, chain));
    let (x1, y1, x2, y2) = (pick(&t1, x), pick(&t1, y), pick(&t2, x), pick(&t2, y));
    let mut admissible: Option<Vec<Rational>> = None;
    for (xi, yi) in [(&x1, &y1), (&x2, &y2)] {
        let (Some(xi), Some(yi)) = (xi, yi) else { continue };
        if let Some(sol) = linear_condition(xi, yi) {
            admissible = Some(match admissible {
                None => sol,
                Some(prev) => prev.into_iter().filter(|k| sol.contains(k)).collect(),
            });
        }
    }
    JacobiReport { delta, p, x1, y1, x2, y2, admissible_k: admissible.unwrap_or_default() }
}

/// Full report for one `(Δ, p)`.
pub fn jacobi(delta: u32, p: u32) -> Result<JacobiReport> {
    let x = build_x(delta, p)?;
    let y = build_y(delta, p)?;
    Ok(extract_coefficients(&x, &y, delta, p))
}

/// Reports for every `1 ≤ Δ ≤ Δ_max` and `0 ≤ 2p ≤ Δ`, in `(Δ, p)` order.
pub fn classify(delta_max: u32) -> Result<Vec<JacobiReport>> {
    if delta_max == 0 {
        return Err(Error::InvalidYoung("Δ_max must be at least 1".into()));
    }
    let mut out = Vec::new();
    for delta in 1..=delta_max {
        for p in 0..=delta / 2 {
            out.push(jacobi(delta, p)?);
        }
    }
    Ok(out)
}

/// Closed forms `(X_1, Y_1, X_2, Y_2)` for comparison with the expansion.
pub fn closed_forms(delta: u32, p: u32) -> (Option<Rational>, Option<Rational>, Option<Rational>, Option<Rational>) {
    use crate::rational::factorial;
    let (d, p64) = (delta as u64, p as u64);
    let base = factorial(d) * factorial(2 * p64) * factorial(d - 2 * p64);
    let r = |n: BigInt| Rational::from_integer(n);
    let defined1 = p >= 1;
    let defined2 = 2 * p < delta;
    (
        defined1.then(|| r(BigInt::from(1 + delta as i64 - 2 * p as i64) * &base)),
        defined1.then(|| r(base.clone())),
        defined2.then(|| r(-BigInt::from(delta) * &base)),
        defined2.then(|| r(base.clone())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn pack_round_trip() {
        let t = FormalTerm { w_slot: 3, q_indices: vec![0, 1], v_sequence: vec![2], spectators: vec![] };
        assert_eq!(FormalTerm::unpack(t.pack(), 2, 2), t);
        let t = FormalTerm { w_slot: 5, q_indices: vec![0, 1, 2], v_sequence: vec![4], spectators: vec![3] };
        assert_eq!(FormalTerm::unpack(t.pack(), 3, 2), t);
    }

    #[test]
    fn delta_one() {
        let y = build_y(1, 0).unwrap();
        for (t, _) in y.terms() {
            assert!(t.v_sequence.is_empty());
        }
        let r = jacobi(1, 0).unwrap();
        assert_eq!((r.x2.clone(), r.y2.clone()), (Some(int(-1)), Some(int(1))));
        assert_eq!(r.admissible_k, vec![int(1)]);
        assert_eq!(r.x1, None);
    }

    #[test]
    fn small_reports() {
        let r = jacobi(2, 1).unwrap();
        assert_eq!(r.x1, Some(int(4)));
        assert_eq!(r.admissible_k, vec![int(-1)]);
        assert_eq!(r.x2, None);
        let r = jacobi(2, 0).unwrap();
        assert_eq!((r.x2, r.y2), (Some(int(-8)), Some(int(4))));
        assert_eq!(r.admissible_k, vec![int(2)]);
        let r = jacobi(3, 1).unwrap();
        assert_eq!((r.x1, r.y1, r.x2, r.y2), (Some(int(24)), Some(int(12)), Some(int(-36)), Some(int(12))));
        assert!(r.admissible_k.is_empty());
    }

    #[test]
    fn closed_forms_up_to_three() {
        for delta in 1..=3 {
            for p in 0..=delta / 2 {
                let r = jacobi(delta, p).unwrap();
                assert_eq!((r.x1, r.y1, r.x2, r.y2), closed_forms(delta, p), "Δ={delta} p={p}");
            }
        }
    }

    #[test]
    fn sums_are_row_invariant() {
        for (delta, p) in [(2, 1), (3, 1), (3, 0)] {
            let y = YoungElement::new(delta, p).unwrap();
            let (rows, _) = young_relabellings(&y);
            for s in [build_x(delta, p).unwrap(), build_y(delta, p).unwrap()] {
                for (t, c) in s.terms() {
                    assert!(t.uses_all_labels(delta as usize));
                    for pi in rows.iter().step_by(7) {
                        assert_eq!(s.coefficient(&t.relabel(pi)), c);
                    }
                }
            }
        }
    }

    #[test]
    fn flipped_sign_loses_k_equals_delta() {
        let x = build_x(1, 0).unwrap().neg();
        let y = build_y(1, 0).unwrap();
        let r = extract_coefficients(&x, &y, 1, 0);
        assert!(!r.admissible_k.contains(&int(1)));
    }

    #[test]
    fn shorter_chains_give_the_same_conditions() {
        for delta in 1..=2u32 {
            for p in 0..=delta / 2 {
                let full = jacobi(delta, p).unwrap();
                for chain in 1..=delta as usize {
                    let x = build_x_chain(delta, p, chain).unwrap();
                    let y = build_y_chain(delta, p, chain).unwrap();
                    let r = extract_coefficients(&x, &y, delta, p);
                    assert_eq!(r.admissible_k, full.admissible_k, "Δ={delta} p={p} chain={chain}");
                }
                assert!(build_x_chain(delta, p, 0).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn range_errors() {
        assert!(build_x(3, 2).is_err());
        assert!(build_y(0, 0).is_err());
        assert!(classify(0).is_err());
    }
}
