//! Permutations, symmetrizers and two-row Young elements acting on the
//! index slots of `{Q_[A], Q_[C]}`, and exact counting of the independent
//! constraints `S_Y {Q_[A], Q_[C]} = 0`.
//!
//! Slots `0..Δ` hold `a_1..a_Δ`, slots `Δ..2Δ` hold `c_1..c_Δ`. A permutation
//! `g` acts on a formal tensor by relabelling: `(g·T)(v) = T(v ∘ g)`, so the
//! group-algebra product `g h` acts as "first `h`, then `g`".

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gens::MultiIndex;
use crate::linalg::IntEchelon;
use crate::rational::{binomial, Rational};

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Self {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            assert!(i < images.len() && !seen[i], "not a permutation: {images:?}");
            seen[i] = true;
        }
        Perm(images)
    }

    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(i, j);
        Perm(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.len(), other.len(), "permutation size mismatch");
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Perm(inv)
    }

    pub fn sign(&self) -> i64 {
        let mut seen = vec![false; self.len()];
        let mut parity = 0;
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i];
                len += 1;
            }
            parity += len - 1;
        }
        if parity % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Integer combination of permutations of a fixed number of slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAlgebra {
    slots: usize,
    terms: BTreeMap<Perm, i64>,
}

impl GroupAlgebra {
    pub fn identity(slots: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Perm::identity(slots), 1);
        GroupAlgebra { slots, terms }
    }

    /// `S[L]`: sum over all permutations of the listed slots.
    pub fn symmetrizer(slots: usize, subset: &[usize]) -> Self {
        let mut terms = BTreeMap::new();
        for p in permutations(subset.len()) {
            let mut img: Vec<usize> = (0..slots).collect();
            for (k, &s) in subset.iter().enumerate() {
                img[s] = subset[p[k]];
            }
            *terms.entry(Perm(img)).or_insert(0) += 1;
        }
        GroupAlgebra { slots, terms }
    }

    /// `E - (i j)`.
    pub fn antisym_pair(slots: usize, i: usize, j: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Perm::identity(slots), 1);
        terms.insert(Perm::transposition(slots, i, j), -1);
        GroupAlgebra { slots, terms }
    }

    pub fn scale(&self, c: i64) -> Self {
        let terms = if c == 0 {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(p, v)| (p.clone(), v * c)).collect()
        };
        GroupAlgebra { slots: self.slots, terms }
    }

    pub fn mul(&self, other: &GroupAlgebra) -> GroupAlgebra {
        assert_eq!(self.slots, other.slots, "group algebra size mismatch");
        let mut terms: BTreeMap<Perm, i64> = BTreeMap::new();
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                *terms.entry(p.compose(q)).or_insert(0) += a * b;
            }
        }
        terms.retain(|_, v| *v != 0);
        GroupAlgebra { slots: self.slots, terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Perm, i64)> {
        self.terms.iter().map(|(p, c)| (p, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Two-row Young element for `{Q_[A], Q_[C]}` with rows of length `2Δ-2p` and `2p`.
///
/// Row 1 is `[a_1..a_Δ, c_{2p+1}..c_Δ]`, row 2 is `[c_1..c_{2p}]`, and
/// `S_Y = S[row1] S[row2] E_x` with `E_x = Π_{k=1}^{2p} (E - (a_k, c_k))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct YoungElement {
    pub delta: u32,
    pub p: u32,
}

impl YoungElement {
    pub fn new(delta: u32, p: u32) -> Result<Self> {
        if 2 * p > delta {
            return Err(Error::InvalidYoung(format!("2p = {} exceeds Δ = {delta}", 2 * p)));
        }
        Ok(YoungElement { delta, p })
    }

    pub fn slots(&self) -> usize {
        2 * self.delta as usize
    }

    pub fn a_slot(&self, i: usize) -> usize {
        i - 1
    }

    pub fn c_slot(&self, j: usize) -> usize {
        self.delta as usize + j - 1
    }

    pub fn row1(&self) -> Vec<usize> {
        let d = self.delta as usize;
        let two_p = 2 * self.p as usize;
        (1..=d).map(|i| self.a_slot(i)).chain((two_p + 1..=d).map(|j| self.c_slot(j))).collect()
    }

    pub fn row2(&self) -> Vec<usize> {
        (1..=2 * self.p as usize).map(|j| self.c_slot(j)).collect()
    }

    pub fn exchange(&self) -> GroupAlgebra {
        (1..=2 * self.p as usize).fold(GroupAlgebra::identity(self.slots()), |acc, k| {
            acc.mul(&GroupAlgebra::antisym_pair(self.slots(), self.a_slot(k), self.c_slot(k)))
        })
    }

    pub fn row_symmetrizer(&self) -> GroupAlgebra {
        let n = self.slots();
        GroupAlgebra::symmetrizer(n, &self.row1()).mul(&GroupAlgebra::symmetrizer(n, &self.row2()))
    }

    /// The full element `S[row1] S[row2] E_x`.
    pub fn element(&self) -> GroupAlgebra {
        self.row_symmetrizer().mul(&self.exchange())
    }

    /// Unreduced term count `(2Δ-2p)! (2p)! 2^{2p}`.
    pub fn expanded_terms(&self) -> u64 {
        let f = |n: u64| (1..=n).product::<u64>();
        let d = self.delta as u64;
        let p = self.p as u64;
        f(2 * d - 2 * p) * f(2 * p) * (1u64 << (2 * p))
    }
}

/// Unknowns `{Q_[A], Q_[C]}` as unordered pairs of multi-indices.
#[derive(Clone, Debug)]
pub struct SymUnknowns {
    pub vars: usize,
    pub delta: usize,
    multis: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl SymUnknowns {
    pub fn new(vars: usize, delta: usize) -> Self {
        let multis = MultiIndex::all(vars, delta);
        let position = multis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        SymUnknowns { vars, delta, multis, position }
    }

    pub fn multiplet_size(&self) -> usize {
        self.multis.len()
    }

    pub fn count(&self) -> usize {
        let n = self.multis.len();
        n * (n + 1) / 2
    }

    /// Column id of `{Q_A, Q_C}`, symmetric in `A ↔ C`.
    pub fn id(&self, a: &MultiIndex, c: &MultiIndex) -> usize {
        let (i, j) = (self.position[a], self.position[c]);
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let n = self.multis.len();
        lo * n - lo * (lo.saturating_sub(1)) / 2 + (hi - lo)
    }

    pub fn pair(&self, id: usize) -> (MultiIndex, MultiIndex) {
        let n = self.multis.len();
        for lo in 0..n {
            for hi in lo..n {
                if self.id(&self.multis[lo], &self.multis[hi]) == id {
                    return (self.multis[lo].clone(), self.multis[hi].clone());
                }
            }
        }
        panic!("unknown id {id} out of range");
    }

    fn id_of_values(&self, values: &[usize]) -> usize {
        let a = MultiIndex::new(values[..self.delta].to_vec());
        let c = MultiIndex::new(values[self.delta..].to_vec());
        self.id(&a, &c)
    }
}

/// A concrete symmetric tensor `T(A, C) = T(C, A)`; missing entries are zero.
#[derive(Clone, Debug, Default)]
pub struct SymTensor {
    entries: BTreeMap<(MultiIndex, MultiIndex), Rational>,
}

impl SymTensor {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(a: MultiIndex, c: MultiIndex) -> (MultiIndex, MultiIndex) {
        if a <= c {
            (a, c)
        } else {
            (c, a)
        }
    }

    pub fn set(&mut self, a: MultiIndex, c: MultiIndex, v: Rational) {
        self.entries.insert(Self::key(a, c), v);
    }

    pub fn get(&self, a: &MultiIndex, c: &MultiIndex) -> Rational {
        self.entries
            .get(&Self::key(a.clone(), c.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

/// Linear form in the unknowns `{Q_A, Q_C}`: unknown id → integer coefficient.
pub type LinearForm = BTreeMap<usize, i64>;

/// Component `values` of `S_Y {Q_[A], Q_[C]}` as a linear form in the unknowns.
pub fn apply_young(element: &GroupAlgebra, unknowns: &SymUnknowns, values: &[usize]) -> Result<LinearForm> {
    if values.len() != element.slots || element.slots != 2 * unknowns.delta {
        return Err(Error::InvalidYoung(format!(
            "slot count {} does not match 2Δ = {}",
            values.len(),
            2 * unknowns.delta
        )));
    }
    let mut form = LinearForm::new();
    let mut buf = vec![0usize; values.len()];
    for (g, c) in element.terms() {
        for (s, slot) in buf.iter_mut().enumerate() {
            *slot = values[g.apply(s)];
        }
        *form.entry(unknowns.id_of_values(&buf)).or_insert(0) += c;
    }
    form.retain(|_, v| *v != 0);
    Ok(form)
}

/// Component `values` of `S_Y T` for a concrete symmetric tensor.
pub fn apply_young_to(element: &GroupAlgebra, delta: usize, t: &SymTensor, values: &[usize]) -> Rational {
    let mut total = Rational::zero();
    for (g, c) in element.terms() {
        let v: Vec<usize> = (0..values.len()).map(|s| values[g.apply(s)]).collect();
        let a = MultiIndex::new(v[..delta].to_vec());
        let cc = MultiIndex::new(v[delta..].to_vec());
        total += t.get(&a, &cc) * Rational::from_integer(BigInt::from(c));
    }
    total
}

/// Which Young diagram the `{Q,Q}` constraint removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ConstraintCase {
    /// `p = 0`: one row of length `2Δ`.
    Symmetric,
    /// `p = Δ/2`: two rows of length `Δ`.
    TwoRow,
}

impl ConstraintCase {
    pub fn from_number(case: u32) -> Result<Self> {
        match case {
            1 => Ok(ConstraintCase::Symmetric),
            2 => Ok(ConstraintCase::TwoRow),
            other => Err(Error::InvalidYoung(format!("case must be 1 or 2, got {other}"))),
        }
    }

    pub fn number(&self) -> u32 {
        match self {
            ConstraintCase::Symmetric => 1,
            ConstraintCase::TwoRow => 2,
        }
    }

    pub fn young(&self, delta: u32) -> Result<YoungElement> {
        match self {
            ConstraintCase::Symmetric => YoungElement::new(delta, 0),
            ConstraintCase::TwoRow => {
                if delta % 2 == 1 {
                    return Err(Error::OddDelta(delta));
                }
                YoungElement::new(delta, delta / 2)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintCount {
    pub case: u32,
    #[serde(rename = "V")]
    pub vars: usize,
    pub delta: u32,
    pub rank: usize,
    pub unknowns: usize,
    /// Closed-form count where one is known for this case and `(V, Δ)`.
    pub closed_form: Option<u64>,
}

/// Closed-form counts: `C(2Δ+V, V)` for case 1; for case 2 `Δ(Δ-1)/2` at
/// `V = 1` and `V(V+1)(V²+9V-4)/12` at `Δ = 2`.
pub fn closed_form_count(case: ConstraintCase, vars: usize, delta: u32) -> Option<u64> {
    let v = vars as u64;
    let d = delta as u64;
    match case {
        ConstraintCase::Symmetric => Some(binomial(2 * d + v, v)),
        ConstraintCase::TwoRow if v == 1 => Some(d * (d.saturating_sub(1)) / 2),
        ConstraintCase::TwoRow if d == 2 => Some(v * (v + 1) * (v * v + 9 * v - 4) / 12),
        ConstraintCase::TwoRow => None,
    }
}

fn all_assignments(vars: usize, slots: usize) -> usize {
    (vars + 1).pow(slots as u32)
}

fn assignment(mut index: usize, vars: usize, slots: usize) -> Vec<usize> {
    let base = vars + 1;
    let mut v = vec![0; slots];
    for s in v.iter_mut().rev() {
        *s = index % base;
        index /= base;
    }
    v
}

/// Primitive, sign-normalized copy of a form, so equal spans collapse.
fn normalize(form: LinearForm) -> Option<Vec<(usize, i64)>> {
    let g = form.values().fold(0i64, |g, v| g.gcd(v));
    if g == 0 {
        return None;
    }
    let s = if form.values().next().is_some_and(|v| *v < 0) { -g } else { g };
    Some(form.into_iter().map(|(k, v)| (k, v / s)).collect())
}

/// Distinct normalized constraint rows `S_Y {Q,Q}` over every index assignment.
fn young_rows(y: &YoungElement, unknowns: &SymUnknowns) -> BTreeSet<Vec<(usize, i64)>> {
    let element = y.element();
    let slots = y.slots();
    let total = all_assignments(unknowns.vars, slots);
    let row = |i: usize| {
        let values = assignment(i, unknowns.vars, slots);
        normalize(apply_young(&element, unknowns, &values).expect("slot counts agree"))
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Option<Vec<(usize, i64)>>> = {
        use crate::par::*;
        (0..total).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Option<Vec<(usize, i64)>>> = (0..total).map(row).collect();
    rows.into_iter().flatten().collect()
}

fn to_big(row: &[(usize, i64)]) -> BTreeMap<usize, BigInt> {
    row.iter().map(|&(k, v)| (k, BigInt::from(v))).collect()
}

fn echelon_of<'a>(rows: impl IntoIterator<Item = &'a Vec<(usize, i64)>>) -> IntEchelon {
    let mut e = IntEchelon::new();
    for r in rows {
        e.insert(to_big(r));
    }
    e
}

/// Rank of the map sending the free symbols `{Q_A, Q_C}` to their `S_Y` images.
pub fn count_constraints(case: ConstraintCase, vars: usize, delta: u32) -> Result<ConstraintCount> {
    if vars == 0 {
        return Err(Error::InvalidSpec("V must be at least 1".into()));
    }
    let y = case.young(delta)?;
    let unknowns = SymUnknowns::new(vars, delta as usize);
    let rows = young_rows(&y, &unknowns);
    let rank = echelon_of(&rows).rank();
    Ok(ConstraintCount {
        case: case.number(),
        vars,
        delta,
        rank,
        unknowns: unknowns.count(),
        closed_form: closed_form_count(case, vars, delta),
    })
}

/// Relations `{Q_A, Q_C} = {Q_A', Q_C'}` whenever `A ∪ C = A' ∪ C'` as
/// multisets: invariance under every permutation of the `2Δ` indices.
fn invariance_rows(unknowns: &SymUnknowns) -> Vec<Vec<(usize, i64)>> {
    let mut groups: BTreeMap<Vec<usize>, BTreeSet<usize>> = BTreeMap::new();
    for a in &unknowns.multis {
        for c in &unknowns.multis {
            let mut union: Vec<usize> = a.entries().iter().chain(c.entries()).copied().collect();
            union.sort_unstable();
            groups.entry(union).or_default().insert(unknowns.id(a, c));
        }
    }
    let mut rows = Vec::new();
    for ids in groups.values() {
        let ids: Vec<usize> = ids.iter().copied().collect();
        for w in ids.windows(2) {
            rows.push(vec![(w[0], 1), (w[1], -1)]);
        }
    }
    rows
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReformulationReport {
    #[serde(rename = "V")]
    pub vars: usize,
    pub delta: u32,
    pub young_rank: usize,
    pub invariance_rank: usize,
    pub joint_rank: usize,
    /// The two constraint sets span the same space.
    pub equal: bool,
}

/// Compares the span of the `p = Δ/2` constraints with the span of the
/// full permutation-invariance relations.
pub fn case2_reformulation_check(vars: usize, delta: u32) -> Result<ReformulationReport> {
    let y = ConstraintCase::TwoRow.young(delta)?;
    let unknowns = SymUnknowns::new(vars, delta as usize);
    let young = young_rows(&y, &unknowns);
    let inv = invariance_rows(&unknowns);
    let ye = echelon_of(&young);
    let ie = echelon_of(&inv);
    let mut joint = ye.clone();
    for r in &inv {
        joint.insert(to_big(r));
    }
    let (young_rank, invariance_rank, joint_rank) = (ye.rank(), ie.rank(), joint.rank());
    Ok(ReformulationReport {
        vars,
        delta,
        young_rank,
        invariance_rank,
        joint_rank,
        equal: young_rank == joint_rank && invariance_rank == joint_rank,
    })
}

impl fmt::Display for ConstraintCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "case {} V={} Δ={}: rank {} of {} unknowns",
            self.case, self.vars, self.delta, self.rank, self.unknowns
        )?;
        if let Some(c) = self.closed_form {
            write!(f, " (closed form {c})")?;
        }
        Ok(())
    }
}

/// Sign-aware check used by tests: `|coefficient|` sum of a form.
pub fn form_weight(form: &LinearForm) -> i64 {
    form.values().map(|v| v.abs()).sum()
}
