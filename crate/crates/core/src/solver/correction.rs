//! Translation-, O(p,q)- and dilation-invariant operators on symbols that
//! strictly lower the p-degree.
//!
//! Each operator is a full eta-contraction of slots, applied in normal order
//! (all derivatives first, then all multiplications). Slots are `dx`
//! (derivative in x), `p`, `dp`, `xi` and `dxi`. A pair of slots contracts
//! with weight `1` when their natural index positions differ and with `eta`
//! otherwise.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::ring::{Field, Scalar, MAX_DIM};
use crate::symalg::{exps_of_degree, subsets, MetricSignature, Mono, SuperSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Slot {
    Dx,
    P,
    Dp,
    Xi,
    Dxi,
}

impl Slot {
    const ALL: [Slot; 5] = [Slot::Dx, Slot::P, Slot::Dp, Slot::Xi, Slot::Dxi];

    fn upper(self) -> bool {
        matches!(self, Slot::Dp | Slot::Xi)
    }

    fn name(self) -> &'static str {
        match self {
            Slot::Dx => "dx",
            Slot::P => "p",
            Slot::Dp => "dp",
            Slot::Xi => "xi",
            Slot::Dxi => "dxi",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Contracted pairs that can be nonzero: `xi.xi` and `dxi.dxi` vanish by
/// antisymmetry against the symmetric metric.
fn pair_types() -> Vec<(Slot, Slot)> {
    let mut out = Vec::new();
    for (i, a) in Slot::ALL.iter().enumerate() {
        for b in &Slot::ALL[i..] {
            if (*a, *b) != (Slot::Xi, Slot::Xi) && (*a, *b) != (Slot::Dxi, Slot::Dxi) {
                out.push((*a, *b));
            }
        }
    }
    out
}

/// One invariant operator with its action on fiber monomials of a fixed
/// bidegree.
///
/// `reduced[m]` is the image of the x-free monomial `m`, where the x-exponent
/// of each output term records the multi-index of x-derivatives to apply to
/// the coefficient of `m`.
#[derive(Clone, Debug)]
pub struct CorrectionOp {
    pub pairs: Vec<(Slot, Slot)>,
    reduced: BTreeMap<Mono, SuperSymbol<Scalar>>,
}

impl CorrectionOp {
    /// Number of x-derivatives, equal to the amount the p-degree drops.
    pub fn p_lowering(&self) -> u32 {
        self.pairs.iter().map(|(a, b)| (*a == Slot::Dx) as u32 + (*b == Slot::Dx) as u32).sum()
    }

    /// Applies the operator to a symbol whose terms all lie in the bidegree
    /// this operator was built for.
    pub fn apply<F: Field>(&self, s: &SuperSymbol<F>) -> SuperSymbol<F> {
        let mut out = SuperSymbol::zero(s.signature()).with_weight(s.weight.clone());
        for (m, c) in s.terms() {
            let fiber = m.with_x([0; MAX_DIM]);
            let img = self.reduced.get(&fiber).expect("monomial outside the operator's bidegree");
            for (t, v) in img.terms() {
                // d^gamma x^alpha
                let mut k = Scalar::one();
                let mut x = m.x;
                let mut ok = true;
                for i in 0..MAX_DIM {
                    let g = t.x[i];
                    if g > x[i] {
                        ok = false;
                        break;
                    }
                    for j in 0..g {
                        k = k.mul(&Scalar::from_int((x[i] - j) as i64));
                    }
                    x[i] -= g;
                }
                if ok {
                    out.add_term(t.with_x(x), c.mul(&F::from_scalar(&v.mul(&k))));
                }
            }
        }
        out
    }

    pub fn reduced(&self) -> &BTreeMap<Mono, SuperSymbol<Scalar>> {
        &self.reduced
    }
}

impl fmt::Display for CorrectionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(a, b)| format!("({}.{})", a.name(), b.name())).collect();
        f.write_str(&parts.join(""))
    }
}

/// Fiber monomials `p^beta xi^I` with `|beta| = k`, `|I| = kappa`.
pub fn fiber_monomials(n: usize, k: u32, kappa: usize) -> Vec<Mono> {
    let mut out = Vec::new();
    for p in exps_of_degree(n, k) {
        for xi in subsets(n, kappa) {
            out.push(Mono { x: [0; MAX_DIM], p, xi });
        }
    }
    out
}

fn multisets(
    types: &[(Slot, Slot)],
    from: usize,
    need: &mut [u32; 5],
    cur: &mut Vec<(Slot, Slot)>,
    out: &mut Vec<Vec<(Slot, Slot)>>,
) {
    if need.iter().all(|&c| c == 0) {
        out.push(cur.clone());
        return;
    }
    for t in from..types.len() {
        let (a, b) = types[t];
        need[a.index()] = match need[a.index()].checked_sub(1) {
            Some(v) => v,
            None => continue,
        };
        if need[b.index()] == 0 {
            need[a.index()] += 1;
            continue;
        }
        need[b.index()] -= 1;
        cur.push((a, b));
        multisets(types, t, need, cur, out);
        cur.pop();
        need[b.index()] += 1;
        need[a.index()] += 1;
    }
}

/// Image of an x-free monomial under one fully indexed slot assignment.
fn apply_indexed(sig: MetricSignature, slots: &[(Slot, usize)], m: &Mono) -> SuperSymbol<Scalar> {
    let mut s = SuperSymbol::monomial(sig, *m, Scalar::one());
    let mut gamma = [0u8; MAX_DIM];
    for (slot, i) in slots {
        match slot {
            Slot::Dx => gamma[*i] += 1,
            Slot::Dp => s = s.diff_p(*i),
            Slot::Dxi => s = s.diff_xi_left(*i),
            _ => {}
        }
        if s.is_zero() {
            return s;
        }
    }
    for (slot, i) in slots.iter().rev() {
        match slot {
            Slot::P => s = SuperSymbol::p(sig, *i).mul(&s).unwrap(),
            Slot::Xi => s = SuperSymbol::xi(sig, *i).mul(&s).unwrap(),
            _ => {}
        }
    }
    if gamma != [0; MAX_DIM] {
        s = s.map_monomials(|t, c, acc| {
            let mut x = t.x;
            for k in 0..MAX_DIM {
                x[k] += gamma[k];
            }
            acc.add_term(t.with_x(x), c.clone());
        });
    }
    s
}

fn reduced_form(sig: MetricSignature, pairs: &[(Slot, Slot)], fiber: &[Mono]) -> BTreeMap<Mono, SuperSymbol<Scalar>> {
    let n = sig.dim();
    let np = pairs.len();
    let mut out: BTreeMap<Mono, SuperSymbol<Scalar>> =
        fiber.iter().map(|m| (*m, SuperSymbol::zero(sig))).collect();
    let total = n.pow(np as u32);
    for code in 0..total {
        let mut c = code;
        let mut slots = Vec::with_capacity(2 * np);
        let mut w = 1i64;
        for (a, b) in pairs {
            let i = c % n;
            c /= n;
            if a.upper() == b.upper() {
                w *= sig.eta(i);
            }
            slots.push((*a, i));
            slots.push((*b, i));
        }
        // Derivatives in slot order, multiplications after.
        slots.sort_by_key(|(s, _)| matches!(s, Slot::P | Slot::Xi));
        for m in fiber {
            let img = apply_indexed(sig, &slots, m);
            if !img.is_zero() {
                let e = out.get_mut(m).unwrap();
                *e = e.add(&img.scale(&Scalar::from_int(w)));
            }
        }
    }
    out
}

/// Slot counts `(dx, p, dp, xi, dxi)` admissible on bidegree `(k, kappa)`.
fn slot_counts(n: usize, k: u32, kappa: usize) -> Vec<[u32; 5]> {
    let mut out = Vec::new();
    for a in 1..=k {
        for c in a..=k {
            let b = c - a;
            for e in 0..=kappa as u32 {
                let room = (n - kappa) as u32 + e;
                for d in 0..=room {
                    if (d + e) % 2 == 0 {
                        out.push([a, b, c, d, e]);
                    }
                }
            }
        }
    }
    out
}

/// Linearly independent correction operators on bidegree `(k, kappa)`.
pub fn enumerate(sig: MetricSignature, k: u32, kappa: usize) -> Vec<CorrectionOp> {
    let n = sig.dim();
    let fiber = fiber_monomials(n, k, kappa);
    let types = pair_types();
    let mut candidates = Vec::new();
    for counts in slot_counts(n, k, kappa) {
        let total: u32 = counts.iter().sum();
        if total % 2 == 1 {
            continue;
        }
        let mut need = counts;
        multisets(&types, 0, &mut need, &mut Vec::new(), &mut candidates);
    }
    let mut basis = IndependentSet::default();
    let mut out = Vec::new();
    for pairs in candidates {
        let reduced = reduced_form(sig, &pairs, &fiber);
        let mut vec: Vec<((usize, Mono), Scalar)> = Vec::new();
        for (i, m) in fiber.iter().enumerate() {
            for (t, c) in reduced[m].terms() {
                vec.push(((i, *t), c.clone()));
            }
        }
        if basis.insert(vec) {
            out.push(CorrectionOp { pairs, reduced });
        }
    }
    out
}

/// Incremental exact rank test for sparse vectors with arbitrary keys.
struct IndependentSet<K: std::hash::Hash + Eq + Clone> {
    index: HashMap<K, usize>,
    rows: Vec<(usize, BTreeMap<usize, Scalar>)>,
}

impl<K: std::hash::Hash + Eq + Clone> Default for IndependentSet<K> {
    fn default() -> Self {
        IndependentSet { index: HashMap::new(), rows: Vec::new() }
    }
}

impl<K: std::hash::Hash + Eq + Clone> IndependentSet<K> {
    fn insert(&mut self, v: Vec<(K, Scalar)>) -> bool {
        let mut r: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (k, c) in v {
            let next = self.index.len();
            let j = *self.index.entry(k).or_insert(next);
            let e = r.entry(j).or_insert_with(Scalar::zero);
            *e = e.add(&c);
        }
        r.retain(|_, c| !c.is_zero());
        for (p, row) in &self.rows {
            if let Some(f) = r.get(p).cloned() {
                for (j, c) in row {
                    let e = r.entry(*j).or_insert_with(Scalar::zero);
                    *e = e.sub(&f.mul(c));
                }
                r.retain(|_, c| !c.is_zero());
            }
        }
        match r.iter().next().map(|(j, c)| (*j, c.clone())) {
            None => false,
            Some((p, c)) => {
                let inv = c.inv().unwrap();
                let row: BTreeMap<usize, Scalar> = r.into_iter().map(|(j, v)| (j, v.mul(&inv))).collect();
                // Keep existing rows reduced against the new pivot.
                for (_, other) in self.rows.iter_mut() {
                    if let Some(f) = other.get(&p).cloned() {
                        for (j, c) in &row {
                            let e = other.entry(*j).or_insert_with(Scalar::zero);
                            *e = e.sub(&f.mul(c));
                        }
                        other.retain(|_, c| !c.is_zero());
                    }
                }
                self.rows.push((p, row));
                true
            }
        }
    }
}
