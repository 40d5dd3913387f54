//! Rates, minimum-weight logical search and the ground-space trace of the
//! twisted code.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::complex::{ChainComplex, ClassTag, HomologyBasis};
use crate::error::{Error, Result};
use crate::f2::{kernel_basis, BitMatrix, BitVector};
use crate::operators::{product, twisted_stabilizers, untwisted_stabilizers, PhasePolyOp, Role, StabilizerSet};
use crate::skeleton::{Copy3, TripleCode};

pub const DEFAULT_BUDGET: u64 = 1 << 28;
pub const DEFAULT_THRESHOLD: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found { weight: usize, representative: Vec<usize> },
    NoLogical,
    /// Every vector lighter than `lower_bound` was ruled out.
    BudgetExhausted { lower_bound: usize },
}

impl SearchOutcome {
    #[must_use]
    pub fn weight(&self) -> Option<usize> {
        match self {
            SearchOutcome::Found { weight, .. } => Some(*weight),
            _ => None,
        }
    }
}

/// Which pairing vectors count as a hit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// Nonzero pairing with any witness in the mask.
    Any(u64),
    /// Pairing equal to e_k over all witnesses.
    Class(usize),
}

impl Target {
    fn hit(self, pairing: u64) -> bool {
        match self {
            Target::Any(m) => pairing & m != 0,
            Target::Class(k) => pairing == 1 << k,
        }
    }
}

fn pairing_of(v: &BitVector, witnesses: &[BitVector]) -> u64 {
    witnesses.iter().enumerate().fold(0, |acc, (i, w)| acc | u64::from(v.dot(w)) << i)
}

/// Minimum weight of v with `check · v = 0` whose pairing with the
/// witnesses satisfies `target`.
///
/// The kernel is enumerated in Gray-code order when it has at most
/// `budget` elements; otherwise weights are scanned upward with a
/// meet-in-the-middle split of each support into two halves matched by
/// syndrome.
///
/// # Panics
/// Panics if there are more than 64 witnesses.
#[must_use]
pub fn min_weight(check: &BitMatrix, witnesses: &[BitVector], target: Target, budget: u64) -> SearchOutcome {
    assert!(witnesses.len() <= 64, "at most 64 witnesses");
    let live = match target {
        Target::Any(m) => m & mask_len(witnesses.len()) != 0,
        Target::Class(k) => k < witnesses.len(),
    };
    if !live {
        return SearchOutcome::NoLogical;
    }
    let kernel = kernel_basis(check);
    if kernel.len() < 63 && (1u64 << kernel.len()) <= budget.max(1) {
        gray_search(check.cols(), &kernel, witnesses, target)
    } else {
        mitm_search(check, witnesses, target, budget)
    }
}

fn mask_len(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

fn gray_search(n: usize, kernel: &[BitVector], witnesses: &[BitVector], target: Target) -> SearchOutcome {
    let pk: Vec<u64> = kernel.iter().map(|v| pairing_of(v, witnesses)).collect();
    let mut cur = BitVector::zeros(n);
    let mut pair = 0u64;
    let mut best: Option<(usize, BitVector)> = None;
    for i in 1u64..1u64 << kernel.len() {
        let j = i.trailing_zeros() as usize;
        cur.xor_assign(&kernel[j]);
        pair ^= pk[j];
        if target.hit(pair) {
            let w = cur.weight();
            if best.as_ref().map_or(true, |(b, _)| w < *b) {
                best = Some((w, cur.clone()));
            }
        }
    }
    match best {
        Some((weight, v)) => SearchOutcome::Found { weight, representative: v.support() },
        None => SearchOutcome::NoLogical,
    }
}

/// Calls f on every k-subset of 0..n in lexicographic order until it
/// returns false.
fn for_subsets(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Weight-by-weight meet-in-the-middle search, usable directly when the
/// kernel is too large to enumerate.
pub fn mitm_search(check: &BitMatrix, witnesses: &[BitVector], target: Target, budget: u64) -> SearchOutcome {
    let n = check.cols();
    let cols: Vec<BitVector> = (0..n).map(|j| check.col(j)).collect();
    let wcols: Vec<u64> = (0..n).map(|j| witnesses.iter().enumerate().fold(0, |a, (i, w)| a | u64::from(w.get(j)) << i)).collect();
    let syn = |s: &[usize]| {
        let mut v = BitVector::zeros(check.rows());
        for &j in s {
            v.xor_assign(&cols[j]);
        }
        v
    };
    let mut spent = 0u64;
    for w in 1..=n {
        let (a, b) = (w.div_ceil(2), w / 2);
        // right halves indexed by syndrome
        let mut right: HashMap<BitVector, Vec<Vec<usize>>> = HashMap::new();
        let mut out_of_budget = false;
        for_subsets(n, b, |s| {
            spent += 1;
            if spent > budget {
                out_of_budget = true;
                return false;
            }
            right.entry(syn(s)).or_default().push(s.to_vec());
            true
        });
        if out_of_budget {
            return SearchOutcome::BudgetExhausted { lower_bound: w };
        }
        let mut found: Option<Vec<usize>> = None;
        for_subsets(n, a, |l| {
            spent += 1;
            if spent > budget {
                out_of_budget = true;
                return false;
            }
            if let Some(rs) = right.get(&syn(l)) {
                for r in rs {
                    // every support splits uniquely as (first a indices, last b)
                    if r.first().is_some_and(|&f| f <= l[a - 1]) {
                        continue;
                    }
                    let pair = l.iter().chain(r).fold(0, |p, &j| p ^ wcols[j]);
                    if target.hit(pair) {
                        found = Some(l.iter().chain(r).copied().collect());
                        return false;
                    }
                }
            }
            true
        });
        if let Some(rep) = found {
            return SearchOutcome::Found { weight: w, representative: rep };
        }
        if out_of_budget {
            return SearchOutcome::BudgetExhausted { lower_bound: w };
        }
    }
    SearchOutcome::NoLogical
}

/// Matrices cutting out k-cycles and k-cocycles.
fn cycle_check(c: &ChainComplex, k: usize) -> BitMatrix {
    c.boundary(k).cloned().unwrap_or_else(|| BitMatrix::zeros(0, c.dim(k)))
}

fn cocycle_check(c: &ChainComplex, k: usize) -> BitMatrix {
    c.boundary(k + 1).map_or_else(|| BitMatrix::zeros(0, c.dim(k)), BitMatrix::transpose)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Weight of cycles (Z-type logicals).
    Z,
    /// Weight of cocycles (X-type logicals).
    X,
}

/// Minimum weight over nontrivial classes of the basis.
#[must_use]
pub fn min_weight_logical(c: &ChainComplex, basis: &HomologyBasis, kind: Kind, budget: u64) -> SearchOutcome {
    let k = basis.degree;
    let all = Target::Any(mask_len(basis.dim()));
    match kind {
        Kind::Z => min_weight(&cycle_check(c, k), &basis.cocycle_reps, all, budget),
        Kind::X => min_weight(&cocycle_check(c, k), &basis.cycle_reps, all, budget),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsystemReport {
    pub d_z: SearchOutcome,
    pub d_x: SearchOutcome,
    pub distance: Option<usize>,
}

/// min over cycles pairing with a chosen cocycle and cocycles pairing
/// with a chosen cycle.
pub fn subsystem_distance(c: &ChainComplex, k: usize, cycles: &[BitVector], cocycles: &[BitVector], budget: u64) -> Result<SubsystemReport> {
    if cycles.len() != cocycles.len() || cycles.len() > 64 {
        return Err(Error::Pairing);
    }
    for (i, z) in cycles.iter().enumerate() {
        for (j, w) in cocycles.iter().enumerate() {
            if z.len() != w.len() {
                return Err(Error::Dimension(format!("cycle length {} vs cocycle length {}", z.len(), w.len())));
            }
            if z.dot(w) != (i == j) {
                return Err(Error::Pairing);
            }
        }
    }
    let all = Target::Any(mask_len(cycles.len()));
    let d_z = min_weight(&cycle_check(c, k), cocycles, all, budget);
    let d_x = min_weight(&cocycle_check(c, k), cycles, all, budget);
    let distance = match (d_z.weight(), d_x.weight()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };
    Ok(SubsystemReport { d_z, d_x, distance })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub index: usize,
    pub tag: Option<ClassTag>,
    /// Built on a retract-graph loop.
    pub loop_summand: bool,
    pub z_weight: SearchOutcome,
    pub x_weight: SearchOutcome,
    /// Lightest member at or below the threshold.
    pub spurious: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CopyReport {
    pub copy: Copy3,
    pub n: usize,
    pub k: usize,
    pub d_z: SearchOutcome,
    pub d_x: SearchOutcome,
    pub classes: Vec<ClassReport>,
    /// Distance over the classes not flagged spurious.
    pub subsystem: Option<SubsystemReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodeReport {
    pub n: [usize; 3],
    pub k_red: usize,
    pub k_blue: usize,
    pub k_green: usize,
    /// dim H⁰ of the green complex: one constraint per γ class.
    pub gamma_count: usize,
    pub k_tilde: usize,
    pub budget: u64,
    pub threshold: usize,
    pub copies: Vec<CopyReport>,
}

/// Betti-number bookkeeping only.
#[must_use]
pub fn rate_report(tc: &TripleCode) -> CodeReport {
    let k_red = tc.red_h1.dim();
    let k_blue = tc.blue_h1.dim();
    let gamma_count = tc.green_h0.dim();
    CodeReport {
        n: [tc.n_copy(Copy3::Red), tc.n_copy(Copy3::Blue), tc.n_copy(Copy3::Green)],
        k_red,
        k_blue,
        k_green: tc.green_h1.dim(),
        gamma_count,
        k_tilde: (k_red + k_blue).saturating_sub(gamma_count),
        budget: 0,
        threshold: 0,
        copies: Vec::new(),
    }
}

fn loop_summands(tc: &TripleCode, c: Copy3) -> Vec<usize> {
    match c {
        Copy3::Red => Vec::new(),
        Copy3::Blue => tc.blue_spurious(),
        Copy3::Green => tc.green_spurious(),
    }
}

/// Rates plus distances and spurious-class flags for every copy.
#[must_use]
pub fn code_report(tc: &TripleCode, budget: u64, threshold: usize) -> CodeReport {
    let mut rep = rate_report(tc);
    rep.budget = budget;
    rep.threshold = threshold;
    for c in Copy3::ALL {
        let cx = tc.complex(c);
        let h = tc.h1(c);
        let loops = loop_summands(tc, c);
        let classes: Vec<ClassReport> = (0..h.dim())
            .map(|i| {
                let z_weight = min_weight(&cycle_check(cx, 1), &h.cocycle_reps, Target::Class(i), budget);
                let x_weight = min_weight(&cocycle_check(cx, 1), &h.cycle_reps, Target::Class(i), budget);
                let light = |o: &SearchOutcome| o.weight().is_some_and(|w| w <= threshold);
                let spurious = light(&z_weight) || light(&x_weight);
                ClassReport { index: i, tag: h.tags.get(i).copied(), loop_summand: loops.contains(&i), z_weight, x_weight, spurious }
            })
            .collect();
        let kept: Vec<usize> = classes.iter().filter(|cl| !cl.spurious).map(|cl| cl.index).collect();
        let subsystem = if kept.is_empty() {
            None
        } else {
            let zs: Vec<BitVector> = kept.iter().map(|&i| h.cycle_reps[i].clone()).collect();
            let ws: Vec<BitVector> = kept.iter().map(|&i| h.cocycle_reps[i].clone()).collect();
            subsystem_distance(cx, 1, &zs, &ws, budget).ok()
        };
        rep.copies.push(CopyReport {
            copy: c,
            n: cx.dim(1),
            k: h.dim(),
            d_z: min_weight_logical(cx, h, Kind::Z, budget),
            d_x: min_weight_logical(cx, h, Kind::X, budget),
            classes,
            subsystem,
        });
    }
    rep
}

/// Quadratic form c + L·t + Σ_{(i,j)∈Q} t_i t_j over F₂.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForm {
    pub constant: bool,
    pub linear: BitVector,
    pub pairs: BTreeSet<(usize, usize)>,
}

impl QuadForm {
    #[must_use]
    pub fn eval(&self, t: &BitVector) -> bool {
        let mut s = self.constant ^ self.linear.dot(t);
        for &(i, j) in &self.pairs {
            s ^= t.get(i) && t.get(j);
        }
        s
    }

    fn toggle(&mut self, i: usize, j: usize) {
        if i == j {
            self.linear.flip(i);
            return;
        }
        let k = (i.min(j), i.max(j));
        if !self.pairs.remove(&k) {
            self.pairs.insert(k);
        }
    }

    /// Σ_t (−1)^{q(t)}, by repeatedly summing out a variable that appears in
    /// a product term.
    #[must_use]
    pub fn exp_sum(&self) -> i128 {
        let mut q = self.clone();
        let mut vars = q.linear.len();
        let mut factor: i128 = 1;
        while let Some(&(p, r)) = q.pairs.iter().next() {
            // q = t_p (t_r + a) + rest; summing t_p forces t_r = a
            let others: Vec<usize> = q.pairs.iter().filter_map(|&(i, j)| if i == p && j != r { Some(j) } else if j == p && i != r { Some(i) } else { None }).collect();
            let a0 = q.linear.get(p);
            let r_terms: Vec<usize> = q.pairs.iter().filter_map(|&(i, j)| if i == r && j != p { Some(j) } else if j == r && i != p { Some(i) } else { None }).collect();
            let lr = q.linear.get(r);
            q.pairs.retain(|&(i, j)| i != p && j != p && i != r && j != r);
            q.linear.set(p, false);
            q.linear.set(r, false);
            if lr {
                q.constant ^= a0;
                for &o in &others {
                    q.linear.flip(o);
                }
            }
            for &s in &r_terms {
                if a0 {
                    q.linear.flip(s);
                }
                for &o in &others {
                    q.toggle(o, s);
                }
            }
            factor *= 2;
            vars -= 2;
        }
        if q.linear.is_zero() {
            let s = factor << vars;
            if q.constant {
                -s
            } else {
                s
            }
        } else {
            0
        }
    }
}

/// φ_D(G t) for a diagonal operator D and the columns of G.
#[must_use]
pub fn restrict(op: &PhasePolyOp, basis: &[BitVector]) -> QuadForm {
    let d = basis.len();
    let mut q = QuadForm { constant: op.sign, linear: BitVector::zeros(d), pairs: BTreeSet::new() };
    for (j, g) in basis.iter().enumerate() {
        if op.z.dot(g) {
            q.linear.flip(j);
        }
    }
    for &(p, r) in &op.cz {
        let a: Vec<usize> = (0..d).filter(|&j| basis[j].get(p)).collect();
        let b: Vec<usize> = (0..d).filter(|&j| basis[j].get(r)).collect();
        for &i in &a {
            for &j in &b {
                q.toggle(i, j);
            }
        }
    }
    q
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GsdReport {
    pub x_generators: usize,
    pub z_generators: usize,
    pub x_free_subsets: usize,
    pub zero_flux_dim: usize,
    /// GSD · 2^{x_generators}.
    pub numerator: i128,
    pub gsd: f64,
    pub log2_gsd: f64,
    pub k_tilde: usize,
    pub matches_k_tilde: bool,
}

/// tr(Π_B (1+B)/2 · Π_A (1+A)/2) for a stabilizer set whose X-type
/// generators commute on the zero-flux subspace. Only products with
/// cancelling X strings have nonzero trace, and each of those is a
/// quadratic exponential sum over the flux-free configurations.
pub fn ground_space_dimension(set: &StabilizerSet) -> Result<(i128, usize, usize, usize)> {
    let n = set.n;
    let xs: Vec<&PhasePolyOp> = set.generators.iter().filter(|g| !matches!(g.role, Role::B(_))).map(|g| &g.op).collect();
    let bs: Vec<BitVector> = set.b_type().iter().map(|g| g.op.z.clone()).collect();
    let flux = BitMatrix::from_rows(n, bs.clone());
    let zero_flux = kernel_basis(&flux);
    let xmat = BitMatrix::from_cols(n, &xs.iter().map(|o| o.x.clone()).collect::<Vec<_>>());
    let subsets = kernel_basis(&xmat);
    if subsets.len() > 30 {
        return Err(Error::Dimension(format!("{} independent X-cancelling products", subsets.len())));
    }
    let mut total: i128 = 0;
    for mask in 0u64..1 << subsets.len() {
        let mut sel = BitVector::zeros(xs.len());
        for (i, s) in subsets.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sel.xor_assign(s);
            }
        }
        let prod = product(n, sel.iter_ones().map(|i| xs[i]))?;
        debug_assert!(prod.x.is_zero());
        total += restrict(&prod, &zero_flux).exp_sum();
    }
    Ok((total, xs.len(), 1 << subsets.len(), zero_flux.len()))
}

/// Ground-space dimension of the twisted code compared with k̃.
pub fn twisted_gsd(tc: &TripleCode) -> Result<GsdReport> {
    gsd_report(tc, &twisted_stabilizers(tc))
}

pub fn untwisted_gsd(tc: &TripleCode) -> Result<GsdReport> {
    gsd_report(tc, &untwisted_stabilizers(tc))
}

fn gsd_report(tc: &TripleCode, set: &StabilizerSet) -> Result<GsdReport> {
    let (numerator, m, subsets, zf) = ground_space_dimension(set)?;
    let gsd = numerator as f64 / 2f64.powi(m as i32);
    let k_tilde = rate_report(tc).k_tilde;
    let log2_gsd = gsd.log2();
    Ok(GsdReport {
        x_generators: m,
        z_generators: set.b_type().len(),
        x_free_subsets: subsets,
        zero_flux_dim: zf,
        numerator,
        gsd,
        log2_gsd,
        k_tilde,
        matches_k_tilde: numerator == (1i128 << k_tilde) << m,
    })
}
