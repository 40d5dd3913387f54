//! Exact state-vector backend.
//!
//! Every operator the protocol touches (X strings, Z strings, CZ layers and
//! their ±1 combinations) has real matrix entries, so amplitudes are kept as
//! `f64`. Qubit i is bit i of the basis index.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::f2::{BitVector, EchelonBasis};
use crate::operators::PhasePolyOp;
use crate::skeleton::{Copy3, TripleCode};

pub const MAX_DENSE_QUBITS: usize = 26;

/// A phase-polynomial operator packed into index masks.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub x: usize,
    z: usize,
    sign: bool,
    /// (p, mask of q's with (p, q) ∈ CZ)
    cz: Vec<(usize, usize)>,
}

impl Compiled {
    /// # Panics
    /// Panics if the operator acts on more than 64 qubits.
    #[must_use]
    pub fn new(op: &PhasePolyOp) -> Self {
        assert!(op.n() <= 64, "index masks hold at most 64 qubits");
        let mask = |v: &BitVector| v.iter_ones().fold(0usize, |m, i| m | 1 << i);
        let mut by_p: BTreeMap<usize, usize> = BTreeMap::new();
        for &(p, q) in &op.cz {
            *by_p.entry(p).or_default() |= 1 << q;
        }
        Self { x: mask(&op.x), z: mask(&op.z), sign: op.sign, cz: by_p.into_iter().collect() }
    }

    /// φ(u) as a bit.
    #[inline]
    #[must_use]
    pub fn phase(&self, u: usize) -> bool {
        let mut s = self.sign ^ ((u & self.z).count_ones() & 1 == 1);
        for &(p, qm) in &self.cz {
            if u >> p & 1 == 1 {
                s ^= (u & qm).count_ones() & 1 == 1;
            }
        }
        s
    }

    #[inline]
    fn sgn(&self, u: usize) -> f64 {
        if self.phase(u) {
            -1.0
        } else {
            1.0
        }
    }
}

/// Calls f(w, w ⊕ x) once per unordered pair, or f(w, w) when x = 0.
#[inline]
fn for_pairs(dim: usize, x: usize, mut f: impl FnMut(usize, usize)) {
    if x == 0 {
        for w in 0..dim {
            f(w, w);
        }
        return;
    }
    let h = usize::BITS - 1 - x.leading_zeros();
    let block = 1usize << h;
    let mut base = 0;
    while base < dim {
        for w in base..base + block {
            f(w, w ^ x);
        }
        base += block << 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<f64>,
}

impl DenseState {
    /// |0…0⟩ on n qubits.
    pub fn zero(n: usize, cap: usize) -> Result<Self> {
        let cap = cap.min(MAX_DENSE_QUBITS);
        if n > cap {
            return Err(Error::Size(n, cap));
        }
        let mut amps = vec![0.0; 1 << n];
        amps[0] = 1.0;
        Ok(Self { n, amps })
    }

    /// # Panics
    /// Panics if the length is not a power of two.
    #[must_use]
    pub fn from_amplitudes(amps: Vec<f64>) -> Self {
        assert!(amps.len().is_power_of_two(), "length must be 2^n");
        Self { n: amps.len().trailing_zeros() as usize, amps }
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    #[must_use]
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// Rescales to unit norm and returns the previous norm².
    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sq();
        if n2 > 0.0 {
            let s = n2.sqrt().recip();
            self.amps.iter_mut().for_each(|a| *a *= s);
        }
        n2
    }

    pub fn apply(&mut self, op: &PhasePolyOp) {
        self.apply_compiled(&Compiled::new(op));
    }

    pub fn apply_compiled(&mut self, c: &Compiled) {
        let a = &mut self.amps;
        for_pairs(a.len(), c.x, |w, v| {
            let (aw, av) = (a[w], a[v]);
            if aw == 0.0 && av == 0.0 {
                return;
            }
            if w == v {
                a[w] *= c.sgn(w);
            } else {
                a[v] = c.sgn(v) * aw;
                a[w] = c.sgn(w) * av;
            }
        });
    }

    #[must_use]
    pub fn expectation(&self, op: &PhasePolyOp) -> f64 {
        let c = Compiled::new(op);
        let a = &self.amps;
        let mut acc = 0.0;
        for_pairs(a.len(), c.x, |w, v| {
            if a[w] == 0.0 && a[v] == 0.0 {
                return;
            }
            if w == v {
                acc += c.sgn(w) * a[w] * a[w];
            } else {
                acc += a[v] * a[w] * (c.sgn(v) + c.sgn(w));
            }
        });
        acc
    }

    /// ψ ← (ψ + (−1)^outcome Oψ)/2; returns the new norm².
    pub fn project(&mut self, op: &PhasePolyOp, outcome: bool) -> f64 {
        let c = Compiled::new(op);
        let t = if outcome { -1.0 } else { 1.0 };
        let a = &mut self.amps;
        for_pairs(a.len(), c.x, |w, v| {
            let (aw, av) = (a[w], a[v]);
            if aw == 0.0 && av == 0.0 {
                return;
            }
            if w == v {
                a[w] *= 0.5 * (1.0 + t * c.sgn(w));
            } else {
                a[w] = 0.5 * (aw + t * c.sgn(w) * av);
                a[v] = 0.5 * (av + t * c.sgn(v) * aw);
            }
        });
        self.norm_sq()
    }

    /// Splits ψ into (I + O)ψ/2 and (I − O)ψ/2 in one pass, returning each
    /// branch with its norm². Neither branch is renormalized.
    #[must_use]
    pub fn branch(mut self, op: &PhasePolyOp) -> [(DenseState, f64); 2] {
        let c = Compiled::new(op);
        let mut minus = vec![0.0; self.amps.len()];
        let (mut np, mut nm) = (0.0, 0.0);
        let a = &mut self.amps;
        for_pairs(a.len(), c.x, |w, v| {
            let (aw, av) = (a[w], a[v]);
            if aw == 0.0 && av == 0.0 {
                return;
            }
            if w == v {
                if c.phase(w) {
                    minus[w] = aw;
                    a[w] = 0.0;
                    nm += aw * aw;
                } else {
                    np += aw * aw;
                }
            } else {
                let (ow, ov) = (c.sgn(w) * av, c.sgn(v) * aw);
                let (pw, pv) = (0.5 * (aw + ow), 0.5 * (av + ov));
                let (mw, mv) = (0.5 * (aw - ow), 0.5 * (av - ov));
                a[w] = pw;
                a[v] = pv;
                minus[w] = mw;
                minus[v] = mv;
                np += pw * pw + pv * pv;
                nm += mw * mw + mv * mv;
            }
        });
        let n = self.n;
        [(self, np), (DenseState { n, amps: minus }, nm)]
    }

    /// Born-rule measurement of a ±1-valued operator. Returns the outcome
    /// bit and its probability; the state is renormalized.
    pub fn measure<R: Rng>(&mut self, op: &PhasePolyOp, rng: &mut R) -> (bool, f64) {
        let p0 = (0.5 * (1.0 + self.expectation(op))).clamp(0.0, 1.0);
        let outcome = rng.gen::<f64>() >= p0;
        self.project(op, outcome);
        self.normalize();
        (outcome, if outcome { 1.0 - p0 } else { p0 })
    }

    /// Joint distribution of a set of qubits in the Z basis; key bit i is
    /// qubit `qubits[i]`.
    #[must_use]
    pub fn marginal(&self, qubits: &[usize]) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for (w, a) in self.amps.iter().enumerate() {
            if *a != 0.0 {
                *out.entry(pattern(w, qubits)).or_insert(0.0) += a * a;
            }
        }
        out
    }

    /// Zeroes every amplitude whose qubits differ from `pat`.
    pub fn keep_pattern(&mut self, qubits: &[usize], pat: u64) {
        for (w, a) in self.amps.iter_mut().enumerate() {
            if pattern(w, qubits) != pat {
                *a = 0.0;
            }
        }
    }

    #[must_use]
    pub fn to_sparse(&self, tol: f64) -> SparseState {
        SparseState { amps: self.amps.iter().enumerate().filter(|(_, a)| a.abs() > tol).map(|(w, &a)| (w, a)).collect() }
    }
}

#[inline]
fn pattern(w: usize, qubits: &[usize]) -> u64 {
    qubits.iter().enumerate().fold(0, |acc, (i, &q)| acc | ((w >> q & 1) as u64) << i)
}

/// Nonzero amplitudes only; used after the state collapses onto few
/// basis configurations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseState {
    pub amps: BTreeMap<usize, f64>,
}

impl SparseState {
    #[must_use]
    pub fn get(&self, w: usize) -> f64 {
        self.amps.get(&w).copied().unwrap_or(0.0)
    }

    #[must_use]
    pub fn norm_sq(&self) -> f64 {
        self.amps.values().map(|a| a * a).sum()
    }

    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sq();
        if n2 > 0.0 {
            let s = n2.sqrt().recip();
            self.amps.values_mut().for_each(|a| *a *= s);
        }
        n2
    }

    #[must_use]
    pub fn apply(&self, op: &PhasePolyOp) -> Self {
        let c = Compiled::new(op);
        Self { amps: self.amps.iter().map(|(&w, &a)| (w ^ c.x, c.sgn(w ^ c.x) * a)).collect() }
    }

    #[must_use]
    pub fn expectation(&self, op: &PhasePolyOp) -> f64 {
        let c = Compiled::new(op);
        self.amps.iter().map(|(&u, &a)| a * c.sgn(u) * self.get(u ^ c.x)).sum()
    }

    /// Splits by the Z pattern of `qubits`.
    #[must_use]
    pub fn split(&self, qubits: &[usize]) -> BTreeMap<u64, SparseState> {
        let mut out: BTreeMap<u64, SparseState> = BTreeMap::new();
        for (&w, &a) in &self.amps {
            out.entry(pattern(w, qubits)).or_default().amps.insert(w, a);
        }
        out
    }
}

/// Encoded computational basis of the untwisted red and blue copies, with
/// the green register in |0…0⟩.
#[derive(Clone, Debug)]
pub struct LogicalBasis {
    pub k_red: usize,
    pub k_blue: usize,
    orbit: Vec<usize>,
    flips: Vec<usize>,
}

fn mask(v: &BitVector) -> usize {
    v.iter_ones().fold(0, |m, i| m | 1 << i)
}

impl LogicalBasis {
    /// # Panics
    /// Panics if the register exceeds 64 qubits.
    #[must_use]
    pub fn new(tc: &TripleCode) -> Self {
        let n = tc.n_qubits();
        assert!(n <= 64, "index masks hold at most 64 qubits");
        let mut span = EchelonBasis::new(n);
        let mut gens = Vec::new();
        for c in [Copy3::Red, Copy3::Blue] {
            if let Some(b) = tc.complex(c).boundary(1) {
                for v in 0..b.rows() {
                    let x = tc.lift(c, b.row(v));
                    if span.insert(&x) {
                        gens.push(mask(&x));
                    }
                }
            }
        }
        let mut orbit = vec![0usize];
        for g in gens {
            let more: Vec<usize> = orbit.iter().map(|o| o ^ g).collect();
            orbit.extend(more);
        }
        let mut flips = Vec::new();
        for c in [Copy3::Red, Copy3::Blue] {
            for w in &tc.h1(c).cocycle_reps {
                flips.push(mask(&tc.lift(c, w)));
            }
        }
        Self { k_red: tc.red_h1.dim(), k_blue: tc.blue_h1.dim(), orbit, flips }
    }

    #[must_use]
    pub fn k(&self) -> usize {
        self.k_red + self.k_blue
    }

    fn offset(&self, l: usize) -> usize {
        (0..self.k()).filter(|i| l >> i & 1 == 1).fold(0, |m, i| m ^ self.flips[i])
    }

    /// ⟨ℓ|ψ⟩ for every logical basis label ℓ (red bits first).
    #[must_use]
    pub fn coefficients(&self, amp: impl Fn(usize) -> f64) -> Vec<f64> {
        let s = (self.orbit.len() as f64).sqrt().recip();
        (0..1usize << self.k())
            .map(|l| {
                let off = self.offset(l);
                s * self.orbit.iter().map(|&o| amp(o ^ off)).sum::<f64>()
            })
            .collect()
    }

    /// Dense encoding of Σ_ℓ c_ℓ |ℓ⟩.
    pub fn encode(&self, n: usize, coeffs: &[f64], cap: usize) -> Result<DenseState> {
        let mut st = DenseState::zero(n, cap)?;
        st.amps[0] = 0.0;
        let s = (self.orbit.len() as f64).sqrt().recip();
        for (l, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                let off = self.offset(l);
                for &o in &self.orbit {
                    st.amps[o ^ off] += s * c;
                }
            }
        }
        Ok(st)
    }
}

/// Logical content of a state in the code space.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalState {
    pub k: usize,
    pub coeffs: Vec<f64>,
    /// Σ |⟨ℓ|ψ⟩|².
    pub weight: f64,
    pub zbar: Vec<f64>,
    pub xbar: Vec<f64>,
}

impl LogicalState {
    #[must_use]
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let k = coeffs.len().trailing_zeros() as usize;
        let weight = coeffs.iter().map(|c| c * c).sum();
        let zbar = (0..k)
            .map(|i| coeffs.iter().enumerate().map(|(l, c)| if l >> i & 1 == 1 { -c * c } else { c * c }).sum())
            .collect();
        let xbar = (0..k).map(|i| coeffs.iter().enumerate().map(|(l, c)| c * coeffs[l ^ 1 << i]).sum()).collect();
        Self { k, coeffs, weight, zbar, xbar }
    }

    /// Reduced density matrix on logicals (i, j), basis |b_i b_j⟩ with b_i
    /// the high bit.
    #[must_use]
    pub fn pair_density(&self, i: usize, j: usize) -> [[f64; 4]; 4] {
        let mut rho = [[0.0; 4]; 4];
        let rest = !(1usize << i | 1 << j);
        let idx = |l: usize| (l >> i & 1) << 1 | (l >> j & 1);
        for (l1, c1) in self.coeffs.iter().enumerate() {
            for (l2, c2) in self.coeffs.iter().enumerate() {
                if l1 & rest == l2 & rest {
                    rho[idx(l1)][idx(l2)] += c1 * c2;
                }
            }
        }
        rho
    }

    #[must_use]
    pub fn pair_purity(&self, i: usize, j: usize) -> f64 {
        let r = self.pair_density(i, j);
        let tr: f64 = (0..4).map(|a| r[a][a]).sum();
        let sq: f64 = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| r[a][b] * r[b][a]).sum();
        sq / (tr * tr)
    }

    /// ⟨t|ρ_ij|t⟩ / tr ρ_ij.
    #[must_use]
    pub fn pair_fidelity(&self, i: usize, j: usize, target: &[f64; 4]) -> f64 {
        let r = self.pair_density(i, j);
        let tr: f64 = (0..4).map(|a| r[a][a]).sum();
        let mut f = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                f += target[a] * r[a][b] * target[b];
            }
        }
        f / tr
    }
}

/// (|00⟩ + |01⟩ + |10⟩)/√3.
#[must_use]
pub fn magic_state() -> [f64; 4] {
    let s = 3f64.sqrt().recip();
    [s, s, s, 0.0]
}

#[must_use]
pub fn state_11() -> [f64; 4] {
    [0.0, 0.0, 0.0, 1.0]
}

/// Projects onto the encoded logical basis. Fails when more than 1e−9 of
/// the norm lies outside the code space.
pub fn extract_logical(state: &DenseState, tc: &TripleCode) -> Result<LogicalState> {
    extract_with(&LogicalBasis::new(tc), |w| state.amps[w], state.norm_sq())
}

pub(crate) fn extract_with(basis: &LogicalBasis, amp: impl Fn(usize) -> f64, norm_sq: f64) -> Result<LogicalState> {
    let ls = LogicalState::from_coeffs(basis.coefficients(amp));
    let lost = norm_sq - ls.weight;
    if lost.abs() > 1e-9 {
        return Err(Error::Subspace(lost));
    }
    Ok(ls)
}
