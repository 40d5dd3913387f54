//! Phase-polynomial operators and stabilizer synthesis.
//!
//! An operator is stored as (−1)^c · CZ-layer · Z-string · X-string with the
//! X-string rightmost: acting on a basis state it sends |w⟩ to
//! (−1)^{φ(w ⊕ x)} |w ⊕ x⟩ with φ(u) = c + L·u + Σ_{(p,q)∈Q} u_p u_q.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::f2::{BitVector, EchelonBasis};
use crate::skeleton::{Copy3, TripleCode};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PhasePolyOp {
    n: usize,
    pub x: BitVector,
    pub z: BitVector,
    /// CZ pairs with p < q.
    pub cz: BTreeSet<(usize, usize)>,
    pub sign: bool,
}

fn ordered(p: usize, q: usize) -> (usize, usize) {
    if p < q {
        (p, q)
    } else {
        (q, p)
    }
}

impl PhasePolyOp {
    #[must_use]
    pub fn identity(n: usize) -> Self {
        Self { n, x: BitVector::zeros(n), z: BitVector::zeros(n), cz: BTreeSet::new(), sign: false }
    }

    #[must_use]
    pub fn x_string(n: usize, support: &[usize]) -> Self {
        let mut o = Self::identity(n);
        o.x = BitVector::from_indices(n, support.iter().copied());
        o
    }

    #[must_use]
    pub fn z_string(n: usize, support: &[usize]) -> Self {
        let mut o = Self::identity(n);
        o.z = BitVector::from_indices(n, support.iter().copied());
        o
    }

    /// # Panics
    /// Panics if `p == q`.
    #[must_use]
    pub fn cz_pair(n: usize, p: usize, q: usize) -> Self {
        assert_ne!(p, q, "CZ needs two distinct qubits");
        let mut o = Self::identity(n);
        o.cz.insert(ordered(p, q));
        o
    }

    #[must_use]
    pub fn minus_identity(n: usize) -> Self {
        let mut o = Self::identity(n);
        o.sign = true;
        o
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Toggles one CZ pair.
    pub fn toggle_cz(&mut self, p: usize, q: usize) {
        let k = ordered(p, q);
        if !self.cz.remove(&k) {
            self.cz.insert(k);
        }
    }

    #[must_use]
    pub fn is_identity(&self) -> bool {
        !self.sign && self.x.is_zero() && self.z.is_zero() && self.cz.is_empty()
    }

    #[must_use]
    pub fn is_diagonal(&self) -> bool {
        self.x.is_zero()
    }

    /// φ evaluated at a basis configuration.
    #[must_use]
    pub fn phase_at(&self, u: &BitVector) -> bool {
        let mut acc = self.sign ^ self.z.dot(u);
        for &(p, q) in &self.cz {
            acc ^= u.get(p) && u.get(q);
        }
        acc
    }

    /// Image of a basis state: returns (sign bit, new configuration).
    #[must_use]
    pub fn apply_basis(&self, w: &BitVector) -> (bool, BitVector) {
        let u = w.xor(&self.x);
        (self.phase_at(&u), u)
    }

    /// Diagonal part rewritten as a function of u ⊕ v.
    fn shifted_diag(&self, v: &BitVector) -> Self {
        let mut out = Self { n: self.n, x: BitVector::zeros(self.n), z: self.z.clone(), cz: self.cz.clone(), sign: self.sign };
        out.sign ^= self.z.dot(v);
        for &(p, q) in &self.cz {
            let (vp, vq) = (v.get(p), v.get(q));
            out.sign ^= vp && vq;
            if vp {
                out.z.flip(q);
            }
            if vq {
                out.z.flip(p);
            }
        }
        out
    }

    fn add_diag(&mut self, d: &Self) {
        self.sign ^= d.sign;
        self.z.xor_assign(&d.z);
        for &(p, q) in &d.cz {
            self.toggle_cz(p, q);
        }
    }

    #[must_use]
    pub fn to_export(&self, role: &str, sign: i8) -> OpExport {
        OpExport {
            role: role.to_string(),
            sign,
            x: self.x.support(),
            z: self.z.support(),
            cz: self.cz.iter().map(|&(p, q)| [p, q]).collect(),
        }
    }
}

impl fmt::Debug for PhasePolyOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}CZ{:?} Z{:?} X{:?}",
            if self.sign { "-" } else { "+" },
            self.cz,
            self.z.support(),
            self.x.support()
        )
    }
}

fn check_size(p: &PhasePolyOp, q: &PhasePolyOp) -> Result<()> {
    if p.n == q.n {
        Ok(())
    } else {
        Err(Error::Dimension(format!("operators on {} and {} qubits", p.n, q.n)))
    }
}

/// Normal-ordered product p·q, using X^v (−1)^{f(z)} = (−1)^{f(z+v)} X^v.
pub fn multiply(p: &PhasePolyOp, q: &PhasePolyOp) -> Result<PhasePolyOp> {
    check_size(p, q)?;
    let mut out = p.clone();
    out.x = p.x.xor(&q.x);
    out.add_diag(&q.shifted_diag(&p.x));
    Ok(out)
}

/// p⁻¹ = X^x D = D(· ⊕ x) X^x.
#[must_use]
pub fn inverse(p: &PhasePolyOp) -> PhasePolyOp {
    let mut out = p.shifted_diag(&p.x);
    out.x = p.x.clone();
    out
}

/// Group commutator p q p⁻¹ q⁻¹.
pub fn commutator(p: &PhasePolyOp, q: &PhasePolyOp) -> Result<PhasePolyOp> {
    let pq = multiply(p, q)?;
    let pqp = multiply(&pq, &inverse(p))?;
    multiply(&pqp, &inverse(q))
}

/// Product of a list of operators, left to right.
pub fn product<'a, I: IntoIterator<Item = &'a PhasePolyOp>>(n: usize, ops: I) -> Result<PhasePolyOp> {
    let mut acc = PhasePolyOp::identity(n);
    for o in ops {
        acc = multiply(&acc, o)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OpExport {
    pub role: String,
    pub sign: i8,
    pub x: Vec<usize>,
    pub z: Vec<usize>,
    pub cz: Vec<[usize; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    A(Copy3),
    ATilde(Copy3),
    B(Copy3),
}

impl Role {
    #[must_use]
    pub fn copy(self) -> Copy3 {
        match self {
            Role::A(c) | Role::ATilde(c) | Role::B(c) => c,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::A(c) => write!(f, "A^{c}"),
            Role::ATilde(c) => write!(f, "~A^{c}"),
            Role::B(c) => write!(f, "B^{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub role: Role,
    /// 0-cell (A) or 2-cell (B) index within the copy.
    pub cell: usize,
    pub op: PhasePolyOp,
}

#[derive(Clone, Debug)]
pub struct StabilizerSet {
    pub n: usize,
    pub generators: Vec<Generator>,
}

impl StabilizerSet {
    pub fn with_role(&self, f: impl Fn(Role) -> bool) -> impl Iterator<Item = &Generator> {
        self.generators.iter().filter(move |g| f(g.role))
    }

    /// X-type generators of one copy, indexed by 0-cell.
    #[must_use]
    pub fn x_type(&self, c: Copy3) -> Vec<&Generator> {
        self.with_role(|r| matches!(r, Role::A(k) | Role::ATilde(k) if k == c)).collect()
    }

    #[must_use]
    pub fn b_type(&self) -> Vec<&Generator> {
        self.with_role(|r| matches!(r, Role::B(_))).collect()
    }

    #[must_use]
    pub fn export(&self) -> Vec<OpExport> {
        self.generators
            .iter()
            .map(|g| g.op.to_export(&format!("{}[{}]", g.role, g.cell), if g.op.sign { -1 } else { 1 }))
            .collect()
    }

    #[must_use]
    pub fn cz_count(&self) -> usize {
        self.generators.iter().map(|g| g.op.cz.len()).sum()
    }
}

fn star(cx: &ChainComplex, v: usize) -> Vec<usize> {
    cx.boundary(1).map_or_else(Vec::new, |b| b.row(v).support())
}

fn push_b(tc: &TripleCode, gens: &mut Vec<Generator>) {
    let n = tc.n_qubits();
    for c in Copy3::ALL {
        if let Some(b2) = tc.complex(c).boundary(2) {
            for f in 0..b2.cols() {
                let supp: Vec<usize> = (0..b2.rows()).filter(|&e| b2.get(e, f)).map(|e| tc.qubit(c, e)).collect();
                gens.push(Generator { role: Role::B(c), cell: f, op: PhasePolyOp::z_string(n, &supp) });
            }
        }
    }
}

/// Bare X stabilizers at 0-cells and Z stabilizers at 2-cells.
#[must_use]
pub fn untwisted_stabilizers(tc: &TripleCode) -> StabilizerSet {
    let n = tc.n_qubits();
    let mut gens = Vec::new();
    for c in Copy3::ALL {
        for v in 0..tc.complex(c).dim(0) {
            let supp: Vec<usize> = star(tc.complex(c), v).into_iter().map(|e| tc.qubit(c, e)).collect();
            gens.push(Generator { role: Role::A(c), cell: v, op: PhasePolyOp::x_string(n, &supp) });
        }
    }
    push_b(tc, &mut gens);
    StabilizerSet { n, generators: gens }
}

/// Degree tuple whose sites carry the dressing of a copy's 0-cells.
fn dressing_tuple(c: Copy3) -> (usize, usize, usize) {
    match c {
        Copy3::Red => (0, 1, 1),
        Copy3::Blue => (1, 0, 1),
        Copy3::Green => (1, 1, 0),
    }
}

/// CZ pairs (global qubit ids) dressing every 0-cell of a copy.
#[must_use]
pub fn dressings(tc: &TripleCode, c: Copy3) -> Vec<BTreeSet<(usize, usize)>> {
    let mut out = vec![BTreeSet::new(); tc.complex(c).dim(0)];
    let [o1, o2] = c.others();
    for s in tc.sites(dressing_tuple(c)) {
        let v = s[c.idx()];
        let k = ordered(tc.qubit(o1, s[o1.idx()]), tc.qubit(o2, s[o2.idx()]));
        if !out[v].remove(&k) {
            out[v].insert(k);
        }
    }
    out
}

/// Dressed X stabilizers Ã (bare A times CZ pairs selected by the triple
/// cup on indicator cochains) and unchanged B stabilizers.
#[must_use]
pub fn twisted_stabilizers(tc: &TripleCode) -> StabilizerSet {
    let n = tc.n_qubits();
    let mut gens = Vec::new();
    for c in Copy3::ALL {
        for (v, pairs) in dressings(tc, c).into_iter().enumerate() {
            let supp: Vec<usize> = star(tc.complex(c), v).into_iter().map(|e| tc.qubit(c, e)).collect();
            let mut op = PhasePolyOp::x_string(n, &supp);
            op.cz = pairs;
            gens.push(Generator { role: Role::ATilde(c), cell: v, op });
        }
    }
    push_b(tc, &mut gens);
    StabilizerSet { n, generators: gens }
}

/// Membership of diagonal operators in the group generated by B's.
#[derive(Clone, Debug)]
pub struct BGroup {
    span: EchelonBasis,
}

impl BGroup {
    #[must_use]
    pub fn new(set: &StabilizerSet) -> Self {
        let mut span = EchelonBasis::new(set.n);
        for g in set.b_type() {
            span.insert(&g.op.z);
        }
        Self { span }
    }

    /// True when `op` is a product of B generators (which carry no sign,
    /// no X and no CZ part).
    #[must_use]
    pub fn contains(&self, op: &PhasePolyOp) -> bool {
        op.x.is_zero() && op.cz.is_empty() && !op.sign && self.span.contains(&op.z)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureFailure {
    pub i: usize,
    pub j: usize,
    pub roles: (String, String),
    pub commutator: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub pairs: usize,
    pub nontrivial: usize,
    pub failures: Vec<ClosureFailure>,
}

impl ClosureReport {
    #[must_use]
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Every pairwise commutator of X-type generators must be diagonal and a
/// product of B generators.
#[must_use]
pub fn commutation_closure(set: &StabilizerSet) -> ClosureReport {
    let bg = BGroup::new(set);
    let xs: Vec<(usize, &Generator)> =
        set.generators.iter().enumerate().filter(|(_, g)| !matches!(g.role, Role::B(_))).collect();
    let mut rep = ClosureReport::default();
    for (a, &(i, gi)) in xs.iter().enumerate() {
        for &(j, gj) in &xs[a + 1..] {
            let c = commutator(&gi.op, &gj.op).expect("same register");
            rep.pairs += 1;
            if !c.is_identity() {
                rep.nontrivial += 1;
            }
            if !bg.contains(&c) {
                rep.failures.push(ClosureFailure {
                    i,
                    j,
                    roles: (format!("{}[{}]", gi.role, gi.cell), format!("{}[{}]", gj.role, gj.cell)),
                    commutator: format!("{c:?}"),
                });
            }
        }
    }
    rep
}

/// Product of a copy's dressed generators over the support of a closed
/// 0-cochain, in ascending cell order.
pub fn charge_parity(tc: &TripleCode, set: &StabilizerSet, copy: Copy3, eta: &BitVector) -> Result<PhasePolyOp> {
    let cx = tc.complex(copy);
    if eta.len() != cx.dim(0) {
        return Err(Error::Dimension(format!("0-cochain of length {} on {} cells", eta.len(), cx.dim(0))));
    }
    if !cx.d(0, eta).is_zero() {
        return Err(Error::NotACocycle);
    }
    let gens = set.x_type(copy);
    product(set.n, eta.iter_ones().map(|v| &gens[v].op))
}

#[derive(Clone, Debug)]
pub struct LogicalZ {
    pub copy: Copy3,
    pub class: usize,
    pub op: PhasePolyOp,
}

/// Bare X support on a basis cocycle plus the projector factors that
/// dress it inside the code space.
#[derive(Clone, Debug, Serialize)]
pub struct MagneticDescriptor {
    pub copy: Copy3,
    pub class: usize,
    pub bare_x: Vec<usize>,
    pub projectors: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Logicals {
    pub zbars: Vec<LogicalZ>,
    pub xdescs: Vec<MagneticDescriptor>,
}

/// Z̄ per basis cycle of every copy's H₁, and magnetic descriptors on the
/// aligned cocycles.
#[must_use]
pub fn logical_operators(tc: &TripleCode) -> Logicals {
    let n = tc.n_qubits();
    let mut zbars = Vec::new();
    let mut xdescs = Vec::new();
    for c in Copy3::ALL {
        let h = tc.h1(c);
        for (k, (z, w)) in h.cycle_reps.iter().zip(&h.cocycle_reps).enumerate() {
            let zs: Vec<usize> = z.iter_ones().map(|e| tc.qubit(c, e)).collect();
            zbars.push(LogicalZ { copy: c, class: k, op: PhasePolyOp::z_string(n, &zs) });
            xdescs.push(MagneticDescriptor {
                copy: c,
                class: k,
                bare_x: w.iter_ones().map(|e| tc.qubit(c, e)).collect(),
                projectors: c.others().iter().map(|o| Role::A(*o).to_string()).collect(),
            });
        }
    }
    Logicals { zbars, xdescs }
}

/// Diagonal cubic phase (−1)^{Σ z_p z_q z_r} over a list of triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CczLayer {
    pub n: usize,
    pub triples: BTreeSet<(usize, usize, usize)>,
}

impl CczLayer {
    /// U · p · U⁻¹. The cubic phase's discrete derivative along p's X
    /// string is quadratic, so the result stays a phase polynomial.
    ///
    /// # Panics
    /// Panics on register size mismatch.
    #[must_use]
    pub fn conjugate(&self, p: &PhasePolyOp) -> PhasePolyOp {
        assert_eq!(self.n, p.n, "register size mismatch");
        let v = &p.x;
        let mut d = PhasePolyOp::identity(self.n);
        for &(a, b, c) in &self.triples {
            let (va, vb, vc) = (v.get(a), v.get(b), v.get(c));
            for (vi, j, k) in [(va, b, c), (vb, a, c), (vc, a, b)] {
                if vi {
                    d.toggle_cz(j, k);
                }
            }
            for (vi, vj, k) in [(va, vb, c), (va, vc, b), (vb, vc, a)] {
                if vi && vj {
                    d.z.flip(k);
                }
            }
            d.sign ^= va && vb && vc;
        }
        let mut out = p.clone();
        out.add_diag(&d);
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EntanglerReport {
    pub ccz_count: usize,
    /// Matter X terms whose conjugate differs from the minimally coupled
    /// term at zero gauge field.
    pub spt_mismatches: Vec<String>,
    /// Gauss operators failing to commute with a coupled term.
    pub gauss_failures: Vec<String>,
    /// Coupled terms that do not reduce to the dressed stabilizers.
    pub gauge_mismatches: Vec<String>,
}

impl EntanglerReport {
    #[must_use]
    pub fn ok(&self) -> bool {
        self.spt_mismatches.is_empty() && self.gauss_failures.is_empty() && self.gauge_mismatches.is_empty()
    }
}

/// Register for the gauging derivation: gauge qubits first (same ids as the
/// twisted code), then one matter qubit per 0-cell of each copy.
#[derive(Clone, Debug)]
pub struct MatterLayout {
    pub n_gauge: usize,
    pub matter_offsets: [usize; 3],
    pub n_total: usize,
}

impl MatterLayout {
    #[must_use]
    pub fn new(tc: &TripleCode) -> Self {
        let n_gauge = tc.n_qubits();
        let d0: Vec<usize> = Copy3::ALL.iter().map(|&c| tc.complex(c).dim(0)).collect();
        let matter_offsets = [n_gauge, n_gauge + d0[0], n_gauge + d0[0] + d0[1]];
        Self { n_gauge, matter_offsets, n_total: n_gauge + d0.iter().sum::<usize>() }
    }

    #[must_use]
    pub fn matter(&self, c: Copy3, v: usize) -> usize {
        self.matter_offsets[c.idx()] + v
    }
}

/// CCZ triples (red, blue, green matter qubits) with ∫ σ̃ ∪ dσ̃' ∪ dσ̃'' = 1.
#[must_use]
pub fn entangler(tc: &TripleCode) -> (MatterLayout, CczLayer) {
    let lay = MatterLayout::new(tc);
    let b_blue = tc.complex(Copy3::Blue).boundary(1);
    let b_green = tc.complex(Copy3::Green).boundary(1);
    let mut counts: BTreeMap<(usize, usize, usize), bool> = BTreeMap::new();
    for s in tc.sites((0, 1, 1)) {
        let (Some(bb), Some(bg)) = (b_blue, b_green) else { break };
        for vb in (0..bb.rows()).filter(|&v| bb.get(v, s[1])) {
            for vg in (0..bg.rows()).filter(|&v| bg.get(v, s[2])) {
                let k = (lay.matter(Copy3::Red, s[0]), lay.matter(Copy3::Blue, vb), lay.matter(Copy3::Green, vg));
                *counts.entry(k).or_default() ^= true;
            }
        }
    }
    let triples = counts.into_iter().filter(|(_, on)| *on).map(|(k, _)| k).collect();
    (lay.clone(), CczLayer { n: lay.n_total, triples })
}

/// Linear form b̂(e) = Σ_{v∈∂e} λ_v + b'_e as a list of register qubits.
fn gauge_field(tc: &TripleCode, lay: &MatterLayout, c: Copy3, e: usize) -> Vec<usize> {
    let mut out = vec![tc.qubit(c, e)];
    if let Some(b) = tc.complex(c).boundary(1) {
        out.extend((0..b.rows()).filter(|&v| b.get(v, e)).map(|v| lay.matter(c, v)));
    }
    out
}

/// Minimally coupled term at a matter 0-cell: X̃_σ (−1)^{∫ σ̃ ∪ b̂ ∪ ĉ}.
fn coupled_term(tc: &TripleCode, lay: &MatterLayout, c: Copy3, v: usize) -> PhasePolyOp {
    let mut op = PhasePolyOp::x_string(lay.n_total, &[lay.matter(c, v)]);
    let [o1, o2] = c.others();
    for s in tc.sites(dressing_tuple(c)) {
        if s[c.idx()] != v {
            continue;
        }
        for p in gauge_field(tc, lay, o1, s[o1.idx()]) {
            for q in gauge_field(tc, lay, o2, s[o2.idx()]) {
                op.toggle_cz(p, q);
            }
        }
    }
    op
}

fn gauss(tc: &TripleCode, lay: &MatterLayout, c: Copy3, v: usize) -> PhasePolyOp {
    let mut supp = vec![lay.matter(c, v)];
    supp.extend(star(tc.complex(c), v).into_iter().map(|e| tc.qubit(c, e)));
    PhasePolyOp::x_string(lay.n_total, &supp)
}

/// Drops every term touching qubits at or above `cut` (sets them to 0).
fn restrict_below(op: &PhasePolyOp, cut: usize) -> PhasePolyOp {
    let mut out = op.clone();
    out.z = BitVector::from_indices(op.n, op.z.iter_ones().filter(|&i| i < cut));
    out.cz.retain(|&(_, q)| q < cut);
    out
}

/// Keeps only terms on qubits at or above `cut`.
fn restrict_above(op: &PhasePolyOp, cut: usize) -> PhasePolyOp {
    let mut out = op.clone();
    out.z = BitVector::from_indices(op.n, op.z.iter_ones().filter(|&i| i >= cut));
    out.cz.retain(|&(p, _)| p >= cut);
    out
}

fn embed(op: &PhasePolyOp, n: usize) -> PhasePolyOp {
    let mut out = PhasePolyOp::identity(n);
    out.x = BitVector::from_indices(n, op.x.iter_ones());
    out.z = BitVector::from_indices(n, op.z.iter_ones());
    out.cz.clone_from(&op.cz);
    out.sign = op.sign;
    out
}

/// Conjugates matter X terms by the CCZ layer, compares with the coupled
/// terms at zero gauge field, checks Gauss-law commutation, and reduces the
/// coupled terms in unitary gauge to the dressed stabilizers.
#[must_use]
pub fn entangler_round_trip(tc: &TripleCode) -> EntanglerReport {
    let (lay, u) = entangler(tc);
    let twisted = twisted_stabilizers(tc);
    let mut rep = EntanglerReport { ccz_count: u.triples.len(), ..Default::default() };
    let mut terms = Vec::new();
    for c in Copy3::ALL {
        let tilde = twisted.x_type(c);
        for v in 0..tc.complex(c).dim(0) {
            let m = lay.matter(c, v);
            let conj = u.conjugate(&PhasePolyOp::x_string(lay.n_total, &[m]));
            let term = coupled_term(tc, &lay, c, v);
            if conj != restrict_above(&term, lay.n_gauge) {
                rep.spt_mismatches.push(format!("{c}[{v}]"));
            }
            let g = gauss(tc, &lay, c, v);
            let unitary = restrict_below(&multiply(&g, &term).expect("same register"), lay.n_gauge);
            if unitary != embed(&tilde[v].op, lay.n_total) {
                rep.gauge_mismatches.push(format!("{c}[{v}]"));
            }
            terms.push((format!("{c}[{v}]"), term));
        }
    }
    for c in Copy3::ALL {
        for v in 0..tc.complex(c).dim(0) {
            let g = gauss(tc, &lay, c, v);
            for (name, t) in &terms {
                if !commutator(&g, t).expect("same register").is_identity() {
                    rep.gauss_failures.push(format!("G^{c}[{v}] vs {name}"));
                }
            }
        }
    }
    rep
}
