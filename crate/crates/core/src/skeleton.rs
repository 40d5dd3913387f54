//! Factor complexes of a classical code, the three product complexes and
//! the factorized triple cup product on them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::{
    homology_basis, kunneth_basis, tensor_product, validate, ChainComplex, ClassTag, ComplexJson, FactorTag,
    HomologyBasis,
};
use crate::error::{Error, Result};
use crate::f2::{BitMatrix, BitVector};

/// Which incident check stands in for a bit in the bit-type cup rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum Adjacency {
    #[default]
    MinIndex,
    Symmetrized,
}

impl Adjacency {
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            Adjacency::MinIndex => "min-index",
            Adjacency::Symmetrized => "symmetrized",
        }
    }
}

impl std::str::FromStr for Adjacency {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "min-index" | "min" => Ok(Adjacency::MinIndex),
            "symmetrized" | "sym" => Ok(Adjacency::Symmetrized),
            other => Err(format!("unknown adjacency convention `{other}`")),
        }
    }
}

/// Treatment of factor triples that carry a 1-cochain of the retract graph.
///
/// `Path` pairs a check c, a bit b and an edge e whenever e lies on b's
/// path between the reference check and c. `Vanish` sets all of them to
/// zero, which breaks the Leibniz rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum RetractRule {
    #[default]
    Path,
    Vanish,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct CupRules {
    pub adjacency: Adjacency,
    pub retract: RetractRule,
}

impl CupRules {
    #[must_use]
    pub fn with_adjacency(adjacency: Adjacency) -> Self {
        Self { adjacency, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct FactorFamily {
    pub h: BitMatrix,
    pub x: ChainComplex,
    pub xdual: ChainComplex,
    pub xr: ChainComplex,
    pub xrdual: ChainComplex,
    /// Incident checks per bit, ascending.
    pub adjacency: Vec<Vec<usize>>,
    /// Edge ids of each bit's path, in path order.
    pub bit_edges: Vec<Vec<usize>>,
    /// (bit, lower check, upper check) per edge.
    pub edges: Vec<(usize, usize, usize)>,
    /// Aligned bases of X, X* and XR in degrees 0 and 1.
    pub x_bases: [HomologyBasis; 2],
    pub xdual_bases: [HomologyBasis; 2],
    pub xr_bases: [HomologyBasis; 2],
}

impl FactorFamily {
    #[must_use]
    pub fn n_bits(&self) -> usize {
        self.h.cols()
    }

    #[must_use]
    pub fn n_checks(&self) -> usize {
        self.h.rows()
    }

    #[must_use]
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Loops of the retract graph; they give spurious classes downstream.
    #[must_use]
    pub fn spurious_loops(&self) -> &HomologyBasis {
        &self.xr_bases[1]
    }
}

/// Builds X, X*, XR and XR* from a parity-check matrix (rows = checks).
pub fn factor_family(h: &BitMatrix) -> Result<FactorFamily> {
    if h.rows() == 0 || h.cols() == 0 {
        return Err(Error::Construction(format!("parity-check matrix is {}x{}", h.rows(), h.cols())));
    }
    if h.is_zero() {
        return Err(Error::Construction("parity-check matrix is zero".into()));
    }
    let ht = h.transpose();
    let adjacency: Vec<Vec<usize>> = (0..h.cols()).map(|b| ht.row(b).support()).collect();
    let mut edges = Vec::new();
    let mut bit_edges = Vec::new();
    for (b, checks) in adjacency.iter().enumerate() {
        let mut ids = Vec::new();
        for w in checks.windows(2) {
            ids.push(edges.len());
            edges.push((b, w[0], w[1]));
        }
        bit_edges.push(ids);
    }
    let mut hr = BitMatrix::zeros(h.rows(), edges.len());
    for (e, &(_, c1, c2)) in edges.iter().enumerate() {
        hr.set(c1, e, true);
        hr.set(c2, e, true);
    }
    let x = ChainComplex::from_boundaries("X", FactorTag::X, vec![h.clone()])?;
    let xdual = ChainComplex::from_boundaries("Xd", FactorTag::Xdual, vec![ht])?;
    let xr = ChainComplex::from_boundaries("XR", FactorTag::XR, vec![hr.clone()])?;
    let xrdual = ChainComplex::from_boundaries("XRd", FactorTag::XRdual, vec![hr.transpose()])?;
    let bases = |c: &ChainComplex| [homology_basis(c, 0), homology_basis(c, 1)];
    Ok(FactorFamily {
        h: h.clone(),
        x_bases: bases(&x),
        xdual_bases: bases(&xdual),
        xr_bases: bases(&xr),
        x,
        xdual,
        xr,
        xrdual,
        adjacency,
        bit_edges,
        edges,
    })
}

/// One factor cell: (degree, index).
pub type FCell = (usize, usize);

/// Nonzero indicator triples of one factor, slots ordered (X, X*, XR).
#[must_use]
pub fn factor_sites(f: &FactorFamily, rules: CupRules) -> Vec<[FCell; 3]> {
    let mut out = Vec::new();
    for c in 0..f.n_checks() {
        out.push([(0, c), (1, c), (0, c)]);
    }
    for (b, checks) in f.adjacency.iter().enumerate() {
        match rules.adjacency {
            Adjacency::MinIndex => {
                if let Some(&c) = checks.first() {
                    out.push([(1, b), (0, b), (0, c)]);
                }
            }
            Adjacency::Symmetrized => {
                for &c in checks {
                    out.push([(1, b), (0, b), (0, c)]);
                }
            }
        }
    }
    if rules.retract == RetractRule::Path {
        for (b, checks) in f.adjacency.iter().enumerate() {
            let refs: Vec<usize> = match rules.adjacency {
                Adjacency::MinIndex => vec![0],
                Adjacency::Symmetrized => (0..checks.len()).collect(),
            };
            for (pos, &c) in checks.iter().enumerate() {
                let mut hits: BTreeMap<usize, bool> = BTreeMap::new();
                for &r in &refs {
                    for k in r.min(pos)..r.max(pos) {
                        *hits.entry(f.bit_edges[b][k]).or_default() ^= true;
                    }
                }
                for (e, on) in hits {
                    if on {
                        out.push([(0, c), (0, b), (1, e)]);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Copy3 {
    Red,
    Blue,
    Green,
}

impl Copy3 {
    pub const ALL: [Copy3; 3] = [Copy3::Red, Copy3::Blue, Copy3::Green];

    #[must_use]
    pub fn idx(self) -> usize {
        self as usize
    }

    /// The other two copies in (red, blue, green) order.
    #[must_use]
    pub fn others(self) -> [Copy3; 2] {
        match self {
            Copy3::Red => [Copy3::Blue, Copy3::Green],
            Copy3::Blue => [Copy3::Red, Copy3::Green],
            Copy3::Green => [Copy3::Red, Copy3::Blue],
        }
    }

    #[must_use]
    pub fn letter(self) -> char {
        match self {
            Copy3::Red => 'r',
            Copy3::Blue => 'b',
            Copy3::Green => 'g',
        }
    }
}

impl fmt::Display for Copy3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Degree tuples (red, blue, green) of total degree 2.
pub const ADMISSIBLE: [(usize, usize, usize); 3] = [(1, 1, 0), (0, 1, 1), (1, 0, 1)];
const ALL_TUPLES: [(usize, usize, usize); 6] = [(1, 1, 0), (0, 1, 1), (1, 0, 1), (2, 0, 0), (0, 2, 0), (0, 0, 2)];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub copy: Copy3,
    pub degree: usize,
    pub coeffs: BitVector,
}

impl Cochain {
    #[must_use]
    pub fn new(copy: Copy3, degree: usize, coeffs: BitVector) -> Self {
        Self { copy, degree, coeffs }
    }
}

#[derive(Clone, Debug)]
pub struct TripleCode {
    pub fx: FactorFamily,
    pub fy: FactorFamily,
    pub rules: CupRules,
    /// Red X⊗X*, blue X*⊗XR, green XR⊗X.
    pub complexes: [ChainComplex; 3],
    pub offsets: [usize; 3],
    /// H¹ bases of red and blue, H⁰ basis of green ({γ}), H¹ of green (ξ).
    pub red_h1: HomologyBasis,
    pub blue_h1: HomologyBasis,
    pub green_h0: HomologyBasis,
    pub green_h1: HomologyBasis,
    pub red_h0: HomologyBasis,
    pub blue_h0: HomologyBasis,
    sites: HashMap<(usize, usize, usize), Vec<[usize; 3]>>,
}

impl TripleCode {
    #[must_use]
    pub fn complex(&self, c: Copy3) -> &ChainComplex {
        &self.complexes[c.idx()]
    }

    /// Qubits (grade-1 cells) of one copy.
    #[must_use]
    pub fn n_copy(&self, c: Copy3) -> usize {
        self.complex(c).dim(1)
    }

    #[must_use]
    pub fn n_qubits(&self) -> usize {
        Copy3::ALL.iter().map(|&c| self.n_copy(c)).sum()
    }

    #[must_use]
    pub fn qubit(&self, c: Copy3, cell: usize) -> usize {
        self.offsets[c.idx()] + cell
    }

    /// Lifts a grade-1 vector of one copy into the global register.
    #[must_use]
    pub fn lift(&self, c: Copy3, v: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.n_qubits());
        for i in v.iter_ones() {
            out.set(self.qubit(c, i), true);
        }
        out
    }

    /// Evaluation sites of a degree tuple as (red, blue, green) cell indices.
    #[must_use]
    pub fn sites(&self, tuple: (usize, usize, usize)) -> &[[usize; 3]] {
        self.sites.get(&tuple).map_or(&[], Vec::as_slice)
    }

    /// H¹ basis of a copy's complex (red, blue) or green's ξ classes.
    #[must_use]
    pub fn h1(&self, c: Copy3) -> &HomologyBasis {
        match c {
            Copy3::Red => &self.red_h1,
            Copy3::Blue => &self.blue_h1,
            Copy3::Green => &self.green_h1,
        }
    }

    #[must_use]
    pub fn h0(&self, c: Copy3) -> &HomologyBasis {
        match c {
            Copy3::Red => &self.red_h0,
            Copy3::Blue => &self.blue_h0,
            Copy3::Green => &self.green_h0,
        }
    }

    /// Red classes of the form b⁰ ⊗ b'*¹.
    #[must_use]
    pub fn red_decomposable(&self) -> Vec<usize> {
        summand(&self.red_h1, 0, 1)
    }

    /// Blue classes of the form b*¹ ⊗ c⁰.
    #[must_use]
    pub fn blue_decomposable(&self) -> Vec<usize> {
        summand(&self.blue_h1, 1, 0)
    }

    /// Blue classes b*⁰ ⊗ f¹ built on retract-graph loops.
    #[must_use]
    pub fn blue_spurious(&self) -> Vec<usize> {
        summand(&self.blue_h1, 0, 1)
    }

    /// Green ξ classes carrying a retract-graph loop.
    #[must_use]
    pub fn green_spurious(&self) -> Vec<usize> {
        summand(&self.green_h1, 1, 0)
    }

    /// Cup integral over sites for any tuple of total degree 2.
    fn eval_sites(&self, u: &Cochain, v: &Cochain, w: &Cochain) -> Result<bool> {
        let tuple = (u.degree, v.degree, w.degree);
        if !ALL_TUPLES.contains(&tuple) {
            return Err(Error::UnsupportedDegree(tuple));
        }
        for (c, want) in [(u, Copy3::Red), (v, Copy3::Blue), (w, Copy3::Green)] {
            if c.copy != want || c.coeffs.len() != self.complex(want).dim(c.degree) {
                return Err(Error::Dimension(format!("cochain on copy {} degree {} has length {}", c.copy, c.degree, c.coeffs.len())));
            }
        }
        let mut acc = false;
        for s in self.sites(tuple) {
            acc ^= u.coeffs.get(s[0]) && v.coeffs.get(s[1]) && w.coeffs.get(s[2]);
        }
        Ok(acc)
    }

    #[must_use]
    pub fn descriptor(&self) -> TripleDescriptor {
        let basis = |h: &HomologyBasis| BasisJson {
            degree: h.degree,
            cycles: h.cycle_reps.iter().map(BitVector::to_string01).collect(),
            cocycles: h.cocycle_reps.iter().map(BitVector::to_string01).collect(),
            tags: h.tags.clone(),
        };
        let t = intersection_tensor(self);
        TripleDescriptor {
            qubits: [self.n_copy(Copy3::Red), self.n_copy(Copy3::Blue), self.n_copy(Copy3::Green)],
            offsets: self.offsets,
            adjacency: self.rules.adjacency.as_str().to_string(),
            retract_rule: format!("{:?}", self.rules.retract).to_lowercase(),
            complexes: self.complexes.iter().map(ChainComplex::to_json).collect(),
            red_h1: basis(&self.red_h1),
            blue_h1: basis(&self.blue_h1),
            green_h0: basis(&self.green_h0),
            green_h1: basis(&self.green_h1),
            tensor: TensorJson { dims: t.dims, entries: t.entries.iter().map(|&(a, b, g)| [a, b, g]).collect() },
        }
    }
}

fn summand(h: &HomologyBasis, i: usize, j: usize) -> Vec<usize> {
    h.tags
        .iter()
        .enumerate()
        .filter(|(_, t)| t.left_degree == i && t.right_degree == j)
        .map(|(k, _)| k)
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisJson {
    pub degree: usize,
    pub cycles: Vec<String>,
    pub cocycles: Vec<String>,
    pub tags: Vec<ClassTag>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TensorJson {
    pub dims: [usize; 3],
    pub entries: Vec<[usize; 3]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleDescriptor {
    pub qubits: [usize; 3],
    pub offsets: [usize; 3],
    pub adjacency: String,
    pub retract_rule: String,
    pub complexes: Vec<ComplexJson>,
    pub red_h1: BasisJson,
    pub blue_h1: BasisJson,
    pub green_h0: BasisJson,
    pub green_h1: BasisJson,
    pub tensor: TensorJson,
}

/// Assembles the three product complexes, their bases and the cup sites.
pub fn triple_code(hx: &BitMatrix, hy: &BitMatrix, rules: CupRules) -> Result<TripleCode> {
    let fx = factor_family(hx)?;
    let fy = factor_family(hy)?;
    let red = tensor_product(&fx.x, &fy.xdual);
    let blue = tensor_product(&fx.xdual, &fy.xr);
    let green = tensor_product(&fx.xr, &fy.x);
    for c in [&red, &blue, &green] {
        if let Some(g) = validate(c).first_failure() {
            return Err(Error::Construction(format!("{} fails validation at grade {g}", c.name)));
        }
    }
    let kb = |p: &ChainComplex, l: &[HomologyBasis; 2], r: &[HomologyBasis; 2], k| kunneth_basis(p, l, r, k);
    let red_h1 = kb(&red, &fx.x_bases, &fy.xdual_bases, 1);
    let red_h0 = kb(&red, &fx.x_bases, &fy.xdual_bases, 0);
    let blue_h1 = kb(&blue, &fx.xdual_bases, &fy.xr_bases, 1);
    let blue_h0 = kb(&blue, &fx.xdual_bases, &fy.xr_bases, 0);
    let green_h0 = kb(&green, &fx.xr_bases, &fy.x_bases, 0);
    let green_h1 = kb(&green, &fx.xr_bases, &fy.x_bases, 1);

    let sx = factor_sites(&fx, rules);
    let sy = factor_sites(&fy, rules);
    let (lr, lb, lg) = (red.layout().unwrap(), blue.layout().unwrap(), green.layout().unwrap());
    let mut sites: HashMap<(usize, usize, usize), Vec<[usize; 3]>> = HashMap::new();
    for tx in &sx {
        for ty in &sy {
            // x slots (X, X*, XR) -> (r, b, g); y slots (X, X*, XR) -> (g, r, b)
            let r = (tx[0], ty[1]);
            let b = (tx[1], ty[2]);
            let g = (tx[2], ty[0]);
            let tuple = (r.0 .0 + r.1 .0, b.0 .0 + b.1 .0, g.0 .0 + g.1 .0);
            let ir = lr.index(r.0 .0, r.0 .1, r.1 .0, r.1 .1);
            let ib = lb.index(b.0 .0, b.0 .1, b.1 .0, b.1 .1);
            let ig = lg.index(g.0 .0, g.0 .1, g.1 .0, g.1 .1);
            sites.entry(tuple).or_default().push([ir, ib, ig]);
        }
    }
    for v in sites.values_mut() {
        v.sort_unstable();
    }
    let offsets = [0, red.dim(1), red.dim(1) + blue.dim(1)];
    Ok(TripleCode {
        fx,
        fy,
        rules,
        complexes: [red, blue, green],
        offsets,
        red_h1,
        blue_h1,
        green_h0,
        green_h1,
        red_h0,
        blue_h0,
        sites,
    })
}

/// ∫ u ∪ v ∪ w for the three spatial degree tuples.
pub fn cup_eval_triple(tc: &TripleCode, u: &Cochain, v: &Cochain, w: &Cochain) -> Result<bool> {
    let tuple = (u.degree, v.degree, w.degree);
    if !ADMISSIBLE.contains(&tuple) {
        return Err(Error::UnsupportedDegree(tuple));
    }
    tc.eval_sites(u, v, w)
}

/// Sparse 3-index bit tensor T[α][β][γ].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionTensor {
    pub dims: [usize; 3],
    pub entries: Vec<(usize, usize, usize)>,
}

impl IntersectionTensor {
    #[must_use]
    pub fn get(&self, a: usize, b: usize, g: usize) -> bool {
        self.entries.binary_search(&(a, b, g)).is_ok()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn toggle(&mut self, a: usize, b: usize, g: usize) {
        match self.entries.binary_search(&(a, b, g)) {
            Ok(i) => {
                self.entries.remove(i);
            }
            Err(i) => self.entries.insert(i, (a, b, g)),
        }
    }
}

/// Tensor on explicit representative lists.
pub fn tensor_from_reps(tc: &TripleCode, alphas: &[BitVector], betas: &[BitVector], gammas: &[BitVector]) -> Result<IntersectionTensor> {
    let mut entries = Vec::new();
    for (a, ua) in alphas.iter().enumerate() {
        let u = Cochain::new(Copy3::Red, 1, ua.clone());
        for (b, vb) in betas.iter().enumerate() {
            let v = Cochain::new(Copy3::Blue, 1, vb.clone());
            for (g, wg) in gammas.iter().enumerate() {
                let w = Cochain::new(Copy3::Green, 0, wg.clone());
                if cup_eval_triple(tc, &u, &v, &w)? {
                    entries.push((a, b, g));
                }
            }
        }
    }
    Ok(IntersectionTensor { dims: [alphas.len(), betas.len(), gammas.len()], entries })
}

/// T on the chosen basis cocycles.
#[must_use]
pub fn intersection_tensor(tc: &TripleCode) -> IntersectionTensor {
    tensor_from_reps(tc, &tc.red_h1.cocycle_reps, &tc.blue_h1.cocycle_reps, &tc.green_h0.cocycle_reps)
        .expect("basis cochains have matching shapes")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StokesWitness {
    pub kind: &'static str,
    pub degrees: (usize, usize, usize),
    pub x: String,
    pub y: String,
    pub z: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StokesReport {
    pub leibniz_trials: usize,
    pub shift_trials: usize,
    pub failures: Vec<StokesWitness>,
}

impl StokesReport {
    #[must_use]
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> BitVector {
    BitVector::from_indices(n, (0..n).filter(|_| rng.gen::<bool>()))
}

fn random_cocycle(rng: &mut ChaCha8Rng, tc: &TripleCode, c: Copy3, k: usize) -> BitVector {
    let cx = tc.complex(c);
    let h = if k == 0 { tc.h0(c) } else { tc.h1(c) };
    let mut v = BitVector::zeros(cx.dim(k));
    for w in &h.cocycle_reps {
        if rng.gen::<bool>() {
            v.xor_assign(w);
        }
    }
    if k > 0 {
        v.xor_assign(&cx.d(k - 1, &random_vec(rng, cx.dim(k - 1))));
    }
    v
}

/// Randomized Leibniz and coboundary-shift checks of the cup integral.
#[must_use]
pub fn stokes_check(tc: &TripleCode, trials: usize, seed: u64) -> StokesReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = StokesReport::default();
    let cx = |c: Copy3| tc.complex(c);
    let eval = |x: &Cochain, y: &Cochain, z: &Cochain| tc.eval_sites(x, y, z).expect("valid shapes");
    for t in 0..trials {
        // Leibniz: degrees of (x, y, z) sum to one.
        let degs = [(1, 0, 0), (0, 1, 0), (0, 0, 1)][t % 3];
        let mk = |rng: &mut ChaCha8Rng, c: Copy3, k: usize| Cochain::new(c, k, random_vec(rng, cx(c).dim(k)));
        let x = mk(&mut rng, Copy3::Red, degs.0);
        let y = mk(&mut rng, Copy3::Blue, degs.1);
        let z = mk(&mut rng, Copy3::Green, degs.2);
        let dx = Cochain::new(Copy3::Red, degs.0 + 1, cx(Copy3::Red).d(degs.0, &x.coeffs));
        let dy = Cochain::new(Copy3::Blue, degs.1 + 1, cx(Copy3::Blue).d(degs.1, &y.coeffs));
        let dz = Cochain::new(Copy3::Green, degs.2 + 1, cx(Copy3::Green).d(degs.2, &z.coeffs));
        let total = eval(&dx, &y, &z) ^ eval(&x, &dy, &z) ^ eval(&x, &y, &dz);
        rep.leibniz_trials += 1;
        if total {
            rep.failures.push(StokesWitness {
                kind: "leibniz",
                degrees: degs,
                x: x.coeffs.to_string01(),
                y: y.coeffs.to_string01(),
                z: z.coeffs.to_string01(),
            });
        }

        // Coboundary shift of one closed argument, the others closed too.
        let tuple = ADMISSIBLE[t % 3];
        let u = Cochain::new(Copy3::Red, tuple.0, random_cocycle(&mut rng, tc, Copy3::Red, tuple.0));
        let v = Cochain::new(Copy3::Blue, tuple.1, random_cocycle(&mut rng, tc, Copy3::Blue, tuple.1));
        let w = Cochain::new(Copy3::Green, tuple.2, random_cocycle(&mut rng, tc, Copy3::Green, tuple.2));
        let base = eval(&u, &v, &w);
        let mut shifted = [u.clone(), v.clone(), w.clone()];
        for (slot, c) in Copy3::ALL.iter().enumerate() {
            let k = shifted[slot].degree;
            if k > 0 {
                let s = cx(*c).d(k - 1, &random_vec(&mut rng, cx(*c).dim(k - 1)));
                shifted[slot].coeffs.xor_assign(&s);
            }
        }
        rep.shift_trials += 1;
        if eval(&shifted[0], &shifted[1], &shifted[2]) != base {
            rep.failures.push(StokesWitness {
                kind: "shift",
                degrees: tuple,
                x: u.coeffs.to_string01(),
                y: v.coeffs.to_string01(),
                z: w.coeffs.to_string01(),
            });
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::repetition_cyclic;

    #[test]
    fn rep3_factor_family() {
        let f = factor_family(&repetition_cyclic(3)).unwrap();
        assert_eq!(f.n_bits(), 3);
        assert_eq!(f.n_checks(), 3);
        assert_eq!(f.n_edges(), 3);
        assert_eq!(f.spurious_loops().dim(), 1);
        assert_eq!(f.xr_bases[0].dim(), 1);
        assert_eq!(f.xr_bases[0].cocycle_reps[0], BitVector::ones(3));
        for c in [&f.x, &f.xdual, &f.xr, &f.xrdual] {
            assert!(validate(c).ok());
        }
        assert_eq!(f.x.boundary(1).unwrap(), &f.h);
    }

    #[test]
    fn single_check_bit_has_no_edges() {
        let h = BitMatrix::from_strs(&["110", "011"]);
        let f = factor_family(&h).unwrap();
        assert_eq!(f.bit_edges[0].len(), 0);
        assert_eq!(f.bit_edges[1].len(), 1);
        assert_eq!(f.bit_edges[2].len(), 0);
    }

    #[test]
    fn empty_matrix_is_rejected() {
        assert!(matches!(factor_family(&BitMatrix::zeros(0, 3)), Err(Error::Construction(_))));
        assert!(matches!(factor_family(&BitMatrix::zeros(2, 2)), Err(Error::Construction(_))));
        let h = repetition_cyclic(2);
        assert!(triple_code(&h, &BitMatrix::zeros(0, 2), CupRules::default()).is_err());
    }

    #[test]
    fn rep2_qubit_counts() {
        let h = repetition_cyclic(2);
        let tc = triple_code(&h, &h, CupRules::default()).unwrap();
        assert_eq!([tc.n_copy(Copy3::Red), tc.n_copy(Copy3::Blue), tc.n_copy(Copy3::Green)], [8, 8, 8]);
        assert_eq!(tc.n_qubits(), 24);
        assert_eq!(tc.offsets, [0, 8, 16]);
    }

    #[test]
    fn zero_argument_and_bad_degree() {
        let h = repetition_cyclic(3);
        let tc = triple_code(&h, &h, CupRules::default()).unwrap();
        let z = |c: Copy3, k| Cochain::new(c, k, BitVector::zeros(tc.complex(c).dim(k)));
        let a = Cochain::new(Copy3::Red, 1, tc.red_h1.cocycle_reps[0].clone());
        let b = Cochain::new(Copy3::Blue, 1, tc.blue_h1.cocycle_reps[0].clone());
        assert!(!cup_eval_triple(&tc, &a, &b, &z(Copy3::Green, 0)).unwrap());
        assert_eq!(
            cup_eval_triple(&tc, &z(Copy3::Red, 2), &z(Copy3::Blue, 0), &z(Copy3::Green, 0)),
            Err(Error::UnsupportedDegree((2, 0, 0)))
        );
    }

    #[test]
    fn path_rule_passes_stokes_and_vanish_rule_fails() {
        let h = repetition_cyclic(3);
        let good = triple_code(&h, &h, CupRules::default()).unwrap();
        assert!(stokes_check(&good, 60, 7).ok());
        let bad = triple_code(&h, &h, CupRules { retract: RetractRule::Vanish, ..CupRules::default() }).unwrap();
        let r = stokes_check(&bad, 60, 7);
        assert!(!r.ok());
        assert!(r.failures.iter().any(|w| w.kind == "leibniz"));
    }

    #[test]
    fn disjoint_indicators_vanish() {
        let h = repetition_cyclic(3);
        let tc = triple_code(&h, &h, CupRules::default()).unwrap();
        // every site for (1,1,0) must pair cells sharing factor components;
        // pick a red cell and a blue cell never appearing together.
        let s = tc.sites((1, 1, 0));
        let (r, b) = (0..tc.n_copy(Copy3::Red))
            .flat_map(|r| (0..tc.n_copy(Copy3::Blue)).map(move |b| (r, b)))
            .find(|&(r, b)| !s.iter().any(|x| x[0] == r && x[1] == b))
            .unwrap();
        let u = Cochain::new(Copy3::Red, 1, BitVector::unit(tc.n_copy(Copy3::Red), r));
        let v = Cochain::new(Copy3::Blue, 1, BitVector::unit(tc.n_copy(Copy3::Blue), b));
        let w = Cochain::new(Copy3::Green, 0, BitVector::ones(tc.complex(Copy3::Green).dim(0)));
        assert!(!cup_eval_triple(&tc, &u, &v, &w).unwrap());
    }
}
