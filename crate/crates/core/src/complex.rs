//! Graded GF(2) chain complexes, (co)homology bases and tensor products.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{kernel_basis, quotient_basis, BitMatrix, BitVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FactorTag {
    X,
    Xdual,
    XR,
    XRdual,
    Time,
    Plain,
}

impl fmt::Display for FactorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FactorTag::X => "X",
            FactorTag::Xdual => "Xd",
            FactorTag::XR => "XR",
            FactorTag::XRdual => "XRd",
            FactorTag::Time => "T",
            FactorTag::Plain => "C",
        };
        f.write_str(s)
    }
}

/// Provenance of a cell: a factor cell or a pair of cells from a product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CellLabel {
    Base { tag: FactorTag, degree: usize, index: usize },
    Pair(Box<CellLabel>, Box<CellLabel>),
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLabel::Base { tag, degree, index } => write!(f, "{tag}{degree}.{index}"),
            CellLabel::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// Block layout of a tensor product: grade-k cells are ordered by the left
/// degree i ascending, then left index, then right index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductLayout {
    pub left_dims: Vec<usize>,
    pub right_dims: Vec<usize>,
}

impl ProductLayout {
    /// Offset of block (i, j) within grade i + j.
    #[must_use]
    pub fn block_offset(&self, i: usize, j: usize) -> usize {
        let k = i + j;
        let mut off = 0;
        for ii in 0..i {
            if let Some(jj) = k.checked_sub(ii) {
                if jj < self.right_dims.len() {
                    off += self.left_dims[ii] * self.right_dims[jj];
                }
            }
        }
        off
    }

    /// Index of cell (i, a) ⊗ (j, b) within grade i + j.
    #[must_use]
    pub fn index(&self, i: usize, a: usize, j: usize, b: usize) -> usize {
        self.block_offset(i, j) + a * self.right_dims[j] + b
    }

    /// Inverse of [`ProductLayout::index`].
    #[must_use]
    pub fn split(&self, k: usize, idx: usize) -> (usize, usize, usize, usize) {
        let mut off = 0;
        for i in 0..self.left_dims.len() {
            let Some(j) = k.checked_sub(i) else { break };
            if j >= self.right_dims.len() {
                continue;
            }
            let size = self.left_dims[i] * self.right_dims[j];
            if idx < off + size {
                let r = idx - off;
                return (i, r / self.right_dims[j], j, r % self.right_dims[j]);
            }
            off += size;
        }
        panic!("cell {idx} out of range in grade {k}");
    }

    /// Embeds u ⊗ v (left degree i, right degree j) as a vector of grade i + j.
    #[must_use]
    pub fn outer(&self, i: usize, u: &BitVector, j: usize, v: &BitVector, grade_len: usize) -> BitVector {
        let off = self.block_offset(i, j);
        let nb = self.right_dims[j];
        let mut out = BitVector::zeros(grade_len);
        for a in u.iter_ones() {
            for b in v.iter_ones() {
                out.set(off + a * nb + b, true);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub name: String,
    cells: Vec<Vec<CellLabel>>,
    /// `boundary[k - 1]` maps grade k to grade k − 1.
    boundary: Vec<BitMatrix>,
    layout: Option<ProductLayout>,
}

impl ChainComplex {
    /// Checks shapes only; use [`validate`] for ∂∂ = 0.
    pub fn new(name: impl Into<String>, cells: Vec<Vec<CellLabel>>, boundary: Vec<BitMatrix>) -> Result<Self> {
        if cells.is_empty() || boundary.len() + 1 != cells.len() {
            return Err(Error::Dimension(format!("{} grades but {} boundary maps", cells.len(), boundary.len())));
        }
        for (k, b) in boundary.iter().enumerate() {
            if b.cols() != cells[k + 1].len() || b.rows() != cells[k].len() {
                return Err(Error::Dimension(format!(
                    "grade {}: boundary is {}x{}, cells {}->{}",
                    k + 1,
                    b.rows(),
                    b.cols(),
                    cells[k + 1].len(),
                    cells[k].len()
                )));
            }
        }
        Ok(Self { name: name.into(), cells, boundary, layout: None })
    }

    /// Complex whose cells are labelled by a single factor tag.
    pub fn from_boundaries(name: impl Into<String>, tag: FactorTag, boundary: Vec<BitMatrix>) -> Result<Self> {
        let mut dims: Vec<usize> = boundary.iter().map(BitMatrix::rows).collect();
        match boundary.last() {
            Some(b) => dims.push(b.cols()),
            None => return Err(Error::Dimension("no boundary maps".into())),
        }
        let cells = dims
            .iter()
            .enumerate()
            .map(|(degree, &n)| (0..n).map(|index| CellLabel::Base { tag, degree, index }).collect())
            .collect();
        Self::new(name, cells, boundary)
    }

    /// Complex with a single grade and no boundary maps.
    #[must_use]
    pub fn points(name: impl Into<String>, tag: FactorTag, n: usize) -> Self {
        let cells = vec![(0..n).map(|index| CellLabel::Base { tag, degree: 0, index }).collect()];
        Self { name: name.into(), cells, boundary: Vec::new(), layout: None }
    }

    #[must_use]
    pub fn top(&self) -> usize {
        self.cells.len() - 1
    }

    #[must_use]
    pub fn dim(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, Vec::len)
    }

    #[must_use]
    pub fn dims(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    #[must_use]
    pub fn cells(&self, k: usize) -> &[CellLabel] {
        &self.cells[k]
    }

    /// ∂_k : C_k → C_{k−1}; `None` for k = 0 or k > top.
    #[must_use]
    pub fn boundary(&self, k: usize) -> Option<&BitMatrix> {
        if k == 0 {
            None
        } else {
            self.boundary.get(k - 1)
        }
    }

    /// Coboundary d^k : C^k → C^{k+1}, the transpose of ∂_{k+1}.
    #[must_use]
    pub fn coboundary(&self, k: usize) -> Option<BitMatrix> {
        self.boundary(k + 1).map(BitMatrix::transpose)
    }

    /// d applied to a k-cochain.
    #[must_use]
    pub fn d(&self, k: usize, v: &BitVector) -> BitVector {
        match self.boundary(k + 1) {
            Some(b) => {
                let mut out = BitVector::zeros(b.cols());
                for i in v.iter_ones() {
                    out.xor_assign(b.row(i));
                }
                out
            }
            None => BitVector::zeros(0),
        }
    }

    #[must_use]
    pub fn layout(&self) -> Option<&ProductLayout> {
        self.layout.as_ref()
    }

    #[must_use]
    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            name: self.name.clone(),
            grades: self.top(),
            cells: self.cells.iter().map(|g| g.iter().map(ToString::to_string).collect()).collect(),
            boundary: self
                .boundary
                .iter()
                .enumerate()
                .map(|(k, b)| SparseMap {
                    grade: k + 1,
                    rows: b.rows(),
                    cols: b.cols(),
                    entries: b.triplets().into_iter().map(|(i, j)| [i, j]).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SparseMap {
    pub grade: usize,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[usize; 2]>,
}

/// JSON form of a complex: labels per grade plus sparse boundary triplets.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ComplexJson {
    pub name: String,
    pub grades: usize,
    pub cells: Vec<Vec<String>>,
    pub boundary: Vec<SparseMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradeCheck {
    pub grade: usize,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub grades: Vec<GradeCheck>,
}

impl ValidationReport {
    #[must_use]
    pub fn ok(&self) -> bool {
        self.grades.iter().all(|g| g.ok)
    }

    #[must_use]
    pub fn first_failure(&self) -> Option<usize> {
        self.grades.iter().find(|g| !g.ok).map(|g| g.grade)
    }
}

/// Per-grade check of ∂∂ = 0 and label uniqueness.
#[must_use]
pub fn validate(c: &ChainComplex) -> ValidationReport {
    let mut grades = Vec::new();
    for k in 0..=c.top() {
        let mut ok = true;
        let mut detail = String::new();
        let mut seen = HashSet::new();
        if !c.cells[k].iter().all(|l| seen.insert(l)) {
            ok = false;
            detail.push_str("duplicate cell label; ");
        }
        if k >= 2 {
            let dd = c.boundary[k - 2].mul(&c.boundary[k - 1]);
            if !dd.is_zero() {
                ok = false;
                detail.push_str(&format!("boundary composition has {} nonzero entries", dd.triplets().len()));
            }
        }
        grades.push(GradeCheck { grade: k, ok, detail });
    }
    ValidationReport { grades }
}

/// Which factor classes a product class came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ClassTag {
    pub left_degree: usize,
    pub left_class: usize,
    pub right_degree: usize,
    pub right_class: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyBasis {
    pub degree: usize,
    pub cycle_reps: Vec<BitVector>,
    pub cocycle_reps: Vec<BitVector>,
    pub pairing: BitMatrix,
    /// Filled for bases assembled from factor bases; empty otherwise.
    pub tags: Vec<ClassTag>,
}

impl HomologyBasis {
    #[must_use]
    pub fn dim(&self) -> usize {
        self.cycle_reps.len()
    }
}

/// Entry (i, j) is the mod-2 overlap of cycle i and cocycle j.
pub fn pairing_matrix(cycles: &[BitVector], cocycles: &[BitVector]) -> Result<BitMatrix> {
    let mut m = BitMatrix::zeros(cycles.len(), cocycles.len());
    for (i, z) in cycles.iter().enumerate() {
        for (j, w) in cocycles.iter().enumerate() {
            if z.len() != w.len() {
                return Err(Error::Dimension(format!("cycle length {} vs cocycle length {}", z.len(), w.len())));
            }
            m.set(i, j, z.dot(w));
        }
    }
    Ok(m)
}

fn full_basis(n: usize) -> Vec<BitVector> {
    (0..n).map(|i| BitVector::unit(n, i)).collect()
}

/// Homology and cohomology representatives in degree k, with the cocycle
/// basis changed so that the pairing is the identity.
///
/// # Panics
/// Panics if `k > c.top()`.
#[must_use]
pub fn homology_basis(c: &ChainComplex, k: usize) -> HomologyBasis {
    assert!(k <= c.top(), "degree {k} above top grade {}", c.top());
    let n = c.dim(k);
    let cycles = match c.boundary(k) {
        Some(b) => kernel_basis(b),
        None => full_basis(n),
    };
    let boundaries: Vec<BitVector> = match c.boundary(k + 1) {
        Some(b) => (0..b.cols()).map(|j| b.col(j)).collect(),
        None => Vec::new(),
    };
    let cocycles = match c.boundary(k + 1) {
        Some(b) => kernel_basis(&b.transpose()),
        None => full_basis(n),
    };
    let coboundaries: Vec<BitVector> = match c.boundary(k) {
        Some(b) => b.row_vecs().to_vec(),
        None => Vec::new(),
    };
    let z = quotient_basis(&cycles, &boundaries).expect("boundaries are cycles in a valid complex");
    let w = quotient_basis(&cocycles, &coboundaries).expect("coboundaries are cocycles in a valid complex");
    let raw = pairing_matrix(&z, &w).expect("equal lengths");
    let inv = raw.inverse().expect("homology pairing is nondegenerate");
    let aligned: Vec<BitVector> = (0..w.len())
        .map(|j| {
            let mut v = BitVector::zeros(n);
            for (l, wl) in w.iter().enumerate() {
                if inv.get(l, j) {
                    v.xor_assign(wl);
                }
            }
            v
        })
        .collect();
    let pairing = pairing_matrix(&z, &aligned).expect("equal lengths");
    HomologyBasis { degree: k, cycle_reps: z, cocycle_reps: aligned, pairing, tags: Vec::new() }
}

/// Tensor product with ∂ = ∂_a ⊗ 1 + 1 ⊗ ∂_b.
#[must_use]
pub fn tensor_product(a: &ChainComplex, b: &ChainComplex) -> ChainComplex {
    let layout = ProductLayout { left_dims: a.dims(), right_dims: b.dims() };
    let top = a.top() + b.top();
    let mut cells: Vec<Vec<CellLabel>> = vec![Vec::new(); top + 1];
    for (k, grade) in cells.iter_mut().enumerate() {
        for i in 0..=a.top() {
            let Some(j) = k.checked_sub(i) else { break };
            if j > b.top() {
                continue;
            }
            for la in &a.cells[i] {
                for lb in &b.cells[j] {
                    grade.push(CellLabel::Pair(Box::new(la.clone()), Box::new(lb.clone())));
                }
            }
        }
    }
    let mut boundary = Vec::new();
    for k in 1..=top {
        let mut entries = Vec::new();
        for col in 0..cells[k].len() {
            let (i, ca, j, cb) = layout.split(k, col);
            if let Some(da) = a.boundary(i) {
                for r in 0..da.rows() {
                    if da.get(r, ca) {
                        entries.push((layout.index(i - 1, r, j, cb), col));
                    }
                }
            }
            if let Some(db) = b.boundary(j) {
                for r in 0..db.rows() {
                    if db.get(r, cb) {
                        entries.push((layout.index(i, ca, j - 1, r), col));
                    }
                }
            }
        }
        boundary.push(BitMatrix::from_triplets(cells[k - 1].len(), cells[k].len(), &entries));
    }
    ChainComplex { name: format!("{}*{}", a.name, b.name), cells, boundary, layout: Some(layout) }
}

/// Künneth basis of a product in degree k assembled from aligned factor
/// bases (indexed by degree). Pairing stays the identity because factor
/// pairings are.
///
/// # Panics
/// Panics if `p` is not a product complex.
#[must_use]
pub fn kunneth_basis(p: &ChainComplex, left: &[HomologyBasis], right: &[HomologyBasis], k: usize) -> HomologyBasis {
    let layout = p.layout().expect("product complex");
    let n = p.dim(k);
    let mut cycle_reps = Vec::new();
    let mut cocycle_reps = Vec::new();
    let mut tags = Vec::new();
    for (i, lb) in left.iter().enumerate() {
        let Some(j) = k.checked_sub(i) else { break };
        let Some(rb) = right.get(j) else { continue };
        for (la, (lz, lw)) in lb.cycle_reps.iter().zip(&lb.cocycle_reps).enumerate() {
            for (ra, (rz, rw)) in rb.cycle_reps.iter().zip(&rb.cocycle_reps).enumerate() {
                cycle_reps.push(layout.outer(i, lz, j, rz, n));
                cocycle_reps.push(layout.outer(i, lw, j, rw, n));
                tags.push(ClassTag { left_degree: i, left_class: la, right_degree: j, right_class: ra });
            }
        }
    }
    let pairing = pairing_matrix(&cycle_reps, &cocycle_reps).expect("equal lengths");
    HomologyBasis { degree: k, cycle_reps, cocycle_reps, pairing, tags }
}

/// Time complex: `steps` edges on a circle (periodic) or an interval.
#[must_use]
pub fn time_complex(steps: usize, periodic: bool) -> ChainComplex {
    let nv = if periodic { steps } else { steps + 1 };
    let mut entries = Vec::new();
    for e in 0..steps {
        entries.push((e, e));
        entries.push(((e + 1) % nv, e));
    }
    let b = BitMatrix::from_triplets(nv, steps, &entries);
    ChainComplex::from_boundaries("I_t", FactorTag::Time, vec![b]).expect("consistent shapes")
}
