//! Linear algebra over GF(2) on word-packed bit rows.

use std::fmt;

use crate::error::{Error, Result};

const W: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(W)
}

/// Packed bit vector. Bits past `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    #[must_use]
    pub fn ones(len: usize) -> Self {
        let mut v = Self { len, words: vec![!0; words_for(len)] };
        v.clear_padding();
        v
    }

    /// Unit vector with a single set bit.
    #[must_use]
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    #[must_use]
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, idx: I) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    #[must_use]
    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i))
    }

    /// Parses a string of `0`/`1` characters, position 0 first.
    pub fn parse01(s: &str) -> Option<Self> {
        let s = s.trim();
        let mut v = Self::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                _ => return None,
            }
        }
        Some(v)
    }

    #[must_use]
    pub fn from_words(len: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), words_for(len));
        let mut v = Self { len, words };
        v.clear_padding();
        v
    }

    fn clear_padding(&mut self) {
        let r = self.len % W;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    #[must_use]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// # Panics
    /// Panics if `i >= len`.
    #[inline]
    #[must_use]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / W] >> (i % W)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let m = 1u64 << (i % W);
        if b {
            self.words[i / W] |= m;
        } else {
            self.words[i / W] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / W] ^= 1u64 << (i % W);
    }

    /// # Panics
    /// Panics on length mismatch.
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    #[must_use]
    pub fn xor(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.xor_assign(other);
        r
    }

    #[must_use]
    pub fn and(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "length mismatch");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Self { len: self.len, words }
    }

    /// Inner product mod 2.
    #[must_use]
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    #[must_use]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit.
    #[must_use]
    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * W + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Iterator over set positions in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * W + t)
                }
            })
        })
    }

    #[must_use]
    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    /// Concatenation `self ++ other`.
    #[must_use]
    pub fn concat(&self, other: &Self) -> Self {
        let mut r = Self::zeros(self.len + other.len);
        for i in self.iter_ones() {
            r.set(i, true);
        }
        for i in other.iter_ones() {
            r.set(self.len + i, true);
        }
        r
    }

    #[must_use]
    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self::from_indices(len, self.iter_ones().filter(|&i| i >= start && i < start + len).map(|i| i - start))
    }

    #[must_use]
    pub fn to_string01(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({})", self.to_string01())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string01())
    }
}

/// Dense row-major GF(2) matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVector>,
}

impl BitMatrix {
    #[must_use]
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BitVector::zeros(cols); rows] }
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows; all rows must have length `cols`.
    ///
    /// # Panics
    /// Panics if a row has the wrong length.
    #[must_use]
    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        Self { rows: rows.len(), cols, data: rows }
    }

    /// Builds a matrix whose columns are the given vectors.
    #[must_use]
    pub fn from_cols(rows: usize, cols: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for i in c.iter_ones() {
                m.set(i, j, true);
            }
        }
        m
    }

    /// Parses rows of `0`/`1` strings.
    ///
    /// # Panics
    /// Panics on malformed input; meant for fixtures.
    #[must_use]
    pub fn from_strs(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.trim().len());
        let data = rows.iter().map(|r| BitVector::parse01(r).expect("0/1 row")).collect();
        Self::from_rows(cols, data)
    }

    /// Builds from coordinate triplets; duplicate entries cancel mod 2.
    #[must_use]
    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize)]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for &(i, j) in entries {
            m.data[i].flip(j);
        }
        m
    }

    /// Sparse coordinate view, row-major order.
    #[must_use]
    pub fn triplets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, r) in self.data.iter().enumerate() {
            out.extend(r.iter_ones().map(|j| (i, j)));
        }
        out
    }

    #[inline]
    #[must_use]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    #[must_use]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.data[i].set(j, b);
    }

    #[inline]
    #[must_use]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.data[i]
    }

    #[must_use]
    pub fn row_vecs(&self) -> &[BitVector] {
        &self.data
    }

    #[must_use]
    pub fn col(&self, j: usize) -> BitVector {
        BitVector::from_indices(self.rows, (0..self.rows).filter(|&i| self.get(i, j)))
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVector::is_zero)
    }

    #[must_use]
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (i, r) in self.data.iter().enumerate() {
            for j in r.iter_ones() {
                t.data[j].set(i, true);
            }
        }
        t
    }

    /// Matrix-vector product `self · v`.
    ///
    /// # Panics
    /// Panics if `v.len() != cols`.
    #[must_use]
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        BitVector::from_indices(self.rows, (0..self.rows).filter(|&i| self.data[i].dot(v)))
    }

    /// Matrix product `self · other`.
    #[must_use]
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for (i, r) in self.data.iter().enumerate() {
            for k in r.iter_ones() {
                out.data[i].xor_assign(&other.data[k]);
            }
        }
        out
    }

    /// Kronecker product over GF(2).
    #[must_use]
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for (i, j) in self.triplets() {
            for (k, l) in other.triplets() {
                out.set(i * other.rows + k, j * other.cols + l, true);
            }
        }
        out
    }

    /// Inverse of a square matrix, if it exists.
    #[must_use]
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a: Vec<BitVector> = self.data.iter().zip(BitMatrix::identity(n).data).map(|(r, e)| r.concat(&e)).collect();
        for c in 0..n {
            let p = (c..n).find(|&i| a[i].get(c))?;
            a.swap(c, p);
            let pivot = a[c].clone();
            for (i, r) in a.iter_mut().enumerate() {
                if i != c && r.get(c) {
                    r.xor_assign(&pivot);
                }
            }
        }
        Some(Self::from_rows(n, a.iter().map(|r| r.slice(n, n)).collect()))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

/// Row-reduced echelon form with pivot columns, lowest index first.
struct Rref {
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

fn rref(m: &BitMatrix) -> Rref {
    let mut rows: Vec<BitVector> = m.data.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    Rref { rows, pivots }
}

/// Rank over GF(2). Forward elimination on raw words, starting each
/// row update at the pivot's word.
#[must_use]
pub fn rank(m: &BitMatrix) -> usize {
    let nw = words_for(m.cols);
    let mut a: Vec<u64> = Vec::with_capacity(m.rows * nw);
    for r in &m.data {
        a.extend_from_slice(r.words());
    }
    let nrows = m.rows;
    let mut r = 0;
    for c in 0..m.cols {
        if r == nrows {
            break;
        }
        let (wi, bit) = (c / W, 1u64 << (c % W));
        let Some(p) = (r..nrows).find(|&i| a[i * nw + wi] & bit != 0) else {
            continue;
        };
        if p != r {
            for k in wi..nw {
                a.swap(p * nw + k, r * nw + k);
            }
        }
        let (head, tail) = a.split_at_mut((r + 1) * nw);
        let pivot = &head[r * nw + wi..(r + 1) * nw];
        for row in tail.chunks_exact_mut(nw) {
            if row[wi] & bit != 0 {
                for (x, y) in row[wi..].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        r += 1;
    }
    r
}

/// Basis of the right null space, one vector per free column.
#[must_use]
pub fn kernel_basis(m: &BitMatrix) -> Vec<BitVector> {
    let Rref { rows, pivots } = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for f in (0..m.cols).filter(|&c| !is_pivot[c]) {
        let mut v = BitVector::unit(m.cols, f);
        for (row, &p) in rows.iter().zip(&pivots) {
            if row.get(f) {
                v.set(p, true);
            }
        }
        out.push(v);
    }
    out
}

/// Some `x` with `m·x = b`, free variables zero; `None` if inconsistent.
///
/// # Panics
/// Panics if `b.len() != m.rows()`.
#[must_use]
pub fn solve(m: &BitMatrix, b: &BitVector) -> Option<BitVector> {
    assert_eq!(b.len(), m.rows, "right-hand side length mismatch");
    let aug = BitMatrix::from_rows(
        m.cols + 1,
        m.data.iter().enumerate().map(|(i, r)| r.concat(&BitVector::from_bools(&[b.get(i)]))).collect(),
    );
    let Rref { rows, pivots } = rref(&aug);
    if pivots.last() == Some(&m.cols) {
        return None;
    }
    let mut x = BitVector::zeros(m.cols);
    for (row, &p) in rows.iter().zip(&pivots) {
        if row.get(m.cols) {
            x.set(p, true);
        }
    }
    Some(x)
}

/// Incrementally built echelon basis for span membership tests.
/// Rows are kept fully reduced against each other.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<(usize, BitVector)>,
}

impl EchelonBasis {
    #[must_use]
    pub fn new(len: usize) -> Self {
        Self { len, rows: Vec::new() }
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Residue of `v` modulo the current span.
    #[must_use]
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut r = v.clone();
        for (p, row) in &self.rows {
            if r.get(*p) {
                r.xor_assign(row);
            }
        }
        r
    }

    #[must_use]
    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns whether it was independent.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.len, "length mismatch");
        let r = self.reduce(v);
        let Some(p) = r.first_one() else {
            return false;
        };
        for (_, row) in &mut self.rows {
            if row.get(p) {
                row.xor_assign(&r);
            }
        }
        self.rows.push((p, r));
        true
    }
}

/// Representatives of a basis of span(cycles)/span(boundaries).
/// Cycles are scanned in order and kept when independent of everything
/// kept so far.
pub fn quotient_basis(cycles: &[BitVector], boundaries: &[BitVector]) -> Result<Vec<BitVector>> {
    let len = cycles.first().or(boundaries.first()).map_or(0, BitVector::len);
    for v in cycles.iter().chain(boundaries) {
        if v.len() != len {
            return Err(Error::Dimension(format!("vector length {} != {len}", v.len())));
        }
    }
    let mut zspan = EchelonBasis::new(len);
    for z in cycles {
        zspan.insert(z);
    }
    let mut span = EchelonBasis::new(len);
    for b in boundaries {
        if !zspan.contains(b) {
            return Err(Error::Containment);
        }
        span.insert(b);
    }
    let mut out = Vec::new();
    for z in cycles {
        if span.insert(z) {
            out.push(z.clone());
        }
    }
    Ok(out)
}
