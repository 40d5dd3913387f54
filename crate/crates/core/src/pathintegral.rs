//! Class-level path-integral weights and the diagonal logical action they
//! produce after summing over green windings.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::BitVector;
use crate::skeleton::IntersectionTensor;

/// Winding numbers of the three gauge fields plus the green outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindingConfig {
    pub n: BitVector,
    pub m: BitVector,
    pub l: BitVector,
    pub rho: BitVector,
}

impl WindingConfig {
    #[must_use]
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            n: BitVector::zeros(dims[0]),
            m: BitVector::zeros(dims[1]),
            l: BitVector::zeros(dims[2]),
            rho: BitVector::zeros(dims[2]),
        }
    }

    fn check(&self, t: &IntersectionTensor) -> Result<()> {
        let got = [self.n.len(), self.m.len(), self.l.len()];
        if got != t.dims || self.rho.len() != t.dims[2] {
            return Err(Error::Dimension(format!("windings {got:?} and {} outcomes for tensor {:?}", self.rho.len(), t.dims)));
        }
        Ok(())
    }
}

/// Parity of Σ n_α m_β T[α][β][γ] for one γ.
fn cz_parity(t: &IntersectionTensor, n: &BitVector, m: &BitVector, g: usize) -> bool {
    t.entries.iter().filter(|&&(a, b, c)| c == g && n.get(a) && m.get(b)).count() % 2 == 1
}

/// Signed weight of one configuration: +1 or −1.
pub fn weight(cfg: &WindingConfig, t: &IntersectionTensor) -> Result<i64> {
    cfg.check(t)?;
    let mut odd = cfg.rho.dot(&cfg.l);
    for &(a, b, g) in &t.entries {
        odd ^= cfg.n.get(a) && cfg.m.get(b) && cfg.l.get(g);
    }
    Ok(if odd { -1 } else { 1 })
}

/// Diagonal of the (unnormalized) logical action for one outcome vector.
///
/// Rows are indexed by `n | m << dims[0]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogicalAction {
    pub dims: [usize; 3],
    pub rho: String,
    pub diagonal: Vec<i64>,
}

impl LogicalAction {
    #[must_use]
    pub fn index(&self, n: &BitVector, m: &BitVector) -> usize {
        bits_to_index(n) | bits_to_index(m) << self.dims[0]
    }

    /// Entries divided by 2^{|γ|}.
    #[must_use]
    pub fn normalized(&self) -> Vec<f64> {
        let scale = (1u64 << self.dims[2]) as f64;
        self.diagonal.iter().map(|&v| v as f64 / scale).collect()
    }
}

fn bits_to_index(v: &BitVector) -> usize {
    v.iter_ones().map(|i| 1usize << i).sum()
}

fn index_to_bits(len: usize, x: usize) -> BitVector {
    BitVector::from_indices(len, (0..len).filter(|i| x >> i & 1 == 1))
}

fn check_small(t: &IntersectionTensor, rho: &BitVector) -> Result<()> {
    if rho.len() != t.dims[2] {
        return Err(Error::Dimension(format!("{} outcomes for {} green classes", rho.len(), t.dims[2])));
    }
    if t.dims[0] + t.dims[1] > 24 || t.dims[2] > 24 {
        return Err(Error::Dimension(format!("tensor {:?} too large to sum exhaustively", t.dims)));
    }
    Ok(())
}

/// Entry (n, m) = Σ_l weight(n, m, l, ρ), summed over integers.
pub fn logical_action(t: &IntersectionTensor, rho: &BitVector) -> Result<LogicalAction> {
    check_small(t, rho)?;
    let [da, db, dg] = t.dims;
    let mut diagonal = vec![0i64; 1 << (da + db)];
    for (idx, entry) in diagonal.iter_mut().enumerate() {
        let n = index_to_bits(da, idx & ((1 << da) - 1));
        let m = index_to_bits(db, idx >> da);
        for lx in 0..1usize << dg {
            let cfg = WindingConfig { n: n.clone(), m: m.clone(), l: index_to_bits(dg, lx), rho: rho.clone() };
            *entry += weight(&cfg, t)?;
        }
    }
    Ok(LogicalAction { dims: t.dims, rho: rho.to_string01(), diagonal })
}

/// ∏_γ (1 + (−1)^{ρ_γ} CZ̄_γ) evaluated on each logical basis state.
pub fn projector_product(t: &IntersectionTensor, rho: &BitVector) -> Result<LogicalAction> {
    check_small(t, rho)?;
    let [da, db, dg] = t.dims;
    let diagonal = (0..1usize << (da + db))
        .map(|idx| {
            let n = index_to_bits(da, idx & ((1 << da) - 1));
            let m = index_to_bits(db, idx >> da);
            (0..dg).map(|g| if cz_parity(t, &n, &m, g) == rho.get(g) { 2 } else { 0 }).product()
        })
        .collect();
    Ok(LogicalAction { dims: t.dims, rho: rho.to_string01(), diagonal })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub n: String,
    pub m: String,
    pub summed: i64,
    pub projector: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectorReport {
    pub rho: String,
    pub entries: usize,
    pub mismatch: Option<Mismatch>,
}

/// First entry where two diagonal actions disagree.
#[must_use]
pub fn compare(summed: &LogicalAction, proj: &LogicalAction) -> Option<Mismatch> {
    let da = summed.dims[0];
    summed.diagonal.iter().zip(&proj.diagonal).enumerate().find(|(_, (a, b))| a != b).map(|(idx, (&a, &b))| Mismatch {
        n: index_to_bits(da, idx & ((1 << da) - 1)).to_string01(),
        m: index_to_bits(summed.dims[1], idx >> da).to_string01(),
        summed: a,
        projector: b,
    })
}

/// Sums over windings and compares with the explicit projector product.
pub fn projector_identity_check(t: &IntersectionTensor, rho: &BitVector) -> Result<ProjectorReport> {
    let a = logical_action(t, rho)?;
    let b = projector_product(t, rho)?;
    Ok(ProjectorReport { rho: a.rho.clone(), entries: a.diagonal.len(), mismatch: compare(&a, &b) })
}

/// Diagonals for every outcome vector, keyed by ρ bitstring.
pub fn all_actions(t: &IntersectionTensor) -> Result<BTreeMap<String, LogicalAction>> {
    let dg = t.dims[2];
    (0..1usize << dg)
        .map(|r| {
            let rho = index_to_bits(dg, r);
            logical_action(t, &rho).map(|a| (a.rho.clone(), a))
        })
        .collect()
}

pub fn to_json(t: &IntersectionTensor) -> Result<String> {
    let map: BTreeMap<String, Vec<i64>> = all_actions(t)?.into_iter().map(|(k, v)| (k, v.diagonal)).collect();
    Ok(serde_json::to_string_pretty(&map).expect("plain data"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(dims: [usize; 3], entries: &[(usize, usize, usize)]) -> IntersectionTensor {
        let mut t = IntersectionTensor { dims, entries: Vec::new() };
        for &(a, b, g) in entries {
            t.toggle(a, b, g);
        }
        t
    }

    fn bv(s: &str) -> BitVector {
        BitVector::parse01(s).unwrap()
    }

    #[test]
    fn weights() {
        let t = tensor([1, 1, 1], &[(0, 0, 0)]);
        assert_eq!(weight(&WindingConfig::zeros([1, 1, 1]), &t), Ok(1));
        let one = WindingConfig { n: bv("1"), m: bv("1"), l: bv("1"), rho: bv("0") };
        assert_eq!(weight(&one, &t), Ok(-1));
        let empty = tensor([1, 1, 1], &[]);
        let cfg = WindingConfig { n: bv("0"), m: bv("0"), l: bv("1"), rho: bv("1") };
        assert_eq!(weight(&cfg, &empty), Ok(-1));
        let bad = WindingConfig { n: bv("00"), ..one };
        assert!(weight(&bad, &t).is_err());
    }

    #[test]
    fn trivial_tensor_is_constant() {
        let t = tensor([2, 1, 2], &[]);
        let a = logical_action(&t, &bv("00")).unwrap();
        assert!(a.diagonal.iter().all(|&v| v == 4));
        let b = logical_action(&t, &bv("10")).unwrap();
        assert!(b.diagonal.iter().all(|&v| v == 0));
    }

    #[test]
    fn matched_delta_projects_even_sector() {
        let t = tensor([2, 2, 2], &[(0, 0, 0), (1, 1, 1)]);
        for r in ["00", "01", "10", "11"] {
            let rho = bv(r);
            let a = logical_action(&t, &rho).unwrap();
            for idx in 0..16 {
                let n = index_to_bits(2, idx & 3);
                let m = index_to_bits(2, idx >> 2);
                // direct summation over l
                let mut expect = 0i64;
                for l in 0..4usize {
                    let mut odd = false;
                    for g in 0..2 {
                        let lg = l >> g & 1 == 1;
                        odd ^= lg && (rho.get(g) ^ (n.get(g) && m.get(g)));
                    }
                    expect += if odd { -1 } else { 1 };
                }
                assert_eq!(a.diagonal[idx], expect);
            }
            assert_eq!(projector_identity_check(&t, &rho).unwrap().mismatch, None);
        }
    }

    #[test]
    fn outcome_family_is_complete() {
        let t = tensor([2, 2, 2], &[(0, 1, 0), (1, 0, 0), (1, 1, 1)]);
        let all = all_actions(&t).unwrap();
        let mut total = vec![0.0; 16];
        for a in all.values() {
            for (s, v) in total.iter_mut().zip(a.normalized()) {
                assert!(v == 0.0 || v == 1.0);
                *s += v * v;
            }
        }
        assert!(total.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn corrupted_tensor_is_reported() {
        let t = tensor([1, 1, 1], &[(0, 0, 0)]);
        let bad = tensor([1, 1, 1], &[]);
        let rho = bv("0");
        let w = compare(&logical_action(&bad, &rho).unwrap(), &projector_product(&t, &rho).unwrap()).unwrap();
        assert_eq!((w.n.as_str(), w.m.as_str(), w.summed, w.projector), ("1", "1", 2, 0));
    }

    #[test]
    fn empty_green_basis_is_identity() {
        let t = tensor([1, 1, 0], &[]);
        let a = logical_action(&t, &BitVector::zeros(0)).unwrap();
        assert_eq!(a.diagonal, vec![1; 4]);
        assert!(to_json(&t).unwrap().contains("\"\""));
    }
}
