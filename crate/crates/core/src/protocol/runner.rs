//! Dense execution of the protocol, exact branch enumeration, and the
//! cross-check against the ledger and the path-integral action.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dense::{extract_with, magic_state, state_11, DenseState, LogicalBasis, LogicalState, SparseState};
use super::ledger::{rho_of, run_ledger, solve_correction, stages, LedgerEntry};
use super::plan::{certify, InitPlan, LogicalInit};
use super::{Backend, LogicalStateDesc, PairState, ProtocolTranscript};
use crate::error::Result;
use crate::f2::BitVector;
use crate::operators::{product, twisted_stabilizers, PhasePolyOp};
use crate::pathintegral::projector_product;
use crate::skeleton::{intersection_tensor, Copy3, TripleCode};

const AMP_TOL: f64 = 1e-13;
const PROB_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Leave out the final Ã^g correction (negative control).
    pub skip_correction: bool,
}

pub struct DenseProtocol<'a> {
    tc: &'a TripleCode,
    pub plan: InitPlan,
    green_ops: Vec<PhasePolyOp>,
    green_qubits: Vec<usize>,
    pub init: DenseState,
    basis: LogicalBasis,
}

#[derive(Clone, Debug)]
pub struct DenseRun {
    pub transcript: ProtocolTranscript,
    pub state: DenseState,
}

#[derive(Clone, Debug)]
pub struct ZBranch {
    pub z: BitVector,
    /// Probability given the leaf.
    pub prob: f64,
    pub correction: BitVector,
    pub logical: Option<LogicalState>,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Leaf {
    pub mu: BitVector,
    pub prob: f64,
    pub branches: Vec<ZBranch>,
}

/// Every outcome sequence with nonzero Born probability for one
/// measurement order.
#[derive(Clone, Debug)]
pub struct BranchTable {
    pub order: Vec<usize>,
    pub leaves: Vec<Leaf>,
}

fn bits(v: &BitVector) -> Vec<u8> {
    (0..v.len()).map(|i| u8::from(v.get(i))).collect()
}

fn pattern_bits(len: usize, pat: u64) -> BitVector {
    BitVector::from_indices(len, (0..len).filter(|i| pat >> i & 1 == 1))
}

impl<'a> DenseProtocol<'a> {
    fn base(tc: &'a TripleCode, plan: &InitPlan, init: DenseState) -> Self {
        let tw = twisted_stabilizers(tc);
        let green_ops = tw.x_type(Copy3::Green).into_iter().map(|g| g.op.clone()).collect();
        let green_qubits = (0..tc.n_copy(Copy3::Green)).map(|e| tc.qubit(Copy3::Green, e)).collect();
        Self { tc, plan: plan.clone(), green_ops, green_qubits, init, basis: LogicalBasis::new(tc) }
    }

    /// Initial state from projectors: bare red and blue A's, then X̄ for
    /// |+⟩ logicals, applied to |0…0⟩.
    pub fn new(tc: &'a TripleCode, plan: &InitPlan, cap: usize) -> Result<Self> {
        let n = tc.n_qubits();
        let mut st = DenseState::zero(n, cap)?;
        for c in [Copy3::Red, Copy3::Blue] {
            if let Some(b) = tc.complex(c).boundary(1) {
                for v in 0..b.rows() {
                    let supp: Vec<usize> = b.row(v).iter_ones().map(|e| tc.qubit(c, e)).collect();
                    st.project(&PhasePolyOp::x_string(n, &supp), false);
                }
            }
        }
        for (c, inits) in [(Copy3::Red, &plan.red), (Copy3::Blue, &plan.blue)] {
            for (k, init) in inits.iter().enumerate() {
                if *init == LogicalInit::Plus {
                    let supp: Vec<usize> = tc.h1(c).cocycle_reps[k].iter_ones().map(|e| tc.qubit(c, e)).collect();
                    st.project(&PhasePolyOp::x_string(n, &supp), false);
                }
            }
        }
        st.normalize();
        Ok(Self::base(tc, plan, st))
    }

    /// Initial state Σ_ℓ c_ℓ |ℓ⟩ on the encoded logical basis.
    pub fn with_input(tc: &'a TripleCode, plan: &InitPlan, coeffs: &[f64], cap: usize) -> Result<Self> {
        let basis = LogicalBasis::new(tc);
        let mut st = basis.encode(tc.n_qubits(), coeffs, cap)?;
        st.normalize();
        Ok(Self::base(tc, plan, st))
    }

    #[must_use]
    pub fn basis(&self) -> &LogicalBasis {
        &self.basis
    }

    /// Logical content of the initial state.
    pub fn initial_logical(&self) -> Result<LogicalState> {
        extract_with(&self.basis, |w| self.init.amplitudes()[w], self.init.norm_sq())
    }

    fn final_stage(&self, mu: &BitVector, z: &BitVector) -> Vec<LedgerEntry> {
        let rho = rho_of(self.tc, mu);
        stages(self.tc, &self.plan, mu, z, &rho).swap_remove(3).entries
    }

    fn correction_op(&self, v: &BitVector) -> PhasePolyOp {
        product(self.tc.n_qubits(), v.iter_ones().map(|i| &self.green_ops[i])).expect("same register")
    }

    /// S4 check, logical extraction and pair fidelities on a collapsed state.
    fn finish(&self, sp: &SparseState, mu: &BitVector, z: &BitVector) -> (Option<LogicalState>, Vec<String>) {
        let mut violations: Vec<String> = self
            .final_stage(mu, z)
            .iter()
            .filter(|e| (sp.expectation(&e.signed_op()) - 1.0).abs() > 1e-9)
            .map(|e| if e.sign { format!("-{}", e.label) } else { e.label.clone() })
            .collect();
        let logical = match extract_with(&self.basis, |w| sp.get(w), sp.norm_sq()) {
            Ok(l) => Some(l),
            Err(e) => {
                violations.push(e.to_string());
                None
            }
        };
        (logical, violations)
    }

    fn describe(&self, logical: Option<&LogicalState>, rho: &BitVector, violations: Vec<String>) -> LogicalStateDesc {
        let pairs = certify(&self.plan, &intersection_tensor(self.tc))
            .pairs
            .iter()
            .map(|p| {
                let on = rho.get(p.gamma);
                let (i, j) = (p.alpha, self.basis.k_red + p.beta);
                let target = if on { state_11() } else { magic_state() };
                PairState {
                    qubits: [format!("r{}", p.alpha), format!("b{}", p.beta)],
                    gamma: p.gamma,
                    outcome: u8::from(on),
                    expected: if on { "11".into() } else { "magic".into() },
                    fidelity_to_magic: logical.map(|l| l.pair_fidelity(i, j, &magic_state())),
                    fidelity_to_expected: logical.map(|l| l.pair_fidelity(i, j, &target)),
                }
            })
            .collect();
        LogicalStateDesc { pairs, zbar: logical.map(|l| l.zbar.clone()), violations }
    }

    /// One trial with sequential Born sampling on the full state vector.
    pub fn run(&self, seed: u64, opts: RunOptions) -> Result<DenseRun> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = self.tc.complex(Copy3::Green);
        let mut st = self.init.clone();
        let mut mu = BitVector::zeros(g.dim(0));
        for (v, op) in self.green_ops.iter().enumerate() {
            let (out, _) = st.measure(op, &mut rng);
            mu.set(v, out);
        }
        let marg = st.marginal(&self.green_qubits);
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pat = *marg.keys().last().expect("state is normalized");
        for (&p, &w) in &marg {
            acc += w;
            if r < acc {
                pat = p;
                break;
            }
        }
        st.keep_pattern(&self.green_qubits, pat);
        st.normalize();
        let z = pattern_bits(g.dim(1), pat);
        let v = solve_correction(self.tc, &z)?;
        if !opts.skip_correction {
            st.apply(&self.correction_op(&v));
        }
        let rho = rho_of(self.tc, &mu);
        let (logical, violations) = self.finish(&st.to_sparse(AMP_TOL), &mu, &z);
        let transcript = ProtocolTranscript {
            seed,
            backend: Backend::Dense,
            plan: self.plan.clone(),
            order: (0..g.dim(0)).collect(),
            mu: bits(&mu),
            rho: bits(&rho),
            z_mu: bits(&z),
            correction: v.support(),
            logical_state: self.describe(logical.as_ref(), &rho, violations),
        };
        Ok(DenseRun { transcript, state: st })
    }

    /// Enumerates all outcome sequences in the given order with their
    /// sequential Born probabilities.
    pub fn branches(&self, order: &[usize], opts: RunOptions) -> Result<BranchTable> {
        let mut leaves = Vec::new();
        let mu = BitVector::zeros(self.green_ops.len());
        let n2 = self.init.norm_sq();
        self.dfs(self.init.clone(), n2, order, 0, mu, opts, &mut leaves)?;
        for l in &mut leaves {
            l.prob /= n2;
        }
        Ok(BranchTable { order: order.to_vec(), leaves })
    }

    /// Branch states stay unnormalized, so ‖ψ_branch‖² is the joint
    /// probability of the outcome prefix.
    #[allow(clippy::too_many_arguments)]
    fn dfs(&self, st: DenseState, n2: f64, order: &[usize], depth: usize, mu: BitVector, opts: RunOptions, out: &mut Vec<Leaf>) -> Result<()> {
        if depth == order.len() {
            out.push(self.leaf(&st, mu, n2, opts)?);
            return Ok(());
        }
        let v = order[depth];
        for (outcome, (child, c2)) in [false, true].into_iter().zip(st.branch(&self.green_ops[v])) {
            if c2 < PROB_TOL * n2 {
                continue;
            }
            let mut m = mu.clone();
            m.set(v, outcome);
            self.dfs(child, c2, order, depth + 1, m, opts, out)?;
        }
        Ok(())
    }

    fn leaf(&self, st: &DenseState, mu: BitVector, prob: f64, opts: RunOptions) -> Result<Leaf> {
        let g = self.tc.complex(Copy3::Green);
        let mut sp = st.to_sparse(AMP_TOL * prob.sqrt());
        sp.normalize();
        let mut branches = Vec::new();
        for (pat, mut part) in sp.split(&self.green_qubits) {
            let p = part.normalize();
            if p < PROB_TOL {
                continue;
            }
            let z = pattern_bits(g.dim(1), pat);
            let v = solve_correction(self.tc, &z)?;
            if !opts.skip_correction {
                part = part.apply(&self.correction_op(&v));
            }
            let (logical, violations) = self.finish(&part, &mu, &z);
            branches.push(ZBranch { z, prob: p, correction: v, logical, violations });
        }
        Ok(Leaf { mu, prob, branches })
    }
}

impl BranchTable {
    /// Walks the measurement order drawing each outcome from its
    /// conditional probability, then draws the green pattern.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (usize, usize) {
        let mut alive: Vec<usize> = (0..self.leaves.len()).collect();
        for &v in &self.order {
            let total: f64 = alive.iter().map(|&i| self.leaves[i].prob).sum();
            let p1: f64 = alive.iter().filter(|&&i| self.leaves[i].mu.get(v)).map(|&i| self.leaves[i].prob).sum();
            let out = rng.gen::<f64>() * total < p1;
            let next: Vec<usize> = alive.iter().copied().filter(|&i| self.leaves[i].mu.get(v) == out).collect();
            if !next.is_empty() {
                alive = next;
            }
        }
        let li = alive[0];
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let bs = &self.leaves[li].branches;
        for (bi, b) in bs.iter().enumerate() {
            acc += b.prob;
            if r < acc {
                return (li, bi);
            }
        }
        (li, bs.len() - 1)
    }

    /// Exact probability of each μ pattern.
    #[must_use]
    pub fn mu_distribution(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for l in &self.leaves {
            *m.entry(l.mu.to_string01()).or_insert(0.0) += l.prob;
        }
        m
    }

    /// Exact probability of each ρ pattern.
    #[must_use]
    pub fn rho_distribution(&self, tc: &TripleCode) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for l in &self.leaves {
            *m.entry(rho_of(tc, &l.mu).to_string01()).or_insert(0.0) += l.prob;
        }
        m
    }

    #[must_use]
    pub fn transcript(&self, proto: &DenseProtocol<'_>, leaf: usize, branch: usize, seed: u64) -> ProtocolTranscript {
        let l = &self.leaves[leaf];
        let b = &l.branches[branch];
        let rho = rho_of(proto.tc, &l.mu);
        ProtocolTranscript {
            seed,
            backend: Backend::Dense,
            plan: proto.plan.clone(),
            order: self.order.clone(),
            mu: bits(&l.mu),
            rho: bits(&rho),
            z_mu: bits(&b.z),
            correction: b.correction.support(),
            logical_state: proto.describe(b.logical.as_ref(), &rho, b.violations.clone()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyCheck {
    pub label: String,
    pub expected: f64,
    pub observed: f64,
    pub sigma: f64,
    pub ok: bool,
}

/// |f − p| ≤ 3σ with σ = √(p(1−p)/N); zero-variance cases must match exactly.
#[must_use]
pub fn three_sigma(label: String, p: f64, hits: usize, n: usize) -> FrequencyCheck {
    let f = hits as f64 / n as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    let ok = if sigma < 1e-12 { (f - p).abs() < 1e-12 } else { (f - p).abs() <= 3.0 * sigma };
    FrequencyCheck { label, expected: p, observed: f, sigma, ok }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CrossReport {
    pub trials: usize,
    pub orders: Vec<Vec<usize>>,
    /// (seed, fidelity) of trials whose logical state misses the projector
    /// formula.
    pub fidelity_failures: Vec<(u64, f64)>,
    pub min_fidelity: f64,
    pub rho_checks: Vec<FrequencyCheck>,
    pub order_checks: Vec<FrequencyCheck>,
    /// Exact disagreements between measurement orders.
    pub order_mismatches: Vec<String>,
    /// (seed, labels) of trials leaving final-stage generators unsatisfied.
    pub violations: Vec<(u64, Vec<String>)>,
}

impl CrossReport {
    #[must_use]
    pub fn ok(&self) -> bool {
        self.fidelity_failures.is_empty()
            && self.rho_checks.iter().all(|c| c.ok)
            && self.order_checks.iter().all(|c| c.ok)
            && self.order_mismatches.is_empty()
            && self.violations.is_empty()
    }
}

/// Product input over the encoded basis: |0⟩ or |+⟩ per logical.
#[must_use]
pub fn plan_input(plan: &InitPlan) -> Vec<f64> {
    let inits: Vec<LogicalInit> = plan.red.iter().chain(&plan.blue).copied().collect();
    let k = inits.len();
    let plus = inits.iter().filter(|s| **s == LogicalInit::Plus).count();
    let amp = (0.5f64).powi(plus as i32).sqrt();
    (0..1usize << k)
        .map(|l| {
            let zero_ok = inits.iter().enumerate().all(|(i, s)| *s == LogicalInit::Plus || l >> i & 1 == 0);
            if zero_ok {
                amp
            } else {
                0.0
            }
        })
        .collect()
}

/// Normalized ∏_γ (1 + (−1)^{ρ_γ} CZ̄_γ)/2 applied to the plan's input.
pub fn expected_logical(tc: &TripleCode, plan: &InitPlan, rho: &BitVector) -> Result<Vec<f64>> {
    let diag = projector_product(&intersection_tensor(tc), rho)?.normalized();
    let mut v: Vec<f64> = plan_input(plan).iter().zip(&diag).map(|(a, d)| a * d).collect();
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    Ok(v)
}

fn overlap_sq(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    d * d / (na * nb)
}

/// Seeded comparison of the dense backend with the projector formula, the
/// ledger's ρ statistics, and two permuted measurement orders.
pub fn crosscheck(tc: &TripleCode, plan: &InitPlan, trials: usize, seed: u64, cap: usize, opts: RunOptions) -> Result<CrossReport> {
    let proto = DenseProtocol::new(tc, plan, cap)?;
    let nv = tc.complex(Copy3::Green).dim(0);
    let natural: Vec<usize> = (0..nv).collect();
    let mut shuffled = natural.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
    let orders = vec![natural.clone(), natural.iter().rev().copied().collect(), shuffled];
    let tables: Vec<BranchTable> = orders.iter().map(|o| proto.branches(o, opts)).collect::<Result<_>>()?;
    let mut rep = CrossReport { trials, orders: orders.clone(), min_fidelity: 1.0, ..Default::default() };

    let exact_rho = tables[0].rho_distribution(tc);
    let exact_mu = tables[0].mu_distribution();
    let mut dense_rho: BTreeMap<String, usize> = BTreeMap::new();
    let mut ledger_rho: BTreeMap<String, usize> = BTreeMap::new();
    for t in 0..trials {
        let s = seed.wrapping_add(t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (li, bi) = tables[0].sample(&mut rng);
        let leaf = &tables[0].leaves[li];
        let br = &leaf.branches[bi];
        let rho = rho_of(tc, &leaf.mu);
        *dense_rho.entry(rho.to_string01()).or_default() += 1;
        if !br.violations.is_empty() {
            rep.violations.push((s, br.violations.clone()));
        }
        if let Some(l) = &br.logical {
            let f = overlap_sq(&l.coeffs, &expected_logical(tc, plan, &rho)?);
            rep.min_fidelity = rep.min_fidelity.min(f);
            if f < 1.0 - 1e-9 {
                rep.fidelity_failures.push((s, f));
            }
        } else {
            rep.min_fidelity = 0.0;
            rep.fidelity_failures.push((s, 0.0));
        }
        let lr = run_ledger(tc, plan, None, s)?.transcript;
        let key: String = lr.rho.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
        *ledger_rho.entry(key).or_default() += 1;
    }
    for (key, &p) in &exact_rho {
        let d = dense_rho.get(key).copied().unwrap_or(0);
        let l = ledger_rho.get(key).copied().unwrap_or(0);
        rep.rho_checks.push(three_sigma(format!("dense rho={key}"), p, d, trials));
        rep.rho_checks.push(three_sigma(format!("ledger rho={key}"), p, l, trials));
    }
    for key in ledger_rho.keys().filter(|k| !exact_rho.contains_key(*k)) {
        rep.rho_checks.push(three_sigma(format!("ledger rho={key}"), 0.0, ledger_rho[key], trials));
    }

    for (oi, table) in tables.iter().enumerate().skip(1) {
        let mu = table.mu_distribution();
        for (key, p) in &mu {
            let q = exact_mu.get(key).copied().unwrap_or(0.0);
            if (p - q).abs() > 1e-9 {
                rep.order_mismatches.push(format!("order {:?}: P(mu={key}) = {p} vs {q}", table.order));
            }
        }
        for leaf in &table.leaves {
            let Some(base) = tables[0].leaves.iter().find(|l| l.mu == leaf.mu) else {
                rep.order_mismatches.push(format!("order {:?}: mu={} missing in natural order", table.order, leaf.mu));
                continue;
            };
            for b in &leaf.branches {
                let same = base.branches.iter().find(|c| c.z == b.z);
                let ok = match (same, &b.logical) {
                    (Some(c), Some(l)) => {
                        (c.prob - b.prob).abs() < 1e-9 && c.logical.as_ref().is_some_and(|m| overlap_sq(&m.coeffs, &l.coeffs) > 1.0 - 1e-9)
                    }
                    (Some(c), None) => c.logical.is_none(),
                    (None, _) => false,
                };
                if !ok {
                    rep.order_mismatches.push(format!("order {:?}: post-state differs at mu={} z={}", table.order, leaf.mu, b.z));
                }
            }
        }
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut marg = vec![0usize; nv];
        for t in 0..trials {
            let s = seed.wrapping_add((oi * trials + t) as u64);
            let (li, _) = table.sample(&mut ChaCha8Rng::seed_from_u64(s));
            let m = &table.leaves[li].mu;
            *counts.entry(rho_of(tc, m).to_string01()).or_default() += 1;
            for (v, c) in marg.iter_mut().enumerate() {
                *c += usize::from(m.get(v));
            }
        }
        for (key, &p) in &exact_rho {
            rep.order_checks.push(three_sigma(
                format!("order {:?} rho={key}", table.order),
                p,
                counts.get(key).copied().unwrap_or(0),
                trials,
            ));
        }
        for (v, &c) in marg.iter().enumerate() {
            let p: f64 = tables[0].leaves.iter().filter(|l| l.mu.get(v)).map(|l| l.prob).sum();
            rep.order_checks.push(three_sigma(format!("order {:?} mu[{v}]=1", table.order), p, c, trials));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::repetition_cyclic;
    use crate::protocol::plan::plan_fountain;
    use crate::skeleton::{triple_code, CupRules};

    #[test]
    fn plan_input_amplitudes() {
        use LogicalInit::{Plus, Zero};
        let plan = InitPlan { red: vec![Plus, Zero], blue: vec![Zero, Plus], clusters: vec![] };
        let v = plan_input(&plan);
        let nz: Vec<usize> = v.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(i, _)| i).collect();
        assert_eq!(nz, vec![0, 1, 8, 9]);
        assert!((v[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rep2_dense_trial() {
        let h = repetition_cyclic(2);
        let tc = triple_code(&h, &h, CupRules::default()).unwrap();
        let (plan, _) = plan_fountain(&tc).unwrap();
        let proto = DenseProtocol::new(&tc, &plan, 26).unwrap();
        let from_basis = DenseProtocol::with_input(&tc, &plan, &plan_input(&plan), 26).unwrap();
        let a = proto.initial_logical().unwrap();
        let b = from_basis.initial_logical().unwrap();
        assert!(overlap_sq(&a.coeffs, &b.coeffs) > 1.0 - 1e-12);
        let run = proto.run(11, RunOptions::default()).unwrap();
        let t = &run.transcript;
        assert!(t.logical_state.violations.is_empty(), "{:?}", t.logical_state.violations);
        let pair = &t.logical_state.pairs[0];
        assert!(pair.fidelity_to_expected.unwrap() > 1.0 - 1e-9);
        let table = proto.branches(&t.order, RunOptions::default()).unwrap();
        let total: f64 = table.leaves.iter().map(|l| l.prob).sum();
        assert!((total - 1.0).abs() < 1e-9);
        let leaf = table.leaves.iter().find(|l| bits(&l.mu) == t.mu).unwrap();
        let br = leaf.branches.iter().find(|b| bits(&b.z) == t.z_mu).unwrap();
        let dense = extract_with(proto.basis(), |w| run.state.amplitudes()[w], run.state.norm_sq()).unwrap();
        assert!(overlap_sq(&dense.coeffs, &br.logical.as_ref().unwrap().coeffs) > 1.0 - 1e-12);
    }
}
