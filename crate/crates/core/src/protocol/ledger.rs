//! Symbolic evolution of the stabilizer group through the four protocol
//! stages, with outcome sampling that never touches a state vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::plan::{certify, InitPlan, LogicalInit};
use super::{Backend, LogicalStateDesc, Outcomes, PairState, ProtocolTranscript};
use crate::error::{Error, Result};
use crate::f2::{solve, BitMatrix, BitVector};
use crate::operators::{charge_parity, commutator, twisted_stabilizers, BGroup, PhasePolyOp, Role, StabilizerSet};
use crate::pathintegral::all_actions;
use crate::skeleton::{intersection_tensor, Copy3, IntersectionTensor, TripleCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stage {
    S1,
    S2,
    S3,
    S4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub label: String,
    /// Eigenvalue −1 when set.
    pub sign: bool,
    pub op: PhasePolyOp,
}

impl LedgerEntry {
    /// The operator with its sign folded in; the state must be its +1
    /// eigenvector.
    #[must_use]
    pub fn signed_op(&self) -> PhasePolyOp {
        let mut o = self.op.clone();
        o.sign ^= self.sign;
        o
    }
}

#[derive(Clone, Debug)]
pub struct StageRecord {
    pub stage: Stage,
    pub entries: Vec<LedgerEntry>,
}

impl StageRecord {
    #[must_use]
    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| if e.sign { format!("-{}", e.label) } else { e.label.clone() }).collect()
    }

    #[must_use]
    pub fn find(&self, prefix: &str) -> Vec<&LedgerEntry> {
        self.entries.iter().filter(|e| e.label.starts_with(prefix)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct LedgerRun {
    pub transcript: ProtocolTranscript,
    pub stages: Vec<StageRecord>,
}

/// Green coboundary d⁰ as a (1-cells × 0-cells) matrix.
#[must_use]
pub fn green_d0(tc: &TripleCode) -> BitMatrix {
    let g = tc.complex(Copy3::Green);
    g.boundary(1).map_or_else(|| BitMatrix::zeros(0, g.dim(0)), BitMatrix::transpose)
}

/// V⁰ with dV⁰ = z for a measured green Z pattern.
pub fn solve_correction(tc: &TripleCode, z: &BitVector) -> Result<BitVector> {
    let g = tc.complex(Copy3::Green);
    if z.len() != g.dim(1) {
        return Err(Error::Dimension(format!("green pattern of length {} for {} qubits", z.len(), g.dim(1))));
    }
    if !g.d(1, z).is_zero() {
        return Err(Error::InconsistentOutcome("green Z outcomes violate a B^g constraint".into()));
    }
    solve(&green_d0(tc), z).ok_or(Error::NontrivialClass)
}

/// ρ_γ = Σ_{σ∈γ} μ_σ.
#[must_use]
pub fn rho_of(tc: &TripleCode, mu: &BitVector) -> BitVector {
    BitVector::from_bools(&tc.green_h0.cocycle_reps.iter().map(|g| g.dot(mu)).collect::<Vec<_>>())
}

/// Outcome distribution of ρ for the plan's product input, read off the
/// normalized logical action restricted to |+⟩ logicals.
pub fn rho_distribution(tc: &TripleCode, plan: &InitPlan) -> Result<Vec<(BitVector, f64)>> {
    let t = intersection_tensor(tc);
    let rp = plan.red_plus();
    let bp = plan.blue_plus();
    let mut sub = IntersectionTensor { dims: [rp.len(), bp.len(), t.dims[2]], entries: Vec::new() };
    for &(a, b, g) in &t.entries {
        if let (Some(i), Some(j)) = (rp.iter().position(|&x| x == a), bp.iter().position(|&x| x == b)) {
            sub.toggle(i, j, g);
        }
    }
    let mut out = Vec::new();
    for (key, act) in all_actions(&sub)? {
        let v = act.normalized();
        let p = v.iter().sum::<f64>() / v.len() as f64;
        out.push((BitVector::parse01(&key).unwrap_or_else(|| BitVector::zeros(0)), p));
    }
    Ok(out)
}

fn entry(label: String, sign: bool, op: PhasePolyOp) -> LedgerEntry {
    LedgerEntry { label, sign, op }
}

fn gens_of(set: &StabilizerSet, f: impl Fn(Role) -> bool, name: &str) -> Vec<LedgerEntry> {
    set.with_role(f).map(|g| entry(format!("{name}^{}[{}]", g.role.copy(), g.cell), false, g.op.clone())).collect()
}

fn bare_x(tc: &TripleCode, c: Copy3) -> Vec<LedgerEntry> {
    let n = tc.n_qubits();
    let cx = tc.complex(c);
    (0..cx.dim(0))
        .map(|v| {
            let supp: Vec<usize> =
                cx.boundary(1).map_or_else(Vec::new, |b| b.row(v).iter_ones().map(|e| tc.qubit(c, e)).collect());
            entry(format!("A^{c}[{v}]"), false, PhasePolyOp::x_string(n, &supp))
        })
        .collect()
}

fn green_z(tc: &TripleCode, z: Option<&BitVector>) -> Vec<LedgerEntry> {
    let n = tc.n_qubits();
    (0..tc.n_copy(Copy3::Green))
        .map(|e| entry(format!("Z^g[{e}]"), z.is_some_and(|z| z.get(e)), PhasePolyOp::z_string(n, &[tc.qubit(Copy3::Green, e)])))
        .collect()
}

fn green_cycles(tc: &TripleCode) -> Vec<LedgerEntry> {
    let n = tc.n_qubits();
    tc.green_h1
        .cycle_reps
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let supp: Vec<usize> = z.iter_ones().map(|e| tc.qubit(Copy3::Green, e)).collect();
            entry(format!("Zbar^g[{k}]"), false, PhasePolyOp::z_string(n, &supp))
        })
        .collect()
}

fn constraints(tc: &TripleCode, plan: &InitPlan) -> Vec<LedgerEntry> {
    let n = tc.n_qubits();
    let mut out = Vec::new();
    for (c, inits) in [(Copy3::Red, &plan.red), (Copy3::Blue, &plan.blue)] {
        let h = tc.h1(c);
        for (k, init) in inits.iter().enumerate() {
            let (rep, name) = match init {
                LogicalInit::Zero => (&h.cycle_reps[k], "Zbar"),
                LogicalInit::Plus => (&h.cocycle_reps[k], "Xbar"),
            };
            let supp: Vec<usize> = rep.iter_ones().map(|e| tc.qubit(c, e)).collect();
            let op = match init {
                LogicalInit::Zero => PhasePolyOp::z_string(n, &supp),
                LogicalInit::Plus => PhasePolyOp::x_string(n, &supp),
            };
            out.push(entry(format!("{name}^{c}[{k}]"), false, op));
        }
    }
    out
}

/// Entries that commute with every measured Ã^g up to B generators.
fn surviving(entries: Vec<LedgerEntry>, measured: &[&PhasePolyOp], bg: &BGroup) -> Vec<LedgerEntry> {
    entries
        .into_iter()
        .filter(|e| measured.iter().all(|m| bg.contains(&commutator(&e.op, m).expect("same register"))))
        .collect()
}

fn charge_parities(tc: &TripleCode, set: &StabilizerSet, rho: &BitVector) -> Vec<LedgerEntry> {
    tc.green_h0
        .cocycle_reps
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let op = charge_parity(tc, set, Copy3::Green, g).expect("basis cocycles are closed");
            entry(format!("CZ~[{k}]"), rho.get(k), op)
        })
        .collect()
}

/// Stage lists for given outcomes.
#[must_use]
pub fn stages(tc: &TripleCode, plan: &InitPlan, mu: &BitVector, z: &BitVector, rho: &BitVector) -> Vec<StageRecord> {
    let tw = twisted_stabilizers(tc);
    let bg = BGroup::new(&tw);
    let b_all = gens_of(&tw, |r| matches!(r, Role::B(_)), "B");
    let dressed = gens_of(&tw, |r| matches!(r, Role::ATilde(c) if c != Copy3::Green), "A~");
    let measured: Vec<&PhasePolyOp> = tw.x_type(Copy3::Green).into_iter().map(|g| &g.op).collect();
    let kept = surviving(constraints(tc, plan), &measured, &bg);

    let mut s1 = bare_x(tc, Copy3::Red);
    s1.extend(bare_x(tc, Copy3::Blue));
    s1.extend(b_all.iter().cloned());
    s1.extend(green_z(tc, None));
    s1.extend(green_cycles(tc));
    s1.extend(constraints(tc, plan));

    let mut s2: Vec<LedgerEntry> = tw
        .x_type(Copy3::Green)
        .into_iter()
        .map(|g| entry(format!("A~^g[{}]", g.cell), mu.get(g.cell), g.op.clone()))
        .collect();
    s2.extend(dressed.iter().cloned());
    s2.extend(b_all.iter().cloned());
    s2.extend(green_cycles(tc));
    s2.extend(kept.iter().cloned());

    let mut s3 = green_z(tc, Some(z));
    s3.extend(charge_parities(tc, &tw, rho));
    s3.extend(dressed.iter().cloned());
    s3.extend(b_all.iter().cloned());
    s3.extend(kept.iter().cloned());

    let mut s4 = green_z(tc, None);
    s4.extend(charge_parities(tc, &tw, rho));
    s4.extend(bare_x(tc, Copy3::Red));
    s4.extend(bare_x(tc, Copy3::Blue));
    s4.extend(b_all);
    s4.extend(kept);

    vec![
        StageRecord { stage: Stage::S1, entries: s1 },
        StageRecord { stage: Stage::S2, entries: s2 },
        StageRecord { stage: Stage::S3, entries: s3 },
        StageRecord { stage: Stage::S4, entries: s4 },
    ]
}

fn bits(v: &BitVector) -> Vec<u8> {
    (0..v.len()).map(|i| u8::from(v.get(i))).collect()
}

fn from_bits(len: usize, v: &[u8], what: &str) -> Result<BitVector> {
    if v.len() != len || v.iter().any(|&b| b > 1) {
        return Err(Error::Dimension(format!("{what} needs {len} bits, got {:?}", v)));
    }
    Ok(BitVector::from_bools(&v.iter().map(|&b| b == 1).collect::<Vec<_>>()))
}

/// Ledger pair descriptors: ρ_γ = 0 leaves the magic state, ρ_γ = 1 leaves |11⟩.
pub(crate) fn pair_states(tc: &TripleCode, plan: &InitPlan, rho: &BitVector) -> Vec<PairState> {
    certify(plan, &intersection_tensor(tc))
        .pairs
        .iter()
        .map(|p| PairState {
            qubits: [format!("r{}", p.alpha), format!("b{}", p.beta)],
            gamma: p.gamma,
            outcome: u8::from(rho.get(p.gamma)),
            expected: if rho.get(p.gamma) { "11".into() } else { "magic".into() },
            fidelity_to_magic: None,
            fidelity_to_expected: None,
        })
        .collect()
}

/// Steps 1–4 without a state vector. Missing outcomes are sampled: ρ from
/// the logical action, μ uniformly given ρ, and the green Z pattern as dV⁰
/// for uniform V⁰.
pub fn run_ledger(tc: &TripleCode, plan: &InitPlan, outcomes: Option<&Outcomes>, seed: u64) -> Result<LedgerRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = tc.complex(Copy3::Green);
    let dist = rho_distribution(tc, plan)?;
    let gammas = &tc.green_h0.cocycle_reps;

    let mu = match outcomes.and_then(|o| o.mu.as_deref()) {
        Some(m) => {
            let mu = from_bits(g.dim(0), m, "mu")?;
            let rho = rho_of(tc, &mu);
            if dist.iter().any(|(r, p)| *r == rho && *p == 0.0) {
                return Err(Error::InconsistentOutcome(format!("charge parities {} have probability zero", rho.to_string01())));
            }
            mu
        }
        None => {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            let mut rho = dist.last().map(|(r, _)| r.clone()).unwrap_or_else(|| BitVector::zeros(0));
            for (cand, p) in &dist {
                acc += p;
                if r < acc {
                    rho = cand.clone();
                    break;
                }
            }
            let mut mu = BitVector::from_bools(&(0..g.dim(0)).map(|_| rng.gen::<bool>()).collect::<Vec<_>>());
            let gm = BitMatrix::from_rows(g.dim(0), gammas.clone());
            let resid = gm.mul_vec(&mu).xor(&rho);
            if let Some(fix) = solve(&gm, &resid) {
                mu.xor_assign(&fix);
            }
            mu
        }
    };
    let rho = rho_of(tc, &mu);

    let z = match outcomes.and_then(|o| o.z_mu.as_deref()) {
        Some(zs) => from_bits(g.dim(1), zs, "z_mu")?,
        None => {
            let v0 = BitVector::from_bools(&(0..g.dim(0)).map(|_| rng.gen::<bool>()).collect::<Vec<_>>());
            g.d(0, &v0)
        }
    };
    let correction = solve_correction(tc, &z)?;
    let stages = stages(tc, plan, &mu, &z, &rho);
    let transcript = ProtocolTranscript {
        seed,
        backend: Backend::Ledger,
        plan: plan.clone(),
        order: (0..g.dim(0)).collect(),
        mu: bits(&mu),
        rho: bits(&rho),
        z_mu: bits(&z),
        correction: correction.support(),
        logical_state: LogicalStateDesc { pairs: pair_states(tc, plan, &rho), zbar: None, violations: Vec::new() },
    };
    Ok(LedgerRun { transcript, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::repetition_cyclic;
    use crate::protocol::plan::plan_fountain;
    use crate::skeleton::{triple_code, CupRules};

    fn rep(l: usize) -> TripleCode {
        let h = repetition_cyclic(l);
        triple_code(&h, &h, CupRules::default()).unwrap()
    }

    #[test]
    fn rep2_stages() {
        let tc = rep(2);
        let (plan, _) = plan_fountain(&tc).unwrap();
        let run = run_ledger(&tc, &plan, None, 5).unwrap();
        let s4 = &run.stages[3];
        assert_eq!(s4.stage, Stage::S4);
        let cz = s4.find("CZ~");
        assert_eq!(cz.len(), tc.green_h0.dim());
        assert!(cz.iter().all(|e| e.op.x.is_zero() && !e.op.cz.is_empty()));
        assert_eq!(cz[0].sign, run.transcript.rho[0] == 1);
        // green decoupled: every green qubit carries +Z
        assert_eq!(s4.find("Z^g").len(), tc.n_copy(Copy3::Green));
        assert!(s4.find("Z^g").iter().all(|e| !e.sign));
        assert!(run.stages[1].find("Xbar").is_empty());
        assert_eq!(run.stages[0].find("Xbar").len(), 2);
    }

    #[test]
    fn forced_zero_outcomes() {
        let tc = rep(2);
        let (plan, _) = plan_fountain(&tc).unwrap();
        let g = tc.complex(Copy3::Green);
        let o = Outcomes { mu: Some(vec![0; g.dim(0)]), z_mu: Some(vec![0; g.dim(1)]) };
        let run = run_ledger(&tc, &plan, Some(&o), 0).unwrap();
        assert!(run.transcript.rho.iter().all(|&r| r == 0));
        assert!(run.transcript.correction.is_empty());
    }

    #[test]
    fn correction_from_known_v0() {
        use rand::Rng;
        let tc = rep(3);
        let g = tc.complex(Copy3::Green);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let v0 = BitVector::from_bools(&(0..g.dim(0)).map(|_| rng.gen::<bool>()).collect::<Vec<_>>());
            let z = g.d(0, &v0);
            let v = solve_correction(&tc, &z).unwrap();
            assert_eq!(g.d(0, &v), z);
        }
        let bad = BitVector::unit(g.dim(1), 0);
        assert!(matches!(solve_correction(&tc, &bad), Err(Error::InconsistentOutcome(_))));
        let loop_class = tc.green_h1.cocycle_reps[0].clone();
        assert_eq!(solve_correction(&tc, &loop_class), Err(Error::NontrivialClass));
    }

    #[test]
    fn rho_statistics_and_determinism() {
        let tc = rep(2);
        let (plan, _) = plan_fountain(&tc).unwrap();
        let dist = rho_distribution(&tc, &plan).unwrap();
        let p0 = dist.iter().find(|(r, _)| !r.get(0)).unwrap().1;
        assert!((p0 - 0.75).abs() < 1e-12);
        let zero = InitPlan::all_zero(&tc);
        let d0 = rho_distribution(&tc, &zero).unwrap();
        assert!(d0.iter().all(|(r, p)| if r.is_zero() { *p == 1.0 } else { *p == 0.0 }));
        let a = run_ledger(&tc, &plan, None, 77).unwrap().transcript;
        let b = run_ledger(&tc, &plan, None, 77).unwrap().transcript;
        assert_eq!(a, b);
        let o = Outcomes { mu: Some(a.mu.clone()), z_mu: Some(a.z_mu.clone()) };
        assert_eq!(run_ledger(&tc, &plan, Some(&o), 77).unwrap().transcript, a);
        // ρ ≠ 0 cannot happen on an all-|0⟩ input
        let mut mu = vec![0u8; tc.complex(Copy3::Green).dim(0)];
        let gamma = &tc.green_h0.cocycle_reps[0];
        mu[gamma.first_one().unwrap()] = 1;
        let o = Outcomes { mu: Some(mu), z_mu: None };
        assert!(matches!(run_ledger(&tc, &zero, Some(&o), 1), Err(Error::InconsistentOutcome(_))));
    }

    #[test]
    fn ledger_only_on_rep5() {
        let tc = rep(5);
        let (plan, _) = plan_fountain(&tc).unwrap();
        let run = run_ledger(&tc, &plan, None, 3).unwrap();
        assert!(run.transcript.logical_state.pairs.iter().all(|p| p.fidelity_to_magic.is_none()));
        assert_eq!(run.transcript.logical_state.pairs.len(), 1);
    }
}
