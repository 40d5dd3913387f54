//! Gauging-measurement protocol: initialization planning, the symbolic
//! stabilizer ledger, and an exact state-vector backend.

pub mod dense;
pub mod ledger;
pub mod plan;
pub mod runner;

use serde::{Deserialize, Serialize};

pub use dense::{extract_logical, DenseState, LogicalBasis, LogicalState, MAX_DENSE_QUBITS};
pub use ledger::{run_ledger, LedgerRun, Stage, StageRecord};
pub use plan::{certify, plan_fountain, ActivePair, Certificate, InitPlan, LogicalInit};
pub use runner::{crosscheck, BranchTable, CrossReport, DenseProtocol, DenseRun, RunOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Ledger,
    Dense,
}

/// Externally supplied measurement outcomes, e.g. replayed from a
/// transcript file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcomes {
    #[serde(default)]
    pub mu: Option<Vec<u8>>,
    #[serde(default)]
    pub z_mu: Option<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub qubits: [String; 2],
    pub gamma: usize,
    pub outcome: u8,
    /// "magic" or "11".
    pub expected: String,
    pub fidelity_to_magic: Option<f64>,
    pub fidelity_to_expected: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalStateDesc {
    pub pairs: Vec<PairState>,
    pub zbar: Option<Vec<f64>>,
    /// Final-stage generators the state fails to stabilize.
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub seed: u64,
    pub backend: Backend,
    pub plan: InitPlan,
    /// Measurement order of the green 0-cells.
    pub order: Vec<usize>,
    pub mu: Vec<u8>,
    pub rho: Vec<u8>,
    pub z_mu: Vec<u8>,
    pub correction: Vec<usize>,
    pub logical_state: LogicalStateDesc,
}

impl ProtocolTranscript {
    #[must_use]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}
