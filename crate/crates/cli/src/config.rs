use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use twistq::f2::BitMatrix;
use twistq::io::{parse_matrix, Format};
use twistq::protocol::MAX_DENSE_QUBITS;
use twistq::skeleton::{triple_code, Adjacency, CupRules, TripleCode};

use crate::CliError;

/// Everything a command needs besides its own flags. Serialized into every
/// artifact so a run can be reproduced from its output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub x: PathBuf,
    pub y: PathBuf,
    pub format: String,
    pub adjacency: String,
    pub seed: u64,
    pub budget: u64,
    pub dense_cap: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    fmt: Option<Format>,
    #[serde(skip)]
    adj: Adjacency,
}

impl RunConfig {
    pub fn new(
        x: Option<PathBuf>,
        y: Option<PathBuf>,
        format: &str,
        adjacency: &str,
        seed: u64,
        budget: u64,
        dense_cap: usize,
        out: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        let x = x.ok_or_else(|| CliError::Usage("--x <path> is required".into()))?;
        let y = y.unwrap_or_else(|| x.clone());
        let fmt: Format = format.parse().map_err(CliError::Usage)?;
        let adj: Adjacency = adjacency.parse().map_err(CliError::Usage)?;
        if dense_cap > MAX_DENSE_QUBITS {
            return Err(CliError::Usage(format!("--dense-cap may not exceed {MAX_DENSE_QUBITS}")));
        }
        if budget == 0 {
            return Err(CliError::Usage("--budget must be at least 1".into()));
        }
        Ok(Self {
            x,
            y,
            format: format.to_string(),
            adjacency: adj.as_str().to_string(),
            seed,
            budget,
            dense_cap,
            out,
            fmt: Some(fmt),
            adj,
        })
    }

    fn read(&self, path: &Path) -> Result<BitMatrix, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let fmt = self.fmt.expect("set in new");
        parse_matrix(&text, fmt).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn load(&self) -> Result<TripleCode, CliError> {
        let hx = self.read(&self.x)?;
        let hy = self.read(&self.y)?;
        Ok(triple_code(&hx, &hy, CupRules::with_adjacency(self.adj))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(format: &str, adjacency: &str, budget: u64, cap: usize) -> Result<RunConfig, CliError> {
        RunConfig::new(Some("h.alist".into()), None, format, adjacency, 0, budget, cap, None)
    }

    #[test]
    fn defaults_and_limits() {
        let c = cfg("alist", "min", 10, 26).unwrap();
        assert_eq!(c.y, PathBuf::from("h.alist"));
        assert_eq!(c.adjacency, "min-index");
        assert!(matches!(cfg("csv", "min-index", 10, 26), Err(CliError::Usage(_))));
        assert!(matches!(cfg("alist", "min-index", 0, 26), Err(CliError::Usage(_))));
        assert!(matches!(cfg("alist", "min-index", 10, 27), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::new(None, None, "alist", "min-index", 0, 1, 26, None), Err(CliError::Usage(_))));
    }

    #[test]
    fn seed_is_serialized() {
        let c = cfg("json", "symmetrized", 5, 20).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["seed"], 0);
        assert_eq!(v["adjacency"], "symmetrized");
        assert!(v.get("out").is_none());
    }
}
