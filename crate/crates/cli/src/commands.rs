use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use twistq::complex::validate;
use twistq::f2::BitVector;
use twistq::metrics::{code_report, rate_report, twisted_gsd, untwisted_gsd, SearchOutcome};
use twistq::operators::{charge_parity, commutation_closure, entangler_round_trip, twisted_stabilizers, untwisted_stabilizers};
use twistq::pathintegral::{all_actions, projector_identity_check};
use twistq::protocol::ledger::rho_distribution;
use twistq::protocol::{plan_fountain, run_ledger, Backend, DenseProtocol, Outcomes, ProtocolTranscript, RunOptions};
use twistq::skeleton::{intersection_tensor, stokes_check, Copy3, TripleCode};

use crate::config::RunConfig;
use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

/// Writes `<out>/<name>.json` and its timestamp side file, or prints the
/// artifact when no output directory was given. Returns whether a file
/// was written.
fn emit<T: Serialize>(cfg: &RunConfig, name: &str, result: &T) -> Result<bool, CliError> {
    let doc = json!({ "command": name, "config": cfg, "result": result });
    match &cfg.out {
        Some(dir) => {
            write(&dir.join(format!("{name}.json")), &pretty(&doc))?;
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            write(&dir.join(format!("{name}.meta.json")), &pretty(&json!({ "command": name, "unix_time": now })))?;
            Ok(true)
        }
        None => {
            print!("{}", pretty(&doc));
            Ok(false)
        }
    }
}

fn print_table(rows: &[Vec<String>]) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = std::io::stdout().lock();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        // a closed pipe is not worth a panic
        if writeln!(out, "{}", line.join("  ").trim_end()).is_err() {
            return;
        }
    }
}

pub fn build(cfg: &RunConfig, name: &str) -> Result<(), CliError> {
    let tc = cfg.load()?;
    let d = tc.descriptor();
    if emit(cfg, name, &d)? {
        println!("qubits red {} blue {} green {}; tensor {:?} with {} entries", d.qubits[0], d.qubits[1], d.qubits[2], d.tensor.dims, d.tensor.entries.len());
    }
    Ok(())
}

pub fn stabilizers(cfg: &RunConfig, name: &str) -> Result<(), CliError> {
    let tc = cfg.load()?;
    let un = untwisted_stabilizers(&tc);
    let tw = twisted_stabilizers(&tc);
    let result = json!({
        "n": tw.n,
        "cz_count": tw.cz_count(),
        "untwisted": un.export(),
        "twisted": tw.export(),
    });
    if emit(cfg, name, &result)? {
        println!("{} generators on {} qubits, {} CZ pairs in the dressing", tw.generators.len(), tw.n, tw.cz_count());
    }
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: String,
    status: &'static str,
    detail: Value,
}

impl Check {
    fn new(name: impl Into<String>, ok: bool, detail: Value) -> Self {
        Self { name: name.into(), status: if ok { "pass" } else { "fail" }, detail }
    }

    fn skipped(name: impl Into<String>, why: &str) -> Self {
        Self { name: name.into(), status: "skipped", detail: json!(why) }
    }
}

fn charge_parity_check(tc: &TripleCode, copy: Copy3) -> Check {
    let set = twisted_stabilizers(tc);
    let reps = &tc.h0(copy).cocycle_reps;
    let label = format!("charge parity {copy}");
    if reps.is_empty() {
        return Check::skipped(label, "empty 0-cocycle basis");
    }
    let mut bad = Vec::new();
    for (i, eta) in reps.iter().enumerate() {
        match charge_parity(tc, &set, copy, eta) {
            Ok(op) if op.x.is_zero() => {}
            Ok(op) => bad.push(format!("class {i}: residual X on {:?}", op.x.support())),
            Err(e) => bad.push(format!("class {i}: {e}")),
        }
    }
    Check::new(label, bad.is_empty(), json!({ "classes": reps.len(), "failures": bad }))
}

pub fn verify(cfg: &RunConfig, name: &str, trials: usize) -> Result<(), CliError> {
    let tc = cfg.load()?;
    let mut checks = Vec::new();
    for c in Copy3::ALL {
        let v = validate(tc.complex(c));
        checks.push(Check::new(format!("complex {c}"), v.ok(), json!({ "first_failure": v.first_failure() })));
    }
    let st = stokes_check(&tc, trials, cfg.seed);
    checks.push(Check::new("cohomology invariance", st.ok(), serde_json::to_value(&st).expect("plain data")));
    let cl = commutation_closure(&twisted_stabilizers(&tc));
    checks.push(Check::new("commutation closure", cl.ok(), serde_json::to_value(&cl).expect("plain data")));
    for c in Copy3::ALL {
        checks.push(charge_parity_check(&tc, c));
    }
    let en = entangler_round_trip(&tc);
    checks.push(Check::new("entangler round trip", en.ok(), serde_json::to_value(&en).expect("plain data")));
    let t = intersection_tensor(&tc);
    if t.dims[0] + t.dims[1] > 24 || t.dims[2] > 16 {
        checks.push(Check::skipped("projector identity", "tensor too large for exhaustive winding sums"));
    } else {
        let mut mism = Vec::new();
        for r in 0..1usize << t.dims[2] {
            let rho = BitVector::from_indices(t.dims[2], (0..t.dims[2]).filter(|i| r >> i & 1 == 1));
            let rep = projector_identity_check(&t, &rho)?;
            if let Some(m) = rep.mismatch {
                mism.push(json!({ "rho": rep.rho, "mismatch": m }));
            }
        }
        checks.push(Check::new("projector identity", mism.is_empty(), json!({ "outcomes": 1usize << t.dims[2], "mismatches": mism })));
    }
    let failed: Vec<String> = checks.iter().filter(|c| c.status == "fail").map(|c| c.name.clone()).collect();
    let result = json!({ "ok": failed.is_empty(), "checks": checks });
    if emit(cfg, name, &result)? {
        let rows: Vec<Vec<String>> = checks.iter().map(|c| vec![c.name.clone(), c.status.to_string()]).collect();
        print_table(&rows);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}

pub fn intersections(cfg: &RunConfig, name: &str) -> Result<(), CliError> {
    let tc = cfg.load()?;
    let t = intersection_tensor(&tc);
    let actions = if t.dims[0] + t.dims[1] <= 24 && t.dims[2] <= 16 { Some(all_actions(&t)?) } else { None };
    let result = json!({
        "dims": t.dims,
        "entries": t.entries.iter().map(|&(a, b, g)| [a, b, g]).collect::<Vec<_>>(),
        "red_decomposable": tc.red_decomposable(),
        "blue_decomposable": tc.blue_decomposable(),
        "logical_actions": actions,
    });
    if emit(cfg, name, &result)? {
        let mut rows = vec![vec!["alpha".to_string(), "beta".into(), "gamma".into()]];
        rows.extend(t.entries.iter().map(|&(a, b, g)| vec![a.to_string(), b.to_string(), g.to_string()]));
        print_table(&rows);
    }
    Ok(())
}

fn show(o: &SearchOutcome) -> String {
    match o {
        SearchOutcome::Found { weight, .. } => weight.to_string(),
        SearchOutcome::NoLogical => "inf".into(),
        SearchOutcome::BudgetExhausted { lower_bound } => format!(">={lower_bound}*"),
    }
}

pub fn distance(cfg: &RunConfig, name: &str, threshold: usize) -> Result<(), CliError> {
    let tc = cfg.load()?;
    let rep = code_report(&tc, cfg.budget, threshold);
    let mut outcomes = Vec::new();
    for c in &rep.copies {
        outcomes.extend([&c.d_z, &c.d_x]);
        for cl in &c.classes {
            outcomes.extend([&cl.z_weight, &cl.x_weight]);
        }
        if let Some(s) = &c.subsystem {
            outcomes.extend([&s.d_z, &s.d_x]);
        }
    }
    let exhausted = outcomes.iter().filter(|o| matches!(o, SearchOutcome::BudgetExhausted { .. })).count();
    if emit(cfg, name, &rep)? {
        let mut rows = vec![vec!["copy".to_string(), "n".into(), "k".into(), "d_z".into(), "d_x".into(), "spurious".into(), "subsystem d".into()]];
        for c in &rep.copies {
            let spur = c.classes.iter().filter(|cl| cl.spurious).count();
            let sub = c.subsystem.as_ref().and_then(|s| s.distance).map_or("-".into(), |d| d.to_string());
            rows.push(vec![c.copy.to_string(), c.n.to_string(), c.k.to_string(), show(&c.d_z), show(&c.d_x), spur.to_string(), sub]);
        }
        print_table(&rows);
        if exhausted > 0 {
            println!("* budget exhausted; value is a lower bound");
        }
    }
    if exhausted > 0 {
        Err(CliError::Budget(format!("{exhausted} searches exhausted a budget of {}", cfg.budget)))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct SimSummary {
    backend: Backend,
    trials: usize,
    active_pairs: usize,
    rho_counts: BTreeMap<String, usize>,
    exact_rho: Option<BTreeMap<String, f64>>,
    /// Fraction of (trial, pair) slots that came out as magic pairs.
    magic_yield: f64,
    min_fidelity_to_expected: Option<f64>,
    violations: usize,
}

fn rho_key(t: &ProtocolTranscript) -> String {
    t.rho.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

fn read_outcomes(path: &Path) -> Result<Outcomes, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))
}

pub fn simulate(cfg: &RunConfig, name: &str, trials: usize, backend: &str, replay: Option<&Path>) -> Result<(), CliError> {
    let backend = match backend {
        "dense" => Backend::Dense,
        "ledger" => Backend::Ledger,
        other => return Err(CliError::Usage(format!("unknown backend `{other}`"))),
    };
    let tc = cfg.load()?;
    let (plan, cert) = plan_fountain(&tc)?;
    let replayed = replay.map(read_outcomes).transpose()?;
    let seeds: Vec<u64> = if replayed.is_some() { vec![cfg.seed] } else { (0..trials as u64).map(|t| cfg.seed.wrapping_add(t)).collect() };

    let mut transcripts = Vec::new();
    let mut exact_rho = None;
    match backend {
        Backend::Ledger => {
            for &s in &seeds {
                transcripts.push(run_ledger(&tc, &plan, replayed.as_ref(), s)?.transcript);
            }
        }
        Backend::Dense => {
            let proto = DenseProtocol::new(&tc, &plan, cfg.dense_cap)?;
            let order: Vec<usize> = (0..tc.complex(Copy3::Green).dim(0)).collect();
            let table = proto.branches(&order, RunOptions::default())?;
            exact_rho = Some(table.rho_distribution(&tc));
            for &s in &seeds {
                let (li, bi) = match &replayed {
                    Some(o) => find_branch(&table, o)?,
                    None => table.sample(&mut ChaCha8Rng::seed_from_u64(s)),
                };
                transcripts.push(table.transcript(&proto, li, bi, s));
            }
        }
    }

    let mut rho_counts: BTreeMap<String, usize> = BTreeMap::new();
    let (mut magic, mut slots, mut violations) = (0usize, 0usize, 0usize);
    let mut min_fid: Option<f64> = None;
    for t in &transcripts {
        *rho_counts.entry(rho_key(t)).or_default() += 1;
        for p in &t.logical_state.pairs {
            slots += 1;
            magic += usize::from(p.outcome == 0);
            if let Some(f) = p.fidelity_to_expected {
                min_fid = Some(min_fid.map_or(f, |m: f64| m.min(f)));
            }
        }
        violations += usize::from(!t.logical_state.violations.is_empty());
    }
    let summary = SimSummary {
        backend,
        trials: transcripts.len(),
        active_pairs: cert.pairs.len(),
        rho_counts,
        exact_rho,
        magic_yield: if slots == 0 { 0.0 } else { magic as f64 / slots as f64 },
        min_fidelity_to_expected: min_fid,
        violations,
    };
    match &cfg.out {
        Some(dir) => {
            for (i, t) in transcripts.iter().enumerate() {
                write(&dir.join("transcripts").join(format!("trial-{i:04}.json")), &pretty(t))?;
            }
            emit(cfg, name, &summary)?;
            println!("{} trials, magic yield {:.4}, min fidelity {}", summary.trials, summary.magic_yield, min_fid.map_or("-".into(), |f| format!("{f:.12}")));
        }
        None => {
            emit(cfg, name, &json!({ "summary": summary, "transcripts": transcripts }))?;
        }
    }
    if violations > 0 {
        return Err(CliError::Verify(format!("{violations} trials left final-stage generators unsatisfied")));
    }
    Ok(())
}

fn find_branch(table: &twistq::protocol::BranchTable, o: &Outcomes) -> Result<(usize, usize), CliError> {
    let eq = |v: &BitVector, b: &[u8]| v.len() == b.len() && b.iter().enumerate().all(|(i, &x)| v.get(i) == (x == 1));
    let mu = o.mu.as_deref().ok_or_else(|| CliError::Parse("replay file has no `mu`".into()))?;
    for (li, l) in table.leaves.iter().enumerate() {
        if !eq(&l.mu, mu) {
            continue;
        }
        let bi = match o.z_mu.as_deref() {
            Some(z) => l.branches.iter().position(|b| eq(&b.z, z)),
            None => Some(0),
        };
        if let Some(bi) = bi {
            return Ok((li, bi));
        }
    }
    Err(twistq::Error::InconsistentOutcome("replayed outcomes have probability zero".into()).into())
}

pub fn fountain(cfg: &RunConfig, name: &str) -> Result<(), CliError> {
    let tc = cfg.load()?;
    let (plan, cert) = plan_fountain(&tc)?;
    let dist: BTreeMap<String, f64> = rho_distribution(&tc, &plan)?.into_iter().map(|(r, p)| (r.to_string01(), p)).collect();
    let result = json!({ "plan": plan, "certificate": cert, "rho_distribution": dist });
    if emit(cfg, name, &result)? {
        let mut rows = vec![vec!["alpha".to_string(), "beta".into(), "gamma".into()]];
        rows.extend(cert.pairs.iter().map(|p| vec![p.alpha.to_string(), p.beta.to_string(), p.gamma.to_string()]));
        print_table(&rows);
    }
    if cert.ok() {
        Ok(())
    } else {
        Err(CliError::Verify(format!("{} plan conflicts", cert.conflicts.len())))
    }
}

pub fn report(cfg: &RunConfig, name: &str) -> Result<(), CliError> {
    let tc = cfg.load()?;
    let rates = rate_report(&tc);
    let gsd = |r: twistq::Result<twistq::metrics::GsdReport>| match r {
        Ok(g) => serde_json::to_value(g).expect("plain data"),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let fountain = match plan_fountain(&tc) {
        Ok((_, cert)) => json!({ "pairs": cert.pairs.len(), "conflicts": cert.conflicts.len() }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let tw = twisted_gsd(&tc);
    let result = json!({
        "rates": rates,
        "untwisted_gsd": gsd(untwisted_gsd(&tc)),
        "twisted_gsd": gsd(tw.clone()),
        "fountain": fountain,
    });
    if emit(cfg, name, &result)? {
        let gs = tw.map_or_else(|e| e.to_string(), |g| format!("{} (log2 {:.4})", g.gsd, g.log2_gsd));
        print_table(&[
            vec!["n (r, b, g)".to_string(), format!("{:?}", rates.n)],
            vec!["k red / blue / green".into(), format!("{} / {} / {}", rates.k_red, rates.k_blue, rates.k_green)],
            vec!["gamma classes".into(), rates.gamma_count.to_string()],
            vec!["k tilde".into(), rates.k_tilde.to_string()],
            vec!["twisted GSD".into(), gs],
        ]);
    }
    Ok(())
}
