//! Acceptance criteria 1 through 11, one line each. Runs without the libtest
//! harness so every line is printed even when an earlier one fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistq::codes::repetition_cyclic;
use twistq::f2::{rank, BitMatrix, BitVector};
use twistq::metrics::{min_weight_logical, rate_report, twisted_gsd, Kind, SearchOutcome, DEFAULT_BUDGET};
use twistq::operators::{charge_parity, commutation_closure, entangler_round_trip, twisted_stabilizers};
use twistq::pathintegral::logical_action;
use twistq::protocol::ledger::rho_of;
use twistq::protocol::runner::three_sigma;
use twistq::protocol::{crosscheck, plan_fountain, DenseProtocol, RunOptions};
use twistq::skeleton::{intersection_tensor, tensor_from_reps, triple_code, Copy3, CupRules, TripleCode};

type Outcome = Result<String, String>;

fn rep(lx: usize, ly: usize) -> TripleCode {
    triple_code(&repetition_cyclic(lx), &repetition_cyclic(ly), CupRules::default()).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn weight(o: &SearchOutcome) -> Option<usize> {
    o.weight()
}

fn red_distance(tc: &TripleCode) -> Option<usize> {
    let cx = tc.complex(Copy3::Red);
    let dz = weight(&min_weight_logical(cx, &tc.red_h1, Kind::Z, DEFAULT_BUDGET))?;
    let dx = weight(&min_weight_logical(cx, &tc.red_h1, Kind::X, DEFAULT_BUDGET))?;
    Some(dz.min(dx))
}

fn c1_toric() -> Outcome {
    let t = Instant::now();
    let mut seen = Vec::new();
    for l in 2..=4 {
        let tc = rep(l, l);
        let n = tc.n_copy(Copy3::Red);
        let k = tc.red_h1.dim();
        let d = red_distance(&tc);
        ensure(n == 2 * l * l && k == 2 && d == Some(l), || format!("L={l}: [[{n},{k},{d:?}]]"))?;
        seen.push(format!("[[{n},{k},{l}]]"));
    }
    ensure(t.elapsed() < Duration::from_secs(60), || format!("took {:?}", t.elapsed()))?;
    Ok(seen.join(" "))
}

fn c2_matched_triples() -> Outcome {
    let mut checked = 0;
    for (lx, ly) in [(2, 2), (3, 3), (4, 4), (5, 5), (2, 3), (3, 4)] {
        let tc = rep(lx, ly);
        let t = intersection_tensor(&tc);
        for &a in &tc.red_decomposable() {
            for &b in &tc.blue_decomposable() {
                for g in 0..t.dims[2] {
                    let (ta, tb, tg) = (tc.red_h1.tags[a], tc.blue_h1.tags[b], tc.green_h0.tags[g]);
                    // same x-factor class and same y-factor class on all three
                    let matched = ta.left_class == tb.left_class
                        && tb.left_class == tg.left_class
                        && ta.right_class == tb.right_class
                        && tb.right_class == tg.right_class;
                    if matched {
                        ensure(t.get(a, b, g), || format!("rep{lx}x{ly}: T[{a}][{b}][{g}] = 0"))?;
                        checked += 1;
                    }
                }
            }
        }
    }
    ensure(checked > 0, || "no matched triples found".into())?;
    Ok(format!("{checked} matched triples, all equal 1"))
}

fn c3_closure() -> Outcome {
    let t = Instant::now();
    let mut pairs = 0;
    for l in [2, 3] {
        let rep = commutation_closure(&twisted_stabilizers(&rep(l, l)));
        ensure(rep.ok(), || format!("rep-{l}: {} commutators outside the B group", rep.failures.len()))?;
        pairs += rep.pairs;
    }
    ensure(t.elapsed() < Duration::from_secs(60), || format!("symbolic check took {:?}", t.elapsed()))?;
    let tc = rep(2, 2);
    let (plan, _) = plan_fountain(&tc).map_err(|e| e.to_string())?;
    let cr = crosscheck(&tc, &plan, 200, 31, 26, RunOptions::default()).map_err(|e| e.to_string())?;
    let bad: Vec<String> = cr.order_checks.iter().filter(|c| !c.ok).map(|c| c.label.clone()).collect();
    ensure(bad.is_empty() && cr.order_mismatches.is_empty(), || format!("order dependence: {bad:?} {:?}", cr.order_mismatches))?;
    Ok(format!("{pairs} commutators in the B group; {} orders agree over 200 trials", cr.orders.len()))
}

fn shifted(rng: &mut ChaCha8Rng, tc: &TripleCode, c: Copy3, reps: &[BitVector]) -> Vec<BitVector> {
    let cx = tc.complex(c);
    reps.iter()
        .map(|w| {
            let v = BitVector::from_indices(cx.dim(0), (0..cx.dim(0)).filter(|_| rng.gen::<bool>()));
            w.xor(&cx.d(0, &v))
        })
        .collect()
}

fn c4_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (lx, ly) in [(2, 2), (3, 3), (2, 3)] {
        let tc = rep(lx, ly);
        let base = intersection_tensor(&tc);
        for s in 0..100 {
            let a = shifted(&mut rng, &tc, Copy3::Red, &tc.red_h1.cocycle_reps);
            let b = shifted(&mut rng, &tc, Copy3::Blue, &tc.blue_h1.cocycle_reps);
            let t = tensor_from_reps(&tc, &a, &b, &tc.green_h0.cocycle_reps).map_err(|e| e.to_string())?;
            ensure(t == base, || format!("rep{lx}x{ly} shift {s}: {:?} vs {:?}", t.entries, base.entries))?;
        }
    }
    Ok("300 shifted tensors identical".into())
}

fn c5_charge_parity() -> Outcome {
    let mut n = 0;
    for l in [2, 3] {
        let tc = rep(l, l);
        let set = twisted_stabilizers(&tc);
        for c in [Copy3::Green, Copy3::Red, Copy3::Blue] {
            for (i, eta) in tc.h0(c).cocycle_reps.iter().enumerate() {
                let op = charge_parity(&tc, &set, c, eta).map_err(|e| e.to_string())?;
                ensure(op.x.is_zero(), || format!("rep-{l} {c} class {i}: X left on {:?}", op.x.support()))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} charge-parity products X-free"))
}

fn c6_protocol() -> Outcome {
    let t = Instant::now();
    let tc = rep(2, 2);
    let (plan, cert) = plan_fountain(&tc).map_err(|e| e.to_string())?;
    ensure(cert.pairs.len() == 1, || format!("{} active pairs", cert.pairs.len()))?;
    let proto = DenseProtocol::new(&tc, &plan, 26).map_err(|e| e.to_string())?;
    let order: Vec<usize> = (0..tc.complex(Copy3::Green).dim(0)).collect();
    let table = proto.branches(&order, RunOptions::default()).map_err(|e| e.to_string())?;
    let exact = table.rho_distribution(&tc);
    let p0 = exact.get("0").copied().unwrap_or(0.0);
    ensure((p0 - 0.75).abs() < 1e-12, || format!("exact P(rho=0) = {p0}"))?;
    let trials = 400;
    let mut hits = 0;
    let mut worst: BTreeMap<u8, f64> = BTreeMap::new();
    for s in 0..trials as u64 {
        let (li, bi) = table.sample(&mut ChaCha8Rng::seed_from_u64(1000 + s));
        let tr = table.transcript(&proto, li, bi, 1000 + s);
        let pair = &tr.logical_state.pairs[0];
        hits += usize::from(pair.outcome == 0);
        let f = pair.fidelity_to_expected.ok_or("no dense fidelity")?;
        let w = worst.entry(pair.outcome).or_insert(1.0);
        *w = w.min(f);
        ensure(tr.logical_state.violations.is_empty(), || format!("seed {s}: {:?}", tr.logical_state.violations))?;
    }
    let fc = three_sigma("rho=0".into(), 0.75, hits, trials);
    ensure(fc.ok, || format!("P(rho=0) observed {:.4}, 3 sigma = {:.4}", fc.observed, 3.0 * fc.sigma))?;
    for (o, f) in &worst {
        ensure(*f >= 1.0 - 1e-9, || format!("rho={o}: fidelity {f}"))?;
    }
    ensure(worst.len() == 2, || format!("only saw outcomes {:?}", worst.keys().collect::<Vec<_>>()))?;
    // one fully sequential dense trial as well
    let run = proto.run(77, RunOptions::default()).map_err(|e| e.to_string())?;
    let f = run.transcript.logical_state.pairs[0].fidelity_to_expected.ok_or("no fidelity")?;
    ensure(f >= 1.0 - 1e-9, || format!("sequential run fidelity {f}"))?;
    Ok(format!(
        "P(rho=0) = {:.4} over {trials} (exact {p0}), min fidelity magic {:.12}, |11> {:.12}, {:?}",
        fc.observed,
        worst[&0],
        worst[&1],
        t.elapsed()
    ))
}

fn c7_logical_channel() -> Outcome {
    let tc = rep(2, 2);
    let (plan, _) = plan_fountain(&tc).map_err(|e| e.to_string())?;
    let t = intersection_tensor(&tc);
    let k = tc.red_h1.dim() + tc.blue_h1.dim();
    let dg = t.dims[2];
    let actions: Vec<Vec<f64>> = (0..1usize << dg)
        .map(|r| {
            let rho = BitVector::from_indices(dg, (0..dg).filter(|i| r >> i & 1 == 1));
            logical_action(&t, &rho).map(|a| a.normalized())
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let order: Vec<usize> = (0..tc.complex(Copy3::Green).dim(0)).collect();
    let mut worst = 0.0f64;
    for l in 0..1usize << k {
        let mut input = vec![0.0; 1 << k];
        input[l] = 1.0;
        let proto = DenseProtocol::with_input(&tc, &plan, &input, 26).map_err(|e| e.to_string())?;
        let table = proto.branches(&order, RunOptions::default()).map_err(|e| e.to_string())?;
        let mut prob = vec![0.0; 1 << dg];
        for leaf in &table.leaves {
            let rho = rho_of(&tc, &leaf.mu);
            let r = (0..dg).filter(|&i| rho.get(i)).map(|i| 1 << i).sum::<usize>();
            prob[r] += leaf.prob;
            for b in &leaf.branches {
                let lg = b.logical.as_ref().ok_or_else(|| format!("input {l}: leaf left the code space"))?;
                let stay = lg.coeffs[l] * lg.coeffs[l] / lg.weight;
                ensure((stay - 1.0).abs() < 1e-9, || format!("input {l}: output overlap {stay}"))?;
            }
        }
        for r in 0..1usize << dg {
            let diff = (prob[r] - actions[r][l]).abs();
            worst = worst.max(diff);
            ensure(diff < 1e-9, || format!("input {l}, rho {r}: dense {} vs T {}", prob[r], actions[r][l]))?;
        }
    }
    Ok(format!("{} inputs x {} outcomes, max deviation {worst:.1e}", 1 << k, 1 << dg))
}

fn c8_rate() -> Outcome {
    let tc = rep(2, 2);
    let rate = rate_report(&tc);
    let g = twisted_gsd(&tc).map_err(|e| e.to_string())?;
    let detail = format!("k~ = {} (2^{} = {}), twisted ground-space dimension {} (log2 {:.4})", rate.k_tilde, rate.k_tilde, 1u64 << rate.k_tilde, g.gsd, g.log2_gsd);
    ensure(g.matches_k_tilde, || detail.clone())?;
    Ok(detail)
}

fn c9_entangler() -> Outcome {
    let mut cz = Vec::new();
    for l in [2, 3] {
        let r = entangler_round_trip(&rep(l, l));
        ensure(r.ok(), || format!("rep-{l}: {r:?}"))?;
        cz.push(r.ccz_count);
    }
    Ok(format!("CCZ layers of {cz:?} gates reproduce the dressed generators"))
}

fn c10_scaling() -> Outcome {
    let mut rows = Vec::new();
    for l in 2..=5 {
        let tc = rep(l, l);
        let n = tc.n_copy(Copy3::Red);
        let d = red_distance(&tc);
        ensure(d == Some(l) && n == 2 * l * l, || format!("L={l}: n={n}, d={d:?}"))?;
        rows.push(format!("L={l} n={n} d={l}"));
    }
    Ok(rows.join(", "))
}

fn c11_performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 5000;
    let rows: Vec<BitVector> = (0..n).map(|_| BitVector::from_words(n, (0..n.div_ceil(64)).map(|_| rng.gen()).collect())).collect();
    let m = BitMatrix::from_rows(n, rows);
    let t = Instant::now();
    let r = rank(&m);
    let rank_time = t.elapsed();
    ensure(rank_time < Duration::from_secs(5), || format!("rank took {rank_time:?}"))?;
    ensure(r + 20 >= n, || format!("implausible rank {r}"))?;
    let tc = rep(2, 2);
    let (plan, _) = plan_fountain(&tc).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let proto = DenseProtocol::new(&tc, &plan, 26).map_err(|e| e.to_string())?;
    proto.run(5, RunOptions::default()).map_err(|e| e.to_string())?;
    let dense_time = t.elapsed();
    ensure(dense_time < Duration::from_secs(120), || format!("dense sequence took {dense_time:?}"))?;
    Ok(format!("rank {r} in {rank_time:?}; 24-qubit sequence in {dense_time:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("toric recovery", c1_toric),
        ("matched triple intersections", c2_matched_triples),
        ("commutation closure", c3_closure),
        ("cohomology invariance", c4_invariance),
        ("charge-parity reduction", c5_charge_parity),
        ("protocol ground truth", c6_protocol),
        ("path integral vs dense channel", c7_logical_channel),
        ("rate bookkeeping", c8_rate),
        ("entangler round trip", c9_entangler),
        ("distance scaling", c10_scaling),
        ("performance", c11_performance),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| (*s).to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match res {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
