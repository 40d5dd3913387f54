use twistq::codes::{hamming7, repetition_cyclic, repetition_open};
use twistq::complex::validate;
use twistq::io::{parse_alist, write_alist};
use twistq::metrics::{code_report, rate_report, DEFAULT_BUDGET};
use twistq::operators::{commutation_closure, twisted_stabilizers};
use twistq::protocol::{certify, plan_fountain, run_ledger, Stage};
use twistq::skeleton::{intersection_tensor, stokes_check, triple_code, Adjacency, Copy3, CupRules};

#[test]
fn alist_round_trip_feeds_the_builder() {
    let h = repetition_cyclic(3);
    let back = parse_alist(&write_alist(&h)).unwrap();
    assert_eq!(back, h);
    let a = triple_code(&h, &h, CupRules::default()).unwrap();
    let b = triple_code(&back, &back, CupRules::default()).unwrap();
    assert_eq!(serde_json::to_string(&a.descriptor()).unwrap(), serde_json::to_string(&b.descriptor()).unwrap());
}

#[test]
fn mixed_factors_build_and_verify() {
    for (hx, hy) in [(repetition_cyclic(3), hamming7()), (repetition_open(3), repetition_cyclic(2))] {
        let tc = triple_code(&hx, &hy, CupRules::default()).unwrap();
        for c in Copy3::ALL {
            assert!(validate(tc.complex(c)).ok());
        }
        assert!(stokes_check(&tc, 30, 2).ok());
        let r = rate_report(&tc);
        assert_eq!(r.k_tilde, (r.k_red + r.k_blue).saturating_sub(r.gamma_count));
    }
}

#[test]
fn symmetrized_adjacency_is_a_negative_control() {
    let h = repetition_cyclic(2);
    let tc = triple_code(&h, &h, CupRules::with_adjacency(Adjacency::Symmetrized)).unwrap();
    assert!(!commutation_closure(&twisted_stabilizers(&tc)).ok());
    assert!(!stokes_check(&tc, 60, 1).ok());
}

#[test]
fn ledger_tracks_all_four_stages() {
    let h = repetition_cyclic(3);
    let tc = triple_code(&h, &h, CupRules::default()).unwrap();
    let (plan, cert) = plan_fountain(&tc).unwrap();
    assert!(cert.ok());
    assert_eq!(certify(&plan, &intersection_tensor(&tc)), cert);
    let run = run_ledger(&tc, &plan, None, 8).unwrap();
    let stages: Vec<Stage> = run.stages.iter().map(|s| s.stage).collect();
    assert_eq!(stages, vec![Stage::S1, Stage::S2, Stage::S3, Stage::S4]);
    assert_eq!(run.transcript.rho.len(), tc.green_h0.dim());
}

#[test]
fn green_copy_reports_spurious_loops() {
    let h = repetition_cyclic(3);
    let tc = triple_code(&h, &h, CupRules::default()).unwrap();
    let rep = code_report(&tc, DEFAULT_BUDGET, 4);
    let green = rep.copies.iter().find(|c| c.copy == Copy3::Green).unwrap();
    assert!(green.classes.iter().any(|c| c.loop_summand));
    for cl in &green.classes {
        let light = [cl.z_weight.weight(), cl.x_weight.weight()].into_iter().flatten().any(|w| w <= 4);
        assert_eq!(cl.spurious, light);
    }
}
