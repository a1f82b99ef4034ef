use boundlab::attn::AttentionKind;
use boundlab::commsim::*;
use boundlab::constructs::{build, ConstructionId, EqInstance, Params};

#[test]
fn protocol_matches_forward_pass() {
    for m in [5, 7, 9] {
        for id in [ConstructionId::FxTight, ConstructionId::FxSimple] {
            let c = build(id, &Params::m(m)).unwrap();
            let r = check_protocol(&c, u64::MAX).unwrap();
            assert!(r.passed(), "{r}");
            assert_eq!(r.correct, r.pairs);
            assert_eq!(r.bit_cost, 2 * c.spec.num_fmt.precision_bits());
        }
    }
}

#[test]
fn linear_protocol_sends_one_scalar() {
    let c = build(ConstructionId::FpLinear, &Params::te(4, 3)).unwrap();
    let r = check_protocol(&c, u64::MAX).unwrap();
    assert!(r.passed(), "{r}");
    assert_eq!(r.bit_cost, 7);
    let run = run_protocol(&c, &EqInstance::parse("0100000", "0100000").unwrap(), AttentionKind::Linear).unwrap();
    assert_eq!(run.l1, None);
    assert_eq!(run.l2.len(), 1);
    assert_eq!(run.bob_output, Some(1));
}

#[test]
fn single_run_transcript() {
    let c = build(ConstructionId::FxTight, &Params::m(5)).unwrap();
    let run = run_protocol(&c, &EqInstance::parse("01101", "01101").unwrap(), AttentionKind::Softmax).unwrap();
    assert_eq!(run.split, (0..7).collect::<Vec<_>>());
    assert!(run.l1.is_some());
    assert_eq!(run.bit_cost, 6);
    assert_eq!(run.bob_output, Some(1));
}

#[test]
fn protocol_errors() {
    let c = build(ConstructionId::FxTight, &Params::m(5)).unwrap();
    let inst = EqInstance::parse("01101", "01101").unwrap();
    assert_eq!(run_protocol_split(&c, &inst, AttentionKind::Softmax, &[1, 2, 3]), Err(CommError::SplitNotPrefix));
    assert_eq!(run_protocol_split(&c, &inst, AttentionKind::Softmax, &[0, 1]), Err(CommError::SplitNotPrefix));
    assert!(matches!(run_protocol(&c, &inst, AttentionKind::Linear), Err(CommError::KindMismatch { .. })));
    assert!(matches!(check_protocol(&c, 10), Err(CommError::BudgetExceeded(_))));
}

#[test]
fn fooling_set_sizes() {
    let r = enumerate_fooling(4, 2).unwrap();
    assert_eq!((r.enumerated, r.bound), (9, 4));
    assert!(r.formula_matches());
    let r = enumerate_fooling(6, 3).unwrap();
    assert_eq!((r.enumerated, r.bound), (42, 6));
    assert!(r.formula_matches());
    assert!(matches!(enumerate_fooling(6, 1), Err(CommError::BadParams(_))));
    assert!(matches!(enumerate_fooling(25, 3), Err(CommError::BudgetExceeded(_))));
}

#[test]
fn fooling_bound_equals_m_below_top_exponent() {
    for m in 3..=14 {
        for e in 2..m - 1 {
            let r = enumerate_fooling(m, e).unwrap();
            assert!(r.formula_matches(), "{r}");
            assert_eq!(r.bound as usize, m, "{r}");
        }
    }
}

/// With e = m − 1 the closed form is not an integer, so it cannot equal any count.
#[test]
fn fooling_formula_at_top_exponent_is_fractional() {
    for m in 3..=12 {
        let r = enumerate_fooling(m, m - 1).unwrap();
        assert_eq!(r.enumerated, 3 * (1 << (m - 2)) - 2);
        assert!(!r.formula_matches());
    }
}

#[test]
fn pigeonhole_witnesses() {
    let w = verify_pigeonhole(3, truncate_message).unwrap().unwrap();
    assert_eq!((w.y.as_str(), w.y_prime.as_str(), w.z.as_str()), ("000", "001", "001"));
    assert_eq!(w.message, "00");
    assert_eq!(verify_pigeonhole(6, |y| y.to_vec()).unwrap(), None);
    let w = verify_pigeonhole(1, truncate_message).unwrap().unwrap();
    assert_eq!((w.y.as_str(), w.y_prime.as_str(), w.message.as_str()), ("0", "1", ""));
    assert!(verify_pigeonhole(21, truncate_message).is_err());
}

/// The closed form over the full range 2 ≤ e < m ≤ 16. Fails at e = m − 1; run with --ignored.
#[test]
#[ignore]
fn fooling_formula_full_range() {
    for m in 3..=16 {
        for e in 2..m {
            let r = enumerate_fooling(m, e).unwrap();
            assert!(r.formula_matches() && r.bound as usize == m, "{r}");
        }
    }
}
