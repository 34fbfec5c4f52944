mod oracles;

use oracles::gibbs::{
    enumerate_posterior, exact_instance, exact_posterior_tv, log_joint, max_conditional_error, Assignment,
};
use seedtopic::config::SamplerMode;

#[test]
fn conditionals_match_reference_as_written() {
    let e = max_conditional_error(SamplerMode::AsWritten);
    assert!(e <= 1e-12, "max relative gap {e}");
}

#[test]
fn conditionals_match_reference_derived() {
    let e = max_conditional_error(SamplerMode::Derived);
    assert!(e <= 1e-12, "max relative gap {e}");
}

#[test]
fn enumerated_posterior_is_a_distribution() {
    let p = enumerate_posterior(&exact_instance());
    assert_eq!(p.len(), 6usize.pow(4));
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(p.iter().all(|&x| x > 0.0));
}

// Swapping the two documents' roles must not change the joint when the
// instance is symmetric, a cheap check on the rising-factorial bookkeeping.
#[test]
fn log_joint_symmetric_under_document_swap() {
    let mut inst = exact_instance();
    inst.docs = vec![vec![0, 1], vec![0, 1]];
    inst.alpha[1] = inst.alpha[0].clone();
    inst.delta[1] = inst.delta[0];
    inst.pi[1] = inst.pi[0].clone();
    let a = Assignment {
        z: vec![vec![0, 1], vec![1, 1]],
        o: vec![vec![true, false], vec![false, true]],
        q: vec![vec![1, 0], vec![0, 0]],
    };
    let b = Assignment {
        z: vec![a.z[1].clone(), a.z[0].clone()],
        o: vec![a.o[1].clone(), a.o[0].clone()],
        q: vec![a.q[1].clone(), a.q[0].clone()],
    };
    assert!((log_joint(&inst, &a) - log_joint(&inst, &b)).abs() < 1e-12);
}

#[test]
fn derived_chain_matches_exact_posterior() {
    let tv = exact_posterior_tv(SamplerMode::Derived, 200_000, 31);
    assert!(tv < 0.05, "total variation {tv}");
}

// The as-written updates are not a sampler for this joint; the check
// should be able to tell.
#[test]
fn as_written_chain_is_detectably_off() {
    let tv = exact_posterior_tv(SamplerMode::AsWritten, 50_000, 31);
    assert!(tv > 0.1, "total variation {tv}");
}
