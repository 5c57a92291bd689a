mod common;

use common::*;

#[test]
fn policy_loss_gradients_match_central_differences() {
    for seed in 0..25 {
        let err = policy_gradient_error(seed);
        assert!(err <= GRAD_TOLERANCE, "seed {seed}: relative error {err:e}");
    }
}

#[test]
fn critic_loss_gradients_match_central_differences() {
    for seed in 0..25 {
        let err = critic_gradient_error(seed);
        assert!(err <= GRAD_TOLERANCE, "seed {seed}: relative error {err:e}");
    }
}

#[test]
fn a_wrong_gradient_is_caught() {
    // the checker must flag a loss whose reported gradient is off
    let case = PolicyCase::random(3);
    let err = worst_gradient_error(&case.net.params, FD_STEP, |v, g| {
        let l = case.loss(v, None);
        if let Some(g) = g {
            case.loss(v, Some(g));
            g[0] += 1e-2;
        }
        l
    });
    assert!(err > GRAD_TOLERANCE);
}
