/// Generalized advantage estimation over one time-ordered sequence.
///
/// `dones[t]` marks that the episode ended after step `t`, which cuts both
/// the bootstrap and the advantage recursion there. `bootstrap` is the
/// value of the state following the last step. Returns
/// `(advantages, value_targets)` with `targets = advantages + values`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    discount: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "GAE inputs must align");
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { values[t + 1] } else { bootstrap };
        let delta = rewards[t] + discount * live * next_value - values[t];
        running = delta + discount * lambda * live * running;
        adv[t] = running;
    }
    let targets = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, targets)
}

/// Shifts and scales to zero mean and unit (population) variance. A batch
/// with no spread is only centered.
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for x in xs.iter_mut() {
        *x -= mean;
        if std > 1e-12 {
            *x /= std + 1e-8;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undiscounted_monte_carlo() {
        let r = [1.0, 2.0, 3.0, 4.0];
        let v = [0.5, -1.0, 2.0, 0.0];
        let (adv, targets) = compute_gae(&r, &v, &[false, false, false, true], 99.0, 1.0, 1.0);
        let returns = [10.0, 9.0, 7.0, 4.0];
        for t in 0..4 {
            assert!((adv[t] - (returns[t] - v[t])).abs() < 1e-12);
            assert!((targets[t] - returns[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_zero_is_one_step_td() {
        let r = [1.0, -0.5, 2.0];
        let v = [0.3, 0.7, -0.2];
        let boot = 1.5;
        let g = 0.9;
        let (adv, _) = compute_gae(&r, &v, &[false; 3], boot, g, 0.0);
        let next = [0.7, -0.2, 1.5];
        for t in 0..3 {
            assert!((adv[t] - (r[t] + g * next[t] - v[t])).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_recursion() {
        let (adv, targets) = compute_gae(&[1.0; 3], &[0.0; 3], &[false, false, true], 0.0, 0.5, 1.0);
        assert_eq!(adv, vec![1.75, 1.5, 1.0]);
        assert_eq!(targets, adv);
    }

    #[test]
    fn done_cuts_bootstrap() {
        let (adv, _) = compute_gae(&[0.0, 0.0], &[0.0, 0.0], &[true, false], 10.0, 0.9, 0.95);
        assert_eq!(adv[0], 0.0);
        assert!((adv[1] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn normalization() {
        let mut x = vec![1.0, 2.0, 3.0, 4.0];
        normalize(&mut x);
        let mean: f64 = x.iter().sum::<f64>() / 4.0;
        let var: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-6);
        let mut flat = vec![3.0, 3.0];
        normalize(&mut flat);
        assert_eq!(flat, vec![0.0, 0.0]);
    }
}
