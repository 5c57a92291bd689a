use super::*;
use crate::env::trace::{read_trace, TraceHeader, TraceRecord, TraceWriter, TRACE_SCHEMA, TRACE_VERSION};

fn cfg(num_eds: usize, num_uavs: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.world.num_eds = num_eds;
    c.world.num_uavs = num_uavs;
    c
}

fn default_joint(env: &Env) -> Vec<AgentAction> {
    vec![AgentAction::uniform(env.quota(), RadioAssignment::default()); env.num_agents()]
}

/// Moves ED `v` and recomputes gains and association.
fn place(env: &mut Env, positions: &[Vec2]) {
    for (k, p) in env.state.eds.iter_mut().zip(positions) {
        k.position = *p;
    }
    env.rematch();
}

#[test]
fn uavs_are_evenly_spaced_on_the_centre_line() {
    let env = Env::new(cfg(10, 2), 0).unwrap();
    let xs: Vec<Vec2> = env.state().uav_xy();
    assert!((xs[0][0] - 1000.0 / 3.0).abs() < 1e-12);
    assert!((xs[1][0] - 2000.0 / 3.0).abs() < 1e-12);
    assert!(xs.iter().all(|p| p[1] == 500.0));
    assert!(env.state().uavs.iter().all(|u| u.altitude_m == 90.0));
}

#[test]
fn reset_defaults_and_determinism() {
    let a = Env::new(cfg(10, 2), 42).unwrap();
    let b = Env::new(cfg(10, 2), 42).unwrap();
    assert_eq!(a.state(), b.state());
    assert_eq!(a.observations(), b.observations());
    assert!(a.state().radio.iter().all(|r| *r == RadioAssignment::default()));
    assert_eq!(a.state().t, 0);
    let c = Env::new(cfg(10, 2), 43).unwrap();
    assert_ne!(a.state().eds, c.state().eds);
    for k in &a.state().eds {
        assert!(k.position.iter().all(|x| (0.0..=1000.0).contains(x)));
    }
}

#[test]
fn trajectory_is_reproducible_under_fixed_actions() {
    let run = || {
        let mut env = Env::new(cfg(12, 3), 7).unwrap();
        let mut rewards = Vec::new();
        for _ in 0..40 {
            let joint = default_joint(&env);
            rewards.push(env.step(&joint).unwrap().reward.to_bits());
        }
        (rewards, env.state().clone())
    };
    assert_eq!(run(), run());
}

#[test]
fn no_eds_gives_zero_observations_and_zero_reward() {
    let mut env = Env::new(cfg(0, 2), 1).unwrap();
    for o in env.observations() {
        assert_eq!(o.active, 0);
        assert!(o.normalized.iter().all(|x| *x == 0.0));
        assert!(o.rows.iter().all(|r| r.iter().all(|x| *x == 0.0)));
    }
    assert_eq!(env.global_state_vector(), vec![1.0]);
    let out = env.step(&default_joint(&env)).unwrap();
    assert_eq!(out.reward, 0.0);
    assert_eq!(out.info.eval.energy.ee_bits_per_joule, 0.0);
}

#[test]
fn all_eds_out_of_range_gives_zero_reward() {
    let mut c = cfg(3, 1);
    c.world.comm_range_m = 10.0;
    let mut env = Env::new(c, 3).unwrap();
    place(&mut env, &[[0.0, 0.0], [1000.0, 1000.0], [0.0, 1000.0]]);
    assert!(env.state().association.assignment.iter().all(Option::is_none));
    let e = env.evaluate(&env.state().radio.clone());
    assert_eq!(e.energy.sum_rate_bps.iter().sum::<f64>(), 0.0);
    assert_eq!(e.reward, 0.0);
    assert_eq!(e.p_total_w, 0.0);
}

#[test]
fn every_agent_gets_the_same_reward() {
    let mut env = Env::new(cfg(20, 4), 5).unwrap();
    let sets = env.config().radio.clone();
    for t in 0..30 {
        let joint: Vec<AgentAction> = (0..4)
            .map(|u| AgentAction::uniform(env.quota(), sets.decode((t * 7 + u * 13) % sets.combos())))
            .collect();
        let out = env.step(&joint).unwrap();
        assert_eq!(out.rewards.len(), 4);
        assert!(out.rewards.iter().all(|r| r.to_bits() == out.reward.to_bits()));
    }
}

#[test]
fn padded_rows_are_exactly_zero() {
    let env = Env::new(cfg(7, 2), 11).unwrap();
    for (u, o) in env.observations().into_iter().enumerate() {
        assert_eq!(o.slots(), env.quota());
        assert_eq!(o.active, env.state().association.served_by(u).len());
        for row in &o.rows[o.active..] {
            assert_eq!(*row, [0.0; OBS_FEATURES]);
        }
        assert!(o.normalized[o.active * OBS_FEATURES..].iter().all(|x| *x == 0.0));
        assert_eq!(o.mask().iter().filter(|m| **m).count(), o.active);
    }
}

#[test]
fn observation_rows_hold_raw_features() {
    let mut env = Env::new(cfg(1, 1), 0).unwrap();
    place(&mut env, &[[600.0, 500.0]]);
    let o = env.observe(0);
    let g = channel::gain_at(100.0, &env.config().channel);
    assert_eq!(o.rows[0], [600.0, 500.0, 100.0, g]);
    assert_eq!(o.normalized[..4], [0.6, 0.5, 100.0 / 800.0, g / env.gain_ref]);
}

#[test]
fn episode_lasts_exactly_horizon_steps() {
    let mut env = Env::new(cfg(10, 2), 9).unwrap();
    let mut dones = 0;
    let mut steps = 0;
    loop {
        let out = env.step(&default_joint(&env)).unwrap();
        steps += 1;
        dones += usize::from(out.done);
        if out.done {
            break;
        }
    }
    assert_eq!(steps, 150);
    assert_eq!(dones, 1);
    assert!(matches!(env.step(&default_joint(&env)), Err(Error::Action(_))));
    env.reset(9);
    assert!(env.step(&default_joint(&env)).is_ok());
}

#[test]
fn ee_only_weights_reduce_reward_to_scaled_ee() {
    let mut c = cfg(10, 2);
    c.reward.w_success = 0.0;
    c.reward.w_margin = 0.0;
    c.reward.w_power = 0.0;
    let mut env = Env::new(c, 4).unwrap();
    for _ in 0..20 {
        let joint = default_joint(&env);
        let out = env.step(&joint).unwrap();
        let e = &out.info.eval.energy;
        let ee = power::system_ee(&e.sum_rate_bps, &e.uplink_power_w, env.hover_power_w());
        assert_eq!(out.reward, 4e-4 * ee);
    }
}

#[test]
fn one_ed_one_uav_golden_reward() {
    let mut env = Env::new(cfg(1, 1), 0).unwrap();
    place(&mut env, &[[600.0, 500.0]]);
    // SF9, 8 dBm, 250 kHz
    let a = RadioAssignment { sf: 2, tp: 2, bw: 1 };
    let e = env.evaluate(&[a]);
    let link = e.links[0].unwrap();
    assert!((link.path_loss_db - 73.88896443102863).abs() < 1e-9);
    assert!((link.snr_linear / 257693.55503398992 - 1.0).abs() < 1e-12);
    assert_eq!(link.sinr_linear, link.snr_linear);
    assert!((link.margin_db - 68.61103556897137).abs() < 1e-9);
    assert!((e.energy.ee_bits_per_joule - 11170.59290606624).abs() < 1e-6);
    assert_eq!(e.success_rate, 1.0);
    assert_eq!(e.margin_term, 10.0);
    assert!((e.p_total_w - 10f64.powf(0.8) / 1000.0).abs() < 1e-15);
    assert!((e.reward - 19.46817406669205).abs() < 1e-9);
}

#[test]
fn shared_sf_lowers_sinr() {
    let mut env = Env::new(cfg(2, 1), 0).unwrap();
    place(&mut env, &[[450.0, 500.0], [560.0, 520.0]]);
    let same = env.evaluate(&[RadioAssignment { sf: 0, tp: 4, bw: 2 }, RadioAssignment { sf: 0, tp: 0, bw: 2 }]);
    let apart = env.evaluate(&[RadioAssignment { sf: 0, tp: 4, bw: 2 }, RadioAssignment { sf: 3, tp: 0, bw: 2 }]);
    for v in 0..2 {
        let (s, d) = (same.links[v].unwrap(), apart.links[v].unwrap());
        assert_eq!(d.sinr_linear, d.snr_linear);
        assert!(s.sinr_linear < d.sinr_linear);
        assert_eq!(s.snr_linear, d.snr_linear);
    }
}

#[test]
fn interference_crosses_uavs() {
    let mut env = Env::new(cfg(2, 2), 0).unwrap();
    let [a, b] = [env.state().uavs[0].xy, env.state().uavs[1].xy];
    place(&mut env, &[a, b]);
    assert_eq!(env.state().association.assignment, vec![Some(0), Some(1)]);
    let e = env.evaluate(&[RadioAssignment::default(); 2]);
    let l0 = e.links[0].unwrap();
    let snr1 = e.links[1].unwrap().snr_linear;
    assert!((l0.sinr_linear - l0.snr_linear / (snr1 + 1.0)).abs() <= 1e-12 * l0.sinr_linear);
}

#[test]
fn global_state_layout() {
    let env = Env::new(cfg(1, 1), 0).unwrap();
    assert_eq!(env.global_state_vector().len(), 2 + 2 + 1 + 3 + 1);
    let mut env = Env::new(cfg(10, 3), 0).unwrap();
    assert_eq!(env.global_state_vector().len(), env.global_state_width());
    assert_eq!(env.global_state_width(), 10 * (7 + 3) + 1);
    // the last feature counts down the remaining episode fraction
    assert_eq!(env.global_state_vector().last(), Some(&1.0));
    env.step(&default_joint(&env)).unwrap();
    let left = *env.global_state_vector().last().unwrap();
    assert!((left - 149.0 / 150.0).abs() < 1e-15);
}

#[test]
fn invalid_actions_are_rejected() {
    let mut env = Env::new(cfg(4, 2), 0).unwrap();
    let mut joint = default_joint(&env);
    joint[1].slots[0].sf = 6;
    assert!(matches!(env.step(&joint), Err(Error::Action(_))));
    let short = vec![AgentAction::uniform(env.quota(), RadioAssignment::default())];
    assert!(matches!(env.step(&short), Err(Error::Action(_))));
    let narrow = vec![AgentAction { slots: vec![] }; 2];
    assert!(matches!(env.step(&narrow), Err(Error::Action(_))));
    // a rejected step leaves the state untouched
    assert_eq!(env.state().t, 0);
}

#[test]
fn invalid_world_is_a_config_error() {
    assert!(matches!(Env::new(cfg(5, 0), 0), Err(Error::Config(_))));
    let mut c = cfg(5, 1);
    c.world.horizon = 0;
    assert!(matches!(Env::new(c, 0), Err(Error::Config(_))));
}

#[test]
fn slot_i_configures_the_ith_served_ed() {
    let mut env = Env::new(cfg(6, 2), 21).unwrap();
    let sets = env.config().radio.clone();
    let joint: Vec<AgentAction> = (0..2)
        .map(|u| AgentAction {
            slots: (0..env.quota()).map(|i| sets.decode(u * 40 + i * 5 + 1)).collect(),
        })
        .collect();
    let radio = env.decode_actions(&joint).unwrap();
    for u in 0..2 {
        for (i, v) in env.state().association.served_by(u).into_iter().enumerate() {
            assert_eq!(radio[v], joint[u].slots[i]);
        }
    }
    let out = env.step(&joint).unwrap();
    assert_eq!(out.info.radio, radio);
}

#[test]
fn shared_mode_applies_one_triple_per_uav() {
    let mut c = cfg(6, 2);
    c.world.action_mode = ActionMode::Shared;
    let env = Env::new(c, 21).unwrap();
    let a = RadioAssignment { sf: 5, tp: 4, bw: 0 };
    let radio = env.decode_actions(&[AgentAction { slots: vec![a] }, AgentAction { slots: vec![a] }]).unwrap();
    for v in 0..6 {
        if env.state().association.assignment[v].is_some() {
            assert_eq!(radio[v], a);
        }
    }
}

#[test]
fn trace_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let mut env = Env::new(cfg(5, 2), 3).unwrap();
    let header = TraceHeader {
        schema: TRACE_SCHEMA.into(),
        version: TRACE_VERSION,
        seed: 3,
        num_eds: 5,
        num_uavs: 2,
        horizon: 150,
        policy: "fixed".into(),
    };
    let mut w = TraceWriter::create(&path, &header).unwrap();
    let mut written = Vec::new();
    for _ in 0..5 {
        let out = env.step(&default_joint(&env)).unwrap();
        let rec = TraceRecord::from_info(&out.info, &env.config().radio);
        w.write(&rec).unwrap();
        written.push(rec);
    }
    w.finish().unwrap();
    let (h, recs) = read_trace(&path).unwrap();
    assert_eq!(h, header);
    assert_eq!(recs, written);
}
