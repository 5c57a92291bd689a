//! The multi-agent UAV resource-allocation game.
//!
//! Each UAV is an agent. At every step it observes the EDs it currently
//! serves, picks an (SF, TP, BW) triple per served ED, and all agents
//! receive the same team reward. Between steps the EDs move and the
//! association is recomputed from scratch.

mod observation;
mod radio;
pub mod reward;
pub mod trace;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use observation::{Observation, OBS_FEATURES};
pub use radio::{ActionMode, AgentAction, RadioAssignment, RadioSets};
pub use reward::{RewardTerms, RewardWeights};

use crate::association::{channel_aware_match, AssociationState};
use crate::channel::{self, LinkMetrics, SnrThresholdTable};
use crate::config::ScenarioConfig;
use crate::mobility::{self, EdKinematics, MobilityParams};
use crate::power;
use crate::rng::{stream_rng, Stream};
use crate::{dist2, Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavPosition {
    pub xy: Vec2,
    pub altitude_m: f64,
}

/// Full system state `s[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub eds: Vec<EdKinematics>,
    pub uavs: Vec<UavPosition>,
    pub association: AssociationState,
    pub radio: Vec<RadioAssignment>,
    /// `gains[v][u]` at the current positions.
    pub gains: Vec<Vec<f64>>,
    pub t: usize,
}

impl WorldState {
    pub fn ed_positions(&self) -> Vec<Vec2> {
        self.eds.iter().map(|k| k.position).collect()
    }

    pub fn uav_xy(&self) -> Vec<Vec2> {
        self.uavs.iter().map(|u| u.xy).collect()
    }
}

/// Link evaluation of one joint radio configuration at a fixed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEval {
    /// Metrics of every associated ED; `None` for unassociated EDs.
    pub links: Vec<Option<LinkMetrics>>,
    pub energy: power::EnergyBreakdown,
    pub success_rate: f64,
    pub mean_margin_db: f64,
    pub margin_term: f64,
    /// Transmit power of associated EDs in watts (plus hover power when the
    /// reward is configured to include it).
    pub p_total_w: f64,
    pub terms: RewardTerms,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Step index the reward refers to.
    pub t: usize,
    pub assignment: Vec<Option<usize>>,
    pub radio: Vec<RadioAssignment>,
    pub eval: StepEval,
    /// Running sum of per-step EE over the episode.
    pub episode_ee: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub observations: Vec<Observation>,
    /// Team reward, identical for every agent.
    pub rewards: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Evenly spaced UAV x-positions `area·(u+1)/(U+1)` on the horizontal
/// center line.
pub fn uav_layout(num_uavs: usize, area_side: f64, altitude_m: f64) -> Vec<UavPosition> {
    (0..num_uavs)
        .map(|u| UavPosition {
            xy: [
                area_side * (u + 1) as f64 / (num_uavs + 1) as f64,
                area_side / 2.0,
            ],
            altitude_m,
        })
        .collect()
}

pub struct Env {
    cfg: ScenarioConfig,
    mobility: MobilityParams,
    thresholds: SnrThresholdTable,
    hover_w: f64,
    quota: usize,
    /// Gain at 1 m horizontal distance, used to normalize gain features.
    gain_ref: f64,
    state: WorldState,
    mobility_rng: ChaCha8Rng,
    episode_ee: f64,
}

impl Env {
    /// Builds an environment and resets it with `seed`.
    pub fn new(cfg: ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let thresholds = match &cfg.snr_table {
            Some(p) => SnrThresholdTable::load(p)?,
            None => SnrThresholdTable::default(),
        };
        for &sf in &cfg.radio.sf_set {
            for &bw in &cfg.radio.bw_set_khz {
                thresholds.threshold_db(sf, bw)?;
            }
        }
        let hover_w = power::hover_power_w(&cfg.hover)?;
        let mobility = cfg.mobility_params();
        let quota = cfg.quota();
        let gain_ref = channel::gain_at(1.0, &cfg.channel);
        let uavs = uav_layout(cfg.world.num_uavs, cfg.world.area_side_m, cfg.channel.uav_altitude_m);
        let num_eds = cfg.world.num_eds;
        let state = WorldState {
            eds: Vec::new(),
            association: AssociationState::empty(num_eds, uavs.len(), quota, cfg.world.comm_range_m),
            uavs,
            radio: vec![RadioAssignment::default(); num_eds],
            gains: Vec::new(),
            t: 0,
        };
        let mut env = Self {
            cfg,
            mobility,
            thresholds,
            hover_w,
            quota,
            gain_ref,
            state,
            mobility_rng: stream_rng(seed, Stream::Mobility),
            episode_ee: 0.0,
        };
        env.reset(seed);
        Ok(env)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn num_agents(&self) -> usize {
        self.state.uavs.len()
    }

    pub fn quota(&self) -> usize {
        self.quota
    }

    pub fn hover_power_w(&self) -> f64 {
        self.hover_w
    }

    pub fn thresholds(&self) -> &SnrThresholdTable {
        &self.thresholds
    }

    pub fn episode_ee(&self) -> f64 {
        self.episode_ee
    }

    /// Flattened observation width `Λ_max·4`.
    pub fn observation_width(&self) -> usize {
        self.quota * OBS_FEATURES
    }

    /// Width of [`Env::global_state_vector`].
    pub fn global_state_width(&self) -> usize {
        let v = self.cfg.world.num_eds;
        v * (7 + self.cfg.world.num_uavs) + 1
    }

    /// Starts a new episode: uniform ED placement, lowest-index radio
    /// configuration, fresh association.
    pub fn reset(&mut self, seed: u64) -> Vec<Observation> {
        let mut placement = stream_rng(seed, Stream::Placement);
        self.mobility_rng = stream_rng(seed, Stream::Mobility);
        self.state.eds = (0..self.cfg.world.num_eds)
            .map(|_| mobility::spawn(&self.mobility, &mut placement))
            .collect();
        self.state.radio = vec![RadioAssignment::default(); self.cfg.world.num_eds];
        self.state.t = 0;
        self.episode_ee = 0.0;
        self.rematch();
        self.observations()
    }

    fn rematch(&mut self) {
        let s = &mut self.state;
        let uav_xy: Vec<Vec2> = s.uavs.iter().map(|u| u.xy).collect();
        s.gains = s
            .eds
            .iter()
            .map(|k| {
                uav_xy
                    .iter()
                    .map(|&u| channel::gain_at(dist2(k.position, u), &self.cfg.channel))
                    .collect()
            })
            .collect();
        let ed_xy: Vec<Vec2> = s.eds.iter().map(|k| k.position).collect();
        s.association =
            channel_aware_match(&ed_xy, &uav_xy, &s.gains, self.quota, self.cfg.world.comm_range_m);
    }

    /// Local observation of every agent at the current state.
    pub fn observations(&self) -> Vec<Observation> {
        (0..self.num_agents()).map(|u| self.observe(u)).collect()
    }

    pub fn observe(&self, uav: usize) -> Observation {
        let s = &self.state;
        let served = s.association.served_by(uav);
        let rows = served
            .iter()
            .map(|&v| {
                let p = s.eds[v].position;
                [p[0], p[1], dist2(p, s.uavs[uav].xy), s.gains[v][uav]]
            })
            .collect();
        Observation::new(
            rows,
            self.quota,
            [
                self.cfg.world.area_side_m,
                self.cfg.world.area_side_m,
                self.cfg.world.comm_range_m,
                self.gain_ref,
            ],
        )
    }

    /// Centralized-critic input: normalized ED positions (2V), distance and
    /// gain to the serving UAV (2V, zeros when unassociated), association
    /// one-hots (V·U) and normalized radio indices (3V), all in ED order,
    /// then the fraction of the episode still to run. Without the last
    /// feature the critic cannot tell how much discounted reward is left
    /// before the episode cut.
    pub fn global_state_vector(&self) -> Vec<f64> {
        let s = &self.state;
        let area = self.cfg.world.area_side_m;
        let v_count = s.eds.len();
        let mut out = Vec::with_capacity(self.global_state_width());
        for k in &s.eds {
            out.push(k.position[0] / area);
            out.push(k.position[1] / area);
        }
        for (v, k) in s.eds.iter().enumerate() {
            match s.association.assignment[v] {
                Some(u) => {
                    out.push(dist2(k.position, s.uavs[u].xy) / self.cfg.world.comm_range_m);
                    out.push(s.gains[v][u] / self.gain_ref);
                }
                None => out.extend([0.0, 0.0]),
            }
        }
        for v in 0..v_count {
            for u in 0..s.uavs.len() {
                out.push(f64::from(u8::from(s.association.assignment[v] == Some(u))));
            }
        }
        let [n, j, m] = self.cfg.radio.sizes();
        let scale = |i: usize, len: usize| if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };
        for r in &s.radio {
            out.push(scale(r.sf, n));
            out.push(scale(r.tp, j));
            out.push(scale(r.bw, m));
        }
        let horizon = self.cfg.world.horizon as f64;
        out.push((horizon - s.t as f64) / horizon);
        out
    }

    fn check_actions(&self, joint: &[AgentAction]) -> Result<()> {
        if joint.len() != self.num_agents() {
            return Err(Error::Action(format!(
                "expected {} agent actions, got {}",
                self.num_agents(),
                joint.len()
            )));
        }
        let needed = match self.cfg.world.action_mode {
            ActionMode::PerEd => self.quota,
            ActionMode::Shared => 1,
        };
        for (u, a) in joint.iter().enumerate() {
            if a.slots.len() < needed {
                return Err(Error::Action(format!(
                    "agent {u}: {} slots, need {needed}",
                    a.slots.len()
                )));
            }
            if let Some(bad) = a.slots.iter().find(|s| !self.cfg.radio.contains(**s)) {
                return Err(Error::Action(format!("agent {u}: index out of range {bad:?}")));
            }
        }
        Ok(())
    }

    /// Radio configuration after applying `joint` to the served EDs.
    pub fn decode_actions(&self, joint: &[AgentAction]) -> Result<Vec<RadioAssignment>> {
        self.check_actions(joint)?;
        let mut radio = self.state.radio.clone();
        for (u, action) in joint.iter().enumerate() {
            for (i, v) in self.state.association.served_by(u).into_iter().enumerate() {
                radio[v] = match self.cfg.world.action_mode {
                    ActionMode::PerEd => action.slots[i],
                    ActionMode::Shared => action.slots[0],
                };
            }
        }
        Ok(radio)
    }

    /// Evaluates links, EE and reward for `radio` at the current state
    /// without advancing time.
    pub fn evaluate(&self, radio: &[RadioAssignment]) -> StepEval {
        let s = &self.state;
        let sets = &self.cfg.radio;
        let ch = &self.cfg.channel;
        let num_eds = s.eds.len();
        let num_uavs = s.uavs.len();

        let mut snr = vec![0.0; num_eds];
        for v in 0..num_eds {
            if let Some(u) = s.association.assignment[v] {
                snr[v] = channel::snr_linear(sets.tp_dbm(radio[v]), s.gains[v][u], ch.noise_dbm);
            }
        }

        let mut links = vec![None; num_eds];
        let mut rates = vec![0.0; num_uavs];
        let mut uplink = vec![0.0; num_uavs];
        let mut margins = Vec::new();
        let mut interferers = Vec::new();
        for v in 0..num_eds {
            let Some(u) = s.association.assignment[v] else {
                continue;
            };
            interferers.clear();
            for w in 0..num_eds {
                if w == v || s.association.assignment[w].is_none() || radio[w].sf != radio[v].sf {
                    continue;
                }
                if ch.same_bw_interference_only && radio[w].bw != radio[v].bw {
                    continue;
                }
                interferers.push(snr[w]);
            }
            let d = dist2(s.eds[v].position, s.uavs[u].xy);
            let (theta, p_los, loss) = channel::path_loss_parts(d, ch);
            let sinr = channel::sinr_linear(snr[v], &interferers);
            let bw_khz = sets.bw_khz(radio[v]);
            let rate = channel::rate_bps(f64::from(bw_khz) * 1e3, sinr);
            let thr = self
                .thresholds
                .threshold_db(sets.sf(radio[v]), bw_khz)
                .expect("thresholds checked at construction");
            let margin = channel::linear_to_db(snr[v]) - thr;
            margins.push(margin);
            rates[u] += rate;
            uplink[u] += channel::dbm_to_watts(sets.tp_dbm(radio[v]));
            links[v] = Some(LinkMetrics {
                elevation_deg: theta,
                p_los,
                path_loss_db: loss,
                gain_linear: s.gains[v][u],
                snr_linear: snr[v],
                sinr_linear: sinr,
                rate_bps: rate,
                margin_db: margin,
            });
        }

        let w = &self.cfg.reward;
        let success = reward::success_rate(&margins);
        let mean_margin = if margins.is_empty() {
            0.0
        } else {
            margins.iter().sum::<f64>() / margins.len() as f64
        };
        let margin_term = reward::margin_shaping(&margins, w.margin_cap_db, w.negative_margin_scale);
        let mut p_total: f64 = uplink.iter().sum();
        if w.include_hover_in_power {
            p_total += self.hover_w * num_uavs as f64;
        }
        let energy = power::EnergyBreakdown::new(rates, uplink, self.hover_w);
        let terms = reward::compose(w, energy.ee_bits_per_joule, success, margin_term, p_total);
        StepEval {
            links,
            success_rate: success,
            mean_margin_db: mean_margin,
            margin_term,
            p_total_w: p_total,
            reward: terms.total(),
            terms,
            energy,
        }
    }

    /// Applies the joint action, scores the step, then moves the EDs and
    /// re-runs the association for the next step.
    pub fn step(&mut self, joint: &[AgentAction]) -> Result<StepOutcome> {
        if self.state.t >= self.cfg.world.horizon {
            return Err(Error::Action("episode already finished; call reset".into()));
        }
        let radio = self.decode_actions(joint)?;
        let eval = self.evaluate(&radio);
        self.state.radio = radio;
        self.episode_ee += eval.energy.ee_bits_per_joule;

        let info = StepInfo {
            t: self.state.t,
            assignment: self.state.association.assignment.clone(),
            radio: self.state.radio.clone(),
            episode_ee: self.episode_ee,
            eval,
        };

        for k in &mut self.state.eds {
            *k = mobility::advance(k, &self.mobility, &mut self.mobility_rng);
        }
        self.state.t += 1;
        self.rematch();

        let reward = info.eval.reward;
        Ok(StepOutcome {
            observations: self.observations(),
            rewards: vec![reward; self.num_agents()],
            reward,
            done: self.state.t == self.cfg.world.horizon,
            info,
        })
    }
}

#[cfg(test)]
mod tests;
