//! Gauss–Markov mobility for ground end devices.
//!
//! Each device carries a position, a velocity and an asymptotic mean
//! velocity. One step applies
//!
//! ```text
//! v[t] = m·v[t-1] + (1-m)·v̄ + σ·sqrt(1-m²)·w,   w ~ N(0, I₂)
//! p[t] = p[t-1] + v[t]·Δt
//! ```
//!
//! followed by a speed clamp, reflection at the square's walls and an
//! occasional uniform resampling of v̄. The step functions take their
//! randomness as arguments so a trajectory is a pure function of
//! `(state, params, draws)`; [`advance`] is the RNG-driven wrapper.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{norm2, Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdKinematics {
    pub position: Vec2,
    pub velocity: Vec2,
    pub mean_velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityParams {
    /// Temporal correlation of the velocity process, in `[0, 1]`.
    pub memory: f64,
    /// Randomness level (standard deviation scale) of the velocity noise.
    pub randomness: f64,
    /// Step duration, seconds.
    pub dt: f64,
    /// Maximum speed, m/s.
    pub v_max: f64,
    /// Per-step probability of drawing a fresh mean velocity.
    pub resample_prob: f64,
    /// Side of the square deployment area, meters. Filled in from the
    /// world section of the scenario config.
    #[serde(skip, default = "default_area_side")]
    pub area_side: f64,
    /// Magnitude of the initial mean velocity; its direction is random.
    pub initial_mean_speed: f64,
}

fn default_area_side() -> f64 {
    1000.0
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            memory: 0.85,
            randomness: 0.5,
            dt: 0.5,
            v_max: 1.0,
            resample_prob: 0.01,
            area_side: 1000.0,
            initial_mean_speed: 0.005,
        }
    }
}

impl MobilityParams {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.memory)
            && self.randomness >= 0.0
            && self.dt > 0.0
            && self.v_max > 0.0
            && (0.0..=1.0).contains(&self.resample_prob)
            && self.area_side > 0.0
            && self.initial_mean_speed >= 0.0
            && self.initial_mean_speed <= self.v_max;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid mobility parameters: {self:?}")))
        }
    }
}

/// Rescales `v` onto the disc of radius `v_max`, keeping its direction.
pub fn clamp_speed(v: Vec2, v_max: f64) -> Vec2 {
    let n = norm2(v);
    if n <= v_max {
        return v;
    }
    let s = v_max / n;
    let mut out = [v[0] * s, v[1] * s];
    // rounding can leave the norm one ulp above the limit
    while norm2(out) > v_max {
        out = [out[0] * (1.0 - f64::EPSILON), out[1] * (1.0 - f64::EPSILON)];
    }
    out
}

/// Gauss–Markov velocity update with the speed clamp applied afterwards.
pub fn step_velocity(kin: &EdKinematics, params: &MobilityParams, noise: Vec2) -> Vec2 {
    let m = params.memory;
    let spread = params.randomness * (1.0 - m * m).max(0.0).sqrt();
    let v = [
        m * kin.velocity[0] + (1.0 - m) * kin.mean_velocity[0] + spread * noise[0],
        m * kin.velocity[1] + (1.0 - m) * kin.mean_velocity[1] + spread * noise[1],
    ];
    clamp_speed(v, params.v_max)
}

/// Integrates the (already updated) velocity over one step and reflects off
/// the walls of `[0, area_side]²`. A reflected axis has its velocity
/// component negated.
pub fn step_position(kin: &EdKinematics, params: &MobilityParams) -> EdKinematics {
    let side = params.area_side;
    let mut out = *kin;
    for axis in 0..2 {
        let mut p = kin.position[axis] + kin.velocity[axis] * params.dt;
        let mut v = kin.velocity[axis];
        while !(0.0..=side).contains(&p) {
            p = if p < 0.0 { -p } else { 2.0 * side - p };
            v = -v;
        }
        out.position[axis] = p;
        out.velocity[axis] = v;
    }
    out
}

/// Replaces the mean velocity with `fresh_mean` when `u < resample_prob`.
pub fn maybe_resample_mean(
    kin: &EdKinematics,
    params: &MobilityParams,
    u: f64,
    fresh_mean: Vec2,
) -> EdKinematics {
    let mut out = *kin;
    if u < params.resample_prob {
        out.mean_velocity = fresh_mean;
    }
    out
}

/// Draws the initial kinematics of one device: uniform position in the
/// area, uniform velocity in `[-v_max, v_max]²` (clamped) and a mean
/// velocity of magnitude `initial_mean_speed` in a uniform direction.
pub fn spawn<R: Rng + ?Sized>(params: &MobilityParams, rng: &mut R) -> EdKinematics {
    let side = params.area_side;
    let position = [rng.random::<f64>() * side, rng.random::<f64>() * side];
    let vm = params.v_max;
    let velocity = clamp_speed(
        [rng.random_range(-vm..=vm), rng.random_range(-vm..=vm)],
        vm,
    );
    let heading = rng.random::<f64>() * std::f64::consts::TAU;
    let s = params.initial_mean_speed;
    EdKinematics {
        position,
        velocity,
        mean_velocity: [s * heading.cos(), s * heading.sin()],
    }
}

/// One full mobility step. Every call consumes the same number of draws
/// (two normals, one uniform, two uniforms for the candidate mean) so
/// trajectories stay aligned across parameter changes.
pub fn advance<R: Rng + ?Sized>(
    kin: &EdKinematics,
    params: &MobilityParams,
    rng: &mut R,
) -> EdKinematics {
    let noise = [
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    ];
    let u: f64 = rng.random();
    let vm = params.v_max;
    let fresh = [rng.random_range(-vm..=vm), rng.random_range(-vm..=vm)];

    let mut next = *kin;
    next.velocity = step_velocity(kin, params, noise);
    let next = step_position(&next, params);
    maybe_resample_mean(&next, params, u, fresh)
}
