//! Recurrent actor and critic built on the [`Tape`].
//!
//! Both networks share the trunk `input → Linear+ReLU → GRU`. The actor
//! reads per-slot categorical heads (SF, TP, BW) off the GRU output; the
//! critic reads a single value.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{ParamVector, SliceKind};
use super::tape::{Tape, Var};
use crate::{Error, Result};

/// Indices of the trunk's parameter blocks inside a [`ParamVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct Trunk {
    enc_w: usize,
    enc_b: usize,
    /// Input-to-hidden weights for the (r, z, n) gates stacked, `3H × H`.
    gru_wi: usize,
    gru_bi: usize,
    /// Hidden-to-hidden weights, `3H × H`.
    gru_wh: usize,
    gru_bh: usize,
}

impl Trunk {
    fn build(p: &mut ParamVector, input: usize, hidden: usize) -> Self {
        Self {
            enc_w: p.push("enc.w", SliceKind::Weight, hidden, input),
            enc_b: p.push("enc.b", SliceKind::Bias, hidden, 1),
            gru_wi: p.push("gru.w_input", SliceKind::Weight, 3 * hidden, hidden),
            gru_bi: p.push("gru.b_input", SliceKind::Bias, 3 * hidden, 1),
            gru_wh: p.push("gru.w_hidden", SliceKind::Weight, 3 * hidden, hidden),
            gru_bh: p.push("gru.b_hidden", SliceKind::Bias, 3 * hidden, 1),
        }
    }

    /// Returns the new hidden state. `h` is treated as a constant: stored
    /// hidden states are replayed, not differentiated through.
    fn forward(&self, t: &mut Tape, p: &ParamVector, x: Var, h: Var, hidden: usize) -> Var {
        let e = t.linear(p.slice(self.enc_w), Some(p.slice(self.enc_b)), x);
        let e = t.relu(e);
        gru_cell(
            t,
            p,
            [self.gru_wi, self.gru_bi, self.gru_wh, self.gru_bh],
            e,
            h,
            hidden,
        )
    }
}

/// Standard GRU step:
///
/// ```text
/// r  = σ(W_ir x + b_ir + W_hr h + b_hr)
/// z  = σ(W_iz x + b_iz + W_hz h + b_hz)
/// n  = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn))
/// h' = (1 − z) ⊙ n + z ⊙ h
/// ```
pub fn gru_cell(
    t: &mut Tape,
    p: &ParamVector,
    [wi, bi, wh, bh]: [usize; 4],
    x: Var,
    h: Var,
    hidden: usize,
) -> Var {
    let gi = t.linear(p.slice(wi), Some(p.slice(bi)), x);
    let gh = t.linear(p.slice(wh), Some(p.slice(bh)), h);
    let (ir, iz, inn) = (
        t.slice(gi, 0, hidden),
        t.slice(gi, hidden, hidden),
        t.slice(gi, 2 * hidden, hidden),
    );
    let (hr, hz, hn) = (
        t.slice(gh, 0, hidden),
        t.slice(gh, hidden, hidden),
        t.slice(gh, 2 * hidden, hidden),
    );
    let r = t.add(ir, hr);
    let r = t.sigmoid(r);
    let z = t.add(iz, hz);
    let z = t.sigmoid(z);
    let rn = t.mul(r, hn);
    let n = t.add(inn, rn);
    let n = t.tanh(n);
    let keep = t.one_minus(z);
    let a = t.mul(keep, n);
    let b = t.mul(z, h);
    t.add(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub input_dim: usize,
    pub hidden: usize,
    pub slots: usize,
    /// Head sizes (SF, TP, BW).
    pub heads: [usize; 3],
}

/// Recurrent actor mapping a flattened local observation to per-slot
/// categorical distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNet {
    pub spec: PolicySpec,
    pub params: ParamVector,
    trunk: Trunk,
    head_w: usize,
    head_b: usize,
}

/// Tape handles produced by one actor forward pass.
pub struct PolicyForward {
    pub hidden_out: Var,
    /// Log-probabilities per slot and head.
    pub log_probs: Vec<[Var; 3]>,
}

impl PolicyNet {
    pub fn new(spec: PolicySpec) -> Self {
        let mut params = ParamVector::new();
        let trunk = Trunk::build(&mut params, spec.input_dim, spec.hidden);
        let outputs = spec.slots * spec.heads.iter().sum::<usize>();
        let head_w = params.push("heads.w", SliceKind::Weight, outputs, spec.hidden);
        let head_b = params.push("heads.b", SliceKind::Bias, outputs, 1);
        Self {
            spec,
            params,
            trunk,
            head_w,
            head_b,
        }
    }

    pub fn init<R: Rng + ?Sized>(spec: PolicySpec, rng: &mut R) -> Self {
        let mut net = Self::new(spec);
        net.params.init_glorot(rng);
        net
    }

    pub fn zero_hidden(&self) -> Vec<f64> {
        vec![0.0; self.spec.hidden]
    }

    pub fn record(&self, t: &mut Tape, input: &[f64], hidden_in: &[f64]) -> Result<PolicyForward> {
        self.record_rows(t, input, hidden_in, 1)
    }

    /// As [`PolicyNet::record`] for `rows` samples stacked row-major.
    pub fn record_rows(
        &self,
        t: &mut Tape,
        input: &[f64],
        hidden_in: &[f64],
        rows: usize,
    ) -> Result<PolicyForward> {
        if rows == 0
            || input.len() != rows * self.spec.input_dim
            || hidden_in.len() != rows * self.spec.hidden
        {
            return Err(Error::Shape(format!(
                "policy expects {rows} rows of input {} / hidden {}, got {} / {} values",
                self.spec.input_dim,
                self.spec.hidden,
                input.len(),
                hidden_in.len()
            )));
        }
        let x = t.constant_rows(input.to_vec(), rows);
        let h = t.constant_rows(hidden_in.to_vec(), rows);
        let h_out = self.trunk.forward(t, &self.params, x, h, self.spec.hidden);
        let logits = t.linear(
            self.params.slice(self.head_w),
            Some(self.params.slice(self.head_b)),
            h_out,
        );
        let mut log_probs = Vec::with_capacity(self.spec.slots);
        let mut at = 0;
        for _ in 0..self.spec.slots {
            let mut slot = [logits; 3];
            for (k, &n) in self.spec.heads.iter().enumerate() {
                let l = t.slice(logits, at, n);
                slot[k] = t.log_softmax(l);
                at += n;
            }
            log_probs.push(slot);
        }
        Ok(PolicyForward {
            hidden_out: h_out,
            log_probs,
        })
    }

    /// Inference pass: per-slot log-probability vectors and the next
    /// hidden state.
    pub fn forward(&self, input: &[f64], hidden_in: &[f64]) -> Result<(Vec<[Vec<f64>; 3]>, Vec<f64>)> {
        let mut t = Tape::new(&self.params.values);
        let f = self.record(&mut t, input, hidden_in)?;
        let dists = f
            .log_probs
            .iter()
            .map(|s| s.map(|v| t.value(v).to_vec()))
            .collect();
        Ok((dists, t.value(f.hidden_out).to_vec()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticSpec {
    pub input_dim: usize,
    pub hidden: usize,
}

/// Recurrent centralized critic over the global state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticNet {
    pub spec: CriticSpec,
    pub params: ParamVector,
    trunk: Trunk,
    out_w: usize,
    out_b: usize,
}

pub struct CriticForward {
    pub hidden_out: Var,
    pub value: Var,
}

impl CriticNet {
    pub fn new(spec: CriticSpec) -> Self {
        let mut params = ParamVector::new();
        let trunk = Trunk::build(&mut params, spec.input_dim, spec.hidden);
        let out_w = params.push("value.w", SliceKind::Weight, 1, spec.hidden);
        let out_b = params.push("value.b", SliceKind::Bias, 1, 1);
        Self {
            spec,
            params,
            trunk,
            out_w,
            out_b,
        }
    }

    pub fn init<R: Rng + ?Sized>(spec: CriticSpec, rng: &mut R) -> Self {
        let mut net = Self::new(spec);
        net.params.init_glorot(rng);
        net
    }

    pub fn zero_hidden(&self) -> Vec<f64> {
        vec![0.0; self.spec.hidden]
    }

    pub fn record(&self, t: &mut Tape, input: &[f64], hidden_in: &[f64]) -> Result<CriticForward> {
        self.record_rows(t, input, hidden_in, 1)
    }

    /// As [`CriticNet::record`] for `rows` samples stacked row-major; the
    /// value node is a column.
    pub fn record_rows(
        &self,
        t: &mut Tape,
        input: &[f64],
        hidden_in: &[f64],
        rows: usize,
    ) -> Result<CriticForward> {
        if rows == 0
            || input.len() != rows * self.spec.input_dim
            || hidden_in.len() != rows * self.spec.hidden
        {
            return Err(Error::Shape(format!(
                "critic expects {rows} rows of input {} / hidden {}, got {} / {} values",
                self.spec.input_dim,
                self.spec.hidden,
                input.len(),
                hidden_in.len()
            )));
        }
        let x = t.constant_rows(input.to_vec(), rows);
        let h = t.constant_rows(hidden_in.to_vec(), rows);
        let h_out = self.trunk.forward(t, &self.params, x, h, self.spec.hidden);
        let value = t.linear(
            self.params.slice(self.out_w),
            Some(self.params.slice(self.out_b)),
            h_out,
        );
        Ok(CriticForward {
            hidden_out: h_out,
            value,
        })
    }

    pub fn forward(&self, input: &[f64], hidden_in: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut t = Tape::new(&self.params.values);
        let f = self.record(&mut t, input, hidden_in)?;
        Ok((t.scalar(f.value), t.value(f.hidden_out).to_vec()))
    }
}
