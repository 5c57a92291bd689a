use crate::env::AgentAction;

/// One agent's contribution to a step.
#[derive(Debug, Clone)]
pub struct AgentSample {
    pub agent: usize,
    pub obs: Vec<f64>,
    pub hidden: Vec<f64>,
    pub action: AgentAction,
    pub log_prob: f64,
    /// Live decision slots (zero when the UAV serves nobody).
    pub active: usize,
}

/// One environment step with the centralized critic's view of it.
#[derive(Debug, Clone)]
pub struct StepSample {
    pub agents: Vec<AgentSample>,
    pub state: Vec<f64>,
    pub critic_hidden: Vec<f64>,
    /// Critic estimate in reward units.
    pub value: f64,
    pub reward: f64,
    pub done: bool,
    pub step_ee: f64,
    pub success_rate: f64,
}

/// Time-ordered samples from each parallel environment, plus the value of
/// the state that follows each sequence.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    pub envs: Vec<Vec<StepSample>>,
    pub bootstrap: Vec<f64>,
}

impl RolloutBuffer {
    pub fn num_steps(&self) -> usize {
        self.envs.iter().map(Vec::len).sum()
    }

    /// Agent-samples held, `length × U × num_envs`.
    pub fn len(&self) -> usize {
        self.envs.iter().flatten().map(|s| s.agents.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn steps(&self) -> impl Iterator<Item = &StepSample> {
        self.envs.iter().flatten()
    }

    pub fn mean_reward(&self) -> f64 {
        mean(self.steps().map(|s| s.reward))
    }

    pub fn mean_step_ee(&self) -> f64 {
        mean(self.steps().map(|s| s.step_ee))
    }

    pub fn mean_success_rate(&self) -> f64 {
        mean(self.steps().map(|s| s.success_rate))
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
