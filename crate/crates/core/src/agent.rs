//! Tabular Q-learning agents of the constructor, one per cell region.
//!
//! The state is the quantised MSS of the current proposal and the actions
//! move one step through the region's ordered combination space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action_space::{Action, RegionActionSpace};
use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, ScoreRecord, UePopulation};
use crate::mcs::McsTable;
use crate::region::Region;
use crate::rng::{StreamRng, STREAM_AGENT};

pub const DEFAULT_STATE_BINS: usize = 20;
pub const DEFAULT_MAX_STEPS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct AgentConfig {
    pub discount: f64,
    pub alpha_init: f64,
    pub alpha_min: f64,
    pub alpha_decay: f64,
    pub epsilon_init: f64,
    pub epsilon_min: f64,
    pub epsilon_decay: f64,
    pub n_state_bins: usize,
    pub max_steps_per_episode: usize,
    pub n_episodes: usize,
    /// Unsmoothed reward at which an episode ends. `None` runs every episode to `max_steps_per_episode`.
    pub terminal_reward_threshold: Option<f64>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            discount: 0.90,
            alpha_init: 0.7,
            alpha_min: 0.5,
            alpha_decay: 0.995,
            // exploration starts high and decays to the floor
            epsilon_init: 1.0,
            epsilon_min: 0.01,
            epsilon_decay: 0.995,
            n_state_bins: DEFAULT_STATE_BINS,
            max_steps_per_episode: DEFAULT_MAX_STEPS,
            n_episodes: 1,
            terminal_reward_threshold: None,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad("discount must lie in (0, 1)");
        }
        if !(0.0 <= self.epsilon_min && self.epsilon_min <= self.epsilon_init && self.epsilon_init <= 1.0) {
            return bad("need 0 <= epsilon_min <= epsilon_init <= 1");
        }
        if !(0.0 < self.alpha_min && self.alpha_min <= self.alpha_init && self.alpha_init <= 1.0) {
            return bad("need 0 < alpha_min <= alpha_init <= 1");
        }
        for d in [self.alpha_decay, self.epsilon_decay] {
            if !(d > 0.0 && d <= 1.0) {
                return bad("decay factors must lie in (0, 1]");
            }
        }
        if self.n_state_bins == 0 {
            return bad("n_state_bins must be positive");
        }
        Ok(())
    }
}

/// MSS bin: `floor(mss · bins)`, with `mss = 1` folded into the top bin.
pub fn quantize_state(mss: f64, bins: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&mss) {
        return Err(Error::Domain(format!("MSS {mss} outside [0, 1]")));
    }
    Ok(((mss * bins as f64).floor() as usize).min(bins - 1))
}

/// A region's combination space together with its precomputed scores.
#[derive(Debug, Clone)]
pub struct RegionEnv {
    space: RegionActionSpace,
    scores: Vec<ScoreRecord>,
}

impl RegionEnv {
    pub fn new(evaluator: &Evaluator, space: RegionActionSpace) -> Result<Self> {
        let scores = evaluator.score_all(&space)?;
        Ok(Self { space, scores })
    }

    /// Environment with externally supplied scores, one per position.
    pub fn from_parts(space: RegionActionSpace, scores: Vec<ScoreRecord>) -> Result<Self> {
        if scores.len() != space.len() {
            return Err(Error::Config(format!("{} scores for a space of {}", scores.len(), space.len())));
        }
        Ok(Self { space, scores })
    }

    pub fn region(&self) -> Region {
        self.space.region()
    }

    pub fn space(&self) -> &RegionActionSpace {
        &self.space
    }

    pub fn scores(&self) -> &[ScoreRecord] {
        &self.scores
    }

    pub fn score(&self, position: usize) -> &ScoreRecord {
        &self.scores[position]
    }
}

/// One agent step, as written to the trace log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub episode: usize,
    pub combo_index: usize,
    pub action: Action,
    pub mss: f64,
    pub se_norm: f64,
    pub reward: f64,
    pub state_bin: usize,
    pub alpha: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct QAgent {
    region: Region,
    config: AgentConfig,
    q: Vec<[f64; 3]>,
    alpha: f64,
    epsilon: f64,
    current: usize,
    steps_taken: usize,
    rng: StreamRng,
}

impl QAgent {
    pub fn new(region: Region, config: AgentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            region,
            config,
            q: vec![[0.0; 3]; config.n_state_bins],
            alpha: config.alpha_init,
            epsilon: config.epsilon_init,
            current: 0,
            steps_taken: 0,
            rng: StreamRng::new(seed, STREAM_AGENT + region.ordinal() as u64),
        })
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn q_table(&self) -> &[[f64; 3]] {
        &self.q
    }

    pub fn q_table_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    pub fn current_combo(&self) -> usize {
        self.current
    }

    pub fn set_current_combo(&mut self, position: usize) {
        self.current = position;
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn state_of(&self, mss: f64) -> usize {
        quantize_state(mss.clamp(0.0, 1.0), self.config.n_state_bins).expect("clamped")
    }

    /// Argmax over the row; ties go to the earliest of Prev, Stay, Next.
    pub fn greedy_action(&self, state: usize) -> Action {
        let row = &self.q[state];
        let mut best = 0;
        for a in 1..3 {
            if row[a] > row[best] {
                best = a;
            }
        }
        Action::ALL[best]
    }

    /// ε-greedy choice driven by one uniform draw on [0, 1): a draw below ε
    /// picks a random action by where it falls inside `[0, ε)`.
    pub fn select_action(&self, state: usize, uniform_draw: f64) -> Action {
        if uniform_draw < self.epsilon {
            let slot = ((uniform_draw / self.epsilon) * 3.0) as usize;
            Action::ALL[slot.min(2)]
        } else {
            self.greedy_action(state)
        }
    }

    /// ε-greedy action using the agent's own exploration stream.
    pub fn act(&mut self, state: usize) -> Action {
        let draw = self.rng.uniform();
        self.select_action(state, draw)
    }

    /// One Q-learning backup followed by the α and ε decay. Returns the new Q(s, a).
    pub fn update(&mut self, state: usize, action: Action, reward: f64, next_state: usize, terminal: bool) -> f64 {
        let bootstrap = if terminal {
            0.0
        } else {
            self.q[next_state].iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        let cell = &mut self.q[state][action.index()];
        *cell += self.alpha * (reward + self.config.discount * bootstrap - *cell);
        let updated = *cell;
        self.alpha = (self.alpha * self.config.alpha_decay).max(self.config.alpha_min);
        self.epsilon = (self.epsilon * self.config.epsilon_decay).max(self.config.epsilon_min);
        self.steps_taken += 1;
        updated
    }

    /// Places the agent at a uniformly random position and returns its state.
    pub fn reset(&mut self, env: &RegionEnv) -> usize {
        self.current = self.rng.below(env.space().len());
        self.state_of(env.score(self.current).mss)
    }

    /// One select → move → score → update step from `state`. Returns the
    /// trace row (without step/episode numbering) and whether the new state is terminal.
    pub fn step(&mut self, env: &RegionEnv, state: usize) -> (TraceRow, bool) {
        let (alpha, epsilon) = (self.alpha, self.epsilon);
        let action = self.act(state);
        let next = env.space().neighbor(self.current, action);
        let score = *env.score(next);
        let next_state = self.state_of(score.mss);
        let terminal = self.config.terminal_reward_threshold.is_some_and(|thr| score.reward >= thr);
        self.update(state, action, score.reward, next_state, terminal);
        self.current = next;
        let row = TraceRow {
            step: 0,
            episode: 0,
            combo_index: next,
            action,
            mss: score.mss,
            se_norm: score.se_norm,
            reward: score.reward,
            state_bin: next_state,
            alpha,
            epsilon,
        };
        (row, terminal)
    }

    /// Runs one episode from a uniformly random start position.
    pub fn run_episode(&mut self, env: &RegionEnv, episode: usize, step_offset: usize) -> Vec<TraceRow> {
        let max_steps = self.config.max_steps_per_episode;
        let mut trace = Vec::with_capacity(max_steps.min(1 << 16));
        if max_steps == 0 {
            return trace;
        }
        let mut state = self.reset(env);
        for t in 0..max_steps {
            let (row, terminal) = self.step(env, state);
            state = row.state_bin;
            trace.push(TraceRow { step: step_offset + t, episode, ..row });
            if terminal {
                break;
            }
        }
        trace
    }

    /// Runs `n_episodes` episodes, each environment supplied by `env_for(episode)`.
    pub fn train_with<'a, F>(&mut self, mut env_for: F) -> Result<Vec<TraceRow>>
    where
        F: FnMut(usize) -> Result<std::borrow::Cow<'a, RegionEnv>>,
    {
        let mut log = Vec::new();
        for episode in 0..self.config.n_episodes {
            let env = env_for(episode)?;
            if env.region() != self.region {
                return Err(Error::Config(format!("agent for {} given {} environment", self.region, env.region())));
            }
            let offset = log.len();
            log.extend(self.run_episode(&env, episode, offset));
        }
        Ok(log)
    }

    /// `(state_bin, action, q_value)` rows.
    pub fn q_snapshot(&self) -> Vec<(usize, Action, f64)> {
        self.q
            .iter()
            .enumerate()
            .flat_map(|(s, row)| Action::ALL.iter().map(move |&a| (s, a, row[a.index()])))
            .collect()
    }
}

/// Per-region output of a training run.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub region: Region,
    pub trace: Vec<TraceRow>,
}

/// The three constructor agents with one fresh agent per region, seeded from `seed`.
pub fn new_agents(config: AgentConfig, seed: u64) -> Result<Vec<QAgent>> {
    Region::ALL.iter().map(|&r| QAgent::new(r, config, seed)).collect()
}

/// Trains each agent on the environment of its own region against a frozen
/// population. Agents share nothing mutable and run in parallel.
pub fn train(agents: &mut [QAgent], envs: &[RegionEnv]) -> Result<Vec<TrainingRun>> {
    agents
        .par_iter_mut()
        .map(|agent| {
            let env = envs
                .iter()
                .find(|e| e.region() == agent.region())
                .ok_or_else(|| Error::Config(format!("no environment for region {}", agent.region())))?;
            let trace = agent.train_with(|_| Ok(std::borrow::Cow::Borrowed(env)))?;
            Ok(TrainingRun { region: agent.region(), trace })
        })
        .collect()
}

/// Like [`train`] but draws a fresh population for every episode, using
/// `base_seed + episode` as the population seed.
pub fn train_reseeded(
    agents: &mut [QAgent],
    spaces: &[RegionActionSpace],
    table: &McsTable,
    n_ues: usize,
    base_seed: u64,
) -> Result<Vec<TrainingRun>> {
    agents
        .par_iter_mut()
        .map(|agent| {
            let region = agent.region();
            let space = spaces
                .iter()
                .find(|s| s.region() == region)
                .ok_or_else(|| Error::Config(format!("no action space for region {region}")))?;
            let trace = agent.train_with(|episode| {
                let pop = UePopulation::simulate(n_ues, base_seed.wrapping_add(episode as u64))?;
                let evaluator = Evaluator::new(pop, table.clone());
                Ok(std::borrow::Cow::Owned(RegionEnv::new(&evaluator, space.clone())?))
            })?;
            Ok(TrainingRun { region, trace })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action_space::Ordering;

    fn agent() -> QAgent {
        QAgent::new(Region::CellCenter, AgentConfig::default(), 1).unwrap()
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_state(0.0, 20).unwrap(), 0);
        assert_eq!(quantize_state(1.0, 20).unwrap(), 19);
        assert_eq!(quantize_state(0.5, 20).unwrap(), 10);
        assert_eq!(quantize_state(0.049, 20).unwrap(), 0);
        assert!(quantize_state(-0.1, 20).is_err());
        assert!(quantize_state(1.1, 20).is_err());
    }

    #[test]
    fn greedy_selection_and_ties() {
        let mut a = agent();
        a.set_epsilon(0.0);
        a.q_table_mut()[3] = [0.1, 0.9, 0.2];
        assert_eq!(a.select_action(3, 0.5), Action::Stay);
        assert_eq!(a.select_action(4, 0.5), Action::Prev);
        a.q_table_mut()[5] = [0.0, 0.4, 0.4];
        assert_eq!(a.greedy_action(5), Action::Stay);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut a = agent();
        a.set_epsilon(1.0);
        let mut rng = StreamRng::new(99, 0);
        let mut counts = [0usize; 3];
        let n = 10_000;
        for _ in 0..n {
            counts[a.select_action(0, rng.uniform()).index()] += 1;
        }
        let expected = n as f64 / 3.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 2 degrees of freedom, 0.1% critical value
        assert!(chi2 < 13.816, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn update_examples() {
        let mut a = agent();
        assert_eq!(a.update(0, Action::Stay, 1.0, 1, false), 0.7);

        let mut b = agent();
        assert_eq!(b.update(0, Action::Next, 0.0, 0, false), 0.0);

        let mut c = agent();
        c.alpha = 0.5;
        c.q_table_mut()[2][0] = 0.5;
        c.q_table_mut()[7] = [0.1, 0.6, 0.3];
        let v = c.update(2, Action::Prev, 0.8, 7, false);
        assert!((v - 0.92).abs() < 1e-12, "{v}");
    }

    #[test]
    fn terminal_update_does_not_bootstrap() {
        let mut a = agent();
        a.q_table_mut()[1] = [5.0, 5.0, 5.0];
        assert_eq!(a.update(0, Action::Stay, 1.0, 1, true), 0.7);
    }

    #[test]
    fn decay_reaches_floors() {
        let mut a = agent();
        for _ in 0..2_000 {
            a.update(0, Action::Stay, 0.5, 0, false);
        }
        assert_eq!(a.alpha(), 0.5);
        assert_eq!(a.epsilon(), 0.01);
    }

    #[test]
    fn config_validation() {
        let mut c = AgentConfig::default();
        assert!(c.validate().is_ok());
        c.discount = 1.0;
        assert!(c.validate().is_err());
        let c = AgentConfig { epsilon_min: 0.5, epsilon_init: 0.1, ..AgentConfig::default() };
        assert!(c.validate().is_err());
    }

    fn toy_env() -> RegionEnv {
        let space = RegionActionSpace::build(Region::CellEdge, &[0, 1, 2], 1, Ordering::SumSorted).unwrap();
        let scores = vec![
            ScoreRecord::new(Region::CellEdge, 0, 1.0, 1.0),
            ScoreRecord::new(Region::CellEdge, 1, 0.0, 0.0),
            ScoreRecord::new(Region::CellEdge, 2, 0.0, 0.0),
        ];
        RegionEnv::from_parts(space, scores).unwrap()
    }

    #[test]
    fn empty_episode() {
        let cfg = AgentConfig { max_steps_per_episode: 0, ..AgentConfig::default() };
        let mut a = QAgent::new(Region::CellEdge, cfg, 3).unwrap();
        assert!(a.run_episode(&toy_env(), 0, 0).is_empty());
    }

    #[test]
    fn toy_greedy_policy_reaches_goal() {
        let env = toy_env();
        let cfg = AgentConfig { max_steps_per_episode: 1_000, ..AgentConfig::default() };
        let mut a = QAgent::new(Region::CellEdge, cfg, 3).unwrap();
        let trace = a.run_episode(&env, 0, 0);
        assert_eq!(trace.len(), 1_000);
        for start in 0..3 {
            let mut pos = start;
            for _ in 0..5 {
                let s = a.state_of(env.score(pos).mss);
                pos = env.space().neighbor(pos, a.greedy_action(s));
            }
            assert_eq!(pos, 0, "start {start}");
        }
    }

    #[test]
    fn terminal_threshold_ends_episode() {
        let env = toy_env();
        let cfg = AgentConfig { max_steps_per_episode: 500, terminal_reward_threshold: Some(0.99), ..AgentConfig::default() };
        let mut a = QAgent::new(Region::CellEdge, cfg, 4).unwrap();
        let trace = a.run_episode(&env, 0, 0);
        assert!(trace.len() < 500);
        assert_eq!(trace.last().unwrap().reward, 1.0);
    }
}
