//! Shared fixtures for the criterion benches.

use mcs_game::agent::RegionEnv;
use mcs_game::config::RunConfig;
use mcs_game::{Evaluator, RegionActionSpace};

pub struct Fixture {
    pub evaluator: Evaluator,
    pub spaces: Vec<RegionActionSpace>,
}

impl Fixture {
    /// Default run settings with `n_ues` users.
    pub fn new(n_ues: usize) -> Self {
        let cfg = RunConfig { n_ues, ..RunConfig::default() };
        Self { evaluator: cfg.evaluator().expect("evaluator"), spaces: cfg.spaces().expect("spaces") }
    }

    pub fn envs(&self) -> Vec<RegionEnv> {
        self.spaces
            .iter()
            .map(|s| RegionEnv::new(&self.evaluator, s.clone()).expect("env"))
            .collect()
    }
}
