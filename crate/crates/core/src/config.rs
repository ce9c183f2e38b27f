//! Run configuration shared by every subcommand. With no overrides it
//! reproduces the reduced 12-of-29, k = 4, sum-sorted setup.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::action_space::{final_split, naive_split, Ordering, RegionActionSpace, DEFAULT_K, NAIVE_K};
use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, UePopulation, DEFAULT_N_UES};
use crate::mcs::McsTable;
use crate::oracle::DEFAULT_WINDOW;
use crate::region::Region;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub n_ues: usize,
    pub mcs_table: Option<PathBuf>,
    pub k: usize,
    pub edge_mcs: Vec<u8>,
    pub median_mcs: Vec<u8>,
    pub center_mcs: Vec<u8>,
    /// Use the 11/9/11 contiguous split with k = 3 instead of the index sets above.
    pub naive_split: bool,
    pub ordering: Ordering,
    pub window: usize,
    pub output_dir: PathBuf,
    pub agent: AgentConfig,
    pub reseed_per_episode: bool,
    /// Absolute reward every region must reach in a session; overrides `threshold-fraction`.
    pub threshold: Option<f64>,
    /// Session threshold as a fraction of each region's oracle maximum.
    pub threshold_fraction: f64,
    pub max_rounds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            n_ues: DEFAULT_N_UES,
            mcs_table: None,
            k: DEFAULT_K,
            edge_mcs: final_split(Region::CellEdge),
            median_mcs: final_split(Region::CellMedian),
            center_mcs: final_split(Region::CellCenter),
            naive_split: false,
            ordering: Ordering::SumSorted,
            window: DEFAULT_WINDOW,
            output_dir: PathBuf::from("out"),
            agent: AgentConfig::default(),
            reseed_per_episode: false,
            threshold: None,
            threshold_fraction: 0.95,
            max_rounds: 1_000,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.agent.validate()?;
        if self.window < 1 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.threshold_fraction.is_nan() || self.threshold_fraction <= 0.0 {
            return Err(Error::Config("threshold-fraction must be positive".into()));
        }
        Ok(())
    }

    pub fn table(&self) -> Result<McsTable> {
        match &self.mcs_table {
            Some(p) => McsTable::from_path(p),
            None => Ok(McsTable::bundled()),
        }
    }

    pub fn population(&self) -> Result<UePopulation> {
        UePopulation::simulate(self.n_ues, self.seed)
    }

    pub fn evaluator(&self) -> Result<Evaluator> {
        Ok(Evaluator::new(self.population()?, self.table()?))
    }

    pub fn effective_k(&self) -> usize {
        if self.naive_split {
            NAIVE_K
        } else {
            self.k
        }
    }

    pub fn allowed(&self, region: Region) -> Vec<u8> {
        if self.naive_split {
            return naive_split(region);
        }
        match region {
            Region::CellEdge => self.edge_mcs.clone(),
            Region::CellMedian => self.median_mcs.clone(),
            Region::CellCenter => self.center_mcs.clone(),
        }
    }

    pub fn spaces(&self) -> Result<Vec<RegionActionSpace>> {
        Region::ALL
            .iter()
            .map(|&r| RegionActionSpace::build(r, &self.allowed(r), self.effective_k(), self.ordering))
            .collect()
    }

    /// Comment lines that make an output artifact self-describing.
    pub fn comment_header(&self, command: &str) -> Vec<String> {
        vec![
            format!("mcs-game {command}"),
            format!("seed: {}", self.seed),
            format!("config: {}", serde_json::to_string(self).expect("config serialises")),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_final_configuration() {
        let c = RunConfig::default();
        assert!(c.validate().is_ok());
        let spaces = c.spaces().unwrap();
        assert!(spaces.iter().all(|s| s.len() == 495 && s.k() == 4 && s.ordering() == Ordering::SumSorted));
        assert_eq!(c.agent.discount, 0.9);
        assert_eq!(c.window, 50);
        assert_eq!(c.n_ues, 10_000);
    }

    #[test]
    fn naive_split_switches_sets_and_k() {
        let c = RunConfig { naive_split: true, ordering: Ordering::Lexicographic, ..RunConfig::default() };
        let sizes: Vec<usize> = c.spaces().unwrap().iter().map(|s| s.len()).collect();
        assert_eq!(sizes, vec![165, 84, 165]);
    }

    #[test]
    fn header_embeds_seed_and_config() {
        let h = RunConfig::default().comment_header("sweep");
        assert!(h[1].contains("42"));
        assert!(h[2].starts_with("config: {"));
    }
}
