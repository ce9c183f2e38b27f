//! Constructor/evaluator game for selecting per-region MCS sets.
//!
//! The evaluator simulates an interference-limited UE population, splits it
//! into cell edge, median and centre by SIR quartile, and scores proposed
//! sets of `k` MCSs. The constructor runs one tabular Q-learning agent per
//! region that walks a sum-sorted enumeration of the candidate sets.

pub mod action_space;
pub mod agent;
pub mod config;
pub mod error;
pub mod evaluator;
pub mod export;
pub mod mcs;
pub mod oracle;
pub mod protocol;
pub mod region;
pub mod rng;
pub mod sir;

pub use action_space::{Action, McsCombination, Ordering, RegionActionSpace};
pub use agent::{AgentConfig, QAgent, RegionEnv, TraceRow};
pub use error::{Error, Result};
pub use evaluator::{Evaluator, ScoreRecord, UePopulation};
pub use mcs::{McsEntry, McsTable, Modulation};
pub use oracle::RewardCurve;
pub use region::Region;
pub use sir::{Sir, SirDistribution};
