use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mcs_game::config::RunConfig;
use mcs_game::Ordering;

#[derive(Debug, Parser)]
#[command(name = "mcs-game", version, about = "Constructor/evaluator MCS-set selection with Q-learning agents")]
pub struct Cli {
    /// TOML file with run settings; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw UE SIRs and write them as CSV.
    SampleSir {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Score every combination of each region and write raw and smoothed reward curves.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train the three region agents and write traces, Q-tables and a summary.
    Train {
        #[command(flatten)]
        overrides: Overrides,
        /// Exit with status 1 unless every region meets the near-optimal occupancy target.
        #[arg(long)]
        check: bool,
    },
    /// Train the constructor, then play a full session against the evaluator.
    Session {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Replay a transcript and check every score.
    VerifyTranscript {
        transcript: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

impl Command {
    pub fn overrides(&self) -> &Overrides {
        match self {
            Command::SampleSir { overrides }
            | Command::Sweep { overrides }
            | Command::Train { overrides, .. }
            | Command::Session { overrides }
            | Command::VerifyTranscript { overrides, .. } => overrides,
        }
    }
}

/// Flags named after the configuration fields they replace.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_ues: Option<usize>,
    #[arg(long)]
    pub mcs_table: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub edge_mcs: Option<Vec<u8>>,
    #[arg(long, value_delimiter = ',')]
    pub median_mcs: Option<Vec<u8>>,
    #[arg(long, value_delimiter = ',')]
    pub center_mcs: Option<Vec<u8>>,
    #[arg(long)]
    pub naive_split: bool,
    #[arg(long)]
    pub ordering: Option<Ordering>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub reseed_per_episode: bool,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub threshold_fraction: Option<f64>,
    #[arg(long)]
    pub max_rounds: Option<usize>,

    #[arg(long)]
    pub discount: Option<f64>,
    #[arg(long)]
    pub alpha_init: Option<f64>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_decay: Option<f64>,
    #[arg(long)]
    pub epsilon_init: Option<f64>,
    #[arg(long)]
    pub epsilon_min: Option<f64>,
    #[arg(long)]
    pub epsilon_decay: Option<f64>,
    #[arg(long)]
    pub n_state_bins: Option<usize>,
    #[arg(long, visible_alias = "steps")]
    pub max_steps_per_episode: Option<usize>,
    #[arg(long, visible_alias = "episodes")]
    pub n_episodes: Option<usize>,
    #[arg(long)]
    pub terminal_reward_threshold: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        set! {
            seed => c.seed,
            n_ues => c.n_ues,
            k => c.k,
            edge_mcs => c.edge_mcs,
            median_mcs => c.median_mcs,
            center_mcs => c.center_mcs,
            ordering => c.ordering,
            window => c.window,
            output_dir => c.output_dir,
            threshold_fraction => c.threshold_fraction,
            max_rounds => c.max_rounds,
            discount => c.agent.discount,
            alpha_init => c.agent.alpha_init,
            alpha_min => c.agent.alpha_min,
            alpha_decay => c.agent.alpha_decay,
            epsilon_init => c.agent.epsilon_init,
            epsilon_min => c.agent.epsilon_min,
            epsilon_decay => c.agent.epsilon_decay,
            n_state_bins => c.agent.n_state_bins,
            max_steps_per_episode => c.agent.max_steps_per_episode,
            n_episodes => c.agent.n_episodes,
        }
        if let Some(p) = &self.mcs_table {
            c.mcs_table = Some(p.clone());
        }
        if let Some(t) = self.threshold {
            c.threshold = Some(t);
        }
        if let Some(t) = self.terminal_reward_threshold {
            c.agent.terminal_reward_threshold = Some(t);
        }
        c.naive_split |= self.naive_split;
        c.reseed_per_episode |= self.reseed_per_episode;
    }
}
