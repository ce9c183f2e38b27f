//! The evaluator: a frozen population of simulated UEs split into cell
//! regions by SIR quartile, and the scores it assigns to MCS proposals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action_space::{McsCombination, RegionActionSpace};
use crate::error::{Error, Result};
use crate::mcs::McsTable;
use crate::region::Region;
use crate::sir::{Sir, SirDistribution};

/// Smallest population for which every region is guaranteed to be scoreable.
pub const MIN_POPULATION: usize = 40;

/// Default number of simulated UEs.
pub const DEFAULT_N_UES: usize = 10_000;

#[derive(Debug, Clone)]
pub struct UePopulation {
    seed: u64,
    sirs: Vec<Sir>,
    q25: Sir,
    q50: Sir,
    q75: Sir,
    region_of: Vec<Region>,
    // per-region SIR in dB, ascending, indexed by Region::ordinal
    region_db: [Vec<f64>; 3],
}

impl UePopulation {
    /// `n` UEs drawn from the SIR law under `seed`.
    pub fn simulate(n: usize, seed: u64) -> Result<Self> {
        if n < MIN_POPULATION {
            return Err(Error::Config(format!("population of {n} UEs is below the minimum of {MIN_POPULATION}")));
        }
        Self::from_sirs(SirDistribution::new().sample(n, seed), seed)
    }

    /// Builds a population from explicit SIR values (used for hand-built fixtures).
    pub fn from_sirs(sirs: Vec<Sir>, seed: u64) -> Result<Self> {
        if sirs.is_empty() {
            return Err(Error::Config("population is empty".into()));
        }
        let mut sorted: Vec<f64> = sirs.iter().map(|s| s.linear()).collect();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| Sir::new(percentile_sorted(&sorted, p)).expect("percentile of positive values");
        let (q25, q50, q75) = (q(0.25), q(0.50), q(0.75));

        let region_of: Vec<Region> = sirs
            .iter()
            .map(|s| {
                if *s < q25 {
                    Region::CellEdge
                } else if *s >= q75 {
                    Region::CellCenter
                } else {
                    Region::CellMedian
                }
            })
            .collect();

        let mut region_db: [Vec<f64>; 3] = Default::default();
        for (s, r) in sirs.iter().zip(&region_of) {
            region_db[r.ordinal()].push(s.db());
        }
        for v in &mut region_db {
            v.sort_by(f64::total_cmp);
        }
        Ok(Self { seed, sirs, q25, q50, q75, region_of, region_db })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.sirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sirs.is_empty()
    }

    pub fn sirs(&self) -> &[Sir] {
        &self.sirs
    }

    pub fn region_of(&self) -> &[Region] {
        &self.region_of
    }

    pub fn quartiles(&self) -> (Sir, Sir, Sir) {
        (self.q25, self.q50, self.q75)
    }

    pub fn region_size(&self, region: Region) -> usize {
        self.region_db[region.ordinal()].len()
    }

    /// SIRs (dB) of a region's UEs in ascending order.
    pub fn region_db(&self, region: Region) -> &[f64] {
        &self.region_db[region.ordinal()]
    }

    /// Percentile SIRs in dB, as sent to the constructor at the start of a game.
    pub fn challenge(&self) -> (f64, f64, f64) {
        (self.q25.db(), self.q50.db(), self.q75.db())
    }
}

/// Linear-interpolation order statistic on ascending data.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Evaluator feedback for one proposal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub region: Region,
    pub combo_index: usize,
    pub mss: f64,
    pub se_norm: f64,
    pub reward: f64,
}

impl ScoreRecord {
    pub fn new(region: Region, combo_index: usize, mss: f64, se_norm: f64) -> Self {
        Self { region, combo_index, mss, se_norm, reward: reward(mss, se_norm) }
    }
}

#[inline]
pub fn reward(mss: f64, se_norm: f64) -> f64 {
    (mss + se_norm) / 2.0
}

/// Scores proposals against a frozen population and MCS table.
#[derive(Debug, Clone)]
pub struct Evaluator {
    population: UePopulation,
    table: McsTable,
}

impl Evaluator {
    pub fn new(population: UePopulation, table: McsTable) -> Self {
        Self { population, table }
    }

    pub fn population(&self) -> &UePopulation {
        &self.population
    }

    pub fn table(&self) -> &McsTable {
        &self.table
    }

    pub fn challenge(&self) -> (f64, f64, f64) {
        self.population.challenge()
    }

    /// Number of region UEs for which each proposed MCS is viable, in proposal order.
    pub fn viable_counts(&self, region: Region, combo: &McsCombination) -> Result<Vec<usize>> {
        viable_counts(&self.table, self.region_members(region)?, combo)
    }

    /// MCS suitability score: mean over proposed MCSs of the fraction of region UEs that can use it.
    pub fn mss(&self, region: Region, combo: &McsCombination) -> Result<f64> {
        mss_of(&self.table, self.region_members(region)?, combo)
    }

    /// Region-average of the best usable spectral efficiency among the proposal,
    /// normalised by the table maximum. UEs with nothing usable contribute 0.
    pub fn se_avg(&self, region: Region, combo: &McsCombination) -> Result<f64> {
        se_avg_of(&self.table, self.region_members(region)?, combo)
    }

    pub fn score_combo(&self, region: Region, combo_index: usize, combo: &McsCombination) -> Result<ScoreRecord> {
        Ok(ScoreRecord::new(region, combo_index, self.mss(region, combo)?, self.se_avg(region, combo)?))
    }

    pub fn score(&self, space: &RegionActionSpace, combo_index: usize) -> Result<ScoreRecord> {
        let combo = space.combination_at(combo_index)?;
        self.score_combo(space.region(), combo_index, combo)
    }

    /// Scores every position of a space. Positions are independent, so this runs in parallel.
    pub fn score_all(&self, space: &RegionActionSpace) -> Result<Vec<ScoreRecord>> {
        (0..space.len()).into_par_iter().map(|i| self.score(space, i)).collect()
    }

    fn region_members(&self, region: Region) -> Result<&[f64]> {
        let db = self.population.region_db(region);
        if db.is_empty() {
            Err(Error::Scoring(format!("region {region} has no UEs")))
        } else {
            Ok(db)
        }
    }
}

/// Viable-UE count per proposed MCS over `sorted_db` (ascending SIR in dB).
pub fn viable_counts(table: &McsTable, sorted_db: &[f64], combo: &McsCombination) -> Result<Vec<usize>> {
    combo
        .indices()
        .iter()
        .map(|&m| {
            let thr = table.min_sinr(m)?;
            Ok(sorted_db.len() - sorted_db.partition_point(|&d| d < thr))
        })
        .collect()
}

pub fn mss_of(table: &McsTable, sorted_db: &[f64], combo: &McsCombination) -> Result<f64> {
    if sorted_db.is_empty() {
        return Err(Error::Scoring("no UEs to score".into()));
    }
    let counts = viable_counts(table, sorted_db, combo)?;
    Ok(mss_from_counts(&counts, sorted_db.len() as f64))
}

pub fn se_avg_of(table: &McsTable, sorted_db: &[f64], combo: &McsCombination) -> Result<f64> {
    if sorted_db.is_empty() {
        return Err(Error::Scoring("no UEs to score".into()));
    }
    let counts = viable_counts(table, sorted_db, combo)?;
    // viability is nested in the index, so the UEs whose best MCS is the
    // j-th proposal are those viable for it but not for the (j+1)-th
    let bands: Vec<usize> = (0..counts.len())
        .map(|j| counts[j] - counts.get(j + 1).copied().unwrap_or(0))
        .collect();
    let ses = combo.indices().iter().map(|&m| table.se(m)).collect::<Result<Vec<_>>>()?;
    Ok(se_norm_from_bands(&ses, &bands, sorted_db.len() as f64, table.max_se()))
}

/// `(1/k) Σ count_m / n`, summed in proposal order.
pub fn mss_from_counts(counts: &[usize], n: f64) -> f64 {
    let total: f64 = counts.iter().map(|&c| c as f64 / n).sum();
    total / counts.len() as f64
}

/// `Σ se_m · band_m / n / max_se`, summed in proposal order.
pub fn se_norm_from_bands(ses: &[f64], bands: &[usize], n: f64, max_se: f64) -> f64 {
    let total: f64 = ses.iter().zip(bands).map(|(&se, &b)| se * b as f64).sum();
    total / n / max_se
}
