//! Ordered spaces of k-of-M MCS combinations and the three-neighbour moves
//! an agent can make through them.
//!
//! Under [`Ordering::SumSorted`] combinations are ranked by the sum of their
//! MCS indices (ties lexicographic), which keeps combinations of similar
//! rate adjacent in the enumeration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcs::MAX_MCS_INDEX;
use crate::region::Region;

/// Combination size of the reduced action space.
pub const DEFAULT_K: usize = 4;

/// Sorted set of distinct MCS indices proposed together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct McsCombination(Vec<u8>);

impl McsCombination {
    /// Accepts indices in any order; rejects duplicates, empties and indices above 28.
    pub fn new(mut indices: Vec<u8>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Domain("combination must not be empty".into()));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate MCS index in {indices:?}")));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i > MAX_MCS_INDEX) {
            return Err(Error::Domain(format!("MCS index {bad} outside 0..=28")));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> u32 {
        self.0.iter().map(|&i| u32::from(i)).sum()
    }
}

impl fmt::Display for McsCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    Lexicographic,
    SumSorted,
}

impl FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "lexicographic" | "lex" => Ok(Ordering::Lexicographic),
            "sum-sorted" | "sumsorted" | "sum" => Ok(Ordering::SumSorted),
            other => Err(Error::Config(format!("unknown ordering {other:?}"))),
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering::Lexicographic => "lexicographic",
            Ordering::SumSorted => "sum-sorted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Prev,
    Stay,
    Next,
}

impl Action {
    /// Fixed order, also the greedy tie-break order.
    pub const ALL: [Action; 3] = [Action::Prev, Action::Stay, Action::Next];

    pub fn index(self) -> usize {
        match self {
            Action::Prev => 0,
            Action::Stay => 1,
            Action::Next => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Prev => "prev",
            Action::Stay => "stay",
            Action::Next => "next",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Allowed MCS indices per region for the reduced 12-of-29 split, k = 4.
pub fn final_split(region: Region) -> Vec<u8> {
    match region {
        Region::CellEdge => (0..=11).collect(),
        Region::CellMedian => (6..=17).collect(),
        Region::CellCenter => (17..=28).collect(),
    }
}

/// The naive contiguous 11/9/11 split with one-MCS overlaps, used with k = 3.
pub fn naive_split(region: Region) -> Vec<u8> {
    match region {
        Region::CellEdge => (0..=10).collect(),
        Region::CellMedian => (10..=18).collect(),
        Region::CellCenter => (18..=28).collect(),
    }
}

/// Combination size used with [`naive_split`].
pub const NAIVE_K: usize = 3;

#[derive(Debug, Clone)]
pub struct RegionActionSpace {
    region: Region,
    allowed: Vec<u8>,
    k: usize,
    ordering: Ordering,
    combos: Vec<McsCombination>,
}

impl RegionActionSpace {
    pub fn build(region: Region, allowed: &[u8], k: usize, ordering: Ordering) -> Result<Self> {
        let mut allowed = allowed.to_vec();
        allowed.sort_unstable();
        allowed.dedup();
        if let Some(&bad) = allowed.iter().find(|&&i| i > MAX_MCS_INDEX) {
            return Err(Error::Domain(format!("allowed set contains MCS index {bad} > 28")));
        }
        if k == 0 || k > allowed.len() {
            return Err(Error::Domain(format!("cannot choose {k} of {} MCSs", allowed.len())));
        }
        let mut combos = lexicographic_subsets(&allowed, k);
        if ordering == Ordering::SumSorted {
            // stable: equal sums keep lexicographic order
            combos.sort_by_key(McsCombination::sum);
        }
        Ok(Self { region, allowed, k, ordering, combos })
    }

    /// Sum-sorted, k = 4 space over the region's reduced allowed set.
    pub fn final_config(region: Region) -> Self {
        Self::build(region, &final_split(region), DEFAULT_K, Ordering::SumSorted).expect("static configuration")
    }

    /// Lexicographic, k = 3 space over the naive split.
    pub fn naive_config(region: Region) -> Self {
        Self::build(region, &naive_split(region), NAIVE_K, Ordering::Lexicographic).expect("static configuration")
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn allowed(&self) -> &[u8] {
        &self.allowed
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    pub fn combos(&self) -> &[McsCombination] {
        &self.combos
    }

    pub fn combination_at(&self, idx: usize) -> Result<&McsCombination> {
        self.combos
            .get(idx)
            .ok_or_else(|| Error::Domain(format!("position {idx} outside action space of size {}", self.len())))
    }

    pub fn position_of(&self, combo: &McsCombination) -> Option<usize> {
        self.combos.iter().position(|c| c == combo)
    }

    /// Saturates at both ends.
    pub fn neighbor(&self, idx: usize, action: Action) -> usize {
        match action {
            Action::Stay => idx,
            Action::Prev => idx.saturating_sub(1),
            Action::Next => (idx + 1).min(self.len() - 1),
        }
    }
}

fn lexicographic_subsets(items: &[u8], k: usize) -> Vec<McsCombination> {
    let n = items.len();
    let mut out = Vec::new();
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        out.push(McsCombination(pick.iter().map(|&i| items[i]).collect()));
        // rightmost slot that can still advance
        let Some(slot) = (0..k).rev().find(|&s| pick[s] < n - k + s) else {
            return out;
        };
        pick[slot] += 1;
        for s in slot + 1..k {
            pick[s] = pick[s - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn combo(v: &[u8]) -> McsCombination {
        McsCombination::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sizes_match_binomials() {
        for r in Region::ALL {
            assert_eq!(RegionActionSpace::final_config(r).len(), 495);
        }
        assert_eq!(RegionActionSpace::naive_config(Region::CellEdge).len(), 165);
        assert_eq!(RegionActionSpace::naive_config(Region::CellMedian).len(), 84);
        assert_eq!(RegionActionSpace::naive_config(Region::CellCenter).len(), 165);
    }

    #[test]
    fn sum_sorted_positions() {
        let s = RegionActionSpace::final_config(Region::CellEdge);
        assert_eq!(s.combination_at(0).unwrap(), &combo(&[0, 1, 2, 3]));
        assert_eq!(s.combination_at(1).unwrap(), &combo(&[0, 1, 2, 4]));
        assert_eq!(s.combination_at(2).unwrap(), &combo(&[0, 1, 2, 5]));
        assert_eq!(s.combination_at(3).unwrap(), &combo(&[0, 1, 3, 4]));
        assert_eq!(s.combination_at(494).unwrap(), &combo(&[8, 9, 10, 11]));
        assert_eq!(s.combination_at(494).unwrap().sum(), 38);
        assert!(s.combination_at(495).is_err());
    }

    #[test]
    fn lexicographic_first_and_last() {
        let s = RegionActionSpace::naive_config(Region::CellMedian);
        assert_eq!(s.combination_at(0).unwrap(), &combo(&[10, 11, 12]));
        assert_eq!(s.combination_at(1).unwrap(), &combo(&[10, 11, 13]));
        assert_eq!(s.combination_at(83).unwrap(), &combo(&[16, 17, 18]));
    }

    #[test]
    fn neighbor_saturates() {
        let s = RegionActionSpace::final_config(Region::CellCenter);
        assert_eq!(s.neighbor(10, Action::Stay), 10);
        assert_eq!(s.neighbor(10, Action::Prev), 9);
        assert_eq!(s.neighbor(10, Action::Next), 11);
        assert_eq!(s.neighbor(0, Action::Prev), 0);
        assert_eq!(s.neighbor(494, Action::Next), 494);
    }

    #[test]
    fn build_rejects_oversized_k() {
        assert!(RegionActionSpace::build(Region::CellEdge, &[0, 1, 2], 4, Ordering::SumSorted).is_err());
        assert!(RegionActionSpace::build(Region::CellEdge, &[0, 1, 29], 2, Ordering::SumSorted).is_err());
        assert!(RegionActionSpace::build(Region::CellEdge, &[0, 1, 2], 0, Ordering::SumSorted).is_err());
    }

    #[test]
    fn combination_validation() {
        assert!(McsCombination::new(vec![]).is_err());
        assert!(McsCombination::new(vec![3, 3]).is_err());
        assert!(McsCombination::new(vec![29]).is_err());
        assert_eq!(McsCombination::new(vec![5, 1, 3]).unwrap().indices(), &[1, 3, 5]);
    }
}
