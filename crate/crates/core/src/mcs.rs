//! MCS lookup table: modulation, spectral efficiency and minimum viable SINR
//! for the 29 schemes, loaded from a CSV data file.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sir::Sir;

/// Number of schemes in the table.
pub const MCS_COUNT: usize = 29;
/// Highest valid MCS index.
pub const MAX_MCS_INDEX: u8 = 28;

/// Resource elements per resource block per 1 ms subframe (12 subcarriers × 14 symbols).
pub const RE_PER_RB_SUBFRAME: f64 = 168.0;
const SUBFRAMES_PER_SECOND: f64 = 1000.0;

const BUNDLED: &str = include_str!("../data/lte_mcs.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "16QAM")]
    Qam16,
    #[serde(rename = "64QAM")]
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
        })
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "QPSK" => Ok(Modulation::Qpsk),
            "16QAM" | "QAM16" => Ok(Modulation::Qam16),
            "64QAM" | "QAM64" => Ok(Modulation::Qam64),
            other => Err(Error::Table(format!("unknown modulation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    #[serde(rename = "mcs_index")]
    pub index: u8,
    pub modulation: Modulation,
    #[serde(rename = "se_bits_per_re")]
    pub se: f64,
    pub min_sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
    source: String,
}

impl McsTable {
    /// The table shipped in `data/lte_mcs.csv`.
    pub fn bundled() -> Self {
        Self::from_reader(BUNDLED.as_bytes(), "bundled:lte_mcs.csv v1").expect("bundled MCS table is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Parses and validates a table. Row numbers in errors count data rows from 1.
    pub fn from_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut entries: Vec<McsEntry> = Vec::with_capacity(MCS_COUNT);
        for (i, rec) in rdr.deserialize::<McsEntry>().enumerate() {
            let row = i + 1;
            let e = rec.map_err(|err| Error::TableRow { row, msg: err.to_string() })?;
            if e.index > MAX_MCS_INDEX {
                return Err(Error::TableRow { row, msg: format!("index {} outside 0..=28", e.index) });
            }
            if !(e.se.is_finite() && e.se > 0.0) || !e.min_sinr_db.is_finite() {
                return Err(Error::TableRow { row, msg: "spectral efficiency must be positive and values finite".into() });
            }
            if entries.iter().any(|p| p.index == e.index) {
                return Err(Error::TableRow { row, msg: format!("duplicate index {}", e.index) });
            }
            entries.push(e);
        }
        if entries.len() != MCS_COUNT {
            return Err(Error::Table(format!("expected 29 rows, found {}", entries.len())));
        }
        entries.sort_by_key(|e| e.index);
        for (row, w) in entries.windows(2).enumerate() {
            if w[1].se <= w[0].se {
                return Err(Error::TableRow { row: row + 2, msg: format!("spectral efficiency not increasing at index {}", w[1].index) });
            }
            if w[1].min_sinr_db <= w[0].min_sinr_db {
                return Err(Error::TableRow { row: row + 2, msg: format!("min SINR not increasing at index {}", w[1].index) });
            }
        }
        Ok(Self { entries, source: source.to_string() })
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn entry(&self, index: u8) -> Result<&McsEntry> {
        self.entries
            .get(usize::from(index))
            .ok_or_else(|| Error::Domain(format!("MCS index {index} outside 0..=28")))
    }

    pub fn se(&self, index: u8) -> Result<f64> {
        Ok(self.entry(index)?.se)
    }

    pub fn min_sinr(&self, index: u8) -> Result<f64> {
        Ok(self.entry(index)?.min_sinr_db)
    }

    /// Normalisation constant for averaged spectral efficiency.
    pub fn max_se(&self) -> f64 {
        self.entries[MCS_COUNT - 1].se
    }

    /// Minimum SINR (dB) for an arbitrary efficiency, linear between anchors.
    pub fn interpolate_min_sinr(&self, se: f64) -> Result<f64> {
        let first = &self.entries[0];
        let last = &self.entries[MCS_COUNT - 1];
        if !(se >= first.se && se <= last.se) {
            return Err(Error::Domain(format!("spectral efficiency {se} outside [{}, {}]", first.se, last.se)));
        }
        // first anchor with se >= target
        let hi = self.entries.partition_point(|e| e.se < se);
        let b = &self.entries[hi];
        if b.se == se || hi == 0 {
            return Ok(b.min_sinr_db);
        }
        let a = &self.entries[hi - 1];
        let t = (se - a.se) / (b.se - a.se);
        Ok(a.min_sinr_db + t * (b.min_sinr_db - a.min_sinr_db))
    }

    /// Peak rate in bit/s over `n_rb` resource blocks, no overhead deducted.
    pub fn peak_throughput(&self, index: u8, n_rb: u32) -> Result<f64> {
        if n_rb == 0 {
            return Err(Error::Domain("resource-block count must be positive".into()));
        }
        Ok(self.se(index)? * RE_PER_RB_SUBFRAME * f64::from(n_rb) * SUBFRAMES_PER_SECOND)
    }

    /// Ties count as viable.
    pub fn viable(&self, index: u8, sir: Sir) -> Result<bool> {
        Ok(sir.db() >= self.min_sinr(index)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> String {
        let mut s = String::from("mcs_index,modulation,se_bits_per_re,min_sinr_db\n");
        for i in 0..n {
            s += &format!("{i},QPSK,{},{}\n", 0.1 + i as f64 * 0.2, -5.0 + i as f64);
        }
        s
    }

    #[test]
    fn bundled_has_29_monotone_entries() {
        let t = McsTable::bundled();
        assert_eq!(t.entries().len(), 29);
        assert_eq!(t.entry(0).unwrap().modulation, Modulation::Qpsk);
        assert_eq!(t.entry(9).unwrap().modulation, Modulation::Qpsk);
        assert_eq!(t.entry(10).unwrap().modulation, Modulation::Qam16);
        assert_eq!(t.entry(16).unwrap().modulation, Modulation::Qam16);
        assert_eq!(t.entry(17).unwrap().modulation, Modulation::Qam64);
        assert_eq!(t.entry(28).unwrap().modulation, Modulation::Qam64);
        for w in t.entries().windows(2) {
            assert!(w[0].se < w[1].se);
            assert!(w[0].min_sinr_db < w[1].min_sinr_db);
        }
        assert!(t.min_sinr(12).unwrap() < t.min_sinr(13).unwrap());
        assert_eq!(t.max_se(), t.se(28).unwrap());
    }

    #[test]
    fn row_count_enforced() {
        let err = McsTable::from_reader(rows(28).as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("expected 29 rows"), "{err}");
        assert!(McsTable::from_reader(rows(29).as_bytes(), "t").is_ok());
    }

    #[test]
    fn duplicate_index_reports_row() {
        let s = rows(29).replace("\n5,QPSK", "\n4,QPSK");
        match McsTable::from_reader(s.as_bytes(), "t") {
            Err(Error::TableRow { row, .. }) => assert_eq!(row, 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_monotone_rejected() {
        let s: String = rows(29)
            .lines()
            .map(|l| if l.starts_with("7,") { "7,QPSK,0.2,2".to_string() } else { l.to_string() })
            .collect::<Vec<_>>()
            .join("\n");
        assert!(matches!(McsTable::from_reader(s.as_bytes(), "t"), Err(Error::TableRow { .. })));
    }

    #[test]
    fn comments_are_skipped() {
        let s = format!("# provenance\n{}", rows(29));
        assert!(McsTable::from_reader(s.as_bytes(), "t").is_ok());
    }

    #[test]
    fn interpolation_anchors_and_segments() {
        let t = McsTable::bundled();
        for e in t.entries() {
            assert_eq!(t.interpolate_min_sinr(e.se).unwrap(), e.min_sinr_db);
        }
        let (a, b) = (t.entry(3).unwrap(), t.entry(4).unwrap());
        let mid = t.interpolate_min_sinr((a.se + b.se) / 2.0).unwrap();
        assert!((mid - (a.min_sinr_db + b.min_sinr_db) / 2.0).abs() < 1e-12);
        assert!(t.interpolate_min_sinr(0.0).is_err());
        assert!(t.interpolate_min_sinr(t.max_se() + 0.01).is_err());
    }

    #[test]
    fn interpolation_is_monotone() {
        let t = McsTable::bundled();
        let (lo, hi) = (t.se(0).unwrap(), t.max_se());
        let vals: Vec<f64> = (0..1000).map(|i| t.interpolate_min_sinr(lo + (hi - lo) * i as f64 / 999.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn peak_throughput_formula() {
        let t = McsTable::bundled();
        assert!(t.peak_throughput(5, 0).is_err());
        assert!(t.peak_throughput(29, 1).is_err());
        assert_eq!(t.peak_throughput(28, 50).unwrap(), 5.5547 * 168.0 * 50.0 * 1000.0);
        assert_eq!(t.peak_throughput(12, 20).unwrap(), 2.0 * t.peak_throughput(12, 10).unwrap());
    }

    #[test]
    fn viability() {
        let t = McsTable::bundled();
        assert!(t.viable(0, Sir::from_db(60.0).unwrap()).unwrap());
        assert!(!t.viable(28, Sir::from_db(-60.0).unwrap()).unwrap());
        assert!(t.viable(29, Sir::from_db(0.0).unwrap()).is_err());
        // exact tie at the threshold counts as viable
        let thr = t.min_sinr(7).unwrap();
        let s = Sir::from_db(thr).unwrap();
        let tie = if s.db() >= thr { s } else { Sir::new(s.linear() * (1.0 + f64::EPSILON)).unwrap() };
        assert!(t.viable(7, tie).unwrap());
    }

    #[test]
    fn viability_is_downward_closed() {
        let t = McsTable::bundled();
        for db in (-80..260).map(|d| d as f64 / 10.0) {
            let s = Sir::from_db(db).unwrap();
            for i in 1..=MAX_MCS_INDEX {
                if t.viable(i, s).unwrap() {
                    assert!((0..i).all(|j| t.viable(j, s).unwrap()));
                }
            }
        }
    }
}
