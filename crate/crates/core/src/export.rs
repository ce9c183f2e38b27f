//! CSV artifacts. Each file opens with `#` comment lines describing the run.

use std::io::Write;

use crate::action_space::RegionActionSpace;
use crate::agent::{QAgent, TraceRow};
use crate::error::Result;
use crate::evaluator::ScoreRecord;
use crate::oracle::RewardCurve;
use crate::sir::Sir;

fn with_header<W: Write>(mut w: W, header: &[String]) -> Result<csv::Writer<W>> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    Ok(csv::Writer::from_writer(w))
}

pub fn write_sir_samples<W: Write>(w: W, header: &[String], sirs: &[Sir]) -> Result<()> {
    let mut out = with_header(w, header)?;
    out.write_record(["ue_index", "sir_linear", "sir_db"])?;
    for (i, s) in sirs.iter().enumerate() {
        out.write_record([i.to_string(), s.linear().to_string(), s.db().to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_curve<W: Write>(w: W, header: &[String], curve: &RewardCurve) -> Result<()> {
    let mut out = with_header(w, header)?;
    out.write_record(["region", "combo_index", "reward", "smoothed_reward"])?;
    for (i, (v, s)) in curve.values.iter().zip(&curve.smoothed).enumerate() {
        out.write_record([curve.region.to_string(), i.to_string(), v.to_string(), s.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_scores<W: Write>(w: W, header: &[String], scores: &[ScoreRecord]) -> Result<()> {
    let mut out = with_header(w, header)?;
    out.write_record(["region", "combo_index", "mss", "se_norm", "reward"])?;
    for s in scores {
        out.write_record([
            s.region.to_string(),
            s.combo_index.to_string(),
            s.mss.to_string(),
            s.se_norm.to_string(),
            s.reward.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `region,combo_index,mcs_a,mcs_b,…,sum`, one MCS column per member.
pub fn write_combos<W: Write>(w: W, header: &[String], space: &RegionActionSpace) -> Result<()> {
    let mut out = with_header(w, header)?;
    let mut cols = vec!["region".to_string(), "combo_index".to_string()];
    cols.extend((0..space.k()).map(|j| format!("mcs_{}", (b'a' + j as u8) as char)));
    cols.push("sum".into());
    out.write_record(&cols)?;
    for (i, c) in space.combos().iter().enumerate() {
        let mut rec = vec![space.region().to_string(), i.to_string()];
        rec.extend(c.indices().iter().map(|m| m.to_string()));
        rec.push(c.sum().to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(w: W, header: &[String], trace: &[TraceRow]) -> Result<()> {
    let mut out = with_header(w, header)?;
    out.write_record(["step", "episode", "combo_index", "action", "mss", "se_norm", "reward", "state_bin", "alpha", "epsilon"])?;
    for t in trace {
        out.write_record([
            t.step.to_string(),
            t.episode.to_string(),
            t.combo_index.to_string(),
            t.action.to_string(),
            t.mss.to_string(),
            t.se_norm.to_string(),
            t.reward.to_string(),
            t.state_bin.to_string(),
            t.alpha.to_string(),
            t.epsilon.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_q_table<W: Write>(w: W, header: &[String], agent: &QAgent) -> Result<()> {
    let mut out = with_header(w, header)?;
    out.write_record(["state_bin", "action", "q_value"])?;
    for (s, a, q) in agent.q_snapshot() {
        out.write_record([s.to_string(), a.to_string(), q.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Region;

    #[test]
    fn combos_csv_layout() {
        let space = RegionActionSpace::final_config(Region::CellEdge);
        let mut buf = Vec::new();
        write_combos(&mut buf, &["run".to_string()], &space).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# run"));
        assert_eq!(lines.next(), Some("region,combo_index,mcs_a,mcs_b,mcs_c,mcs_d,sum"));
        assert_eq!(lines.next(), Some("edge,0,0,1,2,3,6"));
        assert_eq!(text.lines().count(), 2 + 495);
    }

    #[test]
    fn sir_csv_layout() {
        let mut buf = Vec::new();
        write_sir_samples(&mut buf, &[], &[Sir::new(1.0).unwrap()]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "ue_index,sir_linear,sir_db\n0,1,0\n");
    }
}
