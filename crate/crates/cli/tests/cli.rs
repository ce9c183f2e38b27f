use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mcs_game(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcs-game"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .output()
        .expect("spawn mcs-game")
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn sweep_writes_full_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcs_game(dir.path(), &["sweep", "--n-ues", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for region in ["center", "median", "edge"] {
        let rows = data_rows(&dir.path().join(format!("curve_{region}.csv")));
        assert_eq!(rows.len(), 495);
        assert!(rows.iter().all(|r| r.starts_with(region)));
    }
}

#[test]
fn naive_split_edge_has_165_combinations() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcs_game(dir.path(), &["sweep", "--n-ues", "2000", "--naive-split", "--ordering", "lexicographic"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&dir.path().join("curve_edge.csv")).len(), 165);
    assert_eq!(data_rows(&dir.path().join("combos_edge.csv")).len(), 165);
}

#[test]
fn csv_files_carry_seed_and_config() {
    let dir = tempfile::tempdir().unwrap();
    mcs_game(dir.path(), &["sample-sir", "--seed", "9", "--n-ues", "100"]);
    let text = fs::read_to_string(dir.path().join("sir_samples.csv")).unwrap();
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header.iter().any(|l| l.contains("seed: 9")));
    assert!(header.iter().any(|l| l.contains("\"n-ues\":100")));
}

#[test]
fn sample_sir_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = mcs_game(d.path(), &["sample-sir", "--seed", "7", "--n-ues", "500"]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| {
        // the config line records the output directory, which differs between runs
        fs::read_to_string(d.path().join("sir_samples.csv"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# config"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(read(&a), read(&b));
    assert_eq!(data_rows(&a.path().join("sir_samples.csv")).len(), 500);
}

#[test]
fn zero_steps_gives_empty_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcs_game(dir.path(), &["train", "--n-ues", "1000", "--steps", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for region in ["center", "median", "edge"] {
        assert!(data_rows(&dir.path().join(format!("trace_{region}.csv"))).is_empty());
    }
    let check = mcs_game(dir.path(), &["train", "--n-ues", "1000", "--steps", "0", "--check"]);
    assert_eq!(check.status.code(), Some(1));
}

#[test]
fn train_check_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcs_game(dir.path(), &["train", "--n-ues", "2000", "--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert_eq!(summary.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn session_transcript_verifies_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcs_game(dir.path(), &["session", "--n-ues", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("transcript.jsonl");
    let ok = mcs_game(dir.path(), &["verify-transcript", path.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let text = fs::read_to_string(&path).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .map(|l| {
            if l.contains("\"type\":\"score\"") && l.contains("\"region\":\"edge\"") {
                l.replace("\"reward\":0.", "\"reward\":0.9")
            } else {
                l.to_owned()
            }
        })
        .collect();
    assert_ne!(tampered.join("\n"), text.trim_end());
    let bad = dir.path().join("tampered.jsonl");
    fs::write(&bad, tampered.join("\n") + "\n").unwrap();
    let rejected = mcs_game(dir.path(), &["verify-transcript", bad.to_str().unwrap()]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn unreachable_threshold_exits_with_no_consensus() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcs_game(
        dir.path(),
        &["session", "--n-ues", "1000", "--steps", "200", "--threshold", "2.0", "--max-rounds", "20"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("transcript.jsonl").exists());
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = mcs_game(&blocker.join("sub"), &["sweep", "--n-ues", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 1\nno-such-key = 3\n").unwrap();
    let out = mcs_game(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mcs_game(dir.path(), &["sweep", "--n-ues", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_values_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 5\nn-ues = 300\n").unwrap();
    let out = mcs_game(dir.path(), &["--config", cfg.to_str().unwrap(), "sample-sir"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&dir.path().join("sir_samples.csv")).len(), 300);
}
