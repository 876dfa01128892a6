use std::path::Path;
use std::process::{Command, Output};

use phasesync_harness::records::read_records;

fn phasesync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasesync"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_solve_certify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("c.txt");
    let cand = dir.path().join("x.txt");
    let out = phasesync(&["gen", "--n", "40", "--multiplier", "0.2", "--seed", "5", "--out", path(&inst)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = phasesync(&["solve", path(&inst), "--candidate-out", path(&cand)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["converged"], true);
    assert!(report["l2_err"].as_f64().unwrap() < 2.0);

    let out = phasesync(&["certify", path(&inst), path(&cand)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["report"]["rank_deficiency_ok"], true);
    assert!(report["report"]["lambda2"].as_f64().unwrap() > 0.0);

    let out = phasesync(&["solve", path(&inst), "--estimator", "projected-eig"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["estimator"], "projected-eig");
}

#[test]
fn sweep_and_plot_from_toml() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        format!(
            "n_values = [10, 16]\ntrials_per_cell = 2\nbase_seed = 3\nestimator_set = [\"gpm\", \"eig\"]\noutput_dir = {:?}\n\n[sigma_spec]\nrelative = [0.1, 0.4]\n",
            path(&out_dir)
        ),
    )
    .unwrap();
    let out = phasesync(&["sweep", path(&config), "--workers", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_records(&out_dir.join("records.csv")).unwrap();
    assert_eq!(records.len(), 2 * 2 * 2 * 2);
    assert!(out_dir.join("summary.json").exists());

    let plots = dir.path().join("plots");
    let out = phasesync(&["plot", path(&out_dir.join("records.csv")), "--out-dir", path(&plots)]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
    assert!(plots.join("success_heatmap.svg").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    assert_eq!(phasesync(&["solve", path(&missing)]).status.code(), Some(3));
    assert_eq!(phasesync(&["gen", "--n", "4", "--out", path(&missing)]).status.code(), Some(1));
    assert_eq!(phasesync(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(phasesync(&["--help"]).status.code(), Some(0));

    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "n_values = [10]\ntrials_per_cell = 0\noutput_dir = \"x\"\n[sigma_spec]\nrelative = [0.1]\n").unwrap();
    assert_eq!(phasesync(&["sweep", path(&config)]).status.code(), Some(1));

    let garbled = dir.path().join("garbled.txt");
    std::fs::write(&garbled, "phasesync-instance v1\nn=two\n").unwrap();
    let out = phasesync(&["solve", path(&garbled)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2"));
}
