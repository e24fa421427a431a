use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn coopdos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopdos"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("scenario.conf");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "\
# small cell
n_nodes = 6
sim_duration_s = 2
repetitions = 3
attackers[0].mode = inflate
attackers[0].node = 6
";

#[test]
fn run_writes_runs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("res.csv");
    let o = coopdos(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let runs = fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = runs.lines().collect();
    assert_eq!(
        lines[0],
        "scenario_id,n_nodes,n_attackers,attack_mode,defense,seed,throughput_bps,detections,false_positives,rts_sent,collisions"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("n6-a1-inflate-p2048-t2,6,1,inflate,on,1,"));

    let summary = fs::read_to_string(dir.path().join("res_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().contains(",on,3,"));
}

#[test]
fn seeds_flag_overrides_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("r.csv");
    let o = coopdos(&[
        "run",
        "--config",
        &cfg,
        "--seeds",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 3);
}

#[test]
fn bad_config_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n_nodes = 6\npayload_bytes = 9000\n");
    let out = dir.path().join("r.csv");
    let o = coopdos(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("payload_bytes"));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("missing").join("r.csv");
    let o = coopdos(&[
        "run",
        "--config",
        &cfg,
        "--seeds",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn missing_config_exits_3() {
    let o = coopdos(&["run", "--config", "/nonexistent/x.conf"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_pairs_defense_settings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "n_nodes = 2\nsim_duration_s = 1\nrepetitions = 2\n",
    );
    let out = dir.path().join("sweep");
    let o = coopdos(&[
        "sweep",
        "--nodes",
        "4:8:4",
        "--attackers",
        "1",
        "--defense",
        "both",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    // 2 node counts x 2 settings x 2 seeds
    assert_eq!(runs.lines().count(), 1 + 8);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let ids: Vec<_> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(5).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(
        ids,
        [
            "n4-a1-inflate-p2048-t1,4,1,inflate,on",
            "n4-a1-inflate-p2048-t1,4,1,inflate,off",
            "n8-a1-inflate-p2048-t1,8,1,inflate,on",
            "n8-a1-inflate-p2048-t1,8,1,inflate,off",
        ]
    );
}

#[test]
fn sweep_rejects_all_attacker_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = coopdos(&[
        "sweep",
        "--nodes",
        "2:4:2",
        "--attackers",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("attackers"));
}

#[test]
fn full_scale_sets_duration_and_seeds_can_still_be_capped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n_nodes = 2\n");
    let out = dir.path().join("r.csv");
    let o = coopdos(&[
        "run",
        "--config",
        &cfg,
        "--paper-scale",
        "--seeds",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let runs = fs::read_to_string(&out).unwrap();
    assert_eq!(runs.lines().count(), 2);
    assert!(runs
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("n2-a0-none-p2048-t500,"));
}

#[test]
fn shipped_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "conf") {
            coopdos::harness::parse_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}
