//! CSV emission. LF line endings, RFC 4180 quoting, fixed column order.

use std::io::{self, Write};
use std::path::Path;

use super::config::ScenarioConfig;
use super::metrics::RunMetrics;
use super::stats::aggregate_ci95;

pub const RUN_COLUMNS: [&str; 11] = [
    "scenario_id",
    "n_nodes",
    "n_attackers",
    "attack_mode",
    "defense",
    "seed",
    "throughput_bps",
    "detections",
    "false_positives",
    "rts_sent",
    "collisions",
];

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "scenario_id",
    "n_nodes",
    "n_attackers",
    "attack_mode",
    "defense",
    "runs",
    "mean_throughput_bps",
    "ci95_half_bps",
];

/// One CSV row per `(config point, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub scenario_id: String,
    pub n_nodes: u16,
    pub n_attackers: usize,
    pub attack_mode: String,
    pub defense: bool,
    pub seed: u64,
    pub throughput_bps: f64,
    pub detections: u64,
    pub false_positives: u64,
    pub rts_sent: u64,
    pub collisions: u64,
}

/// Identifies a config point independently of the defense toggle, so that
/// defense-on and defense-off rows pair up.
pub fn scenario_id(cfg: &ScenarioConfig) -> String {
    format!(
        "n{}-a{}-{}-p{}-t{}",
        cfg.n_nodes,
        cfg.attackers.len(),
        cfg.attack_mode_label(),
        cfg.payload_bytes,
        cfg.sim_duration_s
    )
}

fn defense_label(on: bool) -> &'static str {
    if on {
        "on"
    } else {
        "off"
    }
}

impl RunRow {
    pub fn new(cfg: &ScenarioConfig, seed: u64, m: &RunMetrics) -> Self {
        RunRow {
            scenario_id: scenario_id(cfg),
            n_nodes: cfg.n_nodes,
            n_attackers: cfg.attackers.len(),
            attack_mode: cfg.attack_mode_label().to_string(),
            defense: cfg.defense_enabled,
            seed,
            throughput_bps: m.throughput_bps(),
            detections: m.detections,
            false_positives: m.false_positives,
            rts_sent: m.rts_sent,
            collisions: m.collisions,
        }
    }

    pub fn fields(&self) -> [String; 11] {
        [
            self.scenario_id.clone(),
            self.n_nodes.to_string(),
            self.n_attackers.to_string(),
            self.attack_mode.clone(),
            defense_label(self.defense).to_string(),
            self.seed.to_string(),
            format!("{:.3}", self.throughput_bps),
            self.detections.to_string(),
            self.false_positives.to_string(),
            self.rts_sent.to_string(),
            self.collisions.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub n_nodes: u16,
    pub n_attackers: usize,
    pub attack_mode: String,
    pub defense: bool,
    pub runs: usize,
    pub mean_throughput_bps: f64,
    pub ci95_half_bps: Option<f64>,
}

impl SummaryRow {
    pub fn fields(&self) -> [String; 8] {
        [
            self.scenario_id.clone(),
            self.n_nodes.to_string(),
            self.n_attackers.to_string(),
            self.attack_mode.clone(),
            defense_label(self.defense).to_string(),
            self.runs.to_string(),
            format!("{:.3}", self.mean_throughput_bps),
            self.ci95_half_bps
                .map(|h| format!("{h:.3}"))
                .unwrap_or_default(),
        ]
    }
}

/// Group rows by `(scenario_id, defense)` in first-appearance order and
/// summarize each group.
pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, bool)> = Vec::new();
    for r in rows {
        let k = (r.scenario_id.clone(), r.defense);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(id, defense)| {
            let group: Vec<&RunRow> = rows
                .iter()
                .filter(|r| r.scenario_id == id && r.defense == defense)
                .collect();
            let tput: Vec<f64> = group.iter().map(|r| r.throughput_bps).collect();
            let ci = aggregate_ci95(&tput);
            let first = group[0];
            SummaryRow {
                scenario_id: id,
                n_nodes: first.n_nodes,
                n_attackers: first.n_attackers,
                attack_mode: first.attack_mode.clone(),
                defense,
                runs: group.len(),
                mean_throughput_bps: ci.mean,
                ci95_half_bps: ci.half_width,
            }
        })
        .collect()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(w)
}

fn to_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_runs<W: Write>(w: W, rows: &[RunRow]) -> io::Result<()> {
    let mut w = writer(w);
    w.write_record(RUN_COLUMNS).map_err(to_io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(to_io)?;
    }
    w.flush()
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> io::Result<()> {
    let mut w = writer(w);
    w.write_record(SUMMARY_COLUMNS).map_err(to_io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(to_io)?;
    }
    w.flush()
}

/// Write the per-run CSV to `runs_path` and its summary to `summary_path`.
pub fn emit_csv(runs_path: &Path, summary_path: &Path, rows: &[RunRow]) -> io::Result<()> {
    write_runs(std::fs::File::create(runs_path)?, rows)?;
    write_summary(std::fs::File::create(summary_path)?, &summarize(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, defense: bool, seed: u64, tput: f64) -> RunRow {
        RunRow {
            scenario_id: id.into(),
            n_nodes: 20,
            n_attackers: 1,
            attack_mode: "inflate".into(),
            defense,
            seed,
            throughput_bps: tput,
            detections: defense as u64,
            false_positives: 0,
            rts_sent: 10,
            collisions: 2,
        }
    }

    #[test]
    fn header_only_when_empty() {
        let mut buf = Vec::new();
        write_runs(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "scenario_id,n_nodes,n_attackers,attack_mode,defense,seed,throughput_bps,detections,false_positives,rts_sent,collisions\n"
        );
        let mut buf = Vec::new();
        write_summary(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "scenario_id,n_nodes,n_attackers,attack_mode,defense,runs,mean_throughput_bps,ci95_half_bps\n"
        );
    }

    #[test]
    fn rows_and_summary() {
        let rows = vec![
            row("x", false, 1, 1.0e6),
            row("x", false, 2, 3.0e6),
            row("x", true, 1, 5.0e6),
        ];
        let mut buf = Vec::new();
        write_runs(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "x,20,1,inflate,off,1,1000000.000,0,0,10,2"
        );

        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].runs, 2);
        assert_eq!(s[0].mean_throughput_bps, 2.0e6);
        assert!((s[0].ci95_half_bps.unwrap() - 12.706e6).abs() < 1e3);
        assert_eq!(s[1].ci95_half_bps, None);
        assert_eq!(s[1].fields()[7], "");
    }

    #[test]
    fn quoting_is_rfc4180() {
        let mut r = row("a,b", true, 1, 0.0);
        r.attack_mode = "say \"hi\"".into();
        let mut buf = Vec::new();
        write_runs(&mut buf, &[r]).unwrap();
        let line = String::from_utf8(buf)
            .unwrap()
            .lines()
            .nth(1)
            .unwrap()
            .to_string();
        assert!(line.starts_with("\"a,b\",20,1,\"say \"\"hi\"\"\",on,"));
    }
}
