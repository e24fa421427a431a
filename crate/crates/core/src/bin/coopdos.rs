use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use coopdos::harness::{
    emit_csv, parse_config, run_point, summarize, ConfigError, RunRow, ScenarioConfig,
};
use coopdos::threat::AttackMode;

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

const FULL_DURATION_S: u64 = 500;
const FULL_SEEDS: u32 = 50;

#[derive(Parser)]
#[command(version, about = "Cooperative-MAC denial-of-service simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configuration over several seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Number of seeds, overriding `repetitions`.
        #[arg(long)]
        seeds: Option<u32>,
        /// Per-run CSV; the summary goes to `<stem>_summary.csv` beside it.
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// 500 s runs over 50 seeds.
        #[arg(long = "paper-scale")]
        full_scale: bool,
    },
    /// Sweep the station count, with the defense on, off or both.
    Sweep {
        /// `start:end:step`, inclusive.
        #[arg(long, value_parser = parse_range)]
        nodes: NodeRange,
        #[arg(long, default_value_t = 0)]
        attackers: u16,
        #[arg(long, value_enum, default_value_t = DefenseArg::Both)]
        defense: DefenseArg,
        /// Base configuration; `n_nodes` and the attacker list are replaced.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<u32>,
        /// Output directory for runs.csv and summary.csv.
        #[arg(long)]
        out: PathBuf,
        /// 500 s runs over 50 seeds.
        #[arg(long = "paper-scale")]
        full_scale: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DefenseArg {
    On,
    Off,
    Both,
}

impl DefenseArg {
    fn settings(self) -> &'static [bool] {
        match self {
            DefenseArg::On => &[true],
            DefenseArg::Off => &[false],
            DefenseArg::Both => &[true, false],
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct NodeRange {
    start: u16,
    end: u16,
    step: u16,
}

fn parse_range(s: &str) -> Result<NodeRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<u16>().map_err(|e| format!("`{p}`: {e}"));
    let r = match parts.as_slice() {
        [n] => NodeRange {
            start: num(n)?,
            end: num(n)?,
            step: 1,
        },
        [a, b] => NodeRange {
            start: num(a)?,
            end: num(b)?,
            step: 1,
        },
        [a, b, c] => NodeRange {
            start: num(a)?,
            end: num(b)?,
            step: num(c)?,
        },
        _ => return Err("expected start:end:step".into()),
    };
    if r.step == 0 || r.start > r.end {
        return Err("need start <= end and a positive step".into());
    }
    Ok(r)
}

enum Failure {
    Config(ConfigError),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            e => Failure::Config(e),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("cannot write {}: {e}", path.display()))
}

fn apply_scale(cfg: &mut ScenarioConfig, seeds: Option<u32>, full_scale: bool) {
    if full_scale {
        cfg.sim_duration_s = FULL_DURATION_S;
        cfg.repetitions = FULL_SEEDS;
    }
    if let Some(n) = seeds {
        cfg.repetitions = n;
    }
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn print_summary(rows: &[RunRow]) {
    for s in summarize(rows) {
        let half = s
            .ci95_half_bps
            .map(|h| format!(" +/- {:.0}", h))
            .unwrap_or_default();
        println!(
            "{} defense={} runs={} throughput={:.0}{} bit/s",
            s.scenario_id,
            if s.defense { "on" } else { "off" },
            s.runs,
            s.mean_throughput_bps,
            half
        );
    }
}

fn run(config: &Path, seeds: Option<u32>, out: &Path, full_scale: bool) -> Result<(), Failure> {
    let mut cfg = parse_config(config)?;
    apply_scale(&mut cfg, seeds, full_scale);
    let rows: Vec<RunRow> = run_point(&cfg)?.into_iter().map(|(r, _)| r).collect();
    let summary = summary_path(out);
    emit_csv(out, &summary, &rows).map_err(|e| io_failure(out, e))?;
    print_summary(&rows);
    Ok(())
}

fn sweep(
    nodes: NodeRange,
    attackers: u16,
    defense: DefenseArg,
    config: Option<&Path>,
    seeds: Option<u32>,
    out: &Path,
    full_scale: bool,
) -> Result<(), Failure> {
    let mut base = match config {
        Some(p) => parse_config(p)?,
        None => ScenarioConfig::default(),
    };
    apply_scale(&mut base, seeds, full_scale);
    let mode = base
        .attackers
        .first()
        .map(|a| a.mode)
        .unwrap_or_else(AttackMode::inflation);

    let mut rows = Vec::new();
    for n in (nodes.start..=nodes.end).step_by(nodes.step as usize) {
        if attackers >= n {
            return Err(Failure::Config(ConfigError::invalid(
                "attackers",
                format!("{attackers} attackers leave no honest station among {n}"),
            )));
        }
        for &on in defense.settings() {
            let cfg = ScenarioConfig {
                n_nodes: n,
                defense_enabled: on,
                ..base.clone()
            }
            .with_attackers(attackers, mode);
            rows.extend(run_point(&cfg)?.into_iter().map(|(r, _)| r));
            eprintln!("n={n} defense={} done", if on { "on" } else { "off" });
        }
    }

    std::fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    let runs = out.join("runs.csv");
    emit_csv(&runs, &out.join("summary.csv"), &rows).map_err(|e| io_failure(&runs, e))?;
    print_summary(&rows);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run {
            config,
            seeds,
            out,
            full_scale,
        } => run(&config, seeds, &out, full_scale),
        Cmd::Sweep {
            nodes,
            attackers,
            defense,
            config,
            seeds,
            out,
            full_scale,
        } => sweep(
            nodes,
            attackers,
            defense,
            config.as_deref(),
            seeds,
            &out,
            full_scale,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r = parse_range("5:50:5").unwrap();
        assert_eq!((r.start, r.end, r.step), (5, 50, 5));
        let r = parse_range("7").unwrap();
        assert_eq!((r.start, r.end), (7, 7));
        assert!(parse_range("5:1").is_err());
        assert!(parse_range("1:5:0").is_err());
        assert!(parse_range("a:b").is_err());
    }

    #[test]
    fn summary_beside_output() {
        assert_eq!(
            summary_path(Path::new("out/res.csv")),
            Path::new("out/res_summary.csv")
        );
    }
}
