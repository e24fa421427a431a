//! Scenario description and the flat `key = value` scenario file format.
//!
//! ```text
//! # one AP plus 20 stations, one of which inflates its RTS durations
//! n_nodes = 20
//! sim_duration_s = 50
//! defense_enabled = true
//! attackers[0].mode = inflate
//! attackers[0].claimed_us = 32767
//! ```
//!
//! Recognized keys: `n_nodes`, `playground` (only `500x500`),
//! `sim_duration_s`, `payload_bytes`, `defense_enabled`, `seed`,
//! `repetitions`, and per attacker `attackers[i].mode` (`inflate` or
//! `flood`), `attackers[i].node`, `attackers[i].claimed_us`,
//! `attackers[i].period_us`, `attackers[i].start_at_us`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::channel::NodeId;
use crate::channel::RateClass;
use crate::defense::legit_duration_ceiling;
use crate::engine::SimTime;
use crate::mac::{compute_duration, Route, MAX_DURATION_US};
use crate::threat::{AttackMode, AttackerConfig, DEFAULT_CLAIMED_US, DEFAULT_FLOOD_PERIOD_US};

pub const MAX_NODES: u16 = 200;
pub const DEFAULT_DURATION_S: u64 = 500;
pub const DEFAULT_PAYLOAD_BYTES: u32 = 2048;
pub const DEFAULT_REPETITIONS: u32 = 50;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }

    /// The offending key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    /// Stations including attackers; the AP is extra.
    pub n_nodes: u16,
    pub sim_duration_s: u64,
    pub payload_bytes: u32,
    pub attackers: Vec<AttackerConfig>,
    pub defense_enabled: bool,
    pub seed: u64,
    pub repetitions: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_nodes: 2,
            sim_duration_s: DEFAULT_DURATION_S,
            payload_bytes: DEFAULT_PAYLOAD_BYTES,
            attackers: Vec::new(),
            defense_enabled: true,
            seed: 1,
            repetitions: DEFAULT_REPETITIONS,
        }
    }
}

impl ScenarioConfig {
    pub fn with_nodes(n_nodes: u16) -> Self {
        ScenarioConfig {
            n_nodes,
            ..Default::default()
        }
    }

    /// `count` attackers with mode `mode` on the highest station ids.
    pub fn with_attackers(mut self, count: u16, mode: AttackMode) -> Self {
        self.attackers = (0..count)
            .map(|i| AttackerConfig::new(NodeId(self.n_nodes - i), mode))
            .collect();
        self
    }

    pub fn sim_duration(&self) -> SimTime {
        SimTime::from_secs(self.sim_duration_s)
    }

    pub fn n_honest(&self) -> usize {
        self.n_nodes as usize - self.attackers.len()
    }

    pub fn attacker(&self, n: NodeId) -> Option<&AttackerConfig> {
        self.attackers.iter().find(|a| a.node == n)
    }

    /// Label for the CSV `attack_mode` column.
    pub fn attack_mode_label(&self) -> &'static str {
        let mut names = self.attackers.iter().map(|a| a.mode.name());
        match names.next() {
            None => "none",
            Some(first) if names.all(|n| n == first) => first,
            Some(_) => "mixed",
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_nodes == 0 || self.n_nodes > MAX_NODES {
            return Err(ConfigError::invalid(
                "n_nodes",
                format!("must be in 1..={MAX_NODES}"),
            ));
        }
        if self.sim_duration_s == 0 {
            return Err(ConfigError::invalid("sim_duration_s", "must be positive"));
        }
        if self.repetitions == 0 {
            return Err(ConfigError::invalid("repetitions", "must be at least 1"));
        }
        let p = self.payload_bytes as u64;
        let slowest_direct = compute_duration(p, Route::Direct(RateClass::Mbps1));
        let slowest_relayed = compute_duration(
            p,
            Route::Relayed {
                first: RateClass::Mbps2,
                second: RateClass::Mbps2,
            },
        );
        if let Err(e) = slowest_direct.and(slowest_relayed) {
            return Err(ConfigError::invalid("payload_bytes", e.to_string()));
        }
        debug_assert!(legit_duration_ceiling(p) <= MAX_DURATION_US);
        if self.attackers.len() >= self.n_nodes as usize {
            return Err(ConfigError::invalid(
                "attackers",
                format!(
                    "{} attackers leave no honest station among {} nodes",
                    self.attackers.len(),
                    self.n_nodes
                ),
            ));
        }
        let mut seen = BTreeSet::new();
        for (i, a) in self.attackers.iter().enumerate() {
            if a.node.0 == 0 || a.node.0 > self.n_nodes {
                return Err(ConfigError::invalid(
                    format!("attackers[{i}].node"),
                    format!("must be a station id in 1..={}", self.n_nodes),
                ));
            }
            if !seen.insert(a.node) {
                return Err(ConfigError::invalid(
                    format!("attackers[{i}].node"),
                    format!("node {} is already an attacker", a.node.0),
                ));
            }
            if let Err(m) = a.check() {
                let field = match a.mode {
                    AttackMode::DurationInflation { .. } => "claimed_us",
                    AttackMode::Flood { .. } => "period_us",
                };
                return Err(ConfigError::invalid(format!("attackers[{i}].{field}"), m));
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct RawAttacker {
    mode: Option<String>,
    node: Option<u16>,
    claimed_us: Option<u32>,
    period_us: Option<u64>,
    start_at_us: Option<u64>,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| {
        ConfigError::invalid(key, format!("`{v}` is not a valid non-negative integer"))
    })
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::invalid(key, format!("`{v}` is not a boolean"))),
    }
}

/// Split `attackers[3].mode` into `(3, "mode")`.
fn attacker_key(key: &str) -> Option<(usize, &str)> {
    let rest = key.strip_prefix("attackers[")?;
    let (idx, field) = rest.split_once("].")?;
    Some((idx.parse().ok()?, field))
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(v)
}

/// Parse scenario text. Missing keys keep their defaults; unknown keys are
/// rejected. The result is validated.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut n_nodes_set = false;
    let mut raw: BTreeMap<usize, RawAttacker> = BTreeMap::new();
    let mut seen_keys = BTreeSet::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: lineno + 1,
                text: line.to_string(),
            });
        };
        let (key, value) = (key.trim(), unquote(value.trim()));
        if !seen_keys.insert(key.to_string()) {
            return Err(ConfigError::invalid(key, "given more than once"));
        }
        match key {
            "n_nodes" => {
                cfg.n_nodes = parse_num(key, value)?;
                n_nodes_set = true;
            }
            "playground" => {
                if value.replace(' ', "") != "500x500" {
                    return Err(ConfigError::invalid(
                        key,
                        "only a 500x500 m playground is supported",
                    ));
                }
            }
            "sim_duration_s" => cfg.sim_duration_s = parse_num(key, value)?,
            "payload_bytes" => cfg.payload_bytes = parse_num(key, value)?,
            "defense_enabled" => cfg.defense_enabled = parse_bool(key, value)?,
            "seed" => cfg.seed = parse_num(key, value)?,
            "repetitions" => cfg.repetitions = parse_num(key, value)?,
            _ => {
                let Some((i, field)) = attacker_key(key) else {
                    return Err(ConfigError::invalid(key, "unknown key"));
                };
                let a = raw.entry(i).or_default();
                match field {
                    "mode" => a.mode = Some(value.to_string()),
                    "node" => a.node = Some(parse_num(key, value)?),
                    "claimed_us" => a.claimed_us = Some(parse_num(key, value)?),
                    "period_us" => a.period_us = Some(parse_num(key, value)?),
                    "start_at_us" => a.start_at_us = Some(parse_num(key, value)?),
                    _ => return Err(ConfigError::invalid(key, "unknown attacker field")),
                }
            }
        }
    }
    if !n_nodes_set {
        return Err(ConfigError::invalid("n_nodes", "missing (required)"));
    }

    for (pos, (i, a)) in raw.into_iter().enumerate() {
        if i != pos {
            return Err(ConfigError::invalid(
                format!("attackers[{pos}]"),
                "attacker indices must be contiguous from 0",
            ));
        }
        let mode = match a.mode.as_deref() {
            Some("inflate") | None => {
                if a.period_us.is_some() {
                    return Err(ConfigError::invalid(
                        format!("attackers[{i}].period_us"),
                        "only valid for mode = flood",
                    ));
                }
                AttackMode::DurationInflation {
                    claimed_us: a.claimed_us.unwrap_or(DEFAULT_CLAIMED_US),
                }
            }
            Some("flood") => {
                if a.claimed_us.is_some() {
                    return Err(ConfigError::invalid(
                        format!("attackers[{i}].claimed_us"),
                        "only valid for mode = inflate",
                    ));
                }
                AttackMode::Flood {
                    period_us: a.period_us.unwrap_or(DEFAULT_FLOOD_PERIOD_US),
                }
            }
            Some(other) => {
                return Err(ConfigError::invalid(
                    format!("attackers[{i}].mode"),
                    format!("`{other}` is not one of inflate, flood"),
                ))
            }
        };
        let node = a
            .node
            .unwrap_or_else(|| cfg.n_nodes.saturating_sub(i as u16));
        cfg.attackers.push(AttackerConfig {
            node: NodeId(node),
            mode,
            start_at: SimTime(a.start_at_us.unwrap_or(0)),
        });
    }

    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}
