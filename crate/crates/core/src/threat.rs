//! Malicious RTS senders.

use std::fmt;

use crate::channel::NodeId;
use crate::engine::SimTime;
use crate::mac::{Dest, Frame, MAX_DURATION_US, T_RTS_US};

pub const DEFAULT_CLAIMED_US: u32 = MAX_DURATION_US;
pub const DEFAULT_FLOOD_PERIOD_US: u64 = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMode {
    /// Contends normally, then reserves the medium for `claimed_us` and
    /// never uses the reservation.
    DurationInflation { claimed_us: u32 },
    /// Sends an RTS with an ordinary-looking duration every `period_us`,
    /// ignoring carrier sense, NAV and backoff.
    Flood { period_us: u64 },
}

impl AttackMode {
    pub fn inflation() -> Self {
        AttackMode::DurationInflation {
            claimed_us: DEFAULT_CLAIMED_US,
        }
    }

    pub fn flood() -> Self {
        AttackMode::Flood {
            period_us: DEFAULT_FLOOD_PERIOD_US,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackMode::DurationInflation { .. } => "inflate",
            AttackMode::Flood { .. } => "flood",
        }
    }
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackerConfig {
    pub node: NodeId,
    pub mode: AttackMode,
    pub start_at: SimTime,
}

impl AttackerConfig {
    pub fn new(node: NodeId, mode: AttackMode) -> Self {
        AttackerConfig {
            node,
            mode,
            start_at: SimTime::ZERO,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        match self.mode {
            AttackMode::DurationInflation { claimed_us } if claimed_us > MAX_DURATION_US => {
                Err(format!(
                    "claimed_us {claimed_us} exceeds the duration field maximum {MAX_DURATION_US}"
                ))
            }
            AttackMode::Flood { period_us: 0 } => Err("period_us must be at least 1".into()),
            _ => Ok(()),
        }
    }
}

/// The forged RTS to send at `now`, and when the attacker next acts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackStep {
    pub frame: Frame,
    pub next_fire: SimTime,
}

/// `flood_duration_us` is the legitimate-looking duration a flood RTS
/// carries (the attacker's own direct-exchange reservation).
pub fn next_attack_frame(cfg: &AttackerConfig, now: SimTime, flood_duration_us: u32) -> AttackStep {
    assert!(
        now >= cfg.start_at,
        "attacker {} acting before its start time",
        cfg.node
    );
    let ap = Dest::Unicast(NodeId::AP);
    match cfg.mode {
        AttackMode::DurationInflation { claimed_us } => AttackStep {
            frame: Frame::rts(cfg.node, ap, claimed_us),
            next_fire: now + T_RTS_US + claimed_us as u64,
        },
        AttackMode::Flood { period_us } => AttackStep {
            frame: Frame::rts(cfg.node, ap, flood_duration_us),
            next_fire: now + period_us,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inflation_defaults_claim_field_maximum() {
        let cfg = AttackerConfig::new(NodeId(5), AttackMode::inflation());
        let step = next_attack_frame(&cfg, SimTime(1000), 1764);
        assert_eq!(step.frame.duration_us, 32767);
        assert_eq!(step.frame.dst, Dest::Unicast(NodeId::AP));
        assert_eq!(step.next_fire, SimTime(1000 + 160 + 32767));
    }

    #[test]
    fn flood_is_periodic() {
        let cfg = AttackerConfig::new(NodeId(5), AttackMode::flood());
        let mut t = SimTime(0);
        let mut fires = vec![];
        for _ in 0..3 {
            fires.push(t);
            let step = next_attack_frame(&cfg, t, 1764);
            assert_eq!(step.frame.duration_us, 1764);
            t = step.next_fire;
        }
        assert_eq!(fires, vec![SimTime(0), SimTime(5000), SimTime(10000)]);
    }

    #[test]
    #[should_panic(expected = "before its start")]
    fn activation_gate() {
        let cfg = AttackerConfig {
            start_at: SimTime::from_secs(100),
            ..AttackerConfig::new(NodeId(5), AttackMode::flood())
        };
        next_attack_frame(&cfg, SimTime::from_secs(99), 1764);
    }

    #[test]
    fn bounds() {
        let bad = AttackerConfig::new(
            NodeId(1),
            AttackMode::DurationInflation { claimed_us: 40_000 },
        );
        assert!(bad.check().is_err());
        let bad = AttackerConfig::new(NodeId(1), AttackMode::Flood { period_us: 0 });
        assert!(bad.check().is_err());
        assert!(AttackerConfig::new(NodeId(1), AttackMode::inflation())
            .check()
            .is_ok());
    }
}
