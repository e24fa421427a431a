use crate::engine::SimTime;

use super::config::ScenarioConfig;

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunMetrics {
    /// Payload bits of unique DATA frames the AP accepted and acknowledged.
    pub delivered_payload_bits: u64,
    pub delivered_frames: u64,
    /// Of `delivered_frames`, how many arrived through a relay.
    pub relayed_frames: u64,
    pub per_node_bits: Vec<u64>,
    pub sim_duration_us: u64,
    pub detections: u64,
    pub false_positives: u64,
    pub rts_sent: u64,
    /// Unicast frames their addressee failed to decode.
    pub collisions: u64,
    pub blacklist_broadcasts: u64,
    pub broadcast_airtime_us: u64,
    pub first_detection_at: Option<SimTime>,
    /// First time the AP decoded an attacker RTS whose claim exceeds the
    /// validation threshold, whether or not the defense is on.
    pub first_forged_decode_at: Option<SimTime>,
    pub events: u64,
    pub log_records: u64,
    /// Hex SHA-256 of the run's event log.
    pub log_digest: String,
}

impl RunMetrics {
    pub fn new(_cfg: &ScenarioConfig, n_nodes_with_ap: usize) -> Self {
        RunMetrics {
            per_node_bits: vec![0; n_nodes_with_ap],
            ..Default::default()
        }
    }

    pub fn throughput_bps(&self) -> f64 {
        mac_throughput(self)
    }
}

/// Delivered payload bits per second of simulated time.
pub fn mac_throughput(m: &RunMetrics) -> f64 {
    assert!(m.sim_duration_us > 0, "throughput of a zero-length run");
    m.delivered_payload_bits as f64 / (m.sim_duration_us as f64 / 1e6)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(bits: u64, us: u64) -> RunMetrics {
        RunMetrics {
            delivered_payload_bits: bits,
            sim_duration_us: us,
            ..Default::default()
        }
    }

    #[test]
    fn throughput_arithmetic() {
        assert_eq!(mac_throughput(&metrics(0, 1_000_000)), 0.0);
        assert_eq!(
            mac_throughput(&metrics(100 * 16384, 1_000_000)),
            1_638_400.0
        );
        assert_eq!(mac_throughput(&metrics(16384, 500_000)), 32768.0);
    }
}
