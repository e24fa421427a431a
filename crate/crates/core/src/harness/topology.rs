use crate::channel::{Position, Topology, PLAYGROUND_M};
use crate::engine::{RandomStreams, Stream};

use super::config::ScenarioConfig;

pub const AP_POSITION: Position = Position { x: 250.0, y: 250.0 };

/// Placement resolution of the topology draws.
const MM_PER_M: i64 = 1000;

/// AP at the centre, stations i.i.d. uniform over the playground (to the
/// millimetre) from the topology substream.
pub fn generate_topology(cfg: &ScenarioConfig, rng: &mut RandomStreams) -> Topology {
    let max = PLAYGROUND_M as i64 * MM_PER_M;
    let mut positions = Vec::with_capacity(cfg.n_nodes as usize + 1);
    positions.push(AP_POSITION);
    for _ in 0..cfg.n_nodes {
        let x = rng.draw_uniform_int(Stream::Topology, 0, max) as f64 / MM_PER_M as f64;
        let y = rng.draw_uniform_int(Stream::Topology, 0, max) as f64 / MM_PER_M as f64;
        positions.push(Position::new(x, y));
    }
    Topology::new(positions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{NodeId, RateClass};

    #[test]
    fn ap_centred_and_reproducible() {
        let cfg = ScenarioConfig::with_nodes(5);
        let a = generate_topology(&cfg, &mut RandomStreams::new(11));
        let b = generate_topology(&cfg, &mut RandomStreams::new(11));
        assert_eq!(a.len(), 6);
        assert_eq!(a.position(NodeId::AP), AP_POSITION);
        assert_eq!(a.positions(), b.positions());
        let c = generate_topology(&cfg, &mut RandomStreams::new(12));
        assert_ne!(a.positions(), c.positions());
    }

    #[test]
    fn every_station_reaches_ap_at_two_mbps_or_better() {
        let cfg = ScenarioConfig::with_nodes(200);
        for seed in 0..20 {
            let t = generate_topology(&cfg, &mut RandomStreams::new(seed));
            for s in t.nodes().skip(1) {
                let r = t.rate(s, NodeId::AP);
                assert!(
                    matches!(r, RateClass::Mbps11 | RateClass::Mbps5_5 | RateClass::Mbps2),
                    "seed {seed} {s}: {r}"
                );
            }
        }
    }
}
