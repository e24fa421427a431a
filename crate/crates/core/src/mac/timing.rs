//! Inter-frame spacings, control-frame airtimes and the duration-field
//! arithmetic.

use thiserror::Error;

use super::frame::{
    Frame, FrameKind, ACK_BYTES, CTS_BYTES, DATA_HEADER_BYTES, MAX_DURATION_US, RTS_BYTES,
};
use crate::channel::{airtime_us, RateClass};

pub const SIFS_US: u64 = 10;
pub const DIFS_US: u64 = 50;
pub const SLOT_US: u64 = 20;
pub const CW_MIN: u32 = 31;
pub const CW_MAX: u32 = 1023;
pub const RETRY_LIMIT: u8 = 7;

/// Control frames go out at the base rate.
pub const BASE_RATE: RateClass = RateClass::Mbps1;

pub const T_RTS_US: u64 = 8 * RTS_BYTES; // 160 at 1 Mbit/s
pub const T_CTS_US: u64 = 8 * CTS_BYTES;
pub const T_ACK_US: u64 = 8 * ACK_BYTES;

/// Airtime of a DATA frame carrying `payload_bytes`.
pub fn t_data_us(payload_bytes: u64, rate: RateClass) -> u64 {
    airtime_us(DATA_HEADER_BYTES + payload_bytes, rate)
}

/// How a payload travels to the AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Direct(RateClass),
    /// Source to relay at `first`, relay to AP at `second`.
    Relayed {
        first: RateClass,
        second: RateClass,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DurationError {
    #[error("reservation of {0} us exceeds the {MAX_DURATION_US} us duration field")]
    Unencodable(u64),
    #[error("route uses an unreachable link")]
    Unreachable,
}

/// Reservation an RTS must announce for one exchange: the time remaining
/// after the RTS ends until the final ACK ends.
pub fn compute_duration(payload_bytes: u64, route: Route) -> Result<u32, DurationError> {
    let us = match route {
        Route::Direct(rate) => {
            if !rate.is_reachable() {
                return Err(DurationError::Unreachable);
            }
            3 * SIFS_US + T_CTS_US + t_data_us(payload_bytes, rate) + T_ACK_US
        }
        Route::Relayed { first, second } => {
            if !first.is_reachable() || !second.is_reachable() {
                return Err(DurationError::Unreachable);
            }
            4 * SIFS_US
                + T_CTS_US
                + t_data_us(payload_bytes, first)
                + t_data_us(payload_bytes, second)
                + T_ACK_US
        }
    };
    if us > MAX_DURATION_US as u64 {
        return Err(DurationError::Unencodable(us));
    }
    Ok(us as u32)
}

/// Which frame a node is about to send in reply to `incoming`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Cts,
    /// DATA straight to the AP (also used by a relay forwarding).
    DirectData,
    /// DATA to a relay that will forward at `second_hop`.
    RelayBoundData {
        second_hop: RateClass,
    },
    Ack,
}

/// Duration field for a response frame, following the standard cascade.
pub fn derive_response_duration(incoming: &Frame, response: Response) -> u32 {
    match response {
        Response::Cts => {
            debug_assert_eq!(incoming.kind, FrameKind::Rts);
            (incoming.duration_us as u64).saturating_sub(SIFS_US + T_CTS_US) as u32
        }
        Response::DirectData => (SIFS_US + T_ACK_US) as u32,
        Response::RelayBoundData { second_hop } => {
            (2 * SIFS_US + t_data_us(incoming.payload_bytes as u64, second_hop) + T_ACK_US) as u32
        }
        Response::Ack => 0,
    }
}

/// CTS timeout measured from the end of the RTS.
pub fn cts_timeout_us() -> u64 {
    SIFS_US + T_CTS_US + 2 * SLOT_US
}

/// ACK timeout measured from the end of the source's DATA. For a relayed
/// exchange the expected response is the forwarded DATA followed by the ACK.
pub fn ack_timeout_us(payload_bytes: u64, route: Route) -> u64 {
    let response = match route {
        Route::Direct(_) => T_ACK_US,
        Route::Relayed { second, .. } => t_data_us(payload_bytes, second) + SIFS_US + T_ACK_US,
    };
    SIFS_US + response + 2 * SLOT_US
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NodeId;
    use crate::mac::Dest;
    use RateClass::*;

    #[test]
    fn control_airtimes() {
        assert_eq!(T_RTS_US, 160);
        assert_eq!(T_CTS_US, 112);
        assert_eq!(T_ACK_US, 112);
    }

    #[test]
    fn direct_and_relayed_durations() {
        assert_eq!(compute_duration(2048, Route::Direct(Mbps11)), Ok(1764));
        assert_eq!(compute_duration(2048, Route::Direct(Mbps1)), Ok(16862));
        assert_eq!(
            compute_duration(
                2048,
                Route::Relayed {
                    first: Mbps11,
                    second: Mbps5_5
                }
            ),
            Ok(4794)
        );
    }

    #[test]
    fn oversized_payload_is_unencodable() {
        // 30 + 112 + 8 * 5028 + 112
        assert_eq!(
            compute_duration(5000, Route::Direct(Mbps1)),
            Err(DurationError::Unencodable(40478))
        );
        assert_eq!(
            compute_duration(10, Route::Direct(Unreachable)),
            Err(DurationError::Unreachable)
        );
    }

    #[test]
    fn response_cascade() {
        let rts = Frame::rts(NodeId(1), Dest::Unicast(NodeId::AP), 1764);
        assert_eq!(derive_response_duration(&rts, Response::Cts), 1642);
        let forged = Frame::rts(NodeId(1), Dest::Unicast(NodeId::AP), 32767);
        assert_eq!(derive_response_duration(&forged, Response::Cts), 32645);
        let tiny = Frame::rts(NodeId(1), Dest::Unicast(NodeId::AP), 50);
        assert_eq!(derive_response_duration(&tiny, Response::Cts), 0);

        let data = Frame::data(NodeId(1), NodeId(2), 0, 2048, true, NodeId(1), 0);
        assert_eq!(derive_response_duration(&data, Response::DirectData), 122);
        assert_eq!(
            derive_response_duration(
                &data,
                Response::RelayBoundData {
                    second_hop: Mbps5_5
                }
            ),
            20 + 3020 + 112
        );
        assert_eq!(derive_response_duration(&data, Response::Ack), 0);
    }

    #[test]
    fn timeouts() {
        assert_eq!(cts_timeout_us(), 162);
        assert_eq!(ack_timeout_us(2048, Route::Direct(Mbps11)), 162);
        assert_eq!(
            ack_timeout_us(
                2048,
                Route::Relayed {
                    first: Mbps11,
                    second: Mbps5_5
                }
            ),
            10 + 3020 + 10 + 112 + 40
        );
    }

    #[test]
    fn cascade_consistency_for_all_legitimate_routes() {
        for payload in [0u64, 1, 512, 2048, 4000] {
            for &d in &RateClass::USABLE {
                let dur = compute_duration(payload, Route::Direct(d)).unwrap();
                let rts = Frame::rts(NodeId(1), Dest::Unicast(NodeId::AP), dur);
                let cts = derive_response_duration(&rts, Response::Cts);
                assert_eq!(cts as u64 + SIFS_US + T_CTS_US, dur as u64);
            }
        }
    }
}
