//! 802.11-style DCF: frames, timing, NAV, and the contention state machine.

mod dcf;
mod frame;
mod nav;
mod timing;

pub use dcf::{Action, Dcf, Outcome, Pending, Phase, Stimulus};
pub use frame::{
    Dest, Frame, FrameKind, ACK_BYTES, BLACKLIST_BYTES, CTS_BYTES, DATA_HEADER_BYTES,
    MAX_DURATION_US, RTS_BYTES,
};
pub use nav::NavTimer;
pub use timing::{
    ack_timeout_us, compute_duration, cts_timeout_us, derive_response_duration, t_data_us,
    DurationError, Response, Route, BASE_RATE, CW_MAX, CW_MIN, DIFS_US, RETRY_LIMIT, SIFS_US,
    SLOT_US, T_ACK_US, T_CTS_US, T_RTS_US,
};
