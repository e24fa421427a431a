use std::fmt;

use crate::channel::NodeId;

/// Largest value the 15 usable bits of the 2-byte duration field can carry.
pub const MAX_DURATION_US: u32 = 32_767;

pub const RTS_BYTES: u64 = 20;
pub const CTS_BYTES: u64 = 14;
pub const ACK_BYTES: u64 = 14;
pub const DATA_HEADER_BYTES: u64 = 28;
/// Control header plus 6-byte offender MAC plus 2-byte sequence number.
pub const BLACKLIST_BYTES: u64 = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Rts,
    Cts,
    Data,
    Ack,
    Blacklist,
}

impl FrameKind {
    pub fn code(self) -> u8 {
        match self {
            FrameKind::Rts => 1,
            FrameKind::Cts => 2,
            FrameKind::Data => 3,
            FrameKind::Ack => 4,
            FrameKind::Blacklist => 5,
        }
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameKind::Rts => "RTS",
            FrameKind::Cts => "CTS",
            FrameKind::Data => "DATA",
            FrameKind::Ack => "ACK",
            FrameKind::Blacklist => "BLACKLIST",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dest {
    Unicast(NodeId),
    Broadcast,
}

impl Dest {
    pub fn is(self, n: NodeId) -> bool {
        self == Dest::Unicast(n)
    }

    /// Wire value: node id, or 0xFFFF for broadcast.
    pub fn code(self) -> u16 {
        match self {
            Dest::Unicast(n) => n.0,
            Dest::Broadcast => u16::MAX,
        }
    }
}

/// A MAC protocol data unit.
///
/// `origin` and `seq` identify the payload end to end: a relay keeps the
/// source's `origin` and `seq` when forwarding, and the AP addresses its ACK
/// to `origin`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub src: NodeId,
    pub dst: Dest,
    pub duration_us: u32,
    pub payload_bytes: u32,
    pub relay_flag: bool,
    pub offender: Option<NodeId>,
    pub origin: NodeId,
    pub seq: u32,
}

impl Frame {
    fn control(kind: FrameKind, src: NodeId, dst: Dest, duration_us: u32) -> Frame {
        assert!(
            duration_us <= MAX_DURATION_US,
            "duration {duration_us} does not fit the duration field"
        );
        Frame {
            kind,
            src,
            dst,
            duration_us,
            payload_bytes: 0,
            relay_flag: false,
            offender: None,
            origin: src,
            seq: 0,
        }
    }

    pub fn rts(src: NodeId, dst: Dest, duration_us: u32) -> Frame {
        Frame::control(FrameKind::Rts, src, dst, duration_us)
    }

    pub fn cts(src: NodeId, dst: NodeId, duration_us: u32) -> Frame {
        Frame::control(FrameKind::Cts, src, Dest::Unicast(dst), duration_us)
    }

    pub fn ack(src: NodeId, dst: NodeId) -> Frame {
        Frame::control(FrameKind::Ack, src, Dest::Unicast(dst), 0)
    }

    pub fn blacklist(src: NodeId, offender: NodeId, seq: u32) -> Frame {
        Frame {
            offender: Some(offender),
            seq,
            ..Frame::control(FrameKind::Blacklist, src, Dest::Broadcast, 0)
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn data(
        src: NodeId,
        dst: NodeId,
        duration_us: u32,
        payload_bytes: u32,
        relay_flag: bool,
        origin: NodeId,
        seq: u32,
    ) -> Frame {
        Frame {
            payload_bytes,
            relay_flag,
            origin,
            seq,
            ..Frame::control(FrameKind::Data, src, Dest::Unicast(dst), duration_us)
        }
    }

    /// Size on the air in bytes.
    pub fn size_bytes(&self) -> u64 {
        match self.kind {
            FrameKind::Rts => RTS_BYTES,
            FrameKind::Cts => CTS_BYTES,
            FrameKind::Ack => ACK_BYTES,
            FrameKind::Blacklist => BLACKLIST_BYTES,
            FrameKind::Data => DATA_HEADER_BYTES + self.payload_bytes as u64,
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}->", self.kind, self.src)?;
        match self.dst {
            Dest::Unicast(n) => write!(f, "{n}")?,
            Dest::Broadcast => f.write_str("*")?,
        }
        write!(f, " dur={}", self.duration_us)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let a = NodeId(1);
        assert_eq!(Frame::rts(a, Dest::Unicast(NodeId::AP), 0).size_bytes(), 20);
        assert_eq!(Frame::cts(NodeId::AP, a, 0).size_bytes(), 14);
        assert_eq!(Frame::ack(NodeId::AP, a).size_bytes(), 14);
        assert_eq!(Frame::blacklist(NodeId::AP, a, 0).size_bytes(), 22);
        assert_eq!(
            Frame::data(a, NodeId::AP, 122, 2048, false, a, 1).size_bytes(),
            2076
        );
    }

    #[test]
    fn control_frames_carry_no_payload() {
        let f = Frame::rts(NodeId(3), Dest::Unicast(NodeId::AP), MAX_DURATION_US);
        assert_eq!(f.payload_bytes, 0);
        assert_eq!(f.duration_us, 32767);
    }

    #[test]
    #[should_panic(expected = "does not fit")]
    fn oversized_duration_rejected() {
        Frame::rts(NodeId(3), Dest::Unicast(NodeId::AP), MAX_DURATION_US + 1);
    }
}
