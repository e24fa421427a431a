//! Structured run log.
//!
//! Every run hashes its log into a SHA-256 digest; callers that want to
//! inspect the records attach a [`LogSink`] instead of buffering millions
//! of entries.

use sha2::{Digest, Sha256};

use crate::channel::NodeId;
use crate::engine::SimTime;
use crate::mac::{Dest, Frame, FrameKind};

/// How a transmission got onto the medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    /// After DIFS and backoff with carrier sense clear.
    Contention,
    /// SIFS response inside an exchange (CTS, DATA, forward, ACK, BLACKLIST).
    Response,
    /// Flood attacker; ignores carrier sense by construction.
    Flood,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogRecord {
    TxStart {
        t: SimTime,
        node: NodeId,
        end: SimTime,
        access: Access,
        frame: Frame,
    },
    /// `node` decoded `frame`, which ended at `t`.
    Rx {
        t: SimTime,
        node: NodeId,
        frame: Frame,
    },
    /// The AP revalidated an RTS it decoded.
    RtsChecked {
        t: SimTime,
        src: NodeId,
        claimed_us: u32,
        malicious: bool,
        first_detection: bool,
    },
    BlacklistLearned {
        t: SimTime,
        node: NodeId,
        offender: NodeId,
        size_after: usize,
    },
    RelaySelected {
        t: SimTime,
        source: NodeId,
        relay: Option<NodeId>,
    },
    RelayOutcome {
        t: SimTime,
        source: NodeId,
        relay: NodeId,
        success: bool,
    },
    /// A response the node could not send because it was already on air.
    ResponseSkipped {
        t: SimTime,
        node: NodeId,
        kind: FrameKind,
    },
    /// An attacker dropped DATA it was asked to relay.
    RelayDropped {
        t: SimTime,
        node: NodeId,
        origin: NodeId,
    },
    Delivered {
        t: SimTime,
        origin: NodeId,
        seq: u32,
        via: Option<NodeId>,
    },
}

impl LogRecord {
    pub fn time(&self) -> SimTime {
        match self {
            LogRecord::TxStart { t, .. }
            | LogRecord::Rx { t, .. }
            | LogRecord::RtsChecked { t, .. }
            | LogRecord::BlacklistLearned { t, .. }
            | LogRecord::RelaySelected { t, .. }
            | LogRecord::RelayOutcome { t, .. }
            | LogRecord::ResponseSkipped { t, .. }
            | LogRecord::RelayDropped { t, .. }
            | LogRecord::Delivered { t, .. } => *t,
        }
    }

    /// Fixed little-endian binary encoding used for the digest.
    pub fn encode(&self, out: &mut Vec<u8>) {
        fn frame(out: &mut Vec<u8>, f: &Frame) {
            out.push(f.kind.code());
            out.extend_from_slice(&f.src.0.to_le_bytes());
            out.extend_from_slice(&f.dst.code().to_le_bytes());
            out.extend_from_slice(&f.duration_us.to_le_bytes());
            out.extend_from_slice(&f.payload_bytes.to_le_bytes());
            out.push(f.relay_flag as u8);
            out.extend_from_slice(&f.offender.map_or(u16::MAX, |n| n.0).to_le_bytes());
            out.extend_from_slice(&f.origin.0.to_le_bytes());
            out.extend_from_slice(&f.seq.to_le_bytes());
        }
        let node = |out: &mut Vec<u8>, n: NodeId| out.extend_from_slice(&n.0.to_le_bytes());
        out.extend_from_slice(&self.time().0.to_le_bytes());
        match self {
            LogRecord::TxStart {
                node: n,
                end,
                access,
                frame: f,
                ..
            } => {
                out.push(1);
                node(out, *n);
                out.extend_from_slice(&end.0.to_le_bytes());
                out.push(*access as u8);
                frame(out, f);
            }
            LogRecord::Rx {
                node: n, frame: f, ..
            } => {
                out.push(2);
                node(out, *n);
                frame(out, f);
            }
            LogRecord::RtsChecked {
                src,
                claimed_us,
                malicious,
                first_detection,
                ..
            } => {
                out.push(3);
                node(out, *src);
                out.extend_from_slice(&claimed_us.to_le_bytes());
                out.push(*malicious as u8);
                out.push(*first_detection as u8);
            }
            LogRecord::BlacklistLearned {
                node: n,
                offender,
                size_after,
                ..
            } => {
                out.push(4);
                node(out, *n);
                node(out, *offender);
                out.extend_from_slice(&(*size_after as u32).to_le_bytes());
            }
            LogRecord::RelaySelected { source, relay, .. } => {
                out.push(5);
                node(out, *source);
                node(out, relay.unwrap_or(NodeId(u16::MAX)));
            }
            LogRecord::RelayOutcome {
                source,
                relay,
                success,
                ..
            } => {
                out.push(6);
                node(out, *source);
                node(out, *relay);
                out.push(*success as u8);
            }
            LogRecord::ResponseSkipped { node: n, kind, .. } => {
                out.push(7);
                node(out, *n);
                out.push(kind.code());
            }
            LogRecord::RelayDropped {
                node: n, origin, ..
            } => {
                out.push(8);
                node(out, *n);
                node(out, *origin);
            }
            LogRecord::Delivered {
                origin, seq, via, ..
            } => {
                out.push(9);
                node(out, *origin);
                out.extend_from_slice(&seq.to_le_bytes());
                node(out, via.unwrap_or(NodeId(u16::MAX)));
            }
        }
    }
}

/// Receives every log record of a run, in order.
pub trait LogSink {
    fn record(&mut self, rec: &LogRecord);
}

/// Discards everything.
pub struct NullSink;

impl LogSink for NullSink {
    fn record(&mut self, _: &LogRecord) {}
}

/// Keeps everything. Only sensible for short runs.
#[derive(Default)]
pub struct VecSink(pub Vec<LogRecord>);

impl LogSink for VecSink {
    fn record(&mut self, rec: &LogRecord) {
        self.0.push(rec.clone());
    }
}

impl<A: LogSink, B: LogSink> LogSink for (A, B) {
    fn record(&mut self, rec: &LogRecord) {
        self.0.record(rec);
        self.1.record(rec);
    }
}

impl<S: LogSink + ?Sized> LogSink for &mut S {
    fn record(&mut self, rec: &LogRecord) {
        (**self).record(rec);
    }
}

/// Running SHA-256 over encoded records.
pub struct LogDigest {
    hasher: Sha256,
    buf: Vec<u8>,
    records: u64,
}

impl Default for LogDigest {
    fn default() -> Self {
        LogDigest {
            hasher: Sha256::new(),
            buf: Vec::with_capacity(64),
            records: 0,
        }
    }
}

impl LogDigest {
    pub fn push(&mut self, rec: &LogRecord) {
        self.buf.clear();
        rec.encode(&mut self.buf);
        self.hasher.update(&self.buf);
        self.records += 1;
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    pub fn finish(self) -> String {
        self.hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Whether `dst` addresses `node` directly or by broadcast.
pub fn addressed_to(dst: Dest, node: NodeId) -> bool {
    match dst {
        Dest::Unicast(n) => n == node,
        Dest::Broadcast => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_order_sensitive() {
        let a = LogRecord::Delivered {
            t: SimTime(1),
            origin: NodeId(1),
            seq: 1,
            via: None,
        };
        let b = LogRecord::Delivered {
            t: SimTime(2),
            origin: NodeId(2),
            seq: 1,
            via: None,
        };
        let mut d1 = LogDigest::default();
        d1.push(&a);
        d1.push(&b);
        let mut d2 = LogDigest::default();
        d2.push(&b);
        d2.push(&a);
        assert_ne!(d1.finish(), d2.finish());
    }

    #[test]
    fn empty_digest_is_sha256_of_nothing() {
        assert_eq!(
            LogDigest::default().finish(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
