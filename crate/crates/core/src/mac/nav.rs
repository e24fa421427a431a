use crate::channel::NodeId;
use crate::defense::Blacklist;
use crate::engine::SimTime;

use super::frame::Frame;

/// Virtual carrier sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NavTimer {
    pub quiet_until: SimTime,
    pub set_by: Option<NodeId>,
}

impl NavTimer {
    /// Apply an overheard frame that ended at `frame_end`. Frames whose
    /// source is on `blacklist` are ignored.
    pub fn update(self, overheard: &Frame, frame_end: SimTime, blacklist: &Blacklist) -> NavTimer {
        if blacklist.contains(overheard.src) {
            return self;
        }
        let until = frame_end + overheard.duration_us as u64;
        if until > self.quiet_until {
            NavTimer {
                quiet_until: until,
                set_by: Some(overheard.src),
            }
        } else {
            self
        }
    }

    /// Whether the NAV currently forbids initiating a transmission. A NAV
    /// set by a node that has since been blacklisted no longer counts.
    pub fn is_active(&self, now: SimTime, blacklist: &Blacklist) -> bool {
        now < self.quiet_until && !self.set_by.is_some_and(|n| blacklist.contains(n))
    }
}
