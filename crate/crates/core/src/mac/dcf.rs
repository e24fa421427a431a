//! Per-node DCF contention state machine.
//!
//! The machine is pure: the simulation feeds it stimuli and carries out the
//! returned [`Action`]s (scheduling timers, putting frames on the air).
//! Backoff counting is event based: when the medium goes busy mid-countdown
//! the number of whole idle slots that elapsed is subtracted and the rest is
//! frozen until the medium has been idle for DIFS again.

use crate::engine::SimTime;

use super::timing::{CW_MAX, CW_MIN, RETRY_LIMIT, SLOT_US};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Nothing queued, or deferring to a physically busy medium.
    Idle,
    Difs,
    Backoff,
    AwaitCts,
    SendData,
    AwaitAck,
    /// Deferring to an active NAV.
    Quiet,
}

/// An outgoing payload waiting for the medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pending {
    pub seq: u32,
    pub payload_bytes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stimulus {
    PayloadQueued(Pending),
    /// Physical and virtual carrier sense both report idle.
    MediumIdle,
    /// Physical carrier sense reports busy.
    MediumBusy,
    /// NAV became active.
    NavBusy,
    DifsElapsed,
    BackoffElapsed,
    CtsDecoded,
    DataSent,
    AckDecoded,
    Timeout,
    /// Abandon an outstanding RTS without counting it as a failure.
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Fire `DifsElapsed` after DIFS.
    WaitDifs,
    /// Fire `BackoffElapsed` after `slots` idle slots.
    CountDown {
        slots: u32,
    },
    SendRts,
    /// Send the pending DATA one SIFS from now.
    SendDataAfterSifs,
    Succeeded(Pending),
    Failed,
    Dropped(Pending),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dcf {
    phase: Phase,
    cw: u32,
    backoff_slots: Option<u32>,
    retry_count: u8,
    pending: Option<Pending>,
    countdown_since: SimTime,
}

impl Default for Dcf {
    fn default() -> Self {
        Dcf {
            phase: Phase::Idle,
            cw: CW_MIN,
            backoff_slots: None,
            retry_count: 0,
            pending: None,
            countdown_since: SimTime::ZERO,
        }
    }
}

impl Dcf {
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn contention_window(&self) -> u32 {
        self.cw
    }

    pub fn retry_count(&self) -> u8 {
        self.retry_count
    }

    pub fn backoff_slots(&self) -> Option<u32> {
        self.backoff_slots
    }

    pub fn pending(&self) -> Option<Pending> {
        self.pending
    }

    /// True while the node is competing for the medium.
    pub fn is_contending(&self) -> bool {
        self.pending.is_some()
            && matches!(
                self.phase,
                Phase::Idle | Phase::Quiet | Phase::Difs | Phase::Backoff
            )
    }

    /// Binary exponential backoff bookkeeping after an exchange attempt.
    /// Returns the payload if the retry limit forced a drop.
    pub fn escalate_cw(&mut self, outcome: Outcome) -> Option<Pending> {
        match outcome {
            Outcome::Success => {
                self.cw = CW_MIN;
                self.retry_count = 0;
                None
            }
            Outcome::Failure => {
                self.cw = (2 * (self.cw + 1) - 1).min(CW_MAX);
                self.retry_count += 1;
                if self.retry_count >= RETRY_LIMIT {
                    self.cw = CW_MIN;
                    self.retry_count = 0;
                    self.pending.take()
                } else {
                    None
                }
            }
        }
    }

    fn freeze(&mut self, now: SimTime, deferring: Phase) {
        match self.phase {
            Phase::Difs => self.phase = deferring,
            Phase::Backoff => {
                let left = self.backoff_slots.expect("backoff without slots");
                let spent = ((now - self.countdown_since) / SLOT_US) as u32;
                self.backoff_slots = Some(left.saturating_sub(spent));
                self.phase = deferring;
            }
            Phase::Idle | Phase::Quiet if self.pending.is_some() => self.phase = deferring,
            _ => {}
        }
    }

    /// Advance the machine. `draw` supplies a uniform integer in `[0, cw]`
    /// from the backoff substream and is only called on a fresh backoff.
    ///
    /// Panics on a stimulus that cannot happen in the current phase.
    pub fn on<F>(&mut self, stimulus: Stimulus, now: SimTime, mut draw: F) -> Vec<Action>
    where
        F: FnMut(u32) -> u32,
    {
        use Phase::*;
        match (stimulus, self.phase) {
            (Stimulus::PayloadQueued(p), _) => {
                assert!(
                    self.pending.is_none(),
                    "payload queued over an existing one"
                );
                self.pending = Some(p);
                vec![]
            }
            (Stimulus::MediumIdle, Idle | Quiet) if self.pending.is_some() => {
                self.phase = Difs;
                vec![Action::WaitDifs]
            }
            (Stimulus::MediumIdle, _) => vec![],
            (Stimulus::MediumBusy, _) => {
                self.freeze(now, Idle);
                vec![]
            }
            (Stimulus::NavBusy, _) => {
                self.freeze(now, Quiet);
                vec![]
            }
            (Stimulus::DifsElapsed, Difs) => {
                let slots = match self.backoff_slots {
                    Some(s) => s,
                    None => {
                        let s = draw(self.cw);
                        assert!(s <= self.cw, "backoff draw {s} outside [0, {}]", self.cw);
                        s
                    }
                };
                if slots == 0 {
                    self.backoff_slots = None;
                    self.phase = AwaitCts;
                    vec![Action::SendRts]
                } else {
                    self.backoff_slots = Some(slots);
                    self.countdown_since = now;
                    self.phase = Backoff;
                    vec![Action::CountDown { slots }]
                }
            }
            (Stimulus::BackoffElapsed, Backoff) => {
                self.backoff_slots = None;
                self.phase = AwaitCts;
                vec![Action::SendRts]
            }
            (Stimulus::CtsDecoded, AwaitCts) => {
                self.phase = SendData;
                vec![Action::SendDataAfterSifs]
            }
            (Stimulus::DataSent, SendData) => {
                self.phase = AwaitAck;
                vec![]
            }
            (Stimulus::AckDecoded, AwaitAck) => {
                self.escalate_cw(Outcome::Success);
                self.phase = Idle;
                let done = self.pending.take().expect("ACK without pending payload");
                vec![Action::Succeeded(done)]
            }
            (Stimulus::Timeout, AwaitCts | AwaitAck) => {
                self.phase = Idle;
                self.backoff_slots = None;
                match self.escalate_cw(Outcome::Failure) {
                    Some(p) => vec![Action::Failed, Action::Dropped(p)],
                    None => vec![Action::Failed],
                }
            }
            (Stimulus::Release, AwaitCts) => {
                self.escalate_cw(Outcome::Success);
                self.phase = Idle;
                vec![]
            }
            (s, p) => panic!("DCF stimulus {s:?} is illegal in phase {p:?}"),
        }
    }
}
