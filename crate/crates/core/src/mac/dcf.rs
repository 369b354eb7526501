//! Per-node DCF state machine.
//!
//! The machine never touches the event queue. The simulation reports medium
//! transitions, timer expiries and receptions, and after every call reads
//! [`Dcf::access_deadline`] to (re)arm the single channel-access timer.

use std::collections::VecDeque;

use super::params::{backoff_draw, next_cw, MacParams};
use crate::phy::{Psdu, RateId};
use crate::sim::{RngStream, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Nothing to send and no backoff pending.
    Idle,
    /// Waiting for the medium to stay idle for an IFS, no backoff drawn.
    Defer,
    /// Counting down backoff slots (possibly a post-transmission backoff
    /// with an empty queue).
    Backoff,
    Transmitting,
    AwaitingAck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptOutcome {
    Acked,
    Failed,
    /// Broadcast frames are sent once and never acknowledged.
    Unacknowledged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxAttempt {
    pub rate: RateId,
    pub airtime: SimTime,
    pub start: SimTime,
    pub outcome: AttemptOutcome,
}

/// A frame waiting for or undergoing service.
#[derive(Debug, Clone, PartialEq)]
pub struct MacFrame {
    pub psdu: Psdu,
    pub seqno: u64,
    pub gen_time: SimTime,
    pub attempts: Vec<TxAttempt>,
}

impl MacFrame {
    pub fn new(psdu: Psdu, seqno: u64, gen_time: SimTime) -> Self {
        MacFrame {
            psdu,
            seqno,
            gen_time,
            attempts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Completion {
    Acked { frame: MacFrame, at: SimTime },
    Dropped { frame: MacFrame, at: SimTime },
    Sent { frame: MacFrame, at: SimTime },
}

impl Completion {
    pub fn frame(&self) -> &MacFrame {
        match self {
            Completion::Acked { frame, .. } | Completion::Dropped { frame, .. } | Completion::Sent { frame, .. } => {
                frame
            }
        }
    }
}

/// Result of the sender's own transmission ending.
#[derive(Debug, Clone, PartialEq)]
pub enum TxFinish {
    /// Unicast: arm the ACK timeout at this instant.
    AwaitAck { timeout_at: SimTime },
    /// Broadcast: done.
    Done(Completion),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxState {
    pub phase: Phase,
    pub retry_count: u32,
    pub cw: u32,
    pub backoff_remaining: Option<u32>,
    pub current_rate: Option<RateId>,
}

#[derive(Debug, Clone)]
pub struct Dcf {
    params: MacParams,
    queue: VecDeque<MacFrame>,
    state: TxState,
    busy: bool,
    idle_since: SimTime,
    contend_from: SimTime,
    use_eifs: bool,
    pending_attempt: Option<(RateId, SimTime, SimTime)>,
    queue_drops: u64,
}

impl Dcf {
    pub fn new(params: MacParams) -> Self {
        let cw = params.cw_min;
        Dcf {
            params,
            queue: VecDeque::new(),
            state: TxState {
                phase: Phase::Idle,
                retry_count: 0,
                cw,
                backoff_remaining: None,
                current_rate: None,
            },
            busy: false,
            idle_since: SimTime::ZERO,
            contend_from: SimTime::ZERO,
            use_eifs: false,
            pending_attempt: None,
            queue_drops: 0,
        }
    }

    pub fn params(&self) -> &MacParams {
        &self.params
    }

    pub fn state(&self) -> &TxState {
        &self.state
    }

    pub fn phase(&self) -> Phase {
        self.state.phase
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn queue_drops(&self) -> u64 {
        self.queue_drops
    }

    pub fn head(&self) -> Option<&MacFrame> {
        self.queue.front()
    }

    pub fn medium_busy_state(&self) -> bool {
        self.busy
    }

    fn ifs(&self) -> SimTime {
        if self.use_eifs {
            self.params.eifs()
        } else {
            self.params.difs()
        }
    }

    fn countdown_origin(&self) -> SimTime {
        self.idle_since.max(self.contend_from) + self.ifs()
    }

    /// When the access timer should fire, if it should be armed at all.
    pub fn access_deadline(&self) -> Option<SimTime> {
        match self.state.phase {
            Phase::Defer | Phase::Backoff if !self.busy => {
                let slots = u64::from(self.state.backoff_remaining.unwrap_or(0));
                Some(self.countdown_origin() + self.params.slot().times(slots))
            }
            _ => None,
        }
    }

    /// Queues a frame. Returns false (and counts a drop) when the queue is
    /// full. A frame arriving at an idle MAC starts channel access: after
    /// one DIFS if the medium is idle, otherwise after a random backoff.
    pub fn enqueue(&mut self, frame: MacFrame, now: SimTime, rng: &mut RngStream) -> bool {
        if self.queue.len() >= self.params.queue_limit {
            self.queue_drops += 1;
            return false;
        }
        self.queue.push_back(frame);
        if self.state.phase == Phase::Idle {
            self.contend_from = now;
            if self.busy {
                self.state.backoff_remaining = Some(backoff_draw(self.state.cw, rng));
                self.state.phase = Phase::Backoff;
            } else {
                self.state.backoff_remaining = None;
                self.state.phase = Phase::Defer;
            }
        }
        true
    }

    /// The medium (as seen by this node) turned busy. Freezes the backoff
    /// counter, crediting every whole idle slot that elapsed.
    pub fn medium_busy(&mut self, now: SimTime, rng: &mut RngStream) {
        if self.busy {
            return;
        }
        if matches!(self.state.phase, Phase::Defer | Phase::Backoff) {
            let origin = self.countdown_origin();
            match self.state.backoff_remaining {
                Some(remaining) => {
                    let elapsed = if now > origin {
                        ((now - origin).as_nanos() / self.params.slot().as_nanos()) as u32
                    } else {
                        0
                    };
                    self.state.backoff_remaining = Some(remaining - elapsed.min(remaining));
                }
                None => {
                    self.state.backoff_remaining = Some(backoff_draw(self.state.cw, rng));
                }
            }
            self.state.phase = Phase::Backoff;
        }
        self.busy = true;
    }

    pub fn medium_idle(&mut self, now: SimTime) {
        if !self.busy {
            return;
        }
        self.busy = false;
        self.idle_since = now;
    }

    /// A locked reception finished. Failed receptions make the next access
    /// wait EIFS instead of DIFS until a frame is received correctly.
    pub fn reception_ended(&mut self, success: bool) {
        self.use_eifs = !success;
    }

    pub fn uses_eifs(&self) -> bool {
        self.use_eifs
    }

    /// The access timer fired. Returns the attempt index (0 for a first
    /// transmission) if the head-of-line frame should go on the air now.
    pub fn access_timer_fired(&mut self, now: SimTime) -> Option<u32> {
        debug_assert!(self.access_deadline().is_some_and(|d| d <= now));
        self.state.backoff_remaining = None;
        if self.queue.is_empty() {
            self.state.phase = Phase::Idle;
            return None;
        }
        self.state.phase = Phase::Transmitting;
        Some(self.state.retry_count)
    }

    /// Records the rate and airtime of the attempt that just started.
    pub fn begin_attempt(&mut self, rate: RateId, airtime: SimTime, now: SimTime) {
        debug_assert_eq!(self.state.phase, Phase::Transmitting);
        self.state.current_rate = Some(rate);
        self.pending_attempt = Some((rate, airtime, now));
    }

    fn close_attempt(&mut self, outcome: AttemptOutcome) {
        let (rate, airtime, start) = self
            .pending_attempt
            .take()
            .expect("attempt outcome without a pending attempt");
        let head = self.queue.front_mut().expect("attempt without a frame");
        head.attempts.push(TxAttempt {
            rate,
            airtime,
            start,
            outcome,
        });
    }

    fn finish_frame(&mut self, now: SimTime, rng: &mut RngStream) -> MacFrame {
        let frame = self.queue.pop_front().expect("finished frame missing");
        self.state.retry_count = 0;
        self.state.cw = self.params.cw_min;
        self.state.current_rate = None;
        // Post-transmission backoff, run even when the queue is empty.
        self.state.backoff_remaining = Some(backoff_draw(self.state.cw, rng));
        self.state.phase = Phase::Backoff;
        self.contend_from = now;
        frame
    }

    /// The node's own transmission ended.
    pub fn tx_finished(&mut self, now: SimTime, rng: &mut RngStream) -> TxFinish {
        debug_assert_eq!(self.state.phase, Phase::Transmitting);
        let broadcast = self.queue.front().map(|f| f.psdu.dest.is_none()).unwrap_or(true);
        if broadcast {
            self.close_attempt(AttemptOutcome::Unacknowledged);
            let frame = self.finish_frame(now, rng);
            TxFinish::Done(Completion::Sent { frame, at: now })
        } else {
            self.state.phase = Phase::AwaitingAck;
            TxFinish::AwaitAck {
                timeout_at: now + self.params.ack_timeout(),
            }
        }
    }

    pub fn awaiting_ack(&self) -> bool {
        self.state.phase == Phase::AwaitingAck
    }

    /// The ACK for the head-of-line frame arrived intact.
    pub fn ack_received(&mut self, now: SimTime, rng: &mut RngStream) -> Completion {
        debug_assert_eq!(self.state.phase, Phase::AwaitingAck);
        self.close_attempt(AttemptOutcome::Acked);
        let frame = self.finish_frame(now, rng);
        Completion::Acked { frame, at: now }
    }

    /// No ACK arrived in time. Either schedules a retransmission with a
    /// doubled window or, past the retry limit, drops the frame.
    pub fn ack_timeout(&mut self, now: SimTime, rng: &mut RngStream) -> Option<Completion> {
        debug_assert_eq!(self.state.phase, Phase::AwaitingAck);
        self.close_attempt(AttemptOutcome::Failed);
        self.state.retry_count += 1;
        if self.state.retry_count > self.params.retry_limit {
            let frame = self.finish_frame(now, rng);
            return Some(Completion::Dropped { frame, at: now });
        }
        self.state.cw = next_cw(self.state.cw, &self.params);
        self.state.backoff_remaining = Some(backoff_draw(self.state.cw, rng));
        self.state.phase = Phase::Backoff;
        self.contend_from = now;
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::FrameKind;

    fn frame(seq: u64, t: SimTime) -> MacFrame {
        MacFrame::new(Psdu::new(86, 1, Some(0), FrameKind::Data).unwrap(), seq, t)
    }

    fn us(x: u64) -> SimTime {
        SimTime::from_micros(x)
    }

    #[test]
    fn fresh_arrival_on_idle_medium_waits_exactly_difs() {
        let mut rng = RngStream::new(0, 0);
        let mut d = Dcf::new(MacParams::default());
        assert!(d.enqueue(frame(0, us(1000)), us(1000), &mut rng));
        assert_eq!(d.phase(), Phase::Defer);
        assert_eq!(d.access_deadline(), Some(us(1034)));
        assert_eq!(d.access_timer_fired(us(1034)), Some(0));
        assert_eq!(d.phase(), Phase::Transmitting);
    }

    #[test]
    fn second_frame_queues_behind_first() {
        let mut rng = RngStream::new(0, 0);
        let mut d = Dcf::new(MacParams::default());
        d.enqueue(frame(0, us(0)), us(0), &mut rng);
        d.access_timer_fired(us(34));
        d.begin_attempt(RateId::R54, us(36), us(34));
        d.enqueue(frame(1, us(40)), us(40), &mut rng);
        assert_eq!(d.queue_len(), 2);
        assert_eq!(d.head().unwrap().seqno, 0);
        assert_eq!(d.phase(), Phase::Transmitting);
    }

    #[test]
    fn busy_arrival_draws_backoff_and_freezes() {
        let mut rng = RngStream::new(5, 0);
        let p = MacParams::default();
        let mut d = Dcf::new(p.clone());
        d.medium_busy(us(0), &mut rng);
        d.enqueue(frame(0, us(10)), us(10), &mut rng);
        assert_eq!(d.phase(), Phase::Backoff);
        assert_eq!(d.access_deadline(), None);
        let k = d.state().backoff_remaining.unwrap();
        assert!(k <= p.cw_min);
        d.medium_idle(us(100));
        assert_eq!(d.access_deadline(), Some(us(134) + p.slot().times(k as u64)));
        // Busy again after DIFS + 2.5 slots: two whole slots are credited.
        if k >= 3 {
            d.medium_busy(us(134) + SimTime::from_nanos(22_500), &mut rng);
            assert_eq!(d.state().backoff_remaining, Some(k - 2));
        }
    }

    #[test]
    fn busy_during_difs_draws_backoff() {
        let mut rng = RngStream::new(1, 0);
        let mut d = Dcf::new(MacParams::default());
        d.enqueue(frame(0, us(0)), us(0), &mut rng);
        d.medium_busy(us(20), &mut rng);
        assert_eq!(d.phase(), Phase::Backoff);
        assert!(d.state().backoff_remaining.is_some());
    }

    #[test]
    fn retries_follow_cw_law_and_drop_after_limit() {
        let mut rng = RngStream::new(2, 0);
        let p = MacParams::default();
        let mut d = Dcf::new(p.clone());
        d.enqueue(frame(0, us(0)), us(0), &mut rng);
        let mut cws = vec![];
        let mut dropped = None;
        for attempt in 0..20u32 {
            let mut now = d.access_deadline().unwrap();
            assert_eq!(d.access_timer_fired(now), Some(attempt));
            cws.push(d.state().cw);
            d.begin_attempt(RateId::R54, us(36), now);
            now += us(36);
            match d.tx_finished(now, &mut rng) {
                TxFinish::AwaitAck { timeout_at } => now = timeout_at,
                other => panic!("{other:?}"),
            }
            if let Some(c) = d.ack_timeout(now, &mut rng) {
                dropped = Some(c);
                break;
            }
        }
        let Some(Completion::Dropped { frame, .. }) = dropped else {
            panic!("frame never dropped")
        };
        assert_eq!(frame.attempts.len(), 14);
        assert!(frame.attempts.iter().all(|a| a.outcome == AttemptOutcome::Failed));
        for (k, cw) in cws.iter().enumerate() {
            assert_eq!(*cw, ((1u32 << k.min(20)) * (p.cw_min + 1) - 1).min(p.cw_max));
        }
        // Fresh state afterwards, with a post-backoff pending.
        assert_eq!(d.state().cw, p.cw_min);
        assert_eq!(d.state().retry_count, 0);
        assert_eq!(d.phase(), Phase::Backoff);
    }

    #[test]
    fn first_timeout_doubles_window() {
        let mut rng = RngStream::new(2, 0);
        let mut d = Dcf::new(MacParams::default());
        d.enqueue(frame(0, us(0)), us(0), &mut rng);
        d.access_timer_fired(us(34));
        d.begin_attempt(RateId::R54, us(36), us(34));
        d.tx_finished(us(70), &mut rng);
        assert!(d.ack_timeout(us(115), &mut rng).is_none());
        assert_eq!(d.state().cw, 31);
        assert_eq!(d.state().retry_count, 1);
    }

    #[test]
    fn ack_completes_and_post_backoff_runs_with_empty_queue() {
        let mut rng = RngStream::new(3, 0);
        let mut d = Dcf::new(MacParams::default());
        d.enqueue(frame(7, us(0)), us(0), &mut rng);
        d.access_timer_fired(us(34));
        d.begin_attempt(RateId::R54, us(36), us(34));
        assert!(matches!(d.tx_finished(us(70), &mut rng), TxFinish::AwaitAck { .. }));
        let Completion::Acked { frame, at } = d.ack_received(us(114), &mut rng) else {
            panic!()
        };
        assert_eq!(frame.seqno, 7);
        assert_eq!(at, us(114));
        assert_eq!(frame.attempts[0].outcome, AttemptOutcome::Acked);
        let deadline = d.access_deadline().unwrap();
        assert_eq!(d.access_timer_fired(deadline), None);
        assert_eq!(d.phase(), Phase::Idle);
    }

    #[test]
    fn broadcast_is_not_acknowledged() {
        let mut rng = RngStream::new(3, 0);
        let mut d = Dcf::new(MacParams::default());
        let beacon = MacFrame::new(Psdu::new(100, 0, None, FrameKind::Beacon).unwrap(), 0, us(0));
        d.enqueue(beacon, us(0), &mut rng);
        d.access_timer_fired(us(34));
        d.begin_attempt(RateId::R6, us(160), us(34));
        match d.tx_finished(us(194), &mut rng) {
            TxFinish::Done(Completion::Sent { frame, .. }) => {
                assert_eq!(frame.attempts.len(), 1);
                assert_eq!(frame.attempts[0].outcome, AttemptOutcome::Unacknowledged);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eifs_after_failed_reception() {
        let mut rng = RngStream::new(0, 0);
        let mut d = Dcf::new(MacParams::default());
        d.medium_busy(us(0), &mut rng);
        d.reception_ended(false);
        d.medium_idle(us(100));
        d.enqueue(frame(0, us(100)), us(100), &mut rng);
        // Arrival while the medium was busy drew a backoff, so the deadline
        // is EIFS plus slots.
        let k = d.state().backoff_remaining.unwrap_or(0) as u64;
        let _ = k;
        let mut d2 = Dcf::new(MacParams::default());
        d2.reception_ended(false);
        d2.enqueue(frame(0, us(100)), us(100), &mut rng);
        assert_eq!(d2.access_deadline(), Some(us(194)));
        d2.reception_ended(true);
        assert_eq!(d2.access_deadline(), Some(us(134)));
    }

    #[test]
    fn queue_limit_drops() {
        let mut rng = RngStream::new(0, 0);
        let p = MacParams {
            queue_limit: 2,
            ..MacParams::default()
        };
        let mut d = Dcf::new(p);
        assert!(d.enqueue(frame(0, us(0)), us(0), &mut rng));
        assert!(d.enqueue(frame(1, us(0)), us(0), &mut rng));
        assert!(!d.enqueue(frame(2, us(0)), us(0), &mut rng));
        assert_eq!(d.queue_drops(), 1);
    }
}
