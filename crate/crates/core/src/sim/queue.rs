use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use super::time::SimTime;

/// An event pulled off the queue.
#[derive(Debug, Clone, PartialEq)]
pub struct Event<P> {
    pub fire_at: SimTime,
    /// Insertion counter; breaks ties between equal `fire_at` values.
    pub seq: u64,
    pub payload: P,
}

/// Handle returned by [`Scheduler::schedule`], used for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

struct Entry<P> {
    fire_at: SimTime,
    seq: u64,
    payload: P,
}

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        (self.fire_at, self.seq) == (other.fire_at, other.seq)
    }
}
impl<P> Eq for Entry<P> {}
impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<P> Ord for Entry<P> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.fire_at, self.seq).cmp(&(other.fire_at, other.seq))
    }
}

/// Deterministic discrete-event queue.
///
/// Events dispatch in `(fire_at, seq)` order, so equal-time events come out
/// in insertion order regardless of heap internals. Cancellation is lazy:
/// cancelled entries stay in the heap and are skipped when they surface.
pub struct Scheduler<P> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Reverse<Entry<P>>>,
    cancelled: HashSet<u64>,
}

impl<P> Default for Scheduler<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> Scheduler<P> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of live (non-cancelled) pending events.
    pub fn pending(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    /// Schedules `payload` to fire at `fire_at`.
    ///
    /// # Panics
    ///
    /// Scheduling before the current clock is a logic error and panics.
    pub fn schedule(&mut self, fire_at: SimTime, payload: P) -> EventHandle {
        assert!(
            fire_at >= self.now,
            "event scheduled in the past: fire_at={fire_at} now={}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry { fire_at, seq, payload }));
        EventHandle(seq)
    }

    pub fn schedule_in(&mut self, delay: SimTime, payload: P) -> EventHandle {
        self.schedule(self.now + delay, payload)
    }

    /// Cancels a pending event. Cancelling an event that already fired, or
    /// cancelling twice, is a no-op.
    pub fn cancel(&mut self, handle: EventHandle) {
        if handle.0 < self.next_seq && self.heap.iter().any(|e| e.0.seq == handle.0) {
            self.cancelled.insert(handle.0);
        }
    }

    /// Pops the next live event with `fire_at <= t_end`, advancing the clock.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<Event<P>> {
        loop {
            let head = self.heap.peek()?;
            if head.0.fire_at > t_end {
                return None;
            }
            let Reverse(entry) = self.heap.pop().expect("peeked");
            if self.cancelled.remove(&entry.seq) {
                continue;
            }
            debug_assert!(entry.fire_at >= self.now);
            self.now = entry.fire_at;
            return Some(Event {
                fire_at: entry.fire_at,
                seq: entry.seq,
                payload: entry.payload,
            });
        }
    }

    /// Dispatches every event with `fire_at <= t_end` to `handler`, then sets
    /// the clock to `t_end`. Returns the number of events dispatched.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Scheduler<P>, Event<P>),
    {
        let mut count = 0;
        while let Some(ev) = self.pop_until(t_end) {
            handler(self, ev);
            count += 1;
        }
        self.advance_to(t_end);
        count
    }

    /// Moves the clock forward without dispatching anything.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_delay_dispatches_next() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::ZERO, "a");
        let ev = s.pop_until(SimTime::ZERO).unwrap();
        assert_eq!(ev.payload, "a");
        assert_eq!(s.now(), SimTime::ZERO);
    }

    #[test]
    fn equal_times_dispatch_in_insertion_order() {
        let mut s = Scheduler::new();
        let t = SimTime::from_micros(5);
        for i in 0..10 {
            s.schedule(t, i);
        }
        let mut out = Vec::new();
        s.run_until(t, |_, ev| out.push(ev.payload));
        assert_eq!(out, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn app_start_at_one_second() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(1), ());
        let mut fired = None;
        s.run_until(SimTime::from_secs(2), |sch, _| fired = Some(sch.now()));
        assert_eq!(fired, Some(SimTime::from_secs(1)));
    }

    #[test]
    fn empty_queue_advances_clock() {
        let mut s: Scheduler<()> = Scheduler::new();
        let n = s.run_until(SimTime::from_secs(1), |_, _| {});
        assert_eq!(n, 0);
        assert_eq!(s.now(), SimTime::from_secs(1));
    }

    #[test]
    fn run_until_is_inclusive() {
        let mut s = Scheduler::new();
        for ns in 1..=3 {
            s.schedule(SimTime::from_nanos(ns), ns);
        }
        let n = s.run_until(SimTime::from_nanos(2), |_, _| {});
        assert_eq!(n, 2);
        assert_eq!(s.now(), SimTime::from_nanos(2));
        assert_eq!(s.pending(), 1);
    }

    #[test]
    fn cancelled_events_are_skipped() {
        let mut s = Scheduler::new();
        let a = s.schedule(SimTime::from_nanos(1), 'a');
        s.schedule(SimTime::from_nanos(2), 'b');
        s.cancel(a);
        s.cancel(a);
        assert_eq!(s.pending(), 1);
        let mut out = Vec::new();
        s.run_until(SimTime::from_nanos(10), |_, ev| out.push(ev.payload));
        assert_eq!(out, vec!['b']);
        // Cancelling an already-fired event does nothing.
        s.cancel(a);
        assert_eq!(s.pending(), 0);
    }

    #[test]
    fn handler_can_schedule_follow_ups() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::ZERO, 0u32);
        let n = s.run_until(SimTime::from_micros(10), |sch, ev| {
            if ev.payload < 5 {
                sch.schedule_in(SimTime::from_micros(1), ev.payload + 1);
            }
        });
        assert_eq!(n, 6);
    }

    #[test]
    #[should_panic(expected = "in the past")]
    fn scheduling_in_the_past_panics() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(1), ());
        s.run_until(SimTime::from_secs(2), |_, _| {});
        s.schedule(SimTime::from_secs(1), ());
    }

    proptest! {
        #[test]
        fn dispatch_order_is_sorted_and_stable(times in prop::collection::vec(0u64..50, 1..200)) {
            let mut s = Scheduler::new();
            for (i, t) in times.iter().enumerate() {
                s.schedule(SimTime::from_nanos(*t), i);
            }
            let mut out = Vec::new();
            s.run_until(SimTime::from_nanos(100), |_, ev| out.push((ev.fire_at, ev.payload)));
            let mut expected: Vec<_> = times.iter().enumerate().map(|(i, t)| (SimTime::from_nanos(*t), i)).collect();
            expected.sort();
            prop_assert_eq!(out, expected);
        }
    }
}
