//! Event loop wiring the medium, per-node DCF, rate control and traffic
//! into one simulation run.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::mac::{Completion, Dcf, MacFrame, TxFinish, ACK_BYTES};
use crate::metrics::{PacketOutcome, PacketRecord};
use crate::minstrel::{Minstrel, MinstrelParams};
use crate::phy::{
    frame_airtime, response_rate, AirFrame, ChannelState, ErrorModel, FrameId, FrameKind, Medium, NodeId,
    PathLossParams, Psdu, RateId,
};
use crate::scenario::{NodeRole, NodeSpec};
use crate::sim::{EventHandle, RngStream, Scheduler, SimTime, StreamPurpose};
use crate::traffic::TrafficSource;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeaconParams {
    pub interval_us: u64,
    pub psdu_bytes: u32,
    pub rate: RateId,
}

impl Default for BeaconParams {
    fn default() -> Self {
        BeaconParams {
            // 100 time units of 1024 µs.
            interval_us: 102_400,
            psdu_bytes: 100,
            rate: RateId::R6,
        }
    }
}

/// Everything needed to instantiate one run.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub nodes: Vec<NodeSpec>,
    pub loss: PathLossParams,
    pub error_model: ErrorModel,
    pub minstrel: MinstrelParams,
    pub beacon: Option<BeaconParams>,
    pub seed: u64,
    pub app_start: SimTime,
    pub duration: SimTime,
    /// Station whose application packets are logged.
    pub observed: NodeId,
    pub record_trace: bool,
}

/// One transmission as it left the antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub frame_id: FrameId,
    pub node: NodeId,
    pub kind: FrameKind,
    pub dest: Option<NodeId>,
    pub rate: RateId,
    pub start: SimTime,
    pub end: SimTime,
    /// Application sequence number of the data frame, if any.
    pub seqno: Option<u64>,
    /// Attempt index within the frame's service (0 = first).
    pub attempt: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCounters {
    pub generated: u64,
    pub queue_drops: u64,
    pub data_attempts: u64,
    pub acked: u64,
    pub dropped: u64,
    pub beacons_sent: u64,
    pub acks_sent: u64,
    pub rx_ok: u64,
    pub rx_failed: u64,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub packets: Vec<PacketRecord>,
    /// Observed-station packets still queued or in service at the end.
    pub incomplete: u64,
    pub duration: SimTime,
    pub observed_tx_power_mw: f64,
    pub counters: Vec<NodeCounters>,
    pub roles: Vec<NodeRole>,
    pub events: u64,
    pub trace: Option<Vec<TraceEntry>>,
}

#[derive(Debug, Clone)]
enum Ev {
    Traffic(NodeId),
    Beacon(NodeId),
    Access(NodeId),
    TxEnd(NodeId),
    RxStart(NodeId, AirFrame),
    RxEnd(NodeId, FrameId),
    AckTimeout(NodeId),
    SendAck { node: NodeId, to: NodeId, rate: RateId },
    RaUpdate(NodeId),
}

struct Node {
    role: NodeRole,
    dcf: Dcf,
    minstrel: Minstrel,
    traffic: Option<TrafficSource>,
    rng_traffic: RngStream,
    rng_backoff: RngStream,
    rng_rate: RngStream,
    rng_rx: RngStream,
    access: Option<(EventHandle, SimTime)>,
    ack_timer: Option<EventHandle>,
    timeout_deferred: bool,
    sending_ack: bool,
    counters: NodeCounters,
}

pub struct Simulation {
    setup: SimSetup,
    sched: Scheduler<Ev>,
    medium: Medium,
    nodes: Vec<Node>,
    ap: NodeId,
    packets: Vec<PacketRecord>,
    trace: Option<Vec<TraceEntry>>,
    events: u64,
}

impl Simulation {
    pub fn new(setup: SimSetup) -> Result<Self> {
        if setup.nodes.is_empty() {
            return Err(SimError::InvalidScenario("no nodes".into()));
        }
        let ap = setup
            .nodes
            .iter()
            .position(|n| n.role == NodeRole::Ap)
            .ok_or_else(|| SimError::InvalidScenario("scenario has no access point".into()))?;
        if setup.observed >= setup.nodes.len() {
            return Err(SimError::InvalidScenario("observed node out of range".into()));
        }
        if setup.duration <= setup.app_start {
            return Err(SimError::InvalidScenario(
                "duration must exceed the application start".into(),
            ));
        }
        let positions: Vec<_> = setup.nodes.iter().map(|n| n.position).collect();
        let radios: Vec<_> = setup.nodes.iter().map(|n| n.radio).collect();
        let medium = Medium::new(&positions, &radios, &setup.loss, setup.error_model.clone())?;
        let mut nodes = Vec::with_capacity(setup.nodes.len());
        for (id, spec) in setup.nodes.iter().enumerate() {
            spec.mac.validate()?;
            setup.minstrel.validate()?;
            let traffic = spec
                .traffic
                .clone()
                .map(|p| TrafficSource::new(p, setup.app_start))
                .transpose()?;
            let psdu_bytes = match (&spec.traffic, &setup.beacon) {
                (Some(p), _) => p.psdu_bytes(),
                (None, Some(b)) => b.psdu_bytes,
                (None, None) => ACK_BYTES,
            };
            let stream = |p| RngStream::for_node(setup.seed, id, p);
            nodes.push(Node {
                role: spec.role,
                dcf: Dcf::new(spec.mac.clone()),
                minstrel: Minstrel::new(setup.minstrel.clone(), spec.mac.clone(), psdu_bytes),
                traffic,
                rng_traffic: stream(StreamPurpose::Traffic),
                rng_backoff: stream(StreamPurpose::Backoff),
                rng_rate: stream(StreamPurpose::RateControl),
                rng_rx: stream(StreamPurpose::Reception),
                access: None,
                ack_timer: None,
                timeout_deferred: false,
                sending_ack: false,
                counters: NodeCounters::default(),
            });
        }
        let mut sched = Scheduler::new();
        for (id, node) in nodes.iter().enumerate() {
            if let Some(t) = &node.traffic {
                sched.schedule(t.next_time(), Ev::Traffic(id));
                sched.schedule(setup.app_start + setup.minstrel.update_interval(), Ev::RaUpdate(id));
            }
        }
        if let Some(b) = &setup.beacon {
            if b.interval_us == 0 {
                return Err(SimError::InvalidParameter("beacon interval must be positive".into()));
            }
            let mut rng = RngStream::for_node(setup.seed, ap, StreamPurpose::Beacon);
            let offset = rng.uniform_inclusive((b.interval_us - 1) as u32);
            sched.schedule(SimTime::from_micros(u64::from(offset)), Ev::Beacon(ap));
        }
        Ok(Simulation {
            trace: setup.record_trace.then(Vec::new),
            setup,
            sched,
            medium,
            nodes,
            ap,
            packets: Vec::new(),
            events: 0,
        })
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    /// Runs to the configured duration and returns the logs.
    pub fn run(mut self) -> SimOutput {
        let end = self.setup.duration;
        while let Some(ev) = self.sched.pop_until(end) {
            self.events += 1;
            let now = ev.fire_at;
            self.handle(ev.payload, now);
        }
        self.sched.advance_to(end);
        let observed = &self.nodes[self.setup.observed];
        SimOutput {
            packets: self.packets,
            incomplete: observed.dcf.queue_len() as u64,
            duration: end,
            observed_tx_power_mw: self.medium.radio(self.setup.observed).tx_power_mw(),
            counters: self.nodes.iter().map(|n| n.counters).collect(),
            roles: self.nodes.iter().map(|n| n.role).collect(),
            events: self.events,
            trace: self.trace,
        }
    }

    fn handle(&mut self, ev: Ev, now: SimTime) {
        match ev {
            Ev::Traffic(n) => self.on_traffic(n, now),
            Ev::Beacon(n) => self.on_beacon(n, now),
            Ev::Access(n) => self.on_access(n, now),
            Ev::TxEnd(n) => self.on_tx_end(n, now),
            Ev::RxStart(n, frame) => {
                self.medium.signal_start(n, frame, now);
                self.update_busy(n, now);
                self.sync_timer(n, now);
            }
            Ev::RxEnd(n, id) => self.on_rx_end(n, id, now),
            Ev::AckTimeout(n) => self.on_ack_timeout(n, now),
            Ev::SendAck { node, to, rate } => self.on_send_ack(node, to, rate, now),
            Ev::RaUpdate(n) => {
                self.nodes[n].minstrel.update_stats();
                let next = now + self.setup.minstrel.update_interval();
                if next < self.setup.duration {
                    self.sched.schedule(next, Ev::RaUpdate(n));
                }
            }
        }
    }

    fn update_busy(&mut self, n: NodeId, now: SimTime) {
        let busy = self.medium.is_transmitting(n) || self.medium.carrier_sense(n) == ChannelState::Busy;
        let node = &mut self.nodes[n];
        if busy != node.dcf.medium_busy_state() {
            if busy {
                node.dcf.medium_busy(now, &mut node.rng_backoff);
            } else {
                node.dcf.medium_idle(now);
            }
        }
    }

    /// Re-arms the access timer to match the DCF's current deadline.
    fn sync_timer(&mut self, n: NodeId, now: SimTime) {
        let want = self.nodes[n].dcf.access_deadline().map(|d| d.max(now));
        let node = &mut self.nodes[n];
        if node.access.map(|(_, t)| t) == want {
            return;
        }
        if let Some((h, _)) = node.access.take() {
            self.sched.cancel(h);
        }
        if let Some(t) = want {
            let h = self.sched.schedule(t, Ev::Access(n));
            node.access = Some((h, t));
        }
    }

    fn on_traffic(&mut self, n: NodeId, now: SimTime) {
        let ap = self.ap;
        let node = &mut self.nodes[n];
        let source = node.traffic.as_mut().expect("traffic event without a source");
        let (pkt, next) = source.on_tick(now, &mut node.rng_traffic);
        if next < self.setup.duration {
            self.sched.schedule(next, Ev::Traffic(n));
        }
        node.counters.generated += 1;
        let psdu = Psdu::new(pkt.psdu_bytes(), n, Some(ap), FrameKind::Data).expect("traffic PSDU above minimum");
        let frame = MacFrame::new(psdu, pkt.seqno, pkt.gen_time);
        if !node.dcf.enqueue(frame, now, &mut node.rng_backoff) {
            node.counters.queue_drops += 1;
            if n == self.setup.observed {
                self.packets.push(PacketRecord {
                    seqno: pkt.seqno,
                    gen_time: pkt.gen_time,
                    outcome: PacketOutcome::Dropped,
                    latency: None,
                    attempts: Vec::new(),
                });
            }
        }
        self.sync_timer(n, now);
    }

    fn on_beacon(&mut self, n: NodeId, now: SimTime) {
        let b = self.setup.beacon.expect("beacon event without beacon params");
        let next = now + SimTime::from_micros(b.interval_us);
        if next < self.setup.duration {
            self.sched.schedule(next, Ev::Beacon(n));
        }
        let node = &mut self.nodes[n];
        let psdu = Psdu::new(b.psdu_bytes, n, None, FrameKind::Beacon).expect("beacon PSDU above minimum");
        let seq = node.counters.beacons_sent;
        node.dcf
            .enqueue(MacFrame::new(psdu, seq, now), now, &mut node.rng_backoff);
        self.sync_timer(n, now);
    }

    fn on_access(&mut self, n: NodeId, now: SimTime) {
        let node = &mut self.nodes[n];
        match node.access {
            Some((_, t)) if t == now => node.access = None,
            _ => return,
        }
        let Some(attempt) = node.dcf.access_timer_fired(now) else {
            return;
        };
        let head = node.dcf.head().expect("access granted with an empty queue");
        let psdu = head.psdu;
        let seqno = head.seqno;
        let rate = match psdu.kind {
            FrameKind::Beacon => self.setup.beacon.map(|b| b.rate).unwrap_or(RateId::LOWEST),
            _ => node.minstrel.select_rate(attempt, &mut node.rng_rate),
        };
        if psdu.kind == FrameKind::Data {
            node.counters.data_attempts += 1;
        }
        let airtime = frame_airtime(psdu.size, rate);
        node.dcf.begin_attempt(rate, airtime, now);
        self.transmit(
            psdu,
            rate,
            now,
            (psdu.kind == FrameKind::Data).then_some(seqno),
            attempt,
        );
    }

    fn transmit(&mut self, psdu: Psdu, rate: RateId, now: SimTime, seqno: Option<u64>, attempt: u32) {
        let airtime = frame_airtime(psdu.size, rate);
        let (frame, arrivals) = self.medium.begin_tx(psdu, rate, airtime, now);
        let n = psdu.source;
        self.sched.schedule(frame.tx_end(), Ev::TxEnd(n));
        for a in arrivals {
            self.sched.schedule(a.start, Ev::RxStart(a.rx, frame));
            self.sched.schedule(a.end, Ev::RxEnd(a.rx, frame.id));
        }
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEntry {
                frame_id: frame.id,
                node: n,
                kind: psdu.kind,
                dest: psdu.dest,
                rate,
                start: now,
                end: frame.tx_end(),
                seqno,
                attempt,
            });
        }
        self.update_busy(n, now);
        self.sync_timer(n, now);
    }

    fn on_tx_end(&mut self, n: NodeId, now: SimTime) {
        self.medium.end_tx(n);
        let node = &mut self.nodes[n];
        if node.sending_ack {
            node.sending_ack = false;
        } else {
            match node.dcf.tx_finished(now, &mut node.rng_backoff) {
                TxFinish::AwaitAck { timeout_at } => {
                    node.ack_timer = Some(self.sched.schedule(timeout_at, Ev::AckTimeout(n)));
                }
                TxFinish::Done(_) => node.counters.beacons_sent += 1,
            }
        }
        self.update_busy(n, now);
        self.sync_timer(n, now);
    }

    fn on_rx_end(&mut self, n: NodeId, id: FrameId, now: SimTime) {
        let rx = {
            let node = &mut self.nodes[n];
            self.medium.signal_end(n, id, &mut node.rng_rx)
        };
        if let Some(rec) = rx {
            let node = &mut self.nodes[n];
            node.dcf.reception_ended(rec.success);
            if rec.success {
                node.counters.rx_ok += 1;
            } else {
                node.counters.rx_failed += 1;
            }
        }
        self.update_busy(n, now);
        if let Some(rec) = rx {
            let psdu = rec.frame.psdu;
            let for_me = psdu.dest == Some(n);
            match psdu.kind {
                FrameKind::Data if rec.success && for_me => {
                    let rate = response_rate(rec.frame.rate, &self.nodes[n].dcf.params().basic_rates);
                    let at = now + self.nodes[n].dcf.params().sifs();
                    self.sched.schedule(
                        at,
                        Ev::SendAck {
                            node: n,
                            to: psdu.source,
                            rate,
                        },
                    );
                }
                FrameKind::Ack if for_me && self.nodes[n].dcf.awaiting_ack() => {
                    if rec.success {
                        let node = &mut self.nodes[n];
                        if let Some(h) = node.ack_timer.take() {
                            self.sched.cancel(h);
                        }
                        node.timeout_deferred = false;
                        let completion = node.dcf.ack_received(now, &mut node.rng_backoff);
                        self.complete(n, completion);
                    } else if self.nodes[n].timeout_deferred {
                        self.nodes[n].timeout_deferred = false;
                        self.fail_attempt(n, now);
                    }
                }
                _ => {}
            }
        }
        self.sync_timer(n, now);
    }

    fn on_ack_timeout(&mut self, n: NodeId, now: SimTime) {
        self.nodes[n].ack_timer = None;
        let locked_on_ack = self
            .medium
            .locked_frame(n)
            .is_some_and(|f| f.psdu.kind == FrameKind::Ack && f.psdu.dest == Some(n));
        if locked_on_ack {
            // Resolved when that reception ends.
            self.nodes[n].timeout_deferred = true;
            return;
        }
        self.fail_attempt(n, now);
        self.sync_timer(n, now);
    }

    fn fail_attempt(&mut self, n: NodeId, now: SimTime) {
        let node = &mut self.nodes[n];
        if let Some(rate) = node.dcf.state().current_rate {
            node.minstrel.record_outcome(rate, false);
        }
        if let Some(c) = node.dcf.ack_timeout(now, &mut node.rng_backoff) {
            self.complete(n, c);
        }
    }

    fn complete(&mut self, n: NodeId, completion: Completion) {
        let node = &mut self.nodes[n];
        let record = match completion {
            Completion::Acked { frame, at } => {
                let last = frame.attempts.last().expect("acked frame has an attempt");
                node.minstrel.record_outcome(last.rate, true);
                node.counters.acked += 1;
                PacketRecord {
                    seqno: frame.seqno,
                    gen_time: frame.gen_time,
                    outcome: PacketOutcome::Acked,
                    latency: Some(at - frame.gen_time),
                    attempts: frame.attempts,
                }
            }
            Completion::Dropped { frame, .. } => {
                node.counters.dropped += 1;
                PacketRecord {
                    seqno: frame.seqno,
                    gen_time: frame.gen_time,
                    outcome: PacketOutcome::Dropped,
                    latency: None,
                    attempts: frame.attempts,
                }
            }
            Completion::Sent { .. } => return,
        };
        if n == self.setup.observed {
            self.packets.push(record);
        }
    }

    fn on_send_ack(&mut self, n: NodeId, to: NodeId, rate: RateId, now: SimTime) {
        if self.medium.is_transmitting(n) {
            return;
        }
        let psdu = Psdu::new(ACK_BYTES, n, Some(to), FrameKind::Ack).expect("ACK size is the minimum");
        let node = &mut self.nodes[n];
        node.sending_ack = true;
        node.counters.acks_sent += 1;
        self.transmit(psdu, rate, now, None, 0);
    }
}
