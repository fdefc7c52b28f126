//! Discrete-event loop.
//!
//! Events run in `(time, seq)` order where `seq` is handed out at scheduling
//! time, so simultaneous events execute in the order they were scheduled and
//! a run needs no randomness at all.
//!
//! Each node owns one transmitter. Frames for a send list go out one after
//! another; a frame never starts before the previous frame from the same
//! node has left the air.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::rc::Rc;

use crate::agent::{DeliveryOutcome, NodeState};
use crate::packet::{FrameKind, MsgId, NodeId, Packet};
use crate::policy::{GroupId, Policy, MAX_GROUPS};
use crate::sim::radio::{hop_delay, neighbors_of};
use crate::sim::scenario::{CbrFlow, Scenario, ScenarioError};
use crate::trace::{Trace, TraceEvent, TraceRecord};

#[derive(Debug, Clone)]
enum EventKind {
    Originate {
        node: usize,
        payload_bytes: usize,
        kind: FrameKind,
    },
    CbrTick {
        flow: usize,
    },
    Transmit {
        from: usize,
        to: usize,
        frame: Rc<[u8]>,
        kind: FrameKind,
        msg: MsgId,
    },
    Receive {
        from: usize,
        to: usize,
        frame: Rc<[u8]>,
        kind: FrameKind,
    },
    ForwardDue {
        node: usize,
        msg: MsgId,
    },
}

#[derive(Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap and we want the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub struct Simulator<'a> {
    scenario: &'a Scenario,
    nodes: Vec<NodeState>,
    index: BTreeMap<NodeId, usize>,
    neighbors: Vec<Vec<(NodeId, GroupId)>>,
    tx_free: Vec<f64>,
    queue: BinaryHeap<Event>,
    next_seq: u64,
    now: f64,
    trace: Trace,
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        for (node, groups) in &scenario.policies {
            if groups.len() > MAX_GROUPS {
                return Err(ScenarioError::Invalid(format!(
                    "policy of node {node} lists {} groups, more than a policy block holds",
                    groups.len()
                )));
            }
        }

        let mut specs: Vec<_> = scenario.nodes.iter().collect();
        specs.sort_by_key(|s| s.id);
        let nodes: Vec<NodeState> = specs
            .iter()
            .map(|s| {
                NodeState::new(s.id, s.group, s.position, s.range)
                    .with_policy(scenario.permitted_for(s.id))
            })
            .collect();
        let index = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let neighbors = specs
            .iter()
            .map(|s| neighbors_of(s.id, &scenario.nodes))
            .collect();

        let mut sim = Simulator {
            scenario,
            tx_free: vec![0.0; nodes.len()],
            nodes,
            index,
            neighbors,
            queue: BinaryHeap::new(),
            next_seq: 0,
            now: 0.0,
            trace: Trace::new(),
        };

        for n in &sim.nodes {
            sim.trace.push(TraceRecord {
                time: 0.0,
                event: TraceEvent::Node,
                node: n.id,
                peer: None,
                msg: None,
                size: 0,
                group: n.group,
            });
        }
        for o in &scenario.originations {
            let node = sim.index[&o.node];
            sim.schedule(
                o.time,
                EventKind::Originate {
                    node,
                    payload_bytes: o.payload_bytes,
                    kind: FrameKind::Policied,
                },
            );
        }
        for (i, flow) in scenario.flows.iter().enumerate() {
            sim.install_cbr(i, flow);
        }
        Ok(sim)
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Event { time, seq, kind });
    }

    /// Queues one tick per `flow.tick_times()`.
    fn install_cbr(&mut self, flow_idx: usize, flow: &CbrFlow) {
        for t in flow.tick_times() {
            self.schedule(t, EventKind::CbrTick { flow: flow_idx });
        }
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeState> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// Runs until the queue drains or the next event lies past `end`.
    pub fn run_to_end(&mut self) {
        while let Some(event) = self.queue.pop() {
            if let Some(end) = self.scenario.end_time {
                if event.time > end {
                    self.queue.clear();
                    break;
                }
            }
            debug_assert!(event.time >= self.now);
            self.now = event.time;
            self.dispatch(event.kind);
        }
    }

    fn record(
        &mut self,
        event: TraceEvent,
        node: usize,
        peer: Option<usize>,
        msg: Option<MsgId>,
        size: usize,
    ) {
        let record = TraceRecord {
            time: self.now,
            event,
            node: self.nodes[node].id,
            peer: peer.map(|p| self.nodes[p].id),
            msg,
            size,
            group: self.nodes[node].group,
        };
        self.trace.push(record);
    }

    fn dispatch(&mut self, kind: EventKind) {
        match kind {
            EventKind::Originate {
                node,
                payload_bytes,
                kind,
            } => self.originate(node, payload_bytes, kind),
            EventKind::CbrTick { flow } => {
                let flow = &self.scenario.flows[flow];
                let kind = if flow.policied {
                    FrameKind::Policied
                } else {
                    FrameKind::Plain
                };
                self.originate(self.index[&flow.src], flow.packet_size, kind);
            }
            EventKind::Transmit {
                from,
                to,
                frame,
                kind,
                msg,
            } => {
                self.record(TraceEvent::Send, from, Some(to), Some(msg), frame.len());
                let distance = self.nodes[from].position.distance(&self.nodes[to].position);
                let delay = hop_delay(8.0 * frame.len() as f64, distance, &self.scenario.radio);
                self.schedule(
                    self.now + delay,
                    EventKind::Receive {
                        from,
                        to,
                        frame,
                        kind,
                    },
                );
            }
            EventKind::Receive {
                from,
                to,
                frame,
                kind,
            } => self.receive(from, to, &frame, kind),
            EventKind::ForwardDue { node, msg } => {
                // message_store only holds what pep_in delivered, so this cannot miss
                let packet = self.nodes[node]
                    .forward(msg)
                    .expect("forward scheduled for a delivered message");
                self.transmit(node, packet);
            }
        }
    }

    fn originate(&mut self, node: usize, payload_bytes: usize, kind: FrameKind) {
        let state = &mut self.nodes[node];
        let policy: Option<Policy> = match kind {
            FrameKind::Policied => Some(state.default_policy.clone()),
            FrameKind::Plain => None,
        };
        let payload = (0..payload_bytes).map(|i| i as u8).collect();
        let packet = state
            .originate(payload, policy, self.now)
            .expect("default policy is authored by its own node");
        let event = match kind {
            FrameKind::Policied => TraceEvent::Orig,
            FrameKind::Plain => TraceEvent::OrigPlain,
        };
        self.record(event, node, None, Some(packet.msg_id), payload_bytes);
        self.transmit(node, packet);
    }

    /// Runs the outbound enforcement point and queues one frame per allowed
    /// neighbour behind whatever the transmitter is already sending.
    fn transmit(&mut self, node: usize, packet: Packet) {
        let dests = self.nodes[node].pep_out(&packet, &self.neighbors[node]);
        if dests.is_empty() {
            return;
        }
        let frame: Rc<[u8]> = packet
            .encode()
            .expect("policy sizes checked at construction")
            .into();
        let airtime = self
            .scenario
            .radio
            .transmission_time(8.0 * frame.len() as f64);
        let kind = packet.kind();
        for dest in dests {
            let start = self.now.max(self.tx_free[node]);
            self.tx_free[node] = start + airtime;
            self.schedule(
                start,
                EventKind::Transmit {
                    from: node,
                    to: self.index[&dest],
                    frame: Rc::clone(&frame),
                    kind,
                    msg: packet.msg_id,
                },
            );
        }
    }

    fn receive(&mut self, from: usize, to: usize, frame: &[u8], kind: FrameKind) {
        let peeked = Packet::peek_msg_id(frame);
        self.record(TraceEvent::Recv, to, Some(from), peeked, frame.len());
        match self.nodes[to].pep_in(frame, kind) {
            DeliveryOutcome::Delivered(packet) => {
                self.record(
                    TraceEvent::Deliver,
                    to,
                    Some(from),
                    Some(packet.msg_id),
                    packet.payload.len(),
                );
                self.schedule(
                    self.now + self.scenario.forward_delay,
                    EventKind::ForwardDue {
                        node: to,
                        msg: packet.msg_id,
                    },
                );
            }
            DeliveryOutcome::Duplicate(msg) => {
                self.record(TraceEvent::DropDup, to, Some(from), Some(msg), frame.len());
            }
            DeliveryOutcome::Malformed(_) => {
                self.record(
                    TraceEvent::DropMalformed,
                    to,
                    Some(from),
                    peeked,
                    frame.len(),
                );
            }
        }
    }
}

/// Executes a scenario to completion.
///
/// The event loop draws no random numbers; `seed` is accepted so callers can
/// thread one value through generation and execution alike.
pub fn run(scenario: &Scenario, _seed: u64) -> Result<Trace, ScenarioError> {
    let mut sim = Simulator::new(scenario)?;
    sim.run_to_end();
    Ok(sim.into_trace())
}
