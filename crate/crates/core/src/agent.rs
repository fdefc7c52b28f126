//! Per-node enforcement logic.
//!
//! Every node runs the same agent: the outbound enforcement point filters a
//! node's neighbours through the decision point before anything leaves the
//! radio, the inbound enforcement point splits the policy block from the
//! payload and hands both to the controller, which keeps them per message.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::packet::{FrameKind, MsgId, NodeId, Packet};
use crate::policy::{Decision, GroupId, Policy, PolicyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("node {node} holds no message {msg}")]
    UnknownMessage { node: NodeId, msg: MsgId },
    #[error("node {node} cannot originate under a policy authored by {author}")]
    ForeignPolicy { node: NodeId, author: NodeId },
}

/// Single decision primitive consulted for every candidate destination.
pub fn pdp_decide(
    policy: &Policy,
    dest: NodeId,
    dest_group: GroupId,
    originator: NodeId,
) -> Decision {
    if dest == originator {
        return Decision::Deny;
    }
    policy.evaluate(dest_group)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredMessage {
    pub payload: Vec<u8>,
    pub created_at_us: u64,
    pub kind: FrameKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeliveryOutcome {
    Delivered(Packet),
    Duplicate(MsgId),
    Malformed(PolicyError),
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub group: GroupId,
    pub position: Position,
    pub range: f64,
    pub default_policy: Policy,
    policy_store: BTreeMap<MsgId, Policy>,
    message_store: BTreeMap<MsgId, StoredMessage>,
    seen: BTreeSet<MsgId>,
    next_seq: u32,
}

impl NodeState {
    /// A fresh node whose own messages default to a deny-all policy.
    pub fn new(id: NodeId, group: GroupId, position: Position, range: f64) -> Self {
        NodeState {
            id,
            group,
            position,
            range,
            default_policy: Policy::deny_all(id),
            policy_store: BTreeMap::new(),
            message_store: BTreeMap::new(),
            seen: BTreeSet::new(),
            next_seq: 0,
        }
    }

    pub fn with_policy(mut self, permitted: impl IntoIterator<Item = GroupId>) -> Self {
        self.default_policy = Policy::new(self.id, permitted);
        self
    }

    pub fn has_seen(&self, msg: &MsgId) -> bool {
        self.seen.contains(msg)
    }

    pub fn stored_policy(&self, msg: &MsgId) -> Option<&Policy> {
        self.policy_store.get(msg)
    }

    pub fn stored_message(&self, msg: &MsgId) -> Option<&StoredMessage> {
        self.message_store.get(msg)
    }

    pub fn stored_messages(&self) -> impl Iterator<Item = &MsgId> {
        self.message_store.keys()
    }

    /// Outbound enforcement: which neighbours may receive this copy.
    ///
    /// Policied packets go through [`pdp_decide`]; plain packets skip the
    /// group check but still never travel back to their originator.
    /// The result is ascending and duplicate-free.
    pub fn pep_out(&self, packet: &Packet, neighbors: &[(NodeId, GroupId)]) -> Vec<NodeId> {
        let originator = packet.originator();
        let mut send: Vec<NodeId> = neighbors
            .iter()
            .filter(|(dest, _)| *dest != self.id)
            .filter(|&&(dest, group)| match &packet.policy {
                Some(policy) => pdp_decide(policy, dest, group, originator).is_allow(),
                None => dest != originator,
            })
            .map(|&(dest, _)| dest)
            .collect();
        send.sort_unstable();
        send.dedup();
        send
    }

    /// Inbound enforcement for one frame addressed to this node.
    pub fn pep_in(&mut self, frame: &[u8], kind: FrameKind) -> DeliveryOutcome {
        let packet = match Packet::decode(frame, kind) {
            Ok(p) => p,
            Err(e) => return DeliveryOutcome::Malformed(e),
        };
        let msg = packet.msg_id;

        if let Some(received) = &packet.policy {
            let merged = match self.policy_store.get(&msg) {
                Some(existing) => existing.merge(received),
                None => received.merge(received),
            };
            if self.seen.contains(&msg) && !self.message_store.contains_key(&msg) {
                // our own message echoed back; nothing to store
                return DeliveryOutcome::Duplicate(msg);
            }
            self.policy_store.insert(msg, merged);
        }

        if !self.seen.insert(msg) {
            return DeliveryOutcome::Duplicate(msg);
        }
        self.message_store.insert(
            msg,
            StoredMessage {
                payload: packet.payload.clone(),
                created_at_us: packet.created_at_us,
                kind,
            },
        );
        DeliveryOutcome::Delivered(packet)
    }

    /// Builds a new message authored by this node. Plain messages pass `None`.
    pub fn originate(
        &mut self,
        payload: Vec<u8>,
        policy: Option<Policy>,
        now: f64,
    ) -> Result<Packet, AgentError> {
        if let Some(p) = &policy {
            if p.originator != self.id {
                return Err(AgentError::ForeignPolicy {
                    node: self.id,
                    author: p.originator,
                });
            }
        }
        let msg_id = MsgId {
            originator: self.id,
            seq: self.next_seq,
        };
        self.next_seq += 1;
        self.seen.insert(msg_id);
        Ok(Packet {
            msg_id,
            sender: self.id,
            created_at_us: seconds_to_us(now),
            policy,
            payload,
        })
    }

    /// Rebuilds a stored message for the next hop, carrying the locally
    /// merged policy rather than this node's own default.
    pub fn forward(&self, msg: MsgId) -> Result<Packet, AgentError> {
        let unknown = || AgentError::UnknownMessage { node: self.id, msg };
        let stored = self.message_store.get(&msg).ok_or_else(unknown)?;
        let policy = match stored.kind {
            FrameKind::Plain => None,
            FrameKind::Policied => Some(self.policy_store.get(&msg).ok_or_else(unknown)?.clone()),
        };
        Ok(Packet {
            msg_id: msg,
            sender: self.id,
            created_at_us: stored.created_at_us,
            policy,
            payload: stored.payload.clone(),
        })
    }
}

pub(crate) fn seconds_to_us(t: f64) -> u64 {
    (t * 1e6).round().max(0.0) as u64
}
