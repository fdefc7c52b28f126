//! Confidentiality checks over a finished trace, plus a reachability oracle
//! that predicts delivery sets straight from the topology.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::packet::{MsgId, NodeId};
use crate::policy::GroupId;
use crate::sim::Scenario;
use crate::trace::{Trace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationReason {
    /// Payload reached a node outside the permitted groups.
    ForbiddenGroup { group: GroupId },
    /// A copy was sent back to the message's originator.
    SentToOriginator,
    /// The trace names a node the scenario does not declare.
    UnknownNode,
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationReason::ForbiddenGroup { group } => {
                write!(
                    f,
                    "payload reached group {group}, which the policy does not permit"
                )
            }
            ViolationReason::SentToOriginator => f.write_str("copy sent back to the originator"),
            ViolationReason::UnknownNode => f.write_str("node not declared in the scenario"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub time: f64,
    pub node: NodeId,
    pub msg: Option<MsgId>,
    pub reason: ViolationReason,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.msg.map_or_else(|| "-".to_string(), |m| m.to_string());
        write!(
            f,
            "t={:.9} node={} msg={}: {}",
            self.time, self.node, msg, self.reason
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditResult {
    pub violations: Vec<Violation>,
}

impl AuditResult {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every policied message stayed inside its originator's
/// permitted groups and never travelled back to the originator.
///
/// Messages the trace marks as plain (`ORIG_PLAIN`) carry no policy and are
/// skipped. Messages with no origination record are audited as policied.
/// Group membership is taken from the scenario, not from the trace.
pub fn audit_confidentiality(trace: &Trace, scenario: &Scenario) -> AuditResult {
    let plain: BTreeSet<MsgId> = trace
        .of_kind(TraceEvent::OrigPlain)
        .filter_map(|r| r.msg)
        .collect();

    let mut violations = Vec::new();
    for r in trace.iter() {
        let Some(msg) = r.msg else { continue };
        if plain.contains(&msg) {
            continue;
        }
        let mut flag = |node: NodeId, reason: ViolationReason| {
            violations.push(Violation {
                time: r.time,
                node,
                msg: Some(msg),
                reason,
            })
        };
        match r.event {
            TraceEvent::Deliver | TraceEvent::Recv => match scenario.group_of(r.node) {
                None => flag(r.node, ViolationReason::UnknownNode),
                Some(group) => {
                    if !scenario.permitted_for(msg.originator).contains(&group) {
                        flag(r.node, ViolationReason::ForbiddenGroup { group });
                    }
                }
            },
            TraceEvent::Send if r.peer == Some(msg.originator) => {
                flag(r.node, ViolationReason::SentToOriginator);
            }
            _ => {}
        }
    }
    AuditResult { violations }
}

/// Nodes holding a DELIVER record, per message. Every originated message
/// appears, possibly with an empty set.
pub fn delivered_sets(trace: &Trace) -> BTreeMap<MsgId, BTreeSet<NodeId>> {
    let mut sets: BTreeMap<MsgId, BTreeSet<NodeId>> = BTreeMap::new();
    for r in trace.iter() {
        let Some(msg) = r.msg else { continue };
        if r.event.is_origination() {
            sets.entry(msg).or_default();
        } else if r.event == TraceEvent::Deliver {
            sets.entry(msg).or_default().insert(r.node);
        }
    }
    sets
}

/// Breadth-first search from `originator` over the links a faithful
/// enforcer may use: `i -> j` iff j lies within i's range, j's group is
/// permitted, and j is not the originator.
///
/// Works from raw coordinates and never touches the agents or the engine.
pub fn oracle_delivery_set(
    scenario: &Scenario,
    originator: NodeId,
    permitted: &BTreeSet<GroupId>,
) -> BTreeSet<NodeId> {
    let nodes = &scenario.nodes;
    let Some(start) = nodes.iter().position(|n| n.id == originator) else {
        return BTreeSet::new();
    };
    let mut visited = vec![false; nodes.len()];
    visited[start] = true;
    let mut frontier = VecDeque::from([start]);
    let mut reached = BTreeSet::new();

    while let Some(i) = frontier.pop_front() {
        let from = &nodes[i];
        for (j, to) in nodes.iter().enumerate() {
            if visited[j] || !permitted.contains(&to.group) {
                continue;
            }
            let dx = from.position.x - to.position.x;
            let dy = from.position.y - to.position.y;
            if dx.hypot(dy) <= from.range {
                visited[j] = true;
                reached.insert(to.id);
                frontier.push_back(j);
            }
        }
    }
    reached
}
