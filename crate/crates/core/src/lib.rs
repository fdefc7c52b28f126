//! Deterministic simulator for mobile ad hoc networks whose nodes enforce
//! originator-attached ("sticky") group policies on every hop.
//!
//! * [`policy`]: the policy model, its merge rule and wire block.
//! * [`packet`]: frame layout and identifiers.
//! * [`agent`]: per-node enforcement points, decision point and store.
//! * [`sim`]: scenarios, the radio model and the event loop.
//! * [`trace`], [`metrics`], [`audit`]: what a run leaves behind and how it is checked.
//! * [`gen`], [`fuzz`]: built-in and random scenarios, oracle-equivalence checks.

pub mod agent;
pub mod audit;
pub mod fuzz;
pub mod gen;
pub mod metrics;
pub mod packet;
pub mod policy;
pub mod sim;
pub mod trace;

pub use agent::{pdp_decide, DeliveryOutcome, NodeState, Position};
pub use audit::{
    audit_confidentiality, delivered_sets, oracle_delivery_set, AuditResult, Violation,
};
pub use metrics::{delay_report, DelayReport, DelayStats};
pub use packet::{FrameKind, MsgId, NodeId, Packet};
pub use policy::{Decision, GroupId, Policy, PolicyError};
pub use sim::{run, Scenario, ScenarioError};
pub use trace::{Trace, TraceEvent, TraceRecord};
