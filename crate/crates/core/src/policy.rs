//! Originator-attached group policies.
//!
//! A [`Policy`] names the node that authored it and the set of group-ids
//! allowed to receive the message it travels with. Policies only ever get
//! narrower as they are merged along the dissemination path.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::packet::NodeId;

/// Coalition group label. `GroupId(1)` is what a scenario writes as `G1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId(pub u16);

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Allow,
    Deny,
}

impl Decision {
    pub fn is_allow(self) -> bool {
        self == Decision::Allow
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("policy lists {count} groups; at most {max} fit in one block")]
    CapacityExceeded { count: usize, max: usize },
    #[error("malformed policy block: {0}")]
    Malformed(String),
}

/// Fixed part of an encoded block: length, originator, version, group count.
pub const POLICY_HEADER_LEN: usize = 10;

/// Largest group count whose encoding still fits the u16 length prefix.
pub const MAX_GROUPS: usize = (u16::MAX as usize - POLICY_HEADER_LEN) / 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub originator: NodeId,
    pub permitted: BTreeSet<GroupId>,
    pub version: u16,
}

impl Policy {
    pub fn new(originator: NodeId, permitted: impl IntoIterator<Item = GroupId>) -> Self {
        Policy {
            originator,
            permitted: permitted.into_iter().collect(),
            version: 0,
        }
    }

    /// A policy that permits no group at all.
    pub fn deny_all(originator: NodeId) -> Self {
        Policy::new(originator, [])
    }

    /// Allow iff `dest_group` is one of the permitted groups.
    pub fn evaluate(&self, dest_group: GroupId) -> Decision {
        if self.permitted.contains(&dest_group) {
            Decision::Allow
        } else {
            Decision::Deny
        }
    }

    /// Combines the locally held policy with a freshly received one.
    ///
    /// The permitted set is the intersection, so a merge can never let a
    /// message reach a group that either input excluded.
    pub fn merge(&self, received: &Policy) -> Policy {
        Policy {
            originator: received.originator,
            permitted: self
                .permitted
                .intersection(&received.permitted)
                .copied()
                .collect(),
            version: self.version.max(received.version).saturating_add(1),
        }
    }

    /// Size of this policy's wire block in bytes.
    pub fn encoded_len(&self) -> usize {
        POLICY_HEADER_LEN + 2 * self.permitted.len()
    }

    /// Big-endian block: `len:u16 originator:u32 version:u16 count:u16 groups:u16*`.
    pub fn encode(&self) -> Result<Vec<u8>, PolicyError> {
        let count = self.permitted.len();
        if count > MAX_GROUPS {
            return Err(PolicyError::CapacityExceeded {
                count,
                max: MAX_GROUPS,
            });
        }
        let len = self.encoded_len();
        let mut out = Vec::with_capacity(len);
        out.extend_from_slice(&(len as u16).to_be_bytes());
        out.extend_from_slice(&self.originator.0.to_be_bytes());
        out.extend_from_slice(&self.version.to_be_bytes());
        out.extend_from_slice(&(count as u16).to_be_bytes());
        for group in &self.permitted {
            out.extend_from_slice(&group.0.to_be_bytes());
        }
        Ok(out)
    }

    /// Inverse of [`Policy::encode`]. The buffer must hold exactly one block.
    pub fn decode(bytes: &[u8]) -> Result<Policy, PolicyError> {
        let malformed = |msg: String| Err(PolicyError::Malformed(msg));
        if bytes.len() < 2 {
            return malformed(format!("{} bytes, no length prefix", bytes.len()));
        }
        let declared = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
        if declared != bytes.len() {
            return malformed(format!(
                "length prefix says {declared} bytes, buffer holds {}",
                bytes.len()
            ));
        }
        if declared < POLICY_HEADER_LEN {
            return malformed(format!(
                "block of {declared} bytes is shorter than its header"
            ));
        }
        let originator = NodeId(u32::from_be_bytes([bytes[2], bytes[3], bytes[4], bytes[5]]));
        let version = u16::from_be_bytes([bytes[6], bytes[7]]);
        let count = u16::from_be_bytes([bytes[8], bytes[9]]) as usize;
        let body = &bytes[POLICY_HEADER_LEN..];
        if body.len() < 2 * count {
            return malformed(format!(
                "group count {count} overruns the {} remaining bytes",
                body.len()
            ));
        }
        if body.len() > 2 * count {
            return malformed(format!(
                "{} trailing bytes after {count} groups",
                body.len() - 2 * count
            ));
        }
        let mut permitted = BTreeSet::new();
        for chunk in body.chunks_exact(2) {
            let group = GroupId(u16::from_be_bytes([chunk[0], chunk[1]]));
            if !permitted.insert(group) {
                return malformed(format!("group {group} listed twice"));
            }
        }
        Ok(Policy {
            originator,
            permitted,
            version,
        })
    }
}

pub fn evaluate_policy(policy: &Policy, dest_group: GroupId) -> Decision {
    policy.evaluate(dest_group)
}

pub fn merge_policy(local: &Policy, received: &Policy) -> Policy {
    local.merge(received)
}

pub fn encode_policy(policy: &Policy) -> Result<Vec<u8>, PolicyError> {
    policy.encode()
}

pub fn decode_policy(bytes: &[u8]) -> Result<Policy, PolicyError> {
    Policy::decode(bytes)
}
