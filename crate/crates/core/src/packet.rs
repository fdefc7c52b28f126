//! Frame layout shared by every node.
//!
//! ```text
//! 0..4    message sequence (u32)
//! 4..8    originator (u32)
//! 8..12   sender, the previous hop (u32)
//! 12..20  created_at in microseconds (u64)
//! 20..    policy block (policied frames only), then payload to end of frame
//! ```
//!
//! All integers are big-endian. Whether a frame carries a policy block is
//! link metadata ([`FrameKind`]), the way two different agents would listen
//! on two different ports.

use std::fmt;
use std::str::FromStr;

use crate::policy::{Policy, PolicyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifies one logical message across all of its hops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MsgId {
    pub originator: NodeId,
    pub seq: u32,
}

impl fmt::Display for MsgId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.originator, self.seq)
    }
}

impl FromStr for MsgId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (orig, seq) = s
            .split_once(':')
            .ok_or_else(|| format!("message id `{s}` is not orig:seq"))?;
        let parse = |v: &str| {
            v.parse::<u32>()
                .map_err(|e| format!("message id `{s}`: {e}"))
        };
        Ok(MsgId {
            originator: NodeId(parse(orig)?),
            seq: parse(seq)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrameKind {
    /// Carries a policy block and is subject to policy enforcement.
    Policied,
    /// Baseline traffic: no policy block, no group filtering.
    Plain,
}

pub const FRAME_HEADER_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub msg_id: MsgId,
    pub sender: NodeId,
    pub created_at_us: u64,
    /// `None` for plain frames.
    pub policy: Option<Policy>,
    pub payload: Vec<u8>,
}

impl Packet {
    pub fn originator(&self) -> NodeId {
        self.msg_id.originator
    }

    pub fn created_at(&self) -> f64 {
        self.created_at_us as f64 * 1e-6
    }

    pub fn kind(&self) -> FrameKind {
        if self.policy.is_some() {
            FrameKind::Policied
        } else {
            FrameKind::Plain
        }
    }

    pub fn encoded_len(&self) -> usize {
        FRAME_HEADER_LEN + self.policy.as_ref().map_or(0, Policy::encoded_len) + self.payload.len()
    }

    pub fn encode(&self) -> Result<Vec<u8>, PolicyError> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.msg_id.seq.to_be_bytes());
        out.extend_from_slice(&self.msg_id.originator.0.to_be_bytes());
        out.extend_from_slice(&self.sender.0.to_be_bytes());
        out.extend_from_slice(&self.created_at_us.to_be_bytes());
        if let Some(policy) = &self.policy {
            out.extend_from_slice(&policy.encode()?);
        }
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    /// Reads just the message id, for tracing frames that fail to decode.
    pub fn peek_msg_id(frame: &[u8]) -> Option<MsgId> {
        if frame.len() < 8 {
            return None;
        }
        Some(MsgId {
            seq: u32::from_be_bytes(frame[0..4].try_into().ok()?),
            originator: NodeId(u32::from_be_bytes(frame[4..8].try_into().ok()?)),
        })
    }

    pub fn decode(frame: &[u8], kind: FrameKind) -> Result<Packet, PolicyError> {
        if frame.len() < FRAME_HEADER_LEN {
            return Err(PolicyError::Malformed(format!(
                "frame of {} bytes is shorter than its header",
                frame.len()
            )));
        }
        let u32_at = |at: usize| u32::from_be_bytes(frame[at..at + 4].try_into().unwrap());
        let msg_id = MsgId {
            seq: u32_at(0),
            originator: NodeId(u32_at(4)),
        };
        let sender = NodeId(u32_at(8));
        let created_at_us = u64::from_be_bytes(frame[12..20].try_into().unwrap());
        let rest = &frame[FRAME_HEADER_LEN..];

        let (policy, payload) = match kind {
            FrameKind::Plain => (None, rest),
            FrameKind::Policied => {
                if rest.len() < 2 {
                    return Err(PolicyError::Malformed(
                        "frame ends before the policy length prefix".into(),
                    ));
                }
                let block_len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
                if block_len > rest.len() {
                    return Err(PolicyError::Malformed(format!(
                        "policy block of {block_len} bytes overruns the {}-byte frame body",
                        rest.len()
                    )));
                }
                let policy = Policy::decode(&rest[..block_len])?;
                if policy.originator != msg_id.originator {
                    return Err(PolicyError::Malformed(format!(
                        "policy authored by {} attached to a message from {}",
                        policy.originator, msg_id.originator
                    )));
                }
                (Some(policy), &rest[block_len..])
            }
        };

        Ok(Packet {
            msg_id,
            sender,
            created_at_us,
            policy,
            payload: payload.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::GroupId;

    fn sample(policy: Option<Policy>) -> Packet {
        Packet {
            msg_id: MsgId {
                originator: NodeId(0),
                seq: 7,
            },
            sender: NodeId(2),
            created_at_us: 1_500_000,
            policy,
            payload: vec![0xde, 0xad, 0xbe, 0xef],
        }
    }

    #[test]
    fn header_layout() {
        let pkt = sample(Some(Policy::new(NodeId(0), [GroupId(1)])));
        let bytes = pkt.encode().unwrap();
        assert_eq!(bytes.len(), 20 + 12 + 4);
        assert_eq!(&bytes[0..4], &[0, 0, 0, 7]);
        assert_eq!(&bytes[4..8], &[0, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[0, 0, 0, 2]);
        assert_eq!(&bytes[12..20], &1_500_000u64.to_be_bytes());
        assert_eq!(&bytes[20..22], &[0, 12]);
        assert_eq!(&bytes[32..], &[0xde, 0xad, 0xbe, 0xef]);
        assert_eq!(Packet::decode(&bytes, FrameKind::Policied).unwrap(), pkt);
        assert_eq!(Packet::peek_msg_id(&bytes), Some(pkt.msg_id));
    }

    #[test]
    fn plain_frame_has_no_policy_bytes() {
        let pkt = sample(None);
        let bytes = pkt.encode().unwrap();
        assert_eq!(bytes.len(), 24);
        assert_eq!(Packet::decode(&bytes, FrameKind::Plain).unwrap(), pkt);
    }

    #[test]
    fn truncated_policy_is_malformed() {
        let bytes = sample(Some(Policy::new(NodeId(0), [GroupId(1)])))
            .encode()
            .unwrap();
        // cut inside the policy block: 20 header + 5 policy bytes
        assert!(Packet::decode(&bytes[..25], FrameKind::Policied).is_err());
        assert!(Packet::decode(&bytes[..21], FrameKind::Policied).is_err());
        assert!(Packet::decode(&bytes[..10], FrameKind::Policied).is_err());
    }

    #[test]
    fn foreign_policy_is_malformed() {
        let bytes = sample(Some(Policy::new(NodeId(5), [GroupId(1)])))
            .encode()
            .unwrap();
        assert!(Packet::decode(&bytes, FrameKind::Policied).is_err());
    }

    #[test]
    fn msg_id_text() {
        let id: MsgId = "3:12".parse().unwrap();
        assert_eq!(id.to_string(), "3:12");
        assert!("3".parse::<MsgId>().is_err());
        assert!("a:1".parse::<MsgId>().is_err());
    }
}
