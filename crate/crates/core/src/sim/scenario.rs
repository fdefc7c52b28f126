//! Scenario files: one directive per line, `#` starts a comment.
//!
//! ```text
//! node <id> <group> <x> <y> <range>
//! radio <bandwidth_bps> <prop_mps> <proc_s>
//! policy <node_id> permit <g1>[,g2,...]
//! originate <node_id> <time_s> <payload_bytes>
//! cbr <src> <dst> <pkt_bytes> <interval_s> <start_s> <stop_s> <policied|plain>
//! forward_delay <seconds>
//! end <time_s>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::agent::Position;
use crate::packet::NodeId;
use crate::policy::GroupId;
use crate::sim::radio::RadioModel;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub const DEFAULT_FORWARD_DELAY: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: NodeId,
    pub group: GroupId,
    pub position: Position,
    pub range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Origination {
    pub node: NodeId,
    pub time: f64,
    pub payload_bytes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CbrFlow {
    pub src: NodeId,
    pub dst: NodeId,
    pub packet_size: usize,
    pub interval: f64,
    pub start: f64,
    pub stop: f64,
    pub policied: bool,
}

impl CbrFlow {
    /// Tick times `start, start + interval, ...` up to and including `stop`.
    pub fn tick_times(&self) -> Vec<f64> {
        let slack = self.interval * 1e-9;
        (0u64..)
            .map(|k| self.start + k as f64 * self.interval)
            .take_while(|t| *t <= self.stop + slack)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<NodeSpec>,
    pub radio: RadioModel,
    pub policies: BTreeMap<NodeId, BTreeSet<GroupId>>,
    pub originations: Vec<Origination>,
    pub flows: Vec<CbrFlow>,
    pub forward_delay: f64,
    pub end_time: Option<f64>,
    /// Leading comment lines, kept so generated files stay self-describing.
    pub header: Vec<String>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            nodes: Vec::new(),
            radio: RadioModel::default(),
            policies: BTreeMap::new(),
            originations: Vec::new(),
            flows: Vec::new(),
            forward_delay: DEFAULT_FORWARD_DELAY,
            end_time: None,
            header: Vec::new(),
        }
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    let tok = tok.ok_or_else(|| format!("missing {what}"))?;
    tok.parse::<T>()
        .map_err(|e| format!("bad {what} `{tok}`: {e}"))
}

fn parse_groups(list: Option<&str>) -> Result<BTreeSet<GroupId>, String> {
    let mut out = BTreeSet::new();
    let Some(list) = list else {
        return Ok(out);
    };
    for tok in list.split(',').filter(|t| !t.is_empty()) {
        let g = tok
            .trim_start_matches(['G', 'g'])
            .parse::<u16>()
            .map_err(|e| format!("bad group `{tok}`: {e}"))?;
        out.insert(GroupId(g));
    }
    Ok(out)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut sc = Scenario::default();
        let mut seen_radio = false;
        let mut in_header = true;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |reason: String| ScenarioError::Parse {
                line: line_no,
                reason,
            };
            let trimmed = raw.trim();
            if in_header {
                if let Some(comment) = trimmed.strip_prefix('#') {
                    sc.header.push(comment.trim().to_string());
                    continue;
                }
                if !trimmed.is_empty() {
                    in_header = false;
                }
            }
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut toks = content.split_whitespace();
            let directive = toks.next().unwrap();
            match directive {
                "node" => {
                    let spec = (|| -> Result<NodeSpec, String> {
                        Ok(NodeSpec {
                            id: NodeId(field(toks.next(), "node id")?),
                            group: GroupId(field(toks.next(), "group")?),
                            position: Position::new(
                                field(toks.next(), "x")?,
                                field(toks.next(), "y")?,
                            ),
                            range: field(toks.next(), "range")?,
                        })
                    })()
                    .map_err(err)?;
                    sc.nodes.push(spec);
                }
                "radio" => {
                    if seen_radio {
                        return Err(err("radio given twice".into()));
                    }
                    seen_radio = true;
                    sc.radio = (|| -> Result<RadioModel, String> {
                        Ok(RadioModel {
                            bandwidth_bps: field(toks.next(), "bandwidth")?,
                            propagation_mps: field(toks.next(), "propagation speed")?,
                            per_hop_processing: field(toks.next(), "processing delay")?,
                        })
                    })()
                    .map_err(err)?;
                }
                "policy" => {
                    let node = NodeId(field(toks.next(), "node id").map_err(err)?);
                    match toks.next() {
                        Some("permit") => {}
                        other => {
                            return Err(err(format!(
                                "expected `permit`, found `{}`",
                                other.unwrap_or("")
                            )))
                        }
                    }
                    let groups = parse_groups(toks.next()).map_err(err)?;
                    if sc.policies.insert(node, groups).is_some() {
                        return Err(err(format!("second policy for node {node}")));
                    }
                }
                "originate" => {
                    let o = (|| -> Result<Origination, String> {
                        Ok(Origination {
                            node: NodeId(field(toks.next(), "node id")?),
                            time: field(toks.next(), "time")?,
                            payload_bytes: field(toks.next(), "payload size")?,
                        })
                    })()
                    .map_err(err)?;
                    sc.originations.push(o);
                }
                "cbr" => {
                    let flow = (|| -> Result<CbrFlow, String> {
                        Ok(CbrFlow {
                            src: NodeId(field(toks.next(), "src")?),
                            dst: NodeId(field(toks.next(), "dst")?),
                            packet_size: field(toks.next(), "packet size")?,
                            interval: field(toks.next(), "interval")?,
                            start: field(toks.next(), "start")?,
                            stop: field(toks.next(), "stop")?,
                            policied: match toks.next() {
                                Some("policied") => true,
                                Some("plain") => false,
                                other => {
                                    return Err(format!(
                                        "expected policied|plain, found `{}`",
                                        other.unwrap_or("")
                                    ))
                                }
                            },
                        })
                    })()
                    .map_err(err)?;
                    sc.flows.push(flow);
                }
                "forward_delay" => {
                    sc.forward_delay = field(toks.next(), "forward delay").map_err(err)?;
                }
                "end" => {
                    sc.end_time = Some(field(toks.next(), "end time").map_err(err)?);
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
            if let Some(extra) = toks.next() {
                return Err(err(format!("unexpected `{extra}`")));
            }
        }
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::parse(&text)
    }

    /// Renders the scenario back to its text form; `parse(render(s)) == s`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.header {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                let _ = writeln!(out, "# {line}");
            }
        }
        if !self.header.is_empty() {
            out.push('\n');
        }
        let r = &self.radio;
        let _ = writeln!(
            out,
            "radio {} {} {}",
            r.bandwidth_bps, r.propagation_mps, r.per_hop_processing
        );
        if self.forward_delay != DEFAULT_FORWARD_DELAY {
            let _ = writeln!(out, "forward_delay {}", self.forward_delay);
        }
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "node {} {} {} {} {}",
                n.id, n.group, n.position.x, n.position.y, n.range
            );
        }
        for (node, groups) in &self.policies {
            let list: Vec<String> = groups.iter().map(|g| g.to_string()).collect();
            if list.is_empty() {
                let _ = writeln!(out, "policy {node} permit");
            } else {
                let _ = writeln!(out, "policy {node} permit {}", list.join(","));
            }
        }
        for o in &self.originations {
            let _ = writeln!(out, "originate {} {} {}", o.node, o.time, o.payload_bytes);
        }
        for f in &self.flows {
            let _ = writeln!(
                out,
                "cbr {} {} {} {} {} {} {}",
                f.src,
                f.dst,
                f.packet_size,
                f.interval,
                f.start,
                f.stop,
                if f.policied { "policied" } else { "plain" }
            );
        }
        if let Some(end) = self.end_time {
            let _ = writeln!(out, "end {end}");
        }
        out
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn group_of(&self, id: NodeId) -> Option<GroupId> {
        self.node(id).map(|n| n.group)
    }

    /// The permitted set a node attaches to messages it originates.
    /// Nodes without a `policy` line permit nobody.
    pub fn permitted_for(&self, id: NodeId) -> BTreeSet<GroupId> {
        self.policies.get(&id).cloned().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |msg: String| Err(ScenarioError::Invalid(msg));
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return invalid(format!("node {} declared twice", n.id));
            }
            if !(n.range.is_finite() && n.range > 0.0) {
                return invalid(format!("node {} has non-positive range {}", n.id, n.range));
            }
            if !(n.position.x.is_finite() && n.position.y.is_finite()) {
                return invalid(format!("node {} has a non-finite position", n.id));
            }
        }
        self.radio.validate().map_err(ScenarioError::Invalid)?;
        if !(self.forward_delay.is_finite() && self.forward_delay >= 0.0) {
            return invalid(format!("forward delay {} is negative", self.forward_delay));
        }
        if let Some(end) = self.end_time {
            if !(end.is_finite() && end >= 0.0) {
                return invalid(format!("end time {end} is negative"));
            }
        }
        let known = |id: NodeId, what: &str| {
            if ids.contains(&id) {
                Ok(())
            } else {
                Err(ScenarioError::Invalid(format!(
                    "{what} refers to unknown node {id}"
                )))
            }
        };
        for node in self.policies.keys() {
            known(*node, "policy")?;
        }
        for o in &self.originations {
            known(o.node, "originate")?;
            if !(o.time.is_finite() && o.time >= 0.0) {
                return invalid(format!(
                    "origination at node {} has bad time {}",
                    o.node, o.time
                ));
            }
        }
        for f in &self.flows {
            known(f.src, "cbr source")?;
            known(f.dst, "cbr destination")?;
            if f.src == f.dst {
                return invalid(format!("cbr flow from {} to itself", f.src));
            }
            if !(f.interval.is_finite() && f.interval > 0.0) {
                return invalid(format!("cbr interval {} must be positive", f.interval));
            }
            if !(f.start.is_finite() && f.stop.is_finite() && f.start >= 0.0 && f.start <= f.stop) {
                return invalid(format!(
                    "cbr window [{}, {}] is not ordered",
                    f.start, f.stop
                ));
            }
        }
        Ok(())
    }
}
