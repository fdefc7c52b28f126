//! Built-in scenarios and the random scenario generator used by `fuzz`.

use std::collections::BTreeSet;

use rand::Rng;

use crate::agent::Position;
use crate::packet::NodeId;
use crate::policy::GroupId;
use crate::sim::{CbrFlow, NodeSpec, Origination, Scenario};

fn node(id: u32, group: u16, x: f64, y: f64, range: f64) -> NodeSpec {
    NodeSpec {
        id: NodeId(id),
        group: GroupId(group),
        position: Position::new(x, y),
        range,
    }
}

fn groups(ids: &[u16]) -> BTreeSet<GroupId> {
    ids.iter().map(|&g| GroupId(g)).collect()
}

/// Six nodes in three groups; node 0 floods a message permitted to G1.
///
/// Links (range 250 m): 0-1, 0-2, 1-2, 2-3, 2-4, 3-4, 4-5.
/// G1 = {0, 2, 4, 5}, G2 = {1}, G3 = {3}. Expected delivery: {2, 4, 5}.
pub fn fig5() -> Scenario {
    Scenario {
        header: vec![
            "six-node group-restricted flood".into(),
            "G1 = {0,2,4,5}  G2 = {1}  G3 = {3}; every radio reaches 250 m".into(),
            "links: 0-1 0-2 1-2 2-3 2-4 3-4 4-5".into(),
            "node 0 permits G1 only: expect delivery at {2,4,5}, never at 1 or 3".into(),
        ],
        nodes: vec![
            node(0, 1, 0.0, 0.0, 250.0),
            node(1, 2, 150.0, 150.0, 250.0),
            node(2, 1, 200.0, 0.0, 250.0),
            node(3, 3, 380.0, -150.0, 250.0),
            node(4, 1, 400.0, 0.0, 250.0),
            node(5, 1, 600.0, 0.0, 250.0),
        ],
        policies: [(NodeId(0), groups(&[1]))].into(),
        originations: vec![Origination {
            node: NodeId(0),
            time: 0.0,
            payload_bytes: 44,
        }],
        ..Scenario::default()
    }
}

/// A (G1) tells B (G2) something C (G3) must not learn; B can reach C.
pub fn scenario3node() -> Scenario {
    Scenario {
        header: vec![
            "three-node chain A - B - C, range 250 m".into(),
            "A = node 0 (G1), B = node 1 (G2), C = node 2 (G3)".into(),
            "A permits G1 and G2: B receives, C never does".into(),
        ],
        nodes: vec![
            node(0, 1, 0.0, 0.0, 250.0),
            node(1, 2, 200.0, 0.0, 250.0),
            node(2, 3, 400.0, 0.0, 250.0),
        ],
        policies: [(NodeId(0), groups(&[1, 2]))].into(),
        originations: vec![Origination {
            node: NodeId(0),
            time: 0.0,
            payload_bytes: 44,
        }],
        ..Scenario::default()
    }
}

pub const SWEEP_FLOW_COUNTS: [usize; 4] = [1, 2, 3, 4];

/// Shared topology of the delay sweep: relay 0 in the middle, sources 1-4
/// on its west side, sinks 5-8 on its east side, everyone in G1.
fn sweep_topology() -> Vec<NodeSpec> {
    let radius = 200.0;
    let mut nodes = vec![node(0, 1, 0.0, 0.0, 250.0)];
    let west = [135.0f64, 165.0, 195.0, 225.0];
    let east = [45.0f64, 15.0, -15.0, -45.0];
    for (i, deg) in west.iter().chain(east.iter()).enumerate() {
        let (sin, cos) = deg.to_radians().sin_cos();
        let x = (radius * cos * 10.0).round() / 10.0;
        let y = (radius * sin * 10.0).round() / 10.0;
        nodes.push(node(i as u32 + 1, 1, x, y, 250.0));
    }
    nodes
}

/// One sweep point: `flows` concurrent CBR flows, source `i` to sink `i + 4`.
pub fn delay_sweep_point(flows: usize, policied: bool) -> Scenario {
    assert!((1..=4).contains(&flows));
    let variant = if policied { "policied" } else { "plain" };
    Scenario {
        header: vec![
            format!("delay sweep: {flows} concurrent cbr flow(s), {variant} frames"),
            "relay 0 at the origin; sources 1-4 west, sinks 5-8 east, radius 200 m".into(),
            "every node in G1; sources permit G1".into(),
        ],
        nodes: sweep_topology(),
        policies: (1..=4).map(|s| (NodeId(s), groups(&[1]))).collect(),
        flows: (1..=flows as u32)
            .map(|s| CbrFlow {
                src: NodeId(s),
                dst: NodeId(s + 4),
                packet_size: 512,
                interval: 0.1,
                start: 0.0,
                stop: 1.0,
                policied,
            })
            .collect(),
        ..Scenario::default()
    }
}

/// All eight sweep points as `(file stem, scenario)`.
pub fn delay_sweep() -> Vec<(String, Scenario)> {
    let mut out = Vec::new();
    for flows in SWEEP_FLOW_COUNTS {
        for policied in [true, false] {
            let variant = if policied { "policied" } else { "plain" };
            out.push((
                format!("sweep_{flows}flows_{variant}"),
                delay_sweep_point(flows, policied),
            ));
        }
    }
    out
}

// one decimal place keeps the rendered file short and exact
fn coord<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo..hi) * 10.0).round() / 10.0
}

/// A random static scenario: up to `max_nodes` nodes in up to five groups
/// on a 1 km square, with one to three policied originations.
pub fn random_scenario<R: Rng>(rng: &mut R, max_nodes: usize) -> Scenario {
    let max_nodes = max_nodes.max(1);
    let n = rng.gen_range(1..=max_nodes);
    let group_count: u16 = rng.gen_range(1..=5);
    let nodes = (0..n as u32)
        .map(|id| NodeSpec {
            id: NodeId(id),
            position: Position::new(coord(rng, 0.0, 1000.0), coord(rng, 0.0, 1000.0)),
            range: coord(rng, 50.0, 400.0),
            group: GroupId(rng.gen_range(1..=group_count)),
        })
        .collect();

    let mut scenario = Scenario {
        nodes,
        ..Scenario::default()
    };
    let originations = rng.gen_range(1..=3usize.min(n));
    for _ in 0..originations {
        let origin = NodeId(rng.gen_range(0..n as u32));
        scenario.policies.entry(origin).or_insert_with(|| {
            (1..=group_count)
                .filter(|_| rng.gen_bool(0.5))
                .map(GroupId)
                .collect()
        });
        scenario.originations.push(Origination {
            node: origin,
            time: (rng.gen_range(0.0..1.0f64) * 1000.0).round() / 1000.0,
            payload_bytes: rng.gen_range(16..=256),
        });
    }
    scenario
}
