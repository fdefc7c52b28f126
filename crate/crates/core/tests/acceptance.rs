//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::collection::btree_set;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use sticky_manet::audit::{audit_confidentiality, delivered_sets, oracle_delivery_set};
use sticky_manet::fuzz::scenario_for;
use sticky_manet::gen;
use sticky_manet::metrics::delay_report;
use sticky_manet::packet::{MsgId, NodeId};
use sticky_manet::policy::{GroupId, Policy};
use sticky_manet::sim::{neighbors_of, run, Simulator};
use sticky_manet::trace::{Trace, TraceEvent};

const BIN: &str = env!("CARGO_BIN_EXE_sticky-manet");

const FIG5_DEADLINE: Duration = Duration::from_secs(1);
const ORACLE_SCENARIOS: usize = 200;
const ORACLE_MAX_NODES: usize = 50;
const ORACLE_DEADLINE: Duration = Duration::from_secs(60);
const HOP_TOLERANCE_S: f64 = 1e-9;
const POLICY_CASES: u32 = 10_000;

type Verdict = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(BIN)
        .args(args)
        .env_remove("STICKY_MANET_TRACE_DIR")
        .output()
        .map_err(|e| format!("cannot start {BIN}: {e}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn ids(v: &[u32]) -> BTreeSet<NodeId> {
    v.iter().copied().map(NodeId).collect()
}

fn criterion_fig5(dir: &Path) -> Verdict {
    let scn = dir.join("fig5.scn");
    let tr = dir.join("fig5.tr");
    let gen_out = cli(&["gen", "fig5", path_str(&scn)])?;
    ensure(gen_out.status.success(), || "gen fig5 failed".into())?;

    let started = Instant::now();
    let out = cli(&["run", path_str(&scn), "--trace-out", path_str(&tr)])?;
    let elapsed = started.elapsed();
    ensure(out.status.code() == Some(0), || {
        format!("run exited {:?}", out.status.code())
    })?;
    ensure(elapsed < FIG5_DEADLINE, || format!("run took {elapsed:?}"))?;

    let trace = Trace::load(&tr).map_err(|e| e.to_string())?;
    let delivered: BTreeSet<NodeId> = trace.of_kind(TraceEvent::Deliver).map(|r| r.node).collect();
    ensure(delivered == ids(&[2, 4, 5]), || {
        format!("delivered to {delivered:?}")
    })?;
    let leaked = trace
        .iter()
        .filter(|r| matches!(r.event, TraceEvent::Recv | TraceEvent::Deliver))
        .any(|r| r.node == NodeId(1) || r.node == NodeId(3));
    ensure(!leaked, || "node 1 or 3 received the payload".into())?;
    let scenario = gen::fig5();
    ensure(audit_confidentiality(&trace, &scenario).is_pass(), || {
        "audit failed".into()
    })?;
    Ok(format!(
        "delivered {{2,4,5}}, audit PASS, run {elapsed:.1?}"
    ))
}

fn criterion_three_node() -> Verdict {
    let sc = gen::scenario3node();
    let trace = run(&sc, 0).map_err(|e| e.to_string())?;
    let golden = include_str!("golden/scenario3node.tr");
    ensure(trace.to_text() == golden, || {
        format!("trace differs from golden:\n{}", trace.to_text())
    })?;

    let (a, b, c) = (NodeId(0), NodeId(1), NodeId(2));
    ensure(
        trace.of_kind(TraceEvent::Deliver).any(|r| r.node == b),
        || "B never delivered".into(),
    )?;
    let c_records = trace
        .iter()
        .filter(|r| r.node == c && matches!(r.event, TraceEvent::Recv | TraceEvent::Deliver))
        .count();
    ensure(c_records == 0, || {
        format!("C has {c_records} RECV/DELIVER records")
    })?;

    let mut sim = Simulator::new(&sc).map_err(|e| e.to_string())?;
    sim.run_to_end();
    let node_b = sim.node(b).ok_or("B missing")?;
    let msg = MsgId {
        originator: a,
        seq: 0,
    };
    let copy = node_b.forward(msg).map_err(|e| e.to_string())?;
    let neighbours = neighbors_of(b, &sc.nodes);
    ensure(
        neighbours.iter().any(|(n, _)| *n == a) && neighbours.iter().any(|(n, _)| *n == c),
        || "B should hear both A and C".into(),
    )?;
    let send_list = node_b.pep_out(&copy, &neighbours);
    ensure(send_list.is_empty(), || {
        format!("B's forward list is {send_list:?}")
    })?;
    ensure(trace.of_kind(TraceEvent::Send).all(|r| r.node != b), || {
        "B transmitted".into()
    })?;
    Ok("B delivers, C silent, B forward list excludes A and C, trace matches golden".into())
}

fn criterion_oracle() -> Verdict {
    let started = Instant::now();
    let mut messages = 0usize;
    let mut largest = 0usize;
    for i in 0..ORACLE_SCENARIOS {
        let (seed, sc) = scenario_for(0xACCE_9700, i, ORACLE_MAX_NODES);
        largest = largest.max(sc.nodes.len());
        let groups: BTreeSet<GroupId> = sc.nodes.iter().map(|n| n.group).collect();
        ensure(groups.len() <= 5, || {
            format!("scenario {seed} uses {} groups", groups.len())
        })?;
        let trace = run(&sc, seed).map_err(|e| e.to_string())?;
        for (msg, delivered) in delivered_sets(&trace) {
            let permitted = sc.permitted_for(msg.originator);
            let expected = oracle_delivery_set(&sc, msg.originator, &permitted);
            ensure(delivered == expected, || {
                format!(
                    "seed {seed} message {msg}: simulated {delivered:?} vs oracle {expected:?}\n{}",
                    sc.render()
                )
            })?;
            messages += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < ORACLE_DEADLINE, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{ORACLE_SCENARIOS} scenarios (largest {largest} nodes), {messages} messages, 0 mismatches, {elapsed:.2?}"
    ))
}

fn criterion_delay_sweep() -> Verdict {
    let radio = gen::delay_sweep_point(1, true).radio;
    let block_len = Policy::new(NodeId(1), [GroupId(1)])
        .encode()
        .map_err(|e| e.to_string())?
        .len();
    let per_hop = 8.0 * block_len as f64 / radio.bandwidth_bps;

    let mut means: BTreeMap<(bool, usize), f64> = BTreeMap::new();
    let mut hops_checked = 0usize;
    for flows in gen::SWEEP_FLOW_COUNTS {
        let mut hop_times: BTreeMap<bool, BTreeMap<(NodeId, NodeId, MsgId), f64>> = BTreeMap::new();
        for policied in [true, false] {
            let sc = gen::delay_sweep_point(flows, policied);
            let trace = run(&sc, 0).map_err(|e| e.to_string())?;
            let mean = delay_report(&trace)
                .aggregate
                .mean()
                .ok_or_else(|| format!("{flows} flows: nothing delivered"))?;
            means.insert((policied, flows), mean);

            let mut sent = BTreeMap::new();
            let hops = hop_times.entry(policied).or_default();
            for r in trace.iter() {
                let (Some(peer), Some(msg)) = (r.peer, r.msg) else {
                    continue;
                };
                match r.event {
                    TraceEvent::Send => {
                        sent.insert((r.node, peer, msg), r.time);
                    }
                    TraceEvent::Recv => {
                        let t0 = sent[&(peer, r.node, msg)];
                        hops.insert((peer, r.node, msg), r.time - t0);
                    }
                    _ => {}
                }
            }
        }
        let pol = &hop_times[&true];
        let plain = &hop_times[&false];
        ensure(
            pol.len() == plain.len() && pol.keys().eq(plain.keys()),
            || format!("{flows} flows: hop sets differ between variants"),
        )?;
        for (hop, t_pol) in pol {
            let diff = t_pol - plain[hop];
            ensure((diff - per_hop).abs() <= HOP_TOLERANCE_S, || {
                format!("{flows} flows hop {hop:?}: difference {diff:e}s, expected {per_hop:e}s")
            })?;
            hops_checked += 1;
        }
        ensure(means[&(true, flows)] >= means[&(false, flows)], || {
            format!(
                "{flows} flows: policied mean {} < plain mean {}",
                means[&(true, flows)],
                means[&(false, flows)]
            )
        })?;
    }
    for policied in [true, false] {
        for pair in gen::SWEEP_FLOW_COUNTS.windows(2) {
            let (lo, hi) = (means[&(policied, pair[0])], means[&(policied, pair[1])]);
            ensure(hi >= lo, || {
                format!(
                    "policied={policied}: mean fell from {lo} at {} flows to {hi} at {}",
                    pair[0], pair[1]
                )
            })?;
        }
    }
    let fmt = |policied| {
        gen::SWEEP_FLOW_COUNTS
            .iter()
            .map(|f| format!("{:.3}", means[&(policied, *f)] * 1e3))
            .collect::<Vec<_>>()
            .join("/")
    };
    Ok(format!(
        "mean ms policied {} plain {}; {hops_checked} hops differ by {:.0} us",
        fmt(true),
        fmt(false),
        per_hop * 1e6
    ))
}

fn criterion_policy_algebra() -> Verdict {
    let policy = || {
        (any::<u32>(), any::<u16>(), btree_set(0u16..12, 0..12)).prop_map(|(o, v, gs)| Policy {
            originator: NodeId(o),
            permitted: gs.into_iter().map(GroupId).collect(),
            version: v,
        })
    };
    let wide =
        (any::<u32>(), any::<u16>(), btree_set(any::<u16>(), 0..64)).prop_map(|(o, v, gs)| {
            Policy {
                originator: NodeId(o),
                permitted: gs.into_iter().map(GroupId).collect(),
                version: v,
            }
        });
    let mut runner = TestRunner::new(Config {
        cases: POLICY_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(policy(), policy(), policy(), wide), |(a, b, c, w)| {
            let ab = a.merge(&b);
            prop_assert!(ab.permitted.is_subset(&a.permitted));
            prop_assert!(ab.permitted.is_subset(&b.permitted));
            prop_assert_eq!(&ab.permitted, &b.merge(&a).permitted);
            prop_assert_eq!(ab.merge(&c).permitted, a.merge(&b.merge(&c)).permitted);
            prop_assert_eq!(&a.merge(&a).permitted, &a.permitted);
            let bytes = w.encode().map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(
                Policy::decode(&bytes).map_err(|e| TestCaseError::fail(e.to_string()))?,
                w
            );
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{POLICY_CASES} generated cases, 0 failures"))
}

fn criterion_determinism(dir: &Path) -> Verdict {
    let mut scenarios: Vec<(String, _)> = vec![
        ("fig5".into(), gen::fig5()),
        ("scenario3node".into(), gen::scenario3node()),
    ];
    scenarios.extend(gen::delay_sweep());
    for i in 0..10 {
        let (seed, sc) = scenario_for(6, i, ORACLE_MAX_NODES);
        scenarios.push((format!("random_{seed}"), sc));
    }
    for (name, sc) in &scenarios {
        let scn = dir.join(format!("{name}.scn"));
        std::fs::write(&scn, sc.render()).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let tr = dir.join(format!("{name}.{attempt}.tr"));
            let out = cli(&[
                "run",
                path_str(&scn),
                "--trace-out",
                path_str(&tr),
                "--seed",
                "11",
                "--quiet",
            ])?;
            ensure(out.status.success(), || format!("{name}: run failed"))?;
            outputs.push(std::fs::read(&tr).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || {
            format!("{name}: trace files differ")
        })?;
    }
    Ok(format!(
        "{} scenarios, trace files byte-identical across runs",
        scenarios.len()
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        (
            "AC1 six-node group-restricted flood",
            Box::new(|| criterion_fig5(dir.path())),
        ),
        ("AC2 three-node scenario", Box::new(criterion_three_node)),
        ("AC3 oracle equivalence", Box::new(criterion_oracle)),
        ("AC4 delay sweep ordering", Box::new(criterion_delay_sweep)),
        ("AC5 policy algebra", Box::new(criterion_policy_algebra)),
        (
            "AC6 determinism",
            Box::new(|| criterion_determinism(dir.path())),
        ),
    ];

    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
