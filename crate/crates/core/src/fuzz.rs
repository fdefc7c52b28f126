//! Randomized oracle-equivalence checking.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audit::{audit_confidentiality, delivered_sets, oracle_delivery_set};
use crate::gen::random_scenario;
use crate::sim::{run, Scenario};
use crate::trace::TraceEvent;

/// Runs `scenario` and checks the delivery set of every policied message
/// against the reachability oracle, then audits the trace.
pub fn check_scenario(scenario: &Scenario) -> Result<(), String> {
    let trace = run(scenario, 0).map_err(|e| e.to_string())?;
    let plain: Vec<_> = trace
        .of_kind(TraceEvent::OrigPlain)
        .filter_map(|r| r.msg)
        .collect();
    for (msg, delivered) in delivered_sets(&trace) {
        if plain.contains(&msg) {
            continue;
        }
        let permitted = scenario.permitted_for(msg.originator);
        let expected = oracle_delivery_set(scenario, msg.originator, &permitted);
        if delivered != expected {
            return Err(format!(
                "message {msg}: delivered to {delivered:?}, oracle expects {expected:?}"
            ));
        }
    }
    let audit = audit_confidentiality(&trace, scenario);
    if let Some(v) = audit.violations.first() {
        return Err(format!(
            "audit found {} violation(s), first: {v}",
            audit.violations.len()
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FuzzFailure {
    pub index: usize,
    /// `fuzz 1 <max_nodes> <seed>` regenerates exactly this scenario.
    pub seed: u64,
    pub scenario: Scenario,
    pub reason: String,
}

/// Scenario `i` is drawn from its own generator seeded with `seed + i`.
pub fn scenario_for(seed: u64, index: usize, max_nodes: usize) -> (u64, Scenario) {
    let sub_seed = seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
    (sub_seed, random_scenario(&mut rng, max_nodes))
}

/// Checks `count` random scenarios, stopping at the first failure.
pub fn fuzz(count: usize, max_nodes: usize, seed: u64) -> Result<usize, Box<FuzzFailure>> {
    for index in 0..count {
        let (sub_seed, scenario) = scenario_for(seed, index, max_nodes);
        if let Err(reason) = check_scenario(&scenario) {
            return Err(Box::new(FuzzFailure {
                index,
                seed: sub_seed,
                scenario,
                reason,
            }));
        }
    }
    Ok(count)
}
