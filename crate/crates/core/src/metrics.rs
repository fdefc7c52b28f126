//! End-to-end delay statistics.
//!
//! Every delivered copy is one sample: a message that reaches k nodes
//! contributes k delays, each `DELIVER.time - ORIG.time`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::packet::{MsgId, NodeId};
use crate::trace::{Trace, TraceEvent};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DelayStats {
    pub originated: usize,
    pub delivered: usize,
    samples: usize,
    sum: f64,
    min: Option<f64>,
    max: Option<f64>,
}

impl DelayStats {
    fn add_sample(&mut self, delay: f64) {
        self.samples += 1;
        self.sum += delay;
        self.min = Some(self.min.map_or(delay, |m| m.min(delay)));
        self.max = Some(self.max.map_or(delay, |m| m.max(delay)));
    }

    /// `None` when nothing was delivered.
    pub fn mean(&self) -> Option<f64> {
        (self.samples > 0).then(|| self.sum / self.samples as f64)
    }

    pub fn min(&self) -> Option<f64> {
        self.min
    }

    pub fn max(&self) -> Option<f64> {
        self.max
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DelayReport {
    /// Keyed by source node; each CBR flow in the generated sweeps has its own source.
    pub per_source: BTreeMap<NodeId, DelayStats>,
    pub aggregate: DelayStats,
}

pub fn delay_report(trace: &Trace) -> DelayReport {
    let mut report = DelayReport::default();
    let mut created: BTreeMap<MsgId, f64> = BTreeMap::new();

    for r in trace.iter() {
        match r.event {
            e if e.is_origination() => {
                let Some(msg) = r.msg else { continue };
                created.insert(msg, r.time);
                report.per_source.entry(r.node).or_default().originated += 1;
                report.aggregate.originated += 1;
            }
            TraceEvent::Deliver => {
                let Some(msg) = r.msg else { continue };
                let Some(&t0) = created.get(&msg) else {
                    continue;
                };
                let delay = r.time - t0;
                let source = report.per_source.entry(msg.originator).or_default();
                source.delivered += 1;
                source.add_sample(delay);
                report.aggregate.delivered += 1;
                report.aggregate.add_sample(delay);
            }
            _ => {}
        }
    }
    report
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.9}"))
}

fn opt_csv(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.9}"))
}

impl DelayReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut row = |label: &str, s: &DelayStats| {
            let _ = writeln!(
                out,
                "{label:<10} originated={:<5} delivered={:<6} mean={} min={} max={}",
                s.originated,
                s.delivered,
                opt(s.mean()),
                opt(s.min()),
                opt(s.max())
            );
        };
        for (src, s) in &self.per_source {
            row(&format!("source {src}"), s);
        }
        row("all", &self.aggregate);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,originated,delivered,mean_s,min_s,max_s\n");
        let mut row = |label: String, s: &DelayStats| {
            let _ = writeln!(
                out,
                "{label},{},{},{},{},{}",
                s.originated,
                s.delivered,
                opt_csv(s.mean()),
                opt_csv(s.min()),
                opt_csv(s.max())
            );
        };
        for (src, s) in &self.per_source {
            row(src.to_string(), s);
        }
        row("all".into(), &self.aggregate);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trace_has_no_delays() {
        let report = delay_report(&Trace::new());
        assert_eq!(report.aggregate.originated, 0);
        assert_eq!(report.aggregate.delivered, 0);
        assert_eq!(report.aggregate.mean(), None);
        assert_eq!(report.aggregate.min(), None);
        assert!(report.to_csv().ends_with("all,0,0,,,\n"));
    }

    #[test]
    fn per_copy_samples() {
        let trace = Trace::parse(
            "0.000000000 ORIG 0 - 0:0 10 1\n\
             0.010000000 DELIVER 2 0 0:0 10 1\n\
             0.030000000 DELIVER 4 2 0:0 10 1\n\
             1.000000000 ORIG_PLAIN 5 - 5:0 10 1\n\
             1.020000000 DELIVER 4 5 5:0 10 1\n\
             2.000000000 DELIVER 4 5 7:0 10 1\n",
        )
        .unwrap();
        let r = delay_report(&trace);
        assert_eq!(r.aggregate.originated, 2);
        assert_eq!(r.aggregate.delivered, 3);
        assert!((r.aggregate.mean().unwrap() - 0.02).abs() < 1e-12);
        assert!((r.aggregate.min().unwrap() - 0.01).abs() < 1e-12);
        assert!((r.aggregate.max().unwrap() - 0.03).abs() < 1e-12);
        let src0 = &r.per_source[&NodeId(0)];
        assert_eq!((src0.originated, src0.delivered), (1, 2));
        assert!((src0.mean().unwrap() - 0.02).abs() < 1e-12);
    }
}
