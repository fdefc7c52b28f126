use crate::packet::NodeId;
use crate::policy::GroupId;
use crate::sim::scenario::NodeSpec;

/// Link timing. Defaults stand in for a 2 Mb/s wireless card.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    pub bandwidth_bps: f64,
    pub propagation_mps: f64,
    pub per_hop_processing: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioModel {
            bandwidth_bps: 2e6,
            propagation_mps: 3e8,
            per_hop_processing: 0.0,
        }
    }
}

impl RadioModel {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.bandwidth_bps) || !positive(self.propagation_mps) {
            return Err(format!(
                "radio bandwidth {} and propagation speed {} must be positive",
                self.bandwidth_bps, self.propagation_mps
            ));
        }
        if !(self.per_hop_processing.is_finite() && self.per_hop_processing >= 0.0) {
            return Err(format!(
                "radio processing delay {} is negative",
                self.per_hop_processing
            ));
        }
        Ok(())
    }

    /// Time the transmitter is busy putting `bits` on the air.
    pub fn transmission_time(&self, bits: f64) -> f64 {
        bits / self.bandwidth_bps
    }
}

/// Serialization + propagation + processing for one hop.
pub fn hop_delay(packet_bits: f64, distance: f64, model: &RadioModel) -> f64 {
    model.transmission_time(packet_bits)
        + distance / model.propagation_mps
        + model.per_hop_processing
}

/// Nodes within `node`'s own range (closed disk), ascending by id.
pub fn neighbors_of(node: NodeId, topology: &[NodeSpec]) -> Vec<(NodeId, GroupId)> {
    let Some(me) = topology.iter().find(|n| n.id == node) else {
        return Vec::new();
    };
    let mut out: Vec<(NodeId, GroupId)> = topology
        .iter()
        .filter(|other| other.id != node)
        .filter(|other| me.position.distance(&other.position) <= me.range)
        .map(|other| (other.id, other.group))
        .collect();
    out.sort_unstable();
    out
}
