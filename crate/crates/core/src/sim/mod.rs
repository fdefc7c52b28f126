pub mod engine;
pub mod radio;
pub mod scenario;

pub use engine::{run, Simulator};
pub use radio::{hop_delay, neighbors_of, RadioModel};
pub use scenario::{CbrFlow, NodeSpec, Origination, Scenario, ScenarioError};
