pub mod circuit;
pub mod formula;
pub mod metric;
pub mod policy;
pub mod pomdp;
pub mod tbn;

pub use circuit::{full_adder, Circuit, CircuitBuilder, Gate, GateKind};
pub use formula::{Cnf, Literal, Quantifier, SsatFormula, MAX_CLAUSE_LEN};
pub use metric::Metric;
pub use policy::{FiniteMemoryPolicy, HistoryPolicy, Policy, StationaryPolicy, TimeDependentPolicy};
pub use pomdp::{classify_observability, validate_pomdp, Labels, ObservabilityClass, Pomdp, Violation};
pub use tbn::{
    bits_to_string, gate_type, row_bits, FluentCpt, Parent, SuccinctCircuitInstance, SuccinctReward, Tbn, TbnReward,
};
