//! Independent ground truth for the closed-form modules: explicit
//! density-matrix simulation of the distillation and swapping circuits under
//! both gate-noise models, operator-level CHSH evaluation, and Monte Carlo
//! simulation of the repeater's waiting time.
//!
//! Nothing in here reuses the coefficient transforms; agreement between the
//! two routes is what the equivalence tests certify.

mod circuits;
mod dm;
mod mc;

pub use circuits::{
    apply_depolarizing_gate, apply_dissipative_gate, chsh_oracle, ed_oracle, es_oracle, GateModel,
    GateOp,
};
pub use dm::{bell_projector, DensityMatrix};
pub use mc::{mc_repeater, McEstimate, SwapStrategy};
