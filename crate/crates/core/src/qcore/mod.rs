//! Labeled tensor spaces, density operators and the basic state operations.

pub mod linalg;
mod ops;
pub mod random;
mod space;
mod state;

pub use linalg::{CMatrix, CVector, C64};
pub use ops::{
    fidelity, maximally_entangled, partial_trace, permute, purification_vector, purify, tensor,
    tensor_power, trace_distance, trace_norm_distance, uhlmann_fixup, Fixup, Purification,
    RANK_CUTOFF,
};
pub use space::LabeledSpace;
pub use state::{DensityOperator, MatrixWire, Tolerances};

#[cfg(test)]
mod tests;
