//! Quantum channels, cq-ensembles and the resource-state correspondence.

mod channel;
mod choi;
mod ensemble;
mod resource;

pub use channel::{apply, QuantumChannel, WiretapChannel, CPTP_TOL};
pub(crate) use channel::apply_blockwise;
pub use choi::{choi_to_kraus, choi_to_kraus_with, kraus_to_choi, KRAUS_RANK_CUTOFF, REF_SUFFIX};
pub use ensemble::{cq_state, ensemble_pushforward, CqEnsemble, PROB_SUM_TOL};
pub use resource::{
    channel_from_resource_state, channel_from_resource_state_with, modulation_from_choi, ResourceState,
    MAX_CONDITION, SUPPORT_CUTOFF,
};
