//! Trial-level simulation of the distillation round on sign-free Pauli
//! frames, used as an independent check of the closed forms.
//!
//! Every trial draws from its own ChaCha8 stream (the master seed selects the
//! key, the trial index the stream), so estimates are bit-identical for any
//! number of worker threads.

mod estimate;
mod frame;
mod symplectic;

pub use estimate::{
    estimate_active, estimate_finite_depth, estimate_passive, estimate_syndrome_collision,
    sample_iid_frame, sample_weight_frame, FiniteDepthEstimate, GateChannel, InitialErrors,
    MCEstimate, RoundEstimate, MC_ENUMERATION_CAP,
};
pub use frame::{Pauli, PauliFrame, MAX_SLOTS};
pub use symplectic::{sample_clifford, SymplecticClifford};
