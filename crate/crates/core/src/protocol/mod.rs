//! The two-way teleportation protocol: channel tailoring, encoding of both
//! teleportees into the shared pair, and decoding back into product form.
//!
//! Every stage is an explicit operator (or projector family) applied to a
//! [`QuditRegister`] laid out as `[teleportee₁, channel₁, teleportee₂, channel₂]`.
//! Classical messages go through a [`ProtocolTranscript`]; operators that
//! depend on the other party's outcome read it back from the transcript, so
//! they cannot be built before the message exists.

mod config;
mod operators;
mod run;
mod transcript;

pub use config::{Party, ProtocolConfig, RegisterLayout, Stage};
pub use operators::{
    ancilla_separation, channel_subtraction, correction_unitaries, decode_fourier, decoding_projectors,
    disentangle_teleportee, encoding_projectors, final_rotation, relabel_unitary, tailoring_projectors,
};
pub use run::{
    prepare_ancilla, prepare_channel, run_protocol, tailor_channel, OutcomeSource, OutcomeTuple, Protocol,
    ProtocolResult,
};
pub use transcript::{ClassicalMessage, MessageTag, ProtocolTranscript, StageEntry};
