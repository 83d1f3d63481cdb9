//! Verifier and prover state machines over a framed byte stream, plus the
//! wire message and TLV definitions they share.

pub mod message;
pub mod session;
pub mod wire;

pub use message::{Message, MsgType};
pub use session::{
    prover_session, verifier_session, ProverConfig, SessionOutcome, VerifierConfig,
};
pub use wire::{read_message, write_message};
