//! Desk-scale simulation of quantum channel testers.
//!
//! The crate provides labeled dense tensor operators, channel representations
//! (Kraus/Choi/Stinespring), the parallel-tester formalism with link products,
//! numerical Schur-Weyl transforms, exact Haar twirling, a compiler that turns
//! a dilation-access parallel tester into a channel-access parallel tester,
//! isometry/channel tomography in an oracle model, and channel distance
//! metrics. Every nontrivial identity is verifiable against an independent
//! brute-force or Monte-Carlo oracle at small dimensions.

pub mod channels;
pub mod compiler;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod schur;
pub mod tensor;
pub mod testers;
pub mod twirl;
pub mod tol;

pub use error::{Error, Result};
