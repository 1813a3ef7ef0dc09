//! Dense numerical testbed for certifying and learning local quantum Hamiltonians.
//!
//! The crate simulates, on explicit `2^n x 2^n` matrices, two access models for an
//! n-qubit k-local Hamiltonian and the protocols built on top of them:
//!
//! * **time-evolution access** — shot-based estimation of the all-identity Bell
//!   outcome probability of `e^{-it(H - H0)}`, Trotterized from evolutions of `H`
//!   and `H0`, driving a tolerant CLOSE/FAR certification loop
//!   ([`certify::certify`]);
//! * **Gibbs-state access** — classical-shadow estimation of local Pauli
//!   expectations of thermal states, driving covering-net hypothesis selection
//!   ([`gibbs::learn_gibbs`]) and coefficient-gap certification
//!   ([`gibbs::certify_gibbs`]).
//!
//! Every inequality the protocols lean on (hypercontractive moment bounds,
//! eigenvalue-gap counting, short-time expansion bounds, Pinsker-type trace-norm
//! bounds) is exposed as a checkable property so batteries can sweep them on
//! random instances ([`certify::verify_lemma_suite`]).
//!
//! The [`harness`] module and the `hamcert` binary run seeded, reproducible
//! experiment batteries and emit JSON/CSV reports.

pub mod certify;
pub mod dynamics;
pub mod error;
pub mod gibbs;
pub mod harness;
pub mod linalg;
pub mod pauli;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Outcome of a certification protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Close,
    Far,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::Close => write!(f, "CLOSE"),
            Decision::Far => write!(f, "FAR"),
        }
    }
}
