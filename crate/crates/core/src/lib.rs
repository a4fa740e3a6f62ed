//! Simulation core for a beam-splitting magnet experiment with an internal
//! recorder degree of freedom.
//!
//! The crate covers four layers:
//!
//! * adiabatic bookkeeping for composite atoms: reduced masses, the three
//!   mass-ratio parameters, and coordinate schemes that do or do not separate
//!   the centre of mass ([`atom`], [`coords`]);
//! * the effective potential a closed-shell atom presents to a slow probe,
//!   evaluated by a tabulated closed form and by direct quadrature, with a
//!   conformance report comparing the two ([`potential`], [`orbitals`],
//!   [`shells`]);
//! * a small tensor-product quantum engine: pure and mixed states, partial
//!   trace, projective measurement, entropies and coherence measures
//!   ([`state`]);
//! * split-step wavepacket dynamics of spin x centre-of-mass x recorder,
//!   with the beam-splitting, record-formation, erasure and pointer-sieve
//!   experiments built on top ([`dynamics`]).
//!
//! [`suite`] bundles the headline checks into one reproducible report.

// Validators spell bounds as `!(x > 0.0)` on purpose: the negated form also
// rejects NaN, which the inverted comparison would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod coords;
pub mod dynamics;
pub mod error;
pub mod orbitals;
pub mod potential;
pub mod quad;
pub mod report;
pub mod shells;
pub mod special;
pub mod state;
pub mod suite;

pub use error::{Error, Result};
