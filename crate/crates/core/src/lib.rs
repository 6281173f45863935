//! Test bench for bipartite quantum correlations and the Bell/Cirel'son
//! family of inequalities.
//!
//! The crate computes correlation values for sharp (±1-valued) and
//! generalized (POVM) observables on small finite-dimensional Hilbert
//! spaces, evaluates the CHSH expression against its classical, quantum,
//! and logical bounds, traces the quantum boundary in the (X, Y)
//! correlation plane, and models two non-quantum reference points: the
//! PR superquantum box and a non-local measurement protocol that beats
//! the quantum bound while keeping one-wing statistics flat.
//!
//! Modules build bottom-up:
//!
//! * [`linalg`] — dense complex matrices, Hermitian eigensolver, norms.
//! * [`quantum`] — states, dichotomic observables, POVMs, coarse-graining.
//! * [`correlations`] — scenarios, expectation values, behavior tables,
//!   no-signaling checks.
//! * [`inequalities`] — CHSH/Cirel'son/rotated/circle evaluators, the
//!   operator identity behind the 2√2 bound, LHV membership.
//! * [`models`] — PR box and the non-local protocol.
//! * [`optimize`] — seeded derivative-free maximization of correlation
//!   functionals over qubit measurement settings.
//! * [`cli`] — scenario files, report documents, and the subcommand
//!   implementations behind the `qlocal` binary.

pub mod cli;
pub mod correlations;
pub mod inequalities;
pub mod linalg;
pub mod models;
pub mod optimize;
pub mod quantum;
pub mod random;
pub mod tol;
