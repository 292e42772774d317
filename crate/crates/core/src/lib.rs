//! Exact arithmetic for the spectral construction of sheaves on K3-fibered
//! threefolds.
//!
//! The crate is organised bottom-up:
//!
//! * [`chow`]: numerical intersection rings of threefolds and Künneth
//!   products of surfaces and curves;
//! * [`fiber_k3`]: fibration geometry, fiberwise Mukai vectors and the
//!   fine-moduli admissibility test;
//! * [`spectral`]: Chern characters of spectral sheaves, together with a
//!   Grothendieck–Riemann–Roch push-forward used as an independent check;
//! * [`stability`]: relative slopes, discriminants and effective polarization
//!   bounds;
//! * [`search`]: deterministic scans over boxes of parameters.
//!
//! All arithmetic is over exact rationals.

pub mod chow;
pub mod fiber_k3;
pub mod rational;
pub mod search;
pub mod spectral;
pub mod stability;

pub use rational::Rational;
