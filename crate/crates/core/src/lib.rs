//! Simulation and renormalization toolkit for periodic billiards and
//! interval exchange maps.
//!
//! The crate estimates anomalous diffusion exponents of the Z^2-periodic
//! wind-tree billiard by three independent routes and cross-checks them:
//!
//! * direct event-driven simulation of the billiard flow ([`billiard`]),
//! * growth of return-cycle sums of an interval exchange paired with an
//!   integer cocycle ([`iet`], [`analysis`]),
//! * Lyapunov exponents of the Rauzy-Veech-Zorich renormalization
//!   cocycle ([`renorm`]).

pub mod analysis;
pub mod billiard;
pub mod deffile;
pub mod error;
pub mod grid;
pub mod iet;
pub mod renorm;
pub mod scalar;

pub use error::{AnalysisError, BilliardError, IetError, RenormError};
pub use grid::GeometricGrid;
pub use scalar::{ratio, Scalar};
