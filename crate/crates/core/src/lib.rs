//! Landau-Zener-Stuckelberg interference toolkit for a driven qubit coupled
//! to a ladder of two-level systems: a closed-form adiabatic-impulse engine,
//! a time-dependent Schrodinger integrator, frequency-domain pattern
//! analysis, and the dark-state block of a degenerate TLS pair.

pub mod darkstate;
pub mod error;
pub mod impulse;
pub mod model;
pub mod schrodinger;
pub mod spectral;
pub mod stats;

pub use darkstate::{DarkSystem, Spectrum};
pub use error::{Error, Result};
pub use impulse::{LzGateParams, PathDescriptor, Stokes};
pub use model::{PatternGrid, SystemSpec, Tls, TrianglePulse};
pub use schrodinger::DtPolicy;
pub use spectral::{ArcPrediction, FtMap, RidgePoint, Window};
