//! Simulation of a vibrating cavity mirror coupled to the Dicke model.
//!
//! The crate covers three levels of description:
//!
//! * finite-J exact quantum dynamics of the tripartite field, collective spin
//!   and mirror system ([`model::build_full`], [`spectra`], [`dynamics`]);
//! * thermodynamic-limit effective Hamiltonians in the normal and
//!   super-radiant phases, where the mirror is respectively free and
//!   classically driven ([`model::build_normal_phase`],
//!   [`model::build_superradiant`], [`dynamics::analytic_occupation`]);
//! * the coherent-state classical analogue with its pitchfork bifurcation
//!   and forced-oscillator limit ([`semiclassical`]).
//!
//! Plain-text interchange formats (parameter files, CSV series, run
//! manifests) live in [`io`].

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod io;
mod krylov;
pub mod model;
pub mod semiclassical;
pub mod spectra;

pub use error::{Error, Result};
pub use hilbert::{CompositeBasis, FockMode, Operator, Space, SpinSector, C64};
pub use model::ModelParams;
