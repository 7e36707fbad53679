//! Photon scattering off a two-level atom in a one-dimensional waveguide.
//!
//! * [`chiral`]: one- and two-photon S-matrix of a unidirectional waveguide
//! * [`two_mode`]: the bidirectional case through its even/odd decomposition
//! * [`fluorescence`]: coherent drive, Bloch equations and `G⁽¹⁾`
//! * [`oracle`]: discretized-continuum time evolution for cross-checks

pub mod chiral;
pub mod error;
pub mod fluorescence;
pub mod io;
pub mod model;
pub mod oracle;
pub mod two_mode;

pub use error::{Error, Result};
pub use model::{
    FrequencyGrid, Mode, OnePhotonWavepacket, PairAmplitude, SystemParams, TwoPhotonAmplitude, C64,
};
