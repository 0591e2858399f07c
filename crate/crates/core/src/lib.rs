//! Simulation of SNAIL-based traveling-wave parametric amplifier-isolators:
//! unit-cell nonlinear coefficients, dispersion and loss, phase matching,
//! coupled-mode gain/isolation spectra and noise-temperature calibration.

pub mod cli;
pub mod cme;
pub mod constants;
pub mod error;
pub mod medium;
pub mod noisecal;
pub mod phasematch;
pub mod unitcell;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/unit-cell.md")]
    pub mod unit_cell {}
    #[doc = include_str!("../../../book/src/dispersion.md")]
    pub mod dispersion {}
    #[doc = include_str!("../../../book/src/phase-matching.md")]
    pub mod phase_matching {}
    #[doc = include_str!("../../../book/src/coupled-modes.md")]
    pub mod coupled_modes {}
    #[doc = include_str!("../../../book/src/isolation.md")]
    pub mod isolation {}
    #[doc = include_str!("../../../book/src/noise.md")]
    pub mod noise {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../book/src/defaults.md")]
    pub mod defaults {}
    #[doc = include_str!("../../../book/src/validation.md")]
    pub mod validation {}
}
