//! Near-field multi-beam training for extremely large arrays.
//!
//! Activating every `M`-th antenna of a uniform linear array turns one
//! focused beam into `M` grating lobes on a ring of the polar plane. A sweep
//! over such sparse codewords locates the ring, and a sweep over the `M`
//! lobes locates the user, using `QV + KM` pilots instead of `QMV`.
//!
//! The crate is organised along the simulation pipeline:
//!
//! - [`geometry`]: array configuration, polar points, near-field distances
//! - [`channel`]: steering vectors and seeded Rician channel draws
//! - [`beampattern`]: patterns, grating lobes, abnormal rings
//! - [`codebook`]: polar, multi-beam, DFT and array-division codebooks
//! - [`training`]: the proposed scheme, benchmarks and the `M` optimizer
//! - [`beamforming`]: ZF and MMSE hybrid beamforming, rates
//! - [`harness`]: configuration, presets and Monte Carlo runs
//!
//! ```
//! use nearfield::codebook::{build_multi_beam_codebook, build_single_beam_codebook};
//! use nearfield::geometry::{ArrayConfig, SparseActivation};
//! use nearfield::training::pilots;
//!
//! let cfg = ArrayConfig::new(257, 30e9)?;
//! let act = SparseActivation::new(16, &cfg)?;
//! let multi = build_multi_beam_codebook(&act, 4, &cfg)?;
//! let single = build_single_beam_codebook(&act, 4, &cfg)?;
//! assert_eq!(multi.len() + act.interval(), pilots::proposed(&act, 4, 1));
//! assert_eq!(single.len(), pilots::exhaustive(&act, 4));
//! # Ok::<(), nearfield::Error>(())
//! ```

pub mod beamforming;
pub mod beampattern;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod special;
pub mod training;
pub mod units;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/grating-lobes.md")]
    mod grating_lobes {}
    #[doc = include_str!("../../../book/src/abnormal-rings.md")]
    mod abnormal_rings {}
    #[doc = include_str!("../../../book/src/codebooks.md")]
    mod codebooks {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/beamforming.md")]
    mod beamforming {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
