//! Stochastic channel simulator and parameter-estimation toolkit for UAV
//! air-to-ground ultra-wideband links in the 3.1-5.3 GHz band.
//!
//! The crate covers both directions of the round trip:
//!
//! * forward, [`svgen`] synthesizes channel impulse responses from a
//!   cluster/ray model with height-dependent cluster statistics, lognormal
//!   Nakagami small-scale fading ([`svgen`]), and a log-distance path loss
//!   law with Gaussian shadowing ([`pathloss`]);
//! * inverse, [`estimation`] deconvolves raw sounder scans (CLEAN),
//!   partitions multipath components into clusters, and refits every model
//!   parameter, while [`metrics`] derives delay spreads, coherence
//!   bandwidth, frequency responses, and sub-band statistics.
//!
//! Fitted constants for each measured environment/scenario/speed combination
//! live in the [`presets`] registry. All randomness flows through
//! [`rng::RandomSource`], a seeded, stream-addressed generator, so any
//! ensemble is reproducible from its manifest.

// Validation guards are written `!(v > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod fileio;
pub mod geo;
pub mod metrics;
pub mod pathloss;
pub mod presets;
pub mod rng;
pub mod svgen;
pub mod types;

pub use error::{Error, Result};
pub use rng::RandomSource;
pub use types::{
    Cir, EnvironmentClass, Geometry, NakagamiParams, PathLossParams, Pdp, PdpBin, ScanSet,
    ScenarioId, ScenarioPreset, SvParams, Tap,
};
