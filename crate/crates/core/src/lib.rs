//! Statistical identification of Rician versus two-wave-with-diffuse-power
//! (TWDP) fading in measured channel envelopes, together with the spatial
//! correlation, time-gating and link-level tools used around it.

pub mod error;
pub mod fading;
pub mod inference;
pub mod linksim;
pub mod measurement;
pub mod rng;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
pub use fading::{FadingParams, TwdpDistribution};
