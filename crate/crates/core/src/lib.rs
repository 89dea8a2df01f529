//! Wave-particle duality in two-path interference and its use for imaging
//! with undetected photons.
//!
//! The crate is organised bottom-up:
//!
//! - [`states`]: two-path states, marginal overlaps, reduced path density
//!   matrix and path-marginal concurrence.
//! - [`mzi`]: Mach-Zehnder detection probability, visibility,
//!   predictability, the duality ellipse residual and a photon-loss channel.
//! - [`qiup`]: the induced-coherence imaging chain (pump split, down
//!   conversion, object, idler alignment, signal detection).
//! - [`measure`]: Poisson photon-counting scans, fringe fitting,
//!   ellipticity, no-object calibration and transmittance inversion.
//! - [`imaging`]: transmittance maps, PGM/CSV I/O, synthetic glyph objects
//!   and the per-pixel reconstruction pipeline.

pub mod error;
pub mod imaging;
pub mod measure;
pub mod mzi;
pub mod qiup;
pub mod rng;
pub mod states;

pub use error::{Error, Result};

/// Complex probability amplitude.
pub type ComplexAmp = num_complex::Complex64;

/// Formats a number with 17 significant digits, enough for an exact `f64`
/// round trip.
pub fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}
