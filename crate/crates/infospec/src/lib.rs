//! Exact small-blocklength analysis of compound discrete channels.
//!
//! The crate computes information-density spectra per channel state, turns
//! them into finite-n estimates of compound information rates, constructs
//! greedy maximal codes with exact error evaluation, and evaluates the
//! matching achievability and converse bounds. Everything is exact (double
//! precision over enumerated sequence spaces) unless Monte Carlo mode is
//! requested explicitly; all rates are in nats per symbol.

pub mod alphabet;
pub mod bounds;
pub mod channel;
pub mod coding;
pub mod diag;
pub mod error;
pub mod input;
pub mod rate;
pub mod scenarios;
pub mod spectrum;

pub use alphabet::{Alphabet, DEFAULT_ENUMERATION_CAP};
pub use channel::{block_kernel, validate, ChannelFamily, ChannelKind, ChannelState};
pub use coding::{build_feinstein, code_spectrum, decode, error_probabilities, Codebook};
pub use error::{Error, Result};
pub use input::InputProcess;
pub use rate::{
    compound_op, rate_estimate, stability_diag, ChannelSource, RateEstimate, RateKind,
    SpectrumSource, Trend,
};
pub use spectrum::{
    check_tail, compound_cdf, divergence_density, entropy_density, entropy_spectrum, info_density,
    output_marginal, spectrum_exact, spectrum_mc, spectrum_stats, Spectrum, SpectrumAtom,
    SpectrumMode,
};
