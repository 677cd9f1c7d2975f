//! Finite-blocklength estimators of asymptotic information rates.
//!
//! All asymptotic quantities are reported as ladders of exact finite-n
//! quantiles, never as limits. The quantile convention is grid-free: the
//! candidate set is the set of atom values, and "CDF at R" is taken strictly
//! below R so the largest qualifying atom is reported exactly.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelFamily;
use crate::error::{Error, Result};
use crate::input::InputProcess;
use crate::spectrum::{spectrum_exact, spectrum_stats, Spectrum, SpectrumMode, VALUE_TOL};

/// Anything that can produce the per-state density distributions at a given
/// blocklength: a channel family with a fixed input, or a synthetic family
/// of distributions given directly as atom lists.
pub trait SpectrumSource {
    fn spectra(&self, n: usize) -> Result<Vec<Spectrum>>;
}

/// A channel family observed through a fixed input process.
pub struct ChannelSource<'a> {
    pub family: &'a ChannelFamily,
    pub input: &'a InputProcess,
}

impl SpectrumSource for ChannelSource<'_> {
    fn spectra(&self, n: usize) -> Result<Vec<Spectrum>> {
        self.family
            .states_at(n)?
            .iter()
            .map(|state| {
                spectrum_exact(
                    n,
                    state,
                    self.input,
                    self.family.input_alphabet,
                    self.family.output_alphabet,
                )
            })
            .collect()
    }
}

impl<F> SpectrumSource for F
where
    F: Fn(usize) -> Result<Vec<Spectrum>>,
{
    fn spectra(&self, n: usize) -> Result<Vec<Spectrum>> {
        self(n)
    }
}

/// Which finite-n quantile statistic a [`RateEstimate`] tracks.
#[derive(Debug, Clone, PartialEq)]
pub enum RateKind {
    /// Compound inf-rate: largest atom R with `sup_s Pr{Z < R} <= tol`.
    InfCompound,
    /// Single-state inf-rate of the named state.
    InfPerState(String),
    /// Single-state sup-rate of the named state.
    SupPerState(String),
    /// Compound sup-rate: smallest atom R with `sup_s Pr{Z > R} <= tol`.
    SupCompound,
    /// Check rate: smallest atom R with `inf_s Pr{Z > R} <= tol`.
    Check,
    /// epsilon-achievable rate: largest atom R with `sup_s Pr{Z < R} <= eps`.
    Eps(f64),
}

impl RateKind {
    pub fn label(&self) -> String {
        match self {
            RateKind::InfCompound => "inf-compound".into(),
            RateKind::InfPerState(id) => format!("inf-per-state({id})"),
            RateKind::SupPerState(id) => format!("sup-per-state({id})"),
            RateKind::SupCompound => "sup-compound".into(),
            RateKind::Check => "check".into(),
            RateKind::Eps(eps) => format!("eps-rate({eps})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    MonotoneUp,
    MonotoneDown,
    NonMonotone,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderEntry {
    pub n: usize,
    pub value: f64,
}

/// A rate statistic evaluated along a blocklength ladder, in nats per symbol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateEstimate {
    pub kind: String,
    pub tol: f64,
    pub ladder: Vec<LadderEntry>,
    /// The statistic at the largest ladder blocklength.
    pub value: f64,
    pub trend: Trend,
}

fn classify_trend(ladder: &[LadderEntry]) -> Trend {
    let up = ladder
        .windows(2)
        .all(|w| w[1].value >= w[0].value - VALUE_TOL);
    if up {
        return Trend::MonotoneUp;
    }
    let down = ladder
        .windows(2)
        .all(|w| w[1].value <= w[0].value + VALUE_TOL);
    if down {
        Trend::MonotoneDown
    } else {
        Trend::NonMonotone
    }
}

fn check_ladder(n_ladder: &[usize]) -> Result<()> {
    if n_ladder.is_empty() {
        return Err(Error::Usage("blocklength ladder is empty".into()));
    }
    if n_ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage(
            "blocklength ladder must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_tol(tol: f64, spectra: &[Spectrum]) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Usage(format!("tol must lie in (0,1), got {tol}")));
    }
    for sp in spectra {
        if let SpectrumMode::MonteCarlo { samples, .. } = sp.mode {
            let floor = 4.0 / (samples as f64).sqrt();
            if tol <= floor {
                return Err(Error::Usage(format!(
                    "tol {tol} is below the Monte Carlo resolution floor {floor:.3e} \
                     ({samples} samples); increase samples or tol"
                )));
            }
        }
    }
    Ok(())
}

fn candidate_values(spectra: &[Spectrum]) -> Vec<f64> {
    let mut values: Vec<f64> = spectra
        .iter()
        .flat_map(|sp| sp.atoms.iter().map(|a| a.value))
        .collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values.dedup_by(|a, b| (*a - *b).abs() <= VALUE_TOL);
    values
}

/// The finite-n quantile for `kind` from one set of per-state spectra.
pub fn quantile(kind: &RateKind, spectra: &[Spectrum], tol: f64) -> Result<f64> {
    check_tol(if let RateKind::Eps(eps) = kind { *eps } else { tol }, spectra)?;
    let select = |ids: Option<&str>| -> Result<Vec<&Spectrum>> {
        match ids {
            None => Ok(spectra.iter().collect()),
            Some(id) => {
                let one: Vec<&Spectrum> =
                    spectra.iter().filter(|sp| sp.state_id == id).collect();
                if one.is_empty() {
                    return Err(Error::Usage(format!("unknown state id {id:?}")));
                }
                Ok(one)
            }
        }
    };
    let (scope, threshold) = match kind {
        RateKind::InfCompound => (select(None)?, tol),
        RateKind::Eps(eps) => (select(None)?, *eps),
        RateKind::InfPerState(id) => (select(Some(id))?, tol),
        RateKind::SupPerState(id) => (select(Some(id))?, tol),
        RateKind::SupCompound => (select(None)?, tol),
        RateKind::Check => (select(None)?, tol),
    };
    let candidates = {
        let owned: Vec<Spectrum> = scope.iter().map(|&sp| sp.clone()).collect();
        candidate_values(&owned)
    };
    match kind {
        RateKind::InfCompound | RateKind::Eps(_) | RateKind::InfPerState(_) => {
            // Largest atom value whose strictly-below compound CDF is small.
            for &r in candidates.iter().rev() {
                let cdf_below = scope
                    .iter()
                    .map(|sp| sp.cdf_below(r))
                    .fold(0.0f64, f64::max);
                if cdf_below <= threshold {
                    return Ok(r);
                }
            }
            Ok(f64::NEG_INFINITY)
        }
        RateKind::SupPerState(_) | RateKind::SupCompound => {
            // Smallest atom value whose strict upper tail is small in every state.
            for &r in &candidates {
                let tail = scope
                    .iter()
                    .map(|sp| sp.upper_tail(r))
                    .fold(0.0f64, f64::max);
                if tail <= threshold {
                    return Ok(r);
                }
            }
            Ok(f64::INFINITY)
        }
        RateKind::Check => {
            // Smallest atom value whose strict upper tail is small in SOME state.
            for &r in &candidates {
                let tail = scope
                    .iter()
                    .map(|sp| sp.upper_tail(r))
                    .fold(1.0f64, f64::min);
                if tail <= threshold {
                    return Ok(r);
                }
            }
            Ok(f64::INFINITY)
        }
    }
}

/// Evaluates the quantile statistic along a blocklength ladder.
pub fn rate_estimate(
    kind: RateKind,
    source: &dyn SpectrumSource,
    n_ladder: &[usize],
    tol: f64,
) -> Result<RateEstimate> {
    check_ladder(n_ladder)?;
    let mut ladder = Vec::with_capacity(n_ladder.len());
    for &n in n_ladder {
        let spectra = source.spectra(n)?;
        let value = quantile(&kind, &spectra, tol)?;
        ladder.push(LadderEntry { n, value });
    }
    let value = ladder.last().unwrap().value;
    let trend = classify_trend(&ladder);
    Ok(RateEstimate {
        kind: kind.label(),
        tol,
        ladder,
        value,
        trend,
    })
}

/// Generic compound inf/sup estimator for arbitrary families of
/// distribution sequences.
pub fn compound_op(
    source: &dyn SpectrumSource,
    n_ladder: &[usize],
    tol: f64,
    sup_mode: bool,
) -> Result<RateEstimate> {
    let kind = if sup_mode {
        RateKind::SupCompound
    } else {
        RateKind::InfCompound
    };
    rate_estimate(kind, source, n_ladder, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityEntry {
    pub n: usize,
    pub sup_variance: f64,
    /// `sup_s Pr{|Z_ns - mean_ns| > delta}`.
    pub sup_mean_deviation: f64,
    /// `inf_s Pr{|Z_ns - r_star| > delta}`.
    pub inf_reference_deviation: f64,
    /// `sup_s Pr{|Z_ns - r_star| > delta}`; stays at 1 whenever some state
    /// cannot concentrate at the reference rate.
    pub sup_reference_deviation: f64,
}

/// Convergence-in-probability diagnostics along a ladder.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub delta: f64,
    pub r_star: f64,
    pub entries: Vec<StabilityEntry>,
    /// Whether `sup_s variance` is nonincreasing along the ladder.
    pub variance_decreasing: bool,
}

fn deviation_prob(sp: &Spectrum, center: f64, delta: f64) -> f64 {
    sp.atoms
        .iter()
        .filter(|a| (a.value - center).abs() > delta + VALUE_TOL)
        .map(|a| a.probability)
        .sum()
}

pub fn stability_diag(
    source: &dyn SpectrumSource,
    n_ladder: &[usize],
    delta: f64,
    r_star: f64,
) -> Result<StabilityReport> {
    check_ladder(n_ladder)?;
    if delta <= 0.0 {
        return Err(Error::Usage("delta must be positive".into()));
    }
    let mut entries = Vec::with_capacity(n_ladder.len());
    for &n in n_ladder {
        let spectra = source.spectra(n)?;
        let mut sup_variance = 0.0f64;
        let mut sup_mean_deviation = 0.0f64;
        let mut inf_reference_deviation = 1.0f64;
        let mut sup_reference_deviation = 0.0f64;
        for sp in &spectra {
            let stats = spectrum_stats(sp);
            sup_variance = sup_variance.max(stats.variance);
            sup_mean_deviation = sup_mean_deviation.max(deviation_prob(sp, stats.mean, delta));
            let ref_dev = deviation_prob(sp, r_star, delta);
            inf_reference_deviation = inf_reference_deviation.min(ref_dev);
            sup_reference_deviation = sup_reference_deviation.max(ref_dev);
        }
        entries.push(StabilityEntry {
            n,
            sup_variance,
            sup_mean_deviation,
            inf_reference_deviation,
            sup_reference_deviation,
        });
    }
    let variance_decreasing = entries
        .windows(2)
        .all(|w| w[1].sup_variance <= w[0].sup_variance + VALUE_TOL);
    Ok(StabilityReport {
        delta,
        r_star,
        entries,
        variance_decreasing,
    })
}
