//! Achievability (Feinstein-style) and converse (Verdu-Han-style) error
//! bounds over compound families, plus the sandwich report tying both to the
//! exact error of a constructed code.

use serde::Serialize;

use crate::channel::ChannelFamily;
use crate::coding::{code_spectrum, error_probabilities, Codebook, ErrorReport};
use crate::error::{Error, Result};
use crate::input::InputProcess;
use crate::rate::{ChannelSource, SpectrumSource};
use crate::spectrum::compound_cdf;

/// Achievability bound: `sup_s Pr{Z_ns <= r_n + gamma} + e^{-gamma n}`,
/// clamped to [0,1]. Some code of rate `r_n` achieves at most this maximum
/// error probability in every state.
pub fn feinstein_bound(
    n: usize,
    r_n: f64,
    gamma: f64,
    family: &ChannelFamily,
    input: &InputProcess,
) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::Usage(format!("gamma must be positive, got {gamma}")));
    }
    let source = ChannelSource { family, input };
    let spectra = source.spectra(n)?;
    let cdf = compound_cdf(r_n + gamma, &spectra)?;
    Ok((cdf + (-gamma * n as f64).exp()).clamp(0.0, 1.0))
}

/// Converse bound: every code with these codewords satisfies
/// `eps_avg >= sup_s Pr{Z_ns <= r_n - gamma} - e^{-gamma n}` under the
/// uniform-codeword input, clamped to [0,1].
pub fn verdu_han_bound(codebook: &Codebook, gamma: f64, family: &ChannelFamily) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::Usage(format!("gamma must be positive, got {gamma}")));
    }
    let report = code_spectrum(codebook, family, 0.0)?;
    let r_n = report.rate_nats;
    let sup_cdf = report
        .entries
        .iter()
        .map(|e| e.spectrum.cdf(r_n - gamma))
        .fold(0.0f64, f64::max);
    Ok((sup_cdf - (-gamma * codebook.n as f64).exp()).clamp(0.0, 1.0))
}

/// Picks the grid point minimizing (achievability) or maximizing (converse)
/// the bound; ties resolve to the smallest gamma.
pub fn best_gamma(
    grid: &[f64],
    maximize: bool,
    mut eval: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::Usage("gamma grid is empty".into()));
    }
    if grid.iter().any(|&g| g <= 0.0) {
        return Err(Error::Usage("gamma grid must be positive".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut best: Option<(f64, f64)> = None;
    for &g in &sorted {
        let v = eval(g)?;
        let better = match best {
            None => true,
            Some((_, bv)) => {
                if maximize {
                    v > bv
                } else {
                    v < bv
                }
            }
        };
        if better {
            best = Some((g, v));
        }
    }
    Ok(best.unwrap())
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichEntry {
    pub gamma: f64,
    pub verdu_han_lower: f64,
    pub feinstein_upper: f64,
}

/// Lower bound <= measured average error <= measured maximum error
/// (<= lambda_n when the construction guarantee is active), for each gamma.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub n: usize,
    pub rate_nats: f64,
    pub lambda_n: f64,
    pub guaranteed: bool,
    pub measured: ErrorReport,
    pub entries: Vec<SandwichEntry>,
}

pub fn sandwich_report(
    codebook: &Codebook,
    family: &ChannelFamily,
    input: &InputProcess,
    gammas: &[f64],
) -> Result<SandwichReport> {
    if gammas.is_empty() {
        return Err(Error::Usage("gamma grid is empty".into()));
    }
    let measured = error_probabilities(codebook, family)?;
    let r_n = codebook.rate();
    let entries = gammas
        .iter()
        .map(|&gamma| {
            Ok(SandwichEntry {
                gamma,
                verdu_han_lower: verdu_han_bound(codebook, gamma, family)?,
                feinstein_upper: feinstein_bound(codebook.n, r_n, gamma, family, input)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SandwichReport {
        n: codebook.n,
        rate_nats: r_n,
        lambda_n: codebook.lambda_n,
        guaranteed: codebook.guaranteed,
        measured,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::channel::ChannelState;
    use crate::coding::build_feinstein;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    const B: Alphabet = Alphabet { size: 2 };

    fn uniform() -> InputProcess {
        InputProcess::iid_uniform(B)
    }

    #[test]
    fn feinstein_identity_channel() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("id", 0.0)]).unwrap();
        let v = feinstein_bound(10, 0.3, 0.1, &family, &uniform()).unwrap();
        assert_abs_diff_eq!(v, (-1.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn feinstein_clamps_to_one() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("id", 0.0)]).unwrap();
        // r_n + gamma above every atom: CDF term 1, bound clamps to 1.
        let v = feinstein_bound(4, 1.0, 0.5, &family, &uniform()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn feinstein_is_one_for_unbounded_coherence() {
        let family = ChannelFamily::from_json(
            r#"{
                "input_alphabet": 2, "output_alphabet": 2, "states": [],
                "truncation_rule": {
                    "template": {"kind": "coherence", "q1": 0.5, "q2": 0.0},
                    "s_max": "n"
                }
            }"#,
        )
        .unwrap();
        let v = feinstein_bound(6, 0.2, 0.1, &family, &uniform()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn verdu_han_hand_case_on_useless_channel() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("half", 0.5)]).unwrap();
        let mut regions = BTreeMap::new();
        regions.insert("half".to_string(), BTreeMap::from([(0, 0), (1, 1)]));
        let cb = Codebook {
            n: 1,
            gamma: 0.1,
            alpha: 2.0 * (0.1f64).exp(),
            lambda_n: 1.2,
            guaranteed: false,
            codewords: vec![0, 1],
            regions,
        };
        let bound = verdu_han_bound(&cb, 0.1, &family).unwrap();
        assert_abs_diff_eq!(bound, 1.0 - (-0.1f64).exp(), epsilon = 1e-14);
        let measured = error_probabilities(&cb, &family).unwrap();
        assert!(bound <= measured.compound_avg + 1e-12);
    }

    #[test]
    fn verdu_han_vanishes_for_good_code_and_small_gamma() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("id", 0.0)]).unwrap();
        let cb = build_feinstein(2, 2, 0.1, &family, &uniform()).unwrap();
        // r_n = (ln 2)/2; the code spectrum sits at ln 2, far above r_n - gamma.
        let bound = verdu_han_bound(&cb, 0.05, &family).unwrap();
        assert_eq!(bound, 0.0);
        let bound = verdu_han_bound(&cb, 50.0, &family).unwrap();
        assert_eq!(bound, 0.0);
    }

    #[test]
    fn best_gamma_selection() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("id", 0.0)]).unwrap();
        let input = uniform();
        let (g, v) = best_gamma(&[0.1, 0.2, 0.3], false, |gamma| {
            feinstein_bound(10, 0.3, gamma, &family, &input)
        })
        .unwrap();
        assert_eq!(g, 0.3);
        assert_abs_diff_eq!(v, (-3.0f64).exp(), epsilon = 1e-14);

        let (g, _) = best_gamma(&[0.4], false, |_| Ok(0.5)).unwrap();
        assert_eq!(g, 0.4);
        let (g, _) = best_gamma(&[0.3, 0.1, 0.2], true, |_| Ok(0.5)).unwrap();
        assert_eq!(g, 0.1);
    }

    #[test]
    fn sandwich_holds_for_constructed_code() {
        let family = ChannelFamily::new(
            B,
            B,
            vec![ChannelState::bsc("a", 0.05), ChannelState::bsc("b", 0.1)],
        )
        .unwrap();
        let input = uniform();
        let cb = build_feinstein(8, 4, 0.15, &family, &input).unwrap();
        let report = sandwich_report(&cb, &family, &input, &[0.05, 0.1, 0.2]).unwrap();
        for entry in &report.entries {
            assert!(entry.verdu_han_lower <= report.measured.compound_avg + 1e-12);
            assert!(report.measured.compound_avg <= report.measured.compound_max + 1e-12);
        }
        if report.guaranteed {
            assert!(report.measured.compound_max <= report.lambda_n + 1e-12);
        }
    }
}
