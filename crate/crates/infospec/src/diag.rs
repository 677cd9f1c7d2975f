//! Higher-level diagnostics: strong-converse consistency, uniformity of
//! convergence, worst-case vs compound capacity estimates, and the mixed
//! (weighted-mixture) channel comparison.
//!
//! All capacity-style numbers here are input-restricted estimates: maxima
//! over the supplied input list, which lower-bound the suprema over all input
//! processes. Per-state reference rates for coherence-style kinds are
//! evaluated at a blocklength past the state's activation horizon, since at
//! `n <= s` such states are degenerate by construction and their finite-n
//! per-state rate would be an artifact of the shared ladder top rather than
//! of the state itself.

use serde::Serialize;

use crate::channel::{ChannelFamily, ChannelState};
use crate::error::{Error, Result};
use crate::input::InputProcess;
use crate::rate::{quantile, rate_estimate, ChannelSource, RateEstimate, RateKind, SpectrumSource};
use crate::spectrum::{spectrum_exact, Spectrum, SpectrumMode, VALUE_TOL};

/// Rate-equality tolerance: 1e-9 plus half the local atom spacing.
fn equality_tolerance(candidates: &[f64], values: &[f64]) -> f64 {
    let mut spacing = 0.0f64;
    for &v in values {
        let mut nearest = f64::INFINITY;
        for &c in candidates {
            let d = (c - v).abs();
            if d > VALUE_TOL && d < nearest {
                nearest = d;
            }
        }
        if nearest.is_finite() {
            spacing = spacing.max(nearest);
        }
    }
    1e-9 + 0.5 * spacing
}

fn all_candidates(spectra: &[Spectrum]) -> Vec<f64> {
    let mut values: Vec<f64> = spectra
        .iter()
        .flat_map(|sp| sp.atoms.iter().map(|a| a.value))
        .collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values.dedup_by(|a, b| (*a - *b).abs() <= VALUE_TOL);
    values
}

/// Per-state inf or sup rate with the blocklength pushed past the state's
/// activation horizon.
pub fn per_state_rate_extended(
    family: &ChannelFamily,
    input: &InputProcess,
    state: &ChannelState,
    n_top: usize,
    tol: f64,
    sup_mode: bool,
) -> Result<f64> {
    let n_eff = n_top.max(state.activation_horizon() + 1);
    let sp = spectrum_exact(
        n_eff,
        state,
        input,
        family.input_alphabet,
        family.output_alphabet,
    )?;
    let kind = if sup_mode {
        RateKind::SupPerState(state.id.clone())
    } else {
        RateKind::InfPerState(state.id.clone())
    };
    quantile(&kind, std::slice::from_ref(&sp), tol)
}

// --- strong converse ---------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct StrongConverseInput {
    pub input_index: usize,
    pub inf_compound: RateEstimate,
    pub check: RateEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongConverseReport {
    pub tol: f64,
    pub delta: f64,
    pub per_input: Vec<StrongConverseInput>,
    /// Max over inputs of the compound inf-rate at the ladder top.
    pub best_inf: f64,
    /// Max over inputs of the check rate at the ladder top.
    pub best_check: f64,
    pub equality_tolerance: f64,
    pub consistent: bool,
    /// Per rung: the state whose density concentrates best at `best_inf`
    /// (argmin over states of `Pr{|Z_ns - best_inf| > delta}`), with that
    /// probability.
    pub worst_state_per_n: Vec<(usize, String, f64)>,
}

pub fn strong_converse_diag_sources(
    sources: &[&dyn SpectrumSource],
    n_ladder: &[usize],
    tol: f64,
    delta: f64,
) -> Result<StrongConverseReport> {
    if sources.is_empty() {
        return Err(Error::Usage("need at least one input".into()));
    }
    let mut per_input = Vec::with_capacity(sources.len());
    let mut best_inf = f64::NEG_INFINITY;
    let mut best_check = f64::NEG_INFINITY;
    let mut best_inf_index = 0usize;
    for (i, source) in sources.iter().enumerate() {
        let inf = rate_estimate(RateKind::InfCompound, *source, n_ladder, tol)?;
        let check = rate_estimate(RateKind::Check, *source, n_ladder, tol)?;
        if inf.value > best_inf {
            best_inf = inf.value;
            best_inf_index = i;
        }
        best_check = best_check.max(check.value);
        per_input.push(StrongConverseInput {
            input_index: i,
            inf_compound: inf,
            check,
        });
    }
    let n_top = *n_ladder.last().unwrap();
    let top_spectra = sources[best_inf_index].spectra(n_top)?;
    let eq_tol = equality_tolerance(&all_candidates(&top_spectra), &[best_inf, best_check]);
    let consistent = (best_inf - best_check).abs() <= eq_tol;
    let mut worst_state_per_n = Vec::with_capacity(n_ladder.len());
    for &n in n_ladder {
        let spectra = sources[best_inf_index].spectra(n)?;
        let mut best: Option<(String, f64)> = None;
        for sp in &spectra {
            let dev: f64 = sp
                .atoms
                .iter()
                .filter(|a| (a.value - best_inf).abs() > delta + VALUE_TOL)
                .map(|a| a.probability)
                .sum();
            if best.as_ref().map_or(true, |(_, d)| dev < *d) {
                best = Some((sp.state_id.clone(), dev));
            }
        }
        let (id, dev) = best.unwrap();
        worst_state_per_n.push((n, id, dev));
    }
    Ok(StrongConverseReport {
        tol,
        delta,
        per_input,
        best_inf,
        best_check,
        equality_tolerance: eq_tol,
        consistent,
        worst_state_per_n,
    })
}

pub fn strong_converse_diag(
    family: &ChannelFamily,
    inputs: &[InputProcess],
    n_ladder: &[usize],
    tol: f64,
    delta: f64,
) -> Result<StrongConverseReport> {
    let sources: Vec<ChannelSource> = inputs
        .iter()
        .map(|input| ChannelSource { family, input })
        .collect();
    let dyn_sources: Vec<&dyn SpectrumSource> =
        sources.iter().map(|s| s as &dyn SpectrumSource).collect();
    strong_converse_diag_sources(&dyn_sources, n_ladder, tol, delta)
}

// --- uniformity --------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct UniformityGammaLadder {
    pub gamma: f64,
    /// Per rung: `sup_s Pr{Z_ns <= r_min - gamma}`.
    pub sup_f: Vec<(usize, f64)>,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    /// `min_s` per-state inf rate (horizon-extended) used as the reference.
    pub reference_rate: f64,
    pub tol: f64,
    pub per_gamma: Vec<UniformityGammaLadder>,
    pub consistent: bool,
    /// Whether every `sup_s f_n(s)` ladder is nonincreasing; the ladders
    /// themselves are the witnessed `delta_m` sequence.
    pub weakly_decreasing: bool,
}

pub fn uniformity_diag(
    family: &ChannelFamily,
    input: &InputProcess,
    n_ladder: &[usize],
    gamma_list: &[f64],
    tol: f64,
) -> Result<UniformityReport> {
    if gamma_list.is_empty() || gamma_list.iter().any(|&g| g <= 0.0) {
        return Err(Error::Usage("gamma list must be non-empty and positive".into()));
    }
    let n_top = *n_ladder
        .last()
        .ok_or_else(|| Error::Usage("blocklength ladder is empty".into()))?;
    let mut reference_rate = f64::INFINITY;
    for state in family.states_at(n_top)? {
        let r = per_state_rate_extended(family, input, &state, n_top, tol, false)?;
        reference_rate = reference_rate.min(r);
    }
    let source = ChannelSource { family, input };
    let mut spectra_per_n = Vec::with_capacity(n_ladder.len());
    for &n in n_ladder {
        spectra_per_n.push((n, source.spectra(n)?));
    }
    let mut per_gamma = Vec::with_capacity(gamma_list.len());
    let mut consistent = true;
    let mut weakly_decreasing = true;
    for &gamma in gamma_list {
        let sup_f: Vec<(usize, f64)> = spectra_per_n
            .iter()
            .map(|(n, spectra)| {
                let sup = spectra
                    .iter()
                    .map(|sp| sp.cdf(reference_rate - gamma))
                    .fold(0.0f64, f64::max);
                (*n, sup)
            })
            .collect();
        let last = sup_f.last().unwrap().1;
        let first = sup_f.first().unwrap().1;
        let gamma_consistent = last <= tol && last <= first + VALUE_TOL;
        let nonincreasing = sup_f.windows(2).all(|w| w[1].1 <= w[0].1 + VALUE_TOL);
        consistent &= gamma_consistent;
        weakly_decreasing &= nonincreasing;
        per_gamma.push(UniformityGammaLadder {
            gamma,
            sup_f,
            consistent: gamma_consistent,
        });
    }
    Ok(UniformityReport {
        reference_rate,
        tol,
        per_gamma,
        consistent,
        weakly_decreasing,
    })
}

// --- worst-case vs compound ---------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct WorstCaseReport {
    pub tol: f64,
    /// `min_s max_inputs` per-state inf rate (horizon-extended).
    pub worst_case: f64,
    pub worst_case_state: String,
    /// `max_inputs` compound inf rate at the ladder top.
    pub compound: f64,
    pub gap: f64,
    /// Whether one input attains both estimates.
    pub saddle_point: bool,
    /// These are maxima over the supplied inputs only, so both numbers are
    /// lower bounds on the corresponding capacities.
    pub input_restricted: bool,
}

pub fn worst_case_vs_compound(
    family: &ChannelFamily,
    inputs: &[InputProcess],
    n_ladder: &[usize],
    tol: f64,
) -> Result<WorstCaseReport> {
    if inputs.is_empty() {
        return Err(Error::Usage("need at least one input".into()));
    }
    let n_top = *n_ladder
        .last()
        .ok_or_else(|| Error::Usage("blocklength ladder is empty".into()))?;
    let mut compound = f64::NEG_INFINITY;
    let mut compound_input = 0usize;
    for (i, input) in inputs.iter().enumerate() {
        let source = ChannelSource { family, input };
        let est = rate_estimate(RateKind::InfCompound, &source, n_ladder, tol)?;
        if est.value > compound {
            compound = est.value;
            compound_input = i;
        }
    }
    let mut worst_case = f64::INFINITY;
    let mut worst_case_state = String::new();
    let mut worst_case_input = 0usize;
    for state in family.states_at(n_top)? {
        let mut best = f64::NEG_INFINITY;
        let mut best_input = 0usize;
        for (i, input) in inputs.iter().enumerate() {
            let r = per_state_rate_extended(family, input, &state, n_top, tol, false)?;
            if r > best {
                best = r;
                best_input = i;
            }
        }
        if best < worst_case {
            worst_case = best;
            worst_case_state = state.id.clone();
            worst_case_input = best_input;
        }
    }
    Ok(WorstCaseReport {
        tol,
        worst_case,
        worst_case_state,
        compound,
        gap: worst_case - compound,
        saddle_point: worst_case_input == compound_input,
        input_restricted: true,
    })
}

// --- mixed channel ------------------------------------------------------------

/// Mixture weights over the family's states at each blocklength.
#[derive(Debug, Clone)]
pub enum MixtureWeights {
    /// One weight per state; only valid for families whose state list does
    /// not change with `n`.
    Explicit(Vec<f64>),
    /// `alpha_s proportional to ratio^(s+1)` over the state list order at
    /// each blocklength, normalized; follows truncation-rule growth.
    Geometric { ratio: f64 },
}

impl MixtureWeights {
    fn at(&self, states: &[ChannelState]) -> Result<Vec<f64>> {
        match self {
            MixtureWeights::Explicit(w) => {
                if w.len() != states.len() {
                    return Err(Error::Usage(format!(
                        "{} weights supplied for {} states",
                        w.len(),
                        states.len()
                    )));
                }
                if w.iter().any(|&x| x < 0.0) {
                    return Err(Error::Usage("mixture weights must be nonnegative".into()));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Usage(format!(
                        "mixture weights sum to {sum}, not 1"
                    )));
                }
                Ok(w.iter().map(|&x| x / sum).collect())
            }
            MixtureWeights::Geometric { ratio } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::Usage("geometric ratio must lie in (0,1)".into()));
                }
                let raw: Vec<f64> = (0..states.len()).map(|k| ratio.powi(k as i32 + 1)).collect();
                let sum: f64 = raw.iter().sum();
                Ok(raw.into_iter().map(|x| x / sum).collect())
            }
        }
    }
}

/// The spectrum of the single mixture channel `p = sum_s alpha_s p_s`,
/// computed row by row without materializing any full table.
pub fn mixture_spectrum(
    family: &ChannelFamily,
    weights: &MixtureWeights,
    input: &InputProcess,
    n: usize,
) -> Result<Spectrum> {
    input.validate(family.input_alphabet, n)?;
    let states = family.states_at(n)?;
    let alphas = weights.at(&states)?;
    let ny_n = family.output_alphabet.seq_count(n)?;
    let support = input.support_atoms(n, family.input_alphabet)?;
    let mixture_row = |x: usize| -> Result<Vec<f64>> {
        let mut row = vec![0.0f64; ny_n];
        for (state, &alpha) in states.iter().zip(alphas.iter()) {
            if alpha == 0.0 {
                continue;
            }
            let part = state.kernel_row(n, family.input_alphabet, family.output_alphabet, x)?;
            for (y, &p) in part.iter().enumerate() {
                row[y] += alpha * p;
            }
        }
        Ok(row)
    };
    let mut q = vec![0.0f64; ny_n];
    for &(x, px) in &support {
        let row = mixture_row(x)?;
        for (y, &pyx) in row.iter().enumerate() {
            q[y] += px * pyx;
        }
    }
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for &(x, px) in &support {
        let row = mixture_row(x)?;
        for (y, &pyx) in row.iter().enumerate() {
            let w = px * pyx;
            if w > 0.0 {
                raw.push(((pyx.ln() - q[y].ln()) / n as f64, w));
            }
        }
    }
    Spectrum::from_raw_atoms(n, "mixture", SpectrumMode::Exact, raw)
}

#[derive(Debug, Clone, Serialize)]
pub struct MixedReport {
    pub tol: f64,
    /// Inf-rate ladder of the mixture channel itself.
    pub mixture_spectrum_rate: RateEstimate,
    /// `min` over positive-weight states of per-state inf rates
    /// (horizon-extended): the closed-form route.
    pub formula_rate: f64,
    /// `max_inputs` compound inf rate at the ladder top.
    pub compound_rate: f64,
    /// Verdict: compound <= mixed (within 1e-12).
    pub compound_le_mixed: bool,
    pub input_restricted: bool,
}

pub fn mixed_capacity_estimate(
    family: &ChannelFamily,
    weights: &MixtureWeights,
    inputs: &[InputProcess],
    n_ladder: &[usize],
    tol: f64,
) -> Result<MixedReport> {
    if inputs.is_empty() {
        return Err(Error::Usage("need at least one input".into()));
    }
    let n_top = *n_ladder
        .last()
        .ok_or_else(|| Error::Usage("blocklength ladder is empty".into()))?;
    let mut compound_rate = f64::NEG_INFINITY;
    let mut best_input = 0usize;
    for (i, input) in inputs.iter().enumerate() {
        let source = ChannelSource { family, input };
        let est = rate_estimate(RateKind::InfCompound, &source, n_ladder, tol)?;
        if est.value > compound_rate {
            compound_rate = est.value;
            best_input = i;
        }
    }
    let mix_input = &inputs[best_input];
    let mix_source = |n: usize| -> Result<Vec<Spectrum>> {
        Ok(vec![mixture_spectrum(family, weights, mix_input, n)?])
    };
    let mixture_spectrum_rate =
        rate_estimate(RateKind::InfCompound, &mix_source, n_ladder, tol)?;
    let states = family.states_at(n_top)?;
    let alphas = weights.at(&states)?;
    let mut formula_rate = f64::INFINITY;
    for (state, &alpha) in states.iter().zip(alphas.iter()) {
        if alpha <= 0.0 {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        for input in inputs {
            best = best.max(per_state_rate_extended(family, input, state, n_top, tol, false)?);
        }
        formula_rate = formula_rate.min(best);
    }
    Ok(MixedReport {
        tol,
        mixture_spectrum_rate,
        formula_rate,
        compound_rate,
        compound_le_mixed: compound_rate <= formula_rate + 1e-12,
        input_restricted: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use approx::assert_abs_diff_eq;

    const B: Alphabet = Alphabet { size: 2 };
    const LN2: f64 = std::f64::consts::LN_2;

    fn uniform() -> InputProcess {
        InputProcess::iid_uniform(B)
    }

    fn two_bsc() -> ChannelFamily {
        ChannelFamily::new(
            B,
            B,
            vec![ChannelState::bsc("a", 0.05), ChannelState::bsc("b", 0.2)],
        )
        .unwrap()
    }

    fn example1_unbounded() -> ChannelFamily {
        ChannelFamily::from_json(
            r#"{
                "input_alphabet": 2, "output_alphabet": 2, "states": [],
                "truncation_rule": {
                    "template": {"kind": "coherence", "q1": 0.5, "q2": 0.0},
                    "s_max": "n"
                }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn strong_converse_single_bsc_is_consistent() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("bsc", 0.11)]).unwrap();
        let report =
            strong_converse_diag(&family, &[uniform()], &[2, 4, 6, 8, 10], 0.4, 0.1).unwrap();
        assert!(report.consistent);
        assert_abs_diff_eq!(report.best_inf, report.best_check, epsilon = 1e-12);
    }

    #[test]
    fn strong_converse_two_bscs_tracks_worst_state() {
        let report =
            strong_converse_diag(&two_bsc(), &[uniform()], &[4, 6, 8, 10], 0.4, 0.1).unwrap();
        assert!(report.consistent);
        for (_, id, _) in &report.worst_state_per_n {
            assert_eq!(id, "b");
        }
    }

    #[test]
    fn strong_converse_deterministic_atoms() {
        let source = |n: usize| -> Result<Vec<Spectrum>> {
            Ok(vec![
                Spectrum::synthetic(n, "lo", &[(0.2, 1.0)])?,
                Spectrum::synthetic(n, "hi", &[(0.5, 1.0)])?,
            ])
        };
        let report =
            strong_converse_diag_sources(&[&source], &[1, 2, 4], 1e-9, 0.01).unwrap();
        assert_eq!(report.best_inf, 0.2);
        assert_eq!(report.best_check, 0.2);
        assert!(report.consistent);
    }

    #[test]
    fn uniformity_finite_bsc_family_is_consistent() {
        let report = uniformity_diag(
            &two_bsc(),
            &uniform(),
            &[2, 4, 6, 8],
            &[0.1, 0.2],
            1e-9,
        )
        .unwrap();
        assert!(report.consistent);
        assert!(report.weakly_decreasing);
    }

    #[test]
    fn uniformity_unbounded_coherence_fails() {
        let report = uniformity_diag(
            &example1_unbounded(),
            &uniform(),
            &[2, 4, 6, 8],
            &[0.1, 0.3],
            1e-9,
        )
        .unwrap();
        assert!(!report.consistent);
        assert_abs_diff_eq!(report.reference_rate, LN2, epsilon = 1e-12);
        for ladder in &report.per_gamma {
            for &(_, sup) in &ladder.sup_f {
                assert_eq!(sup, 1.0);
            }
        }
    }

    #[test]
    fn uniformity_single_state_trivially_consistent() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("bsc", 0.11)]).unwrap();
        let report =
            uniformity_diag(&family, &uniform(), &[2, 4, 6], &[0.1], 1e-9).unwrap();
        assert!(report.consistent);
    }

    #[test]
    fn worst_case_equals_compound_for_finite_bscs() {
        let report =
            worst_case_vs_compound(&two_bsc(), &[uniform()], &[4, 6, 8, 10], 0.4).unwrap();
        assert_abs_diff_eq!(report.gap, 0.0, epsilon = 1e-12);
        assert_eq!(report.worst_case_state, "b");
        assert!(report.saddle_point);
    }

    #[test]
    fn worst_case_single_state_gap_zero() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("bsc", 0.11)]).unwrap();
        let report =
            worst_case_vs_compound(&family, &[uniform()], &[2, 4, 8], 0.4).unwrap();
        assert_abs_diff_eq!(report.gap, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn worst_case_gap_is_ln2_for_unbounded_coherence() {
        let report =
            worst_case_vs_compound(&example1_unbounded(), &[uniform()], &[2, 4, 8], 1e-9)
                .unwrap();
        assert_abs_diff_eq!(report.worst_case, LN2, epsilon = 1e-12);
        assert_abs_diff_eq!(report.compound, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.gap, LN2, epsilon = 1e-12);
    }

    #[test]
    fn mixed_equals_compound_for_finite_family() {
        let report = mixed_capacity_estimate(
            &two_bsc(),
            &MixtureWeights::Explicit(vec![0.5, 0.5]),
            &[uniform()],
            &[4, 6, 8, 10],
            0.4,
        )
        .unwrap();
        assert_abs_diff_eq!(report.formula_rate, report.compound_rate, epsilon = 1e-9);
        assert!(report.compound_le_mixed);
    }

    #[test]
    fn mixed_single_state_is_the_state_itself() {
        let family = ChannelFamily::new(B, B, vec![ChannelState::bsc("bsc", 0.11)]).unwrap();
        let report = mixed_capacity_estimate(
            &family,
            &MixtureWeights::Explicit(vec![1.0]),
            &[uniform()],
            &[2, 4, 6],
            0.4,
        )
        .unwrap();
        assert_abs_diff_eq!(
            report.mixture_spectrum_rate.value,
            report.compound_rate,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mixed_strictly_beats_compound_for_unbounded_coherence() {
        // Geometric weights: the useless states (s >= n) carry mass 2^{-n}
        // scaled, so the mixture spectrum concentrates near ln 2 while the
        // compound estimate is pinned at 0 by the worst state.
        let report = mixed_capacity_estimate(
            &example1_unbounded(),
            &MixtureWeights::Geometric { ratio: 0.5 },
            &[uniform()],
            &[2, 4, 6, 8, 10],
            1e-3,
        )
        .unwrap();
        assert_abs_diff_eq!(report.compound_rate, 0.0, epsilon = 1e-12);
        assert!(report.mixture_spectrum_rate.value > 0.5);
        assert_abs_diff_eq!(report.formula_rate, LN2, epsilon = 1e-12);
        assert!(report.compound_le_mixed);
    }

    #[test]
    fn explicit_weights_must_match_state_count() {
        assert!(mixed_capacity_estimate(
            &two_bsc(),
            &MixtureWeights::Explicit(vec![1.0]),
            &[uniform()],
            &[2, 4],
            0.4,
        )
        .is_err());
    }
}
