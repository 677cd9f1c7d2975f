//! Greedy maximal-code construction with state-independent codewords, exact
//! decoding, and exact error evaluation.
//!
//! The builder scans input sequences in lexicographic order and keeps a
//! candidate as the next codeword when, in every state, the not-yet-claimed
//! part of its high-density output set still carries probability at least
//! `1 - lambda_n`. Decision regions are those difference sets, so they are
//! disjoint by construction and uncovered outputs decode to erasure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::alphabet::{check_pair_cap, DEFAULT_ENUMERATION_CAP};
use crate::channel::ChannelFamily;
use crate::error::{Error, Result};
use crate::input::InputProcess;
use crate::spectrum::{spectrum_exact, output_marginal, Spectrum, VALUE_TOL};

/// A blocklength-n code with per-state decision regions.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub n: usize,
    pub gamma: f64,
    /// `alpha = M * e^{n*gamma}`.
    pub alpha: f64,
    /// `lambda_n = sup_s Pr{i <= ln alpha} + M/alpha`; the construction
    /// guarantees `eps_max <= lambda_n` whenever it is below 1.
    pub lambda_n: f64,
    /// False when `lambda_n >= 1` and the bound is vacuous.
    pub guaranteed: bool,
    /// Input-sequence indices, in the order the greedy scan accepted them.
    pub codewords: Vec<usize>,
    /// Per state: output-sequence index -> message index. Outputs absent from
    /// the map decode to erasure.
    pub regions: BTreeMap<String, BTreeMap<usize, usize>>,
}

impl Codebook {
    pub fn message_count(&self) -> usize {
        self.codewords.len()
    }

    /// `r_n = ln(M)/n` in nats per symbol.
    pub fn rate(&self) -> f64 {
        (self.codewords.len() as f64).ln() / self.n as f64
    }
}

/// Builds the greedy code for `M` messages at blocklength `n`.
pub fn build_feinstein(
    n: usize,
    m: usize,
    gamma: f64,
    family: &ChannelFamily,
    input: &InputProcess,
) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::Usage("blocklength must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::Usage("message count must be at least 1".into()));
    }
    if gamma <= 0.0 {
        return Err(Error::Usage(format!("gamma must be positive, got {gamma}")));
    }
    input.validate(family.input_alphabet, n)?;
    let nx_n = family.input_alphabet.seq_count(n)?;
    let ny_n = family.output_alphabet.seq_count(n)?;
    if m > nx_n {
        return Err(Error::Usage(format!(
            "cannot place {m} codewords in {nx_n} input sequences"
        )));
    }
    let states = family.states_at(n)?;
    for state in &states {
        check_pair_cap(
            family.input_alphabet.size,
            family.output_alphabet.size,
            n,
            DEFAULT_ENUMERATION_CAP,
            &format!("codebook construction over state {}", state.id),
        )?;
    }

    let ln_alpha = (m as f64).ln() + n as f64 * gamma;
    let alpha = ln_alpha.exp();
    let mut sup_cdf = 0.0f64;
    for state in &states {
        let sp = spectrum_exact(
            n,
            state,
            input,
            family.input_alphabet,
            family.output_alphabet,
        )?;
        sup_cdf = sup_cdf.max(sp.cdf(ln_alpha / n as f64));
    }
    let lambda_n = sup_cdf + m as f64 / alpha;
    let guaranteed = lambda_n < 1.0;
    let threshold = 1.0 - lambda_n;

    let marginals: Vec<Vec<f64>> = states
        .iter()
        .map(|state| {
            output_marginal(
                state,
                input,
                n,
                family.input_alphabet,
                family.output_alphabet,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut covered: Vec<Vec<bool>> = vec![vec![false; ny_n]; states.len()];
    let mut codewords: Vec<usize> = Vec::with_capacity(m);
    let mut regions: BTreeMap<String, BTreeMap<usize, usize>> = states
        .iter()
        .map(|s| (s.id.clone(), BTreeMap::new()))
        .collect();

    let mut candidate_regions: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for x in 0..nx_n {
        if codewords.len() == m {
            break;
        }
        let mut accept = true;
        for (si, state) in states.iter().enumerate() {
            let row = state.kernel_row(n, family.input_alphabet, family.output_alphabet, x)?;
            let q = &marginals[si];
            let region = &mut candidate_regions[si];
            region.clear();
            let mut mass = 0.0f64;
            for (y, &pyx) in row.iter().enumerate() {
                if pyx <= 0.0 {
                    continue;
                }
                // Membership in B_s(x): i(x;y|s) >= ln alpha, with q = 0
                // treated as an infinite density.
                let in_b = q[y] <= 0.0 || pyx.ln() - q[y].ln() >= ln_alpha - VALUE_TOL;
                if in_b && !covered[si][y] {
                    region.push(y);
                    mass += pyx;
                }
            }
            if mass < threshold - VALUE_TOL {
                accept = false;
                break;
            }
        }
        if !accept {
            continue;
        }
        let message = codewords.len();
        for (si, state) in states.iter().enumerate() {
            let map = regions.get_mut(&state.id).unwrap();
            for &y in &candidate_regions[si] {
                covered[si][y] = true;
                map.insert(y, message);
            }
        }
        codewords.push(x);
    }

    if codewords.len() < m {
        return Err(Error::InternalConsistency(format!(
            "greedy scan found only {} of {m} codewords although lambda_n = {lambda_n} < 1",
            codewords.len()
        )));
    }
    Ok(Codebook {
        n,
        gamma,
        alpha,
        lambda_n,
        guaranteed,
        codewords,
        regions,
    })
}

/// Region lookup: `Some(message)` or `None` for erasure.
pub fn decode(codebook: &Codebook, y_index: usize, state_id: &str) -> Result<Option<usize>> {
    let map = codebook
        .regions
        .get(state_id)
        .ok_or_else(|| Error::Usage(format!("unknown state id {state_id:?}")))?;
    Ok(map.get(&y_index).copied())
}

#[derive(Debug, Clone, Serialize)]
pub struct StateError {
    pub state_id: String,
    pub max: f64,
    pub avg: f64,
}

/// Exact per-state and compound error probabilities; erasures count as errors.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub per_state: Vec<StateError>,
    pub compound_max: f64,
    pub compound_avg: f64,
}

pub fn error_probabilities(codebook: &Codebook, family: &ChannelFamily) -> Result<ErrorReport> {
    let n = codebook.n;
    let states = family.states_at(n)?;
    let m = codebook.message_count();
    let mut per_state = Vec::with_capacity(states.len());
    let mut compound_max = 0.0f64;
    let mut compound_avg = 0.0f64;
    for state in &states {
        let map = codebook
            .regions
            .get(&state.id)
            .ok_or_else(|| Error::Usage(format!("codebook has no regions for state {}", state.id)))?;
        let mut worst = 0.0f64;
        let mut total = 0.0f64;
        for (message, &x) in codebook.codewords.iter().enumerate() {
            let row = state.kernel_row(n, family.input_alphabet, family.output_alphabet, x)?;
            let correct: f64 = map
                .iter()
                .filter(|&(_, &msg)| msg == message)
                .map(|(&y, _)| row[y])
                .sum();
            let err = (1.0 - correct).clamp(0.0, 1.0);
            worst = worst.max(err);
            total += err;
        }
        let avg = total / m as f64;
        compound_max = compound_max.max(worst);
        compound_avg = compound_avg.max(avg);
        per_state.push(StateError {
            state_id: state.id.clone(),
            max: worst,
            avg,
        });
    }
    Ok(ErrorReport {
        per_state,
        compound_max,
        compound_avg,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CodeSpectrumEntry {
    pub state_id: String,
    pub spectrum: Spectrum,
    pub max_atom_value: f64,
    /// Probability mass within `delta` of the code rate.
    pub mass_near_rate: f64,
}

/// Per-state spectra under the uniform-over-codewords input.
#[derive(Debug, Clone, Serialize)]
pub struct CodeSpectrumReport {
    pub rate_nats: f64,
    pub delta: f64,
    pub entries: Vec<CodeSpectrumEntry>,
}

pub fn code_spectrum(
    codebook: &Codebook,
    family: &ChannelFamily,
    delta: f64,
) -> Result<CodeSpectrumReport> {
    let n = codebook.n;
    let input = InputProcess::UniformOverCodebook {
        n,
        indices: codebook.codewords.clone(),
    };
    let r_n = codebook.rate();
    let states = family.states_at(n)?;
    let mut entries = Vec::with_capacity(states.len());
    for state in &states {
        let sp = spectrum_exact(
            n,
            state,
            &input,
            family.input_alphabet,
            family.output_alphabet,
        )?;
        let mass_near_rate = sp
            .atoms
            .iter()
            .filter(|a| (a.value - r_n).abs() <= delta + VALUE_TOL)
            .map(|a| a.probability)
            .sum();
        entries.push(CodeSpectrumEntry {
            state_id: state.id.clone(),
            max_atom_value: sp.max_value(),
            spectrum: sp,
            mass_near_rate,
        });
    }
    Ok(CodeSpectrumReport {
        rate_nats: r_n,
        delta,
        entries,
    })
}

// --- JSON export --------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookSchema {
    n: usize,
    gamma: f64,
    alpha: f64,
    lambda_n: f64,
    rate_nats: f64,
    codewords: Vec<usize>,
    regions: BTreeMap<String, BTreeMap<usize, usize>>,
}

impl Codebook {
    pub fn to_json(&self) -> Result<String> {
        let schema = CodebookSchema {
            n: self.n,
            gamma: self.gamma,
            alpha: self.alpha,
            lambda_n: self.lambda_n,
            rate_nats: self.rate(),
            codewords: self.codewords.clone(),
            regions: self.regions.clone(),
        };
        Ok(serde_json::to_string_pretty(&schema)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let schema: CodebookSchema =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("codebook: {e}")))?;
        if schema.codewords.is_empty() {
            return Err(Error::Config("codebook has no codewords".into()));
        }
        Ok(Codebook {
            n: schema.n,
            gamma: schema.gamma,
            alpha: schema.alpha,
            lambda_n: schema.lambda_n,
            guaranteed: schema.lambda_n < 1.0,
            codewords: schema.codewords,
            regions: schema.regions,
        })
    }
}
