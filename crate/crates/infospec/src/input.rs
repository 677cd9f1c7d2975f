//! Input processes over length-n sequence spaces.
//!
//! Product-form inputs keep a per-symbol description so the spectrum code can
//! stay on the cheap convolution path; the general forms carry an explicit
//! distribution over sequence indices.

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::channel::PROB_TOL;
use crate::error::{Error, Result};

/// A distribution over input sequences of a given blocklength.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputProcess {
    /// The same per-symbol distribution at every position.
    Iid { probs: Vec<f64> },
    /// Independent symbols with position-dependent distributions; the last
    /// listed distribution repeats for positions beyond the list.
    ProductPerSymbol { per_position: Vec<Vec<f64>> },
    /// Uniform over an explicit list of sequence indices at blocklength `n`.
    UniformOverCodebook { n: usize, indices: Vec<usize> },
    /// Explicit distribution over all `N_x^n` sequence indices.
    Explicit { n: usize, probs: Vec<f64> },
}

fn check_simplex(probs: &[f64], size: usize, what: &str) -> Result<()> {
    if probs.len() != size {
        return Err(Error::Config(format!(
            "{what}: expected {size} probabilities, got {}",
            probs.len()
        )));
    }
    if probs.iter().any(|&p| !(0.0..=1.0 + PROB_TOL).contains(&p)) {
        return Err(Error::Config(format!("{what}: probability outside [0,1]")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::Config(format!(
            "{what}: probabilities sum to {sum}, not 1"
        )));
    }
    Ok(())
}

impl InputProcess {
    pub fn iid_uniform(alphabet: Alphabet) -> Self {
        InputProcess::Iid {
            probs: vec![1.0 / alphabet.size as f64; alphabet.size],
        }
    }

    /// Point mass on one symbol, repeated at every position.
    pub fn iid_delta(symbol: usize, alphabet: Alphabet) -> Self {
        let mut probs = vec![0.0; alphabet.size];
        probs[symbol] = 1.0;
        InputProcess::Iid { probs }
    }

    pub fn validate(&self, alphabet: Alphabet, n: usize) -> Result<()> {
        match self {
            InputProcess::Iid { probs } => check_simplex(probs, alphabet.size, "iid input"),
            InputProcess::ProductPerSymbol { per_position } => {
                if per_position.is_empty() {
                    return Err(Error::Config(
                        "product input needs at least one per-position distribution".into(),
                    ));
                }
                for (k, probs) in per_position.iter().enumerate() {
                    check_simplex(probs, alphabet.size, &format!("product input, position {k}"))?;
                }
                Ok(())
            }
            InputProcess::UniformOverCodebook { n: cb_n, indices } => {
                if *cb_n != n {
                    return Err(Error::Usage(format!(
                        "codebook input is for n={cb_n}, requested n={n}"
                    )));
                }
                if indices.is_empty() {
                    return Err(Error::Config("codebook input has no codewords".into()));
                }
                let count = alphabet.seq_count(n)?;
                if indices.iter().any(|&i| i >= count) {
                    return Err(Error::Config(
                        "codebook input contains an out-of-range sequence index".into(),
                    ));
                }
                Ok(())
            }
            InputProcess::Explicit { n: ex_n, probs } => {
                if *ex_n != n {
                    return Err(Error::Usage(format!(
                        "explicit input is for n={ex_n}, requested n={n}"
                    )));
                }
                let count = alphabet.seq_count(n)?;
                check_simplex(probs, count, "explicit input")
            }
        }
    }

    /// Per-position symbol distributions at blocklength `n`, or `None` when
    /// the input is not in product form.
    pub fn per_symbol(&self, n: usize) -> Option<Vec<Vec<f64>>> {
        match self {
            InputProcess::Iid { probs } => Some(vec![probs.clone(); n]),
            InputProcess::ProductPerSymbol { per_position } => Some(
                (0..n)
                    .map(|k| per_position[k.min(per_position.len() - 1)].clone())
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Probability of the input sequence with the given index.
    pub fn prob(&self, x_index: usize, n: usize, alphabet: Alphabet) -> f64 {
        match self {
            InputProcess::Iid { .. } | InputProcess::ProductPerSymbol { .. } => {
                let per_symbol = self.per_symbol(n).unwrap();
                let mut p = 1.0;
                for (k, dist) in per_symbol.iter().enumerate() {
                    p *= dist[alphabet.symbol_at(x_index, n, k)];
                }
                p
            }
            InputProcess::UniformOverCodebook { indices, .. } => {
                let hits = indices.iter().filter(|&&i| i == x_index).count();
                hits as f64 / indices.len() as f64
            }
            InputProcess::Explicit { probs, .. } => probs.get(x_index).copied().unwrap_or(0.0),
        }
    }

    /// The support as `(sequence index, probability)` atoms. For codebook
    /// inputs this never touches the full sequence space.
    pub fn support_atoms(&self, n: usize, alphabet: Alphabet) -> Result<Vec<(usize, f64)>> {
        match self {
            InputProcess::UniformOverCodebook { indices, .. } => {
                let p = 1.0 / indices.len() as f64;
                Ok(indices.iter().map(|&i| (i, p)).collect())
            }
            InputProcess::Explicit { probs, .. } => Ok(probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, &p)| (i, p))
                .collect()),
            _ => {
                let count = alphabet.seq_count(n)?;
                Ok((0..count)
                    .map(|i| (i, self.prob(i, n, alphabet)))
                    .filter(|&(_, p)| p > 0.0)
                    .collect())
            }
        }
    }
}
