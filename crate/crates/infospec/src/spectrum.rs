//! Information, entropy, and divergence densities and their distributions.
//!
//! A [`Spectrum`] is the exact (or empirical) distribution of the normalized
//! information density `Z_ns = (1/n) ln[p_s(y^n|x^n) / p_s(y^n)]`. For
//! memoryless states under product inputs the density is a sum of independent
//! per-symbol terms, so the spectrum is computed by convolution; everything
//! else falls back to exhaustive enumeration under the table cap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{check_pair_cap, Alphabet, DEFAULT_ENUMERATION_CAP};
use crate::channel::{ChannelState, PROB_TOL};
use crate::error::{Error, Result};
use crate::input::InputProcess;

/// Absolute tolerance for treating two density values as the same atom.
pub const VALUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SpectrumMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// One atom of a density distribution, in nats per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAtom {
    pub value: f64,
    pub probability: f64,
}

/// The finite distribution of a normalized density at blocklength `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub n: usize,
    pub state_id: String,
    pub atoms: Vec<SpectrumAtom>,
    #[serde(flatten)]
    pub mode: SpectrumMode,
}

impl Spectrum {
    /// Sorts, merges atoms whose values agree within [`VALUE_TOL`] (weighted
    /// mean value), and checks normalization and finiteness.
    pub fn from_raw_atoms(
        n: usize,
        state_id: impl Into<String>,
        mode: SpectrumMode,
        mut raw: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let state_id = state_id.into();
        if raw.iter().any(|&(v, p)| !v.is_finite() || !p.is_finite()) {
            return Err(Error::Invariant(format!(
                "non-finite spectrum atom for state {state_id} at n={n}"
            )));
        }
        raw.retain(|&(_, p)| p > 0.0);
        if raw.is_empty() {
            return Err(Error::Invariant(format!(
                "empty spectrum for state {state_id} at n={n}"
            )));
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<SpectrumAtom> = Vec::new();
        let mut cluster_v = raw[0].0;
        let mut cluster_wv = 0.0f64;
        let mut cluster_w = 0.0f64;
        for (v, p) in raw {
            if v - cluster_v > VALUE_TOL && cluster_w > 0.0 {
                atoms.push(SpectrumAtom {
                    value: cluster_wv / cluster_w,
                    probability: cluster_w,
                });
                cluster_wv = 0.0;
                cluster_w = 0.0;
            }
            cluster_v = v;
            cluster_wv += v * p;
            cluster_w += p;
        }
        atoms.push(SpectrumAtom {
            value: cluster_wv / cluster_w,
            probability: cluster_w,
        });
        let total: f64 = atoms.iter().map(|a| a.probability).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Invariant(format!(
                "spectrum for state {state_id} at n={n} has total mass {total}"
            )));
        }
        Ok(Spectrum {
            n,
            state_id,
            atoms,
            mode,
        })
    }

    /// A spectrum given directly by its atoms, for synthetic sequence families.
    pub fn synthetic(n: usize, state_id: impl Into<String>, atoms: &[(f64, f64)]) -> Result<Self> {
        Spectrum::from_raw_atoms(n, state_id, SpectrumMode::Exact, atoms.to_vec())
    }

    /// Closed CDF `Pr{Z <= r}`; atoms within [`VALUE_TOL`] of `r` count.
    pub fn cdf(&self, r: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value <= r + VALUE_TOL)
            .map(|a| a.probability)
            .sum()
    }

    /// Strictly-below CDF `Pr{Z < r}`; atoms within [`VALUE_TOL`] of `r` do
    /// not count.
    pub fn cdf_below(&self, r: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value < r - VALUE_TOL)
            .map(|a| a.probability)
            .sum()
    }

    /// Strict upper tail `Pr{Z > r}`.
    pub fn upper_tail(&self, r: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value > r + VALUE_TOL)
            .map(|a| a.probability)
            .sum()
    }

    pub fn min_value(&self) -> f64 {
        self.atoms.first().map(|a| a.value).unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.atoms.last().map(|a| a.value).unwrap()
    }
}

/// Moments of a spectrum, in nats per symbol.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumStats {
    pub mean: f64,
    pub variance: f64,
}

pub fn spectrum_stats(sp: &Spectrum) -> SpectrumStats {
    let mean: f64 = sp.atoms.iter().map(|a| a.value * a.probability).sum();
    let variance: f64 = sp
        .atoms
        .iter()
        .map(|a| (a.value - mean).powi(2) * a.probability)
        .sum();
    SpectrumStats {
        mean,
        variance: variance.max(0.0),
    }
}

/// `sum over atoms with value <= a of value * probability` (the truncated
/// mutual-information rate).
pub fn truncated_mean(sp: &Spectrum, a: f64) -> f64 {
    sp.atoms
        .iter()
        .filter(|at| at.value <= a + VALUE_TOL)
        .map(|at| at.value * at.probability)
        .sum()
}

fn check_shared_n(spectra: &[Spectrum]) -> Result<usize> {
    let first = spectra
        .first()
        .ok_or_else(|| Error::Usage("need at least one spectrum".into()))?;
    if spectra.iter().any(|sp| sp.n != first.n) {
        return Err(Error::Usage(
            "spectra passed to a compound operator must share the blocklength".into(),
        ));
    }
    Ok(first.n)
}

/// `sup over states of Pr{Z_ns <= R}` (closed inequality).
pub fn compound_cdf(r: f64, spectra: &[Spectrum]) -> Result<f64> {
    check_shared_n(spectra)?;
    Ok(spectra.iter().map(|sp| sp.cdf(r)).fold(0.0, f64::max))
}

/// Strictly-below variant used by quantile estimators.
pub fn compound_cdf_below(r: f64, spectra: &[Spectrum]) -> Result<f64> {
    check_shared_n(spectra)?;
    Ok(spectra.iter().map(|sp| sp.cdf_below(r)).fold(0.0, f64::max))
}

/// `inf over states of Pr{Z_ns > R}` (strict inequality).
pub fn check_tail(r: f64, spectra: &[Spectrum]) -> Result<f64> {
    check_shared_n(spectra)?;
    Ok(spectra
        .iter()
        .map(|sp| sp.upper_tail(r))
        .fold(1.0, f64::min))
}

// --- exact probability plumbing ---------------------------------------------

/// `p_s(y^n)` as a full vector over output-sequence indices.
pub fn output_marginal(
    state: &ChannelState,
    input: &InputProcess,
    n: usize,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
) -> Result<Vec<f64>> {
    input.validate(input_alphabet, n)?;
    let ny_n = output_alphabet.seq_count(n)?;
    let per_symbol = per_symbol_output_marginals(state, input, n, input_alphabet, output_alphabet)?;
    if let Some(marginals) = per_symbol {
        let mut q = vec![1.0f64];
        for dist in &marginals {
            let mut next = vec![0.0f64; q.len() * dist.len()];
            for (j, &p) in q.iter().enumerate() {
                for (y, &py) in dist.iter().enumerate() {
                    next[j * dist.len() + y] = p * py;
                }
            }
            q = next;
        }
        return Ok(q);
    }
    check_pair_cap(
        input_alphabet.size,
        output_alphabet.size,
        n,
        DEFAULT_ENUMERATION_CAP,
        "output marginal",
    )?;
    let mut q = vec![0.0f64; ny_n];
    for (x, px) in input.support_atoms(n, input_alphabet)? {
        let row = state.kernel_row(n, input_alphabet, output_alphabet, x)?;
        for (y, &pyx) in row.iter().enumerate() {
            q[y] += px * pyx;
        }
    }
    Ok(q)
}

/// Per-position output marginals when both the state and the input factor.
fn per_symbol_output_marginals(
    state: &ChannelState,
    input: &InputProcess,
    n: usize,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
) -> Result<Option<Vec<Vec<f64>>>> {
    let kernels = match state.per_symbol_kernels(n, input_alphabet.size, output_alphabet.size)? {
        Some(k) => k,
        None => return Ok(None),
    };
    let per_symbol = match input.per_symbol(n) {
        Some(p) => p,
        None => return Ok(None),
    };
    let marginals = kernels
        .iter()
        .zip(per_symbol.iter())
        .map(|(kernel, px)| {
            let mut q = vec![0.0f64; output_alphabet.size];
            for (x, &p) in px.iter().enumerate() {
                for (y, qy) in q.iter_mut().enumerate() {
                    *qy += p * kernel[x][y];
                }
            }
            q
        })
        .collect();
    Ok(Some(marginals))
}

/// `(1/n) ln[p_s(y^n|x^n) / p_s(y^n)]` for one sequence pair.
pub fn info_density(
    x_seq: &[usize],
    y_seq: &[usize],
    state: &ChannelState,
    input: &InputProcess,
    n: usize,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
) -> Result<f64> {
    if x_seq.len() != n || y_seq.len() != n {
        return Err(Error::Usage(format!(
            "sequence lengths must equal n={n}"
        )));
    }
    input.validate(input_alphabet, n)?;
    let x = input_alphabet.encode(x_seq);
    let y = output_alphabet.encode(y_seq);
    let px = input.prob(x, n, input_alphabet);
    if px <= 0.0 {
        return Err(Error::Domain(format!(
            "input sequence {x_seq:?} has zero probability"
        )));
    }
    let pyx = state.kernel_row(n, input_alphabet, output_alphabet, x)?[y];
    if pyx <= 0.0 {
        return Err(Error::Domain(format!(
            "output sequence {y_seq:?} has zero probability given {x_seq:?}"
        )));
    }
    let q = output_marginal(state, input, n, input_alphabet, output_alphabet)?[y];
    if q <= 0.0 {
        return Err(Error::Domain(format!(
            "output sequence {y_seq:?} has zero marginal probability"
        )));
    }
    Ok((pyx.ln() - q.ln()) / n as f64)
}

/// `-(1/n) ln p(x^n)`.
pub fn entropy_density(
    x_seq: &[usize],
    input: &InputProcess,
    n: usize,
    alphabet: Alphabet,
) -> Result<f64> {
    if x_seq.len() != n {
        return Err(Error::Usage(format!("sequence length must equal n={n}")));
    }
    input.validate(alphabet, n)?;
    let p = input.prob(alphabet.encode(x_seq), n, alphabet);
    if p <= 0.0 {
        return Err(Error::Domain(format!(
            "sequence {x_seq:?} has zero probability"
        )));
    }
    Ok(-p.ln() / n as f64)
}

/// `(1/n) ln[p(x^n) / q(x^n)]`.
pub fn divergence_density(
    x_seq: &[usize],
    p: &InputProcess,
    q: &InputProcess,
    n: usize,
    alphabet: Alphabet,
) -> Result<f64> {
    if x_seq.len() != n {
        return Err(Error::Usage(format!("sequence length must equal n={n}")));
    }
    p.validate(alphabet, n)?;
    q.validate(alphabet, n)?;
    let idx = alphabet.encode(x_seq);
    let pp = p.prob(idx, n, alphabet);
    let qq = q.prob(idx, n, alphabet);
    if pp <= 0.0 || qq <= 0.0 {
        return Err(Error::Domain(format!(
            "sequence {x_seq:?} has zero probability under p or q"
        )));
    }
    Ok((pp.ln() - qq.ln()) / n as f64)
}

// --- exact spectra -----------------------------------------------------------

fn convolve(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(a.len() * b.len());
    for &(va, pa) in a {
        for &(vb, pb) in b {
            out.push((va + vb, pa * pb));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (v, p) in out {
        match merged.last_mut() {
            Some(last) if v - last.0 <= VALUE_TOL => last.1 += p,
            _ => merged.push((v, p)),
        }
    }
    merged
}

/// The exact distribution of the normalized information density.
pub fn spectrum_exact(
    n: usize,
    state: &ChannelState,
    input: &InputProcess,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Usage("blocklength must be at least 1".into()));
    }
    input.validate(input_alphabet, n)?;
    let kernels = state.per_symbol_kernels(n, input_alphabet.size, output_alphabet.size)?;
    let per_symbol = input.per_symbol(n);
    if let (Some(kernels), Some(per_symbol)) = (kernels, per_symbol) {
        // Convolution path: the density is a sum of independent per-position
        // terms ln K_k(y|x) - ln q_k(y).
        let mut dist: Vec<(f64, f64)> = vec![(0.0, 1.0)];
        for (kernel, px) in kernels.iter().zip(per_symbol.iter()) {
            let mut q = vec![0.0f64; output_alphabet.size];
            for (x, &p) in px.iter().enumerate() {
                for (y, qy) in q.iter_mut().enumerate() {
                    *qy += p * kernel[x][y];
                }
            }
            let mut atoms: Vec<(f64, f64)> = Vec::new();
            for (x, &p) in px.iter().enumerate() {
                for y in 0..output_alphabet.size {
                    let w = p * kernel[x][y];
                    if w > 0.0 {
                        atoms.push((kernel[x][y].ln() - q[y].ln(), w));
                    }
                }
            }
            dist = convolve(&dist, &atoms);
        }
        let raw = dist
            .into_iter()
            .map(|(v, p)| (v / n as f64, p))
            .collect();
        return Spectrum::from_raw_atoms(n, state.id.clone(), SpectrumMode::Exact, raw);
    }
    check_pair_cap(
        input_alphabet.size,
        output_alphabet.size,
        n,
        DEFAULT_ENUMERATION_CAP,
        &format!("exact spectrum for state {}", state.id),
    )?;
    let q = output_marginal(state, input, n, input_alphabet, output_alphabet)?;
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for (x, px) in input.support_atoms(n, input_alphabet)? {
        let row = state.kernel_row(n, input_alphabet, output_alphabet, x)?;
        for (y, &pyx) in row.iter().enumerate() {
            let w = px * pyx;
            if w > 0.0 {
                raw.push(((pyx.ln() - q[y].ln()) / n as f64, w));
            }
        }
    }
    Spectrum::from_raw_atoms(n, state.id.clone(), SpectrumMode::Exact, raw)
}

// --- Monte Carlo spectra ------------------------------------------------------

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives an independent stream seed per (state, purpose) so that adding
/// states to a family does not perturb the samples drawn for other states.
pub fn derive_seed(seed: u64, state_id: &str, purpose: &str) -> u64 {
    splitmix64(seed ^ fnv1a(state_id.as_bytes()) ^ fnv1a(purpose.as_bytes()))
}

fn sample_discrete(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Empirical spectrum from iid draws `(x^n ~ input, y^n ~ kernel)`, with the
/// density evaluated exactly for each drawn pair.
pub fn spectrum_mc(
    n: usize,
    state: &ChannelState,
    input: &InputProcess,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
    samples: u64,
    seed: u64,
) -> Result<Spectrum> {
    if samples == 0 {
        return Err(Error::Usage("samples must be at least 1".into()));
    }
    input.validate(input_alphabet, n)?;
    if !state.has_sampler() {
        return Err(Error::Unsupported(format!(
            "state {} has no per-symbol sampler; use spectrum_exact",
            state.id
        )));
    }
    let kernels = state
        .per_symbol_kernels(n, input_alphabet.size, output_alphabet.size)?
        .expect("sampler-capable kinds factor per symbol");
    // Output-marginal evaluator: factorized per position when the input is a
    // product; otherwise a sum over the input's support atoms.
    let q_marginals = per_symbol_output_marginals(state, input, n, input_alphabet, output_alphabet)?;
    let support = match q_marginals {
        Some(_) => Vec::new(),
        None => input.support_atoms(n, input_alphabet)?,
    };
    let input_per_symbol = input.per_symbol(n);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &state.id, "spectrum-mc"));
    let mut values: Vec<f64> = Vec::with_capacity(samples as usize);
    let mut x_syms = vec![0usize; n];
    let mut y_syms = vec![0usize; n];
    for _ in 0..samples {
        match &input_per_symbol {
            Some(dists) => {
                for (k, dist) in dists.iter().enumerate() {
                    x_syms[k] = sample_discrete(&mut rng, dist);
                }
            }
            None => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = support.last().map(|&(i, _)| i).unwrap();
                for &(i, p) in &support {
                    acc += p;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                for k in 0..n {
                    x_syms[k] = input_alphabet.symbol_at(chosen, n, k);
                }
            }
        }
        let mut ln_pyx = 0.0f64;
        for k in 0..n {
            y_syms[k] = sample_discrete(&mut rng, &kernels[k][x_syms[k]]);
            ln_pyx += kernels[k][x_syms[k]][y_syms[k]].ln();
        }
        let ln_q = match &q_marginals {
            Some(qs) => (0..n).map(|k| qs[k][y_syms[k]].ln()).sum::<f64>(),
            None => {
                let mut q = 0.0f64;
                for &(xi, px) in &support {
                    let mut p = px;
                    for k in 0..n {
                        p *= kernels[k][input_alphabet.symbol_at(xi, n, k)][y_syms[k]];
                    }
                    q += p;
                }
                q.ln()
            }
        };
        let z = (ln_pyx - ln_q) / n as f64;
        if !z.is_finite() {
            return Err(Error::Invariant(format!(
                "non-finite sampled density for state {}",
                state.id
            )));
        }
        values.push(z);
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let mut raw: Vec<(f64, f64)> = Vec::new();
    let weight = 1.0 / samples as f64;
    for v in values {
        match raw.last_mut() {
            Some(last) if v - last.0 <= VALUE_TOL => last.1 += weight,
            _ => raw.push((v, weight)),
        }
    }
    Spectrum::from_raw_atoms(
        n,
        state.id.clone(),
        SpectrumMode::MonteCarlo { samples, seed },
        raw,
    )
}

/// The exact distribution of the entropy density `-(1/n) ln p(x^n)`.
pub fn entropy_spectrum(
    n: usize,
    input: &InputProcess,
    alphabet: Alphabet,
    label: &str,
) -> Result<Spectrum> {
    input.validate(alphabet, n)?;
    if let Some(per_symbol) = input.per_symbol(n) {
        let mut dist: Vec<(f64, f64)> = vec![(0.0, 1.0)];
        for px in &per_symbol {
            let atoms: Vec<(f64, f64)> = px
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| (-p.ln(), p))
                .collect();
            dist = convolve(&dist, &atoms);
        }
        let raw = dist.into_iter().map(|(v, p)| (v / n as f64, p)).collect();
        return Spectrum::from_raw_atoms(n, label, SpectrumMode::Exact, raw);
    }
    let raw = input
        .support_atoms(n, alphabet)?
        .into_iter()
        .map(|(_, p)| (-p.ln() / n as f64, p))
        .collect();
    Spectrum::from_raw_atoms(n, label, SpectrumMode::Exact, raw)
}

/// The exact distribution (under `p`) of the divergence density
/// `(1/n) ln[p(x^n)/q(x^n)]`.
pub fn divergence_spectrum(
    n: usize,
    p: &InputProcess,
    q: &InputProcess,
    alphabet: Alphabet,
    label: &str,
) -> Result<Spectrum> {
    p.validate(alphabet, n)?;
    q.validate(alphabet, n)?;
    if let (Some(pk), Some(qk)) = (p.per_symbol(n), q.per_symbol(n)) {
        let mut dist: Vec<(f64, f64)> = vec![(0.0, 1.0)];
        for (pd, qd) in pk.iter().zip(qk.iter()) {
            let mut atoms: Vec<(f64, f64)> = Vec::new();
            for (x, &pp) in pd.iter().enumerate() {
                if pp > 0.0 {
                    if qd[x] <= 0.0 {
                        return Err(Error::Domain(
                            "support of p is not contained in support of q".into(),
                        ));
                    }
                    atoms.push((pp.ln() - qd[x].ln(), pp));
                }
            }
            dist = convolve(&dist, &atoms);
        }
        let raw = dist.into_iter().map(|(v, pr)| (v / n as f64, pr)).collect();
        return Spectrum::from_raw_atoms(n, label, SpectrumMode::Exact, raw);
    }
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for (idx, pp) in p.support_atoms(n, alphabet)? {
        let qq = q.prob(idx, n, alphabet);
        if qq <= 0.0 {
            return Err(Error::Domain(
                "support of p is not contained in support of q".into(),
            ));
        }
        raw.push(((pp.ln() - qq.ln()) / n as f64, pp));
    }
    Spectrum::from_raw_atoms(n, label, SpectrumMode::Exact, raw)
}
