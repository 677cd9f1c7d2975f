//! State-indexed channel kernels over length-n sequence spaces.
//!
//! Every built-in kind except `explicit-block` factors into per-symbol
//! kernels at each blocklength, which is what makes exact spectra cheap.
//! No consistency across blocklengths is assumed: each kind defines its
//! kernel independently for every `n`.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::alphabet::{check_pair_cap, Alphabet, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};

/// Row-sum / normalization tolerance used throughout.
pub const PROB_TOL: f64 = 1e-12;

/// A per-symbol kernel: `kernel[x][y]` is the transition probability.
pub type SymbolKernel = Vec<Vec<f64>>;

fn bsc_kernel(q: f64) -> SymbolKernel {
    vec![vec![1.0 - q, q], vec![q, 1.0 - q]]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorylessStationaryParams {
    pub kernel: SymbolKernel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorylessTimeVaryingParams {
    /// Kernel for position `k` is `kernels[min(k, kernels.len() - 1)]`.
    pub kernels: Vec<SymbolKernel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceParams {
    /// Coherence horizon: the whole block is BSC(q1) while `n <= s`.
    pub s: usize,
    pub q1: f64,
    pub q2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdditivePrefixNoiseParams {
    /// The first `s` symbols see equiprobable additive noise, the rest none.
    pub s: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitBlockParams {
    /// Full block tables keyed by the blocklength (as a decimal string).
    pub tables: BTreeMap<String, Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterministicShiftParams {
    /// `y_k = x_k XOR theta_k`; bits beyond the list are zero.
    pub theta_bits: Vec<u8>,
}

/// The channel kinds the library knows how to expand into block kernels.
#[derive(Debug, Clone)]
pub enum ChannelKind {
    MemorylessStationary(MemorylessStationaryParams),
    MemorylessTimeVarying(MemorylessTimeVaryingParams),
    Coherence(CoherenceParams),
    AdditivePrefixNoise(AdditivePrefixNoiseParams),
    ExplicitBlock(ExplicitBlockParams),
    DeterministicShift(DeterministicShiftParams),
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::MemorylessStationary(_) => "memoryless-stationary",
            ChannelKind::MemorylessTimeVarying(_) => "memoryless-time-varying",
            ChannelKind::Coherence(_) => "coherence",
            ChannelKind::AdditivePrefixNoise(_) => "additive-prefix-noise",
            ChannelKind::ExplicitBlock(_) => "explicit-block",
            ChannelKind::DeterministicShift(_) => "deterministic-shift",
        }
    }
}

/// One member of the uncertainty set.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub id: String,
    pub kind: ChannelKind,
}

impl ChannelState {
    pub fn memoryless(id: impl Into<String>, kernel: SymbolKernel) -> Self {
        ChannelState {
            id: id.into(),
            kind: ChannelKind::MemorylessStationary(MemorylessStationaryParams { kernel }),
        }
    }

    /// Binary symmetric channel with crossover probability `q`.
    pub fn bsc(id: impl Into<String>, q: f64) -> Self {
        Self::memoryless(id, bsc_kernel(q))
    }

    pub fn coherence(id: impl Into<String>, s: usize, q1: f64, q2: f64) -> Self {
        ChannelState {
            id: id.into(),
            kind: ChannelKind::Coherence(CoherenceParams { s, q1, q2 }),
        }
    }

    /// Blocklengths up to which this state may still look degenerate
    /// regardless of `n`-independent behaviour (coherence horizon). Zero for
    /// kinds whose behaviour does not switch with `n`.
    pub fn activation_horizon(&self) -> usize {
        match &self.kind {
            ChannelKind::Coherence(p) => p.s,
            ChannelKind::AdditivePrefixNoise(p) => p.s,
            _ => 0,
        }
    }

    /// Per-symbol kernels at blocklength `n`, or `None` for kinds that only
    /// exist as explicit block tables.
    pub fn per_symbol_kernels(
        &self,
        n: usize,
        nx: usize,
        ny: usize,
    ) -> Result<Option<Vec<SymbolKernel>>> {
        let require_binary = |what: &str| -> Result<()> {
            if nx != 2 || ny != 2 {
                return Err(Error::Config(format!(
                    "{what} states require binary alphabets, got {nx}x{ny}"
                )));
            }
            Ok(())
        };
        let kernels = match &self.kind {
            ChannelKind::MemorylessStationary(p) => {
                check_kernel_shape(&p.kernel, nx, ny, &self.id)?;
                vec![p.kernel.clone(); n]
            }
            ChannelKind::MemorylessTimeVarying(p) => {
                if p.kernels.is_empty() {
                    return Err(Error::Config(format!(
                        "state {}: memoryless-time-varying needs at least one kernel",
                        self.id
                    )));
                }
                for k in &p.kernels {
                    check_kernel_shape(k, nx, ny, &self.id)?;
                }
                (0..n)
                    .map(|k| p.kernels[k.min(p.kernels.len() - 1)].clone())
                    .collect()
            }
            ChannelKind::Coherence(p) => {
                require_binary("coherence")?;
                let q = if n <= p.s { p.q1 } else { p.q2 };
                vec![bsc_kernel(q); n]
            }
            ChannelKind::AdditivePrefixNoise(p) => {
                require_binary("additive-prefix-noise")?;
                (0..n)
                    .map(|k| {
                        if k < p.s {
                            bsc_kernel(0.5)
                        } else {
                            bsc_kernel(0.0)
                        }
                    })
                    .collect()
            }
            ChannelKind::DeterministicShift(p) => {
                require_binary("deterministic-shift")?;
                (0..n)
                    .map(|k| {
                        let theta = p.theta_bits.get(k).copied().unwrap_or(0);
                        bsc_kernel(if theta == 1 { 1.0 } else { 0.0 })
                    })
                    .collect()
            }
            ChannelKind::ExplicitBlock(_) => return Ok(None),
        };
        Ok(Some(kernels))
    }

    /// One row of the block kernel: the distribution of `y^n` given the input
    /// sequence with index `x_index`. Factorizable kinds expand the tensor
    /// product without materializing the whole table.
    pub fn kernel_row(
        &self,
        n: usize,
        input_alphabet: Alphabet,
        output_alphabet: Alphabet,
        x_index: usize,
    ) -> Result<Vec<f64>> {
        let nx = input_alphabet.size;
        let ny = output_alphabet.size;
        match self.per_symbol_kernels(n, nx, ny)? {
            Some(kernels) => {
                let mut row = vec![1.0f64];
                for (k, kernel) in kernels.iter().enumerate() {
                    let x_k = input_alphabet.symbol_at(x_index, n, k);
                    let mut next = vec![0.0f64; row.len() * ny];
                    for (j, &p) in row.iter().enumerate() {
                        for y in 0..ny {
                            next[j * ny + y] = p * kernel[x_k][y];
                        }
                    }
                    row = next;
                }
                Ok(row)
            }
            None => {
                let table = self.explicit_table(n)?;
                table
                    .get(x_index)
                    .cloned()
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "state {}: explicit table at n={n} has no row {x_index}",
                            self.id
                        ))
                    })
            }
        }
    }

    fn explicit_table(&self, n: usize) -> Result<&Vec<Vec<f64>>> {
        match &self.kind {
            ChannelKind::ExplicitBlock(p) => {
                p.tables.get(&n.to_string()).ok_or_else(|| {
                    Error::Config(format!(
                        "state {}: explicit-block kernel has no table for n={n}",
                        self.id
                    ))
                })
            }
            _ => Err(Error::Config(format!(
                "state {} is not explicit-block",
                self.id
            ))),
        }
    }

    /// Whether `spectrum_mc` can sample this kind symbol by symbol.
    pub fn has_sampler(&self) -> bool {
        !matches!(self.kind, ChannelKind::ExplicitBlock(_))
    }
}

fn check_kernel_shape(kernel: &SymbolKernel, nx: usize, ny: usize, id: &str) -> Result<()> {
    if kernel.len() != nx || kernel.iter().any(|row| row.len() != ny) {
        return Err(Error::Config(format!(
            "state {id}: per-symbol kernel must be {nx}x{ny}"
        )));
    }
    Ok(())
}

/// Template from which a truncation rule manufactures states at each `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateTemplate {
    Coherence { q1: f64, q2: f64 },
    AdditivePrefixNoise,
}

/// How far the generated parameter `s` runs at blocklength `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SMaxRule {
    /// `s` runs over `1..=n`.
    EqualsN(String),
    /// `s` runs over `1..=value` independent of `n`.
    Fixed(usize),
}

impl SMaxRule {
    pub fn s_max(&self, n: usize) -> Result<usize> {
        match self {
            SMaxRule::EqualsN(tag) if tag == "n" => Ok(n),
            SMaxRule::EqualsN(tag) => Err(Error::Config(format!(
                "unknown s_max rule {tag:?}; expected \"n\" or an integer"
            ))),
            SMaxRule::Fixed(v) => Ok(*v),
        }
    }
}

/// Finite-per-n representation of an unbounded uncertainty set: at every
/// blocklength the family contains the explicit states plus template states
/// for `s` in `1..=s_max(n)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationRule {
    pub template: StateTemplate,
    pub s_max: SMaxRule,
}

impl TruncationRule {
    pub fn states_at(&self, n: usize) -> Result<Vec<ChannelState>> {
        let s_max = self.s_max.s_max(n)?;
        Ok((1..=s_max)
            .map(|s| match &self.template {
                StateTemplate::Coherence { q1, q2 } => ChannelState {
                    id: format!("coh-{s}"),
                    kind: ChannelKind::Coherence(CoherenceParams {
                        s,
                        q1: *q1,
                        q2: *q2,
                    }),
                },
                StateTemplate::AdditivePrefixNoise => ChannelState {
                    id: format!("prefix-{s}"),
                    kind: ChannelKind::AdditivePrefixNoise(AdditivePrefixNoiseParams { s }),
                },
            })
            .collect())
    }
}

/// The uncertainty set: shared alphabets plus an ordered list of states,
/// optionally extended per blocklength by a truncation rule.
#[derive(Debug, Clone)]
pub struct ChannelFamily {
    pub input_alphabet: Alphabet,
    pub output_alphabet: Alphabet,
    pub states: Vec<ChannelState>,
    pub truncation_rule: Option<TruncationRule>,
}

impl ChannelFamily {
    pub fn new(
        input_alphabet: Alphabet,
        output_alphabet: Alphabet,
        states: Vec<ChannelState>,
    ) -> Result<Self> {
        let family = ChannelFamily {
            input_alphabet,
            output_alphabet,
            states,
            truncation_rule: None,
        };
        family.check_ids()?;
        Ok(family)
    }

    fn check_ids(&self) -> Result<()> {
        if self.states.is_empty() && self.truncation_rule.is_none() {
            return Err(Error::Config("channel family has no states".into()));
        }
        let mut seen = HashSet::new();
        for st in &self.states {
            if !seen.insert(st.id.as_str()) {
                return Err(Error::Config(format!("duplicate state id {:?}", st.id)));
            }
        }
        Ok(())
    }

    /// The effective state list at blocklength `n`.
    pub fn states_at(&self, n: usize) -> Result<Vec<ChannelState>> {
        let mut states = self.states.clone();
        if let Some(rule) = &self.truncation_rule {
            states.extend(rule.states_at(n)?);
        }
        let mut seen = HashSet::new();
        for st in &states {
            if !seen.insert(st.id.clone()) {
                return Err(Error::Config(format!(
                    "duplicate state id {:?} after truncation-rule expansion",
                    st.id
                )));
            }
        }
        if states.is_empty() {
            return Err(Error::Config(format!("family has no states at n={n}")));
        }
        Ok(states)
    }

    pub fn state(&self, id: &str) -> Result<&ChannelState> {
        self.states
            .iter()
            .find(|st| st.id == id)
            .ok_or_else(|| Error::Usage(format!("unknown state id {id:?}")))
    }
}

/// Full block transition table `p_s(y^n | x^n)`: rows indexed by input
/// sequence, columns by output sequence.
pub fn block_kernel(
    state: &ChannelState,
    n: usize,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Usage("blocklength must be at least 1".into()));
    }
    check_pair_cap(
        input_alphabet.size,
        output_alphabet.size,
        n,
        DEFAULT_ENUMERATION_CAP,
        &format!("block kernel for state {}", state.id),
    )?;
    let rows = input_alphabet.seq_count(n)?;
    (0..rows)
        .map(|x| state.kernel_row(n, input_alphabet, output_alphabet, x))
        .collect()
}

/// One validation entry per (state, blocklength).
#[derive(Debug, Clone, Serialize)]
pub struct ValidationEntry {
    pub state_id: String,
    pub n: usize,
    pub max_row_sum_deviation: f64,
    pub min_entry: f64,
    pub max_entry: f64,
    /// For memoryless kinds at small n: worst absolute mismatch between the
    /// table entry and an independently recomputed per-symbol product.
    pub factorization_deviation: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub entries: Vec<ValidationEntry>,
}

/// Checks row normalization, entry range, and (for factorizable kinds at
/// `n <= 4`) the product structure of the block kernel.
pub fn validate(family: &ChannelFamily, n_list: &[usize]) -> Result<ValidationReport> {
    let mut entries = Vec::new();
    let mut pass = true;
    for &n in n_list {
        for state in family.states_at(n)? {
            let entry = validate_state(&state, n, family.input_alphabet, family.output_alphabet);
            let entry = match entry {
                Ok(e) => e,
                Err(err) => ValidationEntry {
                    state_id: state.id.clone(),
                    n,
                    max_row_sum_deviation: f64::NAN,
                    min_entry: f64::NAN,
                    max_entry: f64::NAN,
                    factorization_deviation: None,
                    failure: Some(err.to_string()),
                },
            };
            if entry.failure.is_some() {
                pass = false;
            }
            entries.push(entry);
        }
    }
    Ok(ValidationReport { pass, entries })
}

fn validate_state(
    state: &ChannelState,
    n: usize,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
) -> Result<ValidationEntry> {
    let rows = input_alphabet.seq_count(n)?;
    let cols = output_alphabet.seq_count(n)?;
    check_pair_cap(
        input_alphabet.size,
        output_alphabet.size,
        n,
        DEFAULT_ENUMERATION_CAP,
        &format!("validation of state {}", state.id),
    )?;
    let mut max_dev = 0.0f64;
    let mut min_entry = f64::INFINITY;
    let mut max_entry = f64::NEG_INFINITY;
    let mut failure: Option<String> = None;
    let kernels = state.per_symbol_kernels(n, input_alphabet.size, output_alphabet.size)?;
    let mut factorization_deviation = kernels.as_ref().and(Some(0.0f64));
    for x in 0..rows {
        let row = state.kernel_row(n, input_alphabet, output_alphabet, x)?;
        if row.len() != cols {
            failure = Some(format!("state {} row {x}: wrong width {}", state.id, row.len()));
            break;
        }
        let sum: f64 = row.iter().sum();
        let dev = (sum - 1.0).abs();
        if dev > max_dev {
            max_dev = dev;
        }
        for &p in &row {
            min_entry = min_entry.min(p);
            max_entry = max_entry.max(p);
        }
        if dev > PROB_TOL && failure.is_none() {
            failure = Some(format!(
                "state {} row {x} at n={n}: row sum deviates by {dev:.3e}",
                state.id
            ));
        }
        // Independent recomputation of the product structure, symbol by symbol.
        if n <= 4 {
            if let Some(kernels) = &kernels {
                let mut worst = factorization_deviation.unwrap_or(0.0);
                for (y, &p) in row.iter().enumerate() {
                    let mut prod = 1.0f64;
                    for (k, kernel) in kernels.iter().enumerate() {
                        let x_k = input_alphabet.symbol_at(x, n, k);
                        let y_k = output_alphabet.symbol_at(y, n, k);
                        prod *= kernel[x_k][y_k];
                    }
                    worst = worst.max((prod - p).abs());
                }
                factorization_deviation = Some(worst);
                if worst > PROB_TOL && failure.is_none() {
                    failure = Some(format!(
                        "state {} at n={n}: factorization mismatch {worst:.3e}",
                        state.id
                    ));
                }
            }
        }
    }
    if failure.is_none() && (min_entry < -PROB_TOL || max_entry > 1.0 + PROB_TOL) {
        failure = Some(format!(
            "state {} at n={n}: kernel entry outside [0,1]",
            state.id
        ));
    }
    Ok(ValidationEntry {
        state_id: state.id.clone(),
        n,
        max_row_sum_deviation: max_dev,
        min_entry,
        max_entry,
        factorization_deviation,
        failure,
    })
}

// --- JSON channel-family spec ------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSpec {
    id: String,
    kind: String,
    params: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilySpec {
    input_alphabet: usize,
    output_alphabet: usize,
    states: Vec<StateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation_rule: Option<TruncationRule>,
}

impl ChannelFamily {
    pub fn from_json(json: &str) -> Result<Self> {
        let spec: FamilySpec =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("family spec: {e}")))?;
        let input_alphabet = Alphabet::new(spec.input_alphabet)?;
        let output_alphabet = Alphabet::new(spec.output_alphabet)?;
        let states = spec
            .states
            .into_iter()
            .map(|st| {
                let kind = parse_kind(&st.kind, st.params)
                    .map_err(|e| Error::Config(format!("state {:?}: {e}", st.id)))?;
                Ok(ChannelState { id: st.id, kind })
            })
            .collect::<Result<Vec<_>>>()?;
        let family = ChannelFamily {
            input_alphabet,
            output_alphabet,
            states,
            truncation_rule: spec.truncation_rule,
        };
        family.check_ids()?;
        Ok(family)
    }

    pub fn to_json(&self) -> Result<String> {
        let states = self
            .states
            .iter()
            .map(|st| {
                let params = match &st.kind {
                    ChannelKind::MemorylessStationary(p) => serde_json::to_value(p),
                    ChannelKind::MemorylessTimeVarying(p) => serde_json::to_value(p),
                    ChannelKind::Coherence(p) => serde_json::to_value(p),
                    ChannelKind::AdditivePrefixNoise(p) => serde_json::to_value(p),
                    ChannelKind::ExplicitBlock(p) => serde_json::to_value(p),
                    ChannelKind::DeterministicShift(p) => serde_json::to_value(p),
                }?;
                Ok(StateSpec {
                    id: st.id.clone(),
                    kind: st.kind.name().to_string(),
                    params,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = FamilySpec {
            input_alphabet: self.input_alphabet.size,
            output_alphabet: self.output_alphabet.size,
            states,
            truncation_rule: self.truncation_rule.clone(),
        };
        Ok(serde_json::to_string_pretty(&spec)?)
    }
}

fn parse_kind(kind: &str, params: serde_json::Value) -> Result<ChannelKind> {
    let strict = |e: serde_json::Error| Error::Config(format!("params for kind {kind:?}: {e}"));
    Ok(match kind {
        "memoryless-stationary" => {
            ChannelKind::MemorylessStationary(serde_json::from_value(params).map_err(strict)?)
        }
        "memoryless-time-varying" => {
            ChannelKind::MemorylessTimeVarying(serde_json::from_value(params).map_err(strict)?)
        }
        "coherence" => ChannelKind::Coherence(serde_json::from_value(params).map_err(strict)?),
        "additive-prefix-noise" => {
            ChannelKind::AdditivePrefixNoise(serde_json::from_value(params).map_err(strict)?)
        }
        "explicit-block" => {
            ChannelKind::ExplicitBlock(serde_json::from_value(params).map_err(strict)?)
        }
        "deterministic-shift" => {
            ChannelKind::DeterministicShift(serde_json::from_value(params).map_err(strict)?)
        }
        other => return Err(Error::Config(format!("unknown channel kind {other:?}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: Alphabet = Alphabet { size: 2 };

    #[test]
    fn noiseless_block_kernel_is_identity() {
        let state = ChannelState::bsc("clean", 0.0);
        let table = block_kernel(&state, 2, B, B).unwrap();
        for (x, row) in table.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                assert_eq!(p, if x == y { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn bsc_single_symbol_rows() {
        let state = ChannelState::bsc("bsc", 0.25);
        let table = block_kernel(&state, 1, B, B).unwrap();
        assert_eq!(table, vec![vec![0.75, 0.25], vec![0.25, 0.75]]);
    }

    #[test]
    fn coherence_rows_are_input_independent_inside_horizon() {
        // Example-1 style state with s = 3 at n = 2: every row is the uniform
        // output distribution.
        let state = ChannelState::coherence("coh", 3, 0.5, 0.0);
        let table = block_kernel(&state, 2, B, B).unwrap();
        for row in &table {
            for &p in row {
                assert!((p - 0.25).abs() < PROB_TOL);
            }
        }
        // Past the horizon it becomes the clean BSC(q2) extension.
        let table = block_kernel(&state, 4, B, B).unwrap();
        for (x, row) in table.iter().enumerate() {
            assert_eq!(row[x], 1.0);
        }
    }

    #[test]
    fn validate_passes_well_formed_family() {
        let family = ChannelFamily::new(
            B,
            B,
            vec![ChannelState::bsc("a", 0.1), ChannelState::bsc("b", 0.3)],
        )
        .unwrap();
        let report = validate(&family, &[1, 2, 4]).unwrap();
        assert!(report.pass);
        assert!(report
            .entries
            .iter()
            .all(|e| e.max_row_sum_deviation == 0.0 || e.max_row_sum_deviation < PROB_TOL));
    }

    #[test]
    fn validate_flags_bad_row_sum() {
        let mut tables = BTreeMap::new();
        tables.insert("1".to_string(), vec![vec![0.5, 0.499], vec![0.5, 0.5]]);
        let family = ChannelFamily::new(
            B,
            B,
            vec![ChannelState {
                id: "bad".into(),
                kind: ChannelKind::ExplicitBlock(ExplicitBlockParams { tables }),
            }],
        )
        .unwrap();
        let report = validate(&family, &[1]).unwrap();
        assert!(!report.pass);
        let failure = report.entries[0].failure.as_ref().unwrap();
        assert!(failure.contains("bad"));
        assert!(failure.contains("row 0"));
    }

    #[test]
    fn validate_prefix_noise_family() {
        let family = ChannelFamily::new(
            B,
            B,
            vec![
                ChannelState {
                    id: "p1".into(),
                    kind: ChannelKind::AdditivePrefixNoise(AdditivePrefixNoiseParams { s: 1 }),
                },
                ChannelState {
                    id: "p2".into(),
                    kind: ChannelKind::AdditivePrefixNoise(AdditivePrefixNoiseParams { s: 2 }),
                },
            ],
        )
        .unwrap();
        let report = validate(&family, &[2, 4]).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn family_spec_round_trips_and_rejects_unknown_fields() {
        let json = r#"{
            "input_alphabet": 2,
            "output_alphabet": 2,
            "states": [
                {"id": "s1", "kind": "memoryless-stationary",
                 "params": {"kernel": [[0.75, 0.25], [0.25, 0.75]]}},
                {"id": "s2", "kind": "coherence", "params": {"s": 2, "q1": 0.5, "q2": 0.0}}
            ]
        }"#;
        let family = ChannelFamily::from_json(json).unwrap();
        assert_eq!(family.states.len(), 2);
        let reparsed = ChannelFamily::from_json(&family.to_json().unwrap()).unwrap();
        assert_eq!(reparsed.states[1].activation_horizon(), 2);

        let bad = json.replace("\"q2\": 0.0", "\"q2\": 0.0, \"extra\": 1");
        assert!(ChannelFamily::from_json(&bad).is_err());
        let bad_kind = json.replace("memoryless-stationary", "mystery");
        assert!(ChannelFamily::from_json(&bad_kind).is_err());
    }

    #[test]
    fn truncation_rule_expands_states_per_n() {
        let json = r#"{
            "input_alphabet": 2,
            "output_alphabet": 2,
            "states": [],
            "truncation_rule": {
                "template": {"kind": "coherence", "q1": 0.5, "q2": 0.0},
                "s_max": "n"
            }
        }"#;
        let family = ChannelFamily::from_json(json).unwrap();
        assert_eq!(family.states_at(3).unwrap().len(), 3);
        assert_eq!(family.states_at(8).unwrap().len(), 8);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = ChannelFamily::new(B, B, vec![ChannelState::bsc("a", 0.1), ChannelState::bsc("a", 0.2)]);
        assert!(r.is_err());
    }
}
