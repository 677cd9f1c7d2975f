//! Built-in channel families: coherence-time and prefix-noise families, a
//! quantized Gaussian fading family, deterministic-shift states, and a tiny
//! arbitrarily-varying-channel expansion.

use serde::Deserialize;
use statrs::function::erf::erf;

use crate::alphabet::Alphabet;
use crate::channel::{
    AdditivePrefixNoiseParams, ChannelFamily, ChannelKind, ChannelState, CoherenceParams,
    DeterministicShiftParams, MemorylessTimeVaryingParams, SMaxRule, StateTemplate, SymbolKernel,
    TruncationRule,
};
use crate::error::{Error, Result};
use crate::input::InputProcess;
use crate::spectrum::{entropy_spectrum, Spectrum};

const BINARY: Alphabet = Alphabet { size: 2 };

fn check_crossover(q: f64, name: &str) -> Result<()> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::Config(format!(
            "{name} must lie in [0, 1/2], got {q}"
        )));
    }
    Ok(())
}

/// Coherence-time family: state `s` is a useless block (BSC(q1) on the whole
/// block) while `n <= s` and the full BSC(q2) block extension once `n > s`.
/// `bound = Some(S)` enumerates `s in 1..=S`; `None` grows the state set with
/// the blocklength (`s in 1..=n`).
pub fn example1(bound: Option<usize>, q1: f64, q2: f64) -> Result<ChannelFamily> {
    check_crossover(q1, "q1")?;
    check_crossover(q2, "q2")?;
    match bound {
        Some(s_max) => {
            if s_max == 0 {
                return Err(Error::Config("state bound must be at least 1".into()));
            }
            let states = (1..=s_max)
                .map(|s| ChannelState {
                    id: format!("coh-{s}"),
                    kind: ChannelKind::Coherence(CoherenceParams { s, q1, q2 }),
                })
                .collect();
            ChannelFamily::new(BINARY, BINARY, states)
        }
        None => Ok(ChannelFamily {
            input_alphabet: BINARY,
            output_alphabet: BINARY,
            states: Vec::new(),
            truncation_rule: Some(TruncationRule {
                template: StateTemplate::Coherence { q1, q2 },
                s_max: SMaxRule::EqualsN("n".into()),
            }),
        }),
    }
}

/// Additive-noise family: state `s` flips each of the first `s` symbols with
/// probability 1/2 and leaves the rest clean. `Some(list)` uses the explicit
/// prefix lengths (0 gives the noiseless identity state); `None` grows the
/// set with the blocklength.
pub fn example2(prefixes: Option<&[usize]>) -> Result<ChannelFamily> {
    match prefixes {
        Some(list) => {
            if list.is_empty() {
                return Err(Error::Config("prefix list is empty".into()));
            }
            let states = list
                .iter()
                .map(|&s| ChannelState {
                    id: format!("prefix-{s}"),
                    kind: ChannelKind::AdditivePrefixNoise(AdditivePrefixNoiseParams { s }),
                })
                .collect();
            ChannelFamily::new(BINARY, BINARY, states)
        }
        None => Ok(ChannelFamily {
            input_alphabet: BINARY,
            output_alphabet: BINARY,
            states: Vec::new(),
            truncation_rule: Some(TruncationRule {
                template: StateTemplate::AdditivePrefixNoise,
                s_max: SMaxRule::EqualsN("n".into()),
            }),
        }),
    }
}

/// The entropy spectrum of the state-`s` noise process at blocklength `n`:
/// iid equiprobable bits on the first `s` positions, zero bits after.
pub fn example2_noise_entropy(s: usize, n: usize) -> Result<Spectrum> {
    let mut per_position: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        per_position.push(if k < s {
            vec![0.5, 0.5]
        } else {
            vec![1.0, 0.0]
        });
    }
    let noise = InputProcess::ProductPerSymbol { per_position };
    entropy_spectrum(n, &noise, BINARY, &format!("prefix-{s}"))
}

fn phi(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Quantized Gaussian fading family: states indexed by `(h, sigma)` with
/// per-symbol law `y = h*x + noise`, the output quantized to `L` bins on a
/// symmetric grid whose outermost bins absorb the tails.
pub fn example3_quantized(
    h_set: &[f64],
    sigma_set: &[f64],
    levels: usize,
    input_levels: &[f64],
) -> Result<ChannelFamily> {
    if h_set.is_empty() || sigma_set.is_empty() {
        return Err(Error::Config("h_set and sigma_set must be non-empty".into()));
    }
    if sigma_set.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::Config("sigmas must be positive and finite".into()));
    }
    if levels < 2 {
        return Err(Error::Config(format!(
            "need at least 2 quantization levels, got {levels}"
        )));
    }
    if input_levels.len() < 2 {
        return Err(Error::Config("need at least 2 input levels".into()));
    }
    let sigma_max = sigma_set.iter().cloned().fold(0.0f64, f64::max);
    let h_abs_max = h_set.iter().map(|h| h.abs()).fold(0.0f64, f64::max);
    let x_abs_max = input_levels.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    let reach = 4.0 * sigma_max * (h_abs_max * x_abs_max).max(1.0);
    if !(reach > 0.0) || !reach.is_finite() {
        return Err(Error::Config(format!("degenerate quantization grid: reach {reach}")));
    }
    let bin_width = 2.0 * reach / levels as f64;
    let mut states = Vec::with_capacity(h_set.len() * sigma_set.len());
    for &h in h_set {
        for &sigma in sigma_set {
            let mut kernel: SymbolKernel = Vec::with_capacity(input_levels.len());
            for &x in input_levels {
                let mean = h * x;
                let mut row = Vec::with_capacity(levels);
                for j in 0..levels {
                    let lo = if j == 0 {
                        f64::NEG_INFINITY
                    } else {
                        -reach + j as f64 * bin_width
                    };
                    let hi = if j == levels - 1 {
                        f64::INFINITY
                    } else {
                        -reach + (j + 1) as f64 * bin_width
                    };
                    let p_hi = if hi.is_infinite() { 1.0 } else { phi((hi - mean) / sigma) };
                    let p_lo = if lo.is_infinite() { 0.0 } else { phi((lo - mean) / sigma) };
                    row.push((p_hi - p_lo).max(0.0));
                }
                kernel.push(row);
            }
            states.push(ChannelState::memoryless(
                format!("h{h}-sigma{sigma}"),
                kernel,
            ));
        }
    }
    ChannelFamily::new(
        Alphabet::new(input_levels.len())?,
        Alphabet::new(levels)?,
        states,
    )
}

/// Deterministic-shift family: `y_k = x_k XOR theta_k` per state, with a
/// small default set of shift patterns (bits beyond each pattern are zero).
pub fn example4() -> Result<ChannelFamily> {
    example4_with(&[
        vec![],
        vec![1],
        vec![0, 1, 0, 1, 0, 1, 0, 1],
        vec![1, 1, 0, 0, 1, 1, 0, 0],
    ])
}

pub fn example4_with(thetas: &[Vec<u8>]) -> Result<ChannelFamily> {
    if thetas.is_empty() {
        return Err(Error::Config("need at least one shift pattern".into()));
    }
    let states = thetas
        .iter()
        .enumerate()
        .map(|(i, bits)| {
            if bits.iter().any(|&b| b > 1) {
                return Err(Error::Config("shift patterns must be bits".into()));
            }
            Ok(ChannelState {
                id: format!("theta-{i}"),
                kind: ChannelKind::DeterministicShift(DeterministicShiftParams {
                    theta_bits: bits.clone(),
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelFamily::new(BINARY, BINARY, states)
}

/// Expands per-symbol state choices into all `|S|^n` block states of an
/// arbitrarily varying channel, as memoryless-time-varying states.
pub fn avc_demo(per_symbol_states: &[SymbolKernel], n: usize) -> Result<ChannelFamily> {
    if per_symbol_states.is_empty() {
        return Err(Error::Config("per-symbol state set is empty".into()));
    }
    if per_symbol_states.len() > 3 {
        return Err(Error::Resource {
            what: "AVC per-symbol state set".into(),
            required: per_symbol_states.len() as u128,
            cap: 3,
            hint: "use at most 3 per-symbol states".into(),
        });
    }
    if n == 0 || n > 6 {
        return Err(Error::Resource {
            what: "AVC blocklength".into(),
            required: n as u128,
            cap: 6,
            hint: "the demo expands |S|^n block states; keep n <= 6".into(),
        });
    }
    let nx = per_symbol_states[0].len();
    let ny = per_symbol_states[0]
        .first()
        .map(|row| row.len())
        .unwrap_or(0);
    let set = Alphabet::new(per_symbol_states.len().max(2))?;
    let count = per_symbol_states.len().pow(n as u32);
    let mut states = Vec::with_capacity(count);
    for idx in 0..count {
        // Digits of idx in base |S| select the per-position kernel.
        let mut digits = vec![0usize; n];
        let mut rem = idx;
        for k in (0..n).rev() {
            digits[k] = rem % per_symbol_states.len();
            rem /= per_symbol_states.len();
        }
        let _ = set;
        let kernels = digits
            .iter()
            .map(|&d| per_symbol_states[d].clone())
            .collect();
        let label: String = digits.iter().map(|d| d.to_string()).collect();
        states.push(ChannelState {
            id: format!("avc-{label}"),
            kind: ChannelKind::MemorylessTimeVarying(MemorylessTimeVaryingParams {
                kernels,
            }),
        });
    }
    ChannelFamily::new(Alphabet::new(nx)?, Alphabet::new(ny)?, states)
}

// --- scenario registry --------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct ScenarioInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub params: &'static str,
}

pub fn list() -> Vec<ScenarioInfo> {
    vec![
        ScenarioInfo {
            id: "example1-bounded",
            description: "coherence-time family with s in 1..=S",
            params: r#"{"s_bound": 4, "q1": 0.5, "q2": 0.0}"#,
        },
        ScenarioInfo {
            id: "example1-unbounded",
            description: "coherence-time family with s growing as 1..=n",
            params: r#"{"q1": 0.5, "q2": 0.0}"#,
        },
        ScenarioInfo {
            id: "example2-fixed",
            description: "additive prefix-noise family with explicit prefix lengths",
            params: r#"{"prefixes": [0, 2, 4]}"#,
        },
        ScenarioInfo {
            id: "example2-unbounded",
            description: "additive prefix-noise family with prefixes growing as 1..=n",
            params: r#"{}"#,
        },
        ScenarioInfo {
            id: "example3-quantized",
            description: "quantized Gaussian fading family indexed by (h, sigma)",
            params: r#"{"h_set": [1.0], "sigma_set": [0.5, 1.0], "levels": 8, "input_levels": [-1.0, 1.0]}"#,
        },
        ScenarioInfo {
            id: "example4",
            description: "deterministic binary shift states",
            params: r#"{}"#,
        },
        ScenarioInfo {
            id: "avc-demo",
            description: "all per-symbol BSC state sequences expanded to block states",
            params: r#"{"crossovers": [0.05, 0.2], "n": 4}"#,
        },
    ]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Example1Params {
    #[serde(default)]
    s_bound: Option<usize>,
    #[serde(default = "default_half")]
    q1: f64,
    #[serde(default)]
    q2: f64,
}

fn default_half() -> f64 {
    0.5
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Example2Params {
    #[serde(default)]
    prefixes: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Example3Params {
    h_set: Vec<f64>,
    sigma_set: Vec<f64>,
    levels: usize,
    input_levels: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AvcParams {
    crossovers: Vec<f64>,
    n: usize,
}

pub fn build(id: &str, params: &serde_json::Value) -> Result<ChannelFamily> {
    let bad = |e: serde_json::Error| Error::Config(format!("scenario {id}: {e}"));
    match id {
        "example1-bounded" => {
            let p: Example1Params = serde_json::from_value(params.clone()).map_err(bad)?;
            let s = p
                .s_bound
                .ok_or_else(|| Error::Config("example1-bounded needs s_bound".into()))?;
            example1(Some(s), p.q1, p.q2)
        }
        "example1-unbounded" => {
            let p: Example1Params = serde_json::from_value(params.clone()).map_err(bad)?;
            example1(None, p.q1, p.q2)
        }
        "example2-fixed" => {
            let p: Example2Params = serde_json::from_value(params.clone()).map_err(bad)?;
            let prefixes = p
                .prefixes
                .ok_or_else(|| Error::Config("example2-fixed needs prefixes".into()))?;
            example2(Some(&prefixes))
        }
        "example2-unbounded" => example2(None),
        "example3-quantized" => {
            let p: Example3Params = serde_json::from_value(params.clone()).map_err(bad)?;
            example3_quantized(&p.h_set, &p.sigma_set, p.levels, &p.input_levels)
        }
        "example4" => example4(),
        "avc-demo" => {
            let p: AvcParams = serde_json::from_value(params.clone()).map_err(bad)?;
            for &q in &p.crossovers {
                check_crossover(q, "crossover")?;
            }
            let kernels: Vec<SymbolKernel> = p
                .crossovers
                .iter()
                .map(|&q| vec![vec![1.0 - q, q], vec![q, 1.0 - q]])
                .collect();
            avc_demo(&kernels, p.n)
        }
        other => Err(Error::Usage(format!("unknown scenario id {other:?}"))),
    }
}
