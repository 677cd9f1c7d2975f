use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of table entries (`N_x^n * N_y^n`) an exact
/// enumeration is allowed to touch.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 26;

/// A finite alphabet of `size` symbols, identified with the indices `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alphabet {
    pub size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Config(format!(
                "alphabet size must be at least 2, got {size}"
            )));
        }
        Ok(Alphabet { size })
    }

    /// Number of length-`n` sequences, or an error if it does not fit a usize cap.
    pub fn seq_count(&self, n: usize) -> Result<usize> {
        let mut count: u128 = 1;
        for _ in 0..n {
            count = count.checked_mul(self.size as u128).ok_or_else(|| {
                Error::Resource {
                    what: format!("sequence space {}^{n}", self.size),
                    required: u128::MAX,
                    cap: DEFAULT_ENUMERATION_CAP,
                    hint: "reduce the blocklength".into(),
                }
            })?;
        }
        if count > DEFAULT_ENUMERATION_CAP {
            return Err(Error::Resource {
                what: format!("sequence space {}^{n}", self.size),
                required: count,
                cap: DEFAULT_ENUMERATION_CAP,
                hint: "reduce the blocklength or use Monte Carlo mode".into(),
            });
        }
        Ok(count as usize)
    }

    /// Base-N encoding of a symbol sequence into its index. The first symbol
    /// is the most significant digit, so numeric order equals lexicographic
    /// order over sequences.
    pub fn encode(&self, symbols: &[usize]) -> usize {
        let mut idx = 0usize;
        for &s in symbols {
            debug_assert!(s < self.size);
            idx = idx * self.size + s;
        }
        idx
    }

    /// Inverse of [`Alphabet::encode`] for sequences of length `n`.
    pub fn decode(&self, index: usize, n: usize) -> Vec<usize> {
        let mut out = vec![0usize; n];
        let mut rem = index;
        for k in (0..n).rev() {
            out[k] = rem % self.size;
            rem /= self.size;
        }
        debug_assert_eq!(rem, 0);
        out
    }

    /// Symbol at position `k` (0-based) of the sequence with the given index.
    pub fn symbol_at(&self, index: usize, n: usize, k: usize) -> usize {
        let mut rem = index;
        for _ in 0..(n - 1 - k) {
            rem /= self.size;
        }
        rem % self.size
    }
}

/// Checks that the joint enumeration of `nx^n * ny^n` pairs stays under `cap`.
pub fn check_pair_cap(nx: usize, ny: usize, n: usize, cap: u128, what: &str) -> Result<()> {
    let mut required: u128 = 1;
    for _ in 0..n {
        required = required
            .saturating_mul(nx as u128)
            .saturating_mul(ny as u128);
    }
    if required > cap {
        return Err(Error::Resource {
            what: what.to_string(),
            required,
            cap,
            hint: "use Monte Carlo mode (spectrum_mc) or reduce n".into(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unary_alphabet() {
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(0).is_err());
    }

    #[test]
    fn encode_is_lexicographic() {
        let a = Alphabet::new(3).unwrap();
        assert_eq!(a.encode(&[0, 0]), 0);
        assert_eq!(a.encode(&[0, 1]), 1);
        assert_eq!(a.encode(&[1, 0]), 3);
        assert_eq!(a.encode(&[2, 2]), 8);
    }

    #[test]
    fn decode_round_trips() {
        for size in 2..=4 {
            let a = Alphabet::new(size).unwrap();
            for n in 1..=6 {
                let count = a.seq_count(n).unwrap();
                for idx in 0..count {
                    let seq = a.decode(idx, n);
                    assert_eq!(a.encode(&seq), idx);
                    for k in 0..n {
                        assert_eq!(a.symbol_at(idx, n, k), seq[k]);
                    }
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let a = Alphabet::new(2).unwrap();
        assert!(a.seq_count(26).is_ok());
        assert!(a.seq_count(27).is_err());
    }
}
