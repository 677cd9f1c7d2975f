//! Property-based checks of the structural invariants: spectrum
//! normalization, index round-trips, exact/Monte-Carlo agreement, estimator
//! orderings, and the codebook construction guarantee.

use infospec::alphabet::Alphabet;
use infospec::channel::{ChannelFamily, ChannelState};
use infospec::coding::{build_feinstein, code_spectrum, error_probabilities};
use infospec::input::InputProcess;
use infospec::rate::{quantile, RateKind};
use infospec::spectrum::{spectrum_exact, spectrum_mc, spectrum_stats};
use proptest::prelude::*;

const B: Alphabet = Alphabet { size: 2 };

fn bsc_family(qs: &[f64]) -> ChannelFamily {
    let states = qs
        .iter()
        .enumerate()
        .map(|(i, &q)| ChannelState::bsc(format!("s{i}"), q))
        .collect();
    ChannelFamily::new(B, B, states).unwrap()
}

fn crossover() -> impl Strategy<Value = f64> {
    // Stay away from 0 and 1/2 so every atom has positive probability and
    // the spectra are non-degenerate.
    (0.02f64..0.45).prop_map(|q| (q * 1000.0).round() / 1000.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectra_are_normalized_and_sorted(q in crossover(), n in 1usize..7) {
        let family = bsc_family(&[q]);
        let input = InputProcess::iid_uniform(B);
        let sp = spectrum_exact(n, &family.states[0], &input, B, B).unwrap();
        let total: f64 = sp.atoms.iter().map(|a| a.probability).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        for w in sp.atoms.windows(2) {
            prop_assert!(w[0].value < w[1].value);
        }
        for a in &sp.atoms {
            prop_assert!(a.probability > 0.0 && a.value.is_finite());
        }
    }

    #[test]
    fn encode_decode_roundtrip(size in 2usize..5, n in 1usize..6, seed in 0u64..1000) {
        let alphabet = Alphabet::new(size).unwrap();
        let count = alphabet.seq_count(n).unwrap();
        let index = (seed as usize) % count;
        let symbols = alphabet.decode(index, n);
        prop_assert_eq!(symbols.len(), n);
        prop_assert_eq!(alphabet.encode(&symbols), index);
        for (k, &s) in symbols.iter().enumerate() {
            prop_assert_eq!(alphabet.symbol_at(index, n, k), s);
        }
    }

    #[test]
    fn convolution_and_enumeration_paths_agree(q in crossover(), n in 1usize..6, p0 in 0.1f64..0.9) {
        let family = bsc_family(&[q]);
        let iid = InputProcess::Iid { probs: vec![p0, 1.0 - p0] };
        let fast = spectrum_exact(n, &family.states[0], &iid, B, B).unwrap();
        // An explicit table of the same product law forces the enumeration
        // path.
        let count = B.seq_count(n).unwrap();
        let probs: Vec<f64> = (0..count)
            .map(|x| {
                B.decode(x, n)
                    .iter()
                    .map(|&s| if s == 0 { p0 } else { 1.0 - p0 })
                    .product()
            })
            .collect();
        let slow = spectrum_exact(
            n,
            &family.states[0],
            &InputProcess::Explicit { n, probs },
            B,
            B,
        )
        .unwrap();
        prop_assert_eq!(fast.atoms.len(), slow.atoms.len());
        for (a, b) in fast.atoms.iter().zip(&slow.atoms) {
            prop_assert!((a.value - b.value).abs() <= 1e-10);
            prop_assert!((a.probability - b.probability).abs() <= 1e-10);
        }
    }

    #[test]
    fn monte_carlo_is_seed_deterministic_and_consistent(q in crossover(), seed in 0u64..1000) {
        let family = bsc_family(&[q]);
        let input = InputProcess::iid_uniform(B);
        let n = 4;
        let a = spectrum_mc(n, &family.states[0], &input, B, B, 4000, seed).unwrap();
        let b = spectrum_mc(n, &family.states[0], &input, B, B, 4000, seed).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let exact = spectrum_exact(n, &family.states[0], &input, B, B).unwrap();
        let gap = (spectrum_stats(&a).mean - spectrum_stats(&exact).mean).abs();
        // 4000 samples of a bounded density: a very loose 5-sigma-style cap.
        prop_assert!(gap < 0.2, "MC mean off by {gap}");
    }

    #[test]
    fn estimator_orderings_hold(
        qs in proptest::collection::vec(crossover(), 1..4),
        n in 2usize..8,
        tol in 0.05f64..0.5,
    ) {
        let family = bsc_family(&qs);
        let input = InputProcess::iid_uniform(B);
        let spectra: Vec<_> = family
            .states_at(n)
            .unwrap()
            .iter()
            .map(|st| spectrum_exact(n, st, &input, B, B).unwrap())
            .collect();
        let inf = quantile(&RateKind::InfCompound, &spectra, tol).unwrap();
        let check = quantile(&RateKind::Check, &spectra, tol).unwrap();
        let sup = quantile(&RateKind::SupCompound, &spectra, tol).unwrap();
        let min_inf = spectra
            .iter()
            .map(|sp| {
                quantile(
                    &RateKind::InfPerState(sp.state_id.clone()),
                    &spectra,
                    tol,
                )
                .unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        let min_sup = spectra
            .iter()
            .map(|sp| {
                quantile(
                    &RateKind::SupPerState(sp.state_id.clone()),
                    &spectra,
                    tol,
                )
                .unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        prop_assert!(inf <= min_inf + 1e-12);
        prop_assert!(inf <= check + 1e-12);
        prop_assert!(check <= min_sup + 1e-12);
        prop_assert!(min_sup <= sup + 1e-12);
    }

    #[test]
    fn feinstein_guarantee_and_code_spectrum_ceiling(
        qs in proptest::collection::vec(crossover(), 1..3),
        n in 2usize..7,
        m_exp in 1u32..4,
    ) {
        let family = bsc_family(&qs);
        let input = InputProcess::iid_uniform(B);
        let m = (1usize << m_exp).min(1 << (n - 1));
        let cb = build_feinstein(n, m, 0.15, &family, &input).unwrap();
        let report = error_probabilities(&cb, &family).unwrap();
        if cb.guaranteed {
            prop_assert!(report.compound_max <= cb.lambda_n + 1e-12);
        }
        // Codewords are distinct and regions are per-state functions of y.
        let mut seen = cb.codewords.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), cb.codewords.len());
        let spec_report = code_spectrum(&cb, &family, 0.1).unwrap();
        let r_n = cb.rate();
        for entry in &spec_report.entries {
            for atom in &entry.spectrum.atoms {
                prop_assert!(atom.value <= r_n + 1e-12);
            }
        }
    }
}
