//! Property-based tests for the encoding, circuit, oracle, attack, and
//! quantization invariants.

use proptest::prelude::*;

use hragg::attacks::{alie, foe, labelflip, optimize_tau, AttackKind};
use hragg::circuit::ranks;
use hragg::config::ExperimentConfig;
use hragg::encoding::{pack, unpack, EncodingParams};
use hragg::oracle::{cwmed, cwts};
use hragg::protocol::{qua, quant_max, subsample};
use hragg::slot::{RingParams, SlotVector, Tracker, TrackedVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Small fixed ring for circuit properties: p=31, m=331, N=3, d=110, B=3.
fn test_encoding(offset: i64, sum_width: usize) -> EncodingParams {
    let ring = RingParams::new(331, 31).unwrap();
    EncodingParams::new(ring, 3, offset, sum_width).unwrap()
}

proptest! {
    #[test]
    fn pack_unpack_roundtrip(values in prop::collection::vec(-13i64..=13, 1..300)) {
        let enc = test_encoding(13, 1);
        let batch = pack(&values, &enc).unwrap();
        prop_assert_eq!(unpack(&batch, &enc), values);
    }

    #[test]
    fn encode_decode_value_roundtrip(x in -13i64..=13) {
        let enc = test_encoding(13, 1);
        let slot = enc.encode_value(x).unwrap();
        prop_assert_eq!(enc.decode_value(&slot), x);
    }

    #[test]
    fn ranks_are_a_permutation(
        lists in prop::collection::vec(prop::collection::vec(0i64..27, 2..8), 1..20),
    ) {
        let n = lists[0].len();
        let lists: Vec<Vec<i64>> = lists.into_iter().map(|mut l| { l.truncate(n); l }).collect();
        prop_assume!(lists.iter().all(|l| l.len() == n));
        let enc = test_encoding(0, 1);
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|i| lists.iter().map(|l| l[i]).collect())
            .collect();
        let inputs: Vec<TrackedVector> = rows
            .iter()
            .map(|r| {
                let b = pack(r, &enc).unwrap();
                TrackedVector::fresh(b.vectors[0].clone())
            })
            .collect();
        let mut t = Tracker::new();
        let rk = ranks(&inputs, &enc, &mut t).unwrap();
        for j in 0..lists.len() {
            let mut got: Vec<u64> = rk.iter().map(|r| r.value.slots[j].coeffs[0]).collect();
            got.sort_unstable();
            prop_assert_eq!(got, (0..n as u64).collect::<Vec<_>>());
        }
    }

    /// The trimmed sum ignores the order of its inputs.
    #[test]
    fn trimmed_sum_permutation_invariant(
        rows in prop::collection::vec(prop::collection::vec(-100i64..100, 3), 3..9),
        seed in any::<u64>(),
    ) {
        let f = (rows.len() - 1) / 2;
        let base = cwts(&rows, f).unwrap();
        let mut shuffled = rows.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
        prop_assert_eq!(cwts(&shuffled, f).unwrap(), base);
    }

    /// Each trimmed-sum coordinate stays within the window spanned by the
    /// surviving order statistics.
    #[test]
    fn trimmed_sum_bounded_by_order_statistics(
        rows in prop::collection::vec(prop::collection::vec(-100i64..100, 4), 3..9),
    ) {
        let n = rows.len();
        let f = (n - 1) / 2;
        let width = (n - 2 * f) as i64;
        let out = cwts(&rows, f).unwrap();
        for j in 0..4 {
            let mut col: Vec<i64> = rows.iter().map(|r| r[j]).collect();
            col.sort_unstable();
            prop_assert!(out[j] >= width * col[f]);
            prop_assert!(out[j] <= width * col[n - 1 - f]);
        }
    }

    /// With maximal trimming the trimmed sum is the median.
    #[test]
    fn full_trim_is_median(
        rows in prop::collection::vec(prop::collection::vec(-100i64..100, 3), 3..10),
    ) {
        let n = rows.len() | 1; // odd
        let rows = &rows[..n.min(rows.len())];
        prop_assume!(rows.len() % 2 == 1);
        let f = rows.len() / 2;
        prop_assert_eq!(cwts(rows, f).unwrap(), cwmed(rows).unwrap());
    }

    #[test]
    fn labelflip_is_an_involution(classes in 2usize..20, label in 0usize..20) {
        prop_assume!(label < classes);
        let once = labelflip(label, classes).unwrap();
        prop_assert!(once < classes);
        prop_assert_eq!(labelflip(once, classes).unwrap(), label);
    }

    /// foe and alie reduce to the honest mean at tau = 0.
    #[test]
    fn attacks_vanish_at_tau_zero(
        honest in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..8),
    ) {
        let mean: Vec<f64> = (0..3)
            .map(|j| honest.iter().map(|v| v[j]).sum::<f64>() / honest.len() as f64)
            .collect();
        for (a, m) in foe(&honest, 0.0).unwrap().iter().zip(&mean) {
            prop_assert!((a - m).abs() < 1e-12);
        }
        for (a, m) in alie(&honest, 0.0).unwrap().iter().zip(&mean) {
            prop_assert!((a - m).abs() < 1e-9);
        }
    }

    /// The greedy tau search attains the exhaustive grid maximum.
    #[test]
    fn optimize_tau_attains_grid_max(
        honest in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 3..7),
        f in 1usize..3,
    ) {
        let grid: Vec<f64> = (-6..=6).map(|i| i as f64).collect();
        let agg = |rows: &[Vec<f64>]| {
            let n = rows.len() as f64;
            (0..2)
                .map(|j| rows.iter().map(|v| v[j]).sum::<f64>() / n)
                .collect::<Vec<f64>>()
        };
        let tau = optimize_tau(AttackKind::Foe, &honest, agg, &grid, f).unwrap();
        let objective = |t: f64| {
            let atk = foe(&honest, t).unwrap();
            let mut all = honest.clone();
            all.extend(std::iter::repeat_n(atk, f));
            let out = agg(&all);
            let mean: Vec<f64> = (0..2)
                .map(|j| honest.iter().map(|v| v[j]).sum::<f64>() / honest.len() as f64)
                .collect();
            out.iter().zip(&mean).map(|(o, m)| (o - m) * (o - m)).sum::<f64>()
        };
        let best = grid.iter().cloned().map(objective).fold(0.0f64, f64::max);
        prop_assert!(objective(tau) >= best - 1e-9);
    }

    /// Quantized values are bounded, odd in the input, and monotone.
    #[test]
    fn quantization_bounded_and_monotone(
        v in prop::collection::vec(-10.0f64..10.0, 1..20),
        delta in 2u32..9,
        clamp in 1e-3f64..10.0,
    ) {
        let q = qua(&v, delta, clamp);
        let qmax = quant_max(delta);
        prop_assert!(q.iter().all(|&x| x.abs() <= qmax));
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let qneg = qua(&neg, delta, clamp);
        for (a, b) in q.iter().zip(&qneg) {
            prop_assert_eq!(*a, -*b);
        }
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let qs = qua(&sorted, delta, clamp);
        prop_assert!(qs.windows(2).all(|w| w[0] <= w[1]));
    }

    /// Subsampling returns 2f+1 distinct sorted indices below n.
    #[test]
    fn subsample_shape(n in 1usize..30, f in 0usize..15, seed in any::<u64>()) {
        prop_assume!(2 * f < n);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let s = subsample(n, f, &mut rng).unwrap();
        prop_assert_eq!(s.len(), 2 * f + 1);
        prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(s.iter().all(|&i| i < n));
    }

    /// The resolved-config echo parses back to an identical configuration.
    #[test]
    fn config_echo_roundtrip(
        n in 3usize..20,
        delta in 2u32..9,
        seed in any::<u64>(),
        gamma in 0.01f64..2.0,
    ) {
        let f = (n - 1) / 3;
        prop_assume!(2 * f < n);
        let text = format!(
            "n={n}\nf={f}\ndelta={delta}\nclamp=0.01\ngamma={gamma}\nbeta=0.9\nT=5\nbatch=4\nseed={seed}\n"
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let echoed = ExperimentConfig::parse(&cfg.to_kv_string()).unwrap();
        prop_assert_eq!(cfg.to_kv_string(), echoed.to_kv_string());
    }
}

/// Depth bookkeeping follows the multiplication chains: a balanced product
/// tree of k fresh vectors has depth ceil(log2(k)).
#[test]
fn depth_matches_product_tree() {
    let enc = test_encoding(0, 1);
    let ring = &enc.ring;
    for k in 1usize..=8 {
        let mut layer: Vec<TrackedVector> = (0..k)
            .map(|_| TrackedVector::fresh(SlotVector::constant(1, ring)))
            .collect();
        let mut t = Tracker::new();
        while layer.len() > 1 {
            let mut next = Vec::new();
            for pair in layer.chunks(2) {
                next.push(if pair.len() == 2 {
                    pair[0].mul(&pair[1], &mut t).unwrap()
                } else {
                    pair[0].clone()
                });
            }
            layer = next;
        }
        assert_eq!(layer[0].depth, (k as f64).log2().ceil() as u32, "k = {k}");
    }
}
