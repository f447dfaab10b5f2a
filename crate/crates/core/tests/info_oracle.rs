//! Information measures against an independent brute-force oracle, plus the
//! structural invariants (chain rule, entropy bound, permutation invariance,
//! monotone conditioning) on randomized joints.

mod common;

use common::*;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use featcomp::info::{
    plugin_pmf_from_samples, BinMode, BinningSpec, JointPmf, VarSelector,
};

const TOL: f64 = 1e-9;

fn sel(idx: &[usize]) -> VarSelector {
    VarSelector::new(idx.to_vec())
}

/// Split the variable indices of a joint into disjoint non-empty groups.
fn split_vars(n: usize, groups: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); groups];
    for i in 0..n {
        out[i % groups].push(i);
    }
    out
}

#[test]
fn marginalization_matches_nested_loop_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let raw = random_joint(&mut rng, 3, 5);
        let pmf = raw.to_jointpmf();
        let n = raw.sizes.len();
        let keep: Vec<usize> = if n == 3 { vec![0, 2] } else { vec![1] };
        let marg = pmf.marginalize(&sel(&keep)).unwrap();
        let oracle = oracle_marginal(&raw, &keep);
        // Compare every cell of the dense result to the map.
        let sizes: Vec<usize> = keep.iter().map(|&i| raw.sizes[i]).collect();
        let mut idx = vec![0usize; sizes.len()];
        for &p in marg.table() {
            let expected = oracle.get(&idx).copied().unwrap_or(0.0);
            assert!((p - expected).abs() < 1e-12, "cell {idx:?}: {p} vs {expected}");
            for d in (0..sizes.len()).rev() {
                idx[d] += 1;
                if idx[d] < sizes[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
}

#[test]
fn entropies_and_informations_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for round in 0..300 {
        let raw = random_joint(&mut rng, 4, 5);
        let pmf = raw.to_jointpmf();
        let n = raw.sizes.len();

        let groups = split_vars(n, 2.min(n));
        let (a, b) = (&groups[0], &groups[1]);

        let h = pmf.entropy(&sel(a)).unwrap();
        assert!((h - oracle_entropy(&raw, a)).abs() < TOL, "entropy round {round}");

        let ce = pmf.conditional_entropy(&sel(a), &sel(b)).unwrap();
        assert!(
            (ce - oracle_cond_entropy(&raw, a, b)).abs() < TOL,
            "conditional entropy round {round}"
        );

        let mi = pmf.mutual_information(&sel(a), &sel(b)).unwrap();
        assert!((mi - oracle_mi(&raw, a, b)).abs() < TOL, "mi round {round}");
        let mi_flip = pmf.mutual_information(&sel(b), &sel(a)).unwrap();
        assert!((mi - mi_flip).abs() < TOL, "mi symmetry round {round}");

        if n >= 3 {
            let groups = split_vars(n, 3);
            let (a, b, g) = (&groups[0], &groups[1], &groups[2]);
            let cmi = pmf
                .conditional_mutual_information(&sel(a), &sel(b), &sel(g))
                .unwrap();
            assert!(
                (cmi - oracle_cmi(&raw, a, b, g)).abs() < TOL,
                "cmi round {round}: {cmi} vs {}",
                oracle_cmi(&raw, a, b, g)
            );
        }
    }
}

#[test]
fn signal_sequence_matches_chain_rule_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..150 {
        let raw = random_joint(&mut rng, 4, 4);
        let pmf = raw.to_jointpmf();
        let n = raw.sizes.len();
        let y = vec![0usize];
        let features: Vec<Vec<usize>> = (1..n).map(|i| vec![i]).collect();
        let fsels: Vec<VarSelector> = features.iter().map(|f| sel(f)).collect();
        let signals = pmf.signal_sequence(&sel(&y), &fsels).unwrap();

        // Element-wise: each signal is the oracle's conditional MI.
        let mut given: Vec<usize> = Vec::new();
        for (i, f) in features.iter().enumerate() {
            let expected = oracle_cmi(&raw, &y, f, &given);
            assert!(
                (signals[i] - expected).abs() < TOL,
                "signal {i}: {} vs {expected}",
                signals[i]
            );
            given.extend(f);
        }
        // Chain rule: the sum telescopes to the full mutual information.
        let all: Vec<usize> = (1..n).collect();
        let total = oracle_mi(&raw, &y, &all);
        let sum: f64 = signals.iter().sum();
        assert!((sum - total).abs() < TOL, "chain rule: {sum} vs {total}");
        // Budget: the sum never exceeds the label entropy.
        assert!(sum <= oracle_entropy(&raw, &y) + TOL);
    }
}

#[test]
fn plugin_estimator_recovers_known_mutual_information() {
    // Fixed 2-variable joint; 1000 draws; plug-in MI within 0.05 bits.
    let truth = JointPmf::new(
        vec![("a", 3), ("b", 2)],
        vec![0.25, 0.05, 0.05, 0.25, 0.10, 0.30],
    )
    .unwrap();
    let exact = truth
        .mutual_information(&sel(&[0]), &sel(&[1]))
        .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut samples = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let u: f64 = rand::Rng::random(&mut rng);
        let mut acc = 0.0;
        let mut cell = 0;
        for (i, &p) in truth.table().iter().enumerate() {
            acc += p;
            if u < acc {
                cell = i;
                break;
            }
            cell = i;
        }
        let a = cell / 2;
        let b = cell % 2;
        samples.push(vec![a as f64, b as f64]);
    }
    let spec = BinningSpec::new(BinMode::EqualWidth, vec![3, 2]).unwrap();
    let plugin = plugin_pmf_from_samples(&samples, &spec).unwrap();
    let estimated = plugin.mutual_information(&sel(&[0]), &sel(&[1])).unwrap();
    assert!(
        (estimated - exact).abs() < 0.05,
        "plug-in {estimated} vs exact {exact}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Chain rule and budget over random joints and feature orderings.
    #[test]
    fn chain_rule_and_budget_hold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_joint(&mut rng, 4, 5);
        let pmf = raw.to_jointpmf();
        let n = raw.sizes.len();
        let y = sel(&[0]);
        let features: Vec<VarSelector> = (1..n).map(|i| sel(&[i])).collect();
        let signals = pmf.signal_sequence(&y, &features).unwrap();
        let all: Vec<usize> = (1..n).collect();
        let total = pmf.mutual_information(&y, &sel(&all)).unwrap();
        let sum: f64 = signals.iter().sum();
        prop_assert!((sum - total).abs() < TOL);
        prop_assert!(sum <= pmf.entropy(&y).unwrap() + TOL);
    }

    /// Reordering features changes individual signals but never their sum.
    #[test]
    fn permutation_leaves_signal_sum_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_joint(&mut rng, 4, 4);
        let pmf = raw.to_jointpmf();
        let n = raw.sizes.len();
        if n < 3 {
            return Ok(());
        }
        let y = sel(&[0]);
        let forward: Vec<VarSelector> = (1..n).map(|i| sel(&[i])).collect();
        let backward: Vec<VarSelector> = (1..n).rev().map(|i| sel(&[i])).collect();
        let sum_f: f64 = pmf.signal_sequence(&y, &forward).unwrap().iter().sum();
        let sum_b: f64 = pmf.signal_sequence(&y, &backward).unwrap().iter().sum();
        prop_assert!((sum_f - sum_b).abs() < TOL);
    }

    /// Conditioning on more variables never increases entropy.
    #[test]
    fn conditioning_is_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_joint(&mut rng, 4, 4);
        let pmf = raw.to_jointpmf();
        let n = raw.sizes.len();
        if n < 3 {
            return Ok(());
        }
        let target = sel(&[0]);
        let small = sel(&[1]);
        let large = sel(&[1, 2]);
        let h_small = pmf.conditional_entropy(&target, &small).unwrap();
        let h_large = pmf.conditional_entropy(&target, &large).unwrap();
        prop_assert!(h_large <= h_small + 1e-12);
    }

    /// Text round trips are lossless for random joints.
    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_joint(&mut rng, 3, 5);
        let pmf = raw.to_jointpmf();
        let back = JointPmf::from_text(&pmf.to_text()).unwrap();
        prop_assert_eq!(pmf, back);
    }
}
