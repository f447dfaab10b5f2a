//! Shared test support: an independent brute-force information oracle and
//! randomized generators for joints and adversarial scenarios.
//!
//! The oracle deliberately avoids the library's entropy-difference
//! formulations: it works over hash-map marginals with direct summation
//! and conditional decompositions, so agreement is meaningful.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;

use featcomp::gansim::{FeatureSpec, GanScenario};
use featcomp::info::JointPmf;

/// Raw dense joint for oracle-side computation.
#[derive(Debug, Clone)]
pub struct RawJoint {
    pub sizes: Vec<usize>,
    pub probs: Vec<f64>,
}

impl RawJoint {
    pub fn cells(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Iterate `(tuple, probability)` over all cells.
    pub fn iter_cells(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let mut idx = vec![0usize; self.sizes.len()];
        let mut first = true;
        self.probs.iter().map(move |&p| {
            if !first {
                for d in (0..idx.len()).rev() {
                    idx[d] += 1;
                    if idx[d] < self.sizes[d] {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            first = false;
            (idx.clone(), p)
        })
    }

    pub fn to_jointpmf(&self) -> JointPmf {
        let vars: Vec<(String, usize)> =
            self.sizes.iter().enumerate().map(|(i, &s)| (format!("v{i}"), s)).collect();
        JointPmf::new(vars, self.probs.clone()).expect("oracle joint must be valid")
    }
}

fn project(tuple: &[usize], sel: &[usize]) -> Vec<usize> {
    sel.iter().map(|&i| tuple[i]).collect()
}

/// Marginal over the selected coordinates as a hash map.
pub fn oracle_marginal(j: &RawJoint, sel: &[usize]) -> HashMap<Vec<usize>, f64> {
    let mut out: HashMap<Vec<usize>, f64> = HashMap::new();
    for (tuple, p) in j.iter_cells() {
        if p > 0.0 {
            *out.entry(project(&tuple, sel)).or_insert(0.0) += p;
        }
    }
    out
}

fn plogp_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut h = 0.0;
    for p in values {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Entropy of the selected coordinates via direct summation.
pub fn oracle_entropy(j: &RawJoint, sel: &[usize]) -> f64 {
    plogp_sum(oracle_marginal(j, sel).values().copied())
}

/// `H(target | given)` via the conditional decomposition
/// `sum_g p(g) H(target | given = g)`.
pub fn oracle_cond_entropy(j: &RawJoint, target: &[usize], given: &[usize]) -> f64 {
    let mut slices: HashMap<Vec<usize>, HashMap<Vec<usize>, f64>> = HashMap::new();
    for (tuple, p) in j.iter_cells() {
        if p > 0.0 {
            *slices
                .entry(project(&tuple, given))
                .or_default()
                .entry(project(&tuple, target))
                .or_insert(0.0) += p;
        }
    }
    let mut h = 0.0;
    for slice in slices.values() {
        let pg: f64 = slice.values().sum();
        if pg > 0.0 {
            h += pg * plogp_sum(slice.values().map(|&v| v / pg));
        }
    }
    h
}

/// `I(a; b)` via the direct double sum over the pair marginal.
pub fn oracle_mi(j: &RawJoint, a: &[usize], b: &[usize]) -> f64 {
    let pa = oracle_marginal(j, a);
    let pb = oracle_marginal(j, b);
    let sel_ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let pab = oracle_marginal(j, &sel_ab);
    let mut mi = 0.0;
    for (key, &p) in &pab {
        if p > 0.0 {
            let ka = key[..a.len()].to_vec();
            let kb = key[a.len()..].to_vec();
            mi += p * (p / (pa[&ka] * pb[&kb])).log2();
        }
    }
    mi
}

/// `I(a; b | given)` via the conditional decomposition
/// `sum_g p(g) I(a; b | given = g)`.
pub fn oracle_cmi(j: &RawJoint, a: &[usize], b: &[usize], given: &[usize]) -> f64 {
    if given.is_empty() {
        return oracle_mi(j, a, b);
    }
    // Slice the joint along the conditioning assignment.
    let mut slices: HashMap<Vec<usize>, Vec<(Vec<usize>, f64)>> = HashMap::new();
    for (tuple, p) in j.iter_cells() {
        if p > 0.0 {
            slices.entry(project(&tuple, given)).or_default().push((tuple, p));
        }
    }
    let mut cmi = 0.0;
    for cells in slices.values() {
        let pg: f64 = cells.iter().map(|(_, p)| p).sum();
        if pg <= 0.0 {
            continue;
        }
        let mut pa: HashMap<Vec<usize>, f64> = HashMap::new();
        let mut pb: HashMap<Vec<usize>, f64> = HashMap::new();
        let mut pab: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
        for (tuple, p) in cells {
            let cond = p / pg;
            let ka = project(tuple, a);
            let kb = project(tuple, b);
            *pa.entry(ka.clone()).or_insert(0.0) += cond;
            *pb.entry(kb.clone()).or_insert(0.0) += cond;
            *pab.entry((ka, kb)).or_insert(0.0) += cond;
        }
        let mut slice_mi = 0.0;
        for ((ka, kb), &p) in &pab {
            if p > 0.0 {
                slice_mi += p * (p / (pa[ka] * pb[kb])).log2();
            }
        }
        cmi += pg * slice_mi;
    }
    cmi
}

/// Random joint with `2..=max_vars` variables over alphabets `2..=max_alpha`;
/// roughly a third of cells are zeroed to exercise sparse supports.
pub fn random_joint(rng: &mut impl Rng, max_vars: usize, max_alpha: usize) -> RawJoint {
    loop {
        let nvars = rng.random_range(2..=max_vars);
        let sizes: Vec<usize> = (0..nvars).map(|_| rng.random_range(2..=max_alpha)).collect();
        let cells: usize = sizes.iter().product();
        let mut probs: Vec<f64> = (0..cells)
            .map(|_| {
                if rng.random::<f64>() < 0.3 {
                    0.0
                } else {
                    rng.random::<f64>().max(1e-6)
                }
            })
            .collect();
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for p in &mut probs {
            *p /= total;
        }
        // Renormalize exactly enough for the library's 1e-12 gate.
        let total2: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total2;
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12 {
            return RawJoint { sizes, probs };
        }
    }
}

/// Random pmf over `alpha` symbols with mass floor `floor`.
pub fn random_pmf(rng: &mut impl Rng, alpha: usize, floor: f64) -> Vec<f64> {
    let mut p: Vec<f64> = (0..alpha).map(|_| rng.random::<f64>() + floor).collect();
    let t: f64 = p.iter().sum();
    for v in &mut p {
        *v /= t;
    }
    let t2: f64 = p.iter().sum();
    for v in &mut p {
        *v /= t2;
    }
    p
}

/// Total variation distance between two pmfs.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Central finite-difference gradient check: maximum relative error between
/// analytic gradients and `(L(p + eps) - L(p - eps)) / (2 eps)` over every
/// scalar parameter. The relative error denominator is floored so that
/// near-zero gradient pairs compare absolutely.
pub fn gradcheck_max_rel_err(
    model: &mut featcomp::nn::ModelGraph,
    kind: featcomp::nn::LossKind,
    x: &featcomp::nn::Tensor,
    targets: &featcomp::nn::Targets,
) -> f64 {
    let eps = 1e-4;
    let (_, analytic) = model.backward(kind, x, targets).expect("analytic backward");
    let loss_of = |m: &featcomp::nn::ModelGraph| -> f64 {
        let out = m.forward(x).expect("forward");
        featcomp::nn::loss_and_grad(kind, &out, targets).expect("loss").0
    };
    let num_params = model.parameters().len();
    let mut max_rel: f64 = 0.0;
    for pi in 0..num_params {
        let len = model.parameters()[pi].1.len();
        for k in 0..len {
            let orig = model.parameters()[pi].1.data()[k];
            model.parameters_mut()[pi].1.data_mut()[k] = orig + eps;
            let plus = loss_of(model);
            model.parameters_mut()[pi].1.data_mut()[k] = orig - eps;
            let minus = loss_of(model);
            model.parameters_mut()[pi].1.data_mut()[k] = orig;
            let fd = (plus - minus) / (2.0 * eps);
            let a = analytic[pi].1.data()[k];
            let rel = (a - fd).abs() / (a.abs() + fd.abs()).max(1e-6);
            max_rel = max_rel.max(rel);
        }
    }
    max_rel
}

/// Independent scenario with `matched` generator-matched features followed
/// by `extra` features the sides disagree on (minimum TV separation
/// `min_sep` per extra feature); the discriminator knows `known` of them.
pub fn random_matched_prefix_scenario(
    rng: &mut impl Rng,
    matched: usize,
    extra: usize,
    known: usize,
    min_sep: f64,
) -> GanScenario {
    let mut features = Vec::new();
    for i in 0..matched {
        let alpha = rng.random_range(2..=4);
        let p = random_pmf(rng, alpha, 0.05);
        features.push(FeatureSpec::new(format!("m{i}"), p.clone(), p).unwrap());
    }
    for i in 0..extra {
        let alpha = rng.random_range(2..=4);
        loop {
            let p_real = random_pmf(rng, alpha, 0.05);
            let p_gen = random_pmf(rng, alpha, 0.05);
            if tv_distance(&p_real, &p_gen) >= min_sep {
                features.push(FeatureSpec::new(format!("s{i}"), p_real, p_gen).unwrap());
                break;
            }
        }
    }
    GanScenario::independent(features, known, matched).expect("valid scenario")
}
