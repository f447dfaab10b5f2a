//! Discrete simulator of discriminator/generator feature incentives.
//!
//! Features are abstract finite-alphabet random variables with one
//! distribution under real data and one under the generator; "learning a
//! feature" means an actor's model includes it. With balanced classes the
//! label `y` (1 = real) has one bit of entropy, and a discriminator that has
//! learned features on which the two distributions agree sits in a state of
//! confusion: its posterior is 0.5 everywhere and `H(y | learned) = 1` bit.
//!
//! From a confusion state, the motivation to learn feature `k` is
//! `I(y; f_k | f_0..f_{k-1}) = 1 - H(y | f_0..f_k)`, bounded below by
//! `1 - H(y | f_k)` — a bound with no dependence on the earlier features, so
//! confusion removes feature competition. Once the discriminator leads by
//! `l` features the conditioning set matters again, and the generator's
//! incentive to match one feature is capped by the information carried by
//! the whole lead block.
//!
//! Motivations are reported in bits. The adversarial value function is
//! reported in nats as the discriminator-optimal cross-entropy objective
//! `2 * ln(2) * H(y | known features)`, which equals `log 4` exactly at
//! confusion states and drops below it as soon as any known feature
//! separates the distributions.

mod config;
mod ops;
mod simulate;

pub use config::{scenario_from_file, scenario_from_str};
pub use ops::{
    competition_free_check, confusion_check, discriminator_motivation, generator_incentive,
    lead_motivation, scenario_joint, value_function_nats, ConfusionReport, Motivation,
};
pub use simulate::{simulate_balancing, Actor, BalancePolicy, BalanceTrace, TraceStep};

use thiserror::Error;

use crate::info::InfoError;

/// Tolerance for the identity and confusion checks, in bits.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for pmf validity.
const PMF_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("feature {name:?}: {side} pmf must have {expected} non-negative entries summing to 1")]
    InvalidPmf { name: String, side: &'static str, expected: usize },
    #[error("explicit joint for the {side} side must have {expected} entries summing to 1")]
    InvalidJoint { side: &'static str, expected: usize },
    #[error("learned counts invalid: G has {g}, D has {d}, scenario has {n} features")]
    LearnedCountsInvalid { g: usize, d: usize, n: usize },
    #[error("feature index {index} out of range ({n} features)")]
    FeatureOutOfRange { index: usize, n: usize },
    #[error(
        "confusion does not hold on the first {upto} features (H(y|...) = {h_bits} bits); \
         use the lead-scenario operations instead"
    )]
    ConfusionBroken { upto: usize, h_bits: f64 },
    #[error("lead block does not break confusion: H(y | lead block) = {h_bits} bits")]
    NoConfusionBreak { h_bits: f64 },
    #[error(
        "confusion features are not jointly redundant given the lead block \
         (H(y|prefix+block) = {with_prefix} vs H(y|block) = {without_prefix} bits); \
         the lead identities only hold when the matched prefix stays uninformative"
    )]
    PrefixNotRedundant { with_prefix: f64, without_prefix: f64 },
    #[error("balancing policy cannot progress: {0}")]
    PolicyStuck(String),
    #[error(
        "generator conditional undefined: the generator assigns zero mass to a matched prefix \
         cell that has real mass"
    )]
    UndefinedConditional,
    #[error("identity check failed: {context} differ by {delta} bits")]
    IdentityViolation { context: &'static str, delta: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// One abstract feature: its alphabet and its distribution under each side.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub alphabet: usize,
    pub p_real: Vec<f64>,
    pub p_gen: Vec<f64>,
}

impl FeatureSpec {
    pub fn new(
        name: impl Into<String>,
        p_real: Vec<f64>,
        p_gen: Vec<f64>,
    ) -> Result<FeatureSpec> {
        let name = name.into();
        let alphabet = p_real.len();
        validate_pmf(&name, "real", &p_real, alphabet)?;
        validate_pmf(&name, "generator", &p_gen, alphabet)?;
        Ok(FeatureSpec { name, alphabet, p_real, p_gen })
    }

    /// Whether the two sides agree on this feature.
    pub fn matched(&self, tol: f64) -> bool {
        self.p_real.iter().zip(&self.p_gen).all(|(a, b)| (a - b).abs() <= tol)
    }
}

fn validate_pmf(name: &str, side: &'static str, p: &[f64], expected: usize) -> Result<()> {
    if p.len() != expected || expected == 0 {
        return Err(SimError::InvalidPmf { name: name.into(), side, expected });
    }
    let mut sum = 0.0;
    for &v in p {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(SimError::InvalidPmf { name: name.into(), side, expected });
        }
        sum += v;
    }
    if (sum - 1.0).abs() > PMF_TOL {
        return Err(SimError::InvalidPmf { name: name.into(), side, expected });
    }
    Ok(())
}

/// How the features co-vary within each class.
#[derive(Debug, Clone, PartialEq)]
pub enum Dependence {
    /// Class-conditionally independent features (the default).
    Independent,
    /// Explicit per-class joint tables over the feature product space,
    /// row-major in feature order.
    Explicit { real: Vec<f64>, gen: Vec<f64> },
}

/// A full scenario: features, their dependence, and who has learned what.
///
/// Learned sets are prefixes: the generator has matched features
/// `0..learned_by_g` and the discriminator knows `0..learned_by_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GanScenario {
    features: Vec<FeatureSpec>,
    dependence: Dependence,
    learned_by_d: usize,
    learned_by_g: usize,
}

impl GanScenario {
    /// Class-conditionally independent features.
    pub fn independent(
        features: Vec<FeatureSpec>,
        learned_by_d: usize,
        learned_by_g: usize,
    ) -> Result<GanScenario> {
        let n = features.len();
        if learned_by_g > learned_by_d || learned_by_d > n {
            return Err(SimError::LearnedCountsInvalid {
                g: learned_by_g,
                d: learned_by_d,
                n,
            });
        }
        Ok(GanScenario {
            features,
            dependence: Dependence::Independent,
            learned_by_d,
            learned_by_g,
        })
    }

    /// Correlated features via explicit per-class joints; the per-feature
    /// marginals in `FeatureSpec` form are derived from the tables.
    pub fn explicit(
        names: Vec<(String, usize)>,
        real: Vec<f64>,
        gen: Vec<f64>,
        learned_by_d: usize,
        learned_by_g: usize,
    ) -> Result<GanScenario> {
        let n = names.len();
        if learned_by_g > learned_by_d || learned_by_d > n {
            return Err(SimError::LearnedCountsInvalid {
                g: learned_by_g,
                d: learned_by_d,
                n,
            });
        }
        let cells: usize = names.iter().map(|(_, a)| *a).product();
        for (side, table) in [("real", &real), ("generator", &gen)] {
            if table.len() != cells {
                return Err(SimError::InvalidJoint { side, expected: cells });
            }
            let mut sum = 0.0;
            for &v in table.iter() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(SimError::InvalidJoint { side, expected: cells });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > PMF_TOL {
                return Err(SimError::InvalidJoint { side, expected: cells });
            }
        }
        let sizes: Vec<usize> = names.iter().map(|(_, a)| *a).collect();
        let features = names
            .iter()
            .enumerate()
            .map(|(i, (name, alphabet))| FeatureSpec {
                name: name.clone(),
                alphabet: *alphabet,
                p_real: table_marginal(&real, &sizes, i),
                p_gen: table_marginal(&gen, &sizes, i),
            })
            .collect();
        Ok(GanScenario {
            features,
            dependence: Dependence::Explicit { real, gen },
            learned_by_d,
            learned_by_g,
        })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn learned_by_d(&self) -> usize {
        self.learned_by_d
    }

    pub fn learned_by_g(&self) -> usize {
        self.learned_by_g
    }

    pub fn dependence(&self) -> &Dependence {
        &self.dependence
    }

    pub fn alphabet_sizes(&self) -> Vec<usize> {
        self.features.iter().map(|f| f.alphabet).collect()
    }

    /// Full per-class tables over the feature product space (independent
    /// scenarios expand to products).
    pub(crate) fn side_tables(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.dependence {
            Dependence::Explicit { real, gen } => (real.clone(), gen.clone()),
            Dependence::Independent => {
                let sizes = self.alphabet_sizes();
                let cells: usize = sizes.iter().product();
                let mut real = Vec::with_capacity(cells);
                let mut gen = Vec::with_capacity(cells);
                let mut idx = vec![0usize; sizes.len()];
                for _ in 0..cells {
                    let mut pr = 1.0;
                    let mut pg = 1.0;
                    for (d, &i) in idx.iter().enumerate() {
                        pr *= self.features[d].p_real[i];
                        pg *= self.features[d].p_gen[i];
                    }
                    real.push(pr);
                    gen.push(pg);
                    for d in (0..sizes.len()).rev() {
                        idx[d] += 1;
                        if idx[d] < sizes[d] {
                            break;
                        }
                        idx[d] = 0;
                    }
                }
                (real, gen)
            }
        }
    }

    /// Scenario after the generator matches its next unmatched feature.
    ///
    /// Independent features swap in the real pmf. Explicit joints graft the
    /// real marginal over the newly matched prefix onto the generator's
    /// conditional for the remaining coordinates, so the matched prefix
    /// marginal agrees with the real side exactly.
    pub fn with_next_feature_matched(&self) -> Result<GanScenario> {
        let m = self.learned_by_g;
        if m >= self.num_features() {
            return Err(SimError::FeatureOutOfRange { index: m, n: self.num_features() });
        }
        let mut out = self.clone();
        match &mut out.dependence {
            Dependence::Independent => {
                out.features[m].p_gen = out.features[m].p_real.clone();
            }
            Dependence::Explicit { real, gen } => {
                let sizes = self.alphabet_sizes();
                let new_gen = graft_prefix(real, gen, &sizes, m + 1)?;
                *gen = new_gen.clone();
                for (i, f) in out.features.iter_mut().enumerate() {
                    f.p_gen = table_marginal(&new_gen, &sizes, i);
                }
            }
        }
        out.learned_by_g = m + 1;
        out.learned_by_d = out.learned_by_d.max(out.learned_by_g);
        Ok(out)
    }

    /// Scenario with the discriminator granted the next unlearned feature.
    pub fn with_next_feature_learned_by_d(&self) -> Result<GanScenario> {
        if self.learned_by_d >= self.num_features() {
            return Err(SimError::FeatureOutOfRange {
                index: self.learned_by_d,
                n: self.num_features(),
            });
        }
        let mut out = self.clone();
        out.learned_by_d += 1;
        Ok(out)
    }

    /// Scenario with the given features removed (used by the
    /// competition-independence check). Learned counts shrink by the number
    /// of removed features below each boundary.
    pub(crate) fn drop_features(&self, drop: &[usize]) -> Result<GanScenario> {
        let n = self.num_features();
        for &i in drop {
            if i >= n {
                return Err(SimError::FeatureOutOfRange { index: i, n });
            }
        }
        let keep: Vec<usize> = (0..n).filter(|i| !drop.contains(i)).collect();
        let features: Vec<FeatureSpec> =
            keep.iter().map(|&i| self.features[i].clone()).collect();
        let d = keep.iter().filter(|&&i| i < self.learned_by_d).count();
        let g = keep.iter().filter(|&&i| i < self.learned_by_g).count();
        let dependence = match &self.dependence {
            Dependence::Independent => Dependence::Independent,
            Dependence::Explicit { real, gen } => {
                let sizes = self.alphabet_sizes();
                Dependence::Explicit {
                    real: table_marginal_multi(real, &sizes, &keep),
                    gen: table_marginal_multi(gen, &sizes, &keep),
                }
            }
        };
        Ok(GanScenario { features, dependence, learned_by_d: d, learned_by_g: g })
    }
}

/// Marginal of a row-major table onto one coordinate.
fn table_marginal(table: &[f64], sizes: &[usize], coord: usize) -> Vec<f64> {
    let mut out = vec![0.0; sizes[coord]];
    let mut idx = vec![0usize; sizes.len()];
    for &p in table {
        out[idx[coord]] += p;
        for d in (0..sizes.len()).rev() {
            idx[d] += 1;
            if idx[d] < sizes[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

/// Marginal of a row-major table onto an ordered coordinate subset.
fn table_marginal_multi(table: &[f64], sizes: &[usize], keep: &[usize]) -> Vec<f64> {
    let out_sizes: Vec<usize> = keep.iter().map(|&i| sizes[i]).collect();
    let out_cells: usize = out_sizes.iter().product();
    let mut strides = vec![0usize; keep.len()];
    let mut acc = 1;
    for d in (0..keep.len()).rev() {
        strides[d] = acc;
        acc *= out_sizes[d];
    }
    let mut out = vec![0.0; out_cells];
    let mut idx = vec![0usize; sizes.len()];
    for &p in table {
        let mut o = 0;
        for (d, &k) in keep.iter().enumerate() {
            o += idx[k] * strides[d];
        }
        out[o] += p;
        for d in (0..sizes.len()).rev() {
            idx[d] += 1;
            if idx[d] < sizes[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

/// Replace the generator joint with `real marginal over the first `prefix`
/// coordinates x generator conditional of the rest given that prefix`.
fn graft_prefix(
    real: &[f64],
    gen: &[f64],
    sizes: &[usize],
    prefix: usize,
) -> Result<Vec<f64>> {
    let prefix_coords: Vec<usize> = (0..prefix).collect();
    let real_prefix = table_marginal_multi(real, sizes, &prefix_coords);
    let gen_prefix = table_marginal_multi(gen, sizes, &prefix_coords);
    let suffix_cells: usize = sizes[prefix..].iter().product();
    let mut out = vec![0.0; gen.len()];
    for (cell_prefix, (&rp, &gp)) in real_prefix.iter().zip(&gen_prefix).enumerate() {
        let base = cell_prefix * suffix_cells;
        if gp <= 0.0 {
            if rp > PMF_TOL {
                return Err(SimError::UndefinedConditional);
            }
            continue;
        }
        let scale = rp / gp;
        for s in 0..suffix_cells {
            out[base + s] = gen[base + s] * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feat(name: &str, p_real: Vec<f64>, p_gen: Vec<f64>) -> FeatureSpec {
        FeatureSpec::new(name, p_real, p_gen).unwrap()
    }

    #[test]
    fn feature_spec_validation() {
        assert!(FeatureSpec::new("f", vec![0.5, 0.5], vec![0.6, 0.4]).is_ok());
        assert!(FeatureSpec::new("f", vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(FeatureSpec::new("f", vec![0.5, 0.5], vec![0.5, 0.5, 0.0]).is_err());
        assert!(FeatureSpec::new("f", vec![-0.1, 1.1], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn learned_counts_must_nest() {
        let fs = vec![feat("a", vec![0.5, 0.5], vec![0.5, 0.5])];
        assert!(GanScenario::independent(fs.clone(), 0, 1).is_err());
        assert!(GanScenario::independent(fs.clone(), 2, 0).is_err());
        assert!(GanScenario::independent(fs, 1, 1).is_ok());
    }

    #[test]
    fn explicit_marginals_are_derived() {
        // Two binary features, perfectly correlated under real, independent
        // under the generator.
        let real = vec![0.5, 0.0, 0.0, 0.5];
        let gen = vec![0.25, 0.25, 0.25, 0.25];
        let s = GanScenario::explicit(
            vec![("a".into(), 2), ("b".into(), 2)],
            real,
            gen,
            0,
            0,
        )
        .unwrap();
        assert_eq!(s.features()[0].p_real, vec![0.5, 0.5]);
        assert_eq!(s.features()[1].p_gen, vec![0.5, 0.5]);
    }

    #[test]
    fn matching_grafts_the_real_prefix_exactly() {
        let real = vec![0.4, 0.1, 0.2, 0.3];
        let gen = vec![0.1, 0.3, 0.4, 0.2];
        let s = GanScenario::explicit(
            vec![("a".into(), 2), ("b".into(), 2)],
            real.clone(),
            gen,
            1,
            0,
        )
        .unwrap();
        let matched = s.with_next_feature_matched().unwrap();
        assert_eq!(matched.learned_by_g(), 1);
        let (_, new_gen) = matched.side_tables();
        // Marginal over coordinate 0 now matches the real side.
        let m = table_marginal(&new_gen, &[2, 2], 0);
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
        // Conditional of b given a is untouched: 0.1/0.4 stays 1/4 of cell mass.
        assert!((new_gen[0] / new_gen[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn independent_side_tables_are_products() {
        let s = GanScenario::independent(
            vec![
                feat("a", vec![0.3, 0.7], vec![0.5, 0.5]),
                feat("b", vec![0.2, 0.8], vec![0.6, 0.4]),
            ],
            0,
            0,
        )
        .unwrap();
        let (real, gen) = s.side_tables();
        assert!((real[0] - 0.06).abs() < 1e-15);
        assert!((real[3] - 0.56).abs() < 1e-15);
        assert!((gen[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn dropping_features_adjusts_learned_counts() {
        let s = GanScenario::independent(
            vec![
                feat("a", vec![0.5, 0.5], vec![0.5, 0.5]),
                feat("b", vec![0.5, 0.5], vec![0.5, 0.5]),
                feat("c", vec![0.9, 0.1], vec![0.1, 0.9]),
            ],
            2,
            2,
        )
        .unwrap();
        let reduced = s.drop_features(&[0]).unwrap();
        assert_eq!(reduced.num_features(), 2);
        assert_eq!(reduced.learned_by_d(), 1);
        assert_eq!(reduced.learned_by_g(), 1);
        assert_eq!(reduced.features()[1].name, "c");
    }

    #[test]
    fn graft_with_zero_generator_prefix_mass_errors() {
        let real = vec![0.5, 0.0, 0.0, 0.5];
        let gen = vec![0.0, 0.0, 0.5, 0.5]; // gen puts no mass on a=0
        let s = GanScenario::explicit(
            vec![("a".into(), 2), ("b".into(), 2)],
            real,
            gen,
            1,
            0,
        )
        .unwrap();
        assert!(matches!(
            s.with_next_feature_matched(),
            Err(SimError::UndefinedConditional)
        ));
    }
}
