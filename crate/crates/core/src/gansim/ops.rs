//! Scenario-level information operations: confusion checks, motivations,
//! bounds, and the lead-scenario identities.

use crate::info::{JointPmf, VarSelector};

use super::{GanScenario, Result, SimError, IDENTITY_TOL};

/// Joint over `(y, f_0, ..., f_{n-1})` with `P(y = 1) = 0.5`; the feature
/// block follows the real side when `y = 1` and the generator side when
/// `y = 0`.
pub fn scenario_joint(s: &GanScenario) -> Result<JointPmf> {
    let (real, gen) = s.side_tables();
    let mut vars: Vec<(String, usize)> = vec![("y".into(), 2)];
    for f in s.features() {
        vars.push((f.name.clone(), f.alphabet));
    }
    let cells = real.len();
    let mut table = Vec::with_capacity(2 * cells);
    for p in &gen {
        table.push(0.5 * p);
    }
    for p in &real {
        table.push(0.5 * p);
    }
    Ok(JointPmf::new(vars, table)?)
}

fn y_selector() -> VarSelector {
    VarSelector::new(vec![0])
}

/// `H(y | f_0..f_{upto-1})` in bits on the scenario joint.
fn h_y_given(joint: &JointPmf, features: &[usize]) -> Result<f64> {
    let given = VarSelector::new(features.iter().map(|&i| i + 1).collect::<Vec<usize>>());
    Ok(joint.conditional_entropy(&y_selector(), &given)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionReport {
    /// True when the posterior over `y` is 0.5 on every reachable tuple.
    pub confused: bool,
    /// `H(y | f_0..f_{upto-1})` in bits.
    pub h_bits: f64,
}

/// Check the confusion state over the first `upto` features.
pub fn confusion_check(s: &GanScenario, upto: usize) -> Result<ConfusionReport> {
    if upto > s.num_features() {
        return Err(SimError::FeatureOutOfRange { index: upto, n: s.num_features() });
    }
    let joint = scenario_joint(s)?;
    let h_bits = h_y_given(&joint, &(0..upto).collect::<Vec<usize>>())?;
    Ok(ConfusionReport { confused: (h_bits - 1.0).abs() <= IDENTITY_TOL, h_bits })
}

fn require_confusion(s: &GanScenario, upto: usize) -> Result<JointPmf> {
    let joint = scenario_joint(s)?;
    let h_bits = h_y_given(&joint, &(0..upto).collect::<Vec<usize>>())?;
    if (h_bits - 1.0).abs() > IDENTITY_TOL {
        return Err(SimError::ConfusionBroken { upto, h_bits });
    }
    Ok(joint)
}

/// Exact motivation and its feature-local lower bound, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motivation {
    /// `I(y; f_k | f_0..f_{k-1}) = 1 - H(y | f_0..f_k)`.
    pub exact: f64,
    /// `1 - H(y | f_k)`; independent of the previously learned features.
    pub lower_bound: f64,
}

/// Motivation for learning feature `k` from a confusion state over the
/// features before it.
pub fn discriminator_motivation(s: &GanScenario, k: usize) -> Result<Motivation> {
    if k >= s.num_features() {
        return Err(SimError::FeatureOutOfRange { index: k, n: s.num_features() });
    }
    let joint = require_confusion(s, k)?;
    let prior: Vec<usize> = (0..k).collect();
    let mut with_k = prior.clone();
    with_k.push(k);
    let exact = (1.0 - h_y_given(&joint, &with_k)?).max(0.0);
    let lower_bound = (1.0 - h_y_given(&joint, &[k])?).max(0.0);
    if exact < lower_bound - IDENTITY_TOL {
        return Err(SimError::IdentityViolation {
            context: "motivation fell below its feature-local lower bound",
            delta: lower_bound - exact,
        });
    }
    Ok(Motivation { exact, lower_bound })
}

/// Verify that the lower bound is invariant to removing any subset of the
/// already-learned features (all such subsets preserve confusion).
pub fn competition_free_check(s: &GanScenario, k: usize) -> Result<bool> {
    let baseline = discriminator_motivation(s, k)?.lower_bound;
    if k >= usize::BITS as usize {
        return Err(SimError::FeatureOutOfRange { index: k, n: s.num_features() });
    }
    for mask in 0..(1usize << k) {
        let drop: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        if drop.is_empty() {
            continue;
        }
        let reduced = s.drop_features(&drop)?;
        let new_k = k - drop.len();
        // Dropping confusion features cannot break confusion: conditioning
        // on fewer variables keeps H(y | .) = 1. The motivation call
        // revalidates anyway.
        let reduced_motivation = discriminator_motivation(&reduced, new_k)?;
        if (reduced_motivation.lower_bound - baseline).abs() > IDENTITY_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Shared preconditions for the lead-scenario quantities: confusion on the
/// first `matched` features, a lead block `matched..matched+lead` known to
/// the discriminator that genuinely breaks confusion, and joint redundancy
/// of the matched prefix given the lead block.
fn require_lead(
    s: &GanScenario,
    matched: usize,
    lead: usize,
    include_target: bool,
) -> Result<JointPmf> {
    let n = s.num_features();
    let need = matched + lead + usize::from(include_target);
    if lead == 0 || need > n {
        return Err(SimError::FeatureOutOfRange { index: need, n });
    }
    if s.learned_by_d() < matched + lead {
        return Err(SimError::LearnedCountsInvalid {
            g: s.learned_by_g(),
            d: s.learned_by_d(),
            n,
        });
    }
    let joint = require_confusion(s, matched)?;
    let block: Vec<usize> = (matched..matched + lead).collect();
    let h_block = h_y_given(&joint, &block)?;
    if h_block >= 1.0 - IDENTITY_TOL {
        return Err(SimError::NoConfusionBreak { h_bits: h_block });
    }
    // The appendix identities drop the matched prefix from conditioning
    // sets; that is only sound when the prefix carries nothing jointly.
    let mut sets: Vec<Vec<usize>> = vec![block.clone()];
    if include_target {
        let mut with_target = block;
        with_target.push(matched + lead);
        sets.push(with_target);
    }
    for set in sets {
        let mut with_prefix: Vec<usize> = (0..matched).collect();
        with_prefix.extend(&set);
        let h_with = h_y_given(&joint, &with_prefix)?;
        let h_without = h_y_given(&joint, &set)?;
        if (h_with - h_without).abs() > IDENTITY_TOL {
            return Err(SimError::PrefixNotRedundant {
                with_prefix: h_with,
                without_prefix: h_without,
            });
        }
    }
    Ok(joint)
}

/// Discriminator motivation for the feature after a lead block:
/// `I(y; f_{m+l} | f_0..f_{m+l-1})`, verified against the lead-block-only
/// form `H(y|f_m..f_{m+l-1}) - H(y|f_m..f_{m+l})`.
///
/// `matched` counts the confusion features, `lead` the extra features the
/// discriminator has over the generator.
pub fn lead_motivation(s: &GanScenario, matched: usize, lead: usize) -> Result<f64> {
    let joint = require_lead(s, matched, lead, true)?;
    let target = matched + lead;
    let full_prior: Vec<usize> = (0..target).collect();
    let mut full_with: Vec<usize> = full_prior.clone();
    full_with.push(target);
    let exact = h_y_given(&joint, &full_prior)? - h_y_given(&joint, &full_with)?;

    let block: Vec<usize> = (matched..target).collect();
    let mut block_with = block.clone();
    block_with.push(target);
    let alt = h_y_given(&joint, &block)? - h_y_given(&joint, &block_with)?;
    if (exact - alt).abs() > IDENTITY_TOL {
        return Err(SimError::IdentityViolation {
            context: "lead motivation computed with and without the matched prefix",
            delta: (exact - alt).abs(),
        });
    }
    Ok(exact.max(0.0))
}

/// Generator incentive for matching the first lead feature, and its cap.
///
/// The incentive is the entropy the discriminator objective regains when the
/// generator matches feature `matched`: `H'(y | f_0..f_{m+l-1}) -
/// H(y | f_0..f_{m+l-1})` where the primed term is evaluated on the scenario
/// with that feature matched. The cap is `I(y; f_m..f_{m+l-1})`, the summed
/// discriminator motivation for the whole lead block.
pub fn generator_incentive(s: &GanScenario, matched: usize, lead: usize) -> Result<(f64, f64)> {
    let joint = require_lead(s, matched, lead, false)?;
    let known: Vec<usize> = (0..matched + lead).collect();
    let h_now = h_y_given(&joint, &known)?;

    if s.learned_by_g() != matched {
        return Err(SimError::LearnedCountsInvalid {
            g: s.learned_by_g(),
            d: s.learned_by_d(),
            n: s.num_features(),
        });
    }
    let matched_scenario = s.with_next_feature_matched()?;
    let joint_after = scenario_joint(&matched_scenario)?;
    let h_after = h_y_given(&joint_after, &known)?;
    let incentive = h_after - h_now;

    let block: Vec<usize> = (matched..matched + lead).collect();
    let bound = (1.0 - h_y_given(&joint, &block)?).max(0.0);
    if incentive > bound + IDENTITY_TOL {
        return Err(SimError::IdentityViolation {
            context: "generator incentive exceeded the lead-block information",
            delta: incentive - bound,
        });
    }
    Ok((incentive.max(0.0), bound))
}

/// Adversarial objective value in nats given the discriminator's known
/// feature prefix: `2 ln(2) H(y | f_0..f_{upto-1})`, `log 4` at confusion.
pub fn value_function_nats(s: &GanScenario, upto: usize) -> Result<f64> {
    if upto > s.num_features() {
        return Err(SimError::FeatureOutOfRange { index: upto, n: s.num_features() });
    }
    let joint = scenario_joint(s)?;
    let h = h_y_given(&joint, &(0..upto).collect::<Vec<usize>>())?;
    Ok(2.0 * std::f64::consts::LN_2 * h)
}
