//! Step-by-step feature acquisition under a balancing policy.
//!
//! Each step grants one feature to one actor. A discriminator step learns
//! the next unknown feature and logs its motivation (conditional information
//! gain given everything it already knows, on the current effective
//! distributions). A generator step matches its next unmatched feature and
//! logs the entropy the adversarial objective regains. After every step the
//! trace records the objective value given the discriminator's knowledge.

use std::fmt::Write as _;
use std::path::Path;

use crate::info::VarSelector;

use super::ops::{scenario_joint, value_function_nats};
use super::{GanScenario, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actor {
    D,
    G,
}

impl Actor {
    pub fn tag(self) -> &'static str {
        match self {
            Actor::D => "D",
            Actor::G => "G",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub actor: Actor,
    /// Index of the feature granted at this step.
    pub feature: usize,
    /// Information gain for the acting network, in bits.
    pub motivation_bits: f64,
    /// Adversarial objective value after the step, in nats.
    pub value_nats: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BalanceTrace {
    /// Objective value before any step.
    pub initial_value_nats: f64,
    pub steps: Vec<TraceStep>,
}

impl BalanceTrace {
    pub fn final_value_nats(&self) -> f64 {
        self.steps.last().map_or(self.initial_value_nats, |s| s.value_nats)
    }

    /// CSV rows `step,actor,feature,motivation_bits,V_nats`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,actor,feature,motivation_bits,V_nats\n");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{:.9},{:.9}",
                s.step,
                s.actor.tag(),
                s.feature,
                s.motivation_bits,
                s.value_nats
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalancePolicy {
    /// D learns one feature, then G matches one, until both run out.
    StrictAlternation,
    /// D alone learns until its lead over G reaches `l`.
    DLeadsBy(usize),
    /// G alone matches until confusion is restored.
    GCatchup,
}

struct Simulation {
    scenario: GanScenario,
    trace: BalanceTrace,
}

impl Simulation {
    fn value(&self) -> Result<f64> {
        value_function_nats(&self.scenario, self.scenario.learned_by_d())
    }

    /// `H(y | f_0..f_{upto-1})` on the current effective scenario.
    fn h_known(&self, upto: usize) -> Result<f64> {
        let joint = scenario_joint(&self.scenario)?;
        let given = VarSelector::new((1..=upto).collect::<Vec<usize>>());
        Ok(joint.conditional_entropy(&VarSelector::new(vec![0]), &given)?)
    }

    fn d_step(&mut self) -> Result<()> {
        let k = self.scenario.learned_by_d();
        let before = self.h_known(k)?;
        self.scenario = self.scenario.with_next_feature_learned_by_d()?;
        let after = self.h_known(k + 1)?;
        let motivation = (before - after).max(0.0);
        let value = self.value()?;
        self.trace.steps.push(TraceStep {
            step: self.trace.steps.len(),
            actor: Actor::D,
            feature: k,
            motivation_bits: motivation,
            value_nats: value,
        });
        Ok(())
    }

    fn g_step(&mut self) -> Result<()> {
        let m = self.scenario.learned_by_g();
        let known = self.scenario.learned_by_d();
        let before = self.h_known(known)?;
        self.scenario = self.scenario.with_next_feature_matched()?;
        let after = self.h_known(known)?;
        let motivation = (after - before).max(0.0);
        let value = self.value()?;
        self.trace.steps.push(TraceStep {
            step: self.trace.steps.len(),
            actor: Actor::G,
            feature: m,
            motivation_bits: motivation,
            value_nats: value,
        });
        Ok(())
    }
}

/// Run a policy to completion and return the trace.
pub fn simulate_balancing(s: &GanScenario, policy: BalancePolicy) -> Result<BalanceTrace> {
    let mut sim = Simulation { scenario: s.clone(), trace: BalanceTrace::default() };
    sim.trace.initial_value_nats = sim.value()?;
    let n = s.num_features();
    match policy {
        BalancePolicy::StrictAlternation => loop {
            let mut progressed = false;
            if sim.scenario.learned_by_d() < n {
                sim.d_step()?;
                progressed = true;
            }
            if sim.scenario.learned_by_g() < sim.scenario.learned_by_d() {
                sim.g_step()?;
                progressed = true;
            }
            if !progressed {
                break;
            }
        },
        BalancePolicy::DLeadsBy(l) => {
            while sim.scenario.learned_by_d() - sim.scenario.learned_by_g() < l {
                if sim.scenario.learned_by_d() >= n {
                    return Err(SimError::PolicyStuck(format!(
                        "cannot build a lead of {l}: only {n} features exist"
                    )));
                }
                sim.d_step()?;
            }
        }
        BalancePolicy::GCatchup => {
            while sim.scenario.learned_by_g() < sim.scenario.learned_by_d() {
                sim.g_step()?;
            }
        }
    }
    Ok(sim.trace)
}
