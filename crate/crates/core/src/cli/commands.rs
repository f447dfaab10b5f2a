//! The five CLI commands: config parsing, execution, report writing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::competition::signal_surface;
use crate::gansim::{
    competition_free_check, confusion_check, discriminator_motivation, generator_incentive,
    lead_motivation, scenario_from_file, simulate_balancing, BalancePolicy, GanScenario,
    SimError, IDENTITY_TOL,
};
use crate::info::{JointPmf, VarSelector};
use crate::nn::{BalanceRule, OptKind};

use super::experiments::{
    run_sweep, run_table1, CellStatus, DataSource, DataSpec, SweepSpec, Table1Spec, TrainSpec,
};
use super::{write_atomic, CliError, ConfigFile, Result, RunStatus};

fn out_file(out_dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        context: format!("creating {}", out_dir.display()),
        source,
    })?;
    Ok(out_dir.join(name))
}

fn parse_optimizer(cfg: &ConfigFile) -> Result<OptKind> {
    match cfg.get_str("train", "optimizer", "adam")?.as_str() {
        "adam" => Ok(OptKind::Adam),
        "sgd" => Ok(OptKind::Sgd),
        other => Err(CliError::Config(format!("train.optimizer must be adam or sgd, got {other:?}"))),
    }
}

fn parse_data_spec(cfg: &ConfigFile) -> Result<DataSpec> {
    let defaults = DataSpec::default();
    let source = match cfg.get_str("data", "source", "synth")?.as_str() {
        "synth" => DataSource::Synth {
            per_class: cfg.get_usize("data", "per_class", 200)?,
        },
        "idx" => {
            let images = cfg.get_opt_str("data", "idx_images")?.ok_or_else(|| {
                CliError::Config("data.idx_images required for source = idx".into())
            })?;
            let labels = cfg.get_opt_str("data", "idx_labels")?.ok_or_else(|| {
                CliError::Config("data.idx_labels required for source = idx".into())
            })?;
            DataSource::Idx { images: images.into(), labels: labels.into() }
        }
        other => {
            return Err(CliError::Config(format!(
                "data.source must be synth or idx, got {other:?}"
            )))
        }
    };
    Ok(DataSpec {
        source,
        num_classes: cfg.get_usize("data", "num_classes", defaults.num_classes)?,
        image_size: cfg.get_usize("data", "image", defaults.image_size)?,
        train_examples: cfg.get_usize("data", "train", defaults.train_examples)?,
        test_examples: cfg.get_usize("data", "test", defaults.test_examples)?,
    })
}

fn parse_train_spec(cfg: &ConfigFile) -> Result<TrainSpec> {
    let defaults = TrainSpec::default();
    Ok(TrainSpec {
        phase1_epochs: cfg.get_usize("train", "phase1_epochs", defaults.phase1_epochs)?,
        probe_epochs: cfg.get_usize("train", "probe_epochs", defaults.probe_epochs)?,
        batch_size: cfg.get_usize("train", "batch", defaults.batch_size)?,
        lr: cfg.get_f64("train", "lr", defaults.lr)?,
        probe_lr: cfg.get_f64("train", "probe_lr", defaults.probe_lr)?,
        optimizer: parse_optimizer(cfg)?,
    })
}

fn run_seed(cfg: &ConfigFile, seed_flag: Option<u64>) -> Result<u64> {
    let from_cfg = cfg.get_u64("", "seed", 0)?;
    Ok(seed_flag.unwrap_or(from_cfg))
}

/// `surface`: exact signal values over a grid, written as CSV.
pub fn cmd_signal_surface(
    cfg: &ConfigFile,
    seed_flag: Option<u64>,
    out_dir: &Path,
) -> Result<RunStatus> {
    let _ = run_seed(cfg, seed_flag)?; // seeded for interface symmetry; the surface is exact
    let rho_l = cfg.get_f64_list("grid", "rho_l", &linspace01(11))?;
    let rho_r = cfg.get_f64_list("grid", "rho_r", &linspace01(11))?;
    let num_classes = cfg.get_usize("grid", "num_classes", 10)?;
    cfg.reject_unknown()?;
    let surface = signal_surface(&rho_l, &rho_r, num_classes)?;
    let path = out_file(out_dir, "surface.csv")?;
    write_atomic(&path, &surface.to_csv())?;
    let last_l = rho_l.len() - 1;
    let last_r = rho_r.len() - 1;
    println!("surface: {} x {} cells -> {}", rho_l.len(), rho_r.len(), path.display());
    println!(
        "corner (rho_l={}, rho_r={}): {:.6} bits",
        rho_l[0], rho_r[0], surface.values[0][0]
    );
    println!(
        "corner (rho_l={}, rho_r={}): {:.6} bits",
        rho_l[0], rho_r[last_r], surface.values[0][last_r]
    );
    println!(
        "corner (rho_l={}, rho_r={}): {:.6} bits",
        rho_l[last_l], rho_r[0], surface.values[last_l][0]
    );
    println!(
        "corner (rho_l={}, rho_r={}): {:.6} bits",
        rho_l[last_l], rho_r[last_r], surface.values[last_l][last_r]
    );
    Ok(RunStatus::Success)
}

fn linspace01(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// `sweep`: per-cell two-phase probe accuracy against the analytic signal.
pub fn cmd_probe_sweep(
    cfg: &ConfigFile,
    seed_flag: Option<u64>,
    out_dir: &Path,
) -> Result<RunStatus> {
    let defaults = SweepSpec::default();
    let spec = SweepSpec {
        rho_l_grid: cfg.get_f64_list("grid", "rho_l", &defaults.rho_l_grid)?,
        rho_r_grid: cfg.get_f64_list("grid", "rho_r", &defaults.rho_r_grid)?,
        seeds_per_cell: cfg.get_usize("grid", "seeds", defaults.seeds_per_cell)?,
        data: parse_data_spec(cfg)?,
        train: parse_train_spec(cfg)?,
        seed: run_seed(cfg, seed_flag)?,
    };
    cfg.reject_unknown()?;
    let report = run_sweep(&spec)?;
    write_atomic(&out_file(out_dir, "sweep.csv")?, &report.to_csv())?;

    let mut summary = String::from("probe sweep summary\n");
    let _ = writeln!(summary, "seed: {}", spec.seed);
    let _ = writeln!(
        summary,
        "grid: {} rho_l x {} rho_r x {} seed(s) = {} cells",
        spec.rho_l_grid.len(),
        spec.rho_r_grid.len(),
        spec.seeds_per_cell,
        report.cells.len()
    );
    let _ = writeln!(
        summary,
        "data: {} train / {} test examples per cell, {} classes",
        spec.data.train_examples, spec.data.test_examples, spec.data.num_classes
    );
    let _ = writeln!(summary, "failed cells (excluded from the correlation): {}", report.failed);
    match report.pearson_r {
        Some(r) => {
            let _ = writeln!(summary, "pearson_r(signal_bits, accuracy) = {r:.4}");
        }
        None => {
            let _ = writeln!(summary, "pearson_r(signal_bits, accuracy) = undefined");
        }
    }
    write_atomic(&out_file(out_dir, "summary.txt")?, &summary)?;
    print!("{summary}");
    if report.failed > 0 {
        Ok(RunStatus::ChecksFailed)
    } else {
        Ok(RunStatus::Success)
    }
}

/// `table1`: extractor comparison (supervised/AE/GAN/WGAN, trained vs
/// untrained init) probed on the right label.
pub fn cmd_table1(cfg: &ConfigFile, seed_flag: Option<u64>, out_dir: &Path) -> Result<RunStatus> {
    let defaults = Table1Spec::default();
    let balance = match cfg.get_str("train", "balance", "fixed")?.as_str() {
        "fixed" => BalanceRule::FixedAlternation {
            d_steps: cfg.get_usize("train", "d_steps", 1)?,
            g_steps: cfg.get_usize("train", "g_steps", 1)?,
        },
        "loss-threshold" => BalanceRule::LossThreshold {
            tau_d: cfg.get_f64("train", "tau_d", std::f64::consts::LN_2)?,
        },
        other => {
            return Err(CliError::Config(format!(
                "train.balance must be fixed or loss-threshold, got {other:?}"
            )))
        }
    };
    let spec = Table1Spec {
        rho_l: cfg.get_f64("data", "rho_l", defaults.rho_l)?,
        rho_r: cfg.get_f64("data", "rho_r", defaults.rho_r)?,
        data: parse_data_spec(cfg)?,
        train: parse_train_spec(cfg)?,
        ae_epochs: cfg.get_usize("train", "ae_epochs", defaults.ae_epochs)?,
        gan_epochs: cfg.get_usize("train", "gan_epochs", defaults.gan_epochs)?,
        wgan_epochs: cfg.get_usize("train", "wgan_epochs", defaults.wgan_epochs)?,
        critic_steps: cfg.get_usize("train", "critic_steps", defaults.critic_steps)?,
        wgan_clip: cfg.get_f64("train", "wgan_clip", defaults.wgan_clip)?,
        gan_balance: balance,
        seed: run_seed(cfg, seed_flag)?,
    };
    cfg.reject_unknown()?;
    let report = run_table1(&spec)?;
    write_atomic(&out_file(out_dir, "table1.csv")?, &report.to_csv())?;

    let mut summary = String::from("feature extractor comparison\n");
    let _ = writeln!(
        summary,
        "rho_l = {}, rho_r = {}, seed = {}",
        spec.rho_l, spec.rho_r, spec.seed
    );
    let _ = writeln!(summary, "probe accuracy on the right label; untrained init in brackets\n");
    let mut header = String::from("model    ");
    let mut trained = String::from("trained  ");
    let mut untrained = String::from("baseline ");
    for row in &report.rows {
        let _ = write!(header, "| {:^10} ", row.model);
        match row.status {
            CellStatus::Ok => {
                let _ = write!(trained, "| {:^10.4} ", row.trained_acc);
                let _ = write!(untrained, "| ({:^8.4}) ", row.untrained_acc);
            }
            CellStatus::Failed(_) => {
                let _ = write!(trained, "| {:^10} ", "failed");
                let _ = write!(untrained, "| {:^10} ", "failed");
            }
        }
    }
    let _ = writeln!(summary, "{header}");
    let _ = writeln!(summary, "{trained}");
    let _ = writeln!(summary, "{untrained}");
    for row in &report.rows {
        if let CellStatus::Failed(msg) = &row.status {
            let _ = writeln!(summary, "{} failed: {msg}", row.model);
        }
    }
    write_atomic(&out_file(out_dir, "summary.txt")?, &summary)?;
    print!("{summary}");
    if report.failed > 0 {
        Ok(RunStatus::ChecksFailed)
    } else {
        Ok(RunStatus::Success)
    }
}

fn parse_policy(cfg: &ConfigFile) -> Result<BalancePolicy> {
    let lead = cfg.get_usize("run", "lead", 1)?;
    match cfg.get_str("run", "policy", "g-catchup")?.as_str() {
        "strict-alternation" => Ok(BalancePolicy::StrictAlternation),
        "d-leads-by-l" => Ok(BalancePolicy::DLeadsBy(lead)),
        "g-catchup" => Ok(BalancePolicy::GCatchup),
        other => Err(CliError::Config(format!(
            "run.policy must be strict-alternation, d-leads-by-l, or g-catchup, got {other:?}"
        ))),
    }
}

struct CheckList {
    lines: Vec<String>,
    failed: usize,
}

impl CheckList {
    fn new() -> CheckList {
        CheckList { lines: Vec::new(), failed: 0 }
    }

    fn push(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        self.lines.push(format!(
            "check {name}: {} ({detail})",
            if ok { "PASS" } else { "FAIL" }
        ));
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.lines.push(format!("check {name}: SKIP ({why})"));
    }

    fn violation(&mut self, name: &str, err: &SimError) {
        self.failed += 1;
        self.lines.push(format!("check {name}: FAIL (precondition violated: {err})"));
    }
}

/// `gansim`: run the identity battery on a scenario and simulate a policy.
pub fn cmd_gansim(cfg: &ConfigFile, seed_flag: Option<u64>, out_dir: &Path) -> Result<RunStatus> {
    let _ = run_seed(cfg, seed_flag)?; // scenarios are exact; seed kept for interface symmetry
    let scenario_path = cfg.get_opt_str("scenario", "file")?.ok_or_else(|| {
        CliError::Config("scenario.file is required for gansim".into())
    })?;
    let policy = parse_policy(cfg)?;
    cfg.reject_unknown()?;
    let scenario = scenario_from_file(&scenario_path)?;
    let mut checks = CheckList::new();
    run_identity_battery(&scenario, &mut checks);

    let trace = simulate_balancing(&scenario, policy)?;
    let log4 = (4.0f64).ln();
    match policy {
        BalancePolicy::GCatchup => {
            let v = trace.final_value_nats();
            checks.push(
                "catchup-restores-confusion",
                (v - log4).abs() <= IDENTITY_TOL,
                format!("final V = {v:.9} nats vs log 4 = {log4:.9}"),
            );
        }
        _ => {
            let ok = trace.initial_value_nats <= log4 + IDENTITY_TOL
                && trace.steps.iter().all(|s| s.value_nats <= log4 + IDENTITY_TOL);
            checks.push("value-capped-by-log4", ok, format!("{} steps", trace.steps.len()));
        }
    }
    write_atomic(&out_file(out_dir, "gansim_trace.csv")?, &trace.to_csv())?;

    let mut summary = String::from("adversarial scenario checks\n");
    let _ = writeln!(summary, "scenario: {scenario_path}");
    let _ = writeln!(
        summary,
        "features: {} (G matched {}, D knows {})",
        scenario.num_features(),
        scenario.learned_by_g(),
        scenario.learned_by_d()
    );
    for line in &checks.lines {
        let _ = writeln!(summary, "{line}");
    }
    let _ = writeln!(summary, "failed checks: {}", checks.failed);
    write_atomic(&out_file(out_dir, "summary.txt")?, &summary)?;
    print!("{summary}");
    if checks.failed > 0 {
        Ok(RunStatus::ChecksFailed)
    } else {
        Ok(RunStatus::Success)
    }
}

/// Run every identity whose preconditions the scenario satisfies.
fn run_identity_battery(scenario: &GanScenario, checks: &mut CheckList) {
    let matched = scenario.learned_by_g();
    let known = scenario.learned_by_d();
    let lead = known - matched;
    let n = scenario.num_features();

    match confusion_check(scenario, matched) {
        Ok(report) => checks.push(
            "confusion-on-matched-prefix",
            report.confused,
            format!("H(y|f_0..f_{matched}) = {:.9} bits", report.h_bits),
        ),
        Err(e) => checks.violation("confusion-on-matched-prefix", &e),
    }

    if lead == 0 && known < n {
        match discriminator_motivation(scenario, known) {
            Ok(m) => checks.push(
                "motivation-at-confusion",
                m.exact >= m.lower_bound - IDENTITY_TOL,
                format!("exact = {:.9}, lower bound = {:.9} bits", m.exact, m.lower_bound),
            ),
            Err(e) => checks.violation("motivation-at-confusion", &e),
        }
        match competition_free_check(scenario, known) {
            Ok(ok) => checks.push(
                "bound-free-of-prior-features",
                ok,
                "lower bound invariant under prefix removal".into(),
            ),
            Err(e) => checks.violation("bound-free-of-prior-features", &e),
        }
    } else if lead == 0 {
        checks.skip("motivation-at-confusion", "no unlearned feature left");
    }

    if lead > 0 {
        if known < n {
            match lead_motivation(scenario, matched, lead) {
                Ok(v) => checks.push(
                    "lead-motivation-two-paths",
                    true,
                    format!("I(y; next | known) = {v:.9} bits, paths agree"),
                ),
                Err(e) => checks.violation("lead-motivation-two-paths", &e),
            }
        } else {
            checks.skip("lead-motivation-two-paths", "no feature beyond the lead block");
        }
        match generator_incentive(scenario, matched, lead) {
            Ok((incentive, bound)) => checks.push(
                "generator-incentive-capped",
                incentive <= bound + IDENTITY_TOL,
                format!("incentive = {incentive:.9} <= bound = {bound:.9} bits"),
            ),
            Err(e) => checks.violation("generator-incentive-capped", &e),
        }
    }
}

/// Operations exposed by `micalc`.
#[derive(Debug, Clone)]
pub enum MicalcOp {
    Entropy { vars: Vec<String> },
    MutualInformation { a: Vec<String>, b: Vec<String> },
    ConditionalMutualInformation { a: Vec<String>, b: Vec<String>, given: Vec<String> },
    SignalSequence { y: Vec<String>, features: Vec<Vec<String>> },
}

fn selector(pmf: &JointPmf, names: &[String]) -> Result<VarSelector> {
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(pmf.select(&refs)?)
}

/// `micalc`: direct information measures over a serialized joint pmf;
/// results go to stdout.
pub fn cmd_micalc(pmf_path: &Path, op: &MicalcOp) -> Result<RunStatus> {
    let pmf = JointPmf::read_from(pmf_path)?;
    match op {
        MicalcOp::Entropy { vars } => {
            let sel = selector(&pmf, vars)?;
            println!("entropy({}) = {} bits", vars.join(","), pmf.entropy(&sel)?);
        }
        MicalcOp::MutualInformation { a, b } => {
            let sa = selector(&pmf, a)?;
            let sb = selector(&pmf, b)?;
            println!(
                "mi({}; {}) = {} bits",
                a.join(","),
                b.join(","),
                pmf.mutual_information(&sa, &sb)?
            );
        }
        MicalcOp::ConditionalMutualInformation { a, b, given } => {
            let sa = selector(&pmf, a)?;
            let sb = selector(&pmf, b)?;
            let sg = selector(&pmf, given)?;
            println!(
                "cmi({}; {} | {}) = {} bits",
                a.join(","),
                b.join(","),
                given.join(","),
                pmf.conditional_mutual_information(&sa, &sb, &sg)?
            );
        }
        MicalcOp::SignalSequence { y, features } => {
            let sy = selector(&pmf, y)?;
            let sels: Vec<VarSelector> = features
                .iter()
                .map(|f| selector(&pmf, f))
                .collect::<Result<_>>()?;
            let signals = pmf.signal_sequence(&sy, &sels)?;
            for (i, (f, s)) in features.iter().zip(&signals).enumerate() {
                println!("signal[{i}]({}) = {s} bits", f.join(","));
            }
            println!("sum = {} bits", signals.iter().sum::<f64>());
            println!("entropy({}) = {} bits", y.join(","), pmf.entropy(&sy)?);
        }
    }
    Ok(RunStatus::Success)
}
