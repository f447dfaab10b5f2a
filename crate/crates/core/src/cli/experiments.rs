//! Experiment runners behind the `sweep` and `table1` commands.
//!
//! Cells and model jobs are independent: each derives its RNG streams from
//! the run seed and its own coordinates, runs on the parallel backend, and
//! is collected in index order, so reports are identical across thread
//! counts.

use std::path::PathBuf;

use crate::competition::{task_signal, CorruptionParams};
use crate::data::{gen_dataset, load_idx, synth_bank, Dataset, DigitBank, Split};
use crate::nn::{
    train_autoencoder, train_gan, train_probe, train_supervised, train_wgan, BalanceRule,
    FeatureExtractor, ModelGraph, OptKind, ProbeTarget, TrainConfig,
};
use crate::par;
use crate::seed;

use super::{stats::pearson_r, CliError, Result};

/// Where digit images come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Built-in procedural glyphs.
    Synth { per_class: usize },
    /// IDX image/label files (28x28 inputs are pooled down to the target
    /// size when needed).
    Idx { images: PathBuf, labels: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub source: DataSource,
    pub num_classes: usize,
    pub image_size: usize,
    pub train_examples: usize,
    pub test_examples: usize,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            source: DataSource::Synth { per_class: 200 },
            num_classes: 10,
            image_size: 14,
            train_examples: 8000,
            test_examples: 2000,
        }
    }
}

impl DataSpec {
    pub fn build_bank(&self, seed_value: u64) -> Result<DigitBank> {
        let bank = match &self.source {
            DataSource::Synth { per_class } => {
                synth_bank(self.num_classes, *per_class, self.image_size, seed_value)?
            }
            DataSource::Idx { images, labels } => {
                let bank = load_idx(images, labels)?;
                if bank.height() == self.image_size && bank.width() == self.image_size {
                    bank
                } else if bank.height() == 2 * self.image_size
                    && bank.width() == 2 * self.image_size
                {
                    bank.downsample_2x()?
                } else {
                    return Err(CliError::Config(format!(
                        "IDX images are {}x{} but the config wants {}x{}",
                        bank.height(),
                        bank.width(),
                        self.image_size,
                        self.image_size
                    )));
                }
            }
        };
        if bank.num_classes() < self.num_classes {
            return Err(CliError::Config(format!(
                "bank provides {} classes, config wants {}",
                bank.num_classes(),
                self.num_classes
            )));
        }
        Ok(bank)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSpec {
    pub phase1_epochs: usize,
    pub probe_epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub probe_lr: f64,
    pub optimizer: OptKind,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            phase1_epochs: 5,
            probe_epochs: 10,
            batch_size: 32,
            lr: 1e-3,
            probe_lr: 1e-2,
            optimizer: OptKind::Adam,
        }
    }
}

impl TrainSpec {
    fn phase1_config(&self, seed_value: u64) -> TrainConfig {
        TrainConfig {
            optimizer: self.optimizer,
            lr: self.lr,
            batch_size: self.batch_size,
            epochs: self.phase1_epochs,
            seed: seed_value,
            ..TrainConfig::default()
        }
    }

    fn probe_config(&self, seed_value: u64) -> TrainConfig {
        TrainConfig {
            optimizer: self.optimizer,
            lr: self.probe_lr,
            batch_size: self.batch_size,
            epochs: self.probe_epochs,
            seed: seed_value,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub rho_l_grid: Vec<f64>,
    pub rho_r_grid: Vec<f64>,
    /// Independent repetitions per grid cell.
    pub seeds_per_cell: usize,
    pub data: DataSpec,
    pub train: TrainSpec,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            rho_l_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            rho_r_grid: vec![0.25, 0.5, 0.75, 1.0],
            seeds_per_cell: 1,
            data: DataSpec::default(),
            train: TrainSpec::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub rho_l: f64,
    pub rho_r: f64,
    /// Seed the cell's streams were derived from.
    pub seed: u64,
    pub signal_bits: f64,
    /// Held-out probe accuracy on the right label; NaN when the cell failed.
    pub accuracy: f64,
    pub status: CellStatus,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub cells: Vec<CellResult>,
    /// Pearson correlation between signal and accuracy over ok cells; absent
    /// when fewer than two ok cells exist or variance degenerates.
    pub pearson_r: Option<f64>,
    pub failed: usize,
}

impl SweepReport {
    /// `rho_l,rho_r,signal_bits,accuracy,seed,status` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho_l,rho_r,signal_bits,accuracy,seed,status\n");
        for c in &self.cells {
            let status = match &c.status {
                CellStatus::Ok => "ok",
                CellStatus::Failed(_) => "failed",
            };
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{},{}\n",
                c.rho_l, c.rho_r, c.signal_bits, c.accuracy, c.seed, status
            ));
        }
        out
    }

    /// Mean ok-cell accuracy at a grid point, if any replica succeeded.
    pub fn mean_accuracy_at(&self, rho_l: f64, rho_r: f64) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for c in &self.cells {
            if c.rho_l == rho_l && c.rho_r == rho_r && matches!(c.status, CellStatus::Ok) {
                sum += c.accuracy;
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }
}

/// Run one sweep cell end to end: data, phase-1 supervised training on the
/// left label, freeze, phase-2 probe on the right label.
fn run_cell(
    bank: &DigitBank,
    params: &CorruptionParams,
    data: &DataSpec,
    train: &TrainSpec,
    cell_seed: u64,
) -> std::result::Result<f64, String> {
    let fail = |e: &dyn std::fmt::Display| e.to_string();
    let train_ds = gen_dataset(
        bank,
        params,
        data.train_examples,
        seed::mix(cell_seed, seed::salt("train-data")),
        Split::Train,
    )
    .map_err(|e| fail(&e))?;
    let test_ds = gen_dataset(
        bank,
        params,
        data.test_examples,
        seed::mix(cell_seed, seed::salt("test-data")),
        Split::Test,
    )
    .map_err(|e| fail(&e))?;
    let model = ModelGraph::twin_classifier(
        bank.pixels(),
        params.num_classes,
        seed::mix(cell_seed, seed::salt("model")),
    );
    let outcome = train_supervised(
        model,
        &train_ds,
        &train.phase1_config(seed::mix(cell_seed, seed::salt("phase1"))),
    )
    .map_err(|e| fail(&e))?;
    let extractor = FeatureExtractor::from_model(&outcome.model).map_err(|e| fail(&e))?;
    let probe = train_probe(
        &extractor,
        &train_ds,
        &test_ds,
        ProbeTarget::RightLabel,
        &train.probe_config(seed::mix(cell_seed, seed::salt("probe"))),
    )
    .map_err(|e| fail(&e))?;
    Ok(probe.test_accuracy)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    if spec.seeds_per_cell == 0 {
        return Err(CliError::Config("seeds per cell must be at least 1".into()));
    }
    let bank = spec.data.build_bank(seed::mix(spec.seed, seed::salt("bank")))?;
    let cols = spec.rho_r_grid.len();
    let reps = spec.seeds_per_cell;
    let total = spec.rho_l_grid.len() * cols * reps;
    // Pre-validate all params so config errors abort instead of failing cells.
    for &rho_l in &spec.rho_l_grid {
        for &rho_r in &spec.rho_r_grid {
            CorruptionParams::new(rho_l, rho_r, spec.data.num_classes)?;
        }
    }
    let cells = par::run_indexed(total, |idx| {
        let rep = idx % reps;
        let j = (idx / reps) % cols;
        let i = idx / (reps * cols);
        let rho_l = spec.rho_l_grid[i];
        let rho_r = spec.rho_r_grid[j];
        let params = CorruptionParams::new(rho_l, rho_r, spec.data.num_classes)
            .expect("validated above");
        let cell_seed = seed::mix3(spec.seed, i as u64, j as u64, rep as u64);
        let signal_bits = task_signal(&params).expect("validated above");
        match run_cell(&bank, &params, &spec.data, &spec.train, cell_seed) {
            Ok(accuracy) => CellResult {
                rho_l,
                rho_r,
                seed: cell_seed,
                signal_bits,
                accuracy,
                status: CellStatus::Ok,
            },
            Err(msg) => CellResult {
                rho_l,
                rho_r,
                seed: cell_seed,
                signal_bits,
                accuracy: f64::NAN,
                status: CellStatus::Failed(msg),
            },
        }
    });
    let failed = cells.iter().filter(|c| matches!(c.status, CellStatus::Failed(_))).count();
    let ok: Vec<&CellResult> =
        cells.iter().filter(|c| matches!(c.status, CellStatus::Ok)).collect();
    let signals: Vec<f64> = ok.iter().map(|c| c.signal_bits).collect();
    let accs: Vec<f64> = ok.iter().map(|c| c.accuracy).collect();
    let pearson = pearson_r(&signals, &accs).ok();
    Ok(SweepReport { cells, pearson_r: pearson, failed })
}

/// Extractor comparison at a fixed corruption point (defaults: left digit
/// always kept, labels uncoupled).
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Spec {
    pub rho_l: f64,
    pub rho_r: f64,
    pub data: DataSpec,
    pub train: TrainSpec,
    pub ae_epochs: usize,
    pub gan_epochs: usize,
    pub wgan_epochs: usize,
    pub critic_steps: usize,
    pub wgan_clip: f64,
    pub gan_balance: BalanceRule,
    pub seed: u64,
}

impl Default for Table1Spec {
    fn default() -> Self {
        Table1Spec {
            rho_l: 1.0,
            rho_r: 0.0,
            data: DataSpec::default(),
            train: TrainSpec::default(),
            ae_epochs: 10,
            gan_epochs: 6,
            wgan_epochs: 6,
            critic_steps: 5,
            wgan_clip: 0.01,
            gan_balance: BalanceRule::FixedAlternation { d_steps: 1, g_steps: 1 },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub model: &'static str,
    pub trained_acc: f64,
    pub untrained_acc: f64,
    /// Seed the job's streams (including the untrained init) derive from.
    pub seed: u64,
    pub status: CellStatus,
}

#[derive(Debug, Clone)]
pub struct Table1Report {
    pub rows: Vec<Table1Row>,
    pub failed: usize,
}

impl Table1Report {
    /// `model,trained_acc,untrained_acc,seed` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,trained_acc,untrained_acc,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{}\n",
                r.model, r.trained_acc, r.untrained_acc, r.seed
            ));
        }
        out
    }

    pub fn row(&self, model: &str) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.model == model)
    }
}

const TABLE1_MODELS: [&str; 4] = ["supervised", "ae", "gan", "wgan"];

fn table1_job(
    model_tag: &'static str,
    spec: &Table1Spec,
    train_ds: &Dataset,
    test_ds: &Dataset,
    job_seed: u64,
) -> std::result::Result<(f64, f64), String> {
    let fail = |e: &dyn std::fmt::Display| e.to_string();
    let input_dim = 2 * train_ds.half_pixels();
    let init_seed = seed::mix(job_seed, seed::salt("init"));
    let base_cfg = TrainConfig {
        optimizer: spec.train.optimizer,
        lr: spec.train.lr,
        batch_size: spec.train.batch_size,
        seed: init_seed,
        wgan_clip: spec.wgan_clip,
        ..TrainConfig::default()
    };
    // The untrained baseline is the same freshly initialized network the
    // trained run starts from; its init seed is recorded in the row.
    let (untrained, trained) = match model_tag {
        "supervised" => {
            let model = ModelGraph::twin_classifier(
                train_ds.half_pixels(),
                train_ds.params.num_classes,
                init_seed,
            );
            let untrained = FeatureExtractor::from_model(&model).map_err(|e| fail(&e))?;
            let cfg = TrainConfig { epochs: spec.train.phase1_epochs, ..base_cfg };
            let outcome = train_supervised(model, train_ds, &cfg).map_err(|e| fail(&e))?;
            (untrained, FeatureExtractor::from_model(&outcome.model).map_err(|e| fail(&e))?)
        }
        "ae" => {
            let model = ModelGraph::autoencoder(input_dim, init_seed);
            let untrained = FeatureExtractor::from_model(&model).map_err(|e| fail(&e))?;
            let cfg = TrainConfig { epochs: spec.ae_epochs, ..base_cfg };
            let outcome = train_autoencoder(train_ds, &cfg).map_err(|e| fail(&e))?;
            (untrained, outcome.extractor)
        }
        "gan" => {
            let model = ModelGraph::discriminator(input_dim, seed::mix(init_seed, seed::salt("d")));
            let untrained = FeatureExtractor::from_model(&model).map_err(|e| fail(&e))?;
            let cfg = TrainConfig {
                epochs: spec.gan_epochs,
                balance: spec.gan_balance,
                ..base_cfg
            };
            let outcome = train_gan(train_ds, &cfg).map_err(|e| fail(&e))?;
            (untrained, outcome.extractor)
        }
        "wgan" => {
            let model = ModelGraph::critic(input_dim, seed::mix(init_seed, seed::salt("d")));
            let untrained = FeatureExtractor::from_model(&model).map_err(|e| fail(&e))?;
            let cfg = TrainConfig {
                epochs: spec.wgan_epochs,
                balance: BalanceRule::FixedAlternation {
                    d_steps: spec.critic_steps,
                    g_steps: 1,
                },
                ..base_cfg
            };
            let outcome = train_wgan(train_ds, &cfg).map_err(|e| fail(&e))?;
            (untrained, outcome.extractor)
        }
        other => return Err(format!("unknown model {other:?}")),
    };
    let probe = |extractor: &FeatureExtractor, tag: &str| {
        train_probe(
            extractor,
            train_ds,
            test_ds,
            ProbeTarget::RightLabel,
            &spec.train.probe_config(seed::mix(job_seed, seed::salt(tag))),
        )
        .map(|p| p.test_accuracy)
        .map_err(|e| fail(&e))
    };
    let trained_acc = probe(&trained, "probe-trained")?;
    let untrained_acc = probe(&untrained, "probe-untrained")?;
    Ok((trained_acc, untrained_acc))
}

pub fn run_table1(spec: &Table1Spec) -> Result<Table1Report> {
    let params = CorruptionParams::new(spec.rho_l, spec.rho_r, spec.data.num_classes)?;
    let bank = spec.data.build_bank(seed::mix(spec.seed, seed::salt("bank")))?;
    let train_ds = gen_dataset(
        &bank,
        &params,
        spec.data.train_examples,
        seed::mix(spec.seed, seed::salt("train-data")),
        Split::Train,
    )?;
    let test_ds = gen_dataset(
        &bank,
        &params,
        spec.data.test_examples,
        seed::mix(spec.seed, seed::salt("test-data")),
        Split::Test,
    )?;
    let rows = par::run_indexed(TABLE1_MODELS.len(), |idx| {
        let model = TABLE1_MODELS[idx];
        let job_seed = seed::mix(spec.seed, seed::salt(model));
        match table1_job(model, spec, &train_ds, &test_ds, job_seed) {
            Ok((trained_acc, untrained_acc)) => Table1Row {
                model,
                trained_acc,
                untrained_acc,
                seed: job_seed,
                status: CellStatus::Ok,
            },
            Err(msg) => Table1Row {
                model,
                trained_acc: f64::NAN,
                untrained_acc: f64::NAN,
                seed: job_seed,
                status: CellStatus::Failed(msg),
            },
        }
    });
    let failed = rows.iter().filter(|r| matches!(r.status, CellStatus::Failed(_))).count();
    Ok(Table1Report { rows, failed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_sweep_spec() -> SweepSpec {
        SweepSpec {
            rho_l_grid: vec![0.0, 1.0],
            rho_r_grid: vec![0.5, 1.0],
            seeds_per_cell: 1,
            data: DataSpec {
                source: DataSource::Synth { per_class: 20 },
                num_classes: 4,
                image_size: 10,
                train_examples: 160,
                test_examples: 80,
            },
            train: TrainSpec {
                phase1_epochs: 1,
                probe_epochs: 2,
                batch_size: 32,
                ..TrainSpec::default()
            },
            seed: 3,
        }
    }

    #[test]
    fn sweep_produces_one_result_per_cell_and_is_deterministic() {
        let spec = tiny_sweep_spec();
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a.cells.len(), 4);
        assert_eq!(a.failed, 0);
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.to_csv(), b.to_csv());
        for cell in &a.cells {
            assert!((0.0..=1.0).contains(&cell.accuracy));
            assert!(cell.signal_bits >= 0.0);
        }
    }

    #[test]
    fn sweep_csv_shape() {
        let report = run_sweep(&tiny_sweep_spec()).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "rho_l,rho_r,signal_bits,accuracy,seed,status");
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",ok")));
    }

    #[test]
    fn table1_runs_all_four_models_at_desk_micro_scale() {
        let spec = Table1Spec {
            data: DataSpec {
                source: DataSource::Synth { per_class: 20 },
                num_classes: 4,
                image_size: 10,
                train_examples: 128,
                test_examples: 64,
            },
            train: TrainSpec {
                phase1_epochs: 1,
                probe_epochs: 2,
                batch_size: 32,
                ..TrainSpec::default()
            },
            ae_epochs: 1,
            gan_epochs: 1,
            wgan_epochs: 1,
            seed: 5,
            ..Table1Spec::default()
        };
        let report = run_table1(&spec).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert_eq!(report.failed, 0);
        let csv = report.to_csv();
        assert!(csv.starts_with("model,trained_acc,untrained_acc,seed\n"));
        for model in TABLE1_MODELS {
            assert!(report.row(model).is_some(), "missing row {model}");
        }
        // Same spec, same bytes.
        let again = run_table1(&spec).unwrap();
        assert_eq!(report.to_csv(), again.to_csv());
    }
}
