//! Two-digit composite datasets: digit sourcing, label coupling, corruption.
//!
//! A [`DigitBank`] holds per-class grayscale images (from MNIST IDX files or
//! the built-in procedural glyph bank) plus per-pixel mean/variance over the
//! whole bank, which parameterize the factored Gaussian corruption noise.
//! [`gen_dataset`] then draws composite examples: left digit optionally
//! replaced by noise with probability `1 - rho_l`, right label copied from
//! the left with probability `rho_r` (the right image is resampled from the
//! coupled class, never corrupted).
//!
//! Generation is a pure function of `(bank, params, n, seed, split)`; each
//! dataset owns one seeded stream so output files are byte-stable.

mod idx;
mod io;
mod synth;

pub use idx::load_idx;
pub use io::{load_dataset, save_dataset};
pub use synth::{synth_bank, SynthJitter};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::competition::{CorruptionParams, TaskError};
use crate::seed;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic {got:#010x} in {file}, expected {expected:#010x}")]
    BadMagic { file: &'static str, got: u32, expected: u32 },
    #[error("{file} truncated: needed {needed} bytes, had {got}")]
    Truncated { file: &'static str, needed: usize, got: usize },
    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("label {label} at index {index} out of range (max {max})")]
    LabelOutOfRange { index: usize, label: usize, max: usize },
    #[error("class {0} has no images")]
    EmptyClass(usize),
    #[error("image {index} has {got} pixels, expected {expected}")]
    ShapeMismatch { index: usize, got: usize, expected: usize },
    #[error("invalid bank geometry: {0}")]
    InvalidGeometry(String),
    #[error("dataset size must be at least 1")]
    EmptyDataset,
    #[error("bank has {bank} classes but the task needs {needed}")]
    NotEnoughClasses { bank: usize, needed: usize },
    #[error("unsupported dataset file version {0}")]
    UnsupportedVersion(u16),
    #[error("dataset file checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error(transparent)]
    Task(#[from] TaskError),
}

pub type Result<T> = std::result::Result<T, DataError>;

/// Per-class grayscale images with bank-wide pixel statistics.
#[derive(Debug, Clone)]
pub struct DigitBank {
    classes: Vec<Vec<Vec<f32>>>,
    height: usize,
    width: usize,
    pixel_mean: Vec<f64>,
    pixel_var: Vec<f64>,
}

impl DigitBank {
    /// Assemble a bank from `(pixels, label)` pairs; every class in
    /// `0..num_classes` must be populated and all images share `height x width`.
    pub fn from_images(
        images: Vec<(Vec<f32>, usize)>,
        num_classes: usize,
        height: usize,
        width: usize,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(DataError::InvalidGeometry(format!("{height}x{width} image")));
        }
        if num_classes < 2 {
            return Err(DataError::InvalidGeometry(format!("{num_classes} classes")));
        }
        let pixels = height * width;
        let mut classes = vec![Vec::new(); num_classes];
        let total = images.len();
        let mut mean = vec![0.0f64; pixels];
        let mut m2 = vec![0.0f64; pixels];
        for (index, (img, label)) in images.into_iter().enumerate() {
            if img.len() != pixels {
                return Err(DataError::ShapeMismatch { index, got: img.len(), expected: pixels });
            }
            if label >= num_classes {
                return Err(DataError::LabelOutOfRange {
                    index,
                    label,
                    max: num_classes - 1,
                });
            }
            for (p, &v) in img.iter().enumerate() {
                mean[p] += f64::from(v);
                m2[p] += f64::from(v) * f64::from(v);
            }
            classes[label].push(img);
        }
        for (c, imgs) in classes.iter().enumerate() {
            if imgs.is_empty() {
                return Err(DataError::EmptyClass(c));
            }
        }
        let n = total as f64;
        let mut var = vec![0.0f64; pixels];
        for p in 0..pixels {
            mean[p] /= n;
            var[p] = (m2[p] / n - mean[p] * mean[p]).max(0.0);
        }
        Ok(DigitBank { classes, height, width, pixel_mean: mean, pixel_var: var })
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn images(&self, class: usize) -> &[Vec<f32>] {
        &self.classes[class]
    }

    pub fn pixel_mean(&self) -> &[f64] {
        &self.pixel_mean
    }

    pub fn pixel_var(&self) -> &[f64] {
        &self.pixel_var
    }

    /// Factored Gaussian noise image with the bank's per-pixel moments,
    /// clamped to the `[0, 1]` pixel domain after sampling.
    pub fn sample_noise(&self, rng: &mut impl Rng) -> Vec<f32> {
        self.sample_noise_raw(rng)
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0) as f32)
            .collect()
    }

    /// Unclamped noise sample; exposed so the noise moments stay testable
    /// without the clamping distortion.
    pub fn sample_noise_raw(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.pixels())
            .map(|p| {
                let z: f64 = rng.sample(StandardNormal);
                self.pixel_mean[p] + self.pixel_var[p].sqrt() * z
            })
            .collect()
    }

    /// 2x2 average pooling (both dimensions must be even); bank statistics
    /// are recomputed on the pooled images.
    pub fn downsample_2x(&self) -> Result<DigitBank> {
        if self.height % 2 != 0 || self.width % 2 != 0 {
            return Err(DataError::InvalidGeometry(format!(
                "cannot 2x-pool a {}x{} image",
                self.height, self.width
            )));
        }
        let (h, w) = (self.height / 2, self.width / 2);
        let mut images = Vec::new();
        for (label, imgs) in self.classes.iter().enumerate() {
            for img in imgs {
                let mut out = vec![0.0f32; h * w];
                for r in 0..h {
                    for c in 0..w {
                        let sum = img[(2 * r) * self.width + 2 * c]
                            + img[(2 * r) * self.width + 2 * c + 1]
                            + img[(2 * r + 1) * self.width + 2 * c]
                            + img[(2 * r + 1) * self.width + 2 * c + 1];
                        out[r * w + c] = sum / 4.0;
                    }
                }
                images.push((out, label));
            }
        }
        DigitBank::from_images(images, self.num_classes(), h, w)
    }

    /// Source-image index range for a split; train and test draw from
    /// disjoint slices whenever a class has at least two images.
    fn split_range(&self, class: usize, split: Split) -> std::ops::Range<usize> {
        let len = self.classes[class].len();
        if len < 2 {
            return 0..len;
        }
        let boundary = ((len * 4) / 5).clamp(1, len - 1);
        match split {
            Split::Train => 0..boundary,
            Split::Test => boundary..len,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn tag(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// One composite two-digit example.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x_l: Vec<f32>,
    pub x_r: Vec<f32>,
    pub y_l: usize,
    pub y_r: usize,
    pub corrupted_left: bool,
}

/// A generated dataset plus the recipe that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub params: CorruptionParams,
    pub seed: u64,
    pub split: Split,
    pub height: usize,
    pub width: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Pixels per digit image.
    pub fn half_pixels(&self) -> usize {
        self.height * self.width
    }
}

/// Draw `n` examples. Per example: `y_l` uniform; `x_l` sampled from class
/// `y_l` then replaced by bank noise with probability `1 - rho_l`; `y_r`
/// copies `y_l` with probability `rho_r` and is an independent uniform class
/// otherwise (collisions allowed); `x_r` sampled from class `y_r`.
pub fn gen_dataset(
    bank: &DigitBank,
    params: &CorruptionParams,
    n: usize,
    seed_value: u64,
    split: Split,
) -> Result<Dataset> {
    if n == 0 {
        return Err(DataError::EmptyDataset);
    }
    if bank.num_classes() < params.num_classes {
        return Err(DataError::NotEnoughClasses {
            bank: bank.num_classes(),
            needed: params.num_classes,
        });
    }
    let c = params.num_classes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed_value, seed::salt(split.tag())));
    let mut examples = Vec::with_capacity(n);
    for _ in 0..n {
        let y_l = rng.random_range(0..c);
        let left_range = bank.split_range(y_l, split);
        let left_idx = rng.random_range(left_range.clone());
        let corrupted_left = rng.random::<f64>() < 1.0 - params.rho_l;
        let x_l = if corrupted_left {
            bank.sample_noise(&mut rng)
        } else {
            bank.images(y_l)[left_idx].clone()
        };
        let y_r = if rng.random::<f64>() < params.rho_r { y_l } else { rng.random_range(0..c) };
        let right_range = bank.split_range(y_r, split);
        let right_idx = rng.random_range(right_range);
        let x_r = bank.images(y_r)[right_idx].clone();
        examples.push(Example { x_l, x_r, y_l, y_r, corrupted_left });
    }
    Ok(Dataset {
        examples,
        params: *params,
        seed: seed_value,
        split,
        height: bank.height(),
        width: bank.width(),
    })
}
