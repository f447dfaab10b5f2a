//! Analytic model of the two-digit corruption task.
//!
//! The task draws a left digit with label `y_l` (uniform over the classes),
//! keeps the left image informative with probability `rho_l` (otherwise it is
//! replaced by noise), and copies the left label onto the right digit with
//! probability `rho_r` (otherwise `y_r` is an independent uniform class).
//!
//! Under the information-equivalence abstraction an uncorrupted digit image
//! reveals its label exactly and a corrupted one reveals only that it is
//! noise, so the observable content of the left image is the pair
//! `(kept, kept * y_l)` and the learning signal for right-side features is
//! `I(y_l; y_r | observable left)`, a function of `(rho_l, rho_r)` alone.
//! The noise images are visually distinguishable from digits, so the kept
//! indicator is treated as observable.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::info::{InfoError, JointPmf, VarSelector};
use crate::par;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("num_classes = {0}, need at least 2")]
    InvalidClassCount(usize),
    #[error("grid {name} is empty")]
    EmptyGrid { name: &'static str },
    #[error("grid {name} is not strictly ascending at position {pos}")]
    GridNotAscending { name: &'static str, pos: usize },
    #[error("grid {name} value {value} outside [0, 1]")]
    GridOutOfRange { name: &'static str, value: f64 },
    #[error("entropy must be non-negative, got {0}")]
    NegativeEntropy(f64),
    #[error("feature count must be positive")]
    ZeroFeatureCount,
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TaskError>;

/// Default class count (decimal digits).
pub const DEFAULT_NUM_CLASSES: usize = 10;

/// Corruption knobs of the two-digit task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionParams {
    /// Probability the left digit is kept informative (not noised out).
    pub rho_l: f64,
    /// Probability the right label is copied from the left.
    pub rho_r: f64,
    pub num_classes: usize,
}

impl CorruptionParams {
    pub fn new(rho_l: f64, rho_r: f64, num_classes: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho_l) || !rho_l.is_finite() {
            return Err(TaskError::InvalidProbability { name: "rho_l", value: rho_l });
        }
        if !(0.0..=1.0).contains(&rho_r) || !rho_r.is_finite() {
            return Err(TaskError::InvalidProbability { name: "rho_r", value: rho_r });
        }
        if num_classes < 2 {
            return Err(TaskError::InvalidClassCount(num_classes));
        }
        Ok(CorruptionParams { rho_l, rho_r, num_classes })
    }

    /// `P(y_r = j | y_l = i)` under the coupling.
    fn right_given_left(&self, i: usize, j: usize) -> f64 {
        let c = self.num_classes as f64;
        let base = (1.0 - self.rho_r) / c;
        if i == j {
            self.rho_r + base
        } else {
            base
        }
    }
}

/// Joint distribution over `(kept, y_l, y_r)`.
///
/// `kept` is the left-image indicator with `P(kept = 1) = rho_l`; it is
/// independent of both labels. `y_l` is uniform; `y_r` follows the coupled
/// conditional.
pub fn build_task_joint(params: &CorruptionParams) -> Result<JointPmf> {
    let c = params.num_classes;
    let p_left = 1.0 / c as f64;
    Ok(JointPmf::from_fn(
        vec![("kept".to_string(), 2), ("y_l".to_string(), c), ("y_r".to_string(), c)],
        |ix| {
            let p_kept = if ix[0] == 1 { params.rho_l } else { 1.0 - params.rho_l };
            p_kept * p_left * params.right_given_left(ix[1], ix[2])
        },
    )?)
}

/// Joint over `(x_l, y_l, y_r)` where `x_l` encodes the observable content of
/// the left image: symbol 0 for noise, symbol `1 + y_l` for a kept digit.
///
/// The kept indicator is recoverable from `x_l` (symbol 0 vs the rest), so
/// this single variable is information-equivalent to the pair
/// `(kept, kept * y_l)`.
pub fn observable_joint(params: &CorruptionParams) -> Result<JointPmf> {
    let c = params.num_classes;
    let p_left = 1.0 / c as f64;
    Ok(JointPmf::from_fn(
        vec![
            ("x_l".to_string(), c + 1),
            ("y_l".to_string(), c),
            ("y_r".to_string(), c),
        ],
        |ix| {
            let (x, yl, yr) = (ix[0], ix[1], ix[2]);
            let p_obs = if x == 0 {
                1.0 - params.rho_l
            } else if x == yl + 1 {
                params.rho_l
            } else {
                0.0
            };
            p_obs * p_left * params.right_given_left(yl, yr)
        },
    )?)
}

/// Learning signal for right-side features: `I(y_l; y_r | x_l)` in bits,
/// computed by exact enumeration over the observable joint.
///
/// The boundary values are returned analytically so they are exact rather
/// than within a few ulp: a kept left image or an uncoupled right label
/// gives zero signal, and the fully-corrupted fully-coupled corner carries
/// the whole label entropy.
pub fn task_signal(params: &CorruptionParams) -> Result<f64> {
    if params.rho_l == 1.0 || params.rho_r == 0.0 {
        return Ok(0.0);
    }
    if params.rho_l == 0.0 && params.rho_r == 1.0 {
        return Ok((params.num_classes as f64).log2());
    }
    let joint = observable_joint(params)?;
    let y_l = VarSelector::new(vec![1]);
    let y_r = VarSelector::new(vec![2]);
    let x_l = VarSelector::new(vec![0]);
    Ok(joint.conditional_mutual_information(&y_l, &y_r, &x_l)?)
}

/// Mutual information between the coupled labels, `I(y_l; y_r)`, in bits.
pub fn coupling_information(rho_r: f64, num_classes: usize) -> Result<f64> {
    let params = CorruptionParams::new(0.0, rho_r, num_classes)?;
    if rho_r == 0.0 {
        // Uniform conditional row cancels the marginal entropy exactly.
        return Ok(0.0);
    }
    let c = num_classes as f64;
    // H(y_r) = log2(C): the marginal stays uniform under the coupling.
    let mut h_row = 0.0;
    for j in 0..num_classes {
        let p = params.right_given_left(0, j);
        if p > crate::info::LOG_ZERO_FLOOR {
            h_row -= p * p.log2();
        }
    }
    Ok((c.log2() - h_row).max(0.0))
}

/// Closed form for [`task_signal`]: `(1 - rho_l) * I(y_l; y_r)`.
///
/// A kept left image pins `y_l` down exactly (zero residual information);
/// a noised one leaves the full label coupling on the table.
pub fn closed_form_signal(params: &CorruptionParams) -> Result<f64> {
    Ok((1.0 - params.rho_l) * coupling_information(params.rho_r, params.num_classes)?)
}

/// Tightest guaranteed bound on the weakest of `k` features' signals when the
/// signal budget is `h_y` bits: some feature must land at or below `h_y / k`.
pub fn min_signal_bound(h_y: f64, k: usize) -> Result<f64> {
    if !(h_y >= 0.0) {
        return Err(TaskError::NegativeEntropy(h_y));
    }
    if k == 0 {
        return Err(TaskError::ZeroFeatureCount);
    }
    Ok(h_y / k as f64)
}

/// Exact signal values over a `(rho_l, rho_r)` grid; row `i` fixes
/// `rho_l_grid[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSurface {
    pub rho_l_grid: Vec<f64>,
    pub rho_r_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub num_classes: usize,
}

fn validate_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(TaskError::EmptyGrid { name });
    }
    for (pos, &v) in grid.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) || !v.is_finite() {
            return Err(TaskError::GridOutOfRange { name, value: v });
        }
        if pos > 0 && v <= grid[pos - 1] {
            return Err(TaskError::GridNotAscending { name, pos });
        }
    }
    Ok(())
}

/// Evaluate [`task_signal`] over the full grid; cells are independent work
/// items and fan out over the parallel backend.
pub fn signal_surface(
    rho_l_grid: &[f64],
    rho_r_grid: &[f64],
    num_classes: usize,
) -> Result<SignalSurface> {
    validate_grid("rho_l", rho_l_grid)?;
    validate_grid("rho_r", rho_r_grid)?;
    if num_classes < 2 {
        return Err(TaskError::InvalidClassCount(num_classes));
    }
    let cols = rho_r_grid.len();
    let cells = par::run_indexed(rho_l_grid.len() * cols, |cell| {
        let params =
            CorruptionParams::new(rho_l_grid[cell / cols], rho_r_grid[cell % cols], num_classes)?;
        task_signal(&params)
    });
    let mut values = Vec::with_capacity(rho_l_grid.len());
    let mut iter = cells.into_iter();
    for _ in 0..rho_l_grid.len() {
        let mut row = Vec::with_capacity(cols);
        for _ in 0..cols {
            row.push(iter.next().unwrap()?);
        }
        values.push(row);
    }
    Ok(SignalSurface {
        rho_l_grid: rho_l_grid.to_vec(),
        rho_r_grid: rho_r_grid.to_vec(),
        values,
        num_classes,
    })
}

/// Sequential twin of [`signal_surface`] for backend comparison.
pub fn signal_surface_seq(
    rho_l_grid: &[f64],
    rho_r_grid: &[f64],
    num_classes: usize,
) -> Result<SignalSurface> {
    validate_grid("rho_l", rho_l_grid)?;
    validate_grid("rho_r", rho_r_grid)?;
    if num_classes < 2 {
        return Err(TaskError::InvalidClassCount(num_classes));
    }
    let mut values = Vec::with_capacity(rho_l_grid.len());
    for &rho_l in rho_l_grid {
        let mut row = Vec::with_capacity(rho_r_grid.len());
        for &rho_r in rho_r_grid {
            row.push(task_signal(&CorruptionParams::new(rho_l, rho_r, num_classes)?)?);
        }
        values.push(row);
    }
    Ok(SignalSurface {
        rho_l_grid: rho_l_grid.to_vec(),
        rho_r_grid: rho_r_grid.to_vec(),
        values,
        num_classes,
    })
}

impl SignalSurface {
    /// CSV export: header row `rho_l\rho_r, <rho_r values>`, then one row per
    /// `rho_l` with values printed to 6 decimal places.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho_l\\rho_r");
        for r in &self.rho_r_grid {
            let _ = write!(s, ",{r}");
        }
        s.push('\n');
        for (i, l) in self.rho_l_grid.iter().enumerate() {
            let _ = write!(s, "{l}");
            for v in &self.values[i] {
                let _ = write!(s, ",{v:.6}");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOG2_10: f64 = 3.321928094887362;

    #[test]
    fn params_validation() {
        assert!(CorruptionParams::new(0.5, 0.5, 10).is_ok());
        assert!(matches!(
            CorruptionParams::new(-0.1, 0.5, 10),
            Err(TaskError::InvalidProbability { name: "rho_l", .. })
        ));
        assert!(matches!(
            CorruptionParams::new(0.5, 1.1, 10),
            Err(TaskError::InvalidProbability { name: "rho_r", .. })
        ));
        assert!(matches!(CorruptionParams::new(0.5, 0.5, 1), Err(TaskError::InvalidClassCount(1))));
    }

    #[test]
    fn full_coupling_forces_equal_labels() {
        let params = CorruptionParams::new(0.3, 1.0, 4).unwrap();
        let joint = build_task_joint(&params).unwrap();
        // Mass where y_l != y_r must vanish.
        let mut mismatched = 0.0;
        let c = 4;
        for (cell, &p) in joint.table().iter().enumerate() {
            let yr = cell % c;
            let yl = (cell / c) % c;
            if yl != yr {
                mismatched += p;
            }
        }
        assert!(mismatched.abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_makes_labels_independent() {
        let params = CorruptionParams::new(0.3, 0.0, 5).unwrap();
        let joint = build_task_joint(&params).unwrap();
        let mi = joint
            .mutual_information(&VarSelector::new(vec![1]), &VarSelector::new(vec![2]))
            .unwrap();
        assert!(mi.abs() < 1e-12);
    }

    #[test]
    fn half_coupling_diagonal_probability() {
        let params = CorruptionParams::new(0.0, 0.5, 10).unwrap();
        assert!((params.right_given_left(3, 3) - 0.55).abs() < 1e-15);
        assert!((params.right_given_left(3, 4) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn signal_boundary_values() {
        let s = task_signal(&CorruptionParams::new(1.0, 0.7, 10).unwrap()).unwrap();
        assert_eq!(s, 0.0);
        let s = task_signal(&CorruptionParams::new(0.3, 0.0, 10).unwrap()).unwrap();
        assert_eq!(s, 0.0);
        let s = task_signal(&CorruptionParams::new(0.0, 1.0, 10).unwrap()).unwrap();
        assert!((s - LOG2_10).abs() < 1e-9);
    }

    #[test]
    fn surface_two_by_two_corners() {
        let surf = signal_surface(&[0.0, 1.0], &[0.0, 1.0], 10).unwrap();
        assert!(surf.values[0][0].abs() < 1e-12);
        assert!((surf.values[0][1] - LOG2_10).abs() < 1e-9);
        assert!(surf.values[1][0].abs() < 1e-12);
        assert!(surf.values[1][1].abs() < 1e-9);
    }

    #[test]
    fn surface_zero_coupling_column_is_zero() {
        let surf = signal_surface(&[0.0, 0.25, 0.5, 0.75, 1.0], &[0.0, 0.5], 6).unwrap();
        for row in &surf.values {
            assert!(row[0].abs() < 1e-12);
        }
    }

    #[test]
    fn surface_matches_sequential_backend_exactly() {
        let l: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
        let r: Vec<f64> = (0..5).map(|i| i as f64 / 4.0).collect();
        let a = signal_surface(&l, &r, 7).unwrap();
        let b = signal_surface_seq(&l, &r, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn surface_rejects_malformed_grids() {
        assert!(matches!(
            signal_surface(&[], &[0.5], 10),
            Err(TaskError::EmptyGrid { name: "rho_l" })
        ));
        assert!(matches!(
            signal_surface(&[0.5, 0.5], &[0.5], 10),
            Err(TaskError::GridNotAscending { name: "rho_l", pos: 1 })
        ));
        assert!(matches!(
            signal_surface(&[0.0, 1.5], &[0.5], 10),
            Err(TaskError::GridOutOfRange { .. })
        ));
    }

    #[test]
    fn min_signal_bound_values() {
        assert_eq!(min_signal_bound(1.0, 10).unwrap(), 0.1);
        assert_eq!(min_signal_bound(0.0, 3).unwrap(), 0.0);
        assert!(matches!(min_signal_bound(1.0, 0), Err(TaskError::ZeroFeatureCount)));
        assert!(matches!(min_signal_bound(-0.5, 2), Err(TaskError::NegativeEntropy(_))));
    }

    #[test]
    fn csv_layout_and_precision() {
        let surf = signal_surface(&[0.0, 1.0], &[0.0, 1.0], 10).unwrap();
        let csv = surf.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "rho_l\\rho_r,0,1");
        assert_eq!(lines.next().unwrap(), "0,0.000000,3.321928");
        assert_eq!(lines.next().unwrap(), "1,0.000000,0.000000");
    }
}
