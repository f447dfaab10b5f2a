//! Exact information measures over small dense joint distributions.
//!
//! A [`JointPmf`] is a probability table over a tuple of finite-alphabet
//! variables. All quantities are reported in bits (log base 2); `0 log 0` is
//! taken as 0 and probabilities below `1e-15` are treated as exact zeros
//! inside logarithms. Mutual-information values are clamped to 0 when they
//! land within `-1e-12` of zero from floating-point cancellation; anything
//! more negative is reported as an error rather than silently clamped.
//!
//! Everything here is immutable after construction and freely shareable
//! across threads.

mod estimate;

pub use estimate::{plugin_pmf_from_samples, BinMode, BinningSpec};

use std::path::Path;

use thiserror::Error;

/// Matching tolerance for "probabilities sum to one".
pub const PMF_SUM_TOL: f64 = 1e-12;
/// Probabilities below this are exact zeros in log terms.
pub const LOG_ZERO_FLOOR: f64 = 1e-15;
/// Information values in `[-NEG_INFO_FLOOR, 0)` clamp to 0; below is an error.
pub const NEG_INFO_FLOOR: f64 = 1e-12;
/// Default cap on the number of table cells accepted at construction.
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum InfoError {
    #[error("selector is empty")]
    EmptySelector,
    #[error("selector index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("selector repeats variable index {0}")]
    DuplicateIndex(usize),
    #[error("selectors overlap on variable index {0}")]
    OverlappingSelectors(usize),
    #[error("variable {0:?} has an empty alphabet")]
    EmptyAlphabet(String),
    #[error("table has {got} cells but the variables imply {expected}")]
    TableSizeMismatch { got: usize, expected: usize },
    #[error("table has {cells} cells, above the {cap}-cell cap")]
    TooManyCells { cells: usize, cap: usize },
    #[error("negative probability {value} at cell {cell}")]
    NegativeProbability { cell: usize, value: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("information quantity is {0} bits, below the numerical floor")]
    NegativeInformation(f64),
    #[error("no samples provided")]
    NoSamples,
    #[error("sample row {row} has {got} columns, expected {expected}")]
    ArityMismatch { row: usize, got: usize, expected: usize },
    #[error("non-finite value in sample row {row}, column {col}")]
    NonFiniteSample { row: usize, col: usize },
    #[error("binning spec must give at least one bin for every dimension")]
    EmptyBinning,
    #[error("binning spec covers {spec} dimensions but samples have {got}")]
    BinningArityMismatch { spec: usize, got: usize },
    #[error("no variable named {0:?}")]
    UnknownVariable(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, InfoError>;

/// One variable of a joint distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub size: usize,
}

/// A subset of variable positions within a [`JointPmf`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarSelector(Vec<usize>);

impl VarSelector {
    pub fn new(indices: impl Into<Vec<usize>>) -> Self {
        VarSelector(indices.into())
    }

    /// The empty selector; allowed wherever "conditioning on nothing" makes
    /// sense (e.g. the `given` side of conditional quantities).
    pub fn empty() -> Self {
        VarSelector(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation; the caller guarantees disjointness.
    pub fn union(&self, other: &VarSelector) -> VarSelector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        VarSelector(v)
    }
}

impl From<Vec<usize>> for VarSelector {
    fn from(v: Vec<usize>) -> Self {
        VarSelector(v)
    }
}

impl From<&[usize]> for VarSelector {
    fn from(v: &[usize]) -> Self {
        VarSelector(v.to_vec())
    }
}

/// Dense probability table over a tuple of finite-alphabet variables,
/// row-major in variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    vars: Vec<Variable>,
    table: Vec<f64>,
}

impl JointPmf {
    /// Build and validate a joint distribution with the default cell cap.
    pub fn new(vars: Vec<(impl Into<String>, usize)>, table: Vec<f64>) -> Result<Self> {
        Self::with_cell_cap(vars, table, DEFAULT_CELL_CAP)
    }

    /// Build with an explicit cap on table size.
    pub fn with_cell_cap(
        vars: Vec<(impl Into<String>, usize)>,
        table: Vec<f64>,
        cell_cap: usize,
    ) -> Result<Self> {
        let vars: Vec<Variable> = vars
            .into_iter()
            .map(|(name, size)| Variable { name: name.into(), size })
            .collect();
        let mut expected: usize = 1;
        for v in &vars {
            if v.size == 0 {
                return Err(InfoError::EmptyAlphabet(v.name.clone()));
            }
            expected = expected.saturating_mul(v.size);
        }
        if expected > cell_cap {
            return Err(InfoError::TooManyCells { cells: expected, cap: cell_cap });
        }
        if table.len() != expected {
            return Err(InfoError::TableSizeMismatch { got: table.len(), expected });
        }
        let mut sum = 0.0;
        for (cell, &p) in table.iter().enumerate() {
            if !(p >= 0.0) {
                return Err(InfoError::NegativeProbability { cell, value: p });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(InfoError::NotNormalized(sum));
        }
        Ok(JointPmf { vars, table })
    }

    /// Build from a cell-probability function evaluated over every index
    /// tuple in row-major order.
    pub fn from_fn(
        vars: Vec<(impl Into<String>, usize)>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let sizes: Vec<usize> = vars.iter().map(|(_, s)| *s).collect();
        let cells = sizes.iter().product();
        let mut table = Vec::with_capacity(cells);
        let mut idx = vec![0usize; sizes.len()];
        for _ in 0..cells {
            table.push(f(&idx));
            for d in (0..sizes.len()).rev() {
                idx[d] += 1;
                if idx[d] < sizes[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self::new(vars, table)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Selector for the given variable names, in the order supplied.
    pub fn select(&self, names: &[&str]) -> Result<VarSelector> {
        let mut idx = Vec::with_capacity(names.len());
        for name in names {
            let pos = self
                .vars
                .iter()
                .position(|v| v.name == *name)
                .ok_or_else(|| InfoError::UnknownVariable((*name).to_string()))?;
            idx.push(pos);
        }
        Ok(VarSelector(idx))
    }

    fn validate_selector(&self, sel: &VarSelector, allow_empty: bool) -> Result<()> {
        if sel.is_empty() && !allow_empty {
            return Err(InfoError::EmptySelector);
        }
        let mut seen = vec![false; self.vars.len()];
        for &i in sel.indices() {
            if i >= self.vars.len() {
                return Err(InfoError::IndexOutOfRange { index: i, num_vars: self.vars.len() });
            }
            if seen[i] {
                return Err(InfoError::DuplicateIndex(i));
            }
            seen[i] = true;
        }
        Ok(())
    }

    fn validate_disjoint(&self, sels: &[&VarSelector]) -> Result<()> {
        let mut seen = vec![false; self.vars.len()];
        for sel in sels {
            for &i in sel.indices() {
                if i >= self.vars.len() {
                    return Err(InfoError::IndexOutOfRange { index: i, num_vars: self.vars.len() });
                }
                if seen[i] {
                    return Err(InfoError::OverlappingSelectors(i));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }

    /// Marginal table over the selected positions (empty selection gives the
    /// single-cell table `[1.0]`).
    fn marginal_table(&self, keep: &[usize]) -> Vec<f64> {
        let out_sizes: Vec<usize> = keep.iter().map(|&i| self.vars[i].size).collect();
        let out_cells: usize = out_sizes.iter().product();
        let mut out = vec![0.0; out_cells];
        let sizes: Vec<usize> = self.vars.iter().map(|v| v.size).collect();
        // out strides, row-major over the kept positions
        let mut out_strides = vec![0usize; keep.len()];
        let mut acc = 1;
        for d in (0..keep.len()).rev() {
            out_strides[d] = acc;
            acc *= out_sizes[d];
        }
        let mut idx = vec![0usize; sizes.len()];
        for &p in &self.table {
            if p != 0.0 {
                let mut o = 0;
                for (d, &k) in keep.iter().enumerate() {
                    o += idx[k] * out_strides[d];
                }
                out[o] += p;
            }
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

    /// Marginal distribution over the kept variables.
    pub fn marginalize(&self, keep: &VarSelector) -> Result<JointPmf> {
        self.validate_selector(keep, false)?;
        let table = self.marginal_table(keep.indices());
        let vars: Vec<(String, usize)> = keep
            .indices()
            .iter()
            .map(|&i| (self.vars[i].name.clone(), self.vars[i].size))
            .collect();
        // Re-validates; summation of a valid pmf stays valid.
        JointPmf::new(vars, table)
    }

    fn entropy_of(&self, sel: &[usize]) -> f64 {
        let marg = self.marginal_table(sel);
        let mut h = 0.0;
        for &p in &marg {
            if p > LOG_ZERO_FLOOR {
                h -= p * p.log2();
            }
        }
        h
    }

    /// Shannon entropy of the selected variables, in bits.
    pub fn entropy(&self, vars: &VarSelector) -> Result<f64> {
        self.validate_selector(vars, true)?;
        Ok(self.entropy_of(vars.indices()))
    }

    /// `H(target | given)` in bits, via `H(target, given) - H(given)`.
    pub fn conditional_entropy(&self, target: &VarSelector, given: &VarSelector) -> Result<f64> {
        if target.is_empty() {
            return Err(InfoError::EmptySelector);
        }
        self.validate_disjoint(&[target, given])?;
        let joint = self.entropy_of(&target.union(given).0);
        let h = joint - self.entropy_of(given.indices());
        self.clamp_info(h)
    }

    /// `I(a; b)` in bits; symmetric by construction.
    pub fn mutual_information(&self, a: &VarSelector, b: &VarSelector) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(InfoError::EmptySelector);
        }
        self.validate_disjoint(&[a, b])?;
        let mi = self.entropy_of(a.indices()) + self.entropy_of(b.indices())
            - self.entropy_of(&a.union(b).0);
        self.clamp_info(mi)
    }

    /// `I(a; b | given)` in bits; an empty `given` degenerates to plain
    /// mutual information.
    pub fn conditional_mutual_information(
        &self,
        a: &VarSelector,
        b: &VarSelector,
        given: &VarSelector,
    ) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(InfoError::EmptySelector);
        }
        self.validate_disjoint(&[a, b, given])?;
        let ag = self.entropy_of(&a.union(given).0);
        let bg = self.entropy_of(&b.union(given).0);
        let abg = self.entropy_of(&a.union(b).union(given).0);
        let g = self.entropy_of(given.indices());
        self.clamp_info(ag + bg - abg - g)
    }

    /// Per-feature learning signal: element `i` is
    /// `I(y; features[i] | features[0..i])`.
    ///
    /// The chain rule makes the sum equal `I(y; all features)`, which is in
    /// turn capped by `H(y)` — the feature-competition budget.
    pub fn signal_sequence(
        &self,
        y: &VarSelector,
        features: &[VarSelector],
    ) -> Result<Vec<f64>> {
        let mut all: Vec<&VarSelector> = vec![y];
        all.extend(features.iter());
        if y.is_empty() || features.iter().any(|f| f.is_empty()) {
            return Err(InfoError::EmptySelector);
        }
        self.validate_disjoint(&all)?;
        let mut out = Vec::with_capacity(features.len());
        let mut given = VarSelector::empty();
        for f in features {
            out.push(self.conditional_mutual_information(y, f, &given)?);
            given = given.union(f);
        }
        Ok(out)
    }

    fn clamp_info(&self, v: f64) -> Result<f64> {
        if v >= 0.0 {
            Ok(v)
        } else if v >= -NEG_INFO_FLOOR {
            Ok(0.0)
        } else {
            Err(InfoError::NegativeInformation(v))
        }
    }

    /// Text serialization: a `vars:` header then one `index-tuple<TAB>prob`
    /// line per nonzero cell in row-major order.
    pub fn to_text(&self) -> String {
        let mut s = String::from("vars: ");
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&v.name);
            s.push(':');
            s.push_str(&v.size.to_string());
        }
        s.push('\n');
        let sizes: Vec<usize> = self.vars.iter().map(|v| v.size).collect();
        let mut idx = vec![0usize; sizes.len()];
        for &p in &self.table {
            if p != 0.0 {
                for (d, &i) in idx.iter().enumerate() {
                    if d > 0 {
                        s.push(',');
                    }
                    s.push_str(&i.to_string());
                }
                s.push('\t');
                s.push_str(&format!("{p}"));
                s.push('\n');
            }
            for d in (0..sizes.len()).rev() {
                idx[d] += 1;
                if idx[d] < sizes[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        s
    }

    /// Parse the [`to_text`](Self::to_text) format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (first_no, first) = lines
            .next()
            .ok_or(InfoError::Parse { line: 1, msg: "empty input".into() })?;
        let header = first
            .strip_prefix("vars:")
            .ok_or(InfoError::Parse { line: first_no + 1, msg: "missing `vars:` header".into() })?
            .trim();
        let mut vars: Vec<(String, usize)> = Vec::new();
        for piece in header.split(',') {
            let (name, size) = piece.trim().split_once(':').ok_or(InfoError::Parse {
                line: first_no + 1,
                msg: format!("bad variable spec {piece:?}"),
            })?;
            let size: usize = size.parse().map_err(|_| InfoError::Parse {
                line: first_no + 1,
                msg: format!("bad alphabet size {size:?}"),
            })?;
            vars.push((name.to_string(), size));
        }
        let sizes: Vec<usize> = vars.iter().map(|(_, s)| *s).collect();
        let cells: usize = sizes.iter().product();
        let mut table = vec![0.0; cells];
        let mut strides = vec![0usize; sizes.len()];
        let mut acc = 1;
        for d in (0..sizes.len()).rev() {
            strides[d] = acc;
            acc *= sizes[d];
        }
        for (no, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tuple, prob) = line.split_once('\t').ok_or(InfoError::Parse {
                line: no + 1,
                msg: "expected `indices<TAB>probability`".into(),
            })?;
            let mut cell = 0usize;
            let parts: Vec<&str> = tuple.split(',').collect();
            if parts.len() != sizes.len() {
                return Err(InfoError::Parse {
                    line: no + 1,
                    msg: format!("tuple has {} indices, expected {}", parts.len(), sizes.len()),
                });
            }
            for (d, part) in parts.iter().enumerate() {
                let i: usize = part.trim().parse().map_err(|_| InfoError::Parse {
                    line: no + 1,
                    msg: format!("bad index {part:?}"),
                })?;
                if i >= sizes[d] {
                    return Err(InfoError::Parse {
                        line: no + 1,
                        msg: format!("index {i} out of range for variable {d}"),
                    });
                }
                cell += i * strides[d];
            }
            let p: f64 = prob.trim().parse().map_err(|_| InfoError::Parse {
                line: no + 1,
                msg: format!("bad probability {prob:?}"),
            })?;
            table[cell] = p;
        }
        JointPmf::new(vars, table)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}
