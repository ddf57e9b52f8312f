//! Dense dictionaries, index bookkeeping and group partitions.
//!
//! Atoms are stored column-contiguous so that removing atoms and computing
//! `D^T v` only ever touch whole columns.

use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm};

/// Tolerance used when checking that atoms have unit norm.
pub const UNIT_NORM_TOL: f64 = 1e-9;

const POWER_ITER_TOL: f64 = 1e-10;
const POWER_ITER_MAX: usize = 5000;

/// Sorted set of distinct column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Builds a set from strictly increasing indices.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet(
                "indices must be strictly increasing".into(),
            ));
        }
        Ok(IndexSet(indices))
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet(indices)
    }

    pub fn full(k: usize) -> Self {
        IndexSet((0..k).collect())
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.positions_in(other).is_some()
    }

    /// Positions of `self`'s elements inside `other`, or `None` when
    /// `self` is not a subset of `other`.
    pub fn positions_in(&self, other: &IndexSet) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.len());
        let mut j = 0;
        for &i in &self.0 {
            while j < other.0.len() && other.0[j] < i {
                j += 1;
            }
            if j == other.0.len() || other.0[j] != i {
                return None;
            }
            out.push(j);
            j += 1;
        }
        Some(out)
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        v.push(x);
                        a.next();
                    } else if y < x {
                        v.push(y);
                        b.next();
                    } else {
                        v.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    v.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    v.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        IndexSet(v)
    }

    /// Complement of `self` within `[0, k)`.
    pub fn complement(&self, k: usize) -> IndexSet {
        let mut v = Vec::with_capacity(k.saturating_sub(self.len()));
        let mut it = self.0.iter().peekable();
        for i in 0..k {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                v.push(i);
            }
        }
        IndexSet(v)
    }

    /// Elements whose mask entry is `keep`.
    pub fn filter_by_mask(&self, mask: &[bool], keep: bool) -> IndexSet {
        IndexSet(
            self.0
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m == keep)
                .map(|(&i, _)| i)
                .collect(),
        )
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

/// Dense `N x K` dictionary of atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    rows: usize,
    cols: usize,
    // column-major
    data: Vec<f64>,
    col_norm_checked: bool,
}

impl Dictionary {
    /// Builds a dictionary from column-major data. When `check_unit_norm`
    /// is set every atom must have unit norm within [`UNIT_NORM_TOL`].
    pub fn from_col_major(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        check_unit_norm: bool,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "dictionary must be at least 1x1, got {rows}x{cols}"
            )));
        }
        check_len(rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "dictionary contains non-finite values".into(),
            ));
        }
        let d = Dictionary {
            rows,
            cols,
            data,
            col_norm_checked: check_unit_norm,
        };
        if check_unit_norm {
            for j in 0..cols {
                let n = norm(d.column(j));
                if (n - 1.0).abs() > UNIT_NORM_TOL {
                    return Err(Error::NonUnitColumn { column: j, norm: n });
                }
            }
        }
        Ok(d)
    }

    pub fn from_row_major(
        rows: usize,
        cols: usize,
        data: &[f64],
        check_unit_norm: bool,
    ) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        let mut cm = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                cm[c * rows + r] = data[r * cols + c];
            }
        }
        Self::from_col_major(rows, cols, cm, check_unit_norm)
    }

    /// Builds a dictionary from a list of atoms.
    pub fn from_columns(columns: &[Vec<f64>], check_unit_norm: bool) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            check_len(rows, c.len())?;
            data.extend_from_slice(c);
        }
        Self::from_col_major(rows, columns.len(), data, check_unit_norm)
    }

    /// The first `k` columns of the `n x n` identity (`k <= n`).
    pub fn identity_columns(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidArgument(format!(
                "cannot take {k} identity columns in dimension {n}"
            )));
        }
        let mut data = vec![0.0; n * k];
        for j in 0..k {
            data[j * n + j] = 1.0;
        }
        Self::from_col_major(n, k, data, true)
    }

    /// Rescales every column to unit norm. Zero columns are rejected.
    pub fn normalize_columns(&mut self) -> Result<()> {
        for j in 0..self.cols {
            let col = &mut self.data[j * self.rows..(j + 1) * self.rows];
            let n = norm(col);
            if n == 0.0 {
                return Err(Error::NonUnitColumn { column: j, norm: 0.0 });
            }
            col.iter_mut().for_each(|v| *v /= n);
        }
        self.col_norm_checked = true;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col_norm_checked(&self) -> bool {
        self.col_norm_checked
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_major(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    /// `D x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    /// `out = D x`; zero entries of `x` are skipped.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.cols, x.len())?;
        check_len(self.rows, out.len())?;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), out);
            }
        }
        Ok(())
    }

    /// `D^T v`.
    pub fn correlate(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols];
        self.correlate_into(v, &mut out)?;
        Ok(out)
    }

    pub fn correlate_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.rows, v.len())?;
        check_len(self.cols, out.len())?;
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.column(j), v);
        }
        Ok(())
    }

    /// Sub-dictionary made of the columns `cols` (indices into `self`).
    pub fn select(&self, cols: &IndexSet) -> Result<Dictionary> {
        if let Some(m) = cols.max() {
            if m >= self.cols {
                return Err(Error::InvalidIndexSet(format!(
                    "column {m} out of range for {} columns",
                    self.cols
                )));
            }
        }
        let mut data = Vec::with_capacity(cols.len() * self.rows);
        for j in cols.iter() {
            data.extend_from_slice(self.column(j));
        }
        Ok(Dictionary {
            rows: self.rows,
            cols: cols.len(),
            data,
            col_norm_checked: self.col_norm_checked,
        })
    }

    /// Restricts a dictionary whose columns are the original atoms
    /// `kept_prev` to the atoms `kept_next`, keeping original order.
    pub fn reduce(&self, kept_prev: &IndexSet, kept_next: &IndexSet) -> Result<Dictionary> {
        check_len(self.cols, kept_prev.len())?;
        let pos = kept_next.positions_in(kept_prev).ok_or_else(|| {
            Error::InvalidIndexSet("kept_next is not a subset of kept_prev".into())
        })?;
        self.select(&IndexSet(pos))
    }

    /// In-place removal of the columns whose `keep` flag is false.
    pub fn retain_columns(&mut self, keep: &[bool]) -> Result<()> {
        check_len(self.cols, keep.len())?;
        let rows = self.rows;
        let mut w = 0;
        for (j, &k) in keep.iter().enumerate() {
            if k {
                if w != j {
                    self.data.copy_within(j * rows..(j + 1) * rows, w * rows);
                }
                w += 1;
            }
        }
        self.data.truncate(w * rows);
        self.cols = w;
        Ok(())
    }

    /// Largest singular value of the columns `cols`, by power iteration on
    /// the Gram matrix started from the normalized all-ones vector.
    pub fn spectral_norm(&self, cols: &IndexSet) -> Result<f64> {
        if cols.is_empty() {
            return Err(Error::InvalidIndexSet(
                "spectral norm of an empty column set".into(),
            ));
        }
        if let Some(m) = cols.max() {
            if m >= self.cols {
                return Err(Error::InvalidIndexSet(format!("column {m} out of range")));
            }
        }
        let idx = cols.as_slice();
        let max_col_sq = idx
            .iter()
            .map(|&j| dot(self.column(j), self.column(j)))
            .fold(0.0f64, f64::max);
        if idx.len() == 1 {
            return Ok(max_col_sq.sqrt());
        }
        let start = vec![1.0 / (idx.len() as f64).sqrt(); idx.len()];
        let mut eig = self.power_iteration(idx, start);
        if eig < 0.5 * max_col_sq {
            // start vector (almost) orthogonal to the top eigenvector
            let jmax = (0..idx.len())
                .max_by(|&a, &b| {
                    let na = dot(self.column(idx[a]), self.column(idx[a]));
                    let nb = dot(self.column(idx[b]), self.column(idx[b]));
                    na.total_cmp(&nb)
                })
                .unwrap_or(0);
            let mut e = vec![0.0; idx.len()];
            e[jmax] = 1.0;
            eig = eig.max(self.power_iteration(idx, e));
        }
        Ok(eig.max(max_col_sq).sqrt())
    }

    /// Spectral norm of the whole dictionary.
    pub fn operator_norm(&self) -> f64 {
        if self.cols == 0 {
            return 0.0;
        }
        self.spectral_norm(&IndexSet::full(self.cols))
            .expect("non-empty dictionary")
    }

    fn power_iteration(&self, idx: &[usize], mut v: Vec<f64>) -> f64 {
        let mut dv = vec![0.0; self.rows];
        let mut w = vec![0.0; idx.len()];
        let mut eig = 0.0f64;
        for _ in 0..POWER_ITER_MAX {
            dv.iter_mut().for_each(|x| *x = 0.0);
            for (k, &j) in idx.iter().enumerate() {
                if v[k] != 0.0 {
                    axpy(v[k], self.column(j), &mut dv);
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                w[k] = dot(self.column(j), &dv);
            }
            let rayleigh = dot(&v, &w);
            let wn = norm(&w);
            if wn == 0.0 {
                return 0.0;
            }
            v.iter_mut().zip(&w).for_each(|(a, b)| *a = b / wn);
            let done = (rayleigh - eig).abs() <= POWER_ITER_TOL * rayleigh.abs();
            eig = rayleigh;
            if done {
                break;
            }
        }
        eig
    }
}

/// Partition of the atoms into weighted groups.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPartition {
    groups: Vec<IndexSet>,
    weights: Vec<f64>,
    spectral_norms: Vec<f64>,
    group_of: Vec<usize>,
}

impl GroupPartition {
    /// Validates that `groups` partitions the dictionary's columns and
    /// precomputes the sub-dictionary spectral norms. Missing weights
    /// default to `sqrt(|g|)`.
    pub fn new(dict: &Dictionary, groups: Vec<IndexSet>, weights: Option<Vec<f64>>) -> Result<Self> {
        let k = dict.cols();
        let weights = match weights {
            Some(w) => {
                check_len(groups.len(), w.len())?;
                w
            }
            None => groups.iter().map(|g| (g.len() as f64).sqrt()).collect(),
        };
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "group weights must be positive, got {w}"
            )));
        }
        let mut group_of = vec![usize::MAX; k];
        for (gi, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::InvalidIndexSet(format!("group {gi} is empty")));
            }
            for i in g.iter() {
                if i >= k {
                    return Err(Error::InvalidIndexSet(format!(
                        "index {i} out of range for {k} atoms"
                    )));
                }
                if group_of[i] != usize::MAX {
                    return Err(Error::InvalidIndexSet(format!(
                        "index {i} belongs to several groups"
                    )));
                }
                group_of[i] = gi;
            }
        }
        if let Some(i) = group_of.iter().position(|&g| g == usize::MAX) {
            return Err(Error::InvalidIndexSet(format!(
                "index {i} belongs to no group"
            )));
        }
        let spectral_norms = groups
            .iter()
            .map(|g| dict.spectral_norm(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupPartition {
            groups,
            weights,
            spectral_norms,
            group_of,
        })
    }

    /// Consecutive groups of `size` atoms (the last one may be shorter).
    pub fn contiguous(dict: &Dictionary, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("group size must be positive".into()));
        }
        let k = dict.cols();
        let groups = (0..k)
            .step_by(size)
            .map(|s| IndexSet((s..(s + size).min(k)).collect()))
            .collect();
        Self::new(dict, groups, None)
    }

    /// Singleton groups with unit weights: the Lasso as a Group-Lasso.
    pub fn singletons(dict: &Dictionary) -> Result<Self> {
        let k = dict.cols();
        let groups = (0..k).map(|i| IndexSet(vec![i])).collect();
        Self::new(dict, groups, Some(vec![1.0; k]))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[IndexSet] {
        &self.groups
    }

    pub fn group(&self, g: usize) -> &IndexSet {
        &self.groups[g]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spectral_norms(&self) -> &[f64] {
        &self.spectral_norms
    }

    /// Group containing atom `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn n_atoms(&self) -> usize {
        self.group_of.len()
    }
}
