//! Matrices of bounded scalars with left-associative reductions.

use std::fmt;

use crate::bitnum::{self, BitnumError, Format, Num};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LintensError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("index {index} out of range for {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("entry ({row}, {col}): {source}")]
    Scalar {
        row: usize,
        col: usize,
        #[source]
        source: BitnumError,
    },
}

/// A dense row-major matrix of bounded scalars sharing one format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Num>,
    pub fmt: Format,
}

impl BMat {
    /// Builds a matrix, rounding every entry into `fmt`.
    pub fn new(rows: usize, cols: usize, entries: Vec<Num>, fmt: Format) -> Result<BMat, LintensError> {
        if entries.len() != rows * cols {
            return Err(LintensError::ShapeMismatch(format!("{} entries for {rows}x{cols}", entries.len())));
        }
        let entries = entries.iter().map(|x| fmt.round_num(x)).collect();
        Ok(BMat { rows, cols, entries, fmt })
    }

    pub fn from_rows(rows: &[Vec<Num>], fmt: Format) -> Result<BMat, LintensError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(LintensError::ShapeMismatch(format!("ragged rows: {} vs {cols}", r.len())));
        }
        BMat::new(rows.len(), cols, rows.concat(), fmt)
    }

    pub fn column(entries: Vec<Num>, fmt: Format) -> BMat {
        let n = entries.len();
        BMat::new(n, 1, entries, fmt).expect("column shape")
    }

    pub fn zeros(rows: usize, cols: usize, fmt: Format) -> BMat {
        BMat { rows, cols, entries: vec![Num::Zero; rows * cols], fmt }
    }

    pub fn identity(n: usize, fmt: Format) -> BMat {
        let mut m = BMat::zeros(n, n, fmt);
        for i in 0..n {
            m.entries[i * n + i] = fmt.round_num(&Num::ONE);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Num {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Num] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Num> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// True when every finite entry is a value of `fmt`.
    pub fn representable_in(&self, fmt: &Format) -> bool {
        self.entries.iter().all(|x| fmt.contains(x))
    }

    /// Re-rounds every entry into another format.
    pub fn reformat(&self, fmt: Format) -> BMat {
        let entries = self.entries.iter().map(|x| fmt.round_num(x)).collect();
        BMat { rows: self.rows, cols: self.cols, entries, fmt }
    }
}

/// `A·B` where every entry is a left fold over ascending `k` of rounded products.
pub fn matmul_left(a: &BMat, b: &BMat, fmt: &Format) -> Result<BMat, LintensError> {
    if a.cols != b.rows {
        return Err(LintensError::ShapeMismatch(format!("{}x{} times {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    if a.cols == 0 {
        return Ok(BMat::zeros(a.rows, b.cols, *fmt));
    }
    let mut out = Vec::with_capacity(a.rows * b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let v = bitnum::dot_left(a.row(i), &b.col(j), fmt)
                .map_err(|source| LintensError::Scalar { row: i, col: j, source })?;
            out.push(v);
        }
    }
    Ok(BMat { rows: a.rows, cols: b.cols, entries: out, fmt: *fmt })
}

/// Left fold of row `i` over ascending column index.
pub fn row_sum_left(a: &BMat, i: usize, fmt: &Format) -> Result<Num, LintensError> {
    if i >= a.rows {
        return Err(LintensError::IndexOutOfRange { index: i, len: a.rows });
    }
    if a.cols == 0 {
        return Ok(Num::Zero);
    }
    bitnum::sum_left(a.row(i), fmt).map_err(|source| LintensError::Scalar { row: i, col: 0, source })
}

impl fmt::Display for BMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(Num::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
