//! Compressed sparse row storage and the matrix-free Hessian product.

use crate::error::{Error, Result};

/// An `n_rows × n_cols` matrix in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "expected {} row offsets, found {}",
                n_rows + 1,
                row_offsets.len()
            )));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidMatrix(format!(
                "{} column indices but {} values",
                col_indices.len(),
                values.len()
            )));
        }
        if row_offsets[0] != 0 || row_offsets[n_rows] != values.len() {
            return Err(Error::InvalidMatrix(
                "row offsets must start at 0 and end at the number of stored values".into(),
            ));
        }
        for r in 0..n_rows {
            let (start, end) = (row_offsets[r], row_offsets[r + 1]);
            if start > end {
                return Err(Error::InvalidMatrix(format!("row offsets decrease at row {r}")));
            }
            let cols = &col_indices[start..end];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMatrix(format!(
                    "column indices of row {r} are not strictly increasing"
                )));
            }
            if let Some(&last) = cols.last() {
                if last >= n_cols {
                    return Err(Error::InvalidMatrix(format!(
                        "column index {last} out of range in row {r} ({n_cols} columns)"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from per-row `(column, value)` lists.
    pub fn from_rows(n_cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in rows {
            for &(c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        Self::new(rows.len(), n_cols, offsets, cols, vals)
    }

    /// Keeps every entry of a dense row-major matrix, zeros included only
    /// when `keep_zeros` is set.
    pub fn from_dense(rows: &[Vec<f64>], n_cols: usize, keep_zeros: bool) -> Result<Self> {
        let sparse: Vec<Vec<(usize, f64)>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| keep_zeros || **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(n_cols, &sparse)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    /// `x_iᵀ w`.
    #[inline]
    pub fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        let (cols, vals) = self.row(i);
        cols.iter().zip(vals).map(|(&c, &v)| v * w[c]).sum()
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|v| v * v).sum()
    }

    /// `Xs`.
    pub fn matvec(&self, s: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_rows];
        self.matvec_into(s, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, s: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n_cols, s.len())?;
        check_len(self.n_rows, out.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(i, s);
        }
        Ok(())
    }

    /// `Xᵀu`.
    pub fn transpose_matvec(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_cols];
        self.transpose_matvec_into(u, &mut out)?;
        Ok(out)
    }

    pub fn transpose_matvec_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n_rows, u.len())?;
        check_len(self.n_cols, out.len())?;
        out.fill(0.0);
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v * ui;
            }
        }
        Ok(())
    }

    /// The sub-matrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for &r in rows {
            let (c, v) = self.row(r);
            cols.extend_from_slice(c);
            vals.extend_from_slice(v);
            offsets.push(cols.len());
        }
        CsrMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
        }
    }

    /// Row-major dense copy. Meant for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows)
            .map(|i| {
                let mut row = vec![0.0; self.n_cols];
                let (cols, vals) = self.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    row[c] = v;
                }
                row
            })
            .collect()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// The Hessian `λI + (1/n)XᵀDX` of a regularised empirical loss, applied
/// without ever forming the `p × p` matrix.
#[derive(Debug, Clone)]
pub struct HessianOperator<'a> {
    lambda: f64,
    matrix: &'a CsrMatrix,
    diag: Vec<f64>,
}

impl<'a> HessianOperator<'a> {
    pub fn new(lambda: f64, matrix: &'a CsrMatrix, diag: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        check_len(matrix.n_rows(), diag.len())?;
        if let Some(d) = diag.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "Hessian weights must be finite and nonnegative, found {d}"
            )));
        }
        Ok(HessianOperator { lambda, matrix, diag })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn matrix(&self) -> &CsrMatrix {
        self.matrix
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.matrix.n_cols()
    }

    /// `λs + (1/n)Xᵀ(D(Xs))`.
    pub fn apply(&self, s: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        let mut scratch = vec![0.0; self.matrix.n_rows()];
        self.apply_into(s, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// As [`apply`](Self::apply), reusing an `n`-length scratch buffer.
    pub fn apply_into(&self, s: &[f64], scratch: &mut [f64], out: &mut [f64]) -> Result<()> {
        let n = self.matrix.n_rows() as f64;
        self.matrix.matvec_into(s, scratch)?;
        for (t, d) in scratch.iter_mut().zip(&self.diag) {
            *t *= d / n;
        }
        self.matrix.transpose_matvec_into(scratch, out)?;
        for (o, si) in out.iter_mut().zip(s) {
            *o += self.lambda * si;
        }
        Ok(())
    }

    /// `sᵀHs = λ‖s‖² + (1/n)Σ d_i (x_iᵀs)²`.
    pub fn quadratic_form(&self, s: &[f64]) -> Result<f64> {
        check_len(self.dim(), s.len())?;
        let n = self.matrix.n_rows() as f64;
        let reg: f64 = s.iter().map(|v| v * v).sum();
        let data: f64 = (0..self.matrix.n_rows())
            .map(|i| {
                let z = self.matrix.row_dot(i, s);
                self.diag[i] * z * z
            })
            .sum();
        Ok(self.lambda * reg + data / n)
    }
}
