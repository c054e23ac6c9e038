//! Small dense helpers shared by the regression and clustering code.

/// Relative threshold below which a Householder pivot marks a column as
/// linearly dependent on the columns before it.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Householder QR of a tall column-major matrix, kept in factored form.
#[derive(Debug, Clone)]
pub struct Qr {
    /// Reflected columns: strictly-upper entries hold R, entries from the
    /// diagonal down hold the Householder vectors. R's diagonal is `diag`.
    cols: Vec<Vec<f64>>,
    diag: Vec<f64>,
}

/// Outcome of a least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Diagonal of `(X^T X)^{-1}`.
    pub inverse_gram_diag: Vec<f64>,
}

impl Qr {
    /// Factors `columns` (each of equal length). Returns the indices of columns
    /// whose pivot is negligible relative to the column's own norm.
    pub fn factor(columns: &[&[f64]]) -> Result<Self, Vec<usize>> {
        let mut cols: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
        let p = cols.len();
        let mut diag = vec![0.0; p];
        let mut dependent = Vec::new();
        // `row` advances only on accepted columns so that every dependent
        // column is reported, not just the first
        let mut row = 0;
        for k in 0..p {
            let col_norm = norm(columns[k]);
            let alpha_sq: f64 = cols[k]
                .get(row..)
                .map_or(0.0, |c| c.iter().map(|v| v * v).sum());
            let alpha = alpha_sq.sqrt();
            if col_norm == 0.0 || alpha <= RANK_TOLERANCE * col_norm {
                dependent.push(k);
                continue;
            }
            let x0 = cols[k][row];
            let r_kk = if x0 >= 0.0 { -alpha } else { alpha };
            // v = x - r_kk e_1, stored in place
            let head = x0 - r_kk;
            let v_norm_sq = alpha_sq - x0 * x0 + head * head;
            cols[k][row] = head;
            for j in k + 1..p {
                let (left, right) = cols.split_at_mut(j);
                let v = &left[k][row..];
                let f = 2.0 * dot(v, &right[0][row..]) / v_norm_sq;
                for (a, b) in right[0][row..].iter_mut().zip(v) {
                    *a -= f * b;
                }
            }
            diag[k] = r_kk;
            row += 1;
        }
        if !dependent.is_empty() {
            return Err(dependent);
        }
        Ok(Self { cols, diag })
    }

    fn apply_qt(&self, y: &mut [f64]) {
        for k in 0..self.cols.len() {
            let v = &self.cols[k][k..];
            let v_norm_sq = v.iter().map(|a| a * a).sum::<f64>();
            let f = 2.0 * dot(v, &y[k..]) / v_norm_sq;
            for (a, b) in y[k..].iter_mut().zip(v) {
                *a -= f * b;
            }
        }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.cols[j][i]
        }
    }

    /// Solves the least-squares problem `min ||X b - y||`.
    pub fn solve(&self, y: &[f64]) -> LeastSquares {
        let p = self.cols.len();
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        let mut b = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = qty[i];
            for j in i + 1..p {
                s -= self.r(i, j) * b[j];
            }
            b[i] = s / self.diag[i];
        }
        // R^{-1}, upper triangular, column by column
        let mut rinv = vec![vec![0.0; p]; p];
        for j in 0..p {
            rinv[j][j] = 1.0 / self.diag[j];
            for i in (0..j).rev() {
                let s: f64 = (i + 1..=j).map(|k| self.r(i, k) * rinv[k][j]).sum();
                rinv[i][j] = -s / self.diag[i];
            }
        }
        let inverse_gram_diag = (0..p)
            .map(|i| (i..p).map(|j| rinv[i][j] * rinv[i][j]).sum())
            .collect();
        // residual = Q [0; (Q^T y)_{p..}]
        let mut residuals = qty;
        residuals[..p].iter_mut().for_each(|v| *v = 0.0);
        self.apply_q(&mut residuals);
        LeastSquares {
            coefficients: b,
            residuals,
            inverse_gram_diag,
        }
    }

    fn apply_q(&self, z: &mut [f64]) {
        for k in (0..self.cols.len()).rev() {
            let v = &self.cols[k][k..];
            let v_norm_sq = v.iter().map(|a| a * a).sum::<f64>();
            let f = 2.0 * dot(v, &z[k..]) / v_norm_sq;
            for (a, b) in z[k..].iter_mut().zip(v) {
                *a -= f * b;
            }
        }
    }
}
