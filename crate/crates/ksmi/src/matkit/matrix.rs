//! Dense row-major matrices and the small set of factorizations the estimators
//! need: thin QR with a deterministic sign convention, cyclic-Jacobi symmetric
//! eigendecomposition, PSD square roots, operator norms, and empirical
//! covariance. No BLAS/LAPACK — every matrix here is small (at most a few
//! hundred rows on the factorization paths) and determinism matters more than
//! peak throughput.

use crate::error::{Error, Result};

/// Dense real matrix, row-major: `data[i * cols + j]` holds entry `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = entries[i];
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidShape("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidShape("ragged rows".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Matrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x*", self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[l * other.cols..(l + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * self`, symmetrized exactly.
    pub fn gram(&self) -> Matrix {
        let k = self.cols;
        let mut g = Matrix::zeros(k, k);
        for row in 0..self.rows {
            let r = self.row(row);
            for i in 0..k {
                for j in i..k {
                    g.data[i * k + j] += r[i] * r[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                g.data[i * k + j] = g.data[j * k + i];
            }
        }
        g
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Matrix::new(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest off-symmetry `|a_ij - a_ji|`; `None` when not square.
    pub fn asymmetry(&self) -> Option<f64> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        Some(worst)
    }

    /// Assemble the 2x2 block matrix `[[a, b], [b^T, c]]`.
    pub fn block_symmetric(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix> {
        if a.rows != a.cols || c.rows != c.cols || b.rows != a.rows || b.cols != c.cols {
            return Err(Error::InvalidShape(
                "block assembly needs square diagonal blocks matching the cross block".into(),
            ));
        }
        let (p, q) = (a.rows, c.rows);
        let n = p + q;
        let mut m = Matrix::zeros(n, n);
        for i in 0..p {
            for j in 0..p {
                m.data[i * n + j] = a.get(i, j);
            }
            for j in 0..q {
                m.data[i * n + p + j] = b.get(i, j);
            }
        }
        for i in 0..q {
            for j in 0..p {
                m.data[(p + i) * n + j] = b.get(j, i);
            }
            for j in 0..q {
                m.data[(p + i) * n + p + j] = c.get(i, j);
            }
        }
        Ok(m)
    }

    /// Copy of columns `[from, to)`.
    pub fn columns(&self, from: usize, to: usize) -> Matrix {
        debug_assert!(from <= to && to <= self.cols);
        let mut out = Matrix::zeros(self.rows, to - from);
        for i in 0..self.rows {
            out.data[i * (to - from)..(i + 1) * (to - from)]
                .copy_from_slice(&self.data[i * self.cols + from..i * self.cols + to]);
        }
        out
    }
}

/// Thin QR orthonormalization via Householder reflections.
///
/// Returns `Q` with orthonormal columns spanning the column space of `m`. The
/// sign convention fixes the diagonal of `R` to be non-negative, which makes
/// the factor unique (and, applied to a Gaussian matrix, Haar-distributed).
/// Rank deficiency — any `|R_jj|` below `1e-12` times the largest input column
/// norm — is an error.
pub fn qr_orthonormalize(m: &Matrix) -> Result<Matrix> {
    let (d, k) = (m.rows, m.cols);
    if k == 0 || d < k {
        return Err(Error::InvalidShape(format!(
            "thin QR needs rows >= cols >= 1, got {d}x{k}"
        )));
    }
    let scale = (0..k)
        .map(|j| (0..d).map(|i| m.get(i, j).powi(2)).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular("all-zero input to QR".into()));
    }
    let threshold = 1e-12 * scale;

    let mut r = m.clone();
    // Householder vectors, one per column, each of length d - j.
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut diag = vec![0.0f64; k];

    for j in 0..k {
        let norm_x = (j..d).map(|i| r.get(i, j).powi(2)).sum::<f64>().sqrt();
        if norm_x < threshold {
            return Err(Error::Singular(format!(
                "rank deficiency at column {j}: |R_jj| = {norm_x:e} < {threshold:e}"
            )));
        }
        let x0 = r.get(j, j);
        let alpha = if x0 >= 0.0 { -norm_x } else { norm_x };
        let mut v: Vec<f64> = (j..d).map(|i| r.get(i, j)).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for t in v.iter_mut() {
                *t /= vnorm;
            }
            // Apply H = I - 2vv^T to the remaining columns.
            for c in j..k {
                let dot: f64 = (j..d).map(|i| v[i - j] * r.get(i, c)).sum();
                for i in j..d {
                    let val = r.get(i, c) - 2.0 * dot * v[i - j];
                    r.set(i, c, val);
                }
            }
        }
        diag[j] = alpha;
        reflectors.push(v);
    }

    // Q = H_0 ... H_{k-1} applied to the thin identity.
    let mut q = Matrix::zeros(d, k);
    for j in 0..k {
        q.set(j, j, 1.0);
    }
    for j in (0..k).rev() {
        let v = &reflectors[j];
        for c in 0..k {
            let dot: f64 = (j..d).map(|i| v[i - j] * q.get(i, c)).sum();
            if dot != 0.0 {
                for i in j..d {
                    let val = q.get(i, c) - 2.0 * dot * v[i - j];
                    q.set(i, c, val);
                }
            }
        }
    }

    // Flip columns so that R has a non-negative diagonal.
    for j in 0..k {
        if diag[j] < 0.0 {
            for i in 0..d {
                let val = -q.get(i, j);
                q.set(i, j, val);
            }
        }
    }
    Ok(q)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matrix of column
/// eigenvectors, so `V diag(lambda) V^T` reconstructs the input. Inputs with
/// asymmetry above `1e-10` times the largest entry are rejected.
pub fn sym_eig(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if m.rows != m.cols {
        return Err(Error::InvalidShape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let scale = m.max_abs();
    let asym = m.asymmetry().unwrap_or(0.0);
    if scale > 0.0 && asym > 1e-10 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if n == 0 {
        return Ok((vec![], Matrix::zeros(0, 0)));
    }

    // Work on the exactly symmetrized copy.
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m.get(i, j) + m.get(j, i));
        }
    }
    let mut v = Matrix::identity(n);

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        (2.0 * s).sqrt()
    };

    let frob = (a.iter().map(|t| t * t).sum::<f64>())
        .sqrt()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        if off(&a) <= 1e-14 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_col, v.get(i, old_col));
        }
    }
    Ok((eigenvalues, vectors))
}

/// Symmetric PSD square root via eigendecomposition.
///
/// Eigenvalues below `1e-12 * lambda_max` floor to zero; an eigenvalue below
/// `-1e-8 * lambda_max` means the input is not PSD and is an error.
pub fn matrix_sqrt_psd(m: &Matrix) -> Result<Matrix> {
    let (mut eig, v) = sym_eig(m)?;
    let lambda_max = eig.iter().fold(0.0f64, |acc, &l| acc.max(l));
    for l in eig.iter_mut() {
        if *l < -1e-8 * lambda_max.max(1e-300) {
            return Err(Error::NotPsd { eigenvalue: *l });
        }
        *l = if *l < 1e-12 * lambda_max {
            0.0
        } else {
            l.sqrt()
        };
    }
    // S = V diag(sqrt(lambda)) V^T, symmetrized.
    let n = m.rows();
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for l in 0..n {
                acc += v.get(i, l) * eig[l] * v.get(j, l);
            }
            s.set(i, j, acc);
            s.set(j, i, acc);
        }
    }
    Ok(s)
}

/// Largest singular value (largest `|eigenvalue|` for symmetric input),
/// computed from the spectrum of `m^T m`.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    // Work on the smaller Gram matrix of the two.
    let g = if m.cols() <= m.rows() {
        m.gram()
    } else {
        m.transpose().gram()
    };
    let (eig, _) = sym_eig(&g).expect("gram matrix is symmetric by construction");
    eig.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Mean-centered empirical covariance with `1/(n-1)` normalization.
pub fn empirical_covariance(samples: &Matrix) -> Result<Matrix> {
    let n = samples.rows();
    if n < 2 {
        return Err(Error::invalid_arg(
            "samples",
            format!("covariance needs at least 2 rows, got {n}"),
        ));
    }
    let d = samples.cols();
    let mut mean = vec![0.0f64; d];
    for i in 0..n {
        for (m, &x) in mean.iter_mut().zip(samples.row(i)) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut cov = Matrix::zeros(d, d);
    for i in 0..n {
        let r = samples.row(i);
        for a in 0..d {
            let da = r[a] - mean[a];
            for b in a..d {
                let v = cov.get(a, b) + da * (r[b] - mean[b]);
                cov.set(a, b, v);
            }
        }
    }
    let norm = 1.0 / (n as f64 - 1.0);
    for a in 0..d {
        for b in a..d {
            let v = cov.get(a, b) * norm;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::rng::RngStream;
    use crate::matkit::sample_gaussian_matrix;

    fn random_symmetric(n: usize, rng: &mut RngStream) -> Matrix {
        let g = sample_gaussian_matrix(n, n, rng).unwrap();
        g.add(&g.transpose()).unwrap().scale(0.5)
    }

    #[test]
    fn qr_identity_block_unchanged() {
        let mut m = Matrix::zeros(3, 2);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        let q = qr_orthonormalize(&m).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert!((q.get(i, j) - m.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_removes_axis_scaling() {
        let m = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0], vec![0.0, 0.0]]).unwrap();
        let q = qr_orthonormalize(&m).unwrap();
        let expected =
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(q.sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn qr_columns_orthonormal() {
        let mut rng = RngStream::derived(11, "qr-test", 0);
        let m = sample_gaussian_matrix(10, 3, &mut rng).unwrap();
        let q = qr_orthonormalize(&m).unwrap();
        let gram = q.gram();
        assert!(gram.sub(&Matrix::identity(3)).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn qr_rejects_rank_deficient() {
        // Second column is a multiple of the first.
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(qr_orthonormalize(&m), Err(Error::Singular(_))));
    }

    #[test]
    fn sym_eig_identity() {
        let (eig, _) = sym_eig(&Matrix::identity(3)).unwrap();
        for l in eig {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sym_eig_diagonal_sorted_with_axis_vectors() {
        let m = Matrix::diag(&[4.0, 1.0]);
        let (eig, v) = sym_eig(&m).unwrap();
        assert!((eig[0] - 1.0).abs() < 1e-12 && (eig[1] - 4.0).abs() < 1e-12);
        // Eigenvector of 1.0 is the second axis, of 4.0 the first (up to sign).
        assert!(v.get(1, 0).abs() > 0.999 && v.get(0, 1).abs() > 0.999);
    }

    #[test]
    fn sym_eig_reconstructs() {
        let mut rng = RngStream::derived(13, "eig-test", 0);
        let m = random_symmetric(6, &mut rng);
        let (eig, v) = sym_eig(&m).unwrap();
        let rec = v
            .mul(&Matrix::diag(&eig))
            .unwrap()
            .mul(&v.transpose())
            .unwrap();
        let scale = m.max_abs().max(1.0);
        assert!(rec.sub(&m).unwrap().max_abs() < 1e-8 * scale);
        // V^T V = I
        assert!(v.gram().sub(&Matrix::identity(6)).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn sym_eig_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn sqrt_identity_and_diag() {
        let s = matrix_sqrt_psd(&Matrix::identity(4)).unwrap();
        assert!(s.sub(&Matrix::identity(4)).unwrap().max_abs() < 1e-12);
        let s = matrix_sqrt_psd(&Matrix::diag(&[4.0, 9.0])).unwrap();
        assert!(s.sub(&Matrix::diag(&[2.0, 3.0])).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = RngStream::derived(17, "sqrt-test", 0);
        let g = sample_gaussian_matrix(5, 5, &mut rng).unwrap();
        let psd = g.mul(&g.transpose()).unwrap();
        let s = matrix_sqrt_psd(&psd).unwrap();
        let scale = psd.max_abs().max(1.0);
        assert!(s.mul(&s).unwrap().sub(&psd).unwrap().max_abs() < 1e-8 * scale);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = Matrix::diag(&[1.0, -0.5]);
        assert!(matches!(matrix_sqrt_psd(&m), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn operator_norm_basics() {
        assert!((operator_norm(&Matrix::diag(&[1.0, -3.0])) - 3.0).abs() < 1e-12);
        assert!((operator_norm(&Matrix::identity(5)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let mut rng = RngStream::derived(19, "opnorm-test", 0);
        let m = sample_gaussian_matrix(4, 4, &mut rng).unwrap();
        // Independent oracle: power iteration on m^T m.
        let g = m.transpose().mul(&m).unwrap();
        let mut v = vec![1.0f64; 4];
        for _ in 0..10_000 {
            let mut w = vec![0.0f64; 4];
            for i in 0..4 {
                for j in 0..4 {
                    w[i] += g.get(i, j) * v[j];
                }
            }
            let norm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
            for (t, s) in v.iter_mut().zip(&w) {
                *t = s / norm;
            }
        }
        let mut gv = vec![0.0f64; 4];
        for i in 0..4 {
            for j in 0..4 {
                gv[i] += g.get(i, j) * v[j];
            }
        }
        let rayleigh: f64 = v.iter().zip(&gv).map(|(a, b)| a * b).sum();
        assert!((operator_norm(&m) - rayleigh.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn covariance_identical_rows_is_zero() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert!(empirical_covariance(&m).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn covariance_hand_computed() {
        let m = Matrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 2.0]]).unwrap();
        let c = empirical_covariance(&m).unwrap();
        let expected = Matrix::from_rows(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        assert!(c.sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn covariance_of_standard_normal_cloud() {
        let mut rng = RngStream::derived(23, "cov-test", 0);
        let m = sample_gaussian_matrix(100_000, 3, &mut rng).unwrap();
        let c = empirical_covariance(&m).unwrap();
        assert!(c.sub(&Matrix::identity(3)).unwrap().max_abs() < 0.05);
    }

    #[test]
    fn covariance_needs_two_rows() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(empirical_covariance(&m).is_err());
    }
}
