//! Dense kernels behind subspace learning.
//!
//! The right singular vectors of a (row-weighted) document matrix `WE` are
//! the eigenvectors of its weighted SSCP matrix `EᵀW²E`, and the singular
//! values are the square roots of the corresponding eigenvalues. The
//! eigenproblem is solved with cyclic Jacobi rotations, which is robust for
//! the small `d × d` matrices that arise (`d` is the embedding dimension).
//!
//! Going through the SSCP squares the condition number of `WE`. Rows are
//! unit-normalized and only a handful of the leading components are kept, so
//! the loss of accuracy in the small singular values does not matter here.

use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm, relative to the full norm, at which Jacobi stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues at or below this fraction of the largest one are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data("matrix contains non-finite values".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(A + Aᵀ)/2` first.
pub fn symmetric_eigh(a: &Matrix) -> Result<SymmetricEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.cols(),
        });
    }
    if a.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("matrix contains non-finite values".into()));
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    let mut v = Matrix::identity(n);
    let threshold = JACOBI_TOLERANCE * m.frobenius_norm();

    let mut sweeps = 0;
    loop {
        if off_diagonal_norm(&m) <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (c, s) = jacobi_rotation(m[(p, p)], m[(q, q)], apq);
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, dst)] = v[(r, src)];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += m[(i, j)] * m[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Cosine/sine of the rotation that zeroes `a_pq` (Golub & Van Loan, sym.schur2).
fn jacobi_rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau.abs() > 1e150 {
        // sqrt(1 + tau²) would overflow; t ~ 1/(2 tau).
        0.5 / tau
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

/// `M <- JᵀMJ`, `V <- VJ` for the rotation in the (p, q) plane.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `EᵀW²E = Σᵢ wᵢ²·eᵢeᵢᵀ` for the rows `eᵢ` of `e`.
///
/// With all weights equal to one this is `EᵀE` computed in the same order.
pub fn weighted_sscp(e: &Matrix, weights: &[f64]) -> Result<Matrix> {
    if weights.len() != e.rows() {
        return Err(Error::Dimension {
            expected: e.rows(),
            got: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::Data(format!("weights must be finite and non-negative, got {w}")));
    }
    let d = e.cols();
    let mut out = Matrix::zeros(d, d);
    for (i, &w) in weights.iter().enumerate() {
        let w2 = w * w;
        if w2 == 0.0 {
            continue;
        }
        let row = e.row(i);
        for a in 0..d {
            let scaled = w2 * row[a];
            if scaled == 0.0 {
                continue;
            }
            // Upper triangle only; mirrored below.
            for b in a..d {
                out.data[a * d + b] += scaled * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            out.data[a * d + b] = out.data[b * d + a];
        }
    }
    Ok(out)
}

/// Learned eigenthemes: an orthonormal `d × k` basis and the matching
/// singular values (strengths), largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
    strengths: Vec<f64>,
}

impl Subspace {
    pub fn new(basis: Matrix, strengths: Vec<f64>) -> Result<Self> {
        if basis.cols() != strengths.len() {
            return Err(Error::Dimension {
                expected: basis.cols(),
                got: strengths.len(),
            });
        }
        if strengths.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Data("strengths must be finite and non-negative".into()));
        }
        Ok(Self { basis, strengths })
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Effective number of components.
    pub fn rank(&self) -> usize {
        self.strengths.len()
    }

    /// Coefficients `eᵀV` of `e` on each basis column.
    pub fn project(&self, e: &[f64]) -> Result<Vec<f64>> {
        if e.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: e.len(),
            });
        }
        let k = self.rank();
        let mut coeffs = vec![0.0; k];
        for (a, &x) in e.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (c, b) in coeffs.iter_mut().zip(self.basis.row(a)) {
                *c += x * b;
            }
        }
        Ok(coeffs)
    }

    /// Same subspace with column `j` of the basis negated.
    pub fn with_flipped_sign(&self, j: usize) -> Self {
        let mut basis = self.basis.clone();
        for r in 0..basis.rows() {
            basis[(r, j)] = -basis[(r, j)];
        }
        Self {
            basis,
            strengths: self.strengths.clone(),
        }
    }
}

/// Rank-`k` truncated SVD of `diag(w)·E`, returning only the right singular
/// vectors and singular values.
///
/// `k` is reduced to at most `min(n, d)` and to the number of eigenvalues
/// above [`RANK_TOLERANCE`] times the largest; the returned subspace reports
/// the effective rank. An all-zero weighted matrix yields rank 0.
pub fn truncated_svd(e: &Matrix, weights: &[f64], k: usize) -> Result<Subspace> {
    if k == 0 {
        return Err(Error::Domain("number of components must be positive".into()));
    }
    if e.rows() == 0 {
        return Err(Error::EmptyDocument);
    }
    let sscp = weighted_sscp(e, weights)?;
    let eig = symmetric_eigh(&sscp)?;
    let largest = eig.values.first().copied().unwrap_or(0.0);
    let significant = if largest > 0.0 {
        eig.values.iter().take_while(|&&l| l > RANK_TOLERANCE * largest).count()
    } else {
        0
    };
    let keep = k.min(e.rows()).min(e.cols()).min(significant);
    let d = e.cols();
    let mut basis = Matrix::zeros(d, keep);
    for j in 0..keep {
        for r in 0..d {
            basis[(r, j)] = eig.vectors[(r, j)];
        }
    }
    let strengths = eig.values[..keep].iter().map(|l| l.max(0.0).sqrt()).collect();
    Subspace::new(basis, strengths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let a = random_matrix(rng, n, n);
        let mut s = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = a[(i, j)] + a[(j, i)];
            }
        }
        s
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    fn det(mut m: Vec<Vec<f64>>) -> f64 {
        let n = m.len();
        let mut det = 1.0;
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            if m[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            det *= m[c][c];
            for r in (c + 1)..n {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        det
    }

    fn char_poly(a: &Matrix, lambda: f64) -> f64 {
        let n = a.rows();
        let m = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)] - if i == j { lambda } else { 0.0 }).collect())
            .collect();
        det(m)
    }

    /// Roots of det(A - λI) by scanning a fine grid for sign changes, then bisecting.
    fn roots_by_bisection(a: &Matrix) -> Vec<f64> {
        let bound = a.frobenius_norm() + 1.0;
        let steps = 20_000;
        let h = 2.0 * bound / steps as f64;
        let mut roots = Vec::new();
        let mut lo = -bound;
        let mut f_lo = char_poly(a, lo);
        for s in 1..=steps {
            let hi = -bound + s as f64 * h;
            let f_hi = char_poly(a, hi);
            if f_lo.signum() != f_hi.signum() {
                let (mut l, mut r, mut fl) = (lo, hi, f_lo);
                for _ in 0..200 {
                    let mid = 0.5 * (l + r);
                    let fm = char_poly(a, mid);
                    if fm.signum() == fl.signum() {
                        l = mid;
                        fl = fm;
                    } else {
                        r = mid;
                    }
                }
                roots.push(0.5 * (l + r));
            }
            lo = hi;
            f_lo = f_hi;
        }
        roots.sort_by(|x, y| y.total_cmp(x));
        roots
    }

    #[test]
    fn diagonal_matrix() {
        let mut a = Matrix::zeros(3, 3);
        a[(0, 0)] = 2.0;
        a[(1, 1)] = 5.0;
        a[(2, 2)] = 1.0;
        let eig = symmetric_eigh(&a).unwrap();
        assert_eq!(eig.values, vec![5.0, 2.0, 1.0]);
        assert_eq!(eig.vectors.column(0).iter().map(|x| x.abs()).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
        assert_eq!(eig.vectors.column(1).iter().map(|x| x.abs()).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
        assert_eq!(eig.sweeps, 0);
    }

    #[test]
    fn classic_two_by_two() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let eig = symmetric_eigh(&a).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vectors.column(0);
        let v1 = eig.vectors.column(1);
        assert!((v0[0].abs() - h).abs() < 1e-14 && (v0[0] - v0[1]).abs() < 1e-14);
        assert!((v1[0].abs() - h).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
    }

    #[test]
    fn random_symmetric_matches_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let a = random_symmetric(&mut rng, 8);
            let eig = symmetric_eigh(&a).unwrap();
            let fro = a.frobenius_norm();
            for (i, &lambda) in eig.values.iter().enumerate() {
                let v = eig.vectors.column(i);
                let av = a.matmul(&Matrix::from_vec(8, 1, v.clone()).unwrap()).unwrap();
                let residual: f64 = (0..8).map(|r| (av[(r, 0)] - lambda * v[r]).powi(2)).sum::<f64>().sqrt();
                assert!(residual < 1e-8 * fro, "residual {residual}");
            }
            let roots = roots_by_bisection(&a);
            assert_eq!(roots.len(), 8);
            for (r, l) in roots.iter().zip(&eig.values) {
                assert!((r - l).abs() < 1e-8 * fro.max(1.0), "{r} vs {l}");
            }
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_symmetric(&mut rng, 30);
        let v = symmetric_eigh(&a).unwrap().vectors;
        let vtv = v.transpose().matmul(&v).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        let a = Matrix {
            rows: 2,
            cols: 2,
            data: vec![1.0, f64::NAN, f64::NAN, 1.0],
        };
        assert!(matches!(symmetric_eigh(&a), Err(Error::Data(_))));
        assert!(Matrix::from_vec(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn unit_weights_give_gram_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = random_matrix(&mut rng, 7, 4);
        let sscp = weighted_sscp(&e, &[1.0; 7]).unwrap();
        let gram = e.transpose().matmul(&e).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((sscp[(i, j)] - gram[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_row_is_scaled_outer_product() {
        let e = Matrix::from_rows(&[[1.0, -2.0, 0.5]]).unwrap();
        let s = weighted_sscp(&e, &[3.0]).unwrap();
        let row = [1.0, -2.0, 0.5];
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(s[(a, b)], 9.0 * row[a] * row[b]);
            }
        }
    }

    #[test]
    fn sscp_rejects_bad_weights() {
        let e = Matrix::from_rows(&[[1.0, 0.0]]).unwrap();
        assert!(matches!(weighted_sscp(&e, &[1.0, 1.0]), Err(Error::Dimension { .. })));
        assert!(matches!(weighted_sscp(&e, &[-1.0]), Err(Error::Data(_))));
    }

    #[test]
    fn rank_one_ensemble() {
        let u = [0.6, 0.0, 0.8];
        let e = Matrix::from_rows(&[u; 5]).unwrap();
        let s = truncated_svd(&e, &[1.0; 5], 1).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.strengths()[0] - 5f64.sqrt()).abs() < 1e-12);
        let b = s.basis().column(0);
        let sign = b[0].signum();
        for (x, y) in b.iter().zip(&u) {
            assert!((sign * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_ensemble_clamps_requested_k() {
        let e = Matrix::from_rows(&[[0.0, 1.0]; 4]).unwrap();
        assert_eq!(truncated_svd(&e, &[1.0; 4], 10).unwrap().rank(), 1);
    }

    #[test]
    fn diagonal_singular_values() {
        let e = Matrix::from_rows(&[[3.0, 0.0], [0.0, 2.0]]).unwrap();
        let s = truncated_svd(&e, &[1.0, 1.0], 1).unwrap();
        assert!((s.strengths()[0] - 3.0).abs() < 1e-12);
        assert!((s.basis()[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(s.basis()[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let e = Matrix::zeros(0, 3);
        assert!(matches!(truncated_svd(&e, &[], 2), Err(Error::EmptyDocument)));
        let e = Matrix::zeros(1, 3);
        assert!(matches!(truncated_svd(&e, &[1.0], 0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let e = Matrix::zeros(3, 4);
        assert_eq!(truncated_svd(&e, &[1.0; 3], 2).unwrap().rank(), 0);
    }

    #[test]
    fn eckart_young_against_random_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let e = random_matrix(&mut rng, 20, 8);
        let s = truncated_svd(&e, &[1.0; 20], 3).unwrap();
        let best = projection_residual(&e, s.basis());
        for _ in 0..100 {
            let q = random_orthonormal(&mut rng, 8, 3);
            assert!(best <= projection_residual(&e, &q) + 1e-9);
        }
    }

    fn random_orthonormal(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Matrix {
        let g = random_matrix(rng, d, k);
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for j in 0..k {
            let mut v = g.column(j);
            for c in &cols {
                let p: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            cols.push(v);
        }
        let mut q = Matrix::zeros(d, k);
        for (j, c) in cols.iter().enumerate() {
            for r in 0..d {
                q[(r, j)] = c[r];
            }
        }
        q
    }

    fn projection_residual(e: &Matrix, basis: &Matrix) -> f64 {
        let p = e.matmul(basis).unwrap().matmul(&basis.transpose()).unwrap();
        let diff: Vec<f64> = e.as_slice().iter().zip(p.as_slice()).map(|(a, b)| a - b).collect();
        diff.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn flipped_signs_project_to_negated_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = random_matrix(&mut rng, 10, 5);
        let s = truncated_svd(&e, &[1.0; 10], 3).unwrap();
        let x = e.row(0);
        let a = s.project(x).unwrap();
        let b = s.with_flipped_sign(1).project(x).unwrap();
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], -b[1]);
        assert!(matches!(s.project(&[1.0]), Err(Error::Dimension { .. })));
    }
}
