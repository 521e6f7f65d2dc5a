//! Dense symmetric linear algebra and the scalar special functions the rest
//! of the crate builds on.
//!
//! Dimensions here are small (a few hundred at most), so the eigensolver is a
//! plain cyclic Jacobi iteration and all storage is dense row-major.

use serde::Serialize;

use crate::error::{domain, invalid, numeric, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-14;
const PSD_PIVOT_REL_TOL: f64 = 1e-12;

/// General dense matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
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

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(invalid("ragged rows"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
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

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(invalid(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(invalid(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Number of columns that are not identically zero.
    pub fn nonzero_columns(&self) -> usize {
        (0..self.cols)
            .filter(|&j| (0..self.rows).any(|i| self[(i, j)] != 0.0))
            .count()
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

/// Dense real symmetric matrix. Symmetry is exact: every constructor
/// either checks it or writes both triangles from one value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = d;
        }
        m
    }

    /// Builds the matrix from the upper triangle of `f(i, j)` (`i <= j`).
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Rows must describe an exactly symmetric square matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid("empty matrix"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("matrix is not square"));
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(invalid(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(SymMatrix {
            dim: n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Symmetrizes a square general matrix as (m + mᵀ)/2.
    pub fn symmetrize(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(invalid("matrix is not square"));
        }
        let n = m.rows();
        Ok(Self::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Writes both (i, j) and (j, i).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "vector length mismatch");
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn mul(&self, other: &SymMatrix) -> Matrix {
        self.to_matrix()
            .mul(&other.to_matrix())
            .expect("equal dimensions")
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// self + factor · v vᵀ
    pub fn add_outer(&self, factor: f64, v: &[f64]) -> SymMatrix {
        assert_eq!(v.len(), self.dim);
        SymMatrix::from_fn(self.dim, |i, j| self.get(i, j) + factor * v[i] * v[j])
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Leading `k × k` block.
    pub fn leading_block(&self, k: usize) -> SymMatrix {
        SymMatrix::from_fn(k, |i, j| self.get(i, j))
    }

    /// P M P for a symmetric P (used for the projected covariance AΣA).
    pub fn congruence(&self, p: &SymMatrix) -> SymMatrix {
        let pm = p.mul(self);
        let pmp = pm.mul(&p.to_matrix()).expect("equal dimensions");
        SymMatrix::symmetrize(&pmp).expect("square")
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(invalid("matrix has non-finite entries"))
        }
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and
/// orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug, Serialize)]
pub struct EigenDecomp {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomp {
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)])
                .sum()
        })
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    pub fn determinant(&self) -> f64 {
        self.eigenvalues.iter().product()
    }
}

/// Cyclic Jacobi rotations on a working copy. Returns the rotated matrix
/// (diagonal up to tolerance) and, when requested, the accumulated rotations.
fn jacobi(m: &SymMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    m.check_finite()?;
    let n = m.dim();
    let mut a = m.to_matrix();
    let mut v = want_vectors.then(|| Matrix::identity(n));
    let threshold = JACOBI_REL_TOL * m.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if !converged {
        return Err(numeric(format!(
            "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }
    Ok(((0..n).map(|i| a[(i, i)]).collect(), v))
}

/// Symmetric eigen-decomposition with ascending eigenvalues.
///
/// Eigenvector signs are fixed so that the largest-magnitude component of
/// each column is positive, which makes the output a pure function of the
/// input.
pub fn eigh(m: &SymMatrix) -> Result<EigenDecomp> {
    let (values, vectors) = jacobi(m, true)?;
    let vectors = vectors.expect("vectors requested");
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));

    let mut sorted = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = vectors.column(src);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            sorted[(i, dst)] = sign * col[i];
        }
    }
    Ok(EigenDecomp {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        eigenvectors: sorted,
    })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &SymMatrix) -> Result<Vec<f64>> {
    let (mut values, _) = jacobi(m, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Cholesky factor of a positive semidefinite matrix.
///
/// Pivots within `1e-12 · max diagonal` of zero are clamped: the
/// corresponding column of the factor is set to zero, so rank-deficient
/// covariances factor without error. A pivot below minus that tolerance
/// means the input is not PSD.
pub fn cholesky(m: &SymMatrix) -> Result<Matrix> {
    m.check_finite()?;
    let n = m.dim();
    let max_diag = m.diag().into_iter().fold(0.0f64, f64::max);
    let tol = PSD_PIVOT_REL_TOL * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let pivot = m.get(j, j) - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if pivot < -tol {
            return Err(domain(format!(
                "matrix is not positive semidefinite (pivot {pivot:e} at {j})"
            )));
        }
        if pivot <= tol {
            continue;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = m.get(i, j) - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

fn cholesky_strict(m: &SymMatrix) -> Result<Matrix> {
    m.check_finite()?;
    let n = m.dim();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let pivot = m.get(j, j) - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if pivot <= 0.0 {
            return Err(domain(format!(
                "matrix is not positive definite (pivot {pivot:e} at {j})"
            )));
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = m.get(i, j) - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn invert_spd(m: &SymMatrix) -> Result<SymMatrix> {
    let l = cholesky_strict(m)?;
    let n = m.dim();
    // L⁻¹ by forward substitution, then (L⁻¹)ᵀ L⁻¹.
    let mut linv = Matrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[(i, k)] * linv[(k, col)];
            }
            linv[(i, col)] = s / l[(i, i)];
        }
    }
    Ok(SymMatrix::from_fn(n, |i, j| {
        (i.max(j)..n).map(|k| linv[(k, i)] * linv[(k, j)]).sum()
    }))
}

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma_r(x).0)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}
