//! Dense vectors and matrices over [`Scalar`], weighted `ℓ^p` norms, and the
//! SVD-backed decompositions the rest of the crate leans on.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::scalar::Scalar;

/// Relative rank tolerance: `σ_i` counts as nonzero when `σ_i > RANK_TOL · σ_max`.
pub const RANK_TOL: f64 = 1e-10;

/// Largest integer exponent for which exact norms are attempted.
const MAX_EXACT_EXPONENT: f64 = 64.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<Scalar>);

impl Vector {
    pub fn new(coords: Vec<Scalar>) -> Result<Self> {
        if coords.is_empty() {
            return Err(FrameError::DimensionMismatch { expected: 1, got: 0 });
        }
        Ok(Vector(coords))
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().copied().map(Scalar::Float).collect())
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().copied().map(Scalar::int).collect())
    }

    /// Canonical basis vector `e_k` (1-based) in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k == 0 || k > dim {
            return Err(FrameError::DimensionMismatch { expected: dim, got: k });
        }
        let mut coords = vec![Scalar::zero(); dim];
        coords[k - 1] = Scalar::one();
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Scalar> {
        self.0
    }

    pub fn is_exact(&self) -> bool {
        self.0.iter().all(Scalar::is_exact)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::to_f64).collect()
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_vec(self.to_f64())
    }

    pub fn scale(&self, alpha: &Scalar) -> Vector {
        Vector(self.0.iter().map(|x| x * alpha).collect())
    }

    pub fn dot(&self, other: &Vector) -> Result<Scalar> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(FrameError::DimensionMismatch { expected, got })
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(FrameError::EmptyMatrix);
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(FrameError::EmptyMatrix);
        }
        Self::new(n, m, rows.into_iter().flatten().collect())
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().copied().map(Scalar::int).collect())
                .collect(),
        )
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().copied().map(Scalar::Float).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Scalar) -> Result<Self> {
        let data = (0..rows * cols).map(|k| f(k / cols.max(1), k % cols.max(1))).collect();
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_fn(rows, cols, |_, _| Scalar::zero())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { Scalar::one() } else { Scalar::zero() })
    }

    pub fn diag(entries: &[Scalar]) -> Result<Self> {
        Self::from_fn(entries.len(), entries.len(), |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                Scalar::zero()
            }
        })
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Scalar::Float(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> Vector {
        Vector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn is_exact(&self) -> bool {
        self.data.iter().all(Scalar::is_exact)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64())
    }

    pub fn to_float(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::to_float).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data: (0..self.rows * self.cols)
                .map(|k| self.get(k % self.rows, k / self.rows).clone())
                .collect(),
        }
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        check_dim(self.cols, rhs.rows)?;
        if !(self.is_exact() && rhs.is_exact()) {
            return Matrix::from_dmatrix(&(self.to_dmatrix() * rhs.to_dmatrix()));
        }
        Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols)
                .filter(|&k| !self.get(i, k).is_zero() && !rhs.get(k, j).is_zero())
                .map(|k| self.get(i, k) * rhs.get(k, j))
                .sum()
        })
    }

    pub fn matvec(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.cols, v.dim())?;
        Vector::new(
            (0..self.rows)
                .map(|i| {
                    (0..self.cols)
                        .filter(|&k| !self.get(i, k).is_zero())
                        .map(|k| self.get(i, k) * &v.0[k])
                        .sum()
                })
                .collect(),
        )
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Matrix> {
        check_dim(self.rows, rhs.rows)?;
        check_dim(self.cols, rhs.cols)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, alpha: &Scalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * alpha).collect(),
        }
    }

    /// Largest entrywise absolute difference, in floating point.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Inverse over the rationals by Gauss–Jordan elimination. `None` if the
    /// matrix is not square, not exact, or singular.
    pub fn inverse_exact(&self) -> Option<Matrix> {
        if self.rows != self.cols || !self.is_exact() {
            return None;
        }
        let n = self.rows;
        let mut a: Vec<Vec<_>> = (0..n)
            .map(|i| {
                let mut row: Vec<_> = (0..n)
                    .map(|j| self.get(i, j).as_rational().cloned().unwrap_or_default())
                    .collect();
                row.extend((0..n).map(|j| {
                    if i == j {
                        num_rational::BigRational::from_integer(1.into())
                    } else {
                        num_rational::BigRational::zero()
                    }
                }));
                row
            })
            .collect();
        for c in 0..n {
            let pivot = (c..n).find(|&r| !a[r][c].is_zero())?;
            a.swap(c, pivot);
            let inv = a[c][c].recip();
            for x in a[c].iter_mut() {
                *x = &*x * &inv;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let factor = a[r][c].clone();
                    let pivot_row = a[c].clone();
                    for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                        *x = &*x - &factor * p;
                    }
                }
            }
        }
        Matrix::from_fn(n, n, |i, j| Scalar::Exact(a[i][n + j].clone())).ok()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(ToString::to_string).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        for i in 0..self.rows {
            let line: Vec<String> = (0..self.cols)
                .map(|j| format!("{:>width$}", cells[i * self.cols + j]))
                .collect();
            writeln!(f, "[{}]", line.join("  "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[Scalar]> = (0..self.rows)
            .map(|i| &self.data[i * self.cols..(i + 1) * self.cols])
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Scalar>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// The coefficient space `X_d`: a weighted `ℓ^p` with `1 < p < ∞`.
///
/// Coordinates beyond the end of `weights` carry weight one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpaceSpec {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl SequenceSpaceSpec {
    pub fn new(p: f64) -> Result<Self> {
        Self::weighted(p, None)
    }

    pub fn weighted(p: f64, weights: Option<Vec<f64>>) -> Result<Self> {
        let spec = SequenceSpaceSpec { p, weights };
        spec.validate()?;
        Ok(spec)
    }

    pub fn l2() -> Self {
        SequenceSpaceSpec { p: 2.0, weights: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(FrameError::InvalidSpec(format!("exponent must lie in (1, ∞), got {}", self.p)));
        }
        if let Some(w) = &self.weights {
            if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(FrameError::InvalidSpec(format!("weights must be positive, got {bad}")));
            }
        }
        Ok(())
    }

    /// Hölder conjugate `q = p / (p - 1)`.
    pub fn dual_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// The dual space `X_d*` under the standard pairing: exponent `q` with
    /// weights `w^{1-q}`.
    pub fn dual(&self) -> SequenceSpaceSpec {
        let q = self.dual_exponent();
        SequenceSpaceSpec {
            p: q,
            weights: self
                .weights
                .as_ref()
                .map(|w| w.iter().map(|x| x.powf(1.0 - q)).collect()),
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights
            .as_ref()
            .and_then(|w| w.get(i).copied())
            .unwrap_or(1.0)
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.as_ref().is_none_or(|w| w.iter().all(|x| *x == 1.0))
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == 2.0 && self.is_unweighted()
    }

    fn integer_exponent(&self) -> Option<u32> {
        (self.p.fract() == 0.0 && self.p <= MAX_EXACT_EXPONENT).then_some(self.p as u32)
    }
}

/// `Σ w_i |v_i|^p` computed exactly when possible: exact coordinates, unit
/// weights and an integer exponent.
pub fn pnorm_pow(v: &Vector, spec: &SequenceSpaceSpec) -> Result<Scalar> {
    spec.validate()?;
    if let (true, true, Some(k)) = (v.is_exact(), spec.is_unweighted(), spec.integer_exponent()) {
        return Ok(v.coords().iter().map(|x| x.abs().powi(k)).sum());
    }
    let p = spec.p;
    Ok(Scalar::Float(
        v.coords()
            .iter()
            .enumerate()
            .map(|(i, x)| spec.weight(i) * x.to_f64().abs().powf(p))
            .sum(),
    ))
}

/// Weighted `ℓ^p` norm `(Σ w_i |v_i|^p)^{1/p}`.
///
/// Exact when the `p`-th power sum is exact and is a perfect `p`-th power of
/// a rational, or when at most one coordinate is nonzero; otherwise a float.
pub fn pnorm(v: &Vector, spec: &SequenceSpaceSpec) -> Result<Scalar> {
    spec.validate()?;
    if v.is_exact() && spec.is_unweighted() {
        let mut nonzero = v.coords().iter().filter(|x| !x.is_zero());
        match (nonzero.next(), nonzero.next()) {
            (None, _) => return Ok(Scalar::zero()),
            (Some(x), None) => return Ok(x.abs()),
            _ => {}
        }
    }
    let pow = pnorm_pow(v, spec)?;
    if let (true, Some(k)) = (pow.is_exact(), spec.integer_exponent()) {
        if let Some(root) = pow.exact_root(k) {
            return Ok(root);
        }
    }
    Ok(Scalar::Float(pnorm_f64(&v.to_f64(), spec)))
}

/// Scaled float evaluation; immune to overflow for large `p`.
pub fn pnorm_f64(v: &[f64], spec: &SequenceSpaceSpec) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let p = spec.p;
    let sum: f64 = v
        .iter()
        .enumerate()
        .map(|(i, x)| spec.weight(i) * (x.abs() / scale).powf(p))
        .sum();
    scale * sum.powf(1.0 / p)
}

/// Singular-value summary of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SvdSummary {
    /// All `min(rows, cols)` singular values, descending.
    pub singular_values: Vec<f64>,
    /// Smallest singular value above the rank tolerance (0 for the zero matrix).
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank: usize,
}

impl SvdSummary {
    /// Smallest singular value over the whole domain, i.e. `min ‖Mx‖/‖x‖`;
    /// zero when the matrix has more columns than rows.
    pub fn sigma_min_domain(&self, cols: usize) -> f64 {
        if self.singular_values.len() < cols {
            0.0
        } else {
            self.singular_values.last().copied().unwrap_or(0.0)
        }
    }
}

/// Thin SVD with singular values sorted in descending order:
/// `(U: r×k, σ: k, Vᵀ: k×c)` with `k = min(r, c)`.
pub fn sorted_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma = order.iter().map(|&k| svd.singular_values[k]).collect();
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let vt_sorted = DMatrix::from_fn(order.len(), vt.ncols(), |i, j| vt[(order[i], j)]);
    (u_sorted, sigma, vt_sorted)
}

pub fn rank_from_singular_values(sigma: &[f64]) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > RANK_TOL * max).count()
}

pub fn svd_summary_f64(m: &DMatrix<f64>) -> SvdSummary {
    let (_, sigma, _) = sorted_svd(m);
    let rank = rank_from_singular_values(&sigma);
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let sigma_min = if rank == 0 { 0.0 } else { sigma[rank - 1] };
    SvdSummary { singular_values: sigma, sigma_min, sigma_max, rank }
}

pub fn svd_summary(m: &Matrix) -> SvdSummary {
    svd_summary_f64(&m.to_dmatrix())
}

/// `(σ_min over nonzero singular values, σ_max, numerical rank)`.
pub fn svd_triplet(m: &Matrix) -> (f64, f64, usize) {
    let s = svd_summary(m);
    (s.sigma_min, s.sigma_max, s.rank)
}

/// Moore–Penrose pseudoinverse.
///
/// Exact inputs of full column rank use `(MᵀM)⁻¹Mᵀ`, full row rank uses
/// `Mᵀ(MMᵀ)⁻¹`, both over the rationals. Everything else goes through a
/// truncated SVD with the [`RANK_TOL`] cutoff.
pub fn pseudoinverse(m: &Matrix) -> Matrix {
    if m.is_exact() {
        let mt = m.transpose();
        if m.rows() >= m.cols() {
            if let Some(inv) = mt.matmul(m).ok().and_then(|g| g.inverse_exact()) {
                return inv.matmul(&mt).expect("conformable");
            }
        } else if let Some(inv) = m.matmul(&mt).ok().and_then(|g| g.inverse_exact()) {
            return mt.matmul(&inv).expect("conformable");
        }
    }
    Matrix::from_dmatrix(&pseudoinverse_f64(&m.to_dmatrix())).expect("nonempty")
}

pub fn pseudoinverse_f64(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (u, sigma, vt) = sorted_svd(m);
    let rank = rank_from_singular_values(&sigma);
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for k in 0..rank {
        let v = vt.row(k).transpose();
        let uk = u.column(k);
        out += (v * uk.transpose()) / sigma[k];
    }
    out
}

/// Orthonormal basis (as columns) of the null space of `Mᵀ`, i.e. of `R(M)^⊥`.
pub fn left_null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = m.nrows();
    // Pad with zero columns so the SVD returns a full left basis.
    let padded = if m.ncols() < rows {
        let mut p = DMatrix::zeros(rows, rows);
        p.view_mut((0, 0), (rows, m.ncols())).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (u, sigma, _) = sorted_svd(&padded);
    let rank = rank_from_singular_values(&sigma);
    u.columns(rank, rows - rank).into_owned()
}
