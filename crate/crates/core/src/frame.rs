//! Analysis and synthesis operators, frame and Riesz bounds, lower frame
//! condition certificates, and the classifier for operator-generated
//! sequences.
//!
//! Conventions: for a system `G` truncated to `n` terms and `m` coordinates,
//! the analysis matrix `U` is `n × m` with row `i` equal to `g_i`, so
//! `(Uf)_i = ⟨f, g_i⟩`. The synthesis matrix is `Uᵀ`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::linalg::{
    pseudoinverse, rank_from_singular_values, sorted_svd, svd_summary_f64, Matrix, SequenceSpaceSpec, Vector,
};
use crate::opnorm::{unweight, EstimatorRegistry, Mode, StretchEstimator};
use crate::scalar::Scalar;
use crate::sequences::{FrameSystem, SparseVec};

/// Below this `σ_min/σ_max` a map is numerically rank deficient.
pub const GREY_ZONE_LOW: f64 = 1e-12;
/// Above this `σ_min/σ_max` a map is numerically full rank.
pub const GREY_ZONE_HIGH: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `A‖h‖² ≤ Σ|⟨h, g_i⟩|² ≤ B‖h‖²`
    HilbertSquared,
    /// `A‖f‖ ≤ ‖(g_i(f))‖_{X_d} ≤ B‖f‖`
    XdUnsquared,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::HilbertSquared => "hilbert-squared",
            Convention::XdUnsquared => "xd-unsquared",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub convention: Convention,
    pub certified: bool,
    pub method: String,
    pub truncation_level: Option<(usize, usize)>,
    /// Whether the truncated vectors span the truncated space. When they do
    /// not, Hilbert-side lower bounds refer to their span.
    pub spans: bool,
    /// `[lower, upper]` bracket on `A`.
    pub a_bracket: (f64, f64),
    /// `[lower, upper]` bracket on `B`.
    pub b_bracket: (f64, f64),
}

impl BoundsReport {
    fn exact(a: f64, b: f64, convention: Convention, method: &str, level: (usize, usize), spans: bool) -> Self {
        BoundsReport {
            a,
            b,
            convention,
            certified: true,
            method: method.to_string(),
            truncation_level: Some(level),
            spans,
            a_bracket: (a, a),
            b_bracket: (b, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    Yes,
    No,
    Undetermined,
}

impl Flag {
    /// Decide full rank from `σ_min / σ_max`, with an explicit grey zone.
    pub fn from_ratio(sigma_min: f64, sigma_max: f64) -> Flag {
        if sigma_max <= 0.0 {
            return Flag::No;
        }
        let r = sigma_min / sigma_max;
        if r > GREY_ZONE_HIGH {
            Flag::Yes
        } else if r < GREY_ZONE_LOW {
            Flag::No
        } else {
            Flag::Undetermined
        }
    }

    pub fn and(self, other: Flag) -> Flag {
        match (self, other) {
            (Flag::No, _) | (_, Flag::No) => Flag::No,
            (Flag::Yes, Flag::Yes) => Flag::Yes,
            _ => Flag::Undetermined,
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Yes => "yes",
            Flag::No => "no",
            Flag::Undetermined => "undetermined",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub bessel: Flag,
    pub lower_condition: Flag,
    pub xd_frame: Flag,
    pub banach_frame: Flag,
    pub riesz_basis: Flag,
    pub certificates: BTreeMap<String, f64>,
    pub lambda: Option<f64>,
}

impl Classification {
    /// Implications every classification must satisfy.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: &str| Err(FrameError::InvariantViolation(msg.to_string()));
        if self.xd_frame == Flag::Yes && (self.bessel != Flag::Yes || self.lower_condition != Flag::Yes) {
            return fail("X_d-frame without Bessel bound or lower condition");
        }
        if self.banach_frame == Flag::Yes && self.xd_frame != Flag::Yes {
            return fail("Banach frame that is not an X_d-frame");
        }
        if self.riesz_basis == Flag::Yes && self.bessel != Flag::Yes {
            return fail("Riesz basis without synthesis upper bound");
        }
        Ok(())
    }
}

/// `(⟨f, g_i⟩)_{i ≤ n}`; exact when `f` and the system are.
pub fn analysis(fs: &FrameSystem, f: &Vector, n_terms: usize) -> Result<Vector> {
    if let Some(dim) = fs.ambient_dim() {
        if f.dim() != dim {
            return Err(FrameError::DimensionMismatch { expected: dim, got: f.dim() });
        }
    }
    if let Some(len) = fs.len() {
        if n_terms > len {
            return Err(FrameError::DimensionMismatch { expected: len, got: n_terms });
        }
    }
    let fv = SparseVec::from_vector(f);
    Vector::new((1..=n_terms).map(|i| fs.term(i).map(|g| g.dot(&fv))).collect::<Result<_>>()?)
}

/// `Σ c_i g_i` restricted to coordinates `1..=m_dims`.
pub fn synthesis(fs: &FrameSystem, c: &Vector, m_dims: usize) -> Result<Vector> {
    if let Some(dim) = fs.ambient_dim() {
        if m_dims != dim {
            return Err(FrameError::DimensionMismatch { expected: dim, got: m_dims });
        }
    }
    if let Some(len) = fs.len() {
        if c.dim() > len {
            return Err(FrameError::DimensionMismatch { expected: len, got: c.dim() });
        }
    }
    let mut acc = SparseVec::new();
    for (i, ci) in c.coords().iter().enumerate() {
        acc.axpy(ci, &fs.term(i + 1)?);
    }
    acc.to_dense(m_dims)
}

/// `S = Σ_{i ≤ n} g_i g_iᵀ = UᵀU` on `m` coordinates.
pub fn frame_operator(fs: &FrameSystem, n: usize, m: usize) -> Result<Matrix> {
    let u = fs.materialize(n, m)?;
    u.transpose().matmul(&u)
}

/// Smallest eigenvalue of `S` above the rank cutoff, and the largest one.
fn gram_extremes(u: &Matrix) -> Result<(f64, f64, usize)> {
    let rank = svd_summary_f64(&u.to_dmatrix()).rank;
    let s = u.transpose().matmul(u)?.to_dmatrix();
    let mut eig: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let max = eig.first().copied().unwrap_or(0.0).max(0.0);
    let min = if rank == 0 { 0.0 } else { eig[rank - 1].max(0.0) };
    Ok((min, max, rank))
}

/// Squared Hilbert frame bounds of the truncation from the eigenvalues of `S`.
///
/// When the truncated vectors do not span all `m` coordinates, `A` is the
/// lower bound on their span (smallest nonzero eigenvalue).
pub fn hilbert_frame_bounds(fs: &FrameSystem, n: usize, m: usize) -> Result<BoundsReport> {
    let u = fs.materialize(n, m)?;
    let (a, b, rank) = gram_extremes(&u)?;
    Ok(BoundsReport::exact(a, b, Convention::HilbertSquared, "symmetric eigendecomposition of S", (n, m), rank == m))
}

/// Smallest nonzero singular value (with right singular vector) and the
/// largest singular value.
fn row_space_extremes(m: &DMatrix<f64>) -> (f64, Vec<f64>, f64, usize) {
    let (_, sigma, vt) = sorted_svd(m);
    let rank = rank_from_singular_values(&sigma);
    let smax = sigma.first().copied().unwrap_or(0.0);
    if rank == 0 {
        let mut w = vec![0.0; m.ncols()];
        w[0] = 1.0;
        return (0.0, w, smax, 0);
    }
    (sigma[rank - 1], vt.row(rank - 1).iter().copied().collect(), smax, rank)
}

/// Unsquared `X_d`-frame bounds `A‖f‖_p ≤ ‖Uf‖_{X_d} ≤ B‖f‖_p` with the
/// estimator selected by `mode`.
pub fn xd_frame_bounds(fs: &FrameSystem, spec: &SequenceSpaceSpec, n: usize, m: usize, mode: Mode) -> Result<BoundsReport> {
    let registry = EstimatorRegistry::default();
    xd_frame_bounds_with(fs, spec, n, m, &*registry.get(mode.estimator_name())?)
}

pub fn xd_frame_bounds_with(
    fs: &FrameSystem,
    spec: &SequenceSpaceSpec,
    n: usize,
    m: usize,
    estimator: &dyn StretchEstimator,
) -> Result<BoundsReport> {
    spec.validate()?;
    let u = fs.materialize(n, m)?.to_dmatrix();
    let domain = SequenceSpaceSpec { p: spec.p, weights: None };
    let weighted = unweight(&u, &domain, spec);
    if spec.p == 2.0 {
        let (a, _, b, rank) = row_space_extremes(&weighted);
        return Ok(BoundsReport::exact(a, b, Convention::XdUnsquared, "singular values of U", (n, m), rank == m));
    }
    stretch_report(&weighted, spec.p, spec.p, estimator, (n, m))
}

fn stretch_report(
    m: &DMatrix<f64>,
    p: f64,
    q: f64,
    estimator: &dyn StretchEstimator,
    level: (usize, usize),
) -> Result<BoundsReport> {
    let hi = estimator.max_stretch(m, p, q)?;
    let lo = estimator.min_stretch(m, p, q)?;
    let certified = estimator.certified();
    let (a, b) = if certified { (lo.lower, hi.upper) } else { (lo.upper, hi.lower) };
    let rank = svd_summary_f64(m).rank;
    Ok(BoundsReport {
        a: a.min(b),
        b,
        convention: Convention::XdUnsquared,
        certified,
        method: format!("{} stretch estimator", estimator.name()),
        truncation_level: Some(level),
        spans: rank == m.ncols(),
        a_bracket: (lo.lower, lo.upper),
        b_bracket: (hi.lower, hi.upper),
    })
}

/// `A‖c‖_{X_d} ≤ ‖Σ c_i g_i‖ ≤ B‖c‖_{X_d}` over all coefficient vectors of
/// length `n`; for `p = 2` the extreme singular values of the synthesis
/// matrix (with `A = 0` when it has a kernel).
pub fn riesz_bounds(fs: &FrameSystem, spec: &SequenceSpaceSpec, n: usize, m: usize, mode: Mode) -> Result<BoundsReport> {
    let registry = EstimatorRegistry::default();
    riesz_bounds_with(fs, spec, n, m, &*registry.get(mode.estimator_name())?)
}

pub fn riesz_bounds_with(
    fs: &FrameSystem,
    spec: &SequenceSpaceSpec,
    n: usize,
    m: usize,
    estimator: &dyn StretchEstimator,
) -> Result<BoundsReport> {
    spec.validate()?;
    let t = fs.materialize(n, m)?.transpose().to_dmatrix();
    let target = SequenceSpaceSpec { p: spec.p, weights: None };
    let weighted = unweight(&t, spec, &target);
    if spec.p == 2.0 {
        let summary = svd_summary_f64(&weighted);
        let a = summary.sigma_min_domain(n);
        return Ok(BoundsReport::exact(
            a,
            summary.sigma_max,
            Convention::XdUnsquared,
            "singular values of the synthesis matrix",
            (n, m),
            summary.rank == m,
        ));
    }
    stretch_report(&weighted, spec.p, spec.p, estimator, (n, m))
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerCondition {
    pub lambda: f64,
    pub witness: Vector,
    pub certified: bool,
}

/// Smallest ratio `‖Uf‖_{X_d} / ‖f‖` over the part of the truncated domain
/// the first `n` terms can see (the row space of `U`), with a minimizer.
///
/// For `p = 2` this is the smallest nonzero singular value of `U`; otherwise
/// the stretch estimator minimum over the whole truncated domain.
pub fn lower_condition_check(fs: &FrameSystem, spec: &SequenceSpaceSpec, n: usize, m: usize) -> Result<LowerCondition> {
    spec.validate()?;
    let u = fs.materialize(n, m)?.to_dmatrix();
    let domain = SequenceSpaceSpec { p: spec.p, weights: None };
    let weighted = unweight(&u, &domain, spec);
    if spec.p == 2.0 {
        let (lambda, witness, _, _) = row_space_extremes(&weighted);
        return Ok(LowerCondition { lambda, witness: Vector::from_f64(&witness)?, certified: true });
    }
    let registry = EstimatorRegistry::default();
    let estimator = registry.auto(m)?;
    let s = estimator.min_stretch(&weighted, spec.p, spec.p)?;
    Ok(LowerCondition { lambda: s.upper, witness: Vector::from_f64(&s.witness)?, certified: false })
}

/// Classifies the sequence `(T δ_i)` generated by a finite operator
/// `T` (`rows` = ambient dimension, `cols` = number of terms).
///
/// In finite dimensions every such sequence is Bessel. Frame-type flags
/// follow surjectivity of `T` (equivalently injectivity of `Tᵀ`), the Riesz
/// flag follows bijectivity. `λ` is the lower frame constant in the norms of
/// `spec`.
pub fn classify(t: &Matrix, spec: &SequenceSpaceSpec) -> Result<Classification> {
    spec.validate()?;
    let td = t.to_dmatrix();
    let (rows, cols) = (t.rows(), t.cols());
    let summary = svd_summary_f64(&td);
    let smax = summary.sigma_max;
    let sigma_min_adjoint = summary.sigma_min_domain(rows);
    let sigma_min_t = summary.sigma_min_domain(cols);

    let surjective = Flag::from_ratio(sigma_min_adjoint, smax);
    let injective = Flag::from_ratio(sigma_min_t, smax);
    let riesz = if rows == cols { surjective.and(injective) } else { Flag::No };

    let mut certificates = BTreeMap::new();
    certificates.insert("operator_norm".to_string(), smax);
    certificates.insert("sigma_min_adjoint".to_string(), sigma_min_adjoint);
    if surjective == Flag::Yes {
        certificates.insert("right_inverse_norm".to_string(), 1.0 / sigma_min_adjoint);
    }
    if riesz == Flag::Yes {
        certificates.insert("condition_number".to_string(), smax / sigma_min_t);
    }

    let lambda = if spec.p == 2.0 {
        let domain = SequenceSpaceSpec::l2();
        let adj = unweight(&td.transpose(), &domain, spec);
        svd_summary_f64(&adj).sigma_min_domain(rows)
    } else {
        let domain = SequenceSpaceSpec { p: spec.p, weights: None };
        let adj = unweight(&td.transpose(), &domain, spec);
        let registry = EstimatorRegistry::default();
        registry.auto(rows)?.min_stretch(&adj, spec.p, spec.p)?.lower
    };
    certificates.insert("lambda".to_string(), lambda);

    let class = Classification {
        bessel: Flag::Yes,
        lower_condition: surjective,
        xd_frame: surjective,
        banach_frame: surjective,
        riesz_basis: riesz,
        certificates,
        lambda: (surjective == Flag::Yes).then_some(lambda),
    };
    class.check_invariants()?;
    Ok(class)
}

/// Reconstruction operator `Q = U†` with `Q U = I` on the truncated space.
pub fn banach_frame_operator(fs: &FrameSystem, n: usize, m: usize) -> Result<Matrix> {
    let u = fs.materialize(n, m)?;
    require_injective(&u)?;
    Ok(pseudoinverse(&u))
}

/// Errors unless the columns of `u` are numerically independent.
pub(crate) fn require_injective(u: &Matrix) -> Result<()> {
    let summary = svd_summary_f64(&u.to_dmatrix());
    let sigma_min = summary.sigma_min_domain(u.cols());
    if summary.rank < u.cols() {
        return Err(FrameError::LowerBoundViolation { sigma_min });
    }
    Ok(())
}

/// Exact pairing helper: `⟨f, g⟩` for a sparse and a dense vector.
pub fn pair(g: &SparseVec, f: &Vector) -> Scalar {
    g.dot(&SparseVec::from_vector(f))
}
