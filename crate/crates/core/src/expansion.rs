//! Partial-sum diagnostics for series expansions, the adjoint-domain test,
//! lower bounds of expansion partners and transform preservation reports.
//!
//! All partial sums are kept as sparse vectors in the infinite sequence
//! space, so exact inputs produce exact residuals at every step.

use std::fmt::Write as _;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frame::{classify, lower_condition_check, Classification, Convention, Flag};
use crate::linalg::{pnorm_f64, pseudoinverse, svd_summary_f64, Matrix, SequenceSpaceSpec, Vector};
use crate::scalar::Scalar;
use crate::sequences::{validate_ladder, FrameSystem, SparseVec};

/// Float traces default to this tolerance; exact traces default to 0.
pub const DEFAULT_FLOAT_TOL: f64 = 1e-9;

/// Samples in the verdict window: a quarter of the horizon, at least this many.
pub const MIN_TAIL: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Primal,
    Dual,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub n: usize,
    pub residual: Scalar,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Converged { tol: f64, at: usize },
    NoConvergenceObserved { horizon: usize },
    OscillationDetected { liminf: Scalar, limsup: Scalar },
}

impl Verdict {
    pub fn is_converged(&self) -> bool {
        matches!(self, Verdict::Converged { .. })
    }

    /// `limsup − liminf` for oscillations.
    pub fn gap(&self) -> Option<Scalar> {
        match self {
            Verdict::OscillationDetected { liminf, limsup } => Some(limsup - liminf),
            _ => None,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Converged { tol, at } if *tol == 0.0 => write!(f, "converged exactly at N = {at}"),
            Verdict::Converged { tol, at } => write!(f, "converged (tol {tol:e}) at N = {at}"),
            Verdict::NoConvergenceObserved { horizon } => write!(f, "no convergence observed up to N = {horizon}"),
            Verdict::OscillationDetected { liminf, limsup } => {
                write!(f, "oscillation detected (liminf {liminf}, limsup {limsup})")
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionTrace {
    pub side: Side,
    pub target: Vector,
    pub points: Vec<TracePoint>,
    pub tol: f64,
    /// `(prefix, period)` of the joint block layout of the two systems.
    pub blocks: Option<(usize, usize)>,
    pub verdict: Verdict,
}

impl ExpansionTrace {
    pub fn residual_at(&self, n: usize) -> Option<&Scalar> {
        self.points.iter().find(|p| p.n == n).map(|p| &p.residual)
    }

    pub fn horizon(&self) -> usize {
        self.points.last().map_or(0, |p| p.n)
    }

    pub fn is_exact(&self) -> bool {
        self.points.iter().all(|p| p.exact)
    }

    /// Residuals at block boundaries `N = prefix + k·period`, `k ≥ 1`.
    pub fn boundary_residuals(&self) -> Vec<(usize, &Scalar)> {
        let Some((prefix, period)) = self.blocks else {
            return self.points.iter().map(|p| (p.n, &p.residual)).collect();
        };
        self.points
            .iter()
            .filter(|p| p.n > prefix && (p.n - prefix) % period == 0)
            .map(|p| (p.n, &p.residual))
            .collect()
    }

    /// `N,residual,exact_flag` rows; exact residuals are written as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,residual,exact_flag\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.n, p.residual.to_wire(), p.exact);
        }
        out
    }

    pub fn verdict_json(&self) -> serde_json::Value {
        serde_json::json!({
            "side": self.side,
            "target": self.target,
            "horizon": self.horizon(),
            "tol": self.tol,
            "exact": self.is_exact(),
            "verdict": self.verdict,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExpandOptions {
    pub n_max: usize,
    /// `None` picks 0 when the target and both systems are exact and
    /// [`DEFAULT_FLOAT_TOL`] otherwise.
    pub tol: Option<f64>,
    /// Exponent of the primal space; dual residuals use the conjugate one.
    pub p: f64,
}

impl ExpandOptions {
    pub fn new(n_max: usize) -> Self {
        ExpandOptions { n_max, tol: None, p: 2.0 }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }
}

/// Residuals of `f − Σ_{i ≤ N} ⟨f, g_i⟩ f_i`.
pub fn primal_expand(g: &FrameSystem, f: &FrameSystem, target: &Vector, opts: &ExpandOptions) -> Result<ExpansionTrace> {
    let space = SequenceSpaceSpec::new(opts.p)?;
    expand(g, f, target, Side::Primal, &space, opts)
}

/// Residuals of `g − Σ_{i ≤ N} ⟨g, f_i⟩ g_i`.
pub fn dual_expand(g: &FrameSystem, f: &FrameSystem, target: &Vector, opts: &ExpandOptions) -> Result<ExpansionTrace> {
    let space = SequenceSpaceSpec::new(opts.p)?.dual();
    expand(f, g, target, Side::Dual, &space, opts)
}

fn joint_blocks(a: &FrameSystem, b: &FrameSystem) -> Option<(usize, usize)> {
    let (pa, la) = a.block_structure()?;
    let (pb, lb) = b.block_structure()?;
    Some((pa.max(pb), la.lcm(&lb)))
}

fn check_ambient(fs: &FrameSystem, target: &Vector) -> Result<()> {
    match fs.ambient_dim() {
        Some(dim) if dim != target.dim() => Err(FrameError::DimensionMismatch { expected: dim, got: target.dim() }),
        _ => Ok(()),
    }
}

fn expand(
    coef_sys: &FrameSystem,
    expand_sys: &FrameSystem,
    target: &Vector,
    side: Side,
    space: &SequenceSpaceSpec,
    opts: &ExpandOptions,
) -> Result<ExpansionTrace> {
    if opts.n_max == 0 {
        return Err(FrameError::InvalidSpec("expansion horizon must be at least 1".into()));
    }
    check_ambient(coef_sys, target)?;
    check_ambient(expand_sys, target)?;
    let horizon = [coef_sys.len(), expand_sys.len()]
        .into_iter()
        .flatten()
        .fold(opts.n_max, usize::min);

    let t = SparseVec::from_vector(target);
    let mut partial = SparseVec::new();
    let mut points = Vec::with_capacity(horizon);
    for i in 1..=horizon {
        let c = coef_sys.term(i)?.dot(&t);
        partial.axpy(&c, &expand_sys.term(i)?);
        let residual = t.sub(&partial).norm(space)?;
        points.push(TracePoint { n: i, exact: residual.is_exact(), residual });
    }

    let exact_inputs = target.is_exact() && coef_sys.is_exact() && expand_sys.is_exact();
    let tol = opts.tol.unwrap_or(if exact_inputs { 0.0 } else { DEFAULT_FLOAT_TOL });
    let blocks = joint_blocks(coef_sys, expand_sys);
    let verdict = judge(&points, tol, blocks);
    Ok(ExpansionTrace { side, target: target.clone(), points, tol, blocks, verdict })
}

/// Re-applies the verdict rules to a trace.
pub fn verdict(trace: &ExpansionTrace) -> Verdict {
    judge(&trace.points, trace.tol, trace.blocks)
}

fn below(x: &Scalar, tol: f64) -> bool {
    if tol == 0.0 {
        x.is_zero()
    } else {
        x.to_f64() < tol
    }
}

/// Verdict rules on the tail window (last quarter of the horizon, at least
/// [`MIN_TAIL`] samples):
///
/// * converged: last residual below `tol` and the tail never increases;
/// * oscillation: some residue class of `N` modulo the block period stays
///   below `tol` over the tail while the tail spread exceeds `10·tol`
///   (or is nonzero when `tol = 0`); without a known period every period up
///   to half the tail is tried;
/// * otherwise no convergence is observed.
fn judge(points: &[TracePoint], tol: f64, blocks: Option<(usize, usize)>) -> Verdict {
    let Some(last) = points.last() else {
        return Verdict::NoConvergenceObserved { horizon: 0 };
    };
    let tail_len = points.len().div_ceil(4).max(MIN_TAIL).min(points.len());
    let tail = &points[points.len() - tail_len..];

    let non_increasing = tail.windows(2).all(|w| w[1].residual <= w[0].residual);
    if below(&last.residual, tol) && non_increasing {
        let start = points.iter().rposition(|p| !below(&p.residual, tol)).map_or(0, |k| k + 1);
        return Verdict::Converged { tol, at: points[start].n };
    }

    let min = tail.iter().map(|p| &p.residual).fold(&tail[0].residual, |a, b| if b < a { b } else { a });
    let max = tail.iter().map(|p| &p.residual).fold(&tail[0].residual, |a, b| if b > a { b } else { a });
    let spread = (max - min).to_f64();
    let wide = if tol == 0.0 { spread > 0.0 } else { spread > 10.0 * tol };
    if wide {
        let periods: Vec<usize> = match blocks {
            Some((_, period)) if period >= 2 => vec![period],
            Some(_) => vec![],
            None => (2..=tail_len / 2).collect(),
        };
        let anchored = periods.iter().any(|&period| {
            (0..period).any(|r| {
                let mut class = tail.iter().filter(|p| p.n % period == r).peekable();
                class.peek().is_some() && class.all(|p| below(&p.residual, tol))
            })
        });
        if anchored {
            return Verdict::OscillationDetected { liminf: min.clone(), limsup: max.clone() };
        }
    }
    Verdict::NoConvergenceObserved { horizon: last.n }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainEvidence {
    InsideEvidence,
    OutsideEvidence,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainLevel {
    pub n: usize,
    pub m: usize,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainReport {
    pub evidence: DomainEvidence,
    pub levels: Vec<DomainLevel>,
}

/// Norm of `c ↦ ⟨g, Σ_{i ≤ n} c_i f_i⟩` on the truncated coefficient space
/// along a ladder. The norm is that of `(⟨g, f_i⟩)_{i ≤ n}` in the dual
/// coefficient space.
///
/// Strict growth over the last two ladder steps (the only step when the
/// ladder has two levels) is read as evidence that `g` lies outside the
/// domain of the adjoint synthesis operator.
pub fn tf_adjoint_domain_test(
    f: &FrameSystem,
    g: &Vector,
    ladder: &[(usize, usize)],
    spec: &SequenceSpaceSpec,
) -> Result<DomainReport> {
    spec.validate()?;
    if ladder.len() < 2 {
        return Err(FrameError::InvalidSpec("the domain test needs at least two ladder levels".into()));
    }
    validate_ladder(ladder)?;
    let dual = spec.dual();
    let gs = SparseVec::from_vector(g);
    let mut levels = Vec::with_capacity(ladder.len());
    for &(n, m) in ladder {
        if let Some(len) = f.len() {
            if n > len {
                return Err(FrameError::DimensionMismatch { expected: len, got: n });
            }
        }
        let coefs: Vec<f64> = (1..=n)
            .map(|i| {
                let fi = f.term(i)?;
                let clipped = SparseVec::from_pairs(fi.iter().filter(|(k, _)| *k <= m).map(|(k, x)| (k, x.clone())));
                Ok(clipped.dot(&gs).to_f64())
            })
            .collect::<Result<_>>()?;
        levels.push(DomainLevel { n, m, norm: pnorm_f64(&coefs, &dual) });
    }
    let steps = levels.windows(2).rev().take(2);
    let growing = steps.into_iter().all(|w| w[1].norm > w[0].norm * (1.0 + 1e-12) + 1e-300);
    let evidence = if growing { DomainEvidence::OutsideEvidence } else { DomainEvidence::InsideEvidence };
    Ok(DomainReport { evidence, levels })
}

#[derive(Clone, Debug, Serialize)]
pub struct PartnerLowerBound {
    /// Infimum of the per-level lower constants.
    pub lambda: f64,
    pub convention: Convention,
    pub certified: bool,
    pub levels: Vec<((usize, usize), f64)>,
}

/// Lower frame constant of the partner `F` in the dual coefficient space
/// along a ladder, reported as the infimum over the levels.
pub fn lower_condition_of_partner(
    g: &FrameSystem,
    f: &FrameSystem,
    spec: &SequenceSpaceSpec,
    ladder: &[(usize, usize)],
) -> Result<PartnerLowerBound> {
    validate_ladder(ladder)?;
    if ladder.is_empty() {
        return Err(FrameError::InvalidSpec("empty ladder".into()));
    }
    if let (Some(a), Some(b)) = (g.ambient_dim(), f.ambient_dim()) {
        if a != b {
            return Err(FrameError::DimensionMismatch { expected: a, got: b });
        }
    }
    let dual = spec.dual();
    let mut levels = Vec::with_capacity(ladder.len());
    let mut certified = true;
    for &(n, m) in ladder {
        let check = lower_condition_check(f, &dual, n, m)?;
        certified &= check.certified;
        levels.push(((n, m), check.lambda));
    }
    let lambda = levels.iter().map(|(_, l)| *l).fold(f64::INFINITY, f64::min);
    Ok(PartnerLowerBound { lambda, convention: Convention::XdUnsquared, certified, levels })
}

#[derive(Clone, Debug, Serialize)]
pub struct MapProperties {
    pub surjective: Flag,
    pub bijective: Flag,
    pub right_inverse_norm: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PreservationReport {
    pub input_class: Classification,
    pub output_class: Classification,
    pub v_properties: MapProperties,
}

/// Classifies the truncated system and its image `(V g_i)`, together with
/// the surjectivity and bijectivity of `V`.
///
/// A bounded `V` keeps Bessel sequences Bessel, sends frames to frames
/// exactly when it is surjective and Riesz bases to Riesz bases exactly when
/// it is bijective. A definite contradiction of these rules is reported as
/// [`FrameError::InvariantViolation`].
pub fn transform_report(
    v: &Matrix,
    fs: &FrameSystem,
    spec: &SequenceSpaceSpec,
    n: usize,
    m: usize,
) -> Result<PreservationReport> {
    if v.cols() != m {
        return Err(FrameError::DimensionMismatch { expected: m, got: v.cols() });
    }
    let t = fs.materialize(n, m)?.transpose();
    let image = v.matmul(&t)?;
    let input_class = classify(&t, spec)?;
    let output_class = classify(&image, spec)?;

    let summary = svd_summary_f64(&v.to_dmatrix());
    let surjective = Flag::from_ratio(summary.sigma_min_domain(v.rows()), summary.sigma_max);
    let bijective = if v.rows() == v.cols() {
        surjective.and(Flag::from_ratio(summary.sigma_min_domain(v.cols()), summary.sigma_max))
    } else {
        Flag::No
    };
    let right_inverse_norm = (surjective == Flag::Yes).then(|| 1.0 / summary.sigma_min_domain(v.rows()));
    let report = PreservationReport {
        input_class,
        output_class,
        v_properties: MapProperties { surjective, bijective, right_inverse_norm },
    };
    check_preservation(&report)?;
    Ok(report)
}

fn contradicts(input: Flag, map: Flag, output: Flag) -> bool {
    input == Flag::Yes && ((map == Flag::Yes && output == Flag::No) || (map == Flag::No && output == Flag::Yes))
}

fn check_preservation(r: &PreservationReport) -> Result<()> {
    let (i, o, v) = (&r.input_class, &r.output_class, &r.v_properties);
    if o.bessel != Flag::Yes {
        return Err(FrameError::InvariantViolation("image of a Bessel sequence is not Bessel".into()));
    }
    if contradicts(i.xd_frame, v.surjective, o.xd_frame) {
        return Err(FrameError::InvariantViolation(format!(
            "frame image is {} while the map is surjective: {}",
            o.xd_frame, v.surjective
        )));
    }
    if contradicts(i.riesz_basis, v.bijective, o.riesz_basis) {
        return Err(FrameError::InvariantViolation(format!(
            "Riesz basis image is {} while the map is bijective: {}",
            o.riesz_basis, v.bijective
        )));
    }
    Ok(())
}

/// Least-squares solution of `V g_i = h_i` for `i ≤ n` on `m` coordinates.
/// Fails with [`FrameError::TransformInfeasible`] when no exact solution
/// exists.
pub fn find_transform(source: &FrameSystem, target: &FrameSystem, n: usize, m: usize) -> Result<Matrix> {
    let g = source.materialize(n, m)?.transpose();
    let h = target.materialize(n, m)?.transpose();
    let v = h.matmul(&pseudoinverse(&g))?;
    let residual = v.matmul(&g)?.max_abs_diff(&h);
    if residual > 1e-10 {
        return Err(FrameError::TransformInfeasible { residual });
    }
    Ok(v)
}
