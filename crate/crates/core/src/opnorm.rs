//! Operator-norm estimation between weighted `ℓ^p` spaces.
//!
//! A [`StretchEstimator`] brackets the largest and smallest stretch
//! `‖Mx‖_q / ‖x‖_p` of a matrix. Three strategies ship in the default
//! [`EstimatorRegistry`]:
//!
//! * `spectral`: singular values; only valid for `p = q = 2`.
//! * `oracle`: brute-force grid over the unit sphere with local polish and a
//!   certified covering-radius bracket; at most [`ORACLE_MAX_DIM`] columns.
//! * `heuristic`: nonlinear power iteration / pattern search from random
//!   starts, bracketed by analytic Hölder and norm-equivalence bounds.
//!
//! Weights are folded into the matrix before a strategy sees it, so strategies
//! only deal with plain `ℓ^p → ℓ^q`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::linalg::{pnorm_f64, sorted_svd, Matrix, SequenceSpaceSpec};

pub const ORACLE_MAX_DIM: usize = 4;

/// A two-sided bracket on a stretch value together with the best witness
/// direction found (normalized to unit `p`-norm).
#[derive(Clone, Debug, Serialize)]
pub struct Stretch {
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<f64>,
}

impl Stretch {
    fn exact(value: f64, witness: Vec<f64>) -> Self {
        Stretch { lower: value, upper: value, witness }
    }
}

pub trait StretchEstimator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether both ends of the returned brackets are rigorous.
    fn certified(&self) -> bool;

    /// Bracket on `sup ‖Mx‖_q / ‖x‖_p`.
    fn max_stretch(&self, m: &DMatrix<f64>, p: f64, q: f64) -> Result<Stretch>;

    /// Bracket on `inf ‖Mx‖_q / ‖x‖_p` over the whole domain.
    fn min_stretch(&self, m: &DMatrix<f64>, p: f64, q: f64) -> Result<Stretch>;
}

/// Estimators keyed by name.
#[derive(Clone)]
pub struct EstimatorRegistry {
    entries: BTreeMap<&'static str, Arc<dyn StretchEstimator>>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        EstimatorRegistry { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, estimator: Arc<dyn StretchEstimator>) {
        self.entries.insert(estimator.name(), estimator);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn StretchEstimator>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| FrameError::UnknownEstimator(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// `oracle` when it is allowed for `cols` columns, `heuristic` otherwise.
    pub fn auto(&self, cols: usize) -> Result<Arc<dyn StretchEstimator>> {
        self.get(if cols <= ORACLE_MAX_DIM { "oracle" } else { "heuristic" })
    }
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(Spectral));
        registry.register(Arc::new(GridOracle::default()));
        registry.register(Arc::new(Heuristic::default()));
        registry
    }
}

/// Estimation mode for [`pq_opnorm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Oracle,
    Heuristic,
}

impl Mode {
    pub fn estimator_name(self) -> &'static str {
        match self {
            Mode::Oracle => "oracle",
            Mode::Heuristic => "heuristic",
        }
    }
}

/// `diag(v^{1/q}) · M · diag(w^{-1/p})`: turns a map between weighted spaces
/// into one between unweighted spaces with the same norm.
pub fn unweight(m: &DMatrix<f64>, from: &SequenceSpaceSpec, to: &SequenceSpaceSpec) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        m[(i, j)] * to.weight(i).powf(1.0 / to.p) / from.weight(j).powf(1.0 / from.p)
    })
}

/// Bracket `(lower, upper)` on the operator norm of `M: from → to`.
pub fn pq_opnorm(
    m: &Matrix,
    from: &SequenceSpaceSpec,
    to: &SequenceSpaceSpec,
    mode: Mode,
) -> Result<(f64, f64)> {
    from.validate()?;
    to.validate()?;
    let registry = EstimatorRegistry::default();
    let estimator = registry.get(mode.estimator_name())?;
    let s = estimator.max_stretch(&unweight(&m.to_dmatrix(), from, to), from.p, to.p)?;
    Ok((s.lower, s.upper))
}

fn ratio(m: &DMatrix<f64>, x: &DVector<f64>, p: f64, q: f64) -> f64 {
    let denom = lp(x.as_slice(), p);
    if denom == 0.0 {
        return 0.0;
    }
    lp((m * x).as_slice(), q) / denom
}

fn lp(x: &[f64], p: f64) -> f64 {
    pnorm_f64(x, &SequenceSpaceSpec { p, weights: None })
}

fn normalize(mut x: DVector<f64>, p: f64) -> DVector<f64> {
    let n = lp(x.as_slice(), p);
    if n > 0.0 {
        x /= n;
    }
    x
}

/// Rigorous bounds from singular values and finite-dimensional norm
/// equivalence: `(lower on min stretch, upper on max stretch)`.
fn equivalence_bounds(m: &DMatrix<f64>, p: f64, q: f64) -> (f64, f64) {
    let (rows, cols) = (m.nrows() as f64, m.ncols() as f64);
    let (_, sigma, _) = sorted_svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let smin = if sigma.len() < m.ncols() { 0.0 } else { sigma.last().copied().unwrap_or(0.0) };
    // ‖z‖_q ≥ rows^{min(0, 1/q-1/2)} ‖z‖_2 and ‖x‖_2 ≥ cols^{min(0, 1/2-1/p)} ‖x‖_p.
    let lo = smin * rows.powf((1.0 / q - 0.5).min(0.0)) * cols.powf((0.5 - 1.0 / p).min(0.0));
    let hi = smax * rows.powf((1.0 / q - 0.5).max(0.0)) * cols.powf((0.5 - 1.0 / p).max(0.0));
    (lo, hi)
}

/// Hölder row bound `(Σ_i ‖row_i‖_{p'}^q)^{1/q}` on the max stretch.
fn holder_bound(m: &DMatrix<f64>, p: f64, q: f64) -> f64 {
    let p_conj = p / (p - 1.0);
    let row_norms: Vec<f64> = (0..m.nrows())
        .map(|i| lp(m.row(i).transpose().as_slice(), p_conj))
        .collect();
    lp(&row_norms, q)
}

fn analytic_upper(m: &DMatrix<f64>, p: f64, q: f64) -> f64 {
    holder_bound(m, p, q).min(equivalence_bounds(m, p, q).1)
}

/// Nonlinear power iteration for `max ‖Mx‖_q / ‖x‖_p`. Returns the best
/// direction seen.
fn power_ascent(m: &DMatrix<f64>, start: DVector<f64>, p: f64, q: f64, iters: usize) -> (f64, DVector<f64>) {
    let p_conj = p / (p - 1.0);
    let mut x = normalize(start, p);
    let mut best = (ratio(m, &x, p, q), x.clone());
    for _ in 0..iters {
        let y = m * &x;
        let s = y.map(|v| v.signum() * v.abs().powf(q - 1.0));
        let z = m.transpose() * s;
        let next = z.map(|v| v.signum() * v.abs().powf(p_conj - 1.0));
        if lp(next.as_slice(), p) == 0.0 {
            break;
        }
        x = normalize(next, p);
        let r = ratio(m, &x, p, q);
        if r > best.0 {
            best = (r, x.clone());
        } else if r >= best.0 * (1.0 - 1e-15) {
            break;
        }
    }
    best
}

/// Coordinate pattern search on the unit sphere; `sign = 1` maximizes,
/// `sign = -1` minimizes.
fn pattern_search(
    m: &DMatrix<f64>,
    start: DVector<f64>,
    p: f64,
    q: f64,
    sign: f64,
) -> (f64, DVector<f64>) {
    let mut x = normalize(start, p);
    let mut fx = ratio(m, &x, p, q);
    let mut step = 0.25;
    while step > 1e-12 {
        let mut improved = false;
        for j in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut cand = x.clone();
                cand[j] += dir * step;
                if lp(cand.as_slice(), p) == 0.0 {
                    continue;
                }
                let cand = normalize(cand, p);
                let fc = ratio(m, &cand, p, q);
                if sign * fc > sign * fx {
                    x = cand;
                    fx = fc;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (fx, x)
}

fn spectral_max(m: &DMatrix<f64>) -> Stretch {
    let (_, sigma, vt) = sorted_svd(m);
    let witness = vt.row(0).iter().copied().collect();
    Stretch::exact(sigma.first().copied().unwrap_or(0.0), witness)
}

fn spectral_min(m: &DMatrix<f64>) -> Stretch {
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, sigma, vt) = sorted_svd(&padded);
    let k = sigma.len() - 1;
    let value = if m.nrows() < cols { 0.0 } else { sigma[k] };
    Stretch::exact(value, vt.row(k).iter().copied().collect())
}

fn is_l2(p: f64, q: f64) -> bool {
    p == 2.0 && q == 2.0
}

/// Exact extreme stretches through the SVD.
pub struct Spectral;

impl StretchEstimator for Spectral {
    fn name(&self) -> &'static str {
        "spectral"
    }

    fn certified(&self) -> bool {
        true
    }

    fn max_stretch(&self, m: &DMatrix<f64>, p: f64, q: f64) -> Result<Stretch> {
        if !is_l2(p, q) {
            return Err(FrameError::InvalidSpec(format!("spectral estimator needs p = q = 2, got p = {p}, q = {q}")));
        }
        Ok(spectral_max(m))
    }

    fn min_stretch(&self, m: &DMatrix<f64>, p: f64, q: f64) -> Result<Stretch> {
        if !is_l2(p, q) {
            return Err(FrameError::InvalidSpec(format!("spectral estimator needs p = q = 2, got p = {p}, q = {q}")));
        }
        Ok(spectral_min(m))
    }
}

/// Dense grid over the faces `x_j = 1` of the cube `[-1, 1]^d` (every
/// direction up to sign), followed by local polish of the best points.
///
/// With grid spacing `h` every unit-cube direction lies within `ℓ^p` distance
/// `ε = (d-1)^{1/p} h / 2` of a grid point, relative to a norm of at least
/// one, which gives the certified brackets
/// `max ≤ G_max (1 + ε) / (1 - ε)` and `min ≥ G_min (1 - ε) - max·ε`.
pub struct GridOracle {
    /// Grid intervals per free coordinate, indexed by dimension.
    pub resolution: [usize; ORACLE_MAX_DIM + 1],
    pub polish_points: usize,
}

impl Default for GridOracle {
    fn default() -> Self {
        GridOracle { resolution: [1, 1, 20_000, 320, 44], polish_points: 6 }
    }
}

impl GridOracle {
    fn check_dim(&self, cols: usize) -> Result<()> {
        if cols > ORACLE_MAX_DIM {
            Err(FrameError::OracleDimensionExceeded { max: ORACLE_MAX_DIM, got: cols })
        } else {
            Ok(())
        }
    }

    /// Every grid point with its stretch, plus the covering radius `ε`.
    fn scan(&self, m: &DMatrix<f64>, p: f64, q: f64) -> (Vec<(f64, DVector<f64>)>, f64) {
        let d = m.ncols();
        let k = self.resolution[d];
        let h = 2.0 / k as f64;
        let free = d - 1;
        let per_face = (k + 1).pow(free as u32);
        let mut points = Vec::with_capacity(d * per_face);
        for face in 0..d {
            for idx in 0..per_face {
                let mut x = DVector::zeros(d);
                let mut rest = idx;
                for j in (0..d).filter(|&j| j != face) {
                    x[j] = -1.0 + h * (rest % (k + 1)) as f64;
                    rest /= k + 1;
                }
                x[face] = 1.0;
                points.push((ratio(m, &x, p, q), x));
            }
        }
        let eps = if free == 0 { 0.0 } else { (free as f64).powf(1.0 / p) * h / 2.0 };
        (points, eps)
    }

    fn best(points: &mut [(f64, DVector<f64>)], count: usize, descending: bool) -> Vec<DVector<f64>> {
        points.sort_by(|a, b| if descending { b.0.total_cmp(&a.0) } else { a.0.total_cmp(&b.0) });
        points.iter().take(count).map(|(_, x)| x.clone()).collect()
    }
}

impl StretchEstimator for GridOracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn certified(&self) -> bool {
        true
    }

    fn max_stretch(&self, m: &DMatrix<f64>, p: f64, q: f64) -> Result<Stretch> {
        if is_l2(p, q) {
            return Ok(spectral_max(m));
        }
        self.check_dim(m.ncols())?;
        let (mut points, eps) = self.scan(m, p, q);
        let grid_max = points.iter().map(|(r, _)| *r).fold(0.0, f64::max);
        let mut best = (0.0, DVector::zeros(m.ncols()));
        for start in Self::best(&mut points, self.polish_points, true) {
            for cand in [power_ascent(m, start.clone(), p, q, 500), pattern_search(m, start, p, q, 1.0)] {
                if cand.0 > best.0 {
                    best = cand;
                }
            }
        }
        let lower = best.0.max(grid_max);
        let grid_upper = if eps < 1.0 { grid_max * (1.0 + eps) / (1.0 - eps) } else { f64::INFINITY };
        let upper = grid_upper.min(analytic_upper(m, p, q)).max(lower);
        Ok(Stretch { lower, upper, witness: normalize(best.1, p).iter().copied().collect() })
    }

    fn min_stretch(&self, m: &DMatrix<f64>, p: f64, q: f64) -> Result<Stretch> {
        if is_l2(p, q) {
            return Ok(spectral_min(m));
        }
        self.check_dim(m.ncols())?;
        let norm_upper = self.max_stretch(m, p, q)?.upper;
        let (mut points, eps) = self.scan(m, p, q);
        let grid_min = points.iter().map(|(r, _)| *r).fold(f64::INFINITY, f64::min);
        let mut best = (f64::INFINITY, DVector::zeros(m.ncols()));
        for start in Self::best(&mut points, self.polish_points, false) {
            let cand = pattern_search(m, start, p, q, -1.0);
            if cand.0 < best.0 {
                best = cand;
            }
        }
        let upper = best.0.min(grid_min);
        let grid_lower = grid_min * (1.0 - eps) - norm_upper * eps;
        let lower = grid_lower.max(equivalence_bounds(m, p, q).0).max(0.0).min(upper);
        Ok(Stretch { lower, upper, witness: normalize(best.1, p).iter().copied().collect() })
    }
}

/// Random-start local search. Brackets are `(best found, analytic bound)`:
/// only the analytic side is rigorous.
pub struct Heuristic {
    pub starts: usize,
    pub seed: u64,
}

impl Default for Heuristic {
    fn default() -> Self {
        Heuristic { starts: 32, seed: 0x5eed }
    }
}

impl Heuristic {
    fn starts(&self, d: usize) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.starts)
            .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)))
            .collect()
    }
}

impl StretchEstimator for Heuristic {
    fn name(&self) -> &'static str {
        "heuristic"
    }

    fn certified(&self) -> bool {
        false
    }

    fn max_stretch(&self, m: &DMatrix<f64>, p: f64, q: f64) -> Result<Stretch> {
        if is_l2(p, q) {
            return Ok(spectral_max(m));
        }
        let mut best = (0.0, DVector::zeros(m.ncols()));
        for start in self.starts(m.ncols()) {
            let cand = power_ascent(m, start, p, q, 300);
            if cand.0 > best.0 {
                best = cand;
            }
        }
        let polished = pattern_search(m, best.1.clone(), p, q, 1.0);
        if polished.0 > best.0 {
            best = polished;
        }
        let upper = analytic_upper(m, p, q).max(best.0);
        Ok(Stretch { lower: best.0, upper, witness: normalize(best.1, p).iter().copied().collect() })
    }

    fn min_stretch(&self, m: &DMatrix<f64>, p: f64, q: f64) -> Result<Stretch> {
        if is_l2(p, q) {
            return Ok(spectral_min(m));
        }
        let mut best = (f64::INFINITY, DVector::zeros(m.ncols()));
        // The 2-norm minimizer is a good seed for nearby exponents.
        let seeds = std::iter::once(DVector::from_vec(spectral_min(m).witness)).chain(self.starts(m.ncols()));
        for start in seeds {
            let cand = pattern_search(m, start, p, q, -1.0);
            if cand.0 < best.0 {
                best = cand;
            }
        }
        let lower = equivalence_bounds(m, p, q).0.min(best.0);
        Ok(Stretch { lower, upper: best.0, witness: normalize(best.1, p).iter().copied().collect() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn spec(p: f64) -> SequenceSpaceSpec {
        SequenceSpaceSpec::new(p).unwrap()
    }

    #[test]
    fn identity_and_diagonal_in_l2() {
        let id = Matrix::identity(3).unwrap();
        for mode in [Mode::Oracle, Mode::Heuristic] {
            let (lo, hi) = pq_opnorm(&id, &spec(2.0), &spec(2.0), mode).unwrap();
            assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
        }
        let d = Matrix::diag(&[Scalar::int(3), Scalar::int(1)]).unwrap();
        let (lo, hi) = pq_opnorm(&d, &spec(2.0), &spec(2.0), Mode::Oracle).unwrap();
        assert!((lo - 3.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
    }

    #[test]
    fn golden_ratio_norm() {
        let m = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let (lo, hi) = pq_opnorm(&m, &spec(2.0), &spec(2.0), Mode::Oracle).unwrap();
        assert!((lo - phi).abs() < 1e-6 && (hi - phi).abs() < 1e-6);
    }

    #[test]
    fn oracle_rejects_large_domains() {
        let m = Matrix::identity(5).unwrap();
        let err = pq_opnorm(&m, &spec(3.0), &spec(3.0), Mode::Oracle).unwrap_err();
        assert!(matches!(err, FrameError::OracleDimensionExceeded { max: 4, got: 5 }));
        // ℓ² never needs the grid.
        assert!(pq_opnorm(&m, &spec(2.0), &spec(2.0), Mode::Oracle).is_ok());
    }

    #[test]
    fn diagonal_norm_for_general_p() {
        // For diagonal maps ℓ^p → ℓ^p the norm is the largest |d_i|.
        let m = Matrix::from_f64_rows(&[&[0.5, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        for p in [1.5, 3.0] {
            let (lo, hi) = pq_opnorm(&m, &spec(p), &spec(p), Mode::Oracle).unwrap();
            assert!(lo <= 2.0 + 1e-12 && hi >= 2.0 - 1e-12, "p={p}: [{lo}, {hi}]");
            assert!((lo - 2.0).abs() < 1e-9);
            let (hlo, hhi) = pq_opnorm(&m, &spec(p), &spec(p), Mode::Heuristic).unwrap();
            assert!(hlo <= 2.0 + 1e-12 && hhi >= 2.0 - 1e-12);
        }
    }

    #[test]
    fn all_ones_row_norm_is_dual_norm() {
        // x ↦ Σ x_i from ℓ^p to ℝ has norm ‖(1,…,1)‖_{p'} = d^{1/p'}.
        let m = Matrix::from_int_rows(&[&[1, 1, 1]]).unwrap();
        let p = 3.0;
        let expected = 3f64.powf(1.0 - 1.0 / p);
        let (lo, hi) = pq_opnorm(&m, &spec(p), &spec(p), Mode::Oracle).unwrap();
        assert!(lo <= expected + 1e-12 && expected <= hi + 1e-12);
        assert!((lo - expected).abs() < 1e-9);
    }

    #[test]
    fn min_stretch_of_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]);
        let s = GridOracle::default().min_stretch(&m, 3.0, 3.0).unwrap();
        assert!(s.lower <= 0.5 + 1e-12 && s.upper >= 0.5 - 1e-12);
        assert!((s.upper - 0.5).abs() < 1e-9);
        let h = Heuristic::default().min_stretch(&m, 3.0, 3.0).unwrap();
        assert!(h.lower <= 0.5 + 1e-12 && (h.upper - 0.5).abs() < 1e-9);
    }

    #[test]
    fn weights_change_the_norm() {
        let id = Matrix::identity(2).unwrap();
        let to = SequenceSpaceSpec::weighted(2.0, Some(vec![9.0, 1.0])).unwrap();
        let (lo, hi) = pq_opnorm(&id, &spec(2.0), &to, Mode::Oracle).unwrap();
        assert!((lo - 3.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn registry_lookup() {
        let r = EstimatorRegistry::default();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["heuristic", "oracle", "spectral"]);
        assert!(r.get("nope").is_err());
        assert_eq!(r.auto(4).unwrap().name(), "oracle");
        assert_eq!(r.auto(5).unwrap().name(), "heuristic");
        assert!(Spectral.max_stretch(&DMatrix::identity(2, 2), 3.0, 3.0).is_err());
    }
}
