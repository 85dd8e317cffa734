//! Duals as left inverses of the analysis operator, synthesis pseudo-duals,
//! Bessel companions and atomic pairs built from operators.
//!
//! A dual system is returned in the same layout as its primal: row `i` of the
//! dense matrix is `f_i = L δ_i`, i.e. the matrix is `Lᵀ`.

use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::expansion::{primal_expand, ExpandOptions, ExpansionTrace};
use crate::frame::{classify, require_injective, Flag};
use crate::linalg::{pseudoinverse, svd_summary_f64, Matrix, SequenceSpaceSpec, Vector};
use crate::scalar::Scalar;
use crate::sequences::{validate_ladder, FrameSystem};

/// Canonical dual `(S⁻¹ g_i)` of a truncation, as the rows of `U S⁻¹`.
pub fn canonical_dual(fs: &FrameSystem, n: usize, m: usize) -> Result<FrameSystem> {
    let u = fs.materialize(n, m)?;
    let s = u.transpose().matmul(&u)?;
    if svd_summary_f64(&s.to_dmatrix()).rank < m {
        return Err(FrameError::SingularFrameOperator);
    }
    let s_inv = match s.inverse_exact() {
        Some(inv) => inv,
        None => pseudoinverse(&s),
    };
    Ok(FrameSystem::Dense(u.matmul(&s_inv)?))
}

/// Every left inverse of an injective analysis matrix `U` is
/// `base + Z·kernel_projector` for some `m × n` matrix `Z`.
#[derive(Clone, Debug, Serialize)]
pub struct DualParametrization {
    /// `U†`, `m × n`.
    pub base: Matrix,
    /// `I − U U†`, the orthogonal projector onto `R(U)^⊥`, `n × n`.
    pub kernel_projector: Matrix,
    pub n_terms: usize,
    pub m_dims: usize,
    /// The analysis matrix the family was built from.
    pub analysis: Matrix,
}

impl DualParametrization {
    /// `dim R(U)^⊥ = n − rank U`.
    pub fn kernel_rank(&self) -> usize {
        self.n_terms - self.m_dims
    }

    /// `L = base + Z·kernel_projector`.
    pub fn left_inverse(&self, z: &Matrix) -> Result<Matrix> {
        if z.rows() != self.m_dims || z.cols() != self.n_terms {
            return Err(FrameError::DimensionMismatch {
                expected: self.m_dims * self.n_terms,
                got: z.rows() * z.cols(),
            });
        }
        self.base.add(&z.matmul(&self.kernel_projector)?)
    }

    /// A `Z` that reproduces a given left inverse `L` (namely `L − U†`).
    /// Fails if `L U ≠ I` to within `tol`.
    pub fn decompose(&self, l: &Matrix, tol: f64) -> Result<Matrix> {
        let lu = l.matmul(&self.analysis)?;
        let err = lu.max_abs_diff(&Matrix::identity(self.m_dims)?);
        if err > tol {
            return Err(FrameError::InvariantViolation(format!("not a left inverse: |LU − I| = {err:e}")));
        }
        l.sub(&self.base)
    }

    /// `max(|U†U − I|, |P² − P|, |PU|)`.
    pub fn invariant_residual(&self) -> f64 {
        let p = &self.kernel_projector;
        let id = Matrix::identity(self.m_dims).expect("m ≥ 1");
        let left = self.base.matmul(&self.analysis).map_or(f64::INFINITY, |x| x.max_abs_diff(&id));
        let idem = p.matmul(p).map_or(f64::INFINITY, |x| x.max_abs_diff(p));
        let kills = p.matmul(&self.analysis).map_or(f64::INFINITY, |x| x.max_abs());
        left.max(idem).max(kills)
    }
}

/// Builds the left-inverse family of the truncated analysis matrix.
pub fn dual_parametrization(fs: &FrameSystem, n: usize, m: usize) -> Result<DualParametrization> {
    let u = fs.materialize(n, m)?;
    require_injective(&u)?;
    let base = pseudoinverse(&u);
    let kernel_projector = Matrix::identity(n)?.sub(&u.matmul(&base)?)?;
    Ok(DualParametrization { base, kernel_projector, n_terms: n, m_dims: m, analysis: u })
}

/// The dual `(L δ_i)` for `L = base + Z·kernel_projector`.
pub fn sample_dual(param: &DualParametrization, z: &Matrix) -> Result<FrameSystem> {
    Ok(FrameSystem::Dense(param.left_inverse(z)?.transpose()))
}

/// `Z` turning the canonical dual `(½e₁, ½e₁, e₂, …)` of `(e₁, e₁, e₂, …)`
/// into `(w, e₁ − w, e₂, …)`: it sends `δ₁ ↦ w − ½e₁` and `δ₂ ↦ ½e₁ − w`.
pub fn first_pair_perturbation(w: &Vector, n_terms: usize) -> Result<Matrix> {
    if n_terms < 2 {
        return Err(FrameError::DimensionMismatch { expected: 2, got: n_terms });
    }
    let m = w.dim();
    let shift = w.sub(&Vector::basis(m, 1)?.scale(&Scalar::ratio(1, 2)))?;
    let mut z = Matrix::zeros(m, n_terms)?;
    for (k, x) in shift.coords().iter().enumerate() {
        z.set(k, 0, x.clone());
        z.set(k, 1, -x);
    }
    Ok(z)
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoDualFamily {
    pub structure: Option<String>,
    /// `dim ker(Uᵀ)` at each ladder level.
    pub levels: Vec<((usize, usize), usize)>,
    /// Common value of the last two levels; `None` means not stabilized.
    pub complement_dim: Option<usize>,
}

/// `dim R(U)^⊥` along a ladder. Two equal consecutive values at the top of
/// the ladder count as stabilization.
pub fn complement_dimension(fs: &FrameSystem, ladder: &[(usize, usize)]) -> Result<PseudoDualFamily> {
    if ladder.len() < 2 {
        return Err(FrameError::InvalidSpec("complement dimension needs at least two ladder levels".into()));
    }
    validate_ladder(ladder)?;
    let levels = ladder
        .iter()
        .map(|&(n, m)| {
            let u = fs.materialize(n, m)?;
            Ok(((n, m), n - svd_summary_f64(&u.to_dmatrix()).rank))
        })
        .collect::<Result<Vec<_>>>()?;
    let top = &levels[levels.len() - 2..];
    let complement_dim = (top[0].1 == top[1].1).then_some(top[1].1);
    Ok(PseudoDualFamily { structure: None, levels, complement_dim })
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoDualReport {
    pub traces: Vec<ExpansionTrace>,
    /// All probes converged to their targets.
    pub evidence: bool,
}

/// Runs the primal expansion `Σ ⟨f, g_i⟩ f_i` for every probe.
pub fn pseudo_dual_verify(
    g: &FrameSystem,
    f: &FrameSystem,
    probes: &[Vector],
    opts: &ExpandOptions,
) -> Result<PseudoDualReport> {
    let traces = probes
        .iter()
        .map(|probe| primal_expand(g, f, probe, opts))
        .collect::<Result<Vec<_>>>()?;
    let evidence = !traces.is_empty() && traces.iter().all(|t| t.verdict.is_converged());
    Ok(PseudoDualReport { traces, evidence })
}

#[derive(Clone, Debug, Serialize)]
pub struct BesselCompanion {
    /// `g_i = V δ_i` with `V = U_F†`.
    pub system: FrameSystem,
    /// `‖V‖ = 1/σ_min(U_F)`.
    pub bessel_bound: f64,
    /// `max |V U_F − I|`; zero for exact inputs.
    pub reconstruction_residual: f64,
}

/// Bessel sequence `G` with `Σ ⟨f, g_i⟩ f_i = f` on the truncated space,
/// for a system `F` whose truncated analysis matrix is injective.
pub fn bessel_companion(f: &FrameSystem, n: usize, m: usize) -> Result<BesselCompanion> {
    let u = f.materialize(n, m)?;
    require_injective(&u)?;
    let v = pseudoinverse(&u);
    let reconstruction_residual = v.matmul(&u)?.max_abs_diff(&Matrix::identity(m)?);
    let summary = svd_summary_f64(&u.to_dmatrix());
    Ok(BesselCompanion {
        system: FrameSystem::Dense(v.transpose()),
        bessel_bound: 1.0 / summary.sigma_min,
        reconstruction_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomicPair {
    /// `g_i = T δ_i`.
    pub g: FrameSystem,
    /// `f_i = L δ_i` with `L = (Tᵀ)†`.
    pub f: FrameSystem,
    /// `1/σ_min(Tᵀ)`.
    pub right_inverse_norm: f64,
}

/// Atomic pair generated by a surjective `T` (`rows` = ambient dimension,
/// `cols` = number of terms).
pub fn atomic_pair_from_operator(t: &Matrix, spec: &SequenceSpaceSpec) -> Result<AtomicPair> {
    let class = classify(t, spec)?;
    if class.xd_frame != Flag::Yes {
        let rank = svd_summary_f64(&t.to_dmatrix()).rank;
        return Err(FrameError::NotSurjective { rank, rows: t.rows() });
    }
    let u = t.transpose();
    let l = pseudoinverse(&u);
    Ok(AtomicPair {
        g: FrameSystem::Dense(u),
        f: FrameSystem::Dense(l.transpose()),
        right_inverse_norm: class.certificates["right_inverse_norm"],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{halving_pair_f, halving_pair_g, linear_basis, repeated_first, three_vectors, tripled_basis, tripled_partner};

    fn dense(fs: &FrameSystem) -> &Matrix {
        match fs {
            FrameSystem::Dense(m) => m,
            FrameSystem::Generated(_) => panic!("expected a dense system"),
        }
    }

    #[test]
    fn canonical_duals() {
        let id = FrameSystem::Dense(Matrix::identity(3).unwrap());
        assert_eq!(dense(&canonical_dual(&id, 3, 3).unwrap()), &Matrix::identity(3).unwrap());

        let d = canonical_dual(&repeated_first(), 4, 3).unwrap();
        let h = Scalar::ratio(1, 2);
        let (o, z) = (Scalar::one(), Scalar::zero());
        let expected = Matrix::from_rows(vec![
            vec![h.clone(), z.clone(), z.clone()],
            vec![h, z.clone(), z.clone()],
            vec![z.clone(), o.clone(), z.clone()],
            vec![z.clone(), z, o],
        ])
        .unwrap();
        assert_eq!(dense(&d), &expected);

        let g = tripled_basis().materialize(12, 4).unwrap();
        let d = canonical_dual(&tripled_basis(), 12, 4).unwrap();
        assert_eq!(dense(&d), &g.scale(&Scalar::ratio(1, 3)));

        assert!(matches!(canonical_dual(&tripled_basis(), 3, 2), Err(FrameError::SingularFrameOperator)));
    }

    #[test]
    fn parametrization_examples() {
        let id = FrameSystem::Dense(Matrix::identity(3).unwrap());
        let p = dual_parametrization(&id, 3, 3).unwrap();
        assert_eq!(p.base, Matrix::identity(3).unwrap());
        assert_eq!(p.kernel_projector.max_abs(), 0.0);
        assert_eq!(p.kernel_rank(), 0);

        let p = dual_parametrization(&three_vectors(), 3, 2).unwrap();
        let third = |k| Scalar::ratio(k, 3);
        let expected = Matrix::from_rows(vec![
            vec![third(1), third(1), third(-1)],
            vec![third(1), third(1), third(-1)],
            vec![third(-1), third(-1), third(1)],
        ])
        .unwrap();
        assert_eq!(p.kernel_projector, expected);
        assert_eq!(p.invariant_residual(), 0.0);

        let p = dual_parametrization(&repeated_first(), 5, 4).unwrap();
        let mut expected = Matrix::zeros(5, 5).unwrap();
        let h = Scalar::ratio(1, 2);
        expected.set(0, 0, h.clone());
        expected.set(1, 1, h.clone());
        expected.set(0, 1, -&h);
        expected.set(1, 0, -&h);
        assert_eq!(p.kernel_projector, expected);

        assert!(matches!(dual_parametrization(&tripled_basis(), 2, 2), Err(FrameError::LowerBoundViolation { .. })));
    }

    #[test]
    fn sampled_duals() {
        let p = dual_parametrization(&repeated_first(), 5, 4).unwrap();
        let zero = Matrix::zeros(4, 5).unwrap();
        assert_eq!(
            dense(&sample_dual(&p, &zero).unwrap()),
            dense(&canonical_dual(&repeated_first(), 5, 4).unwrap())
        );

        let w = Vector::from_ints(&[3, -2, 0, 7]).unwrap();
        let dual = sample_dual(&p, &first_pair_perturbation(&w, 5).unwrap()).unwrap();
        let rows = dense(&dual);
        assert_eq!(rows.row(0), w);
        assert_eq!(rows.row(1), Vector::basis(4, 1).unwrap().sub(&w).unwrap());
        for k in 2..5 {
            assert_eq!(rows.row(k), Vector::basis(4, k).unwrap());
        }
        assert!(sample_dual(&p, &Matrix::zeros(5, 4).unwrap()).is_err());
    }

    #[test]
    fn decomposition_recovers_left_inverse() {
        let p = dual_parametrization(&three_vectors(), 3, 2).unwrap();
        let l = Matrix::from_int_rows(&[&[1, 0, 0], &[0, 1, 0]]).unwrap();
        let z = p.decompose(&l, 1e-12).unwrap();
        assert_eq!(p.left_inverse(&z).unwrap(), l);
        let bad = Matrix::from_int_rows(&[&[1, 1, 0], &[0, 1, 0]]).unwrap();
        assert!(p.decompose(&bad, 1e-12).is_err());
    }

    #[test]
    fn complement_dimensions() {
        let fam = complement_dimension(&repeated_first(), &[(11, 10), (21, 20), (41, 40)]).unwrap();
        assert_eq!(fam.complement_dim, Some(1));
        let id = FrameSystem::Dense(Matrix::identity(3).unwrap());
        assert!(complement_dimension(&id, &[(3, 3)]).is_err());
        let ladder: Vec<(usize, usize)> = (1..=4).map(|k| (3 * k, k)).collect();
        let fam = complement_dimension(&tripled_basis(), &ladder).unwrap();
        assert_eq!(fam.levels.iter().map(|l| l.1).collect::<Vec<_>>(), vec![2, 4, 6, 8]);
        assert_eq!(fam.complement_dim, None);
    }

    #[test]
    fn pseudo_dual_checks() {
        let probes = vec![Vector::from_ints(&[1]).unwrap()];
        let opts = ExpandOptions::new(60).with_tol(1e-9);
        let r = pseudo_dual_verify(&halving_pair_g(), &halving_pair_f(), &probes, &opts).unwrap();
        assert!(r.evidence);
        let probes = vec![Vector::from_ints(&[0, 1]).unwrap(), Vector::from_ints(&[1, 0, 2]).unwrap()];
        let r = pseudo_dual_verify(&tripled_basis(), &tripled_partner(), &probes, &ExpandOptions::new(60)).unwrap();
        assert!(r.evidence);
        let fs = three_vectors();
        let canonical = canonical_dual(&fs, 3, 2).unwrap();
        let probes = vec![Vector::from_ints(&[5, -3]).unwrap()];
        let r = pseudo_dual_verify(&fs, &canonical, &probes, &ExpandOptions::new(10)).unwrap();
        assert_eq!(r.traces[0].verdict, crate::expansion::Verdict::Converged { tol: 0.0, at: 3 });
    }

    #[test]
    fn bessel_companion_of_linear_basis() {
        let c = bessel_companion(&linear_basis(), 6, 6).unwrap();
        let expected = Matrix::diag(&(1..=6).map(|i| Scalar::ratio(1, i)).collect::<Vec<_>>()).unwrap();
        assert_eq!(dense(&c.system), &expected);
        assert_eq!(c.reconstruction_residual, 0.0);
        assert!((c.bessel_bound - 1.0).abs() < 1e-12);

        let c = bessel_companion(&halving_pair_f(), 8, 5).unwrap();
        assert!(c.reconstruction_residual < 1e-10);
        assert!(bessel_companion(&tripled_basis(), 2, 2).is_err());
    }

    #[test]
    fn atomic_pairs() {
        let l2 = SequenceSpaceSpec::l2();
        let id = Matrix::identity(3).unwrap();
        let pair = atomic_pair_from_operator(&id, &l2).unwrap();
        assert_eq!(dense(&pair.g), &id);
        assert_eq!(dense(&pair.f), &id);

        let fs = three_vectors();
        let t = fs.materialize(3, 2).unwrap().transpose();
        let pair = atomic_pair_from_operator(&t, &l2).unwrap();
        assert_eq!(dense(&pair.f), dense(&canonical_dual(&fs, 3, 2).unwrap()));
        let sigma_min = svd_summary_f64(&t.to_dmatrix()).sigma_min;
        assert!((pair.right_inverse_norm - 1.0 / sigma_min).abs() < 1e-12);

        let flat = Matrix::from_int_rows(&[&[1, 1], &[1, 1]]).unwrap();
        assert!(matches!(atomic_pair_from_operator(&flat, &l2), Err(FrameError::NotSurjective { rank: 1, rows: 2 })));
    }
}
