use framelab::builtins::{tripled_basis, tripled_partner, BuiltinRegistry};
use framelab::duals::{bessel_companion, canonical_dual, dual_parametrization, sample_dual};
use framelab::expansion::{
    dual_expand, primal_expand, tf_adjoint_domain_test, transform_report, DomainEvidence, ExpandOptions,
};
use framelab::frame::{analysis, classify, synthesis, Flag};
use framelab::linalg::{pnorm, pnorm_f64, pseudoinverse, svd_summary};
use framelab::opnorm::{pq_opnorm, EstimatorRegistry, Mode};
use framelab::sequences::FrameSystem;
use framelab::{Matrix, Scalar, SequenceSpaceSpec, Vector};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn small_ints(len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, len)
}

fn float_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-3.0f64..3.0, r * c).prop_map(move |v| DMatrix::from_row_slice(r, c, &v))
    })
}

/// Full-column-rank analysis matrices with `n ≥ m`.
fn frame_matrix(max_n: usize, max_m: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_m)
        .prop_flat_map(move |m| (Just(m), m..=max_n))
        .prop_flat_map(|(m, n)| prop::collection::vec(-3.0f64..3.0, n * m).prop_map(move |v| DMatrix::from_row_slice(n, m, &v)))
        .prop_filter("well conditioned", |u| {
            let s = u.clone().svd(false, false).singular_values;
            s.min() > 1e-3 * s.max().max(1e-300)
        })
}

fn to_dense(m: &DMatrix<f64>) -> FrameSystem {
    FrameSystem::Dense(Matrix::from_dmatrix(m).unwrap())
}

fn rows_of(fs: &FrameSystem) -> DMatrix<f64> {
    match fs {
        FrameSystem::Dense(m) => m.to_dmatrix(),
        FrameSystem::Generated(_) => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pnorm_is_a_norm(a in prop::collection::vec(-50.0f64..50.0, 1..8), scale in -4.0f64..4.0, p in 1.05f64..6.0) {
        let spec = SequenceSpaceSpec::new(p).unwrap();
        let b: Vec<f64> = a.iter().rev().map(|x| x * 0.5 - 1.0).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (na, nb, ns) = (pnorm_f64(&a, &spec), pnorm_f64(&b, &spec), pnorm_f64(&sum, &spec));
        prop_assert!(ns <= na + nb + 1e-9 * (na + nb));
        let scaled: Vec<f64> = a.iter().map(|x| x * scale).collect();
        let ns = pnorm_f64(&scaled, &spec);
        prop_assert!((ns - scale.abs() * na).abs() <= 1e-9 * (1.0 + ns));
    }

    #[test]
    fn exact_norms_agree_with_floats(v in small_ints(5), p in 2u32..5) {
        let spec = SequenceSpaceSpec::new(p as f64).unwrap();
        let x = Vector::from_ints(&v).unwrap();
        let exact = pnorm(&x, &spec).unwrap();
        let float = pnorm_f64(&x.to_f64(), &spec);
        prop_assert!((exact.to_f64() - float).abs() <= 1e-12 * (1.0 + float));
    }

    #[test]
    fn materialization_is_consistent(n in 1usize..20, m in 1usize..12, dn in 0usize..6, dm in 0usize..6) {
        for ex in BuiltinRegistry::default().iter() {
            if ex.system.len().is_some() {
                continue;
            }
            let small = ex.system.materialize(n, m).unwrap();
            let big = ex.system.materialize(n + dn, m + dm).unwrap();
            for i in 0..n {
                for j in 0..m {
                    prop_assert_eq!(small.get(i, j), big.get(i, j));
                }
            }
            prop_assert_eq!(ex.system.term(n).unwrap(), ex.system.term(n).unwrap());
        }
    }

    #[test]
    fn adjointness_is_exact(f in small_ints(6), c in small_ints(12)) {
        for name in ["ex-3.6-F", "intro-G", "no-dual-frame", "reciprocal"] {
            let fs = BuiltinRegistry::default().system(name).unwrap();
            let fv = Vector::from_ints(&f).unwrap();
            let cv = Vector::from_ints(&c).unwrap();
            let uf = analysis(&fs, &fv, 12).unwrap();
            let tc = synthesis(&fs, &cv, 6).unwrap();
            let lhs = uf.dot(&cv).unwrap();
            let rhs = fv.dot(&tc).unwrap();
            prop_assert!(lhs.is_exact());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn classification_lattice(t in float_matrix(5, 6)) {
        let class = classify(&Matrix::from_dmatrix(&t).unwrap(), &SequenceSpaceSpec::l2()).unwrap();
        prop_assert!(class.check_invariants().is_ok());
        prop_assert_eq!(class.bessel, Flag::Yes);
        if class.riesz_basis == Flag::Yes {
            prop_assert_eq!(class.xd_frame, Flag::Yes);
        }
        if class.xd_frame == Flag::Yes {
            let s = t.clone().svd(false, false).singular_values;
            prop_assert!((class.certificates["right_inverse_norm"] - 1.0 / s.min()).abs() <= 1e-9 / s.min());
        }
    }

    #[test]
    fn spectral_norm_matches_largest_singular_value(t in float_matrix(6, 6)) {
        let l2 = SequenceSpaceSpec::l2();
        let (lo, hi) = pq_opnorm(&Matrix::from_dmatrix(&t).unwrap(), &l2, &l2, Mode::Heuristic).unwrap();
        let smax = t.clone().svd(false, false).singular_values.max();
        prop_assert!((lo - smax).abs() <= 1e-9 * (1.0 + smax));
        prop_assert!((hi - smax).abs() <= 1e-9 * (1.0 + smax));
    }

    #[test]
    fn left_inverse_family_reconstructs(u in frame_matrix(6, 4), seed in 0u64..1000) {
        let (n, m) = u.shape();
        let param = dual_parametrization(&to_dense(&u), n, m).unwrap();
        prop_assert!(param.invariant_residual() < 1e-10);
        let z = DMatrix::from_fn(m, n, |i, j| ((seed as usize + 3 * i + 7 * j) % 11) as f64 - 5.0);
        let duals = rows_of(&sample_dual(&param, &Matrix::from_dmatrix(&z).unwrap()).unwrap());
        // Σ ⟨f, g_i⟩ f_i = f and Σ ⟨g, f_i⟩ g_i = g for every f, g.
        prop_assert!((duals.transpose() * &u - DMatrix::identity(m, m)).abs().max() < 1e-9);
        prop_assert!((u.transpose() * &duals - DMatrix::identity(m, m)).abs().max() < 1e-9);
    }

    #[test]
    fn canonical_dual_is_zero_parameter(u in frame_matrix(6, 4)) {
        let (n, m) = u.shape();
        let fs = to_dense(&u);
        let canonical = rows_of(&canonical_dual(&fs, n, m).unwrap());
        let param = dual_parametrization(&fs, n, m).unwrap();
        let zero = rows_of(&sample_dual(&param, &Matrix::zeros(m, n).unwrap()).unwrap());
        prop_assert!((canonical - zero).abs().max() < 1e-9);
    }

    #[test]
    fn companion_bound_is_inverse_sigma_min(u in frame_matrix(7, 4)) {
        let (n, m) = u.shape();
        let c = bessel_companion(&to_dense(&u), n, m).unwrap();
        let s = u.clone().svd(false, false).singular_values;
        prop_assert!((c.bessel_bound - 1.0 / s.min()).abs() <= 1e-9 / s.min());
        let g = rows_of(&c.system);
        let gs = g.clone().svd(false, false).singular_values.max();
        prop_assert!((gs - c.bessel_bound).abs() <= 1e-9 * c.bessel_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn penrose_identities(m in float_matrix(8, 8)) {
        let a = Matrix::from_dmatrix(&m).unwrap();
        let x = pseudoinverse(&a).to_dmatrix();
        let scale = 1.0 + m.abs().max() * x.abs().max();
        let tol = 1e-8 * scale * scale;
        prop_assert!((&m * &x * &m - &m).abs().max() < tol);
        prop_assert!((&x * &m * &x - &x).abs().max() < tol);
        prop_assert!(((&m * &x).transpose() - &m * &x).abs().max() < tol);
        prop_assert!(((&x * &m).transpose() - &x * &m).abs().max() < tol);
    }

    #[test]
    fn exact_pseudoinverse_matches_float(v in small_ints(6)) {
        let a = Matrix::from_int_rows(&[&v[0..2], &v[2..4], &v[4..6]]).unwrap();
        let exact = pseudoinverse(&a);
        let float = pseudoinverse(&a.to_float());
        prop_assert!(exact.max_abs_diff(&float) < 1e-9 * (1.0 + float.max_abs()));
    }

    #[test]
    fn transforms_respect_preservation(v in float_matrix(4, 3), u in frame_matrix(6, 3)) {
        let (n, m) = u.shape();
        let v = v.columns(0, v.ncols().min(m)).into_owned();
        let v = if v.ncols() == m { v } else { DMatrix::from_fn(v.nrows(), m, |i, j| if j < v.ncols() { v[(i, j)] } else { 0.0 }) };
        let r = transform_report(&Matrix::from_dmatrix(&v).unwrap(), &to_dense(&u), &SequenceSpaceSpec::l2(), n, m);
        prop_assert!(r.is_ok(), "{:?}", r.err());
    }

    #[test]
    fn tripled_dual_dichotomy(coefs in prop::collection::vec(-20i64..=20, 9), first in -5i64..=5) {
        let (g, f) = (tripled_basis(), tripled_partner());
        let mut c = vec![first];
        c.extend(coefs);
        let target = Vector::from_ints(&c).unwrap();
        let trace = dual_expand(&g, &f, &target, &ExpandOptions::new(60)).unwrap();
        if first == 0 {
            prop_assert!(trace.verdict.is_converged());
        } else {
            prop_assert_eq!(trace.verdict.gap(), Some(Scalar::int(first.abs())));
        }
        let primal = primal_expand(&g, &f, &target, &ExpandOptions::new(60)).unwrap();
        prop_assert!(primal.verdict.is_converged());
    }

    #[test]
    fn exact_traces_agree_with_float_reevaluation(c in small_ints(4)) {
        let (g, f) = (tripled_basis(), tripled_partner());
        let exact = primal_expand(&g, &f, &Vector::from_ints(&c).unwrap(), &ExpandOptions::new(15)).unwrap();
        let floats: Vec<f64> = c.iter().map(|&x| x as f64).collect();
        let float = primal_expand(&g, &f, &Vector::from_f64(&floats).unwrap(), &ExpandOptions::new(15)).unwrap();
        for (a, b) in exact.points.iter().zip(&float.points) {
            prop_assert!((a.residual.to_f64() - b.residual.to_f64()).abs() <= 1e-12);
        }
        for p in &exact.points {
            if p.residual.is_zero() {
                prop_assert!(p.exact);
            }
        }
    }
}

#[test]
fn exact_zero_residuals_in_exact_traces() {
    let (g, f) = (tripled_basis(), tripled_partner());
    let trace = primal_expand(&g, &f, &Vector::from_ints(&[1, 1]).unwrap(), &ExpandOptions::new(12)).unwrap();
    assert!(trace.residual_at(6).unwrap().is_exact());
    assert!(trace.residual_at(6).unwrap().is_zero());
}

#[test]
fn canonical_dual_pairs_expand_exactly_in_both_directions() {
    let fs = BuiltinRegistry::default().system("three-vectors").unwrap();
    let dual = canonical_dual(&fs, 3, 2).unwrap();
    for probe in [[1, 0], [0, 1], [3, -7]] {
        let target = Vector::from_ints(&probe).unwrap();
        let p = primal_expand(&fs, &dual, &target, &ExpandOptions::new(10)).unwrap();
        let d = dual_expand(&fs, &dual, &target, &ExpandOptions::new(10)).unwrap();
        assert!(p.residual_at(3).unwrap().is_zero() && p.residual_at(3).unwrap().is_exact());
        assert!(d.residual_at(3).unwrap().is_zero() && d.residual_at(3).unwrap().is_exact());
    }
}

#[test]
fn inside_domain_evidence_implies_dual_convergence() {
    let registry = BuiltinRegistry::default();
    let l2 = SequenceSpaceSpec::l2();
    let pairs = [("ex-3.6-G", "ex-3.6-F"), ("intro-G", "intro-F"), ("canonical-basis", "canonical-basis")];
    let probes = [vec![1, 0, 0], vec![0, 1, 0], vec![0, 2, -1], vec![1, 1, 1]];
    for (gn, fname) in pairs {
        let g = registry.system(gn).unwrap();
        let f = registry.system(fname).unwrap();
        let ladder: Vec<(usize, usize)> = (2..=6).map(|k| f.aligned_level(k)).collect();
        for probe in &probes {
            let target = Vector::from_ints(probe).unwrap();
            let evidence = tf_adjoint_domain_test(&f, &target, &ladder, &l2).unwrap().evidence;
            if evidence == DomainEvidence::InsideEvidence {
                let trace = dual_expand(&g, &f, &target, &ExpandOptions::new(90).with_tol(1e-9)).unwrap();
                assert!(trace.verdict.is_converged(), "{gn}/{fname} {probe:?}: {}", trace.verdict);
            }
        }
    }
}

#[test]
fn oracle_brackets_contain_heuristic_values() {
    let registry = EstimatorRegistry::default();
    let oracle = registry.get("oracle").unwrap();
    let heuristic = registry.get("heuristic").unwrap();
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 1.0, 0.0, 1.0, 3.0]);
    for (p, q) in [(1.5, 1.5), (3.0, 3.0), (1.5, 4.0)] {
        let o = oracle.max_stretch(&m, p, q).unwrap();
        let h = heuristic.max_stretch(&m, p, q).unwrap();
        assert!(o.lower <= h.lower + 1e-9 && h.lower <= o.upper + 1e-9, "p={p} q={q}: {o:?} vs {h:?}");
        let o = oracle.min_stretch(&m, p, q).unwrap();
        let h = heuristic.min_stretch(&m, p, q).unwrap();
        assert!(o.lower <= h.upper + 1e-9, "p={p} q={q}: {o:?} vs {h:?}");
    }
}

#[test]
fn svd_of_exact_and_float_inputs_agree() {
    let a = Matrix::from_int_rows(&[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
    let s = svd_summary(&a);
    assert!((s.sigma_max - 3f64.sqrt()).abs() < 1e-12);
    assert!((s.sigma_min - 1.0).abs() < 1e-12);
}
