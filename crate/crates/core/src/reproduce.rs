//! Scripted reproductions of the named examples. Each script runs a list of
//! checks and reports every one of them, passing or not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::builtins::{
    canonical_basis, halving_pair_f, halving_pair_g, linear_basis, neighbour_sums, reciprocal_basis, repeated_first,
    tripled_basis, tripled_partner,
};
use crate::duals::{bessel_companion, complement_dimension, dual_parametrization, first_pair_perturbation, pseudo_dual_verify, sample_dual};
use crate::error::{FrameError, Result};
use crate::expansion::{
    dual_expand, find_transform, lower_condition_of_partner, primal_expand, tf_adjoint_domain_test, DomainEvidence,
    ExpandOptions,
};
use crate::frame::{hilbert_frame_bounds, synthesis, xd_frame_bounds};
use crate::linalg::{pnorm, svd_summary, SequenceSpaceSpec, Vector};
use crate::opnorm::Mode;
use crate::scalar::Scalar;
use crate::sequences::FrameSystem;

pub const SCRIPTS: [&str; 6] = ["ex-3.6", "ex-3.3", "intro-pair", "e1-repeated", "no-dual-frame", "bessel-companion"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    pub example: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Transcript {
    fn new(example: &str, seed: u64) -> Self {
        Transcript { example: example.to_string(), seed, checks: Vec::new() }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn reproduce(name: &str, seed: u64) -> Result<Transcript> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Transcript::new(name, seed);
    match name {
        "ex-3.6" => tripled(&mut t, &mut rng)?,
        "ex-3.3" => halving_lp(&mut t)?,
        "intro-pair" => halving_hilbert(&mut t)?,
        "e1-repeated" => repeated(&mut t, &mut rng)?,
        "no-dual-frame" => neighbours(&mut t)?,
        "bessel-companion" => companion(&mut t)?,
        _ => return Err(FrameError::UnknownExample(name.to_string())),
    }
    Ok(t)
}

/// Integer vector of the given dimension with entries in `-9..=9`, the
/// coordinates before `first` set to zero and coordinate `first` nonzero.
pub fn random_probe(rng: &mut impl Rng, dim: usize, first: usize) -> Vector {
    let coords = (1..=dim)
        .map(|k| match k.cmp(&first) {
            std::cmp::Ordering::Less => Scalar::zero(),
            std::cmp::Ordering::Equal => Scalar::int(if rng.random_bool(0.5) { 1 } else { -1 } * rng.random_range(1..=9)),
            std::cmp::Ordering::Greater => Scalar::int(rng.random_range(-9..=9)),
        })
        .collect();
    Vector::new(coords).expect("dim ≥ 1")
}

fn pow2_inv(k: u32) -> Scalar {
    Scalar::one() / Scalar::int(2).powi(k)
}

fn tripled(t: &mut Transcript, rng: &mut ChaCha8Rng) -> Result<()> {
    let (g, f) = (tripled_basis(), tripled_partner());
    let opts = ExpandOptions::new(60);

    let mut primal_ok = 0;
    for _ in 0..10 {
        let probe = random_probe(rng, 10, 1);
        let trace = primal_expand(&g, &f, &probe, &opts)?;
        let boundaries_zero = trace.boundary_residuals().iter().filter(|(n, _)| *n >= 30).all(|(_, r)| r.is_exact() && r.is_zero());
        if trace.verdict.is_converged() && boundaries_zero {
            primal_ok += 1;
        }
    }
    t.check("primal expansion converges on span{e1..e10}", primal_ok == 10, format!("{primal_ok}/10 probes, exact"));

    let e1 = Vector::basis(1, 1)?;
    let trace = dual_expand(&g, &f, &e1, &opts)?;
    let gap = trace.verdict.gap();
    t.check(
        "dual expansion of e1 oscillates with gap 1",
        gap == Some(Scalar::one()),
        format!("{}", trace.verdict),
    );

    let mut dual_ok = 0;
    for _ in 0..10 {
        let probe = random_probe(rng, 10, 2);
        if dual_expand(&g, &f, &probe, &opts)?.verdict.is_converged() {
            dual_ok += 1;
        }
    }
    t.check("dual expansion converges on span{e2..e10}", dual_ok == 10, format!("{dual_ok}/10 probes"));

    let l2 = SequenceSpaceSpec::l2();
    let ladder: Vec<(usize, usize)> = (1..=6).map(|k| (3 * k, k)).collect();
    let out = tf_adjoint_domain_test(&f, &e1, &ladder, &l2)?;
    let norms: Vec<String> = out.levels.iter().map(|l| format!("{:.4}", l.norm)).collect();
    t.check(
        "e1 outside the adjoint domain",
        out.evidence == DomainEvidence::OutsideEvidence,
        format!("norms {}", norms.join(", ")),
    );
    let e2 = Vector::basis(2, 2)?;
    let ladder_e2: Vec<(usize, usize)> = (2..=6).map(|k| (3 * k, k)).collect();
    let inside = tf_adjoint_domain_test(&f, &e2, &ladder_e2, &l2)?;
    t.check("e2 inside the adjoint domain", inside.evidence == DomainEvidence::InsideEvidence, "bounded functional");

    let lower = lower_condition_of_partner(&g, &f, &l2, &ladder)?;
    t.check("partner lower bound λ ≥ 1", lower.lambda >= 1.0 - 1e-9, format!("λ = {:.6}", lower.lambda));

    let mut bounds_ok = true;
    for &(n, m) in &[(6, 2), (30, 10)] {
        let b = hilbert_frame_bounds(&g, n, m)?;
        bounds_ok &= (b.a - 3.0).abs() < 1e-9 && (b.b - 3.0).abs() < 1e-9;
    }
    t.check("frame bounds A = B = 3", bounds_ok, "levels (6,2), (30,10)");
    Ok(())
}

fn halving_lp(t: &mut Transcript) -> Result<()> {
    let (g, f) = (halving_pair_g(), halving_pair_f());
    let p = 3.0;
    let spec = SequenceSpaceSpec::new(p)?;
    let q = spec.dual_exponent();
    let opts = ExpandOptions::new(80).with_p(p);
    let e1 = Vector::basis(1, 1)?;

    let primal = primal_expand(&g, &f, &e1, &opts)?;
    let dual = dual_expand(&g, &f, &e1, &opts)?;
    let exact_halving = |trace: &crate::expansion::ExpansionTrace| {
        (1..=40u32).all(|k| trace.residual_at(2 * k as usize) == Some(&pow2_inv(k)))
    };
    t.check("primal residual of ξ1 after K blocks is 2^-K", exact_halving(&primal), "K = 1..40, exact");
    t.check("dual residual of E1 after K blocks is 2^-K", exact_halving(&dual), "K = 1..40, exact");

    let mut prev = 0.0;
    let mut table_ok = true;
    let mut rows = Vec::new();
    for k in 1..=40usize {
        let coefs: Vec<Scalar> = (1..=2 * k).map(|i| f.term(i).map(|fi| fi.get(1))).collect::<Result<_>>()?;
        let norm = pnorm(&Vector::new(coefs)?, &spec.dual())?.to_f64();
        let expected = (k as f64).powf(1.0 / q);
        table_ok &= (norm - expected).abs() <= 1e-12 * expected.max(1.0) && norm > prev;
        prev = norm;
        if k.is_power_of_two() {
            rows.push(format!("K={k}: {norm:.6}"));
        }
    }
    t.check("q-norm of (E1(f_i)) grows like K^(1/q)", table_ok, rows.join(", "));

    let ladder: Vec<(usize, usize)> = (1..=5).map(|k| (2 * k, k + 1)).collect();
    let lower = lower_condition_of_partner(&g, &f, &spec, &ladder)?;
    t.check("F satisfies the lower q-frame condition", lower.lambda >= 1.0 - 1e-6, format!("λ = {:.6}", lower.lambda));

    let b = xd_frame_bounds(&g, &spec, 6, 4, Mode::Oracle)?;
    let a_expected = (1..=3).map(|k| 0.5f64.powf(k as f64 * p)).sum::<f64>().powf(1.0 / p);
    let bracketed = b.a_bracket.0 <= a_expected + 1e-9
        && a_expected <= b.a_bracket.1 + 1e-9
        && b.b_bracket.0 <= 1.0 + 1e-9
        && 1.0 <= b.b_bracket.1 + 1e-9;
    t.check(
        "p-frame bounds of G at (6,4)",
        bracketed,
        format!("A in [{:.6}, {:.6}] (expected {a_expected:.6}), B in [{:.6}, {:.6}]", b.a_bracket.0, b.a_bracket.1, b.b_bracket.0, b.b_bracket.1),
    );
    Ok(())
}

fn halving_hilbert(t: &mut Transcript) -> Result<()> {
    let (g, f) = (halving_pair_g(), halving_pair_f());
    let l2 = SequenceSpaceSpec::l2();

    let mut bounds_ok = true;
    for k in [2usize, 4, 8] {
        let b = hilbert_frame_bounds(&g, 2 * k, k + 1)?;
        let a_expected = (1.0 - 0.25f64.powi(k as i32)) / 3.0;
        bounds_ok &= (b.a - a_expected).abs() < 1e-9 && (b.b - 1.0).abs() < 1e-9;
    }
    t.check("G is a frame with A → 1/3, B = 1", bounds_ok, "levels (4,3), (8,5), (16,9)");

    let e1 = Vector::basis(1, 1)?;
    let primal = primal_expand(&g, &f, &e1, &ExpandOptions::new(40))?;
    let halving = (1..=20u32).all(|k| primal.residual_at(2 * k as usize) == Some(&pow2_inv(k)));
    t.check("residual of ξ1 after K blocks is 2^-K", halving, "K = 1..20, exact");

    let probes = vec![e1, Vector::basis(2, 2)?, Vector::from_ints(&[1, 2, 3])?];
    let report = pseudo_dual_verify(&g, &f, &probes, &ExpandOptions::new(80).with_tol(1e-9))?;
    t.check("F is a synthesis pseudo-dual on probes", report.evidence, "tol 1e-9, N = 80");

    let mut prev = 0.0;
    let mut growing = true;
    for k in [2usize, 4, 8, 16] {
        let smax = svd_summary(&f.materialize(2 * k, k + 1)?).sigma_max;
        growing &= smax > prev + 1e-9;
        prev = smax;
    }
    t.check("F has no Bessel bound", growing, format!("‖U_F‖ at (32,17) = {prev:.4}"));

    let ladder: Vec<(usize, usize)> = (1..=5).map(|k| (2 * k, k + 1)).collect();
    let lower = lower_condition_of_partner(&g, &f, &l2, &ladder)?;
    t.check("F satisfies the lower frame condition", lower.lambda >= 1.0 - 1e-9, format!("λ = {:.6}", lower.lambda));
    Ok(())
}

fn repeated(t: &mut Transcript, rng: &mut ChaCha8Rng) -> Result<()> {
    let fs = repeated_first();
    let ladder = [(11, 10), (21, 20), (41, 40)];
    let fam = complement_dimension(&fs, &ladder)?;
    let dims: Vec<String> = fam.levels.iter().map(|(l, d)| format!("{l:?}: {d}")).collect();
    t.check("complement dimension stabilizes at 1", fam.complement_dim == Some(1), dims.join(", "));

    let mut min_a = f64::INFINITY;
    for _ in 0..20 {
        for &(n, m) in &ladder {
            let w = random_bounded(rng, m, 10.0);
            let param = dual_parametrization(&fs, n, m)?;
            let dual = sample_dual(&param, &first_pair_perturbation(&w, n)?)?;
            min_a = min_a.min(hilbert_frame_bounds(&dual, n, m)?.a);
        }
    }
    t.check("pseudo-duals (w, e1 - w, e2, ...) are frames", min_a > 0.01, format!("min A = {min_a:.4}"));

    let infeasible = matches!(find_transform(&fs, &canonical_basis(), 11, 10), Err(FrameError::TransformInfeasible { .. }));
    t.check("not an operator image of the basis", infeasible, "V g_i = e_i has no solution");
    Ok(())
}

/// Random vector with norm at most `radius`.
pub fn random_bounded(rng: &mut impl Rng, dim: usize, radius: f64) -> Vector {
    let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let scale = radius * rng.random_range(0.0..1.0) / norm;
    Vector::from_f64(&raw.iter().map(|x| x * scale).collect::<Vec<_>>()).expect("dim ≥ 1")
}

fn neighbours(t: &mut Transcript) -> Result<()> {
    let fs = neighbour_sums();
    let mut values = Vec::new();
    let mut matches_formula = true;
    for n in [4usize, 8, 16, 32] {
        let a = hilbert_frame_bounds(&fs, n, n + 1)?.a;
        let expected = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        matches_formula &= (a - expected).abs() < 1e-9;
        values.push(a);
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let table: Vec<String> = values.iter().map(|a| format!("{a:.6}")).collect();
    t.check("lower bound decreases along the ladder", decreasing && values[3] < values[0] / 4.0, table.join(", "));
    t.check("lower bound equals 2 - 2cos(π/(n+1))", matches_formula, "n = 4, 8, 16, 32");
    Ok(())
}

fn companion(t: &mut Transcript) -> Result<()> {
    let n = 20;
    let c = bessel_companion(&linear_basis(), n, n)?;
    let expected = reciprocal_basis().materialize(n, n)?;
    let FrameSystem::Dense(g) = &c.system else {
        return Err(FrameError::InvariantViolation("companion is not dense".into()));
    };
    t.check("companion of (i e_i) is ((1/i) e_i)", g == &expected, "n = 20, exact");

    let f = linear_basis();
    let mut exact = true;
    for k in 1..=n {
        let probe = Vector::basis(n, k)?;
        let coefs = crate::frame::analysis(&c.system, &probe, n)?;
        let back = synthesis(&f, &coefs, n)?;
        exact &= back == probe;
    }
    t.check("Σ⟨f, g_i⟩ f_i = f on basis probes", exact, "exact");
    t.check(
        "Bessel bound is 1/σ_min",
        (c.bessel_bound - 1.0).abs() < 1e-12 && c.reconstruction_residual == 0.0,
        format!("bound {:.6}", c.bessel_bound),
    );
    Ok(())
}
