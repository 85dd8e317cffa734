//! Named example systems.

use std::collections::BTreeMap;

use crate::error::{FrameError, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::sequences::{Coefficient, FrameSystem, SequenceGenerator, TermSpec};

#[derive(Clone, Debug)]
pub struct BuiltinExample {
    pub name: &'static str,
    pub description: &'static str,
    pub system: FrameSystem,
    /// Name of the companion sequence in an expansion pair, if any.
    pub partner: Option<&'static str>,
    /// Known shape of every synthesis pseudo-dual, when there is one.
    pub pseudo_dual_structure: Option<&'static str>,
}

#[derive(Clone, Debug)]
pub struct BuiltinRegistry {
    entries: BTreeMap<&'static str, BuiltinExample>,
}

impl BuiltinRegistry {
    pub fn get(&self, name: &str) -> Result<&BuiltinExample> {
        self.entries
            .get(name)
            .ok_or_else(|| FrameError::UnknownExample(name.to_string()))
    }

    pub fn system(&self, name: &str) -> Result<FrameSystem> {
        if let Some(n) = name.strip_prefix("identity-") {
            if let Ok(n) = n.parse::<usize>() {
                if n >= 1 {
                    return Ok(FrameSystem::Dense(Matrix::identity(n)?));
                }
            }
        }
        self.get(name).map(|e| e.system.clone())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BuiltinExample> {
        self.entries.values()
    }
}

fn periodic(block: Vec<Vec<TermSpec>>) -> FrameSystem {
    FrameSystem::Generated(SequenceGenerator::periodic(block).expect("builtin generator"))
}

/// `(½e₁, e₂, ¼e₁, e₃, ⅛e₁, e₄, …)`
pub fn halving_pair_g() -> FrameSystem {
    let halving = Coefficient::Geometric { r: Scalar::one(), s: Scalar::ratio(1, 2), growing: false };
    periodic(vec![vec![TermSpec::fixed(1, halving)], vec![TermSpec::unit_rel(1)]])
}

/// `(e₁, e₂, e₁, e₃, e₁, e₄, …)`
pub fn halving_pair_f() -> FrameSystem {
    periodic(vec![vec![TermSpec::unit_fixed(1)], vec![TermSpec::unit_rel(1)]])
}

/// `(e₁, e₁, e₁, e₂, e₂, e₂, …)`
pub fn tripled_basis() -> FrameSystem {
    periodic(vec![vec![TermSpec::unit_rel(0)]; 3])
}

/// `(e₁, e₁, −e₁, e₂, e₁, −e₁, e₃, e₁, −e₁, …)`
pub fn tripled_partner() -> FrameSystem {
    periodic(vec![
        vec![TermSpec::unit_rel(0)],
        vec![TermSpec::unit_fixed(1)],
        vec![TermSpec::fixed(1, Coefficient::Constant(Scalar::int(-1)))],
    ])
}

/// `(e₁, e₁, e₂, e₃, …)`
pub fn repeated_first() -> FrameSystem {
    FrameSystem::Generated(
        SequenceGenerator::new(vec![vec![TermSpec::unit_fixed(1)]], vec![vec![TermSpec::unit_rel(0)]], 1)
            .expect("builtin generator"),
    )
}

/// `(e₁, e₂, e₃, …)`
pub fn canonical_basis() -> FrameSystem {
    periodic(vec![vec![TermSpec::unit_rel(0)]])
}

/// `(e_i + e_{i+1})_i`
pub fn neighbour_sums() -> FrameSystem {
    periodic(vec![vec![TermSpec::unit_rel(0), TermSpec::unit_rel(1)]])
}

/// `((1/i) e_i)_i`
pub fn reciprocal_basis() -> FrameSystem {
    periodic(vec![vec![TermSpec::rel(0, Coefficient::Reciprocal(Scalar::one()))]])
}

/// `(i e_i)_i`
pub fn linear_basis() -> FrameSystem {
    periodic(vec![vec![TermSpec::rel(0, Coefficient::Linear(Scalar::one()))]])
}

/// `{(1,0), (0,1), (1,1)}` in ℝ².
pub fn three_vectors() -> FrameSystem {
    FrameSystem::Dense(Matrix::from_int_rows(&[&[1, 0], &[0, 1], &[1, 1]]).expect("static matrix"))
}

impl Default for BuiltinRegistry {
    fn default() -> Self {
        let list = [
            BuiltinExample {
                name: "intro-G",
                description: "Hilbert frame (½e₁, e₂, ¼e₁, e₃, …)",
                system: halving_pair_g(),
                partner: Some("intro-F"),
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "intro-F",
                description: "non-frame expansion partner (e₁, e₂, e₁, e₃, …)",
                system: halving_pair_f(),
                partner: Some("intro-G"),
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "ex-3.3-G",
                description: "p-frame of coefficient functionals (½E₁, E₂, ¼E₁, E₃, …) for ℓ^p",
                system: halving_pair_g(),
                partner: Some("ex-3.3-F"),
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "ex-3.3-F",
                description: "(ξ₁, ξ₂, ξ₁, ξ₃, …): lower q-frame condition without the upper one",
                system: halving_pair_f(),
                partner: Some("ex-3.3-G"),
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "ex-3.6-G",
                description: "tripled basis (e₁, e₁, e₁, e₂, e₂, e₂, …)",
                system: tripled_basis(),
                partner: Some("ex-3.6-F"),
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "ex-3.6-F",
                description: "non-Bessel pseudo-dual (e₁, e₁, −e₁, e₂, e₁, −e₁, …)",
                system: tripled_partner(),
                partner: Some("ex-3.6-G"),
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "e1-repeated",
                description: "(e₁, e₁, e₂, e₃, …): one-dimensional R(U)^⊥",
                system: repeated_first(),
                partner: None,
                pseudo_dual_structure: Some("(w, e1 - w, e2, e3, ...), w free"),
            },
            BuiltinExample {
                name: "canonical-basis",
                description: "orthonormal basis (e₁, e₂, e₃, …)",
                system: canonical_basis(),
                partner: Some("canonical-basis"),
                pseudo_dual_structure: Some("(e1, e2, e3, ...), unique"),
            },
            BuiltinExample {
                name: "no-dual-frame",
                description: "(e_i + e_{i+1}): Hilbert lower bound decays along truncations",
                system: neighbour_sums(),
                partner: None,
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "reciprocal",
                description: "Bessel sequence ((1/i) e_i)",
                system: reciprocal_basis(),
                partner: Some("linear"),
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "linear",
                description: "(i e_i): lower frame condition only",
                system: linear_basis(),
                partner: Some("reciprocal"),
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "three-vectors",
                description: "frame {(1,0), (0,1), (1,1)} for ℝ²",
                system: three_vectors(),
                partner: None,
                pseudo_dual_structure: None,
            },
            BuiltinExample {
                name: "identity-4",
                description: "orthonormal basis of ℝ⁴",
                system: FrameSystem::Dense(Matrix::identity(4).expect("static")),
                partner: Some("identity-4"),
                pseudo_dual_structure: None,
            },
        ];
        BuiltinRegistry { entries: list.into_iter().map(|e| (e.name, e)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::SparseVec;

    fn e(k: usize) -> SparseVec {
        SparseVec::unit(k)
    }

    fn ce(c: Scalar, k: usize) -> SparseVec {
        SparseVec::from_pairs([(k, c)])
    }

    fn first_six(name: &str) -> Vec<SparseVec> {
        let fs = BuiltinRegistry::default().system(name).unwrap();
        (1..=6).map(|i| fs.term(i).unwrap()).collect()
    }

    #[test]
    fn lookups() {
        let r = BuiltinRegistry::default();
        assert!(r.get("nope").is_err());
        assert!(r.system("identity-7").is_ok());
        assert!(r.system("identity-0").is_err());
        assert!(r.names().count() >= 6);
    }

    #[test]
    fn halving_pair_entries() {
        let half = |k: i64| Scalar::ratio(1, 1 << k);
        let expected_g = vec![ce(half(1), 1), e(2), ce(half(2), 1), e(3), ce(half(3), 1), e(4)];
        assert_eq!(first_six("intro-G"), expected_g);
        assert_eq!(first_six("ex-3.3-G"), expected_g);
        let expected_f = vec![e(1), e(2), e(1), e(3), e(1), e(4)];
        assert_eq!(first_six("intro-F"), expected_f);
        assert_eq!(first_six("ex-3.3-F"), expected_f);
        assert_eq!(
            BuiltinRegistry::default().system("ex-3.3-G").unwrap().term(3).unwrap(),
            ce(Scalar::ratio(1, 4), 1)
        );
    }

    #[test]
    fn tripled_entries() {
        assert_eq!(first_six("ex-3.6-G"), vec![e(1), e(1), e(1), e(2), e(2), e(2)]);
        let neg = ce(Scalar::int(-1), 1);
        assert_eq!(first_six("ex-3.6-F"), vec![e(1), e(1), neg.clone(), e(2), e(1), neg]);
    }

    #[test]
    fn remaining_entries() {
        assert_eq!(first_six("e1-repeated"), vec![e(1), e(1), e(2), e(3), e(4), e(5)]);
        assert_eq!(first_six("canonical-basis"), (1..=6).map(e).collect::<Vec<_>>());
        let sums: Vec<SparseVec> = (1..=6)
            .map(|i| SparseVec::from_pairs([(i, Scalar::one()), (i + 1, Scalar::one())]))
            .collect();
        assert_eq!(first_six("no-dual-frame"), sums);
        let recip: Vec<SparseVec> = (1..=6).map(|i| ce(Scalar::ratio(1, i as i64), i)).collect();
        assert_eq!(first_six("reciprocal"), recip);
        let lin: Vec<SparseVec> = (1..=6).map(|i| ce(Scalar::int(i as i64), i)).collect();
        assert_eq!(first_six("linear"), lin);
    }

    #[test]
    fn aligned_levels_follow_block_layout() {
        let r = BuiltinRegistry::default();
        assert_eq!(r.system("ex-3.6-G").unwrap().aligned_level(4), (12, 4));
        assert_eq!(r.system("intro-G").unwrap().aligned_level(4), (8, 5));
        assert_eq!(r.system("e1-repeated").unwrap().aligned_level(10), (11, 10));
        assert_eq!(r.system("no-dual-frame").unwrap().aligned_level(8), (8, 9));
        assert_eq!(r.system("three-vectors").unwrap().aligned_level(8), (3, 2));
    }

    #[test]
    fn materialized_sections() {
        let r = BuiltinRegistry::default();
        let g = r.system("ex-3.6-G").unwrap().materialize(6, 2).unwrap();
        assert_eq!(g, Matrix::from_int_rows(&[&[1, 0], &[1, 0], &[1, 0], &[0, 1], &[0, 1], &[0, 1]]).unwrap());
        let intro = r.system("intro-G").unwrap().materialize(4, 3).unwrap();
        let h = |n, d| Scalar::ratio(n, d);
        let z = Scalar::zero;
        let expected = Matrix::from_rows(vec![
            vec![h(1, 2), z(), z()],
            vec![z(), Scalar::one(), z()],
            vec![h(1, 4), z(), z()],
            vec![z(), z(), Scalar::one()],
        ])
        .unwrap();
        assert_eq!(intro, expected);
    }
}
