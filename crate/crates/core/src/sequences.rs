//! Eventually periodic sequences over an orthonormal basis, and the
//! [`FrameSystem`] wrapper that turns them (or a dense matrix) into finite
//! sections.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::{pnorm, Matrix, SequenceSpaceSpec, Vector};
use crate::scalar::Scalar;

/// Finitely supported vector with 1-based coordinates. Zero entries are never
/// stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVec(BTreeMap<usize, Scalar>);

impl SparseVec {
    pub fn new() -> Self {
        SparseVec(BTreeMap::new())
    }

    pub fn unit(k: usize) -> Self {
        let mut v = Self::new();
        v.add_at(k, Scalar::one());
        v
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Scalar)>) -> Self {
        let mut v = Self::new();
        for (k, x) in pairs {
            v.add_at(k, x);
        }
        v
    }

    pub fn from_vector(v: &Vector) -> Self {
        Self::from_pairs(v.coords().iter().cloned().enumerate().map(|(i, x)| (i + 1, x)))
    }

    pub fn get(&self, k: usize) -> Scalar {
        self.0.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.0.iter().map(|(k, x)| (*k, x))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.0.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_exact(&self) -> bool {
        self.0.values().all(Scalar::is_exact)
    }

    pub fn add_at(&mut self, k: usize, x: Scalar) {
        debug_assert!(k >= 1, "coordinates are 1-based");
        let sum = self.get(k) + x;
        if sum.is_zero() {
            self.0.remove(&k);
        } else {
            self.0.insert(k, sum);
        }
    }

    /// `self += c · other`
    pub fn axpy(&mut self, c: &Scalar, other: &SparseVec) {
        if c.is_zero() {
            return;
        }
        for (k, x) in other.iter() {
            self.add_at(k, c * x);
        }
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.axpy(&Scalar::int(-1), other);
        out
    }

    pub fn dot(&self, other: &SparseVec) -> Scalar {
        let (small, large) = if self.0.len() <= other.0.len() { (self, other) } else { (other, self) };
        small
            .iter()
            .filter_map(|(k, x)| large.0.get(&k).map(|y| x * y))
            .sum()
    }

    /// Restriction to coordinates `1..=dim` as a dense vector.
    pub fn to_dense(&self, dim: usize) -> Result<Vector> {
        let mut coords = vec![Scalar::zero(); dim];
        for (k, x) in self.iter().take_while(|(k, _)| *k <= dim) {
            coords[k - 1] = x.clone();
        }
        Vector::new(coords)
    }

    /// Norm in the given sequence space. The zero vector has exact norm 0.
    pub fn norm(&self, spec: &SequenceSpaceSpec) -> Result<Scalar> {
        if self.is_zero() {
            return Ok(Scalar::zero());
        }
        self.to_dense(self.max_index()).and_then(|v| pnorm(&v, spec))
    }
}

impl fmt::Display for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (k, x)) in self.iter().enumerate() {
            let sep = if n == 0 { "" } else { " + " };
            if *x == Scalar::one() {
                write!(f, "{sep}e{k}")?;
            } else {
                write!(f, "{sep}({x})e{k}")?;
            }
        }
        Ok(())
    }
}

/// Basis index of a term: a fixed `e_j`, or `e_{k+c}` relative to the block
/// counter `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisIndex {
    Fixed(usize),
    Relative(i64),
}

impl BasisIndex {
    fn eval(&self, k: u64) -> Result<usize> {
        match *self {
            BasisIndex::Fixed(j) => Ok(j),
            BasisIndex::Relative(c) => {
                let j = k as i64 + c;
                usize::try_from(j)
                    .ok()
                    .filter(|&j| j >= 1)
                    .ok_or_else(|| FrameError::InvalidTerm(format!("index k{c:+} is not positive at k = {k}")))
            }
        }
    }
}

/// Coefficient of a term as a function of the block counter `k`.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Constant(Scalar),
    /// `r · s^k`; `growing` must be set when `|s| ≥ 1`.
    Geometric { r: Scalar, s: Scalar, growing: bool },
    /// `r / k`
    Reciprocal(Scalar),
    /// `r · k`
    Linear(Scalar),
}

impl Coefficient {
    pub fn eval(&self, k: u64) -> Scalar {
        match self {
            Coefficient::Constant(r) => r.clone(),
            Coefficient::Geometric { r, s, .. } => r * &s.powi(k as u32),
            Coefficient::Reciprocal(r) => r / &Scalar::int(k as i64),
            Coefficient::Linear(r) => r * &Scalar::int(k as i64),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Coefficient::Geometric { s, growing, .. } = self {
            let shrinking = match s {
                Scalar::Exact(r) => r.abs() < num_rational::BigRational::from_integer(1.into()),
                Scalar::Float(x) => x.abs() < 1.0,
            };
            if !shrinking && !growing {
                return Err(FrameError::InvalidTerm(format!(
                    "geometric ratio {s} has |s| >= 1 and is not flagged growing"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermSpec {
    pub index: BasisIndex,
    pub coef: Coefficient,
}

impl TermSpec {
    pub fn fixed(j: usize, coef: Coefficient) -> Self {
        TermSpec { index: BasisIndex::Fixed(j), coef }
    }

    pub fn rel(c: i64, coef: Coefficient) -> Self {
        TermSpec { index: BasisIndex::Relative(c), coef }
    }

    /// `e_{k+c}` with coefficient one.
    pub fn unit_rel(c: i64) -> Self {
        Self::rel(c, Coefficient::Constant(Scalar::one()))
    }

    pub fn unit_fixed(j: usize) -> Self {
        Self::fixed(j, Coefficient::Constant(Scalar::one()))
    }
}

/// One sequence element: a sum of terms (usually a single one).
pub type Element = Vec<TermSpec>;

/// `prefix` elements, then `block` repeated for `k = k0, k0 + 1, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceGenerator {
    prefix: Vec<Element>,
    block: Vec<Element>,
    k0: u64,
}

impl SequenceGenerator {
    pub fn new(prefix: Vec<Element>, block: Vec<Element>, k0: u64) -> Result<Self> {
        if block.is_empty() {
            return Err(FrameError::InvalidTerm("block must be nonempty".into()));
        }
        for term in prefix.iter().flatten() {
            match term.index {
                BasisIndex::Fixed(0) => return Err(FrameError::InvalidTerm("basis indices start at 1".into())),
                BasisIndex::Relative(_) => {
                    return Err(FrameError::InvalidTerm("prefix terms need absolute indices".into()))
                }
                BasisIndex::Fixed(_) => {}
            }
            term.coef.validate()?;
        }
        for term in block.iter().flatten() {
            if term.index == BasisIndex::Fixed(0) {
                return Err(FrameError::InvalidTerm("basis indices start at 1".into()));
            }
            term.index.eval(k0)?;
            if matches!(term.coef, Coefficient::Reciprocal(_)) && k0 == 0 {
                return Err(FrameError::InvalidTerm("reciprocal coefficient needs k0 >= 1".into()));
            }
            term.coef.validate()?;
        }
        Ok(SequenceGenerator { prefix, block, k0 })
    }

    /// Purely periodic generator with `k0 = 1`.
    pub fn periodic(block: Vec<Element>) -> Result<Self> {
        Self::new(Vec::new(), block, 1)
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn block_len(&self) -> usize {
        self.block.len()
    }

    pub fn k0(&self) -> u64 {
        self.k0
    }

    pub fn prefix(&self) -> &[Element] {
        &self.prefix
    }

    pub fn block(&self) -> &[Element] {
        &self.block
    }

    /// The `i`-th element (1-based). Prefix coefficients are evaluated at
    /// `k = i`.
    pub fn term(&self, i: usize) -> SparseVec {
        assert!(i >= 1, "sequence elements are 1-based");
        let (element, k) = if i <= self.prefix.len() {
            (&self.prefix[i - 1], i as u64)
        } else {
            let j = i - self.prefix.len() - 1;
            (&self.block[j % self.block.len()], self.k0 + (j / self.block.len()) as u64)
        };
        let mut v = SparseVec::new();
        for t in element {
            // Validated at construction: indices are positive for all k ≥ k0.
            let idx = t.index.eval(k).expect("validated basis index");
            v.add_at(idx, t.coef.eval(k));
        }
        v
    }

    fn max_fixed_index(&self) -> usize {
        self.prefix
            .iter()
            .chain(&self.block)
            .flatten()
            .filter_map(|t| match t.index {
                BasisIndex::Fixed(j) => Some(j),
                BasisIndex::Relative(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn max_shift(&self) -> Option<i64> {
        self.block
            .iter()
            .flatten()
            .filter_map(|t| match t.index {
                BasisIndex::Relative(c) => Some(c),
                BasisIndex::Fixed(_) => None,
            })
            .max()
    }

    /// Truncation level covering the prefix and `blocks` full blocks:
    /// `n = prefix + blocks · block_len`, `m` = largest basis index reached.
    pub fn aligned_level(&self, blocks: usize) -> (usize, usize) {
        let n = self.prefix.len() + blocks * self.block.len();
        let last_k = self.k0 as i64 + blocks as i64 - 1;
        let rel = self.max_shift().map_or(0, |c| (last_k + c).max(0) as usize);
        let m = rel.max(self.max_fixed_index()).max(1);
        (n.max(1), m)
    }
}

/// A family `(g_i)`: either an explicit finite list (matrix rows) or an
/// infinite generator.
#[derive(Clone, Debug, PartialEq)]
pub enum FrameSystem {
    Dense(Matrix),
    Generated(SequenceGenerator),
}

impl FrameSystem {
    pub fn dense(m: Matrix) -> Self {
        FrameSystem::Dense(m)
    }

    /// `None` means infinite.
    pub fn ambient_dim(&self) -> Option<usize> {
        match self {
            FrameSystem::Dense(m) => Some(m.cols()),
            FrameSystem::Generated(_) => None,
        }
    }

    /// Number of elements; `None` means infinite.
    pub fn len(&self) -> Option<usize> {
        match self {
            FrameSystem::Dense(m) => Some(m.rows()),
            FrameSystem::Generated(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn term(&self, i: usize) -> Result<SparseVec> {
        match self {
            FrameSystem::Generated(g) => {
                if i == 0 {
                    return Err(FrameError::DimensionMismatch { expected: 1, got: 0 });
                }
                Ok(g.term(i))
            }
            FrameSystem::Dense(m) => {
                if i == 0 || i > m.rows() {
                    return Err(FrameError::DimensionMismatch { expected: m.rows(), got: i });
                }
                Ok(SparseVec::from_vector(&m.row(i - 1)))
            }
        }
    }

    /// Rows `1..=n_terms` restricted to coordinates `1..=m_dims`.
    pub fn materialize(&self, n_terms: usize, m_dims: usize) -> Result<Matrix> {
        if n_terms == 0 || m_dims == 0 {
            return Err(FrameError::EmptyMatrix);
        }
        match self {
            FrameSystem::Dense(m) => {
                if m.rows() != n_terms || m.cols() != m_dims {
                    return Err(FrameError::TruncationOfDense {
                        rows: m.rows(),
                        cols: m.cols(),
                        n: n_terms,
                        m: m_dims,
                    });
                }
                Ok(m.clone())
            }
            FrameSystem::Generated(g) => {
                let mut out = Matrix::zeros(n_terms, m_dims)?;
                for i in 1..=n_terms {
                    for (k, x) in g.term(i).iter().take_while(|(k, _)| *k <= m_dims) {
                        out.set(i - 1, k - 1, x.clone());
                    }
                }
                Ok(out)
            }
        }
    }

    /// Aligned truncation level with `blocks` full blocks; dense systems
    /// always report their own size.
    pub fn aligned_level(&self, blocks: usize) -> (usize, usize) {
        match self {
            FrameSystem::Dense(m) => (m.rows(), m.cols()),
            FrameSystem::Generated(g) => g.aligned_level(blocks),
        }
    }

    /// `(prefix length, period)` of block boundaries, if the system has blocks.
    pub fn block_structure(&self) -> Option<(usize, usize)> {
        match self {
            FrameSystem::Dense(_) => None,
            FrameSystem::Generated(g) => Some((g.prefix_len(), g.block_len())),
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            FrameSystem::Dense(m) => m.is_exact(),
            FrameSystem::Generated(g) => g
                .prefix()
                .iter()
                .chain(g.block())
                .flatten()
                .all(|t| match &t.coef {
                    Coefficient::Constant(r) | Coefficient::Reciprocal(r) | Coefficient::Linear(r) => r.is_exact(),
                    Coefficient::Geometric { r, s, .. } => r.is_exact() && s.is_exact(),
                }),
        }
    }
}

/// Levels `(n, m)` must increase strictly in both coordinates.
pub fn validate_ladder(ladder: &[(usize, usize)]) -> Result<()> {
    for w in ladder.windows(2) {
        if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
            return Err(FrameError::InvalidSpec(format!(
                "ladder must increase strictly in both coordinates: {:?} then {:?}",
                w[0], w[1]
            )));
        }
    }
    if ladder.iter().any(|&(n, m)| n == 0 || m == 0) {
        return Err(FrameError::InvalidSpec("ladder levels must be positive".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Frame-definition files.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
enum FileRepr {
    #[serde(rename = "dense")]
    Dense(Matrix),
    #[serde(rename = "generator")]
    Generator(GeneratorRepr),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRepr {
    #[serde(default)]
    prefix: Vec<ElementRepr>,
    block: Vec<ElementRepr>,
    #[serde(default = "default_k0")]
    k0: u64,
}

fn default_k0() -> u64 {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ElementRepr {
    Single(TermRepr),
    Sum(Vec<TermRepr>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    index: IndexRepr,
    coef: CoefRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IndexRepr {
    Fixed(usize),
    Rel { rel: i64 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefRepr {
    kind: String,
    r: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<Scalar>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    growing: bool,
}

impl TryFrom<TermRepr> for TermSpec {
    type Error = FrameError;

    fn try_from(t: TermRepr) -> Result<Self> {
        let index = match t.index {
            IndexRepr::Fixed(j) => BasisIndex::Fixed(j),
            IndexRepr::Rel { rel } => BasisIndex::Relative(rel),
        };
        let c = t.coef;
        let coef = match c.kind.as_str() {
            "constant" => Coefficient::Constant(c.r),
            "geometric" => Coefficient::Geometric {
                r: c.r,
                s: c.s.ok_or_else(|| FrameError::InvalidTerm("geometric coefficient needs `s`".into()))?,
                growing: c.growing,
            },
            "reciprocal" => Coefficient::Reciprocal(c.r),
            "linear" => Coefficient::Linear(c.r),
            other => return Err(FrameError::InvalidTerm(format!("unknown coefficient kind `{other}`"))),
        };
        Ok(TermSpec { index, coef })
    }
}

impl From<&TermSpec> for TermRepr {
    fn from(t: &TermSpec) -> Self {
        let index = match t.index {
            BasisIndex::Fixed(j) => IndexRepr::Fixed(j),
            BasisIndex::Relative(rel) => IndexRepr::Rel { rel },
        };
        let (kind, r, s, growing) = match &t.coef {
            Coefficient::Constant(r) => ("constant", r.clone(), None, false),
            Coefficient::Geometric { r, s, growing } => ("geometric", r.clone(), Some(s.clone()), *growing),
            Coefficient::Reciprocal(r) => ("reciprocal", r.clone(), None, false),
            Coefficient::Linear(r) => ("linear", r.clone(), None, false),
        };
        TermRepr { index, coef: CoefRepr { kind: kind.into(), r, s, growing } }
    }
}

fn element_from_repr(e: ElementRepr) -> Result<Element> {
    match e {
        ElementRepr::Single(t) => Ok(vec![t.try_into()?]),
        ElementRepr::Sum(ts) => ts.into_iter().map(TermSpec::try_from).collect(),
    }
}

fn element_to_repr(e: &Element) -> ElementRepr {
    if e.len() == 1 {
        ElementRepr::Single((&e[0]).into())
    } else {
        ElementRepr::Sum(e.iter().map(TermRepr::from).collect())
    }
}

/// Parses a frame-definition document. JSON syntax errors carry line and
/// column; semantic errors (bad terms) are reported as [`FrameError::InvalidTerm`].
pub fn parse_frame(text: &str) -> Result<FrameSystem> {
    let repr: FileRepr = serde_json::from_str(text).map_err(|e| FrameError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match repr {
        FileRepr::Dense(m) => Ok(FrameSystem::Dense(m)),
        FileRepr::Generator(g) => {
            let prefix = g.prefix.into_iter().map(element_from_repr).collect::<Result<_>>()?;
            let block = g.block.into_iter().map(element_from_repr).collect::<Result<_>>()?;
            Ok(FrameSystem::Generated(SequenceGenerator::new(prefix, block, g.k0)?))
        }
    }
}

pub fn load_frame(path: &std::path::Path) -> Result<FrameSystem> {
    parse_frame(&std::fs::read_to_string(path)?)
}

pub fn frame_to_json(fs: &FrameSystem) -> String {
    let repr = match fs {
        FrameSystem::Dense(m) => FileRepr::Dense(m.clone()),
        FrameSystem::Generated(g) => FileRepr::Generator(GeneratorRepr {
            prefix: g.prefix().iter().map(element_to_repr).collect(),
            block: g.block().iter().map(element_to_repr).collect(),
            k0: g.k0(),
        }),
    };
    serde_json::to_string_pretty(&repr).expect("serializable")
}

impl serde::Serialize for FrameSystem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let value: serde_json::Value =
            serde_json::from_str(&frame_to_json(self)).map_err(serde::ser::Error::custom)?;
        value.serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_pow_e1() -> TermSpec {
        TermSpec::fixed(
            1,
            Coefficient::Geometric { r: Scalar::one(), s: Scalar::ratio(1, 2), growing: false },
        )
    }

    #[test]
    fn geometric_prefix_block() {
        let g = SequenceGenerator::periodic(vec![vec![half_pow_e1()], vec![TermSpec::unit_rel(1)]]).unwrap();
        assert_eq!(g.term(1), SparseVec::from_pairs([(1, Scalar::ratio(1, 2))]));
        assert_eq!(g.term(2), SparseVec::unit(2));
        assert_eq!(g.term(3), SparseVec::from_pairs([(1, Scalar::ratio(1, 4))]));
        assert_eq!(g.term(4), SparseVec::unit(3));
        assert_eq!(g.aligned_level(2), (4, 3));
    }

    #[test]
    fn invalid_generators_are_rejected() {
        assert!(SequenceGenerator::periodic(vec![]).is_err());
        assert!(SequenceGenerator::new(vec![], vec![vec![TermSpec::unit_rel(-1)]], 1).is_err());
        assert!(SequenceGenerator::new(vec![vec![TermSpec::unit_rel(0)]], vec![vec![TermSpec::unit_rel(0)]], 1).is_err());
        let growing = TermSpec::fixed(1, Coefficient::Geometric { r: Scalar::one(), s: Scalar::int(2), growing: false });
        assert!(SequenceGenerator::periodic(vec![vec![growing.clone()]]).is_err());
        let flagged = TermSpec::fixed(1, Coefficient::Geometric { r: Scalar::one(), s: Scalar::int(2), growing: true });
        assert!(SequenceGenerator::periodic(vec![vec![flagged]]).is_ok());
        let recip = TermSpec::rel(1, Coefficient::Reciprocal(Scalar::one()));
        assert!(SequenceGenerator::new(vec![], vec![vec![recip]], 0).is_err());
    }

    #[test]
    fn reciprocal_and_linear_coefficients() {
        let recip = SequenceGenerator::periodic(vec![vec![TermSpec::rel(0, Coefficient::Reciprocal(Scalar::one()))]]).unwrap();
        assert_eq!(recip.term(4), SparseVec::from_pairs([(4, Scalar::ratio(1, 4))]));
        let lin = SequenceGenerator::periodic(vec![vec![TermSpec::rel(0, Coefficient::Linear(Scalar::int(3)))]]).unwrap();
        assert_eq!(lin.term(5), SparseVec::from_pairs([(5, Scalar::int(15))]));
    }

    #[test]
    fn dense_truncation_must_match() {
        let fs = FrameSystem::Dense(Matrix::identity(3).unwrap());
        assert!(fs.materialize(3, 3).is_ok());
        assert!(matches!(fs.materialize(2, 3), Err(FrameError::TruncationOfDense { .. })));
        assert!(fs.term(4).is_err());
    }

    #[test]
    fn canonical_basis_corner() {
        let fs = FrameSystem::Generated(SequenceGenerator::periodic(vec![vec![TermSpec::unit_rel(0)]]).unwrap());
        assert_eq!(fs.materialize(1, 1).unwrap(), Matrix::identity(1).unwrap());
    }

    #[test]
    fn sparse_arithmetic() {
        let mut v = SparseVec::unit(1);
        v.axpy(&Scalar::int(-1), &SparseVec::unit(1));
        assert!(v.is_zero());
        assert_eq!(v.norm(&SequenceSpaceSpec::l2()).unwrap(), Scalar::zero());
        let a = SparseVec::from_pairs([(1, Scalar::int(3)), (7, Scalar::int(4))]);
        assert_eq!(a.norm(&SequenceSpaceSpec::l2()).unwrap(), Scalar::int(5));
        assert_eq!(a.dot(&SparseVec::unit(7)), Scalar::int(4));
        assert_eq!(a.to_string(), "(3)e1 + (4)e7");
    }

    #[test]
    fn parse_generator_file() {
        let text = r#"{"generator": {
            "prefix": [{"index": 1, "coef": {"kind": "constant", "r": "1/1"}}],
            "block": [
                {"index": {"rel": 0}, "coef": {"kind": "constant", "r": "1"}},
                [{"index": {"rel": 0}, "coef": {"kind": "constant", "r": "1"}},
                 {"index": {"rel": 1}, "coef": {"kind": "geometric", "r": "2", "s": "1/3"}}]
            ],
            "k0": 1}}"#;
        let fs = parse_frame(text).unwrap();
        assert_eq!(fs.term(1).unwrap(), SparseVec::unit(1));
        assert_eq!(fs.term(2).unwrap(), SparseVec::unit(1));
        assert_eq!(
            fs.term(3).unwrap(),
            SparseVec::from_pairs([(1, Scalar::one()), (2, Scalar::ratio(2, 3))])
        );
        let again = parse_frame(&frame_to_json(&fs)).unwrap();
        assert_eq!(again, fs);
    }

    #[test]
    fn parse_dense_file_and_errors() {
        let fs = parse_frame(r#"{"dense": [[1, "1/2"], [0, 0.5]]}"#).unwrap();
        let m = fs.materialize(2, 2).unwrap();
        assert_eq!(*m.get(0, 1), Scalar::ratio(1, 2));
        assert!(!m.get(1, 1).is_exact());

        match parse_frame("{\"dense\": [[1, 2],\n [3, ]]}") {
            Err(FrameError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_frame(r#"{"dense": [[1], [1, 2]]}"#), Err(FrameError::Parse { .. })));
        assert!(matches!(
            parse_frame(r#"{"generator": {"block": [{"index": 1, "coef": {"kind": "cubic", "r": "1"}}]}}"#),
            Err(FrameError::InvalidTerm(_))
        ));
    }

    #[test]
    fn ladder_validation() {
        assert!(validate_ladder(&[(6, 2), (30, 10)]).is_ok());
        assert!(validate_ladder(&[(6, 2), (30, 2)]).is_err());
        assert!(validate_ladder(&[(0, 2)]).is_err());
    }
}
