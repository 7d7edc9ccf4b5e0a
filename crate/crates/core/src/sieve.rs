//! Additive sieve bases `phi(z)`: one univariate block per characteristic,
//! stacked, with an optional global intercept in front.
//!
//! Polynomial blocks are `(z, z^2, ..., z^d)` without a constant. Spline
//! blocks are B-splines of order 2 (linear) or 4 (cubic) on a boundary
//! interval with the given internal knots; when the global intercept is on,
//! the first B-spline of every block is dropped because the block would
//! otherwise sum to one and duplicate the intercept. Inputs outside the
//! boundary interval are clamped to it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::panel::{CrossSection, Panel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SieveError {
    #[error("polynomial degree must be at least 1")]
    InvalidDegree,
    #[error("knots must be finite and strictly increasing")]
    KnotsNotIncreasing,
    #[error("knot {knot} lies outside the boundary [{lo}, {hi}]")]
    KnotOutsideBoundary { knot: f64, lo: f64, hi: f64 },
    #[error("invalid boundary [{lo}, {hi}]")]
    InvalidBoundary { lo: f64, hi: f64 },
    #[error("spline block for characteristic {0} needs a boundary interval")]
    MissingBoundary(usize),
    #[error("basis declares {got} blocks but the data has {expected} characteristics")]
    BlockCountMismatch { expected: usize, got: usize },
    #[error("non-finite characteristic value")]
    NonFiniteInput,
    #[error("expected {expected} characteristics, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid basis specification: {0}")]
    Config(String),
}

/// Interior knot placement of a spline block.
#[derive(Debug, Clone, PartialEq)]
pub enum Knots {
    /// Explicit interior knots.
    At(Vec<f64>),
    /// This many knots, equally spaced inside the boundary interval.
    Count(usize),
}

impl Knots {
    fn len(&self) -> usize {
        match self {
            Knots::At(k) => k.len(),
            Knots::Count(n) => *n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Polynomial { degree: usize },
    LinearSpline(Knots),
    CubicSpline(Knots),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub family: Family,
    /// Spline boundary; `None` means "derive from data".
    pub boundary: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Blocks {
    Shared(BlockSpec),
    PerCharacteristic(Vec<BlockSpec>),
}

/// Serializable basis specification.
///
/// JSON form: `{"family":"polynomial","degree":2,"intercept":false}`;
/// splines take `"knots":[..]` or `"num_knots":n` and an optional
/// `"boundary":[lo,hi]`; `"per_characteristic":[{..},..]` replaces the
/// top-level family fields with one block per characteristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisConfig", into = "BasisConfig")]
pub struct BasisSpec {
    pub blocks: Blocks,
    pub include_intercept: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyName {
    Polynomial,
    LinearSpline,
    CubicSpline,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<FamilyName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    knots: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num_knots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<FamilyName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    knots: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num_knots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<[f64; 2]>,
    #[serde(default)]
    intercept: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_characteristic: Option<Vec<BlockConfig>>,
}

impl TryFrom<BlockConfig> for BlockSpec {
    type Error = SieveError;

    fn try_from(c: BlockConfig) -> Result<Self, SieveError> {
        let family = c.family.ok_or_else(|| SieveError::Config("missing `family`".into()))?;
        let knots = || match (&c.knots, c.num_knots) {
            (Some(k), None) => Ok(Knots::At(k.clone())),
            (None, Some(n)) => Ok(Knots::Count(n)),
            (None, None) => Err(SieveError::Config("spline needs `knots` or `num_knots`".into())),
            (Some(_), Some(_)) => Err(SieveError::Config("give either `knots` or `num_knots`, not both".into())),
        };
        let family = match family {
            FamilyName::Polynomial => {
                if c.knots.is_some() || c.num_knots.is_some() || c.boundary.is_some() {
                    return Err(SieveError::Config("polynomial blocks take only `degree`".into()));
                }
                Family::Polynomial { degree: c.degree.ok_or_else(|| SieveError::Config("missing `degree`".into()))? }
            }
            FamilyName::LinearSpline | FamilyName::CubicSpline => {
                if c.degree.is_some() {
                    return Err(SieveError::Config("spline blocks do not take `degree`".into()));
                }
                if family == FamilyName::LinearSpline {
                    Family::LinearSpline(knots()?)
                } else {
                    Family::CubicSpline(knots()?)
                }
            }
        };
        let spec = BlockSpec { family, boundary: c.boundary.map(|[lo, hi]| (lo, hi)) };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<BlockSpec> for BlockConfig {
    fn from(b: BlockSpec) -> Self {
        let mut c = BlockConfig { boundary: b.boundary.map(|(lo, hi)| [lo, hi]), ..Default::default() };
        let set_knots = |c: &mut BlockConfig, k: Knots| match k {
            Knots::At(v) => c.knots = Some(v),
            Knots::Count(n) => c.num_knots = Some(n),
        };
        match b.family {
            Family::Polynomial { degree } => {
                c.family = Some(FamilyName::Polynomial);
                c.degree = Some(degree);
            }
            Family::LinearSpline(k) => {
                c.family = Some(FamilyName::LinearSpline);
                set_knots(&mut c, k);
            }
            Family::CubicSpline(k) => {
                c.family = Some(FamilyName::CubicSpline);
                set_knots(&mut c, k);
            }
        }
        c
    }
}

impl TryFrom<BasisConfig> for BasisSpec {
    type Error = SieveError;

    fn try_from(c: BasisConfig) -> Result<Self, SieveError> {
        let block = BlockConfig { family: c.family, degree: c.degree, knots: c.knots, num_knots: c.num_knots, boundary: c.boundary };
        let top_level_empty = block.family.is_none()
            && block.degree.is_none()
            && block.knots.is_none()
            && block.num_knots.is_none()
            && block.boundary.is_none();
        let blocks = match c.per_characteristic {
            Some(list) => {
                if !top_level_empty {
                    return Err(SieveError::Config("`per_characteristic` excludes top-level family fields".into()));
                }
                if list.is_empty() {
                    return Err(SieveError::Config("`per_characteristic` is empty".into()));
                }
                Blocks::PerCharacteristic(list.into_iter().map(BlockSpec::try_from).collect::<Result<_, _>>()?)
            }
            None => Blocks::Shared(BlockSpec::try_from(block)?),
        };
        Ok(BasisSpec { blocks, include_intercept: c.intercept })
    }
}

impl From<BasisSpec> for BasisConfig {
    fn from(s: BasisSpec) -> Self {
        let (block, per_characteristic) = match s.blocks {
            Blocks::Shared(b) => (BlockConfig::from(b), None),
            Blocks::PerCharacteristic(list) => (BlockConfig::default(), Some(list.into_iter().map(Into::into).collect())),
        };
        BasisConfig {
            family: block.family,
            degree: block.degree,
            knots: block.knots,
            num_knots: block.num_knots,
            boundary: block.boundary,
            intercept: s.include_intercept,
            per_characteristic,
        }
    }
}

impl BlockSpec {
    fn validate(&self) -> Result<(), SieveError> {
        if let Some((lo, hi)) = self.boundary {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SieveError::InvalidBoundary { lo, hi });
            }
        }
        match &self.family {
            Family::Polynomial { degree } if *degree < 1 => Err(SieveError::InvalidDegree),
            Family::Polynomial { .. } => Ok(()),
            Family::LinearSpline(k) | Family::CubicSpline(k) => {
                if let Knots::At(v) = k {
                    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(SieveError::KnotsNotIncreasing);
                    }
                    if let Some((lo, hi)) = self.boundary {
                        if let Some(&knot) = v.iter().find(|&&x| x <= lo || x >= hi) {
                            return Err(SieveError::KnotOutsideBoundary { knot, lo, hi });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn order(&self) -> Option<usize> {
        match self.family {
            Family::Polynomial { .. } => None,
            Family::LinearSpline(_) => Some(2),
            Family::CubicSpline(_) => Some(4),
        }
    }

    /// Number of columns this block contributes.
    pub fn dim(&self, include_intercept: bool) -> usize {
        match &self.family {
            Family::Polynomial { degree } => *degree,
            Family::LinearSpline(k) | Family::CubicSpline(k) => {
                k.len() + self.order().unwrap_or(0) - usize::from(include_intercept)
            }
        }
    }
}

impl BasisSpec {
    pub fn polynomial(degree: usize, include_intercept: bool) -> Self {
        Self {
            blocks: Blocks::Shared(BlockSpec { family: Family::Polynomial { degree }, boundary: None }),
            include_intercept,
        }
    }

    pub fn linear_spline(knots: Vec<f64>, include_intercept: bool) -> Self {
        Self {
            blocks: Blocks::Shared(BlockSpec { family: Family::LinearSpline(Knots::At(knots)), boundary: None }),
            include_intercept,
        }
    }

    pub fn cubic_spline(knots: Vec<f64>, include_intercept: bool) -> Self {
        Self {
            blocks: Blocks::Shared(BlockSpec { family: Family::CubicSpline(Knots::At(knots)), boundary: None }),
            include_intercept,
        }
    }

    /// Sets the boundary interval of every block.
    pub fn with_boundary(mut self, lo: f64, hi: f64) -> Self {
        match &mut self.blocks {
            Blocks::Shared(b) => b.boundary = Some((lo, hi)),
            Blocks::PerCharacteristic(list) => list.iter_mut().for_each(|b| b.boundary = Some((lo, hi))),
        }
        self
    }

    fn block(&self, j: usize) -> &BlockSpec {
        match &self.blocks {
            Blocks::Shared(b) => b,
            Blocks::PerCharacteristic(list) => &list[j],
        }
    }

    fn check_block_count(&self, m: usize) -> Result<(), SieveError> {
        match &self.blocks {
            Blocks::PerCharacteristic(list) if list.len() != m => {
                Err(SieveError::BlockCountMismatch { expected: m, got: list.len() })
            }
            _ => Ok(()),
        }
    }
}

/// Total dimension `P` of the basis for `m` characteristics.
///
/// Per-characteristic specs contribute their own blocks regardless of `m`.
pub fn basis_dimension(spec: &BasisSpec, m: usize) -> usize {
    let blocks: usize = match &spec.blocks {
        Blocks::Shared(b) => m * b.dim(spec.include_intercept),
        Blocks::PerCharacteristic(list) => list.iter().map(|b| b.dim(spec.include_intercept)).sum(),
    };
    usize::from(spec.include_intercept) + blocks
}

#[derive(Debug, Clone, PartialEq)]
enum Block {
    Polynomial { degree: usize },
    Spline { order: usize, knots: Vec<f64>, lo: f64, hi: f64, skip: usize },
}

impl Block {
    fn dim(&self) -> usize {
        match self {
            Block::Polynomial { degree } => *degree,
            Block::Spline { order, knots, skip, .. } => knots.len() - order - skip,
        }
    }

    fn eval_into(&self, x: f64, out: &mut [f64]) {
        match self {
            Block::Polynomial { .. } => {
                let mut p = 1.0;
                for o in out.iter_mut() {
                    p *= x;
                    *o = p;
                }
            }
            Block::Spline { order, knots, lo, hi, skip } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let x = x.clamp(*lo, *hi);
                let n_basis = knots.len() - order;
                let span = find_span(knots, *order, n_basis, x);
                let mut vals = [0.0; 8];
                bspline_nonzero(knots, *order, span, x, &mut vals[..*order]);
                for (r, v) in vals[..*order].iter().enumerate() {
                    let idx = span + 1 + r - order;
                    if idx >= *skip {
                        out[idx - skip] = *v;
                    }
                }
            }
        }
    }
}

/// Index `mu` with `knots[mu] <= x < knots[mu + 1]`, using the last
/// non-degenerate span at the right boundary.
fn find_span(knots: &[f64], order: usize, n_basis: usize, x: f64) -> usize {
    if x >= knots[n_basis] {
        return n_basis - 1;
    }
    let (mut low, mut high) = (order - 1, n_basis);
    while high - low > 1 {
        let mid = (low + high) / 2;
        if x < knots[mid] {
            high = mid;
        } else {
            low = mid;
        }
    }
    low
}

/// The `order` B-splines that are nonzero on span `mu`, i.e. `B_{mu-order+1..=mu}`.
fn bspline_nonzero(knots: &[f64], order: usize, mu: usize, x: f64, out: &mut [f64]) {
    let degree = order - 1;
    let mut left = [0.0; 8];
    let mut right = [0.0; 8];
    out[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[mu + 1 - j];
        right[j] = knots[mu + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

/// A resolved basis ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    spec: BasisSpec,
    include_intercept: bool,
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    dim: usize,
}

impl Basis {
    /// Resolves `spec` for `m` characteristics. Spline blocks must carry a boundary.
    pub fn new(spec: &BasisSpec, m: usize) -> Result<Self, SieveError> {
        Self::resolve(spec, m, |_| None)
    }

    /// Resolves `spec` against a panel: spline blocks without a boundary use
    /// `[-0.5, 0.5]` for rank-transformed characteristics and the sample
    /// range otherwise.
    pub fn for_panel(spec: &BasisSpec, panel: &Panel) -> Result<Self, SieveError> {
        Self::resolve(spec, panel.n_chars(), |j| {
            Some(if panel.is_ranked(j) { (-0.5, 0.5) } else { panel.char_range(j) })
        })
    }

    fn resolve(spec: &BasisSpec, m: usize, default_boundary: impl Fn(usize) -> Option<(f64, f64)>) -> Result<Self, SieveError> {
        if m == 0 {
            return Err(SieveError::DimensionMismatch { expected: 1, got: 0 });
        }
        spec.check_block_count(m)?;
        let mut blocks = Vec::with_capacity(m);
        for j in 0..m {
            let b = spec.block(j);
            b.validate()?;
            let block = match &b.family {
                Family::Polynomial { degree } => Block::Polynomial { degree: *degree },
                Family::LinearSpline(k) | Family::CubicSpline(k) => {
                    let order = b.order().expect("spline order");
                    let (lo, hi) = b.boundary.or_else(|| default_boundary(j)).ok_or(SieveError::MissingBoundary(j))?;
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(SieveError::InvalidBoundary { lo, hi });
                    }
                    let interior = match k {
                        Knots::At(v) => v.clone(),
                        Knots::Count(n) => (1..=*n).map(|i| lo + (hi - lo) * i as f64 / (*n + 1) as f64).collect(),
                    };
                    if let Some(&knot) = interior.iter().find(|&&x| x <= lo || x >= hi) {
                        return Err(SieveError::KnotOutsideBoundary { knot, lo, hi });
                    }
                    let mut knots = vec![lo; order];
                    knots.extend(interior);
                    knots.extend(std::iter::repeat(hi).take(order));
                    Block::Spline { order, knots, lo, hi, skip: usize::from(spec.include_intercept) }
                }
            };
            blocks.push(block);
        }
        let mut offsets = Vec::with_capacity(m);
        let mut dim = usize::from(spec.include_intercept);
        for b in &blocks {
            offsets.push(dim);
            dim += b.dim();
        }
        Ok(Self { spec: spec.clone(), include_intercept: spec.include_intercept, blocks, offsets, dim })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    /// `P`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `M`.
    pub fn n_chars(&self) -> usize {
        self.blocks.len()
    }

    pub fn has_intercept(&self) -> bool {
        self.include_intercept
    }

    /// Column range of characteristic `j`'s block.
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j] + self.blocks[j].dim()
    }

    /// Writes `phi(z)` into `out` (length `P`). No validation.
    pub fn eval_into(&self, z: &[f64], out: &mut [f64]) {
        if self.include_intercept {
            out[0] = 1.0;
        }
        for ((b, &off), &x) in self.blocks.iter().zip(&self.offsets).zip(z) {
            b.eval_into(x, &mut out[off..off + b.dim()]);
        }
    }

    pub fn eval(&self, z: &[f64]) -> Result<DVector<f64>, SieveError> {
        if z.len() != self.n_chars() {
            return Err(SieveError::DimensionMismatch { expected: self.n_chars(), got: z.len() });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(SieveError::NonFiniteInput);
        }
        let mut out = DVector::zeros(self.dim);
        self.eval_into(z, out.as_mut_slice());
        Ok(out)
    }

    /// Stacks `phi(z_i)'` over the rows of a cross-section (`N_t x P`).
    pub fn design(&self, cs: &CrossSection) -> Result<DMatrix<f64>, SieveError> {
        if cs.z.ncols() != self.n_chars() {
            return Err(SieveError::DimensionMismatch { expected: self.n_chars(), got: cs.z.ncols() });
        }
        let n = cs.len();
        let mut x = DMatrix::zeros(n, self.dim);
        let mut row = vec![0.0; self.dim];
        let mut z = vec![0.0; self.n_chars()];
        for i in 0..n {
            for (j, zj) in z.iter_mut().enumerate() {
                *zj = cs.z[(i, j)];
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(SieveError::NonFiniteInput);
            }
            self.eval_into(&z, &mut row);
            for (c, v) in row.iter().enumerate() {
                x[(i, c)] = *v;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_layout() {
        let b = Basis::new(&BasisSpec::polynomial(2, false), 3).unwrap();
        assert_eq!(b.eval(&[1.0, 2.0, -1.0]).unwrap().as_slice(), &[1.0, 1.0, 2.0, 4.0, -1.0, 1.0]);
        let b = Basis::new(&BasisSpec::polynomial(2, true), 3).unwrap();
        assert_eq!(b.eval(&[0.0, 0.0, 0.0]).unwrap().as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn dimensions() {
        assert_eq!(basis_dimension(&BasisSpec::polynomial(2, false), 3), 6);
        assert_eq!(basis_dimension(&BasisSpec::polynomial(2, true), 3), 7);
        assert_eq!(basis_dimension(&BasisSpec::cubic_spline(vec![-0.2, 0.2], true), 4), 21);
        let b = Basis::new(&BasisSpec::cubic_spline(vec![-0.2, 0.2], true).with_boundary(-0.5, 0.5), 4).unwrap();
        assert_eq!(b.dim(), 21);
    }

    #[test]
    fn non_finite_rejected() {
        let b = Basis::new(&BasisSpec::polynomial(1, false), 2).unwrap();
        assert_eq!(b.eval(&[f64::NAN, 0.0]).unwrap_err(), SieveError::NonFiniteInput);
        assert!(matches!(b.eval(&[0.0]), Err(SieveError::DimensionMismatch { .. })));
    }

    #[test]
    fn spline_requires_boundary() {
        assert_eq!(Basis::new(&BasisSpec::linear_spline(vec![0.0], true), 1).unwrap_err(), SieveError::MissingBoundary(0));
    }

    #[test]
    fn linear_spline_at_quarter() {
        let b = Basis::new(&BasisSpec::linear_spline(vec![0.0], true).with_boundary(-0.5, 0.5), 1).unwrap();
        let v = b.eval(&[0.25]).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], 1.0);
        // hats at 0 and 0.5 after dropping the hat at -0.5
        assert!((v[1] - 0.5).abs() < 1e-15 && (v[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_spline_block_is_partition_of_unity() {
        for spec in [BasisSpec::linear_spline(vec![-0.1, 0.3], false), BasisSpec::cubic_spline(vec![-0.2, 0.0, 0.25], false)] {
            let b = Basis::new(&spec.with_boundary(-0.5, 0.5), 1).unwrap();
            for k in 0..=100 {
                let x = -0.5 + k as f64 / 100.0;
                let s: f64 = b.eval(&[x]).unwrap().iter().sum();
                assert!((s - 1.0).abs() < 1e-14, "x={x} sum={s}");
            }
        }
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let s: BasisSpec = serde_json::from_str(r#"{"family":"polynomial","degree":2,"intercept":false}"#).unwrap();
        assert_eq!(s, BasisSpec::polynomial(2, false));
        let back: BasisSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<BasisSpec>(r#"{"family":"polynomial","degree":2,"bogus":1}"#).is_err());
        assert!(serde_json::from_str::<BasisSpec>(r#"{"family":"polynomial","degree":0}"#).is_err());
        let s: BasisSpec =
            serde_json::from_str(r#"{"intercept":true,"per_characteristic":[{"family":"polynomial","degree":1},{"family":"cubic_spline","num_knots":2,"boundary":[0,1]}]}"#)
                .unwrap();
        assert_eq!(basis_dimension(&s, 2), 1 + 1 + 5);
        let b = Basis::new(&s, 2).unwrap();
        assert_eq!(b.dim(), 7);
        assert_eq!(b.block_range(1), 2..7);
    }

    #[test]
    fn unsorted_knots_rejected() {
        let spec = BasisSpec::linear_spline(vec![0.2, 0.1], false).with_boundary(0.0, 1.0);
        assert_eq!(Basis::new(&spec, 1).unwrap_err(), SieveError::KnotsNotIncreasing);
        let spec = BasisSpec::linear_spline(vec![2.0], false).with_boundary(0.0, 1.0);
        assert!(matches!(Basis::new(&spec, 1), Err(SieveError::KnotOutsideBoundary { .. })));
    }

    #[test]
    fn block_count_mismatch() {
        let s: BasisSpec = serde_json::from_str(r#"{"per_characteristic":[{"family":"polynomial","degree":1}]}"#).unwrap();
        assert_eq!(Basis::new(&s, 2).unwrap_err(), SieveError::BlockCountMismatch { expected: 2, got: 1 });
    }
}
