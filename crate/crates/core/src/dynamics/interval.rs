use std::fmt;
use std::sync::{Arc, OnceLock};

use evalexpr::{
    build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult,
    Node, Value,
};
use rand::{Rng, RngCore};
use evalexpr::error::EvalexprResultValue;
use serde_json::json;

use super::{DynamicalSystem, DynamicsError, FirstCoordinate, SystemDescriptor};

/// Ulam bins used by [`PiecewiseExpandingMap`] to importance-sample its
/// invariant density.
pub const DEFAULT_SAMPLER_BINS: usize = 1 << 12;

const INVERSE_TOLERANCE: f64 = 1e-12;
const CHECK_POINTS: usize = 1024;
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// A point of `[0, 1)` in floating point.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct UnitIntervalPoint {
    x: f64,
}

impl UnitIntervalPoint {
    pub fn new(x: f64) -> Result<Self, DynamicsError> {
        if (0.0..1.0).contains(&x) {
            Ok(Self { x })
        } else {
            Err(DynamicsError::Domain(format!("{x} not in [0, 1)")))
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }
}

impl FirstCoordinate for UnitIntervalPoint {
    #[inline]
    fn first_coordinate(&self) -> f64 {
        self.x
    }
}

/// A compiled expression in the single variable `x` or `y`.
#[derive(Clone)]
pub struct Expression {
    source: String,
    variable: &'static str,
    tree: Node<DefaultNumericTypes>,
}

impl Expression {
    pub fn parse(source: &str, variable: &'static str) -> Result<Self, DynamicsError> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| DynamicsError::InvalidSystem(format!("expression `{source}`: {e}")))?;
        let expr = Self {
            source: source.to_string(),
            variable,
            tree,
        };
        expr.try_eval(0.5)?;
        Ok(expr)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn try_eval(&self, v: f64) -> Result<f64, DynamicsError> {
        let ctx = SingleVariable {
            name: self.variable,
            value: Value::Float(v),
        };
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| DynamicsError::InvalidSystem(format!("expression `{}`: {e}", self.source)))
    }

    /// Evaluation after construction-time validation; a failure here means
    /// the expression is only partially defined, which yields NaN.
    #[inline]
    fn eval(&self, v: f64) -> f64 {
        self.try_eval(v).unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({:?})", self.source)
    }
}

struct SingleVariable {
    name: &'static str,
    value: Value<DefaultNumericTypes>,
}

impl Context for SingleVariable {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Value<DefaultNumericTypes>> {
        (identifier == self.name).then_some(&self.value)
    }

    fn call_function(
        &self,
        identifier: &str,
        _argument: &Value<DefaultNumericTypes>,
    ) -> EvalexprResultValue<DefaultNumericTypes> {
        Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string()))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        false
    }

    fn set_builtin_functions_disabled(
        &mut self,
        _disabled: bool,
    ) -> EvalexprResult<(), DefaultNumericTypes> {
        Ok(())
    }
}

/// Forward rule of one monotone branch.
///
/// Expression branches are written in evalexpr syntax with builtins such as
/// `math::sqrt`; integer literals use integer arithmetic, so write `0.5`
/// rather than `1/2`.
#[derive(Clone, Debug)]
pub enum BranchFormula {
    Affine {
        slope: f64,
        intercept: f64,
    },
    Expr {
        /// `F(x)` on the branch domain.
        forward: Expression,
        /// `h(y)`, the inverse of `F` on the branch image.
        inverse: Expression,
        /// `F'(x)`; the sign is ignored.
        derivative: Expression,
    },
}

impl BranchFormula {
    pub fn expr(forward: &str, inverse: &str, derivative: &str) -> Result<Self, DynamicsError> {
        Ok(Self::Expr {
            forward: Expression::parse(forward, "x")?,
            inverse: Expression::parse(inverse, "y")?,
            derivative: Expression::parse(derivative, "x")?,
        })
    }
}

/// A monotone `C^2` branch `F: [lo, hi) -> image`, with its inverse.
#[derive(Clone, Debug)]
pub struct Branch {
    lo: f64,
    hi: f64,
    formula: BranchFormula,
    image: (f64, f64),
    increasing: bool,
}

impl Branch {
    pub fn new(lo: f64, hi: f64, formula: BranchFormula) -> Result<Self, DynamicsError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(DynamicsError::InvalidSystem(format!("empty branch domain [{lo}, {hi})")));
        }
        let mut b = Self {
            lo,
            hi,
            formula,
            image: (0.0, 0.0),
            increasing: true,
        };
        let (a, z) = (b.forward(lo), b.forward(hi));
        if !(a.is_finite() && z.is_finite()) || a == z {
            return Err(DynamicsError::InvalidSystem(format!(
                "branch on [{lo}, {hi}) is not strictly monotone"
            )));
        }
        b.increasing = z > a;
        b.image = (a.min(z), a.max(z));
        Ok(b)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Closure of the branch image; membership tests use `[lo, hi)`.
    pub fn image(&self) -> (f64, f64) {
        self.image
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    pub fn formula(&self) -> &BranchFormula {
        &self.formula
    }

    #[inline]
    pub fn contains_image(&self, y: f64) -> bool {
        self.image.0 <= y && y < self.image.1
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        match &self.formula {
            BranchFormula::Affine { slope, intercept } => slope * x + intercept,
            BranchFormula::Expr { forward, .. } => forward.eval(x),
        }
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        match &self.formula {
            BranchFormula::Affine { slope, intercept } => (y - intercept) / slope,
            BranchFormula::Expr { inverse, .. } => inverse.eval(y),
        }
    }

    /// `|F'(x)|`.
    #[inline]
    pub fn derivative_abs(&self, x: f64) -> f64 {
        match &self.formula {
            BranchFormula::Affine { slope, .. } => slope.abs(),
            BranchFormula::Expr { derivative, .. } => derivative.eval(x).abs(),
        }
    }

    fn inf_derivative(&self) -> f64 {
        match &self.formula {
            BranchFormula::Affine { slope, .. } => slope.abs(),
            BranchFormula::Expr { .. } => (0..=CHECK_POINTS)
                .map(|i| {
                    let x = self.lo + (self.hi - self.lo) * i as f64 / CHECK_POINTS as f64;
                    self.derivative_abs(x)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// A piecewise expanding map of `[0, 1)` described by its monotone branches,
/// optionally iterated `power` times per step.
///
/// The transfer operator and Ulam method work from the base branches; the
/// iterate power is applied by repetition.
pub trait IntervalMap: Send + Sync {
    fn name(&self) -> String;

    fn base_branches(&self) -> &[Branch];

    fn power(&self) -> u32;

    /// `inf |F'|` of the base map.
    fn base_expansion(&self) -> f64;

    /// `inf |(F^m)'|`.
    fn expansion(&self) -> f64 {
        self.base_expansion().powi(self.power() as i32)
    }

    /// One application of the base map, clamped into `[0, 1)`.
    fn base_forward(&self, x: f64) -> f64 {
        let branches = self.base_branches();
        let i = branches
            .partition_point(|b| b.domain().1 <= x)
            .min(branches.len() - 1);
        let y = branches[i].forward(x);
        if y >= 1.0 {
            BELOW_ONE
        } else {
            y.max(0.0)
        }
    }

    /// `F^m x` in floating point.
    fn forward(&self, x: f64) -> f64 {
        (0..self.power()).fold(x, |x, _| self.base_forward(x))
    }
}

/// Checks that branch domains partition `[0, 1)`, that every branch expands,
/// maps into `[0, 1]`, and inverts consistently. Returns `inf |F'|`.
pub(crate) fn validate_branches(branches: &[Branch]) -> Result<f64, DynamicsError> {
    let invalid = |m: String| Err(DynamicsError::InvalidSystem(m));
    if branches.is_empty() {
        return invalid("no branches".into());
    }
    if branches[0].lo != 0.0 || branches[branches.len() - 1].hi != 1.0 {
        return invalid("branch domains must start at 0 and end at 1".into());
    }
    for w in branches.windows(2) {
        if w[0].hi != w[1].lo {
            return invalid(format!(
                "branch domains must be contiguous: {} then {}",
                w[0].hi, w[1].lo
            ));
        }
    }
    let mut lambda = f64::INFINITY;
    for b in branches {
        let (ilo, ihi) = b.image;
        if ilo < -INVERSE_TOLERANCE || ihi > 1.0 + INVERSE_TOLERANCE {
            return invalid(format!(
                "branch on [{}, {}) maps outside [0, 1]: [{ilo}, {ihi}]",
                b.lo, b.hi
            ));
        }
        let inf = b.inf_derivative();
        if !(inf > 1.0) {
            return invalid(format!(
                "branch on [{}, {}) is not expanding: inf |F'| = {inf}",
                b.lo, b.hi
            ));
        }
        lambda = lambda.min(inf);
        for i in 0..=CHECK_POINTS {
            let y = ilo + (ihi - ilo) * i as f64 / CHECK_POINTS as f64;
            let err = (b.forward(b.inverse(y)) - y).abs();
            if !(err <= INVERSE_TOLERANCE) {
                return invalid(format!(
                    "inverse branch on [{}, {}) inconsistent at y = {y}: |F(h(y)) - y| = {err:e}",
                    b.lo, b.hi
                ));
            }
        }
    }
    Ok(lambda)
}

/// Piecewise-constant density sampler built from an Ulam fixed vector.
#[derive(Debug)]
struct DensitySampler {
    cumulative: Vec<f64>,
}

impl DensitySampler {
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let bins = self.cumulative.len();
        let u: f64 = rng.random::<f64>() * self.cumulative[bins - 1];
        let j = self.cumulative.partition_point(|&c| c <= u).min(bins - 1);
        let x = (j as f64 + rng.random::<f64>()) / bins as f64;
        x.min(BELOW_ONE)
    }
}

/// A general piecewise expanding map given by explicit branches.
///
/// Points are doubles, so orbits shadow true orbits only for roughly
/// `53 / log2(lambda)` steps; for maps whose branches have integer slopes
/// the floating-point orbit eventually collapses onto a dyadic fixed point.
/// Use [`DoublingMap`](super::DoublingMap) or [`TentMap`](super::TentMap)
/// for long exact orbits.
#[derive(Clone)]
pub struct PiecewiseExpandingMap {
    name: String,
    branches: Vec<Branch>,
    power: u32,
    lambda: f64,
    sampler_bins: usize,
    sampler: Arc<OnceLock<Result<DensitySampler, DynamicsError>>>,
}

impl fmt::Debug for PiecewiseExpandingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseExpandingMap")
            .field("name", &self.name)
            .field("branches", &self.branches)
            .field("power", &self.power)
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl PiecewiseExpandingMap {
    pub fn new(
        name: impl Into<String>,
        branches: Vec<Branch>,
        power: u32,
    ) -> Result<Self, DynamicsError> {
        if power == 0 {
            return Err(DynamicsError::InvalidSystem("iterate power must be >= 1".into()));
        }
        let lambda = validate_branches(&branches)?;
        Ok(Self {
            name: name.into(),
            branches,
            power,
            lambda,
            sampler_bins: DEFAULT_SAMPLER_BINS,
            sampler: Arc::new(OnceLock::new()),
        })
    }

    /// Number of Ulam bins behind [`DynamicalSystem::sample_invariant`].
    pub fn with_sampler_bins(mut self, bins: usize) -> Self {
        self.sampler_bins = bins;
        self.sampler = Arc::new(OnceLock::new());
        self
    }

    pub fn sampler_bins(&self) -> usize {
        self.sampler_bins
    }

    fn sampler(&self) -> Result<&DensitySampler, DynamicsError> {
        self.sampler
            .get_or_init(|| {
                let density = crate::transfer::ulam_density(self, self.sampler_bins)
                    .map_err(|e| DynamicsError::Unsupported(format!("invariant sampler: {e}")))?;
                let mut acc = 0.0;
                let cumulative = density
                    .values()
                    .iter()
                    .map(|v| {
                        acc += v.re.max(0.0);
                        acc
                    })
                    .collect();
                Ok(DensitySampler { cumulative })
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

impl DynamicalSystem for PiecewiseExpandingMap {
    type Point = UnitIntervalPoint;

    fn descriptor(&self) -> SystemDescriptor {
        let branches: Vec<_> = self
            .branches
            .iter()
            .map(|b| match &b.formula {
                BranchFormula::Affine { slope, intercept } => json!({
                    "domain": [b.lo, b.hi], "slope": slope, "intercept": intercept,
                }),
                BranchFormula::Expr {
                    forward,
                    inverse,
                    derivative,
                } => json!({
                    "domain": [b.lo, b.hi],
                    "forward": forward.source(),
                    "inverse": inverse.source(),
                    "derivative": derivative.source(),
                }),
            })
            .collect();
        SystemDescriptor {
            family: "piecewise".into(),
            parameters: json!({
                "name": self.name,
                "power": self.power,
                "lambda": self.lambda,
                "branches": branches,
                "sampler_bins": self.sampler_bins,
            }),
        }
    }

    fn validate_point(&self, x: &UnitIntervalPoint) -> Result<(), DynamicsError> {
        UnitIntervalPoint::new(x.x).map(|_| ())
    }

    #[inline]
    fn advance(&self, p: &mut UnitIntervalPoint) -> Result<(), DynamicsError> {
        p.x = self.forward(p.x);
        Ok(())
    }

    fn sample_invariant(
        &self,
        rng: &mut dyn RngCore,
        _horizon: usize,
    ) -> Result<UnitIntervalPoint, DynamicsError> {
        let x = self.sampler()?.sample(rng);
        Ok(UnitIntervalPoint { x })
    }
}

impl IntervalMap for PiecewiseExpandingMap {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn base_branches(&self) -> &[Branch] {
        &self.branches
    }

    fn power(&self) -> u32 {
        self.power
    }

    fn base_expansion(&self) -> f64 {
        self.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;
    use crate::stats::ks_statistic;

    fn affine(lo: f64, hi: f64, slope: f64, intercept: f64) -> Branch {
        Branch::new(lo, hi, BranchFormula::Affine { slope, intercept }).unwrap()
    }

    #[test]
    fn rejects_bad_partitions_and_contractions() {
        let gap = vec![affine(0.0, 0.4, 2.0, 0.0), affine(0.5, 1.0, 2.0, -1.0)];
        assert!(PiecewiseExpandingMap::new("gap", gap, 1).is_err());
        let flat = vec![affine(0.0, 1.0, 0.5, 0.0)];
        assert!(PiecewiseExpandingMap::new("flat", flat, 1).is_err());
        let outside = vec![affine(0.0, 0.5, 3.0, 0.0), affine(0.5, 1.0, 2.0, -1.0)];
        assert!(PiecewiseExpandingMap::new("outside", outside, 1).is_err());
        let ok = vec![affine(0.0, 0.5, 2.0, 0.0), affine(0.5, 1.0, 2.0, -1.0)];
        assert!(PiecewiseExpandingMap::new("ok", ok.clone(), 0).is_err());
        assert_eq!(PiecewiseExpandingMap::new("ok", ok, 1).unwrap().expansion(), 2.0);
    }

    #[test]
    fn expression_branches_invert_consistently() {
        let left = Branch::new(
            0.0,
            0.5,
            BranchFormula::expr("1.5*x + x*x", "(math::sqrt(2.25 + 4.0*y) - 1.5)/2.0", "1.5 + 2.0*x")
                .unwrap(),
        )
        .unwrap();
        let right = Branch::new(0.5, 1.0, BranchFormula::Affine { slope: 2.0, intercept: -1.0 }).unwrap();
        let map = PiecewiseExpandingMap::new("quadratic", vec![left, right], 1).unwrap();
        assert_eq!(map.base_expansion(), 1.5);
        assert!((map.base_forward(0.25) - 0.4375).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_inverse_is_rejected() {
        let bad = Branch::new(0.0, 0.5, BranchFormula::expr("2.0*x", "y/3.0", "2.0").unwrap()).unwrap();
        let right = affine(0.5, 1.0, 2.0, -1.0);
        let err = PiecewiseExpandingMap::new("bad", vec![bad, right], 1).unwrap_err();
        assert!(err.to_string().contains("inverse"), "{err}");
    }

    #[test]
    fn malformed_expression_is_a_config_error() {
        assert!(BranchFormula::expr("2.0*", "y", "2.0").is_err());
        assert!(BranchFormula::expr("2.0*z", "y", "2.0").is_err());
    }

    #[test]
    fn ulam_sampler_draws_from_the_invariant_density() {
        // Asymmetric full-branch map with Lebesgue invariant: slopes 3 and 3/2.
        let map = PiecewiseExpandingMap::new(
            "skew",
            vec![affine(0.0, 1.0 / 3.0, 3.0, 0.0), affine(1.0 / 3.0, 1.0, 1.5, -0.5)],
            1,
        )
        .unwrap();
        let seed = StreamSeed::new(3, "ulam-sampler");
        let mut xs: Vec<f64> = (0..20_000)
            .map(|i| map.sample_invariant(&mut seed.member(i), 1).unwrap().x())
            .collect();
        assert!(ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0)) < 1.628 / (20_000f64).sqrt());
    }

    #[test]
    fn points_outside_the_interval_are_rejected() {
        assert!(UnitIntervalPoint::new(1.0).is_err());
        assert!(UnitIntervalPoint::new(f64::NAN).is_err());
        assert!(UnitIntervalPoint::new(0.0).is_ok());
    }
}
