//! Bookkeeping for the regularity constants of dynamically Hölder
//! observables and the correlation bounds built from them.
//!
//! Every operation returns an over-approximation: a budget bounds the true
//! modulus of continuity and sup-norm of its observable, never the reverse.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegularityError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
    #[error("empty factor list")]
    Empty,
    #[error("offsets must be strictly increasing and match the factors: {0:?}")]
    Offsets(Vec<usize>),
}

/// Which separation time an observable is Hölder with respect to.
///
/// `HMinusStar` is regularity along homogeneous stable manifolds, measured
/// by the future separation time; it survives composition with `F`.
/// `HPlusStar` is the unstable counterpart and survives `F^-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    HPlusStar,
    HMinusStar,
    Both,
}

impl ClassTag {
    /// Class of a product; `Both` is neutral.
    pub fn meet(self, other: ClassTag) -> Result<ClassTag, RegularityError> {
        match (self, other) {
            (a, b) if a == b => Ok(a),
            (ClassTag::Both, b) => Ok(b),
            (a, ClassTag::Both) => Ok(a),
            (a, b) => Err(RegularityError::ClassMismatch(format!("{a:?} with {b:?}"))),
        }
    }

    fn admits(self, required: ClassTag) -> bool {
        self == ClassTag::Both || self == required
    }
}

/// Composition direction for [`pullback_budget`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `f -> f o F`
    Forward,
    /// `f -> f o F^-1`
    Backward,
}

/// `|f(x) - f(y)| <= k * theta^s(x, y)` and `|f| <= sup_norm`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityBudget {
    pub k: f64,
    pub theta: f64,
    pub sup_norm: f64,
    pub class: ClassTag,
}

impl RegularityBudget {
    pub fn new(k: f64, theta: f64, sup_norm: f64, class: ClassTag) -> Result<Self, RegularityError> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(RegularityError::Invalid(format!("K = {k} must be finite and >= 0")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(RegularityError::Invalid(format!("theta = {theta} must lie in (0, 1)")));
        }
        if !(sup_norm >= 0.0 && sup_norm.is_finite()) {
            return Err(RegularityError::Invalid(format!(
                "sup-norm {sup_norm} must be finite and >= 0"
            )));
        }
        Ok(Self {
            k,
            theta,
            sup_norm,
            class,
        })
    }

    /// Budget of the constant `c`, which lies in both classes.
    pub fn constant(c: f64, theta: f64) -> Result<Self, RegularityError> {
        Self::new(0.0, theta, c.abs(), ClassTag::Both)
    }
}

/// Budget of `a * b`.
pub fn product_budget(
    a: &RegularityBudget,
    b: &RegularityBudget,
) -> Result<RegularityBudget, RegularityError> {
    Ok(RegularityBudget {
        k: a.sup_norm * b.k + a.k * b.sup_norm,
        theta: a.theta.max(b.theta),
        sup_norm: a.sup_norm * b.sup_norm,
        class: a.class.meet(b.class)?,
    })
}

/// Budget of `f o F^steps` (forward) or `f o F^-steps` (backward).
///
/// Forward composition needs the stable class and backward the unstable
/// one; a `Both` budget keeps only the class that survives.
pub fn pullback_budget(
    b: &RegularityBudget,
    steps: u32,
    direction: Direction,
) -> Result<RegularityBudget, RegularityError> {
    if steps == 0 {
        return Ok(*b);
    }
    let required = match direction {
        Direction::Forward => ClassTag::HMinusStar,
        Direction::Backward => ClassTag::HPlusStar,
    };
    if !b.class.admits(required) {
        return Err(RegularityError::ClassMismatch(format!(
            "{:?} budget cannot be composed {direction:?}",
            b.class
        )));
    }
    Ok(RegularityBudget {
        k: b.k * b.theta.powi(steps as i32),
        class: required,
        ..*b
    })
}

/// Product of sup-norms with the smallest one left out; equals
/// `prod M / min M` whenever `min M > 0`.
pub(crate) fn product_without_min(norms: &[f64]) -> f64 {
    let argmin = norms
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    norms
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != argmin)
        .map(|(_, m)| m)
        .product()
}

/// Budget of `prod_i f_i o F^{offset_i}` for a common class.
///
/// `K = max K_i * (prod M_i / min M_i) * theta^{i_0} / (1 - theta)` with
/// `theta = max theta_i`. The `/ min M_i` factor is evaluated as the product
/// of the other sup-norms, so vanishing sup-norms are allowed.
pub fn multitime_budget(
    budgets: &[RegularityBudget],
    offsets: &[usize],
) -> Result<RegularityBudget, RegularityError> {
    if budgets.is_empty() {
        return Err(RegularityError::Empty);
    }
    if offsets.len() != budgets.len() || offsets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RegularityError::Offsets(offsets.to_vec()));
    }
    let class = budgets
        .iter()
        .try_fold(ClassTag::Both, |c, b| c.meet(b.class))?;
    let theta = budgets.iter().map(|b| b.theta).fold(0.0, f64::max);
    let k_max = budgets.iter().map(|b| b.k).fold(0.0, f64::max);
    let norms: Vec<f64> = budgets.iter().map(|b| b.sup_norm).collect();
    let i0 = offsets[0] as i32;
    Ok(RegularityBudget {
        k: k_max * product_without_min(&norms) * theta.powi(i0) / (1.0 - theta),
        theta,
        sup_norm: norms.iter().product(),
        class,
    })
}

/// Constants of the billiard pair-correlation bound. They come from the
/// coupling construction and are supplied, not derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilliardBoundConstants {
    pub theta_upsilon: f64,
    pub kappa: f64,
    pub c0: f64,
}

impl Default for BilliardBoundConstants {
    fn default() -> Self {
        Self {
            theta_upsilon: 0.9,
            kappa: 1.0,
            c0: 1.0,
        }
    }
}

impl BilliardBoundConstants {
    pub fn new(theta_upsilon: f64, kappa: f64, c0: f64) -> Result<Self, RegularityError> {
        let c = Self {
            theta_upsilon,
            kappa,
            c0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), RegularityError> {
        if !(self.theta_upsilon > 0.0 && self.theta_upsilon < 1.0) {
            return Err(RegularityError::Invalid(format!(
                "theta_upsilon = {} must lie in (0, 1)",
                self.theta_upsilon
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(RegularityError::Invalid(format!("kappa = {} must be > 0", self.kappa)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(RegularityError::Invalid(format!("C0 = {} must be > 0", self.c0)));
        }
        Ok(())
    }

    /// `max(theta_upsilon, theta_f, theta_g, e^{-1/kappa})^{1/4}`.
    pub fn rate(&self, theta_f: f64, theta_g: f64) -> f64 {
        self.theta_upsilon
            .max(theta_f)
            .max(theta_g)
            .max((-1.0 / self.kappa).exp())
            .powf(0.25)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairBound {
    pub bound: f64,
    pub rate: f64,
}

fn require(b: &RegularityBudget, class: ClassTag, role: &str) -> Result<(), RegularityError> {
    if b.class.admits(class) {
        Ok(())
    } else {
        Err(RegularityError::ClassMismatch(format!(
            "{role} must be {class:?}, got {:?}",
            b.class
        )))
    }
}

/// `|<f g o F^n> - <f><g>| <= C0 (K_f M_g + M_f K_g + M_f M_g) rate^n` for
/// `f` unstable-class and `g` stable-class.
pub fn billiard_pair_bound(
    f: &RegularityBudget,
    g: &RegularityBudget,
    c: &BilliardBoundConstants,
    n: u32,
) -> Result<PairBound, RegularityError> {
    require(f, ClassTag::HPlusStar, "f")?;
    require(g, ClassTag::HMinusStar, "g")?;
    c.validate()?;
    let rate = c.rate(f.theta, g.theta);
    let prefactor = c.c0 * (f.k * g.sup_norm + f.sup_norm * g.k + f.sup_norm * g.sup_norm);
    Ok(PairBound {
        bound: prefactor * rate.powi(n as i32),
        rate,
    })
}

/// Bound on `|<F G o F^n> - <F><G>|` for `F = f_0 . f_1 o F^-1 ... f_r o F^-r`
/// and `G = g_0 . g_1 o F ... g_k o F^k`, all `f_i` sharing `f`'s budget and
/// all `g_i` sharing `g`'s:
/// `C0 M_f^r M_g^k (K_f/(1-theta_f) M_g + M_f K_g/(1-theta_g) + M_f M_g) rate^n`.
pub fn billiard_multi_bound(
    f: &RegularityBudget,
    r: u32,
    g: &RegularityBudget,
    k: u32,
    c: &BilliardBoundConstants,
    n: u32,
) -> Result<f64, RegularityError> {
    require(f, ClassTag::HPlusStar, "f")?;
    require(g, ClassTag::HMinusStar, "g")?;
    c.validate()?;
    let rate = c.rate(f.theta, g.theta);
    let (mf, mg) = (f.sup_norm, g.sup_norm);
    let inner = f.k / (1.0 - f.theta) * mg + mf * g.k / (1.0 - g.theta) + mf * mg;
    Ok(c.c0 * mf.powi(r as i32) * mg.powi(k as i32) * inner * rate.powi(n as i32))
}

/// Hölder data of an observable on a torus: `||f||_s = sup + |f|_s` and
/// `||f||_u = L1 + |f|_u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnosovBudget {
    pub s_seminorm: f64,
    pub u_seminorm: f64,
    pub sup_norm: f64,
    pub l1_norm: f64,
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub delta: f64,
}

impl AnosovBudget {
    pub fn validate(&self) -> Result<(), RegularityError> {
        for (name, v) in [
            ("s-seminorm", self.s_seminorm),
            ("u-seminorm", self.u_seminorm),
            ("sup-norm", self.sup_norm),
            ("L1-norm", self.l1_norm),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(RegularityError::Invalid(format!("{name} = {v} must be >= 0")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("nu", self.nu)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(RegularityError::Invalid(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if !(self.delta > 0.0) {
            return Err(RegularityError::Invalid(format!("delta = {} must be > 0", self.delta)));
        }
        Ok(())
    }

    /// `||f||_s`
    pub fn s_norm(&self) -> f64 {
        self.sup_norm + self.s_seminorm
    }

    /// `||f||_u`
    pub fn u_norm(&self) -> f64 {
        self.l1_norm + self.u_seminorm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Stable,
    Unstable,
}

/// Bound on the s-norm of `g_0 . g_1 o F ... g_k o F^k` (stable side) or the
/// u-norm of `f_0 . f_1 o F^-1 ... f_r o F^-r` (unstable side):
///
/// `||.||_s <= (prod M_i)(1 + max |g_l|_s / min M_i) / (1 - nu^beta)`,
/// `||.||_u <= max(1, ||1||_1)(prod M_i)(1 + max |f_l|_u / min M_i) / (1 - nu^alpha)`.
pub fn anosov_product_norm(
    factors: &[AnosovBudget],
    side: Side,
    volume_of_one: f64,
) -> Result<f64, RegularityError> {
    let first = factors.first().ok_or(RegularityError::Empty)?;
    for f in factors {
        f.validate()?;
        if f.nu != first.nu || f.alpha != first.alpha || f.beta != first.beta {
            return Err(RegularityError::Invalid(
                "factors must share nu, alpha and beta".into(),
            ));
        }
    }
    if !(volume_of_one > 0.0) {
        return Err(RegularityError::Invalid(format!(
            "volume {volume_of_one} must be > 0"
        )));
    }
    let norms: Vec<f64> = factors.iter().map(|f| f.sup_norm).collect();
    let prod: f64 = norms.iter().product();
    let (seminorm, exponent, volume_factor) = match side {
        Side::Stable => (
            factors.iter().map(|f| f.s_seminorm).fold(0.0, f64::max),
            first.beta,
            1.0,
        ),
        Side::Unstable => (
            factors.iter().map(|f| f.u_seminorm).fold(0.0, f64::max),
            first.alpha,
            volume_of_one.max(1.0),
        ),
    };
    // prod M (1 + s / min M) = prod M + s * (prod M / min M)
    let bracket = prod + seminorm * product_without_min(&norms);
    Ok(volume_factor * bracket / (1.0 - first.nu.powf(exponent)))
}

/// Budget of a multi-time product whose s- and u-norms equal the bounds of
/// [`anosov_product_norm`] on the respective sides.
pub fn anosov_product_budget(
    factors: &[AnosovBudget],
    volume_of_one: f64,
) -> Result<AnosovBudget, RegularityError> {
    let s_norm = anosov_product_norm(factors, Side::Stable, volume_of_one)?;
    let u_norm = anosov_product_norm(factors, Side::Unstable, volume_of_one)?;
    let first = factors[0];
    let sup_norm: f64 = factors.iter().map(|f| f.sup_norm).product();
    let l1_norm = sup_norm * volume_of_one;
    Ok(AnosovBudget {
        s_seminorm: (s_norm - sup_norm).max(0.0),
        u_seminorm: (u_norm - l1_norm).max(0.0),
        sup_norm,
        l1_norm,
        ..first
    })
}

/// Constants of the Anosov pair-correlation bound, supplied externally.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnosovBoundConstants {
    pub theta: f64,
    pub c0: f64,
    pub volume_of_one: f64,
}

impl Default for AnosovBoundConstants {
    fn default() -> Self {
        Self {
            theta: 0.5,
            c0: 1.0,
            volume_of_one: 1.0,
        }
    }
}

impl AnosovBoundConstants {
    pub fn validate(&self) -> Result<(), RegularityError> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(RegularityError::Invalid(format!(
                "theta = {} must lie in (0, 1)",
                self.theta
            )));
        }
        if !(self.c0 > 0.0 && self.volume_of_one > 0.0) {
            return Err(RegularityError::Invalid("C0 and volume must be > 0".into()));
        }
        Ok(())
    }
}

/// `C0 ||f||_u ||g||_s theta^n`.
pub fn anosov_pair_bound(
    f: &AnosovBudget,
    g: &AnosovBudget,
    c: &AnosovBoundConstants,
    n: u32,
) -> Result<f64, RegularityError> {
    c.validate()?;
    Ok(c.c0 * f.u_norm() * g.s_norm() * c.theta.powi(n as i32))
}
