use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::regularity::RegularityBudget;
use crate::Complex64;

/// Points that expose a coordinate in `[0, 1)`; the built-in interval and
/// torus observables read it.
pub trait FirstCoordinate {
    fn first_coordinate(&self) -> f64;
}

type EvalFn<P> = dyn Fn(&P) -> Complex64 + Send + Sync;

/// A complex-valued function on the phase space.
pub struct Observable<P> {
    name: String,
    eval: Arc<EvalFn<P>>,
    real: bool,
    sup_bound: Option<f64>,
    budget: Option<RegularityBudget>,
}

impl<P> Clone for Observable<P> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            eval: Arc::clone(&self.eval),
            real: self.real,
            sup_bound: self.sup_bound,
            budget: self.budget,
        }
    }
}

impl<P> fmt::Debug for Observable<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("real", &self.real)
            .field("sup_bound", &self.sup_bound)
            .field("budget", &self.budget)
            .finish()
    }
}

impl<P> Observable<P> {
    pub fn complex(
        name: impl Into<String>,
        f: impl Fn(&P) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            real: false,
            sup_bound: None,
            budget: None,
        }
    }

    pub fn real(name: impl Into<String>, f: impl Fn(&P) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(move |p| Complex64::new(f(p), 0.0)),
            real: true,
            sup_bound: None,
            budget: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::real(format!("constant({c})"), move |_| c).with_sup_bound(c.abs())
    }

    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    /// Attaches a regularity budget; its sup-norm becomes the sup bound.
    pub fn with_budget(mut self, budget: RegularityBudget) -> Self {
        self.sup_bound = Some(budget.sup_norm);
        self.budget = Some(budget);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn budget(&self) -> Option<&RegularityBudget> {
        self.budget.as_ref()
    }

    #[inline]
    pub fn eval(&self, p: &P) -> Complex64 {
        (self.eval)(p)
    }

    #[inline]
    pub fn eval_re(&self, p: &P) -> f64 {
        (self.eval)(p).re
    }
}

impl<P: FirstCoordinate + 'static> Observable<P> {
    /// `x`
    pub fn first_coordinate() -> Self {
        Self::real("first-coordinate", |p: &P| p.first_coordinate()).with_sup_bound(1.0)
    }

    /// `x - 1/2`
    pub fn sawtooth() -> Self {
        Self::real("sawtooth", |p: &P| p.first_coordinate() - 0.5).with_sup_bound(0.5)
    }

    /// `cos(2 pi x)`
    pub fn cos_first_coordinate() -> Self {
        Self::real("cos-first-coordinate", |p: &P| (TAU * p.first_coordinate()).cos())
            .with_sup_bound(1.0)
    }

    /// Piecewise-linear interpolation of `values` placed on the grid
    /// `{j / len}`; the last cell interpolates towards `values[0]`.
    pub fn tabulated(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "tabulated observable needs values");
        let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let values: Arc<[f64]> = values.into();
        Self::real("tabulated", move |p: &P| {
            let n = values.len();
            let s = p.first_coordinate() * n as f64;
            let j = (s.floor() as usize).min(n - 1);
            let frac = s - j as f64;
            let next = values[(j + 1) % n];
            values[j] + frac * (next - values[j])
        })
        .with_sup_bound(sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::UnitIntervalPoint;

    #[test]
    fn builtins_evaluate() {
        let x = UnitIntervalPoint::new(0.25).unwrap();
        assert_eq!(Observable::sawtooth().eval_re(&x), -0.25);
        assert!(Observable::cos_first_coordinate().eval_re(&x).abs() < 1e-15);
        assert_eq!(Observable::<UnitIntervalPoint>::constant(3.0).eval_re(&x), 3.0);
        let tab = Observable::tabulated(vec![0.0, 1.0, 0.0, -1.0]);
        assert_eq!(tab.eval_re(&x), 1.0);
        let y = UnitIntervalPoint::new(0.125).unwrap();
        assert_eq!(tab.eval_re(&y), 0.5);
        assert!(tab.is_real());
        assert_eq!(tab.sup_bound(), Some(1.0));
    }
}
