use serde::{Deserialize, Serialize};

use super::TransferError;
use crate::Complex64;

/// Samples of a complex function at the points `j / G`, `j = 0..G`.
///
/// Between samples the function is linear; on the last cell `[1 - 1/G, 1]`
/// the final segment is extended linearly, which keeps linear functions
/// exact everywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<Complex64>,
    descriptor: String,
}

impl GridFunction {
    pub fn new(values: Vec<Complex64>, descriptor: impl Into<String>) -> Result<Self, TransferError> {
        if values.len() < 2 {
            return Err(TransferError::Grid(format!("need at least 2 grid points, got {}", values.len())));
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(TransferError::Grid(format!("non-finite value at grid index {j}")));
        }
        Ok(Self {
            values,
            descriptor: descriptor.into(),
        })
    }

    pub fn from_fn(
        size: usize,
        descriptor: impl Into<String>,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self, TransferError> {
        let values = (0..size).map(|j| f(j as f64 / size as f64)).collect();
        Self::new(values, descriptor)
    }

    pub fn from_real_fn(
        size: usize,
        descriptor: impl Into<String>,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, TransferError> {
        Self::from_fn(size, descriptor, |x| Complex64::new(f(x), 0.0))
    }

    pub fn constant(size: usize, c: f64) -> Result<Self, TransferError> {
        Self::from_real_fn(size, format!("constant({c})"), |_| c)
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn with_descriptor(mut self, descriptor: impl Into<String>) -> Self {
        self.descriptor = descriptor.into();
        self
    }

    /// Grid abscissa `j / G`.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    /// Piecewise-linear evaluation for `x` in `[0, 1]`.
    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        let g = self.values.len();
        let s = x * g as f64;
        let j = (s.floor().max(0.0) as usize).min(g - 2);
        let frac = s - j as f64;
        self.values[j] + (self.values[j + 1] - self.values[j]) * frac
    }

    /// Trapezoid rule on `[0, 1]`, using the extrapolated value at 1.
    pub fn integral(&self) -> Complex64 {
        let g = self.values.len();
        let end = self.values[g - 1] * 2.0 - self.values[g - 2];
        let inner: Complex64 = self.values[1..].iter().sum();
        (self.values[0] * 0.5 + inner + end * 0.5) / g as f64
    }

    /// `sum_j |v_{j+1} - v_j|`, the variation over the grid partition and a
    /// lower bound for the true variation.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Mean of `|v_j|`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn check_size(&self, other: &GridFunction) -> Result<(), TransferError> {
        if self.size() == other.size() {
            Ok(())
        } else {
            Err(TransferError::Grid(format!(
                "grid sizes differ: {} vs {}",
                self.size(),
                other.size()
            )))
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction, TransferError> {
        self.check_size(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            descriptor: format!("({}) * ({})", self.descriptor, other.descriptor),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction, TransferError> {
        self.check_size(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            descriptor: format!("({}) - ({})", self.descriptor, other.descriptor),
        })
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            descriptor: self.descriptor.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            descriptor: self.descriptor.clone(),
        }
    }

    /// Largest `|self_j - other_j|`.
    pub fn max_deviation(&self, other: &GridFunction) -> Result<f64, TransferError> {
        self.check_size(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}
