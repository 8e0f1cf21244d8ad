use serde::{Deserialize, Serialize};

use super::schedule::BernsteinSchedule;
use super::variance::{estimate_mean, sum_variance};
use super::CltError;
use crate::correlations::{telescoping_gaps, TelescopingReport};
use crate::dynamics::{real_birkhoff_sum_in_place, advance_by, DynamicalSystem, DynamicsError, Observable};
use crate::rng::StreamSeed;
use crate::Complex64;

/// Sample budget for `Var S_p`.
pub const VAR_BUDGET: usize = 10_000;
/// Sample budget for an estimated mean.
pub const MEAN_BUDGET: usize = 100_000;
/// `Var S_p < DEGENERACY p sup|f|^2` counts as degenerate.
pub const DEGENERACY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MeanSource {
    Supplied,
    Estimated { budget: usize, standard_error: f64 },
}

/// Everything the block variables need besides the point: the schedule, the
/// centering and the cached `Var S_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockContext {
    pub schedule: BernsteinSchedule,
    pub mean: f64,
    pub mean_source: MeanSource,
    /// Variance of the centered `S_p` under the invariant measure.
    pub var_sp: f64,
    pub var_sp_se: f64,
    pub var_budget: usize,
}

impl BlockContext {
    /// Centers `f` by `mean` (estimated when `None`) and estimates `Var S_p`
    /// from `var_budget` starts.
    pub fn new<S: DynamicalSystem>(
        system: &S,
        f: &Observable<S::Point>,
        schedule: BernsteinSchedule,
        mean: Option<f64>,
        seed: &StreamSeed,
        var_budget: usize,
    ) -> Result<Self, CltError> {
        if !f.is_real() {
            return Err(CltError::Invalid(format!("observable {} is not real", f.name())));
        }
        let (mean, mean_source) = match mean {
            Some(m) => (m, MeanSource::Supplied),
            None => {
                let (m, se) = estimate_mean(system, f, MEAN_BUDGET, &seed.derive("mean"))?;
                (
                    m,
                    MeanSource::Estimated {
                        budget: MEAN_BUDGET,
                        standard_error: se,
                    },
                )
            }
        };
        let sp = sum_variance(system, f, schedule.p, mean, var_budget, &seed.derive("var-sp"))?;
        let sup = f.sup_bound().unwrap_or(sp.max_abs_f);
        if !(sp.variance >= DEGENERACY * schedule.p as f64 * sup * sup) || sp.variance == 0.0 {
            return Err(CltError::Degenerate(format!(
                "Var S_p = {:e} for p = {} and sup|f| = {sup}",
                sp.variance, schedule.p
            )));
        }
        Ok(Self {
            schedule,
            mean,
            mean_source,
            var_sp: sp.variance,
            var_sp_se: sp.standard_error,
            var_budget,
        })
    }

    /// `1 / sqrt(k Var S_p)`
    pub fn phase_scale(&self) -> f64 {
        1.0 / (self.schedule.k as f64 * self.var_sp).sqrt()
    }
}

/// Centered long-block sums `S_p^{(r)}(x)`, `r = 1..=k`, from one orbit.
pub fn block_sums<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    ctx: &BlockContext,
    x: &S::Point,
) -> Result<Vec<f64>, DynamicsError> {
    let BernsteinSchedule { p, q, k, .. } = ctx.schedule;
    let centre = p as f64 * ctx.mean;
    let mut cur = x.clone();
    let mut out = Vec::with_capacity(k);
    for r in 0..k {
        out.push(real_birkhoff_sum_in_place(system, f, &mut cur, p)? - centre);
        if r + 1 < k {
            advance_by(system, &mut cur, q)?;
        }
    }
    Ok(out)
}

/// `w = exp(i t S / sqrt(k Var S_p))` for each block sum.
pub fn block_values(sums: &[f64], ctx: &BlockContext, t: f64) -> Vec<Complex64> {
    let scale = t * ctx.phase_scale();
    sums.iter()
        .map(|s| Complex64::from_polar(1.0, scale * s))
        .collect()
}

/// `w_r(x) = prod_{j<p} g(F^{(p+q)(r-1)+j} x)` with
/// `g = exp(i t (f - <f>) / sqrt(k Var S_p))`, evaluated as one phase.
pub fn block_variable<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    ctx: &BlockContext,
    t: f64,
    x: &S::Point,
    r: usize,
) -> Result<Complex64, CltError> {
    let s = ctx.schedule;
    if r == 0 || r > s.k {
        return Err(CltError::Invalid(format!("block index {r} outside 1..={}", s.k)));
    }
    let mut cur = x.clone();
    advance_by(system, &mut cur, s.block_start(r))?;
    let sum = real_birkhoff_sum_in_place(system, f, &mut cur, s.p)? - s.p as f64 * ctx.mean;
    Ok(Complex64::from_polar(1.0, t * ctx.phase_scale() * sum))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStatistics {
    pub t: f64,
    /// `|<w_1 ... w_k> - <w_1> ... <w_k>|`
    pub gap: f64,
    pub gap_se: f64,
    pub telescoping: TelescopingReport,
}

/// Block gaps, per-block telescoping gaps and the identity residual for every
/// `t` in `ts`, from one orbit per sample.
pub fn block_statistics<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    ctx: &BlockContext,
    ts: &[f64],
    budget: usize,
    seed: &StreamSeed,
) -> Result<Vec<BlockStatistics>, CltError> {
    if ts.is_empty() {
        return Err(CltError::Invalid("empty t grid".into()));
    }
    let s = ctx.schedule;
    let horizon = s.k * (s.p + s.q);
    let reports = telescoping_gaps(budget, ts.len(), |i| {
        let mut rng = seed.member(i);
        let x = system.sample_invariant(&mut rng, horizon)?;
        let sums = block_sums(system, f, ctx, &x)?;
        Ok(ts.iter().map(|&t| block_values(&sums, ctx, t)).collect())
    })?;
    Ok(ts
        .iter()
        .zip(reports)
        .map(|(&t, r)| BlockStatistics {
            t,
            gap: r.direct.norm(),
            gap_se: r.direct_se,
            telescoping: r,
        })
        .collect())
}

/// `|<w_1 ... w_k> - <w_1> ... <w_k>|` and its standard error at one `t`.
pub fn block_gap<S: DynamicalSystem>(
    system: &S,
    f: &Observable<S::Point>,
    ctx: &BlockContext,
    t: f64,
    budget: usize,
    seed: &StreamSeed,
) -> Result<(f64, f64), CltError> {
    let stats = block_statistics(system, f, ctx, &[t], budget, seed)?;
    Ok((stats[0].gap, stats[0].gap_se))
}
