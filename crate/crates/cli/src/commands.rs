//! One pipeline per command. Each writes its reports through [`OutputDir`]
//! and embeds [`Provenance`] in every JSON file and CSV header.

use std::f64::consts::TAU;

use rand::Rng;
use serde::Serialize;
use serde_json::Value;

use corrlab::billiard::{
    estimate_dynamical_holder, involution_check, mean_free_path_check, srb_invariance,
    validate_geometry, HStripParams, HolderSettings, TimeDirection,
};
use corrlab::clt::{
    block_statistics, clt_test, green_kubo_variance, variance_convergence, BernsteinSchedule,
    BlockContext, CltReport, GreenKubo, VarianceConvergence,
};
use corrlab::correlations::{
    autocorrelation, bound_consistency, fit_decay_rate, moment_condition, BoundCheck, Estimator,
};
use corrlab::dynamics::{DynamicalSystem, Observable, UnitIntervalPoint};
use corrlab::regularity::{
    anosov_pair_bound, billiard_multi_bound, billiard_pair_bound, multitime_budget,
    product_budget, pullback_budget, Direction, RegularityBudget,
};
use corrlab::rng::StreamSeed;
use corrlab::transfer::{
    doubling_block_tv_bound, fit_geometric, gap_profile, lasota_yorke_residual,
    ly_grid_allowance, pw_pair_bound, ulam_density, unimodular_factor, variation_recursion,
    verify_transfer_identity, GridFunction, LyConstants, TransferError,
};

use crate::config::{BudgetConfig, ExperimentConfig};
use crate::error::CliError;
use crate::output::{OutputDir, Provenance};
use crate::systems::{coordinate_observable, PointColumns, System};

/// Collisions checked for time reversal.
const INVOLUTION_COLLISIONS: usize = 1000;
/// Fourier modes of the random test functions for the Lasota-Yorke check.
const LY_MODES: usize = 8;

pub struct RunContext<'a> {
    pub config: &'a ExperimentConfig,
    pub provenance: Provenance,
    pub out: &'a mut OutputDir,
}

impl RunContext<'_> {
    fn seed(&self, purpose: &str) -> StreamSeed {
        StreamSeed::new(self.provenance.seed, purpose)
    }
}

fn describe<S: DynamicalSystem>(system: &S) -> Value {
    serde_json::to_value(system.descriptor()).expect("descriptor serializes")
}

fn note<T, E: std::fmt::Display>(r: Result<T, E>) -> (Option<T>, Option<String>) {
    match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

#[derive(Serialize)]
struct OrbitSummary {
    start: usize,
    steps_completed: usize,
    birkhoff_average: f64,
    /// Why the orbit stopped early, if it did.
    terminated: Option<String>,
}

pub fn simulate<S>(
    ctx: &mut RunContext,
    system: &S,
    f: &Observable<S::Point>,
) -> Result<(), CliError>
where
    S: DynamicalSystem,
    S::Point: PointColumns,
{
    let cfg = &ctx.config.simulate;
    let seed = ctx.seed("simulate");
    let mut header: Vec<&str> = vec!["start", "step"];
    header.extend(S::Point::columns());
    header.extend(["f_re", "f_im"]);
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for start in 0..cfg.starts {
        let mut x = system.sample_invariant(&mut seed.member(start as u64), cfg.steps + 1)?;
        let mut sum = 0.0;
        let mut terminated = None;
        let mut done = 0;
        for step in 0..=cfg.steps {
            let v = f.eval(&x);
            let mut row = vec![start as f64, step as f64];
            row.extend(x.values());
            row.extend([v.re, v.im]);
            rows.push(row);
            if step == cfg.steps {
                break;
            }
            sum += v.re;
            if let Err(e) = system.advance(&mut x) {
                terminated = Some(e.to_string());
                break;
            }
            done += 1;
        }
        summaries.push(OrbitSummary {
            start,
            steps_completed: done,
            birkhoff_average: if done > 0 { sum / done as f64 } else { f64::NAN },
            terminated,
        });
    }
    let provenance = ctx.provenance.with_budget(cfg.starts);
    ctx.out.write_table("orbit.csv", &provenance, &header, &rows)?;
    ctx.out.write_json(
        "simulate.json",
        &serde_json::json!({
            "provenance": provenance,
            "system": describe(system),
            "observable": f.name(),
            "steps": cfg.steps,
            "orbits": summaries,
        }),
    )
}

#[derive(Serialize)]
struct CorrelationRow {
    lag: usize,
    re: f64,
    im: f64,
    standard_error: f64,
}

type BoundFn = Box<dyn Fn(usize) -> f64>;

/// Bound on `|C_f(n)|` from the constants blocks, when the family has one.
fn correlation_bound(
    config: &ExperimentConfig,
    system: &System,
) -> Result<Option<(String, BoundFn)>, CliError> {
    let constants = &config.constants;
    match system {
        System::Billiard(_) => {
            let r = &config.regularity;
            let (f, g) = (budget(&r.f, "regularity.f")?, budget(&r.g, "regularity.g")?);
            let c = constants.billiard;
            billiard_pair_bound(&f, &g, &c, 0)?;
            Ok(Some((
                "billiard pair bound".into(),
                Box::new(move |n| {
                    billiard_pair_bound(&f, &g, &c, n as u32).map_or(f64::INFINITY, |b| b.bound)
                }),
            )))
        }
        System::Toral(_) => {
            let r = &config.regularity;
            let (Some(f), Some(g)) = (r.anosov_f, r.anosov_g) else {
                return Ok(None);
            };
            let c = constants.anosov;
            anosov_pair_bound(&f, &g, &c, 0)?;
            Ok(Some((
                "anosov pair bound".into(),
                Box::new(move |n| anosov_pair_bound(&f, &g, &c, n as u32).unwrap_or(f64::INFINITY)),
            )))
        }
        _ => {
            let f: Observable<UnitIntervalPoint> = coordinate_observable(&config.observable)?;
            let grid = grid_function(config.budgets.grid, &f)?;
            let (l1, tv) = (grid.l1_norm(), grid.total_variation());
            let c = constants.pw;
            pw_pair_bound(l1, l1, tv, &c, 0)?;
            Ok(Some((
                "expanding-map pair bound".into(),
                Box::new(move |n| pw_pair_bound(l1, l1, tv, &c, n as u32).unwrap_or(f64::INFINITY)),
            )))
        }
    }
}

pub fn correlations<S: DynamicalSystem>(
    ctx: &mut RunContext,
    whole: &System,
    system: &S,
    f: &Observable<S::Point>,
) -> Result<(), CliError> {
    let cc = &ctx.config.correlations;
    let budget = ctx.config.budgets.samples;
    let lags: Vec<usize> = (0..=cc.max_lag).collect();
    let series = autocorrelation(system, f, &lags, budget, &ctx.seed("correlations"), cc.estimator)?;
    let cutoff = cc.cutoff.unwrap_or(cc.max_lag);
    let (lo, hi) = cc.fit_window.map_or((1, cc.max_lag), |[lo, hi]| (lo, hi));
    let (decay_fit, decay_note) = note(fit_decay_rate(&series, lo..=hi));
    let (green_kubo, green_kubo_note) = if f.is_real() {
        note(green_kubo_variance(&series, cutoff))
    } else {
        (None, Some("complex observable".into()))
    };
    let moment = moment_condition(&series, cutoff)?;
    let (bound_name, checks): (Option<String>, Vec<BoundCheck>) =
        match correlation_bound(ctx.config, whole)? {
            Some((name, bound)) => (Some(name), bound_consistency(&series, bound)),
            None => (None, Vec::new()),
        };
    let rows: Vec<CorrelationRow> = series
        .lags()
        .iter()
        .zip(series.estimates())
        .zip(series.standard_errors())
        .map(|((&lag, c), &se)| CorrelationRow {
            lag,
            re: c.re,
            im: c.im,
            standard_error: se,
        })
        .collect();
    let provenance = ctx.provenance.with_budget(budget);
    ctx.out.write_csv("correlations.csv", &provenance, &rows)?;
    ctx.out.write_json(
        "correlations.json",
        &serde_json::json!({
            "provenance": provenance,
            "system": describe(system),
            "observable": f.name(),
            "series": series,
            "decay_fit": decay_fit,
            "decay_fit_note": decay_note,
            "green_kubo": green_kubo,
            "green_kubo_note": green_kubo_note,
            "moment_condition": moment,
            "bound": bound_name,
            "bound_checks": checks,
        }),
    )
}

#[derive(Serialize)]
struct CltOutput<'a> {
    provenance: Provenance,
    system: Value,
    observable: &'a str,
    #[serde(flatten)]
    report: CltReport,
    green_kubo: Option<GreenKubo>,
    convergence: Option<VarianceConvergence>,
}

pub fn clt<S: DynamicalSystem>(
    ctx: &mut RunContext,
    system: &S,
    f: &Observable<S::Point>,
) -> Result<(), CliError> {
    let cc = &ctx.config.clt;
    let seed = ctx.seed("clt");
    let (sigma2, green_kubo) = match cc.sigma2 {
        Some(s) => (s, None),
        None => {
            let lags: Vec<usize> = (0..=cc.gk_max_lag).collect();
            let series = autocorrelation(
                system,
                f,
                &lags,
                cc.gk_budget,
                &seed.derive("green-kubo"),
                Estimator::Ensemble,
            )?;
            let gk = green_kubo_variance(&series, cc.gk_max_lag)?;
            (gk.sigma2, Some(gk))
        }
    };
    let (report, normalized) = clt_test(
        system,
        f,
        cc.n,
        cc.samples,
        cc.normalization,
        ctx.config.observable.mean,
        sigma2,
        &seed.derive("test"),
    )?;
    let convergence = if cc.convergence.is_empty() {
        None
    } else {
        let plan: Vec<(usize, usize)> = cc.convergence.iter().map(|r| (r[0], r[1])).collect();
        Some(variance_convergence(system, f, sigma2, &plan, &seed.derive("convergence"))?)
    };
    let histogram = crate::output::emit_histogram(&normalized, cc.bins)?;
    let provenance = ctx.provenance.with_budget(cc.samples);
    ctx.out.write_csv("histogram.csv", &provenance, &histogram)?;
    ctx.out.write_json(
        "clt_report.json",
        &CltOutput {
            provenance,
            system: describe(system),
            observable: f.name(),
            report,
            green_kubo,
            convergence,
        },
    )
}

#[derive(Serialize)]
struct BlockRow {
    t: f64,
    gap: f64,
    gap_se: f64,
    gap_sum: f64,
    gap_sum_se: f64,
    identity_residual: f64,
}

pub fn bernstein<S: DynamicalSystem>(
    ctx: &mut RunContext,
    system: &S,
    f: &Observable<S::Point>,
) -> Result<(), CliError> {
    let sc = &ctx.config.schedule;
    let budgets = &ctx.config.budgets;
    let seed = ctx.seed("bernstein");
    let schedule = BernsteinSchedule::new(sc.n, sc.a, sc.b)?;
    let context = BlockContext::new(
        system,
        f,
        schedule,
        ctx.config.observable.mean,
        &seed.derive("context"),
        budgets.var_sp,
    )?;
    let stats = block_statistics(system, f, &context, &sc.t_grid, budgets.samples, &seed.derive("blocks"))?;
    let rows: Vec<BlockRow> = stats
        .iter()
        .map(|s| BlockRow {
            t: s.t,
            gap: s.gap,
            gap_se: s.gap_se,
            gap_sum: s.telescoping.gap_sum,
            gap_sum_se: s.telescoping.gap_sum_se,
            identity_residual: s.telescoping.identity_residual,
        })
        .collect();
    let provenance = ctx.provenance.with_budget(budgets.samples);
    ctx.out.write_csv("block_gaps.csv", &provenance, &rows)?;
    ctx.out.write_json(
        "bernstein.json",
        &serde_json::json!({
            "provenance": provenance,
            "system": describe(system),
            "observable": f.name(),
            "schedule": schedule,
            "covered_fraction": schedule.covered_fraction(),
            "long_block_fraction": schedule.long_block_fraction(),
            "block_ratio": schedule.block_ratio(),
            "context": context,
            "blocks": stats,
        }),
    )
}

fn grid_function(size: usize, f: &Observable<UnitIntervalPoint>) -> Result<GridFunction, CliError> {
    Ok(GridFunction::from_real_fn(size, f.name(), |x| {
        f.eval_re(&UnitIntervalPoint::new(x).expect("grid points lie in [0, 1)"))
    })?)
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    density: f64,
}

#[derive(Serialize)]
struct IdentityRow {
    grid: usize,
    deviation: f64,
    /// Deviation relative to the previous, coarser grid.
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct LyRow {
    function: usize,
    residual: f64,
    allowance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct BlockVariationRow {
    p: usize,
    measured: f64,
    recursion_bound: f64,
    four_v_g: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ProfileRow {
    q: usize,
    gamma: f64,
}

/// `sum_m a_m cos(2 pi m x + b_m) / m` with random `a_m`, `b_m`.
fn random_trig(size: usize, rng: &mut impl Rng, index: usize) -> Result<GridFunction, TransferError> {
    let coeffs: Vec<(f64, f64)> = (0..LY_MODES)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..TAU)))
        .collect();
    GridFunction::from_real_fn(size, format!("random-trig-{index}"), move |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(m, (a, b))| a * (TAU * (m + 1) as f64 * x + b).cos() / (m + 1) as f64)
            .sum()
    })
}

pub fn transfer(ctx: &mut RunContext, whole: &System) -> Result<(), CliError> {
    let map = whole.interval_map().ok_or_else(|| CliError::Config {
        field: Some("system.kind".into()),
        message: "transfer operators need an interval map".into(),
    })?;
    let tc = &ctx.config.transfer;
    let grid = ctx.config.budgets.grid;
    let pw = ctx.config.constants.pw;
    let f: Observable<UnitIntervalPoint> = coordinate_observable(&ctx.config.observable)?;

    let density = ulam_density(map, tc.ulam_bins)?;
    let density_rows: Vec<DensityRow> = (0..density.size())
        .map(|j| DensityRow {
            x: density.x(j),
            density: density.values()[j].re,
        })
        .collect();
    let dvals = density_rows.iter().map(|r| r.density);
    let (dmin, dmax) = dvals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)));

    let mut identity = Vec::new();
    for &g_size in &tc.identity_grids {
        let fg = grid_function(g_size, &f)?;
        let g = GridFunction::from_real_fn(g_size, "1 + cos/2", |x| 1.0 + 0.5 * (TAU * x).cos())?;
        let deviation = verify_transfer_identity(map, &fg, &g)?;
        let ratio = identity.last().map(|r: &IdentityRow| deviation / r.deviation);
        identity.push(IdentityRow {
            grid: g_size,
            deviation,
            ratio,
        });
    }

    let mut rng = ctx.seed("transfer/lasota-yorke").member(0);
    let mut ly_rows = Vec::new();
    let mut ly_note = None;
    for j in 0..tc.ly_functions {
        let g = random_trig(grid, &mut rng, j)?;
        match lasota_yorke_residual(map, &g, pw.a) {
            Ok(residual) => {
                let allowance = ly_grid_allowance(&g);
                ly_rows.push(LyRow {
                    function: j,
                    residual,
                    allowance,
                    pass: residual <= allowance,
                });
            }
            Err(TransferError::Precondition(m)) => {
                ly_note = Some(m);
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let phi = GridFunction::from_fn(grid, "density", |x| density.eval(x))?;
    let fg = grid_function(grid, &f)?;
    let g = unimodular_factor(&fg, tc.phase_scale);
    let (ly, ly_constants_note) = note(LyConstants::for_map(map, pw.a));
    let mut variation = Vec::new();
    let mut profile = Vec::new();
    let mut fit = (None, None);
    if let Some(ly) = ly {
        let schedule_p = BernsteinSchedule::new(
            ctx.config.schedule.n,
            ctx.config.schedule.a,
            ctx.config.schedule.b,
        )?
        .p;
        let mut ps = tc.p_values.clone();
        if !ps.contains(&schedule_p) {
            ps.push(schedule_p);
        }
        for &p in &ps {
            let (steps, h) = variation_recursion(map, &g, p, &phi, ly)?;
            let last = steps.last().expect("p >= 1");
            let four_v_g = doubling_block_tv_bound(g.total_variation(), p);
            if tc.p_values.contains(&p) {
                variation.push(BlockVariationRow {
                    p,
                    measured: last.measured,
                    recursion_bound: last.bound,
                    four_v_g,
                    pass: last.measured <= four_v_g,
                });
            }
            if p == schedule_p {
                profile = gap_profile(map, &h, &phi, tc.q_max)?
                    .into_iter()
                    .enumerate()
                    .map(|(q, gamma)| ProfileRow { q, gamma })
                    .collect();
                let gammas: Vec<f64> = profile.iter().map(|r: &ProfileRow| r.gamma).collect();
                fit = note(fit_geometric(&gammas, tc.fit_floor));
            }
        }
    }

    let provenance = ctx.provenance.with_budget(grid);
    ctx.out.write_csv("density.csv", &provenance, &density_rows)?;
    ctx.out.write_csv("gap_profile.csv", &provenance, &profile)?;
    ctx.out.write_json(
        "transfer.json",
        &serde_json::json!({
            "provenance": provenance,
            "map": map.name(),
            "observable": f.name(),
            "ulam": {
                "bins": tc.ulam_bins,
                "min_density": dmin,
                "max_density": dmax,
                "integral": density.integral().re,
            },
            "identity": identity,
            "lasota_yorke": ly_rows,
            "lasota_yorke_note": ly_note,
            "phase_scale": tc.phase_scale,
            "lasota_yorke_constants_note": ly_constants_note,
            "block_variation": variation,
            "gap_profile_fit": fit.0,
            "gap_profile_fit_note": fit.1,
        }),
    )
}

pub fn billiard_check(ctx: &mut RunContext, whole: &System) -> Result<(), CliError> {
    let System::Billiard(geom) = whole else {
        return Err(CliError::Config {
            field: Some("system.kind".into()),
            message: "billiard-check needs a billiard system".into(),
        });
    };
    let bc = &ctx.config.billiard;
    let seed = ctx.seed("billiard-check");
    let horizon = validate_geometry(geom, bc.samples, &seed.derive("horizon"))?;
    let geom = std::sync::Arc::new(geom.as_ref().clone().with_horizon(horizon.status));
    let srb = srb_invariance(&geom, bc.samples, &seed.derive("srb"))?;
    let free_path = mean_free_path_check(&geom, bc.samples, &seed.derive("free-path"))?;
    let involution = involution_check(&geom, INVOLUTION_COLLISIONS, &seed.derive("involution"))?;
    let f = crate::systems::billiard_observable(&geom, &ctx.config.observable)?;
    let settings = HolderSettings {
        pair_budget: ctx.config.budgets.pair_budget,
        cap: bc.separation_cap,
        direction: TimeDirection::Future,
        strips: HStripParams::new(bc.k0)?,
        log10_distance: (bc.log10_distance[0], bc.log10_distance[1]),
    };
    let holder = estimate_dynamical_holder(&geom, &f, &settings, &seed.derive("holder"))?;
    let provenance = ctx.provenance.with_budget(bc.samples);
    ctx.out.write_json(
        "billiard_check.json",
        &serde_json::json!({
            "provenance": provenance,
            "system": describe(geom.as_ref()),
            "observable": f.name(),
            "horizon": horizon,
            "srb_invariance": srb,
            "mean_free_path": free_path,
            "involution": involution,
            "holder_settings": settings,
            "holder": holder,
        }),
    )
}

fn budget(b: &BudgetConfig, name: &str) -> Result<RegularityBudget, CliError> {
    RegularityBudget::new(b.k, b.theta, b.sup, b.class).map_err(|e| CliError::Config {
        field: Some(name.into()),
        message: e.to_string(),
    })
}

#[derive(Serialize)]
struct BoundRow {
    n: u32,
    pair_bound: f64,
    multi_bound: f64,
    anosov_bound: Option<f64>,
}

pub fn regularity(ctx: &mut RunContext) -> Result<(), CliError> {
    let rc = &ctx.config.regularity;
    let constants = &ctx.config.constants;
    let f = budget(&rc.f, "regularity.f")?;
    let g = budget(&rc.g, "regularity.g")?;
    let (product, product_note) = note(product_budget(&f, &g));
    let forward: Vec<_> = (0..=rc.k)
        .map(|j| pullback_budget(&g, j, Direction::Forward))
        .collect::<Result<_, _>>()?;
    let backward: Vec<_> = (0..=rc.r)
        .map(|j| pullback_budget(&f, j, Direction::Backward))
        .collect::<Result<_, _>>()?;
    let offsets: Vec<usize> = (0..=rc.k as usize).collect();
    let multitime = multitime_budget(&vec![g; offsets.len()], &offsets)?;
    let anosov = match (rc.anosov_f, rc.anosov_g) {
        (Some(af), Some(ag)) => Some((af, ag)),
        _ => None,
    };
    let rows: Vec<BoundRow> = (0..=rc.n_max)
        .map(|n| {
            Ok(BoundRow {
                n,
                pair_bound: billiard_pair_bound(&f, &g, &constants.billiard, n)?.bound,
                multi_bound: billiard_multi_bound(&f, rc.r, &g, rc.k, &constants.billiard, n)?,
                anosov_bound: anosov
                    .map(|(af, ag)| anosov_pair_bound(&af, &ag, &constants.anosov, n))
                    .transpose()?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let rate = constants.billiard.rate(f.theta, g.theta);
    let provenance = ctx.provenance.with_budget(0);
    ctx.out.write_csv("bounds.csv", &provenance, &rows)?;
    ctx.out.write_json(
        "regularity.json",
        &serde_json::json!({
            "provenance": provenance,
            "f": f,
            "g": g,
            "product": product,
            "product_note": product_note,
            "g_forward_pullbacks": forward,
            "f_backward_pullbacks": backward,
            "g_multitime": multitime,
            "pair_rate": rate,
            "constants": constants,
            "r": rc.r,
            "k": rc.k,
        }),
    )
}
