//! Acceptance run: one pass/fail line per criterion, exit status 1 if any
//! criterion fails. Oracles are computed here, independently of the
//! library code they check.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::Rng;

use corrlab::billiard::{
    budget_violation_fraction, estimate_dynamical_holder, involution_check, mean_free_path_check,
    reflection_angle, sample_pairs, srb_invariance, BilliardGeometry, HolderSettings,
};
use corrlab::clt::{
    block_statistics, clt_test, green_kubo_variance, variance_convergence, BernsteinSchedule,
    BlockContext, Normalization, VAR_BUDGET,
};
use corrlab::correlations::{autocorrelation, Estimator};
use corrlab::dynamics::{BinaryExpansion, DoublingMap, Observable, ToralAutomorphism};
use corrlab::regularity::{
    billiard_multi_bound, billiard_pair_bound, multitime_budget, product_budget, pullback_budget,
    BilliardBoundConstants, ClassTag, Direction, RegularityBudget,
};
use corrlab::rng::StreamSeed;
use corrlab::transfer::{
    doubling_block_tv_bound, fit_geometric, gap_profile, lasota_yorke_residual,
    ly_grid_allowance, ulam_density, unimodular_factor, variation_recursion,
    verify_transfer_identity, GridFunction, LyConstants,
};
use corrlab::Complex64;
use corrlab_cli::{run, Command, ExperimentConfig};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

const ROOT: u64 = 0x5eed_2024;

fn seed(purpose: &str) -> StreamSeed {
    StreamSeed::new(ROOT, purpose)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `C(n) = 2^-n / 12` for the sawtooth under doubling.
fn sawtooth_correlation(n: usize) -> f64 {
    0.5f64.powi(n as i32) / 12.0
}

fn c1_sawtooth_law() -> Outcome {
    let started = Instant::now();
    let map = DoublingMap::new(1).map_err(err)?;
    let f = Observable::sawtooth();
    let lags: Vec<usize> = (0..=8).collect();
    let series = autocorrelation(&map, &f, &lags, 1_000_000, &seed("c1"), Estimator::Ensemble)
        .map_err(err)?;
    let mut worst: f64 = 0.0;
    for &n in &lags {
        let (c, se) = series.at(n).ok_or("missing lag")?;
        worst = worst.max((c.re - sawtooth_correlation(n)).abs() / se);
    }
    let gk = green_kubo_variance(&series, 8).map_err(err)?;
    let gk_err = (gk.sigma2 - 0.25).abs() / 0.25;
    let elapsed = started.elapsed();
    Ok((
        worst <= 3.0 && gk_err <= 0.02 && elapsed < Duration::from_secs(60),
        format!(
            "max |C - 2^-n/12| = {worst:.2} s.e. (<= 3); sigma2_GK = {:.5} rel err {:.2}% (<= 2%); {:.1}s (< 60s)",
            gk.sigma2,
            100.0 * gk_err,
            elapsed.as_secs_f64()
        ),
    ))
}

fn c2_clt() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    let doubling = DoublingMap::new(1).map_err(err)?;
    let cat = ToralAutomorphism::cat_map();
    for name in ["doubling", "cat map"] {
        let started = Instant::now();
        let s = seed(&format!("c2/{name}"));
        let (ks_emp, ks_gk, sigma2) = if name == "doubling" {
            clt_case(&doubling, &s)?
        } else {
            clt_case(&cat, &s)?
        };
        let elapsed = started.elapsed();
        let ok = ks_emp < 0.03
            && ks_gk < 0.03
            && (ks_emp - ks_gk).abs() < 0.01
            && elapsed < Duration::from_secs(120);
        pass &= ok;
        detail.push(format!(
            "{name}: KS emp {ks_emp:.4} GK {ks_gk:.4} (sigma2_GK {sigma2:.4}), |diff| {:.4}, {:.1}s",
            (ks_emp - ks_gk).abs(),
            elapsed.as_secs_f64()
        ));
    }
    Ok((pass, detail.join("; ")))
}

/// KS under both normalizations with a Green-Kubo variance estimated from
/// the autocorrelation series.
fn clt_case<S>(system: &S, seed: &StreamSeed) -> Result<(f64, f64, f64), String>
where
    S: corrlab::dynamics::DynamicalSystem,
    S::Point: corrlab::dynamics::FirstCoordinate + 'static,
{
    let f = Observable::<S::Point>::cos_first_coordinate();
    let lags: Vec<usize> = (0..=10).collect();
    let series = autocorrelation(system, &f, &lags, 1_000_000, &seed.derive("gk"), Estimator::Ensemble)
        .map_err(err)?;
    let sigma2 = green_kubo_variance(&series, 10).map_err(err)?.sigma2;
    let (report, _) = clt_test(
        system,
        &f,
        2000,
        5000,
        Normalization::Empirical,
        Some(0.0),
        sigma2,
        &seed.derive("test"),
    )
    .map_err(err)?;
    Ok((report.ks_empirical, report.ks_green_kubo, sigma2))
}

fn c3_variance_convergence() -> Outcome {
    let map = DoublingMap::new(1).map_err(err)?;
    let f = Observable::sawtooth();
    let plan = [(100, 1_000_000), (1000, 100_000), (10_000, 40_000)];
    let conv = variance_convergence(&map, &f, 0.25, &plan, &seed("c3")).map_err(err)?;
    let last = conv.rows.last().ok_or("empty table")?;
    let final_err = (last.ratio - 0.25).abs() / 0.25;
    let rows: Vec<String> = conv
        .rows
        .iter()
        .map(|r| format!("n={} |dev|={:.2e}+-{:.1e}", r.n, r.deviation, r.standard_error))
        .collect();
    let strict = conv.rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    Ok((
        conv.monotone_within_errors && final_err <= 0.05,
        format!(
            "{}; decreasing within 2 s.e.: {}; strictly decreasing point estimates: {strict}; final {:.4} rel err {:.2}% (<= 5%)",
            rows.join(", "),
            conv.monotone_within_errors,
            last.ratio,
            100.0 * final_err
        ),
    ))
}

fn c4_bernstein() -> Outcome {
    let map = DoublingMap::new(1).map_err(err)?;
    let f = Observable::cos_first_coordinate();
    let schedule = BernsteinSchedule::new(10_000, 0.4, 0.2).map_err(err)?;
    if (schedule.p, schedule.q, schedule.k) != (39, 6, 222) {
        return Ok((false, format!("schedule {schedule:?} is not (39, 6, 222)")));
    }
    let ctx = BlockContext::new(&map, &f, schedule, Some(0.0), &seed("c4/ctx"), VAR_BUDGET)
        .map_err(err)?;
    let ts = [0.0, 0.5, 1.0, 2.0, 4.0];
    let stats = block_statistics(&map, &f, &ctx, &ts, 100_000, &seed("c4/blocks")).map_err(err)?;
    let zero = &stats[0];
    let mut pass = zero.gap == 0.0;
    let mut max_gap: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    for s in &stats {
        max_gap = max_gap.max(s.gap);
        max_residual = max_residual.max(s.telescoping.identity_residual);
    }
    pass &= max_gap <= 0.1 && max_residual <= 1e-10;
    let gaps: Vec<String> = stats[1..].iter().map(|s| format!("t={}: {:.2e}", s.t, s.gap)).collect();
    Ok((
        pass,
        format!(
            "(p,q,k)=(39,6,222); gaps {} (<= 0.1); identity residual {max_residual:.1e} (<= 1e-10); t=0 gap {}",
            gaps.join(", "),
            zero.gap
        ),
    ))
}

fn rel_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn random_budget(rng: &mut impl Rng, class: ClassTag, min_sup: f64) -> RegularityBudget {
    RegularityBudget::new(
        rng.random_range(0.0..10.0),
        rng.random_range(0.01..0.99),
        rng.random_range(min_sup..5.0),
        class,
    )
    .expect("valid by construction")
}

/// `max(theta_U, theta_f, theta_g, e^{-1/kappa})^{1/4}`, written out again.
fn oracle_rate(c: &BilliardBoundConstants, tf: f64, tg: f64) -> f64 {
    let mut m = c.theta_upsilon;
    for v in [tf, tg, (-1.0 / c.kappa).exp()] {
        if v > m {
            m = v;
        }
    }
    m.sqrt().sqrt()
}

fn c5_regularity() -> Outcome {
    let mut rng = seed("c5").member(0);
    let cases = 1000;
    let mut failures = [0usize; 5];
    for _ in 0..cases {
        let f = random_budget(&mut rng, ClassTag::HPlusStar, 0.0);
        let g = random_budget(&mut rng, ClassTag::HMinusStar, 0.0);
        let c = BilliardBoundConstants::new(
            rng.random_range(0.01..0.99),
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
        )
        .map_err(err)?;

        let g2 = random_budget(&mut rng, ClassTag::HMinusStar, 0.0);
        let p = product_budget(&g, &g2).map_err(err)?;
        let ok = rel_close(p.k, g.sup_norm * g2.k + g.k * g2.sup_norm)
            && p.theta == g.theta.max(g2.theta)
            && rel_close(p.sup_norm, g.sup_norm * g2.sup_norm);
        failures[0] += usize::from(!ok);

        let steps = rng.random_range(0..25u32);
        let mut k = g.k;
        for _ in 0..steps {
            k *= g.theta;
        }
        let fwd = pullback_budget(&g, steps, Direction::Forward).map_err(err)?;
        let mut kb = f.k;
        for _ in 0..steps {
            kb *= f.theta;
        }
        let bwd = pullback_budget(&f, steps, Direction::Backward).map_err(err)?;
        let ok = rel_close(fwd.k, k) && fwd.theta == g.theta && rel_close(bwd.k, kb);
        failures[1] += usize::from(!ok);

        let m = rng.random_range(1..7);
        let factors: Vec<RegularityBudget> = (0..m)
            .map(|_| random_budget(&mut rng, ClassTag::HMinusStar, 0.1))
            .collect();
        let mut offsets = Vec::with_capacity(m);
        let mut next = rng.random_range(0..5usize);
        for _ in 0..m {
            offsets.push(next);
            next += rng.random_range(1..4usize);
        }
        let mt = multitime_budget(&factors, &offsets).map_err(err)?;
        let theta = factors.iter().map(|b| b.theta).fold(0.0, f64::max);
        let kmax = factors.iter().map(|b| b.k).fold(0.0, f64::max);
        let prod: f64 = factors.iter().map(|b| b.sup_norm).product();
        let min = factors.iter().map(|b| b.sup_norm).fold(f64::INFINITY, f64::min);
        let want = kmax * (prod / min) * theta.powf(offsets[0] as f64) / (1.0 - theta);
        let ok = rel_close(mt.k, want) && mt.theta == theta && rel_close(mt.sup_norm, prod);
        failures[2] += usize::from(!ok);

        let n = rng.random_range(0..60u32);
        let rate = oracle_rate(&c, f.theta, g.theta);
        let b = billiard_pair_bound(&f, &g, &c, n).map_err(err)?;
        let want = c.c0
            * (f.k * g.sup_norm + f.sup_norm * g.k + f.sup_norm * g.sup_norm)
            * rate.powf(n as f64);
        failures[3] += usize::from(!(rel_close(b.bound, want) && rel_close(b.rate, rate)));

        let (r, kk) = (rng.random_range(0..8u32), rng.random_range(0..8u32));
        let mb = billiard_multi_bound(&f, r, &g, kk, &c, n).map_err(err)?;
        let (mf, mg) = (f.sup_norm, g.sup_norm);
        let want = c.c0
            * mf.powf(r as f64)
            * mg.powf(kk as f64)
            * (f.k / (1.0 - f.theta) * mg + mf * g.k / (1.0 - g.theta) + mf * mg)
            * rate.powf(n as f64);
        failures[4] += usize::from(!rel_close(mb, want));
    }

    let mut unit_ok = true;
    for _ in 0..100 {
        let mut f = random_budget(&mut rng, ClassTag::HPlusStar, 0.0);
        let mut g = random_budget(&mut rng, ClassTag::HMinusStar, 0.0);
        f.sup_norm = 1.0;
        g.sup_norm = 1.0;
        let c = BilliardBoundConstants::default();
        let base = billiard_multi_bound(&f, 0, &g, 0, &c, 3).map_err(err)?;
        for r in 0..12 {
            for k in 0..12 {
                unit_ok &= billiard_multi_bound(&f, r, &g, k, &c, 3).map_err(err)? == base;
            }
        }
    }
    let names = ["product", "pullback", "multi-time", "pair bound", "multi bound"];
    let summary: Vec<String> = names
        .iter()
        .zip(failures)
        .map(|(n, f)| format!("{n} {}/{cases}", cases - f))
        .collect();
    Ok((
        failures.iter().all(|&f| f == 0) && unit_ok,
        format!(
            "{} agree to 1e-12; unit-norm prefactor r,k-independent: {unit_ok}",
            summary.join(", ")
        ),
    ))
}

/// Triangle wave with its kink at 1/3, off every dyadic grid.
fn kinked(x: f64) -> f64 {
    let d = (x - 1.0 / 3.0).abs();
    d.min(1.0 - d)
}

fn c6_transfer() -> Outcome {
    let doubling = DoublingMap::new(1).map_err(err)?;
    let mut pass = true;
    let mut detail = Vec::new();

    let phi = ulam_density(&doubling, 1024).map_err(err)?;
    let ulam_dev = phi.values().iter().map(|v| (v.re - 1.0).abs().max(v.im.abs())).fold(0.0, f64::max);
    pass &= ulam_dev <= 1e-10;
    detail.push(format!("Ulam |phi - 1| {ulam_dev:.1e}"));

    let mut devs = Vec::new();
    for size in [1024, 2048, 4096, 8192] {
        let f = GridFunction::from_real_fn(size, "kinked", kinked).map_err(err)?;
        let g = GridFunction::from_real_fn(size, "g", |x| 1.0 + 0.5 * (TAU * x).cos()).map_err(err)?;
        devs.push(verify_transfer_identity(&doubling, &f, &g).map_err(err)?);
    }
    let ratios: Vec<f64> = devs.windows(2).map(|w| w[1] / w[0]).collect();
    pass &= ratios.iter().all(|r| (r - 0.5).abs() <= 0.05);
    detail.push(format!(
        "identity ratios {}",
        ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join("/")
    ));

    let quad = DoublingMap::new(2).map_err(err)?;
    let mut rng = seed("c6/ly").member(0);
    let mut ly_pass = 0;
    for j in 0..20 {
        let coeffs: Vec<(f64, f64)> = (0..8)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..TAU)))
            .collect();
        let g = GridFunction::from_real_fn(4096, format!("random {j}"), |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(m, (a, b))| a * (TAU * (m + 1) as f64 * x + b).cos() / (m + 1) as f64)
                .sum()
        })
        .map_err(err)?;
        let residual = lasota_yorke_residual(&quad, &g, 1.0).map_err(err)?;
        ly_pass += usize::from(residual <= ly_grid_allowance(&g));
    }
    pass &= ly_pass == 20;
    detail.push(format!("Lasota-Yorke {ly_pass}/20"));

    // n chosen so that p = floor(n^0.4) is 10, 39 and 251; Var S_p = p / 2.
    let grid = 1 << 14;
    let one = GridFunction::constant(grid, 1.0).map_err(err)?;
    let cos = GridFunction::from_real_fn(grid, "cos", |x| (TAU * x).cos()).map_err(err)?;
    let ly = LyConstants::for_map(&doubling, 1.0).map_err(err)?;
    let mut tv = Vec::new();
    for n in [320, 10_000, 1_000_000] {
        let s = BernsteinSchedule::new(n, 0.4, 0.2).map_err(err)?;
        let g = unimodular_factor(&cos, 1.0 / (s.k as f64 * s.p as f64 / 2.0).sqrt());
        let (steps, _) = variation_recursion(&doubling, &g, s.p, &one, ly).map_err(err)?;
        let measured = steps.last().ok_or("no steps")?.measured;
        let bound = doubling_block_tv_bound(g.total_variation(), s.p);
        pass &= measured <= bound;
        tv.push(format!("p={}: {measured:.3e} <= {bound:.3e}", s.p));
    }
    detail.push(format!("V(H_(p-1)) {}", tv.join(", ")));

    // Gap profile for the sawtooth block factor, checked against a direct
    // Monte Carlo estimate of the same multiple-correlation gap.
    let s = BernsteinSchedule::new(10_000, 0.4, 0.2).map_err(err)?;
    let scale = 1.0 / (s.k as f64 * s.p as f64 / 12.0).sqrt();
    let saw = GridFunction::from_real_fn(grid, "sawtooth", |x| x - 0.5).map_err(err)?;
    let g = unimodular_factor(&saw, scale);
    let (_, h) = variation_recursion(&doubling, &g, s.p, &one, ly).map_err(err)?;
    let gamma = gap_profile(&doubling, &h, &one, 14).map_err(err)?;
    let fit = fit_geometric(&gamma, 1e-12).map_err(err)?;
    pass &= fit.log_residual < 0.2 && fit.rho < 1.0;
    detail.push(format!("gap fit rho {:.4} log residual {:.1e}", fit.rho, fit.log_residual));

    let mut mc_ok = true;
    for q in [0usize, 2, 4] {
        let (gap, se) = block_gap_mc(s.p, q, scale, 200_000, &seed(&format!("c6/mc/{q}")));
        mc_ok &= gap <= gamma[q] + 3.0 * se;
        detail.push(format!("q={q}: MC {gap:.2e}+-{se:.1e} vs Gamma {:.2e}", gamma[q]));
    }
    pass &= mc_ok;
    Ok((pass, detail.join("; ")))
}

/// `|<w_1 . w_1 o F^{p+q}> - <w_1>^2|` for the sawtooth block factor,
/// estimated from exact binary orbits.
fn block_gap_mc(p: usize, q: usize, scale: f64, samples: usize, seed: &StreamSeed) -> (f64, f64) {
    let batches = 20;
    let per = samples / batches;
    let mut estimates = Vec::with_capacity(batches);
    for b in 0..batches {
        let mut rng = seed.member(b as u64);
        let (mut m1, mut m2, mut m12) = (
            Complex64::default(),
            Complex64::default(),
            Complex64::default(),
        );
        for _ in 0..per {
            let mut x = BinaryExpansion::random(&mut rng, 2 * p + q + 64);
            let block = |x: &mut BinaryExpansion| {
                let mut sum = 0.0;
                for _ in 0..p {
                    sum += x.value() - 0.5;
                    x.shift(1);
                }
                Complex64::from_polar(1.0, scale * sum)
            };
            let w1 = block(&mut x);
            x.shift(q);
            let w2 = block(&mut x);
            m1 += w1;
            m2 += w2;
            m12 += w1 * w2;
        }
        let nf = per as f64;
        estimates.push(m12 / nf - (m1 / nf) * (m2 / nf));
    }
    let mean = estimates.iter().sum::<Complex64>() / batches as f64;
    let var = estimates.iter().map(|e| (e - mean).norm_sqr()).sum::<f64>() / (batches - 1) as f64;
    (mean.norm(), (var / batches as f64).sqrt())
}

fn c7_billiard() -> Outcome {
    let r = 0.25;
    let geom = BilliardGeometry::one_disk(r, 1e4).map_err(err)?;
    let srb = srb_invariance(&geom, 100_000, &seed("c7/srb")).map_err(err)?;
    let exact = (1.0 - PI * r * r) / (2.0 * r);
    let mfp = mean_free_path_check(&geom, 1_000_000, &seed("c7/mfp")).map_err(err)?;
    let mfp_err = (mfp.mean - exact).abs() / exact;
    let inv = involution_check(&geom, 1000, &seed("c7/involution")).map_err(err)?;
    let f = reflection_angle();
    let settings = HolderSettings::default();
    let fit = estimate_dynamical_holder(&geom, &f, &settings, &seed("c7/holder")).map_err(err)?;
    let (fresh, _) = sample_pairs(&geom, &f, &settings, &seed("c7/holder-fresh")).map_err(err)?;
    let fresh_violation = budget_violation_fraction(&fresh, fit.k_hat, fit.theta_hat);
    let pass = srb.pass
        && mfp_err <= 0.01
        && inv.max_deviation <= 1e-9
        && inv.mismatched == 0
        && fit.violation_fraction <= 0.01
        && fresh_violation <= 0.01;
    Ok((
        pass,
        format!(
            "SRB KS phi {:.4} arc {:.4} vs {:.4}; mean free path {:.4} vs {exact:.4} ({:.2}%); involution {:.1e} over {} collisions; Holder K {:.3} theta {:.3} violations {:.2}% fit, {:.2}% fresh",
            srb.ks_phi,
            srb.ks_arc,
            srb.critical,
            mfp.mean,
            100.0 * mfp_err,
            inv.max_deviation,
            inv.collisions - inv.skipped,
            fit.k_hat,
            fit.theta_hat,
            100.0 * fit.violation_fraction,
            100.0 * fresh_violation
        ),
    ))
}

const DETERMINISM_CONFIGS: &[(Command, &str)] = &[
    (
        Command::Correlations,
        "seed = 1\n[system]\nkind = \"doubling\"\n[observable]\nkind = \"sawtooth\"\n[budgets]\nsamples = 100000\n[correlations]\nmax_lag = 8\n",
    ),
    (
        Command::Clt,
        "seed = 2\n[system]\nkind = \"cat-map\"\n[observable]\nkind = \"cos-first-coordinate\"\nmean = 0.0\n[clt]\nsigma2 = 0.5\n",
    ),
    (
        Command::Bernstein,
        "seed = 3\n[system]\nkind = \"doubling\"\n[observable]\nkind = \"cos-first-coordinate\"\n[schedule]\nn = 2000\n[budgets]\nsamples = 10000\n",
    ),
    (
        Command::Transfer,
        "seed = 4\n[system]\nkind = \"doubling\"\npower = 2\n[budgets]\ngrid = 4096\n",
    ),
    (
        Command::BilliardCheck,
        "seed = 5\n[system]\nkind = \"billiard\"\ncap = 1000.0\nscatterers = [{ center = [0.5, 0.5], radius = 0.25 }]\n[observable]\nkind = \"reflection-angle\"\n[billiard]\nsamples = 10000\n",
    ),
    (
        Command::Simulate,
        "seed = 6\n[system]\nkind = \"tent\"\n[observable]\nkind = \"sawtooth\"\n",
    ),
];

fn c8_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for (i, (command, text)) in DETERMINISM_CONFIGS.iter().enumerate() {
        let mut config = ExperimentConfig::from_toml(text).map_err(err)?;
        let mut manifests = Vec::new();
        for (run_index, workers) in [1usize, 2].into_iter().enumerate() {
            config.workers = Some(workers);
            let out = dir.path().join(format!("{i}-{run_index}"));
            manifests.push((run(*command, &config, &out).map_err(err)?, out));
        }
        let (a, da) = &manifests[0];
        let (b, db) = &manifests[1];
        let same_files = a.files == b.files
            && a.files.iter().all(|f| {
                std::fs::read(da.join(&f.path)).ok() == std::fs::read(db.join(&f.path)).ok()
            });
        compared += a.files.len();
        if !same_files {
            mismatched.push(command.name());
        }
    }
    Ok((
        mismatched.is_empty(),
        format!(
            "{compared} files over {} commands bit-identical across reruns with 1 and 2 workers; mismatches: {mismatched:?}",
            DETERMINISM_CONFIGS.len()
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("C1", "doubling sawtooth autocorrelation law", c1_sawtooth_law),
        ("C2", "CLT under both normalizations", c2_clt),
        ("C3", "variance convergence", c3_variance_convergence),
        ("C4", "Bernstein block gaps", c4_bernstein),
        ("C5", "regularity calculus", c5_regularity),
        ("C6", "transfer-operator suite", c6_transfer),
        ("C7", "billiard substrate", c7_billiard),
        ("C8", "determinism", c8_determinism),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let started = Instant::now();
        let (pass, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{id} {} {name} [{:.1}s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
