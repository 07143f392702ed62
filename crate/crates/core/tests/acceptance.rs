//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the report is printed on every run.
//! The process exits nonzero if any criterion fails.

use hyperlog::barrier::{
    convergence_order, f_eval_fd_error, find_negativity_radius, v_laplacian_fd_error, Scan,
};
use hyperlog::geometry::{hyperbolic_distance, mobius_translate, BallPoint};
use hyperlog::params::lambda1;
use hyperlog::shooting::{
    energy_trace, find_ground_state, fit_decay_exponent, integrate, Classification,
};
use hyperlog::threshold::{
    bns_integrals, bubble_norms, fit_order, sobolev_constant, sobolev_constant_closed_form,
    verify_threshold, BubbleSpec, MarginStatus, RhoCutRule, DEFAULT_EPS_GRID,
};
use hyperlog::variational::{
    constants_from_proof, eval_j, log_sobolev_residual, minimize_nehari, nehari_scale,
    MinimizeOptions, RadialFunction, RadialGrid,
};
use hyperlog::{barrier, ProblemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);
type Family = (&'static str, fn(f64) -> f64);

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> BallPoint {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 < 0.99 * 0.99 {
            return BallPoint::new(v).unwrap();
        }
    }
}

fn geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut iso, mut rt, mut tri) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let dim = rng.gen_range(2..6);
        let [b, x, y, z] = std::array::from_fn(|_| random_point(&mut rng, dim));
        let d = hyperbolic_distance(&x, &y).unwrap();
        let td = hyperbolic_distance(&mobius_translate(&b, &x).unwrap(), &mobius_translate(&b, &y).unwrap()).unwrap();
        iso = iso.max((td - d).abs());
        let d0 = hyperbolic_distance(&BallPoint::origin(dim), &x).unwrap();
        rt = rt.max(((0.5 * d0).tanh() - x.norm()).abs());
        let excess = hyperbolic_distance(&x, &z).unwrap() - d - hyperbolic_distance(&y, &z).unwrap();
        tri = tri.max(excess);
    }
    check(
        iso < 1e-10 && rt < 1e-10 && tri <= 1e-10,
        format!("isometry {iso:.2e}, round trip {rt:.2e}, triangle excess {tri:.2e}"),
    )
}

fn energy_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tol = 1e-10;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..50 {
        let n = 3 + (i % 2) as u32;
        let lambda = rng.gen_range(-1.0..1.0);
        let theta = if i % 4 < 2 { rng.gen_range(0.1..2.0) } else { rng.gen_range(-2.0..-0.1) };
        let params = ProblemParams::new(n, lambda, theta, 3.0).unwrap();
        let a = rng.gen_range(0.05..8.0);
        let traj = integrate(a, &params, 40.0, tol).map_err(|e| e.to_string())?;
        let trace = energy_trace(&traj, &params);
        let slack = 10.0 * tol * trace.values[0].1.abs().max(1.0);
        worst = worst.max(trace.max_increase() / slack);
    }
    check(worst <= 1.0, format!("max increase / (10 tol) = {worst:.3}"))
}

fn ground_state() -> Outcome {
    let params = ProblemParams::new(3, 0.0, 1.0, 3.0).unwrap();
    let (a, traj) = find_ground_state((1.0, 10.0), &params, 1e-10).map_err(|e| e.to_string())?;
    let decreasing = traj.samples.iter().skip(1).all(|s| s.uprime < 0.0);
    let end = traj.rho_end();
    let alpha = fit_decay_exponent(&traj, (end - 5.0, end)).map_err(|e| e.to_string())?;
    let bounds = barrier::decay_bounds_check(&traj, 1.0, 3).map_err(|e| e.to_string())?;
    let target = 1.0;
    check(
        matches!(traj.classification, Classification::DecaysPositive)
            && decreasing
            && (alpha - target).abs() <= 0.05 * target
            && bounds.verdict
            && bounds.ratio < 1e3,
        format!(
            "a* = {a:.6}, decreasing {decreasing}, alpha = {alpha:.3} (target 1), C1/C0 = {:.3e}, verdict {}",
            bounds.ratio, bounds.verdict
        ),
    )
}

fn random_profile(rng: &mut ChaCha8Rng, grid: &Arc<RadialGrid>) -> RadialFunction {
    let (a, k, b) = (rng.gen_range(0.1..5.0), rng.gen_range(1.0..4.0), rng.gen_range(0.0..0.5));
    RadialFunction::from_fn(grid.clone(), |r| a * (0.5 * r).cosh().powf(-k) * (-b * r * r).exp()).unwrap()
}

fn nehari() -> Outcome {
    let params = ProblemParams::new(3, 0.0, 1.0, 3.0).unwrap();
    let grid = Arc::new(RadialGrid::standard(3, 40.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut cert, mut scal, mut sign_ok) = (0.0f64, 0.0f64, true);
    for _ in 0..100 {
        let u = random_profile(&mut rng, &grid);
        let t0 = nehari_scale(&u, &params).map_err(|e| e.to_string())?;
        let rep = eval_j(&u.scaled(t0), &params).unwrap();
        cert = cert.max(rep.i.abs() / rep.i_scale(&params));
        let s = rng.gen_range(0.1..10.0);
        let ts = nehari_scale(&u.scaled(s), &params).unwrap();
        scal = scal.max((ts - t0 / s).abs() / (t0 / s));
        sign_ok &= eval_j(&u.scaled(0.5 * t0), &params).unwrap().i > 0.0;
        sign_ok &= eval_j(&u.scaled(2.0 * t0), &params).unwrap().i < 0.0;
    }
    check(
        cert < 1e-8 && scal < 1e-10 && sign_ok,
        format!("|I(t0 u)|/scale {cert:.2e}, scaling {scal:.2e}, sign change {sign_ok}"),
    )
}

fn dp_positive() -> Outcome {
    let params = ProblemParams::new(3, 0.0, 1.0, 3.0).unwrap();
    let opts = MinimizeOptions::default();
    let coarse = Arc::new(RadialGrid::standard(3, 40.0).unwrap());
    let fine = Arc::new(RadialGrid::new(3, 60.0, 2 * coarse.panels(), coarse.order()).unwrap());
    let a = minimize_nehari(&RadialFunction::initial_profile(coarse), &params, &opts).map_err(|e| e.to_string())?;
    let b = minimize_nehari(&RadialFunction::initial_profile(fine), &params, &opts).map_err(|e| e.to_string())?;
    let rel = (a.d_p - b.d_p).abs() / a.d_p;
    check(
        a.d_p > 0.0 && b.d_p > 0.0 && a.converged && b.converged && rel < 0.01,
        format!("d_p = {:.8} (R 40), {:.8} (R 60, nodes x2), relative change {rel:.2e}", a.d_p, b.d_p),
    )
}

fn threshold() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (n, rule) in [(4u32, RhoCutRule::Proportional(4.0)), (5, RhoCutRule::Fixed(0.1))] {
        let params = ProblemParams::critical(n, 0.0, 1.0).unwrap();
        let reports = verify_threshold(&params, &DEFAULT_EPS_GRID, rule, 1e-10).map_err(|e| e.to_string())?;
        let smallest = &reports[reports.len() - 2..];
        ok &= smallest.iter().all(|r| r.status == MarginStatus::Positive && r.margin > 0.0);
        let margins: Vec<String> = reports.iter().map(|r| format!("{:.3}", r.margin)).collect();
        msg.push(format!("N={n} margins [{}]", margins.join(", ")));
    }
    check(ok, msg.join("; "))
}

fn orders() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for n in [4u32, 5] {
        let s_half = bubble_norms(n, 1.0, 1e-12).unwrap().0;
        let ints: Vec<_> = DEFAULT_EPS_GRID
            .iter()
            .map(|&e| bns_integrals(&BubbleSpec::new(e, 0.1, n).unwrap(), 1e-12).unwrap())
            .collect();
        let g: Vec<f64> = ints.iter().map(|i| i.grad_sq - s_half).collect();
        let l: Vec<f64> = ints.iter().map(|i| i.l2star - s_half).collect();
        let (og, ol) = (fit_order(&DEFAULT_EPS_GRID, &g), fit_order(&DEFAULT_EPS_GRID, &l));
        let nf = f64::from(n);
        ok &= (og - (nf - 2.0)).abs() <= 0.3 && (ol - nf).abs() <= 0.5;
        msg.push(format!("N={n} grad order {og:.3}, l2star order {ol:.3}"));
    }
    let ratio = |e: f64| {
        let l2 = bns_integrals(&BubbleSpec::new(e, 0.1, 4).unwrap(), 1e-12).unwrap().l2;
        l2 / (e * e * e.ln().abs())
    };
    let (a, b) = (ratio(1e-5), ratio(1e-4));
    let spread = (a - b).abs() / a.max(b);
    ok &= spread < 0.1;
    msg.push(format!("N=4 l2/(e^2|ln e|) over [1e-5, 1e-4]: {b:.2} -> {a:.2}, spread {:.1}%", 100.0 * spread));
    check(ok, msg.join("; "))
}

fn sobolev() -> Outcome {
    let mut worst_pair = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for n in 3u32..=6 {
        let (g, l) = bubble_norms(n, 1.0, 1e-12).map_err(|e| e.to_string())?;
        worst_pair = worst_pair.max((g - l).abs() / g);
        let s = sobolev_constant(n, 1e-10).map_err(|e| e.to_string())?;
        let closed = sobolev_constant_closed_form(n);
        let s_half = closed.powf(f64::from(n) / 2.0);
        worst_oracle = worst_oracle.max(((s - closed) / closed).abs()).max(((g - s_half) / s_half).abs());
    }
    check(
        worst_pair < 1e-6 && worst_oracle < 1e-6,
        format!("grad vs 2* norm {worst_pair:.2e}, vs closed form {worst_oracle:.2e} (N = 3..6)"),
    )
}

fn barrier_lemmas() -> Outcome {
    let mut ok = true;
    let mut radii = Vec::new();
    for n in 3u32..=5 {
        for f in [1.1, 2.0] {
            let rep = find_negativity_radius(f * lambda1(n), 1e-2, n, Scan::default()).map_err(|e| e.to_string())?;
            ok &= rep.r_found.is_some() && rep.verdict.iter().all(|&v| v);
            radii.push(rep.r_found.map_or("none".to_string(), |r| format!("{r}")));
        }
    }
    let hs = [1e-2, 1e-3, 1e-4];
    let mut orders = Vec::new();
    for n in 3u32..=5 {
        for e in [0.0, 1e-3, 1e-2] {
            let errs: Vec<f64> = hs.iter().map(|&h| f_eval_fd_error(0.4, e, 1.1 * lambda1(n), n, h).unwrap()).collect();
            orders.push(convergence_order(&hs, &errs));
        }
        let (_, c) = barrier::default_v_params(n);
        let errs: Vec<f64> = hs.iter().map(|&h| v_laplacian_fd_error(1.0, c, n, h)).collect();
        orders.push(convergence_order(&hs, &errs));
    }
    let (lo, hi) = orders.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &o| (a.min(o), b.max(o)));
    ok &= lo >= 1.8 && hi <= 2.2;
    check(ok, format!("R = [{}], FD orders in [{lo:.3}, {hi:.3}]", radii.join(", ")))
}

fn log_sobolev() -> Outcome {
    let s = sobolev_constant(3, 1e-10).map_err(|e| e.to_string())?;
    let (c1, c2) = constants_from_proof(3, s, 0.0).map_err(|e| e.to_string())?;
    let grid = Arc::new(RadialGrid::standard(3, 40.0).unwrap());
    let families: [Family; 3] = [
        ("gaussian", |r| 3.0 * (-r * r).exp()),
        ("sech", |r| 0.2 * (0.5 * r).cosh().powi(-3)),
        ("bump", |r| if r < 2.0 { 50.0 * (1.0 - 0.25 * r * r).powi(2) } else { 0.0 }),
    ];
    let mut worst = f64::INFINITY;
    for (_, f) in families {
        let u = RadialFunction::from_fn(grid.clone(), f).unwrap();
        for i in 0..20 {
            let eps = 10f64.powf(-2.0 + 4.0 * f64::from(i) / 19.0);
            worst = worst.min(log_sobolev_residual(&u, eps, c1, c2).map_err(|e| e.to_string())?);
        }
    }
    check(worst >= 0.0, format!("C1 = {c1:.6}, C2 = {c2}, min residual {worst:.4e}"))
}

fn falsification() -> Outcome {
    let params = ProblemParams::new(3, 0.0, -1.0, 3.0).unwrap();
    let limit = 1.0 + 0.1;
    let (mut decaying, mut offenders) = (0, 0);
    for i in 0..200 {
        let a = 1e-3 * 2e4f64.powf(f64::from(i) / 199.0);
        let traj = integrate(a, &params, 60.0, 1e-10).map_err(|e| e.to_string())?;
        if matches!(traj.classification, Classification::DecaysPositive) {
            decaying += 1;
            let end = traj.rho_end();
            if fit_decay_exponent(&traj, (end - 5.0, end)).is_ok_and(|alpha| alpha > limit) {
                offenders += 1;
            }
        }
    }
    check(offenders == 0, format!("200 shots, {decaying} decaying, {offenders} with alpha > {limit}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("geometry invariants", geometry, Duration::from_secs(1)),
        ("energy monotonicity", energy_monotonicity, Duration::from_secs(10)),
        ("ground state decay", ground_state, Duration::from_secs(30)),
        ("Nehari scaling", nehari, Duration::from_secs(10)),
        ("positive d_p", dp_positive, Duration::from_secs(120)),
        ("critical threshold", threshold, Duration::from_secs(120)),
        ("bubble asymptotic orders", orders, Duration::from_secs(60)),
        ("Sobolev normalization", sobolev, Duration::from_secs(5)),
        ("barrier lemmas", barrier_lemmas, Duration::from_secs(10)),
        ("log-Sobolev residual", log_sobolev, Duration::from_secs(5)),
        ("negative theta sweep", falsification, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) => (elapsed < limit, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.3} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
