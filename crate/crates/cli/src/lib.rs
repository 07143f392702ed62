//! Batch front end for the `hyperlog` experiments.
//!
//! Each subcommand reads a [`Config`], runs one experiment and returns a CSV
//! body plus a short summary. Exit codes: 0 pass, 1 verdict failure,
//! 2 configuration or hypothesis error, 3 numerical failure.

pub mod config;

pub use config::{normalize, Config, ConfigError};

use hyperlog::barrier::{self, find_negativity_radius, Scan};
use hyperlog::shooting::{
    energy_trace, find_ground_state, fit_decay_exponent, integrate, Classification, Trajectory,
};
use hyperlog::threshold::{reports_csv, verify_threshold, MarginStatus, RhoCutRule, DEFAULT_EPS_GRID};
use hyperlog::variational::{
    constants_from_proof, estimate_s03, log_sobolev_residual, minimize_nehari, MinimizeOptions,
    RadialFunction, RadialGrid,
};
use hyperlog::{threshold, ProblemParams};
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Shoot,
    GroundState,
    Minimize,
    Threshold,
    Barrier,
    Logsob,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Shoot => "shoot",
            Self::GroundState => "ground-state",
            Self::Minimize => "minimize",
            Self::Threshold => "threshold",
            Self::Barrier => "barrier",
            Self::Logsob => "logsob",
        }
    }

    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Self::Shoot => &["n", "p", "lambda", "theta", "a", "rho_max", "tol"],
            Self::GroundState => &[
                "n", "p", "lambda", "theta", "a_lo", "a_hi", "tol", "r0", "a_min", "a_max", "points", "rho_max",
            ],
            Self::Minimize => &[
                "n", "p", "lambda", "theta", "r_max", "panels", "order", "max_iter", "step", "tol", "init_amplitude",
            ],
            Self::Threshold => &["n", "lambda", "theta", "eps", "rho_cut_rule", "rho_cut", "quad_tol", "t_bound"],
            Self::Barrier => &["n", "lambda0", "eps_max", "rho_lo", "rho_hi", "step"],
            Self::Logsob => &["n", "eps", "r_max", "s03_iter"],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    pub force: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Hypothesis(String),
    #[error("numerical failure: {0}")]
    Numerical(hyperlog::Error),
}

impl From<hyperlog::Error> for CliError {
    fn from(e: hyperlog::Error) -> Self {
        match e {
            hyperlog::Error::Hypothesis(m) => Self::Hypothesis(m),
            hyperlog::Error::InvalidParams(m) => Self::Config(ConfigError::Invalid(m)),
            other => Self::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Hypothesis(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: String,
    pub summary: String,
    pub pass: bool,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub fn run(cmd: Command, cfg: &Config, opts: RunOptions) -> Result<RunOutput, CliError> {
    cfg.check_keys(cmd.keys())?;
    let mut out = match cmd {
        Command::Shoot => shoot(cfg)?,
        Command::GroundState => ground_state(cfg, opts.force)?,
        Command::Minimize => minimize(cfg)?,
        Command::Threshold => threshold_cmd(cfg)?,
        Command::Barrier => barrier_cmd(cfg)?,
        Command::Logsob => logsob(cfg)?,
    };
    out.summary = format!("command={} seed={}\n{}", cmd.name(), opts.seed, out.summary);
    Ok(out)
}

fn params(cfg: &Config) -> Result<ProblemParams, CliError> {
    Ok(ProblemParams::new(
        cfg.get("n", 3u32)?,
        cfg.get("lambda", 0.0)?,
        cfg.get("theta", 1.0)?,
        cfg.get("p", 3.0)?,
    )?)
}

fn e16(x: f64) -> String {
    format!("{x:.16e}")
}

fn shoot(cfg: &Config) -> Result<RunOutput, CliError> {
    let params = params(cfg)?;
    let a_values = cfg.get_list("a", &[0.5, 1.0, 5.0, 10.0])?;
    let rho_max = cfg.get("rho_max", 60.0)?;
    let tol = cfg.get("tol", 1e-10)?;
    let mut csv = String::from("a,rho,u,uprime,E,classification\n");
    let mut summary = String::new();
    let mut pass = true;
    for &a in &a_values {
        if a < 0.0 {
            return Err(ConfigError::Invalid(format!("initial value a = {a} must be nonnegative")).into());
        }
        let traj = integrate(a, &params, rho_max, tol)?;
        let trace = energy_trace(&traj, &params);
        let slack = 10.0 * tol * trace.values[0].1.abs().max(1.0);
        let monotone = trace.max_increase() <= slack;
        pass &= monotone;
        let label = traj.classification.label();
        for (s, (_, e)) in traj.samples.iter().zip(&trace.values) {
            let _ = writeln!(csv, "{},{},{},{},{},{label}", e16(a), e16(s.rho), e16(s.u), e16(s.uprime), e16(*e));
        }
        let _ = writeln!(summary, "a={a} classification={label} rho_end={} energy_monotone={monotone}", traj.rho_end());
    }
    Ok(RunOutput { csv, summary, pass })
}

fn ground_state(cfg: &Config, force: bool) -> Result<RunOutput, CliError> {
    let params = params(cfg)?;
    if params.theta <= 0.0 {
        if !force {
            return Err(CliError::Hypothesis(format!(
                "theta = {} <= 0: positive finite-energy solutions do not exist in this regime; \
                 rerun with --force for a falsification sweep",
                params.theta
            )));
        }
        return falsification_sweep(cfg, &params);
    }
    let bracket = (cfg.get("a_lo", 1.0)?, cfg.get("a_hi", 10.0)?);
    let tol = cfg.get("tol", 1e-10)?;
    let r0 = cfg.get("r0", 1.0)?;
    let (a_star, traj) = find_ground_state(bracket, &params, tol)?;
    let end = traj.rho_end();
    let alpha = fit_decay_exponent(&traj, (end - 5.0, end))?;
    let bounds = barrier::decay_bounds_check(&traj, r0, params.n)?;
    let decreasing = traj.samples.iter().skip(1).all(|s| s.uprime < 0.0);
    let target = (f64::from(params.n) - 1.0) / 2.0;
    let alpha_ok = (alpha - target).abs() <= 0.05 * target;
    let summary = format!(
        "a_star={a_star}\nrho_end={end}\nalpha={alpha} target={target} within_5pct={alpha_ok}\n\
         C0={} C1={} ratio={} decay_verdict={}\nstrictly_decreasing={decreasing}\n",
        bounds.c0, bounds.c1, bounds.ratio, bounds.verdict
    );
    Ok(RunOutput { csv: traj.to_csv(&params), summary, pass: bounds.verdict && alpha_ok && decreasing })
}

fn falsification_sweep(cfg: &Config, params: &ProblemParams) -> Result<RunOutput, CliError> {
    let (lo, hi): (f64, f64) = (cfg.get("a_min", 1e-3)?, cfg.get("a_max", 20.0)?);
    let points: usize = cfg.get("points", 200)?;
    let rho_max = cfg.get("rho_max", 60.0)?;
    let tol = cfg.get("tol", 1e-10)?;
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(ConfigError::Invalid("need 0 < a_min < a_max and points >= 2".into()).into());
    }
    let limit = (f64::from(params.n) - 1.0) / 2.0 + 0.1;
    let mut csv = String::from("a,classification,rho_end,alpha\n");
    let (mut decaying, mut offenders) = (0, 0);
    for i in 0..points {
        let a = lo * (hi / lo).powf(i as f64 / (points - 1) as f64);
        let traj = integrate(a, params, rho_max, tol)?;
        let alpha = decaying_alpha(&traj);
        if let Some(al) = alpha {
            decaying += 1;
            offenders += usize::from(al > limit);
        }
        let shown = alpha.map_or("nan".to_string(), e16);
        let _ = writeln!(csv, "{},{},{},{shown}", e16(a), traj.classification.label(), e16(traj.rho_end()));
    }
    let summary = format!("falsification sweep: {points} shots, {decaying} decaying, {offenders} with alpha > {limit}\n");
    Ok(RunOutput { csv, summary, pass: offenders == 0 })
}

fn decaying_alpha(traj: &Trajectory) -> Option<f64> {
    if !matches!(traj.classification, Classification::DecaysPositive) {
        return None;
    }
    let end = traj.rho_end();
    fit_decay_exponent(traj, (end - 5.0, end)).ok()
}

fn minimize(cfg: &Config) -> Result<RunOutput, CliError> {
    let params = params(cfg)?;
    let r_max: f64 = cfg.get("r_max", 40.0)?;
    let panels = cfg.get("panels", (2.0 * r_max).round() as usize)?;
    let order = cfg.get("order", 8usize)?;
    let amp = cfg.get("init_amplitude", 1.0)?;
    if amp == 0.0 {
        return Err(ConfigError::Invalid("init_amplitude = 0 gives the zero profile".into()).into());
    }
    let d = MinimizeOptions::default();
    let opts = MinimizeOptions {
        max_iter: cfg.get("max_iter", d.max_iter)?,
        step: cfg.get("step", d.step)?,
        tol: cfg.get("tol", d.tol)?,
    };
    let grid = Arc::new(RadialGrid::new(params.n, r_max, panels, order)?);
    let init = RadialFunction::initial_profile(grid).scaled(amp);
    let out = minimize_nehari(&init, &params, &opts)?;
    let summary = format!(
        "d_p={}\nI={}\niterations={}\nconverged={}\nstationarity={}\nu0={}\n",
        out.d_p,
        out.report.i,
        out.log.len(),
        out.converged,
        out.stationarity,
        out.u.values[0]
    );
    Ok(RunOutput { csv: out.log_csv(), summary, pass: out.converged && out.d_p > 0.0 })
}

fn threshold_cmd(cfg: &Config) -> Result<RunOutput, CliError> {
    let n: u32 = cfg.get("n", 4)?;
    if n < 4 {
        return Err(CliError::Hypothesis(format!("the threshold estimate needs N >= 4 (N = {n})")));
    }
    let params = ProblemParams::critical(n, cfg.get("lambda", 0.0)?, cfg.get("theta", 1.0)?)?;
    if params.theta <= 0.0 {
        return Err(CliError::Hypothesis(format!("the threshold estimate needs theta > 0 (theta = {})", params.theta)));
    }
    let eps = cfg.get_list("eps", &DEFAULT_EPS_GRID)?;
    let rule_name: String = cfg.get("rho_cut_rule", if n == 4 { "proportional".into() } else { "fixed".to_string() })?;
    let rule = match rule_name.as_str() {
        "proportional" => RhoCutRule::Proportional(cfg.get("rho_cut", 4.0)?),
        "fixed" => RhoCutRule::Fixed(cfg.get("rho_cut", 0.1)?),
        other => return Err(ConfigError::BadValue { key: "rho_cut_rule".into(), value: other.into() }.into()),
    };
    let quad_tol = cfg.get("quad_tol", 1e-10)?;
    let t_bound = cfg.get("t_bound", 10.0)?;
    let reports = if t_bound == 10.0 {
        verify_threshold(&params, &eps, rule, quad_tol)?
    } else {
        eps.iter()
            .map(|&e| {
                threshold::BubbleSpec::new(e, rule.rho_cut(e), n)
                    .and_then(|s| threshold::threshold_point(&s, &params, quad_tol, t_bound))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut summary = String::new();
    for r in &reports {
        let _ = writeln!(summary, "eps={} rho_cut={} t_eps={} margin={} status={:?}", r.eps, r.rho_cut, r.t_eps, r.margin, r.status);
    }
    let pass = reports.iter().any(|r| r.status == MarginStatus::Positive);
    Ok(RunOutput { csv: reports_csv(&reports), summary, pass })
}

fn barrier_cmd(cfg: &Config) -> Result<RunOutput, CliError> {
    let n: u32 = cfg.get("n", 3)?;
    let d = Scan::default();
    let scan = Scan { rho_lo: cfg.get("rho_lo", d.rho_lo)?, rho_hi: cfg.get("rho_hi", d.rho_hi)?, step: cfg.get("step", d.step)? };
    let lambda0 = cfg.get("lambda0", 1.1 * hyperlog::params::lambda1(n))?;
    let report = find_negativity_radius(lambda0, cfg.get("eps_max", 1e-2)?, n, scan)?;
    let pass = report.r_found.is_some() && report.verdict.iter().all(|&v| v);
    Ok(RunOutput { csv: report.to_csv(), summary: report.summary(), pass })
}

type Family = (&'static str, fn(f64) -> f64);

const FAMILIES: [Family; 3] = [
    ("gaussian", |r| 3.0 * (-r * r).exp()),
    ("sech", |r| 0.2 * (0.5 * r).cosh().powi(-3)),
    ("bump", |r| if r < 2.0 { 50.0 * (1.0 - 0.25 * r * r).powi(2) } else { 0.0 }),
];

fn logsob(cfg: &Config) -> Result<RunOutput, CliError> {
    let n: u32 = cfg.get("n", 3)?;
    let default_eps: Vec<f64> = (0..20).map(|i| 10f64.powf(-2.0 + 4.0 * f64::from(i) / 19.0)).collect();
    let eps = cfg.get_list("eps", &default_eps)?;
    if let Some(e) = eps.iter().find(|e| e.is_nan() || **e <= 0.0) {
        return Err(ConfigError::Invalid(format!("eps = {e} must be strictly positive")).into());
    }
    let r_max = cfg.get("r_max", 40.0)?;
    let grid = Arc::new(RadialGrid::standard(n, r_max)?);
    let (s_val, s03) = if n == 2 {
        (0.0, estimate_s03(grid.clone(), cfg.get("s03_iter", 200usize)?)?)
    } else {
        (threshold::sobolev_constant(n, 1e-10)?, 0.0)
    };
    let (c1, c2) = constants_from_proof(n, s_val, s03)?;
    let mut csv = format!("# C1={},C2={}\nfamily,eps,residual\n", e16(c1), e16(c2));
    let mut worst = f64::INFINITY;
    for (name, f) in FAMILIES {
        let u = RadialFunction::from_fn(grid.clone(), f)?;
        for &e in &eps {
            let r = log_sobolev_residual(&u, e, c1, c2)?;
            worst = worst.min(r);
            let _ = writeln!(csv, "{name},{},{}", e16(e), e16(r));
        }
    }
    let summary = format!("C1={c1}\nC2={c2}\nmin_residual={worst}\n");
    Ok(RunOutput { csv, summary, pass: worst >= 0.0 })
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub struct CliChapter;
