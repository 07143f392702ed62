//! Radial shooting for `u'' + (N-1) coth(ρ) u' + λu + |u|^{p-1}u + θ u ln u² = 0`,
//! `u(0) = a`, `u'(0) = 0`.
//!
//! Trajectories are integrated with an embedded Dormand–Prince 5(4) pair and
//! classified as crossing zero, decaying while positive, or neither.
//!
//! ```
//! use hyperlog::{ProblemParams, shooting::{integrate, Classification}};
//! let params = ProblemParams::new(3, 0.0, 1.0, 3.0).unwrap();
//! let traj = integrate(10.0, &params, 20.0, 1e-9).unwrap();
//! assert!(matches!(traj.classification, Classification::CrossesZero { .. }));
//! ```

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use std::fmt::Write as _;

/// Below this radius the series `coth ρ ≈ 1/ρ + ρ/3` is used.
pub const SERIES_RADIUS: f64 = 1e-4;
/// `u² + u'²` below this (with `u > 0` throughout) counts as decayed.
pub const DECAY_FLOOR: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub rho: f64,
    pub u: f64,
    pub uprime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    /// First zero of `u`, located by Hermite interpolation.
    CrossesZero { rho_star: f64 },
    DecaysPositive,
    /// Neither event seen up to `rho_end`.
    Indeterminate { rho_end: f64 },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Self::CrossesZero { .. } => "crosses_zero",
            Self::DecaysPositive => "decays_positive",
            Self::Indeterminate { .. } => "indeterminate",
        }
    }

    pub fn crosses(&self) -> bool {
        matches!(self, Self::CrossesZero { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub classification: Classification,
    pub initial_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub values: Vec<(f64, f64)>,
}

impl EnergyTrace {
    /// Largest `E(ρ₂) - E(ρ₁)` over `ρ₂ > ρ₁`; zero for a non-increasing trace.
    pub fn max_increase(&self) -> f64 {
        let mut running_min = f64::INFINITY;
        let mut worst = 0.0f64;
        for &(_, e) in &self.values {
            worst = worst.max(e - running_min);
            running_min = running_min.min(e);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub rho_max: f64,
    /// Local error allowed per unit of ρ, relative to the solution size.
    pub tol: f64,
    pub max_step: f64,
    /// Stop as soon as the energy is clearly negative: such a trajectory can
    /// neither reach zero nor decay, since the potential vanishes at 0.
    pub trapped_exit: bool,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { rho_max: 60.0, tol: 1e-10, max_step: 0.1, trapped_exit: true }
    }
}

/// Right-hand side `u''` of the radial equation.
pub fn ode_rhs(rho: f64, u: f64, uprime: f64, params: &ProblemParams) -> Result<f64> {
    if !(rho.is_finite() && u.is_finite() && uprime.is_finite()) {
        return Err(Error::NonFinite("ode_rhs argument"));
    }
    if rho < 0.0 {
        return Err(Error::InvalidParams(format!("rho = {rho} < 0")));
    }
    Ok(rhs(rho, u, uprime, params))
}

#[inline]
fn rhs(rho: f64, u: f64, v: f64, params: &ProblemParams) -> f64 {
    let f = params.nonlinearity(u);
    if rho == 0.0 {
        return -f / params.nf();
    }
    -(params.nf() - 1.0) * coth(rho) * v - f
}

#[inline]
fn coth(rho: f64) -> f64 {
    if rho < SERIES_RADIUS {
        1.0 / rho + rho / 3.0
    } else {
        1.0 / rho.tanh()
    }
}

/// `E = u'²/2 + F(u)`, non-increasing along solutions.
pub fn energy(u: f64, uprime: f64, params: &ProblemParams) -> f64 {
    0.5 * uprime * uprime + params.potential(u)
}

pub fn energy_trace(traj: &Trajectory, params: &ProblemParams) -> EnergyTrace {
    EnergyTrace {
        values: traj.samples.iter().map(|s| (s.rho, energy(s.u, s.uprime, params))).collect(),
    }
}

// Dormand–Prince 5(4)
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 2];

fn f(rho: f64, y: State, params: &ProblemParams) -> State {
    [y[1], rhs(rho, y[0], y[1], params)]
}

/// One DP step; returns the 5th-order state, its derivative (FSAL) and the error vector.
fn dp_step(rho: f64, y: State, k1: State, h: f64, params: &ProblemParams) -> (State, State, State) {
    let mut k = [[0.0; 2]; 7];
    k[0] = k1;
    for s in 1..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            ys[0] += h * A[s][j] * kj[0];
            ys[1] += h * A[s][j] * kj[1];
        }
        if s == 6 {
            // stage 7 point is the 5th-order solution itself
            k[6] = f(rho + h, ys, params);
            let mut err = [0.0; 2];
            for (j, kj) in k.iter().enumerate() {
                let e = A[6].get(j).copied().unwrap_or(0.0) - B4[j];
                err[0] += h * e * kj[0];
                err[1] += h * e * kj[1];
            }
            return (ys, k[6], err);
        }
        k[s] = f(rho + C[s] * h, ys, params);
    }
    unreachable!()
}

/// Cubic Hermite interpolation of `u` on `[s0, s1]`.
fn hermite(s0: &Sample, s1: &Sample, rho: f64) -> f64 {
    let h = s1.rho - s0.rho;
    let t = (rho - s0.rho) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * s0.u
        + (t3 - 2.0 * t2 + t) * h * s0.uprime
        + (-2.0 * t3 + 3.0 * t2) * s1.u
        + (t3 - t2) * h * s1.uprime
}

impl Trajectory {
    /// Interpolated `u(ρ)`, or `None` outside the sampled range.
    pub fn u_at(&self, rho: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() || rho < s[0].rho || rho > s[s.len() - 1].rho {
            return None;
        }
        let k = s.partition_point(|x| x.rho <= rho);
        if k == 0 {
            return Some(s[0].u);
        }
        if k >= s.len() {
            return Some(s[s.len() - 1].u);
        }
        Some(hermite(&s[k - 1], &s[k], rho))
    }

    pub fn rho_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.rho)
    }

    /// CSV with columns `rho,u,uprime,E`.
    pub fn to_csv(&self, params: &ProblemParams) -> String {
        let mut out = String::from("rho,u,uprime,E\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                s.rho,
                s.u,
                s.uprime,
                energy(s.u, s.uprime, params)
            );
        }
        out
    }
}

/// Integrate from `u(0) = a` with default options apart from `rho_max` and `tol`.
pub fn integrate(a: f64, params: &ProblemParams, rho_max: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(a, params, &ShootOptions { rho_max, tol, ..ShootOptions::default() })
}

pub fn integrate_with(a: f64, params: &ProblemParams, opts: &ShootOptions) -> Result<Trajectory> {
    if !a.is_finite() {
        return Err(Error::NonFinite("initial value"));
    }
    if !(opts.rho_max > 0.0 && opts.tol > 0.0) {
        return Err(Error::InvalidParams("rho_max and tol must be positive".into()));
    }
    let mut samples = vec![Sample { rho: 0.0, u: a, uprime: 0.0 }];
    if a == 0.0 {
        samples.push(Sample { rho: opts.rho_max, u: 0.0, uprime: 0.0 });
        return Ok(Trajectory {
            samples,
            classification: Classification::Indeterminate { rho_end: opts.rho_max },
            initial_value: a,
        });
    }
    let e0 = energy(a, 0.0, params);
    let slack = 10.0 * opts.tol * e0.abs().max(1.0);
    let floor = 1e-12;
    let mut rho = 0.0;
    let mut y: State = [a, 0.0];
    let mut k1 = f(rho, y, params);
    let mut h = 1e-3f64.min(opts.max_step);
    let positive_start = a > 0.0;
    let classification;
    loop {
        if rho >= opts.rho_max {
            classification = Classification::Indeterminate { rho_end: rho };
            break;
        }
        h = h.min(opts.max_step).min(opts.rho_max - rho);
        if h < 1e-13 * (1.0 + rho) {
            return Err(Error::IntegrationFailure { last_rho: rho });
        }
        let (yn, kn, err) = dp_step(rho, y, k1, h, params);
        let scale = y[0].abs().max(y[1].abs()).max(yn[0].abs()).max(yn[1].abs()).max(floor);
        let en = err[0].abs().max(err[1].abs()) / scale;
        if !en.is_finite() || !yn[0].is_finite() || !yn[1].is_finite() {
            h *= 0.2;
            continue;
        }
        let allowed = opts.tol * h;
        if en > allowed {
            h *= (0.9 * (allowed / en).powf(0.25)).clamp(0.1, 0.9);
            continue;
        }
        rho += h;
        y = yn;
        k1 = kn;
        let s = Sample { rho, u: y[0], uprime: y[1] };
        samples.push(s);
        let sign_changed = if positive_start { y[0] <= 0.0 } else { y[0] >= 0.0 };
        if sign_changed {
            let s0 = samples[samples.len() - 2];
            let rho_star = crate::quad::find_root(|r| hermite(&s0, &s, r), s0.rho, s.rho, 1e-15)
                .unwrap_or(s.rho);
            classification = Classification::CrossesZero { rho_star };
            break;
        }
        if y[0] * y[0] + y[1] * y[1] < DECAY_FLOOR {
            classification = Classification::DecaysPositive;
            break;
        }
        if opts.trapped_exit && energy(y[0], y[1], params) < -slack {
            classification = Classification::Indeterminate { rho_end: rho };
            break;
        }
        let fac = if en == 0.0 { 5.0 } else { (0.9 * (allowed / en).powf(0.25)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Ok(Trajectory { samples, classification, initial_value: a })
}

/// Scan initial values and return every consecutive pair whose classes differ in
/// crossing behaviour.
pub fn scan_brackets(a_values: &[f64], params: &ProblemParams, opts: &ShootOptions) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, bool)> = None;
    for &a in a_values {
        let c = integrate_with(a, params, opts)?.classification.crosses();
        if let Some((pa, pc)) = prev {
            if pc != c {
                out.push((pa, a));
            }
        }
        prev = Some((a, c));
    }
    Ok(out)
}

/// Bisect on `u(0)` between a crossing and a non-crossing value.
///
/// Double precision can follow the separating trajectory only while it stays
/// well above round-off, so the returned trajectory is the non-crossing side
/// cut where it and its crossing partner separate by 1% or where it stops
/// decreasing, whichever comes first.
pub fn find_ground_state(bracket: (f64, f64), params: &ProblemParams, tol: f64) -> Result<(f64, Trajectory)> {
    find_ground_state_with(bracket, params, tol, &ShootOptions::default())
}

pub fn find_ground_state_with(
    bracket: (f64, f64),
    params: &ProblemParams,
    tol: f64,
    opts: &ShootOptions,
) -> Result<(f64, Trajectory)> {
    if params.theta <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "ground states are sought only for theta > 0 (theta = {})",
            params.theta
        )));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > 0.0 && tol > 0.0) {
        return Err(Error::InvalidParams("bracket endpoints and tol must be positive".into()));
    }
    let mut t_lo = integrate_with(lo, params, opts)?;
    let mut t_hi = integrate_with(hi, params, opts)?;
    if t_lo.classification.crosses() == t_hi.classification.crosses() {
        return Err(Error::Bracket(format!(
            "u(0) = {lo} and u(0) = {hi} are both {}",
            t_lo.classification.label()
        )));
    }
    // keep `lo` on the non-crossing side
    if t_lo.classification.crosses() {
        std::mem::swap(&mut lo, &mut hi);
        std::mem::swap(&mut t_lo, &mut t_hi);
    }
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let t = integrate_with(mid, params, opts)?;
        if t.classification.crosses() {
            hi = mid;
            t_hi = t;
        } else {
            lo = mid;
            t_lo = t;
        }
    }
    let mut cut = t_lo.samples.len();
    for (i, s) in t_lo.samples.iter().enumerate().skip(1) {
        let separated = t_hi.u_at(s.rho).is_none_or(|v| (v - s.u).abs() > 0.01 * s.u.abs());
        if s.uprime >= 0.0 || s.u <= 0.0 || separated {
            cut = i;
            break;
        }
    }
    let mut samples = t_lo.samples;
    samples.truncate(cut.max(2));
    let traj = Trajectory { samples, classification: Classification::DecaysPositive, initial_value: lo };
    Ok((lo, traj))
}

/// Least-squares slope of `-ln u` against `ρ` over the samples in `window`.
pub fn fit_decay_exponent(traj: &Trajectory, window: (f64, f64)) -> Result<f64> {
    let (a, b) = window;
    if b - a < 5.0 {
        return Err(Error::InvalidParams(format!("window [{a}, {b}] shorter than 5")));
    }
    let pts: Vec<(f64, f64)> =
        traj.samples.iter().filter(|s| s.rho >= a && s.rho <= b).map(|s| (s.rho, s.u)).collect();
    fit_slope(&pts)
}

/// Decay rate of `u` over sampled points `(ρ, u)`.
pub fn fit_slope(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 2 {
        return Err(Error::InvalidParams("fewer than two samples in window".into()));
    }
    if let Some(&(r, u)) = pts.iter().find(|p| p.1 <= 0.0) {
        return Err(Error::InvalidParams(format!("u = {u} <= 0 at rho = {r}")));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| -p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, u) in pts {
        sxy += (x - mx) * (-u.ln() - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> ProblemParams {
        ProblemParams::new(3, 0.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(ode_rhs(1.3, 0.0, 0.0, &p3()).unwrap(), 0.0);
        assert!((ode_rhs(1.0, 1.0, 0.0, &p3()).unwrap() + 1.0).abs() < 1e-15);
        // regularized origin value: -(1 + 0)/3
        assert!((ode_rhs(0.0, 1.0, 0.0, &p3()).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!(ode_rhs(f64::NAN, 1.0, 0.0, &p3()).is_err());
    }

    #[test]
    fn series_branch_is_continuous() {
        let r = SERIES_RADIUS * (1.0 - 1e-12);
        assert!((coth(r) * r.tanh() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_examples() {
        let p0 = ProblemParams::new(3, 0.0, 0.0, 3.0).unwrap();
        assert!((energy(1.0, 0.0, &p0) - 0.25).abs() < 1e-15);
        assert!((energy(1.0, 0.0, &p3()) + 0.25).abs() < 1e-15);
        assert_eq!(energy(0.0, 0.0, &p3()), 0.0);
    }

    #[test]
    fn zero_initial_value() {
        let t = integrate(0.0, &p3(), 10.0, 1e-8).unwrap();
        assert!(t.samples.iter().all(|s| s.u == 0.0 && s.uprime == 0.0));
        assert_eq!(t.classification, Classification::Indeterminate { rho_end: 10.0 });
    }

    #[test]
    fn small_and_large_shots() {
        let small = integrate(0.01, &p3(), 40.0, 1e-9).unwrap();
        assert!(!matches!(small.classification, Classification::DecaysPositive));
        let large = integrate(10.0, &p3(), 40.0, 1e-9).unwrap();
        let Classification::CrossesZero { rho_star } = large.classification else { panic!() };
        let n = large.samples.len();
        assert!(large.samples[n - 2].u > 0.0 && large.samples[n - 1].u <= 0.0);
        assert!(rho_star > large.samples[n - 2].rho && rho_star <= large.samples[n - 1].rho);
    }

    #[test]
    fn origin_regularity() {
        let t = integrate(2.0, &p3(), 5.0, 1e-10).unwrap();
        let expect = rhs(0.0, 2.0, 0.0, &p3());
        for s in &t.samples[1..4] {
            assert!((s.uprime / s.rho - expect).abs() < 1e-2 * expect.abs());
        }
    }

    #[test]
    fn samples_satisfy_ode_by_finite_differences() {
        // a linear equation makes dense samples reliable: θ = 0, small amplitude
        let p = ProblemParams::new(3, 0.5, 0.0, 3.0).unwrap();
        let opts = ShootOptions { rho_max: 6.0, tol: 1e-12, max_step: 1e-3, trapped_exit: false };
        let t = integrate_with(0.5, &p, &opts).unwrap();
        let s = &t.samples;
        let i = s.iter().position(|x| x.rho > 2.0).unwrap();
        let h = s[i + 1].rho - s[i].rho;
        assert!((s[i].rho - s[i - 1].rho - h).abs() < 1e-12);
        let upp = (s[i + 1].u - 2.0 * s[i].u + s[i - 1].u) / (h * h);
        let want = rhs(s[i].rho, s[i].u, s[i].uprime, &p);
        assert!((upp - want).abs() < 1e-4);
    }

    #[test]
    fn tighter_tolerance_agrees() {
        let p = p3();
        let opts = ShootOptions { rho_max: 8.0, tol: 1e-8, max_step: 0.1, trapped_exit: false };
        let a = integrate_with(1.2, &p, &opts).unwrap();
        let b = integrate_with(1.2, &p, &ShootOptions { tol: 0.5e-8, ..opts }).unwrap();
        let r = a.rho_end().min(b.rho_end());
        assert!((a.u_at(r).unwrap() - b.u_at(r).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn decay_exponent_of_exact_profiles() {
        let samples: Vec<Sample> =
            (0..=400).map(|i| i as f64 * 0.1).map(|r| Sample { rho: r, u: (-2.0 * r).exp(), uprime: 0.0 }).collect();
        let t = Trajectory { samples, classification: Classification::DecaysPositive, initial_value: 1.0 };
        assert!((fit_decay_exponent(&t, (5.0, 35.0)).unwrap() - 2.0).abs() < 1e-8);
        let samples: Vec<Sample> = (1..=400)
            .map(|i| i as f64 * 0.1)
            .map(|r| Sample { rho: r, u: (0.5 * r).sinh().powi(-2), uprime: 0.0 })
            .collect();
        let t = Trajectory { samples, classification: Classification::DecaysPositive, initial_value: 1.0 };
        assert!((fit_decay_exponent(&t, (20.0, 40.0)).unwrap() - 1.0).abs() < 1e-3);
        assert!(fit_decay_exponent(&t, (20.0, 22.0)).is_err());
    }

    #[test]
    fn ground_state_rejects_bad_input() {
        let pneg = ProblemParams::new(3, 0.0, -1.0, 3.0).unwrap();
        assert!(matches!(find_ground_state((1.0, 10.0), &pneg, 1e-6), Err(Error::Hypothesis(_))));
        assert!(matches!(find_ground_state((9.0, 10.0), &p3(), 1e-6), Err(Error::Bracket(_))));
    }

    #[test]
    fn csv_has_header_and_precision() {
        let t = integrate(1.0, &p3(), 1.0, 1e-8).unwrap();
        let csv = t.to_csv(&p3());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("rho,u,uprime,E"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("0.0000000000000000e0,1.0000000000000000e0"));
    }
}
