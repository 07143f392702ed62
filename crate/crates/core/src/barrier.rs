//! Barrier profiles for the decay and non-existence arguments.
//!
//! `u_ε(ρ) = sinh(ρ/2)^{-(N-1+ε)}` and the residual
//! `f(ρ, ε) = -u_ε'' - (N-1) coth ρ u_ε' - λ u_ε`, plus the profile
//! `V = cosh(ρ/2)^{-c}` used as a global subsolution.
//!
//! All powers of `sinh` are handled through their logarithms, so evaluation
//! is safe out to `ρ = 80` for every dimension in use.

use crate::error::{Error, Result};
use crate::geometry::ln_sinh;
use crate::params::lambda1;
use crate::shooting::Trajectory;
use std::fmt::Write as _;

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParams(format!("rho = {rho} must be positive")));
    }
    Ok(())
}

fn exponent(eps: f64, n: u32) -> f64 {
    f64::from(n) - 1.0 + eps
}

/// `sinh(ρ/2)^{-(N-1+ε)}`.
pub fn barrier_u(rho: f64, eps: f64, n: u32) -> Result<f64> {
    check_rho(rho)?;
    Ok((-exponent(eps, n) * ln_sinh(0.5 * rho)).exp())
}

/// `u_ε' = -(k/2) sinh(ρ/2)^{-(k+1)} cosh(ρ/2)`, `k = N-1+ε`.
pub fn barrier_du(rho: f64, eps: f64, n: u32) -> Result<f64> {
    check_rho(rho)?;
    let k = exponent(eps, n);
    let ls = ln_sinh(0.5 * rho);
    Ok(-(0.5 * k) * (-(k + 1.0) * ls + ln_cosh(0.5 * rho)).exp())
}

/// `u_ε'' = (k(k+1)/4) sinh(ρ/2)^{-(k+2)} cosh²(ρ/2) - (k/4) sinh(ρ/2)^{-k}`.
pub fn barrier_d2u(rho: f64, eps: f64, n: u32) -> Result<f64> {
    check_rho(rho)?;
    let k = exponent(eps, n);
    let ls = ln_sinh(0.5 * rho);
    let a = k * (k + 1.0) / 4.0 * (-(k + 2.0) * ls + 2.0 * ln_cosh(0.5 * rho)).exp();
    let b = k / 4.0 * (-k * ls).exp();
    Ok(a - b)
}

fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln coth ρ`, stable for large `ρ`.
fn ln_coth(rho: f64) -> f64 {
    ln_cosh(rho) - ln_sinh(rho)
}

/// Sum of `sign_i · exp(l_i)`, returned as `(sign, ln|sum|)`.
fn log_sum(terms: &[(f64, f64)]) -> (f64, f64) {
    let m = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|&(sg, l)| sg * (l - m).exp()).sum();
    if s == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (s.signum(), m + s.abs().ln())
    }
}

/// The four terms of `f`, as `(sign, ln|term|)`.
fn f_terms(rho: f64, eps: f64, lambda: f64, n: u32) -> [(f64, f64); 4] {
    let k = exponent(eps, n);
    let ls = ln_sinh(0.5 * rho);
    let lc = ln_cosh(0.5 * rho);
    let nm1 = f64::from(n) - 1.0;
    [
        // -u'': first part
        (-1.0, (k * (k + 1.0) / 4.0).ln() - (k + 2.0) * ls + 2.0 * lc),
        // -u'': second part
        (1.0, (k / 4.0).ln() - k * ls),
        // -(N-1) coth ρ u'
        (1.0, (nm1 * k / 2.0).ln() + ln_coth(rho) - (k + 1.0) * ls + lc),
        // -λ u
        (-lambda.signum(), lambda.abs().ln() - k * ls),
    ]
}

/// `(sign, ln|f(ρ, ε)|)`.
pub fn f_eval_log(rho: f64, eps: f64, lambda: f64, n: u32) -> Result<(f64, f64)> {
    check_rho(rho)?;
    Ok(log_sum(&f_terms(rho, eps, lambda, n)))
}

/// `f(ρ, ε)` assembled from the exact derivatives of `u_ε`.
pub fn f_eval(rho: f64, eps: f64, lambda: f64, n: u32) -> Result<f64> {
    let (s, l) = f_eval_log(rho, eps, lambda, n)?;
    Ok(s * l.exp())
}

/// `f(ρ, ε) · sinh(ρ/2)^{N-1+ε}`, finite for all `ρ`.
pub fn f_scaled(rho: f64, eps: f64, lambda: f64, n: u32) -> Result<f64> {
    let (s, l) = f_eval_log(rho, eps, lambda, n)?;
    Ok(s * (l + exponent(eps, n) * ln_sinh(0.5 * rho)).exp())
}

/// Limit of [`f_scaled`] as `ρ → ∞`: `((N-1)² - ε²)/4 - λ`.
pub fn f_scaled_limit(eps: f64, lambda: f64, n: u32) -> f64 {
    let nm1 = f64::from(n) - 1.0;
    (nm1 * nm1 - eps * eps) / 4.0 - lambda
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSample {
    pub rho: f64,
    pub eps: f64,
    pub f_value: f64,
    /// Sign of `f`, exact even where `f` underflows.
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    pub lambda0: f64,
    pub n: u32,
    pub eps_list: Vec<f64>,
    pub r_found: Option<f64>,
    /// Per-ε negativity radius.
    pub r_per_eps: Vec<Option<f64>>,
    pub samples: Vec<BarrierSample>,
    pub verdict: Vec<bool>,
}

impl BarrierReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,eps,f_value,sign\n");
        for s in &self.samples {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{}", s.rho, s.eps, s.f_value, s.sign as i32);
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (e, r) in self.eps_list.iter().zip(&self.r_per_eps) {
            match r {
                Some(r) => {
                    let _ = writeln!(out, "eps={e:e} R_found={r}");
                }
                None => {
                    let _ = writeln!(out, "eps={e:e} R_found=none");
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scan {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub step: f64,
}

impl Default for Scan {
    fn default() -> Self {
        Self { rho_lo: 0.5, rho_hi: 80.0, step: 0.25 }
    }
}

impl Scan {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.rho_hi - self.rho_lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.rho_lo + i as f64 * self.step).collect()
    }
}

/// Smallest scanned `R` with `f(ρ, ε) < 0` for all scanned `ρ ≥ R` and
/// `ε ∈ {0, ε_max/10, ε_max}`, evaluated at `λ = λ₀`.
pub fn find_negativity_radius(lambda0: f64, eps_max: f64, n: u32, scan: Scan) -> Result<BarrierReport> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("N = {n} < 2")));
    }
    let l1 = lambda1(n);
    if lambda0 <= l1 {
        return Err(Error::Hypothesis(format!(
            "lambda0 = {lambda0} must exceed (N-1)^2/4 = {l1}"
        )));
    }
    if !(eps_max >= 0.0) || !(scan.step > 0.0 && scan.rho_lo > 0.0 && scan.rho_hi >= scan.rho_lo) {
        return Err(Error::InvalidParams("bad scan or eps_max".into()));
    }
    let eps_list = vec![0.0, eps_max / 10.0, eps_max];
    let rhos = scan.points();
    let mut samples = Vec::with_capacity(rhos.len() * eps_list.len());
    let mut r_per_eps = Vec::new();
    let mut last_bad_all: Option<usize> = None;
    for &e in &eps_list {
        let mut last_bad: Option<usize> = None;
        for (i, &r) in rhos.iter().enumerate() {
            let (sign, l) = f_eval_log(r, e, lambda0, n)?;
            samples.push(BarrierSample { rho: r, eps: e, f_value: sign * l.exp(), sign });
            if sign >= 0.0 {
                last_bad = Some(i);
            }
        }
        r_per_eps.push(match last_bad {
            None => Some(rhos[0]),
            Some(i) => rhos.get(i + 1).copied(),
        });
        last_bad_all = last_bad_all.max(last_bad);
    }
    let r_found = match last_bad_all {
        None => Some(rhos[0]),
        Some(i) => rhos.get(i + 1).copied(),
    };
    let verdict = eps_list
        .iter()
        .map(|&e| {
            r_found.is_some_and(|r| samples.iter().filter(|s| s.eps == e && s.rho >= r).all(|s| s.sign < 0.0))
        })
        .collect();
    Ok(BarrierReport { lambda0, n, eps_list, r_found, r_per_eps, samples, verdict })
}

/// `sup |f(ρ,ε) - sinh(ρ/2)^{-ε} f(ρ,0)| / (ε sinh(ρ/2)^{-(N-1+ε)})` over the given radii.
pub fn grouping_constant(rhos: &[f64], eps: f64, lambda: f64, n: u32) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams("eps must be positive".into()));
    }
    let mut k = 0.0f64;
    for &r in rhos {
        // both sides multiplied by sinh^{N-1+ε}
        let d = f_scaled(r, eps, lambda, n)? - f_scaled(r, 0.0, lambda, n)?;
        k = k.max(d.abs() / eps);
    }
    Ok(k)
}

/// `(lhs, rhs) = (-ΔV - γV, V^q)` for `V = cosh(ρ/2)^{-c}`, `q = (c+2)/c`.
pub fn v_subsolution_residual(rho: f64, c: f64, gamma: f64, n: u32) -> Result<(f64, f64)> {
    if !(c > 0.0) {
        return Err(Error::InvalidParams(format!("c = {c} must be positive")));
    }
    if !(rho >= 0.0) {
        return Err(Error::InvalidParams(format!("rho = {rho} must be nonnegative")));
    }
    let v = (-c * ln_cosh(0.5 * rho)).exp();
    let (lap, sech2) = v_laplacian_factor(rho, c, n);
    Ok((-(lap * v) - gamma * v, v * sech2))
}

/// `ΔV / V` and `sech²(ρ/2)`.
fn v_laplacian_factor(rho: f64, c: f64, n: u32) -> (f64, f64) {
    let t = (0.5 * rho).tanh();
    let sech2 = (0.5 * rho).cosh().powi(-2);
    let nm1 = f64::from(n) - 1.0;
    // V'' = V[(c²/4)T² - (c/4) sech²], (N-1) coth ρ V' = -(N-1) c (1 + T²) V / 4
    let lap = c * c / 4.0 * t * t - c / 4.0 * sech2 - nm1 * c * (1.0 + t * t) / 4.0;
    (lap, sech2)
}

/// `sup lhs/rhs` of [`v_subsolution_residual`] over `[0, rho_max]`, the constant `K` with `lhs ≤ K · rhs`.
pub fn subsolution_constant(c: f64, gamma: f64, n: u32, rho_max: f64, step: f64) -> Result<f64> {
    let count = (rho_max / step).round() as usize;
    let mut k = f64::NEG_INFINITY;
    for i in 0..=count {
        let rho = i as f64 * step;
        let (lap, sech2) = v_laplacian_factor(rho, c, n);
        if sech2 == 0.0 {
            break;
        }
        k = k.max((-lap - gamma) / sech2);
    }
    Ok(k)
}

/// Default `(γ, c) = (1.5 (N-1)²/4, max(2N, 10))`.
pub fn default_v_params(n: u32) -> (f64, f64) {
    (1.5 * lambda1(n), f64::from((2 * n).max(10)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBounds {
    /// `min u(ρ) sinh(ρ/2)^{N-1}` over the window.
    pub c0: f64,
    /// `max u(ρ) cosh(ρ/2)^{N-1}` over the window.
    pub c1: f64,
    pub ratio: f64,
    pub verdict: bool,
}

/// Ratio above which the two-sided bound is judged not to hold.
pub const DECAY_RATIO_LIMIT: f64 = 1e3;

/// Two-sided `sinh(ρ/2)^{-(N-1)}` decay check over the samples with `ρ ≥ R₀`.
pub fn decay_bounds_check(traj: &Trajectory, r0: f64, n: u32) -> Result<DecayBounds> {
    let window: Vec<_> = traj.samples.iter().filter(|s| s.rho >= r0).collect();
    if window.is_empty() {
        return Err(Error::InvalidParams(format!("no samples beyond R0 = {r0}")));
    }
    if let Some(s) = window.iter().find(|s| s.u <= 0.0) {
        return Err(Error::InvalidParams(format!("u = {} <= 0 at rho = {}", s.u, s.rho)));
    }
    let k = f64::from(n) - 1.0;
    let (mut c0, mut c1) = (f64::INFINITY, 0.0f64);
    for s in window {
        let lu = s.u.ln();
        c0 = c0.min((lu + k * ln_sinh(0.5 * s.rho)).exp());
        c1 = c1.max((lu + k * ln_cosh(0.5 * s.rho)).exp());
    }
    let ratio = c1 / c0;
    Ok(DecayBounds { c0, c1, ratio, verdict: c0 > 0.0 && c1.is_finite() && ratio < DECAY_RATIO_LIMIT })
}

/// `∫_1^R u_ε² sinh^{N-1} ρ dρ`.
pub fn h1_tail_integral(eps: f64, n: u32, r: f64) -> Result<f64> {
    let k = exponent(eps, n);
    let nm1 = f64::from(n) - 1.0;
    crate::quad::integrate(|x| (nm1 * ln_sinh(x) - 2.0 * k * ln_sinh(0.5 * x)).exp(), 1.0, r, 1e-12, 0.0)
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn convergence_order(h: &[f64], err: &[f64]) -> f64 {
    crate::threshold::fit_order(h, err)
}

/// `ln(g(x+δ)/g(x))` for `g = sinh` (`sinh = true`) or `cosh`, via the addition formulas.
fn ln_shift_ratio(x: f64, delta: f64, sinh: bool) -> f64 {
    let slope = if sinh { 1.0 / x.tanh() } else { x.tanh() };
    let half = (0.5 * delta).sinh();
    (2.0 * half * half + slope * delta.sinh()).ln_1p()
}

/// Central first and second differences of `exp(-k ln g(ρ/2))` at `ρ`.
///
/// Increments are formed as `g · expm1(...)` so the step-size sweep sees
/// truncation error rather than cancellation down to `h = 1e-4`.
fn central_differences(rho: f64, h: f64, k: f64, sinh: bool) -> (f64, f64, f64) {
    let x = 0.5 * rho;
    let g = if sinh { ln_sinh(x) } else { ln_cosh(x) };
    let u0 = (-k * g).exp();
    let up = u0 * (-k * ln_shift_ratio(x, 0.5 * h, sinh)).exp_m1();
    let um = u0 * (-k * ln_shift_ratio(x, -0.5 * h, sinh)).exp_m1();
    (u0, (up - um) / (2.0 * h), (up + um) / (h * h))
}

/// Central-difference error of `f_eval` at `ρ` for step `h`.
pub fn f_eval_fd_error(rho: f64, eps: f64, lambda: f64, n: u32, h: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(h > 0.0 && h < rho) {
        return Err(Error::InvalidParams(format!("step h = {h} must lie in (0, rho)")));
    }
    let (u0, d1, d2) = central_differences(rho, h, exponent(eps, n), true);
    let fd = -d2 - (f64::from(n) - 1.0) / rho.tanh() * d1 - lambda * u0;
    Ok((fd - f_eval(rho, eps, lambda, n)?).abs())
}

/// Central-difference error of the closed-form `ΔV`.
pub fn v_laplacian_fd_error(rho: f64, c: f64, n: u32, h: f64) -> f64 {
    let (v0, d1, d2) = central_differences(rho, h, c, false);
    let fd = d2 + (f64::from(n) - 1.0) / rho.tanh() * d1;
    (fd - v_laplacian_factor(rho, c, n).0 * v0).abs()
}
