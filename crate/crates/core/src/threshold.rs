//! Truncated Aubin–Talenti bubbles and the critical-level test.
//!
//! A bubble `U_ε` is cut off smoothly between `ρ_cut` and `2ρ_cut` (Euclidean
//! radii inside the unit ball) to give `v_ε = φ U_ε`. Pulling the hyperbolic
//! energy back through the conformal map turns the critical functional into
//!
//! `J̃(v) = ½∫|∇v|² - ½∫g v² - (1/2*)∫|v|^{2*} - (θ/2)∫h v² ln v²`
//!
//! on the unit ball, and the test checks `max_t J̃(t v_ε) < S^{N/2}/N`.
//!
//! Differences such as `∫|∇v_ε|² - S^{N/2}` are integrated directly over the
//! cutoff annulus and the removed tail, never by subtracting two nearly equal
//! totals.

use crate::error::{Error, Result};
use crate::geometry::{gamma_half, sphere_area};
use crate::params::{u2_log_u2, ProblemParams};
use crate::quad::{find_root, integrate, integrate_to_infinity};
use crate::variational::{eval_j, RadialFunction, RadialGrid};
use std::fmt::Write as _;
use std::sync::Arc;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParams(format!("eps = {eps} must be positive")));
    }
    Ok(())
}

fn two_star(n: u32) -> f64 {
    2.0 * f64::from(n) / (f64::from(n) - 2.0)
}

/// `U_ε(r) = [N(N-2)]^{(N-2)/4} (ε/(ε² + r²))^{(N-2)/2}`.
pub fn bubble_u(r: f64, eps: f64, n: u32) -> f64 {
    let nf = f64::from(n);
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0) * (eps / (eps * eps + r * r)).powf((nf - 2.0) / 2.0)
}

/// `dU_ε/dr`.
pub fn bubble_du(r: f64, eps: f64, n: u32) -> f64 {
    -(f64::from(n) - 2.0) * r / (eps * eps + r * r) * bubble_u(r, eps, n)
}

/// Closed form `S = πN(N-2) (Γ(N/2)/Γ(N))^{2/N}`.
pub fn sobolev_constant_closed_form(n: u32) -> f64 {
    let nf = f64::from(n);
    std::f64::consts::PI * nf * (nf - 2.0) * (gamma_half(n) / gamma_half(2 * n)).powf(2.0 / nf)
}

/// `(∫|∇U_ε|², ∫U_ε^{2*})` over `R^N`.
pub fn bubble_norms(n: u32, eps: f64, quad_tol: f64) -> Result<(f64, f64)> {
    check_eps(eps)?;
    let ss = two_star(n);
    let om = sphere_area(n);
    let k = (n - 1) as i32;
    let grad = |r: f64| bubble_du(r, eps, n).powi(2) * r.powi(k);
    let crit = |r: f64| bubble_u(r, eps, n).powf(ss) * r.powi(k);
    let g = integrate(grad, 0.0, eps, quad_tol, 0.0)? + integrate_to_infinity(grad, eps, quad_tol, 0.0)?;
    let l = integrate(crit, 0.0, eps, quad_tol, 0.0)? + integrate_to_infinity(crit, eps, quad_tol, 0.0)?;
    Ok((om * g, om * l))
}

/// `S = (∫|∇U₁|²)^{2/N}`, after checking `∫|∇U₁|² = ∫U₁^{2*}` to `quad_tol`.
pub fn sobolev_constant(n: u32, quad_tol: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("the Sobolev constant needs N >= 3 (N = {n})")));
    }
    let (g, l) = bubble_norms(n, 1.0, quad_tol.min(1e-10) * 1e-2)?;
    if ((g - l) / g).abs() > quad_tol {
        return Err(Error::QuadratureMismatch(format!("∫|∇U|² = {g} but ∫U^2* = {l}")));
    }
    Ok(g.powf(2.0 / f64::from(n)))
}

/// Cutoff parameters for `v_ε = φ U_ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleSpec {
    pub eps: f64,
    pub rho_cut: f64,
    pub n: u32,
}

impl BubbleSpec {
    pub fn new(eps: f64, rho_cut: f64, n: u32) -> Result<Self> {
        check_eps(eps)?;
        if n < 4 {
            return Err(Error::Hypothesis(format!("the critical-level estimate needs N >= 4 (N = {n})")));
        }
        if !(rho_cut > 0.0 && 2.0 * rho_cut < 1.0) {
            return Err(Error::InvalidParams(format!("rho_cut = {rho_cut} must lie in (0, 1/2)")));
        }
        if eps > rho_cut {
            return Err(Error::InvalidParams(format!("eps = {eps} exceeds rho_cut = {rho_cut}")));
        }
        Ok(Self { eps, rho_cut, n })
    }

    /// C¹ cubic smoothstep: 1 on `[0, ρ]`, 0 beyond `2ρ`.
    pub fn cutoff(&self, r: f64) -> (f64, f64) {
        let rc = self.rho_cut;
        if r <= rc {
            (1.0, 0.0)
        } else if r >= 2.0 * rc {
            (0.0, 0.0)
        } else {
            let t = (r - rc) / rc;
            (1.0 - t * t * (3.0 - 2.0 * t), -6.0 * t * (1.0 - t) / rc)
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.cutoff(r).0 * bubble_u(r, self.eps, self.n)
    }

    pub fn deriv(&self, r: f64) -> f64 {
        let (p, dp) = self.cutoff(r);
        dp * bubble_u(r, self.eps, self.n) + p * bubble_du(r, self.eps, self.n)
    }

    /// Breakpoints for quadrature over the support.
    pub fn breaks(&self) -> Vec<f64> {
        let mut b = vec![0.0, self.eps];
        let mut x = 4.0 * self.eps;
        while x < self.rho_cut {
            b.push(x);
            x *= 4.0;
        }
        b.push(self.rho_cut);
        b.push(2.0 * self.rho_cut);
        b
    }

    /// `ω ∫ f(r) r^{N-1} dr` over the support, with a log substitution away from the core.
    fn radial_integral(&self, f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let k = (self.n - 1) as i32;
        let b = self.breaks();
        let mut s = integrate(|r| f(r) * r.powi(k), b[0], b[1], tol, 0.0)?;
        for w in b[1..].windows(2) {
            s += integrate(
                |y| {
                    let r = y.exp();
                    f(r) * r.powi(k + 1)
                },
                w[0].ln(),
                w[1].ln(),
                tol,
                0.0,
            )?;
        }
        Ok(sphere_area(self.n) * s)
    }
}

/// Integrals of `v_ε` over the unit ball, with their excesses over `S^{N/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnsIntegrals {
    pub grad_sq: f64,
    pub l2star: f64,
    pub l2: f64,
    /// `∫|∇v_ε|² - ∫|∇U_ε|²`.
    pub grad_excess: f64,
    /// `∫|v_ε|^{2*} - ∫U_ε^{2*}`.
    pub l2star_excess: f64,
}

pub fn bns_integrals(spec: &BubbleSpec, quad_tol: f64) -> Result<BnsIntegrals> {
    let (e, n, rc) = (spec.eps, spec.n, spec.rho_cut);
    let ss = two_star(n);
    let k = (n - 1) as i32;
    let om = sphere_area(n);
    let (g_full, l_full) = bubble_norms(n, 1.0, quad_tol)?;
    let annulus_g = integrate(
        |r| {
            let (p, dp) = spec.cutoff(r);
            let (u, du) = (bubble_u(r, e, n), bubble_du(r, e, n));
            (dp * dp * u * u + 2.0 * p * dp * u * du + (p * p - 1.0) * du * du) * r.powi(k)
        },
        rc,
        2.0 * rc,
        quad_tol,
        0.0,
    )?;
    let tail_g = integrate_to_infinity(|r| bubble_du(r, e, n).powi(2) * r.powi(k), 2.0 * rc, quad_tol, 0.0)?;
    let annulus_l = integrate(
        |r| (spec.cutoff(r).0.powf(ss) - 1.0) * bubble_u(r, e, n).powf(ss) * r.powi(k),
        rc,
        2.0 * rc,
        quad_tol,
        0.0,
    )?;
    let tail_l = integrate_to_infinity(|r| bubble_u(r, e, n).powf(ss) * r.powi(k), 2.0 * rc, quad_tol, 0.0)?;
    let grad_excess = om * (annulus_g - tail_g);
    let l2star_excess = om * (annulus_l - tail_l);
    let l2 = spec.radial_integral(|r| spec.value(r).powi(2), quad_tol)?;
    Ok(BnsIntegrals {
        grad_sq: g_full + grad_excess,
        l2star: l_full + l2star_excess,
        l2,
        grad_excess,
        l2star_excess,
    })
}

/// `∫ v_ε² ln v_ε²` over the unit ball.
pub fn vln_integral(spec: &BubbleSpec, quad_tol: f64) -> Result<f64> {
    spec.radial_integral(|r| u2_log_u2(spec.value(r)), quad_tol)
}

/// `(g, h)` with `h = (2/(1-|x|²))²` and
/// `g = (λ - N(N-2)/4 - θ - (N-2)θ ln(2/(1-|x|²))) h`.
pub fn conformal_weights(x_norm: f64, params: &ProblemParams) -> Result<(f64, f64)> {
    let f = crate::geometry::conformal_factor_norm(x_norm)?;
    let nf = params.nf();
    let h = f * f;
    let g = (params.lambda - nf * (nf - 2.0) / 4.0 - params.theta - (nf - 2.0) * params.theta * f.ln()) * h;
    Ok((g, h))
}

/// A radial profile on the Euclidean unit ball.
pub trait Profile {
    fn value(&self, r: f64) -> f64;
    fn deriv(&self, r: f64) -> f64;
    /// Increasing breakpoints from 0 to the support radius (< 1).
    fn breaks(&self) -> Vec<f64>;
}

impl Profile for BubbleSpec {
    fn value(&self, r: f64) -> f64 {
        BubbleSpec::value(self, r)
    }
    fn deriv(&self, r: f64) -> f64 {
        BubbleSpec::deriv(self, r)
    }
    fn breaks(&self) -> Vec<f64> {
        BubbleSpec::breaks(self)
    }
}

/// `(B, H, Hv) = (∫g v², ∫h v² ln v², ∫h v²)`.
fn weighted_terms<P: Profile>(v: &P, params: &ProblemParams, tol: f64) -> Result<(f64, f64, f64)> {
    let k = (params.n - 1) as i32;
    let om = sphere_area(params.n);
    let b = v.breaks();
    let mut acc = (0.0, 0.0, 0.0);
    for w in b.windows(2) {
        let gh = |r: f64| conformal_weights(r, params).unwrap_or((f64::NAN, f64::NAN));
        acc.0 += integrate(|r| gh(r).0 * v.value(r).powi(2) * r.powi(k), w[0], w[1], tol, 0.0)?;
        acc.1 += integrate(|r| gh(r).1 * u2_log_u2(v.value(r)) * r.powi(k), w[0], w[1], tol, 0.0)?;
        acc.2 += integrate(|r| gh(r).1 * v.value(r).powi(2) * r.powi(k), w[0], w[1], tol, 0.0)?;
    }
    Ok((om * acc.0, om * acc.1, om * acc.2))
}

/// `J̃(v)` by adaptive quadrature.
pub fn tilde_j<P: Profile>(v: &P, params: &ProblemParams, quad_tol: f64) -> Result<f64> {
    let ss = two_star(params.n);
    let k = (params.n - 1) as i32;
    let om = sphere_area(params.n);
    let b = v.breaks();
    let (mut grad, mut crit) = (0.0, 0.0);
    for w in b.windows(2) {
        grad += integrate(|r| v.deriv(r).powi(2) * r.powi(k), w[0], w[1], quad_tol, 0.0)?;
        crit += integrate(|r| v.value(r).abs().powf(ss) * r.powi(k), w[0], w[1], quad_tol, 0.0)?;
    }
    let (bg, h, _) = weighted_terms(v, params, quad_tol)?;
    Ok(0.5 * om * grad - 0.5 * bg - om * crit / ss - 0.5 * params.theta * h)
}

/// Hyperbolic energy `J_{2*-1}` of the conformal image
/// `u(ρ) = (2cosh²(ρ/2))^{1-N/2} v(tanh(ρ/2))`, on a grid whose panels follow the profile's breakpoints.
pub fn hyperbolic_image_energy<P: Profile>(v: &P, params: &ProblemParams, subdivide: usize) -> Result<f64> {
    let b = v.breaks();
    let mut edges = vec![0.0];
    for w in b.windows(2) {
        let (a, c) = (2.0 * w[0].atanh(), 2.0 * w[1].atanh());
        for j in 1..=subdivide {
            edges.push(a + (c - a) * j as f64 / subdivide as f64);
        }
    }
    let grid = Arc::new(RadialGrid::from_edges(params.n, &edges, 10)?);
    let expo = 1.0 - params.nf() / 2.0;
    let u = RadialFunction::from_fn(grid, |rho| {
        (2.0 * (0.5 * rho).cosh().powi(2)).powf(expo) * v.value((0.5 * rho).tanh())
    })?;
    Ok(eval_j(&u, params)?.j)
}

/// How `ρ_cut` follows `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoCutRule {
    Proportional(f64),
    Fixed(f64),
}

impl RhoCutRule {
    pub fn rho_cut(&self, eps: f64) -> f64 {
        match *self {
            Self::Proportional(c) => c * eps,
            Self::Fixed(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginStatus {
    Positive,
    NonPositive,
    /// The maximizer sat on the edge of the search interval.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub eps: f64,
    pub rho_cut: f64,
    pub grad_sq: f64,
    pub l2star: f64,
    pub l2: f64,
    pub vlnv: f64,
    /// `∫ g v_ε²`.
    pub g_term: f64,
    /// `∫ h v_ε² ln v_ε²`.
    pub h_lnv_term: f64,
    pub h_l2: f64,
    pub t_eps: f64,
    /// Search interval for the maximizer is `[1/t_bound, t_bound]`.
    pub t_bound: f64,
    pub psi_max: f64,
    pub s_half_n: f64,
    /// `S^{N/2}/N - ψ_max`.
    pub margin: f64,
    pub status: MarginStatus,
    /// Number of interior local maxima of ψ on a log-spaced sample of the search interval.
    pub psi_local_maxima: usize,
}

/// `ψ(t) = J̃(t v_ε)` from the stored integrals.
pub fn psi(report: &ThresholdReport, t: f64, params: &ProblemParams) -> f64 {
    let ss = two_star(params.n);
    let s = t.ln();
    0.5 * t * t * (report.grad_sq - report.g_term - params.theta * report.h_lnv_term)
        - t.powf(ss) / ss * report.l2star
        - params.theta * t * t * s * report.h_l2
}

/// Maximize `ψ` for one bubble and report the margin below `S^{N/2}/N`.
pub fn threshold_point(spec: &BubbleSpec, params: &ProblemParams, quad_tol: f64, t_bound: f64) -> Result<ThresholdReport> {
    if params.n < 4 {
        return Err(Error::Hypothesis(format!("the critical-level estimate needs N >= 4 (N = {})", params.n)));
    }
    if params.theta <= 0.0 {
        return Err(Error::Hypothesis(format!("the critical-level estimate needs theta > 0 (theta = {})", params.theta)));
    }
    let ss = two_star(params.n);
    let bns = bns_integrals(spec, quad_tol)?;
    let vlnv = vln_integral(spec, quad_tol)?;
    let (bg, h, hv) = weighted_terms(spec, params, quad_tol)?;
    let (g_full, _) = bubble_norms(params.n, 1.0, quad_tol)?;
    let sn = g_full;
    let th = params.theta;
    let (a, l) = (bns.grad_excess, bns.l2star_excess);
    let q = a - bg - th * h;
    // ψ'(t)/t in s = ln t; strictly decreasing for θ > 0
    let dpsi = |s: f64| q - th * hv - l - (sn + l) * ((ss - 2.0) * s).exp_m1() - 2.0 * th * s * hv;
    let (lo, hi) = (-t_bound.ln(), t_bound.ln());
    let (s, status_edge) = if dpsi(lo) <= 0.0 {
        (lo, true)
    } else if dpsi(hi) >= 0.0 {
        (hi, true)
    } else {
        (find_root(dpsi, lo, hi, 1e-15)?, false)
    };
    let t = s.exp();
    // ψ(t) - S^{N/2}/N without cancelling S^{N/2} against itself
    let excess = sn * ((2.0 * s).exp_m1() / 2.0 - (ss * s).exp_m1() / ss) + q * t * t / 2.0
        - l * t.powf(ss) / ss
        - th * t * t * s * hv;
    let nf = params.nf();
    let margin = -excess;
    let mut report = ThresholdReport {
        eps: spec.eps,
        rho_cut: spec.rho_cut,
        grad_sq: bns.grad_sq,
        l2star: bns.l2star,
        l2: bns.l2,
        vlnv,
        g_term: bg,
        h_lnv_term: h,
        h_l2: hv,
        t_eps: t,
        t_bound,
        psi_max: sn / nf + excess,
        s_half_n: sn,
        margin,
        status: if status_edge {
            MarginStatus::Inconclusive
        } else if margin > 0.0 {
            MarginStatus::Positive
        } else {
            MarginStatus::NonPositive
        },
        psi_local_maxima: 0,
    };
    let samples: Vec<f64> = (0..=400)
        .map(|i| (lo + (hi - lo) * i as f64 / 400.0).exp())
        .map(|t| psi(&report, t, params))
        .collect();
    report.psi_local_maxima = samples.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count();
    Ok(report)
}

/// Run [`threshold_point`] over an ε grid; reports keep the grid order.
pub fn verify_threshold(
    params: &ProblemParams,
    eps_grid: &[f64],
    rule: RhoCutRule,
    quad_tol: f64,
) -> Result<Vec<ThresholdReport>> {
    eps_grid
        .iter()
        .map(|&e| threshold_point(&BubbleSpec::new(e, rule.rho_cut(e), params.n)?, params, quad_tol, 10.0))
        .collect()
}

pub const DEFAULT_EPS_GRID: [f64; 4] = [0.04, 0.02, 0.01, 0.005];

pub fn reports_csv(reports: &[ThresholdReport]) -> String {
    let mut out = String::from("eps,rho_cut,grad_sq,l2star,l2,vlnv,t_eps,psi_max,margin\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.eps, r.rho_cut, r.grad_sq, r.l2star, r.l2, r.vlnv, r.t_eps, r.psi_max, r.margin
        );
    }
    out
}

/// Slope of `ln |y|` against `ln x` by least squares.
pub fn fit_order(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares `(A, B)` in `y ≈ A ε²|ln ε| + B ε²`.
pub fn fit_log_coefficients(eps: &[f64], y: &[f64]) -> (f64, f64) {
    // divide through by ε²: y/ε² ≈ A |ln ε| + B
    let pts: Vec<(f64, f64)> = eps.iter().zip(y).map(|(e, v)| (e.ln().abs(), v / (e * e))).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

/// Leading `ε²|ln ε|` coefficients of the two-sided `N = 4` bound on `∫v² ln v²`.
pub fn vln_bounds_n4(eps: f64, rho_cut: f64) -> (f64, f64) {
    let (e2, r2) = (eps * eps, rho_cut * rho_cut);
    let om = sphere_area(4);
    let e = std::f64::consts::E;
    let lower = 8.0 * (8.0 * (e2 + r2) / (e * (e2 + 4.0 * r2).powi(2))).ln() * om;
    let upper = 8.0 * (8.0 * e * (e2 + 4.0 * r2) / (e2 + r2).powi(2)).ln() * om;
    (lower, upper)
}
