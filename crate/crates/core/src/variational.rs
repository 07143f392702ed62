//! Discrete energy `J`, Nehari functional `I`, constrained minimization and
//! the log-Sobolev check on radial profiles.
//!
//! Profiles are continuous piecewise polynomials on uniform panels in `ρ`,
//! sampled at Gauss–Lobatto nodes. Quadrature weights carry the hyperbolic
//! volume density `ω_{N-1} sinh^{N-1} ρ`, so the node at the origin has weight
//! zero. The profile is pinned to zero at `R_max`.

use crate::error::{Error, Result};
use crate::geometry::sphere_area;
use crate::params::{u2_log_u2, u_log_u2, ProblemParams};
use crate::quad::{find_root, gauss_lobatto, lobatto_diff_matrix};
use crate::shooting::{energy, Classification, Sample, Trajectory};
use std::fmt::Write as _;
use std::sync::Arc;

/// Symmetric positive definite band matrix, stored by lower diagonals.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    // a[i][k] = A[i][i - k]
    a: Vec<Vec<f64>>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, a: vec![vec![0.0; bw + 1]; n] }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.a[i][i - j] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.a[i][i - j]
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.a[i][0] * x[i];
            for k in 1..=self.bw.min(i) {
                let v = self.a[i][k];
                y[i] += v * x[i - k];
                y[i - k] += v * x[i];
            }
        }
        y
    }

    /// Leading `m × m` block.
    pub fn leading(&self, m: usize) -> Self {
        Self { n: m, bw: self.bw, a: self.a[..m].to_vec() }
    }

    /// `self + c · diag(d)`.
    pub fn plus_diag(&self, c: f64, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.a[i][0] += c * d[i];
        }
        out
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        let mut l = self.a.clone();
        for i in 0..self.n {
            for k in (0..=self.bw.min(i)).rev() {
                let j = i - k;
                let mut s = l[i][k];
                for m in 1..=self.bw.min(j) {
                    if m + k <= self.bw {
                        s -= l[i][k + m] * l[j][m];
                    }
                }
                if k == 0 {
                    if s <= 0.0 {
                        return Err(Error::InvalidParams(format!(
                            "operator not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    l[i][0] = s.sqrt();
                } else {
                    l[i][k] = s / l[j][0];
                }
            }
        }
        Ok(BandCholesky { n: self.n, bw: self.bw, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<Vec<f64>>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in 1..=self.bw.min(i) {
                s -= self.l[i][k] * y[i - k];
            }
            y[i] = s / self.l[i][0];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in 1..=self.bw.min(self.n - 1 - i) {
                s -= self.l[i + k][k] * y[i + k];
            }
            y[i] = s / self.l[i][0];
        }
        y
    }
}

/// Quadrature grid on `[0, R_max]` with hyperbolic volume weights.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    n_dim: u32,
    r_max: f64,
    order: usize,
    edges: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // reference Lobatto data
    ref_w: Vec<f64>,
    ref_d: Vec<Vec<f64>>,
    stiffness: BandMatrix,
}

impl RadialGrid {
    /// `panels` uniform panels with `order` Lobatto points each.
    pub fn new(n_dim: u32, r_max: f64, panels: usize, order: usize) -> Result<Self> {
        if !(r_max > 0.0) || panels == 0 {
            return Err(Error::InvalidParams("grid needs R_max > 0 and at least one panel".into()));
        }
        let h = r_max / panels as f64;
        let mut edges: Vec<f64> = (0..=panels).map(|e| e as f64 * h).collect();
        edges[panels] = r_max;
        Self::from_edges(n_dim, &edges, order)
    }

    /// Panels between consecutive `edges`, which must start at 0 and increase strictly.
    pub fn from_edges(n_dim: u32, edges: &[f64], order: usize) -> Result<Self> {
        if n_dim < 2 || order < 2 || edges.len() < 2 || edges[0] != 0.0 || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams(
                "grid needs N >= 2, order >= 2 and strictly increasing edges from 0".into(),
            ));
        }
        let (x, w) = gauss_lobatto(order);
        let d = lobatto_diff_matrix(&x);
        let panels = edges.len() - 1;
        let r_max = edges[panels];
        let m = order - 1;
        let count = panels * m + 1;
        let omega = sphere_area(n_dim);
        let mut nodes = vec![0.0; count];
        let mut weights = vec![0.0; count];
        let mut stiffness = BandMatrix::zeros(count, m);
        for e in 0..panels {
            let a = edges[e];
            let h = edges[e + 1] - a;
            let local_w: Vec<f64> = (0..order)
                .map(|q| {
                    let rho = if q == m { edges[e + 1] } else { a + 0.5 * (x[q] + 1.0) * h };
                    nodes[e * m + q] = rho;
                    w[q] * 0.5 * h * omega * rho.sinh().powi(n_dim as i32 - 1)
                })
                .collect();
            for q in 0..order {
                weights[e * m + q] += local_w[q];
            }
            let scale = 2.0 / h;
            for q in 0..order {
                for i in 0..order {
                    let di = d[q][i] * scale;
                    if di == 0.0 {
                        continue;
                    }
                    for j in 0..=i {
                        let v = local_w[q] * di * d[q][j] * scale;
                        stiffness.add(e * m + i, e * m + j, v);
                    }
                }
            }
        }
        Ok(Self { n_dim, r_max, order, edges: edges.to_vec(), nodes, weights, ref_w: w, ref_d: d, stiffness })
    }

    /// Default production grid: 80 panels of 8 points on `[0, R_max]`.
    pub fn standard(n_dim: u32, r_max: f64) -> Result<Self> {
        Self::new(n_dim, r_max, (2.0 * r_max).round().max(1.0) as usize, 8)
    }

    pub fn dim(&self) -> u32 {
        self.n_dim
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn panels(&self) -> usize {
        self.edges.len() - 1
    }
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn stiffness(&self) -> &BandMatrix {
        &self.stiffness
    }

    /// `ω_{N-1} ∫ u'^2 sinh^{N-1}`, exact for the piecewise polynomial up to the sinh factor.
    pub fn grad_norm_sq(&self, u: &[f64]) -> f64 {
        let ku = self.stiffness.mul(u);
        ku.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    /// Nodal derivative; interface nodes take the mean of both one-sided values.
    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        let m = self.order - 1;
        let mut du = vec![0.0; u.len()];
        let mut hits = vec![0u8; u.len()];
        for e in 0..self.panels() {
            let h = self.edges[e + 1] - self.edges[e];
            for q in 0..self.order {
                let s: f64 = (0..self.order).map(|j| self.ref_d[q][j] * u[e * m + j]).sum();
                du[e * m + q] += s * 2.0 / h;
                hits[e * m + q] += 1;
            }
        }
        du.iter().zip(hits).map(|(d, k)| d / f64::from(k)).collect()
    }

    /// Integrate nodal values of `f` against the volume weights.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, w)| w * f(r)).sum()
    }

    /// Reference Lobatto weights on `[-1, 1]`.
    pub fn reference_weights(&self) -> &[f64] {
        &self.ref_w
    }
}

/// Nodal values of a radial profile on a shared grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(values.len(), grid.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { node: i, rho: grid.nodes[i] });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    /// `cosh(ρ/2)^{-(N-1)} (1 - (ρ/R)^2)`: the `sinh(ρ/2)^{-(N-1)}` decay class,
    /// smoothed at the origin and pinned to zero at `R_max`.
    pub fn initial_profile(grid: Arc<RadialGrid>) -> Self {
        let k = f64::from(grid.n_dim) - 1.0;
        let r = grid.r_max;
        let values = grid.nodes.iter().map(|&x| (0.5 * x).cosh().powf(-k) * (1.0 - (x / r).powi(2))).collect();
        Self { grid, values }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| s * v).collect() }
    }

    pub fn derivative(&self) -> Vec<f64> {
        self.grid.derivative(&self.values)
    }

    /// Trajectory CSV schema `rho,u,uprime,E`.
    pub fn to_csv(&self, params: &ProblemParams) -> String {
        let du = self.derivative();
        let mut out = String::from("rho,u,uprime,E\n");
        for ((r, u), d) in self.grid.nodes.iter().zip(&self.values).zip(&du) {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", r, u, d, energy(*u, *d, params));
        }
        out
    }

    /// Same samples as a trajectory, for tools that expect one.
    pub fn to_trajectory(&self) -> Trajectory {
        let du = self.derivative();
        let samples = self
            .grid
            .nodes
            .iter()
            .zip(&self.values)
            .zip(&du)
            .map(|((&rho, &u), &uprime)| Sample { rho, u, uprime })
            .collect();
        Trajectory {
            samples,
            classification: Classification::Indeterminate { rho_end: self.grid.r_max },
            initial_value: self.values[0],
        }
    }
}

/// Component integrals of `J` and `I` for one profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub j: f64,
    pub i: f64,
    pub grad_norm_sq: f64,
    pub l2_norm_sq: f64,
    /// `‖u‖_{p+1}`.
    pub lp1_norm: f64,
    /// `‖u‖_{p+1}^{p+1}`, kept to avoid a round trip through the root.
    pub lp1_pow: f64,
    /// `∫ u² ln u²`.
    pub log_term: f64,
    pub p: f64,
}

impl EnergyReport {
    fn assemble(grad: f64, l2: f64, lp: f64, log: f64, params: &ProblemParams) -> Self {
        let p = params.p;
        let j = 0.5 * grad - 0.5 * params.lambda * l2 - lp / (p + 1.0) - 0.5 * params.theta * (log - l2);
        let i = grad - params.lambda * l2 - lp - params.theta * log;
        Self {
            j,
            i,
            grad_norm_sq: grad,
            l2_norm_sq: l2,
            lp1_norm: lp.powf(1.0 / (p + 1.0)),
            lp1_pow: lp,
            log_term: log,
            p,
        }
    }

    /// `J` rebuilt from the stored norm rather than its power.
    pub fn reconstruct_j(&self, params: &ProblemParams) -> f64 {
        let p = params.p;
        0.5 * self.grad_norm_sq
            - 0.5 * params.lambda * self.l2_norm_sq
            - self.lp1_norm.powf(p + 1.0) / (p + 1.0)
            - 0.5 * params.theta * (self.log_term - self.l2_norm_sq)
    }

    /// Components of `t·u` without touching the profile.
    pub fn scaled(&self, t: f64, params: &ProblemParams) -> Self {
        let t2 = t * t;
        let l2 = t2 * self.l2_norm_sq;
        let log = t2 * (self.log_term + (t2).ln() * self.l2_norm_sq);
        Self::assemble(t2 * self.grad_norm_sq, l2, t.abs().powf(params.p + 1.0) * self.lp1_pow, log, params)
    }

    /// Sum of magnitudes of the terms of `I`; the natural size against which `I ≈ 0` is judged.
    pub fn i_scale(&self, params: &ProblemParams) -> f64 {
        self.grad_norm_sq
            + params.lambda.abs() * self.l2_norm_sq
            + self.lp1_pow
            + params.theta.abs() * self.log_term.abs()
    }
}

pub fn eval_j(u: &RadialFunction, params: &ProblemParams) -> Result<EnergyReport> {
    let g = &u.grid;
    let p = params.p;
    let (mut l2, mut lp, mut log) = (0.0, 0.0, 0.0);
    for (i, (&v, &w)) in u.values.iter().zip(&g.weights).enumerate() {
        let a = w * v.abs().powf(p + 1.0);
        let b = w * u2_log_u2(v);
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFiniteIntegrand { node: i, rho: g.nodes[i] });
        }
        l2 += w * v * v;
        lp += a;
        log += b;
    }
    let grad = g.grad_norm_sq(&u.values);
    if !grad.is_finite() {
        return Err(Error::NonFiniteIntegrand { node: 0, rho: 0.0 });
    }
    Ok(EnergyReport::assemble(grad, l2, lp, log, params))
}

/// Unique `t₀ > 0` with `I(t₀ u) = 0`.
///
/// Works in `s = ln t`, where `I(tu)/t²` is strictly decreasing for `θ > 0`.
pub fn nehari_scale(u: &RadialFunction, params: &ProblemParams) -> Result<f64> {
    nehari_scale_report(&eval_j(u, params)?, params)
}

pub fn nehari_scale_report(r: &EnergyReport, params: &ProblemParams) -> Result<f64> {
    if params.theta <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "the Nehari scaling is unique only for theta > 0 (theta = {})",
            params.theta
        )));
    }
    if r.l2_norm_sq == 0.0 {
        return Err(Error::InvalidParams("profile is identically zero".into()));
    }
    let th = params.theta;
    let base = r.grad_norm_sq - params.lambda * r.l2_norm_sq - th * r.log_term;
    let h = |s: f64| base - ((params.p - 1.0) * s).exp() * r.lp1_pow - 2.0 * th * s * r.l2_norm_sq;
    let (lo, hi) = (1e-8f64.ln(), 1e8f64.ln());
    if h(lo) <= 0.0 || h(hi) >= 0.0 {
        return Err(Error::NehariBracket);
    }
    let s = find_root(h, lo, hi, 1e-15)?;
    Ok(s.exp())
}

/// Project onto the Nehari set.
pub fn nehari_project(u: &RadialFunction, params: &ProblemParams) -> Result<(RadialFunction, f64)> {
    let t = nehari_scale(u, params)?;
    Ok((u.scaled(t), t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    pub step: f64,
    /// Stop once the relative decrease of `J` falls below this.
    pub tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iter: 500, step: 1.0, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub j: f64,
    pub i: f64,
    pub t0: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub u: RadialFunction,
    pub d_p: f64,
    pub report: EnergyReport,
    pub log: Vec<IterRecord>,
    pub converged: bool,
    /// Tangential gradient norm at the returned profile, relative to `‖u‖`.
    pub stationarity: f64,
}

impl MinimizeOutcome {
    pub fn log_csv(&self) -> String {
        let mut out = String::from("iter,J,I,t0,grad_norm\n");
        for r in &self.log {
            let _ = writeln!(out, "{},{:.16e},{:.16e},{:.16e},{:.16e}", r.iter, r.j, r.i, r.t0, r.grad_norm);
        }
        out
    }
}

/// Riesz map for the descent direction: `K - λM` below the spectral bottom, else `K + M`,
/// plus the positive part of the log term's curvature `-θ(ln u² + 2)` on the diagonal.
///
/// Without the curvature term the tail, where `ln u²` is large and negative, is
/// badly conditioned and plain descent crawls.
struct Preconditioner {
    chol: BandCholesky,
    op: BandMatrix,
    free: usize,
}

impl Preconditioner {
    fn new(u: &RadialFunction, params: &ProblemParams) -> Result<Self> {
        let grid = &u.grid;
        let free = grid.len() - 1;
        let k = grid.stiffness.leading(free);
        let shift = if params.lambda < params.lambda1() { -params.lambda } else { 1.0 };
        let diag: Vec<f64> = u.values[..free]
            .iter()
            .zip(&grid.weights)
            .map(|(&v, w)| {
                let curv = -params.theta * ((v * v).max(1e-300).ln() + 2.0);
                w * (shift + curv.max(0.0))
            })
            .collect();
        let op = k.plus_diag(1.0, &diag);
        let chol = op.cholesky()?;
        Ok(Self { chol, op, free })
    }

    fn apply_inv(&self, g: &[f64]) -> Vec<f64> {
        let mut d = self.chol.solve(&g[..self.free]);
        d.push(0.0);
        d
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let ab = self.op.mul(&a[..self.free]);
        ab.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

/// Discrete gradient `Ku - M f(u)` of `J`.
pub fn gradient(u: &RadialFunction, params: &ProblemParams) -> Vec<f64> {
    let g = &u.grid;
    let ku = g.stiffness.mul(&u.values);
    ku.iter().zip(&u.values).zip(&g.weights).map(|((k, &v), w)| k - w * params.nonlinearity(v)).collect()
}

/// Discrete gradient of `I`: `2Ku - M(2λu + (p+1)|u|^{p-1}u + 2θ u ln u² + 2θu)`.
fn gradient_i(u: &RadialFunction, params: &ProblemParams) -> Vec<f64> {
    let g = &u.grid;
    let ku = g.stiffness.mul(&u.values);
    ku.iter()
        .zip(&u.values)
        .zip(&g.weights)
        .map(|((k, &v), w)| {
            let nl = 2.0 * params.lambda * v
                + (params.p + 1.0) * crate::params::power_term(v, params.p)
                + 2.0 * params.theta * (u_log_u2(v) + v);
            2.0 * k - w * nl
        })
        .collect()
}

fn tangential_norm(u: &RadialFunction, params: &ProblemParams, pre: &Preconditioner) -> f64 {
    let d = pre.apply_inv(&gradient(u, params));
    let n = pre.apply_inv(&gradient_i(u, params));
    let nn = pre.inner(&n, &n);
    let c = if nn > 0.0 { pre.inner(&d, &n) / nn } else { 0.0 };
    let t: Vec<f64> = d.iter().zip(&n).map(|(a, b)| a - c * b).collect();
    let uu = pre.inner(&u.values, &u.values);
    (pre.inner(&t, &t) / uu).max(0.0).sqrt()
}

/// Minimize `J` over the Nehari set by preconditioned descent with re-projection every step.
pub fn minimize_nehari(
    init: &RadialFunction,
    params: &ProblemParams,
    opts: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    if params.theta <= 0.0 {
        return Err(Error::Hypothesis(format!("minimization needs theta > 0 (theta = {})", params.theta)));
    }
    if !init.values.iter().any(|&v| v > 0.0) {
        return Err(Error::InvalidParams("initial profile is nowhere positive".into()));
    }
    let grid = init.grid.clone();
    let mut start = init.clone();
    *start.values.last_mut().unwrap() = 0.0;
    let (mut u, mut t0) = nehari_project(&start, params)?;
    let mut rep = eval_j(&u, params)?;
    let mut step = opts.step;
    let mut pre = Preconditioner::new(&u, params)?;
    let mut log = vec![IterRecord { iter: 0, j: rep.j, i: rep.i, t0, grad_norm: tangential_norm(&u, params, &pre) }];
    let mut rejections = 0;
    let mut converged = false;
    for iter in 1..=opts.max_iter {
        let d = pre.apply_inv(&gradient(&u, params));
        // J is even, so reflecting keeps the iterate in the positive cone at no cost
        let trial_vals: Vec<f64> = u.values.iter().zip(&d).map(|(a, b)| (a - step * b).abs()).collect();
        let trial = RadialFunction::new(grid.clone(), trial_vals)?;
        let (cand, t) = nehari_project(&trial, params)?;
        let crep = eval_j(&cand, params)?;
        let rel = (rep.j - crep.j) / crep.j.abs().max(f64::MIN_POSITIVE);
        if crep.j <= rep.j {
            u = cand;
            rep = crep;
            t0 = t;
            rejections = 0;
            pre = Preconditioner::new(&u, params)?;
            log.push(IterRecord { iter, j: rep.j, i: rep.i, t0, grad_norm: tangential_norm(&u, params, &pre) });
            if rel < opts.tol {
                converged = true;
                break;
            }
        } else {
            if rel.abs() < opts.tol {
                converged = true;
                break;
            }
            rejections += 1;
            if rejections >= 10 {
                return Err(Error::Divergence(rejections));
            }
            step *= 0.5;
        }
    }
    let stationarity = tangential_norm(&u, params, &pre);
    Ok(MinimizeOutcome { d_p: rep.j, report: rep, u, log, converged, stationarity })
}

/// `(ε/π)‖∇u‖² + ‖u‖²(ln‖u‖² + C₁ - C₂ ln ε) - ∫u² ln u²`; nonnegative when the inequality holds.
pub fn log_sobolev_residual(u: &RadialFunction, eps: f64, c1: f64, c2: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("eps = {eps} must be positive")));
    }
    let g = &u.grid;
    let l2: f64 = u.values.iter().zip(&g.weights).map(|(v, w)| w * v * v).sum();
    if l2 == 0.0 {
        return Ok(0.0);
    }
    let log: f64 = u.values.iter().zip(&g.weights).map(|(&v, w)| w * u2_log_u2(v)).sum();
    let grad = g.grad_norm_sq(&u.values);
    Ok(eps / std::f64::consts::PI * grad + l2 * (l2.ln() + c1 - c2 * eps.ln()) - log)
}

/// `(C₁, C₂)` from the Jensen/Sobolev chain.
///
/// For `N >= 3`, `C̃₁ = N/2` and `C̃₂ = 1/S`; for `N = 2`, `C̃₁ = 2` and
/// `C̃₂ = 1/S_{0,3}`. Then `C₁ = C̃₁ ln(C̃₂ C̃₁ π)` and `C₂ = C̃₁`.
pub fn constants_from_proof(n: u32, s_val: f64, s03_val: f64) -> Result<(f64, f64)> {
    let (c1t, s) = match n {
        0 | 1 => return Err(Error::InvalidParams(format!("N = {n} < 2"))),
        2 => (2.0, s03_val),
        _ => (f64::from(n) / 2.0, s_val),
    };
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParams(format!("Sobolev constant {s} must be positive")));
    }
    let c2t = 1.0 / s;
    Ok((c1t * (c2t * c1t * std::f64::consts::PI).ln(), c1t))
}

/// Upper estimate of `S_{0,3} = inf ‖∇u‖² / ‖u‖₄²` on `B²`, from a grid minimization.
///
/// Uses the normalized fixed point `u ← K⁻¹(M u³)`, whose fixed points are the
/// critical points of the quotient, with monotone acceptance.
pub fn estimate_s03(grid: Arc<RadialGrid>, max_iter: usize) -> Result<f64> {
    if grid.dim() != 2 {
        return Err(Error::InvalidParams("S_{0,3} lives on the hyperbolic plane".into()));
    }
    let free = grid.len() - 1;
    let chol = grid.stiffness.leading(free).cholesky()?;
    let quotient = |v: &[f64]| {
        let grad = grid.grad_norm_sq(v);
        let l4: f64 = v.iter().zip(&grid.weights).map(|(x, w)| w * x.powi(4)).sum();
        grad / l4.sqrt()
    };
    let mut u = RadialFunction::initial_profile(grid.clone()).values;
    let mut q = quotient(&u);
    for _ in 0..max_iter {
        let rhs: Vec<f64> = u[..free].iter().zip(&grid.weights).map(|(x, w)| w * x.powi(3)).collect();
        let mut next = chol.solve(&rhs);
        next.push(0.0);
        let scale = next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        next.iter_mut().for_each(|x| *x /= scale);
        let qn = quotient(&next);
        let done = (q - qn).abs() <= 1e-14 * q;
        if qn < q {
            u = next;
            q = qn;
        }
        if done {
            break;
        }
    }
    Ok(q)
}
