use crate::error::{Error, Result};

/// One instance of `Δu + λu + |u|^{p-1}u + θ u ln u² = 0` on `B^N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub n: u32,
    pub lambda: f64,
    pub theta: f64,
    pub p: f64,
}

impl ProblemParams {
    /// Validates `N >= 2`, `p > 1` and, for `N >= 3`, `p <= (N+2)/(N-2)`.
    pub fn new(n: u32, lambda: f64, theta: f64, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("N = {n} < 2")));
        }
        if !(lambda.is_finite() && theta.is_finite() && p.is_finite()) {
            return Err(Error::NonFinite("problem parameters"));
        }
        if p <= 1.0 {
            return Err(Error::InvalidParams(format!("p = {p} must exceed 1")));
        }
        if let Some(crit) = critical_p(n) {
            if p > crit + 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "p = {p} exceeds the critical exponent {crit} for N = {n}"
                )));
            }
        }
        Ok(Self { n, lambda, theta, p })
    }

    /// Same as [`new`](Self::new) with `p = 2* - 1`.
    pub fn critical(n: u32, lambda: f64, theta: f64) -> Result<Self> {
        let p = critical_p(n).ok_or_else(|| Error::InvalidParams("no critical exponent for N = 2".into()))?;
        Self::new(n, lambda, theta, p)
    }

    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// Bottom of the L² spectrum of `-Δ`, `(N-1)²/4`.
    pub fn lambda1(&self) -> f64 {
        lambda1(self.n)
    }

    /// `2* = 2N/(N-2)`, absent for `N = 2`.
    pub fn two_star(&self) -> Option<f64> {
        critical_p(self.n).map(|p| p + 1.0)
    }

    /// `λu + |u|^{p-1}u + θ u ln u²`, with `0 ln 0 = 0`.
    #[inline]
    pub fn nonlinearity(&self, u: f64) -> f64 {
        self.lambda * u + power_term(u, self.p) + self.theta * u_log_u2(u)
    }

    /// Potential `λu²/2 + |u|^{p+1}/(p+1) + (θ/2)u²(ln u² - 1)`.
    #[inline]
    pub fn potential(&self, u: f64) -> f64 {
        let u2 = u * u;
        let log_part = if u == 0.0 { 0.0 } else { u2 * (2.0 * u.abs().ln() - 1.0) };
        0.5 * self.lambda * u2 + u.abs().powf(self.p + 1.0) / (self.p + 1.0) + 0.5 * self.theta * log_part
    }
}

pub fn lambda1(n: u32) -> f64 {
    let m = f64::from(n) - 1.0;
    m * m / 4.0
}

/// `(N+2)/(N-2)` for `N >= 3`.
pub fn critical_p(n: u32) -> Option<f64> {
    (n >= 3).then(|| (f64::from(n) + 2.0) / (f64::from(n) - 2.0))
}

#[inline]
pub(crate) fn power_term(u: f64, p: f64) -> f64 {
    if p == 3.0 {
        u * u * u
    } else {
        u.abs().powf(p - 1.0) * u
    }
}

/// `u ln u²` with the value 0 at `u = 0`; written as `2u ln|u|` so tiny `u` does not underflow.
#[inline]
pub fn u_log_u2(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        2.0 * u * u.abs().ln()
    }
}

/// `u² ln u²` with the value 0 at `u = 0`.
#[inline]
pub fn u2_log_u2(u: f64) -> f64 {
    u * u_log_u2(u)
}
