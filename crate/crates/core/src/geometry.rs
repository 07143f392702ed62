//! Poincaré ball model of hyperbolic space.
//!
//! Points live in Euclidean coordinates inside the open unit ball; radial
//! quantities use the geodesic distance `rho` from the origin, related by
//! `|x| = tanh(rho / 2)`.
//!
//! ```
//! use hyperlog::geometry::{BallPoint, hyperbolic_distance};
//! let o = BallPoint::origin(3);
//! let x = BallPoint::new(vec![0.5, 0.0, 0.0]).unwrap();
//! let d = hyperbolic_distance(&o, &x).unwrap();
//! assert!((d - 3f64.ln()).abs() < 1e-15);
//! ```

use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<f64>,
}

impl BallPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("ball point coordinate"));
        }
        let n = norm(&coords);
        if n >= 1.0 {
            return Err(Error::OutsideBall(n));
        }
        Ok(Self { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    /// Point at geodesic distance `rho` from the origin along `direction`.
    pub fn from_polar(rho: RadialCoord, direction: &[f64]) -> Result<Self> {
        let n = norm(direction);
        if n == 0.0 {
            return Err(Error::InvalidParams("zero direction".into()));
        }
        let r = rho.to_norm();
        Self::new(direction.iter().map(|d| d / n * r).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    /// `1 - |x|^2`, formed as `(1 - r)(1 + r)`.
    pub fn one_minus_norm_sq(&self) -> f64 {
        let r = self.norm();
        (1.0 - r) * (1.0 + r)
    }
}

/// Geodesic distance from the origin.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RadialCoord(f64);

impl RadialCoord {
    pub fn new(rho: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::NonFinite("rho"));
        }
        if rho < 0.0 {
            return Err(Error::InvalidParams(format!("rho = {rho} < 0")));
        }
        Ok(Self(rho))
    }

    pub fn from_norm(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::OutsideBall(r));
        }
        Ok(Self(2.0 * r.atanh()))
    }

    pub fn rho(self) -> f64 {
        self.0
    }

    pub fn to_norm(self) -> f64 {
        (0.5 * self.0).tanh()
    }
}

fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|c| (c / scale).powi(2)).sum::<f64>().sqrt()
}

fn same_dim(x: &BallPoint, y: &BallPoint) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(x.dim(), y.dim()));
    }
    Ok(())
}

/// `d(x, y) = 2 asinh(|x - y| / sqrt((1 - |x|^2)(1 - |y|^2)))`.
///
/// Equivalent to `cosh d = 1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2))` but without
/// the cancellation of `acosh` near zero.
pub fn hyperbolic_distance(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    same_dim(x, y)?;
    let diff: Vec<f64> = x.coords.iter().zip(&y.coords).map(|(a, b)| a - b).collect();
    let num = norm(&diff);
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = (x.one_minus_norm_sq() * y.one_minus_norm_sq()).sqrt();
    Ok(2.0 * (num / den).asinh())
}

/// Möbius translation `τ_b`, the isometry sending 0 to `b`.
pub fn mobius_translate(b: &BallPoint, x: &BallPoint) -> Result<BallPoint> {
    same_dim(b, x)?;
    let bb: f64 = b.coords.iter().map(|c| c * c).sum();
    let xx: f64 = x.coords.iter().map(|c| c * c).sum();
    let xb: f64 = x.coords.iter().zip(&b.coords).map(|(a, c)| a * c).sum();
    let den = bb * xx + 2.0 * xb + 1.0;
    let cx = b.one_minus_norm_sq();
    let cb = xx + 2.0 * xb + 1.0;
    let coords: Vec<f64> = x
        .coords
        .iter()
        .zip(&b.coords)
        .map(|(xi, bi)| (cx * xi + cb * bi) / den)
        .collect();
    // round-off can land a point near the boundary exactly on it
    let n = norm(&coords);
    if n >= 1.0 {
        return Err(Error::OutsideBall(n));
    }
    Ok(BallPoint { coords })
}

/// Metric factor `2 / (1 - |x|^2)`.
pub fn conformal_factor(x: &BallPoint) -> f64 {
    2.0 / x.one_minus_norm_sq()
}

/// Metric factor from the Euclidean radius alone.
pub fn conformal_factor_norm(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r.abs()) {
        return Err(Error::OutsideBall(r));
    }
    Ok(2.0 / ((1.0 - r) * (1.0 + r)))
}

/// `Γ(k / 2)` for positive integer `k`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1);
    if k.is_multiple_of(2) {
        (1..k / 2).map(f64::from).product()
    } else {
        // Γ(m + 1/2) = (2m-1)!! / 2^m · sqrt(π)
        let m = (k - 1) / 2;
        let mut g = PI.sqrt();
        for j in 0..m {
            g *= f64::from(j) + 0.5;
        }
        g
    }
}

/// Area of the unit sphere in `R^n`, i.e. `ω_{n-1} = 2 π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    2.0 * PI.powf(f64::from(n) / 2.0) / gamma_half(n)
}

/// `ln sinh(x)` for `x > 0`, stable for large and tiny `x`.
pub fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// Radial density of hyperbolic volume, `ω_{N-1} sinh^{N-1}(rho)`.
pub fn volume_weight(rho: RadialCoord, n: u32) -> f64 {
    assert!(n >= 2);
    sphere_area(n) * rho.rho().sinh().powi(n as i32 - 1)
}

/// Volume of the geodesic ball of radius `r`, computed in closed form for `N = 2, 3`
/// and by recursion otherwise.
pub fn ball_volume(r: f64, n: u32) -> f64 {
    // I_k(r) = ∫_0^r sinh^k; I_k = (sinh^{k-1} cosh)/k - (k-1)/k I_{k-2}
    fn i_k(k: u32, r: f64) -> f64 {
        match k {
            0 => r,
            1 => r.cosh() - 1.0,
            _ => {
                let kf = f64::from(k);
                r.sinh().powi(k as i32 - 1) * r.cosh() / kf - (kf - 1.0) / kf * i_k(k - 2, r)
            }
        }
    }
    sphere_area(n) * i_k(n - 1, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> BallPoint {
        BallPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let o = BallPoint::origin(2);
        assert_eq!(hyperbolic_distance(&o, &o).unwrap(), 0.0);
        let d = hyperbolic_distance(&o, &pt(&[0.0, 0.5])).unwrap();
        assert!((d - 1.0986122886681098).abs() < 1e-15);
    }

    #[test]
    fn distance_matches_cosh_form() {
        let x = pt(&[0.3, -0.2, 0.1]);
        let y = pt(&[-0.5, 0.4, 0.2]);
        let d = hyperbolic_distance(&x, &y).unwrap();
        let dxy: f64 = [0.8f64, -0.6, -0.1].iter().map(|c| c * c).sum();
        let ch = 1.0 + 2.0 * dxy / (x.one_minus_norm_sq() * y.one_minus_norm_sq());
        assert!((d.cosh() - ch).abs() < 1e-13);
    }

    #[test]
    fn rejects_outside_points() {
        assert!(matches!(BallPoint::new(vec![1.0, 0.0]), Err(Error::OutsideBall(_))));
        assert!(conformal_factor_norm(1.0).is_err());
        assert!(RadialCoord::new(-1.0).is_err());
    }

    #[test]
    fn translation_examples() {
        let b = pt(&[0.2, -0.7]);
        assert_eq!(mobius_translate(&b, &BallPoint::origin(2)).unwrap(), b);
        let x = pt(&[0.4, 0.1]);
        let y = mobius_translate(&BallPoint::origin(2), &x).unwrap();
        assert!(y.coords().iter().zip(x.coords()).all(|(a, b)| (a - b).abs() < 1e-16));
    }

    #[test]
    fn conformal_factor_examples() {
        assert_eq!(conformal_factor(&BallPoint::origin(3)), 2.0);
        assert!((conformal_factor(&pt(&[0.5, 0.0, 0.0])) - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conformal_factor_gives_volume_density() {
        // dV = factor^N r^{N-1} dr dσ and dr/dρ = (1 - r^2)/2
        for n in 2..=6u32 {
            for &rho in &[0.1, 1.0, 3.0] {
                let r = (0.5f64 * rho).tanh();
                let f = conformal_factor_norm(r).unwrap();
                let lhs = sphere_area(n) * f.powi(n as i32) * r.powi(n as i32 - 1) * (1.0 - r * r) / 2.0;
                let rhs = volume_weight(RadialCoord(rho), n);
                assert!((lhs / rhs - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn volume_weight_examples() {
        assert_eq!(volume_weight(RadialCoord(0.0), 3), 0.0);
        let v = volume_weight(RadialCoord(1.0), 3);
        assert!((v - 4.0 * PI * 1f64.sinh().powi(2)).abs() < 1e-13);
        // 4π sinh²(1) = 17.35538738...
        assert!((v - 17.355387381771433).abs() < 1e-12);
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(8), 6.0);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn ln_sinh_branches_agree() {
        for &x in &[19.9, 20.0, 20.1] {
            assert!((ln_sinh(x) - x.sinh().ln()).abs() < 1e-14);
        }
        assert!((ln_sinh(400.0) - (400.0 - std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn ball_volume_is_integral_of_weight() {
        let v = crate::quad::integrate(|r| volume_weight(RadialCoord(r), 5), 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((v / ball_volume(2.0, 5) - 1.0).abs() < 1e-12);
    }
}
