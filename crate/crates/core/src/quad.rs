//! Quadrature rules and a bracketed scalar root finder.
//!
//! Gauss–Legendre and Gauss–Lobatto nodes come from Newton iteration on the
//! Legendre recurrence. The adaptive integrator is a global-error
//! Gauss–Kronrod 7/15 scheme.

use crate::error::{Error, Result};

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `n`-point Gauss–Lobatto–Legendre rule on `[-1, 1]` (`n >= 2`), endpoints included.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let m = n - 1;
    let mf = m as f64;
    let mut x = vec![0.0; n];
    x[0] = -1.0;
    x[m] = 1.0;
    // interior nodes: roots of P'_m, i.e. of (1 - x^2) P'_m
    for i in 1..m {
        let mut z = -(std::f64::consts::PI * i as f64 / mf).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, z);
            // q = (1-z^2) P'_m, q' = -m(m+1) P_m
            let q = (1.0 - z * z) * dp;
            let dq = -mf * (mf + 1.0) * p;
            let dz = q / dq;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
    }
    let w = x
        .iter()
        .map(|&z| {
            let (p, _) = legendre(m, z);
            2.0 / (mf * (mf + 1.0) * p * p)
        })
        .collect();
    (x, w)
}

/// Differentiation matrix on the Lobatto nodes: `(D f)_i = f'(x_i)` for polynomials of degree `< n`.
pub fn lobatto_diff_matrix(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let m = n - 1;
    let mf = m as f64;
    let p: Vec<f64> = x.iter().map(|&z| legendre(m, z).0).collect();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = if i != j {
                p[i] / (p[j] * (x[i] - x[j]))
            } else if i == 0 {
                -mf * (mf + 1.0) / 4.0
            } else if i == m {
                mf * (mf + 1.0) / 4.0
            } else {
                0.0
            };
        }
    }
    d
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_PANELS: usize = 5000;
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if !total.is_finite() {
            return Err(Error::Quadrature { a, b, err });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature { a, b, err });
        }
        let (k, _) = panels
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .3.total_cmp(&q.1 .3))
            .unwrap();
        let (lo, hi, pv, pe) = panels.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // cannot split further; accept what we have if the rest is fine
            return Err(Error::Quadrature { a, b, err });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated update round-off
    Ok(panels.iter().map(|p| p.2).sum())
}

/// Integrate over `[a, ∞)` for `a > 0` through `r = a / s`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    assert!(a > 0.0);
    integrate(
        |s| {
            if s <= 0.0 {
                0.0
            } else {
                let r = a / s;
                f(r) * a / (s * s)
            }
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

/// Integrate piecewise over consecutive `breaks`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64, abs_tol: f64) -> Result<f64> {
    let mut s = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            s += integrate(&f, w[0], w[1], rel_tol, abs_tol)?;
        }
    }
    Ok(s)
}

/// Root of `f` in `[a, b]` given a sign change, by Brent's method.
pub fn find_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Root(format!("no sign change on [{a}, {b}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Root(format!("non-finite value at {b}")));
        }
    }
    Err(Error::Root("iteration limit".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_high_degree_exactly() {
        let (x, w) = gauss_legendre(10);
        // degree 19 is exact: integral of x^18 on [-1,1] = 2/19
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lobatto_rule_and_derivative() {
        let (x, w) = gauss_lobatto(8);
        assert_eq!(x[0], -1.0);
        assert_eq!(x[7], 1.0);
        // exact to degree 2n-3 = 13
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        let d = lobatto_diff_matrix(&x);
        for i in 0..8 {
            let df: f64 = (0..8).map(|j| d[i][j] * x[j].powi(5)).sum();
            assert!((df - 5.0 * x[i].powi(4)).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x: f64| x.sqrt().ln(), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((v + 0.5).abs() < 1e-10);
    }

    #[test]
    fn tail_integral() {
        let v = integrate_to_infinity(|r| r.powi(-3), 2.0, 1e-13, 0.0).unwrap();
        assert!((v - 0.125).abs() < 1e-14);
    }

    #[test]
    fn brent_finds_cubic_root() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
