//! Special functions used by the beam-pattern analysis.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

/// Dirichlet sinc `Ξ_a(x) = sin(aπx/2) / sin(πx/2)`.
///
/// At the removable singularities `x = 2k` the limit `a·(−1)^{k(a−1)}` is
/// returned, so the function is finite everywhere.
pub fn dirichlet_sinc(order: i64, x: f64) -> f64 {
    let a = order as f64;
    let half = FRAC_PI_2 * x;
    let den = half.sin();
    if den.abs() < 1e-12 {
        // L'Hôpital: a·cos(aπx/2)/cos(πx/2)
        return a * (a * half).cos() / half.cos();
    }
    (a * half).sin() / den
}

/// Normalised Fresnel integrals `(C(x), S(x))` with kernels `cos(πt²/2)`
/// and `sin(πt²/2)`.
///
/// Power series below |x| = 1.5, modified Lentz continued fraction above.
/// Absolute error is below 1e-12 on the whole real line.
pub fn fresnel_integrals(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-16;
    const MAXIT: usize = 200;
    const FPMIN: f64 = 1e-300;
    const XMIN: f64 = 1.5;

    let ax = x.abs();
    let (c, s) = if ax < 1e-150 {
        (ax, 0.0)
    } else if ax <= XMIN {
        let fact = FRAC_PI_2 * ax * ax;
        let mut sum = 0.0;
        let mut sums = 0.0;
        let mut sumc = ax;
        let mut sign = 1.0;
        let mut odd = true;
        let mut term = ax;
        let mut n = 3.0;
        for k in 1..MAXIT {
            term *= fact / k as f64;
            sum += sign * term / n;
            let test = sum.abs() * EPS;
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if term < test {
                break;
            }
            odd = !odd;
            n += 2.0;
        }
        (sumc, sums)
    } else {
        let pix2 = PI * ax * ax;
        let mut b = Complex64::new(1.0, -pix2);
        let mut cc = Complex64::new(1.0 / FPMIN, 0.0);
        let mut d = b.inv();
        let mut h = d;
        let mut n = -1.0;
        for _ in 2..MAXIT {
            n += 2.0;
            let a = -n * (n + 1.0);
            b += 4.0;
            d = (a * d + b).inv();
            cc = b + a / cc;
            let del = cc * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < EPS {
                break;
            }
        }
        h *= Complex64::new(ax, -ax);
        let cs = Complex64::new(0.5, 0.5) * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 0.5 * pix2) * h);
        (cs.re, cs.im)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// `F(x) = (C(x) + j·S(x)) / x`, the range-domain pattern kernel; `F(0) = 1`.
pub fn fresnel_kernel(x: f64) -> Complex64 {
    if x.abs() < 1e-8 {
        return Complex64::new(1.0, 0.0);
    }
    let (c, s) = fresnel_integrals(x);
    Complex64::new(c, s) / x
}
