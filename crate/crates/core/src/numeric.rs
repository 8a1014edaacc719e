//! Special functions, quadrature rules and Chebyshev machinery shared by the
//! analysis and transfer-operator code.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Even-index Bernoulli numbers B_2, B_4, ..., B_24.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// ln sin(pi z), stable for large |Im z|.
fn ln_sin_pi(z: C64) -> C64 {
    let i = C64::i();
    if z.im > 5.0 {
        -i * PI * z + C64::new(0.5f64.ln(), PI / 2.0) + (C64::new(1.0, 0.0) - (2.0 * i * PI * z).exp()).ln()
    } else if z.im < -5.0 {
        i * PI * z + C64::new(0.5f64.ln(), -PI / 2.0) + (C64::new(1.0, 0.0) - (-2.0 * i * PI * z).exp()).ln()
    } else {
        (PI * z).sin().ln()
    }
}

/// Logarithm of the Gamma function on the complex plane. Only differences
/// exponentiated back are meaningful; the branch is not the principal one.
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        return C64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(C64::new(1.0, 0.0) - z);
    }
    let mut z = z;
    let mut shift = C64::new(0.0, 0.0);
    while z.norm() < 16.0 {
        shift += z.ln();
        z += 1.0;
    }
    let mut acc = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln();
    let zinv = z.inv();
    let z2 = zinv * zinv;
    let mut zp = zinv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(8) {
        let m = 2.0 * (k as f64 + 1.0);
        acc += zp * (*b / (m * (m - 1.0)));
        zp *= z2;
    }
    acc - shift
}

pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(C64::new(x, 0.0)).re
}

/// Hurwitz zeta sum_{k>=0} (k+a)^{-s} for Re s > 1 and a > 0, by
/// Euler-Maclaurin summation.
pub fn hurwitz_zeta(s: C64, a: f64) -> C64 {
    assert!(a > 0.0);
    let n_direct = 12 + (s.im.abs() / 2.0).ceil() as usize;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n_direct {
        acc += pow_real(k as f64 + a, -s);
    }
    let x = n_direct as f64 + a;
    let xs = pow_real(x, -s);
    acc += xs * x / (s - 1.0) + xs * 0.5;
    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * x^{-s-2j+1}
    let mut rising = s;
    let mut xpow = xs / x;
    let mut fact = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = rising * xpow * (*b / fact);
        acc += term;
        if term.norm() < 1e-18 * acc.norm() {
            break;
        }
        let m = 2.0 * (j as f64 + 1.0);
        rising *= (s + (m - 1.0)) * (s + m);
        xpow /= x * x;
        fact *= (m + 1.0) * (m + 2.0);
    }
    acc
}

/// x^s for real x > 0 and complex s.
pub fn pow_real(x: f64, s: C64) -> C64 {
    (s * x.ln()).exp()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Chebyshev-Lobatto points on [0, 1], ascending, with x_0 = 0 and x_N = 1.
pub fn cheb_nodes(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| 0.5 * (1.0 - (PI * j as f64 / n as f64).cos()))
        .collect()
}

/// T_0..T_n evaluated at x in [0, 1] (mapped to t = 2x - 1).
pub fn cheb_t(n: usize, x: f64) -> Vec<f64> {
    let t = 2.0 * x - 1.0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(t);
    }
    for k in 2..=n {
        let v = 2.0 * t * out[k - 1] - out[k - 2];
        out.push(v);
    }
    out
}

/// Matrix mapping values at `cheb_nodes(n)` to Chebyshev coefficients,
/// row-major (n+1) x (n+1).
pub fn cheb_values_to_coeffs(n: usize) -> Vec<f64> {
    let nodes = cheb_nodes(n);
    let m = n + 1;
    let mut c = vec![0.0; m * m];
    for (j, &x) in nodes.iter().enumerate() {
        let t = cheb_t(n, x);
        let wj = if j == 0 || j == n { 0.5 } else { 1.0 };
        for k in 0..m {
            let wk = if k == 0 || k == n { 0.5 } else { 1.0 };
            c[k * m + j] = 2.0 / n as f64 * wj * wk * t[k];
        }
    }
    c
}

/// i-th derivative in x of T_k(2x - 1) at x = 0.
pub fn cheb_deriv_at_zero(k: usize, i: usize) -> f64 {
    if i > k {
        return 0.0;
    }
    let kf = k as f64;
    let mut v = 1.0;
    for l in 0..i {
        let lf = l as f64;
        v *= (kf * kf - lf * lf) / (2.0 * lf + 1.0);
    }
    let sign = if (k + i) % 2 == 0 { 1.0 } else { -1.0 };
    sign * v * 2f64.powi(i as i32)
}

/// Table of ln k! for k = 0..=n.
#[derive(Debug, Clone)]
pub struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(n: usize) -> Self {
        let mut v = Vec::with_capacity(n + 1);
        v.push(0.0);
        let mut acc = 0.0;
        for k in 1..=n {
            acc += (k as f64).ln();
            v.push(acc);
        }
        LnFactorial(v)
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// Harmonic numbers H_0..=H_n.
pub fn harmonic(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n + 1];
    for k in 1..=n {
        h[k] = h[k - 1] + 1.0 / k as f64;
    }
    h
}

/// Golden-section minimisation of `f` on [a, b].
pub fn golden_min(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Pearson correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut f = 1.0f64;
        for n in 1..20 {
            f *= n as f64;
            let v = ln_gamma(C64::new(n as f64 + 1.0, 0.0));
            assert!((v.re - f.ln()).abs() < 1e-12, "n={n}");
        }
        let half = ln_gamma(C64::new(0.5, 0.0));
        assert!((half.re - 0.5 * PI.ln()).abs() < 1e-13);
    }

    #[test]
    fn ln_gamma_reflection_and_recurrence() {
        for &z in &[C64::new(-1.3, 2.0), C64::new(0.2, -40.0), C64::new(-3.5, 120.0)] {
            let lhs = (ln_gamma(z + 1.0) - ln_gamma(z)).exp();
            assert!((lhs - z).norm() < 1e-9 * z.norm(), "z={z}");
        }
    }

    #[test]
    fn hurwitz_matches_zeta_two() {
        let v = hurwitz_zeta(C64::new(2.0, 0.0), 1.0);
        assert!((v.re - PI * PI / 6.0).abs() < 1e-13);
        let w = hurwitz_zeta(C64::new(2.0, 0.0), 3.0);
        assert!((w.re - (PI * PI / 6.0 - 1.25)).abs() < 1e-13);
    }

    #[test]
    fn hurwitz_complex_argument() {
        let s = C64::new(1.5, 7.0);
        let direct: C64 = (0..2_000_000).map(|k| pow_real(k as f64 + 2.5, -s)).sum();
        let tail = pow_real(2_000_002.5, C64::new(1.0, 0.0) - s) / (s - 1.0);
        assert!((hurwitz_zeta(s, 2.5) - direct - tail).norm() < 1e-7);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_interpolation_is_exact_on_polynomials() {
        let n = 8;
        let nodes = cheb_nodes(n);
        let c = cheb_values_to_coeffs(n);
        let f = |x: f64| 3.0 * x.powi(5) - x + 0.25;
        let vals: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        let coef: Vec<f64> = (0..=n)
            .map(|k| (0..=n).map(|j| c[k * (n + 1) + j] * vals[j]).sum())
            .collect();
        let x = 0.37;
        let t = cheb_t(n, x);
        let p: f64 = coef.iter().zip(&t).map(|(a, b)| a * b).sum();
        assert!((p - f(x)).abs() < 1e-12);
        // derivatives at zero
        let d1: f64 = (0..=n).map(|k| coef[k] * cheb_deriv_at_zero(k, 1)).sum();
        let d2: f64 = (0..=n).map(|k| coef[k] * cheb_deriv_at_zero(k, 2)).sum();
        assert!((d1 + 1.0).abs() < 1e-10);
        assert!(d2.abs() < 1e-9);
    }

    #[test]
    fn golden_finds_minimum() {
        let (x, _) = golden_min(0.0, 3.0, 1e-10, |x| (x - 1.2).powi(2));
        assert!((x - 1.2).abs() < 1e-8);
    }
}
