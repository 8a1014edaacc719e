//! T(n) as a contour integral of varpi_T(-s) n!/(s(s+1)...(s+n)) on the
//! line Re s = -d. The segment |Im s| <= t_max is integrated numerically.
//! Beyond it, Lambda = 1 + Lambda+ is split: the constant part integrates
//! term by term from the Laurent expansion of the kernel, and the
//! oscillating part by repeated integration by parts, whose boundary terms
//! sum over words into the moments F_m(u) = sum_w p_w^u / (-ln p_w)^m.

use super::{varpi_factor, CostKind, ExactMeanResult, Method};
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, ln_gamma, ln_gamma_real};
use crate::source::SourceModel;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiceOptions {
    /// Abscissa of the contour, 1 < d < 2.
    pub d: f64,
    /// Length of the numerically integrated segment; chosen from n when
    /// `None`.
    pub t_max: Option<f64>,
    /// Relative tolerance on the certified error.
    pub tol: f64,
}

impl Default for RiceOptions {
    fn default() -> Self {
        RiceOptions {
            d: 1.5,
            t_max: None,
            tol: 1e-10,
        }
    }
}

const LAURENT_TERMS: usize = 80;
const MAX_PARTS: usize = 14;
const GL_ORDER: usize = 28;
const GL_CHECK: usize = 20;

/// ln of the kernel n!/(s(s+1)...(s+n)).
fn ln_kernel(n: u64, s: C64) -> C64 {
    if n > 24 {
        return ln_gamma_real(n as f64 + 1.0) + ln_gamma(s) - ln_gamma(s + (n + 1) as f64);
    }
    let mut acc = C64::new(ln_gamma_real(n as f64 + 1.0), 0.0);
    for j in 0..=n {
        acc -= (s + j as f64).ln();
    }
    acc
}

/// Coefficients c_m with G(s) = n! s^-e sum_m c_m (t/s)^m for |s| > n.
fn laurent(kind: CostKind, n: u64, t: f64) -> (i32, Vec<f64>) {
    let m = LAURENT_TERMS;
    let mut p = vec![0.0; m];
    p[0] = 1.0;
    for j in 1..=n {
        // multiply by 1/(1 + (j/t) v)
        let r = -(j as f64) / t;
        for i in 1..m {
            p[i] += r * p[i - 1];
        }
    }
    let u = 1.0 / t;
    match kind {
        CostKind::R => {
            let mut out = vec![0.0; m];
            for i in 0..m {
                out[i] = -(p[i] + if i > 0 { u * p[i - 1] } else { 0.0 });
            }
            (n as i32, out)
        }
        CostKind::C => (n as i32, p.iter().map(|x| -x).collect()),
        CostKind::B => {
            for i in 1..m {
                p[i] -= u * p[i - 1];
            }
            (n as i32 + 3, p.iter().map(|x| 2.0 * x).collect())
        }
    }
}

fn rising(a: f64, k: usize) -> f64 {
    (0..k).map(|i| a + i as f64).product()
}

pub fn rice_integral(kind: CostKind, source: &SourceModel, n: u64, opts: &RiceOptions) -> Result<ExactMeanResult> {
    if !source.has_closed_form() {
        return Err(Error::UnsupportedSource("rice requires closed-form Λ".into()));
    }
    let d = opts.d;
    if !(d > 1.0 && d < 2.0) {
        return Err(Error::InvalidConfig(format!(
            "contour abscissa d = {d} must lie in (1, 2)"
        )));
    }
    let t_max = opts.t_max.unwrap_or_else(|| (4.0 * (n as f64 + 2.0)).max(64.0));
    if n < 2 {
        return Ok(ExactMeanResult {
            kind,
            n,
            value: 0.0,
            method: Method::Rice,
            certified_abs_error: 0.0,
            precision_bits: 53,
            semi_oracle: false,
        });
    }
    if t_max < 2.0 * (n as f64 + 2.0) {
        return Err(Error::KernelUnderflow { n, t_max });
    }
    let lam = |z: C64| -> Result<C64> { Ok(source.lambda_series(z, 1e-14)?.value) };
    let nf = n as f64;

    // numerical part on [0, t_max]
    let (xs, ws) = gauss_legendre(GL_ORDER);
    let (xs2, ws2) = gauss_legendre(GL_CHECK);
    let integrand = |t: f64| -> Result<f64> {
        let s = C64::new(-d, t);
        Ok((varpi_factor(kind, -s) * lam(-s)? * ln_kernel(n, s).exp()).re)
    };
    let panels = t_max.ceil() as usize;
    let width = t_max / panels as f64;
    let mut head = 0.0;
    let mut head_err = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * width;
        let h = 0.5 * width;
        let mut a = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            a += w * integrand(mid + h * x)?;
        }
        let mut b = 0.0;
        for (x, w) in xs2.iter().zip(&ws2) {
            b += w * integrand(mid + h * x)?;
        }
        head += h * a;
        head_err += h * (a - b).abs();
    }

    // tails
    let s_t = C64::new(-d, t_max);
    let (e, c) = laurent(kind, n, t_max);
    let ln_pre = ln_gamma_real(nf + 1.0);
    let pre = (C64::new(ln_pre, 0.0) - e as f64 * s_t.ln()).exp();
    let ratio = t_max / s_t;
    let laurent_err_rel = c[LAURENT_TERMS - 1].abs() * 4.0;

    let mut tail_const = C64::new(0.0, 0.0);
    for (m, cm) in c.iter().enumerate() {
        let a = (e + m as i32) as f64;
        tail_const += cm * ratio.powi(m as i32) * s_t / (a - 1.0);
    }
    tail_const = tail_const * pre / C64::new(0.0, 1.0);

    let derivs: Vec<C64> = (0..MAX_PARTS)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for (m, cm) in c.iter().enumerate() {
                let a = (e + m as i32) as f64;
                acc += cm * ratio.powi(m as i32) * rising(a, k);
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            pre * acc * sign / s_t.powi(k as i32)
        })
        .collect();
    let u = C64::new(d, -t_max);
    let (f_osc, f_real) = moments(&lam, u, d, MAX_PARTS + 1)?;
    // remainder bound for M integrations by parts, minimised over M
    let ln_t = t_max.ln();
    let mut best = (f64::INFINITY, 1);
    for mm in 1..=MAX_PARTS {
        let mut acc = 0.0;
        for (m, cm) in c.iter().enumerate() {
            let a = (e + m as i32) as f64;
            acc += cm.abs() * rising(a, mm) / (a + mm as f64 - 1.0);
        }
        let bound = f_real[mm] * acc * (ln_pre + (1.0 - e as f64 - mm as f64) * ln_t).exp();
        if bound < best.0 {
            best = (bound, mm);
        }
    }
    let (rem, parts) = best;
    let mut tail_osc = C64::new(0.0, 0.0);
    for (k, g) in derivs.iter().take(parts).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        tail_osc += C64::new(0.0, sign) * g * f_osc[k + 1];
    }

    let value = (head + (tail_const + tail_osc).re) / PI;
    let laurent_err = laurent_err_rel * (tail_const.norm() + tail_osc.norm());
    let err = (head_err + rem + laurent_err) / PI + value.abs() * 1e-14 * (panels as f64).sqrt();
    if !value.is_finite() || err > opts.tol * value.abs().max(1.0) {
        return Err(Error::KernelUnderflow { n, t_max });
    }
    Ok(ExactMeanResult {
        kind,
        n,
        value,
        method: Method::Rice,
        certified_abs_error: err,
        precision_bits: 53,
        semi_oracle: false,
    })
}

/// F_m(u) for the oscillating tail and F_m(d) for the bound, m = 0..count,
/// by quadrature of x^{m-1} Lambda+(u + x) / (m-1)! over x >= 0.
fn moments(lam: &impl Fn(C64) -> Result<C64>, u: C64, d: f64, count: usize) -> Result<(Vec<C64>, Vec<f64>)> {
    let (xs, ws) = gauss_legendre(16);
    let mut fc = vec![C64::new(0.0, 0.0); count + 1];
    let mut fr = vec![0.0; count + 1];
    let ln_fact: Vec<f64> = (0..=count).map(|m| ln_gamma_real(m as f64 + 1.0)).collect();
    let width = 0.5;
    let mut k = 0usize;
    loop {
        let lo = k as f64 * width;
        for (x, w) in xs.iter().zip(&ws) {
            let xx = lo + 0.5 * width * (x + 1.0);
            let wt = 0.5 * width * w;
            let vc = lam(u + xx)? - 1.0;
            let vr = lam(C64::new(d + xx, 0.0))?.re - 1.0;
            for m in 1..=count {
                let c = ((m as f64 - 1.0) * xx.ln() - ln_fact[m - 1]).exp();
                let c = if m == 1 { 1.0 } else { c };
                fc[m] += wt * c * vc;
                fr[m] += wt * c * vr;
            }
        }
        k += 1;
        let x = k as f64 * width;
        let vr = lam(C64::new(d + x, 0.0))?.re - 1.0;
        let peak = (1..=count)
            .map(|m| ((m as f64 - 1.0) * x.ln() - ln_fact[m - 1]).exp())
            .fold(1.0, f64::max);
        if x > count as f64 && vr * peak * x < 1e-18 * fr[1] {
            break;
        }
        if x > 5000.0 {
            return Err(Error::KernelUnderflow { n: 0, t_max: x });
        }
    }
    Ok((fc, fr))
}

#[cfg(test)]
mod tests {
    use super::super::exact_mean_alternating;
    use super::*;

    #[test]
    fn matches_alternating() {
        let u = SourceModel::builtin("uniform-binary").unwrap();
        let b = SourceModel::memoryless(&[0.3, 0.7]).unwrap();
        for (src, n) in [(&u, 8), (&b, 16), (&u, 2), (&b, 3), (&u, 40)] {
            for kind in CostKind::ALL {
                let r = rice_integral(kind, src, n, &RiceOptions::default()).unwrap();
                let a = exact_mean_alternating(kind, src, n, None).unwrap();
                assert!(
                    (r.value - a.value).abs() < 1e-9 * a.value,
                    "{kind} n={n}: {} vs {} (err {})",
                    r.value,
                    a.value,
                    r.certified_abs_error
                );
            }
        }
    }

    #[test]
    fn error_paths() {
        let g = SourceModel::builtin("gauss").unwrap();
        assert!(matches!(
            rice_integral(CostKind::R, &g, 4, &RiceOptions::default()),
            Err(Error::UnsupportedSource(_))
        ));
        let u = SourceModel::builtin("uniform-binary").unwrap();
        let short = RiceOptions {
            t_max: Some(5.0),
            ..Default::default()
        };
        assert!(matches!(
            rice_integral(CostKind::R, &u, 2, &short),
            Err(Error::KernelUnderflow { .. })
        ));
    }
}
