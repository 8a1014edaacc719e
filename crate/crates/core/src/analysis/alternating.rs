use super::{varpi_factor, CostKind};
use crate::error::Result;
use crate::hp::{self, HpContext, HpFloat};
use crate::source::SourceModel;
use num_complex::Complex64 as C64;

/// ceil(1.1 n) + 64 bits: the binomial terms reach about 2^n while the
/// sum stays polynomial in n.
pub fn default_precision(n: u64) -> usize {
    (1.1 * n as f64).ceil() as usize + 64
}

pub struct AlternatingSum {
    pub value: HpFloat,
    pub abs_error: f64,
    pub precision_bits: usize,
    /// Sum of the absolute values of the terms.
    pub abs_terms: f64,
}

enum LambdaHp<'a> {
    Exact(Box<dyn Fn(&HpContext, usize) -> Result<HpFloat> + 'a>, f64),
    /// Double-precision value with an absolute error bound.
    Approx(&'a SourceModel),
}

fn lambda_source(source: &SourceModel) -> LambdaHp<'_> {
    if let Some(m) = source.as_memoryless() {
        let r = m.alphabet_size() as f64;
        return LambdaHp::Exact(Box::new(move |ctx, k| Ok(m.big_lambda_hp(ctx, k))), r);
    }
    match source {
        SourceModel::Markov(mc) => {
            let d = mc.states() as f64;
            LambdaHp::Exact(Box::new(move |ctx, k| mc.big_lambda_hp(ctx, k)), d * d * d)
        }
        _ => LambdaHp::Approx(source),
    }
}

fn factor_hp(ctx: &HpContext, kind: CostKind, k: u64) -> HpFloat {
    let kf = ctx.from_u64(k);
    match kind {
        CostKind::R => ctx.from_u64(k - 1),
        CostKind::C => kf,
        CostKind::B => ctx.div(&ctx.from_u64(2), &ctx.mul(&kf, &ctx.from_u64(k - 1))),
    }
}

/// T(n) = sum_{k=2}^n (-1)^k C(n,k) varpi_T(k) at `prec` bits.
pub fn alternating_sum_hp(kind: CostKind, source: &SourceModel, n: u64, prec: usize) -> Result<AlternatingSum> {
    let ctx = HpContext::new(prec);
    let unit = (-(ctx.prec() as f64)).exp2();
    let lam = lambda_source(source);
    let mut total = ctx.zero();
    let mut abs_terms = 0.0;
    let mut err = 0.0;
    // C(n,k), updated in place
    let mut binom = ctx.from_u64(n);
    for k in 2..=n {
        binom = ctx.div(&ctx.mul(&binom, &ctx.from_u64(n - k + 1)), &ctx.from_u64(k));
        let (lk, rel, abs_lam_err) = match &lam {
            LambdaHp::Exact(f, ops) => {
                let v = f(&ctx, k as usize)?;
                let rel = (64.0 + 8.0 * ops * (k as f64 + 1.0).log2()) * hp::to_f64(&v).abs() * unit;
                (v, rel, 0.0)
            }
            LambdaHp::Approx(src) => {
                let v = src.lambda_series(C64::new(k as f64, 0.0), 1e-14)?;
                (
                    ctx.from_f64(v.value.re),
                    0.0,
                    v.abs_error_bound + v.value.re.abs() * f64::EPSILON,
                )
            }
        };
        let mut term = ctx.mul(&ctx.mul(&binom, &factor_hp(&ctx, kind, k)), &lk);
        let mag = hp::to_f64(&term).abs();
        if k % 2 == 1 {
            term = ctx.sub(&ctx.zero(), &term);
        }
        total = ctx.add(&total, &term);
        abs_terms += mag;
        let lam_mag = hp::to_f64(&lk).abs().max(f64::MIN_POSITIVE);
        err += mag * (rel + (2 * k + 8) as f64 * unit) + mag / lam_mag * abs_lam_err;
    }
    err += abs_terms * (n as f64 + 4.0) * unit;
    Ok(AlternatingSum {
        value: total,
        abs_error: err * 1.01,
        precision_bits: ctx.prec(),
        abs_terms,
    })
}

/// The same sum in plain double precision, for comparison only.
pub fn alternating_sum_f64(kind: CostKind, source: &SourceModel, n: u64) -> Result<f64> {
    let mut binom = n as f64;
    let mut total = 0.0;
    for k in 2..=n {
        binom = binom * (n - k + 1) as f64 / k as f64;
        let s = C64::new(k as f64, 0.0);
        let lam = source.lambda_series(s, 1e-14)?.value.re;
        let term = binom * varpi_factor(kind, s).re * lam;
        total += if k % 2 == 0 { term } else { -term };
    }
    Ok(total)
}
