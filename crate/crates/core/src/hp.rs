//! Thin layer over `astro-float` for the few arbitrary-precision operations
//! the crate needs: the alternating binomial sums, logarithms of
//! probabilities, and continued fractions.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

pub use astro_float::BigFloat as HpFloat;

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision plus the constant cache `astro-float` needs for
/// transcendental functions.
pub struct HpContext {
    prec: usize,
    cc: Consts,
}

impl std::fmt::Debug for HpContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HpContext").field("prec", &self.prec).finish()
    }
}

impl HpContext {
    pub fn new(prec: usize) -> Self {
        // Precision is rounded up to whole 64-bit words by the backend anyway.
        let prec = prec.max(64).div_ceil(64) * 64;
        HpContext {
            prec,
            cc: Consts::new().expect("astro-float constant cache"),
        }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn zero(&self) -> BigFloat {
        BigFloat::from_u64(0, self.prec)
    }

    pub fn one(&self) -> BigFloat {
        BigFloat::from_u64(1, self.prec)
    }

    /// Exact: every f64 is a dyadic rational that fits in 64 bits of mantissa.
    pub fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }

    pub fn from_u64(&self, x: u64) -> BigFloat {
        BigFloat::from_u64(x, self.prec)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.prec, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.prec, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.prec, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.prec, RM)
    }

    pub fn powi(&self, a: &BigFloat, k: usize) -> BigFloat {
        if k == 0 {
            return self.one();
        }
        a.powi(k, self.prec, RM)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.prec, RM, &mut self.cc)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.prec, RM)
    }

    pub fn recip(&self, a: &BigFloat) -> BigFloat {
        a.reciprocal(self.prec, RM)
    }
}

/// Nearest f64 (truncating the mantissa beyond 128 bits).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _bits, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let n = words.len();
    let hi = words[n - 1] as f64;
    let lo = if n >= 2 { words[n - 2] as f64 } else { 0.0 };
    let frac = hi * 2f64.powi(-64) + lo * 2f64.powi(-128);
    let v = ldexp(frac, exp as i64);
    match sign {
        Sign::Neg => -v,
        Sign::Pos => v,
    }
}

/// Binary exponent e with 2^(e-1) <= |x| < 2^e, or `None` for zero/non-finite.
pub fn exponent(x: &BigFloat) -> Option<i64> {
    if x.is_zero() || x.is_nan() || x.is_inf() {
        return None;
    }
    x.exponent().map(|e| e as i64)
}

/// `frac * 2^e` without intermediate overflow for moderate `frac`.
pub fn ldexp(frac: f64, e: i64) -> f64 {
    if e > 2000 {
        return f64::INFINITY * frac.signum();
    }
    if e < -2200 {
        return 0.0;
    }
    let mut v = frac;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

pub fn floor(x: &BigFloat) -> BigFloat {
    x.floor()
}

pub fn abs(x: &BigFloat) -> BigFloat {
    x.abs()
}

pub fn is_negative(x: &BigFloat) -> bool {
    x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_f64() {
        let ctx = HpContext::new(256);
        for &v in &[3.0, -0.3, 1e-200, 12345.678, 0.5] {
            assert_eq!(to_f64(&ctx.from_f64(v)), v);
        }
        assert_eq!(to_f64(&ctx.zero()), 0.0);
    }

    #[test]
    fn log_ratio_at_high_precision() {
        let mut ctx = HpContext::new(512);
        let l3 = ctx.ln(&ctx.from_u64(3));
        let l2 = ctx.ln(&ctx.from_u64(2));
        let r = ctx.div(&l3, &l2);
        assert!((to_f64(&r) - 3f64.ln() / 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn exponent_matches_magnitude() {
        let ctx = HpContext::new(128);
        assert_eq!(exponent(&ctx.from_f64(1.0)), Some(1));
        assert_eq!(exponent(&ctx.from_f64(0.75)), Some(0));
        assert_eq!(exponent(&ctx.zero()), None);
    }
}
