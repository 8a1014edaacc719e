//! Expected costs of tries and binary search trees: exact means by three
//! independent methods, asymptotic main terms, periodic fluctuations and a
//! Monte Carlo harness.

mod alternating;
mod asymptotic;
mod direct;
mod fluctuation;
mod rice;
mod simulate;

pub use alternating::{alternating_sum_f64, alternating_sum_hp, default_precision, AlternatingSum};
pub use asymptotic::{asymptotic_main_term, default_ladder, AsymptoticPrediction, FitPoint, Regime};
pub use direct::{exact_mean_direct, DYNAMICAL_TARGET, NODE_BUDGET};
pub use fluctuation::{periodic_fluctuation, Fluctuation, FluctuationPole};
pub use rice::{rice_integral, RiceOptions};
pub use simulate::{simulate_costs, simulate_trial_costs, MonteCarloEstimate};

use crate::error::{Error, Result};
use crate::source::SourceModel;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Trie size R, trie path length C, or BST symbol path length B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CostKind {
    R,
    C,
    B,
}

impl CostKind {
    pub const ALL: [CostKind; 3] = [CostKind::R, CostKind::C, CostKind::B];
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostKind::R => "R",
            CostKind::C => "C",
            CostKind::B => "B",
        })
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" => Ok(CostKind::R),
            "C" | "c" => Ok(CostKind::C),
            "B" | "b" => Ok(CostKind::B),
            _ => Err(Error::InvalidConfig(format!("unknown cost kind '{s}' (R, C or B)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Alternating,
    Direct,
    Rice,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Alternating, Method::Direct, Method::Rice];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Alternating => "alternating",
            Method::Direct => "direct",
            Method::Rice => "rice",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alternating" => Ok(Method::Alternating),
            "direct" => Ok(Method::Direct),
            "rice" => Ok(Method::Rice),
            _ => Err(Error::InvalidConfig(format!(
                "unknown method '{s}' (alternating, direct or rice)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactMeanResult {
    pub kind: CostKind,
    pub n: u64,
    pub value: f64,
    pub method: Method,
    pub certified_abs_error: f64,
    /// Working precision; 53 for double-precision methods.
    pub precision_bits: usize,
    /// Set when the method is not an independent oracle on its own.
    pub semi_oracle: bool,
}

impl ExactMeanResult {
    fn zero(kind: CostKind, n: u64, method: Method) -> Self {
        ExactMeanResult {
            kind,
            n,
            value: 0.0,
            method,
            certified_abs_error: 0.0,
            precision_bits: 53,
            semi_oracle: false,
        }
    }
}

/// Polynomial factor q with varpi_T(s) = q(s) Lambda(s).
pub(crate) fn varpi_factor(kind: CostKind, s: C64) -> C64 {
    match kind {
        CostKind::R => s - 1.0,
        CostKind::C => s,
        CostKind::B => 2.0 / (s * (s - 1.0)),
    }
}

/// varpi_T(s); for R at s = 1 the removable singularity is filled with 1/h.
pub fn varpi(kind: CostKind, source: &SourceModel, s: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    if s == one {
        return match kind {
            CostKind::R => Ok(C64::new(1.0 / source.entropy()?, 0.0)),
            _ => Err(Error::PoleAt(s)),
        };
    }
    if kind == CostKind::B && s == C64::new(0.0, 0.0) {
        return Err(Error::PoleAt(s));
    }
    let lam = source.lambda_series(s, 1e-13)?;
    Ok(varpi_factor(kind, s) * lam.value)
}

pub fn exact_mean(kind: CostKind, source: &SourceModel, n: u64, method: Method) -> Result<ExactMeanResult> {
    match method {
        Method::Alternating => exact_mean_alternating(kind, source, n, None),
        Method::Direct => exact_mean_direct(kind, source, n),
        Method::Rice => rice_integral(kind, source, n, &RiceOptions::default()),
    }
}

/// Budget on the relative certified error of the alternating sum when the
/// Dirichlet values are only known to double precision.
pub const ALTERNATING_RELATIVE_BUDGET: f64 = 1e-6;

pub fn exact_mean_alternating(
    kind: CostKind,
    source: &SourceModel,
    n: u64,
    precision_bits: Option<usize>,
) -> Result<ExactMeanResult> {
    if n <= 1 {
        return Ok(ExactMeanResult::zero(kind, n, Method::Alternating));
    }
    let prec = precision_bits.unwrap_or_else(|| default_precision(n));
    let sum = alternating_sum_hp(kind, source, n, prec)?;
    let value = crate::hp::to_f64(&sum.value);
    if sum.abs_error > ALTERNATING_RELATIVE_BUDGET * value.abs().max(1.0) {
        return Err(Error::TruncationBudget(format!(
            "alternating sum for n={n}: certified error {:.3e} exceeds budget",
            sum.abs_error
        )));
    }
    Ok(ExactMeanResult {
        kind,
        n,
        value,
        method: Method::Alternating,
        certified_abs_error: sum.abs_error + value.abs() * f64::EPSILON,
        precision_bits: sum.precision_bits,
        semi_oracle: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varpi_examples() {
        let u = SourceModel::builtin("uniform-binary").unwrap();
        let two = C64::new(2.0, 0.0);
        assert!((varpi(CostKind::R, &u, two).unwrap().re - 2.0).abs() < 1e-14);
        assert!((varpi(CostKind::C, &u, two).unwrap().re - 4.0).abs() < 1e-14);
        assert!((varpi(CostKind::B, &u, two).unwrap().re - 2.0).abs() < 1e-14);
        let one = C64::new(1.0, 0.0);
        let r1 = varpi(CostKind::R, &u, one).unwrap().re;
        assert!((r1 - 1.0 / 2f64.ln()).abs() < 1e-14);
        let near = varpi(CostKind::R, &u, C64::new(1.0 + 1e-6, 0.0)).unwrap().re;
        assert!((near - r1).abs() < 1e-5);
        assert!(varpi(CostKind::C, &u, one).is_err());
    }

    #[test]
    fn pole_orders_at_one() {
        // fit c2/(s-1)^2 + c1/(s-1) + c0 on a small ring around s = 1
        let src = SourceModel::memoryless(&[0.3, 0.7]).unwrap();
        for (kind, order) in [(CostKind::R, 0), (CostKind::C, 1), (CostKind::B, 2)] {
            let r = 1e-2;
            let m = 16;
            let mut coef = [C64::new(0.0, 0.0); 3];
            for j in 0..m {
                let e = C64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
                let v = varpi(kind, &src, e + 1.0).unwrap();
                // Laurent coefficients by the discrete Cauchy formula
                for (p, c) in coef.iter_mut().enumerate() {
                    *c += v * e.powi(p as i32) / m as f64;
                }
            }
            let found = (0..3).rev().find(|&p| coef[p].norm() > 1e-6).unwrap_or(0);
            assert_eq!(found, order, "{kind}");
        }
    }

    #[test]
    fn parse_kinds_and_methods() {
        assert_eq!("C".parse::<CostKind>().unwrap(), CostKind::C);
        assert!("X".parse::<CostKind>().is_err());
        assert_eq!("rice".parse::<Method>().unwrap(), Method::Rice);
    }
}
