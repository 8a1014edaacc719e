use super::{varpi_factor, CostKind};
use crate::error::{Error, Result};
use crate::numeric::{ln_gamma, ln_gamma_real};
use crate::source::SourceModel;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluctuationPole {
    pub k: i64,
    /// Imaginary part of the pole 1 + 2 pi i k / ln r.
    pub t: f64,
    /// Fourier coefficient q(z) Gamma(-z) / ln r of Phi.
    pub coefficient: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fluctuation {
    pub n: u64,
    pub poles_summed: usize,
    /// Phi_K(n); the fluctuating part of T(n) is n Phi_K(n).
    pub value: f64,
    pub poles: Vec<FluctuationPole>,
}

/// Residues of the nonreal poles 1 + 2 pi i k / ln r, k = 1..K, of a
/// uniform r-ary source, paired with their conjugates.
pub fn periodic_fluctuation(kind: CostKind, source: &SourceModel, n: u64, k_max: usize) -> Result<Fluctuation> {
    let r = source
        .as_memoryless()
        .and_then(|m| m.uniform_arity())
        .ok_or_else(|| Error::UnsupportedSource("fluctuations are implemented for uniform r-ary sources".into()))?;
    let ln_r = (r as f64).ln();
    let nf = n as f64;
    let mut total = 0.0;
    let mut poles = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let t = 2.0 * PI * k as f64 / ln_r;
        let z = C64::new(1.0, t);
        let q = varpi_factor(kind, z) / ln_r;
        poles.push(FluctuationPole {
            k: k as i64,
            t,
            coefficient: q * ln_gamma(-z).exp(),
        });
        if n > 1 {
            let ratio = (ln_gamma_real(nf + 1.0) + ln_gamma(-z) - ln_gamma(nf + 1.0 - z)).exp();
            total += 2.0 * (q * ratio).re;
        }
    }
    Ok(Fluctuation {
        n,
        poles_summed: k_max,
        value: if n > 0 { total / nf } else { 0.0 },
        poles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_properties() {
        let u = SourceModel::builtin("uniform-binary").unwrap();
        assert_eq!(periodic_fluctuation(CostKind::R, &u, 100, 0).unwrap().value, 0.0);
        // period 1 in log2 n, up to O(|z|^2 / n) corrections
        let a = periodic_fluctuation(CostKind::R, &u, 100_000, 2).unwrap().value;
        let b = periodic_fluctuation(CostKind::R, &u, 200_000, 2).unwrap().value;
        assert!(a.abs() > 1e-7 && (a - b).abs() < 2e-3 * a.abs(), "{a} {b}");
        let m = SourceModel::memoryless(&[0.3, 0.7]).unwrap();
        assert!(matches!(
            periodic_fluctuation(CostKind::R, &m, 10, 3),
            Err(Error::UnsupportedSource(_))
        ));
    }
}
