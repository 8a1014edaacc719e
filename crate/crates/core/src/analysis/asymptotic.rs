use super::{exact_mean_alternating, exact_mean_direct, periodic_fluctuation, CostKind, FluctuationPole};
use crate::error::{Error, Result};
use crate::source::SourceModel;
use serde::Serialize;

/// Error-term regime of the expected cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// n^{1-delta}
    STame,
    /// n exp(-(log n)^alpha)
    HTame,
    /// n Phi(log n) + n^{1-delta}
    Periodic,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub n: u64,
    pub exact: f64,
    pub main_term: f64,
    /// exact - main_term
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub kind: CostKind,
    pub entropy: f64,
    /// 1/h
    pub leading_coefficient: f64,
    /// Coefficient of n in P_C.
    pub a: Option<f64>,
    /// Coefficients of n log n and n in P_B.
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub regime: Regime,
    pub fit: Vec<FitPoint>,
    /// Root mean square of residual / n over the ladder.
    pub fit_rms: f64,
    /// Pole data for uniform sources.
    pub fluctuation: Option<Vec<FluctuationPole>>,
}

impl AsymptoticPrediction {
    pub fn main_term(&self, n: f64) -> f64 {
        let l = n.ln();
        let h = self.leading_coefficient;
        match self.kind {
            CostKind::R => h * n,
            CostKind::C => h * n * l + self.a.unwrap_or(0.0) * n,
            CostKind::B => h * n * l * l + self.b.unwrap_or(0.0) * n * l + self.c.unwrap_or(0.0) * n,
        }
    }
}

/// n = 2^4 .. 2^12.
pub fn default_ladder() -> Vec<u64> {
    (4..=12).map(|k| 1u64 << k).collect()
}

fn exact_value(kind: CostKind, source: &SourceModel, n: u64) -> Result<f64> {
    if source.has_closed_form() {
        Ok(exact_mean_alternating(kind, source, n, None)?.value)
    } else {
        Ok(exact_mean_direct(kind, source, n)?.value)
    }
}

/// Least squares for the lower-order constants, with rows scaled by 1/n.
fn fit(rows: &[(Vec<f64>, f64)]) -> Vec<f64> {
    let k = rows.first().map_or(0, |r| r.0.len());
    if k == 0 {
        return Vec::new();
    }
    let mut a = nalgebra::DMatrix::<f64>::zeros(rows.len(), k);
    let mut y = nalgebra::DVector::<f64>::zeros(rows.len());
    for (i, (x, v)) in rows.iter().enumerate() {
        for j in 0..k {
            a[(i, j)] = x[j];
        }
        y[i] = *v;
    }
    let svd = a.svd(true, true);
    svd.solve(&y, 1e-14)
        .map(|v| v.iter().copied().collect())
        .unwrap_or_else(|_| vec![0.0; k])
}

pub fn asymptotic_main_term(kind: CostKind, source: &SourceModel, ladder: &[u64]) -> Result<AsymptoticPrediction> {
    let h = source.entropy()?;
    let lead = 1.0 / h;
    let exact = ladder
        .iter()
        .map(|&n| exact_value(kind, source, n).map(|v| (n, v)))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<(Vec<f64>, f64)> = exact
        .iter()
        .filter(|(n, _)| *n >= 2)
        .map(|&(n, v)| {
            let nf = n as f64;
            let l = nf.ln();
            match kind {
                CostKind::R => (vec![], 0.0),
                // the 1/n column absorbs O(1) terms and is not reported
                CostKind::C => (vec![1.0, 1.0 / nf], (v - lead * nf * l) / nf),
                CostKind::B => (vec![l, 1.0, l * l / nf, l / nf, 1.0 / nf], (v - lead * nf * l * l) / nf),
            }
        })
        .collect();
    let coef = if kind == CostKind::R { Vec::new() } else { fit(&rows) };
    let mut pred = AsymptoticPrediction {
        kind,
        entropy: h,
        leading_coefficient: lead,
        a: (kind == CostKind::C).then(|| coef[0]),
        b: (kind == CostKind::B).then(|| coef[0]),
        c: (kind == CostKind::B).then(|| coef[1]),
        regime: Regime::Unknown,
        fit: Vec::new(),
        fit_rms: 0.0,
        fluctuation: None,
    };
    pred.fit = exact
        .iter()
        .map(|&(n, v)| {
            let m = pred.main_term(n as f64);
            FitPoint {
                n,
                exact: v,
                main_term: m,
                residual: v - m,
            }
        })
        .collect();
    let sq: f64 = pred.fit.iter().map(|p| (p.residual / p.n.max(1) as f64).powi(2)).sum();
    pred.fit_rms = (sq / pred.fit.len().max(1) as f64).sqrt();
    pred.fluctuation = match periodic_fluctuation(kind, source, 2, 5) {
        Ok(f) => Some(f.poles),
        Err(Error::UnsupportedSource(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(pred)
}
