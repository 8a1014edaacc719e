//! Expected costs as sums over prefixes w of a function of the binomial
//! occupancy N_w ~ Bin(n, p_w):
//! E[R] = sum P(N_w >= 2), E[C] = sum E[N_w; N_w >= 2] and
//! E[B] = sum E[K(N_w)], K(N) = 2(N+1)H_N - 4N being the mean number of key
//! comparisons of a random binary search tree on the words under w.

use super::{CostKind, ExactMeanResult, Method};
use crate::dynamical::{IntervalSystem, SystemKind};
use crate::error::{Error, Result};
use crate::numeric::{harmonic, LnFactorial};
use crate::simple::{MarkovChain, Memoryless};
use crate::source::{enumerate_dynamical, EnumOptions, SourceModel};
use num_complex::Complex64 as C64;

/// Relative size of the neglected tail at which enumeration stops.
const TAIL_TOL: f64 = 1e-16;
pub const NODE_BUDGET: usize = 50_000_000;

struct Occupancy {
    kind: CostKind,
    n: usize,
    lnf: LnFactorial,
    harm: Vec<f64>,
    /// f(p) <= bound_coef * p^2
    bound_coef: f64,
}

impl Occupancy {
    fn new(kind: CostKind, n: usize) -> Self {
        let pairs = (n * n.saturating_sub(1)) as f64 / 2.0;
        Occupancy {
            kind,
            n,
            lnf: LnFactorial::new(n),
            harm: if kind == CostKind::B { harmonic(n) } else { Vec::new() },
            bound_coef: if kind == CostKind::C { 2.0 * pairs } else { pairs },
        }
    }

    fn ln_pmf(&self, k: usize, lp: f64, lq: f64) -> f64 {
        self.lnf.ln_binomial(self.n, k) + k as f64 * lp + (self.n - k) as f64 * lq
    }

    fn key_comparisons(&self, k: usize) -> f64 {
        2.0 * (k as f64 + 1.0) * self.harm[k] - 4.0 * k as f64
    }

    fn eval(&self, p: f64) -> f64 {
        let n = self.n;
        if n < 2 || p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return match self.kind {
                CostKind::R => 1.0,
                CostKind::C => n as f64,
                CostKind::B => self.key_comparisons(n),
            };
        }
        let nf = n as f64;
        let lp = p.ln();
        let lq = (-p).ln_1p();
        match self.kind {
            CostKind::R => {
                if nf * p <= 0.5 {
                    self.sum_pmf(2, n, lp, lq, |_| 1.0)
                } else {
                    1.0 - (nf * lq).exp() - nf * p * ((nf - 1.0) * lq).exp()
                }
            }
            CostKind::C => -nf * p * ((nf - 1.0) * lq).exp_m1(),
            CostKind::B => {
                let mean = nf * p;
                let sd = (mean * (1.0 - p)).sqrt();
                let lo = ((mean - 40.0 * sd - 10.0).floor().max(2.0)) as usize;
                let hi = ((mean + 40.0 * sd + 10.0).ceil().min(nf)) as usize;
                self.sum_pmf(lo, hi, lp, lq, |k| self.key_comparisons(k))
            }
        }
    }

    fn sum_pmf(&self, lo: usize, hi: usize, lp: f64, lq: f64, g: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in lo..=hi {
            let t = self.ln_pmf(k, lp, lq).exp() * g(k);
            acc += t;
            if t < 1e-20 * acc && (k as f64) > self.n as f64 * lp.exp() {
                break;
            }
        }
        acc
    }
}

pub fn exact_mean_direct(kind: CostKind, source: &SourceModel, n: u64) -> Result<ExactMeanResult> {
    let occ = Occupancy::new(kind, n as usize);
    let (value, err) = if n < 2 {
        (0.0, 0.0)
    } else if let Some(m) = source.as_memoryless() {
        memoryless_sum(&occ, &m)?
    } else {
        match source {
            SourceModel::Markov(mc) => markov_sum(&occ, mc)?,
            SourceModel::Dynamical(sys) => dynamical_sum(&occ, sys)?,
            SourceModel::Memoryless(_) => unreachable!(),
        }
    };
    Ok(ExactMeanResult {
        kind,
        n,
        value,
        method: Method::Direct,
        certified_abs_error: err + value.abs() * 1e-13,
        precision_bits: 53,
        semi_oracle: kind == CostKind::B || matches!(source, SourceModel::Markov(_)),
    })
}

/// Groups the words of each length by their symbol counts.
fn memoryless_sum(occ: &Occupancy, m: &Memoryless) -> Result<(f64, f64)> {
    let lps: Vec<f64> = m.probs().iter().map(|p| p.ln()).collect();
    let lambda2: f64 = m.probs().iter().map(|p| p * p).sum();
    let r = lps.len();
    let mut total = occ.eval(1.0);
    let mut depth = 0usize;
    let mut visited = 0usize;
    let lnf_depth = LnFactorial::new(4096);
    loop {
        let tail = occ.bound_coef * lambda2.powi(depth as i32 + 1) / (1.0 - lambda2);
        if tail <= TAIL_TOL * total.max(1.0) {
            return Ok((total, tail));
        }
        depth += 1;
        if depth > 4000 {
            return Err(Error::TruncationBudget(format!(
                "direct sum needs depth beyond {depth}"
            )));
        }
        let mut counts = vec![0usize; r];
        let mut level = 0.0;
        compositions(&mut counts, 0, depth, &mut |c| {
            visited += 1;
            let lpw: f64 = c.iter().zip(&lps).map(|(&k, lp)| k as f64 * lp).sum();
            let lmult = lnf_depth.get(depth) - c.iter().map(|&k| lnf_depth.get(k)).sum::<f64>();
            let f = occ.eval(lpw.exp());
            if f > 0.0 {
                level += (lmult + f.ln()).exp();
            }
        });
        if visited > NODE_BUDGET {
            return Err(Error::TruncationBudget(format!(
                "direct sum enumerated {visited} symbol-count classes"
            )));
        }
        total += level;
    }
}

fn compositions(counts: &mut [usize], i: usize, left: usize, f: &mut impl FnMut(&[usize])) {
    if i + 1 == counts.len() {
        counts[i] = left;
        f(counts);
        return;
    }
    for k in 0..=left {
        counts[i] = k;
        compositions(counts, i + 1, left - k, f);
    }
}

/// Depth-first walk. Once n p_w is small the whole subtree below w is
/// summed from the expansion f(p) = sum_k (-1)^k C(n,k) q(k) p^k, using
/// sum_{u nonempty} p_{u|j}^k = 1^T (I - P(k))^{-1} P(k) e_j.
fn markov_sum(occ: &Occupancy, mc: &MarkovChain) -> Result<(f64, f64)> {
    const K_MAX: usize = 24;
    const CUT: f64 = 1e-3;
    let d = mc.states();
    let t = mc.transition();
    let n = occ.n;
    let mut below = vec![vec![0.0; K_MAX + 1]; d];
    for k in 2..=K_MAX.min(n) {
        let pk = nalgebra::DMatrix::from_fn(d, d, |i, j| t[i][j].powi(k as i32));
        let lu = (nalgebra::DMatrix::identity(d, d) - &pk).lu();
        let x = lu.solve(&pk).ok_or(Error::SingularMatrix(C64::new(k as f64, 0.0)))?;
        for (j, row) in below.iter_mut().enumerate() {
            row[k] = x.column(j).sum();
        }
    }
    let coef: Vec<f64> = (0..=K_MAX.min(n))
        .map(|k| {
            if k < 2 {
                return 0.0;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * occ.lnf.ln_binomial(n, k).exp() * super::varpi_factor(occ.kind, C64::new(k as f64, 0.0)).re
        })
        .collect();
    let mut total = occ.eval(1.0);
    let mut err = 0.0;
    let mut visited = 0usize;
    let mut stack: Vec<(usize, f64)> = (0..d).map(|i| (i, mc.initial()[i])).collect();
    while let Some((state, p)) = stack.pop() {
        visited += 1;
        if visited > NODE_BUDGET {
            return Err(Error::TruncationBudget(format!(
                "direct sum visited {visited} prefixes"
            )));
        }
        total += occ.eval(p);
        if n as f64 * p > CUT {
            for i in 0..d {
                if t[i][state] > 0.0 {
                    stack.push((i, p * t[i][state]));
                }
            }
            continue;
        }
        let mut pk = p;
        let mut sub = 0.0;
        let mut last = f64::INFINITY;
        for (k, c) in coef.iter().enumerate().skip(2) {
            pk = if k == 2 { p * p } else { pk * p };
            let term = c * pk * below[state][k];
            sub += term;
            last = term.abs();
            if last < 1e-22 * sub.abs() {
                break;
            }
        }
        total += sub;
        err += 2.0 * last;
    }
    Ok((total, err))
}

/// Bound on sup|h'| / inf|h'| over every inverse branch of the system.
fn distortion(sys: &IntervalSystem) -> f64 {
    match sys.kind() {
        SystemKind::Rary(_) => 1.0,
        SystemKind::Gauss => 4.0,
        SystemKind::Moebius => {
            let mut k: f64 = 1.0;
            for w in sys.branches_of_depth(6, 1 << 20) {
                let (a, b) = (w.deriv(0.0).abs(), w.deriv(1.0).abs());
                k = k.max(a.max(b) / a.min(b));
            }
            k
        }
    }
}

/// Relative accuracy targeted for dynamical sources, whose subtrees are
/// only bounded, not summed.
pub const DYNAMICAL_TARGET: f64 = 1e-5;

fn dynamical_sum(occ: &Occupancy, sys: &IntervalSystem) -> Result<(f64, f64)> {
    let k2 = distortion(sys).powi(2);
    let lam2 = crate::source::SourceModel::Dynamical(sys.clone())
        .lambda_series(C64::new(2.0, 0.0), 1e-12)?
        .value
        .re;
    let below = k2 * (lam2 - 1.0);
    // pruned nodes form an antichain of total mass <= 1
    let p_cut = DYNAMICAL_TARGET * occ.n as f64 / (occ.bound_coef * (1.0 + below));
    let opts = EnumOptions {
        eps: p_cut.min(1e-3),
        budget: NODE_BUDGET,
    };
    let mut total = occ.eval(1.0);
    let mut err = 0.0;
    let mut tail_err = 0.0;
    enumerate_dynamical(
        sys,
        usize::MAX,
        &opts,
        |v| {
            total += occ.eval(v.probability);
            if v.probability < p_cut {
                err += occ.bound_coef * v.probability * v.probability * below;
                false
            } else {
                true
            }
        },
        |t| tail_err += occ.bound_coef * opts.eps * t.mass * (1.0 + below),
    )?;
    Ok((total, err + tail_err))
}
