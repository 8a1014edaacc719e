//! Memoryless sources and Markov chains: closed-form Dirichlet series,
//! entropy and the rationality test on log-probability ratios.

use crate::error::{Error, Result};
use crate::hp::{self, HpContext, HpFloat};
use crate::numeric::golden_min;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// Threshold on |1 - lambda(s)| below which s is reported as a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// A probability given either as a float or as an exact fraction p/q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prob {
    Float(f64),
    Ratio(u64, u64),
}

impl Prob {
    pub fn value(&self) -> f64 {
        match *self {
            Prob::Float(p) => p,
            Prob::Ratio(a, b) => a as f64 / b as f64,
        }
    }

    pub fn to_hp(&self, ctx: &HpContext) -> HpFloat {
        match *self {
            Prob::Float(p) => ctx.from_f64(p),
            Prob::Ratio(a, b) => ctx.div(&ctx.from_u64(a), &ctx.from_u64(b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Memoryless {
    probs: Vec<Prob>,
    values: Vec<f64>,
}

impl Memoryless {
    pub fn new(probs: Vec<Prob>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidConfig(
                "a memoryless source needs at least two symbols".into(),
            ));
        }
        let values: Vec<f64> = probs.iter().map(Prob::value).collect();
        if let Some(p) = values.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::InvalidConfig(format!("probability {p} outside (0,1)")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Memoryless { probs, values })
    }

    pub fn from_f64(probs: &[f64]) -> Result<Self> {
        Self::new(probs.iter().map(|&p| Prob::Float(p)).collect())
    }

    pub fn uniform(r: usize) -> Result<Self> {
        Self::new((0..r).map(|_| Prob::Ratio(1, r as u64)).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.values
    }

    pub fn exact_probs(&self) -> &[Prob] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.values.len()
    }

    /// lambda(s) = sum p_i^s.
    pub fn lambda(&self, s: C64) -> C64 {
        self.values.iter().map(|&p| (s * p.ln()).exp()).sum()
    }

    /// lambda'(s) = sum p_i^s ln p_i.
    pub fn lambda_deriv(&self, s: C64) -> C64 {
        self.values.iter().map(|&p| (s * p.ln()).exp() * p.ln()).sum()
    }

    /// Lambda(s) = 1/(1 - lambda(s)).
    pub fn big_lambda(&self, s: C64) -> Result<C64> {
        let d = C64::new(1.0, 0.0) - self.lambda(s);
        if d.norm() < POLE_THRESHOLD {
            return Err(Error::PoleAt(s));
        }
        Ok(d.inv())
    }

    pub fn entropy(&self) -> f64 {
        -self.values.iter().map(|&p| p * p.ln()).sum::<f64>()
    }

    /// Alphabet size when all probabilities are equal.
    pub fn uniform_arity(&self) -> Option<usize> {
        let p0 = self.values[0];
        self.values
            .iter()
            .all(|&p| (p - p0).abs() <= 1e-15)
            .then_some(self.values.len())
    }

    /// Lambda(k) for an integer k >= 2 in the working precision of `ctx`.
    pub fn big_lambda_hp(&self, ctx: &HpContext, k: usize) -> HpFloat {
        let mut lam = ctx.zero();
        for p in &self.probs {
            lam = ctx.add(&lam, &ctx.powi(&p.to_hp(ctx), k));
        }
        ctx.recip(&ctx.sub(&ctx.one(), &lam))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    initial: Vec<f64>,
    /// `transition[i][j]` is the probability of symbol i after symbol j.
    transition: Vec<Vec<f64>>,
}

impl MarkovChain {
    pub fn new(initial: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let d = initial.len();
        if d == 0 {
            return Err(Error::InvalidConfig("empty Markov chain".into()));
        }
        if transition.len() != d || transition.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidConfig(format!("transition matrix must be {d} x {d}")));
        }
        let all = initial.iter().chain(transition.iter().flatten());
        if all.clone().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidConfig("probability outside [0,1]".into()));
        }
        let s: f64 = initial.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("initial vector sums to {s}")));
        }
        for j in 0..d {
            let c: f64 = (0..d).map(|i| transition[i][j]).sum();
            if (c - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!("column {j} sums to {c}")));
            }
        }
        Ok(MarkovChain { initial, transition })
    }

    pub fn states(&self) -> usize {
        self.initial.len()
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    fn pow(p: f64, s: C64) -> C64 {
        if p == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            (s * p.ln()).exp()
        }
    }

    /// P(s) with entries p_{i|j}^s.
    pub fn p_matrix(&self, s: C64) -> DMatrix<C64> {
        let d = self.states();
        DMatrix::from_fn(d, d, |i, j| Self::pow(self.transition[i][j], s))
    }

    pub fn r_vector(&self, s: C64) -> DVector<C64> {
        DVector::from_iterator(self.states(), self.initial.iter().map(|&r| Self::pow(r, s)))
    }

    /// Lambda(s) = 1 + 1^T (I - P(s))^{-1} R(s).
    pub fn big_lambda(&self, s: C64) -> Result<C64> {
        let d = self.states();
        let m = DMatrix::<C64>::identity(d, d) - self.p_matrix(s);
        let lu = m.lu();
        let x = lu.solve(&self.r_vector(s)).ok_or(Error::SingularMatrix(s))?;
        let v = C64::new(1.0, 0.0) + x.sum();
        if !v.re.is_finite() || !v.im.is_finite() || v.norm() > 1.0 / POLE_THRESHOLD {
            return Err(Error::SingularMatrix(s));
        }
        Ok(v)
    }

    /// Lambda_(k)(s) = 1^T P(s)^{k-1} R(s).
    pub fn lambda_k(&self, k: usize, s: C64) -> C64 {
        if k == 0 {
            return C64::new(1.0, 0.0);
        }
        let p = self.p_matrix(s);
        let mut v = self.r_vector(s);
        for _ in 1..k {
            v = &p * v;
        }
        v.sum()
    }

    pub fn is_irreducible(&self) -> bool {
        let d = self.states();
        (0..d).all(|start| {
            let mut seen = vec![false; d];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(j) = stack.pop() {
                for i in 0..d {
                    if self.transition[i][j] > 0.0 && !seen[i] {
                        seen[i] = true;
                        stack.push(i);
                    }
                }
            }
            seen.iter().all(|&b| b)
        })
    }

    /// Aperiodicity of an irreducible chain: some power of the support
    /// pattern is strictly positive (Wielandt bound (d-1)^2 + 1).
    pub fn is_aperiodic(&self) -> bool {
        let d = self.states();
        let a = DMatrix::from_fn(d, d, |i, j| if self.transition[i][j] > 0.0 { 1.0 } else { 0.0 });
        let mut m = a.clone();
        for _ in 0..((d - 1) * (d - 1) + 1) {
            if m.iter().all(|&x| x > 0.0) {
                return true;
            }
            m = (&m * &a).map(|x: f64| if x > 0.0 { 1.0 } else { 0.0 });
        }
        m.iter().all(|&x| x > 0.0)
    }

    /// Stationary vector pi with P pi = pi.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let d = self.states();
        let p = DMatrix::from_fn(d, d, |i, j| self.transition[i][j]);
        let mut m = DMatrix::<f64>::identity(d, d) - p;
        for j in 0..d {
            m[(d - 1, j)] = 1.0;
        }
        let mut rhs = DVector::zeros(d);
        rhs[d - 1] = 1.0;
        m.lu()
            .solve(&rhs)
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| Error::InvalidConfig("chain has no unique stationary law".into()))
    }

    /// h = -sum_j pi_j sum_i p_{i|j} ln p_{i|j}.
    pub fn entropy(&self) -> Result<f64> {
        if !self.is_irreducible() {
            return Err(Error::InvalidConfig("entropy needs an irreducible chain".into()));
        }
        let pi = self.stationary()?;
        let d = self.states();
        let mut h = 0.0;
        for j in 0..d {
            for i in 0..d {
                let p = self.transition[i][j];
                if p > 0.0 {
                    h -= pi[j] * p * p.ln();
                }
            }
        }
        Ok(h)
    }

    /// Lambda(k) for an integer k >= 2 in the working precision of `ctx`,
    /// by Gaussian elimination on I - P(k).
    pub fn big_lambda_hp(&self, ctx: &HpContext, k: usize) -> Result<HpFloat> {
        let d = self.states();
        let pw = |p: f64| ctx.powi(&ctx.from_f64(p), k);
        let mut a: Vec<Vec<HpFloat>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let e = pw(self.transition[i][j]);
                        if i == j {
                            ctx.sub(&ctx.one(), &e)
                        } else {
                            ctx.sub(&ctx.zero(), &e)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut b: Vec<HpFloat> = self.initial.iter().map(|&r| pw(r)).collect();
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&x, &y| hp::to_f64(&a[x][col]).abs().total_cmp(&hp::to_f64(&a[y][col]).abs()))
                .unwrap();
            if hp::to_f64(&a[piv][col]).abs() < 1e-300 {
                return Err(Error::SingularMatrix(C64::new(k as f64, 0.0)));
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..d {
                let f = ctx.div(&a[row][col], &a[col][col]);
                for c in col..d {
                    let t = ctx.mul(&f, &a[col][c]);
                    a[row][c] = ctx.sub(&a[row][c], &t);
                }
                let t = ctx.mul(&f, &b[col]);
                b[row] = ctx.sub(&b[row], &t);
            }
        }
        let mut x = vec![ctx.zero(); d];
        for row in (0..d).rev() {
            let mut acc = b[row].clone();
            for c in row + 1..d {
                acc = ctx.sub(&acc, &ctx.mul(&a[row][c], &x[c]));
            }
            x[row] = ctx.div(&acc, &a[row][row]);
        }
        let mut total = ctx.one();
        for v in &x {
            total = ctx.add(&total, v);
        }
        Ok(total)
    }
}

/// Continued-fraction data for one real number.
#[derive(Debug, Clone, Serialize)]
pub struct IrrationalityProfile {
    pub value: f64,
    pub partial_quotients: Vec<String>,
    pub convergents: Vec<(String, String)>,
    /// Convergent reproducing the value to working precision, if any.
    pub rational: Option<(String, String)>,
    /// Least-squares slope of -log|x - p/q| against log q, minus 2. Only an
    /// estimate: the exponent is a limsup and cannot be read off finitely
    /// many convergents.
    pub exponent_estimate: Option<f64>,
    pub largest_partial_quotient: String,
    pub precision_bits: usize,
}

enum CfStop {
    Depth,
    Rational,
    LargeQuotient,
    Precision,
}

fn word_base(ctx: &HpContext) -> HpFloat {
    let h = ctx.from_u64(1 << 32);
    ctx.mul(&h, &h)
}

fn big_to_hp(ctx: &HpContext, v: &BigInt) -> HpFloat {
    let (sign, digits) = v.to_u64_digits();
    let base = word_base(ctx);
    let mut acc = ctx.zero();
    for d in digits.iter().rev() {
        acc = ctx.add(&ctx.mul(&acc, &base), &ctx.from_u64(*d));
    }
    if sign == num_bigint::Sign::Minus {
        acc = ctx.sub(&ctx.zero(), &acc);
    }
    acc
}

/// floor(x) for x >= 0 as an exact integer.
fn hp_floor_to_big(ctx: &HpContext, x: &HpFloat) -> BigInt {
    let mut rest = hp::floor(x);
    let v = hp::to_f64(&rest);
    if v.abs() < 9.0e15 {
        return BigInt::from(v as i64);
    }
    let base = word_base(ctx);
    let mut digits = Vec::new();
    while !rest.is_zero() {
        let q = hp::floor(&ctx.div(&rest, &base));
        let r = ctx.sub(&rest, &ctx.mul(&q, &base));
        digits.push(hp::to_f64(&r) as u64);
        rest = q;
    }
    let mut out = BigInt::zero();
    for d in digits.iter().rev() {
        out = (out << 64) + BigInt::from(*d);
    }
    out
}

fn exponent_slope(errors: &[(f64, f64)]) -> Option<f64> {
    if errors.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = errors.iter().map(|&(_, q)| q.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|&(e, _)| -e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx - 2.0)
}

fn run_cf(ctx: &mut HpContext, x: &HpFloat, depth: usize, large: Option<f64>) -> (IrrationalityProfile, CfStop) {
    let prec = ctx.prec();
    let tol_exp = -(prec as i64 - 16);
    let scale = hp::exponent(x).unwrap_or(0).max(0);
    let mut quotients: Vec<BigInt> = Vec::new();
    let mut convergents: Vec<(BigInt, BigInt)> = Vec::new();
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p_prev2, mut q_prev2) = (BigInt::zero(), BigInt::one());
    let mut y = x.clone();
    let mut rational = None;
    let mut errors: Vec<(f64, f64)> = Vec::new();
    let mut stop = CfStop::Depth;
    for _ in 0..depth {
        let a = hp_floor_to_big(ctx, &y);
        if let Some(limit) = large {
            if a.to_f64().unwrap_or(f64::INFINITY) > limit {
                stop = CfStop::LargeQuotient;
                quotients.push(a);
                break;
            }
        }
        let p = &a * &p_prev + &p_prev2;
        let q = &a * &q_prev + &q_prev2;
        let diff = ctx.sub(x, &ctx.div(&big_to_hp(ctx, &p), &big_to_hp(ctx, &q)));
        let e = hp::exponent(&diff);
        quotients.push(a.clone());
        convergents.push((p.clone(), q.clone()));
        match e {
            None => {
                rational = Some((p.clone(), q.clone()));
                stop = CfStop::Rational;
                break;
            }
            Some(e) if e <= tol_exp + scale => {
                rational = Some((p.clone(), q.clone()));
                stop = CfStop::Rational;
                break;
            }
            Some(_) => {
                let qf = q.to_f64().unwrap_or(f64::INFINITY);
                if qf > 1.0 {
                    let err = hp::to_f64(&hp::abs(&diff));
                    errors.push((err, qf));
                }
                // Convergent error ~ 1/q^2 must stay above the precision floor.
                let bits_q = q.bits() as i64;
                if 2 * bits_q >= prec as i64 - 16 - scale {
                    stop = CfStop::Precision;
                    break;
                }
            }
        }
        let frac = ctx.sub(&y, &big_to_hp(ctx, &a));
        if frac.is_zero() {
            break;
        }
        y = ctx.recip(&frac);
        p_prev2 = std::mem::replace(&mut p_prev, p);
        q_prev2 = std::mem::replace(&mut q_prev, q);
    }
    let exponent_estimate = exponent_slope(&errors);
    let largest = quotients.iter().skip(1).max().cloned().unwrap_or_else(BigInt::zero);
    (
        IrrationalityProfile {
            value: hp::to_f64(x),
            partial_quotients: quotients.iter().map(|q| q.to_string()).collect(),
            convergents: convergents
                .iter()
                .map(|(p, q)| (p.to_string(), q.to_string()))
                .collect(),
            rational: rational.map(|(p, q)| (p.to_string(), q.to_string())),
            exponent_estimate,
            largest_partial_quotient: largest.to_string(),
            precision_bits: prec,
        },
        stop,
    )
}

/// Continued fraction expansion of `x` with convergents and an
/// irrationality-exponent estimate.
pub fn irrationality_profile(ctx: &mut HpContext, x: &HpFloat, depth: usize) -> Result<IrrationalityProfile> {
    if depth < 2 {
        return Err(Error::InvalidConfig("depth must be at least 2".into()));
    }
    let (profile, stop) = run_cf(ctx, x, depth, None);
    match stop {
        CfStop::Precision if profile.convergents.len() < depth => Err(Error::PrecisionExhausted(format!(
            "{} partial quotients consume {} bits",
            profile.convergents.len(),
            ctx.prec()
        ))),
        _ => Ok(profile),
    }
}

pub fn irrationality_profile_f64(x: f64, depth: usize) -> Result<IrrationalityProfile> {
    let mut ctx = HpContext::new(512);
    let v = ctx.from_f64(x);
    irrationality_profile(&mut ctx, &v, depth)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioEntry {
    pub index: usize,
    pub profile: IrrationalityProfile,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum PeriodicityVerdict {
    Periodic { common_denominator: String },
    AperiodicCandidate { witness_index: usize, witness_ratio: f64 },
}

/// Ratios alpha_{k,j} = log p_j / log p_k against the most probable symbol k.
#[derive(Debug, Clone, Serialize)]
pub struct RatioProfile {
    pub base_index: usize,
    pub ratios: Vec<RatioEntry>,
    pub verdict: PeriodicityVerdict,
}

pub const DEFAULT_CF_DEPTH: usize = 50;
pub const RATIO_PRECISION: usize = 512;
const LARGE_QUOTIENT: f64 = 1e9;

pub fn classify_periodicity(params: &Memoryless, cf_depth: usize) -> Result<RatioProfile> {
    if cf_depth == 0 {
        return Err(Error::InvalidConfig("cf_depth must be positive".into()));
    }
    let mut ctx = HpContext::new(RATIO_PRECISION);
    let probs = params.exact_probs();
    let vals = params.probs();
    let base = (0..vals.len())
        .max_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(b.cmp(&a)))
        .unwrap();
    let base_hp = probs[base].to_hp(&ctx);
    let lb = ctx.ln(&base_hp);
    let mut ratios = Vec::new();
    let mut denominators: Vec<BigInt> = Vec::new();
    let mut witness = None;
    for (j, p) in probs.iter().enumerate() {
        let pj = p.to_hp(&ctx);
        let lj = ctx.ln(&pj);
        let alpha = ctx.div(&lj, &lb);
        let (profile, stop) = run_cf(&mut ctx, &alpha, cf_depth, Some(LARGE_QUOTIENT));
        match stop {
            CfStop::Rational => {
                let q: BigInt = profile.rational.as_ref().unwrap().1.parse().unwrap();
                denominators.push(q);
            }
            CfStop::LargeQuotient => {
                return Err(Error::Inconclusive(format!(
                    "ratio {} has a partial quotient above {LARGE_QUOTIENT:e} without an exact match",
                    profile.value
                )))
            }
            CfStop::Depth | CfStop::Precision => {
                if witness.is_none() {
                    witness = Some((j, profile.value));
                }
            }
        }
        ratios.push(RatioEntry { index: j, profile });
    }
    let verdict = match witness {
        Some((witness_index, witness_ratio)) => PeriodicityVerdict::AperiodicCandidate {
            witness_index,
            witness_ratio,
        },
        None => {
            let mut l = BigInt::one();
            for q in &denominators {
                l = num_integer::Integer::lcm(&l, q);
            }
            PeriodicityVerdict::Periodic {
                common_denominator: l.to_string(),
            }
        }
    };
    Ok(RatioProfile {
        base_index: base,
        ratios,
        verdict,
    })
}

/// Result of scanning |1 - lambda(1 + it)| on t in (0, t_max].
#[derive(Debug, Clone, Serialize)]
pub struct PoleSearch {
    pub t_max: f64,
    pub poles: Vec<f64>,
    pub min_modulus: f64,
    pub argmin: f64,
}

pub const POLE_SEARCH_TOL: f64 = 1e-9;

pub fn pole_search(params: &Memoryless, t_max: f64) -> PoleSearch {
    let f = |t: f64| (C64::new(1.0, 0.0) - params.lambda(C64::new(1.0, t))).norm();
    let step = 0.01;
    let m = (t_max / step).ceil() as usize;
    let vals: Vec<f64> = (0..=m).map(|i| f(i as f64 * step)).collect();
    let mut poles = Vec::new();
    let (mut min_modulus, mut argmin) = (f64::INFINITY, 0.0);
    for i in 1..m {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
            let t0 = i as f64 * step;
            let (t, v) = golden_min(t0 - step, t0 + step, 1e-13, f);
            if v < min_modulus {
                min_modulus = v;
                argmin = t;
            }
            if v < POLE_SEARCH_TOL && t > 1e-6 {
                poles.push(t);
            }
        }
    }
    PoleSearch {
        t_max,
        poles,
        min_modulus,
        argmin,
    }
}
