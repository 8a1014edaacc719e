//! Complete dynamical systems of the interval with Möbius inverse branches:
//! fundamental intervals, certified word emission, Good-class report, UNI
//! distances and DIOP quantities.

use crate::error::{Error, Result};
use crate::hp::{self, HpContext, HpFloat};
use crate::simple::{irrationality_profile, IrrationalityProfile, Memoryless, Prob};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub type Symbol = usize;

/// h(x) = (a x + b) / (c x + d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mobius { a, b, c, d }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) / (self.c * x + self.d)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let q = self.c * x + self.d;
        self.det() / (q * q)
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        let q = self.c * x + self.d;
        -2.0 * self.c * self.det() / (q * q * q)
    }

    /// self ∘ other.
    pub fn compose(&self, o: &Mobius) -> Mobius {
        let m = Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        };
        m.normalized()
    }

    /// Rescale once the coefficients drift far from unit size; small
    /// integer coefficients are kept exact.
    fn normalized(&self) -> Mobius {
        let m = self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs());
        if m > 0.0 && !(1e-100..=1e100).contains(&m) {
            return Mobius {
                a: self.a / m,
                b: self.b / m,
                c: self.c / m,
                d: self.d / m,
            };
        }
        *self
    }

    pub fn is_affine(&self) -> bool {
        self.c == 0.0
    }

    /// Unique fixed point in [0,1]: bisection to 1e-4, then Newton.
    pub fn fixed_point(&self) -> Result<f64> {
        let g = |x: f64| self.eval(x) - x;
        let (mut lo, mut hi) = (0.0, 1.0);
        let (glo, ghi) = (g(lo), g(hi));
        if glo == 0.0 {
            return Ok(0.0);
        }
        if ghi == 0.0 {
            return Ok(1.0);
        }
        if glo.signum() == ghi.signum() {
            return Err(Error::NoFixedPoint);
        }
        while hi - lo > 1e-4 {
            let mid = 0.5 * (lo + hi);
            if g(mid).signum() == glo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..50 {
            let step = g(x) / (self.deriv(x) - 1.0);
            x -= step;
            if step.abs() < 1e-17 {
                break;
            }
        }
        Ok(x)
    }

    /// Fixed point in the precision of `ctx`, from c x^2 + (d - a) x - b = 0.
    pub fn fixed_point_hp(&self, ctx: &HpContext) -> Result<HpFloat> {
        let x0 = self.fixed_point()?;
        let (a, b, c, d) = (
            ctx.from_f64(self.a),
            ctx.from_f64(self.b),
            ctx.from_f64(self.c),
            ctx.from_f64(self.d),
        );
        let dm = ctx.sub(&d, &a);
        if self.c == 0.0 {
            return Ok(ctx.div(&b, &dm));
        }
        let disc = ctx.add(&ctx.mul(&dm, &dm), &ctx.mul(&ctx.from_u64(4), &ctx.mul(&c, &b)));
        let sq = ctx.sqrt(&disc);
        let two_c = ctx.mul(&ctx.from_u64(2), &c);
        let neg_dm = ctx.sub(&ctx.zero(), &dm);
        let r1 = ctx.div(&ctx.add(&neg_dm, &sq), &two_c);
        let r2 = ctx.div(&ctx.sub(&neg_dm, &sq), &two_c);
        let pick = if (hp::to_f64(&r1) - x0).abs() <= (hp::to_f64(&r2) - x0).abs() {
            r1
        } else {
            r2
        };
        Ok(pick)
    }

    fn to_rational(self) -> RatMobius {
        let r = |v: f64| BigRational::from_float(v).expect("finite coefficient");
        RatMobius {
            a: r(self.a),
            b: r(self.b),
            c: r(self.c),
            d: r(self.d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct RatMobius {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    d: BigRational,
}

impl RatMobius {
    fn identity() -> Self {
        RatMobius {
            a: BigRational::one(),
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: BigRational::one(),
        }
    }

    fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let den = &self.c * x + &self.d;
        if den.is_zero() {
            return None;
        }
        Some((&self.a * x + &self.b) / den)
    }

    /// Matrix of the inverse map.
    fn inverse(&self) -> Self {
        RatMobius {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    fn compose(&self, o: &Self) -> Self {
        RatMobius {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }
}

/// One inverse branch h_[w] together with its coding word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseBranch {
    pub map: Mobius,
    pub word: Vec<Symbol>,
}

impl InverseBranch {
    pub fn depth(&self) -> usize {
        self.word.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.map.eval(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.map.deriv(x)
    }

    pub fn compose(&self, o: &InverseBranch) -> InverseBranch {
        let mut word = self.word.clone();
        word.extend_from_slice(&o.word);
        InverseBranch {
            map: self.map.compose(&o.map),
            word,
        }
    }

    /// |h([0,1])|.
    pub fn measure(&self) -> f64 {
        (self.map.eval(1.0) - self.map.eval(0.0)).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Rary(usize),
    Gauss,
    Moebius,
}

pub const DEFAULT_GAUSS_TRUNCATION: usize = 10_000;

/// A complete interval system with Möbius inverse branches and uniform
/// initial distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSystem {
    kind: SystemKind,
    branches: Vec<Mobius>,
    truncation: usize,
    cells: Vec<(f64, f64, Symbol)>,
}

impl IntervalSystem {
    pub fn rary(r: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidConfig("r-ary shift needs r >= 2".into()));
        }
        let branches = (0..r).map(|j| Mobius::new(1.0, j as f64, 0.0, r as f64)).collect();
        Self::build(SystemKind::Rary(r), branches)
    }

    pub fn binary_shift() -> Self {
        Self::rary(2).unwrap()
    }

    pub fn gauss() -> Self {
        IntervalSystem {
            kind: SystemKind::Gauss,
            branches: Vec::new(),
            truncation: DEFAULT_GAUSS_TRUNCATION,
            cells: Vec::new(),
        }
    }

    pub fn with_truncation(mut self, m: usize) -> Self {
        self.truncation = m.max(1);
        self
    }

    pub fn moebius(branches: Vec<Mobius>) -> Result<Self> {
        Self::build(SystemKind::Moebius, branches)
    }

    fn build(kind: SystemKind, branches: Vec<Mobius>) -> Result<Self> {
        if branches.len() < 2 {
            return Err(Error::InvalidConfig("need at least two branches".into()));
        }
        let mut cells = Vec::new();
        for (i, h) in branches.iter().enumerate() {
            let q0 = h.c * 0.0 + h.d;
            let q1 = h.c + h.d;
            if q0 == 0.0 || q1 == 0.0 || q0.signum() != q1.signum() {
                return Err(Error::InvalidConfig(format!("branch {i} has a pole in [0,1]")));
            }
            if h.det() == 0.0 {
                return Err(Error::InvalidConfig(format!("branch {i} is constant")));
            }
            let (y0, y1) = (h.eval(0.0), h.eval(1.0));
            let (lo, hi) = (y0.min(y1), y0.max(y1));
            if lo < -1e-12 || hi > 1.0 + 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "branch {i} does not map [0,1] into [0,1]"
                )));
            }
            cells.push((lo, hi, i));
        }
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut edge = 0.0;
        for &(lo, hi, i) in &cells {
            if (lo - edge).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "branch images do not tile [0,1] near branch {i}"
                )));
            }
            edge = hi;
        }
        if (edge - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("branch images do not cover [0,1]".into()));
        }
        Ok(IntervalSystem {
            kind,
            branches,
            truncation: 0,
            cells,
        })
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    /// Symbols of the depth-one branches (Gauss digits start at 1).
    pub fn alphabet(&self) -> Vec<Symbol> {
        match self.kind {
            SystemKind::Gauss => (1..=self.truncation).collect(),
            _ => (0..self.branches.len()).collect(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.kind, SystemKind::Gauss)
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn branch_map(&self, m: Symbol) -> Mobius {
        match self.kind {
            SystemKind::Gauss => Mobius::new(0.0, 1.0, 1.0, m as f64),
            _ => self.branches[m],
        }
    }

    pub fn branch(&self, m: Symbol) -> InverseBranch {
        InverseBranch {
            map: self.branch_map(m),
            word: vec![m],
        }
    }

    pub fn branches(&self) -> &[Mobius] {
        &self.branches
    }

    /// True when every branch is affine.
    pub fn is_affine(&self) -> bool {
        !self.is_infinite() && self.branches.iter().all(Mobius::is_affine)
    }

    /// Equivalent memoryless source of an affine system: p_m = |h_m'|.
    pub fn as_memoryless(&self) -> Option<Memoryless> {
        if !self.is_affine() {
            return None;
        }
        let probs = match self.kind {
            SystemKind::Rary(r) => (0..r).map(|_| Prob::Ratio(1, r as u64)).collect(),
            _ => self.branches.iter().map(|h| Prob::Float(h.deriv(0.0).abs())).collect(),
        };
        Memoryless::new(probs).ok()
    }

    /// Probability mass of the digits beyond the truncation, for uniform G.
    pub fn tail_mass(&self, m: usize) -> f64 {
        match self.kind {
            SystemKind::Gauss => 1.0 / (m as f64 + 1.0),
            _ => 0.0,
        }
    }

    pub fn compose_word(&self, w: &[Symbol]) -> Mobius {
        w.iter()
            .fold(Mobius::IDENTITY, |acc, &m| acc.compose(&self.branch_map(m)))
    }

    pub fn fundamental_interval(&self, w: &[Symbol]) -> Result<FundamentalInterval> {
        for &m in w {
            let ok = match self.kind {
                SystemKind::Gauss => m >= 1,
                _ => m < self.branches.len(),
            };
            if !ok {
                return Err(Error::InvalidConfig(format!("symbol {m} not in the alphabet")));
            }
        }
        let h = self.compose_word(w);
        let (y0, y1) = (h.eval(0.0), h.eval(1.0));
        Ok(FundamentalInterval {
            word: w.to_vec(),
            lo: y0.min(y1),
            hi: y0.max(y1),
            probability: (y1 - y0).abs(),
        })
    }

    /// Depth-one cell containing `y`, with its closed endpoints.
    fn cell_of(&self, y: &BigRational) -> Option<(Symbol, BigRational, BigRational)> {
        if y.is_negative() || *y > BigRational::one() {
            return None;
        }
        match self.kind {
            SystemKind::Gauss => {
                if y.is_zero() {
                    return None;
                }
                let m = (y.recip()).floor().to_integer();
                let m = m.to_usize().filter(|&m| m < usize::MAX / 4)?;
                let hi = BigRational::new(BigInt::one(), BigInt::from(m));
                let lo = BigRational::new(BigInt::one(), BigInt::from(m + 1));
                Some((m, lo, hi))
            }
            SystemKind::Rary(r) => {
                let j = (y * BigInt::from(r)).floor().to_integer().to_usize()?.min(r - 1);
                let lo = BigRational::new(BigInt::from(j), BigInt::from(r));
                let hi = BigRational::new(BigInt::from(j + 1), BigInt::from(r));
                Some((j, lo, hi))
            }
            SystemKind::Moebius => {
                let yf = y.to_f64()?;
                let idx = self.cells.iter().position(|&(lo, hi, _)| yf >= lo && yf <= hi)?;
                let (_, _, m) = self.cells[idx];
                let h = self.branches[m].to_rational();
                let e0 = h.eval(&BigRational::zero())?;
                let e1 = h.eval(&BigRational::one())?;
                let (lo, hi) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
                Some((m, lo, hi))
            }
        }
    }

    fn inverse_rational(&self, m: Symbol) -> RatMobius {
        self.branch_map(m).to_rational().inverse()
    }

    /// Certified coding of the orbit of every point of [lo, hi]; fails with
    /// `PrecisionExhausted` when the interval straddles a partition endpoint.
    pub fn emit_word_interval(&self, lo: &BigRational, hi: &BigRational, len: usize) -> Result<Vec<Symbol>> {
        let mut out = Vec::with_capacity(len);
        let (mut lo, mut hi) = (lo.clone(), hi.clone());
        for step in 0..len {
            let (m, inv) = self.certify(&lo, &hi).ok_or_else(|| {
                Error::PrecisionExhausted(format!("orbit reaches a partition endpoint at step {step}"))
            })?;
            out.push(m);
            let a = inv.eval(&lo).unwrap();
            let b = inv.eval(&hi).unwrap();
            (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        }
        Ok(out)
    }

    /// Word of the single point x.
    pub fn emit_word(&self, x: &BigRational, len: usize) -> Result<Vec<Symbol>> {
        self.emit_word_interval(x, x, len)
    }

    fn certify(&self, lo: &BigRational, hi: &BigRational) -> Option<(Symbol, RatMobius)> {
        let mid = (lo + hi) / BigInt::from(2);
        let (m, clo, chi) = self.cell_of(&mid)?;
        let point = lo == hi;
        let inside = if point {
            *lo > clo && *lo < chi
        } else {
            *lo >= clo && *hi <= chi
        };
        inside.then(|| (m, self.inverse_rational(m)))
    }

    /// Report on conditions G1-G3, computed on a probe grid. Numeric
    /// evidence only.
    pub fn check_good_class(&self, probe_points: usize) -> Result<GoodClassReport> {
        if probe_points < 2 {
            return Err(Error::InvalidConfig("probe_points must be at least 2".into()));
        }
        let grid: Vec<f64> = (0..probe_points)
            .map(|i| i as f64 / (probe_points - 1) as f64)
            .collect();
        let probe_alphabet: Vec<Symbol> = match self.kind {
            SystemKind::Gauss => (1..=self.truncation.min(200)).collect(),
            _ => self.alphabet(),
        };
        let sup_deriv = |h: &Mobius| grid.iter().map(|&x| h.deriv(x).abs()).fold(0.0, f64::max);
        let rho1 = probe_alphabet
            .iter()
            .map(|&m| sup_deriv(&self.branch_map(m)))
            .fold(0.0, f64::max);
        let depth2_alphabet: Vec<Symbol> = probe_alphabet.iter().copied().take(50).collect();
        let mut rho2 = 0.0f64;
        for &m1 in &depth2_alphabet {
            for &m2 in &depth2_alphabet {
                rho2 = rho2.max(sup_deriv(&self.compose_word(&[m1, m2])));
            }
        }
        let per_depth = vec![rho1, rho2];
        let rho_hat = if rho1 < 1.0 { rho1 } else { rho2.sqrt() };
        let a_hat = probe_alphabet
            .iter()
            .flat_map(|&m| {
                let h = self.branch_map(m);
                grid.iter().map(move |&x| (h.second_deriv(x) / h.deriv(x)).abs())
            })
            .fold(0.0, f64::max);
        let sigma0_hat = match self.kind {
            SystemKind::Gauss => {
                // beta_m = sup |h_m'| decays like m^(-2); abscissa = 1/decay.
                let (m1, m2) = (1000.0, 2000.0);
                let b1 = sup_deriv(&self.branch_map(1000));
                let b2 = sup_deriv(&self.branch_map(2000));
                let slope = (b2.ln() - b1.ln()) / (f64::ln(m2) - f64::ln(m1));
                Some(1.0 / slope.abs())
            }
            _ => None,
        };
        Ok(GoodClassReport {
            rho_per_depth: per_depth,
            rho_hat,
            a_hat,
            sigma0_hat,
            g1: rho_hat < 1.0,
            g2: a_hat.is_finite(),
            g3: sigma0_hat.is_none_or(|s| s < 1.0),
            probe_points,
            note: "numeric report on a probe grid, not a proof".into(),
        })
    }

    /// All branches of depth n over the first `width` symbols, ordered
    /// lexicographically by word.
    pub fn branches_of_depth(&self, n: usize, width: usize) -> Vec<InverseBranch> {
        let base: Vec<Symbol> = self.alphabet().into_iter().take(width).collect();
        let mut level = vec![InverseBranch {
            map: Mobius::IDENTITY,
            word: Vec::new(),
        }];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * base.len());
            for b in &level {
                for &m in &base {
                    next.push(b.compose(&self.branch(m)));
                }
            }
            level = next;
        }
        level
    }

    /// Estimate of Pr_n[Delta <= rho^(a n)] with pairs weighted by
    /// |h(I)| |k(I)|.
    pub fn uni_probability_estimate(&self, n: usize, a: f64, seed: u64) -> Result<UniReport> {
        if n == 0 {
            return Err(Error::InvalidConfig("depth must be positive".into()));
        }
        let rho = self.check_good_class(64)?.rho_hat;
        let threshold = rho.powf(a * n as f64);
        if self.is_infinite() {
            return self.uni_sampled(n, a, rho, threshold, seed);
        }
        let width = self.branches.len();
        let branches = self.branches_of_depth(n, width);
        let weights: Vec<f64> = branches.iter().map(InverseBranch::measure).collect();
        let mass: f64 = weights.iter().sum();
        let pairs = branches.len() * branches.len();
        let (hit, method, samples) = if pairs <= UNI_PAIR_BUDGET {
            let mut hit = 0.0;
            for (i, h) in branches.iter().enumerate() {
                for (j, k) in branches.iter().enumerate() {
                    if uni_distance_exact(&h.map, &k.map) <= threshold {
                        hit += weights[i] * weights[j];
                    }
                }
            }
            (hit / (mass * mass), "exact", pairs)
        } else {
            let mut cum = Vec::with_capacity(weights.len());
            let mut acc = 0.0;
            for w in &weights {
                acc += w;
                cum.push(acc);
            }
            let pick = |u: f64| cum.partition_point(|&c| c < u * acc).min(cum.len() - 1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0usize;
            for _ in 0..UNI_SAMPLES {
                let i = pick(rng.gen::<f64>());
                let j = pick(rng.gen::<f64>());
                if uni_distance_exact(&branches[i].map, &branches[j].map) <= threshold {
                    hits += 1;
                }
            }
            (hits as f64 / UNI_SAMPLES as f64, "monte-carlo", UNI_SAMPLES)
        };
        Ok(UniReport {
            depth: n,
            a,
            rho,
            threshold,
            probability: hit,
            method: method.into(),
            pairs_examined: samples,
            unaccounted_mass: (1.0 - mass * mass).max(0.0),
            note: "finitely many (n, a) pairs; (U2) assumed for Möbius branches".into(),
        })
    }

    /// Pairs of depth-n cylinders drawn with probability |h(I)| by coding
    /// uniform random points, so no mass is lost to truncation.
    fn uni_sampled(&self, n: usize, a: f64, rho: f64, threshold: f64, seed: u64) -> Result<UniReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // continued-fraction digits of a uniform point
        let draw = |rng: &mut ChaCha8Rng| -> Result<Mobius> {
            for _ in 0..64 {
                let mut x: f64 = rng.gen();
                let mut word = Vec::with_capacity(n);
                while word.len() < n && x > 1e-12 {
                    let m = (1.0 / x).floor();
                    if m > 1e9 {
                        break;
                    }
                    word.push(m as usize);
                    x = 1.0 / x - m;
                }
                if word.len() == n {
                    return Ok(self.compose_word(&word));
                }
            }
            Err(Error::PrecisionExhausted("no codable sample point".into()))
        };
        let mut hits = 0usize;
        for _ in 0..UNI_GAUSS_SAMPLES {
            let h = draw(&mut rng)?;
            let k = draw(&mut rng)?;
            if uni_distance_exact(&h, &k) <= threshold {
                hits += 1;
            }
        }
        Ok(UniReport {
            depth: n,
            a,
            rho,
            threshold,
            probability: hits as f64 / UNI_GAUSS_SAMPLES as f64,
            method: "sampled-cylinders".into(),
            pairs_examined: UNI_GAUSS_SAMPLES,
            unaccounted_mass: 0.0,
            note: "finitely many (n, a) pairs; (U2) assumed for Möbius branches".into(),
        })
    }

    /// DIOP quantities for two or three branches.
    pub fn diop_quantities(&self, branches: &[InverseBranch]) -> Result<DiopQuantities> {
        if !(2..=3).contains(&branches.len()) {
            return Err(Error::InvalidConfig("DIOP needs 2 or 3 branches".into()));
        }
        let mut ctx = HpContext::new(DIOP_PRECISION);
        let mut fixed_points = Vec::new();
        let mut c_values = Vec::new();
        let mut c_hp = Vec::new();
        for h in branches {
            let x = h.map.fixed_point()?;
            fixed_points.push(x);
            let xs = h.map.fixed_point_hp(&ctx)?;
            // log|h'(x*)| = log|det| - 2 log|c x* + d|
            let det = ctx.from_f64(h.map.det().abs());
            let q = hp::abs(&ctx.add(&ctx.mul(&ctx.from_f64(h.map.c), &xs), &ctx.from_f64(h.map.d)));
            let ld = ctx.ln(&det);
            let lq = ctx.ln(&q);
            let lg = ctx.sub(&ld, &ctx.mul(&ctx.from_u64(2), &lq));
            let c = ctx.div(&lg, &ctx.from_u64(h.depth() as u64));
            c_values.push(hp::to_f64(&c));
            c_hp.push(c);
        }
        let ratio_hp = if branches.len() == 2 {
            ctx.div(&c_hp[0], &c_hp[1])
        } else {
            ctx.div(&ctx.sub(&c_hp[0], &c_hp[1]), &ctx.sub(&c_hp[0], &c_hp[2]))
        };
        let ratio = hp::to_f64(&ratio_hp);
        let profile = if ratio.is_finite() && ratio != 0.0 {
            let abs = hp::abs(&ratio_hp);
            match irrationality_profile(&mut ctx, &abs, DIOP_CF_DEPTH) {
                Ok(p) => Some(p),
                Err(Error::PrecisionExhausted(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Ok(DiopQuantities {
            words: branches.iter().map(|b| b.word.clone()).collect(),
            fixed_points,
            c: c_values,
            ratio,
            profile,
        })
    }
}

pub const UNI_PAIR_BUDGET: usize = 4_000_000;
const UNI_SAMPLES: usize = 200_000;
const UNI_GAUSS_SAMPLES: usize = 40_000;
pub const DIOP_PRECISION: usize = 512;
pub const DIOP_CF_DEPTH: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalInterval {
    pub word: Vec<Symbol>,
    pub lo: f64,
    pub hi: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoodClassReport {
    /// sup |h'| over branches of depth 1 and 2.
    pub rho_per_depth: Vec<f64>,
    pub rho_hat: f64,
    pub a_hat: f64,
    /// None for finite alphabets (G3 holds trivially).
    pub sigma0_hat: Option<f64>,
    pub g1: bool,
    pub g2: bool,
    pub g3: bool,
    pub probe_points: usize,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniReport {
    pub depth: usize,
    pub a: f64,
    pub rho: f64,
    pub threshold: f64,
    pub probability: f64,
    pub method: String,
    pub pairs_examined: usize,
    pub unaccounted_mass: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiopQuantities {
    pub words: Vec<Vec<Symbol>>,
    pub fixed_points: Vec<f64>,
    pub c: Vec<f64>,
    /// c(h,k) for pairs, c(h,k,l) for triples.
    pub ratio: f64,
    pub profile: Option<IrrationalityProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniDistance {
    /// Minimum of |Psi'| on the grid.
    pub grid_inf: f64,
    /// Grid minimum minus the Lipschitz allowance between grid points.
    pub lower_bound: f64,
}

fn psi_prime(h: &Mobius, k: &Mobius, x: f64) -> f64 {
    2.0 * (k.c / (k.c * x + k.d) - h.c / (h.c * x + h.d))
}

fn psi_second(h: &Mobius, k: &Mobius, x: f64) -> f64 {
    let qh = h.c / (h.c * x + h.d);
    let qk = k.c / (k.c * x + k.d);
    2.0 * (qh * qh - qk * qk)
}

/// inf |Psi'| over [0,1] for Psi = log|h'/k'|, on a grid.
pub fn uni_distance(h: &InverseBranch, k: &InverseBranch, grid: usize) -> Result<UniDistance> {
    if h.depth() != k.depth() {
        return Err(Error::InvalidConfig("branches must have equal depth".into()));
    }
    if grid < 2 {
        return Err(Error::InvalidConfig("grid must have at least 2 points".into()));
    }
    let xs: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let grid_inf = xs
        .iter()
        .map(|&x| psi_prime(&h.map, &k.map, x).abs())
        .fold(f64::INFINITY, f64::min);
    let lip = xs
        .iter()
        .map(|&x| psi_second(&h.map, &k.map, x).abs())
        .fold(0.0, f64::max);
    let half_step = 0.5 / (grid - 1) as f64;
    Ok(UniDistance {
        grid_inf,
        lower_bound: (grid_inf - 1.1 * lip * half_step).max(0.0),
    })
}

/// Closed form: Psi'(x) = 2 (c_k d_h - c_h d_k) / ((c_k x + d_k)(c_h x + d_h)).
pub fn uni_distance_exact(h: &Mobius, k: &Mobius) -> f64 {
    let num = 2.0 * (k.c * h.d - h.c * k.d).abs();
    if num == 0.0 {
        return 0.0;
    }
    let q = |x: f64| ((k.c * x + k.d) * (h.c * x + h.d)).abs();
    let mut m = q(0.0).max(q(1.0));
    let qa = k.c * h.c;
    if qa != 0.0 {
        let v = -(k.c * h.d + k.d * h.c) / (2.0 * qa);
        if (0.0..=1.0).contains(&v) {
            m = m.max(q(v));
        }
    }
    num / m
}

/// Lazily extended word of a dynamical source, driven by a random dyadic
/// refinement of the starting point.
pub struct DynamicalWordStream<'a> {
    system: &'a IntervalSystem,
    rng: ChaCha8Rng,
    numer: BigInt,
    bits: u64,
    /// Composite inverse map T^k restricted to the current cylinder.
    inverse: RatMobius,
}

impl<'a> DynamicalWordStream<'a> {
    pub fn new(system: &'a IntervalSystem, rng: ChaCha8Rng) -> Self {
        DynamicalWordStream {
            system,
            rng,
            numer: BigInt::zero(),
            bits: 0,
            inverse: RatMobius::identity(),
        }
    }

    fn refine(&mut self) {
        self.numer = (&self.numer << 64) + BigInt::from(self.rng.next_u64());
        self.bits += 64;
    }

    pub fn next_symbol(&mut self) -> Symbol {
        if self.bits == 0 {
            self.refine();
        }
        loop {
            let den = BigInt::one() << self.bits;
            let lo = BigRational::new(self.numer.clone(), den.clone());
            let hi = BigRational::new(&self.numer + 1, den);
            let a = self.inverse.eval(&lo);
            let b = self.inverse.eval(&hi);
            if let (Some(a), Some(b)) = (a, b) {
                let (ylo, yhi) = if a <= b { (a, b) } else { (b, a) };
                if let Some((m, inv)) = self.system.certify(&ylo, &yhi) {
                    self.inverse = inv.compose(&self.inverse);
                    return m;
                }
            }
            self.refine();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn emits_binary_expansion() {
        let s = IntervalSystem::binary_shift();
        assert_eq!(s.emit_word(&rat(13, 32), 4).unwrap(), vec![0, 1, 1, 0]);
    }

    #[test]
    fn emits_continued_fraction_digits() {
        let g = IntervalSystem::gauss();
        // consecutive convergents of sqrt(2) - 1 bracket it
        let lo = rat(408, 985);
        let hi = rat(169, 408);
        assert_eq!(g.emit_word_interval(&lo, &hi, 4).unwrap(), vec![2, 2, 2, 2]);
        assert!(matches!(g.emit_word(&rat(1, 2), 1), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn fundamental_intervals() {
        let s = IntervalSystem::binary_shift();
        let f = s.fundamental_interval(&[0, 1]).unwrap();
        assert_eq!((f.lo, f.hi, f.probability), (0.25, 0.5, 0.25));
        let g = IntervalSystem::gauss();
        let f = g.fundamental_interval(&[1]).unwrap();
        assert_eq!((f.lo, f.hi, f.probability), (0.5, 1.0, 0.5));
        let f = g.fundamental_interval(&[1, 1]).unwrap();
        assert!((f.lo - 0.5).abs() < 1e-15 && (f.hi - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.probability - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn good_class_reports() {
        let b = IntervalSystem::binary_shift().check_good_class(32).unwrap();
        assert_eq!(b.rho_hat, 0.5);
        assert_eq!(b.a_hat, 0.0);
        assert!(b.g1 && b.g2 && b.g3);
        let g = IntervalSystem::gauss().check_good_class(64).unwrap();
        assert_eq!(g.rho_per_depth[0], 1.0);
        assert!((g.rho_per_depth[1] - 0.25).abs() < 1e-15);
        assert!(g.g1 && g.g2 && g.g3);
        assert!((g.sigma0_hat.unwrap() - 0.5).abs() < 1e-2);
        let bad = IntervalSystem::moebius(vec![Mobius::new(1.0, 0.0, 0.0, 1.0), Mobius::new(0.0, 1.0, 0.0, 1.0)]);
        assert!(bad.is_err());
    }

    #[test]
    fn gauss_uni_distance() {
        let g = IntervalSystem::gauss();
        let d = uni_distance(&g.branch(1), &g.branch(2), 10_000).unwrap();
        assert!((d.grid_inf - 1.0 / 3.0).abs() < 1e-12);
        assert!(d.lower_bound > 0.33);
        assert!((uni_distance_exact(&g.branch_map(1), &g.branch_map(2)) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(uni_distance(&g.branch(1), &g.branch(1), 100).unwrap().grid_inf, 0.0);
        let b = IntervalSystem::binary_shift();
        assert_eq!(uni_distance(&b.branch(0), &b.branch(1), 100).unwrap().grid_inf, 0.0);
    }

    #[test]
    fn uni_probability() {
        let b = IntervalSystem::binary_shift();
        let r = b.uni_probability_estimate(3, 0.5, 1).unwrap();
        assert_eq!(r.probability, 1.0);
        let g = IntervalSystem::gauss();
        let r = g.uni_probability_estimate(2, 0.5, 1).unwrap();
        assert!(r.probability > 0.0 && r.probability < 1.0);
        let r2 = g.uni_probability_estimate(2, 0.25, 1).unwrap();
        assert!(r2.probability >= r.probability);
    }

    #[test]
    fn gauss_diop_values() {
        let g = IntervalSystem::gauss();
        let q = g.diop_quantities(&[g.branch(1), g.branch(2)]).unwrap();
        assert!((q.fixed_points[0] - 0.618034).abs() < 1e-6);
        assert!((q.c[0] + 0.962424).abs() < 1e-6);
        assert!((q.fixed_points[1] - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((q.c[1] + 1.762747).abs() < 1e-6);
        let same = g.diop_quantities(&[g.branch(1), g.branch(1)]).unwrap();
        assert!((same.ratio - 1.0).abs() < 1e-15);
        for (h, x) in [g.branch(1), g.branch(2)].iter().zip(&q.fixed_points) {
            assert!((h.eval(*x) - x).abs() < 2f64.powi(-45));
        }
    }

    #[test]
    fn random_words_are_prefix_stable() {
        let g = IntervalSystem::gauss();
        let mut a = DynamicalWordStream::new(&g, ChaCha8Rng::seed_from_u64(5));
        let first: Vec<_> = (0..5).map(|_| a.next_symbol()).collect();
        let more: Vec<_> = (0..5).map(|_| a.next_symbol()).collect();
        let mut b = DynamicalWordStream::new(&g, ChaCha8Rng::seed_from_u64(5));
        let all: Vec<_> = (0..10).map(|_| b.next_symbol()).collect();
        assert_eq!([first, more].concat(), all);
    }
}
