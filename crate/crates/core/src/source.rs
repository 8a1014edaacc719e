//! The common source abstraction: Dirichlet series, entropy and word
//! emission over memoryless, Markov and dynamical sources.

use crate::dynamical::{DynamicalWordStream, IntervalSystem, Mobius, Symbol, SystemKind};
use crate::error::{Error, Result};
use crate::simple::{MarkovChain, Memoryless, Prob};
use crate::transfer;
use num_complex::Complex64 as C64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Name of the generator recorded in output metadata.
pub const RNG_NAME: &str = "ChaCha8";

#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    Memoryless(Memoryless),
    Markov(MarkovChain),
    Dynamical(IntervalSystem),
}

/// A value of Lambda(s) or Lambda_(k)(s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirichletValue {
    pub s: C64,
    pub value: C64,
    pub abs_error_bound: f64,
    /// `None` for closed forms.
    pub truncation_depth: Option<usize>,
}

impl DirichletValue {
    fn closed(s: C64, value: C64) -> Self {
        DirichletValue {
            s,
            value,
            abs_error_bound: 0.0,
            truncation_depth: None,
        }
    }
}

/// Enumeration limits for sources without closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumOptions {
    /// Branches with measure below `eps` are folded into the tail bound.
    pub eps: f64,
    /// Maximum number of enumerated prefixes.
    pub budget: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            eps: 1e-12,
            budget: 20_000_000,
        }
    }
}

/// Prefix of a dynamical source found by enumeration.
pub struct PrefixVisit {
    pub depth: usize,
    pub probability: f64,
}

/// Mass of the children of one node that were not enumerated.
pub struct TailVisit {
    /// Depth of the parent node.
    pub depth: usize,
    pub parent_probability: f64,
    pub mass: f64,
    /// First symbol left out.
    pub first_missing: Symbol,
}

/// Depth-first enumeration of the prefixes of a dynamical source up to
/// `max_depth`. Children with measure below `eps` are reported as one tail
/// item per node. `visit` returns false to prune the subtree.
pub fn enumerate_dynamical(
    system: &IntervalSystem,
    max_depth: usize,
    opts: &EnumOptions,
    mut visit: impl FnMut(&PrefixVisit) -> bool,
    mut tail: impl FnMut(&TailVisit),
) -> Result<usize> {
    let mut count = 0usize;
    let mut stack: Vec<(Mobius, usize, f64)> = vec![(Mobius::IDENTITY, 0, 1.0)];
    let finite: Vec<Symbol> = if system.is_infinite() {
        Vec::new()
    } else {
        system.alphabet()
    };
    while let Some((h, depth, p)) = stack.pop() {
        if depth == max_depth {
            continue;
        }
        let mut push = |m: Symbol, stack: &mut Vec<(Mobius, usize, f64)>| -> Result<Option<f64>> {
            let child = h.compose(&system.branch_map(m));
            let pc = (child.eval(1.0) - child.eval(0.0)).abs();
            count += 1;
            if count > opts.budget {
                return Err(Error::UnsupportedDepth {
                    depth: max_depth,
                    budget: opts.budget,
                });
            }
            if visit(&PrefixVisit {
                depth: depth + 1,
                probability: pc,
            }) {
                stack.push((child, depth + 1, pc));
            }
            Ok(Some(pc))
        };
        if system.is_infinite() {
            let mut m = 1;
            loop {
                let child = h.compose(&system.branch_map(m));
                let pc = (child.eval(1.0) - child.eval(0.0)).abs();
                if pc < opts.eps && m > 1 {
                    // cells m, m+1, ... fill [0, 1/m] in the child coordinate
                    let mass = (h.eval(1.0 / m as f64) - h.eval(0.0)).abs();
                    tail(&TailVisit {
                        depth,
                        parent_probability: p,
                        mass,
                        first_missing: m,
                    });
                    break;
                }
                push(m, &mut stack)?;
                m += 1;
            }
        } else {
            for &m in &finite {
                push(m, &mut stack)?;
            }
        }
    }
    Ok(count)
}

impl SourceModel {
    pub fn memoryless(probs: &[f64]) -> Result<Self> {
        Ok(SourceModel::Memoryless(Memoryless::from_f64(probs)?))
    }

    /// Name of the variant.
    pub fn variant(&self) -> &'static str {
        match self {
            SourceModel::Memoryless(_) => "memoryless",
            SourceModel::Markov(_) => "markov",
            SourceModel::Dynamical(_) => "dynamical",
        }
    }

    /// Memoryless source with the same prefix law, for memoryless sources
    /// and affine dynamical systems.
    pub fn as_memoryless(&self) -> Option<Memoryless> {
        match self {
            SourceModel::Memoryless(m) => Some(m.clone()),
            SourceModel::Dynamical(d) => d.as_memoryless(),
            SourceModel::Markov(_) => None,
        }
    }

    /// True when Lambda has a closed form (usable on the whole plane).
    pub fn has_closed_form(&self) -> bool {
        match self {
            SourceModel::Dynamical(d) => d.is_affine(),
            _ => true,
        }
    }

    pub fn lambda_k(&self, k: usize, s: C64, opts: &EnumOptions) -> Result<DirichletValue> {
        if let Some(m) = self.as_memoryless() {
            return Ok(DirichletValue::closed(s, m.lambda(s).powu(k as u32)));
        }
        match self {
            SourceModel::Markov(mc) => Ok(DirichletValue::closed(s, mc.lambda_k(k, s))),
            SourceModel::Dynamical(sys) => dynamical_lambda_k(sys, k, s, opts),
            SourceModel::Memoryless(_) => unreachable!(),
        }
    }

    pub fn lambda_series(&self, s: C64, tol: f64) -> Result<DirichletValue> {
        if s == C64::new(1.0, 0.0) {
            return Err(Error::DivergentSeries(s));
        }
        if let Some(m) = self.as_memoryless() {
            return Ok(DirichletValue::closed(s, m.big_lambda(s)?));
        }
        match self {
            SourceModel::Markov(mc) => Ok(DirichletValue::closed(s, mc.big_lambda(s)?)),
            SourceModel::Dynamical(sys) => {
                let v = transfer::lambda_series_levels(sys, s, tol)?;
                Ok(DirichletValue {
                    s,
                    value: v.value,
                    abs_error_bound: v.error_estimate,
                    truncation_depth: Some(v.levels),
                })
            }
            SourceModel::Memoryless(_) => unreachable!(),
        }
    }

    pub fn entropy(&self) -> Result<f64> {
        if let Some(m) = self.as_memoryless() {
            return Ok(m.entropy());
        }
        match self {
            SourceModel::Markov(mc) => mc.entropy(),
            SourceModel::Dynamical(sys) => {
                let fd = transfer::operator_entropy(sys, transfer::DEFAULT_ORDER)?;
                let ces = cesaro_entropy(sys, 2, fd)?;
                if !fd.is_finite() || (fd - ces).abs() > 0.05 * fd.abs() {
                    return Err(Error::NotEntropic {
                        finite_difference: fd,
                        cesaro: ces,
                    });
                }
                Ok(fd)
            }
            SourceModel::Memoryless(_) => unreachable!(),
        }
    }

    /// Stream of symbols for word `index` under `seed`.
    pub fn word_stream(&self, seed: u64, index: u64) -> WordStream<'_> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        match self {
            SourceModel::Memoryless(m) => WordStream::Memoryless {
                cumulative: cumulative(m.probs()),
                rng,
            },
            SourceModel::Markov(mc) => {
                let d = mc.states();
                let columns = (0..d)
                    .map(|j| cumulative(&(0..d).map(|i| mc.transition()[i][j]).collect::<Vec<_>>()))
                    .collect();
                WordStream::Markov {
                    initial: cumulative(mc.initial()),
                    columns,
                    prev: None,
                    rng,
                }
            }
            SourceModel::Dynamical(sys) => WordStream::Dynamical(DynamicalWordStream::new(sys, rng)),
        }
    }

    /// `n` words of length `max_len`; word i is a prefix of the same word
    /// emitted with any larger `max_len`.
    pub fn emit_words(&self, n: usize, max_len: usize, seed: u64) -> Vec<Word> {
        (0..n)
            .map(|i| {
                let mut st = self.word_stream(seed, i as u64);
                Word((0..max_len).map(|_| st.next_symbol()).collect())
            })
            .collect()
    }

    /// Lazily extended word `index` under `seed`.
    pub fn lazy_word(&self, seed: u64, index: u64, cap: usize) -> LazyWord<'_> {
        LazyWord {
            stream: self.word_stream(seed, index),
            symbols: Vec::new(),
            cap,
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let m = |p: Vec<Prob>| SourceModel::Memoryless(Memoryless::new(p).unwrap());
        Some(match name {
            "uniform-binary" => m(vec![Prob::Ratio(1, 2), Prob::Ratio(1, 2)]),
            "uniform-ternary" => m(vec![Prob::Ratio(1, 3); 3]),
            "biased-binary" => m(vec![Prob::Float(0.3), Prob::Float(0.7)]),
            "dyadic" => m(vec![Prob::Ratio(1, 4), Prob::Ratio(1, 4), Prob::Ratio(1, 2)]),
            "thirds" => m(vec![Prob::Ratio(1, 2), Prob::Ratio(1, 3), Prob::Ratio(1, 6)]),
            "binary-shift" => SourceModel::Dynamical(IntervalSystem::binary_shift()),
            "ternary-shift" => SourceModel::Dynamical(IntervalSystem::rary(3).unwrap()),
            "gauss" => SourceModel::Dynamical(IntervalSystem::gauss()),
            _ => return None,
        })
    }

    pub const BUILTINS: [&'static str; 8] = [
        "uniform-binary",
        "uniform-ternary",
        "biased-binary",
        "dyadic",
        "thirds",
        "binary-shift",
        "ternary-shift",
        "gauss",
    ];

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SourceSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("source JSON: {e}")))?;
        spec.build()
    }

    /// Builtin name, or path to a JSON document.
    pub fn resolve(spec: &str) -> Result<Self> {
        if let Some(s) = Self::builtin(spec) {
            return Ok(s);
        }
        let text = std::fs::read_to_string(spec).map_err(|e| {
            Error::InvalidConfig(format!(
                "'{spec}' is neither a builtin source ({}) nor a readable file: {e}",
                Self::BUILTINS.join(", ")
            ))
        })?;
        Self::from_json(&text)
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw(cum: &[f64], rng: &mut ChaCha8Rng) -> Symbol {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
}

/// Sum of |p_w^s| over enumerated prefixes, with the tail bounded using
/// the exact truncated mass t: sum p^sigma <= t^sigma for sigma >= 1, and
/// the distortion bound for 1/2 < sigma < 1.
fn dynamical_lambda_k(sys: &IntervalSystem, k: usize, s: C64, opts: &EnumOptions) -> Result<DirichletValue> {
    if s == C64::new(1.0, 0.0) {
        return Ok(DirichletValue::closed(s, s));
    }
    if k == 0 {
        return Ok(DirichletValue::closed(s, C64::new(1.0, 0.0)));
    }
    let sigma = s.re;
    if sys.is_infinite() && sigma <= 0.5 {
        return Err(Error::DivergentSeries(s));
    }
    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    // Gauss distortion: sup|h'| / inf|h'| <= 4 on every cylinder.
    let level = 4f64.powf(sigma) * crate::numeric::hurwitz_zeta(C64::new(2.0 * sigma, 0.0), 1.0).re;
    enumerate_dynamical(
        sys,
        k,
        opts,
        |v| {
            if v.depth == k {
                total += (s * v.probability.ln()).exp();
            }
            true
        },
        |t| {
            let below = (k - t.depth - 1) as i32;
            if sigma >= 1.0 {
                err += t.mass.powf(sigma);
            } else {
                let m = t.first_missing as f64;
                let head =
                    (4.0 * t.parent_probability).powf(sigma) * (m - 1.0).powf(1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0);
                err += head * level.powi(below);
            }
        },
    )?;
    Ok(DirichletValue {
        s,
        value: total,
        abs_error_bound: err + 1e-15 * total.norm(),
        truncation_depth: Some(k),
    })
}

/// Cesaro increment H_{k+1} - H_k of the block entropies
/// H_k = -sum_{|w|=k} p_w ln p_w. Truncated tails are filled in assuming
/// Gauss-like cell sizes below the cut and `h_deep` per further level.
pub fn cesaro_entropy(sys: &IntervalSystem, k: usize, h_deep: f64) -> Result<f64> {
    let opts = EnumOptions {
        eps: 1e-8,
        budget: 20_000_000,
    };
    let mut h = vec![0.0; k + 2];
    let mut tails = Vec::new();
    enumerate_dynamical(
        sys,
        k + 1,
        &opts,
        |v| {
            if v.depth >= k {
                h[v.depth] -= v.probability * v.probability.ln();
            }
            true
        },
        |t| tails.push((t.depth, t.mass, t.first_missing as f64)),
    )?;
    for (d, t, m) in tails {
        if t <= 0.0 {
            continue;
        }
        let first = t * (-t.ln() + m.ln() + 2.0);
        for (level, hl) in h.iter_mut().enumerate().skip(k) {
            if level > d {
                *hl += first + t * h_deep * (level - d - 1) as f64;
            }
        }
    }
    Ok(h[k + 1] - h[k])
}

/// Lazy symbol source for one word.
pub enum WordStream<'a> {
    Memoryless {
        cumulative: Vec<f64>,
        rng: ChaCha8Rng,
    },
    Markov {
        initial: Vec<f64>,
        columns: Vec<Vec<f64>>,
        prev: Option<Symbol>,
        rng: ChaCha8Rng,
    },
    Dynamical(DynamicalWordStream<'a>),
}

impl WordStream<'_> {
    pub fn next_symbol(&mut self) -> Symbol {
        match self {
            WordStream::Memoryless { cumulative, rng } => draw(cumulative, rng),
            WordStream::Markov {
                initial,
                columns,
                prev,
                rng,
            } => {
                let sym = match prev {
                    None => draw(initial, rng),
                    Some(j) => draw(&columns[*j], rng),
                };
                *prev = Some(sym);
                sym
            }
            WordStream::Dynamical(d) => d.next_symbol(),
        }
    }
}

/// Random access to the symbols of a word.
pub trait SymbolAccess {
    /// Symbol at position `i`, or `None` past the available length.
    fn symbol(&mut self, i: usize) -> Option<Symbol>;
}

/// A fixed finite word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl SymbolAccess for Word {
    fn symbol(&mut self, i: usize) -> Option<Symbol> {
        self.0.get(i).copied()
    }
}

pub const DEFAULT_WORD_CAP: usize = 1_000_000;

/// Emitted word extended on demand up to `cap` symbols.
pub struct LazyWord<'a> {
    stream: WordStream<'a>,
    symbols: Vec<Symbol>,
    cap: usize,
}

impl LazyWord<'_> {
    pub fn produced(&self) -> &[Symbol] {
        &self.symbols
    }
}

impl SymbolAccess for LazyWord<'_> {
    fn symbol(&mut self, i: usize) -> Option<Symbol> {
        if i >= self.cap {
            return None;
        }
        while self.symbols.len() <= i {
            let s = self.stream.next_symbol();
            self.symbols.push(s);
        }
        Some(self.symbols[i])
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ProbSpec {
    Number(f64),
    Fraction(String),
}

impl ProbSpec {
    fn to_prob(&self) -> Result<Prob> {
        match self {
            ProbSpec::Number(p) => Ok(Prob::Float(*p)),
            ProbSpec::Fraction(s) => {
                let bad = || Error::InvalidConfig(format!("cannot parse probability '{s}'"));
                let (a, b) = s.split_once('/').ok_or_else(bad)?;
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim().parse().map_err(|_| bad())?;
                if b == 0 {
                    return Err(bad());
                }
                Ok(Prob::Ratio(a, b))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
struct MobiusSpec {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DynKind {
    Rary,
    Gauss,
    Moebius,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum SourceSpec {
    Memoryless {
        probs: Vec<ProbSpec>,
    },
    Markov {
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
    },
    Dynamical {
        kind: DynKind,
        r: Option<usize>,
        branches: Option<Vec<MobiusSpec>>,
        initial: Option<String>,
        truncation: Option<usize>,
    },
}

impl SourceSpec {
    fn build(self) -> Result<SourceModel> {
        match self {
            SourceSpec::Memoryless { probs } => {
                let p = probs.iter().map(ProbSpec::to_prob).collect::<Result<Vec<_>>>()?;
                Ok(SourceModel::Memoryless(Memoryless::new(p)?))
            }
            SourceSpec::Markov { initial, transition } => {
                Ok(SourceModel::Markov(MarkovChain::new(initial, transition)?))
            }
            SourceSpec::Dynamical {
                kind,
                r,
                branches,
                initial,
                truncation,
            } => {
                if let Some(init) = initial {
                    if init != "uniform" {
                        return Err(Error::UnsupportedSource(format!(
                            "initial distribution '{init}' (only \"uniform\")"
                        )));
                    }
                }
                let sys = match kind {
                    DynKind::Rary => {
                        IntervalSystem::rary(r.ok_or_else(|| Error::InvalidConfig("rary system needs \"r\"".into()))?)?
                    }
                    DynKind::Gauss => {
                        let g = IntervalSystem::gauss();
                        match truncation {
                            Some(m) => g.with_truncation(m),
                            None => g,
                        }
                    }
                    DynKind::Moebius => {
                        let b =
                            branches.ok_or_else(|| Error::InvalidConfig("moebius system needs \"branches\"".into()))?;
                        IntervalSystem::moebius(b.iter().map(|m| Mobius::new(m.a, m.b, m.c, m.d)).collect())?
                    }
                };
                Ok(SourceModel::Dynamical(sys))
            }
        }
    }
}

impl SourceModel {
    /// Short description for output headers.
    pub fn describe(&self) -> String {
        match self {
            SourceModel::Memoryless(m) => format!("memoryless{:?}", m.probs()),
            SourceModel::Markov(mc) => format!("markov[{} states]", mc.states()),
            SourceModel::Dynamical(d) => match d.kind() {
                SystemKind::Rary(r) => format!("dynamical[{r}-ary shift]"),
                SystemKind::Gauss => format!("dynamical[gauss, truncation {}]", d.truncation()),
                SystemKind::Moebius => format!("dynamical[moebius, {} branches]", d.branches().len()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn lambda_k_examples() {
        let u = SourceModel::builtin("uniform-binary").unwrap();
        let o = EnumOptions::default();
        assert_eq!(u.lambda_k(1, c(2.0), &o).unwrap().value.re, 0.5);
        let g = SourceModel::builtin("gauss").unwrap();
        assert_eq!(g.lambda_k(3, c(1.0), &o).unwrap().value.re, 1.0);
        let v = g.lambda_k(1, c(2.0), &o).unwrap();
        let oracle = std::f64::consts::PI.powi(2) / 3.0 - 3.0;
        assert!((v.value.re - oracle).abs() <= v.abs_error_bound + 1e-12);
        assert!(v.abs_error_bound < 2e-12);
    }

    #[test]
    fn prefix_mass_sums_to_one() {
        let opts = EnumOptions {
            eps: 1e-7,
            budget: 10_000_000,
        };
        let g = SourceModel::builtin("gauss").unwrap();
        for k in 1..=3 {
            let v = g.lambda_k(k, c(1.0 + 1e-12), &opts).unwrap();
            assert!((v.value.re - 1.0).abs() <= v.abs_error_bound + 1e-9, "k={k}");
        }
        let t = SourceModel::builtin("thirds").unwrap();
        for k in 1..=6 {
            assert!((t.lambda_k(k, c(1.0), &opts).unwrap().value.re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn enumerated_matches_closed_form() {
        let m = SourceModel::memoryless(&[0.3, 0.7]).unwrap();
        let sys =
            IntervalSystem::moebius(vec![Mobius::new(0.3, 0.0, 0.0, 1.0), Mobius::new(0.7, 0.3, 0.0, 1.0)]).unwrap();
        let opts = EnumOptions::default();
        for k in 1..=12 {
            let a = m.lambda_k(k, c(2.0), &opts).unwrap().value;
            let b = dynamical_lambda_k(&sys, k, c(2.0), &opts).unwrap().value;
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn series_values() {
        let b = SourceModel::memoryless(&[0.3, 0.7]).unwrap();
        let v = b.lambda_series(c(2.0), 1e-12).unwrap();
        assert!((v.value.re - 1.0 / 0.42).abs() < 1e-12);
        // truncated enumeration to depth 40
        let partial: f64 = (0..=40)
            .map(|k| b.lambda_k(k, c(2.0), &EnumOptions::default()).unwrap().value.re)
            .sum();
        assert!((partial - v.value.re).abs() < 1e-9);
        assert!(matches!(b.lambda_series(c(1.0), 1e-9), Err(Error::DivergentSeries(_))));
        let g = SourceModel::builtin("gauss").unwrap();
        assert!(matches!(g.lambda_series(c(0.9), 1e-9), Err(Error::DivergentSeries(_))));
        let mut prev = f64::INFINITY;
        for s in [1.2, 1.5, 2.0, 3.0] {
            let v = g.lambda_series(c(s), 1e-10).unwrap().value;
            assert!(v.im.abs() < 1e-12 && v.re > 0.0 && v.re < prev);
            prev = v.re;
        }
    }

    #[test]
    fn entropies() {
        let u = SourceModel::builtin("uniform-binary").unwrap();
        assert!((u.entropy().unwrap() - 2f64.ln()).abs() < 1e-15);
        let g = SourceModel::builtin("gauss").unwrap();
        let h = g.entropy().unwrap();
        assert!((h - 2.37314).abs() < 1e-5);
    }

    #[test]
    fn emission_is_reproducible_and_prefix_stable() {
        for name in ["biased-binary", "gauss"] {
            let s = SourceModel::builtin(name).unwrap();
            let a = s.emit_words(5, 4, 42);
            let b = s.emit_words(5, 9, 42);
            assert_eq!(a, s.emit_words(5, 4, 42));
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(&x.0[..], &y.0[..4]);
            }
        }
        assert!(SourceModel::builtin("gauss").unwrap().emit_words(0, 3, 1).is_empty());
    }

    #[test]
    fn emission_frequencies() {
        let u = SourceModel::builtin("uniform-binary").unwrap();
        let n = 100_000;
        let zeros = u.emit_words(n, 1, 7).iter().filter(|w| w.0[0] == 0).count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
        let g = SourceModel::builtin("gauss").unwrap();
        let n = 10_000;
        let ones = g.emit_words(n, 1, 7).iter().filter(|w| w.0[0] == 1).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn json_sources() {
        let m = SourceModel::from_json(r#"{"type":"memoryless","probs":["1/2","1/3",0.16666666666666666]}"#).unwrap();
        assert_eq!(m.variant(), "memoryless");
        let mk = SourceModel::from_json(r#"{"type":"markov","initial":[0.5,0.5],"transition":[[0.5,0.5],[0.5,0.5]]}"#)
            .unwrap();
        assert!((mk.lambda_series(c(2.0), 1e-12).unwrap().value.re - 2.0).abs() < 1e-14);
        let d = SourceModel::from_json(r#"{"type":"dynamical","kind":"gauss","initial":"uniform"}"#).unwrap();
        assert_eq!(d.variant(), "dynamical");
        let e = SourceModel::from_json(r#"{"type":"dynamical","kind":"gauss","initial":"invariant"}"#);
        assert!(matches!(e, Err(Error::UnsupportedSource(_))));
        let bad = SourceModel::from_json(r#"{"type":"memoryless","probs":[0.5,0.6]}"#);
        assert!(matches!(bad, Err(Error::InvalidConfig(_))));
        let mob = SourceModel::from_json(
            r#"{"type":"dynamical","kind":"moebius","branches":[{"a":0,"b":1,"c":1,"d":1},{"a":-0.5,"b":0.5,"c":0,"d":1}]}"#,
        );
        assert!(mob.is_ok(), "{mob:?}");
    }
}
