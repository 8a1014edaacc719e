use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use std::f64::consts::{LN_2, PI};
use tamelab::dynamical::IntervalSystem;
use tamelab::error::Error;
use tamelab::simple::{classify_periodicity, irrationality_profile_f64, MarkovChain, Memoryless, PeriodicityVerdict};
use tamelab::source::{EnumOptions, SourceModel};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn prefix_sums() {
    let opts = EnumOptions::default();
    let u = SourceModel::builtin("uniform-binary").unwrap();
    assert!((u.lambda_k(1, re(2.0), &opts).unwrap().value.re - 0.5).abs() < 1e-15);
    for name in ["biased-binary", "thirds", "gauss", "binary-shift"] {
        let s = SourceModel::builtin(name).unwrap();
        for k in [1, 3] {
            assert_eq!(s.lambda_k(k, re(1.0), &opts).unwrap().value.re, 1.0, "{name}");
        }
    }
    // sum over m of (1/m - 1/(m+1))^2 = pi^2/3 - 3
    let g = SourceModel::builtin("gauss").unwrap();
    let v = g.lambda_k(1, re(2.0), &opts).unwrap();
    assert!((v.value.re - (PI * PI / 3.0 - 3.0)).abs() < 2e-12);
}

#[test]
fn dirichlet_series() {
    let u = SourceModel::builtin("uniform-binary").unwrap();
    assert!((u.lambda_series(re(2.0), 1e-12).unwrap().value.re - 2.0).abs() < 1e-12);
    let b = SourceModel::memoryless(&[0.3, 0.7]).unwrap();
    assert!((b.lambda_series(re(2.0), 1e-12).unwrap().value.re - 1.0 / 0.42).abs() < 1e-12);
    assert!((b.lambda_series(re(3.0), 1e-12).unwrap().value.re - 1.0 / 0.63).abs() < 1e-12);
    assert!(matches!(
        u.lambda_series(re(1.0), 1e-12),
        Err(Error::DivergentSeries(_))
    ));
    let pole = C64::new(1.0, 2.0 * PI / LN_2);
    let m = Memoryless::uniform(2).unwrap();
    assert!(matches!(m.big_lambda(pole), Err(Error::PoleAt(_))));
}

#[test]
fn entropies() {
    let cases = [
        ("uniform-binary", LN_2, 1e-12),
        ("biased-binary", 0.6108643, 1e-7),
        ("gauss", 2.37314, 1e-3),
    ];
    for (name, h, tol) in cases {
        let s = SourceModel::builtin(name).unwrap();
        assert!((s.entropy().unwrap() - h).abs() < tol, "{name}");
    }
}

#[test]
fn markov_reduces_to_memoryless() {
    let chain = MarkovChain::new(vec![0.5, 0.5], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    assert!((chain.big_lambda(re(2.0)).unwrap().re - 2.0).abs() < 1e-12);
    // a one-state chain emits a single word, like the one-symbol memoryless source
    let one = MarkovChain::new(vec![1.0], vec![vec![1.0]]).unwrap();
    assert!(matches!(one.big_lambda(re(2.0)), Err(Error::SingularMatrix(_))));
    // near s = 1 the series behaves like 1/(h (s - 1))
    let eps = 1e-4;
    let v = chain.big_lambda(re(1.0 + eps)).unwrap().re;
    assert!((v * eps * LN_2 - 1.0).abs() < 1e-3);
}

#[test]
fn emitted_words() {
    let u = SourceModel::builtin("uniform-binary").unwrap();
    assert!(u.emit_words(0, 10, 1).is_empty());
    let words = u.emit_words(100_000, 1, 3);
    let zeros = words.iter().filter(|w| w.0[0] == 0).count() as f64 / 1e5;
    assert!((zeros - 0.5).abs() < 3.0 * (0.25f64 / 1e5).sqrt());
    assert_eq!(u.emit_words(5, 8, 9), u.emit_words(5, 8, 9));

    // with a uniform initial point digit 1 of the Gauss map has probability 1/2
    let g = SourceModel::builtin("gauss").unwrap();
    let words = g.emit_words(10_000, 1, 5);
    let ones = words.iter().filter(|w| w.0[0] == 1).count() as f64 / 1e4;
    assert!((ones - 0.5).abs() < 3.0 * (0.25f64 / 1e4).sqrt());
}

#[test]
fn orbit_codings() {
    let shift = IntervalSystem::binary_shift();
    let x = BigRational::new(BigInt::from(13), BigInt::from(32));
    assert_eq!(shift.emit_word(&x, 4).unwrap(), vec![0, 1, 1, 0]);
    let i = shift.fundamental_interval(&[0, 1]).unwrap();
    assert_eq!((i.lo, i.hi, i.probability), (0.25, 0.5, 0.25));
    let g = IntervalSystem::gauss();
    let i = g.fundamental_interval(&[1, 1]).unwrap();
    assert!((i.lo - 0.5).abs() < 1e-15 && (i.hi - 2.0 / 3.0).abs() < 1e-15);
    assert!((i.probability - 1.0 / 6.0).abs() < 1e-15);
    // 5/12 = [0; 2, 2, 2]
    let x = BigRational::new(BigInt::from(5), BigInt::from(12));
    assert_eq!(g.emit_word(&x, 2).unwrap(), vec![2, 2]);
}

#[test]
fn periodicity_profiles() {
    let dyadic = Memoryless::from_f64(&[0.25, 0.25, 0.5]).unwrap();
    let p = classify_periodicity(&dyadic, 50).unwrap();
    assert!(matches!(p.verdict, PeriodicityVerdict::Periodic { .. }));
    let permuted = Memoryless::from_f64(&[0.5, 0.25, 0.25]).unwrap();
    let q = classify_periodicity(&permuted, 50).unwrap();
    assert!(matches!(q.verdict, PeriodicityVerdict::Periodic { .. }));
    let thirds = SourceModel::builtin("thirds").unwrap().as_memoryless().unwrap();
    match classify_periodicity(&thirds, 50).unwrap().verdict {
        PeriodicityVerdict::AperiodicCandidate { witness_ratio, .. } => {
            assert!((witness_ratio - 3f64.log2()).abs() < 1e-12)
        }
        v => panic!("{v:?}"),
    }
    let golden = irrationality_profile_f64((1.0 + 5f64.sqrt()) / 2.0, 20).unwrap();
    assert!(golden.partial_quotients.iter().take(20).all(|q| q == "1"));
    let half = irrationality_profile_f64(1.5, 10).unwrap();
    assert_eq!(half.rational, Some(("3".into(), "2".into())));
}

#[test]
fn json_sources() {
    let s = SourceModel::from_json(r#"{"type":"memoryless","probs":["1/4",0.25,"1/2"]}"#).unwrap();
    assert!((s.lambda_series(re(2.0), 1e-12).unwrap().value.re - 1.6).abs() < 1e-12);
    let m =
        SourceModel::from_json(r#"{"type":"markov","initial":[0.5,0.5],"transition":[[0.5,0.5],[0.5,0.5]]}"#).unwrap();
    assert_eq!(m.variant(), "markov");
    let d = SourceModel::from_json(r#"{"type":"dynamical","kind":"rary","r":3}"#).unwrap();
    assert!((d.entropy().unwrap() - 3f64.ln()).abs() < 1e-9);
    assert!(SourceModel::from_json(r#"{"type":"memoryless","probs":[0.5,0.6]}"#).is_err());
    assert!(matches!(
        SourceModel::from_json(r#"{"type":"dynamical","kind":"gauss","initial":"invariant"}"#),
        Err(Error::UnsupportedSource(_))
    ));
}
