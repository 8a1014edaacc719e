//! Evidence-based tameness classification of sources.

use crate::analysis::Regime;
use crate::dynamical::{uni_distance_exact, DiopQuantities, IntervalSystem, UniReport};
use crate::error::{Error, Result};
use crate::simple::{classify_periodicity, pole_search, Memoryless, PeriodicityVerdict, Prob};
use crate::source::SourceModel;
use crate::transfer::resolvent_norm_probe;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "periodic")]
    Periodic,
    #[serde(rename = "H-tame-candidate")]
    HTameCandidate,
    #[serde(rename = "S-tame-candidate")]
    STameCandidate,
    #[serde(rename = "unresolved")]
    Unresolved,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Periodic => "periodic",
            Verdict::HTameCandidate => "H-tame-candidate",
            Verdict::STameCandidate => "S-tame-candidate",
            Verdict::Unresolved => "unresolved",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grade {
    /// Settled by exact arithmetic.
    Exact,
    #[serde(rename = "evidence, not proof")]
    Evidence,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub kind: String,
    pub grade: Grade,
    pub summary: String,
    pub data: Value,
}

impl Evidence {
    fn new(kind: &str, grade: Grade, summary: String, data: impl Serialize) -> Self {
        Evidence {
            kind: kind.into(),
            grade,
            summary,
            data: serde_json::to_value(data).unwrap_or(Value::Null),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub description: String,
    pub value: f64,
    pub evidence_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TamenessReport {
    pub source: String,
    pub verdict: Verdict,
    pub grade: Grade,
    pub witness: Option<Witness>,
    /// Fluctuating term expected in the asymptotics.
    pub fluctuation: bool,
    pub evidence: Vec<Evidence>,
    pub notes: Vec<String>,
}

impl TamenessReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyBudget {
    pub cf_depth: usize,
    pub pole_t_max: f64,
    pub probe_points: usize,
    pub uni_depths: Vec<usize>,
    pub uni_a: f64,
    /// Pr[Delta <= rho^(a n)] / rho^(a n) must stay below this at every depth.
    pub uni_ratio_bound: f64,
    /// Branch width of the DIOP search at depths 1 and 2.
    pub diop_width: usize,
    pub probe_ts: Vec<f64>,
    pub probe_order: usize,
    pub seed: u64,
}

impl Default for ClassifyBudget {
    fn default() -> Self {
        ClassifyBudget {
            cf_depth: 50,
            pole_t_max: 60.0,
            probe_points: 64,
            uni_depths: (1..=8).collect(),
            uni_a: 0.5,
            uni_ratio_bound: 4.0,
            diop_width: 2,
            probe_ts: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            probe_order: 12,
            seed: 0,
        }
    }
}

/// Fraction of the rate a log rho that the fitted decay of log Pr must reach.
const UNI_DECAY_FRACTION: f64 = 0.5;

/// Classifies `source`. Failures of individual checks are recorded in the
/// notes, never returned.
pub fn classify(source: &SourceModel, budget: &ClassifyBudget) -> TamenessReport {
    let name = source.describe();
    match source {
        SourceModel::Memoryless(m) => classify_memoryless(name, m, budget, Vec::new()),
        SourceModel::Markov(_) => TamenessReport {
            source: name,
            verdict: Verdict::Unresolved,
            grade: Grade::Evidence,
            witness: None,
            fluctuation: false,
            evidence: vec![Evidence::new(
                "unsupported",
                Grade::Evidence,
                "no arithmetic periodicity criterion for Markov chains".into(),
                json!({ "source_kind": "markov" }),
            )],
            notes: vec!["unsupported: classifier covers memoryless and dynamical sources".into()],
        },
        SourceModel::Dynamical(sys) => match sys.as_memoryless().filter(|_| sys.is_affine()) {
            Some(m) => {
                let note = "affine branches: classified as the equivalent memoryless source; UNI fails since Delta = 0"
                    .to_string();
                classify_memoryless(name, &m, budget, vec![note])
            }
            None => classify_dynamical(name, sys, budget),
        },
    }
}

fn exact_rational(p: &Prob) -> Option<BigRational> {
    match *p {
        Prob::Ratio(a, b) => Some(BigRational::new(BigInt::from(a), BigInt::from(b))),
        Prob::Float(x) => BigRational::from_float(x),
    }
}

/// Verifies p_j^q = p_k^p exactly for every ratio p/q of the profile.
fn certify_periodic(m: &Memoryless, base: usize, ratios: &[(usize, String, String)]) -> bool {
    const MAX_EXPONENT: u64 = 64;
    let exact: Option<Vec<BigRational>> = m.exact_probs().iter().map(exact_rational).collect();
    let Some(exact) = exact else { return false };
    ratios.iter().all(|(j, p, q)| {
        let (Ok(p), Ok(q)) = (p.parse::<u64>(), q.parse::<u64>()) else {
            return false;
        };
        if p > MAX_EXPONENT || q > MAX_EXPONENT {
            return false;
        }
        let lhs: BigRational = Pow::pow(exact[*j].clone(), q as u32);
        let rhs: BigRational = Pow::pow(exact[base].clone(), p as u32);
        lhs == rhs
    })
}

fn classify_memoryless(
    source: String,
    m: &Memoryless,
    budget: &ClassifyBudget,
    mut notes: Vec<String>,
) -> TamenessReport {
    let mut evidence = Vec::new();
    let poles = pole_search(m, budget.pole_t_max);
    let pole_found = !poles.poles.is_empty();
    let (verdict, grade, witness) = match classify_periodicity(m, budget.cf_depth) {
        Ok(profile) => {
            let (verdict, grade, witness, summary) = match &profile.verdict {
                PeriodicityVerdict::Periodic { common_denominator } => {
                    let ratios: Vec<(usize, String, String)> = profile
                        .ratios
                        .iter()
                        .filter_map(|r| r.profile.rational.clone().map(|(p, q)| (r.index, p, q)))
                        .collect();
                    let grade = if certify_periodic(m, profile.base_index, &ratios) {
                        Grade::Exact
                    } else {
                        Grade::Evidence
                    };
                    (
                        Verdict::Periodic,
                        grade,
                        None,
                        format!("all log-ratios rational with common denominator {common_denominator}"),
                    )
                }
                PeriodicityVerdict::AperiodicCandidate {
                    witness_index,
                    witness_ratio,
                } => (
                    Verdict::HTameCandidate,
                    Grade::Evidence,
                    Some(Witness {
                        description: format!(
                            "log p_{witness_index} / log p_{} has a non-terminating continued fraction",
                            profile.base_index
                        ),
                        value: *witness_ratio,
                        evidence_index: 0,
                    }),
                    format!(
                        "log-ratio {witness_ratio} shows no rational structure to depth {}",
                        budget.cf_depth
                    ),
                ),
            };
            evidence.push(Evidence::new("ratio-profile", grade, summary, &profile));
            (verdict, grade, witness)
        }
        Err(e) => {
            notes.push(format!("ratio profile: {e}"));
            (Verdict::Unresolved, Grade::Evidence, None)
        }
    };
    let agrees = match verdict {
        Verdict::Periodic => pole_found,
        Verdict::HTameCandidate => !pole_found,
        _ => true,
    };
    evidence.push(Evidence::new(
        "pole-search",
        Grade::Evidence,
        format!(
            "{} nonreal solutions of lambda(1+it) = 1 for 0 < t <= {}; min |1 - lambda| = {:.3e} at t = {:.6}",
            poles.poles.len(),
            poles.t_max,
            poles.min_modulus,
            poles.argmin
        ),
        &poles,
    ));
    if !agrees {
        notes.push("pole search disagrees with the arithmetic criterion within search resolution".into());
    }
    if verdict == Verdict::HTameCandidate {
        notes.push("simple sources are never S-tame".into());
    }
    TamenessReport {
        source,
        verdict,
        grade,
        witness,
        fluctuation: verdict == Verdict::Periodic,
        evidence,
        notes,
    }
}

#[derive(Debug, Clone, Serialize)]
struct UniRow {
    #[serde(flatten)]
    report: UniReport,
    ratio_to_threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ProbeSlope {
    probes: Vec<crate::transfer::ProbeValue>,
    log_log_slope: Option<f64>,
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// True when the profile looks diophantine: no exact rational and no huge
/// partial quotient within the explored depth.
fn diophantine_looking(d: &DiopQuantities, depth: usize) -> bool {
    d.profile.as_ref().is_some_and(|p| {
        p.rational.is_none() && p.partial_quotients.len() >= depth.min(20) && p.largest_partial_quotient.len() <= 6
    })
}

fn classify_dynamical(source: String, sys: &IntervalSystem, budget: &ClassifyBudget) -> TamenessReport {
    let mut evidence = Vec::new();
    let mut notes = Vec::new();

    let good = match sys.check_good_class(budget.probe_points) {
        Ok(g) => {
            let pass = g.g1 && g.g2 && g.g3;
            evidence.push(Evidence::new(
                "good-class",
                Grade::Evidence,
                format!(
                    "rho = {:.4}, A = {:.4}, G1 {} G2 {} G3 {}",
                    g.rho_hat, g.a_hat, g.g1, g.g2, g.g3
                ),
                &g,
            ));
            pass
        }
        Err(e) => {
            notes.push(format!("good class: {e}"));
            false
        }
    };

    let h1 = sys.branch_map(sys.alphabet()[0]);
    let h2 = sys.branch_map(sys.alphabet()[1]);
    let delta12 = uni_distance_exact(&h1, &h2);
    evidence.push(Evidence::new(
        "uni-distance",
        Grade::Evidence,
        format!("Delta(h1, h2) = inf |Psi'| on [0,1] = {delta12:.6}"),
        json!({ "first": sys.alphabet()[0], "second": sys.alphabet()[1], "delta": delta12 }),
    ));

    let mut rows = Vec::new();
    for &n in &budget.uni_depths {
        match sys.uni_probability_estimate(n, budget.uni_a, budget.seed) {
            Ok(r) => {
                let ratio = r.probability / r.threshold;
                rows.push(UniRow {
                    report: r,
                    ratio_to_threshold: ratio,
                })
            }
            Err(e) => notes.push(format!("UNI depth {n}: {e}")),
        }
    }
    let uni_bounded = !rows.is_empty() && rows.iter().all(|r| r.ratio_to_threshold <= budget.uni_ratio_bound);
    // the probability itself must decay at a rate comparable to rho^(an)
    let depths: Vec<f64> = rows.iter().map(|r| r.report.depth as f64).collect();
    let logs: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.report
                .probability
                .max(1.0 / r.report.pairs_examined.max(1) as f64)
                .ln()
        })
        .collect();
    let decay = least_squares_slope(&depths, &logs);
    let target = rows.first().map_or(0.0, |r| budget.uni_a * r.report.rho.ln());
    let uni_decays = decay.is_some_and(|d| d <= UNI_DECAY_FRACTION * target);
    let uni = good && !sys.is_affine() && delta12 > 0.0 && uni_bounded && uni_decays;
    let max_ratio = rows.iter().map(|r| r.ratio_to_threshold).fold(0.0, f64::max);
    let uni_index = evidence.len();
    evidence.push(Evidence::new(
        "uni-table",
        Grade::Evidence,
        format!(
            "max over depths of Pr[Delta <= rho^(an)] / rho^(an) = {max_ratio:.4} (bound {}); log Pr decays at {:.4} per depth against a log rho = {target:.4}",
            budget.uni_ratio_bound,
            decay.unwrap_or(f64::NAN)
        ),
        json!({ "rows": rows, "decay_rate": decay, "target_rate": target, "bounded": uni_bounded, "decays": uni_decays }),
    ));

    let mut diop = Vec::new();
    let mut branches = sys.branches_of_depth(1, budget.diop_width);
    branches.extend(sys.branches_of_depth(2, budget.diop_width));
    let k = branches.len();
    for i in 0..k {
        for j in i + 1..k {
            match sys.diop_quantities(&[branches[i].clone(), branches[j].clone()]) {
                Ok(d) => diop.push(d),
                Err(e) => notes.push(format!("DIOP pair {:?} {:?}: {e}", branches[i].word, branches[j].word)),
            }
            for l in j + 1..k {
                match sys.diop_quantities(&[branches[i].clone(), branches[j].clone(), branches[l].clone()]) {
                    Ok(d) => diop.push(d),
                    Err(e) => notes.push(format!(
                        "DIOP triple {:?} {:?} {:?}: {e}",
                        branches[i].word, branches[j].word, branches[l].word
                    )),
                }
            }
        }
    }
    let diop_witness = diop.iter().find(|d| diophantine_looking(d, budget.cf_depth)).cloned();
    let profiled: Vec<_> = diop.iter().filter_map(|d| d.profile.as_ref()).collect();
    if !profiled.is_empty() && profiled.iter().all(|p| p.rational.is_some()) {
        notes.push("every c-ratio is rational, as for systems conjugated to affine branches".into());
    }
    let diop_index = evidence.len();
    evidence.push(Evidence::new(
        "diop-ratios",
        Grade::Evidence,
        match &diop_witness {
            Some(d) => format!(
                "{} ratios examined; c-ratio {} of {:?} looks diophantine",
                diop.len(),
                d.ratio,
                d.words
            ),
            None => format!("{} ratios examined; none looks diophantine", diop.len()),
        },
        &diop,
    ));

    if !budget.probe_ts.is_empty() {
        let mut probes = Vec::new();
        for &t in &budget.probe_ts {
            match resolvent_norm_probe(sys, t, budget.probe_order) {
                Ok(p) => probes.push(p),
                Err(e) => notes.push(format!("probe t = {t}: {e}")),
            }
        }
        let xs: Vec<f64> = probes.iter().map(|p| p.t.abs().ln()).collect();
        let ys: Vec<f64> = probes.iter().map(|p| p.norm.ln()).collect();
        let slope = least_squares_slope(&xs, &ys);
        evidence.push(Evidence::new(
            "resolvent-probe",
            Grade::Evidence,
            match slope {
                Some(s) => format!("log-log slope of the discretized resolvent norm = {s:.3}"),
                None => "too few probe values for a slope".into(),
            },
            ProbeSlope {
                probes,
                log_log_slope: slope,
            },
        ));
    }

    let (verdict, witness) = if uni {
        (
            Verdict::STameCandidate,
            Some(Witness {
                description: "Delta(h1, h2)".into(),
                value: delta12,
                evidence_index: uni_index,
            }),
        )
    } else if let Some(d) = diop_witness {
        (
            Verdict::HTameCandidate,
            Some(Witness {
                description: format!("c-ratio of branches {:?}", d.words),
                value: d.ratio,
                evidence_index: diop_index,
            }),
        )
    } else {
        (Verdict::Unresolved, None)
    };
    TamenessReport {
        source,
        verdict,
        grade: Grade::Evidence,
        witness,
        fluctuation: false,
        evidence,
        notes,
    }
}

/// Error-term regime implied by a verdict.
pub fn error_regime(report: &TamenessReport) -> Regime {
    match report.verdict {
        Verdict::Periodic => Regime::Periodic,
        Verdict::STameCandidate => Regime::STame,
        Verdict::HTameCandidate => Regime::HTame,
        Verdict::Unresolved => Regime::Unknown,
    }
}

pub fn classify_builtin(name: &str) -> Result<TamenessReport> {
    let s = SourceModel::builtin(name).ok_or_else(|| Error::UnsupportedSource(name.into()))?;
    Ok(classify(&s, &ClassifyBudget::default()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memoryless_verdicts() {
        let b = ClassifyBudget::default();
        let r = classify(&SourceModel::builtin("uniform-binary").unwrap(), &b);
        assert_eq!(r.verdict, Verdict::Periodic);
        assert_eq!(r.grade, Grade::Exact);
        assert!(r.fluctuation);
        let r = classify(&SourceModel::builtin("dyadic").unwrap(), &b);
        assert_eq!(r.verdict, Verdict::Periodic);
        let r = classify(&SourceModel::builtin("thirds").unwrap(), &b);
        assert_eq!(r.verdict, Verdict::HTameCandidate);
        let w = r.witness.unwrap();
        assert!((w.value - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
        assert!(r.notes.iter().all(|n| !n.contains("disagrees")));
    }

    #[test]
    fn markov_is_unresolved() {
        let m = SourceModel::Markov(
            crate::simple::MarkovChain::new(vec![0.5, 0.5], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
        );
        let r = classify(&m, &ClassifyBudget::default());
        assert_eq!(r.verdict, Verdict::Unresolved);
        assert_eq!(error_regime(&r), Regime::Unknown);
    }

    #[test]
    fn shift_is_never_strongly_tame() {
        let r = classify(
            &SourceModel::builtin("binary-shift").unwrap(),
            &ClassifyBudget::default(),
        );
        assert_eq!(r.verdict, Verdict::Periodic);
    }

    #[test]
    fn gauss_is_strongly_tame_candidate() {
        let r = classify(&SourceModel::builtin("gauss").unwrap(), &ClassifyBudget::default());
        let j = serde_json::to_string_pretty(&r).unwrap();
        assert_eq!(r.verdict, Verdict::STameCandidate, "{j}");
        assert!(r.witness.as_ref().unwrap().value > 0.3);
        assert_eq!(error_regime(&r), Regime::STame);
        assert!(r.to_json()["evidence"].as_array().unwrap().len() >= 4);
    }
}
