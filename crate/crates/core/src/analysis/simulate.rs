use super::CostKind;
use crate::error::{Error, Result};
use crate::source::SourceModel;
use crate::trees::{tree_costs, TreeCostReport};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub kind: CostKind,
    pub n: u64,
    pub trials: u64,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Costs of one trial: word i of trial t is stream t*n + i of `seed`.
pub fn simulate_trial_costs(
    source: &SourceModel,
    n: u64,
    trial: u64,
    seed: u64,
    max_len: usize,
) -> Result<TreeCostReport> {
    let mut words: Vec<_> = (0..n).map(|i| source.lazy_word(seed, trial * n + i, max_len)).collect();
    tree_costs(&mut words).map_err(|e| Error::TrialFailed {
        seed,
        trial,
        cause: Box::new(e),
    })
}

/// Monte Carlo estimates of E[R], E[C], E[B], in that order.
pub fn simulate_costs(
    source: &SourceModel,
    n: u64,
    trials: u64,
    max_len: usize,
    seed: u64,
) -> Result<Vec<MonteCarloEstimate>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let reports = (0..trials)
        .into_par_iter()
        .map(|t| simulate_trial_costs(source, n, t, seed, max_len))
        .collect::<Result<Vec<_>>>()?;
    Ok(CostKind::ALL
        .iter()
        .map(|&kind| {
            let (mut mean, mut m2) = (0.0, 0.0);
            for (i, r) in reports.iter().enumerate() {
                let x = match kind {
                    CostKind::R => r.trie_size,
                    CostKind::C => r.trie_path_length,
                    CostKind::B => r.bst_symbol_cost,
                } as f64;
                let delta = x - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (x - mean);
            }
            let stddev = if trials > 1 {
                (m2 / (trials - 1) as f64).sqrt()
            } else {
                0.0
            };
            MonteCarloEstimate {
                kind,
                n,
                trials,
                mean,
                stddev,
                stderr: stddev / (trials as f64).sqrt(),
                seed,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::DEFAULT_WORD_CAP;

    #[test]
    fn two_words_uniform_binary() {
        let u = SourceModel::builtin("uniform-binary").unwrap();
        let est = simulate_costs(&u, 2, 20_000, DEFAULT_WORD_CAP, 3).unwrap();
        for e in &est {
            let exact = if e.kind == CostKind::C { 4.0 } else { 2.0 };
            assert!((e.mean - exact).abs() < 4.0 * e.stderr, "{e:?}");
        }
    }

    #[test]
    fn reproducible_and_trivial_cases() {
        let g = SourceModel::builtin("gauss").unwrap();
        let a = simulate_costs(&g, 5, 1, DEFAULT_WORD_CAP, 11).unwrap();
        assert_eq!(a, simulate_costs(&g, 5, 1, DEFAULT_WORD_CAP, 11).unwrap());
        let one = simulate_costs(&g, 1, 10, DEFAULT_WORD_CAP, 11).unwrap();
        assert!(one.iter().all(|e| e.mean == 0.0));
    }

    #[test]
    fn word_cap_is_reported() {
        let u = SourceModel::builtin("uniform-binary").unwrap();
        let r = simulate_costs(&u, 64, 5, 2, 1);
        assert!(matches!(r, Err(Error::TrialFailed { .. })));
    }
}
