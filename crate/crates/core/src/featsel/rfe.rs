use std::fmt;

use super::{train_random_forest, ForestParams};
use crate::error::{Error, Result};
use crate::flowdata::Dataset;
use crate::rng::derive_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct RfeParams {
    pub target_k: usize,
    pub step: usize,
    pub forest: ForestParams,
}

impl Default for RfeParams {
    fn default() -> Self {
        RfeParams {
            target_k: 30,
            step: 1,
            forest: ForestParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRanking {
    /// First eliminated first.
    pub eliminated: Vec<String>,
    /// Survivors in original column order.
    pub selected: Vec<String>,
    /// Importances of a forest retrained on the survivors, descending.
    pub importances: Vec<(String, f64)>,
}

impl FeatureRanking {
    /// `<rank> <feature-name> <importance>` lines, most important first.
    pub fn importance_report(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FeatureRanking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (rank, (name, imp)) in self.importances.iter().enumerate() {
            writeln!(f, "{} {} {:.6}", rank + 1, name, imp)?;
        }
        Ok(())
    }
}

/// Recursive feature elimination: retrain, drop the `step` least important
/// features (equal importance: higher column index first), repeat until
/// `target_k` remain. Forest seeds are derived per round from
/// `params.forest.seed`.
pub fn rfe(data: &Dataset, params: &RfeParams) -> Result<FeatureRanking> {
    let total = data.n_cols();
    if params.target_k == 0 || params.target_k > total {
        return Err(Error::Parameter(format!(
            "target_k {} outside 1..={total}",
            params.target_k
        )));
    }
    if params.step == 0 {
        return Err(Error::Parameter("RFE step must be at least 1".into()));
    }

    let n_classes = data.class_names().len();
    let mut remaining: Vec<usize> = (0..total).collect();
    let mut eliminated = Vec::new();
    let mut round = 0u64;
    let fit = |cols: &[usize], round: u64| {
        let mut x = Vec::with_capacity(cols.len() * data.n_rows());
        for row in data.rows() {
            x.extend(cols.iter().map(|&j| row[j]));
        }
        let forest = ForestParams {
            seed: derive_seed(params.forest.seed, round),
            ..params.forest.clone()
        };
        train_random_forest(&x, cols.len(), data.labels(), n_classes, &forest)
    };

    while remaining.len() > params.target_k {
        let forest = fit(&remaining, round)?;
        round += 1;
        let mut order: Vec<usize> = (0..remaining.len()).collect();
        order.sort_by(|&a, &b| {
            forest.importances[a]
                .total_cmp(&forest.importances[b])
                .then(remaining[b].cmp(&remaining[a]))
        });
        let drop_n = params.step.min(remaining.len() - params.target_k);
        let mut dropped: Vec<usize> = order[..drop_n].to_vec();
        for &k in &dropped {
            eliminated.push(data.columns()[remaining[k]].clone());
        }
        dropped.sort_unstable();
        for &k in dropped.iter().rev() {
            remaining.remove(k);
        }
    }

    let forest = fit(&remaining, round)?;
    let mut importances: Vec<(usize, f64)> = remaining
        .iter()
        .zip(&forest.importances)
        .map(|(&j, &v)| (j, v))
        .collect();
    importances.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    Ok(FeatureRanking {
        eliminated,
        selected: remaining.iter().map(|&j| data.columns()[j].clone()).collect(),
        importances: importances
            .into_iter()
            .map(|(j, v)| (data.columns()[j].clone(), v))
            .collect(),
    })
}
