use rand::Rng as _;

use super::k_nearest;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// One SMOTE output row with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSample {
    pub row: Vec<f64>,
    /// Index of the base row within the class rows.
    pub base: usize,
    /// Index of the chosen neighbour within the class rows.
    pub neighbor: usize,
    pub lambda: f64,
}

/// `base + lambda * (neighbor - base)`.
pub fn interpolate(base: &[f64], neighbor: &[f64], lambda: f64) -> Vec<f64> {
    base.iter()
        .zip(neighbor)
        .map(|(&s, &n)| s + lambda * (n - s))
        .collect()
}

/// Synthesizes `n_synthetic` rows from the rows of a single class (row-major,
/// `width` columns). Base rows are taken round-robin; each sample picks one
/// of its base's `k` nearest same-class neighbours uniformly and a uniform
/// `lambda` in `[0, 1)`.
pub fn smote_samples(
    rows: &[f64],
    width: usize,
    k: usize,
    n_synthetic: usize,
    seed: u64,
) -> Result<Vec<SyntheticSample>> {
    if k == 0 {
        return Err(Error::Parameter("SMOTE k must be at least 1".into()));
    }
    if width == 0 || !rows.len().is_multiple_of(width) {
        return Err(Error::Shape(format!("{} values do not form rows of width {width}", rows.len())));
    }
    let n = rows.len() / width;
    if n_synthetic == 0 {
        return Ok(Vec::new());
    }
    if n < k + 1 {
        return Err(Error::InsufficientSamples {
            class: String::new(),
            rows: n,
            needed: k + 1,
        });
    }
    let row = |i: usize| &rows[i * width..(i + 1) * width];
    let mut rng = seeded(seed);
    let mut neighbours: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut out = Vec::with_capacity(n_synthetic);
    for j in 0..n_synthetic {
        let base = j % n;
        let nbrs = neighbours[base].get_or_insert_with(|| k_nearest(rows, width, row(base), k, Some(base)));
        let neighbor = nbrs[rng.random_range(0..nbrs.len())];
        let lambda: f64 = rng.random();
        out.push(SyntheticSample {
            row: interpolate(row(base), row(neighbor), lambda),
            base,
            neighbor,
            lambda,
        });
    }
    Ok(out)
}

/// Synthetic rows only; see [`smote_samples`].
pub fn smote(rows: &[f64], width: usize, k: usize, n_synthetic: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(smote_samples(rows, width, k, n_synthetic, seed)?
        .into_iter()
        .map(|s| s.row)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_midpoint() {
        assert_eq!(interpolate(&[0.0, 0.0], &[1.0, 1.0], 0.5), [0.5, 0.5]);
    }

    #[test]
    fn two_rows_k1_pair_each_other() {
        let s = smote_samples(&[0.0, 0.0, 1.0, 1.0], 2, 1, 4, 3).unwrap();
        assert_eq!(s.len(), 4);
        for (j, x) in s.iter().enumerate() {
            assert_eq!(x.base, j % 2);
            assert_eq!(x.neighbor, 1 - x.base);
            assert!((x.row[0] - x.row[1]).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&x.row[0]));
        }
    }

    #[test]
    fn zero_requested() {
        assert!(smote(&[0.0, 1.0], 1, 5, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            smote(&[0.0, 1.0, 2.0], 1, 3, 2, 1),
            Err(Error::InsufficientSamples { rows: 3, needed: 4, .. })
        ));
    }

    #[test]
    fn deterministic() {
        let rows: Vec<f64> = (0..40).map(|i| (i * 7 % 13) as f64).collect();
        assert_eq!(smote(&rows, 2, 3, 25, 9).unwrap(), smote(&rows, 2, 3, 25, 9).unwrap());
    }
}
