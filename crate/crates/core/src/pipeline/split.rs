use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::flowdata::Dataset;
use crate::rng::{derive_seed, seeded};

/// Stratified train/test row indices: per class, `round(frac · n)` rows
/// (kept within `1..n`) go to training, after a seeded shuffle. Both index
/// lists are ascending.
pub fn split_indices(data: &Dataset, train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::Parameter(format!("train fraction {train_frac} outside (0, 1)")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.class_names().len()];
    for (i, &l) in data.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut rows) in by_class.into_iter().enumerate() {
        let n = rows.len();
        if n == 0 {
            continue;
        }
        if n == 1 {
            return Err(Error::Stratification(format!(
                "class {:?} has a single row",
                data.class_names()[class]
            )));
        }
        rows.shuffle(&mut seeded(derive_seed(seed, class as u64)));
        let k = ((train_frac * n as f64).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&rows[..k]);
        test.extend_from_slice(&rows[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(data: &Dataset, train_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data, train_frac, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::flowdata::Profile;

    fn labelled(labels: Vec<usize>, classes: usize) -> Dataset {
        let n = labels.len();
        Dataset::new(
            vec!["x".into()],
            (0..n).map(|i| i as f64).collect(),
            labels,
            (0..classes).map(|c| format!("c{c}")).collect(),
            Profile::Custom,
        )
        .unwrap()
    }

    #[test]
    fn balanced_hundred() {
        let d = labelled((0..100).map(|i| i % 2).collect(), 2);
        let (train, test) = split(&d, 0.8, 1).unwrap();
        assert_eq!((train.n_rows(), test.n_rows()), (80, 20));
        assert_eq!(train.class_counts(), [40, 40]);
        assert_eq!(test.class_counts(), [10, 10]);
        assert_eq!(split_indices(&d, 0.8, 1).unwrap(), split_indices(&d, 0.8, 1).unwrap());
        assert_ne!(split_indices(&d, 0.8, 1).unwrap(), split_indices(&d, 0.8, 2).unwrap());
    }

    #[test]
    fn singleton_class() {
        let d = labelled(vec![0, 0, 0, 1], 2);
        assert!(matches!(split(&d, 0.8, 0), Err(Error::Stratification(_))));
    }

    proptest! {
        #[test]
        fn stratified_partition(counts in prop::collection::vec(2usize..40, 1..5), seed in any::<u64>()) {
            let labels: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
            let d = labelled(labels, counts.len());
            let (tr, te) = split_indices(&d, 0.8, seed).unwrap();
            let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..d.n_rows()).collect::<Vec<_>>());
            for (c, &n) in counts.iter().enumerate() {
                let k = tr.iter().filter(|&&i| d.labels()[i] == c).count() as f64;
                let target = 0.8 * n as f64;
                prop_assert!(k == target.floor() || k == target.ceil());
            }
        }
    }
}
