use super::k_nearest;
use crate::error::{Error, Result};

/// Per-row removal verdicts: `Some(disagreeing)` for rows of a prunable
/// class whose `k` nearest neighbours (self excluded) hold a strict majority
/// of other labels. All verdicts are computed against the full input.
pub fn enn_removals(
    rows: &[f64],
    width: usize,
    labels: &[usize],
    k: usize,
    prunable: &[bool],
) -> Result<Vec<Option<usize>>> {
    let n = labels.len();
    if k == 0 {
        return Err(Error::Parameter("ENN k must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::Parameter(format!("ENN k = {k} needs more than {k} rows, got {n}")));
    }
    if rows.len() != n * width {
        return Err(Error::Shape(format!("{} values for {n} rows of width {width}", rows.len())));
    }
    Ok((0..n)
        .map(|i| {
            if !prunable.get(labels[i]).copied().unwrap_or(false) {
                return None;
            }
            let nbrs = k_nearest(rows, width, &rows[i * width..(i + 1) * width], k, Some(i));
            let disagree = nbrs.iter().filter(|&&j| labels[j] != labels[i]).count();
            (2 * disagree > k).then_some(disagree)
        })
        .collect())
}

/// Indices of retained rows, ascending.
pub fn enn(rows: &[f64], width: usize, labels: &[usize], k: usize, prunable: &[bool]) -> Result<Vec<usize>> {
    Ok(enn_removals(rows, width, labels, k, prunable)?
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_none())
        .map(|(i, _)| i)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surrounded_point_removed() {
        // Row 0 (class 0) sits among three class-1 points.
        let rows = [0.0, 0.1, -0.1, 0.2, 10.0, 10.1, 10.2];
        let labels = [0, 1, 1, 1, 0, 0, 0];
        let kept = enn(&rows, 1, &labels, 3, &[true, false]).unwrap();
        assert_eq!(kept, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn protected_class_never_removed() {
        let rows = [0.0, 0.1, -0.1, 0.2];
        let labels = [0, 1, 1, 1];
        assert_eq!(enn(&rows, 1, &labels, 3, &[false, true]).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn k_too_large() {
        assert!(matches!(
            enn(&[0.0, 1.0, 2.0], 1, &[0, 0, 1], 3, &[true, true]),
            Err(Error::Parameter(_))
        ));
    }
}
