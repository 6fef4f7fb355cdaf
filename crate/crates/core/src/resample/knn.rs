/// Indices of the `k` rows nearest to `query` by Euclidean distance,
/// nearest first. `skip` is excluded (the query's own row); equal distances
/// resolve to the lower row index. `rows` is row-major with `width` columns.
pub fn k_nearest(rows: &[f64], width: usize, query: &[f64], k: usize, skip: Option<usize>) -> Vec<usize> {
    let n = rows.len().checked_div(width).unwrap_or(0);
    // (squared distance, index), kept sorted ascending.
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for i in 0..n {
        if Some(i) == skip {
            continue;
        }
        let row = &rows[i * width..(i + 1) * width];
        let bound = if best.len() == k { best[k - 1].0 } else { f64::INFINITY };
        let mut d = 0.0;
        let mut pruned = false;
        for (a, b) in row.iter().zip(query) {
            let diff = a - b;
            d += diff * diff;
            // Later indices lose ties, so an equal partial sum already disqualifies.
            if d >= bound {
                pruned = true;
                break;
            }
        }
        if pruned || k == 0 {
            continue;
        }
        let pos = best.partition_point(|&(bd, _)| bd <= d);
        best.insert(pos, (d, i));
        best.truncate(k);
    }
    best.into_iter().map(|(_, i)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_with_ties() {
        // Points on a line at 0, 1, 2, 3, -1
        let rows = [0.0, 1.0, 2.0, 3.0, -1.0];
        assert_eq!(k_nearest(&rows, 1, &[0.0], 2, Some(0)), vec![1, 4]);
        assert_eq!(k_nearest(&rows, 1, &[0.0], 3, Some(0)), vec![1, 4, 2]);
        assert_eq!(k_nearest(&rows, 1, &[1.0], 2, None), vec![1, 0]);
    }
}
