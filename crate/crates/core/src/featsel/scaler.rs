use crate::error::{Error, Result};
use crate::flowdata::Dataset;

/// Per-feature extremes learned on the training split.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalerParams {
    pub names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// `(x - min) / (max - min)` clipped to `[0, 1]`; a constant column maps to 0.
#[inline]
pub fn scale_value(x: f64, min: f64, max: f64) -> f64 {
    let span = max - min;
    if span <= 0.0 {
        return 0.0;
    }
    ((x - min) / span).clamp(0.0, 1.0)
}

impl ScalerParams {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Scales one row whose values follow `names` order.
    pub fn scale_row(&self, row: &mut [f64]) {
        for ((x, &lo), &hi) in row.iter_mut().zip(&self.min).zip(&self.max) {
            *x = scale_value(*x, lo, hi);
        }
    }
}

pub fn fit_minmax(train: &Dataset) -> Result<ScalerParams> {
    if train.is_empty() {
        return Err(Error::Input("cannot fit a scaler on an empty dataset".into()));
    }
    let w = train.n_cols();
    let mut min = vec![f64::INFINITY; w];
    let mut max = vec![f64::NEG_INFINITY; w];
    for row in train.rows() {
        for j in 0..w {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
        }
    }
    Ok(ScalerParams {
        names: train.columns().to_vec(),
        min,
        max,
    })
}

pub fn apply_minmax(data: &Dataset, params: &ScalerParams) -> Result<Dataset> {
    if data.columns() != params.names.as_slice() {
        return Err(Error::Schema(format!(
            "scaler fitted on [{}] applied to [{}]",
            params.names.join(", "),
            data.columns().join(", ")
        )));
    }
    let mut values = data.values().to_vec();
    let w = data.n_cols().max(1);
    for row in values.chunks_exact_mut(w) {
        params.scale_row(row);
    }
    data.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdata::Profile;

    fn ds(cols: &[&str], values: Vec<f64>) -> Dataset {
        let n = values.len() / cols.len();
        Dataset::new(
            cols.iter().map(|s| s.to_string()).collect(),
            values,
            vec![0; n],
            vec!["a".into()],
            Profile::Custom,
        )
        .unwrap()
    }

    #[test]
    fn fit_and_apply_basic() {
        let d = ds(&["x"], vec![0.0, 5.0, 10.0]);
        let p = fit_minmax(&d).unwrap();
        assert_eq!((p.min[0], p.max[0]), (0.0, 10.0));
        assert_eq!(apply_minmax(&d, &p).unwrap().values(), [0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_and_two_columns() {
        let d = ds(&["c", "y"], vec![3.0, 1.0, 3.0, -1.0, 3.0, 0.0]);
        let p = fit_minmax(&d).unwrap();
        assert_eq!(p.min, [3.0, -1.0]);
        assert_eq!(p.max, [3.0, 1.0]);
        assert_eq!(apply_minmax(&d, &p).unwrap().column(0), [0.0; 3]);
    }

    #[test]
    fn out_of_range_clips() {
        let p = fit_minmax(&ds(&["x"], vec![0.0, 10.0])).unwrap();
        let test = ds(&["x"], vec![12.0, -3.0]);
        assert_eq!(apply_minmax(&test, &p).unwrap().values(), [1.0, 0.0]);
    }

    #[test]
    fn column_mismatch() {
        let p = fit_minmax(&ds(&["x"], vec![0.0])).unwrap();
        assert!(matches!(
            apply_minmax(&ds(&["y"], vec![0.0]), &p),
            Err(Error::Schema(_))
        ));
    }
}
