//! Dataset construction and preprocessing: synthetic two-cluster data,
//! CSV ingestion, multicollinearity removal, standardization, feature
//! normalization, and index-set splitting.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major numeric dataset with binary labels.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    rows: Array2<f64>,
    labels: Vec<bool>,
    feature_names: Vec<String>,
}

impl FeatureMatrix {
    /// Build a matrix, enforcing the structural invariants: label count
    /// equals row count, all entries finite, at least one feature and two rows.
    pub fn new(rows: Array2<f64>, labels: Vec<bool>, feature_names: Vec<String>) -> Result<Self> {
        let (n, d) = rows.dim();
        if d < 1 {
            return Err(Error::InvalidData("need at least one feature".into()));
        }
        if n < 2 {
            return Err(Error::InvalidData("need at least two rows".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidData(format!(
                "label count {} does not match row count {}",
                labels.len(),
                n
            )));
        }
        if feature_names.len() != d {
            return Err(Error::InvalidData(format!(
                "feature name count {} does not match feature count {}",
                feature_names.len(),
                d
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        Ok(Self {
            rows,
            labels,
            feature_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of rows in each class, as (negatives, positives).
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l).count();
        (self.labels.len() - pos, pos)
    }

    /// New matrix containing the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<FeatureMatrix> {
        let n = self.n_rows();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidParameter(format!(
                "row index {bad} out of range for {n} rows"
            )));
        }
        let rows = self.rows.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        FeatureMatrix::new(rows, labels, self.feature_names.clone())
    }
}

/// Disjoint index sets partitioning a dataset between the model owner and
/// the adversary.
#[derive(Debug, Clone)]
pub struct SplitSpec {
    pub owner_train: Vec<usize>,
    pub owner_test: Vec<usize>,
    pub adversary_pool: Vec<usize>,
    pub seed: u64,
}

/// Requested sizes for the three index sets of a [`SplitSpec`].
#[derive(Debug, Clone, Copy)]
pub struct SplitSizes {
    pub owner_train: usize,
    pub owner_test: usize,
    pub adversary_pool: usize,
}

/// Generate a synthetic binary task: two distinct vertices of the
/// d-dimensional unit hypercube are chosen at random, and each class draws
/// `n/2` points from a unit-variance isotropic Gaussian centered at its
/// vertex.
pub fn generate_synthetic(d: usize, n: usize, seed: u64) -> Result<FeatureMatrix> {
    if d < 1 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n must be even and at least 2, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertex_0: Vec<f64> = (0..d).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
    let vertex_1: Vec<f64> = loop {
        let v: Vec<f64> = (0..d).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
        if v != vertex_0 {
            break v;
        }
    };

    let half = n / 2;
    let mut rows = Array2::<f64>::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (vertex, label) = if i < half {
            (&vertex_0, false)
        } else {
            (&vertex_1, true)
        };
        for j in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            rows[[i, j]] = vertex[j] + noise;
        }
        labels.push(label);
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    FeatureMatrix::new(rows, labels, names)
}

/// Load a comma-delimited UTF-8 file with a header row.
///
/// Non-label columns whose first data value parses as a finite number become
/// features; rows with unparseable values in a feature column are rejected.
/// The label column must take at most two distinct values among usable rows,
/// and maps to 1 where it equals `positive_label`.
pub fn load_csv(path: &Path, label_column: &str, positive_label: &str) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::InvalidData(format!("{}: empty input", path.display())));
    }
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::InvalidData(format!("label column '{label_column}' not found")))?;

    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()?;
    let first = records
        .iter()
        .find(|r| r.len() == headers.len())
        .ok_or_else(|| Error::InvalidData("no usable data rows".into()))?;

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| j != label_idx)
        .filter(|&j| first[j].trim().parse::<f64>().map(|v| v.is_finite()).unwrap_or(false))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::InvalidData("no numeric feature columns".into()));
    }

    let mut flat = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for record in &records {
        if record.len() != headers.len() {
            continue;
        }
        let parsed: Option<Vec<f64>> = feature_cols
            .iter()
            .map(|&j| record[j].trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        if let Some(values) = parsed {
            flat.extend(values);
            raw_labels.push(record[label_idx].to_string());
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::InvalidData("no usable data rows".into()));
    }

    let mut distinct: Vec<&String> = Vec::new();
    for l in &raw_labels {
        if !distinct.contains(&l) {
            distinct.push(l);
        }
    }
    if distinct.len() > 2 {
        return Err(Error::InvalidData(format!(
            "label column has {} distinct values; expected at most 2",
            distinct.len()
        )));
    }

    let n = raw_labels.len();
    let rows = Array2::from_shape_vec((n, feature_cols.len()), flat)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    let labels = raw_labels.iter().map(|l| l == positive_label).collect();
    let names = feature_cols.iter().map(|&j| headers[j].to_string()).collect();
    FeatureMatrix::new(rows, labels, names)
}

const CONSTANT_VAR_EPS: f64 = 1e-24;

/// The preprocessing pipeline applied before any model fitting:
///
/// 1. walk features in column order and drop any whose absolute Pearson
///    correlation with an already-kept feature exceeds `corr_threshold`;
/// 2. standardize kept features to zero mean and unit population variance,
///    dropping constant columns;
/// 3. rescale each feature column to unit l2 norm.
pub fn preprocess(data: &FeatureMatrix, corr_threshold: f64) -> Result<FeatureMatrix> {
    if !(corr_threshold > 0.0 && corr_threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "corr_threshold must lie in (0, 1], got {corr_threshold}"
        )));
    }
    let n = data.n_rows();
    let d = data.n_features();
    let nf = n as f64;

    let mut standardized: Vec<Array1<f64>> = Vec::new();
    let mut kept_names: Vec<String> = Vec::new();
    for j in 0..d {
        let col = data.rows.column(j);
        let mean = col.sum() / nf;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        if var <= CONSTANT_VAR_EPS {
            continue;
        }
        let sd = var.sqrt();
        let z: Array1<f64> = col.iter().map(|v| (v - mean) / sd).collect();
        // Pearson correlation of standardized columns is dot/n.
        let correlated = standardized
            .iter()
            .any(|kept| (kept.dot(&z) / nf).abs() > corr_threshold);
        if correlated {
            continue;
        }
        standardized.push(z);
        kept_names.push(data.feature_names[j].clone());
    }
    if standardized.is_empty() {
        return Err(Error::InvalidData(
            "preprocessing dropped all features".into(),
        ));
    }

    let kept = standardized.len();
    let mut out = Array2::<f64>::zeros((n, kept));
    for (j, z) in standardized.iter().enumerate() {
        let norm = z.dot(z).sqrt();
        for i in 0..n {
            out[[i, j]] = z[i] / norm;
        }
    }
    FeatureMatrix::new(out, data.labels.clone(), kept_names)
}

/// Draw three disjoint uniform-random index sets of the requested sizes.
/// Deterministic given the seed.
pub fn split(data: &FeatureMatrix, sizes: SplitSizes, seed: u64) -> Result<SplitSpec> {
    let n = data.n_rows();
    let total = sizes.owner_train + sizes.owner_test + sizes.adversary_pool;
    if total > n {
        return Err(Error::InvalidParameter(format!(
            "requested split sizes sum to {total} but only {n} rows are available"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let owner_train = order[..sizes.owner_train].to_vec();
    let owner_test = order[sizes.owner_train..sizes.owner_train + sizes.owner_test].to_vec();
    let adversary_pool = order[sizes.owner_train + sizes.owner_test..total].to_vec();
    Ok(SplitSpec {
        owner_train,
        owner_test,
        adversary_pool,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write;

    #[test]
    fn synthetic_shapes_and_balance() {
        let data = generate_synthetic(2, 4, 1).unwrap();
        assert_eq!(data.n_rows(), 4);
        assert_eq!(data.n_features(), 2);
        assert_eq!(data.class_counts(), (2, 2));
    }

    #[test]
    fn synthetic_rejects_bad_parameters() {
        assert!(generate_synthetic(0, 4, 1).is_err());
        assert!(generate_synthetic(2, 5, 1).is_err());
    }

    #[test]
    fn synthetic_class_means_near_vertices() {
        // Law of large numbers: per-class empirical means land within 0.1
        // (per coordinate) of the generating vertex at n = 5000.
        let data = generate_synthetic(100, 5000, 77).unwrap();
        for class in [false, true] {
            let idx: Vec<usize> = data
                .labels()
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == class)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(idx.len(), 2500);
            for j in 0..100 {
                let mean: f64 =
                    idx.iter().map(|&i| data.rows()[[i, j]]).sum::<f64>() / idx.len() as f64;
                // The vertex coordinate is whichever of {0, 1} is nearer.
                let vertex = mean.round();
                assert!(vertex == 0.0 || vertex == 1.0);
                assert!((mean - vertex).abs() < 0.1, "coordinate {j}: {mean}");
            }
        }
    }

    #[test]
    fn synthetic_degenerate_size() {
        let data = generate_synthetic(1, 2, 3).unwrap();
        let a = data.rows()[[0, 0]];
        let b = data.rows()[[1, 0]];
        // One point per vertex; vertices are 0 and 1 in some order.
        assert!((a - b).abs() > f64::EPSILON);
    }

    #[test]
    fn synthetic_is_bit_reproducible() {
        let a = generate_synthetic(5, 10, 99).unwrap();
        let b = generate_synthetic(5, 10, 99).unwrap();
        assert_eq!(a.rows(), b.rows());
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn preprocess_drops_duplicate_column() {
        let rows = ndarray::array![[1.0, 1.0, 0.5], [2.0, 2.0, 0.1], [3.0, 3.0, 0.9]];
        let data = FeatureMatrix::new(
            rows,
            vec![false, true, false],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let out = preprocess(&data, 0.95).unwrap();
        assert_eq!(out.feature_names(), &["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn preprocess_single_column_fixture() {
        // {1,2,3}: mean 2, population sd sqrt(2/3); after the unit-norm
        // rescale the column is (-1/sqrt(2), 0, +1/sqrt(2)).
        let rows = ndarray::array![[1.0], [2.0], [3.0]];
        let data = FeatureMatrix::new(rows, vec![false, true, true], vec!["a".into()]).unwrap();
        let out = preprocess(&data, 0.95).unwrap();
        let expected = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(out.rows()[[0, 0]], -expected, epsilon = 1e-12);
        assert_abs_diff_eq!(out.rows()[[1, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.rows()[[2, 0]], expected, epsilon = 1e-12);
    }

    #[test]
    fn preprocess_two_point_column() {
        let rows = ndarray::array![[-1.0], [1.0]];
        let data = FeatureMatrix::new(rows, vec![false, true], vec!["a".into()]).unwrap();
        let out = preprocess(&data, 0.95).unwrap();
        let expected = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(out.rows()[[0, 0]], -expected, epsilon = 1e-12);
        assert_abs_diff_eq!(out.rows()[[1, 0]], expected, epsilon = 1e-12);
    }

    #[test]
    fn preprocess_drops_constant_columns_and_errors_when_empty() {
        let rows = ndarray::array![[1.0, 5.0], [1.0, 5.0], [1.0, 5.0]];
        let data = FeatureMatrix::new(
            rows,
            vec![false, true, false],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert!(preprocess(&data, 0.95).is_err());
    }

    #[test]
    fn preprocess_unit_norm_and_idempotent() {
        let data = generate_synthetic(6, 40, 5).unwrap();
        let once = preprocess(&data, 0.95).unwrap();
        for j in 0..once.n_features() {
            let norm = once.rows().column(j).dot(&once.rows().column(j)).sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-9);
        }
        let twice = preprocess(&once, 0.95).unwrap();
        assert_eq!(once.n_features(), twice.n_features());
        for (a, b) in once.rows().iter().zip(twice.rows().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn split_is_disjoint_and_deterministic() {
        let data = generate_synthetic(3, 10, 11).unwrap();
        let sizes = SplitSizes {
            owner_train: 4,
            owner_test: 3,
            adversary_pool: 3,
        };
        let a = split(&data, sizes, 21).unwrap();
        let b = split(&data, sizes, 21).unwrap();
        assert_eq!(a.owner_train, b.owner_train);
        assert_eq!(a.owner_test, b.owner_test);
        assert_eq!(a.adversary_pool, b.adversary_pool);

        let mut all: Vec<usize> = a
            .owner_train
            .iter()
            .chain(&a.owner_test)
            .chain(&a.adversary_pool)
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn split_rejects_oversized_request() {
        let data = generate_synthetic(3, 10, 11).unwrap();
        let sizes = SplitSizes {
            owner_train: 6,
            owner_test: 6,
            adversary_pool: 0,
        };
        assert!(split(&data, sizes, 21).is_err());
    }

    fn write_temp_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_csv_maps_labels() {
        let f = write_temp_csv("a,b,y\n1.0,2.0,yes\n3.0,4.0,no\n5.0,6.0,yes\n");
        let data = load_csv(f.path(), "y", "yes").unwrap();
        assert_eq!(data.n_rows(), 3);
        assert_eq!(data.n_features(), 2);
        assert_eq!(data.labels(), &[true, false, true]);
    }

    #[test]
    fn load_csv_rejects_three_label_values() {
        let f = write_temp_csv("a,y\n1.0,yes\n2.0,no\n3.0,maybe\n");
        assert!(load_csv(f.path(), "y", "yes").is_err());
    }

    #[test]
    fn load_csv_rejects_empty_file() {
        let f = write_temp_csv("");
        assert!(load_csv(f.path(), "y", "yes").is_err());
    }

    #[test]
    fn load_csv_missing_label_column() {
        let f = write_temp_csv("a,b\n1.0,2.0\n");
        assert!(load_csv(f.path(), "y", "yes").is_err());
    }

    #[test]
    fn load_csv_skips_unparseable_rows_and_text_columns() {
        let f = write_temp_csv("id,a,y\nalpha,1.0,yes\nbeta,bad,no\ngamma,3.0,yes\n");
        let data = load_csv(f.path(), "y", "yes").unwrap();
        // 'id' is non-numeric and ignored; the 'bad' row is rejected.
        assert_eq!(data.n_rows(), 2);
        assert_eq!(data.n_features(), 1);
        assert_eq!(data.labels(), &[true, true]);
    }

    #[test]
    fn select_rows_validates_indices() {
        let data = generate_synthetic(2, 4, 1).unwrap();
        assert!(data.select_rows(&[0, 9]).is_err());
        let sub = data.select_rows(&[2, 0]).unwrap();
        assert_eq!(sub.n_rows(), 2);
        assert_eq!(sub.labels()[0], data.labels()[2]);
    }
}
