//! Dataset ingestion (LIBSVM text format), preprocessing, and synthetic
//! instance generation.
//!
//! The LIBSVM grammar accepted here: one example per line,
//! `label idx:val idx:val ...` with 1-based strictly ascending indices.
//! Blank lines are skipped and `#` starts a comment that runs to the end
//! of the line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::losses::Example;
use crate::sampling::SeededRng;
use crate::vector::{DenseVector, SparseVector};

/// An immutable collection of examples with a fixed dimension.
#[derive(Clone, Debug)]
pub struct Dataset {
    examples: Vec<Example>,
    dimension: usize,
    metadata: DatasetMeta,
}

/// Provenance and preprocessing flags carried alongside the examples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatasetMeta {
    /// Source path or generator description.
    pub source: String,
    /// Whether rows have been scaled to unit l2 norm.
    pub normalized: bool,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, dimension: usize, metadata: DatasetMeta) -> Result<Self, DataError> {
        if examples.is_empty() {
            return Err(DataError::Empty);
        }
        Ok(Dataset { examples, dimension, metadata })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn n(&self) -> usize {
        self.examples.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn metadata(&self) -> &DatasetMeta {
        &self.metadata
    }
}

/// Parses LIBSVM text; the dimension is the largest index seen.
pub fn parse_libsvm(reader: impl BufRead) -> Result<Dataset, DataError> {
    parse_libsvm_inner(reader, None)
}

/// Parses LIBSVM text with an explicit dimension, which may only extend
/// the observed one (never shrink it).
pub fn parse_libsvm_with_dim(reader: impl BufRead, dimension: usize) -> Result<Dataset, DataError> {
    parse_libsvm_inner(reader, Some(dimension))
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> DataError {
    DataError::Parse { line, column, message: message.into() }
}

fn parse_libsvm_inner(
    reader: impl BufRead,
    dim_override: Option<usize>,
) -> Result<Dataset, DataError> {
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0usize; // 1-based
    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let raw = line?;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => &raw[..],
        };
        if content.trim().is_empty() {
            continue;
        }

        let mut tokens = tokens_with_columns(content);
        let (label_col, label_tok) = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(line_no, label_col, format!("invalid label `{label_tok}`")))?;
        if !label.is_finite() {
            return Err(parse_err(line_no, label_col, "label must be finite"));
        }

        let mut pairs: Vec<(usize, f64)> = Vec::new();
        let mut prev_index = 0usize;
        for (col, tok) in tokens {
            let sep = tok.find(':').ok_or_else(|| {
                parse_err(line_no, col, format!("expected `index:value`, got `{tok}`"))
            })?;
            let (idx_str, val_str) = (&tok[..sep], &tok[sep + 1..]);
            let idx: usize = idx_str.parse().map_err(|_| {
                parse_err(line_no, col, format!("invalid feature index `{idx_str}`"))
            })?;
            if idx == 0 {
                return Err(parse_err(line_no, col, "feature indices are 1-based"));
            }
            if idx <= prev_index {
                return Err(parse_err(
                    line_no,
                    col,
                    format!("indices must be strictly ascending ({idx} after {prev_index})"),
                ));
            }
            let val: f64 = val_str.parse().map_err(|_| {
                parse_err(
                    line_no,
                    col + sep + 1,
                    format!("invalid feature value `{val_str}`"),
                )
            })?;
            if !val.is_finite() {
                return Err(parse_err(line_no, col + sep + 1, "feature value must be finite"));
            }
            prev_index = idx;
            pairs.push((idx - 1, val));
        }
        max_index = max_index.max(prev_index);
        rows.push((label, pairs));
    }

    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    let dimension = match dim_override {
        Some(d) if d < max_index => {
            return Err(DataError::DimensionTooSmall { requested: d, observed: max_index })
        }
        Some(d) => d,
        None => max_index,
    };

    let examples = rows
        .into_iter()
        .map(|(label, pairs)| {
            let features = SparseVector::from_pairs(dimension, pairs)
                .expect("indices validated during parse");
            Example::new(features, label)
        })
        .collect();
    Dataset::new(examples, dimension, DatasetMeta { source: String::new(), normalized: false })
}

/// Whitespace-separated tokens with their 1-based starting column.
fn tokens_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let bytes = line.as_bytes();
    let mut pos = 0usize;
    std::iter::from_fn(move || {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= bytes.len() {
            return None;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        Some((start + 1, &line[start..pos]))
    })
}

/// Writes a dataset in LIBSVM format with 1-based indices.
///
/// Values use the shortest representation that round-trips through `f64`,
/// so write-then-parse reproduces the dataset exactly.
pub fn write_libsvm(dataset: &Dataset, mut writer: impl Write) -> Result<(), DataError> {
    for ex in dataset.examples() {
        write!(writer, "{}", ex.label())?;
        for (idx, val) in ex.features().iter() {
            write!(writer, " {}:{}", idx + 1, val)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Scales every nonzero row to unit l2 norm; zero rows pass through.
/// Idempotent.
pub fn normalize_rows(dataset: &Dataset) -> Dataset {
    let examples = dataset
        .examples()
        .iter()
        .map(|ex| {
            let norm = ex.features().norm();
            if norm > 0.0 {
                Example::new(ex.features().scaled(1.0 / norm), ex.label())
            } else {
                ex.clone()
            }
        })
        .collect();
    let mut metadata = dataset.metadata().clone();
    metadata.normalized = true;
    Dataset { examples, dimension: dataset.dimension(), metadata }
}

/// How raw labels map to the `{+1, -1}` required by the logistic loss.
#[derive(Clone, Debug, PartialEq)]
pub enum PositiveClassRule {
    /// Labels equal to the value map to +1, all others to -1.
    PositiveValue(f64),
    /// Explicit map from raw label to +1 or -1; any observed label missing
    /// from the map is an error.
    Explicit(Vec<(f64, f64)>),
}

/// Maps dataset labels to `{+1, -1}` under the given rule.
pub fn binarize_labels(dataset: &Dataset, rule: &PositiveClassRule) -> Result<Dataset, DataError> {
    let mut examples = Vec::with_capacity(dataset.n());
    for ex in dataset.examples() {
        let mapped = match rule {
            PositiveClassRule::PositiveValue(v) => {
                if ex.label() == *v {
                    1.0
                } else {
                    -1.0
                }
            }
            PositiveClassRule::Explicit(map) => map
                .iter()
                .find(|(from, _)| *from == ex.label())
                .map(|(_, to)| *to)
                .ok_or(DataError::UnmappedLabel(ex.label()))?,
        };
        examples.push(Example::new(ex.features().clone(), mapped));
    }
    Dataset::new(examples, dataset.dimension(), dataset.metadata().clone())
}

/// Label-generation model for synthetic datasets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LabelModel {
    /// `b = +1` with probability `sigmoid(a^T w)`, else `-1`.
    Logistic,
    /// `b = a^T w + noise`, Gaussian noise with the given deviation.
    LinearNoise { noise_std: f64 },
}

/// Controls for the synthetic instance generator.
///
/// `scale_spread` is the ratio of the largest to smallest row norm; rows
/// are scaled geometrically across the dataset, so the per-component
/// Lipschitz constants spread by `scale_spread^2`. A spread of 1 keeps
/// every row norm equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    /// Nonzeros per row.
    pub nnz_per_row: usize,
    /// Ratio of largest to smallest row norm (>= 1).
    pub scale_spread: f64,
    /// Fraction of planted-weight coordinates forced to zero, in [0, 1].
    pub weight_sparsity: f64,
    pub label_model: LabelModel,
    pub seed: u64,
}

/// The weight vector the generator sampled labels from.
#[derive(Clone, Debug, Serialize)]
pub struct PlantedTruth {
    pub weights: DenseVector,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), DataError> {
        if self.n == 0 || self.d == 0 {
            return Err(DataError::InvalidSpec("n and d must be positive".into()));
        }
        if self.nnz_per_row == 0 || self.nnz_per_row > self.d {
            return Err(DataError::InvalidSpec(format!(
                "nnz_per_row must be in [1, d], got {}",
                self.nnz_per_row
            )));
        }
        if !(self.scale_spread >= 1.0) {
            return Err(DataError::InvalidSpec(format!(
                "scale_spread must be >= 1, got {}",
                self.scale_spread
            )));
        }
        if !(0.0..=1.0).contains(&self.weight_sparsity) {
            return Err(DataError::InvalidSpec(format!(
                "weight_sparsity must be in [0, 1], got {}",
                self.weight_sparsity
            )));
        }
        if let LabelModel::LinearNoise { noise_std } = self.label_model {
            if !(noise_std >= 0.0) {
                return Err(DataError::InvalidSpec(format!(
                    "noise_std must be nonnegative, got {noise_std}"
                )));
            }
        }
        Ok(())
    }
}

/// Generates a synthetic dataset; byte-deterministic for a fixed spec.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, PlantedTruth), DataError> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);

    // Planted weights: dense Gaussian entries, then a sparsity mask.
    let mut weights: Vec<f64> = (0..spec.d).map(|_| rng.standard_normal()).collect();
    let zeros = ((spec.d as f64) * spec.weight_sparsity).round() as usize;
    let mut coords: Vec<usize> = (0..spec.d).collect();
    // Fisher-Yates prefix shuffle picks which coordinates go to zero.
    for i in 0..zeros.min(spec.d) {
        let j = i + rng.below(spec.d - i);
        coords.swap(i, j);
        weights[coords[i]] = 0.0;
    }
    let weights = DenseVector::from_vec(weights).expect("finite by construction");

    let mut examples = Vec::with_capacity(spec.n);
    for row in 0..spec.n {
        // Geometric ramp of row norms from 1 to scale_spread.
        let scale = if spec.n == 1 {
            1.0
        } else {
            spec.scale_spread.powf(row as f64 / (spec.n - 1) as f64)
        };
        // Choose nnz_per_row support coordinates without replacement.
        let mut support: Vec<usize> = (0..spec.d).collect();
        for i in 0..spec.nnz_per_row {
            let j = i + rng.below(spec.d - i);
            support.swap(i, j);
        }
        let mut pairs: Vec<(usize, f64)> = support[..spec.nnz_per_row]
            .iter()
            .map(|&j| (j, rng.standard_normal()))
            .collect();
        pairs.sort_by_key(|&(j, _)| j);
        // Normalize to unit norm, then apply the profile scale.
        let norm = pairs.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut pairs {
                *v *= scale / norm;
            }
        }
        let features = SparseVector::from_pairs(spec.d, pairs).expect("sorted support");
        let margin = features.dot_dense(&weights);
        let label = match spec.label_model {
            LabelModel::Logistic => {
                let p = 1.0 / (1.0 + (-margin).exp());
                if rng.uniform() < p {
                    1.0
                } else {
                    -1.0
                }
            }
            LabelModel::LinearNoise { noise_std } => margin + noise_std * rng.standard_normal(),
        };
        examples.push(Example::new(features, label));
    }

    let metadata = DatasetMeta {
        source: format!("synthetic(seed={})", spec.seed),
        normalized: false,
    };
    let dataset = Dataset::new(examples, spec.d, metadata)?;
    Ok((dataset, PlantedTruth { weights, seed: spec.seed }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse_str(s: &str) -> Result<Dataset, DataError> {
        parse_libsvm(Cursor::new(s.as_bytes()))
    }

    #[test]
    fn parses_basic_line() {
        let ds = parse_str("+1 1:0.5 3:1.0\n").unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.dimension(), 3);
        let ex = &ds.examples()[0];
        assert_eq!(ex.label(), 1.0);
        let dense = ex.features().to_dense();
        assert_eq!(dense.as_slice(), &[0.5, 0.0, 1.0]);
    }

    #[test]
    fn empty_feature_line_is_valid() {
        let ds = parse_str("-1 1:2.0\n-1\n").unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.examples()[1].features().nnz(), 0);
    }

    #[test]
    fn comments_and_blank_lines_tolerated() {
        let ds = parse_str("# header\n\n+1 1:1.0 # trailing\n\n-1 2:3.0\n").unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.dimension(), 2);
    }

    #[test]
    fn rejects_malformed_with_position() {
        let err = parse_str("+1 1:0.5 oops\n").unwrap_err();
        match err {
            DataError::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert_eq!(column, 10);
            }
            other => panic!("unexpected error {other:?}"),
        }

        let err = parse_str("+1 2:1.0 1:0.5\n").unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 1, .. }));

        let err = parse_str("abc 1:0.5\n").unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 1, column: 1, .. }));

        let err = parse_str("+1 0:0.5\n").unwrap_err();
        assert!(matches!(err, DataError::Parse { .. }));

        assert!(matches!(parse_str(""), Err(DataError::Empty)));
        assert!(matches!(parse_str("# only comments\n"), Err(DataError::Empty)));
    }

    #[test]
    fn dimension_override_only_extends() {
        let ds = parse_libsvm_with_dim(Cursor::new(b"+1 1:1.0\n" as &[u8]), 10).unwrap();
        assert_eq!(ds.dimension(), 10);
        let err = parse_libsvm_with_dim(Cursor::new(b"+1 5:1.0\n" as &[u8]), 3).unwrap_err();
        assert!(matches!(err, DataError::DimensionTooSmall { requested: 3, observed: 5 }));
    }

    #[test]
    fn write_parse_round_trip() {
        let spec = SyntheticSpec {
            n: 20,
            d: 7,
            nnz_per_row: 3,
            scale_spread: 4.0,
            weight_sparsity: 0.4,
            label_model: LabelModel::LinearNoise { noise_std: 0.3 },
            seed: 99,
        };
        let (ds, _) = generate_synthetic(&spec).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&ds, &mut buf).unwrap();
        let reparsed = parse_libsvm_with_dim(Cursor::new(&buf), ds.dimension()).unwrap();
        assert_eq!(reparsed.n(), ds.n());
        for (a, b) in reparsed.examples().iter().zip(ds.examples()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn normalize_rows_unit_norm() {
        let ds = parse_str("+1 1:3.0 2:4.0\n-1\n").unwrap();
        let nds = normalize_rows(&ds);
        let dense = nds.examples()[0].features().to_dense();
        assert!((dense[0] - 0.6).abs() < 1e-15);
        assert!((dense[1] - 0.8).abs() < 1e-15);
        // Zero row untouched.
        assert_eq!(nds.examples()[1].features().nnz(), 0);
        assert!(nds.metadata().normalized);
        // Idempotent.
        let again = normalize_rows(&nds);
        for (a, b) in again.examples().iter().zip(nds.examples()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn normalized_logistic_rows_have_quarter_lipschitz() {
        use crate::losses::{logistic_component, SplittingMode};
        let ds = parse_str("+1 1:3.0 2:4.0\n-1 1:0.1\n").unwrap();
        let nds = normalize_rows(&ds);
        for ex in nds.examples() {
            let c = logistic_component(ex.clone(), 0.0, SplittingMode::L2InReg).unwrap();
            assert!((c.lipschitz_bound() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn binarize_rules() {
        let ds = parse_str("0 1:1.0\n1 1:2.0\n").unwrap();
        let out = binarize_labels(&ds, &PositiveClassRule::PositiveValue(1.0)).unwrap();
        let labels: Vec<f64> = out.examples().iter().map(|e| e.label()).collect();
        assert_eq!(labels, vec![-1.0, 1.0]);

        // Already +-1 stays unchanged.
        let pm = parse_str("+1 1:1.0\n-1 1:2.0\n").unwrap();
        let out = binarize_labels(&pm, &PositiveClassRule::PositiveValue(1.0)).unwrap();
        let labels: Vec<f64> = out.examples().iter().map(|e| e.label()).collect();
        assert_eq!(labels, vec![1.0, -1.0]);

        // Explicit map errors on unmapped labels, preserves counts otherwise.
        let three = parse_str("0 1:1.0\n2 1:2.0\n0 1:3.0\n").unwrap();
        let err = binarize_labels(
            &three,
            &PositiveClassRule::Explicit(vec![(0.0, -1.0)]),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::UnmappedLabel(v) if v == 2.0));
        let ok = binarize_labels(
            &three,
            &PositiveClassRule::Explicit(vec![(0.0, -1.0), (2.0, 1.0)]),
        )
        .unwrap();
        let pos = ok.examples().iter().filter(|e| e.label() == 1.0).count();
        let neg = ok.examples().iter().filter(|e| e.label() == -1.0).count();
        assert_eq!((pos, neg), (1, 2));
    }

    #[test]
    fn synthetic_deterministic_and_seed_sensitive() {
        let spec = SyntheticSpec {
            n: 15,
            d: 6,
            nnz_per_row: 2,
            scale_spread: 10.0,
            weight_sparsity: 0.5,
            label_model: LabelModel::Logistic,
            seed: 1,
        };
        let (a, ta) = generate_synthetic(&spec).unwrap();
        let (b, tb) = generate_synthetic(&spec).unwrap();
        assert_eq!(ta.weights.as_slice(), tb.weights.as_slice());
        for (x, y) in a.examples().iter().zip(b.examples()) {
            assert_eq!(x, y);
        }
        let other = SyntheticSpec { seed: 2, ..spec };
        let (c, _) = generate_synthetic(&other).unwrap();
        assert!(a.examples().iter().zip(c.examples()).any(|(x, y)| x != y));
    }

    #[test]
    fn scale_spread_one_gives_equal_norms() {
        let spec = SyntheticSpec {
            n: 30,
            d: 10,
            nnz_per_row: 4,
            scale_spread: 1.0,
            weight_sparsity: 0.0,
            label_model: LabelModel::Logistic,
            seed: 3,
        };
        let (ds, _) = generate_synthetic(&spec).unwrap();
        for ex in ds.examples() {
            assert!((ex.features().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_spread_drives_l_q_separation() {
        use crate::losses::{logistic_component, SplittingMode};
        use crate::sampling::SamplingDistribution;
        let spec = SyntheticSpec {
            n: 1000,
            d: 20,
            nnz_per_row: 5,
            scale_spread: 100.0,
            weight_sparsity: 0.0,
            label_model: LabelModel::Logistic,
            seed: 4,
        };
        let (ds, _) = generate_synthetic(&spec).unwrap();
        let lips: Vec<f64> = ds
            .examples()
            .iter()
            .map(|ex| {
                logistic_component(ex.clone(), 0.0, SplittingMode::L2InReg)
                    .unwrap()
                    .lipschitz_bound()
            })
            .collect();
        let uniform = SamplingDistribution::uniform(ds.n()).unwrap();
        let weighted = SamplingDistribution::lipschitz_weighted(&lips).unwrap();
        let lq_u = uniform.l_q(&lips).unwrap();
        let lq_w = weighted.l_q(&lips).unwrap();
        assert!(lq_u / lq_w >= 5.0, "L_Q ratio {} too small", lq_u / lq_w);
    }

    #[test]
    fn invalid_specs_rejected() {
        let base = SyntheticSpec {
            n: 5,
            d: 4,
            nnz_per_row: 2,
            scale_spread: 1.0,
            weight_sparsity: 0.0,
            label_model: LabelModel::Logistic,
            seed: 0,
        };
        assert!(generate_synthetic(&SyntheticSpec { n: 0, ..base.clone() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { nnz_per_row: 9, ..base.clone() }).is_err());
        assert!(
            generate_synthetic(&SyntheticSpec { scale_spread: 0.5, ..base.clone() }).is_err()
        );
        assert!(
            generate_synthetic(&SyntheticSpec { weight_sparsity: 1.5, ..base.clone() }).is_err()
        );
        assert!(generate_synthetic(&SyntheticSpec {
            label_model: LabelModel::LinearNoise { noise_std: -1.0 },
            ..base
        })
        .is_err());
    }
}
