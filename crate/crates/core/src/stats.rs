//! Core association-test statistics.
//!
//! Pure functions over embedding vectors:
//! - [`cosine`] — cosine similarity, clamped to [-1, 1]
//! - [`association_score`] — differential association of a word with two attribute sets
//! - [`effect_size`] — standardized bias score between two target sets (Cohen's-d scale)
//! - [`within_variance`] / [`between_variance`] — variance components for the random-effects model
//! - [`combined_effect_size`] — inverse-variance weighted mean over contextual samples
//! - [`interpret_magnitude`] — Cohen's d benchmark labels
//! - [`pearson`] — sample Pearson correlation
//!
//! Everything here is deterministic and side-effect free; all functions are safe
//! to call concurrently.

use serde::{Deserialize, Serialize};

/// Errors from the statistics layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("embedding vector must have at least one component")]
    EmptyVector,
    #[error("embedding component {index} is not finite ({value})")]
    NonFiniteComponent { index: usize, value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine similarity is undefined for a zero-norm vector")]
    ZeroNormVector,
    #[error("attribute sets must be non-empty")]
    EmptyAttributeSet,
    #[error("target sets must be equal-sized and non-empty (got |X|={x}, |Y|={y})")]
    UnbalancedTargets { x: usize, y: usize },
    #[error("association scores over X \u{222a} Y have zero variance; stimuli are degenerate")]
    DegenerateVariance,
    #[error("effect-size sample {index} has non-positive within-sample variance ({value})")]
    NonPositiveVariance { index: usize, value: f64 },
    #[error("need at least one effect-size sample")]
    NoSamples,
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("correlation needs at least two points (got {0})")]
    TooFewPoints(usize),
    #[error("correlation is undefined for a constant series")]
    ConstantSeries,
}

/// A fixed-dimension embedding with finite components.
///
/// The constructor rejects empty vectors and non-finite components, so every
/// value of this type is safe input for the similarity math below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector {
    components: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(components: Vec<f64>) -> Result<Self, StatsError> {
        if components.is_empty() {
            return Err(StatsError::EmptyVector);
        }
        for (index, &value) in components.iter().enumerate() {
            if !value.is_finite() {
                return Err(StatsError::NonFiniteComponent { index, value });
            }
        }
        Ok(Self { components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Returns a unit-length copy, or `ZeroNormVector` if the norm is 0.
    pub fn normalized(&self) -> Result<Self, StatsError> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(StatsError::ZeroNormVector);
        }
        Ok(Self {
            components: self.components.iter().map(|c| c / norm).collect(),
        })
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = StatsError;

    fn try_from(components: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(components)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(vector: EmbeddingVector) -> Self {
        vector.components
    }
}

/// Embeddings for one contextual sample: target sets X/Y and attribute sets A/B.
///
/// Construction enforces |X| = |Y| >= 1, |A| = |B| >= 1 and a single shared
/// dimension across all four sets.
#[derive(Debug, Clone)]
pub struct StimulusEmbeddings {
    x: Vec<EmbeddingVector>,
    y: Vec<EmbeddingVector>,
    a: Vec<EmbeddingVector>,
    b: Vec<EmbeddingVector>,
}

impl StimulusEmbeddings {
    pub fn new(
        x: Vec<EmbeddingVector>,
        y: Vec<EmbeddingVector>,
        a: Vec<EmbeddingVector>,
        b: Vec<EmbeddingVector>,
    ) -> Result<Self, StatsError> {
        if x.is_empty() || x.len() != y.len() {
            return Err(StatsError::UnbalancedTargets {
                x: x.len(),
                y: y.len(),
            });
        }
        if a.is_empty() || b.is_empty() {
            return Err(StatsError::EmptyAttributeSet);
        }
        if a.len() != b.len() {
            return Err(StatsError::DimensionMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let dimension = x[0].dimension();
        for vector in x.iter().chain(&y).chain(&a).chain(&b) {
            if vector.dimension() != dimension {
                return Err(StatsError::DimensionMismatch {
                    left: dimension,
                    right: vector.dimension(),
                });
            }
        }
        Ok(Self { x, y, a, b })
    }

    pub fn targets_x(&self) -> &[EmbeddingVector] {
        &self.x
    }

    pub fn targets_y(&self) -> &[EmbeddingVector] {
        &self.y
    }

    pub fn attributes_a(&self) -> &[EmbeddingVector] {
        &self.a
    }

    pub fn attributes_b(&self) -> &[EmbeddingVector] {
        &self.b
    }
}

/// One contextual sample's effect size with its within-sample variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSizeSample {
    pub es: f64,
    pub within_variance: f64,
    pub sample_index: usize,
}

impl EffectSizeSample {
    pub fn new(es: f64, within_variance: f64, sample_index: usize) -> Result<Self, StatsError> {
        if !es.is_finite() {
            return Err(StatsError::NonFiniteComponent {
                index: sample_index,
                value: es,
            });
        }
        if within_variance.is_nan() || within_variance <= 0.0 {
            return Err(StatsError::NonPositiveVariance {
                index: sample_index,
                value: within_variance,
            });
        }
        Ok(Self {
            es,
            within_variance,
            sample_index,
        })
    }
}

/// Magnitude label under the Cohen's d benchmarks 0.2 / 0.5 / 0.8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MagnitudeLabel {
    Negligible,
    Small,
    Medium,
    Large,
}

impl MagnitudeLabel {
    /// The three benchmark cutoffs the bands are built from.
    pub const CUTOFFS: [f64; 3] = [0.2, 0.5, 0.8];

    pub fn as_str(self) -> &'static str {
        match self {
            MagnitudeLabel::Negligible => "negligible",
            MagnitudeLabel::Small => "small",
            MagnitudeLabel::Medium => "medium",
            MagnitudeLabel::Large => "large",
        }
    }
}

impl std::fmt::Display for MagnitudeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of combining per-sample effect sizes under the random-effects model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedEffect {
    pub ces: f64,
    pub between_variance: f64,
    pub weights: Vec<f64>,
    pub n_samples: usize,
    pub magnitude: MagnitudeLabel,
}

/// Sample Pearson correlation, clamped to [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n_points: usize,
}

/// Cosine similarity `dot(u, v) / (|u| * |v|)`, clamped to [-1, 1] to absorb
/// floating-point overshoot.
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, StatsError> {
    if u.dimension() != v.dimension() {
        return Err(StatsError::DimensionMismatch {
            left: u.dimension(),
            right: v.dimension(),
        });
    }
    let mut dot = 0.0;
    let mut norm_u = 0.0;
    let mut norm_v = 0.0;
    for (cu, cv) in u.components.iter().zip(&v.components) {
        dot += cu * cv;
        norm_u += cu * cu;
        norm_v += cv * cv;
    }
    if norm_u == 0.0 || norm_v == 0.0 {
        return Err(StatsError::ZeroNormVector);
    }
    Ok((dot / (norm_u.sqrt() * norm_v.sqrt())).clamp(-1.0, 1.0))
}

/// Association score `s(w, A, B)`: mean cosine of `w` against A minus mean
/// cosine against B. Positive values mean `w` sits closer to A.
pub fn association_score(
    w: &EmbeddingVector,
    a: &[EmbeddingVector],
    b: &[EmbeddingVector],
) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyAttributeSet);
    }
    let mean_a = mean_cosine(w, a)?;
    let mean_b = mean_cosine(w, b)?;
    Ok(mean_a - mean_b)
}

fn mean_cosine(w: &EmbeddingVector, set: &[EmbeddingVector]) -> Result<f64, StatsError> {
    let mut total = 0.0;
    for vector in set {
        total += cosine(w, vector)?;
    }
    Ok(total / set.len() as f64)
}

/// Effect size for one contextual sample:
///
/// `ES = (mean_{x in X} s(x) - mean_{y in Y} s(y)) / std_dev_{w in X u Y} s(w)`
///
/// where `s` is [`association_score`] against A/B. The denominator is the
/// sample standard deviation (n-1). A zero denominator signals malformed
/// stimuli (e.g. A = B) and is reported as `DegenerateVariance`.
pub fn effect_size(stimuli: &StimulusEmbeddings) -> Result<f64, StatsError> {
    let scores_x: Vec<f64> = stimuli
        .x
        .iter()
        .map(|w| association_score(w, &stimuli.a, &stimuli.b))
        .collect::<Result<_, _>>()?;
    let scores_y: Vec<f64> = stimuli
        .y
        .iter()
        .map(|w| association_score(w, &stimuli.a, &stimuli.b))
        .collect::<Result<_, _>>()?;

    let mean_x = mean(&scores_x);
    let mean_y = mean(&scores_y);

    let pooled: Vec<f64> = scores_x.iter().chain(&scores_y).copied().collect();
    let std_dev = sample_std_dev(&pooled);
    if std_dev == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok((mean_x - mean_y) / std_dev)
}

/// Within-sample variance of a standardized mean difference:
///
/// `(n_x + n_y) / (n_x * n_y) + es^2 / (2 * (n_x + n_y))`
///
/// # Panics
///
/// If `n_x` or `n_y` is zero.
pub fn within_variance(es: f64, n_x: usize, n_y: usize) -> f64 {
    assert!(n_x >= 1 && n_y >= 1, "target sets must be non-empty");
    let (n_x, n_y) = (n_x as f64, n_y as f64);
    (n_x + n_y) / (n_x * n_y) + es * es / (2.0 * (n_x + n_y))
}

/// DerSimonian-Laird between-sample variance (tau^2), clamped at 0.
///
/// With fixed weights `w_i = 1 / within_variance_i` and fixed-effect mean
/// `M = sum(w_i * ES_i) / sum(w_i)`:
///
/// `Q = sum(w_i * (ES_i - M)^2)`, `c = sum(w_i) - sum(w_i^2) / sum(w_i)`,
/// `tau^2 = max(0, (Q - (n - 1)) / c)`.
///
/// A single sample carries no heterogeneity information and yields 0.
pub fn between_variance(samples: &[EffectSizeSample]) -> f64 {
    if samples.len() <= 1 {
        return 0.0;
    }
    let weights: Vec<f64> = samples.iter().map(|s| 1.0 / s.within_variance).collect();
    let weight_sum: f64 = weights.iter().sum();
    let fixed_mean = samples
        .iter()
        .zip(&weights)
        .map(|(s, w)| w * s.es)
        .sum::<f64>()
        / weight_sum;
    let q: f64 = samples
        .iter()
        .zip(&weights)
        .map(|(s, w)| w * (s.es - fixed_mean).powi(2))
        .sum();
    let c = weight_sum - weights.iter().map(|w| w * w).sum::<f64>() / weight_sum;
    if c <= 0.0 {
        return 0.0;
    }
    ((q - (samples.len() as f64 - 1.0)) / c).max(0.0)
}

/// Combined effect size over contextual samples:
///
/// `CES = sum(v_i * ES_i) / sum(v_i)` with `v_i = 1 / (within_i + tau^2)`.
///
/// The weights are inverse total variances under the random-effects model;
/// the magnitude label comes from [`interpret_magnitude`].
pub fn combined_effect_size(samples: &[EffectSizeSample]) -> Result<CombinedEffect, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::NoSamples);
    }
    for sample in samples {
        if sample.within_variance.is_nan() || sample.within_variance <= 0.0 {
            return Err(StatsError::NonPositiveVariance {
                index: sample.sample_index,
                value: sample.within_variance,
            });
        }
    }
    let tau_squared = between_variance(samples);
    let weights: Vec<f64> = samples
        .iter()
        .map(|s| 1.0 / (s.within_variance + tau_squared))
        .collect();
    let weight_sum: f64 = weights.iter().sum();
    let ces = samples
        .iter()
        .zip(&weights)
        .map(|(s, w)| w * s.es)
        .sum::<f64>()
        / weight_sum;
    Ok(CombinedEffect {
        ces,
        between_variance: tau_squared,
        n_samples: samples.len(),
        magnitude: interpret_magnitude(ces),
        weights,
    })
}

/// Maps |ces| onto half-open bands built from the 0.2 / 0.5 / 0.8 benchmarks:
/// below 0.2 is negligible, [0.2, 0.5) small, [0.5, 0.8) medium, 0.8 and
/// above large.
pub fn interpret_magnitude(ces: f64) -> MagnitudeLabel {
    let size = ces.abs();
    if size < MagnitudeLabel::CUTOFFS[0] {
        MagnitudeLabel::Negligible
    } else if size < MagnitudeLabel::CUTOFFS[1] {
        MagnitudeLabel::Small
    } else if size < MagnitudeLabel::CUTOFFS[2] {
        MagnitudeLabel::Medium
    } else {
        MagnitudeLabel::Large
    }
}

/// Sample Pearson correlation between two equal-length series, clamped to
/// [-1, 1]. Constant series have undefined correlation and are rejected.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFewPoints(xs.len()));
    }
    let mean_x = mean(xs);
    let mean_y = mean(ys);
    let mut covariance = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        covariance += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(StatsError::ConstantSeries);
    }
    Ok(CorrelationResult {
        r: (covariance / (var_x.sqrt() * var_y.sqrt())).clamp(-1.0, 1.0),
        n_points: xs.len(),
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n-1 denominator).
fn sample_std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let variance =
        values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0);
    variance.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(components: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(components.to_vec()).unwrap()
    }

    #[test]
    fn vector_rejects_empty_and_non_finite() {
        assert_eq!(EmbeddingVector::new(vec![]), Err(StatsError::EmptyVector));
        assert!(matches!(
            EmbeddingVector::new(vec![1.0, f64::NAN]),
            Err(StatsError::NonFiniteComponent { index: 1, .. })
        ));
        assert!(matches!(
            EmbeddingVector::new(vec![f64::INFINITY]),
            Err(StatsError::NonFiniteComponent { index: 0, .. })
        ));
    }

    #[test]
    fn cosine_identity() {
        let v = vector(&[3.0, 4.0]);
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_orthogonal() {
        let u = vector(&[1.0, 0.0]);
        let v = vector(&[0.0, 1.0]);
        assert_eq!(cosine(&u, &v).unwrap(), 0.0);
    }

    #[test]
    fn cosine_hand_computed() {
        // dot = 32, norms sqrt(14) and sqrt(77)
        let u = vector(&[1.0, 2.0, 3.0]);
        let v = vector(&[4.0, 5.0, 6.0]);
        let expected = 32.0 / (14.0f64.sqrt() * 77.0f64.sqrt());
        let got = cosine(&u, &v).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.974631).abs() < 1e-6);
    }

    #[test]
    fn cosine_errors() {
        let u = vector(&[1.0, 0.0]);
        let zero = vector(&[0.0, 0.0]);
        let longer = vector(&[1.0, 2.0, 3.0]);
        assert_eq!(cosine(&u, &zero), Err(StatsError::ZeroNormVector));
        assert_eq!(
            cosine(&u, &longer),
            Err(StatsError::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn association_score_same_attribute_set_is_zero() {
        let w = vector(&[0.3, 0.7]);
        let a = vec![vector(&[1.0, 0.0]), vector(&[0.5, 0.5])];
        assert_eq!(association_score(&w, &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn association_score_hand_computed() {
        let a = vec![vector(&[1.0, 0.0])];
        let b = vec![vector(&[0.0, 1.0])];
        let w_a = vector(&[1.0, 0.0]);
        let w_b = vector(&[0.0, 1.0]);
        assert!((association_score(&w_a, &a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((association_score(&w_b, &a, &b).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn association_score_empty_attributes() {
        let w = vector(&[1.0, 0.0]);
        assert_eq!(
            association_score(&w, &[], std::slice::from_ref(&w)),
            Err(StatsError::EmptyAttributeSet)
        );
    }

    fn axis_stimuli() -> StimulusEmbeddings {
        StimulusEmbeddings::new(
            vec![vector(&[1.0, 0.0])],
            vec![vector(&[0.0, 1.0])],
            vec![vector(&[1.0, 0.0])],
            vec![vector(&[0.0, 1.0])],
        )
        .unwrap()
    }

    #[test]
    fn effect_size_hand_computed() {
        // scores are {1, -1}; mean difference 2, sample std dev sqrt(2)
        let es = effect_size(&axis_stimuli()).unwrap();
        assert!((es - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn effect_size_identical_targets_is_zero() {
        let shared = vec![vector(&[0.6, 0.8]), vector(&[1.0, 0.2])];
        let stimuli = StimulusEmbeddings::new(
            shared.clone(),
            shared,
            vec![vector(&[1.0, 0.0])],
            vec![vector(&[0.0, 1.0])],
        )
        .unwrap();
        assert!(effect_size(&stimuli).unwrap().abs() < 1e-12);
    }

    #[test]
    fn effect_size_antisymmetry() {
        let x = vec![vector(&[0.9, 0.1]), vector(&[0.8, 0.3])];
        let y = vec![vector(&[0.2, 0.9]), vector(&[0.1, 0.7])];
        let a = vec![vector(&[1.0, 0.0])];
        let b = vec![vector(&[0.0, 1.0])];
        let base = effect_size(
            &StimulusEmbeddings::new(x.clone(), y.clone(), a.clone(), b.clone()).unwrap(),
        )
        .unwrap();
        let swapped_targets = effect_size(
            &StimulusEmbeddings::new(y.clone(), x.clone(), a.clone(), b.clone()).unwrap(),
        )
        .unwrap();
        let swapped_attributes =
            effect_size(&StimulusEmbeddings::new(x, y, b, a).unwrap()).unwrap();
        assert!((base + swapped_targets).abs() < 1e-12);
        assert!((base + swapped_attributes).abs() < 1e-12);
    }

    #[test]
    fn effect_size_degenerate_variance() {
        let same = vector(&[1.0, 0.0]);
        let stimuli = StimulusEmbeddings::new(
            vec![same.clone()],
            vec![same.clone()],
            vec![same.clone()],
            vec![same],
        )
        .unwrap();
        assert_eq!(effect_size(&stimuli), Err(StatsError::DegenerateVariance));
    }

    #[test]
    fn stimulus_embeddings_validation() {
        let v2 = vector(&[1.0, 0.0]);
        let v3 = vector(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            StimulusEmbeddings::new(
                vec![v2.clone()],
                vec![],
                vec![v2.clone()],
                vec![v2.clone()]
            ),
            Err(StatsError::UnbalancedTargets { x: 1, y: 0 })
        ));
        assert!(matches!(
            StimulusEmbeddings::new(vec![v2.clone()], vec![v2.clone()], vec![v2.clone()], vec![v3]),
            Err(StatsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn within_variance_hand_computed() {
        assert!((within_variance(0.0, 1, 1) - 2.0).abs() < 1e-12);
        assert!((within_variance(0.0, 10, 10) - 0.2).abs() < 1e-12);
        assert!((within_variance(1.0, 5, 5) - 0.45).abs() < 1e-12);
    }

    #[test]
    fn between_variance_single_sample() {
        let samples = [EffectSizeSample::new(0.7, 1.0, 0).unwrap()];
        assert_eq!(between_variance(&samples), 0.0);
    }

    #[test]
    fn between_variance_equal_effects() {
        let samples = [
            EffectSizeSample::new(0.5, 0.3, 0).unwrap(),
            EffectSizeSample::new(0.5, 0.9, 1).unwrap(),
            EffectSizeSample::new(0.5, 0.4, 2).unwrap(),
        ];
        assert_eq!(between_variance(&samples), 0.0);
    }

    #[test]
    fn between_variance_hand_computed() {
        // weights 1, 1; M = 1; Q = 2; c = 1; tau^2 = (2 - 1) / 1 = 1
        let samples = [
            EffectSizeSample::new(0.0, 1.0, 0).unwrap(),
            EffectSizeSample::new(2.0, 1.0, 1).unwrap(),
        ];
        assert!((between_variance(&samples) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combined_effect_single_sample() {
        let samples = [EffectSizeSample::new(0.42, 0.1, 0).unwrap()];
        let combined = combined_effect_size(&samples).unwrap();
        assert!((combined.ces - 0.42).abs() < 1e-12);
        assert_eq!(combined.between_variance, 0.0);
        assert_eq!(combined.n_samples, 1);
    }

    #[test]
    fn combined_effect_equal_samples() {
        let samples = [
            EffectSizeSample::new(0.5, 0.2, 0).unwrap(),
            EffectSizeSample::new(0.5, 0.2, 1).unwrap(),
        ];
        let combined = combined_effect_size(&samples).unwrap();
        assert!((combined.ces - 0.5).abs() < 1e-12);
        assert_eq!(combined.between_variance, 0.0);
    }

    #[test]
    fn combined_effect_hand_computed() {
        // tau^2 = 1, equal total variances, so CES is the plain mean 1.0
        let samples = [
            EffectSizeSample::new(0.0, 1.0, 0).unwrap(),
            EffectSizeSample::new(2.0, 1.0, 1).unwrap(),
        ];
        let combined = combined_effect_size(&samples).unwrap();
        assert!((combined.between_variance - 1.0).abs() < 1e-12);
        assert!((combined.ces - 1.0).abs() < 1e-12);
        assert_eq!(combined.magnitude, MagnitudeLabel::Large);
    }

    #[test]
    fn combined_effect_empty_is_error() {
        assert_eq!(combined_effect_size(&[]), Err(StatsError::NoSamples));
    }

    #[test]
    fn magnitude_bands() {
        assert_eq!(interpret_magnitude(0.19), MagnitudeLabel::Negligible);
        assert_eq!(interpret_magnitude(0.2), MagnitudeLabel::Small);
        assert_eq!(interpret_magnitude(0.5), MagnitudeLabel::Medium);
        assert_eq!(interpret_magnitude(0.8), MagnitudeLabel::Large);
        assert_eq!(interpret_magnitude(-0.85), MagnitudeLabel::Large);
        assert_eq!(interpret_magnitude(0.0), MagnitudeLabel::Negligible);
    }

    #[test]
    fn pearson_exact_linearity() {
        let result = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((result.r - 1.0).abs() < 1e-12);
        assert_eq!(result.n_points, 3);
    }

    #[test]
    fn pearson_exact_anti_linearity() {
        let result = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((result.r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_reference_score_columns() {
        let gt = [-0.1273, 0.0428, 0.2300, -0.1664];
        let extracted = [-0.1014, 0.0191, 0.2406, -0.1721];
        let result = pearson(&gt, &extracted).unwrap();
        assert!((result.r - 0.9930).abs() < 0.001, "r = {}", result.r);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch { left: 2, right: 1 })
        );
        assert_eq!(pearson(&[1.0], &[1.0]), Err(StatsError::TooFewPoints(1)));
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantSeries)
        );
    }

    #[test]
    fn effect_size_sample_validation() {
        assert!(matches!(
            EffectSizeSample::new(0.1, 0.0, 3),
            Err(StatsError::NonPositiveVariance { index: 3, .. })
        ));
        assert!(EffectSizeSample::new(0.1, 1e-9, 0).is_ok());
    }
}
