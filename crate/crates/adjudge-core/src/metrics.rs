//! Rating extraction, distribution construction, Jensen-Shannon divergence,
//! the within-1-SD accuracy metric, baselines, and grouped aggregation.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::AnswerScore;
use crate::corpus::{AdjectiveClass, ContextBias, Dataset, FrequencyBin, LikertRating};

/// A probability distribution over the five Likert points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingDistribution(pub [f64; 5]);

impl RatingDistribution {
    const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(p: [f64; 5]) -> Result<Self, MetricsError> {
        if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(MetricsError::NegativeProbability);
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(MetricsError::NotNormalized(sum));
        }
        Ok(RatingDistribution(p))
    }

    pub fn uniform() -> Self {
        RatingDistribution([0.2; 5])
    }

    pub fn point_mass(rating: LikertRating) -> Self {
        let mut p = [0.0; 5];
        p[rating.index()] = 1.0;
        RatingDistribution(p)
    }

    /// Count-normalized distribution; `None` when all counts are zero.
    pub fn from_counts(counts: [usize; 5]) -> Option<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return None;
        }
        let mut p = [0.0; 5];
        for (i, &c) in counts.iter().enumerate() {
            p[i] = c as f64 / total as f64;
        }
        Some(RatingDistribution(p))
    }

    pub fn from_ratings(ratings: &[LikertRating]) -> Option<Self> {
        let mut counts = [0usize; 5];
        for r in ratings {
            counts[r.index()] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn probabilities(&self) -> &[f64; 5] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("distribution entries must be finite and non-negative")]
    NegativeProbability,
    #[error("distribution sums to {0}, not 1")]
    NotNormalized(f64),
    #[error("need exactly five answer scores, got {0}")]
    WrongScoreCount(usize),
    #[error("bigram {0:?} not present in the dataset")]
    UnknownBigram(String),
}

/// Round half-up to the nearest integer.
pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// The model's answer for one query: the five scores, the extracted rating
/// and the normalized score distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelVerdict {
    pub bigram: String,
    pub experiment: String,
    pub context_id: Option<String>,
    pub scores: Vec<AnswerScore>,
    pub rating: LikertRating,
    pub distribution: RatingDistribution,
    pub tie_flagged: bool,
}

impl ModelVerdict {
    pub fn from_scores(
        bigram: impl Into<String>,
        experiment: impl Into<String>,
        context_id: Option<String>,
        scores: Vec<AnswerScore>,
    ) -> Result<Self, MetricsError> {
        let (rating, tie_flagged) = extract_rating(&scores)?;
        let distribution = to_distribution(&scores)?;
        Ok(ModelVerdict {
            bigram: bigram.into(),
            experiment: experiment.into(),
            context_id,
            scores,
            rating,
            distribution,
            tie_flagged,
        })
    }
}

fn logprobs(scores: &[AnswerScore]) -> Result<[f64; 5], MetricsError> {
    if scores.len() != 5 {
        return Err(MetricsError::WrongScoreCount(scores.len()));
    }
    let mut lp = [0.0; 5];
    for s in scores {
        lp[s.answer.index()] = s.total_logprob;
    }
    Ok(lp)
}

/// The rating whose answer has the highest total log-probability (lowest
/// surprisal). Ties break to the lowest rating index and are flagged.
pub fn extract_rating(scores: &[AnswerScore]) -> Result<(LikertRating, bool), MetricsError> {
    let lp = logprobs(scores)?;
    let mut best = 0usize;
    for i in 1..5 {
        if lp[i] > lp[best] {
            best = i;
        }
    }
    let tie = lp.iter().enumerate().any(|(i, &v)| i != best && v == lp[best]);
    Ok((LikertRating::ALL[best], tie))
}

/// Softmax over the five total log-probabilities, computed stably via
/// max-subtraction.
pub fn to_distribution(scores: &[AnswerScore]) -> Result<RatingDistribution, MetricsError> {
    let lp = logprobs(scores)?;
    let max = lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; 5];
    let mut sum = 0.0;
    for i in 0..5 {
        p[i] = (lp[i] - max).exp();
        sum += p[i];
    }
    for x in &mut p {
        *x /= sum;
    }
    Ok(RatingDistribution(p))
}

/// Jensen-Shannon divergence with base-2 logarithms, bounded in [0, 1].
pub fn js_divergence(p: &RatingDistribution, q: &RatingDistribution) -> f64 {
    fn kl_to_mixture(a: &[f64; 5], m: &[f64; 5]) -> f64 {
        let mut sum = 0.0;
        for i in 0..5 {
            if a[i] > 0.0 {
                sum += a[i] * (a[i] / m[i]).log2();
            }
        }
        sum
    }
    let mut m = [0.0; 5];
    for i in 0..5 {
        m[i] = 0.5 * (p.0[i] + q.0[i]);
    }
    let jsd = 0.5 * kl_to_mixture(&p.0, &m) + 0.5 * kl_to_mixture(&q.0, &m);
    jsd.clamp(0.0, 1.0)
}

/// Context-determined correctness: "Definitely/Probably not" in
/// privative-biased contexts, "Probably/Definitely yes" in
/// subsective-biased ones. "Unsure" is always incorrect.
pub fn context_accuracy(rating: LikertRating, bias: ContextBias) -> bool {
    match bias {
        ContextBias::PrivativeBiased => rating.value() <= 2,
        ContextBias::SubsectiveBiased => rating.value() >= 4,
    }
}

/// The rounded 1-SD interval around the human mean, clamped to [1, 5].
pub fn one_sd_interval(human_mean: f64, human_sd: f64) -> (f64, f64) {
    let lo = round_half_up(human_mean - human_sd).clamp(1.0, 5.0);
    let hi = round_half_up(human_mean + human_sd).clamp(1.0, 5.0);
    (lo, hi)
}

/// Whether a single rating falls within one standard deviation of the human
/// mean, with both interval ends rounded half-up to the nearest integer.
pub fn within_one_sd(rating: LikertRating, human_mean: f64, human_sd: f64) -> bool {
    let (lo, hi) = one_sd_interval(human_mean, human_sd);
    let r = rating.value() as f64;
    lo <= r && r <= hi
}

/// The same interval test for a real-valued prediction (used by the analogy
/// baseline, whose predicted mean is compared unrounded).
pub fn within_one_sd_value(value: f64, human_mean: f64, human_sd: f64) -> bool {
    let (lo, hi) = one_sd_interval(human_mean, human_sd);
    lo <= value && value <= hi
}

/// Fixed rating per adjective class: privative adjectives tend to have wide
/// 1-SD intervals overlapping "Unsure", subsective ones concentrate on
/// "Definitely yes".
pub fn baseline_majority(class: AdjectiveClass) -> LikertRating {
    match class {
        AdjectiveClass::TypicallyPrivative => LikertRating::ALL[2],
        AdjectiveClass::TypicallySubsective => LikertRating::ALL[4],
    }
}

/// Deterministic per-bigram RNG derived from the run seed and the bigram
/// key, so evaluation order never changes sampled results.
pub fn bigram_rng(run_seed: u64, bigram_key: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(run_seed.to_le_bytes());
    hasher.update(bigram_key.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// Mean within-1-SD score of `n_samples` uniform ratings for one bigram.
pub fn baseline_random(
    bigram_key: &str,
    human_mean: f64,
    human_sd: f64,
    n_samples: usize,
    run_seed: u64,
) -> f64 {
    let mut rng = bigram_rng(run_seed, bigram_key);
    let die = Uniform::from(1u8..=5);
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let rating = LikertRating::new(die.sample(&mut rng)).expect("die is in range");
        if within_one_sd(rating, human_mean, human_sd) {
            hits += 1;
        }
    }
    hits as f64 / n_samples as f64
}

/// Which fixed distribution a baseline assigns to every bigram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Uniform,
    Majority,
}

/// The baseline's rating distribution for a bigram of the given class.
pub fn baseline_distribution(kind: BaselineKind, class: AdjectiveClass) -> RatingDistribution {
    match kind {
        BaselineKind::Uniform => RatingDistribution::uniform(),
        BaselineKind::Majority => RatingDistribution::point_mass(baseline_majority(class)),
    }
}

/// How to group per-bigram values when aggregating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Class,
    Frequency,
    Total,
}

/// One aggregated group: label, unweighted mean, and bigram count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupValue {
    pub label: String,
    pub value: f64,
    pub n: usize,
}

/// A named metric with its overall value, grouped values and per-bigram
/// detail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub overall: f64,
    pub groups: Vec<GroupValue>,
    pub per_bigram: Vec<(String, f64)>,
}

impl MetricReport {
    pub fn group(&self, label: &str) -> Option<f64> {
        self.groups.iter().find(|g| g.label == label).map(|g| g.value)
    }
}

/// Unweighted means of per-bigram values, grouped by adjective class or
/// frequency. The overall value is always the mean over all bigrams.
pub fn aggregate(
    metric: impl Into<String>,
    per_bigram: &[(String, f64)],
    dataset: &Dataset,
    group_by: GroupBy,
) -> Result<MetricReport, MetricsError> {
    let mut groups: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let mut total = 0.0;
    for (key, value) in per_bigram {
        let entry = dataset
            .get(key)
            .ok_or_else(|| MetricsError::UnknownBigram(key.clone()))?;
        total += value;
        let mut add = |label: String| {
            let slot = groups.entry(label).or_insert((0.0, 0));
            slot.0 += value;
            slot.1 += 1;
        };
        match group_by {
            GroupBy::Class => add(entry.record.adjective_class.as_str().to_string()),
            GroupBy::Frequency => {
                add(entry.record.frequency_bin.label().to_string());
                if entry.record.frequency_bin.is_high_frequency() {
                    add("high".to_string());
                }
            }
            GroupBy::Total => {}
        }
    }
    if per_bigram.is_empty() {
        return Err(MetricsError::UnknownBigram("<empty input>".to_string()));
    }
    let overall = total / per_bigram.len() as f64;
    let groups = groups
        .into_iter()
        .map(|(label, (sum, n))| GroupValue { label, value: sum / n as f64, n })
        .collect();
    Ok(MetricReport {
        metric: metric.into(),
        overall,
        groups,
        per_bigram: per_bigram.to_vec(),
    })
}
