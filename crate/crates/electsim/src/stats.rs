//! Summary statistics of an election outcome and distances between summary
//! vectors, the interface the ABC engine compares simulations through.

use serde::{Deserialize, Serialize};

use crate::election::{decide_outcome, ElectorateSpec, TallyMatrix};
use crate::error::StatsError;

/// Low-dimensional description of one election: per-party seat shares and
/// mean vote fractions, plus the mean and spread of the winning margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    /// Fraction of districts won per party, `M_k / S`.
    pub seat_share: Vec<f64>,
    /// Mean over districts of the party's vote fraction `V[s][k] / n_s`.
    pub mean_vote_fraction: Vec<f64>,
    /// Mean winning margin over districts.
    pub margin_mean: f64,
    /// Population standard deviation of the winning margin over districts.
    pub margin_std: f64,
}

impl SummaryStats {
    pub fn num_parties(&self) -> usize {
        self.seat_share.len()
    }

    /// Component-wise mean of several summaries, used to damp simulator noise
    /// when scoring an ABC candidate over replicas.
    pub fn mean(stats: &[SummaryStats]) -> SummaryStats {
        assert!(!stats.is_empty());
        let k = stats[0].num_parties();
        let n = stats.len() as f64;
        let mut seat_share = vec![0.0; k];
        let mut mvf = vec![0.0; k];
        let mut mm = 0.0;
        let mut ms = 0.0;
        for s in stats {
            for i in 0..k {
                seat_share[i] += s.seat_share[i] / n;
                mvf[i] += s.mean_vote_fraction[i] / n;
            }
            mm += s.margin_mean / n;
            ms += s.margin_std / n;
        }
        SummaryStats {
            seat_share,
            mean_vote_fraction: mvf,
            margin_mean: mm,
            margin_std: ms,
        }
    }
}

/// Computes the summary statistics of a tally.
pub fn summarize(tally: &TallyMatrix, spec: &ElectorateSpec) -> Result<SummaryStats, StatsError> {
    let outcome =
        decide_outcome(tally, spec).map_err(|e| StatsError::RowSumViolation(e.to_string()))?;
    let s = spec.num_districts() as f64;
    let k = spec.num_parties();

    let seat_share: Vec<f64> = outcome.seats.iter().map(|&m| m as f64 / s).collect();

    let mut mean_vote_fraction = vec![0.0; k];
    for (row, &n) in tally.rows().zip(spec.district_sizes()) {
        for (acc, &v) in mean_vote_fraction.iter_mut().zip(row) {
            *acc += v as f64 / n as f64 / s;
        }
    }

    let margin_mean = outcome.margins.iter().sum::<f64>() / s;
    let var = outcome
        .margins
        .iter()
        .map(|p| (p - margin_mean).powi(2))
        .sum::<f64>()
        / s;

    Ok(SummaryStats {
        seat_share,
        mean_vote_fraction,
        margin_mean,
        margin_std: var.sqrt(),
    })
}

/// Per-family weights for [`distance`]: seat shares, mean vote fractions,
/// margin mean, margin spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceWeights(pub [f64; 4]);

impl Default for DistanceWeights {
    fn default() -> Self {
        DistanceWeights([1.0, 1.0, 1.0, 1.0])
    }
}

/// Weighted Euclidean distance between two summaries: the squared differences
/// of each statistic family are scaled by the family weight, summed, and
/// rooted. Symmetric, and zero only for component-wise equal summaries.
pub fn distance(
    a: &SummaryStats,
    b: &SummaryStats,
    weights: DistanceWeights,
) -> Result<f64, StatsError> {
    if a.num_parties() != b.num_parties() {
        return Err(StatsError::DimensionMismatch(format!(
            "{} vs {} parties",
            a.num_parties(),
            b.num_parties()
        )));
    }
    let sq = |x: f64, y: f64| (x - y) * (x - y);
    let mut acc = 0.0;
    for k in 0..a.num_parties() {
        acc += weights.0[0] * sq(a.seat_share[k], b.seat_share[k]);
        acc += weights.0[1] * sq(a.mean_vote_fraction[k], b.mean_vote_fraction[k]);
    }
    acc += weights.0[2] * sq(a.margin_mean, b.margin_mean);
    acc += weights.0[3] * sq(a.margin_std, b.margin_std);
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::ElectorateSpec;

    fn stats(seat: Vec<f64>, mvf: Vec<f64>, mm: f64, ms: f64) -> SummaryStats {
        SummaryStats {
            seat_share: seat,
            mean_vote_fraction: mvf,
            margin_mean: mm,
            margin_std: ms,
        }
    }

    #[test]
    fn summarize_hand_example() {
        let spec = ElectorateSpec::from_vote_totals(vec![100, 100], vec![90, 110]).unwrap();
        let tally = TallyMatrix::from_rows(vec![vec![60, 40], vec![30, 70]]).unwrap();
        let s = summarize(&tally, &spec).unwrap();
        assert_eq!(s.seat_share, vec![0.5, 0.5]);
        assert!((s.mean_vote_fraction[0] - 0.45).abs() < 1e-12);
        assert!((s.mean_vote_fraction[1] - 0.55).abs() < 1e-12);
        assert!((s.margin_mean - 0.65).abs() < 1e-12);
        assert!((s.margin_std - 0.05).abs() < 1e-12);
    }

    #[test]
    fn summarize_unanimous() {
        let spec = ElectorateSpec::from_vote_totals(vec![10, 10], vec![20, 0]).unwrap();
        let tally = TallyMatrix::from_rows(vec![vec![10, 0], vec![10, 0]]).unwrap();
        let s = summarize(&tally, &spec).unwrap();
        assert_eq!(s.seat_share, vec![1.0, 0.0]);
        assert_eq!(s.margin_mean, 1.0);
        assert_eq!(s.margin_std, 0.0);
    }

    #[test]
    fn distance_identity_and_symmetry() {
        let a = stats(vec![0.7, 0.3], vec![0.6, 0.4], 0.6, 0.1);
        let b = stats(vec![0.5, 0.5], vec![0.55, 0.45], 0.55, 0.2);
        let w = DistanceWeights::default();
        assert_eq!(distance(&a, &a, w).unwrap(), 0.0);
        assert_eq!(
            distance(&a, &b, w).unwrap(),
            distance(&b, &a, w).unwrap()
        );
    }

    #[test]
    fn distance_direct_norm() {
        let a = stats(vec![1.0, 0.0], vec![1.0, 0.0], 1.0, 0.0);
        let b = stats(vec![0.0, 1.0], vec![0.0, 1.0], 1.0, 0.0);
        let d = distance(&a, &b, DistanceWeights::default()).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distance_dimension_mismatch() {
        let a = stats(vec![1.0, 0.0], vec![1.0, 0.0], 1.0, 0.0);
        let b = stats(vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], 1.0, 0.0);
        assert!(matches!(
            distance(&a, &b, DistanceWeights::default()),
            Err(StatsError::DimensionMismatch(_))
        ));
    }
}
