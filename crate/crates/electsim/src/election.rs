//! Electoral setting, tally bookkeeping, winner/margin/seat mechanics and the
//! quota-constrained categorical sampler shared by all voter models.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SpecError};

/// A fixed electoral setting: `S` districts with capacities `n_s`, `K` parties
/// with country-wide vote shares `theta` and (derived or given) exact vote
/// totals `v_k` summing to the electorate size `N`.
///
/// Construction always validates; a value of this type is well-formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectorateSpec {
    num_districts: usize,
    num_parties: usize,
    num_electors: u64,
    district_sizes: Vec<u64>,
    party_vote_totals: Vec<u64>,
    popularity: Vec<f64>,
}

impl ElectorateSpec {
    /// Builds a spec from district sizes and vote shares; exact party totals
    /// are derived by largest-remainder apportionment of `N`.
    pub fn new(district_sizes: Vec<u64>, popularity: Vec<f64>) -> Result<Self, SpecError> {
        Self::build(district_sizes, Some(popularity), None)
    }

    /// Builds a spec from district sizes and exact party totals; vote shares
    /// are derived as `v_k / N`.
    pub fn from_vote_totals(
        district_sizes: Vec<u64>,
        party_vote_totals: Vec<u64>,
    ) -> Result<Self, SpecError> {
        Self::build(district_sizes, None, Some(party_vote_totals))
    }

    /// Builds a spec with both shares and totals given; they must agree to
    /// within one vote per party.
    pub fn from_shares_and_totals(
        district_sizes: Vec<u64>,
        popularity: Vec<f64>,
        party_vote_totals: Vec<u64>,
    ) -> Result<Self, SpecError> {
        Self::build(district_sizes, Some(popularity), Some(party_vote_totals))
    }

    /// Convenience constructor: `num_districts` districts of (near-)equal
    /// size. When `S` does not divide `N`, the first `N mod S` districts take
    /// one extra elector.
    pub fn equal_districts(
        num_districts: usize,
        num_electors: u64,
        popularity: Vec<f64>,
    ) -> Result<Self, SpecError> {
        if num_districts == 0 {
            return Err(SpecError::NonPositive("num_districts must be >= 1".into()));
        }
        Self::new(
            equalized_sizes(num_electors, num_districts),
            popularity,
        )
    }

    fn build(
        district_sizes: Vec<u64>,
        popularity: Option<Vec<f64>>,
        party_vote_totals: Option<Vec<u64>>,
    ) -> Result<Self, SpecError> {
        let num_districts = district_sizes.len();
        if num_districts == 0 {
            return Err(SpecError::NonPositive("need at least one district".into()));
        }
        if district_sizes.iter().any(|&n| n == 0) {
            return Err(SpecError::NonPositive("district sizes must be >= 1".into()));
        }
        let num_electors: u64 = district_sizes.iter().sum();

        let num_parties = match (&popularity, &party_vote_totals) {
            (Some(theta), _) => theta.len(),
            (None, Some(v)) => v.len(),
            (None, None) => {
                return Err(SpecError::NonPositive(
                    "either popularity or party_vote_totals is required".into(),
                ))
            }
        };
        if num_parties < 2 {
            return Err(SpecError::NonPositive("need at least two parties".into()));
        }
        if let Some(v) = &party_vote_totals {
            if v.len() != num_parties {
                return Err(SpecError::ShareMismatch(format!(
                    "popularity has {} entries but party_vote_totals has {}",
                    num_parties,
                    v.len()
                )));
            }
            let total: u64 = v.iter().sum();
            if total != num_electors {
                return Err(SpecError::SizeMismatch(format!(
                    "party vote totals sum to {total} but district sizes sum to {num_electors}"
                )));
            }
        }

        let popularity: Vec<f64> = match popularity {
            Some(theta) => {
                if theta.iter().any(|&t| t < 0.0 || !t.is_finite()) {
                    return Err(SpecError::NonPositive(
                        "vote shares must be finite and non-negative".into(),
                    ));
                }
                let sum: f64 = theta.iter().sum();
                if sum <= 0.0 {
                    return Err(SpecError::NonPositive("vote shares sum to zero".into()));
                }
                theta.iter().map(|t| t / sum).collect()
            }
            None => {
                let v = party_vote_totals.as_ref().unwrap();
                v.iter().map(|&vk| vk as f64 / num_electors as f64).collect()
            }
        };

        let party_vote_totals = match party_vote_totals {
            Some(v) => {
                // Shares and totals must agree to within one vote per party.
                let n = num_electors as f64;
                for (k, (&vk, &tk)) in v.iter().zip(&popularity).enumerate() {
                    if (vk as f64 / n - tk).abs() > 1.0 / n + 1e-9 {
                        return Err(SpecError::ShareMismatch(format!(
                            "party {k}: share {tk:.6} vs totals {vk}/{num_electors}"
                        )));
                    }
                }
                v
            }
            None => largest_remainder(&popularity, num_electors),
        };

        Ok(Self {
            num_districts,
            num_parties,
            num_electors,
            district_sizes,
            party_vote_totals,
            popularity,
        })
    }

    pub fn num_districts(&self) -> usize {
        self.num_districts
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    pub fn num_electors(&self) -> u64 {
        self.num_electors
    }

    pub fn district_sizes(&self) -> &[u64] {
        &self.district_sizes
    }

    pub fn party_vote_totals(&self) -> &[u64] {
        &self.party_vote_totals
    }

    /// Normalized vote shares `theta`; sums to 1.
    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    /// True when every district holds the equalized capacity profile
    /// (`floor(N/S)`, first `N mod S` districts one extra).
    pub fn has_equalized_districts(&self) -> bool {
        self.district_sizes == equalized_sizes(self.num_electors, self.num_districts)
    }

    /// Stable hex digest of the full setting, recorded with every run so
    /// results can be replayed against the exact spec that produced them.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.num_districts.to_le_bytes());
        h.update(self.num_parties.to_le_bytes());
        h.update(self.num_electors.to_le_bytes());
        for n in &self.district_sizes {
            h.update(n.to_le_bytes());
        }
        for v in &self.party_vote_totals {
            h.update(v.to_le_bytes());
        }
        for t in &self.popularity {
            h.update(t.to_le_bytes());
        }
        let out = h.finalize();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Equal split of `n` electors over `s` districts, first `n mod s` districts
/// take one extra.
pub fn equalized_sizes(n: u64, s: usize) -> Vec<u64> {
    let base = n / s as u64;
    let extra = (n % s as u64) as usize;
    (0..s)
        .map(|i| if i < extra { base + 1 } else { base })
        .collect()
}

/// Apportions `n` seats/votes to parties proportionally to `shares`, exactly:
/// floor everything, then hand out the remainder by descending fractional
/// part (ties to the lower index).
pub fn largest_remainder(shares: &[f64], n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = shares.iter().map(|t| (t * n as f64).floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut rem: Vec<(usize, f64)> = shares
        .iter()
        .enumerate()
        .map(|(k, t)| (k, t * n as f64 - (t * n as f64).floor()))
        .collect();
    rem.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for i in 0..(n - assigned) as usize {
        out[rem[i % rem.len()].0] += 1;
    }
    out
}

/// Per-district per-party vote counts `V[s][k]`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyMatrix {
    num_districts: usize,
    num_parties: usize,
    votes: Vec<u64>,
}

impl TallyMatrix {
    pub fn zeros(num_districts: usize, num_parties: usize) -> Self {
        Self {
            num_districts,
            num_parties,
            votes: vec![0; num_districts * num_parties],
        }
    }

    /// Builds from explicit rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self, SimError> {
        let num_districts = rows.len();
        let num_parties = rows.first().map_or(0, Vec::len);
        if num_districts == 0 || num_parties == 0 {
            return Err(SimError::RowSumViolation("empty tally".into()));
        }
        if rows.iter().any(|r| r.len() != num_parties) {
            return Err(SimError::RowSumViolation("ragged tally rows".into()));
        }
        Ok(Self {
            num_districts,
            num_parties,
            votes: rows.into_iter().flatten().collect(),
        })
    }

    pub fn num_districts(&self) -> usize {
        self.num_districts
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    pub fn get(&self, district: usize, party: usize) -> u64 {
        self.votes[district * self.num_parties + party]
    }

    pub fn add_vote(&mut self, district: usize, party: usize) {
        self.votes[district * self.num_parties + party] += 1;
    }

    pub fn add_votes(&mut self, district: usize, party: usize, count: u64) {
        self.votes[district * self.num_parties + party] += count;
    }

    pub fn row(&self, district: usize) -> &[u64] {
        &self.votes[district * self.num_parties..(district + 1) * self.num_parties]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.votes.chunks_exact(self.num_parties)
    }

    pub fn row_sum(&self, district: usize) -> u64 {
        self.row(district).iter().sum()
    }

    pub fn column_sum(&self, party: usize) -> u64 {
        (0..self.num_districts).map(|s| self.get(s, party)).sum()
    }

    /// Checks row sums against the spec's district sizes.
    pub fn check_rows(&self, spec: &ElectorateSpec) -> Result<(), SimError> {
        if self.num_districts != spec.num_districts() || self.num_parties != spec.num_parties() {
            return Err(SimError::RowSumViolation(format!(
                "tally is {}x{} but spec is {}x{}",
                self.num_districts,
                self.num_parties,
                spec.num_districts(),
                spec.num_parties()
            )));
        }
        for (s, &n) in spec.district_sizes().iter().enumerate() {
            let got = self.row_sum(s);
            if got != n {
                return Err(SimError::RowSumViolation(format!(
                    "district {s}: row sum {got} != capacity {n}"
                )));
            }
        }
        Ok(())
    }

    /// Checks column sums against the spec's party totals.
    pub fn check_columns(&self, spec: &ElectorateSpec) -> Result<(), SimError> {
        for (k, &v) in spec.party_vote_totals().iter().enumerate() {
            let got = self.column_sum(k);
            if got != v {
                return Err(SimError::RowSumViolation(format!(
                    "party {k}: column sum {got} != total {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Winners, winning margins and seat counts derived from a tally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionOutcome {
    /// Winning party index per district; ties go to the lowest party index.
    pub winners: Vec<usize>,
    /// Winner's fraction of the district vote, one per district.
    pub margins: Vec<f64>,
    /// Districts won per party.
    pub seats: Vec<u64>,
}

/// Computes winners, margins and seats. Ties break toward the lowest party
/// index so outcomes are reproducible.
pub fn decide_outcome(
    tally: &TallyMatrix,
    spec: &ElectorateSpec,
) -> Result<ElectionOutcome, SimError> {
    tally.check_rows(spec)?;
    let mut winners = Vec::with_capacity(spec.num_districts());
    let mut margins = Vec::with_capacity(spec.num_districts());
    let mut seats = vec![0u64; spec.num_parties()];
    for s in 0..spec.num_districts() {
        let row = tally.row(s);
        let mut best = 0usize;
        for k in 1..row.len() {
            if row[k] > row[best] {
                best = k;
            }
        }
        winners.push(best);
        margins.push(row[best] as f64 / spec.district_sizes()[s] as f64);
        seats[best] += 1;
    }
    Ok(ElectionOutcome {
        winners,
        margins,
        seats,
    })
}

/// Which quota axis a constrained draw consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Party,
    District,
}

/// Book-keeping for constrained sampling: remaining per-party vote quotas,
/// remaining per-district capacities, and the run's random source.
#[derive(Debug, Clone)]
pub struct SamplerState {
    remaining_party_votes: Vec<u64>,
    remaining_district_capacity: Vec<u64>,
    rng: ChaCha8Rng,
}

impl SamplerState {
    pub fn new(spec: &ElectorateSpec, seed: u64) -> Self {
        use rand::SeedableRng;
        Self {
            remaining_party_votes: spec.party_vote_totals().to_vec(),
            remaining_district_capacity: spec.district_sizes().to_vec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn remaining(&self, axis: Axis) -> &[u64] {
        match axis {
            Axis::Party => &self.remaining_party_votes,
            Axis::District => &self.remaining_district_capacity,
        }
    }

    /// Consumes `count` units of quota from `index` on `axis` without
    /// sampling. Used by block-level voters that commit several votes at once.
    pub fn consume(&mut self, axis: Axis, index: usize, count: u64) -> Result<(), SimError> {
        let quotas = match axis {
            Axis::Party => &mut self.remaining_party_votes,
            Axis::District => &mut self.remaining_district_capacity,
        };
        if quotas[index] < count {
            return Err(SimError::Exhausted(format!(
                "index {index} has quota {} but {count} requested",
                quotas[index]
            )));
        }
        quotas[index] -= count;
        Ok(())
    }

    /// Draws an index with probability proportional to `weights[i]` among
    /// indices with remaining quota, then decrements the chosen quota.
    ///
    /// When every active index has zero weight the draw falls back to uniform
    /// over the active set, so a run can never deadlock on exhausted mass.
    pub fn sample(&mut self, weights: &[f64], axis: Axis) -> Result<usize, SimError> {
        let quotas = match axis {
            Axis::Party => &self.remaining_party_votes,
            Axis::District => &self.remaining_district_capacity,
        };
        debug_assert_eq!(weights.len(), quotas.len());

        let mut total = 0.0;
        let mut active = 0usize;
        for (w, &q) in weights.iter().zip(quotas) {
            if q > 0 {
                debug_assert!(*w >= 0.0, "negative weight {w}");
                total += w;
                active += 1;
            }
        }
        if active == 0 {
            return Err(SimError::Exhausted("no index has remaining quota".into()));
        }

        let chosen = if total > 0.0 {
            let r = self.rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            let mut last_active = 0;
            for (i, (w, &q)) in weights.iter().zip(quotas.iter()).enumerate() {
                if q == 0 {
                    continue;
                }
                last_active = i;
                acc += w;
                if r < acc {
                    chosen = Some(i);
                    break;
                }
            }
            // Float round-off can leave r marginally past the last bucket.
            chosen.unwrap_or(last_active)
        } else {
            // All active weights are zero: uniform over the active set.
            let pick = self.rng.gen_range(0..active);
            let mut seen = 0usize;
            let mut chosen = 0usize;
            for (i, &q) in quotas.iter().enumerate() {
                if q > 0 {
                    if seen == pick {
                        chosen = i;
                        break;
                    }
                    seen += 1;
                }
            }
            chosen
        };

        match axis {
            Axis::Party => self.remaining_party_votes[chosen] -= 1,
            Axis::District => self.remaining_district_capacity[chosen] -= 1,
        }
        Ok(chosen)
    }
}
