//! Party-wise concentration model: electors draw their party from the
//! country-wide shares, then pick a district by weighing the party's running
//! per-district tallies against a uniform spread, under both quota axes.

use serde::{Deserialize, Serialize};

use crate::election::{Axis, ElectorateSpec, SamplerState, TallyMatrix};
use crate::error::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcmParams {
    /// Concentration per party, each in [0, 1]. High values pull a party's
    /// voters toward districts it already holds votes in.
    pub eta: Vec<f64>,
}

impl PcmParams {
    pub(crate) fn validate(&self, spec: &ElectorateSpec) -> Result<(), SimError> {
        if self.eta.len() != spec.num_parties() {
            return Err(SimError::InvalidParams(format!(
                "{} concentration values for {} parties",
                self.eta.len(),
                spec.num_parties()
            )));
        }
        if self.eta.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(SimError::InvalidParams(
                "concentration must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// How the uniform side of the district weight is scaled. The published
/// synthetic results pin this; see the regression tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum DistrictMixing {
    /// `eta * V[s][k] + (1 - eta) * c * (N / S)`: the uniform pseudo-count is
    /// a fixed fraction of the mean district size.
    ConstWeight(f64),
    /// `eta * V[s][k] / total_k + (1 - eta) / S`: a probability mixture of
    /// the party's own spatial distribution and the uniform one.
    NormalizedShares,
    /// As `NormalizedShares` but with `total_k + frac * N / S` in the
    /// denominator, so a party's first votes spread before piling up.
    DampedShares(f64),
    /// `eta * (V[s][k] / fill_s) + (1 - eta) / S`: attraction by the party's
    /// share within each district. Shares self-limit, so a small party's
    /// strongholds plateau below the winning line while a large party's
    /// exceed it.
    WithinDistrictShare,
    /// `eta * V[s][k]^p / sum_s' V[s'][k]^p + (1 - eta) / S`: sub-linear
    /// pile attraction spreads a small party across more districts while a
    /// large party's piles still clear the winning line.
    PowerShares(f64),
    /// `eta * V[s][k] / (fill_s + frac * N/S) + (1 - eta) / S`: attraction by
    /// smoothed within-district share.
    SmoothedWithinShare(f64),
    /// `eta * V[s][k]^p / (sum_s' V[s'][k]^p + frac * N/S) + (1 - eta) / S`.
    PowerDamped(f64, f64),
}

pub(crate) const PINNED_MIXING: DistrictMixing = DistrictMixing::PowerDamped(0.75, 0.02);

pub fn simulate_pcm(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
) -> Result<TallyMatrix, SimError> {
    run(spec, params, seed, PINNED_MIXING)
}

#[doc(hidden)]
pub fn simulate_pcm_with_mixing_const(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
    frac: f64,
) -> Result<TallyMatrix, SimError> {
    run(spec, params, seed, DistrictMixing::ConstWeight(frac))
}

#[doc(hidden)]
pub fn simulate_pcm_with_mixing_normalized(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
) -> Result<TallyMatrix, SimError> {
    run(spec, params, seed, DistrictMixing::NormalizedShares)
}

#[doc(hidden)]
pub fn simulate_pcm_with_mixing_damped(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
    frac: f64,
) -> Result<TallyMatrix, SimError> {
    run(spec, params, seed, DistrictMixing::DampedShares(frac))
}

#[doc(hidden)]
pub fn simulate_pcm_with_mixing_within(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
) -> Result<TallyMatrix, SimError> {
    run(spec, params, seed, DistrictMixing::WithinDistrictShare)
}

#[doc(hidden)]
pub fn simulate_pcm_with_mixing_power(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
    p: f64,
) -> Result<TallyMatrix, SimError> {
    run(spec, params, seed, DistrictMixing::PowerShares(p))
}

#[doc(hidden)]
pub fn simulate_pcm_with_mixing_smoothed(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
    frac: f64,
) -> Result<TallyMatrix, SimError> {
    run(spec, params, seed, DistrictMixing::SmoothedWithinShare(frac))
}

#[doc(hidden)]
pub fn simulate_pcm_with_mixing_power_damped(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
    p: f64,
    frac: f64,
) -> Result<TallyMatrix, SimError> {
    run(spec, params, seed, DistrictMixing::PowerDamped(p, frac))
}

#[doc(hidden)]
pub fn simulate_pcm_party_major(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
    damping_frac: f64,
) -> Result<TallyMatrix, SimError> {
    params.validate(spec)?;
    let s_count = spec.num_districts();
    let theta = spec.popularity();
    let mut state = SamplerState::new(spec, seed);
    let mut tally = TallyMatrix::zeros(s_count, spec.num_parties());
    let mut weights = vec![0.0; s_count];
    let mean_size = spec.num_electors() as f64 / s_count as f64;
    let damping = damping_frac * mean_size;
    for k in 0..spec.num_parties() {
        let eta = params.eta[k];
        let mut counts = vec![0u64; s_count];
        for placed in 0..spec.party_vote_totals()[k] {
            let inv_total = eta / (placed as f64 + damping).max(1e-300);
            let base = (1.0 - eta) / s_count as f64;
            for (w, &c) in weights.iter_mut().zip(&counts) {
                *w = c as f64 * inv_total + base;
            }
            let s = state.sample(&weights, Axis::District)?;
            counts[s] += 1;
            tally.add_vote(s, k);
        }
        let _ = theta;
    }
    Ok(tally)
}

fn run(
    spec: &ElectorateSpec,
    params: &PcmParams,
    seed: u64,
    mixing: DistrictMixing,
) -> Result<TallyMatrix, SimError> {
    params.validate(spec)?;
    let s_count = spec.num_districts();
    let k_count = spec.num_parties();
    let theta = spec.popularity();
    let mut state = SamplerState::new(spec, seed);
    let mut tally = TallyMatrix::zeros(s_count, k_count);

    // Column-major copy of the tally for the hot per-party district scans.
    let mut counts: Vec<Vec<u64>> = vec![vec![0; s_count]; k_count];
    let mut totals: Vec<u64> = vec![0; k_count];
    let mut fills: Vec<u64> = vec![0; s_count];
    let mut weights = vec![0.0; s_count];
    let mut powered: Vec<Vec<f64>> = Vec::new();
    let mut powered_totals: Vec<f64> = Vec::new();
    if matches!(
        mixing,
        DistrictMixing::PowerShares(_) | DistrictMixing::PowerDamped(..)
    ) {
        powered = vec![vec![0.0; s_count]; k_count];
        powered_totals = vec![0.0; k_count];
    }

    let mean_size = spec.num_electors() as f64 / s_count as f64;

    for _ in 0..spec.num_electors() {
        let k = state.sample(theta, Axis::Party)?;
        let eta = params.eta[k];
        match mixing {
            DistrictMixing::ConstWeight(frac) => {
                let base = (1.0 - eta) * frac * mean_size;
                for (w, &c) in weights.iter_mut().zip(&counts[k]) {
                    *w = eta * c as f64 + base;
                }
            }
            DistrictMixing::NormalizedShares => {
                if totals[k] == 0 {
                    weights.iter_mut().for_each(|w| *w = 1.0);
                } else {
                    let inv_total = eta / totals[k] as f64;
                    let base = (1.0 - eta) / s_count as f64;
                    for (w, &c) in weights.iter_mut().zip(&counts[k]) {
                        *w = c as f64 * inv_total + base;
                    }
                }
            }
            DistrictMixing::DampedShares(frac) => {
                let inv_total = eta / (totals[k] as f64 + frac * mean_size);
                let base = (1.0 - eta) / s_count as f64;
                for (w, &c) in weights.iter_mut().zip(&counts[k]) {
                    *w = c as f64 * inv_total + base;
                }
            }
            DistrictMixing::WithinDistrictShare => {
                let base = (1.0 - eta) / s_count as f64;
                for ((w, &c), &f) in weights.iter_mut().zip(&counts[k]).zip(&fills) {
                    *w = if f > 0 { eta * c as f64 / f as f64 + base } else { base };
                }
            }
            DistrictMixing::PowerShares(_) => {
                let base = (1.0 - eta) / s_count as f64;
                if powered_totals[k] == 0.0 {
                    weights.iter_mut().for_each(|w| *w = base);
                } else {
                    let inv_total = eta / powered_totals[k];
                    for (w, &pc) in weights.iter_mut().zip(&powered[k]) {
                        *w = pc * inv_total + base;
                    }
                }
            }
            DistrictMixing::SmoothedWithinShare(frac) => {
                let base = (1.0 - eta) / s_count as f64;
                let smooth = frac * mean_size;
                for ((w, &c), &f) in weights.iter_mut().zip(&counts[k]).zip(&fills) {
                    *w = eta * c as f64 / (f as f64 + smooth) + base;
                }
            }
            DistrictMixing::PowerDamped(_, frac) => {
                let base = (1.0 - eta) / s_count as f64;
                let inv_total = eta / (powered_totals[k] + frac * mean_size);
                for (w, &pc) in weights.iter_mut().zip(&powered[k]) {
                    *w = pc * inv_total + base;
                }
            }
        }
        let s = state.sample(&weights, Axis::District)?;
        counts[k][s] += 1;
        totals[k] += 1;
        fills[s] += 1;
        match mixing {
            DistrictMixing::PowerShares(p) | DistrictMixing::PowerDamped(p, _) => {
                let new = (counts[k][s] as f64).powf(p);
                powered_totals[k] += new - powered[k][s];
                powered[k][s] = new;
            }
            _ => {}
        }
        tally.add_vote(s, k);
    }
    Ok(tally)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginals_exact_and_deterministic() {
        let spec = ElectorateSpec::equal_districts(6, 3_000, vec![0.5, 0.4, 0.1]).unwrap();
        let p = PcmParams {
            eta: vec![0.5, 0.9, 0.2],
        };
        let tally = simulate_pcm(&spec, &p, 19).unwrap();
        tally.check_rows(&spec).unwrap();
        tally.check_columns(&spec).unwrap();
        assert_eq!(tally, simulate_pcm(&spec, &p, 19).unwrap());
    }

    #[test]
    fn zero_concentration_spreads_by_shares() {
        // With all concentrations at zero the district choice is uniform
        // among non-full districts, so every district's fractions are near
        // the country-wide shares.
        let spec = ElectorateSpec::equal_districts(5, 50_000, vec![0.5, 0.4, 0.1]).unwrap();
        let p = PcmParams {
            eta: vec![0.0, 0.0, 0.0],
        };
        let tally = simulate_pcm(&spec, &p, 23).unwrap();
        for s in 0..5 {
            let f0 = tally.get(s, 0) as f64 / 10_000.0;
            let f2 = tally.get(s, 2) as f64 / 10_000.0;
            assert!((f0 - 0.5).abs() < 0.03, "district {s}: {f0}");
            assert!((f2 - 0.1).abs() < 0.03, "district {s}: {f2}");
        }
    }

    #[test]
    fn heterogeneous_capacities_respected() {
        let spec = ElectorateSpec::new(vec![100, 2_000, 30_000], vec![0.6, 0.4]).unwrap();
        let p = PcmParams {
            eta: vec![0.99, 0.5],
        };
        let tally = simulate_pcm(&spec, &p, 29).unwrap();
        tally.check_rows(&spec).unwrap();
        tally.check_columns(&spec).unwrap();
    }

    #[test]
    fn invalid_eta_rejected() {
        let spec = ElectorateSpec::equal_districts(2, 100, vec![0.5, 0.5]).unwrap();
        assert!(simulate_pcm(&spec, &PcmParams { eta: vec![0.5] }, 1).is_err());
        assert!(simulate_pcm(&spec, &PcmParams { eta: vec![0.5, 1.5] }, 1).is_err());
    }
}
