//! Social identity model: electors belong to communities drawn from a
//! proportion vector, settle into districts by a community-wise CRP under
//! equalized capacities, and vote for the party they value highest given
//! community-party affinities and per-party noise. Vote shares are emergent;
//! no party quotas apply.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::election::{ElectorateSpec, TallyMatrix};
use crate::error::SimError;
use crate::models::{weighted_choice_masked, AgentTrace};

const PHI_REJECTION_CAP: usize = 10_000;

/// Community proportions: explicit, or drawn by stick-breaking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CommunityProportions {
    Explicit(Vec<f64>),
    StickBreaking(f64),
}

/// Community-party affinities in {-1, 0, 1}: explicit, or drawn uniformly
/// with each party's column rejected until the population-weighted affinity
/// stays at or below one half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AffinitySpec {
    Explicit(Vec<Vec<i8>>),
    Random,
}

/// Per-party valuation spread: explicit, or drawn from a Gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DispersionSpec {
    Explicit(Vec<f64>),
    Gamma(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub num_communities: usize,
    pub proportions: CommunityProportions,
    pub affinity: AffinitySpec,
    pub dispersion: DispersionSpec,
    /// Mixing of the community-CRP district choice: weight `crp_mixing *
    /// n_s(C_i)` for settling near same-community members, against a uniform
    /// branch of weight `1 - crp_mixing`.
    pub crp_mixing: f64,
    /// Blend each elector's valuations with their district's mean valuations.
    pub local_influence: bool,
    /// Fixed blend weight; when absent, drawn from Beta(kappa_beta).
    pub kappa: Option<f64>,
    pub kappa_beta: (f64, f64),
}

impl SimParams {
    /// Individual-preference variant with everything explicit.
    pub fn individual(
        proportions: Vec<f64>,
        affinity: Vec<Vec<i8>>,
        dispersion: Vec<f64>,
        crp_mixing: f64,
    ) -> Self {
        Self {
            num_communities: proportions.len(),
            proportions: CommunityProportions::Explicit(proportions),
            affinity: AffinitySpec::Explicit(affinity),
            dispersion: DispersionSpec::Explicit(dispersion),
            crp_mixing,
            local_influence: false,
            kappa: None,
            kappa_beta: (2.0, 2.0),
        }
    }

    pub(crate) fn validate(&self, spec: &ElectorateSpec) -> Result<(), SimError> {
        let c = self.num_communities;
        if c == 0 {
            return Err(SimError::InvalidParams("need at least one community".into()));
        }
        match &self.proportions {
            CommunityProportions::Explicit(eta) => {
                if eta.len() != c {
                    return Err(SimError::InvalidParams(format!(
                        "{} proportions for {c} communities",
                        eta.len()
                    )));
                }
                if eta.iter().any(|&e| e < 0.0) || (eta.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
                    return Err(SimError::InvalidParams(
                        "community proportions must be non-negative and sum to 1".into(),
                    ));
                }
            }
            CommunityProportions::StickBreaking(sbp) => {
                if !(*sbp > 0.0) {
                    return Err(SimError::InvalidParams(
                        "stick-breaking parameter must be positive".into(),
                    ));
                }
            }
        }
        if let AffinitySpec::Explicit(phi) = &self.affinity {
            if phi.len() != c || phi.iter().any(|row| row.len() != spec.num_parties()) {
                return Err(SimError::InvalidParams(format!(
                    "affinity must be {c} x {}",
                    spec.num_parties()
                )));
            }
            if phi.iter().flatten().any(|v| !(-1..=1).contains(v)) {
                return Err(SimError::InvalidParams(
                    "affinities must lie in {-1, 0, 1}".into(),
                ));
            }
        }
        match &self.dispersion {
            DispersionSpec::Explicit(sigma) => {
                if sigma.len() != spec.num_parties() || sigma.iter().any(|&s| !(s > 0.0)) {
                    return Err(SimError::InvalidParams(
                        "dispersions must be positive, one per party".into(),
                    ));
                }
            }
            DispersionSpec::Gamma(shape) => {
                if !(*shape > 0.0) {
                    return Err(SimError::InvalidParams(
                        "gamma shape must be positive".into(),
                    ));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.crp_mixing) {
            return Err(SimError::InvalidParams("crp_mixing must lie in [0, 1]".into()));
        }
        if let Some(kappa) = self.kappa {
            if !(0.0..=1.0).contains(&kappa) {
                return Err(SimError::InvalidParams("kappa must lie in [0, 1]".into()));
            }
        }
        if !(self.kappa_beta.0 > 0.0) || !(self.kappa_beta.1 > 0.0) {
            return Err(SimError::InvalidParams(
                "Beta hyperparameters must be positive".into(),
            ));
        }
        if !spec.has_equalized_districts() {
            return Err(SimError::InvalidParams(
                "the social identity model requires equalized district sizes".into(),
            ));
        }
        Ok(())
    }
}

pub fn simulate_sim(
    spec: &ElectorateSpec,
    params: &SimParams,
    seed: u64,
) -> Result<TallyMatrix, SimError> {
    Ok(run(spec, params, seed)?.0)
}

pub fn simulate_sim_traced(
    spec: &ElectorateSpec,
    params: &SimParams,
    seed: u64,
) -> Result<(TallyMatrix, AgentTrace), SimError> {
    run(spec, params, seed)
}

fn run(
    spec: &ElectorateSpec,
    params: &SimParams,
    seed: u64,
) -> Result<(TallyMatrix, AgentTrace), SimError> {
    use rand::SeedableRng;
    params.validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_count = spec.num_districts();
    let k_count = spec.num_parties();
    let c_count = params.num_communities;
    let n = spec.num_electors() as usize;

    let eta = match &params.proportions {
        CommunityProportions::Explicit(eta) => eta.clone(),
        CommunityProportions::StickBreaking(sbp) => stick_breaking(c_count, *sbp, &mut rng),
    };

    let phi = match &params.affinity {
        AffinitySpec::Explicit(phi) => phi.clone(),
        AffinitySpec::Random => draw_affinity(&eta, k_count, &mut rng)?,
    };

    // Community membership, iid from the proportions.
    let mut eta_cum = Vec::with_capacity(c_count);
    let mut acc = 0.0;
    for &e in &eta {
        acc += e;
        eta_cum.push(acc);
    }
    let community_of: Vec<u32> = (0..n)
        .map(|_| {
            let r = rng.gen::<f64>() * acc;
            eta_cum.partition_point(|&c| c <= r).min(c_count - 1) as u32
        })
        .collect();

    let district_of = place_by_community_crp(spec, &community_of, c_count, params.crp_mixing, &mut rng);

    let sigma = match &params.dispersion {
        DispersionSpec::Explicit(sigma) => sigma.clone(),
        DispersionSpec::Gamma(shape) => {
            let g = Gamma::new(*shape, 1.0).expect("positive shape");
            (0..k_count).map(|_| g.sample(&mut rng).max(1e-12)).collect()
        }
    };

    // Valuations, elector-major then party.
    let mut lambda = vec![0.0f64; n * k_count];
    for i in 0..n {
        let c = community_of[i] as usize;
        for k in 0..k_count {
            let z: f64 = StandardNormal.sample(&mut rng);
            lambda[i * k_count + k] = phi[c][k] as f64 + sigma[k] * z;
        }
    }

    if params.local_influence {
        let kappa = match params.kappa {
            Some(kappa) => kappa,
            None => Beta::new(params.kappa_beta.0, params.kappa_beta.1)
                .expect("positive Beta parameters")
                .sample(&mut rng),
        };
        local_influence_blend(&mut lambda, k_count, &district_of, s_count, kappa);
    }

    let vote_of = votes_from_valuations(&lambda, k_count);

    let mut tally = TallyMatrix::zeros(s_count, k_count);
    for (&s, &k) in district_of.iter().zip(&vote_of) {
        tally.add_vote(s as usize, k as usize);
    }

    Ok((
        tally,
        AgentTrace {
            num_districts: s_count,
            num_communities: c_count,
            district_of,
            vote_of,
            community_of,
        },
    ))
}

/// Exponent of the fresh-district rate: a community that has settled `m`
/// members so far founds new strongholds at a rate that has decayed by
/// `m^(SETTLEMENT_DECAY - 1)`, so its stronghold count grows like
/// `m^SETTLEMENT_DECAY`. Sub-linear growth is what lets two smaller
/// communities jointly cover more districts than one large community of the
/// same total size; the published polarized-scenario seat splits pin the
/// value.
const SETTLEMENT_DECAY: f64 = 0.6;

/// Exponent on a stronghold's pull. Below one, a community's strongholds
/// equalize in size instead of the earliest one swallowing the rest.
const PULL_FLATTENING: f64 = 0.8;

/// Scale divisor on the fresh-district rate; keeps the stronghold count of a
/// community well below the district count so strongholds stay strongholds.
const SETTLEMENT_SCALE: f64 = 60.0;

/// Settles each elector into a district: with weight `alpha * n_s(C_i)` they
/// join the districts already holding same-community members
/// (proportionally to those counts, full districts excluded), and otherwise
/// pick a uniformly random district with room. The uniform branch weight is
/// `(1 - alpha)` scaled by the community's decayed fresh-district rate.
fn place_by_community_crp(
    spec: &ElectorateSpec,
    community_of: &[u32],
    c_count: usize,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<u32> {
    let s_count = spec.num_districts();
    let mut capacity = spec.district_sizes().to_vec();
    // Attraction by intended district. Arrivals bounced off a full district
    // keep feeding their target's pull, so strongholds persist while the
    // overflow spreads as an even dust; that is what equalizes populations.
    let mut pulls: Vec<Vec<u64>> = vec![vec![0; s_count]; c_count];
    let mut flattened: Vec<Vec<f64>> = vec![vec![0.0; s_count]; c_count];
    let mut flattened_total: Vec<f64> = vec![0.0; c_count];
    let mut members: Vec<u64> = vec![0; c_count];
    let mut open: Vec<u32> = (0..s_count as u32).collect();
    let mut open_pos: Vec<usize> = (0..s_count).collect();

    let mut district_of = Vec::with_capacity(community_of.len());
    for &c in community_of {
        let c = c as usize;
        let follow = alpha * flattened_total[c];
        let scale: f64 = std::env::var("ELECTSIM_SIM_SCALE").ok().and_then(|v| v.parse().ok()).unwrap_or(SETTLEMENT_SCALE);
        let decay: f64 = std::env::var("ELECTSIM_SIM_DECAY").ok().and_then(|v| v.parse().ok()).unwrap_or(SETTLEMENT_DECAY);
        let fresh = (1.0 - alpha) * (members[c] as f64 + 1.0).powf(decay)
            / scale;
        let r = rng.gen::<f64>() * (follow + fresh);
        let intended = if r < follow {
            let mut acc = 0.0;
            let mut chosen = s_count - 1;
            for (s, &w) in flattened[c].iter().enumerate() {
                acc += w;
                if r < alpha * acc {
                    chosen = s;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..s_count)
        };
        pulls[c][intended] += 1;
        members[c] += 1;
        let new = (pulls[c][intended] as f64).powf(PULL_FLATTENING);
        flattened_total[c] += new - flattened[c][intended];
        flattened[c][intended] = new;

        let s = if capacity[intended] > 0 {
            intended
        } else {
            open[rng.gen_range(0..open.len())] as usize
        };
        capacity[s] -= 1;
        district_of.push(s as u32);
        if capacity[s] == 0 {
            let pos = open_pos[s];
            let last = *open.last().unwrap() as usize;
            open.swap_remove(pos);
            open_pos[last] = pos;
            open_pos[s] = usize::MAX;
        }
    }
    district_of
}

fn stick_breaking(c_count: usize, sbp: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let beta = Beta::new(1.0, sbp).expect("positive parameters");
    let mut eta = Vec::with_capacity(c_count);
    let mut remaining = 1.0;
    for _ in 0..c_count - 1 {
        let v: f64 = beta.sample(rng);
        eta.push(remaining * v);
        remaining *= 1.0 - v;
    }
    eta.push(remaining);
    eta
}

/// Draws each party's affinity column uniformly over {-1, 0, 1}, rejecting
/// until the population-weighted affinity is at most one half: no party may
/// be in good standing with much more than half the electorate.
fn draw_affinity(
    eta: &[f64],
    k_count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<i8>>, SimError> {
    let c_count = eta.len();
    let mut phi = vec![vec![0i8; k_count]; c_count];
    for k in 0..k_count {
        let mut accepted = false;
        for _ in 0..PHI_REJECTION_CAP {
            let col: Vec<i8> = (0..c_count).map(|_| rng.gen_range(-1..=1)).collect();
            let weighted: f64 = eta.iter().zip(&col).map(|(&e, &p)| e * p as f64).sum();
            if weighted <= 0.5 {
                for (c, &v) in col.iter().enumerate() {
                    phi[c][k] = v;
                }
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(SimError::PhiRejectionExceeded(PHI_REJECTION_CAP));
        }
    }
    Ok(phi)
}

/// Replaces each valuation by `kappa * own + (1 - kappa) * district mean`
/// (the mean includes the elector's own valuation).
pub fn local_influence_blend(
    lambda: &mut [f64],
    num_parties: usize,
    district_of: &[u32],
    num_districts: usize,
    kappa: f64,
) {
    let mut sums = vec![0.0f64; num_districts * num_parties];
    let mut members = vec![0u64; num_districts];
    for (i, &s) in district_of.iter().enumerate() {
        members[s as usize] += 1;
        for k in 0..num_parties {
            sums[s as usize * num_parties + k] += lambda[i * num_parties + k];
        }
    }
    for (i, &s) in district_of.iter().enumerate() {
        let m = members[s as usize] as f64;
        for k in 0..num_parties {
            let mean = sums[s as usize * num_parties + k] / m;
            let own = &mut lambda[i * num_parties + k];
            *own = kappa * *own + (1.0 - kappa) * mean;
        }
    }
}

/// Argmax vote per elector over a row-major valuation matrix; ties break to
/// the lowest party index.
pub fn votes_from_valuations(lambda: &[f64], num_parties: usize) -> Vec<u32> {
    lambda
        .chunks_exact(num_parties)
        .map(|row| {
            let mut best = 0usize;
            for k in 1..num_parties {
                if row[k] > row[best] {
                    best = k;
                }
            }
            best as u32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::community_histogram;
    use rand::SeedableRng;

    fn polarized_params(crp_mixing: f64) -> SimParams {
        SimParams::individual(
            vec![0.5, 0.3, 0.2],
            vec![vec![1, -1, 0], vec![-1, 1, 0], vec![-1, 1, 0]],
            vec![1.0, 1.0, 2.0],
            crp_mixing,
        )
    }

    #[test]
    fn rows_exact_and_deterministic() {
        let spec = ElectorateSpec::equal_districts(10, 5_000, vec![0.4, 0.4, 0.2]).unwrap();
        let p = polarized_params(0.9);
        let tally = simulate_sim(&spec, &p, 101).unwrap();
        tally.check_rows(&spec).unwrap();
        assert_eq!(tally, simulate_sim(&spec, &p, 101).unwrap());
    }

    #[test]
    fn requires_equalized_districts() {
        let spec = ElectorateSpec::new(vec![10, 20], vec![0.5, 0.5]).unwrap();
        let p = polarized_params(0.5);
        assert!(matches!(
            simulate_sim(&spec, &p, 1),
            Err(SimError::InvalidParams(_))
        ));
    }

    #[test]
    fn noise_free_limit_votes_by_affinity() {
        // With vanishing dispersion and distinct affinity rows, every elector
        // votes argmax_k phi[community][k].
        let spec = ElectorateSpec::equal_districts(5, 1_000, vec![0.3, 0.4, 0.3]).unwrap();
        let mut p = polarized_params(0.5);
        p.dispersion = DispersionSpec::Explicit(vec![1e-12, 1e-12, 1e-12]);
        let (_, trace) = simulate_sim_traced(&spec, &p, 7).unwrap();
        for (&c, &v) in trace.community_of.iter().zip(&trace.vote_of) {
            let expect = if c == 0 { 0 } else { 1 };
            assert_eq!(v, expect);
        }
    }

    #[test]
    fn kappa_one_matches_individual_variant_bitwise() {
        let spec = ElectorateSpec::equal_districts(8, 4_000, vec![0.4, 0.3, 0.3]).unwrap();
        let individual = polarized_params(0.8);
        let mut local = individual.clone();
        local.local_influence = true;
        local.kappa = Some(1.0);
        assert_eq!(
            simulate_sim(&spec, &individual, 55).unwrap(),
            simulate_sim(&spec, &local, 55).unwrap()
        );
    }

    #[test]
    fn uniform_placement_when_mixing_off() {
        // alpha_crp = 0: placement is uniform among open districts, so one
        // community's histogram stays within 4 sigma of N/S per district.
        let spec = ElectorateSpec::equal_districts(10, 100_000, vec![0.5, 0.5]).unwrap();
        let p = SimParams::individual(
            vec![1.0],
            vec![vec![1, -1]],
            vec![1.0, 1.0],
            0.0,
        );
        let (_, trace) = simulate_sim_traced(&spec, &p, 3).unwrap();
        let hist = community_histogram(&trace, 0).unwrap();
        let expect = 10_000.0;
        let sd = (100_000.0_f64 * 0.1 * 0.9).sqrt();
        for (s, &h) in hist.iter().enumerate() {
            assert!(
                (h as f64 - expect).abs() < 4.0 * sd,
                "district {s}: {h} vs {expect}"
            );
        }
        assert_eq!(hist.iter().sum::<u64>(), 100_000);
    }

    #[test]
    fn high_mixing_concentrates_communities() {
        // Rich-get-richer placement: some district should hold well over
        // twice the community's global proportion. Verified across seeds.
        let spec = ElectorateSpec::equal_districts(20, 20_000, vec![0.5, 0.5]).unwrap();
        let p = SimParams::individual(
            vec![0.3, 0.7],
            vec![vec![1, -1], vec![-1, 1]],
            vec![1.0, 1.0],
            0.99,
        );
        let mut concentrated = 0;
        for seed in 0..20 {
            let (_, trace) = simulate_sim_traced(&spec, &p, seed).unwrap();
            let hist = community_histogram(&trace, 0).unwrap();
            let total: u64 = hist.iter().sum();
            let global_share = total as f64 / 20_000.0;
            let max_share = hist
                .iter()
                .map(|&h| h as f64 / 1_000.0)
                .fold(0.0f64, f64::max);
            if max_share > 2.0 * global_share {
                concentrated += 1;
            }
        }
        assert!(concentrated >= 19, "only {concentrated}/20 runs concentrated");
    }

    #[test]
    fn stick_breaking_proportions_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let eta = stick_breaking(6, 1.5, &mut rng);
            assert_eq!(eta.len(), 6);
            assert!((eta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(eta.iter().all(|&e| e >= 0.0));
        }
    }

    #[test]
    fn drawn_affinity_respects_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let eta = vec![0.5, 0.3, 0.2];
        for _ in 0..200 {
            let phi = draw_affinity(&eta, 3, &mut rng).unwrap();
            for k in 0..3 {
                let w: f64 = eta.iter().enumerate().map(|(c, &e)| e * phi[c][k] as f64).sum();
                assert!(w <= 0.5 + 1e-12);
            }
        }
    }
}
