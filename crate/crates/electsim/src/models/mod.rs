//! The five generative voter models. Each maps an electoral setting, a
//! parameter set and a seed to a tally, sequentially and reproducibly.

mod dm;
mod dpm;
mod ecm;
mod pcm;
mod sim;

pub use dm::simulate_dm;
pub use dpm::{simulate_dpm, DpmParams, Polarization};
pub use ecm::{simulate_ecm, simulate_ecm_traced, EcmParams};
#[doc(hidden)]
pub use ecm::simulate_ecm_with_global_dishes;
pub use pcm::{simulate_pcm, PcmParams};
#[doc(hidden)]
pub use pcm::{simulate_pcm_with_mixing_const, simulate_pcm_with_mixing_damped, simulate_pcm_with_mixing_normalized, simulate_pcm_with_mixing_within, simulate_pcm_with_mixing_power, simulate_pcm_with_mixing_smoothed, simulate_pcm_with_mixing_power_damped, simulate_pcm_party_major};
pub use sim::{
    local_influence_blend, simulate_sim, simulate_sim_traced, votes_from_valuations,
    AffinitySpec, CommunityProportions, DispersionSpec, SimParams,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::election::{ElectorateSpec, TallyMatrix};
use crate::error::SimError;

/// Which generative model a run or calibration targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dm,
    Dpm,
    Ecm,
    Pcm,
    Sim,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Dm => "dm",
            ModelKind::Dpm => "dpm",
            ModelKind::Ecm => "ecm",
            ModelKind::Pcm => "pcm",
            ModelKind::Sim => "sim",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dm" => Some(ModelKind::Dm),
            "dpm" => Some(ModelKind::Dpm),
            "ecm" => Some(ModelKind::Ecm),
            "pcm" => Some(ModelKind::Pcm),
            "sim" => Some(ModelKind::Sim),
            _ => None,
        }
    }
}

/// Per-model parameter sets.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Dm,
    Dpm(DpmParams),
    Ecm(EcmParams),
    Pcm(PcmParams),
    Sim(SimParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Dm => ModelKind::Dm,
            ModelParams::Dpm(_) => ModelKind::Dpm,
            ModelParams::Ecm(_) => ModelKind::Ecm,
            ModelParams::Pcm(_) => ModelKind::Pcm,
            ModelParams::Sim(_) => ModelKind::Sim,
        }
    }

    /// Full parameter validation against a setting, without running.
    pub fn validate(&self, spec: &ElectorateSpec) -> Result<(), SimError> {
        match self {
            ModelParams::Dm => Ok(()),
            ModelParams::Dpm(p) => p.validate(spec),
            ModelParams::Ecm(p) => p.validate(),
            ModelParams::Pcm(p) => p.validate(spec),
            ModelParams::Sim(p) => p.validate(spec),
        }
    }

    /// Names of the free (calibratable) parameters, in vector order.
    pub fn free_param_names(&self, num_parties: usize) -> Vec<String> {
        match self {
            ModelParams::Dm => vec![],
            ModelParams::Dpm(_) => vec!["gamma".into()],
            ModelParams::Ecm(_) => vec!["alpha".into(), "beta".into()],
            ModelParams::Pcm(_) => (0..num_parties).map(|k| format!("eta_{k}")).collect(),
            ModelParams::Sim(_) => vec!["alpha_crp".into()],
        }
    }

    /// The current free-parameter vector.
    pub fn psi(&self) -> Vec<f64> {
        match self {
            ModelParams::Dm => vec![],
            ModelParams::Dpm(p) => vec![p.gamma.shared_value()],
            ModelParams::Ecm(p) => vec![p.alpha, p.beta],
            ModelParams::Pcm(p) => p.eta.clone(),
            ModelParams::Sim(p) => vec![p.crp_mixing],
        }
    }

    /// Returns a copy with the free parameters replaced by `psi`. Everything
    /// not in the free vector (e.g. a SIM affinity matrix) is kept.
    pub fn with_psi(&self, psi: &[f64]) -> Result<ModelParams, SimError> {
        let expect = self.psi().len();
        if psi.len() != expect {
            return Err(SimError::InvalidParams(format!(
                "expected {expect} free parameters, got {}",
                psi.len()
            )));
        }
        Ok(match self {
            ModelParams::Dm => ModelParams::Dm,
            ModelParams::Dpm(_) => ModelParams::Dpm(DpmParams {
                gamma: Polarization::Shared(psi[0]),
            }),
            ModelParams::Ecm(_) => ModelParams::Ecm(EcmParams {
                alpha: psi[0],
                beta: psi[1],
            }),
            ModelParams::Pcm(_) => ModelParams::Pcm(PcmParams { eta: psi.to_vec() }),
            ModelParams::Sim(p) => {
                let mut p = p.clone();
                p.crp_mixing = psi[0];
                ModelParams::Sim(p)
            }
        })
    }
}

/// Runs the model named by `params` on `spec` with the given seed.
pub fn simulate(
    spec: &ElectorateSpec,
    params: &ModelParams,
    seed: u64,
) -> Result<TallyMatrix, SimError> {
    match params {
        ModelParams::Dm => simulate_dm(spec, seed),
        ModelParams::Dpm(p) => simulate_dpm(spec, p, seed),
        ModelParams::Ecm(p) => simulate_ecm(spec, p, seed),
        ModelParams::Pcm(p) => simulate_pcm(spec, p, seed),
        ModelParams::Sim(p) => simulate_sim(spec, p, seed),
    }
}

/// Per-elector record of a run: district, vote, and community membership.
#[derive(Debug, Clone)]
pub struct AgentTrace {
    pub num_districts: usize,
    pub num_communities: usize,
    /// `Z_i`: district of each elector.
    pub district_of: Vec<u32>,
    /// `X_i`: party voted for by each elector.
    pub vote_of: Vec<u32>,
    /// `C_i`: community of each elector. Global community ids for the social
    /// identity model; per-district community ids for the community model.
    pub community_of: Vec<u32>,
}

/// Counts the members of one community per district.
pub fn community_histogram(trace: &AgentTrace, community: usize) -> Result<Vec<u64>, SimError> {
    if community >= trace.num_communities || trace.district_of.is_empty() {
        return Err(SimError::UnknownCommunity(community));
    }
    let mut counts = vec![0u64; trace.num_districts];
    for (&s, &c) in trace.district_of.iter().zip(&trace.community_of) {
        if c as usize == community {
            counts[s as usize] += 1;
        }
    }
    Ok(counts)
}

/// Draws from a Dirichlet with parameter vector `alpha` by the usual
/// gamma-normalize construction. Entries with zero mass stay at exactly zero.
pub(crate) fn sample_dirichlet(alpha: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand_distr::{Distribution, Gamma};
    let mut draw: Vec<f64> = alpha
        .iter()
        .map(|&a| {
            if a > 0.0 {
                Gamma::new(a, 1.0).expect("positive shape").sample(rng)
            } else {
                0.0
            }
        })
        .collect();
    let sum: f64 = draw.iter().sum();
    if sum > 0.0 {
        for d in &mut draw {
            *d /= sum;
        }
        draw
    } else {
        // All gamma draws underflowed (possible for very sparse alpha);
        // fall back to the parameter direction itself.
        alpha.to_vec()
    }
}

/// Weighted choice over indices where `mask` is true, with uniform fallback
/// when every unmasked weight is zero. `None` when nothing is unmasked.
pub(crate) fn weighted_choice_masked(
    rng: &mut ChaCha8Rng,
    weights: &[f64],
    mask: impl Fn(usize) -> bool,
) -> Option<usize> {
    let mut total = 0.0;
    let mut active = 0usize;
    for (i, w) in weights.iter().enumerate() {
        if mask(i) {
            total += w;
            active += 1;
        }
    }
    if active == 0 {
        return None;
    }
    if total > 0.0 {
        let r = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut last = None;
        for (i, w) in weights.iter().enumerate() {
            if !mask(i) {
                continue;
            }
            last = Some(i);
            acc += w;
            if r < acc {
                return Some(i);
            }
        }
        last
    } else {
        let pick = rng.gen_range(0..active);
        let mut seen = 0usize;
        for (i, _) in weights.iter().enumerate() {
            if mask(i) {
                if seen == pick {
                    return Some(i);
                }
                seen += 1;
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn dirichlet_sums_to_one_and_respects_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d = sample_dirichlet(&[0.5, 0.4, 0.0, 0.1], &mut rng);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(d[2], 0.0);
        }
    }

    #[test]
    fn histogram_rejects_unknown_community() {
        let trace = AgentTrace {
            num_districts: 2,
            num_communities: 1,
            district_of: vec![0, 1, 1],
            vote_of: vec![0, 0, 1],
            community_of: vec![0, 0, 0],
        };
        assert_eq!(community_histogram(&trace, 0).unwrap(), vec![1, 2]);
        assert!(matches!(
            community_histogram(&trace, 1),
            Err(SimError::UnknownCommunity(1))
        ));
    }

    #[test]
    fn histogram_rejects_empty_trace() {
        let trace = AgentTrace {
            num_districts: 0,
            num_communities: 0,
            district_of: vec![],
            vote_of: vec![],
            community_of: vec![],
        };
        assert!(community_histogram(&trace, 0).is_err());
    }
}
