//! Likelihood-free calibration: ABC rejection and the explore-exploit
//! variant that seeds Gaussian local search from the best prior draws.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::election::ElectorateSpec;
use crate::error::CalibrationError;
use crate::models::{simulate, ModelParams};
use crate::stats::{distance, summarize, DistanceWeights, SummaryStats};

/// Uniform prior over one free parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorParam {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// Independent uniform priors, one per free parameter of the target model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub params: Vec<PriorParam>,
}

impl PriorSpec {
    /// Uniform prior over `[lo, hi]` for each named parameter.
    pub fn uniform(params: &[(&str, f64, f64)]) -> Self {
        Self {
            params: params
                .iter()
                .map(|&(name, lo, hi)| PriorParam {
                    name: name.into(),
                    lo,
                    hi,
                })
                .collect(),
        }
    }

    fn validate_for(&self, target: &ModelTarget) -> Result<(), CalibrationError> {
        let expected = target.free_param_names();
        let got: Vec<&str> = self.params.iter().map(|p| p.name.as_str()).collect();
        if got != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(CalibrationError::InvalidPrior(format!(
                "prior covers {got:?} but the model's free parameters are {expected:?}"
            )));
        }
        for p in &self.params {
            if !(p.lo < p.hi) {
                return Err(CalibrationError::InvalidPrior(format!(
                    "{}: lo {} must be below hi {}",
                    p.name, p.lo, p.hi
                )));
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.params
            .iter()
            .map(|p| rng.gen::<f64>() * (p.hi - p.lo) + p.lo)
            .collect()
    }

    fn clamp(&self, psi: &mut [f64]) {
        for (x, p) in psi.iter_mut().zip(&self.params) {
            *x = x.clamp(p.lo, p.hi);
        }
    }
}

/// Knobs of the calibration loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcConfig {
    /// Candidates drawn from the prior (the full budget for plain rejection).
    pub explore_budget: usize,
    /// Best candidates retained as seeds after each scoring pass.
    pub seed_count: usize,
    /// Gaussian perturbations per seed per round.
    pub exploit_budget: usize,
    /// Perturbation std as a fraction of each parameter's range.
    pub perturb_scale: f64,
    /// Acceptance threshold on the summary distance.
    pub acceptance_eps: f64,
    /// Stop once this many candidates are accepted.
    pub target_accepted: usize,
    pub max_rounds: usize,
    /// Simulations averaged per candidate to damp simulator noise.
    pub replicas_per_candidate: usize,
    pub distance_weights: DistanceWeights,
}

impl Default for AbcConfig {
    fn default() -> Self {
        Self {
            explore_budget: 200,
            seed_count: 10,
            exploit_budget: 50,
            perturb_scale: 0.05,
            acceptance_eps: 0.05,
            target_accepted: 100,
            max_rounds: 20,
            replicas_per_candidate: 5,
            distance_weights: DistanceWeights::default(),
        }
    }
}

impl AbcConfig {
    fn validate(&self) -> Result<(), CalibrationError> {
        if self.explore_budget == 0
            || self.seed_count == 0
            || self.target_accepted == 0
            || self.replicas_per_candidate == 0
        {
            return Err(CalibrationError::InvalidConfig(
                "budgets, seed count and replica count must be >= 1".into(),
            ));
        }
        if !(self.acceptance_eps > 0.0) {
            return Err(CalibrationError::InvalidConfig(
                "acceptance threshold must be positive".into(),
            ));
        }
        if !(self.perturb_scale > 0.0 && self.perturb_scale <= 1.0) {
            return Err(CalibrationError::InvalidConfig(
                "perturbation scale must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// A parameter vector whose mean summary landed within the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedSample {
    pub psi: Vec<f64>,
    pub distance: f64,
}

/// Output of a calibration: the accepted samples and the single evaluated
/// candidate closest to the observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub accepted: Vec<AcceptedSample>,
    pub psi_opt: Vec<f64>,
    pub psi_opt_distance: f64,
    pub evaluations_used: usize,
}

impl CalibrationResult {
    /// True when the budget ran out with nothing accepted; `psi_opt` then
    /// still holds the best candidate seen.
    pub fn no_acceptance(&self) -> bool {
        self.accepted.is_empty()
    }
}

/// A model bound to an electoral setting for calibration. `template`
/// supplies everything that is not a free parameter (e.g. a fixed affinity
/// matrix for the social identity model).
#[derive(Debug, Clone)]
pub struct ModelTarget {
    spec: ElectorateSpec,
    template: ModelParams,
}

impl ModelTarget {
    pub fn new(spec: ElectorateSpec, template: ModelParams) -> Self {
        Self { spec, template }
    }

    pub fn spec(&self) -> &ElectorateSpec {
        &self.spec
    }

    pub fn free_param_names(&self) -> Vec<String> {
        self.template.free_param_names(self.spec.num_parties())
    }

    pub fn params_for(&self, psi: &[f64]) -> Result<ModelParams, CalibrationError> {
        Ok(self.template.with_psi(psi)?)
    }

    /// Scores one candidate: the mean summary over `replicas` seeded runs,
    /// measured against the observation.
    fn evaluate(
        &self,
        psi: &[f64],
        observed: &SummaryStats,
        config: &AbcConfig,
        candidate_seed: u64,
    ) -> Result<f64, CalibrationError> {
        let params = self.params_for(psi)?;
        let mut summaries = Vec::with_capacity(config.replicas_per_candidate);
        for r in 0..config.replicas_per_candidate {
            let tally = simulate(&self.spec, &params, derive_seed(candidate_seed, 7, r as u64))?;
            summaries.push(summarize(&tally, &self.spec)?);
        }
        Ok(distance(
            &SummaryStats::mean(&summaries),
            observed,
            config.distance_weights,
        )?)
    }
}

/// Stable SplitMix64 step, used to derive independent sub-seeds.
fn split_mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    split_mix(split_mix(master.wrapping_add(stream.wrapping_mul(0x9E37_79B9))).wrapping_add(index))
}

/// Evaluation batches run in parallel; results are folded in index order so
/// the outcome is independent of scheduling.
const EVAL_CHUNK: usize = 64;

struct Search<'a> {
    target: &'a ModelTarget,
    observed: &'a SummaryStats,
    config: &'a AbcConfig,
    master_seed: u64,
    evaluated: Vec<(Vec<f64>, f64)>,
    accepted: Vec<AcceptedSample>,
    evaluations_used: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<'a> Search<'a> {
    fn new(
        target: &'a ModelTarget,
        observed: &'a SummaryStats,
        config: &'a AbcConfig,
        master_seed: u64,
    ) -> Self {
        Self {
            target,
            observed,
            config,
            master_seed,
            evaluated: Vec::new(),
            accepted: Vec::new(),
            evaluations_used: 0,
            best: None,
        }
    }

    fn target_reached(&self) -> bool {
        self.accepted.len() >= self.config.target_accepted
    }

    /// Evaluates a batch of candidates and folds the scores in index order.
    /// Returns early (after the finishing chunk) once the acceptance target
    /// is reached.
    fn run_batch(&mut self, candidates: &[Vec<f64>]) -> Result<(), CalibrationError> {
        for chunk in candidates.chunks(EVAL_CHUNK) {
            if self.target_reached() {
                return Ok(());
            }
            let base = self.evaluations_used;
            let scores: Vec<Result<f64, CalibrationError>> = chunk
                .par_iter()
                .enumerate()
                .map(|(j, psi)| {
                    let seed = derive_seed(self.master_seed, 1, (base + j) as u64);
                    self.target.evaluate(psi, self.observed, self.config, seed)
                })
                .collect();
            for (psi, score) in chunk.iter().zip(scores) {
                let d = score?;
                self.evaluations_used += 1;
                self.evaluated.push((psi.clone(), d));
                if self.best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                    self.best = Some((psi.clone(), d));
                }
                if d <= self.config.acceptance_eps && !self.target_reached() {
                    self.accepted.push(AcceptedSample {
                        psi: psi.clone(),
                        distance: d,
                    });
                }
            }
        }
        Ok(())
    }

    /// Current seed pool: the best `seed_count` of everything evaluated.
    fn seed_pool(&mut self) -> Vec<Vec<f64>> {
        self.evaluated
            .sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        self.evaluated
            .iter()
            .take(self.config.seed_count)
            .map(|(psi, _)| psi.clone())
            .collect()
    }

    fn finish(self) -> CalibrationResult {
        let (psi_opt, psi_opt_distance) = self.best.expect("at least one evaluation");
        CalibrationResult {
            accepted: self.accepted,
            psi_opt,
            psi_opt_distance,
            evaluations_used: self.evaluations_used,
        }
    }
}

/// Plain ABC rejection: draw from the prior, accept candidates whose mean
/// summary lands within the threshold, until the acceptance target or the
/// `explore_budget` is exhausted.
pub fn abc_reject(
    target: &ModelTarget,
    observed: &SummaryStats,
    prior: &PriorSpec,
    config: &AbcConfig,
    seed: u64,
) -> Result<CalibrationResult, CalibrationError> {
    config.validate()?;
    prior.validate_for(target)?;
    let mut search = Search::new(target, observed, config, seed);
    let mut prior_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, 0));
    let candidates: Vec<Vec<f64>> = (0..config.explore_budget)
        .map(|_| prior.draw(&mut prior_rng))
        .collect();
    search.run_batch(&candidates)?;
    Ok(search.finish())
}

/// Explore-exploit rejection: score `explore_budget` prior draws, keep the
/// best `seed_count` as seeds, then repeatedly spawn Gaussian perturbations
/// around the seed pool (refreshed elitistically to the best of everything
/// evaluated) until the acceptance target or the round limit is reached.
pub fn abc_explore_exploit(
    target: &ModelTarget,
    observed: &SummaryStats,
    prior: &PriorSpec,
    config: &AbcConfig,
    seed: u64,
) -> Result<CalibrationResult, CalibrationError> {
    config.validate()?;
    prior.validate_for(target)?;
    let mut search = Search::new(target, observed, config, seed);

    let mut prior_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, 0));
    let candidates: Vec<Vec<f64>> = (0..config.explore_budget)
        .map(|_| prior.draw(&mut prior_rng))
        .collect();
    search.run_batch(&candidates)?;

    let stds: Vec<f64> = prior
        .params
        .iter()
        .map(|p| config.perturb_scale * (p.hi - p.lo))
        .collect();

    for round in 0..config.max_rounds {
        if search.target_reached() || config.exploit_budget == 0 {
            break;
        }
        let pool = search.seed_pool();
        if pool.is_empty() {
            break;
        }
        let mut round_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2, round as u64));
        let mut candidates = Vec::with_capacity(pool.len() * config.exploit_budget);
        for psi in &pool {
            for _ in 0..config.exploit_budget {
                let mut perturbed: Vec<f64> = psi
                    .iter()
                    .zip(&stds)
                    .map(|(&x, &sd)| {
                        x + Normal::new(0.0, sd).expect("positive std").sample(&mut round_rng)
                    })
                    .collect();
                prior.clamp(&mut perturbed);
                candidates.push(perturbed);
            }
        }
        search.run_batch(&candidates)?;
    }
    Ok(search.finish())
}

use rand::SeedableRng;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DpmParams;

    fn dpm_target(districts: usize, electors: u64) -> ModelTarget {
        let spec =
            ElectorateSpec::equal_districts(districts, electors, vec![0.5, 0.4, 0.1]).unwrap();
        ModelTarget::new(spec, ModelParams::Dpm(DpmParams::shared(0.5)))
    }

    fn observed_from(target: &ModelTarget, gamma: f64, seed: u64) -> SummaryStats {
        let params = target.params_for(&[gamma]).unwrap();
        let tally = simulate(target.spec(), &params, seed).unwrap();
        summarize(&tally, target.spec()).unwrap()
    }

    #[test]
    fn prior_must_cover_free_params_exactly() {
        let target = dpm_target(4, 400);
        let observed = observed_from(&target, 0.8, 1);
        let config = AbcConfig::default();
        let bad = PriorSpec::uniform(&[("mu", 0.0, 1.0)]);
        assert!(matches!(
            abc_reject(&target, &observed, &bad, &config, 1),
            Err(CalibrationError::InvalidPrior(_))
        ));
        let bad_range = PriorSpec::uniform(&[("gamma", 1.0, 0.0)]);
        assert!(matches!(
            abc_reject(&target, &observed, &bad_range, &config, 1),
            Err(CalibrationError::InvalidPrior(_))
        ));
    }

    #[test]
    fn infinite_threshold_accepts_everything() {
        let target = dpm_target(4, 400);
        let observed = observed_from(&target, 0.8, 1);
        let prior = PriorSpec::uniform(&[("gamma", 0.0, 1.0)]);
        let config = AbcConfig {
            explore_budget: 40,
            target_accepted: 25,
            acceptance_eps: f64::INFINITY,
            replicas_per_candidate: 1,
            ..AbcConfig::default()
        };
        let result = abc_reject(&target, &observed, &prior, &config, 9).unwrap();
        assert_eq!(result.accepted.len(), 25);
        assert!(!result.no_acceptance());
    }

    #[test]
    fn degenerate_prior_returns_the_point() {
        let target = dpm_target(4, 400);
        let observed = observed_from(&target, 0.8, 1);
        let prior = PriorSpec::uniform(&[("gamma", 0.7, 0.7 + 1e-9)]);
        let config = AbcConfig {
            explore_budget: 10,
            target_accepted: 5,
            acceptance_eps: f64::INFINITY,
            replicas_per_candidate: 1,
            ..AbcConfig::default()
        };
        let result = abc_reject(&target, &observed, &prior, &config, 3).unwrap();
        assert!((result.psi_opt[0] - 0.7).abs() < 1e-8);
    }

    #[test]
    fn deterministic_given_seed() {
        let target = dpm_target(6, 600);
        let observed = observed_from(&target, 0.85, 2);
        let prior = PriorSpec::uniform(&[("gamma", 0.0, 1.0)]);
        let config = AbcConfig {
            explore_budget: 20,
            seed_count: 4,
            exploit_budget: 5,
            max_rounds: 2,
            target_accepted: 50,
            replicas_per_candidate: 2,
            ..AbcConfig::default()
        };
        let a = abc_explore_exploit(&target, &observed, &prior, &config, 11).unwrap();
        let b = abc_explore_exploit(&target, &observed, &prior, &config, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn explore_exploit_collapses_to_rejection() {
        let target = dpm_target(4, 400);
        let observed = observed_from(&target, 0.8, 1);
        let prior = PriorSpec::uniform(&[("gamma", 0.0, 1.0)]);
        let config = AbcConfig {
            explore_budget: 1,
            seed_count: 1,
            exploit_budget: 0,
            target_accepted: 10,
            replicas_per_candidate: 1,
            ..AbcConfig::default()
        };
        let a = abc_explore_exploit(&target, &observed, &prior, &config, 21).unwrap();
        let b = abc_reject(&target, &observed, &prior, &config, 21).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn accepted_candidates_respect_bounds_and_optimum() {
        let target = dpm_target(10, 2_000);
        let observed = observed_from(&target, 0.85, 5);
        let prior = PriorSpec::uniform(&[("gamma", 0.3, 0.95)]);
        let config = AbcConfig {
            explore_budget: 30,
            seed_count: 5,
            exploit_budget: 10,
            max_rounds: 3,
            acceptance_eps: 0.25,
            target_accepted: 20,
            replicas_per_candidate: 1,
            ..AbcConfig::default()
        };
        let result = abc_explore_exploit(&target, &observed, &prior, &config, 13).unwrap();
        assert!(!result.accepted.is_empty());
        for a in &result.accepted {
            assert!(a.psi[0] >= 0.3 && a.psi[0] <= 0.95);
            assert!(a.distance <= 0.25);
            assert!(result.psi_opt_distance <= a.distance);
        }
    }

    #[test]
    fn prior_pass_through_is_uniform() {
        // With an unachievable threshold disabled (infinite eps), accepted
        // samples are straight prior draws; bin them and check uniformity.
        let target = dpm_target(2, 100);
        let observed = observed_from(&target, 0.5, 1);
        let prior = PriorSpec::uniform(&[("gamma", 0.0, 1.0)]);
        let config = AbcConfig {
            explore_budget: 2_000,
            target_accepted: 2_000,
            acceptance_eps: f64::INFINITY,
            replicas_per_candidate: 1,
            ..AbcConfig::default()
        };
        let result = abc_reject(&target, &observed, &prior, &config, 17).unwrap();
        let mut bins = [0u32; 5];
        for a in &result.accepted {
            bins[((a.psi[0] * 5.0) as usize).min(4)] += 1;
        }
        for (i, &b) in bins.iter().enumerate() {
            let f = b as f64 / 2_000.0;
            assert!((f - 0.2).abs() < 0.05, "bin {i}: {f}");
        }
    }
}
