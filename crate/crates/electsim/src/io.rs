//! Ingestion of observed election results, experiment configuration files,
//! and line-delimited run records.
//!
//! Observed results are comma-separated text with the header
//! `district,party,votes`, one row per (district, party) pair, no quoting.
//! Configs are TOML documents whose keys mirror the type fields; unknown keys
//! are errors. Run records are JSON lines behind a schema-version header, so
//! sweeps can append as they stream.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::abc::{AbcConfig, PriorParam, PriorSpec};
use crate::election::{ElectorateSpec, TallyMatrix};
use crate::error::DataError;
use crate::models::{
    AffinitySpec, CommunityProportions, DispersionSpec, DpmParams, EcmParams, ModelKind,
    ModelParams, PcmParams, Polarization, SimParams,
};
use crate::stats::{summarize, DistanceWeights, SummaryStats};

/// An ingested real election: per-district per-party vote counts, with the
/// setting and tally derived from them. Parties are ranked by descending
/// total votes, so party 0 is the overall winner of the popular vote.
#[derive(Debug, Clone)]
pub struct ObservedElection {
    pub name: String,
    pub district_ids: Vec<String>,
    pub party_ids: Vec<String>,
    pub spec: ElectorateSpec,
    pub tally: TallyMatrix,
}

impl ObservedElection {
    pub fn summary(&self) -> SummaryStats {
        summarize(&self.tally, &self.spec).expect("ingested tally is consistent")
    }
}

/// Loads an observed election from a `district,party,votes` file.
pub fn load_observed(path: impl AsRef<Path>) -> Result<ObservedElection, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);

    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break (no + 1, line);
            }
            None => return Err(DataError::EmptyFile(display)),
        }
    };
    if header.1.trim() != "district,party,votes" {
        return Err(DataError::Parse {
            path: display,
            line: header.0,
            msg: format!("expected header 'district,party,votes', got '{}'", header.1.trim()),
        });
    }

    let mut district_index: HashMap<String, usize> = HashMap::new();
    let mut party_index: HashMap<String, usize> = HashMap::new();
    let mut district_ids = Vec::new();
    let mut party_ids = Vec::new();
    let mut rows: HashMap<(usize, usize), u64> = HashMap::new();

    for (no, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(DataError::Parse {
                path: display,
                line: no + 1,
                msg: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let votes: u64 = fields[2].trim().parse().map_err(|_| DataError::Parse {
            path: display.clone(),
            line: no + 1,
            msg: format!("invalid vote count '{}'", fields[2].trim()),
        })?;
        let d = *district_index
            .entry(fields[0].trim().to_string())
            .or_insert_with(|| {
                district_ids.push(fields[0].trim().to_string());
                district_ids.len() - 1
            });
        let p = *party_index
            .entry(fields[1].trim().to_string())
            .or_insert_with(|| {
                party_ids.push(fields[1].trim().to_string());
                party_ids.len() - 1
            });
        if rows.insert((d, p), votes).is_some() {
            return Err(DataError::DuplicatePair {
                path: display,
                line: no + 1,
            });
        }
    }
    if rows.is_empty() {
        return Err(DataError::EmptyFile(display));
    }

    // Rank parties by descending total votes (ties keep file order), the
    // convention used when comparing against published results.
    let mut totals: Vec<u64> = vec![0; party_ids.len()];
    for (&(_, p), &v) in &rows {
        totals[p] += v;
    }
    let mut order: Vec<usize> = (0..party_ids.len()).collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(totals[p]), p));
    let rank_of: HashMap<usize, usize> = order.iter().enumerate().map(|(r, &p)| (p, r)).collect();

    let s_count = district_ids.len();
    let k_count = party_ids.len();
    let mut grid = vec![vec![0u64; k_count]; s_count];
    for (&(d, p), &v) in &rows {
        grid[d][rank_of[&p]] = v;
    }
    let tally = TallyMatrix::from_rows(grid)?;

    let district_sizes: Vec<u64> = (0..s_count).map(|s| tally.row_sum(s)).collect();
    let party_totals: Vec<u64> = (0..k_count).map(|k| tally.column_sum(k)).collect();
    let spec = ElectorateSpec::from_vote_totals(district_sizes, party_totals)?;

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| display.clone());
    Ok(ObservedElection {
        name,
        district_ids,
        party_ids: order.into_iter().map(|p| party_ids[p].clone()).collect(),
        spec,
        tally,
    })
}

/// Writes an observed election back to the `district,party,votes` format.
pub fn write_observed(obs: &ObservedElection, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut out = String::from("district,party,votes\n");
    for (s, district) in obs.district_ids.iter().enumerate() {
        for (k, party) in obs.party_ids.iter().enumerate() {
            out.push_str(&format!("{district},{party},{}\n", obs.tally.get(s, k)));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub const RUNS_SCHEMA_VERSION: u32 = 1;

/// One simulation run: enough to replay it exactly and to aggregate without
/// re-simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub params: Vec<f64>,
    pub seed: u64,
    pub spec_digest: String,
    pub seats: Vec<u64>,
    pub summary: SummaryStats,
    pub wall_time_secs: f64,
}

#[derive(Serialize, Deserialize)]
struct RunsHeader {
    schema: String,
    version: u32,
}

fn runs_header_line() -> String {
    serde_json::to_string(&RunsHeader {
        schema: "electsim-runs".into(),
        version: RUNS_SCHEMA_VERSION,
    })
    .expect("header serializes")
}

/// Writes records to a fresh file: a schema-version header line, then one
/// JSON record per line.
pub fn write_runs(records: &[RunRecord], path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "{}", runs_header_line())?;
    for r in records {
        writeln!(file, "{}", serde_json::to_string(r).expect("record serializes"))?;
    }
    Ok(())
}

/// Appends records, creating the file (with its header) if needed.
pub fn append_runs(records: &[RunRecord], path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let mut file = if path.exists() {
        fs::OpenOptions::new().append(true).open(path)?
    } else {
        let mut f = fs::File::create(path)?;
        writeln!(f, "{}", runs_header_line())?;
        f
    };
    for r in records {
        writeln!(file, "{}", serde_json::to_string(r).expect("record serializes"))?;
    }
    Ok(())
}

/// Reads a run record file written by [`write_runs`] or [`append_runs`].
pub fn read_runs(path: impl AsRef<Path>) -> Result<Vec<RunRecord>, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| DataError::EmptyFile(display.clone()))??;
    let header: RunsHeader =
        serde_json::from_str(&header_line).map_err(|e| DataError::Parse {
            path: display.clone(),
            line: 1,
            msg: format!("bad header: {e}"),
        })?;
    if header.schema != "electsim-runs" {
        return Err(DataError::Parse {
            path: display,
            line: 1,
            msg: format!("unknown schema '{}'", header.schema),
        });
    }
    if header.version != RUNS_SCHEMA_VERSION {
        return Err(DataError::SchemaVersionMismatch {
            found: header.version,
            supported: RUNS_SCHEMA_VERSION,
        });
    }
    let mut records = Vec::new();
    for (no, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| DataError::Parse {
            path: display.clone(),
            line: no + 2,
            msg: e.to_string(),
        })?);
    }
    Ok(records)
}

/// `[electorate]` section of a run config. Either explicit `district_sizes`
/// or `num_districts` (+ `num_electors`) for an equalized split.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectorateConfig {
    pub num_districts: Option<usize>,
    pub num_electors: Option<u64>,
    pub district_sizes: Option<Vec<u64>>,
    pub popularity: Option<Vec<f64>>,
    pub party_vote_totals: Option<Vec<u64>>,
}

impl ElectorateConfig {
    pub fn build(&self) -> Result<ElectorateSpec, DataError> {
        let sizes = match (&self.district_sizes, self.num_districts) {
            (Some(sizes), _) => sizes.clone(),
            (None, Some(s)) => {
                let n = self.num_electors.ok_or_else(|| {
                    DataError::Spec(crate::error::SpecError::NonPositive(
                        "num_electors is required when district_sizes is omitted".into(),
                    ))
                })?;
                crate::election::equalized_sizes(n, s)
            }
            (None, None) => {
                return Err(DataError::Spec(crate::error::SpecError::NonPositive(
                    "either district_sizes or num_districts is required".into(),
                )))
            }
        };
        if let Some(n) = self.num_electors {
            let total: u64 = sizes.iter().sum();
            if total != n {
                return Err(DataError::Spec(crate::error::SpecError::SizeMismatch(
                    format!("district sizes sum to {total} but num_electors is {n}"),
                )));
            }
        }
        let spec = match (&self.popularity, &self.party_vote_totals) {
            (Some(theta), Some(v)) => {
                ElectorateSpec::from_shares_and_totals(sizes, theta.clone(), v.clone())?
            }
            (Some(theta), None) => ElectorateSpec::new(sizes, theta.clone())?,
            (None, Some(v)) => ElectorateSpec::from_vote_totals(sizes, v.clone())?,
            (None, None) => {
                return Err(DataError::Spec(crate::error::SpecError::NonPositive(
                    "either popularity or party_vote_totals is required".into(),
                )))
            }
        };
        Ok(spec)
    }
}

/// `[model]` section: `kind` plus that model's parameters. Keys from other
/// models (or unknown keys) are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: String,
    // district-wise polarization
    pub gamma: Option<Polarization>,
    // elector community
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    // party-wise concentration
    pub eta: Option<Vec<f64>>,
    // social identity
    pub num_communities: Option<usize>,
    pub community_proportions: Option<Vec<f64>>,
    pub stick_breaking: Option<f64>,
    pub affinity: Option<Vec<Vec<i8>>>,
    pub sigma: Option<Vec<f64>>,
    pub sigma_gamma_shape: Option<f64>,
    pub alpha_crp: Option<f64>,
    pub local_influence: Option<bool>,
    pub kappa: Option<f64>,
    pub kappa_beta: Option<[f64; 2]>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelParams, DataError> {
        let kind = ModelKind::parse(&self.kind).ok_or_else(|| DataError::Parse {
            path: "[model]".into(),
            line: 0,
            msg: format!("unknown model kind '{}'", self.kind),
        })?;
        let allowed: &[&str] = match kind {
            ModelKind::Dm => &[],
            ModelKind::Dpm => &["gamma"],
            ModelKind::Ecm => &["alpha", "beta"],
            ModelKind::Pcm => &["eta"],
            ModelKind::Sim => &[
                "num_communities",
                "community_proportions",
                "stick_breaking",
                "affinity",
                "sigma",
                "sigma_gamma_shape",
                "alpha_crp",
                "local_influence",
                "kappa",
                "kappa_beta",
            ],
        };
        let set: Vec<(&str, bool)> = vec![
            ("gamma", self.gamma.is_some()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("eta", self.eta.is_some()),
            ("num_communities", self.num_communities.is_some()),
            ("community_proportions", self.community_proportions.is_some()),
            ("stick_breaking", self.stick_breaking.is_some()),
            ("affinity", self.affinity.is_some()),
            ("sigma", self.sigma.is_some()),
            ("sigma_gamma_shape", self.sigma_gamma_shape.is_some()),
            ("alpha_crp", self.alpha_crp.is_some()),
            ("local_influence", self.local_influence.is_some()),
            ("kappa", self.kappa.is_some()),
            ("kappa_beta", self.kappa_beta.is_some()),
        ];
        for (name, present) in set {
            if present && !allowed.contains(&name) {
                return Err(DataError::Parse {
                    path: "[model]".into(),
                    line: 0,
                    msg: format!("'{name}' is not a parameter of model '{}'", self.kind),
                });
            }
        }

        let missing = |what: &str| DataError::Parse {
            path: "[model]".into(),
            line: 0,
            msg: format!("model '{}' requires '{what}'", self.kind),
        };
        Ok(match kind {
            ModelKind::Dm => ModelParams::Dm,
            ModelKind::Dpm => ModelParams::Dpm(DpmParams {
                gamma: self.gamma.clone().ok_or_else(|| missing("gamma"))?,
            }),
            ModelKind::Ecm => ModelParams::Ecm(EcmParams {
                alpha: self.alpha.ok_or_else(|| missing("alpha"))?,
                beta: self.beta.ok_or_else(|| missing("beta"))?,
            }),
            ModelKind::Pcm => ModelParams::Pcm(PcmParams {
                eta: self.eta.clone().ok_or_else(|| missing("eta"))?,
            }),
            ModelKind::Sim => {
                let proportions = match (&self.community_proportions, self.stick_breaking) {
                    (Some(eta), None) => CommunityProportions::Explicit(eta.clone()),
                    (None, Some(c)) => CommunityProportions::StickBreaking(c),
                    _ => {
                        return Err(missing(
                            "exactly one of community_proportions / stick_breaking",
                        ))
                    }
                };
                let num_communities = match (&proportions, self.num_communities) {
                    (CommunityProportions::Explicit(eta), c) => {
                        let c = c.unwrap_or(eta.len());
                        if c != eta.len() {
                            return Err(DataError::Parse {
                                path: "[model]".into(),
                                line: 0,
                                msg: "num_communities disagrees with community_proportions".into(),
                            });
                        }
                        c
                    }
                    (CommunityProportions::StickBreaking(_), Some(c)) => c,
                    (CommunityProportions::StickBreaking(_), None) => {
                        return Err(missing("num_communities"))
                    }
                };
                let dispersion = match (&self.sigma, self.sigma_gamma_shape) {
                    (Some(sigma), None) => DispersionSpec::Explicit(sigma.clone()),
                    (None, Some(shape)) => DispersionSpec::Gamma(shape),
                    _ => return Err(missing("exactly one of sigma / sigma_gamma_shape")),
                };
                ModelParams::Sim(SimParams {
                    num_communities,
                    proportions,
                    affinity: match &self.affinity {
                        Some(phi) => AffinitySpec::Explicit(phi.clone()),
                        None => AffinitySpec::Random,
                    },
                    dispersion,
                    crp_mixing: self.alpha_crp.ok_or_else(|| missing("alpha_crp"))?,
                    local_influence: self.local_influence.unwrap_or(false),
                    kappa: self.kappa,
                    kappa_beta: self
                        .kappa_beta
                        .map(|[a, b]| (a, b))
                        .unwrap_or((2.0, 2.0)),
                })
            }
        })
    }
}

/// A full run config: setting plus model.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub electorate: ElectorateConfig,
    pub model: ModelConfig,
}

/// A sweep config: setting, base model, a per-parameter grid of values
/// (Cartesian product over the model's free parameters), replicas and seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub replicas: usize,
    pub base_seed: u64,
    pub electorate: ElectorateConfig,
    pub model: ModelConfig,
    pub grid: std::collections::BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorFileParam {
    name: String,
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorFile {
    param: Vec<PriorFileParam>,
}

/// Copy of [`AbcConfig`] with every knob optional; omitted knobs take the
/// defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AbcFile {
    explore_budget: Option<usize>,
    seed_count: Option<usize>,
    exploit_budget: Option<usize>,
    perturb_scale: Option<f64>,
    acceptance_eps: Option<f64>,
    target_accepted: Option<usize>,
    max_rounds: Option<usize>,
    replicas_per_candidate: Option<usize>,
    distance_weights: Option<[f64; 4]>,
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| DataError::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })
}

pub fn load_run_config(path: impl AsRef<Path>) -> Result<RunConfig, DataError> {
    parse_toml(path)
}

pub fn load_sweep_config(path: impl AsRef<Path>) -> Result<SweepConfig, DataError> {
    parse_toml(path)
}

pub fn load_prior(path: impl AsRef<Path>) -> Result<PriorSpec, DataError> {
    let file: PriorFile = parse_toml(path)?;
    Ok(PriorSpec {
        params: file
            .param
            .into_iter()
            .map(|p| PriorParam {
                name: p.name,
                lo: p.lo,
                hi: p.hi,
            })
            .collect(),
    })
}

pub fn load_abc_config(path: impl AsRef<Path>) -> Result<AbcConfig, DataError> {
    let file: AbcFile = parse_toml(path)?;
    let d = AbcConfig::default();
    Ok(AbcConfig {
        explore_budget: file.explore_budget.unwrap_or(d.explore_budget),
        seed_count: file.seed_count.unwrap_or(d.seed_count),
        exploit_budget: file.exploit_budget.unwrap_or(d.exploit_budget),
        perturb_scale: file.perturb_scale.unwrap_or(d.perturb_scale),
        acceptance_eps: file.acceptance_eps.unwrap_or(d.acceptance_eps),
        target_accepted: file.target_accepted.unwrap_or(d.target_accepted),
        max_rounds: file.max_rounds.unwrap_or(d.max_rounds),
        replicas_per_candidate: file
            .replicas_per_candidate
            .unwrap_or(d.replicas_per_candidate),
        distance_weights: file
            .distance_weights
            .map(DistanceWeights)
            .unwrap_or(d.distance_weights),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write(path: &Path, text: &str) {
        fs::write(path, text).unwrap();
    }

    #[test]
    fn load_observed_ranks_and_derives() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        write(
            &path,
            "district,party,votes\n\
             d1,blue,40\nd1,red,60\n\
             d2,red,30\nd2,blue,70\n",
        );
        let obs = load_observed(&path).unwrap();
        assert_eq!(obs.spec.num_districts(), 2);
        // red: 90, blue: 110 -> blue is ranked first.
        assert_eq!(obs.party_ids, vec!["blue", "red"]);
        assert_eq!(obs.spec.party_vote_totals(), &[110, 90]);
        assert_eq!(obs.tally.get(0, 0), 40);
        assert_eq!(obs.tally.get(0, 1), 60);
        let summary = obs.summary();
        assert_eq!(summary.seat_share, vec![0.5, 0.5]);
    }

    #[test]
    fn load_observed_tie_breaks_by_file_order() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("tie.csv");
        write(
            &path,
            "district,party,votes\nd1,x,5\nd1,y,5\nd2,x,5\nd2,y,5\n",
        );
        let obs = load_observed(&path).unwrap();
        assert_eq!(obs.party_ids, vec!["x", "y"]);
        let outcome = crate::election::decide_outcome(&obs.tally, &obs.spec).unwrap();
        assert_eq!(outcome.seats, vec![2, 0]);
    }

    #[test]
    fn load_observed_rejects_bad_rows() {
        let dir = tempdir().unwrap();
        let neg = dir.path().join("neg.csv");
        write(&neg, "district,party,votes\nd1,a,-3\nd1,b,2\n");
        assert!(matches!(load_observed(&neg), Err(DataError::Parse { .. })));

        let dup = dir.path().join("dup.csv");
        write(&dup, "district,party,votes\nd1,a,3\nd1,a,2\n");
        assert!(matches!(
            load_observed(&dup),
            Err(DataError::DuplicatePair { .. })
        ));

        let empty = dir.path().join("empty.csv");
        write(&empty, "district,party,votes\n");
        assert!(matches!(load_observed(&empty), Err(DataError::EmptyFile(_))));
    }

    #[test]
    fn observed_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write(
            &path,
            "district,party,votes\nd1,a,40\nd1,b,60\nd2,a,70\nd2,b,30\n",
        );
        let obs = load_observed(&path).unwrap();
        let back = dir.path().join("b.csv");
        write_observed(&obs, &back).unwrap();
        let again = load_observed(&back).unwrap();
        assert_eq!(obs.spec, again.spec);
        assert_eq!(obs.tally, again.tally);
    }

    #[test]
    fn runs_round_trip_and_versioning() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let record = RunRecord {
            model: "dpm".into(),
            params: vec![0.8],
            seed: 42,
            spec_digest: "abc".into(),
            seats: vec![70, 25, 5],
            summary: SummaryStats {
                seat_share: vec![0.7, 0.25, 0.05],
                mean_vote_fraction: vec![0.5, 0.4, 0.1],
                margin_mean: 0.55,
                margin_std: 0.07,
            },
            wall_time_secs: 0.5,
        };
        let records: Vec<RunRecord> = (0..50)
            .map(|i| RunRecord {
                seed: i,
                ..record.clone()
            })
            .collect();
        write_runs(&records[..20], &path).unwrap();
        append_runs(&records[20..], &path).unwrap();
        assert_eq!(read_runs(&path).unwrap(), records);

        // Empty write leaves just the header.
        let empty = dir.path().join("empty.jsonl");
        write_runs(&[], &empty).unwrap();
        assert_eq!(read_runs(&empty).unwrap(), vec![]);
        assert_eq!(fs::read_to_string(&empty).unwrap().lines().count(), 1);

        // A future schema version is refused.
        let future = dir.path().join("future.jsonl");
        write(
            &future,
            "{\"schema\":\"electsim-runs\",\"version\":2}\n",
        );
        assert!(matches!(
            read_runs(&future),
            Err(DataError::SchemaVersionMismatch {
                found: 2,
                supported: 1
            })
        ));
    }

    #[test]
    fn run_config_parses_and_rejects_unknown_keys() {
        let dir = tempdir().unwrap();
        let good = dir.path().join("good.toml");
        write(
            &good,
            "[electorate]\nnum_districts = 4\nnum_electors = 400\npopularity = [0.5, 0.4, 0.1]\n\
             [model]\nkind = \"dpm\"\ngamma = 0.8\n",
        );
        let cfg = load_run_config(&good).unwrap();
        let spec = cfg.electorate.build().unwrap();
        assert_eq!(spec.num_districts(), 4);
        let params = cfg.model.build().unwrap();
        assert!(matches!(params, ModelParams::Dpm(_)));

        let typo = dir.path().join("typo.toml");
        write(
            &typo,
            "[electorate]\nnum_districts = 4\nnum_electors = 400\npopularity = [0.5, 0.5]\n\
             gama = 0.8\n[model]\nkind = \"dpm\"\ngamma = 0.8\n",
        );
        assert!(load_run_config(&typo).is_err());

        // A parameter belonging to another model is an error too.
        let wrong = dir.path().join("wrong.toml");
        write(
            &wrong,
            "[electorate]\nnum_districts = 4\nnum_electors = 400\npopularity = [0.5, 0.5]\n\
             [model]\nkind = \"dpm\"\ngamma = 0.8\nalpha = 50.0\n",
        );
        let cfg = load_run_config(&wrong).unwrap();
        assert!(cfg.model.build().is_err());
    }

    #[test]
    fn sim_model_config_shapes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sim.toml");
        write(
            &path,
            "[electorate]\nnum_districts = 10\nnum_electors = 1000\npopularity = [0.4,0.3,0.3]\n\
             [model]\nkind = \"sim\"\ncommunity_proportions = [0.5,0.3,0.2]\n\
             affinity = [[1,-1,0],[-1,1,0],[-1,1,0]]\nsigma = [1.0,1.0,2.0]\nalpha_crp = 0.9\n",
        );
        let cfg = load_run_config(&path).unwrap();
        match cfg.model.build().unwrap() {
            ModelParams::Sim(p) => {
                assert_eq!(p.num_communities, 3);
                assert!(!p.local_influence);
            }
            other => panic!("expected sim params, got {other:?}"),
        }
    }

    #[test]
    fn prior_and_abc_files_parse() {
        let dir = tempdir().unwrap();
        let prior_path = dir.path().join("prior.toml");
        write(
            &prior_path,
            "[[param]]\nname = \"gamma\"\nlo = 0.0\nhi = 1.0\n",
        );
        let prior = load_prior(&prior_path).unwrap();
        assert_eq!(prior.params.len(), 1);

        let abc_path = dir.path().join("abc.toml");
        write(&abc_path, "explore_budget = 50\nacceptance_eps = 0.1\n");
        let abc = load_abc_config(&abc_path).unwrap();
        assert_eq!(abc.explore_budget, 50);
        assert_eq!(abc.acceptance_eps, 0.1);
        assert_eq!(abc.seed_count, AbcConfig::default().seed_count);
    }
}
