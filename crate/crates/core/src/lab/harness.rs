//! Monte Carlo acceptance estimates and the experiment runner.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::access::{validate_log, ModelSpec};
use crate::dists::Dist;
use crate::exact::{self, Rational};
use crate::testers::{Tester, TesterKind, TesterSpec};
use crate::{Error, Result};

use super::instances::{generate, random_member, Family};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Seed of trial `t` under master seed `seed`.
pub fn derive_seed(seed: u64, t: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Session model; the tester's own model when `None`.
    pub model: Option<ModelSpec>,
    /// Re-check every completed log with the offline validator.
    pub validate_logs: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub trials: usize,
    pub accepts: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Means over runs that reached a decision.
    pub mean_queries: f64,
    pub mean_samples: f64,
    /// Runs stopped by the session guard, plus completed logs the offline
    /// validator rejects. Stopped runs count as non-accepting.
    pub model_violations: usize,
}

impl Estimate {
    pub fn reject_rate(&self) -> f64 {
        1.0 - self.rate
    }
}

#[derive(Default)]
struct Tally {
    accepts: usize,
    completed: usize,
    queries: usize,
    samples: usize,
    violations: usize,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.accepts += o.accepts;
        self.completed += o.completed;
        self.queries += o.queries;
        self.samples += o.samples;
        self.violations += o.violations;
        self
    }
}

pub fn estimate_acceptance(tester: &Tester, dist: &Dist, trials: usize, seed: u64) -> Result<Estimate> {
    estimate_with(tester, dist, trials, seed, RunOptions::default())
}

pub fn estimate_with(tester: &Tester, dist: &Dist, trials: usize, seed: u64, opts: RunOptions) -> Result<Estimate> {
    if trials == 0 {
        return Err(crate::error::param("trials must be at least 1"));
    }
    let model = opts.model.unwrap_or_else(|| tester.spec().required_model());
    let (s, n) = (tester.spec().samples(), dist.n());
    let tally = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Tally> {
            let mut one = Tally::default();
            match tester.run_as(dist, model, derive_seed(seed, t)) {
                Ok((v, log)) => {
                    one.completed = 1;
                    one.accepts = usize::from(v.accept);
                    one.queries = v.queries;
                    one.samples = v.samples;
                    if opts.validate_logs && validate_log(model, &log, s, n).is_err() {
                        one.violations = 1;
                    }
                }
                Err(Error::Model(_)) => one.violations = 1,
                Err(e) => return Err(e),
            }
            Ok(one)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let (ci_low, ci_high) = wilson(tally.accepts, trials, Z99);
    let done = tally.completed.max(1) as f64;
    Ok(Estimate {
        trials,
        accepts: tally.accepts,
        rate: tally.accepts as f64 / trials as f64,
        ci_low,
        ci_high,
        mean_queries: tally.queries as f64 / done,
        mean_samples: tally.samples as f64 / done,
        model_violations: tally.violations,
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// A proximity parameter written either as a string (`"1/5"`) or a number.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Text(String),
    Number(serde_json::Number),
}

impl Scalar {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Scalar::Text(s) => exact::parse(s),
            Scalar::Number(n) => exact::parse(&n.to_string()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// `n` for Inv families and member inputs, `m` for Sym and Par.
    pub size: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tester: OneOrMany<String>,
    #[serde(default)]
    pub model: Option<OneOrMany<String>>,
    /// A hard family (`inv-no`, `par-yes:2`, …) or `member` for random
    /// inputs from the tester's own property.
    pub family: OneOrMany<String>,
    pub params: OneOrMany<Params>,
    pub epsilon: OneOrMany<Scalar>,
    pub trials: usize,
    #[serde(default = "one")]
    pub instances: usize,
    pub seed: u64,
    /// Directory receiving `results.csv` and `results.json`.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("experiment config: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Hard(Family),
    Member,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Hard(fam) => fam.fmt(f),
            Source::Member => write!(f, "member"),
        }
    }
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "member" {
            Ok(Source::Member)
        } else {
            s.parse().map(Source::Hard)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRow {
    pub tester: String,
    pub model: String,
    pub family: String,
    pub size: usize,
    pub n: usize,
    pub epsilon: String,
    pub instance: usize,
    pub certified_farness: String,
    pub trials: usize,
    pub accepts: usize,
    pub accept_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_queries: f64,
    pub mean_samples: f64,
    pub model_violations: usize,
}

/// Runs the cross product tester × model × family × params × ε × instance.
/// Instances depend only on (family, params, instance index), so rows for
/// different testers and models see the same inputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    if cfg.trials == 0 || cfg.instances == 0 {
        return Err(Error::Format("trials and instances must be positive".into()));
    }
    let testers: Vec<TesterKind> = cfg.tester.to_vec().iter().map(|t| t.parse()).collect::<Result<_>>()?;
    let models: Option<Vec<ModelSpec>> = match &cfg.model {
        Some(ms) => Some(ms.to_vec().iter().map(|m| m.parse()).collect::<Result<_>>()?),
        None => None,
    };
    let sources: Vec<Source> = cfg.family.to_vec().iter().map(|f| f.parse()).collect::<Result<_>>()?;
    let epsilons: Vec<Rational> = cfg.epsilon.to_vec().iter().map(Scalar::to_rational).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (si, source) in sources.iter().enumerate() {
        for (pi, params) in cfg.params.to_vec().iter().enumerate() {
            for inst in 0..cfg.instances {
                let inst_seed = derive_seed(cfg.seed, (1 << 48) | ((si as u64) << 32) | ((pi as u64) << 16) | inst as u64);
                let hard = match source {
                    Source::Hard(fam) => Some(generate(*fam, params.size, inst_seed)?),
                    Source::Member => None,
                };
                for &kind in &testers {
                    for eps in &epsilons {
                        let n = hard.as_ref().map_or(params.size, |h| h.dist.n());
                        let spec = TesterSpec::new(kind, eps.clone(), n)?;
                        let member;
                        let dist = match &hard {
                            Some(h) => &h.dist,
                            None => {
                                member = random_member(&spec, inst_seed)?;
                                &member
                            }
                        };
                        let tester = spec.build()?;
                        let model_list = models.clone().unwrap_or_else(|| vec![spec.required_model()]);
                        for model in model_list {
                            let est = estimate_with(
                                &tester,
                                dist,
                                cfg.trials,
                                derive_seed(inst_seed, 1 << 40),
                                RunOptions { model: Some(model), validate_logs: true },
                            )?;
                            rows.push(ExperimentRow {
                                tester: kind.to_string(),
                                model: model.to_string(),
                                family: source.to_string(),
                                size: params.size,
                                n,
                                epsilon: exact::format(eps),
                                instance: inst,
                                certified_farness: hard
                                    .as_ref()
                                    .and_then(|h| h.certified_farness.as_ref())
                                    .map(exact::format)
                                    .unwrap_or_default(),
                                trials: est.trials,
                                accepts: est.accepts,
                                accept_rate: est.rate,
                                ci_low: est.ci_low,
                                ci_high: est.ci_high,
                                mean_queries: est.mean_queries,
                                mean_samples: est.mean_samples,
                                model_violations: est.model_violations,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_rows_csv<W: std::io::Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv` and `results.json` under `dir`.
pub fn write_reports(rows: &[ExperimentRow], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("results.csv");
    let json_path = dir.join("results.json");
    write_rows_csv(rows, std::fs::File::create(&csv_path)?)?;
    std::fs::write(&json_path, serde_json::to_string_pretty(rows)?)?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::SymString;
    use crate::exact::ratio;

    fn determinism_case() -> (Tester, Dist) {
        let d = Dist::uniform(vec![SymString::parse(2, "0000").unwrap(), SymString::parse(2, "1111").unwrap()]).unwrap();
        (TesterSpec::new(TesterKind::Determinism, ratio(1, 2), 4).unwrap().build().unwrap(), d)
    }

    #[test]
    fn wilson_reference_values() {
        // 50/100 at z = 1.96: the textbook interval is about [0.4038, 0.5962]
        let (lo, hi) = wilson(50, 100, 1.96);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
        let (lo, hi) = wilson(0, 10, Z99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.3 && hi < 0.5);
        assert_eq!(wilson(10, 10, Z99).1, 1.0);
    }

    #[test]
    fn determinism_rate_quarter() {
        let (t, d) = determinism_case();
        let est = estimate_acceptance(&t, &d, 10_000, 11).unwrap();
        assert!((est.rate - 0.25).abs() <= 0.02, "{}", est.rate);
        assert!(est.ci_low < 0.25 && 0.25 < est.ci_high);
        assert_eq!(est.model_violations, 0);
        assert_eq!(est.mean_samples, 3.0);
    }

    #[test]
    fn same_seed_same_report() {
        let (t, d) = determinism_case();
        let a = estimate_acceptance(&t, &d, 500, 3).unwrap();
        assert_eq!(a, estimate_acceptance(&t, &d, 500, 3).unwrap());
        assert_ne!(a, estimate_acceptance(&t, &d, 500, 4).unwrap());
    }

    #[test]
    fn one_sided_on_member_is_exactly_one() {
        let spec = TesterSpec::new(TesterKind::SymWeak2, ratio(1, 2), 16).unwrap();
        let d = random_member(&spec, 5).unwrap();
        let est = estimate_acceptance(&spec.build().unwrap(), &d, 300, 1).unwrap();
        assert_eq!(est.rate, 1.0);
    }

    #[test]
    fn wrong_model_counts_violations() {
        let spec = TesterSpec::new(TesterKind::InvForward, ratio(1, 2), 8).unwrap();
        let d = random_member(&spec, 2).unwrap();
        let opts = RunOptions { model: Some(ModelSpec::LocallyBounded), validate_logs: true };
        let est = estimate_with(&spec.build().unwrap(), &d, 50, 0, opts).unwrap();
        assert_eq!(est.model_violations, 50);
        assert_eq!(est.accepts, 0);
    }

    #[test]
    fn experiment_cross_product_and_files() {
        let cfg = ExperimentConfig::from_json(
            r#"{"tester": "inv-forward", "model": ["forward-only", "locally-bounded"],
                "family": ["inv-yes", "inv-no"], "params": {"size": 16}, "epsilon": 0.2,
                "trials": 40, "instances": 2, "seed": 9}"#,
        )
        .unwrap();
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2);
        for r in &rows {
            assert_eq!(r.epsilon, "1/5");
            match r.model.as_str() {
                "forward-only" => assert_eq!(r.model_violations, 0),
                _ => assert_eq!(r.model_violations, r.trials),
            }
            if r.family == "inv-yes" && r.model == "forward-only" {
                assert_eq!(r.accept_rate, 1.0);
            }
            assert_eq!(r.certified_farness.is_empty(), r.family == "inv-yes");
        }
        let dir = tempfile::tempdir().unwrap();
        let (c, j) = write_reports(&rows, dir.path()).unwrap();
        let text = std::fs::read_to_string(c).unwrap();
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert!(text.starts_with("tester,model,family"));
        let back: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(j).unwrap()).unwrap();
        assert_eq!(back.len(), rows.len());
    }

    #[test]
    fn config_schema_errors() {
        assert!(ExperimentConfig::from_json(r#"{"tester": "x"}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"tester": "all-zero", "family": "member", "params": {"size": 4}, "epsilon": "1/2", "trials": 1, "seed": 0, "bogus": 1}"#
        )
        .is_err());
        let cfg = ExperimentConfig::from_json(
            r#"{"tester": "nope", "family": "member", "params": {"size": 4}, "epsilon": "1/2", "trials": 1, "seed": 0}"#,
        )
        .unwrap();
        assert!(run_experiment(&cfg).is_err());
    }
}
