//! Training hyperparameters and their flat `key=value` text form.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::generator::WalkLimits;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    /// Locally minimal neighborhood seeds refined by fitting the clique AGM.
    AgmPretrain,
    /// Locally minimal neighborhood seeds only.
    LocallyMinimal,
}

impl FromStr for InitMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agm-pretrain" | "agm" => Ok(InitMethod::AgmPretrain),
            "locally-minimal" | "lmn" => Ok(InitMethod::LocallyMinimal),
            _ => Err(Error::Parameter(format!(
                "unknown init method {s:?} (expected agm-pretrain or locally-minimal)"
            ))),
        }
    }
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitMethod::AgmPretrain => "agm-pretrain",
            InitMethod::LocallyMinimal => "locally-minimal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommunityCount {
    Fixed(usize),
    /// Chosen by held-out edge likelihood over `TrainConfig::candidates`.
    Auto,
}

impl FromStr for CommunityCount {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(CommunityCount::Auto);
        }
        s.parse::<usize>()
            .map(CommunityCount::Fixed)
            .map_err(|_| Error::Parameter(format!("communities must be a count or \"auto\", got {s:?}")))
    }
}

impl fmt::Display for CommunityCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommunityCount::Fixed(c) => write!(f, "{c}"),
            CommunityCount::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub clique_size: usize,
    pub communities: CommunityCount,
    /// Candidate counts tried when `communities` is `Auto`.
    pub candidates: Vec<usize>,
    /// Positive (and generated negative) subsets per vertex in a D-step.
    pub disc_samples: usize,
    /// Generated subsets per vertex in a G-step.
    pub gen_samples: usize,
    /// Passes over each step's samples.
    pub inner_updates: usize,
    pub lr: f64,
    pub max_iters: usize,
    pub convergence_window: usize,
    pub convergence_tol: f64,
    pub seed: u64,
    pub init: InitMethod,
    pub pretrain_epochs: usize,
    pub pretrain_lr: f64,
    /// Upper end of the uniform jitter added to seeded affiliations.
    pub init_jitter: f64,
    pub max_walk: usize,
    pub max_restarts: usize,
    /// Edge / non-edge pairs each in the monitoring sample.
    pub validation_pairs: usize,
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            clique_size: 3,
            communities: CommunityCount::Auto,
            candidates: vec![2, 5, 10, 20, 50, 100],
            disc_samples: 5,
            gen_samples: 5,
            inner_updates: 3,
            lr: 0.001,
            max_iters: 20,
            convergence_window: 5,
            convergence_tol: 1e-4,
            seed: 0,
            init: InitMethod::AgmPretrain,
            pretrain_epochs: 30,
            pretrain_lr: 1.0,
            init_jitter: 0.1,
            max_walk: 10,
            max_restarts: 5,
            validation_pairs: 2000,
            threads: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Parameter(format!("bad value {value:?} for {key}")))
}

impl TrainConfig {
    pub const KEYS: &'static [&'static str] = &[
        "clique_size",
        "communities",
        "candidates",
        "disc_samples",
        "gen_samples",
        "inner_updates",
        "lr",
        "max_iters",
        "convergence_window",
        "convergence_tol",
        "seed",
        "init",
        "pretrain_epochs",
        "pretrain_lr",
        "init_jitter",
        "max_walk",
        "max_restarts",
        "validation_pairs",
        "threads",
    ];

    pub fn walk_limits(&self) -> WalkLimits {
        WalkLimits {
            max_walk: self.max_walk,
            max_restarts: self.max_restarts,
        }
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "clique_size" => self.clique_size = parse(key, v)?,
            "communities" => self.communities = v.parse()?,
            "candidates" => {
                self.candidates = v
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| parse(key, t))
                    .collect::<Result<_>>()?
            }
            "disc_samples" => self.disc_samples = parse(key, v)?,
            "gen_samples" => self.gen_samples = parse(key, v)?,
            "inner_updates" => self.inner_updates = parse(key, v)?,
            "lr" => self.lr = parse(key, v)?,
            "max_iters" => self.max_iters = parse(key, v)?,
            "convergence_window" => self.convergence_window = parse(key, v)?,
            "convergence_tol" => self.convergence_tol = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "init" => self.init = v.parse()?,
            "pretrain_epochs" => self.pretrain_epochs = parse(key, v)?,
            "pretrain_lr" => self.pretrain_lr = parse(key, v)?,
            "init_jitter" => self.init_jitter = parse(key, v)?,
            "max_walk" => self.max_walk = parse(key, v)?,
            "max_restarts" => self.max_restarts = parse(key, v)?,
            "validation_pairs" => self.validation_pairs = parse(key, v)?,
            "threads" => self.threads = parse(key, v)?,
            other => return Err(Error::Parameter(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!("config line {}: expected key=value, got {line:?}", i + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// `key=value` lines for every field, in [`KEYS`](Self::KEYS) order.
    pub fn to_text(&self) -> String {
        let candidates: Vec<String> = self.candidates.iter().map(|c| c.to_string()).collect();
        let values = [
            self.clique_size.to_string(),
            self.communities.to_string(),
            candidates.join(","),
            self.disc_samples.to_string(),
            self.gen_samples.to_string(),
            self.inner_updates.to_string(),
            self.lr.to_string(),
            self.max_iters.to_string(),
            self.convergence_window.to_string(),
            self.convergence_tol.to_string(),
            self.seed.to_string(),
            self.init.to_string(),
            self.pretrain_epochs.to_string(),
            self.pretrain_lr.to_string(),
            self.init_jitter.to_string(),
            self.max_walk.to_string(),
            self.max_restarts.to_string(),
            self.validation_pairs.to_string(),
            self.threads.to_string(),
        ];
        Self::KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("clique_size", self.clique_size),
            ("disc_samples", self.disc_samples),
            ("gen_samples", self.gen_samples),
            ("inner_updates", self.inner_updates),
            ("convergence_window", self.convergence_window),
            ("max_walk", self.max_walk),
            ("threads", self.threads),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(Error::Parameter(format!("{name} must be positive")));
            }
        }
        if !(2..=6).contains(&self.clique_size) {
            return Err(Error::Parameter(format!(
                "clique_size must be in 2..=6, got {}",
                self.clique_size
            )));
        }
        if !(self.lr > 0.0) || !(self.pretrain_lr > 0.0) {
            return Err(Error::Parameter("learning rates must be positive".into()));
        }
        if !(self.init_jitter >= 0.0) {
            return Err(Error::Parameter("init_jitter must be nonnegative".into()));
        }
        match self.communities {
            CommunityCount::Fixed(0) => {
                return Err(Error::Parameter("communities must be positive".into()))
            }
            CommunityCount::Auto if self.candidates.is_empty() || self.candidates.contains(&0) => {
                return Err(Error::Parameter(
                    "auto community count needs positive candidates".into(),
                ))
            }
            _ => {}
        }
        Ok(())
    }
}
