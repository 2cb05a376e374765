//! Experiment configuration.
//!
//! The file format is flat `key = value` text (TOML syntax), for example
//!
//! ```text
//! system = "exponential"   # or "michaelis-menten"
//! d = 2
//! L = 1.0
//! eps = 0.25
//! # ladder = [4.0, 1.0, 0.25]   optional, overrides the default halving ladder
//! # dim_r = 2                    optional effective-dimension overrides
//! # dim_f = 2
//! cap = 50000000
//! workers = 0                    # 0 = all cores
//! out = "out"
//! seed = 0
//! # snapshot_stride = 4          write every set, keeping every 4th lattice index
//! ```
//!
//! The same keys are accepted as a JSON object on standard input.

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::euler::DEFAULT_CAP;
use crate::systems::{make_exponential_system, make_michaelis_menten, SystemSpec};

use super::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Exponential,
    MichaelisMenten,
}

impl std::str::FromStr for SystemKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exponential" | "exp" => Ok(Self::Exponential),
            "michaelis-menten" | "mm" => Ok(Self::MichaelisMenten),
            other => Err(BenchError::Config(format!("unknown system {other:?}"))),
        }
    }
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exponential => "exponential",
            Self::MichaelisMenten => "michaelis-menten",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub system: SystemKind,
    /// State dimension of the exponential system.
    pub d: usize,
    /// Growth rate of the exponential system.
    #[serde(rename = "L")]
    pub rate: f64,
    pub eps: Option<f64>,
    pub ladder: Option<Vec<f64>>,
    pub dim_r: Option<u32>,
    pub dim_f: Option<u32>,
    pub cap: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub snapshot_stride: Option<i64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemKind::Exponential,
            d: 1,
            rate: 1.0,
            eps: None,
            ladder: None,
            dim_r: None,
            dim_f: None,
            cap: DEFAULT_CAP,
            workers: 0,
            out: PathBuf::from("out"),
            seed: 0,
            snapshot_stride: None,
        }
    }
}

/// The fields that influence computed numbers, in a fixed order.
#[derive(Serialize)]
struct HashedFields<'a> {
    system: SystemKind,
    d: Option<usize>,
    rate: Option<f64>,
    eps: Option<f64>,
    ladder: &'a Option<Vec<f64>>,
    dim_r: Option<u32>,
    dim_f: Option<u32>,
    cap: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(format!("config: {e}")))
    }

    pub fn from_json_str(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(format!("config: {e}")))
    }

    /// `-` reads JSON from standard input; anything else is a key-value file.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        if path == Path::new("-") {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            return Self::from_json_str(&text);
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |msg: String| Err(BenchError::Config(msg));
        if let Some(eps) = self.eps {
            if !(eps > 0.0) || !eps.is_finite() {
                return fail(format!("eps must be positive, got {eps}"));
            }
        }
        if let Some(ladder) = &self.ladder {
            if ladder.is_empty() {
                return fail("ladder is empty".into());
            }
            if ladder.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
                return fail("ladder entries must be positive".into());
            }
            if ladder.windows(2).any(|w| !(w[0] > w[1])) {
                return fail("ladder must be strictly decreasing".into());
            }
            if let Some(eps) = self.eps {
                if eps != *ladder.last().unwrap() {
                    return fail("eps and the last ladder entry disagree".into());
                }
            }
        }
        if self.cap < 1000 {
            return fail(format!("cap must be at least 1000, got {}", self.cap));
        }
        if self.system == SystemKind::Exponential {
            if self.d == 0 || self.d > 8 {
                return fail(format!("d must be in 1..=8, got {}", self.d));
            }
            if !(self.rate >= 0.0) || !self.rate.is_finite() {
                return fail(format!("L must be nonnegative, got {}", self.rate));
            }
        }
        if self.dim_r == Some(0) {
            return fail("dim_r must be at least 1".into());
        }
        if let Some(s) = self.snapshot_stride {
            if s < 1 {
                return fail("snapshot_stride must be >= 1".into());
            }
        }
        Ok(())
    }

    /// Final tolerance, from `eps` or the end of the ladder.
    pub fn target(&self) -> Result<f64, BenchError> {
        self.eps
            .or_else(|| self.ladder.as_ref().and_then(|l| l.last().copied()))
            .ok_or_else(|| BenchError::Config("no tolerance given (set eps or ladder)".into()))
    }

    pub fn build_system(&self) -> Result<SystemSpec<f64>, BenchError> {
        let sys = match self.system {
            SystemKind::Exponential => make_exponential_system(self.d, self.rate)?,
            SystemKind::MichaelisMenten => make_michaelis_menten(),
        };
        match (self.dim_r, self.dim_f) {
            (None, None) => Ok(sys),
            (r, f) => {
                let (dr, df) = (r.unwrap_or(sys.dim_r()), f.unwrap_or(sys.dim_f()));
                Ok(sys.with_effective_dims(dr, df)?)
            }
        }
    }

    /// Hex SHA-256 prefix over the result-relevant fields.
    pub fn hash(&self) -> String {
        let exp = self.system == SystemKind::Exponential;
        let fields = HashedFields {
            system: self.system,
            d: exp.then_some(self.d),
            rate: exp.then_some(self.rate),
            eps: self.eps,
            ladder: &self.ladder,
            dim_r: self.dim_r,
            dim_f: self.dim_f,
            cap: self.cap,
        };
        let bytes = serde_json::to_vec(&fields).expect("plain struct serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
