use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::OptimizeError;

/// Availability factors in `[0, 1]`, one per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub id: String,
    pub values: Vec<f64>,
}

fn err(id: &str, reason: impl Into<String>) -> OptimizeError {
    OptimizeError::Profile {
        id: id.to_string(),
        reason: reason.into(),
    }
}

/// Parses `timestep,value` CSV text. Timesteps must run `0, 1, 2, …`.
pub fn parse_profile_csv(id: &str, text: &str) -> Result<Profile, OptimizeError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| err(id, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["timestep", "value"] {
        return Err(err(id, "header must be `timestep,value`"));
    }
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(id, e.to_string()))?;
        let line = k + 2;
        let step: usize = record[0]
            .parse()
            .map_err(|_| err(id, format!("line {line}: invalid timestep {:?}", &record[0])))?;
        if step != k {
            return Err(err(id, format!("line {line}: expected timestep {k}, found {step}")));
        }
        let v: f64 = record[1]
            .parse()
            .map_err(|_| err(id, format!("line {line}: invalid value {:?}", &record[1])))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(err(id, format!("line {line}: value {v} outside [0, 1]")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(err(id, "no rows"));
    }
    Ok(Profile {
        id: id.to_string(),
        values,
    })
}

/// Reads `<dir>/<id>.csv`.
pub fn load_profile(dir: &Path, id: &str) -> Result<Profile, OptimizeError> {
    let path = dir.join(format!("{id}.csv"));
    let text = std::fs::read_to_string(&path)
        .map_err(|e| err(id, format!("cannot read {}: {e}", path.display())))?;
    parse_profile_csv(id, &text)
}

fn id_hash(id: &str) -> u64 {
    // FNV-1a; stable across platforms and releases, unlike `DefaultHasher`.
    struct Fnv(u64);
    impl Hasher for Fnv {
        fn finish(&self) -> u64 {
            self.0
        }
        fn write(&mut self, bytes: &[u8]) {
            for b in bytes {
                self.0 ^= u64::from(*b);
                self.0 = self.0.wrapping_mul(0x100_0000_01b3);
            }
        }
    }
    let mut h = Fnv(0xcbf2_9ce4_8422_2325);
    id.hash(&mut h);
    h.finish()
}

/// Deterministic synthetic profile. Ids containing `solar` or `pv` get a
/// daily bell shape with noise; everything else a clipped AR(1) series.
pub fn synthetic_profile(id: &str, steps: usize, seed: u64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ id_hash(id));
    let lower = id.to_ascii_lowercase();
    let values = if lower.contains("solar") || lower.contains("pv") {
        (0..steps)
            .map(|t| {
                let hour = (t % 24) as f64;
                let sun = (std::f64::consts::PI * (hour - 6.0) / 12.0).sin().max(0.0);
                let cloud = 0.7 + 0.3 * rng.random::<f64>();
                (sun * cloud).clamp(0.0, 1.0)
            })
            .collect()
    } else {
        let mut v: f64 = 0.3 + 0.4 * rng.random::<f64>();
        (0..steps)
            .map(|_| {
                let shock: f64 = rng.random::<f64>() - 0.5;
                v = (0.45 + 0.8 * (v - 0.45) + 0.3 * shock).clamp(0.0, 1.0);
                v
            })
            .collect()
    };
    Profile {
        id: id.to_string(),
        values,
    }
}

/// Where profiles come from: a directory of CSV files and, optionally, a
/// seed used to synthesize profiles whose file is absent.
#[derive(Debug, Clone, Default)]
pub struct ProfileSource {
    pub dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ProfileSource {
    pub fn resolve(&self, id: &str, steps: usize) -> Result<Profile, OptimizeError> {
        if let Some(dir) = &self.dir {
            if dir.join(format!("{id}.csv")).exists() {
                return load_profile(dir, id);
            }
        }
        match self.seed {
            Some(seed) => Ok(synthetic_profile(id, steps, seed)),
            None => Err(err(
                id,
                match &self.dir {
                    Some(d) => format!("no file {}/{id}.csv and no seed given", d.display()),
                    None => "no profile directory and no seed given".to_string(),
                },
            )),
        }
    }
}
