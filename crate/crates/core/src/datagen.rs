//! Deterministic synthetic dictionaries and observations.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded
//! with the 64-bit seed of the [`GenSpec`]. The dictionary and the
//! observation are drawn from separate streams of the same key, so the
//! observation of a seed does not depend on how many numbers the
//! dictionary consumed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::dictionary::{Dictionary, GroupPartition};
use crate::error::{Error, Result};
use crate::linalg::{norm, norm_sq};

/// Name of the generator, recorded in manifests.
pub const RNG_NAME: &str = "chacha20";

/// Noise scale of the Pnoise atoms `e1 + 0.1κg`.
pub const PNOISE_SCALE: f64 = 0.1;

const DICTIONARY_STREAM: u64 = 0;
const OBSERVATION_STREAM: u64 = 1;
const MAX_BG_DRAWS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DictionaryKind {
    /// Columns uniform on the unit sphere.
    Gaussian,
    /// `e1 + 0.1κg` with `κ ~ U(0,1)` per atom and `g ~ N(0, I)`, normalized.
    Pnoise,
    /// Redundant DCT: `cos(π(n + ½)k/K)`, normalized.
    Dct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObservationKind {
    /// Same law as the atoms (unit sphere for the deterministic DCT).
    LikeAtoms,
    /// Uniform on the unit sphere.
    UnitSphere,
    /// Normalized `Dx + noise` with Bernoulli-Gaussian group-sparse `x`.
    BernoulliGaussian,
}

macro_rules! named_enum {
    ($t:ty, $($v:path => [$($name:literal),+]),+ $(,)?) => {
        impl $t {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($v => named_enum!(@first $($name),+),)+
                }
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($($name)|+ => Ok($v),)+
                    _ => Err(Error::InvalidArgument(format!("unknown kind '{s}'"))),
                }
            }
        }
    };
    (@first $a:literal $(, $rest:literal)*) => { $a };
}

named_enum!(DictionaryKind,
    DictionaryKind::Gaussian => ["gaussian"],
    DictionaryKind::Pnoise => ["pnoise"],
    DictionaryKind::Dct => ["dct"],
);

named_enum!(ObservationKind,
    ObservationKind::LikeAtoms => ["like-atoms", "atoms"],
    ObservationKind::UnitSphere => ["unit-sphere", "sphere"],
    ObservationKind::BernoulliGaussian => ["bernoulli-gaussian", "bg"],
);

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub dictionary: DictionaryKind,
    pub observation: ObservationKind,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub bernoulli_p: f64,
    pub snr_db: f64,
    /// Contiguous group size; 0 means no partition.
    pub group_size: usize,
}

impl GenSpec {
    pub fn new(dictionary: DictionaryKind, n: usize, k: usize, seed: u64) -> Self {
        GenSpec {
            dictionary,
            observation: ObservationKind::LikeAtoms,
            n,
            k,
            seed,
            bernoulli_p: 0.05,
            snr_db: 20.0,
            group_size: 0,
        }
    }

    pub fn with_observation(mut self, observation: ObservationKind) -> Self {
        self.observation = observation;
        self
    }

    pub fn with_groups(mut self, group_size: usize) -> Self {
        self.group_size = group_size;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::InvalidArgument("N and K must be >= 1".into()));
        }
        if !(self.bernoulli_p > 0.0 && self.bernoulli_p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "bernoulli_p must lie in (0, 1), got {}",
                self.bernoulli_p
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidArgument("snr_db must be finite".into()));
        }
        if self.dictionary == DictionaryKind::Dct && self.k < self.n {
            return Err(Error::InvalidArgument(format!(
                "DCT dictionary needs K >= N, got K={} N={}",
                self.k, self.n
            )));
        }
        if self.group_size > self.k {
            return Err(Error::InvalidArgument("group size exceeds K".into()));
        }
        Ok(())
    }

    /// One-line description used in file headers and manifests.
    pub fn describe(&self) -> String {
        format!(
            "dictionary={} observation={} n={} k={} seed={} rng={} bernoulli_p={} snr_db={} group_size={}",
            self.dictionary,
            self.observation,
            self.n,
            self.k,
            self.seed,
            RNG_NAME,
            self.bernoulli_p,
            self.snr_db,
            self.group_size
        )
    }
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn gaussian_vec(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalized(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let nv = norm(&v);
    if !(nv > 0.0) || !nv.is_finite() {
        return Err(Error::Numerical("cannot normalize a zero vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    Ok(v)
}

fn unit_sphere(rng: &mut ChaCha20Rng, n: usize) -> Result<Vec<f64>> {
    normalized(gaussian_vec(rng, n))
}

fn pnoise_atom(rng: &mut ChaCha20Rng, n: usize) -> Result<Vec<f64>> {
    let kappa: f64 = rng.random();
    let mut v = gaussian_vec(rng, n);
    v.iter_mut().for_each(|x| *x *= PNOISE_SCALE * kappa);
    v[0] += 1.0;
    normalized(v)
}

pub fn gen_dictionary(spec: &GenSpec) -> Result<Dictionary> {
    spec.validate()?;
    let (n, k) = (spec.n, spec.k);
    if spec.dictionary == DictionaryKind::Dct {
        return gen_dct_dictionary(n, k);
    }
    let mut rng = stream(spec.seed, DICTIONARY_STREAM);
    let mut data = Vec::with_capacity(n * k);
    for _ in 0..k {
        let atom = match spec.dictionary {
            DictionaryKind::Gaussian => unit_sphere(&mut rng, n)?,
            _ => pnoise_atom(&mut rng, n)?,
        };
        data.extend(atom);
    }
    Dictionary::from_col_major(n, k, data, true)
}

/// Redundant DCT with `K ≥ N` atoms `cos(π(n + ½)k/K)`, normalized.
pub fn gen_dct_dictionary(n: usize, k: usize) -> Result<Dictionary> {
    if n == 0 || k < n {
        return Err(Error::InvalidArgument(format!(
            "DCT dictionary needs K >= N >= 1, got K={k} N={n}"
        )));
    }
    let mut data = Vec::with_capacity(n * k);
    for j in 0..k {
        let f = j as f64 / k as f64;
        let atom = (0..n).map(|i| (PI * (i as f64 + 0.5) * f).cos()).collect();
        data.extend(normalized(atom)?);
    }
    Dictionary::from_col_major(n, k, data, true)
}

/// Planted quantities of a Bernoulli-Gaussian draw.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedSignal {
    pub x: Vec<f64>,
    /// `Dx`
    pub signal: Vec<f64>,
    /// Noise before normalization.
    pub noise: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub y: Vec<f64>,
    pub planted: Option<PlantedSignal>,
}

pub fn gen_observation(
    spec: &GenSpec,
    dict: &Dictionary,
    partition: Option<&GroupPartition>,
) -> Result<Observation> {
    spec.validate()?;
    if dict.rows() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            got: dict.rows(),
        });
    }
    let mut rng = stream(spec.seed, OBSERVATION_STREAM);
    let y = match (spec.observation, spec.dictionary) {
        (ObservationKind::LikeAtoms, DictionaryKind::Pnoise) => pnoise_atom(&mut rng, spec.n)?,
        (ObservationKind::LikeAtoms, _) | (ObservationKind::UnitSphere, _) => {
            unit_sphere(&mut rng, spec.n)?
        }
        (ObservationKind::BernoulliGaussian, _) => {
            let part = partition.ok_or_else(|| {
                Error::InvalidArgument("Bernoulli-Gaussian observations need a partition".into())
            })?;
            return bernoulli_gaussian(&mut rng, spec, dict, part);
        }
    };
    Ok(Observation { y, planted: None })
}

fn bernoulli_gaussian(
    rng: &mut ChaCha20Rng,
    spec: &GenSpec,
    dict: &Dictionary,
    part: &GroupPartition,
) -> Result<Observation> {
    if part.n_atoms() != dict.cols() {
        return Err(Error::DimensionMismatch {
            expected: dict.cols(),
            got: part.n_atoms(),
        });
    }
    for _ in 0..MAX_BG_DRAWS {
        let mut x = vec![0.0; dict.cols()];
        let mut any = false;
        for g in part.groups() {
            if rng.random::<f64>() < spec.bernoulli_p {
                any = true;
                for i in g.iter() {
                    x[i] = rng.sample(StandardNormal);
                }
            }
        }
        // the noise is drawn on every attempt to keep the stream layout fixed
        let mut noise = gaussian_vec(rng, spec.n);
        if !any {
            continue;
        }
        let signal = dict.apply(&x)?;
        let ps = norm_sq(&signal);
        let pn = norm_sq(&noise);
        if ps == 0.0 || pn == 0.0 {
            continue;
        }
        let scale = (ps / (pn * 10f64.powf(spec.snr_db / 10.0))).sqrt();
        noise.iter_mut().for_each(|v| *v *= scale);
        let y = normalized(signal.iter().zip(&noise).map(|(s, e)| s + e).collect())?;
        return Ok(Observation {
            y,
            planted: Some(PlantedSignal { x, signal, noise }),
        });
    }
    Err(Error::Numerical(format!(
        "no active group in {MAX_BG_DRAWS} Bernoulli-Gaussian draws"
    )))
}

/// Dictionary, observation and optional contiguous partition of a spec.
#[derive(Clone, Debug)]
pub struct Instance {
    pub dict: Dictionary,
    pub partition: Option<GroupPartition>,
    pub observation: Observation,
}

pub fn generate(spec: &GenSpec) -> Result<Instance> {
    let dict = gen_dictionary(spec)?;
    let partition = match spec.group_size {
        0 => None,
        s => Some(GroupPartition::contiguous(&dict, s)?),
    };
    let observation = gen_observation(spec, &dict, partition.as_ref())?;
    Ok(Instance {
        dict,
        partition,
        observation,
    })
}
