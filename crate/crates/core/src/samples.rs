//! Seeded sample generation for the benchmark distributions, plus their
//! exact densities for error measurement.
//!
//! All generators draw uniforms from [`SplitMix64`] and map them through the
//! closed-form inverse CDF, so a `(count, seed)` pair fully determines the
//! sample set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSource {
    /// Unimodal: density `exp(-x)` on `[0, inf)`.
    Exponential,
    /// Bimodal: density 2/3 on [1, 2], 1/3 on [3, 4], zero elsewhere.
    Bimodal,
    /// Trimodal: density 1 on [0, 1/2], 1/2 on [1, 3/2], 1/2 on [3, 7/2].
    Trimodal,
    /// Loaded from a file; no closed-form density.
    File,
}

impl SampleSource {
    pub fn name(self) -> &'static str {
        match self {
            SampleSource::Exponential => "exponential",
            SampleSource::Bimodal => "bimodal",
            SampleSource::Trimodal => "trimodal",
            SampleSource::File => "file",
        }
    }
}

impl std::str::FromStr for SampleSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" | "exp" => Ok(SampleSource::Exponential),
            "bimodal" => Ok(SampleSource::Bimodal),
            "trimodal" => Ok(SampleSource::Trimodal),
            _ => Err(Error::InvalidConfig(
                "distribution must be one of exponential, bimodal, trimodal",
            )),
        }
    }
}

/// Sorted observations with their generation provenance.
#[derive(Debug, Clone)]
pub struct SampleSet {
    values: Vec<f64>,
    pub seed: u64,
    pub source: SampleSource,
}

impl SampleSet {
    /// Wrap externally supplied observations; sorts them.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewSamples { got: 0, min: 1 });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::DataFormat(format!(
                "non-finite sample at index {bad}"
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            seed: 0,
            source: SampleSource::File,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn draw(count: usize, seed: u64, source: SampleSource, icdf: impl Fn(f64) -> f64) -> SampleSet {
    let mut rng = SplitMix64::new(seed);
    let mut values: Vec<f64> = (0..count).map(|_| icdf(rng.next_f64())).collect();
    values.sort_by(f64::total_cmp);
    SampleSet {
        values,
        seed,
        source,
    }
}

/// `count` draws from the unit exponential via `x = -ln(1 - u)`.
pub fn gen_exponential(count: usize, seed: u64) -> SampleSet {
    draw(count, seed, SampleSource::Exponential, |u| -(1.0 - u).ln())
}

/// `count` draws from the bimodal density (2/3 on [1, 2], 1/3 on [3, 4]).
pub fn gen_bimodal(count: usize, seed: u64) -> SampleSet {
    draw(count, seed, SampleSource::Bimodal, |u| {
        if u < 2.0 / 3.0 {
            1.0 + 1.5 * u
        } else {
            3.0 + 3.0 * (u - 2.0 / 3.0)
        }
    })
}

/// `count` draws from the trimodal density (1 on [0, 1/2], 1/2 on [1, 3/2],
/// 1/2 on [3, 7/2]).
pub fn gen_trimodal(count: usize, seed: u64) -> SampleSet {
    draw(count, seed, SampleSource::Trimodal, |u| {
        if u < 0.5 {
            u
        } else if u < 0.75 {
            1.0 + 2.0 * (u - 0.5)
        } else {
            3.0 + 2.0 * (u - 0.75)
        }
    })
}

/// Dispatch on source; `File` has no generator.
pub fn generate(source: SampleSource, count: usize, seed: u64) -> Result<SampleSet> {
    match source {
        SampleSource::Exponential => Ok(gen_exponential(count, seed)),
        SampleSource::Bimodal => Ok(gen_bimodal(count, seed)),
        SampleSource::Trimodal => Ok(gen_trimodal(count, seed)),
        SampleSource::File => Err(Error::NoTruth("file")),
    }
}

pub fn exponential_pdf(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp()
    } else {
        0.0
    }
}

pub fn bimodal_pdf(x: f64) -> f64 {
    if (1.0..=2.0).contains(&x) {
        2.0 / 3.0
    } else if (3.0..=4.0).contains(&x) {
        1.0 / 3.0
    } else {
        0.0
    }
}

pub fn trimodal_pdf(x: f64) -> f64 {
    if (0.0..=0.5).contains(&x) {
        1.0
    } else if (1.0..=1.5).contains(&x) || (3.0..=3.5).contains(&x) {
        0.5
    } else {
        0.0
    }
}

/// The exact density for a generated source; errors for `File`.
pub fn true_pdf(source: SampleSource) -> Result<fn(f64) -> f64> {
    match source {
        SampleSource::Exponential => Ok(exponential_pdf),
        SampleSource::Bimodal => Ok(bimodal_pdf),
        SampleSource::Trimodal => Ok(trimodal_pdf),
        SampleSource::File => Err(Error::NoTruth("file")),
    }
}
