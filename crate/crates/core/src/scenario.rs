//! Experiment description shared by the analytic, simulation and enumeration
//! paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::occupancy::Population;

/// Request popularity over the library. File index `i` has rank `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Popularity {
    Uniform,
    Zipf { alpha: f64 },
}

impl Popularity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Popularity::Uniform => Ok(()),
            Popularity::Zipf { alpha } if alpha.is_finite() && alpha > 0.0 => Ok(()),
            Popularity::Zipf { alpha } => Err(Error::InvalidZipf(alpha)),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Popularity::Uniform)
    }

    /// Exponent used in CSV output; uniform is Zipf with exponent zero.
    pub fn alpha(&self) -> f64 {
        match *self {
            Popularity::Uniform => 0.0,
            Popularity::Zipf { alpha } => alpha,
        }
    }

    /// Request probabilities `p_i = i^-alpha / sum_k k^-alpha`, `i = 1..=n`.
    pub fn pmf(&self, n: u32) -> Vec<f64> {
        match *self {
            Popularity::Uniform => vec![1.0 / n as f64; n as usize],
            Popularity::Zipf { alpha } => {
                let raw: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-alpha)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / total).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mds,
    Ecc,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Mds, Scheme::Ecc];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Mds => "mds",
            Scheme::Ecc => "ecc",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mds" => Ok(Scheme::Mds),
            "ecc" => Ok(Scheme::Ecc),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

/// A library of `N` files split into `n_F` fragments each, two relays caching
/// `M` files worth of fragments each, and a user population.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    population: Population,
    n_fragments: u32,
    cache_size: u32,
    popularity: Popularity,
}

impl Scenario {
    pub fn new(population: Population, n_fragments: u32, cache_size: u32, popularity: Popularity) -> Result<Self> {
        if n_fragments == 0 {
            return Err(Error::NoFragments);
        }
        if cache_size > population.n_bins {
            return Err(Error::CacheTooLarge { cache: cache_size, files: population.n_bins });
        }
        popularity.validate()?;
        Ok(Self { population, n_fragments, cache_size, popularity })
    }

    /// Uniform requests with `n_F = N`, the setting of the closed forms.
    pub fn uniform(n_files: u32, cache_size: u32, u_b: u32, u_w: u32, u_2: u32) -> Result<Self> {
        let population = Population::new(n_files, u_b, u_w, u_2)?;
        Self::new(population, n_files, cache_size, Popularity::Uniform)
    }

    pub fn with_cache_size(&self, cache_size: u32) -> Result<Self> {
        Self::new(self.population, self.n_fragments, cache_size, self.popularity)
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn n_files(&self) -> u32 {
        self.population.n_bins
    }

    pub fn n_fragments(&self) -> u32 {
        self.n_fragments
    }

    pub fn cache_size(&self) -> u32 {
        self.cache_size
    }

    pub fn popularity(&self) -> Popularity {
        self.popularity
    }

    /// Whether the closed-form loads apply.
    pub fn analytic_applicable(&self) -> bool {
        self.popularity.is_uniform() && self.n_fragments == self.n_files()
    }

    /// Fragments of each file held per relay under uniform placement,
    /// `M n_F / N`; fails when that is not a whole number.
    pub fn uniform_fragments_per_file(&self) -> Result<u32> {
        let total = self.cache_size as u64 * self.n_fragments as u64;
        let n = self.n_files() as u64;
        if !total.is_multiple_of(n) {
            return Err(Error::FractionalFragments {
                cache: self.cache_size,
                fragments: self.n_fragments,
                files: self.n_files(),
            });
        }
        Ok((total / n) as u32)
    }

    /// Total fragment storage of one relay, `M n_F`.
    pub fn fragment_budget(&self) -> u64 {
        self.cache_size as u64 * self.n_fragments as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_oversized_cache() {
        assert!(matches!(Scenario::uniform(3, 4, 1, 1, 1), Err(Error::CacheTooLarge { .. })));
    }

    #[test]
    fn rejects_bad_zipf() {
        let pop = Population::new(4, 1, 1, 0).unwrap();
        assert!(Scenario::new(pop, 4, 1, Popularity::Zipf { alpha: 0.0 }).is_err());
        assert!(Scenario::new(pop, 4, 1, Popularity::Zipf { alpha: f64::NAN }).is_err());
        assert!(Scenario::new(pop, 4, 1, Popularity::Zipf { alpha: 0.8 }).is_ok());
    }

    #[test]
    fn zipf_pmf_normalised_and_decreasing() {
        let p = Popularity::Zipf { alpha: 0.8 }.pmf(100);
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[0] > w[1]));
        let u = Popularity::Uniform.pmf(4);
        assert_eq!(u, vec![0.25; 4]);
    }

    #[test]
    fn fractional_fragments_detected() {
        let pop = Population::new(4, 1, 1, 0).unwrap();
        let s = Scenario::new(pop, 2, 1, Popularity::Uniform).unwrap();
        assert!(s.uniform_fragments_per_file().is_err());
        let s = Scenario::new(pop, 8, 1, Popularity::Uniform).unwrap();
        assert_eq!(s.uniform_fragments_per_file().unwrap(), 2);
    }

    #[test]
    fn scheme_parse() {
        assert_eq!("ECC".parse::<Scheme>().unwrap(), Scheme::Ecc);
        assert!("lru".parse::<Scheme>().is_err());
    }
}
