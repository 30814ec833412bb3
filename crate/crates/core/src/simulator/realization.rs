use rand::distributions::{Distribution, Uniform, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::occupancy::Population;
use crate::scenario::{Popularity, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UserClass {
    /// Attached only to relay B.
    BOnly,
    /// Attached only to relay W.
    WOnly,
    /// Attached to both relays.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Request {
    pub class: UserClass,
    pub file: u32,
}

/// One request per user: B-only users first, then W-only, then dual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    n_files: u32,
    requests: Vec<Request>,
}

impl Realization {
    pub fn new(n_files: u32, b_only: &[u32], w_only: &[u32], both: &[u32]) -> Result<Self> {
        if n_files == 0 {
            return Err(Error::EmptyLibrary(0));
        }
        let classes = [(UserClass::BOnly, b_only), (UserClass::WOnly, w_only), (UserClass::Both, both)];
        let mut requests = Vec::with_capacity(b_only.len() + w_only.len() + both.len());
        for (class, files) in classes {
            for &file in files {
                if file >= n_files {
                    return Err(Error::Domain(format!("file {file} outside library of {n_files}")));
                }
                requests.push(Request { class, file });
            }
        }
        Ok(Self { n_files, requests })
    }

    /// All users requesting file 0, with class labels from `pop`.
    pub(crate) fn blank(pop: &Population) -> Self {
        let mut requests = Vec::with_capacity(pop.total() as usize);
        let classes = [(UserClass::BOnly, pop.u_b), (UserClass::WOnly, pop.u_w), (UserClass::Both, pop.u_2)];
        for (class, count) in classes {
            requests.extend((0..count).map(|_| Request { class, file: 0 }));
        }
        Self { n_files: pop.n_bins, requests }
    }

    pub fn n_files(&self) -> u32 {
        self.n_files
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub(crate) fn requests_mut(&mut self) -> &mut [Request] {
        &mut self.requests
    }

    pub fn count(&self, class: UserClass) -> usize {
        self.requests.iter().filter(|r| r.class == class).count()
    }
}

/// Draws file indices from the popularity model.
#[derive(Debug, Clone)]
pub enum FileSampler {
    Uniform(Uniform<u32>),
    Weighted(WeightedIndex<f64>),
}

impl FileSampler {
    pub fn new(popularity: Popularity, n_files: u32) -> Result<Self> {
        if n_files == 0 {
            return Err(Error::EmptyLibrary(0));
        }
        popularity.validate()?;
        Ok(match popularity {
            Popularity::Uniform => FileSampler::Uniform(Uniform::new(0, n_files)),
            Popularity::Zipf { .. } => {
                let pmf = popularity.pmf(n_files);
                FileSampler::Weighted(WeightedIndex::new(pmf).map_err(|e| Error::Domain(e.to_string()))?)
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            FileSampler::Uniform(u) => u.sample(rng),
            FileSampler::Weighted(w) => w.sample(rng) as u32,
        }
    }

    /// Overwrite every request's file, keeping class labels.
    pub fn refill<R: Rng + ?Sized>(&self, rng: &mut R, realization: &mut Realization) {
        for req in realization.requests_mut() {
            req.file = self.sample(rng);
        }
    }
}

/// `u` independent draws from the popularity model, labelled by class in
/// population order.
pub fn sample_realization<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Realization> {
    let sampler = FileSampler::new(scenario.popularity(), scenario.n_files())?;
    let mut realization = Realization::blank(scenario.population());
    sampler.refill(rng, &mut realization);
    Ok(realization)
}
