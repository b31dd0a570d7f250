//! Monte-Carlo replay of one counter group under the ranking rules.
//!
//! A trial follows the `L` candidate cells of a target edge (label 0) in
//! each of the `P` layers. Every layer independently receives a Poisson
//! number of same-label colliders and of foreign-label edges, each with a
//! fresh uniform rank vector, plus one arrival of the target, all in random
//! order. The target keeps one rank vector across layers.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::BoundParams;
use crate::error::{Result, SketchError};
use crate::hash::seeded_stream;
use crate::par;
use crate::rank::{compare_priority, rank_at, Priority, UNOCCUPIED};

pub const MIN_TRIALS: usize = 1_000;

const CHUNK: usize = 1_024;
const STREAM_BASE: u64 = 1 << 48;

/// Per-trial absolute errors of the ranked estimate and of the home cell
/// alone (which is what the unranked baseline would report).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub sbg_errors: Vec<u32>,
    pub home_errors: Vec<u32>,
}

impl SimulationResult {
    pub fn trials(&self) -> usize {
        self.sbg_errors.len()
    }

    /// Empirical `Pr[error > k]`.
    pub fn ccdf(&self, k: usize) -> f64 {
        self.sbg_errors.iter().filter(|&&e| e as usize > k).count() as f64 / self.trials() as f64
    }

    /// Empirical `Pr[home error > k]`.
    pub fn home_ccdf(&self, k: usize) -> f64 {
        self.home_errors.iter().filter(|&&e| e as usize > k).count() as f64 / self.trials() as f64
    }

    /// Empirical probability that the home cell exceeds `k` but a rented
    /// cell keeps the error within `k`.
    pub fn rescued(&self, k: usize) -> f64 {
        self.sbg_errors
            .iter()
            .zip(&self.home_errors)
            .filter(|&(&s, &h)| h as usize > k && s as usize <= k)
            .count() as f64
            / self.trials() as f64
    }

    /// Binomial standard error of a proportion estimated from these trials.
    pub fn std_error_of(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials() as f64).sqrt()
    }

    pub fn std_error(&self, k: usize) -> f64 {
        self.std_error_of(self.ccdf(k))
    }

    /// Wilson score interval for `Pr[error > k]`.
    pub fn wilson_interval(&self, k: usize, z: f64) -> (f64, f64) {
        let n = self.trials() as f64;
        let p = self.ccdf(k);
        let z2 = z * z;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
    }
}

#[derive(Clone, Copy)]
enum Arrival {
    Target,
    Other { label: usize },
}

struct Trial<'a> {
    num_labels: usize,
    colliders: f64,
    foreign: f64,
    perm: &'a mut Vec<u8>,
    arrivals: Vec<Arrival>,
    ranks: Vec<u8>,
    aggregates: Vec<f64>,
}

impl Trial<'_> {
    /// Runs one layer; returns `(ranked error, home error)`.
    fn layer<R: Rng + ?Sized>(&mut self, rng: &mut R, target: &[u8]) -> (u32, u32) {
        let l = self.num_labels;
        self.arrivals.clear();
        self.arrivals.push(Arrival::Target);
        for _ in 0..poisson_count(rng, self.colliders) {
            self.arrivals.push(Arrival::Other { label: 0 });
        }
        for _ in 0..poisson_count(rng, self.foreign) {
            self.arrivals.push(Arrival::Other { label: rng.random_range(1..l) });
        }
        self.arrivals.shuffle(rng);
        self.ranks.iter_mut().for_each(|r| *r = UNOCCUPIED);
        self.aggregates.iter_mut().for_each(|a| *a = 0.0);
        for &arrival in &self.arrivals {
            let (stored, label): (&[u8], usize) = match arrival {
                Arrival::Target => (target, 0),
                Arrival::Other { label } => {
                    self.perm.shuffle(rng);
                    (self.perm.as_slice(), label)
                }
            };
            for m in 0..l {
                let r = rank_at(stored, label, m);
                match compare_priority(r, self.ranks[m]) {
                    Priority::Higher => {
                        self.ranks[m] = r;
                        self.aggregates[m] = 1.0;
                    }
                    Priority::Equal => self.aggregates[m] += 1.0,
                    Priority::Lower => {}
                }
            }
        }
        let mut estimate = f64::INFINITY;
        for m in 0..l {
            if rank_at(target, 0, m) == self.ranks[m] {
                estimate = estimate.min(self.aggregates[m]);
            }
        }
        ((estimate - 1.0) as u32, (self.aggregates[0] - 1.0) as u32)
    }
}

fn run_chunk(params: &BoundParams, seed: u64, chunk: usize, trials: usize) -> (Vec<u32>, Vec<u32>) {
    let mut rng = seeded_stream(seed, STREAM_BASE + chunk as u64);
    let l = params.num_labels;
    let scale = (1.0 + params.alpha) * params.num_hashes as f64;
    let mut perm: Vec<u8> = (1..l as u8).collect();
    let mut target: Vec<u8> = (1..l as u8).collect();
    let mut trial = Trial {
        num_labels: l,
        colliders: scale * params.lambda0,
        foreign: scale * params.lambda,
        perm: &mut perm,
        arrivals: Vec::new(),
        ranks: vec![UNOCCUPIED; l],
        aggregates: vec![0.0; l],
    };
    let mut sbg = Vec::with_capacity(trials);
    let mut home = Vec::with_capacity(trials);
    for _ in 0..trials {
        target.shuffle(&mut rng);
        let mut best = (u32::MAX, u32::MAX);
        for _ in 0..params.num_hashes {
            let (s, h) = trial.layer(&mut rng, &target);
            best = (best.0.min(s), best.1.min(h));
        }
        sbg.push(best.0);
        home.push(best.1);
    }
    (sbg, home)
}

/// Empirical error distribution of the ranked sketch under `params`.
///
/// Trials are split into fixed-size chunks with their own random streams,
/// so the result depends only on `(params, trials, seed)`.
pub fn simulate_eviction(params: &BoundParams, trials: usize, seed: u64) -> Result<SimulationResult> {
    params.validate()?;
    if trials < MIN_TRIALS {
        return Err(SketchError::Config(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let chunks = trials.div_ceil(CHUNK);
    let parts = par::map_range(chunks, |c| {
        let n = CHUNK.min(trials - c * CHUNK);
        run_chunk(params, seed, c, n)
    });
    let mut result = SimulationResult {
        sbg_errors: Vec::with_capacity(trials),
        home_errors: Vec::with_capacity(trials),
    };
    for (s, h) in parts {
        result.sbg_errors.extend(s);
        result.home_errors.extend(h);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_traffic_no_error() {
        let p = BoundParams::new(4, 2, 0.0, 0.0, 0.0);
        let r = simulate_eviction(&p, 2_000, 1).unwrap();
        assert!(r.sbg_errors.iter().all(|&e| e == 0));
        assert_eq!(r.ccdf(0), 0.0);
    }

    #[test]
    fn too_few_trials() {
        let p = BoundParams::new(4, 1, 0.0, 1.0, 1.0);
        assert!(simulate_eviction(&p, 999, 1).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let p = BoundParams::new(5, 2, 0.1, 2.0, 1.0);
        let a = simulate_eviction(&p, 3_000, 42).unwrap();
        let b = simulate_eviction(&p, 3_000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_eviction(&p, 3_000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ranked_error_never_exceeds_home_error() {
        let p = BoundParams::new(5, 2, 0.0, 3.0, 2.0);
        let r = simulate_eviction(&p, 5_000, 9).unwrap();
        assert!(r.sbg_errors.iter().zip(&r.home_errors).all(|(s, h)| s <= h));
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        let p = BoundParams::new(3, 1, 0.0, 1.0, 1.0);
        let r = simulate_eviction(&p, 4_000, 3).unwrap();
        let (lo, hi) = r.wilson_interval(0, 1.96);
        assert!(lo <= r.ccdf(0) && r.ccdf(0) <= hi);
    }
}
