//! Analytic error bounds for the ranked sketch versus the unranked baseline.
//!
//! All Poisson and binomial terms are evaluated in log space. The absolute
//! error of the baseline at one counter is Poisson with mean
//! `(1 + alpha) * P * lambda0`; the ranked sketch improves on it by `zeta`,
//! a lower bound on the probability that the edge also holds a rented cell
//! that saw at most `k` collisions and was never evicted.

mod simulate;

use std::io::Write;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::par;

pub use simulate::{simulate_eviction, SimulationResult, MIN_TRIALS};

/// Probabilities this far outside `[0, 1]` are reported before clamping.
const CLAMP_DIAGNOSTIC: f64 = 1e-9;

/// Inputs of the bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// `L`, the number of labels (priorities).
    pub num_labels: usize,
    /// `P`, the number of independent hash functions.
    pub num_hashes: usize,
    /// Counter reduction `1 / (1 + alpha)` caused by the rank bytes.
    pub alpha: f64,
    /// Per-counter arrival rate of colliding edges with the target's label.
    pub lambda0: f64,
    /// Per-counter arrival rate of edges with any other label.
    pub lambda: f64,
    /// Truncation of the `zeta` sum; `None` picks `max(k + 1, ceil(mu + 12 sqrt(mu)))`.
    pub k_max: Option<usize>,
}

impl BoundParams {
    pub fn new(num_labels: usize, num_hashes: usize, alpha: f64, lambda0: f64, lambda: f64) -> Self {
        Self {
            num_labels,
            num_hashes,
            alpha,
            lambda0,
            lambda,
            k_max: None,
        }
    }

    /// The setting of the two-curve illustration: 100 labels, one hash, a
    /// 10% counter reduction, 50 same-label collisions per counter and every
    /// other label arriving at 1/100 of that rate.
    pub fn skewed_example() -> Self {
        let lambda0 = 50.0;
        Self::new(100, 1, 1.0 / 9.0, lambda0, 99.0 * lambda0 / 100.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_labels < 2 {
            return Err(SketchError::Config("bounds need at least two labels".into()));
        }
        if self.num_hashes == 0 {
            return Err(SketchError::Config("bounds need at least one hash function".into()));
        }
        for (name, v) in [("alpha", self.alpha), ("lambda0", self.lambda0), ("lambda", self.lambda)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SketchError::Config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Mean number of same-label collisions per counter, `(1 + alpha) P lambda0`.
    pub fn collision_mean(&self) -> f64 {
        (1.0 + self.alpha) * self.num_hashes as f64 * self.lambda0
    }

    fn k_max_for(&self, k: usize) -> Result<usize> {
        match self.k_max {
            Some(k_max) if k_max <= k => Err(SketchError::Config(format!(
                "truncation bound K_max = {k_max} must exceed k = {k}"
            ))),
            Some(k_max) => Ok(k_max),
            None => {
                let mu = self.collision_mean();
                Ok((k + 1).max((mu + 12.0 * mu.sqrt()).ceil() as usize))
            }
        }
    }
}

/// Arrival rate of one edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRate {
    pub label: u16,
    pub rate: f64,
}

/// Per-edge Poisson rates and the label of the edge whose error is studied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub rates: Vec<EdgeRate>,
    pub target_label: u16,
}

/// `(lambda0, lambda)` per counter of a `d x d` matrix.
///
/// `lambda0` spreads the same-label traffic over the `d^2` counters and
/// `lambda` spreads everything else.
pub fn effective_rates(model: &RateModel, dimension: usize) -> Result<(f64, f64)> {
    if dimension == 0 {
        return Err(SketchError::Config("matrix dimension must be positive".into()));
    }
    if let Some(bad) = model.rates.iter().find(|r| !(r.rate.is_finite() && r.rate >= 0.0)) {
        return Err(SketchError::Config(format!("invalid arrival rate {}", bad.rate)));
    }
    let cells = (dimension * dimension) as f64;
    let total: f64 = model.rates.iter().map(|r| r.rate).sum();
    let same: f64 = model.rates.iter().filter(|r| r.label == model.target_label).map(|r| r.rate).sum();
    Ok((same / cells, (total - same) / cells))
}

/// `ln n!` for `n = 0..=max`.
fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// `ln Pr[Poisson(mu) = j]` given `ln j!`.
#[inline]
fn ln_poisson(j: usize, mu: f64, ln_fact_j: f64) -> f64 {
    if mu == 0.0 {
        return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    j as f64 * mu.ln() - mu - ln_fact_j
}

/// `Pr[Poisson(mu) > k]`.
pub fn poisson_ccdf(k: usize, mu: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    if (k as f64) < mu {
        // Left of the mode the head is the small part.
        let lf = ln_factorials(k);
        let head: f64 = (0..=k).map(|j| ln_poisson(j, mu, lf[j]).exp()).sum();
        return (1.0 - head).max(0.0);
    }
    // Sum the tail forwards with the term recurrence t_{j+1} = t_j mu / (j + 1).
    let first = k + 1;
    let ln_fact: f64 = (1..=first).map(|n| (n as f64).ln()).sum();
    let mut ln_term = ln_poisson(first, mu, ln_fact);
    let mut sum = 0.0;
    let mut j = first;
    loop {
        let term = ln_term.exp();
        sum += term;
        if term <= sum * 1e-17 || term == 0.0 {
            break;
        }
        j += 1;
        ln_term += mu.ln() - (j as f64).ln();
    }
    sum
}

fn clamp_probability(what: &str, p: f64, lo: f64, hi: f64) -> f64 {
    if p < lo - CLAMP_DIAGNOSTIC || p > hi + CLAMP_DIAGNOSTIC {
        log::warn!("{what} = {p} strays outside [{lo}, {hi}]; clamping");
    }
    p.clamp(lo, hi)
}

/// `Pr[X_TCM - X_e > k]`: the baseline's absolute-error tail.
pub fn tcm_error_ccdf(k: usize, params: &BoundParams) -> f64 {
    clamp_probability("tcm ccdf", poisson_ccdf(k, params.collision_mean()), 0.0, 1.0)
}

/// Probability that at most `k` of `j` same-label colliders tie the target
/// at priority `i` while none outranks it there.
pub fn gamma_term(i: usize, j: usize, k: usize, num_labels: usize) -> Result<f64> {
    let lf = ln_factorials(j);
    gamma_with(i, j, k, num_labels, &lf)
}

fn gamma_with(i: usize, j: usize, k: usize, num_labels: usize, lf: &[f64]) -> Result<f64> {
    if num_labels < 2 {
        return Err(SketchError::Config("gamma needs at least two labels".into()));
    }
    if i == 0 || i >= num_labels {
        return Err(SketchError::Config(format!("priority {i} outside 1..{num_labels}")));
    }
    if j <= k {
        return Err(SketchError::Config(format!("gamma needs j > k, got j = {j}, k = {k}")));
    }
    let others = (num_labels - 1) as f64;
    let ln_tie = (1.0 / others).ln();
    let below = (num_labels - 1 - i) as f64 / others;
    if below == 0.0 {
        // Only k_i = j survives, and j > k excludes it.
        return Ok(0.0);
    }
    let ln_below = below.ln();
    let sum = (0..=k.min(j))
        .map(|ki| {
            let ln_choose = lf[j] - lf[ki] - lf[j - ki];
            (ki as f64 * ln_tie + (j - ki) as f64 * ln_below + ln_choose).exp()
        })
        .sum::<f64>();
    Ok(sum)
}

/// Which algebraic form of the survival factor to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundForm {
    /// `exp(-(i + 1) P lambda (1 + alpha) / L)` inside the product.
    #[default]
    Statement,
    /// `exp(-i ...)` inside the product and the same-priority factor
    /// `exp(-P lambda (1 + alpha) / L)` applied once outside it.
    Proof,
}

/// Lower bound on the probability that the target survives in a rented
/// cell with at most `k` collisions while its home cell has more than `k`.
pub fn zeta(k: usize, params: &BoundParams) -> Result<f64> {
    zeta_with_form(k, params, BoundForm::Statement)
}

pub fn zeta_with_form(k: usize, params: &BoundParams, form: BoundForm) -> Result<f64> {
    params.validate()?;
    let k_max = params.k_max_for(k)?;
    let mu = params.collision_mean();
    let ccdf = tcm_error_ccdf(k, params);
    if mu == 0.0 {
        return Ok(0.0);
    }
    let l = params.num_labels;
    let x = params.num_hashes as f64 * params.lambda * (1.0 + params.alpha) / l as f64;
    let survival: Vec<f64> = (1..l)
        .map(|i| match form {
            BoundForm::Statement => (-((i + 1) as f64) * x).exp(),
            BoundForm::Proof => (-(i as f64) * x).exp(),
        })
        .collect();
    let outer = match form {
        BoundForm::Statement => 1.0,
        BoundForm::Proof => (-x).exp(),
    };
    let lf = ln_factorials(k_max);
    let mut total = 0.0;
    for j in k + 1..=k_max {
        let weight = ln_poisson(j, mu, lf[j]).exp();
        if weight == 0.0 {
            continue;
        }
        let mut none_rescues = 1.0;
        for (idx, s) in survival.iter().enumerate() {
            none_rescues *= 1.0 - gamma_with(idx + 1, j, k, l, &lf)? * s;
        }
        total += weight * (1.0 - none_rescues) * outer;
    }
    Ok(clamp_probability("zeta", total, 0.0, ccdf))
}

/// Upper bound on `Pr[X_SBG - X_e > k]`: `(tcm_ccdf(k) - zeta(k))^P`.
pub fn sbg_error_bound(k: usize, params: &BoundParams) -> Result<f64> {
    sbg_error_bound_with_form(k, params, BoundForm::Statement)
}

pub fn sbg_error_bound_with_form(k: usize, params: &BoundParams, form: BoundForm) -> Result<f64> {
    let gap = tcm_error_ccdf(k, params) - zeta_with_form(k, params, form)?;
    Ok(clamp_probability("sbg bound", gap.powi(params.num_hashes as i32), 0.0, 1.0))
}

/// One row of a bound curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub k: usize,
    pub tcm_ccdf: f64,
    pub sbg_bound: f64,
}

/// Both curves over `ks`, evaluated in parallel.
pub fn bound_curve(params: &BoundParams, ks: RangeInclusive<usize>, form: BoundForm) -> Result<Vec<BoundPoint>> {
    params.validate()?;
    let ks: Vec<usize> = ks.collect();
    par::map(&ks, |&k| {
        Ok(BoundPoint {
            k,
            tcm_ccdf: tcm_error_ccdf(k, params),
            sbg_bound: sbg_error_bound_with_form(k, params, form)?,
        })
    })
    .into_iter()
    .collect()
}

/// Writes `k,tcm_ccdf,sbg_bound[,sim_ccdf,sim_ci_low,sim_ci_high]`.
pub fn write_curve_csv<W: Write>(out: &mut W, points: &[BoundPoint], sim: Option<&SimulationResult>) -> Result<()> {
    if sim.is_some() {
        writeln!(out, "k,tcm_ccdf,sbg_bound,sim_ccdf,sim_ci_low,sim_ci_high")?;
    } else {
        writeln!(out, "k,tcm_ccdf,sbg_bound")?;
    }
    for p in points {
        write!(out, "{},{:.12e},{:.12e}", p.k, p.tcm_ccdf, p.sbg_bound)?;
        if let Some(sim) = sim {
            let (lo, hi) = sim.wilson_interval(p.k, 1.96);
            write!(out, ",{:.12e},{:.12e},{:.12e}", sim.ccdf(p.k), lo, hi)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
