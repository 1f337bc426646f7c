//! Recursive splitting weights and direct attraction experiments.
//!
//! Splitting the unit interval binarily n times yields 2^n weights; the
//! weighted sum W_n of independent source draws follows the n-th homogeneous
//! iterate of the source law. The largest weight L_n controls how fast the
//! iterates approach their Cauchy attractor, and its tail admits the
//! explicit bound exp[-(n (ln n - ln(2 e x)) + x)] for P(L_n >= e^{-x}),
//! valid for n >= x. Everything here draws whole replication trees from
//! per-replication streams.

use crate::analysis::{fit_beta, DEFAULT_FIT_WINDOW};
use crate::dist::{
    cauchy_draw, cauchy_sample, default_grid, empirical_cf, ks_distance, CauchyParams,
    EmpiricalDist, Provenance,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::stream::Stream;
use crate::transform::{apply_t2, open_unit, CoupledSample};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Memory guard: 2^25 weights is about 3e7 values, the desk-scale ceiling.
pub const MAX_LEVEL: u32 = 25;

/// Weights of the 2^n subintervals produced by n binary splits.
#[derive(Clone, Debug)]
pub struct WeightVector {
    level: u32,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::LevelTooLarge {
            level,
            max: MAX_LEVEL,
        });
    }
    Ok(())
}

fn split_weights_with(level: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut weights = vec![1.0];
    for _ in 0..level {
        let mut next = Vec::with_capacity(weights.len() * 2);
        for &w in &weights {
            let u = open_unit(rng);
            next.push(w * u);
            next.push(w * (1.0 - u));
        }
        weights = next;
    }
    weights
}

/// Split the unit interval binarily `level` times, left to right.
pub fn split_weights(level: u32, stream: Stream) -> Result<WeightVector> {
    check_level(level)?;
    let mut rng = stream.rng();
    Ok(WeightVector {
        level,
        weights: split_weights_with(level, &mut rng),
    })
}

/// Largest weight of the vector.
pub fn max_weight(w: &WeightVector) -> f64 {
    w.max_weight()
}

/// One draw of the largest level-`level` weight, without materializing the
/// tree: depth-first descent, heavier child first, pruning any subtree whose
/// running product cannot beat the best leaf found so far (products of
/// fractions only shrink).
pub fn draw_max_weight(level: u32, rng: &mut ChaCha8Rng) -> f64 {
    fn descend(depth_left: u32, w: f64, best: &mut f64, rng: &mut ChaCha8Rng) {
        if depth_left == 0 {
            if w > *best {
                *best = w;
            }
            return;
        }
        let u = open_unit(rng);
        let hi = w * u.max(1.0 - u);
        let lo = w * u.min(1.0 - u);
        if hi > *best {
            descend(depth_left - 1, hi, best, rng);
        }
        if lo > *best {
            descend(depth_left - 1, lo, best, rng);
        }
    }
    let mut best = 0.0;
    descend(level, 1.0, &mut best, rng);
    best
}

/// Independent draws of the largest weight.
pub fn max_weight_sample(level: u32, reps: usize, stream: Stream) -> Result<EmpiricalDist> {
    check_level(level)?;
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let values = exec::sample_indexed(reps, stream, |rng, _| draw_max_weight(level, rng));
    EmpiricalDist::new(
        values,
        Provenance::with_stream(format!("max_weight(level={level})"), stream),
    )
}

/// Independent draws of the first (leftmost) weight.
pub fn first_weight_sample(level: u32, reps: usize, stream: Stream) -> Result<EmpiricalDist> {
    check_level(level)?;
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    // The leftmost weight is the running product down the left spine; the
    // rest of the tree does not influence it.
    let values = exec::sample_indexed(reps, stream, |rng, _| {
        (0..level).fold(1.0, |w, _| w * open_unit(rng))
    });
    EmpiricalDist::new(
        values,
        Provenance::with_stream(format!("first_weight(level={level})"), stream),
    )
}

/// Independent draws of the squared-weight sum of a full split.
pub fn squared_sum_sample(level: u32, reps: usize, stream: Stream) -> Result<EmpiricalDist> {
    check_level(level)?;
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let values = exec::sample_indexed(reps, stream, |rng, _| {
        split_weights_with(level, rng).iter().map(|w| w * w).sum()
    });
    EmpiricalDist::new(
        values,
        Provenance::with_stream(format!("squared_sum(level={level})"), stream),
    )
}

/// The tail bound value exp[-(n (ln n - ln(2 e x)) + x)] with its validity
/// flags.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChernoffBound {
    pub level: u32,
    pub x: f64,
    pub value: f64,
    /// The bound proves nothing when it reaches 1.
    pub vacuous: bool,
    /// The derivation assumes n >= x.
    pub in_validity_range: bool,
}

/// Evaluate the tail bound for P(L_n >= e^{-x}).
pub fn chernoff_bound(level: u32, x: f64) -> Result<ChernoffBound> {
    if level < 1 {
        return Err(Error::InvalidArgument("bound needs level >= 1".into()));
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "threshold exponent must be positive and finite, got {x}"
        )));
    }
    let n = level as f64;
    let value = (-(n * (n.ln() - (2.0 * std::f64::consts::E * x).ln()) + x)).exp();
    Ok(ChernoffBound {
        level,
        x,
        value,
        vacuous: value >= 1.0,
        in_validity_range: n >= x,
    })
}

/// Empirical check of the tail bound on one (level, x) cell.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChernoffCheck {
    pub bound: ChernoffBound,
    pub reps: usize,
    pub exceedances: usize,
    pub frequency: f64,
    /// One-sided slack: three binomial standard errors at the bound value.
    pub slack: f64,
    pub pass: bool,
}

fn check_cell(bound: ChernoffBound, ls: &EmpiricalDist) -> ChernoffCheck {
    let reps = ls.len();
    let threshold = (-bound.x).exp();
    let exceedances = ls.values().iter().filter(|&&l| l >= threshold).count();
    let frequency = exceedances as f64 / reps as f64;
    let p = bound.value.min(1.0);
    let slack = 3.0 * (p * (1.0 - p) / reps as f64).sqrt();
    ChernoffCheck {
        bound,
        reps,
        exceedances,
        frequency,
        slack,
        pass: bound.vacuous || frequency <= bound.value + slack,
    }
}

/// Draw `reps` values of L_n and compare the exceedance frequency with the
/// bound; vacuous cells pass trivially and stay flagged.
pub fn verify_chernoff(level: u32, x: f64, reps: usize, stream: Stream) -> Result<ChernoffCheck> {
    if reps < 1_000 {
        return Err(Error::InvalidArgument(
            "need at least 1000 replications for a meaningful frequency".into(),
        ));
    }
    let bound = chernoff_bound(level, x)?;
    let ls = max_weight_sample(level, reps, stream)?;
    Ok(check_cell(bound, &ls))
}

/// Run the bound check over a full (level, x) grid, sharing the L_n draws
/// across thresholds at the same level.
pub fn chernoff_grid(
    levels: &[u32],
    xs: &[f64],
    reps: usize,
    stream: Stream,
) -> Result<Vec<ChernoffCheck>> {
    let mut out = Vec::with_capacity(levels.len() * xs.len());
    for &level in levels {
        let ls = max_weight_sample(level, reps, stream.child(level as u64))?;
        for &x in xs {
            out.push(check_cell(chernoff_bound(level, x)?, &ls));
        }
    }
    Ok(out)
}

/// Source laws for the attraction experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Source {
    Cauchy(CauchyParams),
    /// Exponential with mean 1; slope i at the origin, so the attractor is
    /// the point mass at 1.
    UnitExponential,
    /// Density |x|^{-2}/2 on |x| >= 1; tails match a Cauchy of scale pi/2.
    SymmetricPareto,
}

impl Source {
    pub fn label(&self) -> String {
        match self {
            Source::Cauchy(p) => format!("cauchy(m={}, sigma={})", p.location, p.scale),
            Source::UnitExponential => "exp(1)".into(),
            Source::SymmetricPareto => "pareto(|x|>=1)".into(),
        }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Source::Cauchy(p) => cauchy_draw(*p, rng),
            Source::UnitExponential => -(1.0 - rng.random::<f64>()).ln(),
            Source::SymmetricPareto => {
                let magnitude = 1.0 / open_unit(rng);
                if rng.random::<f64>() < 0.5 {
                    -magnitude
                } else {
                    magnitude
                }
            }
        }
    }

    /// Sample of independent draws.
    pub fn sample(&self, n: usize, stream: Stream) -> Result<EmpiricalDist> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let values = exec::sample_indexed(n, stream, |rng, _| self.draw(rng));
        EmpiricalDist::new(values, Provenance::with_stream(self.label(), stream))
    }
}

/// Estimate the (m, sigma) attractor of a source from the slope of its
/// empirical characteristic function.
pub fn estimate_source_target(source: Source, n: usize, stream: Stream) -> Result<CauchyParams> {
    let sample = source.sample(n, stream)?;
    let cf = empirical_cf(&sample, &default_grid())?;
    let fit = fit_beta(&cf, DEFAULT_FIT_WINDOW)?;
    CauchyParams::new(fit.beta.im, (-fit.beta.re).max(0.0))
}

/// Summary of the largest-weight draws taken alongside an attraction run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MaxWeightStats {
    pub level: u32,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

fn summarize_max_weights(level: u32, d: &EmpiricalDist) -> Result<MaxWeightStats> {
    Ok(MaxWeightStats {
        level,
        count: d.len(),
        mean: d.mean(),
        median: d.quantile(0.5)?,
        q90: d.quantile(0.9)?,
        max: d.max(),
    })
}

/// Per-level distances of the weighted sums W_n from the Cauchy target.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttractionReport {
    pub source: String,
    pub target: CauchyParams,
    pub max_level: u32,
    pub reps: usize,
    /// ks_by_stage[n] = KS(W_n sample, fresh target sample), n = 0..=max.
    pub ks_by_stage: Vec<f64>,
    pub mean_by_stage: Vec<f64>,
    pub stdev_by_stage: Vec<f64>,
    pub l_n_stats: MaxWeightStats,
    pub stream_key: u64,
}

impl AttractionReport {
    pub fn final_ks(&self) -> f64 {
        *self.ks_by_stage.last().expect("at least level 0")
    }

    pub fn final_stdev(&self) -> f64 {
        *self.stdev_by_stage.last().expect("at least level 0")
    }
}

#[derive(Clone, Debug, Default)]
struct WeightedSums {
    by_level: Vec<f64>,
    max_weight: f64,
}

/// For each level n <= max_level, draw reps weighted sums W_n (one shared
/// split tree per replication, fresh source draws at every node) and report
/// the KS distance per level to fresh samples of the target.
pub fn t0_attraction(
    source: Source,
    target: CauchyParams,
    max_level: u32,
    reps: usize,
    stream: Stream,
) -> Result<AttractionReport> {
    check_level(max_level)?;
    if reps < 100 {
        return Err(Error::InvalidArgument(
            "need at least 100 replications per level".into(),
        ));
    }
    fn descend(
        depth_left: u32,
        w: f64,
        source: Source,
        sums: &mut WeightedSums,
        rng: &mut ChaCha8Rng,
    ) {
        let depth = sums.by_level.len() - 1 - depth_left as usize;
        sums.by_level[depth] += w * source.draw(rng);
        if depth_left == 0 {
            if w > sums.max_weight {
                sums.max_weight = w;
            }
            return;
        }
        let u = open_unit(rng);
        descend(depth_left - 1, w * u, source, sums, rng);
        descend(depth_left - 1, w * (1.0 - u), source, sums, rng);
    }
    let draws = exec::sample_indexed(reps, stream.child(1), |rng, _| {
        let mut sums = WeightedSums {
            by_level: vec![0.0; max_level as usize + 1],
            max_weight: 0.0,
        };
        descend(max_level, 1.0, source, &mut sums, rng);
        sums
    });

    let mut ks_by_stage = Vec::with_capacity(max_level as usize + 1);
    let mut mean_by_stage = Vec::with_capacity(max_level as usize + 1);
    let mut stdev_by_stage = Vec::with_capacity(max_level as usize + 1);
    for n in 0..=max_level as usize {
        let w = EmpiricalDist::new(
            draws.iter().map(|d| d.by_level[n]).collect(),
            Provenance::new(format!("W_{n}({})", source.label())),
        )?;
        let fresh = cauchy_sample(target, reps, stream.child(1_000 + n as u64))?;
        ks_by_stage.push(ks_distance(&w, &fresh));
        mean_by_stage.push(w.mean());
        stdev_by_stage.push(w.stdev());
    }
    let ls = EmpiricalDist::new(
        draws.iter().map(|d| d.max_weight).collect(),
        Provenance::new(format!("L_{max_level}")),
    )?;
    Ok(AttractionReport {
        source: source.label(),
        target,
        max_level,
        reps,
        ks_by_stage,
        mean_by_stage,
        stdev_by_stage,
        l_n_stats: summarize_max_weights(max_level, &ls)?,
        stream_key: stream.key(),
    })
}

/// Per-level record of the coupled iteration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingReport {
    pub levels: u32,
    pub pairs: usize,
    /// Slope-estimated attractor of the initial difference, scale floored at
    /// one percent of the initial difference spread so the reference stays a
    /// sampleable law even when the estimated scale is zero.
    pub target: CauchyParams,
    pub fitted_scale: f64,
    pub ks_marginal_x: Vec<f64>,
    pub ks_marginal_y: Vec<f64>,
    pub ks_difference: Vec<f64>,
    pub difference_stdev: Vec<f64>,
    pub stream_key: u64,
}

/// Iterate the coupled transformation from an independent coupling of
/// (nu1, nu2); the marginals must stay put while the difference contracts
/// toward its Cauchy attractor.
pub fn coupling_experiment(
    nu1: &EmpiricalDist,
    nu2: &EmpiricalDist,
    levels: u32,
    stream: Stream,
) -> Result<CouplingReport> {
    let pairs = nu1.len().min(nu2.len());
    let mut current = CoupledSample::independent(nu1, nu2, pairs, stream.child(0))?;
    let d0 = current.differences();
    let fit = fit_beta(&empirical_cf(&d0, &default_grid())?, DEFAULT_FIT_WINDOW)?;
    let fitted_scale = (-fit.beta.re).max(0.0);
    let target = CauchyParams::new(fit.beta.im, fitted_scale.max(0.01 * d0.stdev()))?;

    let mut report = CouplingReport {
        levels,
        pairs,
        target,
        fitted_scale,
        ks_marginal_x: Vec::with_capacity(levels as usize + 1),
        ks_marginal_y: Vec::with_capacity(levels as usize + 1),
        ks_difference: Vec::with_capacity(levels as usize + 1),
        difference_stdev: Vec::with_capacity(levels as usize + 1),
        stream_key: stream.key(),
    };
    for k in 0..=levels {
        if k > 0 {
            current = apply_t2(&current, pairs, stream.child(100 + k as u64))?;
        }
        report
            .ks_marginal_x
            .push(ks_distance(&current.marginal_x(), nu1));
        report
            .ks_marginal_y
            .push(ks_distance(&current.marginal_y(), nu2));
        let d = current.differences();
        let fresh = cauchy_sample(target, pairs, stream.child(100_000 + k as u64))?;
        report.ks_difference.push(ks_distance(&d, &fresh));
        report.difference_stdev.push(d.stdev());
    }
    Ok(report)
}
