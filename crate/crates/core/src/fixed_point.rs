//! Approximation of the limiting law and fixed-point diagnostics.
//!
//! The zero-mean, finite-variance fixed point of the Quicksort transformation
//! is approximated by forward iteration from the point mass at zero. Residual
//! reports quantify how far a sample is from being fixed, and the verifiers
//! check the two directions the lab can reach: every Cauchy convolution of
//! the limit is fixed, and the limit agrees with normalized sorting costs.

use crate::dist::{
    cauchy_sample, cf_sup_distance, convolve, default_grid, empirical_cf, ks_distance,
    ks_distance_trimmed, CauchyParams, EmpiricalDist,
};
use crate::error::{Error, Result};
use crate::quicksort::normalized_costs;
use crate::stream::Stream;
use crate::transform::{apply_t, iterate, TransformKind};
use serde::{Deserialize, Serialize};

/// Fraction trimmed from each tail when a KS comparison involves a
/// heavy-tailed (positive-scale Cauchy) component.
pub const HEAVY_TAIL_TRIM: f64 = 0.01;

/// Distance between a sample and its image under the Quicksort
/// transformation, with summary moments of the input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub iterations: usize,
    pub sample_size: usize,
    pub residual_ks: f64,
    pub residual_cf: f64,
    pub mean: f64,
    pub variance: f64,
    pub stream_key: u64,
}

/// Agreement diagnostics between independently constructed candidates for
/// the zero-mean fixed point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroMeanAgreement {
    pub keys: u64,
    pub reps: usize,
    /// KS between the input approximation and a second one built from
    /// disjoint streams.
    pub ks_independent: f64,
    /// KS between the input approximation and normalized sorting costs.
    pub ks_costs: f64,
    /// KS between the input approximation and its convolution with a
    /// positive-scale Cauchy law; large by construction, a control that the
    /// metric separates distinct fixed points.
    pub ks_scaled_control: f64,
    pub mean_mu: f64,
    pub mean_costs: f64,
    pub stream_key: u64,
}

/// Residual of the transformation at each recorded stage of an iteration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageResidual {
    pub stage: usize,
    pub residual_ks: f64,
    pub residual_cf: f64,
    pub variance: f64,
}

/// Iterate the Quicksort transformation from the point mass at zero and
/// return the final stage.
pub fn approximate_mu(
    iterations: usize,
    sample_size: usize,
    stream: Stream,
) -> Result<EmpiricalDist> {
    if iterations < 1 {
        return Err(Error::InvalidArgument(
            "approximate_mu needs at least one iteration".into(),
        ));
    }
    if sample_size < 1_000 {
        return Err(Error::InvalidArgument(format!(
            "sample_size {sample_size} too small for a usable approximation (min 1000)"
        )));
    }
    let stages = iterate(
        TransformKind::Quicksort,
        &EmpiricalDist::delta(0.0),
        iterations,
        sample_size,
        stream,
    )?;
    Ok(stages
        .into_iter()
        .last()
        .expect("iterate returns n + 1 stages"))
}

/// Compare a sample against its image under the transformation: KS between
/// the image and a fresh bootstrap of the input, and the sup distance of
/// their empirical characteristic functions on the default grid.
pub fn residual(d: &EmpiricalDist, stream: Stream) -> Result<FixedPointReport> {
    residual_with_trim(d, 0.0, stream)
}

fn residual_with_trim(d: &EmpiricalDist, trim: f64, stream: Stream) -> Result<FixedPointReport> {
    let out = d.len();
    let image = apply_t(d, out, stream.child(1))?;
    let fresh = d.resample(out, stream.child(2))?;
    let residual_ks = if trim > 0.0 {
        ks_distance_trimmed(&image, &fresh, trim)?
    } else {
        ks_distance(&image, &fresh)
    };
    let ts = default_grid();
    let residual_cf = cf_sup_distance(&empirical_cf(&image, &ts)?, &empirical_cf(&fresh, &ts)?)?;
    Ok(FixedPointReport {
        iterations: 0,
        sample_size: out,
        residual_ks,
        residual_cf,
        mean: d.mean(),
        variance: d.variance(),
        stream_key: stream.key(),
    })
}

/// Residual of the convolution of `mu_hat` with the given Cauchy law. The
/// characteristic-function residual is the authoritative figure; for
/// positive scale the KS side is trimmed to the central mass.
pub fn verify_theorem1(
    params: CauchyParams,
    mu_hat: &EmpiricalDist,
    stream: Stream,
) -> Result<FixedPointReport> {
    let n = mu_hat.len();
    let noise = cauchy_sample(params, n, stream.child(1))?;
    let cell = convolve(mu_hat, &noise, n, stream.child(2))?;
    let trim = if params.scale > 0.0 {
        HEAVY_TAIL_TRIM
    } else {
        0.0
    };
    residual_with_trim(&cell, trim, stream.child(3))
}

/// Agreement between `mu_hat`, a second approximation from disjoint streams,
/// and normalized costs of sorting `keys` keys over `reps` runs, plus a
/// scaled-convolution control that must disagree.
pub fn verify_corollary2(
    mu_hat: &EmpiricalDist,
    keys: u64,
    reps: usize,
    stream: Stream,
) -> Result<ZeroMeanAgreement> {
    let second = approximate_mu(25, 200_000, stream.child(1))?;
    let costs = normalized_costs(keys, reps, stream.child(2))?;
    let scaled = convolve(
        mu_hat,
        &cauchy_sample(CauchyParams::new(0.0, 0.5)?, mu_hat.len(), stream.child(3))?,
        mu_hat.len(),
        stream.child(4),
    )?;
    Ok(ZeroMeanAgreement {
        keys,
        reps,
        ks_independent: ks_distance(mu_hat, &second),
        ks_costs: ks_distance(mu_hat, &costs),
        ks_scaled_control: ks_distance(mu_hat, &scaled),
        mean_mu: mu_hat.mean(),
        mean_costs: costs.mean(),
        stream_key: stream.key(),
    })
}

/// Run the iteration from the point mass at zero up to the largest requested
/// stage and report the residual at each requested stage.
pub fn contraction_profile(
    stages: &[usize],
    sample_size: usize,
    stream: Stream,
) -> Result<Vec<StageResidual>> {
    let &max = stages
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidArgument("no stages requested".into()))?;
    if stages.contains(&0) {
        return Err(Error::InvalidArgument(
            "stage 0 is the point mass; residuals start at stage 1".into(),
        ));
    }
    let trajectory = iterate(
        TransformKind::Quicksort,
        &EmpiricalDist::delta(0.0),
        max,
        sample_size,
        stream.child(0),
    )?;
    let mut out = Vec::with_capacity(stages.len());
    for &s in stages {
        let d = &trajectory[s];
        let r = residual(d, stream.child(1_000 + s as u64))?;
        out.push(StageResidual {
            stage: s,
            residual_ks: r.residual_ks,
            residual_cf: r.residual_cf,
            variance: d.variance(),
        });
    }
    Ok(out)
}
