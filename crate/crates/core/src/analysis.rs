//! Small-t analysis of characteristic functions: the deviation r, the
//! quadratic remainder b with its universal bound, the integral equation
//! satisfied by fixed points, its solution constant, the singular integral J,
//! the linear slope, and the t^{2/3} envelope.
//!
//! Writing r(t) = psi(t) - 1 and P_u(t) = psi(ut) psi((1-u)t), the remainder
//!
//!   b(t) = int r(ut) r((1-u)t) du
//!        + it int [P_u(t) - 1] g(u) du
//!        + int P_u(t) [e^{itg(u)} - 1 - itg(u)] du
//!
//! collects everything in the transformed function beyond 1 + 2 int r(ut) du;
//! the toll has mean zero, so r(t) - 2 int r(ut) du - b(t) equals psi minus
//! its image pointwise. Fixed points therefore satisfy
//! r(t) = 2 int r(ut) du + b(t) exactly, and the last term of b (the a-term)
//! obeys |a(t)| <= (7/6 - pi^2/9) t^2 for every psi since |psi| <= 1.
//!
//! Solving the integral equation gives, for fixed points, a t-independent
//! constant c(t) = r(t)/t + 2 int_t^1 b(v)/v^2 dv - b(t)/t, the convergent
//! integral J = int_0^1 b(v)/v^2 dv, and the slope decomposition
//! r(t) = (c - 2J) t + o(t); the slope beta = c - 2J = im - sigma carries the
//! location and scale of the Cauchy component.

use crate::dist::{CauchyParams, CfGrid, ComplexGrid};
use crate::error::{Error, Result};
use crate::interp::ComplexInterpolant;
use crate::quad::{integrate, QuadConfig};
use crate::quicksort::toll;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coefficient of the universal quadratic bound on the a-term: half the
/// second moment of the toll, 7/6 - pi^2/9.
pub fn a_bound_coeff() -> f64 {
    7.0 / 6.0 - std::f64::consts::PI.powi(2) / 9.0
}

/// Universal bound (7/6 - pi^2/9) t^2 on the modulus of the a-term.
pub fn a_bound(t: f64) -> f64 {
    a_bound_coeff() * t * t
}

/// Default upper end of the slope fit window.
pub const DEFAULT_FIT_WINDOW: f64 = 0.3;

/// Windows reported by the fit sensitivity sweep.
pub const FIT_WINDOWS: [f64; 3] = [0.1, 0.3, 0.5];

/// Smallest acceptable small-v decay exponent of |b|; at or below 1 the
/// integral J diverges.
const MIN_DECAY_EXPONENT: f64 = 1.05;

/// Pointwise psi(t) - 1 on the grid; exactly 0 at t = 0.
pub fn r_grid(psi: &CfGrid) -> Result<ComplexGrid> {
    let values = psi.values().iter().map(|v| v - 1.0).collect();
    ComplexGrid::new(psi.ts().to_vec(), values)
}

fn half_interval(cfg: &QuadConfig, f: impl Fn(f64) -> Complex64) -> Result<Complex64> {
    // The integrands below are symmetric under u <-> 1 - u.
    Ok(2.0 * integrate(f, 0.0, 0.5, cfg)?.value)
}

/// The a-term int P_u(t) [e^{itg(u)} - 1 - itg(u)] du per grid point.
pub fn a_grid(psi: &CfGrid, cfg: &QuadConfig) -> Result<ComplexGrid> {
    let interp = psi.interpolant()?;
    let values = psi
        .ts()
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            half_interval(cfg, |u| {
                let p = interp.eval(u * t) * interp.eval((1.0 - u) * t);
                let gu = toll(u);
                p * (Complex64::new(0.0, t * gu).exp() - 1.0 - Complex64::new(0.0, t * gu))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexGrid::new(psi.ts().to_vec(), values)
}

/// The remainder b per grid point; exactly 0 at t = 0.
pub fn b_grid(psi: &CfGrid, cfg: &QuadConfig) -> Result<ComplexGrid> {
    let interp = psi.interpolant()?;
    let values = psi
        .ts()
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            half_interval(cfg, |u| {
                let pu = interp.eval(u * t);
                let pv = interp.eval((1.0 - u) * t);
                let p = pu * pv;
                let gu = toll(u);
                let itg = Complex64::new(0.0, t * gu);
                (pu - 1.0) * (pv - 1.0)
                    + Complex64::new(0.0, t) * (p - 1.0) * gu
                    + p * (itg.exp() - 1.0 - itg)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexGrid::new(psi.ts().to_vec(), values)
}

/// |r(t) - 2 int r(ut) du - b(t)| per grid point: the pointwise distance
/// between psi and its image under the transformation.
pub fn integral_equation_residual_grid(psi: &CfGrid, cfg: &QuadConfig) -> Result<Vec<f64>> {
    let interp = psi.interpolant()?;
    let b = b_grid(psi, cfg)?;
    psi.ts()
        .iter()
        .zip(psi.values())
        .zip(b.values())
        .map(|((&t, &v), &bv)| {
            if t == 0.0 {
                return Ok(0.0);
            }
            let mean_r = integrate(|u| interp.eval(u * t) - 1.0, 0.0, 1.0, cfg)?.value;
            Ok((v - 1.0 - 2.0 * mean_r - bv).norm())
        })
        .collect()
}

/// Largest integral-equation residual over the grid.
pub fn integral_equation_residual(psi: &CfGrid, cfg: &QuadConfig) -> Result<f64> {
    Ok(integral_equation_residual_grid(psi, cfg)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// int_from^to b(v)/v^2 dv through the substitution v = w^3, which keeps the
/// integrand bounded whenever |b(v)| decays faster than v, the regime the
/// fixed-point theory guarantees.
fn integrate_b_over_v2(
    b: &ComplexInterpolant,
    from: f64,
    to: f64,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    integrate(
        |w| {
            let w2 = w * w;
            3.0 * b.eval(w * w2) / (w2 * w2)
        },
        from.cbrt(),
        to.cbrt(),
        cfg,
    )
    .map(|r| r.value)
}

fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    let pos = q * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    xs[lo] * (1.0 - w) + xs[hi] * w
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs
}

/// Constancy diagnostic for the solution constant: c(t) per grid point, a
/// robust center, and the interquartile dispersion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub c: Complex64,
    /// Larger of the interquartile ranges of the real and imaginary parts of
    /// c(t); near zero exactly when c(t) is constant over the grid.
    pub dispersion: f64,
    pub ts: Vec<f64>,
    pub values: Vec<Complex64>,
}

fn constancy_from_b(psi: &CfGrid, b: &ComplexGrid, cfg: &QuadConfig) -> Result<ConstancyReport> {
    let interp = b.interpolant()?;
    let ts: Vec<f64> = psi.ts()[1..].to_vec();
    let mut values = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let r = psi.values()[k + 1] - 1.0;
        let bv = b.values()[k + 1];
        let tail = integrate_b_over_v2(&interp, t, 1.0, cfg)?;
        values.push(r / t + 2.0 * tail - bv / t);
    }
    if values.len() < 4 {
        return Err(Error::InvalidArgument(
            "grid too coarse for a constancy estimate".into(),
        ));
    }
    let res = sorted(values.iter().map(|v| v.re).collect());
    let ims = sorted(values.iter().map(|v| v.im).collect());
    let c = Complex64::new(quantile_sorted(&res, 0.5), quantile_sorted(&ims, 0.5));
    let dispersion = (quantile_sorted(&res, 0.75) - quantile_sorted(&res, 0.25))
        .max(quantile_sorted(&ims, 0.75) - quantile_sorted(&ims, 0.25));
    Ok(ConstancyReport {
        c,
        dispersion,
        ts,
        values,
    })
}

/// Estimate the solution constant c(t) = r(t)/t + 2 int_t^1 b(v)/v^2 dv -
/// b(t)/t over the grid. For a fixed point c(t) is one constant; the
/// dispersion is the diagnostic.
pub fn solution_constant_c(psi: &CfGrid, cfg: &QuadConfig) -> Result<ConstancyReport> {
    constancy_from_b(psi, &b_grid(psi, cfg)?, cfg)
}

/// The integral J = int_0^1 b(v)/v^2 dv with its small-v bookkeeping.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JEstimate {
    pub value: Complex64,
    /// Contribution of [0, t_min], extrapolated from the fitted decay.
    pub tail_correction: Complex64,
    /// Fitted exponent p of |b(v)| ~ v^p over the smallest grid decade.
    pub small_v_exponent: f64,
    /// First-order propagation of the grid's own noise level through the
    /// integral, assuming unit-scale slopes; a coarse budget, not a bound.
    pub noise_estimate: f64,
}

fn j_from_b(b: &ComplexGrid, cf_tol: f64, cfg: &QuadConfig) -> Result<JEstimate> {
    let ts = b.ts();
    if ts.len() < 8 || ts[1] <= 0.0 {
        return Err(Error::InvalidArgument(
            "grid too coarse to estimate J".into(),
        ));
    }
    let t_min = ts[1];
    if b.t_max() < 1.0 {
        return Err(Error::InvalidArgument(
            "grid must reach t = 1 to estimate J".into(),
        ));
    }
    // Log-log fit of |b| over the first decade of positive grid points.
    let mut pts = Vec::new();
    for (&t, v) in ts[1..].iter().zip(&b.values()[1..]) {
        if t <= 10.0 * t_min && v.norm() > 0.0 {
            pts.push((t.ln(), v.norm().ln()));
        }
    }
    let small_v_exponent = if pts.len() < 4 {
        // Degenerate (nearly vanishing b): no measurable decay, and no
        // meaningful tail either.
        2.0
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        sxy / sxx
    };
    if small_v_exponent <= MIN_DECAY_EXPONENT {
        return Err(Error::Divergent {
            exponent: small_v_exponent,
        });
    }
    let interp = b.interpolant()?;
    let main = integrate_b_over_v2(&interp, t_min, 1.0, cfg)?;
    // Below t_min, model b(v) = b(t_min) (v/t_min)^p and integrate v^{p-2}.
    let tail_correction = b.values()[1] / (t_min * (small_v_exponent - 1.0));
    Ok(JEstimate {
        value: main + tail_correction,
        tail_correction,
        small_v_exponent,
        noise_estimate: 3.0 * cf_tol,
    })
}

/// Estimate J = int_0^1 b(v)/v^2 dv, with a divergence error when |b| fails
/// to decay quickly enough near zero for the integral to exist.
pub fn estimate_j(psi: &CfGrid, cfg: &QuadConfig) -> Result<JEstimate> {
    j_from_b(&b_grid(psi, cfg)?, psi.tol(), cfg)
}

/// Least-squares quadratic fit of r(t) on one window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaFit {
    pub window: f64,
    pub beta: Complex64,
    pub curvature: Complex64,
    /// Root-mean-square misfit of r over the window.
    pub residual: f64,
    pub points: usize,
}

/// Fit r(t) = beta t + gamma t^2 by least squares on grid points with
/// 0 < t <= window. Uniform weights on r mean the small-t cells, where r is
/// tiny, contribute little; this trades small-t noise against the O(t^2)
/// curvature bias of wide windows.
pub fn fit_beta(psi: &CfGrid, window: f64) -> Result<BetaFit> {
    if !window.is_finite() || window <= 0.0 || window > psi.t_max() {
        return Err(Error::InvalidArgument(format!(
            "fit window {window} outside the grid range"
        )));
    }
    let mut s11 = 0.0;
    let mut s12 = 0.0;
    let mut s22 = 0.0;
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    let mut pts = Vec::new();
    for (&t, &v) in psi.ts().iter().zip(psi.values()) {
        if t > 0.0 && t <= window {
            // Scaling by the window keeps the normal equations conditioned.
            let x = t / window;
            let r = v - 1.0;
            s11 += x * x;
            s12 += x * x * x;
            s22 += x * x * x * x;
            b1 += x * r;
            b2 += x * x * r;
            pts.push((x, r));
        }
    }
    if pts.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "only {} grid points inside the fit window {window}",
            pts.len()
        )));
    }
    let det = s11 * s22 - s12 * s12;
    let beta_scaled = (s22 * b1 - s12 * b2) / det;
    let curv_scaled = (s11 * b2 - s12 * b1) / det;
    let residual = (pts
        .iter()
        .map(|&(x, r)| (r - beta_scaled * x - curv_scaled * x * x).norm_sqr())
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(BetaFit {
        window,
        beta: beta_scaled / window,
        curvature: curv_scaled / (window * window),
        residual,
        points: pts.len(),
    })
}

/// Slope of psi at the origin with every cross-check the theory offers: the
/// direct fit, the solution constant c with its dispersion, J, and the
/// window sensitivity sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub beta_re: f64,
    pub beta_im: f64,
    pub j: Complex64,
    pub c: Complex64,
    pub c_dispersion: f64,
    pub fit_residual: f64,
    pub fit_window: f64,
    pub window_sensitivity: Vec<BetaFit>,
    pub j_small_v_exponent: f64,
    pub j_noise_estimate: f64,
}

impl SlopeEstimate {
    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.beta_re, self.beta_im)
    }

    /// |beta - (c - 2J)|: the two independent slope routes must agree for
    /// fixed-point inputs.
    pub fn consistency_gap(&self) -> f64 {
        (self.beta() - (self.c - 2.0 * self.j)).norm()
    }

    /// Location and scale read off the slope, beta = i m - sigma. The scale
    /// estimate may land epsilon-negative for scale-zero inputs; it is
    /// clamped at 0.
    pub fn recovered_params(&self) -> Result<CauchyParams> {
        CauchyParams::new(self.beta_im, (-self.beta_re).max(0.0))
    }
}

/// Full slope analysis of a characteristic-function grid.
pub fn estimate_beta(psi: &CfGrid, cfg: &QuadConfig) -> Result<SlopeEstimate> {
    let mut window_sensitivity = Vec::with_capacity(FIT_WINDOWS.len());
    for w in FIT_WINDOWS {
        window_sensitivity.push(fit_beta(psi, w)?);
    }
    let main = window_sensitivity
        .iter()
        .find(|f| f.window == DEFAULT_FIT_WINDOW)
        .expect("default window is in the sweep")
        .clone();
    let b = b_grid(psi, cfg)?;
    let constancy = constancy_from_b(psi, &b, cfg)?;
    let j = j_from_b(&b, psi.tol(), cfg)?;
    Ok(SlopeEstimate {
        beta_re: main.beta.re,
        beta_im: main.beta.im,
        j: j.value,
        c: constancy.c,
        c_dispersion: constancy.dispersion,
        fit_residual: main.residual,
        fit_window: main.window,
        window_sensitivity,
        j_small_v_exponent: j.small_v_exponent,
        j_noise_estimate: j.noise_estimate,
    })
}

/// Running-max envelope ratio M(t)/t^{2/3} per positive grid point, where
/// M(t) is the largest |r(s)| over grid points s <= t.
pub fn envelope_profile(psi: &CfGrid) -> Vec<(f64, f64)> {
    let mut running = 0.0f64;
    psi.ts()
        .iter()
        .zip(psi.values())
        .skip(1)
        .map(|(&t, &v)| {
            running = running.max((v - 1.0).norm());
            (t, running / t.powf(2.0 / 3.0))
        })
        .collect()
}

/// Largest envelope ratio over the grid; finite by construction, and the
/// smaller it stays, the more room the t^{2/3} envelope has.
pub fn envelope_check(psi: &CfGrid) -> f64 {
    envelope_profile(psi)
        .into_iter()
        .map(|(_, ratio)| ratio)
        .fold(0.0, f64::max)
}
