//! The distributional transformation, in three representations.
//!
//! On samples: a draw from the transformed law is U Z + (1-U) Z* + g(U)
//! (or without the toll for the homogeneous variant), with Z, Z* bootstrap
//! draws from the input sample. On coupled pairs: both coordinates share the
//! same U, indices, and toll, which preserves the diagonal and maps the
//! difference process by the homogeneous variant. On characteristic
//! functions: (T psi)(t) = int_0^1 psi(ut) psi((1-u)t) e^{i t g(u)} du,
//! evaluated by adaptive quadrature over an interpolated grid.

use crate::dist::{CfGrid, EmpiricalDist, Provenance};
use crate::error::{Error, Result};
use crate::exec;
use crate::quad::{integrate, QuadConfig};
use crate::quicksort::toll;
use crate::stream::Stream;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Uniform draw from the open interval (0, 1).
#[inline]
pub(crate) fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v != 0.0 {
            return v;
        }
    }
}

/// Which map to iterate: the Quicksort transformation carries the toll term,
/// the homogeneous variant drops it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    Quicksort,
    Homogeneous,
}

impl TransformKind {
    pub fn label(self) -> &'static str {
        match self {
            TransformKind::Quicksort => "T",
            TransformKind::Homogeneous => "T0",
        }
    }
}

#[inline]
fn spine_draw(values: &[f64], rng: &mut ChaCha8Rng, with_toll: bool) -> f64 {
    let n = values.len();
    let u = open_unit(rng);
    let zi = values[rng.random_range(0..n)];
    let zj = values[rng.random_range(0..n)];
    // zj + u (zi - zj) equals u zi + (1-u) zj but keeps point masses exactly
    // fixed in floating point.
    let mixed = zj + u * (zi - zj);
    if with_toll {
        mixed + toll(u)
    } else {
        mixed
    }
}

/// Sample of size `out` from the Quicksort transformation of `d`.
pub fn apply_t(d: &EmpiricalDist, out: usize, stream: Stream) -> Result<EmpiricalDist> {
    apply_kind(TransformKind::Quicksort, d, out, stream)
}

/// Sample of size `out` from the homogeneous transformation of `d`.
pub fn apply_t0(d: &EmpiricalDist, out: usize, stream: Stream) -> Result<EmpiricalDist> {
    apply_kind(TransformKind::Homogeneous, d, out, stream)
}

pub fn apply_kind(
    kind: TransformKind,
    d: &EmpiricalDist,
    out: usize,
    stream: Stream,
) -> Result<EmpiricalDist> {
    if out == 0 {
        return Err(Error::EmptySample);
    }
    let with_toll = kind == TransformKind::Quicksort;
    let values = d.values();
    let drawn = exec::sample_indexed(out, stream, |rng, _| spine_draw(values, rng, with_toll));
    EmpiricalDist::new(
        drawn,
        Provenance::with_stream(
            format!("{}({})", kind.label(), d.provenance().label),
            stream,
        ),
    )
}

/// Trajectory [d, op(d), op^2(d), ...] of length `n + 1`, each stage a sample
/// of size `out`. Stage k draws from the child stream labeled k, so a
/// trajectory is reproducible stage by stage.
pub fn iterate(
    kind: TransformKind,
    d: &EmpiricalDist,
    n: usize,
    out: usize,
    stream: Stream,
) -> Result<Vec<EmpiricalDist>> {
    let mut stages = Vec::with_capacity(n + 1);
    let start = if d.len() == out {
        d.clone()
    } else {
        d.resample(out, stream.child(0))?
    };
    stages.push(start);
    for k in 1..=n {
        let next = apply_kind(kind, stages.last().unwrap(), out, stream.child(k as u64))?;
        stages.push(next);
    }
    Ok(stages)
}

/// A sample of pairs under a joint law; both coordinates evolve together
/// under the coupled transformation.
#[derive(Clone, Debug)]
pub struct CoupledSample {
    pairs: Vec<(f64, f64)>,
    provenance: Provenance,
}

impl CoupledSample {
    pub fn from_pairs(pairs: Vec<(f64, f64)>, provenance: Provenance) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        if pairs.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(Error::NonFiniteValue);
        }
        Ok(CoupledSample { pairs, provenance })
    }

    /// Product coupling: coordinates drawn independently from `a` and `b`.
    pub fn independent(
        a: &EmpiricalDist,
        b: &EmpiricalDist,
        n: usize,
        stream: Stream,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let (xs, ys) = (a.values(), b.values());
        let pairs = exec::sample_indexed(n, stream, |rng, _| {
            (
                xs[rng.random_range(0..xs.len())],
                ys[rng.random_range(0..ys.len())],
            )
        });
        CoupledSample::from_pairs(
            pairs,
            Provenance::with_stream(
                format!(
                    "independent({}, {})",
                    a.provenance().label,
                    b.provenance().label
                ),
                stream,
            ),
        )
    }

    /// Diagonal coupling: both coordinates equal a draw from `d`.
    pub fn diagonal(d: &EmpiricalDist, n: usize, stream: Stream) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let xs = d.values();
        let pairs = exec::sample_indexed(n, stream, |rng, _| {
            let v = xs[rng.random_range(0..xs.len())];
            (v, v)
        });
        CoupledSample::from_pairs(
            pairs,
            Provenance::with_stream(format!("diagonal({})", d.provenance().label), stream),
        )
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn marginal_x(&self) -> EmpiricalDist {
        EmpiricalDist::new(
            self.pairs.iter().map(|p| p.0).collect(),
            Provenance::new(format!("marginal_x({})", self.provenance.label)),
        )
        .expect("coupled sample is nonempty and finite")
    }

    pub fn marginal_y(&self) -> EmpiricalDist {
        EmpiricalDist::new(
            self.pairs.iter().map(|p| p.1).collect(),
            Provenance::new(format!("marginal_y({})", self.provenance.label)),
        )
        .expect("coupled sample is nonempty and finite")
    }

    pub fn differences(&self) -> EmpiricalDist {
        EmpiricalDist::new(
            self.pairs.iter().map(|(x, y)| x - y).collect(),
            Provenance::new(format!("differences({})", self.provenance.label)),
        )
        .expect("coupled sample is nonempty and finite")
    }

    /// Largest |x - y| over the pairs; exactly 0 for a diagonal sample.
    pub fn max_coordinate_gap(&self) -> f64 {
        self.pairs
            .iter()
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Coupled transformation: one U, one index pair, and one toll value applied
/// to both coordinates of each output pair.
pub fn apply_t2(c: &CoupledSample, out: usize, stream: Stream) -> Result<CoupledSample> {
    if out == 0 {
        return Err(Error::EmptySample);
    }
    let pairs = c.pairs();
    let n = pairs.len();
    let drawn = exec::sample_indexed(out, stream, |rng, _| {
        let u = open_unit(rng);
        let (xi, yi) = pairs[rng.random_range(0..n)];
        let (xj, yj) = pairs[rng.random_range(0..n)];
        let t = toll(u);
        (xj + u * (xi - xj) + t, yj + u * (yi - yj) + t)
    });
    CoupledSample::from_pairs(
        drawn,
        Provenance::with_stream(format!("T2({})", c.provenance().label), stream),
    )
}

/// The transformation on a characteristic-function grid: per grid point,
/// adaptive quadrature of psi(ut) psi((1-u)t) e^{i t g(u)} over u in [0,1],
/// with psi evaluated off-grid by monotone cubic interpolation. The
/// integrand is symmetric about u = 1/2, so only half the interval is
/// integrated.
pub fn apply_t_cf(psi: &CfGrid, cfg: &QuadConfig) -> Result<CfGrid> {
    let interp = psi.interpolant()?;
    let ts = psi.ts();
    let values = exec::try_map_slice(ts, |&t| -> Result<Complex64> {
        if t == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let r = integrate(
            |u| {
                let phase = Complex64::new(0.0, t * toll(u)).exp();
                interp.eval(u * t) * interp.eval((1.0 - u) * t) * phase
            },
            0.0,
            0.5,
            cfg,
        )?;
        Ok(2.0 * r.value)
    })?;
    // A product of two grids each bounded by 1 + tol can reach (1 + tol)^2,
    // and the quadrature itself contributes its tolerance twice (two halves).
    let tol_out = 2.0 * psi.tol() + psi.tol() * psi.tol() + 2.0 * cfg.abs_tol;
    CfGrid::new(ts.to_vec(), values, tol_out)
}
