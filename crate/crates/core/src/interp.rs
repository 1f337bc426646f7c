//! Monotone cubic (Fritsch-Carlson) interpolation.
//!
//! Characteristic functions are only known on a geometric grid; transform
//! quadratures need them at arbitrary arguments below the grid maximum. The
//! monotone cubic keeps interpolants free of the overshoot a plain spline
//! would add near the steep small-t region of the grid.

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidArgument(
                "interpolation nodes and values differ in length".into(),
            ));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidArgument(
                "interpolation needs at least two nodes".into(),
            ));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "interpolation nodes must be strictly increasing".into(),
            ));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                ds[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        ds[0] = endpoint_slope(
            h[0],
            h.get(1).copied().unwrap_or(h[0]),
            delta[0],
            *delta.get(1).unwrap_or(&delta[0]),
        );
        ds[n - 1] = endpoint_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        Ok(Pchip { xs, ys, ds })
    }

    /// Evaluates at `x`, which must lie inside the node range up to a tiny
    /// rounding allowance.
    pub fn eval(&self, x: f64) -> f64 {
        let first = self.xs[0];
        let last = *self.xs.last().unwrap();
        let slack = 1e-9 * (1.0 + last.abs() + first.abs());
        let x = if x < first {
            assert!(
                x >= first - slack,
                "interpolation argument {x} below range start {first}"
            );
            first
        } else if x > last {
            assert!(
                x <= last + slack,
                "interpolation argument {x} above range end {last}"
            );
            last
        } else {
            x
        };
        // Index of the panel whose right node is the first one >= x.
        let k = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.ds[k] + h01 * self.ys[k + 1] + h11 * h * self.ds[k + 1]
    }
}

/// Shape-preserving three-point endpoint slope with the usual sign clamps.
fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        s = 0.0;
    } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
        s = 3.0 * d0;
    }
    s
}

/// Paired interpolants for the real and imaginary parts of a complex grid.
#[derive(Clone, Debug)]
pub struct ComplexInterpolant {
    re: Pchip,
    im: Pchip,
}

impl ComplexInterpolant {
    pub fn new(ts: &[f64], values: &[Complex64]) -> Result<Self> {
        let re = Pchip::new(ts.to_vec(), values.iter().map(|v| v.re).collect())?;
        let im = Pchip::new(ts.to_vec(), values.iter().map(|v| v.im).collect())?;
        Ok(ComplexInterpolant { re, im })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        Complex64::new(self.re.eval(t), self.im.eval(t))
    }
}
