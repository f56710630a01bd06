//! Positive profiles tabulated on a monotone grid, interpolated by a
//! shape-preserving (PCHIP) cubic in log-log coordinates.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("table needs at least two nodes")]
    TooShort,
    #[error("abscissae must be positive and strictly increasing (node {0})")]
    NotIncreasing(usize),
    #[error("values must be positive and finite (node {0})")]
    NotPositive(usize),
}

#[derive(Debug, Clone)]
pub struct LogTable {
    lx: Vec<f64>,
    ly: Vec<f64>,
    slope: Vec<f64>,
}

impl LogTable {
    pub fn new(x: &[f64], y: &[f64]) -> Result<LogTable, TableError> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(TableError::TooShort);
        }
        let mut lx = Vec::with_capacity(x.len());
        let mut ly = Vec::with_capacity(y.len());
        for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
            if !(xi > 0.0 && xi.is_finite()) || (i > 0 && xi <= x[i - 1]) {
                return Err(TableError::NotIncreasing(i));
            }
            if !(yi > 0.0 && yi.is_finite()) {
                return Err(TableError::NotPositive(i));
            }
            lx.push(xi.ln());
            ly.push(yi.ln());
        }
        let slope = pchip_slopes(&lx, &ly);
        Ok(LogTable { lx, ly, slope })
    }

    /// Samples `f` at `per_decade` log-spaced nodes per decade over `[lo, hi]`.
    pub fn from_fn<F: Fn(f64) -> f64>(
        f: F,
        lo: f64,
        hi: f64,
        per_decade: usize,
    ) -> Result<LogTable, TableError> {
        let x = log_nodes(lo, hi, per_decade);
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        LogTable::new(&x, &y)
    }

    pub fn len(&self) -> usize {
        self.lx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lx.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lx[0].exp(), self.lx[self.lx.len() - 1].exp())
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lx
            .iter()
            .zip(&self.ly)
            .map(|(a, b)| (a.exp(), b.exp()))
    }

    /// Interpolated value; power-law extrapolation outside the node range.
    pub fn eval(&self, x: f64) -> f64 {
        let u = x.ln();
        let n = self.lx.len();
        if u <= self.lx[0] {
            return (self.ly[0] + self.slope[0] * (u - self.lx[0])).exp();
        }
        if u >= self.lx[n - 1] {
            return (self.ly[n - 1] + self.slope[n - 1] * (u - self.lx[n - 1])).exp();
        }
        let i = self.lx.partition_point(|&v| v <= u) - 1;
        let h = self.lx[i + 1] - self.lx[i];
        let s = (u - self.lx[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * self.ly[i]
            + h10 * h * self.slope[i]
            + h01 * self.ly[i + 1]
            + h11 * h * self.slope[i + 1];
        v.exp()
    }

    /// Solves `eval(x) = y` for a table with strictly increasing values.
    pub fn invert(&self, y: f64) -> f64 {
        let v = y.ln();
        let n = self.lx.len();
        if v <= self.ly[0] {
            return (self.lx[0] + (v - self.ly[0]) / self.slope[0]).exp();
        }
        if v >= self.ly[n - 1] {
            return (self.lx[n - 1] + (v - self.ly[n - 1]) / self.slope[n - 1]).exp();
        }
        let i = self
            .ly
            .partition_point(|&w| w <= v)
            .saturating_sub(1)
            .min(n - 2);
        let h = self.lx[i + 1] - self.lx[i];
        let (y0, y1) = (self.ly[i], self.ly[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let cubic = |s: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * m0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * m1
        };
        let dcubic = |s: f64| {
            let s2 = s * s;
            (6.0 * s2 - 6.0 * s) * (y0 - y1)
                + (3.0 * s2 - 4.0 * s + 1.0) * m0
                + (3.0 * s2 - 2.0 * s) * m1
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut s = (v - y0) / (y1 - y0);
        for _ in 0..60 {
            let r = cubic(s) - v;
            if r == 0.0 {
                break;
            }
            if r < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let d = dcubic(s);
            let mut next = if d > 0.0 { s - r / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-15 {
                s = next;
                break;
            }
            s = next;
        }
        (self.lx[i] + s * h).exp()
    }

    /// Local log-log slope `d ln y / d ln x`.
    pub fn log_slope(&self, x: f64) -> f64 {
        let u = x.ln();
        let n = self.lx.len();
        if u <= self.lx[0] {
            return self.slope[0];
        }
        if u >= self.lx[n - 1] {
            return self.slope[n - 1];
        }
        let i = self.lx.partition_point(|&v| v <= u) - 1;
        let h = self.lx[i + 1] - self.lx[i];
        let s = (u - self.lx[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        d00 * self.ly[i] + d10 * self.slope[i] + d01 * self.ly[i + 1] + d11 * self.slope[i + 1]
    }
}

pub fn log_nodes(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..=n)
        .map(|k| {
            if k == n {
                hi
            } else {
                (llo + (lhi - llo) * k as f64 / n as f64).exp()
            }
        })
        .collect()
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a * b <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_laws_are_reproduced_exactly() {
        let t = LogTable::from_fn(|x| 3.0 * x.powf(1.5), 1e-3, 1e3, 64).unwrap();
        for &x in &[1e-5f64, 2e-3, 0.77, 5.0, 999.0, 1e5] {
            let want = 3.0 * x.powf(1.5);
            assert!((t.eval(x) / want - 1.0).abs() < 1e-12, "x={x}");
            assert!((t.log_slope(x) - 1.5).abs() < 1e-10);
        }
    }

    #[test]
    fn smooth_profiles_are_accurate_at_fine_spacing() {
        let f = |x: f64| (2.0 * x * (1.0 + x)).sqrt();
        let t = LogTable::from_fn(f, 1e-6, 1e6, 2048).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..997 {
            let x: f64 = 1e-6 * 10f64.powf(12.0 * (k as f64 + 0.37) / 997.0);
            worst = worst.max((t.eval(x) / f(x) - 1.0).abs());
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn inversion_recovers_abscissae() {
        let f = |x: f64| x.sqrt() * (1.0 + x);
        let t = LogTable::from_fn(f, 1e-6, 1e6, 256).unwrap();
        for &x in &[1e-8, 3.3e-6, 0.01, 1.0, 47.0, 9.9e5, 1e7] {
            let y = t.eval(x);
            assert!((t.invert(y) / x - 1.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(LogTable::new(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(LogTable::new(&[1.0, 2.0], &[1.0, -2.0]).is_err());
        assert!(LogTable::new(&[1.0], &[1.0]).is_err());
    }
}
