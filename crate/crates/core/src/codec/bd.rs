//! Bjontegaard delta metrics between two rate-distortion curves.
//!
//! Each curve is fitted with a cubic polynomial (PSNR over log10 rate for
//! BD-PSNR, log10 rate over PSNR for BD-rate) and the fits are integrated over
//! the overlapping interval.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    /// kbit/s
    pub rate: f64,
    /// dB
    pub psnr: f64,
}

impl RdPoint {
    pub fn new(rate: f64, psnr: f64) -> Self {
        Self { rate, psnr }
    }
}

/// Points sorted by increasing rate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    points: Vec<RdPoint>,
}

impl RdCurve {
    pub fn new(mut points: Vec<RdPoint>) -> Self {
        points.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        Self { points }
    }

    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl FromIterator<RdPoint> for RdCurve {
    fn from_iter<I: IntoIterator<Item = RdPoint>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdMetrics {
    /// Mean rate difference of `test` against `anchor` at equal quality, percent.
    pub rate_percent: f64,
    /// Mean PSNR difference of `test` against `anchor` at equal rate, dB.
    pub psnr_db: f64,
}

/// Cubic least-squares fit in a centered, scaled variable.
struct Cubic {
    center: f64,
    scale: f64,
    coeffs: [f64; 4],
}

impl Cubic {
    fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        let center = x.iter().sum::<f64>() / n as f64;
        let spread = x.iter().map(|v| (v - center).abs()).fold(0.0, f64::max);
        if !(spread > 0.0) {
            return Err(Error::Curve("curve has no spread along the fit axis".into()));
        }
        let vander = DMatrix::from_fn(n, 4, |i, j| ((x[i] - center) / spread).powi(j as i32));
        let rhs = DVector::from_column_slice(y);
        let solution = vander
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::Curve(e.to_string()))?;
        Ok(Self {
            center,
            scale: spread,
            coeffs: [solution[0], solution[1], solution[2], solution[3]],
        })
    }

    /// Antiderivative in the original variable.
    fn primitive(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.scale;
        let [a, b, c, d] = self.coeffs;
        self.scale * (a * t + b * t * t / 2.0 + c * t.powi(3) / 3.0 + d * t.powi(4) / 4.0)
    }

    fn integral(&self, lo: f64, hi: f64) -> f64 {
        self.primitive(hi) - self.primitive(lo)
    }
}

fn overlap(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = min(a).max(min(b));
    let hi = max(a).min(max(b));
    if !(hi > lo) {
        return Err(Error::Curve(format!("ranges do not overlap ({lo} >= {hi})")));
    }
    Ok((lo, hi))
}

fn validate(curve: &RdCurve, name: &str) -> Result<()> {
    if curve.len() < 4 {
        return Err(Error::Curve(format!("{name} needs at least 4 points, has {}", curve.len())));
    }
    for p in curve.points() {
        if !(p.rate > 0.0 && p.rate.is_finite() && p.psnr.is_finite()) {
            return Err(Error::Curve(format!("{name} has an invalid point {p:?}")));
        }
    }
    Ok(())
}

pub fn bd_metrics(anchor: &RdCurve, test: &RdCurve) -> Result<BdMetrics> {
    validate(anchor, "anchor")?;
    validate(test, "test")?;
    let log_rate = |c: &RdCurve| c.points().iter().map(|p| p.rate.log10()).collect::<Vec<_>>();
    let psnr = |c: &RdCurve| c.points().iter().map(|p| p.psnr).collect::<Vec<_>>();
    let (ra, rb) = (log_rate(anchor), log_rate(test));
    let (pa, pb) = (psnr(anchor), psnr(test));

    let (lo, hi) = overlap(&ra, &rb)?;
    let fa = Cubic::fit(&ra, &pa)?;
    let fb = Cubic::fit(&rb, &pb)?;
    let psnr_db = (fb.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);

    let (lo, hi) = overlap(&pa, &pb)?;
    let ga = Cubic::fit(&pa, &ra)?;
    let gb = Cubic::fit(&pb, &rb)?;
    let mean_log_diff = (gb.integral(lo, hi) - ga.integral(lo, hi)) / (hi - lo);
    let rate_percent = (10f64.powf(mean_log_diff) - 1.0) * 100.0;

    Ok(BdMetrics {
        rate_percent,
        psnr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_curve() -> RdCurve {
        [(120.0, 30.1), (260.0, 32.9), (540.0, 35.4), (1100.0, 37.8), (2300.0, 40.3)]
            .into_iter()
            .map(|(r, p)| RdPoint::new(r, p))
            .collect()
    }

    #[test]
    fn identical_curves() {
        let c = sample_curve();
        let m = bd_metrics(&c, &c).unwrap();
        assert!(m.rate_percent.abs() < 1e-9);
        assert!(m.psnr_db.abs() < 1e-9);
    }

    #[test]
    fn vertical_shift_is_bd_psnr() {
        let a = sample_curve();
        let b: RdCurve = a.points().iter().map(|p| RdPoint::new(p.rate, p.psnr + 1.0)).collect();
        let m = bd_metrics(&a, &b).unwrap();
        assert!((m.psnr_db - 1.0).abs() < 0.01);
    }

    #[test]
    fn rate_scaling_is_bd_rate() {
        let a = sample_curve();
        let b: RdCurve = a.points().iter().map(|p| RdPoint::new(p.rate * 0.9, p.psnr)).collect();
        let m = bd_metrics(&a, &b).unwrap();
        assert!((m.rate_percent + 10.0).abs() < 0.2, "{}", m.rate_percent);
    }

    #[test]
    fn rejects_short_and_disjoint_curves() {
        let a = sample_curve();
        let short = RdCurve::new(a.points()[..3].to_vec());
        assert!(bd_metrics(&a, &short).is_err());
        let far: RdCurve = a.points().iter().map(|p| RdPoint::new(p.rate * 1e3, p.psnr + 50.0)).collect();
        assert!(bd_metrics(&a, &far).is_err());
    }
}
