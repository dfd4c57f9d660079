//! Bjontegaard deltas between two hand-written RD curves. The test curve is
//! the anchor shifted up by 0.5 dB, so BD-PSNR is 0.5 and BD-rate negative.

use srmc::codec::{bd_metrics, RdCurve, RdPoint};

fn main() -> srmc::Result<()> {
    let rates = [120.0, 210.0, 390.0, 700.0];
    let psnr = |r: f64| 20.0 + 4.0 * r.ln();
    let anchor = RdCurve::new(rates.iter().map(|&r| RdPoint::new(r, psnr(r))).collect());
    let test = RdCurve::new(rates.iter().map(|&r| RdPoint::new(r, psnr(r) + 0.5)).collect());
    let m = bd_metrics(&anchor, &test)?;
    println!("bd-rate {:+.3}%", m.rate_percent);
    println!("bd-psnr {:+.4} dB", m.psnr_db);
    Ok(())
}
