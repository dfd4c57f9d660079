//! Full rate-distortion experiment from a TOML configuration, written as CSV
//! to stdout.

use srmc::experiment::{run_experiment, write_rows, RunConfig};

const CONFIG: &str = r#"
algorithms = ["none", "msa"]
qps = [22, 26, 30, 34, 38]

[sequence]
source = "synth"
name = "pan"
width = 96
height = 64
frames = 6
"#;

fn main() -> srmc::Result<()> {
    let config = RunConfig::from_toml(CONFIG)?;
    let report = run_experiment(&config)?;
    write_rows(std::io::stdout(), &report.rows)?;
    for s in &report.summary {
        eprintln!(
            "{}: bd-rate {:+.2}%  bd-psnr {:+.3} dB",
            s.algorithm, s.metrics.rate_percent, s.metrics.psnr_db
        );
    }
    Ok(())
}
