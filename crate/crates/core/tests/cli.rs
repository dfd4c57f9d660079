use std::path::Path;
use std::process::{Command, Output};

fn srmc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srmc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn synth_writes_exact_byte_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = srmc(&["synth", "-o", "clip.yuv", "--width", "32", "--height", "16", "--frames", "5"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::metadata(dir.path().join("clip.yuv")).unwrap().len(), 5 * 32 * 16 * 3 / 2);
}

#[test]
fn predict_encode_and_bd_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = srmc(&["synth", "-o", "clip.yuv", "--width", "48", "--height", "32", "--frames", "4"], d);
    assert!(out.status.success());

    let out = srmc(
        &["predict", "-i", "clip.yuv", "--width", "48", "--height", "32", "-a", "none,msa", "-o", "pred.csv"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pred = std::fs::read_to_string(d.join("pred.csv")).unwrap();
    assert!(pred.starts_with("sequence,algorithm,frames,mean_psnr_db,refined_pct,refine_ms_per_frame\n"));
    assert_eq!(pred.lines().count(), 3);

    let out = srmc(
        &[
            "encode", "-i", "clip.yuv", "--width", "48", "--height", "32", "-a", "none,rba", "-o", "rd.csv", "--timing",
            "timing.csv",
        ],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rd = std::fs::read_to_string(d.join("rd.csv")).unwrap();
    assert!(rd.starts_with("sequence,algorithm,qp,qstep,rate_kbps,psnr_db,refined_pct\n"));
    assert_eq!(rd.lines().count(), 21);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rba"));
    let timing = std::fs::read_to_string(d.join("timing.csv")).unwrap();
    assert!(timing.starts_with("sequence,algorithm,qp,iterations,refine_ms_per_frame\n"));

    let out = srmc(&["bd", "rd.csv", "--anchor-algorithm", "none", "--test-algorithm", "none"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(values.iter().all(|v| v.abs() < 1e-9), "{text}");
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.toml"),
        r#"
algorithms = ["none", "msa"]
qps = [20, 26, 32, 38]

[sequence]
source = "synth"
name = "tiny"
width = 32
height = 32
frames = 3

[msa]
iterations = 4
tau = 0.75
n_bf = 10
gamma = 0.5
"#,
    )
    .unwrap();
    let out = srmc(&["encode", "-c", "run.toml", "--qps", "22,28,34,40", "-o", "rd.csv"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rd = std::fs::read_to_string(d.join("rd.csv")).unwrap();
    assert_eq!(rd.lines().count(), 9);
    assert!(rd.lines().nth(1).unwrap().starts_with("tiny,none,22,"));
}

#[test]
fn invalid_configuration_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), "qps = [30, 20]\n").unwrap();
    let out = srmc(&["encode", "-c", "bad.toml"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("qps"));

    std::fs::write(d.join("typo.toml"), "algorithm = [\"msa\"]\n").unwrap();
    let out = srmc(&["predict", "-c", "typo.toml"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    std::fs::write(d.join("short.yuv"), vec![0u8; 1000]).unwrap();
    let out = srmc(&["predict", "-i", "short.yuv", "--width", "32", "--height", "16"], d);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1536") && err.contains("1000"), "{err}");
}
