//! Writes a synthetic clip as raw planar 4:2:0 and reads it back.

use srmc::sequence::{read_frames, synth_sequence, write_frames, SequenceSource, SynthKind, SynthParams};

fn main() -> srmc::Result<()> {
    let params = SynthParams {
        kind: SynthKind::ZoomTexture,
        width: 64,
        height: 48,
        frames: 5,
        ..SynthParams::default()
    };
    let frames = synth_sequence(&params)?;
    let path = std::env::temp_dir().join("srmc_example.yuv");
    write_frames(&path, &frames)?;

    let source = SequenceSource::open(&path, 64, 48)?;
    let back = read_frames(&source, 0..source.frame_count)?;
    println!(
        "{}: {} bytes, {} frames, round trip {}",
        path.display(),
        std::fs::metadata(&path)?.len(),
        source.frame_count,
        if back == frames { "exact" } else { "MISMATCH" }
    );
    std::fs::remove_file(&path)?;
    Ok(())
}
