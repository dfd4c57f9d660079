//! Raw planar 4:2:0 video and synthetic test sequences.
//!
//! A raw file is a plain concatenation of frames; each frame is the full luma
//! plane followed by the Cb and Cr planes at half width and half height, all
//! 8-bit, row-major, with no header or padding.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Plane;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub y: Plane,
    pub cb: Plane,
    pub cr: Plane,
}

impl Frame {
    pub fn width(&self) -> usize {
        self.y.width()
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }
}

fn check_even(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || width % 2 != 0 || height % 2 != 0 {
        return Err(Error::param(
            "frame size",
            format!("4:2:0 needs positive even dimensions, got {width}x{height}"),
        ));
    }
    Ok(())
}

/// A raw 4:2:0 file whose size has been checked against its geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSource {
    pub path: PathBuf,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
}

impl SequenceSource {
    pub fn frame_bytes(width: usize, height: usize) -> u64 {
        (width * height + 2 * (width / 2) * (height / 2)) as u64
    }

    pub fn expected_bytes(width: usize, height: usize, frames: usize) -> u64 {
        Self::frame_bytes(width, height) * frames as u64
    }

    /// Opens a file and infers its frame count; the size must be an exact
    /// multiple of the frame size.
    pub fn open(path: impl AsRef<Path>, width: usize, height: usize) -> Result<Self> {
        check_even(width, height)?;
        let path = path.as_ref().to_path_buf();
        let actual = std::fs::metadata(&path)?.len();
        let per_frame = Self::frame_bytes(width, height);
        let frame_count = actual.div_ceil(per_frame) as usize;
        let expected = per_frame * frame_count as u64;
        if expected != actual {
            return Err(Error::SizeMismatch {
                path,
                expected,
                actual,
            });
        }
        Ok(Self {
            path,
            width,
            height,
            frame_count,
        })
    }

    /// Opens a file that must hold exactly `frames` frames.
    pub fn with_frame_count(path: impl AsRef<Path>, width: usize, height: usize, frames: usize) -> Result<Self> {
        check_even(width, height)?;
        let path = path.as_ref().to_path_buf();
        let actual = std::fs::metadata(&path)?.len();
        let expected = Self::expected_bytes(width, height, frames);
        if expected != actual {
            return Err(Error::SizeMismatch {
                path,
                expected,
                actual,
            });
        }
        Ok(Self {
            path,
            width,
            height,
            frame_count: frames,
        })
    }
}

/// Reads frames `range` in display order.
pub fn read_frames(source: &SequenceSource, range: Range<usize>) -> Result<Vec<Frame>> {
    if range.start > range.end || range.end > source.frame_count {
        return Err(Error::param(
            "frame range",
            format!("{range:?} outside 0..{}", source.frame_count),
        ));
    }
    let (w, h) = (source.width, source.height);
    let per_frame = SequenceSource::frame_bytes(w, h);
    let mut reader = BufReader::new(File::open(&source.path)?);
    reader.seek(SeekFrom::Start(per_frame * range.start as u64))?;
    let mut frames = Vec::with_capacity(range.len());
    for _ in range {
        let mut read_plane = |pw: usize, ph: usize| -> Result<Plane> {
            let mut buf = vec![0u8; pw * ph];
            reader.read_exact(&mut buf)?;
            Plane::from_vec(pw, ph, buf)
        };
        let y = read_plane(w, h)?;
        let cb = read_plane(w / 2, h / 2)?;
        let cr = read_plane(w / 2, h / 2)?;
        frames.push(Frame { y, cb, cr });
    }
    Ok(frames)
}

pub fn write_frames(path: impl AsRef<Path>, frames: &[Frame]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for f in frames {
        check_even(f.width(), f.height())?;
        out.write_all(f.y.data())?;
        out.write_all(f.cb.data())?;
        out.write_all(f.cr.data())?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    /// A fixed texture moving by a constant vector per frame.
    Translate,
    /// A fixed texture scaled about the frame center by a constant factor per frame.
    ZoomTexture,
    /// Independent uniform noise in every frame.
    Noise,
}

impl std::str::FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translate" => Ok(SynthKind::Translate),
            "zoom-texture" => Ok(SynthKind::ZoomTexture),
            "noise" => Ok(SynthKind::Noise),
            _ => Err(Error::param("kind", format!("unknown synthetic sequence `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthParams {
    pub kind: SynthKind,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Samples per frame, `(x, y)`; may be fractional.
    pub velocity: (f64, f64),
    /// Relative scale change per frame for `zoom-texture`.
    pub zoom: f64,
    /// Standard deviation of additive white Gaussian noise drawn
    /// independently for every frame and plane (acquisition noise).
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            kind: SynthKind::Translate,
            width: 352,
            height: 288,
            frames: 30,
            velocity: (1.3, -0.6),
            zoom: 0.01,
            noise: 0.0,
            seed: 1,
        }
    }
}

/// Random texture with a roughly 1/f amplitude spectrum: oriented sinusoids
/// up to 0.35 cycles per sample plus a few Gaussian blobs, evaluated at
/// continuous coordinates.
#[derive(Debug, Clone)]
struct Texture {
    waves: Vec<(f64, f64, f64, f64)>,
    blobs: Vec<(f64, f64, f64, f64)>,
}

impl Texture {
    fn random(rng: &mut ChaCha8Rng, extent: f64) -> Self {
        let waves = (0..40)
            .map(|_| {
                let radius: f64 = rng.random_range(0.01..0.35);
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let amp = rng.random_range(0.5..1.5) * 0.6 / radius.sqrt();
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                (
                    std::f64::consts::TAU * radius * angle.cos(),
                    std::f64::consts::TAU * radius * angle.sin(),
                    amp,
                    phase,
                )
            })
            .collect();
        let blobs = (0..24)
            .map(|_| {
                (
                    rng.random_range(-0.2 * extent..1.2 * extent),
                    rng.random_range(-0.2 * extent..1.2 * extent),
                    rng.random_range(6.0..30.0),
                    rng.random_range(-40.0..40.0),
                )
            })
            .collect();
        Self { waves, blobs }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let mut v = 128.0;
        for &(kx, ky, amp, phase) in &self.waves {
            v += amp * (kx * x + ky * y + phase).cos();
        }
        for &(cx, cy, radius, amp) in &self.blobs {
            let d2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (radius * radius);
            if d2 < 30.0 {
                v += amp * (-d2).exp();
            }
        }
        v
    }
}

fn to_sample(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn render(
    texture: &Texture,
    width: usize,
    height: usize,
    step: f64,
    map: impl Fn(f64, f64) -> (f64, f64),
    mut noise: impl FnMut() -> f64,
) -> Plane {
    let mut plane = Plane::new(width, height);
    let offset = (step - 1.0) / 2.0;
    for y in 0..height {
        for x in 0..width {
            let (u, v) = map(x as f64 * step + offset, y as f64 * step + offset);
            plane.set(x, y, to_sample(texture.eval(u, v) + noise()));
        }
    }
    plane
}

/// Deterministic synthetic sequence.
pub fn synth_sequence(params: &SynthParams) -> Result<Vec<Frame>> {
    let (w, h) = (params.width, params.height);
    check_even(w, h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (cw, ch) = (w / 2, h / 2);

    if params.kind == SynthKind::Noise {
        let mut noise = |pw: usize, ph: usize| {
            let data = (0..pw * ph).map(|_| rng.random::<u8>()).collect();
            Plane::from_vec(pw, ph, data).expect("sizes match")
        };
        return Ok((0..params.frames)
            .map(|_| Frame {
                y: noise(w, h),
                cb: noise(cw, ch),
                cr: noise(cw, ch),
            })
            .collect());
    }

    let extent = w.max(h) as f64;
    let textures = [
        Texture::random(&mut rng, extent),
        Texture::random(&mut rng, extent),
        Texture::random(&mut rng, extent),
    ];
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let gaussian = Normal::new(0.0, params.noise)
        .map_err(|_| Error::param("noise", format!("must be finite and >= 0, got {}", params.noise)))?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut noise = || {
        if params.noise > 0.0 {
            gaussian.sample(&mut noise_rng)
        } else {
            0.0
        }
    };
    let frames = (0..params.frames)
        .map(|t| {
            let t = t as f64;
            let (vx, vy) = params.velocity;
            let scale = (1.0 + params.zoom).powf(t);
            let map = |x: f64, y: f64| match params.kind {
                SynthKind::ZoomTexture => (cx + (x - cx) / scale, cy + (y - cy) / scale),
                _ => (x - vx * t, y - vy * t),
            };
            Frame {
                y: render(&textures[0], w, h, 1.0, map, &mut noise),
                cb: render(&textures[1], cw, ch, 2.0, map, &mut noise),
                cr: render(&textures[2], cw, ch, 2.0, map, &mut noise),
            }
        })
        .collect();
    Ok(frames)
}
