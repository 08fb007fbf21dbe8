use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::equation::Sym;
use crate::neural::Tensor;

/// Side length of every glyph image.
pub const GLYPH_SIZE: usize = 16;

/// A 16×16 grayscale image with values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphImage {
    pixels: Vec<f64>,
}

impl GlyphImage {
    pub fn new(pixels: Vec<f64>) -> Option<Self> {
        let ok = pixels.len() == GLYPH_SIZE * GLYPH_SIZE && pixels.iter().all(|p| (0.0..=1.0).contains(p));
        ok.then_some(GlyphImage { pixels })
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::new(vec![GLYPH_SIZE, GLYPH_SIZE], self.pixels.clone()).expect("fixed size")
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * GLYPH_SIZE + col]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlyphFamily {
    /// Four visually distinct shapes: ring, bar, cross, double bar.
    Easy,
    /// Shapes built from shared strokes: `=` is `+` with an extra bar,
    /// `0` a ring with a tick, `1` a bar with a foot.
    Hard,
}

impl std::str::FromStr for GlyphFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(GlyphFamily::Easy),
            "hard" => Ok(GlyphFamily::Hard),
            other => Err(format!("unknown glyph family {other:?}")),
        }
    }
}

/// Rendering parameters for one glyph family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphFamilySpec {
    pub family: GlyphFamily,
    /// Maximum absolute translation in pixels, per axis.
    pub max_shift: f64,
    /// Maximum absolute rotation in degrees.
    pub max_rotation_deg: f64,
    /// Stroke widths to draw from uniformly.
    pub stroke_widths: Vec<u8>,
    /// Standard deviation of additive pixel noise, clipped after adding.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GlyphFamilySpec {
    pub fn easy(seed: u64) -> Self {
        GlyphFamilySpec {
            family: GlyphFamily::Easy,
            max_shift: 2.0,
            max_rotation_deg: 15.0,
            stroke_widths: vec![1, 2],
            noise_sigma: 0.1,
            seed,
        }
    }

    pub fn hard(seed: u64) -> Self {
        GlyphFamilySpec {
            family: GlyphFamily::Hard,
            noise_sigma: 0.3,
            ..GlyphFamilySpec::easy(seed)
        }
    }

    pub fn for_family(family: GlyphFamily, seed: u64) -> Self {
        match family {
            GlyphFamily::Easy => GlyphFamilySpec::easy(seed),
            GlyphFamily::Hard => GlyphFamilySpec::hard(seed),
        }
    }

    /// No jitter, no noise, width-1 strokes.
    pub fn noiseless(family: GlyphFamily) -> Self {
        GlyphFamilySpec {
            family,
            max_shift: 0.0,
            max_rotation_deg: 0.0,
            stroke_widths: vec![1],
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err("noise sigma must be nonnegative".into());
        }
        if !(self.max_shift >= 0.0 && self.max_rotation_deg >= 0.0) {
            return Err("jitter bounds must be nonnegative".into());
        }
        if self.stroke_widths.is_empty() || self.stroke_widths.contains(&0) {
            return Err("stroke widths must be positive".into());
        }
        Ok(())
    }
}

/// A stroke in glyph coordinates: pixels, origin at the canvas centre,
/// y pointing down.
#[derive(Debug, Clone, Copy)]
enum Stroke {
    Line((f64, f64), (f64, f64)),
    Ring { radius: f64 },
}

impl Stroke {
    fn distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            Stroke::Line((ax, ay), (bx, by)) => {
                let (dx, dy) = (bx - ax, by - ay);
                let t = (((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
                let (px, py) = (ax + t * dx, ay + t * dy);
                ((x - px).powi(2) + (y - py).powi(2)).sqrt()
            }
            Stroke::Ring { radius } => ((x * x + y * y).sqrt() - radius).abs(),
        }
    }
}

fn prototype(sym: Sym, family: GlyphFamily) -> Vec<Stroke> {
    use Stroke::{Line, Ring};
    match family {
        GlyphFamily::Easy => match sym {
            Sym::D0 => vec![Ring { radius: 4.5 }],
            Sym::D1 => vec![Line((0.0, -5.0), (0.0, 5.0))],
            Sym::Plus => vec![Line((-5.0, 0.0), (5.0, 0.0)), Line((0.0, -5.0), (0.0, 5.0))],
            Sym::Eq => vec![Line((-5.0, -2.5), (5.0, -2.5)), Line((-5.0, 2.5), (5.0, 2.5))],
        },
        // `=` is `+` with one extra short bar.
        GlyphFamily::Hard => match sym {
            Sym::D0 => vec![Ring { radius: 4.5 }, Line((0.0, -4.5), (0.0, -1.5))],
            Sym::D1 => vec![Line((0.0, -5.0), (0.0, 5.0)), Line((-2.5, 5.0), (2.5, 5.0))],
            Sym::Plus => vec![Line((-5.0, 0.0), (5.0, 0.0)), Line((0.0, -5.0), (0.0, 5.0))],
            Sym::Eq => vec![
                Line((-5.0, 0.0), (5.0, 0.0)),
                Line((0.0, -5.0), (0.0, 5.0)),
                Line((-2.5, -3.0), (2.5, -3.0)),
            ],
        },
    }
}

/// Draws `sym` with jitter and noise sampled from `rng`.
///
/// Each pixel's ink is its stroke coverage: full within half the stroke
/// width of the nearest stroke centre line, fading linearly to zero one
/// pixel further out.
pub fn render_glyph<R: Rng + ?Sized>(sym: Sym, spec: &GlyphFamilySpec, rng: &mut R) -> GlyphImage {
    let uniform = |rng: &mut R, bound: f64| if bound > 0.0 { rng.random_range(-bound..=bound) } else { 0.0 };
    let angle = uniform(rng, spec.max_rotation_deg).to_radians();
    let tx = uniform(rng, spec.max_shift);
    let ty = uniform(rng, spec.max_shift);
    let width = spec.stroke_widths[rng.random_range(0..spec.stroke_widths.len())] as f64;
    let strokes = prototype(sym, spec.family);
    let (sin, cos) = angle.sin_cos();
    let centre = (GLYPH_SIZE / 2) as f64;
    let noise = (spec.noise_sigma > 0.0).then(|| Normal::new(0.0, spec.noise_sigma).expect("valid sigma"));
    let mut pixels = Vec::with_capacity(GLYPH_SIZE * GLYPH_SIZE);
    for row in 0..GLYPH_SIZE {
        for col in 0..GLYPH_SIZE {
            // Map the pixel back into glyph coordinates; the origin is pixel (8, 8).
            let (px, py) = (col as f64 - centre - tx, row as f64 - centre - ty);
            let (gx, gy) = (cos * px + sin * py, -sin * px + cos * py);
            let d = strokes.iter().map(|s| s.distance(gx, gy)).fold(f64::INFINITY, f64::min);
            let mut ink = (width / 2.0 + 0.5 - d).clamp(0.0, 1.0);
            if let Some(n) = &noise {
                ink = (ink + n.sample(rng)).clamp(0.0, 1.0);
            }
            pixels.push(ink);
        }
    }
    GlyphImage { pixels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_bar_is_a_column() {
        let spec = GlyphFamilySpec::noiseless(GlyphFamily::Easy);
        let img = render_glyph(Sym::D1, &spec, &mut ChaCha8Rng::seed_from_u64(0));
        for row in 0..GLYPH_SIZE {
            let inside = (3..=13).contains(&row);
            assert_eq!(img.get(row, 8), if inside { 1.0 } else { 0.0 }, "row {row}");
            assert_eq!(img.get(row, 7), 0.0);
            assert_eq!(img.get(row, 9), 0.0);
        }
    }

    #[test]
    fn rendering_is_deterministic_and_bounded() {
        for family in [GlyphFamily::Easy, GlyphFamily::Hard] {
            let spec = GlyphFamilySpec::for_family(family, 0);
            for sym in Sym::ALL {
                let a = render_glyph(sym, &spec, &mut ChaCha8Rng::seed_from_u64(11));
                let b = render_glyph(sym, &spec, &mut ChaCha8Rng::seed_from_u64(11));
                assert_eq!(a, b);
                assert!(a.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
            }
        }
    }

    #[test]
    fn classes_differ_without_noise() {
        for family in [GlyphFamily::Easy, GlyphFamily::Hard] {
            let spec = GlyphFamilySpec::noiseless(family);
            let imgs: Vec<_> = Sym::ALL
                .iter()
                .map(|&s| render_glyph(s, &spec, &mut ChaCha8Rng::seed_from_u64(0)))
                .collect();
            for i in 0..4 {
                for j in i + 1..4 {
                    assert_ne!(imgs[i], imgs[j]);
                }
            }
        }
    }
}
