//! Deterministic synthetic digit corpus.
//!
//! A stand-in for MNIST when the real IDX files are not on disk: each digit
//! class is a hand-laid set of strokes, rasterized at 28x28 with a random
//! affine jitter (rotation, scale, shear, translation) and stroke-width
//! variation per sample. Values follow the MNIST byte convention (0..255,
//! background 0). Everything derives from the seed, so two generations are
//! byte-identical.

use rand::Rng;

use crate::descriptors::Image;
use crate::rng::{derive_seed, seeded_rng};

/// Canvas side in pixels.
const SIDE: usize = 28;

/// Strokes per digit, in glyph coordinates: x is down, y is right, both in
/// [0, 1] with the glyph box mapped to the central 20/28 of the canvas.
fn digit_strokes(digit: u8) -> Vec<Vec<[f64; 2]>> {
    let arc = |cx: f64, cy: f64, rx: f64, ry: f64, from_deg: f64, to_deg: f64, n: usize| {
        (0..=n)
            .map(|i| {
                let t = (from_deg + (to_deg - from_deg) * i as f64 / n as f64).to_radians();
                [cx - t.cos() * rx, cy + t.sin() * ry]
            })
            .collect::<Vec<[f64; 2]>>()
    };
    match digit {
        0 => vec![arc(0.5, 0.5, 0.42, 0.30, 0.0, 360.0, 24)],
        1 => vec![vec![[0.25, 0.35], [0.08, 0.52]], vec![[0.08, 0.52], [0.92, 0.52]]],
        2 => vec![
            arc(0.28, 0.5, 0.22, 0.30, -30.0, 160.0, 12),
            vec![[0.38, 0.76], [0.92, 0.18]],
            vec![[0.92, 0.18], [0.92, 0.85]],
        ],
        3 => vec![
            arc(0.27, 0.45, 0.21, 0.30, -70.0, 140.0, 12),
            arc(0.72, 0.45, 0.24, 0.33, 40.0, 250.0, 14),
        ],
        4 => vec![
            vec![[0.08, 0.55], [0.60, 0.12], [0.60, 0.88]],
            vec![[0.05, 0.55], [0.95, 0.55]],
        ],
        5 => vec![
            vec![[0.10, 0.85], [0.10, 0.15], [0.45, 0.15], [0.45, 0.40]],
            arc(0.70, 0.45, 0.25, 0.38, -90.0, 160.0, 14),
        ],
        6 => vec![
            arc(0.45, 0.62, 0.42, 0.36, 140.0, 230.0, 10),
            arc(0.70, 0.45, 0.24, 0.30, 0.0, 360.0, 18),
        ],
        7 => vec![
            vec![[0.10, 0.10], [0.10, 0.88], [0.92, 0.35]],
            vec![[0.50, 0.30], [0.50, 0.75]],
        ],
        8 => vec![
            arc(0.28, 0.5, 0.21, 0.26, 0.0, 360.0, 18),
            arc(0.73, 0.5, 0.24, 0.32, 0.0, 360.0, 18),
        ],
        9 => vec![
            arc(0.30, 0.45, 0.24, 0.30, 0.0, 360.0, 18),
            vec![[0.30, 0.74], [0.92, 0.62]],
        ],
        _ => panic!("digit out of range"),
    }
}

/// Render one jittered digit sample.
pub fn synthetic_digit(digit: u8, seed: u64) -> Image {
    let mut rng = seeded_rng(seed);
    let strokes = digit_strokes(digit);

    let angle: f64 = rng.gen_range(-0.16..0.16); // radians, about ±9 degrees
    let scale = rng.gen_range(0.82..1.12);
    let shear = rng.gen_range(-0.12..0.12);
    let shift = [rng.gen_range(-0.06..0.06), rng.gen_range(-0.06..0.06)];
    let thickness = rng.gen_range(0.050..0.085);
    let peak = rng.gen_range(0.85..1.0);
    let (sin, cos) = angle.sin_cos();

    let jitter = |p: [f64; 2]| -> [f64; 2] {
        let (x, y) = (p[0] - 0.5, p[1] - 0.5);
        let (x, y) = (x + shear * y, y);
        let (x, y) = (scale * (cos * x - sin * y), scale * (sin * x + cos * y));
        [x + 0.5 + shift[0], y + 0.5 + shift[1]]
    };
    let strokes: Vec<Vec<[f64; 2]>> =
        strokes.into_iter().map(|s| s.into_iter().map(jitter).collect()).collect();

    // Glyph box occupies the central 20 pixels, as in MNIST.
    let margin = 4.0;
    let span = (SIDE as f64) - 2.0 * margin;
    let mut data = vec![0.0; SIDE * SIDE];
    for (r, value) in data.iter_mut().enumerate() {
        let px = [
            ((r / SIDE) as f64 + 0.5 - margin) / span,
            ((r % SIDE) as f64 + 0.5 - margin) / span,
        ];
        let mut d2 = f64::INFINITY;
        for stroke in &strokes {
            for seg in stroke.windows(2) {
                d2 = d2.min(dist2_to_segment(px, seg[0], seg[1]));
            }
        }
        // Soft-edged stroke profile.
        let d = d2.sqrt();
        let intensity = peak * (1.0 - ((d - thickness) / 0.035).max(0.0)).clamp(0.0, 1.0);
        *value = (intensity * 255.0).round();
    }
    Image::new(SIDE, SIDE, 1, data)
}

fn dist2_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 { 0.0 } else { ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0) };
    let dx = ap[0] - t * ab[0];
    let dy = ap[1] - t * ab[1];
    dx * dx + dy * dy
}

/// A labeled synthetic corpus with round-robin classes.
pub fn synthetic_digits(count: usize, seed: u64) -> Vec<(Image, u8)> {
    (0..count)
        .map(|i| {
            let digit = (i % 10) as u8;
            (synthetic_digit(digit, derive_seed(seed, &[i as u64])), digit)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = synthetic_digits(20, 5);
        let b = synthetic_digits(20, 5);
        assert_eq!(a, b);
        let c = synthetic_digits(20, 6);
        assert_ne!(a, c);
    }

    #[test]
    fn images_follow_mnist_conventions() {
        for (img, label) in synthetic_digits(30, 1) {
            assert!(label <= 9);
            assert_eq!((img.height(), img.width()), (28, 28));
            let max = img.data().iter().cloned().fold(0.0, f64::max);
            let lit = img.data().iter().filter(|&&v| v > 25.0).count();
            assert!(max > 150.0, "stroke too faint for digit {label}");
            assert!((20..500).contains(&lit), "{lit} lit pixels for digit {label}");
        }
    }

    #[test]
    fn samples_of_one_class_differ() {
        let a = synthetic_digit(7, 1);
        let b = synthetic_digit(7, 2);
        assert_ne!(a, b);
    }
}
