//! Procedural glyph bank: a dependency-free, desk-scale digit source.
//!
//! Each class renders a distinct seven-segment stroke pattern (classes past 9
//! get corner ticks), and every image gets seeded jitter: a small random
//! shift, a brightness scale, and per-pixel noise. The patterns stay linearly
//! separable from raw pixels while the jitter keeps random-feature probes
//! from saturating.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DataError, DigitBank, Result};

/// Jitter strengths applied per image.
#[derive(Debug, Clone, Copy)]
pub struct SynthJitter {
    /// Maximum shift, in pixels, along each axis.
    pub max_shift: i32,
    /// Brightness draws uniformly from `[brightness_floor, 1.0]`.
    pub brightness_floor: f32,
    /// Additive per-pixel noise, uniform in `[-amplitude, amplitude]`.
    pub noise_amplitude: f32,
}

impl Default for SynthJitter {
    fn default() -> Self {
        SynthJitter { max_shift: 3, brightness_floor: 0.5, noise_amplitude: 0.28 }
    }
}

// Seven-segment bit masks, segments ordered A,B,C,D,E,F,G.
const SEGMENTS: [u8; 10] = [
    0b0111111, // 0: ABCDEF
    0b0000110, // 1: BC
    0b1011011, // 2: ABDEG
    0b1001111, // 3: ABCDG
    0b1100110, // 4: BCFG
    0b1101101, // 5: ACDFG
    0b1111101, // 6: ACDEFG
    0b0000111, // 7: ABC
    0b1111111, // 8
    0b1101111, // 9: ABCDFG
];

fn fill_rect(canvas: &mut [f32], w: usize, r0: usize, r1: usize, c0: usize, c1: usize) {
    for r in r0..=r1 {
        for c in c0..=c1 {
            canvas[r * w + c] = 1.0;
        }
    }
}

/// Noise-free stroke template for a class on an `h x w` canvas.
fn render_template(class: usize, h: usize, w: usize) -> Vec<f32> {
    let mut canvas = vec![0.0f32; h * w];
    let top = h / 6;
    let bottom = h - 1 - h / 6;
    let left = w / 4;
    let right = w - 1 - w / 4;
    let mid = (top + bottom) / 2;
    let t = (h / 10).max(1); // stroke half-thickness

    let mask = SEGMENTS[class % 10];
    let seg = |bit: usize| mask >> bit & 1 == 1;
    if seg(0) {
        fill_rect(&mut canvas, w, top, top + t - 1, left, right); // A
    }
    if seg(1) {
        fill_rect(&mut canvas, w, top, mid, right + 1 - t, right); // B
    }
    if seg(2) {
        fill_rect(&mut canvas, w, mid, bottom, right + 1 - t, right); // C
    }
    if seg(3) {
        fill_rect(&mut canvas, w, bottom + 1 - t, bottom, left, right); // D
    }
    if seg(4) {
        fill_rect(&mut canvas, w, mid, bottom, left, left + t - 1); // E
    }
    if seg(5) {
        fill_rect(&mut canvas, w, top, mid, left, left + t - 1); // F
    }
    if seg(6) {
        fill_rect(&mut canvas, w, mid, (mid + t - 1).min(bottom), left, right); // G
    }
    // Corner ticks distinguish classes 10+, one tick per ten.
    for tick in 0..(class / 10) {
        let c = (tick * 2) % w;
        canvas[c] = 1.0;
        if w < h * w {
            canvas[w + c.min(w - 1)] = 1.0;
        }
    }
    canvas
}

fn jittered(
    template: &[f32],
    h: usize,
    w: usize,
    jitter: &SynthJitter,
    rng: &mut impl Rng,
) -> Vec<f32> {
    let dx = rng.random_range(-jitter.max_shift..=jitter.max_shift);
    let dy = rng.random_range(-jitter.max_shift..=jitter.max_shift);
    let brightness =
        jitter.brightness_floor + rng.random::<f32>() * (1.0 - jitter.brightness_floor);
    let mut out = vec![0.0f32; h * w];
    for r in 0..h {
        for c in 0..w {
            let sr = r as i32 - dy;
            let sc = c as i32 - dx;
            let v = if sr >= 0 && sr < h as i32 && sc >= 0 && sc < w as i32 {
                template[sr as usize * w + sc as usize] * brightness
            } else {
                0.0
            };
            let noise = (rng.random::<f32>() * 2.0 - 1.0) * jitter.noise_amplitude;
            out[r * w + c] = (v + noise).clamp(0.0, 1.0);
        }
    }
    out
}

/// Build a glyph bank with the default jitter.
pub fn synth_bank(
    num_classes: usize,
    per_class: usize,
    image_size: usize,
    seed_value: u64,
) -> Result<DigitBank> {
    synth_bank_with_jitter(num_classes, per_class, image_size, seed_value, &SynthJitter::default())
}

/// Build a glyph bank with explicit jitter strengths.
pub fn synth_bank_with_jitter(
    num_classes: usize,
    per_class: usize,
    image_size: usize,
    seed_value: u64,
    jitter: &SynthJitter,
) -> Result<DigitBank> {
    if num_classes < 2 {
        return Err(DataError::InvalidGeometry(format!("{num_classes} classes")));
    }
    if per_class == 0 {
        return Err(DataError::InvalidGeometry("0 images per class".into()));
    }
    if image_size < 8 {
        return Err(DataError::InvalidGeometry(format!(
            "{image_size}x{image_size} is too small for the glyph strokes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
    let mut images = Vec::with_capacity(num_classes * per_class);
    for class in 0..num_classes {
        let template = render_template(class, image_size, image_size);
        for _ in 0..per_class {
            images.push((jittered(&template, image_size, image_size, jitter, &mut rng), class));
        }
    }
    DigitBank::from_images(images, num_classes, image_size, image_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bank() {
        let a = synth_bank(10, 5, 14, 42).unwrap();
        let b = synth_bank(10, 5, 14, 42).unwrap();
        for class in 0..10 {
            assert_eq!(a.images(class), b.images(class));
        }
        let c = synth_bank(10, 5, 14, 43).unwrap();
        assert_ne!(a.images(0)[0], c.images(0)[0]);
    }

    #[test]
    fn one_image_per_class_counts() {
        let bank = synth_bank(6, 1, 12, 0).unwrap();
        assert_eq!(bank.num_classes(), 6);
        for class in 0..6 {
            assert_eq!(bank.images(class).len(), 1);
        }
    }

    #[test]
    fn templates_differ_between_classes() {
        for a in 0..10 {
            for b in (a + 1)..10 {
                assert_ne!(
                    render_template(a, 14, 14),
                    render_template(b, 14, 14),
                    "classes {a} and {b} render identically"
                );
            }
        }
    }

    #[test]
    fn pixels_stay_in_unit_range() {
        let bank = synth_bank(10, 20, 14, 11).unwrap();
        for class in 0..10 {
            for img in bank.images(class) {
                assert!(img.iter().all(|&p| (0.0..=1.0).contains(&p)));
            }
        }
    }

    #[test]
    fn rejects_degenerate_requests() {
        assert!(synth_bank(1, 5, 14, 0).is_err());
        assert!(synth_bank(10, 0, 14, 0).is_err());
        assert!(synth_bank(10, 5, 4, 0).is_err());
    }
}
