//! Pixel implementations of the registry transforms.
//!
//! Every function returns a clone of its input when its strength parameter
//! is at the identity value. Geometric transforms keep the image size and
//! fill uncovered pixels with white.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use image::{Rgb, RgbImage};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub(crate) type Params = BTreeMap<String, f64>;

type TransformFn = fn(&RgbImage, &Params, &mut ChaCha8Rng) -> RgbImage;

pub(crate) fn lookup_fn(name: &str) -> Option<TransformFn> {
    Some(match name {
        "watermark" => watermark,
        "stamp_overlay" => stamp_overlay,
        "bleed_through" => bleed_through,
        "faint_ink" => faint_ink,
        "page_number_overlay" => page_number_overlay,
        "dirty_drum" => dirty_drum,
        "banding" => banding,
        "toner_scatter" => toner_scatter,
        "roller_streak" => roller_streak,
        "registration_offset" => registration_offset,
        "handwritten_markup" => handwritten_markup,
        "highlighter_stroke" => highlighter_stroke,
        "folding" => folding,
        "yellowing" => yellowing,
        "coffee_stain" => coffee_stain,
        "salt_and_pepper" => salt_and_pepper,
        "gaussian_noise" => gaussian_noise,
        "jpeg_blockiness" => jpeg_blockiness,
        "speckle" => speckle,
        "perspective_distortion" => perspective_distortion,
        "rotation_skew" => rotation_skew,
        "low_light" => low_light,
        "overexposure" => overexposure,
        "shadow_gradient" => shadow_gradient,
        "uneven_illumination" => uneven_illumination,
        "glare" => glare,
        "motion_blur" => motion_blur,
        "defocus_blur" => defocus_blur,
        "gaussian_blur" => gaussian_blur,
        _ => return None,
    })
}

fn get(p: &Params, name: &str) -> f64 {
    p[name]
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Per-pixel map over RGB triples.
fn map_pixels(img: &RgbImage, f: impl Fn(u32, u32, [f64; 3]) -> [f64; 3]) -> RgbImage {
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        let p = img.get_pixel(x, y).0.map(f64::from);
        Rgb(f(x, y, p).map(to_u8))
    })
}

/// Mixes `p` toward `target` by `a` per channel.
fn mix(p: [f64; 3], target: [f64; 3], a: f64) -> [f64; 3] {
    [0, 1, 2].map(|c| p[c] * (1.0 - a) + target[c] * a)
}

fn scale(p: [f64; 3], k: f64) -> [f64; 3] {
    p.map(|v| v * k)
}

/// Multiply-blend with a color: paper-like tinting.
fn tint(p: [f64; 3], color: [f64; 3], a: f64) -> [f64; 3] {
    [0, 1, 2].map(|c| p[c] * (1.0 - a) + p[c] * color[c] / 255.0 * a)
}

fn luminance(p: [f64; 3]) -> f64 {
    0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]
}

fn point(rng: &mut ChaCha8Rng, img: &RgbImage) -> (f64, f64) {
    (
        rng.random_range(0.0..img.width() as f64),
        rng.random_range(0.0..img.height() as f64),
    )
}

fn min_dim(img: &RgbImage) -> f64 {
    img.width().min(img.height()) as f64
}

/// Blends a disc of `color` into `img` in place.
fn stamp_disc(img: &mut RgbImage, cx: f64, cy: f64, r: f64, color: [f64; 3], a: f64) {
    let r = r.max(0.5);
    let (x0, x1) = ((cx - r).floor().max(0.0) as i64, (cx + r).ceil() as i64);
    let (y0, y1) = ((cy - r).floor().max(0.0) as i64, (cy + r).ceil() as i64);
    for y in y0..=y1.min(img.height() as i64 - 1) {
        for x in x0..=x1.min(img.width() as i64 - 1) {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            if dx * dx + dy * dy <= r * r {
                let px = img.get_pixel_mut(x as u32, y as u32);
                let p = px.0.map(f64::from);
                px.0 = mix(p, color, a).map(to_u8);
            }
        }
    }
}

// Pre-print.

fn watermark(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let opacity = get(p, "opacity");
    if opacity == 0.0 {
        return img.clone();
    }
    let theta = get(p, "angle_deg").to_radians();
    let period = get(p, "period_px").max(2.0);
    let phase = rng.random_range(0.0..period);
    let (s, c) = theta.sin_cos();
    map_pixels(img, |x, y, px| {
        let (xf, yf) = (x as f64, y as f64);
        let u = xf * c + yf * s + phase;
        let v = -xf * s + yf * c;
        // Rows of dashes along the rotated axis read as repeated text.
        let on_row = u.rem_euclid(period) < period * 0.3;
        let on_dash = v.rem_euclid(period * 0.5) < period * 0.35;
        if on_row && on_dash {
            mix(px, [150.0; 3], opacity)
        } else {
            px
        }
    })
}

fn stamp_overlay(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let opacity = get(p, "opacity");
    if opacity == 0.0 {
        return img.clone();
    }
    let r = (get(p, "radius_frac") * min_dim(img)).max(1.0);
    let (cx, cy) = point(rng, img);
    let ink = [190.0, 30.0, 40.0];
    let t = (r * 0.12).max(0.75);
    map_pixels(img, |x, y, px| {
        let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
        if (d - r).abs() <= t || (d - 0.7 * r).abs() <= t * 0.6 {
            mix(px, ink, opacity)
        } else {
            px
        }
    })
}

fn bleed_through(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let s = get(p, "strength");
    if s == 0.0 {
        return img.clone();
    }
    let w = img.width();
    map_pixels(img, |x, y, px| {
        // The reverse side shows through mirrored.
        let back = luminance(img.get_pixel(w - 1 - x, y).0.map(f64::from));
        scale(px, 1.0 - s * (1.0 - back / 255.0))
    })
}

fn faint_ink(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let fade = get(p, "fade");
    if fade == 0.0 {
        return img.clone();
    }
    map_pixels(img, |_, _, px| mix(px, [255.0; 3], fade))
}

/// 3×5 digit glyphs, one row per entry, high bit on the left.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b010, 0b010, 0b010],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

fn page_number_overlay(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let opacity = get(p, "opacity");
    if opacity == 0.0 {
        return img.clone();
    }
    let number = rng.random_range(1..1000u32).to_string();
    let cell = (img.height() / 120).max(1) as i64;
    let glyph_w = 4 * cell;
    let total_w = glyph_w * number.len() as i64;
    let x0 = (img.width() as i64 - total_w) / 2;
    let y0 = img.height() as i64 - 7 * cell;
    let mut out = img.clone();
    for (i, ch) in number.bytes().enumerate() {
        let glyph = DIGITS[(ch - b'0') as usize];
        for (row, bits) in glyph.iter().enumerate() {
            for col in 0..3 {
                if bits & (0b100 >> col) == 0 {
                    continue;
                }
                for dy in 0..cell {
                    for dx in 0..cell {
                        let x = x0 + i as i64 * glyph_w + col as i64 * cell + dx;
                        let y = y0 + row as i64 * cell + dy;
                        if x >= 0 && y >= 0 && x < img.width() as i64 && y < img.height() as i64 {
                            let px = out.get_pixel_mut(x as u32, y as u32);
                            px.0 = mix(px.0.map(f64::from), [20.0; 3], opacity).map(to_u8);
                        }
                    }
                }
            }
        }
    }
    out
}

// Mechanical.

fn dirty_drum(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let density = get(p, "density");
    if density == 0.0 {
        return img.clone();
    }
    let darkness = get(p, "darkness");
    let area = (img.width() * img.height()) as f64;
    let smudges = ((density * area / 40.0).round() as usize).max(1);
    let mut out = img.clone();
    for _ in 0..smudges {
        let (sx, sy) = point(rng, img);
        let len = rng.random_range(1.0..(img.width() as f64 / 4.0).max(2.0));
        let thick = rng.random_range(0.5..2.0);
        let mut t = 0.0;
        while t < len {
            stamp_disc(&mut out, sx + t, sy, thick, [30.0; 3], darkness * (1.0 - t / len));
            t += 1.0;
        }
    }
    out
}

fn banding(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let a = get(p, "amplitude");
    if a == 0.0 {
        return img.clone();
    }
    let period = get(p, "period_px").max(1.0);
    let phase = rng.random_range(0.0..2.0 * PI);
    map_pixels(img, |_, y, px| {
        let wave = 0.5 + 0.5 * (2.0 * PI * y as f64 / period + phase).sin();
        scale(px, 1.0 - a * wave)
    })
}

fn toner_scatter(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let density = get(p, "density");
    if density == 0.0 {
        return img.clone();
    }
    let mut out = img.clone();
    for px in out.pixels_mut() {
        if rng.random_bool(density) {
            let g = rng.random_range(30.0..120.0);
            px.0 = [g; 3].map(to_u8);
        }
    }
    out
}

fn roller_streak(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let count = get(p, "count").round() as usize;
    if count == 0 {
        return img.clone();
    }
    let width = get(p, "width_px").max(1.0);
    let mut out = img.clone();
    for _ in 0..count {
        let x0 = rng.random_range(0.0..img.width() as f64);
        let dark = rng.random_range(0.15..0.5);
        for x in (x0.floor() as u32)..((x0 + width).ceil() as u32).min(img.width()) {
            for y in 0..img.height() {
                let px = out.get_pixel_mut(x, y);
                px.0 = scale(px.0.map(f64::from), 1.0 - dark).map(to_u8);
            }
        }
    }
    out
}

fn registration_offset(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let shift = get(p, "shift_px").round() as i64;
    if shift == 0 {
        return img.clone();
    }
    let w = img.width() as i64;
    let sample = |x: i64, y: u32, c: usize| -> f64 {
        if (0..w).contains(&x) {
            img.get_pixel(x as u32, y).0[c] as f64
        } else {
            255.0
        }
    };
    map_pixels(img, |x, y, px| {
        let x = x as i64;
        [sample(x - shift, y, 0), px[1], sample(x + shift / 2, y, 2)]
    })
}

// Human marks.

fn handwritten_markup(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let strokes = get(p, "strokes").round() as usize;
    if strokes == 0 {
        return img.clone();
    }
    let r = get(p, "thickness_px") / 2.0;
    let mut out = img.clone();
    for _ in 0..strokes {
        let ink = if rng.random_bool(0.5) {
            [25.0, 45.0, 160.0]
        } else {
            [175.0, 25.0, 25.0]
        };
        let (sx, sy) = point(rng, img);
        let len = rng.random_range(1.0..(img.width() as f64 / 3.0).max(2.0));
        let amp = rng.random_range(0.0..(img.height() as f64 / 30.0).max(1.0));
        let freq = rng.random_range(0.02..0.15);
        let slope = rng.random_range(-0.3..0.3);
        let mut t = 0.0;
        while t < len {
            let y = sy + slope * t + amp * (freq * t).sin();
            stamp_disc(&mut out, sx + t, y, r, ink, 0.85);
            t += 0.5;
        }
    }
    out
}

fn highlighter_stroke(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let strokes = get(p, "strokes").round() as usize;
    if strokes == 0 {
        return img.clone();
    }
    let opacity = get(p, "opacity");
    let mut out = img.clone();
    let band = (img.height() / 30).max(1);
    for _ in 0..strokes {
        let y0 = rng.random_range(0..img.height());
        let x0 = rng.random_range(0..img.width());
        let x1 = rng.random_range(x0..=img.width());
        for y in y0..(y0 + band).min(img.height()) {
            for x in x0..x1 {
                let px = out.get_pixel_mut(x, y);
                px.0 = tint(px.0.map(f64::from), [255.0, 238.0, 70.0], opacity).map(to_u8);
            }
        }
    }
    out
}

// Aging.

fn folding(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let s = get(p, "strength");
    if s == 0.0 {
        return img.clone();
    }
    let vertical = rng.random_bool(0.5);
    let at = rng.random_range(0.3..0.7);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let extent = if vertical { w } else { h };
    let crease = at * extent;
    let sigma = 0.01 * extent + 1.0;
    map_pixels(img, |x, y, px| {
        let pos = if vertical { x as f64 } else { y as f64 } + 0.5;
        let d = pos - crease;
        let line = s * (-(d / sigma).powi(2)).exp();
        // One panel sits slightly lower than the other and catches less light.
        let panel = if d > 0.0 { 0.12 * s } else { 0.0 };
        scale(px, (1.0 - line) * (1.0 - panel))
    })
}

/// Yellowing: red and green are kept, blue is scaled by `1 - 0.6·s(x, y)`
/// where `s = strength · (0.6 + 0.4·r)` and `r` is the distance from the
/// center relative to the corner distance. Edges yellow more.
fn yellowing(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let strength = get(p, "strength");
    if strength == 0.0 {
        return img.clone();
    }
    let (cx, cy) = (img.width() as f64 / 2.0, img.height() as f64 / 2.0);
    let corner = (cx * cx + cy * cy).sqrt().max(f64::EPSILON);
    map_pixels(img, |x, y, px| {
        let r = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt() / corner;
        let s = (strength * (0.6 + 0.4 * r.min(1.0))).min(1.0);
        [px[0], px[1], px[2] * (1.0 - 0.6 * s)]
    })
}

fn coffee_stain(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let opacity = get(p, "opacity");
    if opacity == 0.0 {
        return img.clone();
    }
    let r = (get(p, "radius_frac") * min_dim(img)).max(1.0);
    let (cx, cy) = point(rng, img);
    let width = 0.08 * r + 0.5;
    map_pixels(img, |x, y, px| {
        let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
        let ring = (-((d - r) / width).powi(2)).exp();
        let fill = if d < r { 0.3 } else { 0.0 };
        let a = opacity * (ring + fill).min(1.0);
        tint(px, [160.0, 110.0, 60.0], a)
    })
}

// Digital noise.

fn salt_and_pepper(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let density = get(p, "density");
    if density == 0.0 {
        return img.clone();
    }
    let mut out = img.clone();
    for px in out.pixels_mut() {
        if rng.random_bool(density) {
            px.0 = if rng.random_bool(0.5) { [255; 3] } else { [0; 3] };
        }
    }
    out
}

fn gaussian_noise(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let sigma = get(p, "sigma");
    if sigma == 0.0 {
        return img.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let mut out = img.clone();
    for px in out.pixels_mut() {
        px.0 = px.0.map(|v| to_u8(v as f64 + normal.sample(rng)));
    }
    out
}

fn jpeg_blockiness(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    const BLOCK: u32 = 8;
    let s = get(p, "strength");
    if s == 0.0 {
        return img.clone();
    }
    let mut out = img.clone();
    for by in (0..img.height()).step_by(BLOCK as usize) {
        for bx in (0..img.width()).step_by(BLOCK as usize) {
            let (x1, y1) = ((bx + BLOCK).min(img.width()), (by + BLOCK).min(img.height()));
            let mut sum = [0.0; 3];
            for y in by..y1 {
                for x in bx..x1 {
                    let q = img.get_pixel(x, y).0;
                    for c in 0..3 {
                        sum[c] += q[c] as f64;
                    }
                }
            }
            let n = ((x1 - bx) * (y1 - by)) as f64;
            let mean = sum.map(|v| v / n);
            for y in by..y1 {
                for x in bx..x1 {
                    let px = out.get_pixel_mut(x, y);
                    px.0 = mix(px.0.map(f64::from), mean, s).map(to_u8);
                }
            }
        }
    }
    out
}

fn speckle(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let sigma = get(p, "sigma");
    if sigma == 0.0 {
        return img.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let mut out = img.clone();
    for px in out.pixels_mut() {
        let k = 1.0 + normal.sample(rng);
        px.0 = scale(px.0.map(f64::from), k).map(to_u8);
    }
    out
}

// Geometric.

/// Nearest-neighbour resampling through `source(x, y)`; white outside.
fn resample(img: &RgbImage, source: impl Fn(f64, f64) -> (f64, f64)) -> RgbImage {
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        let (sx, sy) = source(x as f64 + 0.5, y as f64 + 0.5);
        let (ix, iy) = (sx.floor(), sy.floor());
        if ix >= 0.0 && iy >= 0.0 && ix < img.width() as f64 && iy < img.height() as f64 {
            *img.get_pixel(ix as u32, iy as u32)
        } else {
            Rgb([255; 3])
        }
    })
}

/// Solves the 3×3 homography (h33 = 1) mapping each `from[i]` to `to[i]`.
fn homography(from: [(f64, f64); 4], to: [(f64, f64); 4]) -> Option<[f64; 8]> {
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let ((x, y), (u, v)) = (from[i], to[i]);
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -x * u, -y * u, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -x * v, -y * v, v];
    }
    for col in 0..8 {
        let pivot = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..8 {
            if row != col {
                let pivot_row = a[col];
                let f = a[row][col] / pivot_row[col];
                for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut h = [0.0; 8];
    for i in 0..8 {
        h[i] = a[i][8] / a[i][i];
    }
    Some(h)
}

fn perspective_distortion(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let s = get(p, "strength");
    if s == 0.0 || img.width() < 2 || img.height() < 2 {
        return img.clone();
    }
    let (w, h) = (img.width() as f64, img.height() as f64);
    let corners = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)];
    let mut jitter = || (rng.random_range(-s..=s) * w, rng.random_range(-s..=s) * h);
    let moved = corners.map(|(x, y)| {
        let (dx, dy) = jitter();
        (x + dx, y + dy)
    });
    // Output corners map back to the displaced source corners.
    let Some(m) = homography(corners, moved) else {
        return img.clone();
    };
    resample(img, |x, y| {
        let d = m[6] * x + m[7] * y + 1.0;
        ((m[0] * x + m[1] * y + m[2]) / d, (m[3] * x + m[4] * y + m[5]) / d)
    })
}

fn rotation_skew(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let angle = get(p, "angle_deg");
    if angle == 0.0 {
        return img.clone();
    }
    let (s, c) = angle.to_radians().sin_cos();
    let (cx, cy) = (img.width() as f64 / 2.0, img.height() as f64 / 2.0);
    resample(img, |x, y| {
        let (dx, dy) = (x - cx, y - cy);
        (cx + c * dx + s * dy, cy - s * dx + c * dy)
    })
}

// Lighting.

fn low_light(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let s = get(p, "strength");
    if s == 0.0 {
        return img.clone();
    }
    let gamma = 1.0 + 1.5 * s;
    let gain = 1.0 - 0.4 * s;
    map_pixels(img, |_, _, px| px.map(|v| 255.0 * (v / 255.0).powf(gamma) * gain))
}

fn overexposure(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let s = get(p, "strength");
    if s == 0.0 {
        return img.clone();
    }
    map_pixels(img, |_, _, px| px.map(|v| v * (1.0 + 2.0 * s)))
}

fn shadow_gradient(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let s = get(p, "strength");
    if s == 0.0 {
        return img.clone();
    }
    let side = rng.random_range(0..4u8);
    let (w, h) = (img.width() as f64, img.height() as f64);
    map_pixels(img, |x, y, px| {
        let (xf, yf) = ((x as f64 + 0.5) / w, (y as f64 + 0.5) / h);
        // Distance from the shadowed edge, 0 at the edge.
        let t = match side {
            0 => xf,
            1 => 1.0 - xf,
            2 => yf,
            _ => 1.0 - yf,
        };
        scale(px, 1.0 - s * (1.0 - t).powi(2))
    })
}

fn uneven_illumination(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let s = get(p, "strength");
    if s == 0.0 {
        return img.clone();
    }
    let (cx, cy) = point(rng, img);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let reach = (w * w + h * h).sqrt();
    map_pixels(img, |x, y, px| {
        let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt() / reach;
        scale(px, 1.0 - s * d.min(1.0))
    })
}

fn glare(img: &RgbImage, p: &Params, rng: &mut ChaCha8Rng) -> RgbImage {
    let s = get(p, "strength");
    if s == 0.0 {
        return img.clone();
    }
    let r = (get(p, "radius_frac") * min_dim(img)).max(1.0);
    let (cx, cy) = point(rng, img);
    map_pixels(img, |x, y, px| {
        let d2 = (x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2);
        mix(px, [255.0; 3], s * (-d2 / (r * r)).exp())
    })
}

// Blur.

/// Averages clamped-edge samples at the given offsets.
fn average_offsets(img: &RgbImage, offsets: &[(i64, i64)]) -> RgbImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let n = offsets.len() as f64;
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        let mut sum = [0.0; 3];
        for &(dx, dy) in offsets {
            let sx = (x as i64 + dx).clamp(0, w - 1) as u32;
            let sy = (y as i64 + dy).clamp(0, h - 1) as u32;
            let q = img.get_pixel(sx, sy).0;
            for c in 0..3 {
                sum[c] += q[c] as f64;
            }
        }
        Rgb(sum.map(|v| to_u8(v / n)))
    })
}

fn motion_blur(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let len = get(p, "length_px").round() as i64;
    if len <= 1 {
        return img.clone();
    }
    let (s, c) = get(p, "angle_deg").to_radians().sin_cos();
    let half = (len - 1) as f64 / 2.0;
    let offsets: Vec<(i64, i64)> = (0..len)
        .map(|i| {
            let t = i as f64 - half;
            ((t * c).round() as i64, (t * s).round() as i64)
        })
        .collect();
    average_offsets(img, &offsets)
}

fn defocus_blur(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let r = get(p, "radius_px");
    if r == 0.0 {
        return img.clone();
    }
    let ri = r.ceil() as i64;
    let offsets: Vec<(i64, i64)> = (-ri..=ri)
        .flat_map(|dy| (-ri..=ri).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| ((dx * dx + dy * dy) as f64) <= r * r)
        .collect();
    average_offsets(img, &offsets)
}

fn gaussian_blur(img: &RgbImage, p: &Params, _rng: &mut ChaCha8Rng) -> RgbImage {
    let sigma = get(p, "sigma");
    if sigma == 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let (w, h) = (img.width() as i64, img.height() as i64);
    let pass = |src: &[[f64; 3]], horizontal: bool| -> Vec<[f64; 3]> {
        let mut dst = vec![[0.0; 3]; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0; 3];
                for (k, wt) in weights.iter().enumerate() {
                    let o = k as i64 - radius;
                    let (sx, sy) = if horizontal {
                        ((x + o).clamp(0, w - 1), y)
                    } else {
                        (x, (y + o).clamp(0, h - 1))
                    };
                    let q = src[(sy * w + sx) as usize];
                    for c in 0..3 {
                        acc[c] += q[c] * wt;
                    }
                }
                dst[(y * w + x) as usize] = acc.map(|v| v / total);
            }
        }
        dst
    };
    let src: Vec<[f64; 3]> = img.pixels().map(|p| p.0.map(f64::from)).collect();
    let out = pass(&pass(&src, true), false);
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        Rgb(out[(y as i64 * w + x as i64) as usize].map(to_u8))
    })
}
