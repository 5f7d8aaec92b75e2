//! Escape-time picture of the filled Julia set of `f(z) = z e^(z-1)`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct JuliaParams {
    pub width: usize,
    pub height: usize,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub max_iter: u32,
    pub escape_radius: f64,
}

impl Default for JuliaParams {
    fn default() -> Self {
        JuliaParams {
            width: 600,
            height: 480,
            re_range: (-3.5, 2.5),
            im_range: (-2.4, 2.4),
            max_iter: 200,
            escape_radius: 50.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JuliaImage {
    pub params: JuliaParams,
    /// Row-major, row 0 at the top (largest imaginary part).
    pub escape_data: Vec<u32>,
}

/// Real parts above this make `e^(z-1)` overflow; such points have escaped.
const EXP_LIMIT: f64 = 700.0;

/// Iterations before `|z|` exceeds `radius`, or `max_iter` if it never does.
pub fn escape_count(mut x: f64, mut y: f64, max_iter: u32, radius: f64) -> u32 {
    let r2 = radius * radius;
    for k in 0..max_iter {
        if x * x + y * y > r2 || x > EXP_LIMIT || !x.is_finite() || !y.is_finite() {
            return k;
        }
        let e = (x - 1.0).exp();
        let (s, c) = y.sin_cos();
        let wr = e * c;
        let wi = e * s;
        let nx = x * wr - y * wi;
        let ny = x * wi + y * wr;
        x = nx;
        y = ny;
    }
    max_iter
}

/// Samples pixel centers. Coordinates are computed relative to the window
/// center so that a window symmetric about the real axis gives an image
/// that is exactly symmetric under conjugation.
pub fn render_julia(params: &JuliaParams) -> Result<JuliaImage> {
    let p = params;
    if p.width == 0 || p.height == 0 {
        return Err(Error::Precondition("image dimensions must be positive".into()));
    }
    if !(p.escape_radius > 1.0) {
        return Err(Error::Precondition("escape radius must exceed 1".into()));
    }
    if !(p.re_range.1 > p.re_range.0) || !(p.im_range.1 > p.im_range.0) {
        return Err(Error::Precondition("ranges must be non-empty intervals".into()));
    }
    let dx = (p.re_range.1 - p.re_range.0) / p.width as f64;
    let dy = (p.im_range.1 - p.im_range.0) / p.height as f64;
    let cx = 0.5 * (p.re_range.0 + p.re_range.1);
    let cy = 0.5 * (p.im_range.0 + p.im_range.1);
    let mut data = Vec::with_capacity(p.width * p.height);
    for j in 0..p.height {
        let y = cy + ((p.height as f64 - 1.0) / 2.0 - j as f64) * dy;
        for i in 0..p.width {
            let x = cx + (i as f64 - (p.width as f64 - 1.0) / 2.0) * dx;
            data.push(escape_count(x, y, p.max_iter, p.escape_radius));
        }
    }
    Ok(JuliaImage { params: p.clone(), escape_data: data })
}

impl JuliaImage {
    pub fn count(&self, col: usize, row: usize) -> u32 {
        self.escape_data[row * self.params.width + col]
    }

    /// Pixels that never escaped.
    pub fn filled(&self) -> usize {
        self.escape_data.iter().filter(|&&c| c == self.params.max_iter).count()
    }

    /// Binary PGM (P5): 255 for points that never escape, otherwise
    /// `254 * count / max_iter`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let p = &self.params;
        let mut out = format!("P5\n{} {}\n255\n", p.width, p.height).into_bytes();
        let max = p.max_iter.max(1) as u64;
        out.extend(self.escape_data.iter().map(|&c| {
            if c >= p.max_iter {
                255u8
            } else {
                (254 * c as u64 / max) as u8
            }
        }));
        out
    }
}
