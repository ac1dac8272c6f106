//! sRGB (D65) ⇄ CIE 1976 L*u*v*.

use std::sync::LazyLock;

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

static XYZ_TO_RGB: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| invert3(&RGB_TO_XYZ));

/// Reference white: the image of linear RGB (1, 1, 1).
static WHITE: LazyLock<[f64; 3]> = LazyLock::new(|| mul3(&RGB_TO_XYZ, [1.0, 1.0, 1.0]));

const KAPPA: f64 = 24389.0 / 27.0;
const EPSILON: f64 = 216.0 / 24389.0;

fn mul3(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |r: usize, s: usize| {
        let (r0, r1) = ((r + 1) % 3, (r + 2) % 3);
        let (s0, s1) = ((s + 1) % 3, (s + 2) % 3);
        m[r0][s0] * m[r1][s1] - m[r0][s1] * m[r1][s0]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    let mut inv = [[0.0; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (s, v) in row.iter_mut().enumerate() {
            *v = c(s, r) / det;
        }
    }
    inv
}

fn to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn to_gamma(c: f64) -> u8 {
    let c = c.clamp(0.0, 1.0);
    let g = if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    };
    (g * 255.0).round().clamp(0.0, 255.0) as u8
}

fn chromaticity(xyz: [f64; 3]) -> Option<(f64, f64)> {
    let den = xyz[0] + 15.0 * xyz[1] + 3.0 * xyz[2];
    (den > 0.0).then(|| (4.0 * xyz[0] / den, 9.0 * xyz[1] / den))
}

/// `(L*, u*, v*)` of an 8-bit sRGB colour. Black is `(0, 0, 0)`.
pub fn rgb_to_luv(r: u8, g: u8, b: u8) -> [f64; 3] {
    let xyz = mul3(&RGB_TO_XYZ, [to_linear(r), to_linear(g), to_linear(b)]);
    let white = *WHITE;
    let yr = xyz[1] / white[1];
    let l = if yr > EPSILON {
        116.0 * yr.cbrt() - 16.0
    } else {
        KAPPA * yr
    };
    match (chromaticity(xyz), chromaticity(white)) {
        (Some((u, v)), Some((un, vn))) if l > 0.0 => [l, 13.0 * l * (u - un), 13.0 * l * (v - vn)],
        _ => [0.0, 0.0, 0.0],
    }
}

pub fn luv_to_rgb(luv: [f64; 3]) -> [u8; 3] {
    let [l, u, v] = luv;
    if l <= 0.0 {
        return [0, 0, 0];
    }
    let white = *WHITE;
    let (un, vn) = chromaticity(white).expect("white has positive luminance");
    let y = if l > KAPPA * EPSILON {
        ((l + 16.0) / 116.0).powi(3)
    } else {
        l / KAPPA
    } * white[1];
    let up = u / (13.0 * l) + un;
    let vp = v / (13.0 * l) + vn;
    if vp <= 0.0 {
        return [0, 0, 0];
    }
    let x = y * 9.0 * up / (4.0 * vp);
    let z = y * (12.0 - 3.0 * up - 20.0 * vp) / (4.0 * vp);
    mul3(&XYZ_TO_RGB, [x, y, z]).map(to_gamma)
}
