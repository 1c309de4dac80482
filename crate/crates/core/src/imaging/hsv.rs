/// Hue in degrees, saturation and value in `[0, 1]`.
///
/// `h` is `None` exactly when the pixel is black (the maximum channel is
/// zero), where hue is not defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: Option<f64>,
    pub s: f64,
    pub v: f64,
}

/// Hexcone RGB to HSV conversion on channels normalized to `[0, 1]`.
///
/// When several channels share the maximum, the hue branch is chosen with
/// priority R, then G, then B. Achromatic pixels with a nonzero maximum get
/// hue 0.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> Hsv {
    let (rf, gf, bf) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;

    if r.max(g).max(b) == 0 {
        return Hsv { h: None, s: 0.0, v: 0.0 };
    }

    let s = delta / max;
    if delta == 0.0 {
        return Hsv { h: Some(0.0), s, v: max };
    }

    let mut h = if r >= g && r >= b {
        60.0 * ((gf - bf) / delta)
    } else if g >= b {
        60.0 * ((bf - rf) / delta + 2.0)
    } else {
        60.0 * ((rf - gf) / delta + 4.0)
    };
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    Hsv { h: Some(h), s, v: max }
}
