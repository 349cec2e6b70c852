//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns plain arrays so the page can draw straight into a
//! canvas `ImageData` without any glue beyond the generated module.

use ndarray::{Array2, ArrayView2};
use wasm_bindgen::prelude::*;

use birank::latin::{haar_family, latin_square_family, HaarFamily};
use birank::meyer::{build_profile, nonseparability_score, CornerSpec, FreqProfile};
use birank::transform::{analyze, synthesize};

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Perceptually ordered dark-blue → yellow ramp.
const RAMP: [[u8; 3]; 5] = [
    [13, 8, 135],
    [126, 3, 168],
    [204, 71, 120],
    [248, 149, 64],
    [240, 249, 33],
];

fn color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let k = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - k as f64;
    let mix = |c: usize| (RAMP[k][c] as f64 * (1.0 - f) + RAMP[k + 1][c] as f64 * f).round() as u8;
    [mix(0), mix(1), mix(2)]
}

/// RGBA bytes of a min-max scaled array, first row at the top.
pub fn rgba(a: ArrayView2<f64>) -> Vec<u8> {
    let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = Vec::with_capacity(a.len() * 4);
    for &v in a {
        let [r, g, b] = color((v - lo) / span);
        out.extend_from_slice(&[r, g, b, 255]);
    }
    out
}

fn corner_spec(mode: &str, a: f64, d: f64, t: f64) -> Result<CornerSpec, JsValue> {
    match mode {
        "piecewise-constant" => Ok(CornerSpec::PiecewiseConstant { a, d }),
        "triangular" => Ok(CornerSpec::Triangular { t }),
        "tensor" => Ok(CornerSpec::Tensor { pa: a, pb: d }),
        other => Err(err(format!("unknown mode {other:?}"))),
    }
}

/// Profile with `ξ₂` increasing upwards, as an image.
fn upright(p: &FreqProfile) -> Array2<f64> {
    let n = p.n();
    Array2::from_shape_fn((n, n), |(r, c)| p.values[(c, n - 1 - r)])
}

/// A sampled Meyer profile: RGBA pixels plus its nonseparability score.
#[wasm_bindgen]
pub struct MeyerView {
    size: usize,
    pixels: Vec<u8>,
    score: f64,
}

#[wasm_bindgen]
impl MeyerView {
    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.size
    }

    #[wasm_bindgen(getter)]
    pub fn pixels(&self) -> Vec<u8> {
        self.pixels.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn score(&self) -> f64 {
        self.score
    }
}

/// `mode` is `piecewise-constant` (`a`, `d` squared corner values),
/// `triangular` (`t`) or `tensor` (`a`, `d` read as the two fractions).
#[wasm_bindgen]
pub fn meyer_profile(mode: &str, a: f64, d: f64, t: f64, grid: usize) -> Result<MeyerView, JsValue> {
    let spec = corner_spec(mode, a, d, t)?;
    let p = build_profile(&spec, grid).map_err(err)?;
    Ok(MeyerView {
        size: p.n(),
        pixels: rgba(upright(&p).view()),
        score: nonseparability_score(&p),
    })
}

fn family(alpha: u32, beta: u32) -> Result<HaarFamily, JsValue> {
    if (alpha, beta) == (3, 3) {
        Ok(latin_square_family())
    } else {
        haar_family(alpha, beta).map_err(err)
    }
}

/// Coefficient grids of the `(α, β)` family, concatenated in the order
/// scaling, A-details, B-details, wavelets; each grid is `α×β` row-major.
#[wasm_bindgen]
pub fn family_grids(alpha: u32, beta: u32) -> Result<Vec<f64>, JsValue> {
    let fam = family(alpha, beta)?;
    Ok(fam.grids().flat_map(|g| g.iter().copied()).collect())
}

/// Names matching [`family_grids`], comma separated.
#[wasm_bindgen]
pub fn family_names(alpha: u32, beta: u32) -> Result<String, JsValue> {
    Ok(family(alpha, beta)?.grid_names().join(","))
}

/// Result of a threshold-and-reconstruct round.
#[wasm_bindgen]
pub struct Compression {
    image: Vec<f64>,
    retained: f64,
    rmse: f64,
}

#[wasm_bindgen]
impl Compression {
    #[wasm_bindgen(getter)]
    pub fn image(&self) -> Vec<f64> {
        self.image.clone()
    }

    /// Fraction of detail coefficients kept.
    #[wasm_bindgen(getter)]
    pub fn retained(&self) -> f64 {
        self.retained
    }

    #[wasm_bindgen(getter)]
    pub fn rmse(&self) -> f64 {
        self.rmse
    }
}

/// Analyze `pixels` (`height×width`, row-major), zero the detail
/// coefficients with `|c| ≤ threshold` and reconstruct.
#[wasm_bindgen]
pub fn compress(
    pixels: &[f64],
    width: usize,
    height: usize,
    alpha: u32,
    beta: u32,
    depth: usize,
    threshold: f64,
) -> Result<Compression, JsValue> {
    let x = ArrayView2::from_shape((height, width), pixels).map_err(err)?;
    let fam = family(alpha, beta)?;
    let mut tree = analyze(x, &fam, depth).map_err(err)?;
    let stats = tree.threshold(threshold);
    let y = synthesize(&tree, &fam).map_err(err)?;
    let mse = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len().max(1) as f64;
    Ok(Compression {
        image: y.iter().copied().collect(),
        retained: stats.retained as f64 / stats.detail_total.max(1) as f64,
        rmse: mse.sqrt(),
    })
}

/// A `size×size` test card in `[0, 255]`: a disc, a diagonal band and a
/// smooth ramp.
#[wasm_bindgen]
pub fn test_image(size: usize) -> Vec<f64> {
    let s = size as f64;
    let mut out = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let (y, x) = (i as f64 / s, j as f64 / s);
            let disc = ((x - 0.35).powi(2) + (y - 0.4).powi(2)).sqrt() < 0.22;
            let band = (x + y - 1.2).abs() < 0.08;
            let v = 40.0 + 120.0 * x + if disc { 80.0 } else { 0.0 } - if band { 60.0 } else { 0.0 };
            out.push(v.clamp(0.0, 255.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(color(0.0), RAMP[0]);
        assert_eq!(color(1.0), RAMP[4]);
        assert_eq!(color(0.5), RAMP[2]);
        let a = Array2::from_elem((2, 2), 3.0);
        assert_eq!(rgba(a.view()), [RAMP[0][0], RAMP[0][1], RAMP[0][2], 255].repeat(4));
    }

    #[test]
    fn meyer_view_is_square_rgba() {
        let v = meyer_profile("triangular", 0.0, 0.0, 0.5, 48).unwrap();
        assert_eq!(v.pixels().len(), 48 * 48 * 4);
        assert!(v.score() > 0.1);
        let tensor = meyer_profile("tensor", 0.3, 0.6, 0.0, 48).unwrap();
        assert!(tensor.score() <= 1e-10);
    }

    #[test]
    fn grids_and_names_agree() {
        let g = family_grids(2, 3).unwrap();
        assert_eq!(g.len(), 6 * 6);
        assert_eq!(family_names(2, 3).unwrap().split(',').count(), 6);
    }

    #[test]
    fn zero_threshold_is_lossless() {
        let img = test_image(27);
        let c = compress(&img, 27, 27, 3, 3, 3, 0.0).unwrap();
        assert!(c.rmse() < 1e-9);
        let lossy = compress(&img, 27, 27, 3, 3, 3, 20.0).unwrap();
        assert!(lossy.retained() < 1.0 && lossy.rmse() > 0.0);
    }
}
