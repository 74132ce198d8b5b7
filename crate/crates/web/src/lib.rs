//! Browser bindings: a Riesz-potential heatmap, the logarithmic profile
//! below a cube face, and the superlevel fraction on a plane.

use fracgrad_core::fields::{indicator_cube, Grid};
use fracgrad_core::potentials::{face_integral_cube, riesz_fft};
use fracgrad_core::report::linear_fit;
use wasm_bindgen::prelude::*;

fn js(e: fracgrad_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `I_alpha chi_Q` for the unit square on an `n x n` grid over
/// `[-0.5, 1.5]^2`, row-major with `x` slowest.
#[wasm_bindgen]
pub fn riesz_heatmap(n: usize, alpha: f64) -> Result<Vec<f64>, JsError> {
    let grid = Grid::uniform(2, -0.5, 1.5, n).map_err(js)?;
    let chi = indicator_cube(&grid, &[0.0, 0.0], 1.0).map_err(js)?.indicator();
    Ok(riesz_fft(&chi, alpha).map_err(js)?.values().to_vec())
}

/// Log profile below the unit square.
#[wasm_bindgen]
pub struct Profile {
    s: Vec<f64>,
    values: Vec<f64>,
    slope: f64,
    residual: f64,
}

#[wasm_bindgen]
impl Profile {
    #[wasm_bindgen(getter)]
    pub fn s(&self) -> Vec<f64> {
        self.s.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn slope(&self) -> f64 {
        self.slope
    }

    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// `|face integral|` at `(x', -s)` for `count` offsets log-spaced between
/// `10^-decades` and `10^-1`, with the fitted slope in `ln(1/s)`.
#[wasm_bindgen]
pub fn counterexample_profile(x: f64, decades: f64, count: usize) -> Result<Profile, JsError> {
    if count < 2 || !(decades > 1.0) {
        return Err(JsError::new("need at least two offsets over more than one decade"));
    }
    let mut s = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for k in 0..count {
        let e = -1.0 - (decades - 1.0) * k as f64 / (count - 1) as f64;
        let sk = 10f64.powf(e);
        s.push(sk);
        values.push(face_integral_cube(2, &[x], sk).map_err(js)?.abs());
    }
    let ln: Vec<f64> = s.iter().map(|v| (1.0 / v).ln()).collect();
    let (slope, _, residual) = linear_fit(&ln, &values);
    Ok(Profile { s, values, slope, residual })
}

/// `|face integral|` at `samples` evenly spaced points of `[0, 1] x {-s}`
/// followed by the fraction of them above `t`.
#[wasm_bindgen]
pub fn plane_superlevel(t: f64, s: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    if samples == 0 {
        return Err(JsError::new("need at least one sample"));
    }
    let mut out = Vec::with_capacity(samples + 1);
    for k in 0..samples {
        let x = (k as f64 + 0.5) / samples as f64;
        out.push(face_integral_cube(2, &[x], s).map_err(js)?.abs());
    }
    let above = out.iter().filter(|v| **v > t).count();
    out.push(above as f64 / samples as f64);
    Ok(out)
}
