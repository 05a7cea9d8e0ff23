//! wasm-bindgen entry points for the static demo in `www/`.
//!
//! Each export has a plain Rust twin returning `Result<_, String>` so the logic
//! is testable natively; the exports only convert errors to `JsError`.

use relu_fim::experiment::{experiment_inputs, mae_on_inputs, scatter, MaeGroup, Representatives};
use relu_fim::{FeatureMap, LimitFn, LimitKind};
use wasm_bindgen::prelude::*;

/// Largest width the page will build; keeps a click under a second or so.
pub const MAX_WIDTH: usize = 20_000;

fn check_sizes(d: usize, m: usize, n: usize) -> Result<(), String> {
    if d < 2 || d > 64 {
        return Err(format!("d = {d}: pick 2 to 64"));
    }
    if m == 0 || m > MAX_WIDTH {
        return Err(format!("m = {m}: pick 1 to {MAX_WIDTH}"));
    }
    if n == 0 || n > 2_000 {
        return Err(format!("n = {n}: pick 1 to 2000"));
    }
    Ok(())
}

fn parse_group(name: &str) -> Result<MaeGroup, String> {
    name.parse().map_err(|e: relu_fim::Error| e.to_string())
}

/// Interleaved `(theoretical, realized)` pairs for one group.
pub fn scatter_pairs(d: usize, m: usize, n: usize, group: &str, seed: u64) -> Result<Vec<f64>, String> {
    check_sizes(d, m, n)?;
    let group = parse_group(group)?;
    let fm = FeatureMap::generate(d, m, seed).map_err(|e| e.to_string())?;
    let inputs = experiment_inputs(d, n, seed);
    let pts = scatter(&fm, group, &Representatives::default(), &inputs).map_err(|e| e.to_string())?;
    Ok(pts.iter().flat_map(|p| [p.theoretical, p.realized]).collect())
}

/// Limit function of `group` on the `(x₁, x₂)` plane, other coordinates at `offset`.
/// Row-major, `res × res`, over `[-extent, extent]²`.
pub fn limit_plane(d: usize, group: &str, res: usize, extent: f64, offset: f64) -> Result<Vec<f64>, String> {
    if !(2..=400).contains(&res) {
        return Err(format!("resolution {res}: pick 2 to 400"));
    }
    check_sizes(d, 1, 1)?;
    let kind = match parse_group(group)? {
        MaeGroup::G1 => LimitKind::Radial,
        MaeGroup::G2 => LimitKind::Coordinate(1),
        MaeGroup::G3Diag => LimitKind::DiagContrast(1),
        MaeGroup::G3OffDiag => LimitKind::CrossProduct(1, 2),
    };
    let f = LimitFn::new(kind, d).map_err(|e| e.to_string())?;
    let mut x = vec![offset; d];
    let mut out = Vec::with_capacity(res * res);
    for row in 0..res {
        x[1] = extent * (1.0 - 2.0 * row as f64 / (res - 1) as f64);
        for col in 0..res {
            x[0] = extent * (2.0 * col as f64 / (res - 1) as f64 - 1.0);
            out.push(if x.iter().all(|&v| v == 0.0) { 0.0 } else { f.eval(&x).map_err(|e| e.to_string())? });
        }
    }
    Ok(out)
}

/// MAE of `group` at each width, on one shared input set.
pub fn mae_by_width(d: usize, widths: &[u32], n: usize, group: &str, seed: u64) -> Result<Vec<f64>, String> {
    let group = parse_group(group)?;
    let inputs = experiment_inputs(d, n, seed);
    widths
        .iter()
        .map(|&m| {
            check_sizes(d, m as usize, n)?;
            let fm = FeatureMap::generate(d, m as usize, seed).map_err(|e| e.to_string())?;
            let cell = mae_on_inputs(&fm, group, &Representatives::default(), &inputs, seed, false).map_err(|e| e.to_string())?;
            Ok(cell.mae)
        })
        .collect()
}

#[wasm_bindgen(js_name = scatterPairs)]
pub fn scatter_pairs_js(d: usize, m: usize, n: usize, group: &str, seed: u32) -> Result<Vec<f64>, JsError> {
    scatter_pairs(d, m, n, group, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = limitPlane)]
pub fn limit_plane_js(d: usize, group: &str, res: usize, extent: f64, offset: f64) -> Result<Vec<f64>, JsError> {
    limit_plane(d, group, res, extent, offset).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = maeByWidth)]
pub fn mae_by_width_js(d: usize, widths: Vec<u32>, n: usize, group: &str, seed: u32) -> Result<Vec<f64>, JsError> {
    mae_by_width(d, &widths, n, group, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_is_interleaved_pairs() {
        let v = scatter_pairs(5, 300, 7, "G2", 1).unwrap();
        assert_eq!(v.len(), 14);
        let xs = experiment_inputs(5, 7, 1);
        assert_eq!(v[0], xs[0][0] / 2.0);
    }

    #[test]
    fn plane_corners_and_symmetry() {
        let p = limit_plane(4, "G2", 5, 2.0, 0.0).unwrap();
        assert_eq!(p.len(), 25);
        // Top-left corner is (x₁, x₂) = (-2, 2), so x₁/2 = -1.
        assert_eq!(p[0], -1.0);
        assert_eq!(p[12], 0.0);
        let r = limit_plane(4, "G1", 5, 2.0, 0.0).unwrap();
        assert_eq!(r[0], r[24]);
    }

    #[test]
    fn mae_shrinks_with_width() {
        let v = mae_by_width(6, &[200, 20_000], 60, "G1", 2).unwrap();
        assert!(v[1] < v[0], "{v:?}");
    }

    #[test]
    fn bad_requests_are_errors() {
        assert!(scatter_pairs(5, 0, 7, "G2", 1).is_err());
        assert!(scatter_pairs(5, 10, 7, "G9", 1).is_err());
        assert!(limit_plane(4, "G1", 1, 2.0, 0.0).is_err());
        assert!(mae_by_width(6, &[50_000], 5, "G1", 1).is_err());
    }
}
