//! Browser demo bindings: sample a synthetic signal, run the samplet
//! pipeline and hand the smoothness chart to JavaScript for plotting.
//!
//! Three operations are exposed:
//!
//! * [`analyze_signal_1d`] — 1D signal plus per-point Hölder exponents,
//!   sorted by abscissa for direct line plotting.
//! * [`analyze_grid_2d`] — 2D signal on a dyadic grid; value, exponent and
//!   slope rasters for canvas heatmaps.
//! * [`branch_decay_1d`] — the coefficient-norm decay along the branch
//!   through a chosen point, with the fitted line (the log-log view behind
//!   a single exponent estimate).
//!
//! The `_impl` functions carry the logic with plain string errors so the
//! host-side test suite can exercise them; `JsError` exists only on wasm.

use wasm_bindgen::prelude::*;

use samplets::basis::{build_basis, default_leaf_capacity, SampletBasis};
use samplets::signals::{synth, Signal};
use samplets::smoothness::{
    collect_branch_data, compute_exponents, detect_smooth_branch, fit_branch_slope,
    SmoothnessOptions,
};
use samplets::transform::{forward, CoefficientVector};
use samplets::tree::{build_tree, build_tree_gridded};

const MAX_POINTS_1D: usize = 500_000;
const MAX_GRID_LEVEL: u32 = 9;
const MAX_DEGREE: u32 = 6;

fn parse_signal(name: &str) -> Result<Signal, String> {
    name.parse::<Signal>().map_err(|e| e.to_string())
}

fn check_degree(degree: u32) -> Result<(), String> {
    if degree > MAX_DEGREE {
        return Err(format!("degree {degree} too large (max {MAX_DEGREE})"));
    }
    Ok(())
}

fn check_1d(name: &str, n: usize, degree: u32) -> Result<Signal, String> {
    let signal = parse_signal(name)?;
    if signal.dim() != 1 {
        return Err(format!("{name} is not a 1d signal"));
    }
    if !(2..=MAX_POINTS_1D).contains(&n) {
        return Err(format!("n must be in 2..={MAX_POINTS_1D}, got {n}"));
    }
    check_degree(degree)?;
    Ok(signal)
}

/// Per-point analysis of a 1D signal, sorted by `x`.
#[wasm_bindgen]
pub struct SignalAnalysis1d {
    xs: Vec<f64>,
    values: Vec<f64>,
    alphas: Vec<f64>,
    slopes: Vec<f64>,
    smooth: Vec<u8>,
    alpha_max: f64,
}

#[wasm_bindgen]
impl SignalAnalysis1d {
    pub fn count(&self) -> usize {
        self.xs.len()
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn xs(&self) -> Vec<f64> {
        self.xs.clone()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.alphas.clone()
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.slopes.clone()
    }

    pub fn smooth(&self) -> Vec<u8> {
        self.smooth.clone()
    }
}

fn analyze_signal_1d_impl(
    name: &str,
    n: usize,
    degree: u32,
    seed: u64,
) -> Result<SignalAnalysis1d, String> {
    let signal = check_1d(name, n, degree)?;
    let ps = synth(signal, n, seed).map_err(|e| e.to_string())?;
    let cap = default_leaf_capacity(1, degree);
    let tree = build_tree(&ps, cap, None).map_err(|e| e.to_string())?;
    let basis = build_basis(tree, &ps, degree);
    let coeffs = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec()))
        .map_err(|e| e.to_string())?;
    let chart = compute_exponents(&basis, &coeffs, &SmoothnessOptions::default())
        .map_err(|e| e.to_string())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| ps.point(a)[0].total_cmp(&ps.point(b)[0]));
    Ok(SignalAnalysis1d {
        xs: order.iter().map(|&i| ps.point(i)[0]).collect(),
        values: order.iter().map(|&i| ps.value(i)).collect(),
        alphas: order.iter().map(|&i| chart.alpha[i]).collect(),
        slopes: order.iter().map(|&i| chart.slope[i]).collect(),
        smooth: order.iter().map(|&i| u8::from(chart.smooth[i])).collect(),
        alpha_max: (degree + 1) as f64,
    })
}

/// Samples `name` at `n` random sites and estimates local Hölder exponents.
#[wasm_bindgen]
pub fn analyze_signal_1d(
    name: &str,
    n: usize,
    degree: u32,
    seed: u64,
) -> Result<SignalAnalysis1d, JsError> {
    analyze_signal_1d_impl(name, n, degree, seed).map_err(|m| JsError::new(&m))
}

/// Row-major rasters of a 2D signal analyzed on a `2^level` grid.
#[wasm_bindgen]
pub struct GridAnalysis2d {
    side: usize,
    values: Vec<f64>,
    alphas: Vec<f64>,
    slopes: Vec<f64>,
    alpha_max: f64,
}

#[wasm_bindgen]
impl GridAnalysis2d {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.alphas.clone()
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.slopes.clone()
    }
}

fn analyze_grid_2d_impl(name: &str, level: u32, degree: u32) -> Result<GridAnalysis2d, String> {
    let signal = parse_signal(name)?;
    if signal.dim() != 2 {
        return Err(format!("{name} is not a 2d signal"));
    }
    if !(2..=MAX_GRID_LEVEL).contains(&level) {
        return Err(format!("level must be in 2..={MAX_GRID_LEVEL}, got {level}"));
    }
    check_degree(degree)?;
    let side = 1usize << level;
    let ps = synth(signal, side * side, 0).map_err(|e| e.to_string())?;
    let tree = build_tree_gridded(&ps, level).map_err(|e| e.to_string())?;
    let basis = build_basis(tree, &ps, degree);
    let coeffs = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec()))
        .map_err(|e| e.to_string())?;
    let chart = compute_exponents(&basis, &coeffs, &SmoothnessOptions::default())
        .map_err(|e| e.to_string())?;
    Ok(GridAnalysis2d {
        side,
        values: ps.values().to_vec(),
        alphas: chart.alpha,
        slopes: chart.slope,
        alpha_max: (degree + 1) as f64,
    })
}

/// Samples `name` on a `2^level x 2^level` grid of cell centers and
/// estimates exponents through the bottom-up gridded tree.
#[wasm_bindgen]
pub fn analyze_grid_2d(name: &str, level: u32, degree: u32) -> Result<GridAnalysis2d, JsError> {
    analyze_grid_2d_impl(name, level, degree).map_err(|m| JsError::new(&m))
}

/// Coefficient decay along one branch: the evidence behind one exponent.
#[wasm_bindgen]
pub struct BranchDecay {
    diameters: Vec<f64>,
    norms: Vec<f64>,
    slope: f64,
    intercept: f64,
    alpha: f64,
    smooth: bool,
    leaf_lo: f64,
    leaf_hi: f64,
}

#[wasm_bindgen]
impl BranchDecay {
    pub fn diameters(&self) -> Vec<f64> {
        self.diameters.clone()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.norms.clone()
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn smooth(&self) -> bool {
        self.smooth
    }

    /// Leaf cell bounds, for highlighting the inspected region.
    pub fn leaf_lo(&self) -> f64 {
        self.leaf_lo
    }

    pub fn leaf_hi(&self) -> f64 {
        self.leaf_hi
    }
}

fn branch_decay_1d_impl(
    name: &str,
    n: usize,
    degree: u32,
    seed: u64,
    x0: f64,
) -> Result<BranchDecay, String> {
    let signal = check_1d(name, n, degree)?;
    let ps = synth(signal, n, seed).map_err(|e| e.to_string())?;
    let cap = default_leaf_capacity(1, degree);
    let tree = build_tree(&ps, cap, None).map_err(|e| e.to_string())?;
    let basis: SampletBasis = build_basis(tree, &ps, degree);
    let coeffs = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec()))
        .map_err(|e| e.to_string())?;
    let records = collect_branch_data(&basis, &coeffs).map_err(|e| e.to_string())?;
    let leaf = basis.tree().leaf_containing(&[x0]);
    let rec = records
        .iter()
        .find(|r| r.leaf == leaf)
        .ok_or("no branch through the requested point")?;

    let opts = SmoothnessOptions::default();
    let alpha_max = (degree + 1) as f64;
    let smooth = detect_smooth_branch(rec, opts.ratio_tol);
    let fit = fit_branch_slope(rec, opts.eps_drop, 1, alpha_max);
    let (slope, intercept, alpha) = if smooth {
        (alpha_max + 0.5, f64::NAN, alpha_max)
    } else {
        (fit.slope, fit.intercept, fit.alpha)
    };
    Ok(BranchDecay {
        diameters: rec.b.clone(),
        norms: rec.e.clone(),
        slope,
        intercept,
        alpha,
        smooth,
        leaf_lo: basis.tree().box_lower(leaf)[0],
        leaf_hi: basis.tree().box_upper(leaf)[0],
    })
}

/// Collects `(b_j, e_j)` along the branch through `x0` for a 1D signal and
/// fits the decay slope.
#[wasm_bindgen]
pub fn branch_decay_1d(
    name: &str,
    n: usize,
    degree: u32,
    seed: u64,
    x0: f64,
) -> Result<BranchDecay, JsError> {
    branch_decay_1d_impl(name, n, degree, seed, x0).map_err(|m| JsError::new(&m))
}

/// Names accepted by the analysis entry points.
#[wasm_bindgen]
pub fn signal_names() -> Vec<String> {
    Signal::ALL.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_analysis_is_sorted_and_complete() {
        let a = analyze_signal_1d_impl("f1", 5000, 2, 1).unwrap();
        assert_eq!(a.count(), 5000);
        let xs = a.xs();
        assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a.alphas().len(), 5000);
        assert!(a
            .alphas()
            .iter()
            .all(|&v| v.is_nan() || (0.0..=3.0).contains(&v)));
    }

    #[test]
    fn grid_analysis_has_square_rasters() {
        let g = analyze_grid_2d_impl("corner2d", 5, 2).unwrap();
        assert_eq!(g.side(), 32);
        assert_eq!(g.values().len(), 1024);
        assert_eq!(g.alphas().len(), 1024);
    }

    #[test]
    fn branch_decay_matches_chart() {
        let x0 = 0.55; // big jump of f1
        let d = branch_decay_1d_impl("f1", 20000, 2, 1, x0).unwrap();
        assert_eq!(d.diameters().len(), d.norms().len());
        assert!(!d.smooth());
        assert!(d.slope() > 0.2 && d.slope() < 1.0, "slope {}", d.slope());
        assert!(d.leaf_lo() <= x0 && x0 <= d.leaf_hi());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(analyze_signal_1d_impl("corner2d", 100, 2, 1).is_err());
        assert!(analyze_signal_1d_impl("f1", 1, 2, 1).is_err());
        assert!(analyze_grid_2d_impl("f1", 5, 2).is_err());
        assert!(analyze_grid_2d_impl("corner2d", 12, 2).is_err());
        assert!(branch_decay_1d_impl("nope", 100, 2, 1, 0.0).is_err());
    }
}
