//! Local Hölder exponent estimation from samplet coefficient decay.
//!
//! A depth-first pass collects, for every root-to-leaf branch, the
//! cluster-wise Euclidean norms `e_j` of the samplet coefficients and the
//! dyadic box diameters `b_j` along the branch. The decay model
//! `e_j ~ c * b_j^(alpha + d/2)` linearizes to
//! `log e_j ~ log c + (alpha + d/2) log b_j`, whose least-squares slope is
//! obtained through a reduced QR factorization. Subtracting `d/2` and
//! clamping to `[0, q + 1]` yields the per-branch Hölder exponent; `q + 1`
//! acts as "infinity", the largest regularity the basis can certify.
//!
//! Branches whose finest coefficient norm is negligible relative to the
//! whole branch bypass the regression and are assigned the maximal exponent
//! directly (slope `q + 1 + d/2`, alpha `q + 1`).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::basis::SampletBasis;
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::par;
use crate::points::PointSet;
use crate::transform::{BasisTag, CoefficientVector};

/// Per-level coefficient norms and box diameters along one branch.
///
/// Only levels owning at least one coefficient are recorded, so `path`, `e`
/// and `b` always have equal length; branches ending in clusters too small
/// to carry samplets simply have shorter records.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    /// Leaf node the branch ends in.
    pub leaf: usize,
    /// Recorded node ids from the root towards the leaf.
    pub path: Vec<usize>,
    /// `e_j`: Euclidean norm of the node's coefficient slice.
    pub e: Vec<f64>,
    /// `b_j`: dyadic diameter of the node's box.
    pub b: Vec<f64>,
}

/// Result of fitting one branch.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    /// Fitted decay rate `alpha + d/2` (`q + 1 + d/2` on smooth branches).
    pub slope: f64,
    /// Fitted `log c` (NaN when no regression ran).
    pub intercept: f64,
    /// Number of levels entering the regression.
    pub levels_used: usize,
    /// Branch bypassed regression as smooth.
    pub smooth: bool,
    /// Fewer than two usable levels and not smooth.
    pub undefined: bool,
    /// `slope - d/2` clamped to `[0, q + 1]`; NaN when undefined.
    pub alpha: f64,
}

/// Per-point Hölder exponents plus per-branch fit diagnostics.
#[derive(Debug, Clone)]
pub struct SmoothnessChart {
    /// Estimated exponent per point, original point order.
    pub alpha: Vec<f64>,
    /// Fitted slope per point (threshold masks cut on this).
    pub slope: Vec<f64>,
    /// Smooth-shortcut flag per point.
    pub smooth: Vec<bool>,
    /// One fit per leaf, in depth-first leaf order.
    pub fits: Vec<(usize, SlopeFit)>,
}

/// Tunables for the exponent fit.
#[derive(Debug, Clone, Copy)]
pub struct SmoothnessOptions {
    /// Levels with `e_j <= eps_drop * max_j e_j` are excluded from the
    /// regression (the logarithm of an exhausted level is meaningless).
    pub eps_drop: f64,
    /// A branch is smooth when `e_last / ||e||_2` falls below this.
    pub ratio_tol: f64,
}

impl Default for SmoothnessOptions {
    fn default() -> Self {
        SmoothnessOptions {
            eps_drop: 1e-13,
            ratio_tol: 1e-12,
        }
    }
}

/// Collects one record per leaf by depth-first traversal; per-node norms are
/// computed once and shared across sibling branches.
///
/// `e_0` reads the whole root slice, scaling coefficients included (samplets
/// and scaling distributions are not distinguished on level 0); it anchors
/// the smooth-detection ratio at the signal's own scale. The slope
/// regression excludes that level, see [`fit_branch_slope`].
pub fn collect_branch_data(
    basis: &SampletBasis,
    f_samplet: &CoefficientVector,
) -> Result<Vec<BranchRecord>> {
    let norms = node_norms(basis, f_samplet)?;
    let mut records = Vec::new();
    let mut path = Vec::new();
    let mut e = Vec::new();
    let mut b = Vec::new();
    traverse(basis, &norms, 0, &mut path, &mut e, &mut b, &mut records);
    Ok(records)
}

/// Per-node coefficient-slice norms.
fn node_norms(basis: &SampletBasis, f_samplet: &CoefficientVector) -> Result<Vec<f64>> {
    if f_samplet.tag != BasisTag::Samplet {
        return Err(Error::Validation(
            "branch collection expects a samplet-tagged vector".into(),
        ));
    }
    let n = basis.point_count();
    if f_samplet.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: f_samplet.len(),
        });
    }
    let tree = basis.tree();
    let ids: Vec<usize> = (0..tree.node_count()).collect();
    Ok(par::map_collect(&ids, |&id| {
        let s = basis.slice(id);
        norm2(&f_samplet.data[s.start..s.start + s.len])
    }))
}

fn traverse(
    basis: &SampletBasis,
    norms: &[f64],
    id: usize,
    path: &mut Vec<usize>,
    e: &mut Vec<f64>,
    b: &mut Vec<f64>,
    records: &mut Vec<BranchRecord>,
) {
    let tree = basis.tree();
    let cluster = tree.cluster(id);
    let owned = basis.slice(id).len > 0;
    if owned {
        path.push(id);
        e.push(norms[id]);
        b.push(tree.level_diameter(cluster.level));
    }
    if cluster.is_leaf() {
        records.push(BranchRecord {
            leaf: id,
            path: path.clone(),
            e: e.clone(),
            b: b.clone(),
        });
    } else {
        for c in cluster.children() {
            traverse(basis, norms, c, path, e, b, records);
        }
    }
    if owned {
        path.pop();
        e.pop();
        b.pop();
    }
}

/// True iff the branch's finest coefficient norms are negligible relative
/// to the whole branch (an all-zero branch is smooth).
///
/// With three or more recorded levels the last two must both fall below
/// `ratio_tol * ||e||_2`. A single exhausted final level is not conclusive
/// on scattered data: the finest cluster of a branch through a singularity
/// frequently ends up with all its points on one side of the feature, where
/// the restriction is exactly polynomial, so `e_last` alone flags branches
/// that are anything but smooth.
pub fn detect_smooth_branch(rec: &BranchRecord, ratio_tol: f64) -> bool {
    smooth_from_norms(&rec.e, ratio_tol)
}

fn smooth_from_norms(e: &[f64], ratio_tol: f64) -> bool {
    let norm = norm2(e);
    if norm == 0.0 {
        return true;
    }
    let last = e[e.len() - 1] / norm <= ratio_tol;
    if e.len() < 3 {
        return last;
    }
    last && e[e.len() - 2] / norm <= ratio_tol
}

/// Least-squares fit of `log e_j = log c + slope * log b_j` by reduced QR.
///
/// The record's leading entry is the root level, whose norm includes the
/// scaling coefficients; those have no vanishing moments and do not follow
/// the decay model (on a mean-dominated signal `e_0` sits orders of
/// magnitude above the samplet trend), so the regression runs over the
/// levels below the root. `dim` enters only through the
/// `alpha = slope - d/2` conversion; `alpha_max = q + 1` clamps the
/// exponent.
pub fn fit_branch_slope(
    rec: &BranchRecord,
    eps_drop: f64,
    dim: usize,
    alpha_max: f64,
) -> SlopeFit {
    let mut scratch = FitScratch::default();
    fit_from_norms(&rec.e, &rec.b, eps_drop, dim, alpha_max, &mut scratch)
}

#[derive(Default)]
struct FitScratch {
    ones: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

fn fit_from_norms(
    e: &[f64],
    b: &[f64],
    eps_drop: f64,
    dim: usize,
    alpha_max: f64,
    scratch: &mut FitScratch,
) -> SlopeFit {
    let undefined = |n: usize| SlopeFit {
        slope: f64::NAN,
        intercept: f64::NAN,
        levels_used: n,
        smooth: false,
        undefined: true,
        alpha: f64::NAN,
    };
    // Root level (scaling-polluted) excluded from the regression.
    let (e, b) = if e.is_empty() { (e, b) } else { (&e[1..], &b[1..]) };
    let e_max = e.iter().fold(0.0f64, |m, &x| m.max(x));
    // Exhausted levels are excluded: their logarithms carry no signal.
    scratch.xs.clear();
    scratch.ys.clear();
    for (&ej, &bj) in e.iter().zip(b) {
        if ej > eps_drop * e_max {
            scratch.xs.push(bj.ln());
            scratch.ys.push(ej.ln());
        }
    }
    let rows = scratch.xs.len();
    if rows < 2 {
        return undefined(rows);
    }
    scratch.ones.clear();
    scratch.ones.resize(rows, 1.0);
    match crate::linalg::fit_line_qr(&mut scratch.ones, &mut scratch.xs, &mut scratch.ys) {
        Some((intercept, slope)) => SlopeFit {
            slope,
            intercept,
            levels_used: rows,
            smooth: false,
            undefined: false,
            alpha: (slope - dim as f64 / 2.0).clamp(0.0, alpha_max),
        },
        // Collinear abscissae (all kept levels share one diameter).
        None => undefined(rows),
    }
}

fn smooth_fit(dim: usize, alpha_max: f64) -> SlopeFit {
    SlopeFit {
        slope: alpha_max + dim as f64 / 2.0,
        intercept: f64::NAN,
        levels_used: 0,
        smooth: true,
        undefined: false,
        alpha: alpha_max,
    }
}

/// Runs branch collection and per-branch fitting, then broadcasts each
/// leaf's exponent to its points. Chart vectors are in original point order.
///
/// Branch data and fitting are fused into one depth-first sweep over shared
/// prefix buffers; materializing a record per leaf (as
/// [`collect_branch_data`] does) costs more in allocation than the whole
/// fit.
pub fn compute_exponents(
    basis: &SampletBasis,
    f_samplet: &CoefficientVector,
    opts: &SmoothnessOptions,
) -> Result<SmoothnessChart> {
    let norms = node_norms(basis, f_samplet)?;
    let tree = basis.tree();
    let dim = tree.dim();
    let alpha_max = (basis.degree() + 1) as f64;
    let n = basis.point_count();
    let perm = tree.permutation();

    let mut alpha = vec![f64::NAN; n];
    let mut slope = vec![f64::NAN; n];
    let mut smooth = vec![false; n];
    let mut out_fits = Vec::new();

    enum Frame {
        Enter(usize),
        Leave,
    }
    let mut e: Vec<f64> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut scratch = FitScratch::default();
    let mut stack = vec![Frame::Enter(0)];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(id) => {
                let cluster = tree.cluster(id);
                let owned = basis.slice(id).len > 0;
                if owned {
                    e.push(norms[id]);
                    b.push(tree.level_diameter(cluster.level));
                }
                if cluster.is_leaf() {
                    let fit = if smooth_from_norms(&e, opts.ratio_tol) {
                        smooth_fit(dim, alpha_max)
                    } else {
                        fit_from_norms(&e, &b, opts.eps_drop, dim, alpha_max, &mut scratch)
                    };
                    for &orig in &perm[cluster.begin..cluster.end] {
                        alpha[orig] = fit.alpha;
                        slope[orig] = fit.slope;
                        smooth[orig] = fit.smooth;
                    }
                    out_fits.push((id, fit));
                    if owned {
                        e.pop();
                        b.pop();
                    }
                } else {
                    if owned {
                        stack.push(Frame::Leave);
                    }
                    for c in cluster.children().rev() {
                        stack.push(Frame::Enter(c));
                    }
                }
            }
            Frame::Leave => {
                e.pop();
                b.pop();
            }
        }
    }
    Ok(SmoothnessChart {
        alpha,
        slope,
        smooth,
        fits: out_fits,
    })
}

/// Per-point mask: true where the fitted slope `alpha + d/2` falls below `t`
/// (undefined slopes never flag).
pub fn threshold_chart(chart: &SmoothnessChart, t: f64) -> Vec<bool> {
    chart.slope.iter().map(|&s| s < t).collect()
}

/// Chart rows: `x_1,...,x_d,value,alpha,slope,smooth_flag`.
pub fn write_chart_csv(ps: &PointSet, chart: &SmoothnessChart, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    let mut line = String::new();
    for i in 0..ps.count() {
        line.clear();
        for &c in ps.point(i) {
            let _ = write!(line, "{c},");
        }
        let _ = writeln!(
            line,
            "{},{},{},{}",
            ps.value(i),
            chart.alpha[i],
            chart.slope[i],
            u8::from(chart.smooth[i])
        );
        out.write_all(line.as_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Mask rows: `x_1,...,x_d,flag`.
pub fn write_mask_csv(ps: &PointSet, mask: &[bool], path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    let mut line = String::new();
    for i in 0..ps.count() {
        line.clear();
        for &c in ps.point(i) {
            let _ = write!(line, "{c},");
        }
        let _ = writeln!(line, "{}", u8::from(mask[i]));
        out.write_all(line.as_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Mask as an 8-bit PGM (255 = flagged) for gridded input in row-major
/// point order.
pub fn write_mask_pgm(mask: &[bool], width: usize, height: usize, path: &Path) -> Result<()> {
    if mask.len() != width * height {
        return Err(Error::SizeMismatch {
            expected: width * height,
            actual: mask.len(),
        });
    }
    let gray: Vec<u8> = mask.iter().map(|&b| if b { 255 } else { 0 }).collect();
    crate::points::save_pgm(width, height, &gray, path)
}

/// Alpha heatmap as an 8-bit PGM, linear in `[0, alpha_max]`; undefined
/// exponents map to black.
pub fn write_alpha_pgm(
    chart: &SmoothnessChart,
    width: usize,
    height: usize,
    alpha_max: f64,
    path: &Path,
) -> Result<()> {
    if chart.alpha.len() != width * height {
        return Err(Error::SizeMismatch {
            expected: width * height,
            actual: chart.alpha.len(),
        });
    }
    let gray: Vec<u8> = chart
        .alpha
        .iter()
        .map(|&a| {
            if a.is_nan() {
                0
            } else {
                (255.0 * (a / alpha_max).clamp(0.0, 1.0)).round() as u8
            }
        })
        .collect();
    crate::points::save_pgm(width, height, &gray, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::points::PointSet;
    use crate::transform::forward;
    use crate::tree::build_tree;

    fn record(e: &[f64], b: &[f64]) -> BranchRecord {
        BranchRecord {
            leaf: 0,
            path: (0..e.len()).collect(),
            e: e.to_vec(),
            b: b.to_vec(),
        }
    }

    #[test]
    fn exact_power_law_recovers_slope() {
        let b = [2.0f64, 1.0, 0.5, 0.25];
        let e: Vec<f64> = b.iter().map(|x| x.powf(1.5)).collect();
        let fit = fit_branch_slope(&record(&e, &b), 1e-13, 1, 10.0);
        assert!(!fit.undefined);
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        // The root row never enters the regression.
        assert_eq!(fit.levels_used, 3);
        // alpha = slope - d/2 for d = 1.
        assert!((fit.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eps_drop_excludes_exhausted_levels() {
        let b = [2.0, 1.0, 0.5, 0.25, 0.125];
        let e = [7.5, 1.0, 0.25, 0.0625, 1e-17];
        let fit = fit_branch_slope(&record(&e, &b), 1e-13, 1, 10.0);
        assert_eq!(fit.levels_used, 3);
        assert!((fit.slope - 2.0).abs() < 1e-10);
    }

    #[test]
    fn short_records_are_undefined() {
        let fit = fit_branch_slope(&record(&[1.0], &[1.0]), 1e-13, 1, 5.0);
        assert!(fit.undefined);
        assert!(fit.alpha.is_nan());
        let fit = fit_branch_slope(&record(&[0.0, 0.0], &[1.0, 0.5]), 1e-13, 1, 5.0);
        assert!(fit.undefined);
    }

    #[test]
    fn smooth_detection_cases() {
        assert!(detect_smooth_branch(&record(&[1.0, 1e-17], &[1.0, 0.5]), 1e-12));
        assert!(!detect_smooth_branch(
            &record(&[1.0, 0.3, 0.09], &[1.0, 0.5, 0.25]),
            1e-12
        ));
        // All-zero branch is smooth.
        assert!(detect_smooth_branch(&record(&[0.0, 0.0], &[1.0, 0.5]), 1e-12));
    }

    #[test]
    fn alpha_clamped_to_valid_range() {
        // Strongly negative slope clamps to 0.
        let b = [2.0, 1.0, 0.5, 0.25];
        let e = [1.0, 0.25, 0.5, 1.0];
        let fit = fit_branch_slope(&record(&e, &b), 1e-13, 2, 3.0);
        assert_eq!(fit.alpha, 0.0);
        // Steeper than alpha_max + d/2 clamps to alpha_max.
        let e: Vec<f64> = b.iter().map(|x| x.powi(9)).collect();
        let fit = fit_branch_slope(&record(&e, &b), 1e-13, 2, 3.0);
        assert_eq!(fit.alpha, 3.0);
    }

    fn grid_values_1d(n: usize, f: impl Fn(f64) -> f64) -> PointSet {
        let coords: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let values: Vec<f64> = coords.iter().map(|&x| f(x)).collect();
        PointSet::new(1, coords, values).unwrap()
    }

    #[test]
    fn constant_signal_is_smooth_everywhere() {
        let ps = grid_values_1d(64, |_| 3.25);
        let tree = build_tree(&ps, 4, None).unwrap();
        let basis = build_basis(tree, &ps, 1);
        let c = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec())).unwrap();
        let records = collect_branch_data(&basis, &c).unwrap();
        let n_leaves = basis.tree().leaves_dfs().len();
        assert_eq!(records.len(), n_leaves);
        // Vanishing moments: all non-root norms are zero.
        for rec in &records {
            for (k, &e) in rec.e.iter().enumerate() {
                if k > 0 {
                    assert!(e < 1e-12);
                }
            }
        }
        let chart =
            compute_exponents(&basis, &c, &SmoothnessOptions::default()).unwrap();
        for i in 0..64 {
            assert_eq!(chart.alpha[i], 2.0); // q + 1
            assert!(chart.smooth[i]);
        }
        let mask = threshold_chart(&chart, 1.75);
        assert!(mask.iter().all(|&m| !m));
    }

    #[test]
    fn polynomial_samples_get_max_alpha() {
        let q = 2u32;
        let ps = grid_values_1d(128, |x| 1.0 + x - 0.5 * x * x);
        let tree = build_tree(&ps, 6, None).unwrap();
        let basis = build_basis(tree, &ps, q);
        let c = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec())).unwrap();
        let chart = compute_exponents(&basis, &c, &SmoothnessOptions::default()).unwrap();
        for i in 0..128 {
            assert_eq!(chart.alpha[i], (q + 1) as f64);
        }
    }

    #[test]
    fn jump_signal_gets_low_alpha_at_jump() {
        // The grid spans [0.1, 1.3] so the jump at 0.5 sits at relative
        // position 1/3 of the root box: dyadic cell boundaries never come
        // near it, at any level. (On a grid spanning [0, 1] the jump falls
        // into the sample gap straddled by a cell boundary on every level
        // and is genuinely invisible in the data.)
        let n = 4096usize;
        let coords: Vec<f64> = (0..n)
            .map(|i| 0.1 + 1.2 * i as f64 / (n - 1) as f64)
            .collect();
        let values: Vec<f64> = coords
            .iter()
            .map(|&x| if x < 0.5 { 0.0 } else { 1.0 })
            .collect();
        let ps = PointSet::new(1, coords, values).unwrap();
        let tree = build_tree(&ps, 6, None).unwrap();
        let basis = build_basis(tree, &ps, 2);
        let c = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec())).unwrap();
        let chart = compute_exponents(&basis, &c, &SmoothnessOptions::default()).unwrap();
        // The point at the jump has slope near 0.5 and alpha near 0.
        let jump_index = (n - 1) / 3; // x exactly 0.5
        assert!(
            chart.slope[jump_index] > 0.2 && chart.slope[jump_index] < 0.8,
            "slope at jump = {}",
            chart.slope[jump_index]
        );
        assert!(chart.alpha[jump_index] < 0.3);
        // Far from the jump everything is flat, hence smooth.
        assert!(chart.smooth[10]);
        assert!(chart.smooth[n - 10]);
        // Thresholding flags the jump neighborhood only.
        let mask = threshold_chart(&chart, 1.75);
        assert!(mask[jump_index]);
        assert!(!mask[10]);
    }

    #[test]
    fn single_leaf_tree_gives_one_short_record() {
        let ps = grid_values_1d(3, |x| x);
        let tree = build_tree(&ps, 8, None).unwrap();
        let basis = build_basis(tree, &ps, 0);
        let c = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec())).unwrap();
        let records = collect_branch_data(&basis, &c).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].e.len(), 1);
        assert_eq!(records[0].b.len(), 1);
    }

    #[test]
    fn scale_invariance_of_slope_and_flags() {
        let n = 1024;
        let ps = grid_values_1d(n, |x| (x - 0.37).abs() + 0.1 * x);
        let tree = build_tree(&ps, 6, None).unwrap();
        let basis = build_basis(tree, &ps, 2);
        let values = ps.values().to_vec();
        let scaled: Vec<f64> = values.iter().map(|&v| 4.0 * v).collect();
        let c1 = forward(&basis, &CoefficientVector::dirac(values)).unwrap();
        let c2 = forward(&basis, &CoefficientVector::dirac(scaled)).unwrap();
        let opts = SmoothnessOptions::default();
        let chart1 = compute_exponents(&basis, &c1, &opts).unwrap();
        let chart2 = compute_exponents(&basis, &c2, &opts).unwrap();
        for ((a, b), (s1, s2)) in chart1
            .smooth
            .iter()
            .zip(&chart2.smooth)
            .zip(chart1.slope.iter().zip(&chart2.slope))
        {
            // Scaling by a power of two leaves every coefficient exact, so
            // flags match exactly and slopes to high accuracy.
            assert_eq!(a, b);
            if !s1.is_nan() {
                assert!((s1 - s2).abs() < 1e-9, "{s1} vs {s2}");
            }
        }
    }

    #[test]
    fn threshold_masks_cut_on_slope() {
        let chart = SmoothnessChart {
            alpha: vec![0.0, 1.0, 2.5],
            slope: vec![0.5, 2.0, 3.5],
            smooth: vec![false, false, true],
            fits: Vec::new(),
        };
        assert_eq!(threshold_chart(&chart, 1.75), vec![true, false, false]);
        assert_eq!(
            threshold_chart(&chart, f64::INFINITY),
            vec![true, true, true]
        );
        // Undefined slopes never flag.
        let chart = SmoothnessChart {
            alpha: vec![f64::NAN],
            slope: vec![f64::NAN],
            smooth: vec![false],
            fits: Vec::new(),
        };
        assert_eq!(threshold_chart(&chart, 1.75), vec![false]);
    }

    #[test]
    fn pgm_outputs_roundtrip_dimensions() {
        let ps = grid_values_1d(16, |x| x);
        let tree = build_tree(&ps, 2, None).unwrap();
        let basis = build_basis(tree, &ps, 0);
        let c = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec())).unwrap();
        let chart = compute_exponents(&basis, &c, &SmoothnessOptions::default()).unwrap();
        let mut p = std::env::temp_dir();
        p.push(format!("samplets_alpha_{}.pgm", std::process::id()));
        write_alpha_pgm(&chart, 4, 4, 1.0, &p).unwrap();
        let (img, h) = crate::points::load_pgm(&p).unwrap();
        assert_eq!((h.width, h.height), (4, 4));
        assert_eq!(img.count(), 16);
        std::fs::remove_file(p).ok();
    }
}
