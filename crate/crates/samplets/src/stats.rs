//! Scattered-data uniformity diagnostics.

use crate::error::{Error, Result};
use crate::par;
use crate::points::PointSet;
use crate::tree::{build_tree, nearest_distance};

/// Fill-distance estimate and separation radius of a point set. Their ratio
/// quantifies quasi-uniformity; both are diagnostics only.
#[derive(Debug, Clone, Copy)]
pub struct UniformityStats {
    /// Max over leaf cells of the distance from the cell center to the
    /// nearest sample; a lower estimate of the true fill distance.
    pub fill_distance_estimate: f64,
    /// Half the minimum pairwise distance, computed exactly through the
    /// cluster tree (no quadratic pair scan).
    pub separation_radius: f64,
}

/// Computes both statistics; requires at least two points.
pub fn uniformity_stats(ps: &PointSet) -> Result<UniformityStats> {
    if ps.count() < 2 {
        return Err(Error::Validation(
            "uniformity statistics require at least 2 points".into(),
        ));
    }
    // Single-point leaves give the finest cells for the fill estimate and
    // tight pruning for the nearest-neighbor queries.
    let tree = build_tree(ps, 1, None)?;

    let ids: Vec<usize> = (0..ps.count()).collect();
    let nn: Vec<f64> = par::map_collect(&ids, |&i| {
        nearest_distance(&tree, ps, ps.point(i), Some(i))
    });
    let min_pair = nn.iter().fold(f64::INFINITY, |m, &d| m.min(d));

    let leaves = tree.leaves_dfs();
    let fill: Vec<f64> = par::map_collect(&leaves, |&leaf| {
        let center = tree.node_box(leaf).center();
        nearest_distance(&tree, ps, &center, None)
    });
    let fill_max = fill.iter().fold(0.0f64, |m, &d| m.max(d));

    Ok(UniformityStats {
        fill_distance_estimate: fill_max,
        separation_radius: 0.5 * min_pair,
    })
}
