//! Linear-time forward and inverse samplet transform.
//!
//! The forward transform sweeps the tree from the leaves upward: each node
//! applies its filter pair's transpose to the gathered inputs (point values
//! at a leaf, the children's scaling coefficients otherwise), emits samplet
//! coefficients into the node's slice and passes scaling coefficients to its
//! parent. The inverse runs the same sweep top-down with the untransposed
//! filters. Both cost `O(N)` beyond the tree itself.
//!
//! Callers pass values in original point order; the permutation into tree
//! order happens internally. Siblings are independent, so each level is
//! processed in parallel with every node writing only its own output
//! segments; results are bit-identical to the sequential sweep.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::basis::SampletBasis;
use crate::error::{Error, Result};
use crate::par;

/// Which basis a coefficient vector is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// Values at the data sites, in original point order.
    Dirac,
    /// Samplet coefficients in the basis' slice layout.
    Samplet,
}

/// Length-`N` coefficient vector tagged with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub data: Vec<f64>,
    pub tag: BasisTag,
}

impl CoefficientVector {
    pub fn dirac(data: Vec<f64>) -> Self {
        CoefficientVector {
            data,
            tag: BasisTag::Dirac,
        }
    }

    pub fn samplet(data: Vec<f64>) -> Self {
        CoefficientVector {
            data,
            tag: BasisTag::Samplet,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm2(&self.data)
    }
}

/// Splits disjoint ascending `(start, len)` segments out of `buf`, where
/// `buf[0]` sits at absolute position `pos`.
fn split_segments(
    mut buf: &mut [f64],
    mut pos: usize,
    segs: impl Iterator<Item = (usize, usize)>,
) -> Vec<&mut [f64]> {
    let mut out = Vec::new();
    for (start, len) in segs {
        let (_, rest) = buf.split_at_mut(start - pos);
        let (seg, rest) = rest.split_at_mut(len);
        out.push(seg);
        buf = rest;
        pos = start + len;
    }
    out
}

/// Per-node offsets into the scaling-coefficient arena (node id order, which
/// keeps each level and each sibling group contiguous).
fn arena_offsets(basis: &SampletBasis) -> Vec<usize> {
    let n_nodes = basis.tree().node_count();
    let mut offsets = Vec::with_capacity(n_nodes + 1);
    let mut total = 0usize;
    for id in 0..n_nodes {
        offsets.push(total);
        total += basis.filter(id).n_scaling();
    }
    offsets.push(total);
    offsets
}

/// Fast samplet transform: Dirac coefficients (original point order) to
/// samplet coefficients.
pub fn forward(basis: &SampletBasis, f_dirac: &CoefficientVector) -> Result<CoefficientVector> {
    if f_dirac.tag != BasisTag::Dirac {
        return Err(Error::Validation(
            "forward transform expects a dirac-tagged vector".into(),
        ));
    }
    let n = basis.point_count();
    if f_dirac.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: f_dirac.len(),
        });
    }
    let tree = basis.tree();
    let perm = tree.permutation();
    let mut tv = vec![0.0; n];
    for (pos, &orig) in perm.iter().enumerate() {
        tv[pos] = f_dirac.data[orig];
    }

    let offsets = arena_offsets(basis);
    let mut arena = vec![0.0; offsets[offsets.len() - 1]];
    let mut out = vec![0.0; n];

    for level in (1..=tree.depth()).rev() {
        let ids: Vec<usize> = tree.level(level).collect();
        if ids.is_empty() {
            continue;
        }
        // This level's arena region is written, deeper levels are read.
        let boundary = offsets[ids[0]];
        let deeper_start = offsets[ids[ids.len() - 1] + 1];
        let (own_arena, deeper) = arena[boundary..].split_at_mut(deeper_start - boundary);
        let deeper: &[f64] = deeper;
        let arena_segs = split_segments(
            own_arena,
            boundary,
            ids.iter().map(|&id| (offsets[id], offsets[id + 1] - offsets[id])),
        );
        let out_segs = split_segments(
            &mut out,
            0,
            ids.iter().map(|&id| {
                let s = basis.slice(id);
                (s.start, s.len)
            }),
        );
        let tv_ref: &[f64] = &tv;
        let mut tasks: Vec<(usize, &mut [f64], &mut [f64])> = ids
            .iter()
            .copied()
            .zip(arena_segs)
            .zip(out_segs)
            .map(|((id, a), o)| (id, a, o))
            .collect();
        par::for_each_mut(&mut tasks, |(id, scal_out, samp_out)| {
            let id = *id;
            let nf = basis.filter(id);
            let cluster = tree.cluster(id);
            let input: &[f64] = if cluster.is_leaf() {
                &tv_ref[cluster.begin..cluster.end]
            } else {
                let first = cluster.first_child;
                let last = first + cluster.n_children as usize;
                &deeper[offsets[first] - deeper_start..offsets[last] - deeper_start]
            };
            let mut buf = input.to_vec();
            nf.analysis(&mut buf);
            scal_out.copy_from_slice(&buf[..nf.n_scaling()]);
            samp_out.copy_from_slice(&buf[nf.n_scaling()..]);
        });
    }

    // Root: scaling coefficients precede the root samplets in its slice,
    // which is exactly the analysis output layout.
    {
        let nf = basis.filter(0);
        let cluster = tree.cluster(0);
        let mut buf: Vec<f64> = if cluster.is_leaf() {
            tv.clone()
        } else {
            let first = cluster.first_child;
            let last = first + cluster.n_children as usize;
            arena[offsets[first]..offsets[last]].to_vec()
        };
        nf.analysis(&mut buf);
        let s = basis.slice(0);
        out[s.start..s.start + s.len].copy_from_slice(&buf);
    }

    Ok(CoefficientVector::samplet(out))
}

/// Inverse samplet transform: samplet coefficients back to point values in
/// original order. `inverse(forward(f)) = f` up to roundoff.
pub fn inverse(basis: &SampletBasis, f_samplet: &CoefficientVector) -> Result<CoefficientVector> {
    if f_samplet.tag != BasisTag::Samplet {
        return Err(Error::Validation(
            "inverse transform expects a samplet-tagged vector".into(),
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
    let offsets = arena_offsets(basis);
    let mut arena = vec![0.0; offsets[offsets.len() - 1]];
    let mut tv = vec![0.0; n];
    let coeffs = &f_samplet.data;

    for level in 0..=tree.depth() {
        let ids: Vec<usize> = tree.level(level).collect();
        if ids.is_empty() {
            continue;
        }
        // Read this level's incoming scaling coefficients, write the
        // children's (all in the strictly deeper arena region).
        let write_start = offsets[ids[ids.len() - 1] + 1];
        let (read_arena, write_arena) = arena.split_at_mut(write_start);
        let read_arena: &[f64] = read_arena;
        // Internal nodes write their children's contiguous arena block,
        // leaves write their tv range.
        let mut arena_iter_pos = write_start;
        let mut tv_pos = 0usize;
        let mut targets: Vec<&mut [f64]> = Vec::with_capacity(ids.len());
        {
            let mut arena_rest = write_arena;
            let mut tv_rest = &mut tv[..];
            for &id in &ids {
                let cluster = tree.cluster(id);
                if cluster.is_leaf() {
                    let (_, rest) = tv_rest.split_at_mut(cluster.begin - tv_pos);
                    let (seg, rest) = rest.split_at_mut(cluster.count());
                    targets.push(seg);
                    tv_rest = rest;
                    tv_pos = cluster.end;
                } else {
                    let first = cluster.first_child;
                    let last = first + cluster.n_children as usize;
                    let (_, rest) = arena_rest.split_at_mut(offsets[first] - arena_iter_pos);
                    let (seg, rest) = rest.split_at_mut(offsets[last] - offsets[first]);
                    targets.push(seg);
                    arena_rest = rest;
                    arena_iter_pos = offsets[last];
                }
            }
        }
        let mut tasks: Vec<(usize, &mut [f64])> =
            ids.iter().copied().zip(targets).collect();
        par::for_each_mut(&mut tasks, |(id, target)| {
            let id = *id;
            let nf = basis.filter(id);
            let s = basis.slice(id);
            // Incoming scaling coefficients: from the coefficient vector at
            // the root, from the parent's scatter otherwise.
            let m_scal = nf.n_scaling();
            let mut buf = vec![0.0; nf.input_len()];
            if id == 0 {
                buf.copy_from_slice(&coeffs[s.start..s.start + s.len]);
            } else {
                buf[..m_scal].copy_from_slice(&read_arena[offsets[id]..offsets[id + 1]]);
                buf[m_scal..].copy_from_slice(&coeffs[s.start..s.start + s.len]);
            }
            nf.synthesis(&mut buf);
            target.copy_from_slice(&buf);
        });
    }

    let perm = tree.permutation();
    let mut data = vec![0.0; n];
    for (pos, &orig) in perm.iter().enumerate() {
        data[orig] = tv[pos];
    }
    Ok(CoefficientVector::dirac(data))
}

/// Writes a coefficient vector as `index,value` CSV rows.
pub fn write_coefficients_csv(cv: &CoefficientVector, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    let mut line = String::new();
    for (i, v) in cv.data.iter().enumerate() {
        line.clear();
        let _ = writeln!(line, "{i},{v}");
        out.write_all(line.as_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
