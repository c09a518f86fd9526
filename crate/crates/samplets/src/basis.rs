//! Samplet bases: per-cluster orthonormal filter pairs with vanishing
//! moments.
//!
//! Every node of the cluster tree carries a moment matrix whose columns are
//! the monomial moments of the node's input distributions: the Dirac
//! distributions of its points at a leaf, the children's scaling
//! distributions at an internal node. The QR factorization of the transposed
//! moment matrix splits the inputs into `m_scal = min(n, m_q)` scaling
//! distributions, which reproduce all monomial moments up to total degree
//! `q`, and `n - m_scal` samplets, which annihilate them.
//!
//! Monomials are centered at the node-box midpoint and scaled by the half
//! edge lengths; raw monomials would be hopelessly ill-conditioned on deep
//! trees, and the affine change of variables leaves the vanishing-moment
//! space unchanged. Internal nodes never touch raw points: the children's
//! propagated moment blocks are re-expanded from child to parent coordinates
//! by the exact binomial shift, which keeps the whole construction linear in
//! the number of points.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{HouseholderQr, Mat};
use crate::par;
use crate::points::PointSet;
use crate::tree::ClusterTree;

/// Largest `N` for which [`assemble_dense_transform`] will build the full
/// `N x N` matrix.
pub const DENSE_ORACLE_CUTOFF: usize = 4096;

/// Default tree leaf capacity for a basis of degree `q`: `4 * m_q`.
///
/// A cluster with barely `m_q` points is reproduced almost exactly by
/// degree-`q` polynomials, so its samplet coefficients measure interpolation
/// residual instead of regularity; such trailing levels collapse far below
/// the branch trend and bias the slope fits. Four times the moment count
/// keeps at least two moment counts' worth of points behind every level
/// that carries samplets.
pub fn default_leaf_capacity(dim: usize, degree: u32) -> usize {
    4 * MonomialBasis::new(dim, degree).len()
}

/// Multi-indices of total degree at most `q` in `d` variables, in graded
/// order (degree ascending, lexicographically descending within a degree:
/// `1; x, y; x^2, xy, y^2; ...`).
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    dim: usize,
    degree: u32,
    /// Flattened exponents, `dim` entries per monomial.
    exps: Vec<u32>,
    /// Binomial coefficients up to `degree`.
    binom: Vec<f64>,
}

impl MonomialBasis {
    pub fn new(dim: usize, degree: u32) -> Self {
        let mut exps = Vec::new();
        let mut alpha = vec![0u32; dim];
        for g in 0..=degree {
            emit_grade(&mut exps, &mut alpha, 0, g);
        }
        let w = degree as usize + 1;
        let mut binom = vec![0.0; w * w];
        for i in 0..w {
            binom[i * w] = 1.0;
            for j in 1..=i {
                binom[i * w + j] = binom[(i - 1) * w + j - 1]
                    + if j < i { binom[(i - 1) * w + j] } else { 0.0 };
            }
        }
        MonomialBasis {
            dim,
            degree,
            exps,
            binom,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `m_q = C(q + d, d)`.
    pub fn len(&self) -> usize {
        self.exps.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn exponent(&self, row: usize) -> &[u32] {
        &self.exps[row * self.dim..(row + 1) * self.dim]
    }

    fn choose(&self, n: u32, k: u32) -> f64 {
        let w = self.degree as usize + 1;
        self.binom[n as usize * w + k as usize]
    }

    /// Evaluates all monomials at `u`, writing `m_q` values into `out`.
    pub fn eval_into(&self, u: &[f64], out: &mut [f64]) {
        // Power table per axis, then products per multi-index.
        let q = self.degree as usize;
        let d = self.dim;
        let mut pows = vec![1.0; d * (q + 1)];
        for m in 0..d {
            for e in 1..=q {
                pows[m * (q + 1) + e] = pows[m * (q + 1) + e - 1] * u[m];
            }
        }
        for (row, slot) in out.iter_mut().enumerate().take(self.len()) {
            let alpha = self.exponent(row);
            let mut v = 1.0;
            for m in 0..d {
                v *= pows[m * (q + 1) + alpha[m] as usize];
            }
            *slot = v;
        }
    }
}

fn emit_grade(exps: &mut Vec<u32>, alpha: &mut [u32], axis: usize, remaining: u32) {
    if axis + 1 == alpha.len() {
        alpha[axis] = remaining;
        exps.extend_from_slice(alpha);
        return;
    }
    for e in (0..=remaining).rev() {
        alpha[axis] = e;
        emit_grade(exps, alpha, axis + 1, remaining - e);
    }
}

/// Moment matrix of arbitrary weighted Dirac points against the centered,
/// scaled monomials: entry `(alpha, l) = w_l * ((x_l - center) / scale)^alpha`.
///
/// With unit weights this is the leaf moment matrix; tests use it with
/// expanded distribution weights as an independent route to the propagated
/// blocks.
pub fn moment_matrix_at(
    mono: &MonomialBasis,
    points: &[f64],
    weights: Option<&[f64]>,
    center: &[f64],
    scale: &[f64],
) -> Mat {
    let d = mono.dim();
    let n = points.len() / d;
    let mq = mono.len();
    let mut m = Mat::zeros(mq, n);
    let mut u = vec![0.0; d];
    for l in 0..n {
        let p = &points[l * d..(l + 1) * d];
        for mm in 0..d {
            u[mm] = (p[mm] - center[mm]) / scale[mm];
        }
        let w = weights.map_or(1.0, |ws| ws[l]);
        let col = m.col_mut(l);
        mono.eval_into(&u, col);
        if w != 1.0 {
            for v in col.iter_mut() {
                *v *= w;
            }
        }
    }
    m
}

/// Per-cluster orthonormal filter pair realizing the two-scale relation,
/// in dense form.
///
/// Columns of `[scaling | samplet]` are orthonormal; every samplet column is
/// orthogonal to every row of the node's moment matrix.
#[derive(Debug, Clone)]
pub struct FilterPair {
    /// `n x m_scal`.
    pub scaling: Mat,
    /// `n x m_samp`.
    pub samplet: Mat,
}

impl FilterPair {
    pub fn input_len(&self) -> usize {
        self.scaling.rows()
    }

    pub fn n_scaling(&self) -> usize {
        self.scaling.cols()
    }

    pub fn n_samplets(&self) -> usize {
        self.samplet.cols()
    }
}

/// Arena storage for every node's filter in compact Householder form, plus
/// the propagated scaling-moment blocks.
///
/// The dense orthogonal factors are never stored: the transform only ever
/// applies them, which costs `O(n * m_q)` through the reflectors instead of
/// the `O(n^2)` dense product (and `O(n^2 m_q)` to materialize). All
/// per-node payloads live in a handful of flat buffers sized up front from
/// the tree structure; hundreds of thousands of individually allocated
/// little matrices cost roughly an order of magnitude more wall time than
/// the factorizations they hold.
#[derive(Debug)]
pub struct FilterStore {
    mq: usize,
    meta: Vec<FilterMeta>,
    /// Factored `n x m_q` blocks (reflectors + R), column-major.
    qr: Vec<f64>,
    /// Reflector scalings, `m_scal` per node.
    tau: Vec<f64>,
    /// Sign flips making `R`'s diagonal nonnegative, `m_scal` per node.
    flip: Vec<bool>,
    /// Propagated scaling-moment blocks, `m_q x m_scal` column-major.
    mom: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct FilterMeta {
    n: u32,
    m_scal: u32,
    qr_off: usize,
    tau_off: usize,
    mom_off: usize,
}

impl FilterStore {
    pub fn filter(&self, id: usize) -> FilterRef<'_> {
        FilterRef { store: self, id }
    }

    fn meta(&self, id: usize) -> &FilterMeta {
        &self.meta[id]
    }

    fn qr_slice(&self, id: usize) -> &[f64] {
        let m = self.meta(id);
        &self.qr[m.qr_off..m.qr_off + m.n as usize * self.mq]
    }

    fn tau_slice(&self, id: usize) -> &[f64] {
        let m = self.meta(id);
        &self.tau[m.tau_off..m.tau_off + m.m_scal as usize]
    }

    fn flip_slice(&self, id: usize) -> &[bool] {
        let m = self.meta(id);
        &self.flip[m.tau_off..m.tau_off + m.m_scal as usize]
    }

    fn mom_slice(&self, id: usize) -> &[f64] {
        let m = self.meta(id);
        &self.mom[m.mom_off..m.mom_off + self.mq * m.m_scal as usize]
    }
}

/// One node's filter: a view into the [`FilterStore`].
#[derive(Clone, Copy)]
pub struct FilterRef<'a> {
    store: &'a FilterStore,
    id: usize,
}

impl FilterRef<'_> {
    pub fn input_len(&self) -> usize {
        self.store.meta(self.id).n as usize
    }

    pub fn n_scaling(&self) -> usize {
        self.store.meta(self.id).m_scal as usize
    }

    pub fn n_samplets(&self) -> usize {
        self.input_len() - self.n_scaling()
    }

    /// Analysis step: `v` holds the gathered inputs on entry and
    /// `[scaling coefficients | samplet coefficients]` on exit.
    pub(crate) fn analysis(&self, v: &mut [f64]) {
        let n = self.input_len();
        crate::linalg::householder_apply_qt_raw(
            self.store.qr_slice(self.id),
            n,
            self.store.tau_slice(self.id),
            v,
        );
        for (k, &f) in self.store.flip_slice(self.id).iter().enumerate() {
            if f {
                v[k] = -v[k];
            }
        }
    }

    /// Synthesis step: inverse of [`FilterRef::analysis`].
    pub(crate) fn synthesis(&self, v: &mut [f64]) {
        for (k, &f) in self.store.flip_slice(self.id).iter().enumerate() {
            if f {
                v[k] = -v[k];
            }
        }
        let n = self.input_len();
        crate::linalg::householder_apply_q_raw(
            self.store.qr_slice(self.id),
            n,
            self.store.tau_slice(self.id),
            v,
        );
    }

    /// Materializes the dense filter pair.
    pub fn dense(&self) -> FilterPair {
        let n = self.input_len();
        let m_scal = self.n_scaling();
        let qr = self.store.qr_slice(self.id);
        let tau = self.store.tau_slice(self.id);
        let flip = self.store.flip_slice(self.id);
        let mut scaling = Mat::zeros(n, m_scal);
        for c in 0..m_scal {
            let col = scaling.col_mut(c);
            col[c] = 1.0;
            crate::linalg::householder_apply_q_raw(qr, n, tau, col);
            if flip[c] {
                for v in col.iter_mut() {
                    *v = -*v;
                }
            }
        }
        let mut samplet = Mat::zeros(n, n - m_scal);
        for c in m_scal..n {
            let col = samplet.col_mut(c - m_scal);
            col[c] = 1.0;
            crate::linalg::householder_apply_q_raw(qr, n, tau, col);
        }
        FilterPair { scaling, samplet }
    }
}

/// QR factorization of the transposed moment matrix with nonnegative
/// diagonal; returns the dense filter pair and the node's outgoing
/// scaling-moment block (`m_q x m_scal`).
pub fn compute_filters(moment: &Mat) -> (FilterPair, Mat) {
    let mq = moment.rows();
    let n = moment.cols();
    let m_scal = n.min(mq);
    let qr = HouseholderQr::factor(moment.transpose());
    // Sign convention: a negative diagonal entry of R flips the matching
    // column of Q and row of R.
    let flip: Vec<bool> = (0..m_scal).map(|k| qr.r_entry(k, k) < 0.0).collect();
    let mut scaling = Mat::zeros(n, m_scal);
    for c in 0..m_scal {
        let col = scaling.col_mut(c);
        col[c] = 1.0;
        qr.apply_q(col);
        if flip[c] {
            for v in col.iter_mut() {
                *v = -*v;
            }
        }
    }
    let mut samplet = Mat::zeros(n, n - m_scal);
    for c in m_scal..n {
        let col = samplet.col_mut(c - m_scal);
        col[c] = 1.0;
        qr.apply_q(col);
    }
    // Moments of the new scaling distributions: M Q_scal = R^T restricted to
    // its first m_scal columns.
    let mut out_moments = Mat::zeros(mq, m_scal);
    for k in 0..m_scal {
        let sign = if flip[k] { -1.0 } else { 1.0 };
        for a in k..mq {
            out_moments[(a, k)] = sign * qr.r_entry(k, a);
        }
    }
    (FilterPair { scaling, samplet }, out_moments)
}

/// Coefficient slice owned by one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slice {
    pub start: usize,
    /// Samplet coefficients plus, at the root, the scaling coefficients.
    pub len: usize,
}

/// A samplet basis over a cluster tree.
///
/// The coefficient vector has length `N`. Each node owns a contiguous slice
/// holding its samplet coefficients; the root slice additionally holds the
/// `m_scal` top-level scaling coefficients, in front of the root samplets.
/// Slices are assigned depth-first (node before its descendants), so the
/// coefficients of any subtree are contiguous as well.
#[derive(Debug)]
pub struct SampletBasis {
    tree: ClusterTree,
    degree: u32,
    mono: MonomialBasis,
    store: FilterStore,
    slices: Vec<Slice>,
    /// Node ids in slice (depth-first) order, for coefficient lookup.
    dfs_order: Vec<usize>,
}

impl SampletBasis {
    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &MonomialBasis {
        &self.mono
    }

    pub fn point_count(&self) -> usize {
        self.tree.point_count()
    }

    pub fn filter(&self, node: usize) -> FilterRef<'_> {
        self.store.filter(node)
    }

    /// Propagated `m_q x m_scal` scaling-moment block of a node, in
    /// node-local coordinates (materialized copy; kept for testing).
    pub fn scaling_moments(&self, node: usize) -> Mat {
        let m_scal = self.store.meta(node).m_scal as usize;
        Mat::from_col_major(
            self.store.mq,
            m_scal,
            self.store.mom_slice(node).to_vec(),
        )
    }

    pub fn slice(&self, node: usize) -> Slice {
        self.slices[node]
    }

    /// Number of samplets owned by `node` (excluding root scaling).
    pub fn n_samplets(&self, node: usize) -> usize {
        self.store.filter(node).n_samplets()
    }

    /// Monomial centering for a node: box midpoint and half edge lengths.
    pub fn node_center_scale(&self, node: usize) -> (Vec<f64>, Vec<f64>) {
        node_center_scale(&self.tree, node)
    }

    /// Maps a coefficient index to its owning node and the local offset
    /// within that node's slice.
    pub fn coefficient_owner(&self, k: usize) -> Result<(usize, usize)> {
        let n = self.point_count();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
        // Slices in DFS order have ascending starts; binary search for the
        // last slice starting at or before k. Nodes without coefficients
        // share a start with their successor, so walk back over empties.
        let pos = self
            .dfs_order
            .partition_point(|&id| self.slices[id].start <= k);
        for &id in self.dfs_order[..pos].iter().rev() {
            let s = self.slices[id];
            if s.len > 0 {
                debug_assert!(k >= s.start && k < s.start + s.len);
                return Ok((id, k - s.start));
            }
        }
        unreachable!("coefficient {k} not covered by any slice");
    }
}

fn node_center_scale(tree: &ClusterTree, node: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = tree.box_lower(node);
    let hi = tree.box_upper(node);
    let center: Vec<f64> = lo.iter().zip(hi).map(|(l, u)| 0.5 * (l + u)).collect();
    let scale: Vec<f64> = lo
        .iter()
        .zip(hi)
        .map(|(l, u)| (0.5 * (u - l)).max(1e-300))
        .collect();
    (center, scale)
}

/// Leaf moment matrix: unit-weight Dirac moments in node-local coordinates
/// (direct-evaluation route, used by tests against the propagated blocks).
pub fn leaf_moment_matrix(
    tree: &ClusterTree,
    ps: &PointSet,
    mono: &MonomialBasis,
    node: usize,
) -> Mat {
    let c = tree.cluster(node);
    let d = tree.dim();
    let (center, scale) = node_center_scale(tree, node);
    let mut pts = Vec::with_capacity(c.count() * d);
    for &orig in &tree.permutation()[c.begin..c.end] {
        pts.extend_from_slice(ps.point(orig));
    }
    moment_matrix_at(mono, &pts, None, &center, &scale)
}

/// Transfer matrix taking child-local monomial moments to parent-local ones
/// via the exact binomial re-expansion of `(a + r u)^beta`.
fn recenter_transfer(
    mono: &MonomialBasis,
    child_center: &[f64],
    child_scale: &[f64],
    parent_center: &[f64],
    parent_scale: &[f64],
) -> Mat {
    let d = mono.dim();
    let q = mono.degree() as usize;
    let mq = mono.len();
    let mut a = vec![0.0; d];
    let mut r = vec![0.0; d];
    for m in 0..d {
        a[m] = (child_center[m] - parent_center[m]) / parent_scale[m];
        r[m] = child_scale[m] / parent_scale[m];
    }
    // Power tables.
    let mut apow = vec![1.0; d * (q + 1)];
    let mut rpow = vec![1.0; d * (q + 1)];
    for m in 0..d {
        for e in 1..=q {
            apow[m * (q + 1) + e] = apow[m * (q + 1) + e - 1] * a[m];
            rpow[m * (q + 1) + e] = rpow[m * (q + 1) + e - 1] * r[m];
        }
    }
    let mut t = Mat::zeros(mq, mq);
    for beta_i in 0..mq {
        let beta = mono.exponent(beta_i);
        'gamma: for gamma_i in 0..mq {
            let gamma = mono.exponent(gamma_i);
            let mut coeff = 1.0;
            for m in 0..d {
                if gamma[m] > beta[m] {
                    continue 'gamma;
                }
                coeff *= mono.choose(beta[m], gamma[m])
                    * apow[m * (q + 1) + (beta[m] - gamma[m]) as usize]
                    * rpow[m * (q + 1) + gamma[m] as usize];
            }
            t[(beta_i, gamma_i)] = coeff;
        }
    }
    t
}

/// Splits disjoint ascending `(off, len)` segments out of `buf`, where
/// `buf[0]` sits at absolute position `pos`.
fn split_segments<'a, T>(
    mut buf: &'a mut [T],
    mut pos: usize,
    segs: impl Iterator<Item = (usize, usize)>,
) -> Vec<&'a mut [T]> {
    let mut out = Vec::new();
    for (off, len) in segs {
        let (_, rest) = buf.split_at_mut(off - pos);
        let (seg, rest) = rest.split_at_mut(len);
        out.push(seg);
        buf = rest;
        pos = off + len;
    }
    out
}

/// Builds the samplet basis with `q + 1 = degree + 1` vanishing moments by a
/// bottom-up sweep from the leaves to the root.
///
/// Input counts and filter shapes follow from the tree structure alone, so
/// all storage is laid out first and the sweep fills disjoint arena segments
/// per node, in parallel within each level.
pub fn build_basis(tree: ClusterTree, ps: &PointSet, degree: u32) -> SampletBasis {
    assert_eq!(tree.point_count(), ps.count(), "tree/point-set mismatch");
    assert_eq!(tree.dim(), ps.dim(), "tree/point-set dimension mismatch");
    let mono = MonomialBasis::new(tree.dim(), degree);
    let mq = mono.len();
    let n_nodes = tree.node_count();

    // Structural pass: children carry larger ids than their parents, so one
    // reverse sweep yields every node's input count.
    let mut meta = vec![FilterMeta::default(); n_nodes];
    for id in (0..n_nodes).rev() {
        let cluster = tree.cluster(id);
        let n = if cluster.is_leaf() {
            cluster.count()
        } else {
            cluster.children().map(|ch| meta[ch].m_scal as usize).sum()
        };
        meta[id].n = n as u32;
        meta[id].m_scal = n.min(mq) as u32;
    }
    let mut qr_total = 0usize;
    let mut tau_total = 0usize;
    let mut mom_total = 0usize;
    for m in meta.iter_mut() {
        m.qr_off = qr_total;
        m.tau_off = tau_total;
        m.mom_off = mom_total;
        qr_total += m.n as usize * mq;
        tau_total += m.m_scal as usize;
        mom_total += mq * m.m_scal as usize;
    }
    let mut store = FilterStore {
        mq,
        meta,
        qr: vec![0.0; qr_total],
        tau: vec![0.0; tau_total],
        flip: vec![false; tau_total],
        mom: vec![0.0; mom_total],
    };

    // Deepest level first; leaves on shallower levels are reached before
    // their (nonexistent) children could be.
    for level in (0..=tree.depth()).rev() {
        let ids = tree.level(level);
        let last = ids.end - 1;
        let FilterStore {
            meta,
            qr,
            tau,
            flip,
            mom,
            ..
        } = &mut store;
        let meta: &[FilterMeta] = meta;
        let level_mom_end = meta[last].mom_off + mq * meta[last].m_scal as usize;
        // This level's moment blocks are written, the children's (strictly
        // deeper, hence higher offsets) are read.
        let (mom_here, mom_deeper) = mom.split_at_mut(level_mom_end);
        let mom_deeper: &[f64] = mom_deeper;
        let qr_segs = split_segments(
            &mut qr[..],
            0,
            ids.clone().map(|id| (meta[id].qr_off, meta[id].n as usize * mq)),
        );
        let tau_segs = split_segments(
            &mut tau[..],
            0,
            ids.clone().map(|id| (meta[id].tau_off, meta[id].m_scal as usize)),
        );
        let flip_segs = split_segments(
            &mut flip[..],
            0,
            ids.clone().map(|id| (meta[id].tau_off, meta[id].m_scal as usize)),
        );
        let mom_segs = split_segments(
            mom_here,
            0,
            ids.clone()
                .map(|id| (meta[id].mom_off, mq * meta[id].m_scal as usize)),
        );
        let mut tasks: Vec<(usize, &mut [f64], &mut [f64], &mut [bool], &mut [f64])> = ids
            .zip(qr_segs)
            .zip(tau_segs)
            .zip(flip_segs)
            .zip(mom_segs)
            .map(|((((id, q), t), f), m)| (id, q, t, f, m))
            .collect();
        par::for_each_mut(&mut tasks, |(id, qr, tau, flip, mom)| {
            let id = *id;
            let n = meta[id].n as usize;
            let m_scal = meta[id].m_scal as usize;
            let cluster = tree.cluster(id);
            // Assemble the transposed moment matrix (n x m_q, column-major)
            // in place.
            if cluster.is_leaf() {
                assemble_leaf_transposed(&tree, ps, &mono, id, qr);
            } else {
                let (pc, psc) = node_center_scale(&tree, id);
                let mut base = 0usize;
                for ch in cluster.children() {
                    let (cc, csc) = node_center_scale(&tree, ch);
                    let t = recenter_transfer(&mono, &cc, &csc, &pc, &psc);
                    let ms_ch = meta[ch].m_scal as usize;
                    let block =
                        &mom_deeper[meta[ch].mom_off - level_mom_end
                            ..meta[ch].mom_off - level_mom_end + mq * ms_ch];
                    for k in 0..ms_ch {
                        let bcol = &block[k * mq..(k + 1) * mq];
                        for a in 0..mq {
                            let mut s = 0.0;
                            for (g, &bg) in bcol.iter().enumerate() {
                                s += t[(a, g)] * bg;
                            }
                            qr[a * n + base + k] = s;
                        }
                    }
                    base += ms_ch;
                }
                debug_assert_eq!(base, n);
            }
            crate::linalg::householder_factor_raw(qr, n, mq, tau);
            // Sign convention plus the outgoing scaling-moment block
            // (R^T restricted to its first m_scal columns): r(k, a) sits at
            // qr[a * n + k].
            for k in 0..m_scal {
                let f = qr[k * n + k] < 0.0;
                flip[k] = f;
                let sign = if f { -1.0 } else { 1.0 };
                for a in k..mq {
                    mom[k * mq + a] = sign * qr[a * n + k];
                }
            }
        });
    }

    // Depth-first slice layout: a node's coefficients, then its subtrees.
    let mut slices = vec![Slice { start: 0, len: 0 }; n_nodes];
    let mut dfs_order = Vec::with_capacity(n_nodes);
    let mut cursor = 0usize;
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        let m = &store.meta[id];
        let own = (m.n - m.m_scal) as usize + if id == 0 { m.m_scal as usize } else { 0 };
        slices[id] = Slice {
            start: cursor,
            len: own,
        };
        dfs_order.push(id);
        cursor += own;
        for c in tree.cluster(id).children().rev() {
            stack.push(c);
        }
    }
    debug_assert_eq!(cursor, tree.point_count());

    SampletBasis {
        tree,
        degree,
        mono,
        store,
        slices,
        dfs_order,
    }
}

/// Writes the transposed leaf moment matrix (`n x m_q`, column-major) into
/// `out`: entry `(l, alpha)` is monomial `alpha` at the leaf's `l`-th point
/// in node-local coordinates.
fn assemble_leaf_transposed(
    tree: &ClusterTree,
    ps: &PointSet,
    mono: &MonomialBasis,
    node: usize,
    out: &mut [f64],
) {
    let c = tree.cluster(node);
    let d = tree.dim();
    let n = c.count();
    let (center, scale) = node_center_scale(tree, node);
    let mut u = vec![0.0; d];
    let mut vals = vec![0.0; mono.len()];
    for (l, &orig) in tree.permutation()[c.begin..c.end].iter().enumerate() {
        for (mm, &x) in ps.point(orig).iter().enumerate() {
            u[mm] = (x - center[mm]) / scale[mm];
        }
        mono.eval_into(&u, &mut vals);
        for (a, &v) in vals.iter().enumerate() {
            out[a * n + l] = v;
        }
    }
}

/// Dirac-weight expansion of one basis distribution.
#[derive(Debug, Clone)]
pub struct SampletWeights {
    /// Tree position of the first weight (the owning cluster's `begin`).
    pub first: usize,
    /// Weights over the owning cluster's contiguous point range, in tree
    /// order.
    pub weights: Vec<f64>,
}

impl SampletWeights {
    /// Scatters into a dense length-`n` vector indexed by tree position.
    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        out[self.first..self.first + self.weights.len()].copy_from_slice(&self.weights);
        out
    }
}

/// Expands the `k`-th basis distribution (in coefficient layout) into its
/// Dirac weights by cascading filter products down the tree.
pub fn samplet_weights(basis: &SampletBasis, k: usize) -> Result<SampletWeights> {
    let (node, offset) = basis.coefficient_owner(k)?;
    let nf = basis.filter(node);
    // Coefficient layout within a node's slice matches the synthesis input
    // layout [scaling | samplet]; non-root slices hold samplets only.
    let col_index = if node == 0 {
        offset
    } else {
        nf.n_scaling() + offset
    };
    let mut column = vec![0.0; nf.input_len()];
    column[col_index] = 1.0;
    nf.synthesis(&mut column);
    let cluster = basis.tree().cluster(node);
    let mut weights = vec![0.0; cluster.count()];
    expand_inputs(basis, node, &column, cluster.begin, &mut weights);
    Ok(SampletWeights {
        first: cluster.begin,
        weights,
    })
}

/// Dirac-weight expansion of the `k`-th scaling distribution of a node
/// (test and oracle use).
pub fn scaling_weights(basis: &SampletBasis, node: usize, k: usize) -> SampletWeights {
    let nf = basis.filter(node);
    let mut column = vec![0.0; nf.input_len()];
    column[k] = 1.0;
    nf.synthesis(&mut column);
    let cluster = basis.tree().cluster(node);
    let mut weights = vec![0.0; cluster.count()];
    expand_inputs(basis, node, &column, cluster.begin, &mut weights);
    SampletWeights {
        first: cluster.begin,
        weights,
    }
}

/// Pushes a coefficient vector over a node's inputs down to Dirac weights.
/// `out` covers the node's point range; `range_start` is its tree position.
fn expand_inputs(
    basis: &SampletBasis,
    node: usize,
    coeffs: &[f64],
    range_start: usize,
    out: &mut [f64],
) {
    let cluster = basis.tree().cluster(node);
    if cluster.is_leaf() {
        // Inputs are the Dirac distributions of the leaf points themselves.
        let local = cluster.begin - range_start;
        for (l, &w) in coeffs.iter().enumerate() {
            out[local + l] += w;
        }
        return;
    }
    let mut offset = 0usize;
    for ch in cluster.children() {
        let nf = basis.filter(ch);
        let n_scal = nf.n_scaling();
        // Child scaling distributions expand through the child's own filter:
        // synthesis of [scaling coefficients | 0].
        let mut expanded = vec![0.0; nf.input_len()];
        expanded[..n_scal].copy_from_slice(&coeffs[offset..offset + n_scal]);
        offset += n_scal;
        nf.synthesis(&mut expanded);
        expand_inputs(basis, ch, &expanded, range_start, out);
    }
    debug_assert_eq!(offset, coeffs.len());
}

/// Assembles the dense transform matrix `T` with `T[k, .] =
/// samplet_weights(k)` over tree-ordered points, so that `T f = f_Sigma` for
/// tree-ordered values `f`. Testing oracle; refuses `N > DENSE_ORACLE_CUTOFF`.
pub fn assemble_dense_transform(basis: &SampletBasis) -> Result<Mat> {
    let n = basis.point_count();
    if n > DENSE_ORACLE_CUTOFF {
        return Err(Error::OracleCutoff {
            n,
            cutoff: DENSE_ORACLE_CUTOFF,
        });
    }
    let mut t = Mat::zeros(n, n);
    for k in 0..n {
        let w = samplet_weights(basis, k)?;
        for (l, &v) in w.weights.iter().enumerate() {
            t[(k, w.first + l)] = v;
        }
    }
    Ok(t)
}

/// Binary dump of the per-node filters for cross-implementation comparison:
/// for each node, little-endian `u64` node id, input count `n`, `m_scal`,
/// `m_samp`, then the scaling and samplet matrices row-major as little-endian
/// `f64`.
pub fn write_filter_dump(basis: &SampletBasis, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    let mut emit = |bytes: &[u8]| out.write_all(bytes).map_err(io_err);
    for id in 0..basis.tree.node_count() {
        let fp = basis.filter(id).dense();
        let (n, ms, mw) = (fp.input_len(), fp.n_scaling(), fp.n_samplets());
        for v in [id as u64, n as u64, ms as u64, mw as u64] {
            emit(&v.to_le_bytes())?;
        }
        for mat in [&fp.scaling, &fp.samplet] {
            for r in 0..mat.rows() {
                for c in 0..mat.cols() {
                    emit(&mat[(r, c)].to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::tree::build_tree;

    fn point_set_1d(xs: &[f64]) -> PointSet {
        PointSet::new(1, xs.to_vec(), vec![0.0; xs.len()]).unwrap()
    }

    fn random_points(dim: usize, n: usize, seed: u64) -> PointSet {
        let mut rng = crate::rng::Rng::seed_from(seed);
        let coords: Vec<f64> = (0..n * dim).map(|_| rng.unit_f64()).collect();
        let values: Vec<f64> = (0..n).map(|_| rng.unit_f64()).collect();
        PointSet::new(dim, coords, values).unwrap()
    }

    #[test]
    fn monomial_count_and_order() {
        let m = MonomialBasis::new(2, 2);
        assert_eq!(m.len(), 6);
        let rows: Vec<&[u32]> = (0..6).map(|i| m.exponent(i)).collect();
        assert_eq!(
            rows,
            vec![
                &[0u32, 0][..],
                &[1, 0],
                &[0, 1],
                &[2, 0],
                &[1, 1],
                &[0, 2]
            ]
        );
        assert_eq!(MonomialBasis::new(3, 4).len(), 35);
        assert_eq!(MonomialBasis::new(1, 0).len(), 1);
    }

    #[test]
    fn leaf_moment_matrix_matches_hand_case() {
        // Leaf {0, 1} in 1D with q = 1: centered coords {-1, +1}, rows
        // [1, 1] and [-1, 1].
        let ps = point_set_1d(&[0.0, 1.0]);
        let tree = build_tree(&ps, 2, None).unwrap();
        let mono = MonomialBasis::new(1, 1);
        let m = leaf_moment_matrix(&tree, &ps, &mono, 0);
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 2);
        assert!((m[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((m[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((m[(1, 0)] + 1.0).abs() < 1e-15);
        assert!((m[(1, 1)] - 1.0).abs() < 1e-15);

        // q = 0: a single row of ones, any leaf.
        let mono = MonomialBasis::new(1, 0);
        let m = leaf_moment_matrix(&tree, &ps, &mono, 0);
        assert_eq!(m.rows(), 1);
        assert_eq!(m.col(0), &[1.0]);
        assert_eq!(m.col(1), &[1.0]);
    }

    #[test]
    fn haar_filters() {
        // n = 2, q = 0: the Haar pair up to column sign.
        let m = Mat::from_col_major(1, 2, vec![1.0, 1.0]);
        let (fp, om) = compute_filters(&m);
        assert_eq!(fp.n_scaling(), 1);
        assert_eq!(fp.n_samplets(), 1);
        let s = 1.0 / 2.0f64.sqrt();
        assert!((fp.scaling[(0, 0)] - s).abs() < 1e-14);
        assert!((fp.scaling[(1, 0)] - s).abs() < 1e-14);
        assert!((fp.samplet[(0, 0)].abs() - s).abs() < 1e-14);
        assert!((fp.samplet[(1, 0)].abs() - s).abs() < 1e-14);
        assert!((fp.samplet[(0, 0)] + fp.samplet[(1, 0)]).abs() < 1e-14);
        // Outgoing moment: sqrt(2) (nonnegative by the sign convention).
        assert!((om[(0, 0)] - 2.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn filters_match_gram_schmidt_oracle() {
        // n = 4 leaf, d = 1, q = 1: 2 scaling + 2 samplet columns; samplet
        // columns annihilate 1 and x. Oracle: modified Gram-Schmidt on
        // [moment rows | completion] built independently of the QR path.
        let xs = [-1.0, -0.25, 0.4, 1.0];
        let mono = MonomialBasis::new(1, 1);
        let m = moment_matrix_at(&mono, &xs, None, &[0.0], &[1.0]);
        let (fp, _) = compute_filters(&m);
        assert_eq!(fp.n_scaling(), 2);
        assert_eq!(fp.n_samplets(), 2);
        for c in 0..2 {
            let col = fp.samplet.col(c);
            let s0: f64 = col.iter().sum();
            let s1: f64 = col.iter().zip(&xs).map(|(w, x)| w * x).sum();
            assert!(s0.abs() < 1e-12, "sum = {s0}");
            assert!(s1.abs() < 1e-12, "moment = {s1}");
        }

        // Oracle: orthonormalize the moment rows, then complete the basis;
        // the samplet span must equal the completion span. Compare by
        // projecting oracle onto QR samplet columns.
        let rows = [[1.0, 1.0, 1.0, 1.0], xs];
        let mut basis_vs: Vec<Vec<f64>> = Vec::new();
        for r in rows {
            let mut v = r.to_vec();
            for b in &basis_vs {
                let d = crate::linalg::dot(&v, b);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
            let n = norm2(&v);
            for x in v.iter_mut() {
                *x /= n;
            }
            basis_vs.push(v);
        }
        for c in 0..2 {
            let col = fp.samplet.col(c);
            for b in &basis_vs {
                assert!(crate::linalg::dot(col, b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn combined_columns_orthonormal() {
        let ps = random_points(2, 30, 5);
        let tree = build_tree(&ps, 8, None).unwrap();
        let basis = build_basis(tree, &ps, 1);
        for id in 0..basis.tree().node_count() {
            let fp = basis.filter(id).dense();
            let n = fp.input_len();
            let mut q = Mat::zeros(n, n);
            for c in 0..fp.n_scaling() {
                q.col_mut(c).copy_from_slice(fp.scaling.col(c));
            }
            for c in 0..fp.n_samplets() {
                q.col_mut(fp.n_scaling() + c).copy_from_slice(fp.samplet.col(c));
            }
            let qtq = q.transpose().matmul(&q);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq[(i, j)] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn recentering_matches_direct_evaluation() {
        // The propagated scaling-moment block of every internal node must
        // match the moments computed from expanded Dirac weights on raw
        // points to near machine precision.
        let ps = random_points(1, 12, 9);
        let tree = build_tree(&ps, 3, None).unwrap();
        let basis = build_basis(tree, &ps, 2);
        let tree = basis.tree();
        for id in 0..tree.node_count() {
            let (center, scale) = basis.node_center_scale(id);
            let om = basis.scaling_moments(id);
            for k in 0..om.cols() {
                let w = scaling_weights(&basis, id, k);
                let c = tree.cluster(id);
                let mut pts = Vec::new();
                for &orig in &tree.permutation()[c.begin..c.end] {
                    pts.extend_from_slice(ps.point(orig));
                }
                let direct =
                    moment_matrix_at(basis.monomials(), &pts, Some(&w.weights), &center, &scale);
                for a in 0..om.rows() {
                    let got: f64 = (0..direct.cols()).map(|l| direct[(a, l)]).sum();
                    assert!(
                        (got - om[(a, k)]).abs() < 1e-12,
                        "node {id} scaling {k} moment row {a}: {got} vs {}",
                        om[(a, k)]
                    );
                }
            }
        }
    }

    #[test]
    fn layout_counts_and_disjointness() {
        // N = 8 uniform 1D points, q = 0, leaf_capacity = 2: per-node samplet
        // counts sum with the root scaling count to 8.
        let xs: Vec<f64> = (0..8).map(|i| i as f64 / 8.0).collect();
        let ps = point_set_1d(&xs);
        let tree = build_tree(&ps, 2, None).unwrap();
        let basis = build_basis(tree, &ps, 0);
        let total: usize = (0..basis.tree().node_count())
            .map(|id| basis.slice(id).len)
            .sum();
        assert_eq!(total, 8);
        let mut covered = vec![false; 8];
        for id in 0..basis.tree().node_count() {
            let s = basis.slice(id);
            for k in s.start..s.start + s.len {
                assert!(!covered[k]);
                covered[k] = true;
            }
        }
        assert!(covered.iter().all(|&b| b));

        // Subtree contiguity: each node's subtree coefficients form one
        // contiguous range starting at its own slice.
        for id in 0..basis.tree().node_count() {
            let mut min = usize::MAX;
            let mut max = 0usize;
            let mut total = 0usize;
            let mut stack = vec![id];
            while let Some(x) = stack.pop() {
                let s = basis.slice(x);
                if s.len > 0 {
                    min = min.min(s.start);
                    max = max.max(s.start + s.len);
                }
                total += s.len;
                stack.extend(basis.tree().cluster(x).children());
            }
            if total > 0 {
                assert_eq!(max - min, total);
                assert_eq!(min, basis.slice(id).start);
            }
        }
    }

    #[test]
    fn single_point_basis_is_dirac() {
        let ps = point_set_1d(&[0.42]);
        let tree = build_tree(&ps, 1, None).unwrap();
        let basis = build_basis(tree, &ps, 0);
        assert_eq!(basis.slice(0).len, 1);
        let w = samplet_weights(&basis, 0).unwrap();
        assert_eq!(w.weights, vec![1.0]);
    }

    #[test]
    fn samplet_weights_have_unit_norm_and_local_support() {
        let ps = random_points(2, 64, 17);
        let tree = build_tree(&ps, 6, None).unwrap();
        let basis = build_basis(tree, &ps, 1);
        for k in 0..64 {
            let w = samplet_weights(&basis, k).unwrap();
            assert!((norm2(&w.weights) - 1.0).abs() < 1e-12);
            let (node, _) = basis.coefficient_owner(k).unwrap();
            let c = basis.tree().cluster(node);
            assert_eq!(w.first, c.begin);
            assert_eq!(w.weights.len(), c.count());
            // l1 bound from Cauchy-Schwarz.
            let l1: f64 = w.weights.iter().map(|x| x.abs()).sum();
            assert!(l1 <= (c.count() as f64).sqrt() + 1e-12);
        }
        assert!(samplet_weights(&basis, 64).is_err());
    }

    #[test]
    fn dense_transform_is_orthogonal_and_annihilates_constants() {
        let ps = random_points(2, 64, 23);
        let tree = build_tree(&ps, 6, None).unwrap();
        let basis = build_basis(tree, &ps, 1);
        let t = assemble_dense_transform(&basis).unwrap();
        let tt = t.matmul(&t.transpose());
        let mut err = 0.0f64;
        for i in 0..64 {
            for j in 0..64 {
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((tt[(i, j)] - want).abs());
            }
        }
        assert!(err < 1e-10, "orthogonality defect {err}");

        // Constant input: only root scaling coefficients survive.
        let ones = vec![1.0; 64];
        let coeffs = t.mul_vec(&ones);
        let root_scal = basis.filter(0).n_scaling();
        for (k, &c) in coeffs.iter().enumerate() {
            if k >= root_scal {
                assert!(c.abs() < 1e-10, "coefficient {k} = {c}");
            }
        }
    }

    #[test]
    fn oracle_cutoff_enforced() {
        let ps = random_points(1, 8, 1);
        let tree = build_tree(&ps, 2, None).unwrap();
        let basis = build_basis(tree, &ps, 0);
        assert!(assemble_dense_transform(&basis).is_ok());

        let ps = random_points(1, DENSE_ORACLE_CUTOFF + 4, 2);
        let tree = build_tree(&ps, 64, None).unwrap();
        let basis = build_basis(tree, &ps, 0);
        assert!(matches!(
            assemble_dense_transform(&basis),
            Err(Error::OracleCutoff { .. })
        ));
    }

    #[test]
    fn haar_pair_in_weights_and_dense_transform() {
        // Two points, q = 0: the full transform is the Haar pair up to row
        // signs.
        let ps = point_set_1d(&[0.0, 1.0]);
        let tree = build_tree(&ps, 1, None).unwrap();
        let basis = build_basis(tree, &ps, 0);
        let s = 1.0 / 2.0f64.sqrt();
        let w = samplet_weights(&basis, 1).unwrap().to_dense(2);
        assert!((w[0].abs() - s).abs() < 1e-14);
        assert!((w[0] + w[1]).abs() < 1e-14);
        let t = assemble_dense_transform(&basis).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((t[(r, c)].abs() - s).abs() < 1e-14);
            }
        }
        // First row is the scaling pair (same signs), second the samplet.
        assert_eq!(t[(0, 0)].signum(), t[(0, 1)].signum());
        assert_ne!(t[(1, 0)].signum(), t[(1, 1)].signum());
    }

    #[test]
    fn filter_dump_roundtrip() {
        let ps = random_points(1, 10, 3);
        let tree = build_tree(&ps, 3, None).unwrap();
        let basis = build_basis(tree, &ps, 1);
        let mut path = std::env::temp_dir();
        path.push(format!("samplets_filters_{}.bin", std::process::id()));
        write_filter_dump(&basis, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let mut pos = 0usize;
        let read_u64 = |pos: &mut usize| {
            let v = u64::from_le_bytes(bytes[*pos..*pos + 8].try_into().unwrap());
            *pos += 8;
            v
        };
        for id in 0..basis.tree().node_count() {
            assert_eq!(read_u64(&mut pos), id as u64);
            let n = read_u64(&mut pos) as usize;
            let ms = read_u64(&mut pos) as usize;
            let mw = read_u64(&mut pos) as usize;
            let fp = basis.filter(id);
            assert_eq!((n, ms, mw), (fp.input_len(), fp.n_scaling(), fp.n_samplets()));
            pos += (n * ms + n * mw) * 8;
        }
        assert_eq!(pos, bytes.len());
        std::fs::remove_file(path).ok();
    }
}
