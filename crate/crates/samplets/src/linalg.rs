//! Small dense matrices and Householder QR.
//!
//! All matrices here are tiny (cluster-local filter blocks, two-column
//! regression systems), so a plain column-major `Vec<f64>` is used
//! throughout.

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from a column-major buffer.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let bcol = other.col(j);
            let ocol = out.col_mut(j);
            for (k, &bkj) in bcol.iter().enumerate() {
                if bkj == 0.0 {
                    continue;
                }
                let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                for i in 0..self.rows {
                    ocol[i] += acol[i] * bkj;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    /// `self^T * v` (length `cols`).
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|c| dot(self.col(c), v)).collect()
    }

    /// `self * v` (length `rows`).
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(v, &mut out);
        out
    }

    /// `out += self * v` accumulated in place.
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (c, &vc) in v.iter().enumerate() {
            if vc == 0.0 {
                continue;
            }
            let col = self.col(c);
            for i in 0..self.rows {
                out[i] += col[i] * vc;
            }
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[c * self.rows + r]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[c * self.rows + r]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Householder QR factorization `A = Q R` of an `n x m` matrix.
///
/// Reflectors are stored LAPACK-style: the essential part of the k-th
/// Householder vector lives below the diagonal of column `k`, `R` in the
/// upper triangle. No pivoting; rank-deficient columns yield a zero
/// reflector and a zero diagonal entry of `R`, which downstream code
/// tolerates.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    a: Mat,
    tau: Vec<f64>,
}

/// Householder QR over raw column-major `n x m` storage: reflectors stored
/// below the diagonal with scaled tails (implicit unit leading entry), `R`
/// in the upper triangle, scaling factors in `tau` (length `min(n, m)`).
pub(crate) fn householder_factor_raw(data: &mut [f64], n: usize, m: usize, tau: &mut [f64]) {
    let p = n.min(m);
    debug_assert_eq!(data.len(), n * m);
    debug_assert_eq!(tau.len(), p);
    for k in 0..p {
        let colk = k * n;
        // Build the reflector that zeroes column k below the diagonal.
        let mut norm_sq = 0.0;
        for &v in &data[colk + k..colk + n] {
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            tau[k] = 0.0;
            continue;
        }
        let a0 = data[colk + k];
        let alpha = if a0 >= 0.0 { -norm } else { norm };
        let v0 = a0 - alpha;
        // tau = 2 / (v^T v) with v = [v0, a[k+1..n, k]].
        let vnorm_sq = v0 * v0 + (norm_sq - a0 * a0);
        if vnorm_sq == 0.0 {
            tau[k] = 0.0;
            data[colk + k] = alpha;
            continue;
        }
        data[colk + k] = alpha;
        // Store the essential part of v scaled by 1/v0, so its leading
        // entry is an implicit 1; fold v0^2 into tau.
        for v in &mut data[colk + k + 1..colk + n] {
            *v /= v0;
        }
        let t = 2.0 / vnorm_sq * (v0 * v0);
        tau[k] = t;
        // Apply the reflector to the trailing columns.
        for j in k + 1..m {
            let (left, right) = data.split_at_mut(j * n);
            let vk = &left[colk + k + 1..colk + n];
            let cj = &mut right[k..n];
            let mut s = cj[0];
            for (x, y) in vk.iter().zip(&cj[1..]) {
                s += x * y;
            }
            s *= t;
            cj[0] -= s;
            for (x, y) in vk.iter().zip(cj[1..].iter_mut()) {
                *y -= s * x;
            }
        }
    }
}

#[inline]
pub(crate) fn householder_reflect_raw(data: &[f64], n: usize, k: usize, tau_k: f64, v: &mut [f64]) {
    if tau_k == 0.0 {
        return;
    }
    let vk = &data[k * n + k + 1..(k + 1) * n];
    let tail = &mut v[k..];
    let mut s = tail[0];
    for (x, y) in vk.iter().zip(&tail[1..]) {
        s += x * y;
    }
    s *= tau_k;
    tail[0] -= s;
    for (x, y) in vk.iter().zip(tail[1..].iter_mut()) {
        *y -= s * x;
    }
}

/// `Q^T v` through the reflectors of a raw factorization.
pub(crate) fn householder_apply_qt_raw(data: &[f64], n: usize, tau: &[f64], v: &mut [f64]) {
    debug_assert_eq!(v.len(), n);
    for (k, &t) in tau.iter().enumerate() {
        householder_reflect_raw(data, n, k, t, v);
    }
}

/// `Q v` through the reflectors of a raw factorization.
pub(crate) fn householder_apply_q_raw(data: &[f64], n: usize, tau: &[f64], v: &mut [f64]) {
    debug_assert_eq!(v.len(), n);
    for (k, &t) in tau.iter().enumerate().rev() {
        householder_reflect_raw(data, n, k, t, v);
    }
}

impl HouseholderQr {
    pub fn factor(mut a: Mat) -> Self {
        let n = a.rows();
        let m = a.cols();
        let mut tau = vec![0.0; n.min(m)];
        householder_factor_raw(a.data_mut(), n, m, &mut tau);
        HouseholderQr { a, tau }
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// Applies `Q^T` to `v` in place.
    pub fn apply_qt(&self, v: &mut [f64]) {
        householder_apply_qt_raw(self.a.data(), self.a.rows(), &self.tau, v);
    }

    /// Applies `Q` to `v` in place.
    pub fn apply_q(&self, v: &mut [f64]) {
        householder_apply_q_raw(self.a.data(), self.a.rows(), &self.tau, v);
    }

    /// The full `n x n` orthogonal factor.
    pub fn q_full(&self) -> Mat {
        let n = self.a.rows();
        let mut q = Mat::identity(n);
        for c in 0..n {
            self.apply_q(q.col_mut(c));
        }
        q
    }

    /// The `n x m` upper-triangular factor.
    pub fn r(&self) -> Mat {
        let n = self.a.rows();
        let m = self.a.cols();
        let mut r = Mat::zeros(n, m);
        for c in 0..m {
            for i in 0..=c.min(n - 1) {
                r[(i, c)] = self.a[(i, c)];
            }
        }
        r
    }

    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.a[(i, j)]
        } else {
            0.0
        }
    }
}

/// QR of `a` with the sign convention that the diagonal of `R` is
/// nonnegative; returns `(Q, R)` with `Q` full `n x n`.
pub fn qr_nonneg_diag(a: Mat) -> (Mat, Mat) {
    let qr = HouseholderQr::factor(a);
    let mut q = qr.q_full();
    let mut r = qr.r();
    let p = r.rows().min(r.cols());
    for k in 0..p {
        if r[(k, k)] < 0.0 {
            for j in 0..r.cols() {
                r[(k, j)] = -r[(k, j)];
            }
            for i in 0..q.rows() {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    (q, r)
}

/// Solves the 2x2 upper-triangular system `R x = z` from a reduced QR of a
/// two-column regression matrix. Returns `None` when `R` is singular.
pub fn solve_upper_2x2(r00: f64, r01: f64, r11: f64, z: [f64; 2]) -> Option<[f64; 2]> {
    if r11 == 0.0 || r00 == 0.0 {
        return None;
    }
    let x1 = z[1] / r11;
    let x0 = (z[0] - r01 * x1) / r00;
    Some([x0, x1])
}

/// Least squares for `[1, x] * [intercept, slope]^T = y` by reduced
/// Householder QR, in place over the scratch slices (all length >= 2).
/// Returns `None` when the abscissae are collinear.
pub fn fit_line_qr(c0: &mut [f64], c1: &mut [f64], y: &mut [f64]) -> Option<(f64, f64)> {
    let l = y.len();
    debug_assert!(l >= 2 && c0.len() == l && c1.len() == l);
    c0.fill(1.0);
    reflect_step(c0, 0, c1, y);
    let r00 = c0[0];
    let r01 = c1[0];
    // Second reflector acts on rows 1.. of the second column only.
    {
        let (_, c1_tail) = c1.split_at_mut(1);
        let (_, y_tail) = y.split_at_mut(1);
        reflect_step(c1_tail, 0, &mut [], y_tail);
    }
    let r11 = c1[1];
    let x = solve_upper_2x2(r00, r01, r11, [y[0], y[1]])?;
    Some((x[0], x[1]))
}

/// Forms the Householder reflector zeroing `col[k+1..]` and applies it to
/// `col`, `other` (when nonempty) and `y`.
fn reflect_step(col: &mut [f64], k: usize, other: &mut [f64], y: &mut [f64]) {
    let n = col.len();
    let mut norm_sq = 0.0;
    for &v in &col[k..] {
        norm_sq += v * v;
    }
    let norm = norm_sq.sqrt();
    if norm == 0.0 {
        return;
    }
    let a0 = col[k];
    let alpha = if a0 >= 0.0 { -norm } else { norm };
    let v0 = a0 - alpha;
    let vnorm_sq = v0 * v0 + (norm_sq - a0 * a0);
    if vnorm_sq == 0.0 {
        col[k] = alpha;
        return;
    }
    let tau = 2.0 / vnorm_sq;
    // v = [v0, col[k+1..]]; apply H = I - tau v v^T.
    let apply = |w: &mut [f64]| {
        let mut s = v0 * w[k];
        for i in k + 1..n {
            s += col[i] * w[i];
        }
        s *= tau;
        w[k] -= s * v0;
        for i in k + 1..n {
            w[i] -= s * col[i];
        }
    };
    if !other.is_empty() {
        apply(other);
    }
    apply(y);
    col[k] = alpha;
    for v in &mut col[k + 1..] {
        *v = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_from_rows(rows: &[&[f64]]) -> Mat {
        let n = rows.len();
        let m = rows[0].len();
        let mut a = Mat::zeros(n, m);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        a
    }

    #[test]
    fn qr_reconstructs_input() {
        let a = mat_from_rows(&[
            &[1.0, 2.0, 0.5],
            &[-3.0, 0.25, 1.0],
            &[2.0, 2.0, 2.0],
            &[0.0, -1.0, 4.0],
        ]);
        let (q, r) = qr_nonneg_diag(a.clone());
        let qr = q.matmul(&r);
        for c in 0..a.cols() {
            for i in 0..a.rows() {
                assert!((qr[(i, c)] - a[(i, c)]).abs() < 1e-12);
            }
        }
        // Orthogonality.
        let qtq = q.transpose().matmul(&q);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - want).abs() < 1e-13);
            }
        }
        // Sign convention.
        for k in 0..3 {
            assert!(r[(k, k)] >= 0.0);
        }
    }

    #[test]
    fn qr_handles_wide_and_rank_deficient() {
        // Wide: n < m.
        let a = mat_from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let (q, r) = qr_nonneg_diag(a.clone());
        let qr = q.matmul(&r);
        for c in 0..3 {
            for i in 0..2 {
                assert!((qr[(i, c)] - a[(i, c)]).abs() < 1e-12);
            }
        }
        // Rank deficient: duplicate columns.
        let a = mat_from_rows(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let (q, r) = qr_nonneg_diag(a.clone());
        assert!(r[(1, 1)].abs() < 1e-12);
        let qtq = q.transpose().matmul(&q);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn apply_qt_matches_explicit_q() {
        let a = mat_from_rows(&[&[2.0, 1.0], &[1.0, 3.0], &[0.5, -1.0], &[1.5, 0.0]]);
        let qr = HouseholderQr::factor(a);
        let q = qr.q_full();
        let v = vec![1.0, -2.0, 0.5, 3.0];
        let mut w = v.clone();
        qr.apply_qt(&mut w);
        let explicit = q.tr_mul_vec(&v);
        for i in 0..4 {
            assert!((w[i] - explicit[i]).abs() < 1e-13);
        }
    }
}
