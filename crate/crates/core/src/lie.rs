//! Compact Lie-algebra data: structure constants, a bi-invariant inner
//! product, isotropy splittings and the normal homogeneous Ricci form.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::validation::ValidationReport;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Structure constants `c[i][j][k]` (coefficient of `b_k` in `[b_i, b_j]`)
/// together with an inner product `Q` on the algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraData {
    dim: usize,
    c: Vec<f64>,
    q: Mat,
}

impl LieAlgebraData {
    /// Shape checks only. Use [`LieAlgebraData::validate`] for the algebraic
    /// invariants.
    pub fn new(dim: usize, c: Vec<f64>, q: Mat) -> Result<Self> {
        if dim == 0 {
            return Err(Error::malformed("dim", "algebra dimension must be positive"));
        }
        if c.len() != dim * dim * dim {
            return Err(Error::malformed(
                "c",
                format!("expected {} structure constants, found {}", dim * dim * dim, c.len()),
            ));
        }
        if q.nrows() != q.ncols() {
            return Err(Error::malformed("Q", "matrix is not square"));
        }
        if q.nrows() != dim {
            return Err(Error::malformed("Q", format!("expected {dim}x{dim}, found {}x{}", q.nrows(), q.ncols())));
        }
        Ok(Self { dim, c, q })
    }

    pub fn from_nested(c: &[Vec<Vec<f64>>], q: &[Vec<f64>]) -> Result<Self> {
        let dim = c.len();
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for (i, plane) in c.iter().enumerate() {
            if plane.len() != dim {
                return Err(Error::malformed("c", format!("c[{i}] has length {} (expected {dim})", plane.len())));
            }
            for (j, row) in plane.iter().enumerate() {
                if row.len() != dim {
                    return Err(Error::malformed(
                        "c",
                        format!("c[{i}][{j}] has length {} (expected {dim})", row.len()),
                    ));
                }
                flat.extend_from_slice(row);
            }
        }
        let q = linalg::mat_from_rows(q, "Q")?;
        Self::new(dim, flat, q)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn structure_constants(&self) -> &[f64] {
        &self.c
    }

    pub fn nested_constants(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| (0..self.dim).map(|k| self.c(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        if x.len() != self.dim {
            return Err(Error::dim("bracket argument x", self.dim, x.len()));
        }
        if y.len() != self.dim {
            return Err(Error::dim("bracket argument y", self.dim, y.len()));
        }
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += w * self.c[base + k];
                }
            }
        }
        out
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.q * y))
    }

    pub fn norm_sq(&self, x: &Vector) -> f64 {
        self.inner(x, x)
    }

    /// Check antisymmetry, the Jacobi identity, bi-invariance of `Q` and
    /// positivity of `Q`. A non-symmetric `Q` is malformed input and is
    /// returned as an error rather than a failed check.
    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        let n = self.dim;
        let q_scale = linalg::max_abs(&self.q).max(1.0);
        let asym = linalg::asymmetry(&self.q);
        if asym > tol * q_scale {
            return Err(Error::malformed("Q", format!("matrix is not symmetric (|Q - Q^T| = {asym:e})")));
        }
        let mut report = ValidationReport::new("lie algebra", tol);

        let mut worst = (0.0, vec![0, 0, 0]);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = (self.c(i, j, k) + self.c(j, i, k)).abs();
                    if r > worst.0 {
                        worst = (r, vec![i, j, k]);
                    }
                }
            }
        }
        report.push("bracket antisymmetry", worst.0, Some(worst.1));

        let mut worst = (0.0, vec![0, 0, 0]);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += self.c(i, j, l) * self.c(l, k, m)
                                + self.c(j, k, l) * self.c(l, i, m)
                                + self.c(k, i, l) * self.c(l, j, m);
                        }
                        if s.abs() > worst.0 {
                            worst = (s.abs(), vec![i, j, k]);
                        }
                    }
                }
            }
        }
        report.push("jacobi identity", worst.0, Some(worst.1));

        let mut worst = (0.0, vec![0, 0, 0]);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += self.c(i, j, l) * self.q[(l, k)] + self.c(i, k, l) * self.q[(j, l)];
                    }
                    let scale = (self.q[(i, i)] * self.q[(j, j)] * self.q[(k, k)]).abs().sqrt().max(f64::MIN_POSITIVE);
                    let r = s.abs() / scale;
                    if r > worst.0 {
                        worst = (r, vec![i, j, k]);
                    }
                }
            }
        }
        report.push("Q bi-invariance", worst.0, Some(worst.1));

        let min_eig = linalg::sym_eigen(&self.q).values[0];
        report.push_with("Q positive definite (smallest eigenvalue)", min_eig, None, min_eig > tol);
        Ok(report)
    }

    /// su(2) with `[e1,e2]=e3`, `[e2,e3]=e1`, `[e3,e1]=e2` and `Q = I`.
    pub fn su2() -> Self {
        let mut c = vec![0.0; 27];
        let mut set = |i: usize, j: usize, k: usize| {
            c[(i * 3 + j) * 3 + k] = 1.0;
            c[(j * 3 + i) * 3 + k] = -1.0;
        };
        set(0, 1, 2);
        set(1, 2, 0);
        set(2, 0, 1);
        Self::new(3, c, Mat::identity(3, 3)).expect("su(2) constants are well-formed")
    }

    /// so(n) in the basis `E_ab = e_a e_b^T - e_b e_a^T` (a < b, lexicographic)
    /// with `Q(X,Y) = -tr(XY)/2`, which makes the basis orthonormal.
    pub fn so(n: usize) -> Self {
        assert!(n >= 2, "so(n) needs n >= 2");
        let pairs = so_basis_pairs(n);
        let d = pairs.len();
        let mats: Vec<Mat> = pairs.iter().map(|&(a, b)| elementary_skew(n, a, b)).collect();
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let comm = &mats[i] * &mats[j] - &mats[j] * &mats[i];
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    c[(i * d + j) * d + k] = comm[(a, b)];
                }
            }
        }
        Self::new(d, c, Mat::identity(d, d)).expect("so(n) constants are well-formed")
    }

    /// Abelian algebra with the given inner product.
    pub fn abelian(q: Mat) -> Result<Self> {
        let n = q.nrows();
        Self::new(n, vec![0.0; n * n * n], q)
    }

    /// Direct sum `a ⊕ b` with the block-diagonal inner product.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        let (na, nb) = (a.dim, b.dim);
        let n = na + nb;
        let mut c = vec![0.0; n * n * n];
        for i in 0..na {
            for j in 0..na {
                for k in 0..na {
                    c[(i * n + j) * n + k] = a.c(i, j, k);
                }
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                for k in 0..nb {
                    c[((i + na) * n + j + na) * n + k + na] = b.c(i, j, k);
                }
            }
        }
        let mut q = Mat::zeros(n, n);
        q.view_mut((0, 0), (na, na)).copy_from(&a.q);
        q.view_mut((na, na), (nb, nb)).copy_from(&b.q);
        Self::new(n, c, q).expect("direct sum of well-formed algebras")
    }
}

/// Index pairs `(a, b)`, `a < b`, labelling the so(n) basis in order.
pub fn so_basis_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
        }
    }
    pairs
}

pub fn elementary_skew(n: usize, a: usize, b: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(a, b)] = 1.0;
    m[(b, a)] = -1.0;
    m
}

/// A subalgebra `g_f` and its `Q`-orthogonal complement `m_f`.
#[derive(Debug, Clone)]
pub struct IsotropyDecomposition {
    algebra: Arc<LieAlgebraData>,
    isotropy_basis: Vec<Vector>,
    /// `Q`-orthonormal basis of `g_f`, as columns in algebra coordinates.
    isotropy_orthonormal: Mat,
    /// `Q`-orthonormal basis `v_1..v_k` of `m_f`, as columns.
    complement: Mat,
    projector_m: Mat,
}

/// Split `algebra` along the span of `isotropy_basis`.
///
/// Exactly-zero vectors are ignored, so `[0]` describes the trivial
/// isotropy of a free action.
pub fn isotropy_split(
    algebra: Arc<LieAlgebraData>,
    isotropy_basis: &[Vector],
    tol: f64,
) -> Result<IsotropyDecomposition> {
    let n = algebra.dim();
    let q = algebra.q().clone();
    for (idx, h) in isotropy_basis.iter().enumerate() {
        if h.len() != n {
            return Err(Error::dim(format!("isotropy vector {idx}"), n, h.len()));
        }
    }
    let inner = |x: &Vector, y: &Vector| x.dot(&(&q * y));

    let mut accepted: Vec<Vector> = Vec::new();
    let mut kept: Vec<Vector> = Vec::new();
    for (idx, h) in isotropy_basis.iter().enumerate() {
        if h.iter().all(|x| *x == 0.0) {
            continue;
        }
        let norm0 = inner(h, h).sqrt();
        let r = q_orthogonalize(h, &accepted, &inner);
        let norm = inner(&r, &r).sqrt();
        if norm <= 1e-10 * norm0 {
            return Err(Error::RankDeficient { index: idx });
        }
        accepted.push(r / norm);
        kept.push(h.clone());
    }

    for a in 0..accepted.len() {
        for b in (a + 1)..accepted.len() {
            let br = algebra.bracket_unchecked(&accepted[a], &accepted[b]);
            let r = q_orthogonalize(&br, &accepted, &inner);
            let residual = inner(&r, &r).sqrt();
            if residual > tol.max(1e-12) {
                return Err(Error::NotSubalgebra { i: a, j: b, residual });
            }
        }
    }

    let iso_count = accepted.len();
    let mut complement: Vec<Vector> = Vec::new();
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        let norm0 = inner(&e, &e).sqrt();
        let mut basis: Vec<Vector> = accepted.clone();
        basis.extend(complement.iter().cloned());
        let r = q_orthogonalize(&e, &basis, &inner);
        let norm = inner(&r, &r).sqrt();
        if norm > 1e-8 * norm0 {
            complement.push(r / norm);
        }
        if iso_count + complement.len() == n {
            break;
        }
    }
    if iso_count + complement.len() != n {
        return Err(Error::Singular("isotropy complement construction".into()));
    }

    let iso_mat = columns(n, &accepted);
    let comp_mat = columns(n, &complement);
    let projector_m = &comp_mat * comp_mat.transpose() * &q;
    Ok(IsotropyDecomposition {
        algebra,
        isotropy_basis: kept,
        isotropy_orthonormal: iso_mat,
        complement: comp_mat,
        projector_m,
    })
}

fn columns(n: usize, vs: &[Vector]) -> Mat {
    let mut m = Mat::zeros(n, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Two passes of modified Gram–Schmidt against an orthonormal list.
fn q_orthogonalize(v: &Vector, basis: &[Vector], inner: &impl Fn(&Vector, &Vector) -> f64) -> Vector {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = inner(b, &r);
            r -= b * c;
        }
    }
    r
}

impl IsotropyDecomposition {
    /// The free-action split: `g_f = 0`, `m_f = g`.
    pub fn trivial(algebra: Arc<LieAlgebraData>) -> Self {
        isotropy_split(algebra, &[], DEFAULT_TOL).expect("trivial isotropy always splits")
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraData> {
        &self.algebra
    }

    pub fn isotropy_basis(&self) -> &[Vector] {
        &self.isotropy_basis
    }

    pub fn isotropy_orthonormal(&self) -> &Mat {
        &self.isotropy_orthonormal
    }

    pub fn complement_basis(&self) -> &Mat {
        &self.complement
    }

    pub fn projector_m(&self) -> &Mat {
        &self.projector_m
    }

    pub fn isotropy_dim(&self) -> usize {
        self.isotropy_orthonormal.ncols()
    }

    pub fn complement_dim(&self) -> usize {
        self.complement.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.isotropy_dim() == 0
    }

    /// Complement coordinates to an algebra vector.
    pub fn to_algebra(&self, u: &Vector) -> Vector {
        &self.complement * u
    }

    /// `Q`-orthogonal projection of an algebra vector, in complement coordinates.
    pub fn to_complement(&self, x: &Vector) -> Vector {
        self.complement.transpose() * (self.algebra.q() * x)
    }

    fn check_coords(&self, u: &Vector) -> Result<()> {
        if u.len() != self.complement_dim() {
            return Err(Error::dim("m_f coordinates", self.complement_dim(), u.len()));
        }
        Ok(())
    }

    /// `¼ Σ_k ‖[v_k, U]‖²_Q` over the complement basis.
    pub fn normal_homogeneous_ricci(&self, u: &Vector) -> Result<f64> {
        self.check_coords(u)?;
        let x = self.to_algebra(u);
        let mut sum = 0.0;
        for k in 0..self.complement_dim() {
            let v = self.complement.column(k).into_owned();
            sum += self.algebra.norm_sq(&self.algebra.bracket_unchecked(&v, &x));
        }
        Ok(0.25 * sum)
    }

    /// Matrix of `U ↦ normal_homogeneous_ricci(U)` in complement coordinates.
    pub fn normal_homogeneous_ricci_matrix(&self) -> Mat {
        let k = self.complement_dim();
        // ad_{v_a} restricted to m_f, as algebra vectors
        let brackets: Vec<Vec<Vector>> = (0..k)
            .map(|a| {
                let va = self.complement.column(a).into_owned();
                (0..k)
                    .map(|m| {
                        let vm = self.complement.column(m).into_owned();
                        self.algebra.bracket_unchecked(&vm, &va)
                    })
                    .collect()
            })
            .collect();
        let mut out = Mat::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let s: f64 = (0..k)
                    .map(|m| self.algebra.inner(&brackets[a][m], &brackets[b][m]))
                    .sum();
                out[(a, b)] = 0.25 * s;
                out[(b, a)] = 0.25 * s;
            }
        }
        out
    }

    /// Largest `C` with `normal_homogeneous_ricci(U) ≥ C‖U‖²_Q`. Zero means
    /// the form is degenerate, which is how an infinite fundamental group of
    /// `G/G_f` shows up numerically.
    pub fn bracket_gap_constant(&self) -> f64 {
        if self.complement_dim() == 0 {
            return 0.0;
        }
        let c = linalg::sym_eigen(&self.normal_homogeneous_ricci_matrix()).values[0];
        // round-off below zero on a PSD form is reported as zero
        if c.abs() < 1e-14 {
            0.0
        } else {
            c
        }
    }
}
