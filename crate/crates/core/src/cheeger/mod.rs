//! Cheeger deformation of a `G`-invariant metric at a point.
//!
//! Vectors are [`MixedVector`]s: horizontal coordinates in a `g`-orthonormal
//! frame of the normal space, plus a vertical part `U ∈ m_f` in coordinates of
//! the `Q`-orthonormal complement basis (the action field is `U^*`).

mod exact;

pub use exact::{kappa_t_exact, ricci_gt_exact, z_t_extract, ExactCurvature, ExactModel};

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::IsotropyDecomposition;
use crate::linalg::{self, Mat, SortedEigen, Vector};
use crate::oracle::CurvatureOracle;

/// Symmetric positive-definite `P` with `g(U^*, V^*) = Q(PU, V)` on `m_f`.
#[derive(Debug, Clone)]
pub struct OrbitTensor {
    space: Arc<IsotropyDecomposition>,
    matrix: Mat,
    inverse: Mat,
    sqrt: Mat,
    inv_sqrt: Mat,
    eigen: SortedEigen,
}

impl OrbitTensor {
    pub fn new(space: Arc<IsotropyDecomposition>, matrix: Mat) -> Result<Self> {
        Self::named(space, matrix, "P")
    }

    pub(crate) fn named(space: Arc<IsotropyDecomposition>, matrix: Mat, field: &str) -> Result<Self> {
        let k = space.complement_dim();
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::malformed(field, "matrix is not square"));
        }
        if matrix.nrows() != k {
            return Err(Error::malformed(
                field,
                format!("expected {k}x{k} on the orbit complement, found {}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        let scale = linalg::max_abs(&matrix).max(1.0);
        let asym = linalg::asymmetry(&matrix);
        if asym > 1e-12 * scale {
            return Err(Error::malformed(field, format!("matrix is not symmetric (|P - P^T| = {asym:e})")));
        }
        let matrix = linalg::symmetrized(&matrix);
        let eigen = linalg::sym_eigen(&matrix);
        if k > 0 && !(eigen.values[0] > 0.0) {
            return Err(Error::NotSpd {
                what: field.to_string(),
                min_eigenvalue: eigen.values[0],
            });
        }
        let inverse = linalg::spd_inverse(&matrix, field)?;
        let sqrt = linalg::spd_sqrt(&matrix);
        let inv_sqrt = linalg::spd_inv_sqrt(&matrix);
        Ok(Self {
            space,
            matrix,
            inverse,
            sqrt,
            inv_sqrt,
            eigen,
        })
    }

    pub fn identity(space: Arc<IsotropyDecomposition>) -> Self {
        let k = space.complement_dim();
        Self::new(space, Mat::identity(k, k)).expect("identity is SPD")
    }

    pub fn space(&self) -> &Arc<IsotropyDecomposition> {
        &self.space
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn inverse(&self) -> &Mat {
        &self.inverse
    }

    pub fn sqrt(&self) -> &Mat {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &Mat {
        &self.inv_sqrt
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> &Vector {
        &self.eigen.values
    }

    pub fn eigenvectors(&self) -> &Mat {
        &self.eigen.vectors
    }

    /// `Some(c)` when `P = c·I`.
    pub fn scalar_value(&self) -> Option<f64> {
        let k = self.dim();
        if k == 0 {
            return Some(1.0);
        }
        let c = self.matrix[(0, 0)];
        let off = linalg::max_abs(&(&self.matrix - Mat::identity(k, k) * c));
        (off <= 1e-12 * c.abs().max(1.0)).then_some(c)
    }
}

/// Tangent vector `X + U^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedVector {
    pub horizontal: Vector,
    pub vertical: Vector,
}

impl MixedVector {
    pub fn new(horizontal: Vector, vertical: Vector) -> Self {
        Self { horizontal, vertical }
    }

    pub fn zeros(horizontal_dim: usize, vertical_dim: usize) -> Self {
        Self::new(Vector::zeros(horizontal_dim), Vector::zeros(vertical_dim))
    }

    pub fn vertical(u: Vector, horizontal_dim: usize) -> Self {
        Self::new(Vector::zeros(horizontal_dim), u)
    }

    pub fn horizontal(x: Vector, vertical_dim: usize) -> Self {
        Self::new(x, Vector::zeros(vertical_dim))
    }

    /// Coordinates `[X, U]` as one vector.
    pub fn to_flat(&self) -> Vector {
        let h = self.horizontal.len();
        Vector::from_fn(h + self.vertical.len(), |i, _| {
            if i < h {
                self.horizontal[i]
            } else {
                self.vertical[i - h]
            }
        })
    }

    pub fn from_flat(flat: &Vector, horizontal_dim: usize) -> Self {
        let h = horizontal_dim;
        Self::new(flat.rows(0, h).into_owned(), flat.rows(h, flat.len() - h).into_owned())
    }
}

impl Add for &MixedVector {
    type Output = MixedVector;
    fn add(self, o: &MixedVector) -> MixedVector {
        MixedVector::new(&self.horizontal + &o.horizontal, &self.vertical + &o.vertical)
    }
}

impl Sub for &MixedVector {
    type Output = MixedVector;
    fn sub(self, o: &MixedVector) -> MixedVector {
        MixedVector::new(&self.horizontal - &o.horizontal, &self.vertical - &o.vertical)
    }
}

impl Mul<f64> for &MixedVector {
    type Output = MixedVector;
    fn mul(self, s: f64) -> MixedVector {
        MixedVector::new(&self.horizontal * s, &self.vertical * s)
    }
}

/// Orbit tensor and curvature oracle of a `G`-manifold at one point.
#[derive(Debug, Clone)]
pub struct InvariantPoint {
    orbit: OrbitTensor,
    oracle: CurvatureOracle,
}

impl InvariantPoint {
    /// The oracle's vertical frame must match `orbit` and pass the curvature
    /// symmetry checks.
    pub fn new(orbit: OrbitTensor, oracle: CurvatureOracle, tol: f64) -> Result<Self> {
        if oracle.vertical().len() != orbit.dim() {
            return Err(Error::dim("oracle vertical frame", orbit.dim(), oracle.vertical().len()));
        }
        let report = oracle.validate(tol);
        if !report.passed {
            return Err(Error::invalid("R", report.summary()));
        }
        Ok(Self { orbit, oracle })
    }

    pub fn orbit(&self) -> &OrbitTensor {
        &self.orbit
    }

    pub fn oracle(&self) -> &CurvatureOracle {
        &self.oracle
    }

    pub fn horizontal_dim(&self) -> usize {
        self.oracle.horizontal().len()
    }

    pub fn vertical_dim(&self) -> usize {
        self.orbit.dim()
    }

    pub(crate) fn check(&self, x: &MixedVector) -> Result<()> {
        if x.horizontal.len() != self.horizontal_dim() {
            return Err(Error::dim("horizontal coordinates", self.horizontal_dim(), x.horizontal.len()));
        }
        if x.vertical.len() != self.vertical_dim() {
            return Err(Error::dim("vertical coordinates", self.vertical_dim(), x.vertical.len()));
        }
        Ok(())
    }

    /// Oracle-frame coordinates of `X + U^*`: the vertical frame vector
    /// `(P^{-1/2} v_a)^*` carries coefficient `(P^{1/2} U)_a`.
    pub fn frame_coords(&self, x: &MixedVector) -> Result<Vector> {
        self.check(x)?;
        self.oracle.assemble(&x.horizontal, &(self.orbit.sqrt() * &x.vertical))
    }

    /// `κ_0(x, y) = R_g(x, y, y, x)`.
    pub fn kappa0(&self, x: &MixedVector, y: &MixedVector) -> Result<f64> {
        let (a, b) = (self.frame_coords(x)?, self.frame_coords(y)?);
        Ok(self.oracle.tensor().sectional(&a, &b))
    }

    /// `g(x, y)`.
    pub fn g_inner(&self, x: &MixedVector, y: &MixedVector) -> f64 {
        x.horizontal.dot(&y.horizontal) + x.vertical.dot(&(self.orbit.matrix() * &y.vertical))
    }
}

/// `P`, `t` and the deformed orbit tensor `P_t`.
#[derive(Debug, Clone)]
pub struct DeformationState {
    orbit: OrbitTensor,
    t: f64,
    pt: Mat,
    pt_inverse: Mat,
    ct_vertical: Mat,
    closed_form_gap: f64,
}

/// Deform `P` to `P_t = (P^{-1} + t)^{-1} = P(1 + tP)^{-1}`.
pub fn deform_orbit_tensor(p: &OrbitTensor, t: f64) -> Result<DeformationState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let k = p.dim();
    let id = Mat::identity(k, k);
    let ct_vertical = linalg::spd_inverse(&(&id + p.matrix() * t), "1 + tP")?;
    let via_product = linalg::symmetrized(&(p.matrix() * &ct_vertical));
    let pt_inverse = p.inverse() + &id * t;
    let via_inverse = linalg::spd_inverse(&pt_inverse, "P^{-1} + t")?;
    let closed_form_gap = linalg::max_abs(&(&via_product - &via_inverse));
    let pt = if t == 0.0 { p.matrix().clone() } else { via_product };
    Ok(DeformationState {
        orbit: p.clone(),
        t,
        pt,
        pt_inverse,
        ct_vertical,
        closed_form_gap,
    })
}

impl DeformationState {
    pub fn orbit(&self) -> &OrbitTensor {
        &self.orbit
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn pt(&self) -> &Mat {
        &self.pt
    }

    /// `P_t^{-1} = P^{-1} + t`.
    pub fn pt_inverse(&self) -> &Mat {
        &self.pt_inverse
    }

    /// `C_t` on the vertical space: `(1 + tP)^{-1}`.
    pub fn ct_vertical(&self) -> &Mat {
        &self.ct_vertical
    }

    /// Largest entry of the difference between the two closed forms of `P_t`.
    pub fn closed_form_gap(&self) -> f64 {
        self.closed_form_gap
    }

    pub fn eigenvalues(&self) -> &Vector {
        self.orbit.eigenvalues()
    }

    pub fn eigenvectors(&self) -> &Mat {
        self.orbit.eigenvectors()
    }

    fn check(&self, x: &MixedVector) -> Result<()> {
        if x.vertical.len() != self.orbit.dim() {
            return Err(Error::dim("vertical coordinates", self.orbit.dim(), x.vertical.len()));
        }
        Ok(())
    }

    /// `g_t(x, y) = g(C_t x, y)`.
    pub fn gt_inner(&self, x: &MixedVector, y: &MixedVector) -> f64 {
        x.horizontal.dot(&y.horizontal) + x.vertical.dot(&(&self.pt * &y.vertical))
    }

    /// `‖[PU, PV]‖²_Q` for the vertical parts.
    pub fn bracket_term(&self, x: &MixedVector, y: &MixedVector) -> f64 {
        let space = self.orbit.space();
        let pu = space.to_algebra(&(self.orbit.matrix() * &x.vertical));
        let pv = space.to_algebra(&(self.orbit.matrix() * &y.vertical));
        let alg = space.algebra();
        alg.norm_sq(&alg.bracket_unchecked(&pu, &pv))
    }
}

/// `C_t(X + U^*) = X + ((1 + tP)^{-1} U)^*`.
pub fn apply_ct(s: &DeformationState, x: &MixedVector) -> Result<MixedVector> {
    s.check(x)?;
    Ok(MixedVector::new(x.horizontal.clone(), &s.ct_vertical * &x.vertical))
}

/// `C_t^{-1}(X + U^*) = X + ((1 + tP) U)^*`.
pub fn apply_ct_inverse(s: &DeformationState, x: &MixedVector) -> Result<MixedVector> {
    s.check(x)?;
    let u = &x.vertical + s.orbit.matrix() * &x.vertical * s.t;
    Ok(MixedVector::new(x.horizontal.clone(), u))
}

/// The `g`-orthonormal frame `e_i = λ_i^{-1/2} v_i^*` (vertical, ascending
/// `λ_i`) followed by the horizontal frame, with the factors
/// `(1 + tλ_i)^{1/2}` that make `C_t^{-1/2} e_i` `g_t`-orthonormal.
#[derive(Debug, Clone)]
pub struct Eigenframe {
    pub vectors: Vec<MixedVector>,
    pub scaling: Vec<f64>,
    /// Largest entry of `Gram_{g_t}(C_t^{-1/2} e_i) - I`.
    pub gram_error: f64,
}

impl Eigenframe {
    pub fn scaled_vectors(&self) -> Vec<MixedVector> {
        self.vectors.iter().zip(&self.scaling).map(|(v, s)| v * *s).collect()
    }
}

pub fn eigenframe(s: &DeformationState, horizontal_dim: usize) -> Eigenframe {
    let k = s.orbit.dim();
    let lambdas = s.eigenvalues();
    let vecs = s.eigenvectors();
    let mut vectors = Vec::with_capacity(k + horizontal_dim);
    let mut scaling = Vec::with_capacity(k + horizontal_dim);
    for i in 0..k {
        let v = vecs.column(i) / lambdas[i].sqrt();
        vectors.push(MixedVector::vertical(v, horizontal_dim));
        scaling.push((1.0 + s.t * lambdas[i]).sqrt());
    }
    for j in 0..horizontal_dim {
        let mut x = Vector::zeros(horizontal_dim);
        x[j] = 1.0;
        vectors.push(MixedVector::horizontal(x, k));
        scaling.push(1.0);
    }
    let mut frame = Eigenframe {
        vectors,
        scaling,
        gram_error: 0.0,
    };
    let scaled = frame.scaled_vectors();
    let mut err: f64 = 0.0;
    for (i, a) in scaled.iter().enumerate() {
        for (j, b) in scaled.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((s.gt_inner(a, b) - target).abs());
        }
    }
    frame.gram_error = err;
    frame
}

/// Lower bound `κ_0(x,y) + (t³/4)‖[PU,PV]‖²_Q` for the reparametrized
/// sectional curvature `κ_t`; the dropped residual `z_t` is non-negative.
pub fn kappa_t_lower(s: &DeformationState, point: &InvariantPoint, x: &MixedVector, y: &MixedVector) -> Result<f64> {
    let k0 = point.kappa0(x, y)?;
    if s.t == 0.0 {
        return Ok(k0);
    }
    Ok(k0 + s.t.powi(3) / 4.0 * s.bracket_term(x, y))
}

/// Horizontal Ricci curvature `Σ_{j horizontal} R(x, e_j, e_j, x)`.
pub fn ricci_h(point: &InvariantPoint, x: &MixedVector) -> Result<f64> {
    Ok(point.oracle.ricci_h(&point.frame_coords(x)?))
}

/// Lower bound for `Ric_{g_t}(x)`: the horizontal Ricci of `C_t x` plus, for
/// each eigenpair `(λ_i, v_i)` of `P`,
/// `(1+tλ_i)^{-1} [κ_0(λ_i^{-1/2} v_i^*, C_t x) + (λ_i t/4)‖[v_i, tP(1+tP)^{-1} U]‖²_Q]`,
/// with the `z_t` sum dropped.
pub fn ricci_gt_lower(s: &DeformationState, point: &InvariantPoint, x: &MixedVector) -> Result<f64> {
    point.check(x)?;
    let t = s.t;
    let h = point.horizontal_dim();
    let ctx = apply_ct(s, x)?;
    let mut total = ricci_h(point, &ctx)?;
    let space = s.orbit.space();
    let alg = space.algebra();
    let w = space.to_algebra(&(s.pt() * &x.vertical * t));
    for i in 0..s.orbit.dim() {
        let lambda = s.eigenvalues()[i];
        let vi = s.eigenvectors().column(i).into_owned();
        let ei = MixedVector::vertical(&vi / lambda.sqrt(), h);
        let k0 = point.kappa0(&ei, &ctx)?;
        let br = alg.norm_sq(&alg.bracket_unchecked(&space.to_algebra(&vi), &w));
        total += (k0 + lambda * t / 4.0 * br) / (1.0 + t * lambda);
    }
    Ok(total)
}

/// The same bound written as `Σ_i κ_0(C_t^{1/2}e_i, C_t x) +
/// (t³/4) Σ_i ‖[P C_t^{1/2} e_i, P (C_t x)_g]‖²_Q` over the whole frame,
/// before the eigenbasis simplification.
pub fn ricci_gt_lower_unsimplified(s: &DeformationState, point: &InvariantPoint, x: &MixedVector) -> Result<f64> {
    point.check(x)?;
    let ctx = apply_ct(s, x)?;
    let frame = eigenframe(s, point.horizontal_dim());
    let mut total = 0.0;
    for (e, scale) in frame.vectors.iter().zip(&frame.scaling) {
        let half = e * (1.0 / scale);
        total += point.kappa0(&half, &ctx)?;
        total += s.t.powi(3) / 4.0 * s.bracket_term(&half, &ctx);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::LieAlgebraData;
    use crate::oracle::group_oracle;
    use crate::oracle::CurvatureTensor;

    fn su2_space() -> Arc<IsotropyDecomposition> {
        Arc::new(IsotropyDecomposition::trivial(Arc::new(LieAlgebraData::su2())))
    }

    fn diag(xs: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_row_slice(xs))
    }

    fn e(i: usize, n: usize) -> Vector {
        Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    fn su2_point() -> InvariantPoint {
        let p = OrbitTensor::identity(su2_space());
        let o = group_oracle(&p, &CurvatureTensor::zeros(0)).unwrap();
        InvariantPoint::new(p, o, 1e-10).unwrap()
    }

    #[test]
    fn identity_tensor_halves_at_t1() {
        let space = Arc::new(IsotropyDecomposition::trivial(Arc::new(LieAlgebraData::abelian(Mat::identity(3, 3)).unwrap())));
        let s = deform_orbit_tensor(&OrbitTensor::identity(space), 1.0).unwrap();
        assert!(linalg::max_abs(&(s.pt() - Mat::identity(3, 3) * 0.5)) < 1e-15);
    }

    #[test]
    fn diagonal_tensor_deforms_per_eigenvalue() {
        let a = LieAlgebraData::abelian(Mat::identity(2, 2)).unwrap();
        let space = Arc::new(IsotropyDecomposition::trivial(Arc::new(a)));
        let p = OrbitTensor::new(space, diag(&[1.0, 2.0])).unwrap();
        let s = deform_orbit_tensor(&p, 0.5).unwrap();
        assert!(linalg::max_abs(&(s.pt() - diag(&[2.0 / 3.0, 1.0]))) < 1e-15);
        let s0 = deform_orbit_tensor(&p, 0.0).unwrap();
        assert_eq!(s0.pt(), p.matrix());
        assert_eq!(deform_orbit_tensor(&p, -1.0).unwrap_err(), Error::NegativeTime(-1.0));
    }

    #[test]
    fn non_spd_orbit_tensor_rejected() {
        let r = OrbitTensor::new(su2_space(), diag(&[1.0, -1.0, 1.0]));
        assert!(matches!(r, Err(Error::NotSpd { .. })));
        let r = OrbitTensor::new(su2_space(), Mat::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]));
        assert!(matches!(r, Err(Error::Malformed { .. })));
    }

    #[test]
    fn ct_halves_vertical_part() {
        let s = deform_orbit_tensor(&OrbitTensor::identity(su2_space()), 1.0).unwrap();
        let x = MixedVector::new(Vector::from_vec(vec![1.0, -2.0]), Vector::from_vec(vec![2.0, 4.0, 6.0]));
        let y = apply_ct(&s, &x).unwrap();
        assert_eq!(y.horizontal, x.horizontal);
        assert!((y.vertical - Vector::from_vec(vec![1.0, 2.0, 3.0])).norm() < 1e-15);
        let back = apply_ct_inverse(&s, &apply_ct(&s, &x).unwrap()).unwrap();
        assert!((back.to_flat() - x.to_flat()).norm() < 1e-14);

        let s0 = deform_orbit_tensor(&OrbitTensor::identity(su2_space()), 0.0).unwrap();
        assert_eq!(apply_ct(&s0, &x).unwrap(), x);
    }

    #[test]
    fn eigenframe_scaling() {
        let a = LieAlgebraData::abelian(Mat::identity(2, 2)).unwrap();
        let space = Arc::new(IsotropyDecomposition::trivial(Arc::new(a)));
        let p = OrbitTensor::new(space, diag(&[1.0, 4.0])).unwrap();
        let f = eigenframe(&deform_orbit_tensor(&p, 3.0).unwrap(), 1);
        // e_2 = ½ v_2^*, factor (1 + 3·1)^{1/2} = 2 for λ = 1
        assert!((&f.vectors[1].vertical - Vector::from_vec(vec![0.0, 0.5])).norm() < 1e-15);
        assert!((f.scaling[0] - 2.0).abs() < 1e-15);
        assert_eq!(f.scaling[2], 1.0);
        assert!(f.gram_error < 1e-12);
        let f0 = eigenframe(&deform_orbit_tensor(&p, 0.0).unwrap(), 1);
        assert!(f0.scaling.iter().all(|s| *s == 1.0));
    }

    #[test]
    fn kappa_lower_su2_plane() {
        let point = su2_point();
        let s = deform_orbit_tensor(point.orbit(), 1.0).unwrap();
        let x = MixedVector::vertical(e(0, 3), 0);
        let y = MixedVector::vertical(e(1, 3), 0);
        assert!((kappa_t_lower(&s, &point, &x, &y).unwrap() - 0.5).abs() < 1e-14);
        let s0 = deform_orbit_tensor(point.orbit(), 0.0).unwrap();
        assert!((kappa_t_lower(&s0, &point, &x, &y).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn ricci_lower_su2_e1() {
        let point = su2_point();
        let x = MixedVector::vertical(e(0, 3), 0);
        for &t in &[0.0, 0.5, 1.0, 3.0] {
            let s = deform_orbit_tensor(point.orbit(), t).unwrap();
            let expected: f64 = (1.0 + t * t * t) / (2.0 * (1.0 + t).powi(3));
            let got = ricci_gt_lower(&s, &point, &x).unwrap();
            assert!((got - expected).abs() < 1e-14, "t={t}: {got} vs {expected}");
            let alt = ricci_gt_lower_unsimplified(&s, &point, &x).unwrap();
            assert!((got - alt).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_abelian_ricci_vanishes() {
        let a = LieAlgebraData::abelian(Mat::identity(2, 2)).unwrap();
        let space = Arc::new(IsotropyDecomposition::trivial(Arc::new(a)));
        let p = OrbitTensor::new(space, diag(&[1.0, 3.0])).unwrap();
        let o = group_oracle(&p, &CurvatureTensor::zeros(2)).unwrap();
        let point = InvariantPoint::new(p, o, 1e-10).unwrap();
        let x = MixedVector::new(Vector::from_vec(vec![1.0, 2.0]), Vector::from_vec(vec![0.3, -0.7]));
        for &t in &[0.0, 1.0, 100.0] {
            let s = deform_orbit_tensor(point.orbit(), t).unwrap();
            assert_eq!(ricci_gt_lower(&s, &point, &x).unwrap(), 0.0);
            assert_eq!(kappa_t_lower(&s, &point, &x, &x.clone()).unwrap(), 0.0);
        }
    }

    #[test]
    fn dimension_errors() {
        let point = su2_point();
        let s = deform_orbit_tensor(point.orbit(), 1.0).unwrap();
        let bad = MixedVector::vertical(Vector::zeros(2), 0);
        assert!(matches!(apply_ct(&s, &bad), Err(Error::DimensionMismatch { .. })));
        assert!(kappa_t_lower(&s, &point, &bad, &bad).is_err());
    }
}
