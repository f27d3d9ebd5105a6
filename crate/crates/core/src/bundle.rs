//! Cheeger deformation of an associated bundle `M = (𝒫 × F)/G`.
//!
//! `G` acts freely on `𝒫` with orbit tensor `P` on all of `g`, and on `F`
//! with isotropy `g_f` and orbit tensor `P_F` on `m_f`. The metric `h_t` on
//! `M` is the submersion metric of `g_t × g_F` under `π̄`.
//!
//! Coordinates: `V ∈ g` in the `Q`-orthonormal basis of `g`; `U, W ∈ m_f` in
//! the complement basis of the fiber split. `Π: g → m_f` is the `Q`-orthogonal
//! projection in these coordinates and `ι = Πᵀ` the inclusion.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::cheeger::{
    deform_orbit_tensor, kappa_t_lower, DeformationState, ExactCurvature, ExactModel, InvariantPoint, MixedVector,
    OrbitTensor,
};
use crate::error::{Error, Result};
use crate::lie::{IsotropyDecomposition, LieAlgebraData};
use crate::linalg::{self, Mat, Vector};
use crate::oracle::CurvatureOracle;

/// How `κ_t` terms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Drop the non-negative residual `z_t`. Always available.
    Lower,
    /// Curvature of `g_t` itself; needs a left-invariant product model.
    Exact,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lower" => Ok(Mode::Lower),
            "exact" => Ok(Mode::Exact),
            other => Err(format!("unknown mode `{other}` (expected lower or exact)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Lower => "lower",
            Mode::Exact => "exact",
        })
    }
}

/// Tangent vector `X + X_F + U^*` of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleVector {
    pub x: Vector,
    pub x_f: Vector,
    pub u: Vector,
}

impl BundleVector {
    pub fn new(x: Vector, x_f: Vector, u: Vector) -> Self {
        Self { x, x_f, u }
    }

    pub fn zeros(dims: BundleDims) -> Self {
        Self::new(Vector::zeros(dims.h_p), Vector::zeros(dims.h_f), Vector::zeros(dims.k))
    }

    /// Coordinates `[X, X_F, U]`.
    pub fn to_flat(&self) -> Vector {
        let mut out = Vector::zeros(self.x.len() + self.x_f.len() + self.u.len());
        let mut i = 0;
        for part in [&self.x, &self.x_f, &self.u] {
            for v in part.iter() {
                out[i] = *v;
                i += 1;
            }
        }
        out
    }

    pub fn from_flat(flat: &Vector, dims: BundleDims) -> Result<Self> {
        if flat.len() != dims.total() {
            return Err(Error::dim("bundle vector", dims.total(), flat.len()));
        }
        Ok(Self::new(
            flat.rows(0, dims.h_p).into_owned(),
            flat.rows(dims.h_p, dims.h_f).into_owned(),
            flat.rows(dims.h_p + dims.h_f, dims.k).into_owned(),
        ))
    }
}

/// Tangent vector `(X + V^∨, X_F + W^*)` of `𝒫 × F`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector {
    pub x: Vector,
    pub v: Vector,
    pub x_f: Vector,
    pub w: Vector,
}

impl ProductVector {
    pub fn principal(&self) -> MixedVector {
        MixedVector::new(self.x.clone(), self.v.clone())
    }

    pub fn fiber(&self) -> MixedVector {
        MixedVector::new(self.x_f.clone(), self.w.clone())
    }
}

/// Sizes of the three blocks of a [`BundleVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BundleDims {
    /// `𝒫`-horizontal directions.
    pub h_p: usize,
    /// `F`-horizontal directions.
    pub h_f: usize,
    /// `dim m_f`.
    pub k: usize,
}

impl BundleDims {
    pub fn total(&self) -> usize {
        self.h_p + self.h_f + self.k
    }
}

/// Pointwise data of the bundle.
#[derive(Debug, Clone)]
pub struct BundleData {
    group: Arc<IsotropyDecomposition>,
    fiber: Arc<IsotropyDecomposition>,
    point_p: InvariantPoint,
    point_f: InvariantPoint,
    pi: Mat,
    preserves_complement: bool,
    exact: Option<ExactModel>,
}

fn rename_oracle_error(err: Error, field: &str) -> Error {
    match err {
        Error::Invalid { reason, .. } => Error::invalid(format!("{field}.R"), reason),
        Error::DimensionMismatch { what, expected, found } => Error::dim(format!("{field} {what}"), expected, found),
        other => other,
    }
}

impl BundleData {
    pub fn new(
        fiber: Arc<IsotropyDecomposition>,
        p: Mat,
        p_f: Mat,
        oracle_p: CurvatureOracle,
        oracle_f: CurvatureOracle,
        tol: f64,
    ) -> Result<Self> {
        let algebra: Arc<LieAlgebraData> = fiber.algebra().clone();
        let group = Arc::new(IsotropyDecomposition::trivial(algebra.clone()));
        let p = OrbitTensor::named(group.clone(), p, "P")?;
        let p_f = OrbitTensor::named(fiber.clone(), p_f, "P_F")?;
        let point_p = InvariantPoint::new(p, oracle_p, tol).map_err(|e| rename_oracle_error(e, "oracle_P"))?;
        let point_f = InvariantPoint::new(p_f, oracle_f, tol).map_err(|e| rename_oracle_error(e, "oracle_F"))?;

        let pi = fiber.complement_basis().transpose() * algebra.q() * group.complement_basis();
        let n = algebra.dim();
        let iota = pi.transpose();
        let pm = &iota * &pi;
        let leak = (Mat::identity(n, n) - pm) * point_p.orbit().matrix() * &iota;
        let scale = linalg::max_abs(point_p.orbit().matrix()).max(1.0);
        let preserves_complement = linalg::max_abs(&leak) <= 1e-12 * scale;
        let exact = ExactModel::from_point(&point_p, tol.max(crate::tol::IDENTITY)).ok();
        Ok(Self {
            group,
            fiber,
            point_p,
            point_f,
            pi,
            preserves_complement,
            exact,
        })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraData> {
        self.group.algebra()
    }

    pub fn fiber_split(&self) -> &Arc<IsotropyDecomposition> {
        &self.fiber
    }

    pub fn group_split(&self) -> &Arc<IsotropyDecomposition> {
        &self.group
    }

    /// `(P, oracle_P)` at the point of `𝒫`.
    pub fn principal(&self) -> &InvariantPoint {
        &self.point_p
    }

    /// `(P_F, oracle_F)` at the point of `F`.
    pub fn fiber(&self) -> &InvariantPoint {
        &self.point_f
    }

    pub fn p(&self) -> &OrbitTensor {
        self.point_p.orbit()
    }

    pub fn p_f(&self) -> &OrbitTensor {
        self.point_f.orbit()
    }

    /// `Π: g → m_f`, a `k × n` matrix.
    pub fn projection(&self) -> &Mat {
        &self.pi
    }

    /// Whether `P` maps `m_f` into itself. When it does, the projected
    /// formulas coincide with the unprojected ones.
    pub fn preserves_complement(&self) -> bool {
        self.preserves_complement
    }

    pub fn exact_model(&self) -> Option<&ExactModel> {
        self.exact.as_ref()
    }

    /// Forget the exact-mode capability.
    pub fn disable_exact(&mut self) {
        self.exact = None;
    }

    pub fn dims(&self) -> BundleDims {
        BundleDims {
            h_p: self.point_p.horizontal_dim(),
            h_f: self.point_f.horizontal_dim(),
            k: self.fiber.complement_dim(),
        }
    }

    fn check(&self, v: &BundleVector) -> Result<()> {
        let d = self.dims();
        if v.x.len() != d.h_p {
            return Err(Error::dim("X", d.h_p, v.x.len()));
        }
        if v.x_f.len() != d.h_f {
            return Err(Error::dim("X_F", d.h_f, v.x_f.len()));
        }
        if v.u.len() != d.k {
            return Err(Error::dim("U", d.k, v.u.len()));
        }
        Ok(())
    }

    /// `dπ̄(X + V^∨, X_F + W^*) = X + X_F + (W − ΠV)^*`.
    pub fn dpibar(&self, w: &ProductVector) -> BundleVector {
        BundleVector::new(w.x.clone(), w.x_f.clone(), &w.w - &self.pi * &w.v)
    }

    /// The limit bound `Ric^h_g(X) + Ric^h_{g_F}(X_F) + ¼Σ_k‖[v_k, U]‖²_Q`.
    pub fn ricci_asymptotic_lb(&self, v: &BundleVector) -> Result<f64> {
        self.check(v)?;
        let k = self.dims().k;
        let n = self.algebra().dim();
        let rp = crate::cheeger::ricci_h(&self.point_p, &MixedVector::horizontal(v.x.clone(), n))?;
        let rf = crate::cheeger::ricci_h(&self.point_f, &MixedVector::horizontal(v.x_f.clone(), k))?;
        Ok(rp + rf + self.fiber.normal_homogeneous_ricci(&v.u)?)
    }

    /// Matrix of [`ricci_asymptotic_lb`](Self::ricci_asymptotic_lb) in
    /// `[X, X_F, U]` coordinates; block diagonal.
    pub fn asymptotic_form_matrix(&self) -> Mat {
        let d = self.dims();
        let mut m = Mat::zeros(d.total(), d.total());
        let blocks = [
            self.point_p.oracle().horizontal_ricci_matrix(),
            self.point_f.oracle().horizontal_ricci_matrix(),
            self.fiber.normal_homogeneous_ricci_matrix(),
        ];
        let mut off = 0;
        for b in blocks {
            let s = b.nrows();
            m.view_mut((off, off), (s, s)).copy_from(&b);
            off += s;
        }
        m
    }

    /// All `t`-dependent operators at one `t`.
    pub fn at(&self, t: f64, mode: Mode) -> Result<BundleState<'_>> {
        BundleState::new(self, t, mode)
    }
}

/// The bundle at a fixed `t`.
#[derive(Debug, Clone)]
pub struct BundleState<'a> {
    data: &'a BundleData,
    deformation: DeformationState,
    mode: Mode,
    ptilde: Mat,
    ptilde_sqrt: Mat,
    ctilde: Mat,
    ptilde_gap: f64,
    ctilde_gap: f64,
    /// `V = lift_v · U`, i.e. `−P_t^{-1} ι P̃_t`.
    lift_v: Mat,
    /// `W = lift_w · U`, i.e. `P_F^{-1} P̃_t`.
    lift_w: Mat,
    basis: Vec<ProductVector>,
    exact: Option<ExactCurvature>,
}

impl<'a> BundleState<'a> {
    fn new(data: &'a BundleData, t: f64, mode: Mode) -> Result<Self> {
        let s = deform_orbit_tensor(data.p(), t)?;
        let pi = &data.pi;
        let iota = pi.transpose();
        let k = data.dims().k;
        let id = Mat::identity(k, k);
        let pf = data.p_f().matrix();
        let pf_inv = data.p_f().inverse();

        let coupling = linalg::symmetrized(&(pi * s.pt_inverse() * &iota));
        let ptilde_inv = pf_inv + &coupling;
        let ptilde = linalg::spd_inverse(&ptilde_inv, "P̃_t")?;
        let alt = pf * linalg::inverse(&(&id + &coupling * pf), "1 + ΠP_t^{-1}ιP_F")?;
        let mut ptilde_gap = linalg::max_abs(&(&ptilde - alt));
        if data.preserves_complement {
            let restricted = linalg::spd_inverse(&linalg::symmetrized(&(pi * s.pt() * &iota)), "ΠP_tι")?;
            let unprojected = linalg::spd_inverse(&(pf_inv + restricted), "P̃_t")?;
            ptilde_gap = ptilde_gap.max(linalg::max_abs(&(&ptilde - unprojected)));
        }

        let ctilde = -(pi * data.p().inverse() * &iota * &ptilde);
        let via_ct = -(pi * (s.ct_vertical() * s.pt_inverse()) * &iota * &ptilde);
        let ctilde_gap = linalg::max_abs(&(&ctilde - via_ct));
        if k > 0 {
            let sv = ctilde.clone().svd(false, false).singular_values;
            let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
            if !(lo > 1e-14 * hi.max(f64::MIN_POSITIVE)) {
                return Err(Error::Singular("C̃_t".into()));
            }
        }

        let lift_v = -(s.pt_inverse() * &iota * &ptilde);
        let lift_w = pf_inv * &ptilde;
        let ptilde_sqrt = linalg::spd_sqrt(&ptilde);

        let exact = match mode {
            Mode::Lower => None,
            Mode::Exact => {
                let model = data.exact.as_ref().ok_or_else(|| {
                    Error::UnsupportedMode(
                        "scenario has no exact-mode capability for κ_t; use --mode lower".into(),
                    )
                })?;
                Some(model.at(&s)?)
            }
        };

        let mut state = Self {
            data,
            deformation: s,
            mode,
            ptilde,
            ptilde_sqrt,
            ctilde,
            ptilde_gap,
            ctilde_gap,
            lift_v,
            lift_w,
            basis: Vec::new(),
            exact,
        };
        state.basis = state.build_basis();
        Ok(state)
    }

    pub fn data(&self) -> &BundleData {
        self.data
    }

    pub fn t(&self) -> f64 {
        self.deformation.t()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn deformation(&self) -> &DeformationState {
        &self.deformation
    }

    /// `P̃_t = (P_F^{-1} + Π P_t^{-1} ι)^{-1}` on `m_f`.
    pub fn ptilde(&self) -> &Mat {
        &self.ptilde
    }

    pub fn ptilde_sqrt(&self) -> &Mat {
        &self.ptilde_sqrt
    }

    /// `C̃_t = −Π P^{-1} ι P̃_t` on `m_f`.
    pub fn ctilde(&self) -> &Mat {
        &self.ctilde
    }

    /// Largest entry of the difference between the closed forms of `P̃_t`.
    pub fn ptilde_gap(&self) -> f64 {
        self.ptilde_gap
    }

    /// Largest entry of the difference between the closed forms of `C̃_t`.
    pub fn ctilde_gap(&self) -> f64 {
        self.ctilde_gap
    }

    /// `𝓛(X + X_F + U^*) = (X − (P_t^{-1}P̃_t U)^∨, X_F + (P_F^{-1}P̃_t U)^*)`.
    pub fn horizontal_lift(&self, v: &BundleVector) -> Result<ProductVector> {
        self.data.check(v)?;
        Ok(ProductVector {
            x: v.x.clone(),
            v: &self.lift_v * &v.u,
            x_f: v.x_f.clone(),
            w: &self.lift_w * &v.u,
        })
    }

    /// `g_t × g_F` inner product.
    pub fn product_inner(&self, a: &ProductVector, b: &ProductVector) -> f64 {
        a.x.dot(&b.x)
            + a.v.dot(&(self.deformation.pt() * &b.v))
            + a.x_f.dot(&b.x_f)
            + a.w.dot(&(self.data.p_f().matrix() * &b.w))
    }

    /// The covector `Z ↦ g_t×g_F(w, (Z^∨, Z^*))` on `g`; zero iff `w` is
    /// `π̄`-horizontal.
    pub fn vertical_pairing(&self, w: &ProductVector) -> Vector {
        self.deformation.pt() * &w.v + self.data.pi.transpose() * (self.data.p_f().matrix() * &w.w)
    }

    fn build_basis(&self) -> Vec<ProductVector> {
        let d = self.data.dims();
        let n = self.data.algebra().dim();
        let mut out = Vec::with_capacity(d.total());
        for i in 0..d.h_p {
            let mut x = Vector::zeros(d.h_p);
            x[i] = 1.0;
            out.push(ProductVector {
                x,
                v: Vector::zeros(n),
                x_f: Vector::zeros(d.h_f),
                w: Vector::zeros(d.k),
            });
        }
        let iota = self.data.pi.transpose();
        let v_block = -(self.deformation.pt_inverse() * &iota * &self.ptilde_sqrt);
        let w_block = self.data.p_f().inverse() * &self.ptilde_sqrt;
        for c in 0..d.k {
            out.push(ProductVector {
                x: Vector::zeros(d.h_p),
                v: v_block.column(c).into_owned(),
                x_f: Vector::zeros(d.h_f),
                w: w_block.column(c).into_owned(),
            });
        }
        for j in 0..d.h_f {
            let mut x_f = Vector::zeros(d.h_f);
            x_f[j] = 1.0;
            out.push(ProductVector {
                x: Vector::zeros(d.h_p),
                v: Vector::zeros(n),
                x_f,
                w: Vector::zeros(d.k),
            });
        }
        out
    }

    /// `𝓑_t`: `(e_i^B, 0)`, `(−P_t^{-1}ιP̃_t^{1/2}v_k^∨, P_F^{-1}P̃_t^{1/2}v_k^*)`,
    /// `(0, e_j^F)`.
    pub fn horizontal_basis(&self) -> &[ProductVector] {
        &self.basis
    }

    pub fn gram(&self, vs: &[ProductVector]) -> Mat {
        Mat::from_fn(vs.len(), vs.len(), |i, j| self.product_inner(&vs[i], &vs[j]))
    }

    fn kappa(&self, x: &MixedVector, y: &MixedVector) -> Result<f64> {
        match &self.exact {
            Some(e) => e.kappa(x, y),
            None => kappa_t_lower(&self.deformation, &self.data.point_p, x, y),
        }
    }

    /// `κ_t(X + U^∨, Y + V^∨) + K_{g_F}(X_F − (P_F^{-1}ΠPιU)^*, Y_F − ...)`,
    /// a lower bound for the reparametrized sectional curvature of `h_t`.
    pub fn sec_lower(&self, x: &BundleVector, y: &BundleVector) -> Result<f64> {
        self.data.check(x)?;
        self.data.check(y)?;
        let iota = self.data.pi.transpose();
        let principal = |b: &BundleVector| MixedVector::new(b.x.clone(), &iota * &b.u);
        let shift = self.data.p_f().inverse() * &self.data.pi * self.data.p().matrix() * &iota;
        let fiber = |b: &BundleVector| MixedVector::new(b.x_f.clone(), -(&shift * &b.u));
        let k = self.kappa(&principal(x), &principal(y))?;
        let kf = self.data.point_f.kappa0(&fiber(x), &fiber(y))?;
        Ok(k + kf)
    }

    /// Lower bound for `Ric_{h_t}(x)`: over `b ∈ 𝓑_t` with `a = 𝓛(x)`,
    /// `Σ κ_t(C_t a_𝒫, C_t b_𝒫) + K_{g_F}(a_F, b_F)`.
    pub fn ricci_ht_lower(&self, x: &BundleVector) -> Result<f64> {
        let a = self.horizontal_lift(x)?;
        let ct = self.deformation.ct_vertical();
        let ca = MixedVector::new(a.x.clone(), ct * &a.v);
        let af = a.fiber();
        let mut total = 0.0;
        for b in &self.basis {
            let cb = MixedVector::new(b.x.clone(), ct * &b.v);
            total += self.kappa(&ca, &cb)?;
            total += self.data.point_f.kappa0(&af, &b.fiber())?;
        }
        Ok(total)
    }

    /// `(‖tP̃_t − I‖, ‖ΠP_t^{-1}ιP̃_t − I‖)` in operator norm.
    pub fn asymptotic_residuals(&self) -> (f64, f64) {
        let k = self.data.dims().k;
        let id = Mat::identity(k, k);
        let t = self.t();
        let a = &self.ptilde * t - &id;
        let b = &self.data.pi * self.deformation.pt_inverse() * self.data.pi.transpose() * &self.ptilde - &id;
        (linalg::op_norm(&a), linalg::op_norm(&b))
    }
}

pub fn ptilde(b: &BundleData, t: f64) -> Result<Mat> {
    Ok(b.at(t, Mode::Lower)?.ptilde.clone())
}

pub fn ctilde(b: &BundleData, t: f64) -> Result<Mat> {
    Ok(b.at(t, Mode::Lower)?.ctilde.clone())
}

pub fn horizontal_lift(b: &BundleData, t: f64, v: &BundleVector) -> Result<ProductVector> {
    b.at(t, Mode::Lower)?.horizontal_lift(v)
}

pub fn dpibar(b: &BundleData, w: &ProductVector) -> BundleVector {
    b.dpibar(w)
}

pub fn horizontal_basis(b: &BundleData, t: f64) -> Result<Vec<ProductVector>> {
    Ok(b.at(t, Mode::Lower)?.basis)
}

pub fn sec_lower(b: &BundleData, t: f64, x: &BundleVector, y: &BundleVector, mode: Mode) -> Result<f64> {
    b.at(t, mode)?.sec_lower(x, y)
}

pub fn ricci_ht_lower(b: &BundleData, t: f64, x: &BundleVector) -> Result<f64> {
    b.at(t, Mode::Lower)?.ricci_ht_lower(x)
}

pub fn ricci_asymptotic_lb(b: &BundleData, x: &BundleVector) -> Result<f64> {
    b.ricci_asymptotic_lb(x)
}

/// Residuals of `tP̃_t → 1` and `P_t^{-1}P̃_t → 1`; needs `t > 0`.
pub fn asymptotic_check(b: &BundleData, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("asymptotic check needs t > 0, got {t}")));
    }
    Ok(b.at(t, Mode::Lower)?.asymptotic_residuals())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{group_oracle, CurvatureTensor};

    fn diag(xs: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_row_slice(xs))
    }

    fn e(i: usize, n: usize) -> Vector {
        Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    fn su2_full(p: f64) -> BundleData {
        let fiber = Arc::new(IsotropyDecomposition::trivial(Arc::new(LieAlgebraData::su2())));
        let group = Arc::new(IsotropyDecomposition::trivial(fiber.algebra().clone()));
        let pm = Mat::identity(3, 3) * p;
        let op = group_oracle(&OrbitTensor::new(group, pm.clone()).unwrap(), &CurvatureTensor::zeros(0)).unwrap();
        let of = group_oracle(&OrbitTensor::identity(fiber.clone()), &CurvatureTensor::zeros(0)).unwrap();
        BundleData::new(fiber, pm, Mat::identity(3, 3), op, of, 1e-10).unwrap()
    }

    fn u(v: Vector) -> BundleVector {
        BundleVector::new(Vector::zeros(0), Vector::zeros(0), v)
    }

    fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
        linalg::max_abs(&(a - b)) <= tol
    }

    #[test]
    fn ptilde_scalar_values() {
        let b = su2_full(1.0);
        let id = Mat::identity(3, 3);
        assert!(close(&ptilde(&b, 0.0).unwrap(), &(&id * 0.5), 1e-15));
        assert!(close(&ptilde(&b, 2.0).unwrap(), &(&id * 0.25), 1e-15));
        let big = ptilde(&b, 1e6).unwrap();
        assert!(linalg::op_norm(&(big * 1e6 - &id)) <= 2e-6);
        assert!(b.preserves_complement());
    }

    #[test]
    fn ctilde_values() {
        let id = Mat::identity(3, 3);
        assert!(close(&ctilde(&su2_full(1.0), 0.0).unwrap(), &(&id * -0.5), 1e-15));
        let b = su2_full(2.0);
        let st = b.at(0.0, Mode::Lower).unwrap();
        assert!(close(st.ctilde(), &(&id * (-1.0 / 3.0)), 1e-15));
        assert!(st.ctilde_gap() < 1e-15 && st.ptilde_gap() < 1e-15);
        let far = ctilde(&su2_full(1.0), 1e8).unwrap();
        assert!(linalg::op_norm(&far) < 1e-7);
    }

    #[test]
    fn lift_examples() {
        let b = su2_full(1.0);
        let uu = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let l0 = horizontal_lift(&b, 0.0, &u(uu.clone())).unwrap();
        assert!((&l0.v + &uu * 0.5).norm() < 1e-15 && (&l0.w - &uu * 0.5).norm() < 1e-15);
        let l2 = horizontal_lift(&b, 2.0, &u(uu.clone())).unwrap();
        assert!((&l2.v + &uu * 0.75).norm() < 1e-14 && (&l2.w - &uu * 0.25).norm() < 1e-15);
        assert!((b.dpibar(&l2).u - &uu).norm() < 1e-14);
        let st = b.at(2.0, Mode::Lower).unwrap();
        assert!(st.vertical_pairing(&l2).amax() < 1e-14);
    }

    #[test]
    fn dpibar_kills_diagonal_action() {
        let b = su2_full(1.0);
        let z = Vector::from_vec(vec![0.3, 0.1, -0.2]);
        let w = ProductVector {
            x: Vector::zeros(0),
            v: z.clone(),
            x_f: Vector::zeros(0),
            w: z.clone(),
        };
        assert!(b.dpibar(&w).u.norm() < 1e-15);
        let w = ProductVector { w: Vector::zeros(3), ..w };
        assert!((b.dpibar(&w).u + &z).norm() < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal_and_horizontal() {
        for p in [1.0, 2.0] {
            let b = su2_full(p);
            for &t in &[0.0, 1.0, 10.0] {
                let st = b.at(t, Mode::Lower).unwrap();
                let basis = st.horizontal_basis();
                assert!(close(&st.gram(basis), &Mat::identity(3, 3), 1e-12));
                for v in basis {
                    assert!(st.vertical_pairing(v).amax() < 1e-12);
                }
            }
        }
        let b = su2_full(1.0);
        let st = b.at(0.0, Mode::Lower).unwrap();
        let r = 0.5_f64.sqrt();
        assert!((&st.horizontal_basis()[0].v + e(0, 3) * r).norm() < 1e-15);
        assert!((&st.horizontal_basis()[0].w - e(0, 3) * r).norm() < 1e-15);
    }

    #[test]
    fn sec_lower_su2_at_zero() {
        let b = su2_full(1.0);
        let (x, y) = (u(e(0, 3)), u(e(1, 3)));
        let v = sec_lower(&b, 0.0, &x, &y, Mode::Lower).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        assert!(sec_lower(&b, 3.0, &x, &x, Mode::Lower).unwrap().abs() < 1e-14);
        let ex = sec_lower(&b, 1.0, &x, &y, Mode::Exact).unwrap();
        let lo = sec_lower(&b, 1.0, &x, &y, Mode::Lower).unwrap();
        assert!(ex >= lo - 1e-12);
    }

    #[test]
    fn ricci_lower_tends_to_half() {
        let b = su2_full(1.0);
        let x = u(e(0, 3));
        assert!((ricci_ht_lower(&b, 0.0, &x).unwrap() - 0.125).abs() < 1e-14);
        let far = ricci_ht_lower(&b, 1e6, &x).unwrap();
        assert!((far - 0.5).abs() < 1e-3);
        assert!((ricci_asymptotic_lb(&b, &x).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(ricci_asymptotic_lb(&b, &u(Vector::zeros(3))).unwrap(), 0.0);
    }

    #[test]
    fn asymptotic_residuals_scalar() {
        let b = su2_full(1.0);
        let (a, c) = asymptotic_check(&b, 1.0).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-14 && (c - 1.0 / 3.0).abs() < 1e-14);
        let (a, c) = asymptotic_check(&b, 1e6).unwrap();
        assert!(a <= 3e-6 && c <= 3e-6);
        assert!(matches!(asymptotic_check(&b, 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn partial_fiber_projection() {
        // F = SU(2)/U(1); a diagonal P preserves m_f = span{e1, e2}
        let alg = Arc::new(LieAlgebraData::su2());
        let fiber = Arc::new(crate::lie::isotropy_split(alg.clone(), &[e(2, 3)], 1e-10).unwrap());
        let group = Arc::new(IsotropyDecomposition::trivial(alg));
        let p = diag(&[1.0, 2.0, 3.0]);
        let op = group_oracle(&OrbitTensor::new(group, p.clone()).unwrap(), &CurvatureTensor::zeros(0)).unwrap();
        let pf = OrbitTensor::identity(fiber.clone());
        let of = crate::oracle::normal_homogeneous_oracle(&pf, &CurvatureTensor::zeros(0)).unwrap();
        let b = BundleData::new(fiber, p, Mat::identity(2, 2), op, of, 1e-10).unwrap();
        assert!(b.preserves_complement());
        let st = b.at(0.5, Mode::Lower).unwrap();
        // per eigenvalue λ: P̃ = 1/(1 + 1/λ + t)
        let expect = diag(&[1.0 / 2.5, 1.0 / 2.0]);
        assert!(close(st.ptilde(), &expect, 1e-14));
        assert!(close(&st.gram(st.horizontal_basis()), &Mat::identity(2, 2), 1e-12));
    }
}
