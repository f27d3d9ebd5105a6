use std::sync::Arc;

use super::{DeformationState, InvariantPoint, MixedVector};
use crate::error::{Error, Result};
use crate::lie::IsotropyDecomposition;
use crate::linalg::{self, Mat, Vector};
use crate::oracle::{deformed_metric, group_oracle, CurvatureTensor, LeftInvariantMetric};

/// A point of `G × N` with a left-invariant metric on `G` (acting on itself)
/// and a fixed curvature block on the horizontal factor `N`. Here `g_t` is
/// again left-invariant on `G`, so its curvature is computed exactly.
#[derive(Debug, Clone)]
pub struct ExactModel {
    split: Arc<IsotropyDecomposition>,
    horizontal: CurvatureTensor,
}

impl ExactModel {
    pub fn new(split: Arc<IsotropyDecomposition>, horizontal: CurvatureTensor) -> Result<Self> {
        if !split.is_trivial() {
            return Err(Error::UnsupportedMode(
                "exact curvature needs the orbit to be the whole group; use kappa_t_lower".into(),
            ));
        }
        Ok(Self { split, horizontal })
    }

    /// Check that `point` is of product type and that its vertical curvature
    /// is the left-invariant curvature of its orbit tensor.
    pub fn from_point(point: &InvariantPoint, tol: f64) -> Result<Self> {
        let model = Self::new(point.orbit().space().clone(), point.oracle().horizontal_block())?;
        let scale = point.oracle().tensor().max_abs().max(1.0);
        let mixed = point.oracle().mixed_component_norm();
        if mixed > tol * scale {
            return Err(Error::UnsupportedMode(format!(
                "oracle couples horizontal and vertical directions ({mixed:e}); exact mode needs a product"
            )));
        }
        let expected = group_oracle(point.orbit(), &CurvatureTensor::zeros(0))?;
        let given = point.oracle().vertical_block();
        let gap = given
            .as_slice()
            .iter()
            .zip(expected.tensor().as_slice())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if gap > tol * scale {
            return Err(Error::invalid(
                "R",
                format!("vertical curvature differs from the left-invariant curvature of P by {gap:e}"),
            ));
        }
        Ok(model)
    }

    pub fn horizontal(&self) -> &CurvatureTensor {
        &self.horizontal
    }

    pub fn at(&self, s: &DeformationState) -> Result<ExactCurvature> {
        if !Arc::ptr_eq(s.orbit().space(), &self.split) && s.orbit().space().complement_basis() != self.split.complement_basis() {
            return Err(Error::invalid("P", "deformation state belongs to a different algebra split"));
        }
        let metric = deformed_metric(s)?;
        let r_alg = metric.curvature_tensor();
        let frame = self.split.complement_basis() * linalg::spd_inv_sqrt(s.pt());
        let k = s.orbit().dim();
        let ct_inverse = Mat::identity(k, k) + s.orbit().matrix() * s.t();
        Ok(ExactCurvature {
            split: self.split.clone(),
            metric,
            r_alg,
            frame,
            horizontal: self.horizontal.clone(),
            ct_inverse,
        })
    }
}

/// Curvature of `g_t` for an [`ExactModel`] at a fixed `t`.
#[derive(Debug, Clone)]
pub struct ExactCurvature {
    split: Arc<IsotropyDecomposition>,
    metric: LeftInvariantMetric,
    r_alg: CurvatureTensor,
    frame: Mat,
    horizontal: CurvatureTensor,
    ct_inverse: Mat,
}

impl ExactCurvature {
    pub fn metric(&self) -> &LeftInvariantMetric {
        &self.metric
    }

    fn check(&self, x: &MixedVector) -> Result<()> {
        if x.vertical.len() != self.split.complement_dim() {
            return Err(Error::dim("vertical coordinates", self.split.complement_dim(), x.vertical.len()));
        }
        if x.horizontal.len() != self.horizontal.dim() {
            return Err(Error::dim("horizontal coordinates", self.horizontal.dim(), x.horizontal.len()));
        }
        Ok(())
    }

    /// `R_{g_t}(x, y, y, x)` without reparametrization.
    pub fn sectional(&self, x: &MixedVector, y: &MixedVector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let u = self.split.to_algebra(&x.vertical);
        let v = self.split.to_algebra(&y.vertical);
        Ok(self.r_alg.sectional(&u, &v) + self.horizontal.sectional(&x.horizontal, &y.horizontal))
    }

    /// `κ_t(x, y) = R_{g_t}(C_t^{-1}x, C_t^{-1}y, C_t^{-1}y, C_t^{-1}x)`.
    pub fn kappa(&self, x: &MixedVector, y: &MixedVector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let xr = MixedVector::new(x.horizontal.clone(), &self.ct_inverse * &x.vertical);
        let yr = MixedVector::new(y.horizontal.clone(), &self.ct_inverse * &y.vertical);
        self.sectional(&xr, &yr)
    }

    /// `Ric_{g_t}(x, x)`.
    pub fn ricci(&self, x: &MixedVector) -> Result<f64> {
        self.check(x)?;
        let u = self.split.to_algebra(&x.vertical);
        let mut total = 0.0;
        for j in 0..self.frame.ncols() {
            let f = self.frame.column(j).into_owned();
            total += self.r_alg.sectional(&f, &u);
        }
        let h = self.horizontal.dim();
        let mut e = Vector::zeros(h);
        for j in 0..h {
            e[j] = 1.0;
            total += self.horizontal.sectional(&e, &x.horizontal);
            e[j] = 0.0;
        }
        Ok(total)
    }
}

/// `κ_t(x, y)` computed from the curvature of `g_t` itself.
pub fn kappa_t_exact(s: &DeformationState, model: &ExactModel, x: &MixedVector, y: &MixedVector) -> Result<f64> {
    model.at(s)?.kappa(x, y)
}

/// `Ric_{g_t}(x, x)` computed from the curvature of `g_t` itself.
pub fn ricci_gt_exact(s: &DeformationState, model: &ExactModel, x: &MixedVector) -> Result<f64> {
    model.at(s)?.ricci(x)
}

/// The residual `z_t = κ_t - κ_0 - (t³/4)‖[PU,PV]‖²_Q`. A value below
/// `-1e-8` (relative) is reported as an error since `z_t` is non-negative.
pub fn z_t_extract(
    s: &DeformationState,
    point: &InvariantPoint,
    model: &ExactModel,
    x: &MixedVector,
    y: &MixedVector,
) -> Result<f64> {
    let exact = kappa_t_exact(s, model, x, y)?;
    z_from_exact(s, point, exact, x, y)
}

pub(crate) fn z_from_exact(
    s: &DeformationState,
    point: &InvariantPoint,
    exact: f64,
    x: &MixedVector,
    y: &MixedVector,
) -> Result<f64> {
    let k0 = point.kappa0(x, y)?;
    let z = exact - k0 - s.t().powi(3) / 4.0 * s.bracket_term(x, y);
    if z < -1e-8 * exact.abs().max(1.0) {
        return Err(Error::invalid("z_t", format!("residual is negative ({z:e})")));
    }
    Ok(z)
}
