use std::sync::Arc;

use super::{CurvatureOracle, CurvatureTensor};
use crate::cheeger::{DeformationState, OrbitTensor};
use crate::error::{Error, Result};
use crate::lie::{IsotropyDecomposition, LieAlgebraData};
use crate::linalg::{self, Mat, Vector};

/// A left-invariant metric on a Lie group, as an SPD matrix in the algebra
/// basis.
#[derive(Debug, Clone)]
pub struct LeftInvariantMetric {
    algebra: Arc<LieAlgebraData>,
    metric: Mat,
}

impl LeftInvariantMetric {
    pub fn new(algebra: Arc<LieAlgebraData>, metric: Mat) -> Result<Self> {
        let n = algebra.dim();
        if metric.nrows() != n || metric.ncols() != n {
            return Err(Error::malformed(
                "metric",
                format!("expected {n}x{n}, found {}x{}", metric.nrows(), metric.ncols()),
            ));
        }
        let scale = linalg::max_abs(&metric).max(1.0);
        if linalg::asymmetry(&metric) > 1e-12 * scale {
            return Err(Error::malformed("metric", "matrix is not symmetric"));
        }
        let metric = linalg::symmetrized(&metric);
        linalg::require_spd(&metric, "metric")?;
        Ok(Self { algebra, metric })
    }

    /// The metric `Q(PU, V)` on the whole group; needs a free action.
    pub fn from_orbit_tensor(p: &OrbitTensor) -> Result<Self> {
        Self::on_group(p.space(), p.matrix())
    }

    fn on_group(split: &IsotropyDecomposition, p: &Mat) -> Result<Self> {
        if !split.is_trivial() {
            return Err(Error::UnsupportedMode(
                "left-invariant metric needs the orbit to be the whole group".into(),
            ));
        }
        let q = split.algebra().q();
        let vc = split.complement_basis();
        let g = q * vc * p * vc.transpose() * q;
        Self::new(split.algebra().clone(), linalg::symmetrized(&g))
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraData> {
        &self.algebra
    }

    pub fn metric(&self) -> &Mat {
        &self.metric
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.metric * y))
    }

    /// Koszul formula for left-invariant fields:
    /// `2⟨∇_x y, z⟩ = ⟨[x,y],z⟩ − ⟨[y,z],x⟩ + ⟨[z,x],y⟩`.
    pub fn connection_coefficients(&self) -> Result<Connection> {
        let n = self.algebra.dim();
        let ginv = linalg::spd_inverse(&self.metric, "metric")?;
        // br[a][b] = ⟨[b_a, b_b], ·⟩ as a covector
        let mut br = vec![Vector::zeros(n); n * n];
        for a in 0..n {
            for b in 0..n {
                let mut v = Vector::zeros(n);
                for m in 0..n {
                    v[m] = self.algebra.c(a, b, m);
                }
                br[a * n + b] = &self.metric * v;
            }
        }
        let mut gamma = vec![0.0; n * n * n];
        for x in 0..n {
            for y in 0..n {
                let mut lowered = Vector::zeros(n);
                for z in 0..n {
                    lowered[z] = 0.5 * (br[x * n + y][z] - br[y * n + z][x] + br[z * n + x][y]);
                }
                let raised = &ginv * lowered;
                for k in 0..n {
                    gamma[(x * n + y) * n + k] = raised[k];
                }
            }
        }
        Ok(Connection { dim: n, gamma })
    }

    /// `R_abcd = ⟨R(b_a, b_b) b_c, b_d⟩` in the algebra basis, with
    /// `R(x,y)z = ∇_x∇_y z − ∇_y∇_x z − ∇_[x,y] z`.
    pub fn curvature_tensor(&self) -> CurvatureTensor {
        let n = self.algebra.dim();
        let conn = self
            .connection_coefficients()
            .expect("metric was checked SPD on construction");
        let ops: Vec<Mat> = (0..n).map(|x| conn.operator(x)).collect();
        let mut out = CurvatureTensor::zeros(n);
        for a in 0..n {
            for b in 0..n {
                let mut r = &ops[a] * &ops[b] - &ops[b] * &ops[a];
                for m in 0..n {
                    let c = self.algebra.c(a, b, m);
                    if c != 0.0 {
                        r -= &ops[m] * c;
                    }
                }
                let lowered = &self.metric * r;
                for c in 0..n {
                    for d in 0..n {
                        out.set(a, b, c, d, lowered[(d, c)]);
                    }
                }
            }
        }
        out
    }

    /// Metric-orthonormal frame `G^{-1/2}` in the algebra basis.
    pub fn orthonormal_frame(&self) -> Mat {
        linalg::spd_inv_sqrt(&self.metric)
    }

    /// Oracle for the group with this metric, in the frame
    /// [`orthonormal_frame`](Self::orthonormal_frame), followed by a
    /// horizontal product block.
    pub fn oracle(&self, horizontal: &CurvatureTensor) -> CurvatureOracle {
        let vertical = self.curvature_tensor().transform(&self.orthonormal_frame());
        CurvatureOracle::from_blocks(&vertical, horizontal)
    }

    /// `Ric(x, x)` for `x` in algebra coordinates.
    pub fn ricci(&self, x: &Vector) -> f64 {
        let r = self.curvature_tensor();
        let frame = self.orthonormal_frame();
        (0..frame.ncols())
            .map(|j| r.sectional(&frame.column(j).into_owned(), x))
            .sum()
    }
}

/// Levi-Civita connection of a left-invariant metric:
/// `∇_{b_x} b_y = Σ_k Γ[x][y][k] b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    dim: usize,
    gamma: Vec<f64>,
}

impl Connection {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self, x: usize, y: usize, k: usize) -> f64 {
        self.gamma[(x * self.dim + y) * self.dim + k]
    }

    /// `∇_x` as a matrix acting on algebra coordinates.
    pub fn operator(&self, x: usize) -> Mat {
        let n = self.dim;
        Mat::from_fn(n, n, |k, y| self.gamma(x, y, k))
    }

    pub fn nabla(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            out += self.operator(a) * y * x[a];
        }
        out
    }

    /// Largest entry of `∇_x y − ∇_y x − [x, y]` over basis pairs.
    pub fn torsion_residual(&self, algebra: &LieAlgebraData) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                for k in 0..n {
                    let t = self.gamma(x, y, k) - self.gamma(y, x, k) - algebra.c(x, y, k);
                    worst = worst.max(t.abs());
                }
            }
        }
        worst
    }

    /// Largest `|⟨∇_x y, z⟩ + ⟨y, ∇_x z⟩|` over basis triples.
    pub fn compatibility_residual(&self, metric: &Mat) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for x in 0..n {
            let a = metric * self.operator(x);
            let s = &a + a.transpose();
            worst = worst.max(linalg::max_abs(&s));
        }
        worst
    }
}

/// The left-invariant metric `g_t` on a group with orbit tensor `P_t`.
pub fn deformed_metric(s: &DeformationState) -> Result<LeftInvariantMetric> {
    LeftInvariantMetric::on_group(s.orbit().space(), s.pt())
}

/// Algebra coordinates of the vertical oracle frame `(P^{-1/2} v_a)^*`.
pub fn orbit_frame(p: &OrbitTensor) -> Mat {
    p.space().complement_basis() * p.inv_sqrt()
}

/// Oracle at a point of `G × N`: the left-invariant metric of `P` on `G` in
/// the vertical frame, and `horizontal` on `N`.
pub fn group_oracle(p: &OrbitTensor, horizontal: &CurvatureTensor) -> Result<CurvatureOracle> {
    let metric = LeftInvariantMetric::from_orbit_tensor(p)?;
    let vertical = metric.curvature_tensor().transform(&orbit_frame(p));
    Ok(CurvatureOracle::from_blocks(&vertical, horizontal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheeger::deform_orbit_tensor;

    fn su2() -> Arc<LieAlgebraData> {
        Arc::new(LieAlgebraData::su2())
    }

    fn e(i: usize, n: usize) -> Vector {
        Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    fn diag(xs: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_row_slice(xs))
    }

    #[test]
    fn biinvariant_connection_is_half_bracket() {
        let m = LeftInvariantMetric::new(su2(), Mat::identity(3, 3)).unwrap();
        let conn = m.connection_coefficients().unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let half = m.algebra().bracket(&e(x, 3), &e(y, 3)).unwrap() * 0.5;
                assert!((conn.nabla(&e(x, 3), &e(y, 3)) - half).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn abelian_is_flat() {
        let a = Arc::new(LieAlgebraData::abelian(diag(&[1.0, 2.0, 3.0])).unwrap());
        let m = LeftInvariantMetric::new(a, diag(&[1.0, 2.0, 3.0])).unwrap();
        assert!(m.connection_coefficients().unwrap().gamma.iter().all(|g| *g == 0.0));
        assert_eq!(m.curvature_tensor().max_abs(), 0.0);
    }

    #[test]
    fn berger_connection_and_curvature() {
        let eps2 = 0.5;
        let m = LeftInvariantMetric::new(su2(), diag(&[eps2, 1.0, 1.0])).unwrap();
        let conn = m.connection_coefficients().unwrap();
        let (e1, e2, e3) = (e(0, 3), e(1, 3), e(2, 3));
        let close = |a: Vector, b: Vector| (a - b).norm() < 1e-14;
        assert!(close(conn.nabla(&e1, &e2), &e3 * (1.0 - eps2 / 2.0)));
        assert!(close(conn.nabla(&e2, &e1), &e3 * (-eps2 / 2.0)));
        assert!(close(conn.nabla(&e2, &e3), &e1 * 0.5));
        assert!(close(conn.nabla(&e3, &e2), &e1 * -0.5));
        assert!(close(conn.nabla(&e3, &e1), &e2 * (eps2 / 2.0)));
        assert!(close(conn.nabla(&e1, &e3), &e2 * (eps2 / 2.0 - 1.0)));
        assert!(conn.torsion_residual(m.algebra()) < 1e-15);
        assert!(conn.compatibility_residual(m.metric()) < 1e-15);

        let r = m.curvature_tensor();
        assert!(r.validate(1e-12).passed);
        let f1 = &e1 / eps2.sqrt();
        assert!((r.sectional(&e2, &e3) - (1.0 - 0.75 * eps2)).abs() < 1e-14);
        assert!((r.sectional(&f1, &e2) - eps2 / 4.0).abs() < 1e-14);
        assert!((r.sectional(&f1, &e3) - eps2 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn biinvariant_sectional_is_quarter_bracket() {
        for alg in [LieAlgebraData::su2(), LieAlgebraData::so(4)] {
            let n = alg.dim();
            let alg = Arc::new(alg);
            let m = LeftInvariantMetric::new(alg.clone(), Mat::identity(n, n)).unwrap();
            let r = m.curvature_tensor();
            assert!(r.validate(1e-12).passed);
            for a in 0..n {
                for b in 0..n {
                    let br = alg.bracket(&e(a, n), &e(b, n)).unwrap();
                    assert!((r.sectional(&e(a, n), &e(b, n)) - 0.25 * alg.norm_sq(&br)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn deformed_metric_per_eigenvalue() {
        let split = Arc::new(IsotropyDecomposition::trivial(su2()));
        let p = OrbitTensor::identity(split.clone());
        let g = deformed_metric(&deform_orbit_tensor(&p, 1.0).unwrap()).unwrap();
        assert!(linalg::max_abs(&(g.metric() - Mat::identity(3, 3) * 0.5)) < 1e-15);

        let p = OrbitTensor::new(split.clone(), diag(&[1.0, 2.0, 2.0])).unwrap();
        let g = deformed_metric(&deform_orbit_tensor(&p, 1.0).unwrap()).unwrap();
        assert!(linalg::max_abs(&(g.metric() - diag(&[0.5, 2.0 / 3.0, 2.0 / 3.0]))) < 1e-15);
        let g0 = deformed_metric(&deform_orbit_tensor(&p, 0.0).unwrap()).unwrap();
        assert_eq!(g0.metric(), p.matrix());

        let partial = crate::lie::isotropy_split(su2(), &[e(2, 3)], 1e-10).unwrap();
        let p = OrbitTensor::identity(Arc::new(partial));
        let err = deformed_metric(&deform_orbit_tensor(&p, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedMode(_)));
    }

    #[test]
    fn ricci_of_su2() {
        let m = LeftInvariantMetric::new(su2(), Mat::identity(3, 3)).unwrap();
        assert!((m.ricci(&e(0, 3)) - 0.5).abs() < 1e-15);
        let o = m.oracle(&CurvatureTensor::zeros(0));
        assert!((o.ricci(&e(1, 3)) - 0.5).abs() < 1e-15);
    }
}
