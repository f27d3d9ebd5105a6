use super::{CurvatureOracle, CurvatureTensor};
use crate::cheeger::OrbitTensor;
use crate::error::{Error, Result};
use crate::lie::IsotropyDecomposition;
use crate::linalg::Vector;

/// Curvature of the normal homogeneous space `G/H` with metric `Q`, in the
/// `Q`-orthonormal complement basis. The unreduced sectional curvature is
/// `‖[X,Y]_h‖² + ¼‖[X,Y]_m‖²`.
pub fn normal_homogeneous_tensor(split: &IsotropyDecomposition) -> CurvatureTensor {
    let alg = split.algebra();
    let pm = split.projector_m();
    let k = |x: &Vector, y: &Vector| {
        let b = alg.bracket_unchecked(&split.to_algebra(x), &split.to_algebra(y));
        let bm = pm * &b;
        let bh = &b - &bm;
        alg.norm_sq(&bh) + 0.25 * alg.norm_sq(&bm)
    };
    CurvatureTensor::from_sectional(split.complement_dim(), k)
}

/// Oracle for `(G/H, cQ) × N` when the orbit tensor is `P = c·I`.
pub fn normal_homogeneous_oracle(p: &OrbitTensor, horizontal: &CurvatureTensor) -> Result<CurvatureOracle> {
    let c = p.scalar_value().ok_or_else(|| {
        Error::UnsupportedMode("normal homogeneous oracle needs a scalar orbit tensor P = c·I".into())
    })?;
    // frame vectors v_a / √c on the metric cQ
    let vertical = normal_homogeneous_tensor(p.space()).scaled(1.0 / c);
    Ok(CurvatureOracle::from_blocks(&vertical, horizontal))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lie::{isotropy_split, LieAlgebraData};
    use crate::linalg::Mat;
    use crate::oracle::{group_oracle, LeftInvariantMetric};

    #[test]
    fn trivial_isotropy_matches_koszul() {
        for alg in [LieAlgebraData::su2(), LieAlgebraData::so(4)] {
            let n = alg.dim();
            let split = IsotropyDecomposition::trivial(Arc::new(alg));
            let t = normal_homogeneous_tensor(&split);
            let k = LeftInvariantMetric::new(split.algebra().clone(), Mat::identity(n, n))
                .unwrap()
                .curvature_tensor();
            let gap = t.as_slice().iter().zip(k.as_slice()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(gap < 1e-13);
        }
    }

    #[test]
    fn round_two_sphere_from_su2() {
        let e3 = Vector::from_vec(vec![0.0, 0.0, 1.0]);
        let split = isotropy_split(Arc::new(LieAlgebraData::su2()), &[e3], 1e-10).unwrap();
        let t = normal_homogeneous_tensor(&split);
        assert!(t.validate(1e-13).passed);
        // ‖[e1,e2]_h‖² = 1
        let (a, b) = (Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![0.0, 1.0]));
        assert!((t.sectional(&a, &b) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_tensor_scales_curvature() {
        let split = Arc::new(IsotropyDecomposition::trivial(Arc::new(LieAlgebraData::su2())));
        let p = OrbitTensor::new(split, Mat::identity(3, 3) * 2.0).unwrap();
        let nh = normal_homogeneous_oracle(&p, &CurvatureTensor::zeros(0)).unwrap();
        let koszul = group_oracle(&p, &CurvatureTensor::zeros(0)).unwrap();
        let gap = nh
            .tensor()
            .as_slice()
            .iter()
            .zip(koszul.tensor().as_slice())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(gap < 1e-13);
    }
}
