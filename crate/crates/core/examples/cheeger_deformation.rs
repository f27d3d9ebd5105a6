//! Cheeger deformation of a Berger orbit tensor: closed forms for `P_t`, the
//! scaled eigenframe, and the lower bound against exact sectional curvature.

use std::sync::Arc;

use curvforge::cheeger::{
    deform_orbit_tensor, eigenframe, kappa_t_exact, kappa_t_lower, z_t_extract, ExactModel, InvariantPoint,
    MixedVector, OrbitTensor,
};
use curvforge::lie::{IsotropyDecomposition, LieAlgebraData};
use curvforge::linalg::{Mat, Vector};
use curvforge::oracle::{group_oracle, CurvatureTensor};

fn main() -> curvforge::Result<()> {
    let split = Arc::new(IsotropyDecomposition::trivial(Arc::new(LieAlgebraData::su2())));
    let p = OrbitTensor::new(split.clone(), Mat::from_diagonal(&Vector::from_vec(vec![0.5, 1.0, 1.0])))?;
    let oracle = group_oracle(&p, &CurvatureTensor::zeros(0))?;
    let point = InvariantPoint::new(p.clone(), oracle, 1e-10)?;
    let model = ExactModel::new(split, CurvatureTensor::zeros(0))?;

    let x = MixedVector::vertical(Vector::from_vec(vec![1.0, 0.0, 0.0]), 0);
    let y = MixedVector::vertical(Vector::from_vec(vec![0.0, 1.0, 0.0]), 0);
    println!("{:>8} {:>12} {:>14} {:>14} {:>12}", "t", "gap P_t", "kappa lower", "kappa exact", "z_t");
    for t in [0.0, 0.1, 1.0, 10.0, 100.0] {
        let s = deform_orbit_tensor(&p, t)?;
        let frame = eigenframe(&s, 0);
        assert!(frame.gram_error < 1e-10);
        println!(
            "{t:>8} {:>12.2e} {:>14.6} {:>14.6} {:>12.6}",
            s.closed_form_gap(),
            kappa_t_lower(&s, &point, &x, &y)?,
            kappa_t_exact(&s, &model, &x, &y)?,
            z_t_extract(&s, &point, &model, &x, &y)?,
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    #[test]
    fn runs() {
        super::main().unwrap();
    }
}
