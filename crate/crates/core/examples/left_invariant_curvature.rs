//! Koszul connection and curvature of the Berger metrics on SU(2).

use std::sync::Arc;

use curvforge::lie::LieAlgebraData;
use curvforge::linalg::{Mat, Vector};
use curvforge::oracle::LeftInvariantMetric;

fn main() -> curvforge::Result<()> {
    let su2 = Arc::new(LieAlgebraData::su2());
    let e = |i: usize| {
        let mut v = Vector::zeros(3);
        v[i] = 1.0;
        v
    };
    println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "eps", "K(e2,e3)", "K(e1,e2)", "Ric(e1)", "torsion");
    for eps in [1.0, 0.8, 0.5, 0.1] {
        let g = LeftInvariantMetric::new(su2.clone(), Mat::from_diagonal(&Vector::from_vec(vec![eps * eps, 1.0, 1.0])))?;
        let r = g.curvature_tensor();
        let frame = g.orthonormal_frame();
        let f = |i: usize| frame.column(i).into_owned();
        let conn = g.connection_coefficients()?;
        println!(
            "{eps:>6} {:>12.6} {:>12.6} {:>12.6} {:>10.1e}",
            r.sectional(&e(1), &e(2)),
            r.sectional(&f(0), &f(1)),
            g.ricci(&f(0)),
            conn.torsion_residual(&su2),
        );
    }
    Ok(())
}
