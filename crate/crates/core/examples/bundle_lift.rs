//! Horizontal lifts and the orthonormal basis of the deformed bundle metric
//! on the round-sphere bundle over SU(2).

use curvforge::bundle::{BundleVector, Mode};
use curvforge::linalg::{self, Mat, Vector};
use curvforge::scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = scenario::catalog("injected-base")?;
    let b = &s.bundle;
    let d = b.dims();
    println!("h_P = {}, h_F = {}, dim m_f = {}", d.h_p, d.h_f, d.k);

    let v = BundleVector::new(Vector::from_vec(vec![1.0, 0.0, 0.0]), Vector::zeros(0), Vector::from_vec(vec![0.0, 1.0]));
    for t in [0.0, 1.0, 100.0] {
        let st = b.at(t, Mode::Lower)?;
        let lift = st.horizontal_lift(&v)?;
        let back = b.dpibar(&lift);
        let basis = st.horizontal_basis();
        let gram = st.gram(basis);
        println!(
            "t = {t:>5}: |dpi(lift) - v| = {:.1e}  |pairing| = {:.1e}  |Gram - I| = {:.1e}  sec(X, U) >= {:.6}",
            (back.to_flat() - v.to_flat()).norm(),
            st.vertical_pairing(&lift).norm(),
            linalg::max_abs(&(gram - Mat::identity(basis.len(), basis.len()))),
            st.sec_lower(&BundleVector::new(v.x.clone(), v.x_f.clone(), Vector::zeros(2)), &BundleVector::new(Vector::zeros(3), Vector::zeros(0), v.u.clone()))?,
        );
    }
    Ok(())
}
