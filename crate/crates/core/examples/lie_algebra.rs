//! Structure constants, invariant checks and the bracket gap of a few
//! catalog algebras and homogeneous spaces.

use std::sync::Arc;

use curvforge::lie::{isotropy_split, IsotropyDecomposition, LieAlgebraData};
use curvforge::linalg::Vector;

fn main() -> curvforge::Result<()> {
    let su2 = LieAlgebraData::su2();
    let e = |i: usize| {
        let mut v = Vector::zeros(3);
        v[i] = 1.0;
        v
    };
    println!("[e1, e2] = {:?}", su2.bracket(&e(0), &e(1))?.as_slice());

    let report = LieAlgebraData::so(4).validate(1e-10)?;
    for c in &report.checks {
        println!("so(4) {:<40} residual {:.2e} {}", c.invariant, c.residual, if c.passed { "ok" } else { "FAIL" });
    }

    let su2 = Arc::new(su2);
    let full = IsotropyDecomposition::trivial(su2.clone());
    let sphere = isotropy_split(su2, &[e(2)], 1e-10)?;
    let so4 = Arc::new(LieAlgebraData::so(4));
    let mut iso = Vec::new();
    for i in [0, 1, 3] {
        let mut v = Vector::zeros(6);
        v[i] = 1.0;
        iso.push(v);
    }
    let s3 = isotropy_split(so4, &iso, 1e-10)?;
    for (name, split) in [("SU(2)", &full), ("SU(2)/U(1)", &sphere), ("SO(4)/SO(3)", &s3)] {
        println!(
            "{name:<12} dim m = {}  bracket gap C = {:.6}",
            split.complement_dim(),
            split.bracket_gap_constant()
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
