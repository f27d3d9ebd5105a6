use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curvforge::bundle::{asymptotic_check, BundleData, BundleVector, Mode};
use curvforge::certify::{asymptotic_certificate, certify, DEFAULT_T_MAX};
use curvforge::cheeger::{apply_ct, apply_ct_inverse, deform_orbit_tensor, MixedVector, OrbitTensor};
use curvforge::lie::{IsotropyDecomposition, LieAlgebraData};
use curvforge::oracle::CurvatureTensor;
use curvforge::scenario;

fn spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (prop::collection::vec(-1.0..1.0f64, n * n), prop::collection::vec(0.2..5.0f64, n)).prop_map(move |(a, d)| {
        let q = DMatrix::from_vec(n, n, a).qr().q();
        let p = &q * DMatrix::from_diagonal(&DVector::from_vec(d)) * q.transpose();
        (&p + p.transpose()) * 0.5
    })
}

fn sized_spd() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..=6).prop_flat_map(spd)
}

fn flat_space(n: usize) -> Arc<IsotropyDecomposition> {
    let alg = LieAlgebraData::abelian(DMatrix::identity(n, n)).unwrap();
    Arc::new(IsotropyDecomposition::trivial(Arc::new(alg)))
}

/// Structure constants and inner product after the change of basis `b'_i = Σ_j a_ji b_j`.
fn change_basis(alg: &LieAlgebraData, a: &DMatrix<f64>) -> LieAlgebraData {
    let n = alg.dim();
    let inv = a.clone().try_inverse().unwrap();
    let mut c = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let br = alg.bracket(&a.column(i).into_owned(), &a.column(j).into_owned()).unwrap();
            let coords = &inv * br;
            for k in 0..n {
                c[(i * n + j) * n + k] = coords[k];
            }
        }
    }
    let q = a.transpose() * alg.q() * a;
    LieAlgebraData::new(n, c, (&q + q.transpose()) * 0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deformation_closed_forms_agree(p in sized_spd(), t in 0.0..1e4f64) {
        let n = p.nrows();
        let orbit = OrbitTensor::new(flat_space(n), p.clone()).unwrap();
        let s = deform_orbit_tensor(&orbit, t).unwrap();
        let id = DMatrix::<f64>::identity(n, n);
        let a = (p.clone().try_inverse().unwrap() + &id * t).try_inverse().unwrap();
        prop_assert!((s.pt() - &a).norm() <= 1e-12);
        // P_t is monotone decreasing in t
        let later = deform_orbit_tensor(&orbit, t + 1.0).unwrap();
        prop_assert!((s.pt() - later.pt()).symmetric_eigen().eigenvalues.min() >= -1e-12);
        for j in 0..n {
            let x = MixedVector::vertical(id.column(j).into_owned(), 0);
            let y = apply_ct_inverse(&s, &apply_ct(&s, &x).unwrap()).unwrap();
            prop_assert!((&y.vertical - &x.vertical).norm() <= 1e-12);
        }
    }

    #[test]
    fn validation_is_basis_independent(a in prop::collection::vec(-1.0..1.0f64, 9)) {
        let a = DMatrix::from_vec(3, 3, a) + DMatrix::identity(3, 3) * 2.0;
        prop_assume!(a.determinant().abs() > 0.1);
        let alg = change_basis(&LieAlgebraData::su2(), &a);
        let report = alg.validate(1e-9).unwrap();
        prop_assert!(report.passed, "{}", report.summary());
        let full = IsotropyDecomposition::trivial(Arc::new(alg));
        prop_assert!((full.bracket_gap_constant() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn curvature_symmetries_survive_frame_changes(a in prop::collection::vec(-1.0..1.0f64, 16), k in -2.0..2.0f64) {
        let frame = DMatrix::from_vec(4, 4, a);
        let t = CurvatureTensor::constant_curvature(4, k).transform(&frame);
        prop_assert!(t.validate(1e-12 * (1.0 + t.max_abs())).passed);
    }

    #[test]
    fn bracket_gap_bounds_the_homogeneous_ricci(u in prop::collection::vec(-1.0..1.0f64, 3), which in 0usize..2) {
        let name = ["so4-so3", "su2xsu2-diag"][which];
        let s = scenario::catalog(name).unwrap();
        let split = s.bundle.fiber_split();
        let u = DVector::from_vec(u);
        prop_assume!(u.norm() > 1e-3);
        let value = split.normal_homogeneous_ricci(&u).unwrap();
        prop_assert!(value >= split.bracket_gap_constant() * u.norm_squared() - 1e-12);
    }

    #[test]
    fn lift_inverts_the_projection(t in 0.0..1e5f64, x in prop::collection::vec(-1.0..1.0f64, 5)) {
        let s = scenario::catalog("injected-base").unwrap();
        let b = &s.bundle;
        let v = BundleVector::from_flat(&DVector::from_vec(x), b.dims()).unwrap();
        let st = b.at(t, Mode::Lower).unwrap();
        let lift = st.horizontal_lift(&v).unwrap();
        prop_assert!((b.dpibar(&lift).to_flat() - v.to_flat()).norm() <= 1e-12);
        prop_assert!(st.vertical_pairing(&lift).norm() <= 1e-12 * (1.0 + v.to_flat().norm()));
    }

    #[test]
    fn residuals_decrease_along_the_grid(t in 0.01..1e5f64, factor in 1.01..100.0f64) {
        for name in ["su2-berger", "so4-so3"] {
            let b = scenario::catalog(name).unwrap().bundle;
            let (a0, c0) = asymptotic_check(&b, t).unwrap();
            let (a1, c1) = asymptotic_check(&b, t * factor).unwrap();
            prop_assert!(a1 < a0 && c1 < c0);
        }
    }
}

fn rescaled(b: &BundleData, s: f64) -> BundleData {
    BundleData::new(
        b.fiber_split().clone(),
        b.p().matrix().clone(),
        b.p_f().matrix().clone(),
        b.principal().oracle().scaled(s),
        b.fiber().oracle().scaled(s),
        1e-10,
    )
    .unwrap()
}

#[test]
fn oracle_scaling_scales_horizontal_constants_only() {
    for name in ["injected-base", "injected-base-flat", "su2-full"] {
        let b = scenario::catalog(name).unwrap().bundle;
        let base = asymptotic_certificate(&b, 1e-10);
        for s in [0.5, 3.0] {
            let c = asymptotic_certificate(&rescaled(&b, s), 1e-10);
            assert_eq!(c.verdict, base.verdict, "{name}");
            assert_eq!(c.c, base.c);
            match (base.r_p.value(), c.r_p.value()) {
                (Some(a), Some(b)) => assert!((b - s * a).abs() < 1e-12),
                (None, None) => {}
                _ => panic!("applicability changed"),
            }
        }
    }
}

/// At the certified `t*`, the Ricci lower bound dominates the reported
/// minimum on random vectors of the reference frame.
#[test]
fn certificates_are_sound_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in scenario::catalog_names() {
        let b = scenario::catalog(name).unwrap().bundle;
        let cert = certify(&b, 1e-10, DEFAULT_T_MAX, Mode::Lower).unwrap();
        let (Some(t), Some(min)) = (cert.min_t, cert.min_t_value) else {
            continue;
        };
        let st = b.at(t, Mode::Lower).unwrap();
        for _ in 0..10_000 {
            let x = DVector::from_fn(b.dims().total(), |_, _| rng.gen_range(-1.0..1.0));
            let v = BundleVector::from_flat(&(&x / x.norm()), b.dims()).unwrap();
            assert!(st.ricci_ht_lower(&v).unwrap() >= min - 1e-9, "{name} at t = {t}");
        }
    }
}
