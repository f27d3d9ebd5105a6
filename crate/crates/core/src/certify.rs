//! Ricci positivity certificates.
//!
//! Every bound here is a quadratic form in `[X, X_F, U]` coordinates (the
//! fixed reference frame: orthonormal horizontal frames of the two oracles and
//! the `Q`-orthonormal basis of `m_f`), so the minimum over unit vectors is a
//! smallest eigenvalue. Residual curvature terms are dropped throughout, so a
//! negative bound is "not certified", never "negative curvature".

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::ser::{Serialize, Serializer};
use serde::Serialize as DeriveSerialize;

use crate::bundle::{BundleData, BundleVector, Mode};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

pub const DEFAULT_BISECTION_TOL: f64 = 1e-3;
pub const DEFAULT_T_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, DeriveSerialize)]
#[allow(non_camel_case_types)]
pub enum Verdict {
    CERTIFIED_POSITIVE,
    NOT_CERTIFIED,
}

impl Verdict {
    pub fn is_certified(self) -> bool {
        self == Verdict::CERTIFIED_POSITIVE
    }
}

/// A constant that may be vacuous (empty frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Value(f64),
    NotApplicable,
}

impl Bound {
    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(v),
            Bound::NotApplicable => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Value(v) => f.pad(&v.to_string()),
            Bound::NotApplicable => f.pad("not_applicable"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Value(v) => s.serialize_f64(*v),
            Bound::NotApplicable => s.serialize_str("not_applicable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct Certificate {
    pub verdict: Verdict,
    #[serde(rename = "r_P")]
    pub r_p: Bound,
    #[serde(rename = "r_F")]
    pub r_f: Bound,
    #[serde(rename = "C")]
    pub c: Bound,
    pub tol: f64,
    pub mode: Mode,
    /// Minimum over unit vectors of the limit form.
    pub asymptotic_min: f64,
    /// First certified finite `t`, when searched for and found.
    pub min_t: Option<f64>,
    /// Smallest eigenvalue of the finite-`t` form at `min_t`.
    pub min_t_value: Option<f64>,
    /// Minimizing unit vector `[X, X_F, U]` at the decisive `t`.
    pub witness: Vec<f64>,
    pub reasons: Vec<String>,
    pub notes: Vec<String>,
}

fn standard_notes() -> Vec<String> {
    vec![
        "all curvature values are lower bounds: non-negative residual terms are dropped, so NOT_CERTIFIED does not assert negative curvature".into(),
        "certificate is pointwise: it uses the Lie-algebra and curvature data of one point".into(),
        "quadratic forms are taken in the reference frame [X, X_F, U] (orthonormal oracle frames, Q-orthonormal m_f basis)".into(),
        "asymptotic residuals are operator norms".into(),
    ]
}

fn min_form(m: &Mat) -> Bound {
    match linalg::min_eigenpair(m) {
        Some((v, _)) => Bound::Value(v),
        None => Bound::NotApplicable,
    }
}

/// `r_P`, `r_F` from the horizontal Ricci forms of the two oracles and `C`
/// from the bracket gap; certified iff every applicable constant exceeds
/// `tol`.
pub fn asymptotic_certificate(b: &BundleData, tol: f64) -> Certificate {
    let r_p = min_form(&b.principal().oracle().horizontal_ricci_matrix());
    let r_f = min_form(&b.fiber().oracle().horizontal_ricci_matrix());
    let split = b.fiber_split();
    let c = if split.complement_dim() == 0 {
        Bound::NotApplicable
    } else {
        Bound::Value(split.bracket_gap_constant())
    };
    let mut reasons = Vec::new();
    if let Bound::Value(v) = r_p {
        if v <= tol {
            reasons.push(format!("r_P = {v:e} <= tol: horizontal Ricci of the principal bundle is not positive"));
        }
    }
    if let Bound::Value(v) = r_f {
        if v <= tol {
            reasons.push(format!("r_F = {v:e} <= tol: horizontal Ricci of the fiber is not positive"));
        }
    }
    if let Bound::Value(v) = c {
        if v <= tol {
            reasons.push(format!("C = {v:e} <= tol: bracket gap vanishes (fundamental group of G/G_f may be infinite)"));
        }
    }
    if [r_p, r_f, c].iter().all(|x| x.value().is_none()) {
        reasons.push("no applicable constant: the bundle has no directions".into());
    }
    let (asymptotic_min, witness) =
        linalg::min_eigenpair(&b.asymptotic_form_matrix()).unwrap_or((0.0, Vector::zeros(0)));
    Certificate {
        verdict: if reasons.is_empty() {
            Verdict::CERTIFIED_POSITIVE
        } else {
            Verdict::NOT_CERTIFIED
        },
        r_p,
        r_f,
        c,
        tol,
        mode: Mode::Lower,
        asymptotic_min,
        min_t: None,
        min_t_value: None,
        witness: witness.iter().copied().collect(),
        reasons,
        notes: standard_notes(),
    }
}

/// Matrix of `x ↦ ricci_ht_lower(t, x)` in `[X, X_F, U]` coordinates,
/// assembled by polarization.
pub fn ricci_form_matrix(b: &BundleData, t: f64, mode: Mode) -> Result<Mat> {
    let state = b.at(t, mode)?;
    let dims = b.dims();
    let d = dims.total();
    let unit = |i: usize| {
        let mut v = Vector::zeros(d);
        v[i] = 1.0;
        v
    };
    let f = |v: &Vector| -> Result<f64> { state.ricci_ht_lower(&BundleVector::from_flat(v, dims)?) };
    let mut m = Mat::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = f(&unit(i))?;
        for j in 0..i {
            let (ei, ej) = (unit(i), unit(j));
            let v = (f(&(&ei + &ej))? - f(&(&ei - &ej))?) / 4.0;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Smallest eigenvalue of [`ricci_form_matrix`] and a unit minimizer.
pub fn min_ricci_lb(b: &BundleData, t: f64, mode: Mode) -> Result<(f64, Vector)> {
    let m = ricci_form_matrix(b, t, mode)?;
    Ok(linalg::min_eigenpair(&m).unwrap_or((0.0, Vector::zeros(0))))
}

/// One `t` of a sweep.
#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct SweepRow {
    pub t: f64,
    pub min_ricci_lb: f64,
    /// `‖tP̃_t − I‖`.
    pub ptilde_residual: f64,
    /// `‖P_t^{-1}P̃_t − I‖`.
    pub lift_residual: f64,
    /// Kept out of emitted files so reports are reproducible.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// The `t = ∞` row of a sweep.
#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct AsymptoticRow {
    pub min_ricci_lb: f64,
    #[serde(rename = "r_P")]
    pub r_p: Bound,
    #[serde(rename = "r_F")]
    pub r_f: Bound,
    #[serde(rename = "C")]
    pub c: Bound,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct SweepTable {
    pub mode: Mode,
    pub rows: Vec<SweepRow>,
    pub asymptotic: AsymptoticRow,
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::BadGrid("grid is empty".into()));
    }
    for (i, t) in grid.iter().enumerate() {
        if !t.is_finite() || *t < 0.0 {
            return Err(Error::BadGrid(format!("entry {i} is {t}")));
        }
        if i > 0 && !(grid[i - 1] < *t) {
            return Err(Error::BadGrid(format!("entry {i} ({t}) does not exceed entry {}", i - 1)));
        }
    }
    Ok(())
}

fn sweep_row(b: &BundleData, t: f64, mode: Mode) -> Result<SweepRow> {
    let start = Instant::now();
    let (min, _) = min_ricci_lb(b, t, mode)?;
    let (ptilde_residual, lift_residual) = b.at(t, Mode::Lower)?.asymptotic_residuals();
    Ok(SweepRow {
        t,
        min_ricci_lb: min,
        ptilde_residual,
        lift_residual,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Rows in grid order (evaluated in parallel), then the asymptotic row.
pub fn sweep(b: &BundleData, grid: &[f64], mode: Mode, tol: f64) -> Result<SweepTable> {
    check_grid(grid)?;
    let rows = grid
        .par_iter()
        .map(|&t| sweep_row(b, t, mode))
        .collect::<Result<Vec<_>>>()?;
    let cert = asymptotic_certificate(b, tol);
    Ok(SweepTable {
        mode,
        rows,
        asymptotic: AsymptoticRow {
            min_ricci_lb: cert.asymptotic_min,
            r_p: cert.r_p,
            r_f: cert.r_f,
            c: cert.c,
            verdict: cert.verdict,
        },
    })
}

/// Smallest `t ∈ [0, t_max]` (to relative tolerance `rel_tol`) at which the
/// finite-`t` Ricci lower bound is positive. Doubling from `t = 1` brackets
/// the sign change, then bisection narrows it.
pub fn find_min_certified_t(b: &BundleData, t_max: f64, rel_tol: f64, mode: Mode) -> Result<f64> {
    let cert = asymptotic_certificate(b, crate::tol::IDENTITY);
    if !cert.verdict.is_certified() {
        return Err(Error::Precondition(format!(
            "asymptotic certificate is NOT_CERTIFIED: {}",
            cert.reasons.join("; ")
        )));
    }
    if !(t_max >= 0.0) || !(rel_tol > 0.0) {
        return Err(Error::Precondition("t_max must be non-negative and the tolerance positive".into()));
    }
    let value = |t: f64| min_ricci_lb(b, t, mode).map(|(v, _)| v);
    let mut best = (0.0, value(0.0)?);
    if best.1 > 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0_f64.min(t_max);
    loop {
        let v = value(hi)?;
        if v > best.1 {
            best = (hi, v);
        }
        if v > 0.0 {
            break;
        }
        if hi >= t_max {
            return Err(Error::NotCertifiedBelow {
                t_max,
                best_t: best.0,
                best_value: best.1,
            });
        }
        lo = hi;
        hi = (hi * 2.0).min(t_max);
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if value(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The asymptotic certificate, plus the first certified finite `t` when the
/// asymptotic verdict is positive.
pub fn certify(b: &BundleData, tol: f64, t_max: f64, mode: Mode) -> Result<Certificate> {
    let mut cert = asymptotic_certificate(b, tol);
    cert.mode = mode;
    if !cert.verdict.is_certified() {
        return Ok(cert);
    }
    match find_min_certified_t(b, t_max, DEFAULT_BISECTION_TOL, mode) {
        Ok(t) => {
            let (v, w) = min_ricci_lb(b, t, mode)?;
            cert.min_t = Some(t);
            cert.min_t_value = Some(v);
            cert.witness = w.iter().copied().collect();
        }
        Err(Error::NotCertifiedBelow { t_max, best_t, best_value }) => cert.notes.push(format!(
            "no finite t <= {t_max:e} certified; best lower bound {best_value:e} at t = {best_t:e}"
        )),
        Err(e) => return Err(e),
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cheeger::OrbitTensor;
    use crate::lie::{IsotropyDecomposition, LieAlgebraData};
    use crate::oracle::{group_oracle, CurvatureOracle, CurvatureTensor};

    fn su2_full() -> BundleData {
        let fiber = Arc::new(IsotropyDecomposition::trivial(Arc::new(LieAlgebraData::su2())));
        let o = group_oracle(&OrbitTensor::identity(fiber.clone()), &CurvatureTensor::zeros(0)).unwrap();
        BundleData::new(fiber, Mat::identity(3, 3), Mat::identity(3, 3), o.clone(), o, 1e-10).unwrap()
    }

    fn abelian_flat(h: usize) -> BundleData {
        let alg = Arc::new(LieAlgebraData::abelian(Mat::identity(2, 2)).unwrap());
        let fiber = Arc::new(IsotropyDecomposition::trivial(alg));
        let o = CurvatureOracle::from_blocks(&CurvatureTensor::zeros(2), &CurvatureTensor::zeros(h));
        BundleData::new(fiber, Mat::identity(2, 2), Mat::identity(2, 2), o.clone(), o, 1e-10).unwrap()
    }

    #[test]
    fn su2_full_certificate() {
        let c = asymptotic_certificate(&su2_full(), 1e-10);
        assert_eq!(c.verdict, Verdict::CERTIFIED_POSITIVE);
        assert!((c.c.value().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(c.r_p, Bound::NotApplicable);
        assert_eq!(find_min_certified_t(&su2_full(), 100.0, 1e-3, Mode::Lower).unwrap(), 0.0);
    }

    #[test]
    fn flat_scenario() {
        let b = abelian_flat(1);
        let m = ricci_form_matrix(&b, 3.0, Mode::Lower).unwrap();
        assert_eq!(linalg::max_abs(&m), 0.0);
        assert_eq!(min_ricci_lb(&b, 3.0, Mode::Lower).unwrap().0, 0.0);
        let c = asymptotic_certificate(&b, 1e-10);
        assert_eq!(c.verdict, Verdict::NOT_CERTIFIED);
        assert_eq!(c.c, Bound::Value(0.0));
        assert!(c.reasons.iter().any(|r| r.contains("bracket gap vanishes")));
        assert!(c.reasons.iter().any(|r| r.starts_with("r_P")));
        assert!(matches!(
            find_min_certified_t(&b, 10.0, 1e-3, Mode::Lower),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn large_t_form_is_half_identity() {
        let m = ricci_form_matrix(&su2_full(), 1e6, Mode::Lower).unwrap();
        assert!(linalg::max_abs(&(m - Mat::identity(3, 3) * 0.5)) < 1e-3);
    }

    #[test]
    fn grid_validation() {
        let b = su2_full();
        assert!(matches!(sweep(&b, &[], Mode::Lower, 1e-10), Err(Error::BadGrid(_))));
        assert!(matches!(sweep(&b, &[1.0, 1.0], Mode::Lower, 1e-10), Err(Error::BadGrid(_))));
        let one = sweep(&b, &[0.0], Mode::Lower, 1e-10).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert!((one.rows[0].min_ricci_lb - 0.125).abs() < 1e-12);
    }

    #[test]
    fn bound_serializes_marker() {
        assert_eq!(serde_json::to_string(&Bound::NotApplicable).unwrap(), "\"not_applicable\"");
        assert_eq!(serde_json::to_string(&Bound::Value(0.5)).unwrap(), "0.5");
    }
}
