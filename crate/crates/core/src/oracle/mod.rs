//! Ground-truth curvature data.
//!
//! [`CurvatureOracle`] is a (0,4) curvature tensor in a declared orthonormal
//! frame whose indices are labelled horizontal or vertical. Oracles are
//! either supplied by the user or generated here from algebraic data: the
//! Koszul formula for left-invariant metrics, and the normal homogeneous
//! formula for `G/H`.

mod homogeneous;
mod koszul;

pub use homogeneous::{normal_homogeneous_oracle, normal_homogeneous_tensor};
pub use koszul::{deformed_metric, group_oracle, orbit_frame, Connection, LeftInvariantMetric};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::validation::ValidationReport;

/// Dense rank-4 tensor `R_abcd`, stored row-major in `(a, b, c, d)`.
///
/// Sign convention: `R(x, y, y, x)` is the unreduced sectional curvature,
/// positive on round spheres.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    data: Vec<f64>,
}

impl CurvatureTensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim.pow(4) {
            return Err(Error::malformed(
                "R",
                format!("expected {} components for frame size {dim}, found {}", dim.pow(4), data.len()),
            ));
        }
        Ok(Self { dim, data })
    }

    /// Constant sectional curvature `k` on a `dim`-dimensional orthonormal frame.
    pub fn constant_curvature(dim: usize, k: f64) -> Self {
        let mut t = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                if a == b {
                    continue;
                }
                t.set(a, b, b, a, k);
                t.set(a, b, a, b, -k);
            }
        }
        t
    }

    /// Recover the tensor from its unreduced sectional curvature function.
    ///
    /// Uses `6 R(x,y,z,w) = ∂_s∂_t [k(x+sw, y+tz) - k(x+sz, y+tw)]`; the
    /// mixed derivative of a biquadratic is exact under unit-step central
    /// differences.
    pub fn from_sectional(dim: usize, k: impl Fn(&Vector, &Vector) -> f64) -> Self {
        let e = |i: usize| {
            let mut v = Vector::zeros(dim);
            v[i] = 1.0;
            v
        };
        let mixed = |x: &Vector, y: &Vector, p: &Vector, q: &Vector| {
            let f = |s: f64, t: f64| k(&(x + p * s), &(y + q * t));
            (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / 4.0
        };
        let mut out = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let (x, y, z, w) = (e(a), e(b), e(c), e(d));
                        let v = (mixed(&x, &y, &w, &z) - mixed(&x, &y, &z, &w)) / 6.0;
                        out.set(a, b, c, d, v);
                    }
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    /// `R(x, y, z, w)`.
    pub fn eval(&self, x: &Vector, y: &Vector, z: &Vector, w: &Vector) -> f64 {
        let n = self.dim;
        let mut total = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                let xy = x[a] * y[b];
                if xy == 0.0 {
                    continue;
                }
                let base = (a * n + b) * n * n;
                let mut inner = 0.0;
                for c in 0..n {
                    if z[c] == 0.0 {
                        continue;
                    }
                    let row = &self.data[base + c * n..base + (c + 1) * n];
                    let s: f64 = row.iter().zip(w.iter()).map(|(r, wd)| r * wd).sum();
                    inner += z[c] * s;
                }
                total += xy * inner;
            }
        }
        total
    }

    /// Unreduced sectional curvature `R(x, y, y, x)`.
    pub fn sectional(&self, x: &Vector, y: &Vector) -> f64 {
        self.eval(x, y, y, x)
    }

    /// Pull back along `frame` (old-dim × new-dim): the new components are
    /// `R(f_p, f_q, f_r, f_s)` for the columns `f` of `frame`.
    pub fn transform(&self, frame: &Mat) -> Self {
        let n = self.dim;
        let m = frame.ncols();
        assert_eq!(frame.nrows(), n, "frame rows must match tensor dimension");
        // contract one slot at a time, keeping slot order fixed
        let mut cur = self.data.clone();
        let mut dims = [n, n, n, n];
        for slot in 0..4 {
            let mut new_dims = dims;
            new_dims[slot] = m;
            let mut next = vec![0.0; new_dims.iter().product()];
            let strides = |d: &[usize; 4]| [d[1] * d[2] * d[3], d[2] * d[3], d[3], 1];
            let so = strides(&dims);
            let sn = strides(&new_dims);
            for i0 in 0..new_dims[0] {
                for i1 in 0..new_dims[1] {
                    for i2 in 0..new_dims[2] {
                        for i3 in 0..new_dims[3] {
                            let idx = [i0, i1, i2, i3];
                            let p = idx[slot];
                            let mut s = 0.0;
                            for a in 0..n {
                                let mut old = idx;
                                old[slot] = a;
                                let off = old[0] * so[0] + old[1] * so[1] + old[2] * so[2] + old[3];
                                s += cur[off] * frame[(a, p)];
                            }
                            next[i0 * sn[0] + i1 * sn[1] + i2 * sn[2] + i3] = s;
                        }
                    }
                }
            }
            cur = next;
            dims = new_dims;
        }
        Self { dim: m, data: cur }
    }

    /// Block-diagonal sum: indices of `a` first, then those of `b`, and no
    /// mixed components.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        let na = a.dim;
        let mut out = Self::zeros(na + b.dim);
        for (src, off) in [(a, 0), (b, na)] {
            let n = src.dim;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            out.set(i + off, j + off, k + off, l + off, src.get(i, j, k, l));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Restriction to the listed indices, in the listed order.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let m = indices.len();
        let mut out = Self::zeros(m);
        for (i, &a) in indices.iter().enumerate() {
            for (j, &b) in indices.iter().enumerate() {
                for (k, &c) in indices.iter().enumerate() {
                    for (l, &d) in indices.iter().enumerate() {
                        out.set(i, j, k, l, self.get(a, b, c, d));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Validate the algebraic curvature symmetries and first Bianchi identity.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.dim;
        let mut worst: [(f64, Vec<usize>); 4] = std::array::from_fn(|_| (0.0, vec![0; 4]));
        let mut record = |slot: usize, r: f64, idx: [usize; 4]| {
            if r > worst[slot].0 {
                worst[slot] = (r, idx.to_vec());
            }
        };
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = self.get(a, b, c, d);
                        record(0, (r + self.get(b, a, c, d)).abs(), [a, b, c, d]);
                        record(1, (r + self.get(a, b, d, c)).abs(), [a, b, c, d]);
                        record(2, (r - self.get(c, d, a, b)).abs(), [a, b, c, d]);
                        let bianchi = r + self.get(b, c, a, d) + self.get(c, a, b, d);
                        record(3, bianchi.abs(), [a, b, c, d]);
                    }
                }
            }
        }
        let mut report = ValidationReport::new("curvature tensor", tol);
        let names = [
            "antisymmetry in first pair",
            "antisymmetry in second pair",
            "pair symmetry",
            "first Bianchi identity",
        ];
        for (name, (r, idx)) in names.iter().zip(worst) {
            report.push(name, r, Some(idx));
        }
        report
    }
}

/// Curvature of `(M, g)` at a point in a `g`-orthonormal frame.
///
/// Vertical index `vertical[a]` is the frame vector `(P^{-1/2} v_a)^*`, where
/// `v_a` is the `a`-th `Q`-orthonormal complement basis vector and `P` the
/// orbit tensor at the point. Horizontal indices are an orthonormal basis of
/// the normal space to the orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureOracle {
    tensor: CurvatureTensor,
    horizontal: Vec<usize>,
    vertical: Vec<usize>,
}

/// On-disk form of a [`CurvatureOracle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleJson {
    pub frame_dim: usize,
    pub horizontal: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertical: Option<Vec<usize>>,
    #[serde(default = "default_index_order")]
    pub index_order: String,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
}

fn default_index_order() -> String {
    "abcd".to_string()
}

impl CurvatureOracle {
    /// `vertical` defaults to the non-horizontal indices in ascending order.
    pub fn new(tensor: CurvatureTensor, horizontal: Vec<usize>, vertical: Option<Vec<usize>>) -> Result<Self> {
        let n = tensor.dim();
        let vertical = vertical.unwrap_or_else(|| (0..n).filter(|i| !horizontal.contains(i)).collect());
        let mut seen = vec![false; n];
        for &i in horizontal.iter().chain(vertical.iter()) {
            if i >= n {
                return Err(Error::malformed("horizontal", format!("index {i} out of range for frame size {n}")));
            }
            if seen[i] {
                return Err(Error::malformed("horizontal", format!("index {i} listed twice")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::malformed("vertical", "horizontal and vertical indices must cover the frame"));
        }
        Ok(Self {
            tensor,
            horizontal,
            vertical,
        })
    }

    /// Vertical indices first, then horizontal, with no mixed components.
    pub fn from_blocks(vertical: &CurvatureTensor, horizontal: &CurvatureTensor) -> Self {
        let k = vertical.dim();
        let h = horizontal.dim();
        let tensor = CurvatureTensor::direct_sum(vertical, horizontal);
        Self {
            tensor,
            horizontal: (k..k + h).collect(),
            vertical: (0..k).collect(),
        }
    }

    pub fn from_json(json: &OracleJson) -> Result<Self> {
        if json.index_order != "abcd" {
            return Err(Error::malformed("index_order", format!("unsupported index order `{}`", json.index_order)));
        }
        let tensor = CurvatureTensor::from_flat(json.frame_dim, json.r.clone())?;
        Self::new(tensor, json.horizontal.clone(), json.vertical.clone())
    }

    pub fn to_json(&self) -> OracleJson {
        OracleJson {
            frame_dim: self.frame_dim(),
            horizontal: self.horizontal.clone(),
            vertical: Some(self.vertical.clone()),
            index_order: default_index_order(),
            r: self.tensor.as_slice().to_vec(),
        }
    }

    pub fn tensor(&self) -> &CurvatureTensor {
        &self.tensor
    }

    pub fn frame_dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn horizontal(&self) -> &[usize] {
        &self.horizontal
    }

    pub fn vertical(&self) -> &[usize] {
        &self.vertical
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let scale = self.tensor.max_abs().max(1.0);
        let mut r = self.tensor.validate(tol * scale);
        r.subject = "curvature oracle".into();
        r
    }

    /// Frame coordinates from horizontal coordinates and vertical frame
    /// coordinates.
    pub fn assemble(&self, horizontal: &Vector, vertical: &Vector) -> Result<Vector> {
        if horizontal.len() != self.horizontal.len() {
            return Err(Error::dim("horizontal coordinates", self.horizontal.len(), horizontal.len()));
        }
        if vertical.len() != self.vertical.len() {
            return Err(Error::dim("vertical coordinates", self.vertical.len(), vertical.len()));
        }
        let mut out = Vector::zeros(self.frame_dim());
        for (i, &idx) in self.horizontal.iter().enumerate() {
            out[idx] = horizontal[i];
        }
        for (a, &idx) in self.vertical.iter().enumerate() {
            out[idx] = vertical[a];
        }
        Ok(out)
    }

    /// `Σ_{j horizontal} R(x, e_j, e_j, x)` for frame coordinates `x`.
    pub fn ricci_h(&self, x: &Vector) -> f64 {
        let n = self.frame_dim();
        let mut e = Vector::zeros(n);
        let mut sum = 0.0;
        for &j in &self.horizontal {
            e[j] = 1.0;
            sum += self.tensor.sectional(x, &e);
            e[j] = 0.0;
        }
        sum
    }

    /// Full Ricci trace over the whole frame.
    pub fn ricci(&self, x: &Vector) -> f64 {
        let n = self.frame_dim();
        let mut e = Vector::zeros(n);
        let mut sum = 0.0;
        for j in 0..n {
            e[j] = 1.0;
            sum += self.tensor.sectional(x, &e);
            e[j] = 0.0;
        }
        sum
    }

    /// Matrix of `ricci_h` restricted to horizontal vectors, in horizontal
    /// coordinates.
    pub fn horizontal_ricci_matrix(&self) -> Mat {
        let h = &self.horizontal;
        let mut m = Mat::zeros(h.len(), h.len());
        for (a, &ia) in h.iter().enumerate() {
            for (b, &ib) in h.iter().enumerate() {
                m[(a, b)] = h.iter().map(|&j| self.tensor.get(ia, j, j, ib)).sum();
            }
        }
        crate::linalg::symmetrized(&m)
    }

    pub fn horizontal_block(&self) -> CurvatureTensor {
        self.tensor.restrict(&self.horizontal)
    }

    pub fn vertical_block(&self) -> CurvatureTensor {
        self.tensor.restrict(&self.vertical)
    }

    /// Largest component that mixes horizontal and vertical indices.
    pub fn mixed_component_norm(&self) -> f64 {
        let n = self.frame_dim();
        let is_h: Vec<bool> = (0..n).map(|i| self.horizontal.contains(&i)).collect();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let hs = [a, b, c, d].iter().filter(|&&i| is_h[i]).count();
                        if hs != 0 && hs != 4 {
                            worst = worst.max(self.tensor.get(a, b, c, d).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            tensor: self.tensor.scaled(s),
            horizontal: self.horizontal.clone(),
            vertical: self.vertical.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_curvature_ricci_h() {
        // h horizontal directions of curvature 1: Ric^h(unit x) = h - 1
        for h in 2..5 {
            let t = CurvatureTensor::constant_curvature(h, 1.0);
            let o = CurvatureOracle::from_blocks(&CurvatureTensor::zeros(2), &t);
            let x = o.assemble(&Vector::from_fn(h, |i, _| if i == 0 { 1.0 } else { 0.0 }), &Vector::zeros(2)).unwrap();
            assert!((o.ricci_h(&x) - (h as f64 - 1.0)).abs() < 1e-14);
            // vertical x sees a flat product block
            let xv = o.assemble(&Vector::zeros(h), &Vector::from_vec(vec![1.0, 0.0])).unwrap();
            assert_eq!(o.ricci_h(&xv), 0.0);
        }
    }

    #[test]
    fn transitive_oracle_has_no_horizontal_ricci() {
        let o = CurvatureOracle::new(CurvatureTensor::constant_curvature(3, 1.0), vec![], None).unwrap();
        assert_eq!(o.ricci_h(&Vector::from_vec(vec![1.0, 2.0, 3.0])), 0.0);
        assert_eq!(o.horizontal_ricci_matrix().nrows(), 0);
    }

    #[test]
    fn polarization_recovers_constant_curvature() {
        let k = |x: &Vector, y: &Vector| x.norm_squared() * y.norm_squared() - x.dot(y).powi(2);
        let t = CurvatureTensor::from_sectional(4, k);
        let c = CurvatureTensor::constant_curvature(4, 1.0);
        let diff: f64 = t.as_slice().iter().zip(c.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
        assert!(t.validate(1e-14).passed);
    }

    #[test]
    fn corrupted_tensor_fails_validation() {
        let mut t = CurvatureTensor::constant_curvature(3, 1.0);
        t.set(0, 1, 1, 0, 2.0);
        let r = t.validate(1e-10);
        assert!(!r.passed);
        assert!(!r.check("pair symmetry").unwrap().passed || !r.check("antisymmetry in first pair").unwrap().passed);
    }

    #[test]
    fn json_round_trip() {
        let o = CurvatureOracle::from_blocks(
            &CurvatureTensor::constant_curvature(2, 0.25),
            &CurvatureTensor::constant_curvature(2, 1.0),
        );
        let back = CurvatureOracle::from_json(&o.to_json()).unwrap();
        assert_eq!(o, back);
        let mut bad = o.to_json();
        bad.r.pop();
        assert!(matches!(CurvatureOracle::from_json(&bad), Err(Error::Malformed { .. })));
    }

    #[test]
    fn transform_by_identity_is_noop() {
        let t = CurvatureTensor::constant_curvature(3, 2.0);
        assert_eq!(t.transform(&Mat::identity(3, 3)), t);
        let s = t.transform(&(Mat::identity(3, 3) * 2.0));
        assert!((s.get(0, 1, 1, 0) - 32.0).abs() < 1e-12);
    }
}
