//! The three dilation-group families, their Haar measures, modular functions
//! and the dual action `ξ ↦ hᵀξ`, plus the affine group `ℝ^d ⋊ H`.

mod rotation;

pub use rotation::{wrap_angle, Rotation, RotationList};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Similitude,
    Diagonal,
    Shearlet,
}

/// Descriptor of a dilation group, e.g. `{"family":"shearlet","dim":2,"c":0.5}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationGroupSpec {
    pub family: Family,
    pub dim: usize,
    #[serde(default, rename = "c", skip_serializing_if = "Option::is_none")]
    pub shear_anisotropy: Option<f64>,
}

impl DilationGroupSpec {
    pub fn similitude(dim: usize) -> Self {
        Self {
            family: Family::Similitude,
            dim,
            shear_anisotropy: None,
        }
    }

    pub fn diagonal(dim: usize) -> Self {
        Self {
            family: Family::Diagonal,
            dim,
            shear_anisotropy: None,
        }
    }

    pub fn shearlet(c: f64) -> Self {
        Self {
            family: Family::Shearlet,
            dim: 2,
            shear_anisotropy: Some(c),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dim must be positive".into()));
        }
        match (self.family, self.shear_anisotropy) {
            (Family::Shearlet, Some(c)) if c.is_finite() => {
                if self.dim != 2 {
                    Err(Error::InvalidSpec(format!("shearlet group requires dim = 2, got {}", self.dim)))
                } else {
                    Ok(())
                }
            }
            (Family::Shearlet, _) => Err(Error::InvalidSpec("shearlet group requires a finite c".into())),
            (_, Some(_)) => Err(Error::InvalidSpec("c applies to the shearlet family only".into())),
            _ => Ok(()),
        }
    }

    /// Validates and additionally requires `dim <= 3`, the range with element support.
    pub fn validate_elements(&self) -> Result<()> {
        self.validate()?;
        if self.dim > 3 {
            return Err(Error::InvalidSpec(format!(
                "group elements are supported for dim <= 3, got {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// The anisotropy `c` (0 for families without one).
    pub fn c(&self) -> f64 {
        self.shear_anisotropy.unwrap_or(0.0)
    }

    /// Number of parameters of an element.
    pub fn param_len(&self) -> usize {
        match (self.family, self.dim) {
            (Family::Similitude, 1) => 1,
            (Family::Similitude, 2) => 2,
            (Family::Similitude, _) => 5,
            (Family::Diagonal, d) => d,
            (Family::Shearlet, _) => 2,
        }
    }
}

/// `sign(a)|a|^c`.
#[inline]
pub fn signed_pow(a: f64, c: f64) -> f64 {
    a.signum() * a.abs().powf(c)
}

/// A dilation `h ∈ H` with cached matrix, inverse, determinant, norm and modular values.
///
/// Parameters per family:
/// * similitude `d = 1`: `[r]`, `r ≠ 0`;
/// * similitude `d = 2`: `[r, θ]`, `r > 0`;
/// * similitude `d = 3`: `[r, q0, q1, q2, q3]`, `r > 0`, unit quaternion;
/// * diagonal: `[a_1, …, a_d]`, all nonzero;
/// * shearlet: `[a, b]`, `a ≠ 0`, matrix `[[a, b], [0, sign(a)|a|^c]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    spec: DilationGroupSpec,
    params: Vec<f64>,
    matrix: Matrix3<f64>,
    inverse: Matrix3<f64>,
    det: f64,
    opnorm: f64,
    modular_h: f64,
    modular_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub params: Vec<f64>,
}

fn opnorm_2x2(m: &Matrix3<f64>) -> f64 {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let fro = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (fro + disc)).sqrt()
}

impl GroupElement {
    pub fn new(spec: DilationGroupSpec, params: &[f64]) -> Result<Self> {
        spec.validate_elements()?;
        check_dim(spec.param_len(), params.len())?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidElement(format!("non-finite parameters {params:?}")));
        }
        let d = spec.dim;
        let mut p = params.to_vec();
        let (matrix, inverse, det, opnorm, modular_h) = match spec.family {
            Family::Similitude => {
                let r = p[0];
                let rot = match d {
                    1 => {
                        if r == 0.0 {
                            return Err(Error::InvalidElement("scale must be nonzero".into()));
                        }
                        Rotation::Sign(1.0)
                    }
                    2 => {
                        p[1] = wrap_angle(p[1]);
                        Rotation::Angle(p[1])
                    }
                    _ => {
                        let q = Rotation::Quaternion([p[1], p[2], p[3], p[4]]).normalized()?;
                        if let Rotation::Quaternion(q) = q {
                            p[1..5].copy_from_slice(&q);
                        }
                        q
                    }
                };
                if d > 1 && !(r > 0.0) {
                    return Err(Error::InvalidElement(format!("similitude scale must be positive, got {r}")));
                }
                let rm = rot.matrix();
                (rm * r, rm.transpose() / r, r.powi(d as i32), r.abs(), 1.0)
            }
            Family::Diagonal => {
                if p.contains(&0.0) {
                    return Err(Error::InvalidElement("diagonal entries must be nonzero".into()));
                }
                let mut m = Matrix3::zeros();
                let mut inv = Matrix3::zeros();
                for (i, a) in p.iter().enumerate() {
                    m[(i, i)] = *a;
                    inv[(i, i)] = 1.0 / a;
                }
                let det = p.iter().product();
                let norm = p.iter().map(|a| a.abs()).fold(0.0, f64::max);
                (m, inv, det, norm, 1.0)
            }
            Family::Shearlet => {
                let c = spec.c();
                let (a, b) = (p[0], p[1]);
                if a == 0.0 {
                    return Err(Error::InvalidElement("shearlet scale a must be nonzero".into()));
                }
                let ac = signed_pow(a, c);
                let m = Matrix3::new(a, b, 0.0, 0.0, ac, 0.0, 0.0, 0.0, 0.0);
                let inv = Matrix3::new(1.0 / a, -b / (a * ac), 0.0, 0.0, 1.0 / ac, 0.0, 0.0, 0.0, 0.0);
                let det = a * ac;
                (m, inv, det, opnorm_2x2(&m), a.abs().powf(c - 1.0))
            }
        };
        if !(det != 0.0 && det.is_finite()) {
            return Err(Error::InvalidElement(format!("singular or overflowing element {params:?}")));
        }
        Ok(Self {
            spec,
            params: p,
            matrix,
            inverse,
            det,
            opnorm,
            modular_h,
            modular_g: modular_h / det.abs(),
        })
    }

    pub fn identity(spec: DilationGroupSpec) -> Result<Self> {
        let params = match (spec.family, spec.dim) {
            (Family::Similitude, 1) => vec![1.0],
            (Family::Similitude, 2) => vec![1.0, 0.0],
            (Family::Similitude, _) => vec![1.0, 1.0, 0.0, 0.0, 0.0],
            (Family::Diagonal, d) => vec![1.0; d],
            (Family::Shearlet, _) => vec![1.0, 0.0],
        };
        Self::new(spec, &params)
    }

    /// `r·S` in the similitude group of dimension `rotation.dim()`.
    pub fn similitude(r: f64, rotation: Rotation) -> Result<Self> {
        let spec = DilationGroupSpec::similitude(rotation.dim());
        let params = match rotation {
            Rotation::Sign(s) => vec![r * s],
            Rotation::Angle(t) => vec![r, t],
            Rotation::Quaternion(q) => vec![r, q[0], q[1], q[2], q[3]],
        };
        Self::new(spec, &params)
    }

    pub fn shearlet(c: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(DilationGroupSpec::shearlet(c), &[a, b])
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DilationGroupSpec::diagonal(entries.len()), entries)
    }

    pub fn from_record(spec: DilationGroupSpec, record: &ElementRecord) -> Result<Self> {
        Self::new(spec, &record.params)
    }

    pub fn record(&self) -> ElementRecord {
        ElementRecord {
            params: self.params.clone(),
        }
    }

    /// Recovers the element from its matrix (top-left `d×d` block).
    pub fn from_matrix(spec: DilationGroupSpec, m: &Matrix3<f64>) -> Result<Self> {
        spec.validate_elements()?;
        let d = spec.dim;
        let params = match spec.family {
            Family::Similitude if d == 1 => vec![m[(0, 0)]],
            Family::Similitude => {
                let r = m.fixed_view::<3, 3>(0, 0).column(0).norm();
                let rot = Rotation::from_matrix(d, &(m / r))?;
                let mut p = vec![r];
                p.extend(rot.params());
                p
            }
            Family::Diagonal => (0..d).map(|i| m[(i, i)]).collect(),
            Family::Shearlet => vec![m[(0, 0)], m[(0, 1)]],
        };
        let g = Self::new(spec, &params)?;
        let scale = m.norm().max(1.0);
        if (g.matrix - m).norm() > 1e-9 * scale {
            return Err(Error::InvalidElement("matrix does not belong to the group".into()));
        }
        Ok(g)
    }

    pub fn spec(&self) -> &DilationGroupSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Matrix embedded in the top-left block of a 3×3 matrix (zeros elsewhere).
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &Matrix3<f64> {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    /// Largest singular value.
    pub fn opnorm(&self) -> f64 {
        self.opnorm
    }

    pub fn inverse_opnorm(&self) -> f64 {
        match self.spec.family {
            Family::Similitude => 1.0 / self.params[0].abs(),
            Family::Diagonal => self.params.iter().map(|a| 1.0 / a.abs()).fold(0.0, f64::max),
            Family::Shearlet => opnorm_2x2(&self.inverse),
        }
    }

    pub fn modular_h(&self) -> f64 {
        self.modular_h
    }

    /// `Δ_G(x, h) = Δ_H(h)/|det h|` (independent of `x`).
    pub fn modular_g(&self) -> f64 {
        self.modular_g
    }

    /// Scale parameter: `r` (similitude), `a` (shearlet), first entry (diagonal).
    pub fn scale(&self) -> f64 {
        self.params[0]
    }

    pub fn rotation(&self) -> Option<Rotation> {
        if self.spec.family != Family::Similitude {
            return None;
        }
        Some(match self.spec.dim {
            1 => Rotation::Sign(self.params[0].signum()),
            2 => Rotation::Angle(self.params[1]),
            _ => Rotation::Quaternion([self.params[1], self.params[2], self.params[3], self.params[4]]),
        })
    }

    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.spec != other.spec {
            return Err(Error::Dimension {
                expected: self.spec.dim,
                got: other.spec.dim,
            });
        }
        let (p, q) = (&self.params, &other.params);
        let params = match self.spec.family {
            Family::Similitude => match self.spec.dim {
                1 => vec![p[0] * q[0]],
                2 => vec![p[0] * q[0], wrap_angle(p[1] + q[1])],
                _ => {
                    let r = self.rotation().unwrap().compose(&other.rotation().unwrap())?;
                    let mut v = vec![p[0] * q[0]];
                    v.extend(r.params());
                    v
                }
            },
            Family::Diagonal => p.iter().zip(q).map(|(a, b)| a * b).collect(),
            Family::Shearlet => {
                let c = self.spec.c();
                vec![p[0] * q[0], p[0] * q[1] + p[1] * signed_pow(q[0], c)]
            }
        };
        GroupElement::new(self.spec, &params)
    }

    pub fn inverse(&self) -> GroupElement {
        let p = &self.params;
        let params = match self.spec.family {
            Family::Similitude => match self.spec.dim {
                1 => vec![1.0 / p[0]],
                2 => vec![1.0 / p[0], wrap_angle(-p[1])],
                _ => {
                    let mut v = vec![1.0 / p[0]];
                    v.extend(self.rotation().unwrap().inverse().params());
                    v
                }
            },
            Family::Diagonal => p.iter().map(|a| 1.0 / a).collect(),
            Family::Shearlet => {
                let c = self.spec.c();
                let (a, b) = (p[0], p[1]);
                vec![1.0 / a, -b / (a * signed_pow(a, c))]
            }
        };
        GroupElement::new(self.spec, &params).expect("inverse of a valid element is valid")
    }

    /// Left-Haar density in the family's natural coordinates.
    pub fn haar_density(&self) -> f64 {
        match self.spec.family {
            Family::Similitude => 1.0 / self.params[0].abs(),
            Family::Diagonal => self.params.iter().map(|a| 1.0 / a.abs()).product(),
            Family::Shearlet => 1.0 / (self.params[0] * self.params[0]),
        }
    }

    /// `h v` for a `d`-vector.
    pub fn apply(&self, v: &[f64]) -> Vector3<f64> {
        self.matrix * pad(v)
    }

    /// `h⁻¹ v`.
    pub fn apply_inverse(&self, v: &[f64]) -> Vector3<f64> {
        self.inverse * pad(v)
    }

    /// The dual action `hᵀξ`.
    pub fn dual_action(&self, xi: &[f64]) -> Vector3<f64> {
        self.matrix.tr_mul(&pad(xi))
    }
}

/// Pads a vector of length ≤ 3 with zeros.
pub(crate) fn pad(v: &[f64]) -> Vector3<f64> {
    let mut out = Vector3::zeros();
    for (o, x) in out.iter_mut().zip(v) {
        *o = *x;
    }
    out
}

/// `hᵀξ` as a free function.
pub fn dual_action(h: &GroupElement, xi: &[f64]) -> Result<Vec<f64>> {
    check_dim(h.dim(), xi.len())?;
    Ok(h.dual_action(xi).as_slice()[..h.dim()].to_vec())
}

/// A point `(x, h)` of the affine group `G = ℝ^d ⋊ H`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePoint {
    pub x: Vec<f64>,
    pub h: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineRecord {
    pub x: Vec<f64>,
    pub params: Vec<f64>,
}

impl AffinePoint {
    pub fn new(x: Vec<f64>, h: GroupElement) -> Result<Self> {
        check_dim(h.dim(), x.len())?;
        Ok(Self { x, h })
    }

    pub fn identity(spec: DilationGroupSpec) -> Result<Self> {
        Self::new(vec![0.0; spec.dim], GroupElement::identity(spec)?)
    }

    /// `(x₁, h₁)(x₂, h₂) = (x₁ + h₁x₂, h₁h₂)`.
    pub fn compose(&self, other: &AffinePoint) -> Result<AffinePoint> {
        let h = self.h.compose(&other.h)?;
        let hx = self.h.apply(&other.x);
        let x = self.x.iter().zip(hx.iter()).map(|(a, b)| a + b).collect();
        Ok(AffinePoint { x, h })
    }

    /// `(x, h)⁻¹ = (-h⁻¹x, h⁻¹)`.
    pub fn invert(&self) -> AffinePoint {
        let h = self.h.inverse();
        let y = self.h.apply_inverse(&self.x);
        AffinePoint {
            x: y.iter().take(self.x.len()).map(|v| -v).collect(),
            h,
        }
    }

    pub fn modular_g(&self) -> f64 {
        self.h.modular_g()
    }

    pub fn record(&self) -> AffineRecord {
        AffineRecord {
            x: self.x.clone(),
            params: self.h.params().to_vec(),
        }
    }

    pub fn from_record(spec: DilationGroupSpec, rec: &AffineRecord) -> Result<Self> {
        Self::new(rec.x.clone(), GroupElement::new(spec, &rec.params)?)
    }
}

/// Free-function form of [`AffinePoint::compose`].
pub fn compose(g1: &AffinePoint, g2: &AffinePoint) -> Result<AffinePoint> {
    g1.compose(g2)
}

/// Free-function form of [`AffinePoint::invert`].
pub fn invert(g: &AffinePoint) -> AffinePoint {
    g.invert()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn shearlet_product_matches_matrix_product() {
        let c = 0.5;
        let g = GroupElement::shearlet(c, 2.0, 1.0).unwrap();
        let h = GroupElement::shearlet(c, 3.0, 0.0).unwrap();
        let gh = g.compose(&h).unwrap();
        assert!((gh.matrix() - g.matrix() * h.matrix()).norm() < 1e-14);
        assert_eq!(gh.params()[0], 6.0);
        assert!(close(gh.params()[1], 3f64.sqrt(), 1e-15));
        assert!(close(gh.matrix()[(1, 1)], 6f64.sqrt(), 1e-15));
    }

    #[test]
    fn shearlet_inverse_matrix_matches_closed_form() {
        let c = 0.5;
        let (a, b) = (-2.5, 1.7);
        let g = GroupElement::shearlet(c, a, b).unwrap();
        let inv = g.inverse();
        let ac = signed_pow(a, c);
        let expected = Matrix3::new(1.0 / a, -b / (a * ac), 0.0, 0.0, 1.0 / ac, 0.0, 0.0, 0.0, 0.0);
        assert!((inv.matrix() - expected).norm() < 1e-14);
        // The closed form −a^{−c−1}b with the signed power convention.
        assert!(close(inv.params()[1], -signed_pow(a, -c) / a * b, 1e-14));
    }

    #[test]
    fn inverses_of_other_families() {
        let d = GroupElement::diagonal(&[2.0, -4.0]).unwrap().inverse();
        assert_eq!(d.params(), &[0.5, -0.25]);
        let s = GroupElement::similitude(2.0, Rotation::Angle(0.4)).unwrap().inverse();
        assert!(close(s.params()[0], 0.5, 1e-15));
        assert!(close(s.params()[1], -0.4, 1e-15));
    }

    #[test]
    fn haar_density_examples() {
        assert_eq!(GroupElement::shearlet(0.5, 2.0, 5.0).unwrap().haar_density(), 0.25);
        assert!(close(
            GroupElement::diagonal(&[2.0, -3.0]).unwrap().haar_density(),
            1.0 / 6.0,
            1e-15
        ));
        assert_eq!(GroupElement::similitude(0.5, Rotation::Angle(1.0)).unwrap().haar_density(), 2.0);
    }

    #[test]
    fn dual_action_examples() {
        let h = GroupElement::shearlet(0.5, 3.0, -2.0).unwrap();
        assert_eq!(dual_action(&h, &[1.0, 0.0]).unwrap(), vec![3.0, -2.0]);
        let d = GroupElement::diagonal(&[2.0, 5.0]).unwrap();
        assert_eq!(dual_action(&d, &[1.5, -1.0]).unwrap(), vec![3.0, -5.0]);
        let id = GroupElement::identity(DilationGroupSpec::similitude(3)).unwrap();
        assert_eq!(dual_action(&id, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn modular_functions() {
        let c = 0.3;
        let h = GroupElement::shearlet(c, -4.0, 2.0).unwrap();
        assert!(close(h.modular_h(), 4f64.powf(c - 1.0), 1e-15));
        assert!(close(h.modular_g(), h.modular_h() / h.abs_det(), 1e-15));
        assert!(close(h.abs_det(), 4f64.powf(1.0 + c), 1e-14));
    }

    #[test]
    fn spec_validation_and_json() {
        assert!(DilationGroupSpec {
            family: Family::Shearlet,
            dim: 3,
            shear_anisotropy: Some(0.5)
        }
        .validate()
        .is_err());
        let s: DilationGroupSpec = serde_json::from_str(r#"{"family":"shearlet","dim":2,"c":0.5}"#).unwrap();
        assert_eq!(s, DilationGroupSpec::shearlet(0.5));
        let t: DilationGroupSpec = serde_json::from_str(r#"{"family":"similitude","dim":2}"#).unwrap();
        assert_eq!(t, DilationGroupSpec::similitude(2));
        assert!(GroupElement::new(DilationGroupSpec::similitude(1), &[0.0]).is_err());
        assert!(GroupElement::new(DilationGroupSpec::similitude(1), &[-2.0]).is_ok());
    }

    #[test]
    fn affine_identity_and_inverse() {
        let spec = DilationGroupSpec::shearlet(0.5);
        let g = AffinePoint::new(vec![1.0, -2.0], GroupElement::shearlet(0.5, 1.5, 0.3).unwrap()).unwrap();
        let e = AffinePoint::identity(spec).unwrap();
        let ge = g.compose(&e).unwrap();
        assert_eq!(ge.x, g.x);
        assert_eq!(ge.h.params(), g.h.params());
        let gi = g.compose(&g.invert()).unwrap();
        assert!(gi.x.iter().all(|v| v.abs() < 1e-14));
        assert!((gi.h.matrix() - e.h.matrix()).norm() < 1e-14);
    }

    #[test]
    fn params_reconstruct_from_matrix() {
        let q = Rotation::axis_angle([0.3, -1.0, 0.2], 2.0).unwrap();
        let g = GroupElement::similitude(1.7, q).unwrap();
        let back = GroupElement::from_matrix(*g.spec(), g.matrix()).unwrap();
        for (a, b) in g.params().iter().zip(back.params()) {
            assert!(close(*a, *b, 1e-12), "{a} vs {b}");
        }
    }
}
