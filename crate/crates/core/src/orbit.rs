//! Geometry of the open dual orbit: distance to its complement and the
//! envelope `A(ξ)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::groups::{DilationGroupSpec, Family};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Complement {
    /// `{0}`.
    Origin,
    /// `{ξ : ∏ ξ_i = 0}`.
    CoordinateHyperplanes,
    /// `{ξ₁ = 0}`.
    AxisXi1Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitGeometry {
    pub spec: DilationGroupSpec,
    pub complement: Complement,
}

/// The switch point `c = (√5 − 1)/2` where `s = 1/(1+s)`.
pub const GOLDEN_SWITCH: f64 = 0.618_033_988_749_894_8;

#[inline]
fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl OrbitGeometry {
    pub fn new(spec: DilationGroupSpec) -> Result<Self> {
        spec.validate()?;
        let complement = match spec.family {
            Family::Similitude => Complement::Origin,
            Family::Diagonal => Complement::CoordinateHyperplanes,
            Family::Shearlet => Complement::AxisXi1Zero,
        };
        Ok(Self { spec, complement })
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// Distance of `ξ` to the complement of the orbit.
    #[inline]
    pub fn dist(&self, xi: &[f64]) -> f64 {
        match self.complement {
            Complement::Origin => norm(xi),
            Complement::CoordinateHyperplanes => xi.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min),
            Complement::AxisXi1Zero => xi[0].abs(),
        }
    }

    pub fn dist_complement(&self, xi: &[f64]) -> Result<f64> {
        check_dim(self.dim(), xi.len())?;
        Ok(self.dist(xi))
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        self.dist(xi) > 0.0
    }

    /// The generic envelope formula, returning 0 on the complement.
    #[inline]
    pub fn envelope_raw(&self, xi: &[f64]) -> f64 {
        let n = norm(xi);
        let dist = self.dist(xi);
        let transverse = (n * n - dist * dist).max(0.0).sqrt();
        (dist / (1.0 + transverse)).min(1.0 / (1.0 + n))
    }

    /// Per-family closed form, returning 0 on the complement.
    #[inline]
    pub fn envelope_closed_raw(&self, xi: &[f64]) -> f64 {
        let n = norm(xi);
        match self.complement {
            Complement::Origin => n.min(1.0 / (1.0 + n)),
            Complement::CoordinateHyperplanes => {
                let m = self.dist(xi);
                (m / (1.0 + (n * n - m * m).max(0.0).sqrt())).min(1.0 / (1.0 + n))
            }
            Complement::AxisXi1Zero => (xi[0].abs() / (1.0 + xi[1].abs())).min(1.0 / (1.0 + n)),
        }
    }

    /// `A(ξ)` via the generic formula; errors on the complement.
    pub fn envelope_a(&self, xi: &[f64]) -> Result<f64> {
        check_dim(self.dim(), xi.len())?;
        if !self.contains(xi) {
            return Err(Error::OutsideOrbit(xi.to_vec()));
        }
        Ok(self.envelope_raw(xi))
    }

    /// `A(ξ)` via the family's closed form; errors on the complement.
    pub fn envelope_closed_form(&self, xi: &[f64]) -> Result<f64> {
        check_dim(self.dim(), xi.len())?;
        if !self.contains(xi) {
            return Err(Error::OutsideOrbit(xi.to_vec()));
        }
        Ok(self.envelope_closed_raw(xi))
    }
}

/// Free-function form of [`OrbitGeometry::dist_complement`].
pub fn dist_complement(geom: &OrbitGeometry, xi: &[f64]) -> Result<f64> {
    geom.dist_complement(xi)
}

/// Free-function form of [`OrbitGeometry::envelope_a`].
pub fn envelope_a(geom: &OrbitGeometry, xi: &[f64]) -> Result<f64> {
    geom.envelope_a(xi)
}
