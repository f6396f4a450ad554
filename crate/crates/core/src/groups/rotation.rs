//! Rotation parts of similitude dilations and finite coverings of SO(d).

use nalgebra::{Matrix3, Unit, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// An element of O(1) = {±1}, SO(2) or SO(3).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rotation {
    Sign(f64),
    Angle(f64),
    Quaternion([f64; 4]),
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

fn canonical_quaternion(q: [f64; 4]) -> [f64; 4] {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut q = q.map(|x| x / n);
    let lead = q.iter().copied().find(|x| *x != 0.0).unwrap_or(1.0);
    if q[0] < 0.0 || (q[0] == 0.0 && lead < 0.0) {
        q = q.map(|x| -x);
    }
    q
}

impl Rotation {
    pub fn identity(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(Rotation::Sign(1.0)),
            2 => Ok(Rotation::Angle(0.0)),
            3 => Ok(Rotation::Quaternion([1.0, 0.0, 0.0, 0.0])),
            _ => Err(Error::InvalidSpec(format!("rotations are supported for d <= 3, got d = {dim}"))),
        }
    }

    /// Builds a normalized rotation, rejecting degenerate input.
    pub fn normalized(self) -> Result<Self> {
        match self {
            Rotation::Sign(s) if s == 1.0 || s == -1.0 => Ok(self),
            Rotation::Sign(s) => Err(Error::InvalidElement(format!("sign must be ±1, got {s}"))),
            Rotation::Angle(t) if t.is_finite() => Ok(Rotation::Angle(wrap_angle(t))),
            Rotation::Angle(t) => Err(Error::InvalidElement(format!("non-finite angle {t}"))),
            Rotation::Quaternion(q) => {
                let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(n.is_finite() && n > 1e-12) {
                    return Err(Error::InvalidElement("degenerate quaternion".into()));
                }
                Ok(Rotation::Quaternion(canonical_quaternion(q)))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Rotation::Sign(_) => 1,
            Rotation::Angle(_) => 2,
            Rotation::Quaternion(_) => 3,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Rotation::Sign(s) => vec![s],
            Rotation::Angle(t) => vec![t],
            Rotation::Quaternion(q) => q.to_vec(),
        }
    }

    fn unit_quaternion(q: [f64; 4]) -> UnitQuaternion<f64> {
        UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]))
    }

    /// Matrix of the rotation embedded in the top-left block of a 3×3 matrix.
    pub fn matrix(&self) -> Matrix3<f64> {
        match *self {
            Rotation::Sign(s) => Matrix3::new(s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
            Rotation::Angle(t) => {
                let (s, c) = t.sin_cos();
                Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 0.0)
            }
            Rotation::Quaternion(q) => *Self::unit_quaternion(q).to_rotation_matrix().matrix(),
        }
    }

    pub fn compose(&self, other: &Rotation) -> Result<Rotation> {
        match (*self, *other) {
            (Rotation::Sign(a), Rotation::Sign(b)) => Ok(Rotation::Sign(a * b)),
            (Rotation::Angle(a), Rotation::Angle(b)) => Ok(Rotation::Angle(wrap_angle(a + b))),
            (Rotation::Quaternion(a), Rotation::Quaternion(b)) => {
                let p = Self::unit_quaternion(a) * Self::unit_quaternion(b);
                let c = p.coords;
                Ok(Rotation::Quaternion(canonical_quaternion([c.w, c.x, c.y, c.z])))
            }
            _ => Err(Error::Dimension {
                expected: self.dim(),
                got: other.dim(),
            }),
        }
    }

    pub fn inverse(&self) -> Rotation {
        match *self {
            Rotation::Sign(s) => Rotation::Sign(s),
            Rotation::Angle(t) => Rotation::Angle(wrap_angle(-t)),
            Rotation::Quaternion(q) => Rotation::Quaternion(canonical_quaternion([q[0], -q[1], -q[2], -q[3]])),
        }
    }

    /// Geodesic angle to the identity (for signs: 0 or π).
    pub fn angle(&self) -> f64 {
        match *self {
            Rotation::Sign(s) => {
                if s > 0.0 {
                    0.0
                } else {
                    PI
                }
            }
            Rotation::Angle(t) => wrap_angle(t).abs(),
            Rotation::Quaternion(q) => 2.0 * q[0].abs().min(1.0).acos(),
        }
    }

    /// Geodesic distance between two rotations.
    pub fn distance(&self, other: &Rotation) -> f64 {
        match (*self, *other) {
            (Rotation::Quaternion(a), Rotation::Quaternion(b)) => {
                let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                2.0 * dot.abs().min(1.0).acos()
            }
            _ => self.inverse().compose(other).map(|r| r.angle()).unwrap_or(f64::INFINITY),
        }
    }

    /// Recovers a rotation from the top-left block of a rotation matrix.
    pub fn from_matrix(dim: usize, m: &Matrix3<f64>) -> Result<Rotation> {
        match dim {
            1 => Rotation::Sign(m[(0, 0)].signum()).normalized(),
            2 => Ok(Rotation::Angle(m[(1, 0)].atan2(m[(0, 0)]))),
            3 => {
                let r = nalgebra::Rotation3::from_matrix_unchecked(*m);
                let q = UnitQuaternion::from_rotation_matrix(&r).coords;
                Rotation::Quaternion([q.w, q.x, q.y, q.z]).normalized()
            }
            _ => Err(Error::InvalidSpec(format!("no rotations for d = {dim}"))),
        }
    }

    /// A uniformly distributed random rotation (Haar measure).
    pub fn random<R: Rng>(dim: usize, rng: &mut R) -> Result<Rotation> {
        match dim {
            1 => Ok(Rotation::Sign(if rng.random::<bool>() { 1.0 } else { -1.0 })),
            2 => Ok(Rotation::Angle(rng.random_range(-PI..PI))),
            3 => {
                let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
                let q = [
                    (1.0 - u1).sqrt() * (2.0 * PI * u2).sin(),
                    (1.0 - u1).sqrt() * (2.0 * PI * u2).cos(),
                    u1.sqrt() * (2.0 * PI * u3).sin(),
                    u1.sqrt() * (2.0 * PI * u3).cos(),
                ];
                Rotation::Quaternion(q).normalized()
            }
            _ => Err(Error::InvalidSpec(format!("no rotations for d = {dim}"))),
        }
    }

    /// Rotation by `angle` about `axis` (d = 3).
    pub fn axis_angle(axis: [f64; 3], angle: f64) -> Result<Rotation> {
        let axis = Unit::try_new(Vector3::from(axis), 1e-12).ok_or_else(|| Error::InvalidElement("zero rotation axis".into()))?;
        let q = UnitQuaternion::from_axis_angle(&axis, angle).coords;
        Rotation::Quaternion([q.w, q.x, q.y, q.z]).normalized()
    }
}

/// A finite set of rotations whose `covering_radius`-balls cover the rotation group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationList {
    pub rotations: Vec<Rotation>,
    pub covering_radius: f64,
}

impl RotationList {
    /// `{+1}` in d = 1, which covers the positive scales; the identity otherwise.
    pub fn trivial(dim: usize) -> Result<Self> {
        Ok(Self {
            rotations: vec![Rotation::identity(dim)?],
            covering_radius: if dim == 1 { 0.0 } else { PI },
        })
    }

    /// `{+1, -1}`, covering all of O(1).
    pub fn signs() -> Self {
        Self {
            rotations: vec![Rotation::Sign(1.0), Rotation::Sign(-1.0)],
            covering_radius: 0.0,
        }
    }

    /// Uniform angles with covering radius `π/n <= radius`.
    pub fn so2(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("covering radius must be positive, got {radius}")));
        }
        let n = (PI / radius).ceil().max(1.0) as usize;
        let rotations = (0..n)
            .map(|i| Rotation::Angle(wrap_angle(2.0 * PI * i as f64 / n as f64)))
            .collect();
        Ok(Self {
            rotations,
            covering_radius: PI / n as f64,
        })
    }

    /// Quaternion lattice from the gnomonic projection of the four cube cells
    /// `{q_i = 1, |q_j| <= 1}`, with `n` cell centres per axis.
    ///
    /// The projection is 1-Lipschitz from the cell onto the sphere, so the
    /// rotation-angle covering radius is at most `2√3/n`.
    pub fn so3(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("covering radius must be positive, got {radius}")));
        }
        let n = (2.0 * 3f64.sqrt() / radius).ceil().max(1.0) as usize;
        let centre = |i: usize| -1.0 + (2.0 * i as f64 + 1.0) / n as f64;
        let mut rotations = Vec::with_capacity(4 * n * n * n);
        for axis in 0..4 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let rest = [centre(i), centre(j), centre(k)];
                        let mut q = [0.0; 4];
                        let mut r = 0;
                        for (slot, v) in q.iter_mut().enumerate() {
                            if slot == axis {
                                *v = 1.0;
                            } else {
                                *v = rest[r];
                                r += 1;
                            }
                        }
                        rotations.push(Rotation::Quaternion(q).normalized()?);
                    }
                }
            }
        }
        Ok(Self {
            rotations,
            covering_radius: 2.0 * 3f64.sqrt() / n as f64,
        })
    }

    /// Covering list for SO(d) at the requested radius.
    pub fn covering(dim: usize, radius: f64) -> Result<Self> {
        match dim {
            1 => Self::trivial(1),
            2 => Self::so2(radius),
            3 => Self::so3(radius),
            _ => Err(Error::InvalidSpec(format!("no rotation coverings for d = {dim}"))),
        }
    }

    /// Largest distance from `samples` seeded random rotations to the list:
    /// a Monte-Carlo lower estimate of the true covering radius.
    pub fn empirical_covering_radius(&self, samples: usize, seed: u64) -> Result<f64> {
        let dim = self.rotations.first().map(|r| r.dim()).ok_or(Error::EmptySet)?;
        if dim == 1 {
            return Ok(0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let g = Rotation::random(dim, &mut rng)?;
            let best = self.rotations.iter().map(|r| r.distance(&g)).fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_matrix_is_orthogonal() {
        let r = Rotation::axis_angle([1.0, 2.0, -0.5], 0.7).unwrap();
        let m = r.matrix();
        let e = m.transpose() * m - Matrix3::identity();
        assert!(e.norm() < 1e-14);
        assert!((m.determinant() - 1.0).abs() < 1e-14);
        assert!((r.angle() - 0.7).abs() < 1e-14);
    }

    #[test]
    fn compose_matches_matrix_product() {
        let a = Rotation::axis_angle([0.0, 0.0, 1.0], 0.3).unwrap();
        let b = Rotation::axis_angle([1.0, 0.0, 0.0], -1.1).unwrap();
        let ab = a.compose(&b).unwrap();
        assert!((ab.matrix() - a.matrix() * b.matrix()).norm() < 1e-14);
        let back = Rotation::from_matrix(3, &ab.matrix()).unwrap();
        assert!(back.distance(&ab) < 1e-7);
    }

    #[test]
    fn so2_covering_is_within_radius() {
        let list = RotationList::so2(0.2).unwrap();
        assert!(list.covering_radius <= 0.2);
        let emp = list.empirical_covering_radius(2000, 1).unwrap();
        assert!(emp <= list.covering_radius + 1e-12);
    }

    #[test]
    fn so3_covering_bound_holds_empirically() {
        let list = RotationList::so3(1.2).unwrap();
        let emp = list.empirical_covering_radius(3000, 7).unwrap();
        assert!(emp <= list.covering_radius, "{emp} > {}", list.covering_radius);
        assert!(list.covering_radius <= 1.2);
    }
}
