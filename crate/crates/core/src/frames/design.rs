//! Sampling sets adapted to the spectrum of an atom on a test space.
//!
//! Each dilation `h` gets a full grid coset whose per-axis stride is the largest
//! power-of-two multiple of the grid spacing that still resolves the frequency
//! bounding box of `ξ ↦ ψ̂(hᵀξ)` on the test space.

use serde::{Deserialize, Serialize};

use super::TestSpace;
use crate::error::{check_dim, Error, Result};
use crate::fourier::FourierSource;
use crate::groups::GroupElement;
use crate::sampling::{build_sliced, Neighborhood, SamplingSet};

/// Location and half-maximum width of `|ψ̂|` along the first frequency axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    /// `η₁ > 0` maximizing `|ψ̂(η₁, 0, …)|`.
    pub peak: f64,
    /// Full width at half maximum in the remaining axes.
    pub width: f64,
    pub max: f64,
}

/// Scans `|ψ̂|` on `(0, extent]` with the given resolution.
pub fn spectral_profile(psi: &dyn FourierSource, extent: f64, resolution: f64) -> Result<SpectralProfile> {
    if !(extent > 0.0) || !(resolution > 0.0) {
        return Err(Error::Domain("scan extent and resolution must be positive".into()));
    }
    let d = psi.dim();
    let steps = (extent / resolution).ceil() as usize;
    let at = |e1: f64, e2: f64| {
        let mut eta = vec![0.0; d];
        eta[0] = e1;
        if d > 1 {
            eta[1] = e2;
        }
        psi.fourier(&eta).norm()
    };
    let (mut peak, mut max) = (0.0, 0.0);
    for i in 1..=steps {
        let e = i as f64 * resolution;
        let v = at(e, 0.0);
        if v > max {
            max = v;
            peak = e;
        }
    }
    if max == 0.0 {
        return Err(Error::Domain("ψ̂ vanishes on the scanned range".into()));
    }
    let mut width = 2.0 * extent;
    if d > 1 {
        for i in 1..=steps {
            let e = i as f64 * resolution;
            if at(peak, e) < 0.5 * max {
                width = 2.0 * e;
                break;
            }
        }
    }
    Ok(SpectralProfile { peak, width, max })
}

/// Shearlet dilations `a = 2^{-j·step}` with shears spaced to the atom's frequency width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearletDesign {
    pub c: f64,
    /// `log₂` of the ratio between consecutive scales.
    pub scale_step: f64,
    /// Shear spacing in units of `width · a / peak`.
    pub shear_step: f64,
}

impl Default for ShearletDesign {
    fn default() -> Self {
        Self {
            c: 0.5,
            scale_step: 0.5,
            shear_step: 1.0,
        }
    }
}

impl ShearletDesign {
    /// Dilations covering `f_lo ≤ |ξ₁|`, `|ξ|_∞ ≤ f_hi`.
    pub fn dilations(&self, profile: &SpectralProfile, f_lo: f64, f_hi: f64) -> Result<Vec<GroupElement>> {
        if !(f_lo > 0.0) || !(f_hi > f_lo) || !(self.scale_step > 0.0) || !(self.shear_step > 0.0) {
            return Err(Error::Domain("invalid shearlet design".into()));
        }
        let (a_min, a_max) = (profile.peak / f_hi / 2.0, 2.0 * profile.peak / f_lo);
        let slope = f_hi / f_lo;
        let mut out = Vec::new();
        let mut j = (a_max.log2() / self.scale_step).ceil() as i64;
        loop {
            let a = (j as f64 * self.scale_step).exp2();
            if a < a_min {
                break;
            }
            let db = self.shear_step * profile.width * a / profile.peak;
            let count = ((slope * a.powf(self.c) + 2.0 * db) / db).ceil() as i64;
            for k in -count..=count {
                out.push(GroupElement::shearlet(self.c, a, k as f64 * db)?);
            }
            j -= 1;
        }
        Ok(out)
    }
}

/// Per-slice translation cosets on the grid of `space`.
///
/// Dilations where `|ψ̂(hᵀξ)|` stays below `threshold · max|ψ̂|` on the test space
/// are dropped. The result carries a separation certificate.
pub fn adapted_set(
    psi: &dyn FourierSource,
    space: &TestSpace,
    dilations: &[GroupElement],
    threshold: f64,
    reference_max: f64,
) -> Result<SamplingSet> {
    let grid = space.grid();
    let d = grid.dim();
    check_dim(d, psi.dim())?;
    let periods = grid.periods();
    let cut = threshold * reference_max;
    let mut hs = Vec::new();
    let mut xs = Vec::new();
    for h in dilations {
        check_dim(d, h.dim())?;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for xi in space.frequencies() {
            let eta = h.dual_action(&xi[..d]);
            if psi.fourier(&eta.as_slice()[..d]).norm() > cut {
                for a in 0..d {
                    lo[a] = lo[a].min(xi[a]);
                    hi[a] = hi[a].max(xi[a]);
                }
            }
        }
        if lo[0] > hi[0] {
            continue;
        }
        let strides: Vec<usize> = (0..d)
            .map(|a| {
                let extent = hi[a] - lo[a] + 1.0 / periods[a];
                let mut s = 1;
                while 2 * s <= grid.extents[a] && (2 * s) as f64 * grid.spacing[a] * extent <= 1.0 {
                    s *= 2;
                }
                s
            })
            .collect();
        let counts: Vec<usize> = (0..d).map(|a| grid.extents[a].div_ceil(strides[a])).collect();
        let total: usize = counts.iter().product();
        let pts = (0..total)
            .map(|mut flat| {
                let mut x = vec![0.0; d];
                for a in (0..d).rev() {
                    x[a] = grid.origin[a] + (flat % counts[a] * strides[a]) as f64 * grid.spacing[a];
                    flat /= counts[a];
                }
                x
            })
            .collect::<Vec<_>>();
        hs.push(h.clone());
        xs.push(pts);
    }
    if hs.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut set = build_sliced(&hs, &xs)?;
    let radius = separation_radius(&set);
    let report = set.certify_separation(&Neighborhood::new(0.4 * radius, 1e-3, 1e-6)?)?;
    if !report.separated {
        return Err(Error::Contract("adapted set failed its separation certificate".into()));
    }
    Ok(set)
}

/// Half the smallest normalized distance `|h⁻¹(x_i − x_j)|` along lattice axes.
fn separation_radius(set: &SamplingSet) -> f64 {
    let d = set.dim();
    let pts = set.points();
    let mut best = f64::INFINITY;
    for s in set.slices() {
        let x0 = &pts[s.indices[0]].x;
        for &i in s.indices.iter().skip(1) {
            let diff: Vec<f64> = (0..d).map(|a| pts[i].x[a] - x0[a]).collect();
            if diff.iter().filter(|v| v.abs() > 0.0).count() != 1 {
                continue;
            }
            let y = s.h.apply_inverse(&diff);
            best = best.min(y.norm() / 2.0);
        }
        if s.indices.len() == 1 {
            best = best.min(1.0);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::build_atom;
    use crate::bump::build_bump;
    use crate::fourier::Spectrum;
    use crate::frames::{FrameOptions, FrameSystem};
    use crate::grid::GridSpec;
    use crate::groups::DilationGroupSpec;
    use crate::orbit::OrbitGeometry;
    use crate::par::Execution;

    #[test]
    fn small_shearlet_system_is_a_certified_frame() {
        let spec = DilationGroupSpec::shearlet(0.5);
        let rho = build_bump(Default::default(), 1.0, &GridSpec::centered(2, 64, 1.0 / 16.0).unwrap()).unwrap();
        let psi = build_atom(&rho, &OrbitGeometry::new(spec).unwrap(), 4).unwrap();
        let spectrum = Spectrum::of(&psi);
        let profile = spectral_profile(&spectrum, 5.0, 0.01).unwrap();
        assert!(profile.peak > 1.0 && profile.width > 0.5);
        let grid = GridSpec::centered(2, 32, 0.25).unwrap();
        let space = TestSpace::with_filter(grid, |xi| xi[0].abs() >= 0.5 && xi[0].abs().max(xi[1].abs()) <= 1.5).unwrap();
        let hs = ShearletDesign::default().dilations(&profile, 0.5, 1.5).unwrap();
        let set = adapted_set(&spectrum, &space, &hs, 1e-2, profile.max).unwrap();
        assert!(set.separation_certificate.is_some());
        let sys = FrameSystem::from_sampled(&psi, &set, space, Execution::Sequential).unwrap();
        let r = sys.bounds(&FrameOptions::default()).unwrap();
        assert!(r.ratio() < 100.0, "{r:?}");
        assert!(r.reconstruction_error < 1e-6);
    }
}
