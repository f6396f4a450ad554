//! Uniform box grids, sampled functions and multi-dimensional FFTs.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::bump::ClosedForm;
use crate::error::{check_dim, Error, Result};

/// A uniform box grid: point `n` sits at `origin + n ∘ spacing` (row-major, last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub extents: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, extents: Vec<usize>) -> Result<Self> {
        let d = origin.len();
        if d == 0 || d > 3 {
            return Err(Error::InvalidSpec(format!("grids support 1 <= d <= 3, got {d}")));
        }
        check_dim(d, spacing.len())?;
        check_dim(d, extents.len())?;
        if spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::Domain("grid spacing must be positive".into()));
        }
        if extents.iter().any(|n| *n < 4) {
            return Err(Error::Domain("grid extents must be at least 4 per axis".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Domain("grid origin must be finite".into()));
        }
        Ok(Self { origin, spacing, extents })
    }

    /// `n` points per axis with spacing `h`, index `n/2` at the origin.
    pub fn centered(dim: usize, n: usize, h: f64) -> Result<Self> {
        Self::new(vec![-((n / 2) as f64) * h; dim], vec![h; dim], vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Side lengths of the periodic window.
    pub fn periods(&self) -> Vec<f64> {
        self.extents.iter().zip(&self.spacing).map(|(n, h)| *n as f64 * h).collect()
    }

    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.extents[a];
            flat /= self.extents[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.extents).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = self.origin[a] + idx[a] as f64 * self.spacing[a];
        }
        x
    }

    /// Integer frequency index of FFT bin `i` along `axis` (in `[-n/2, n/2)`).
    pub fn freq_index(&self, axis: usize, i: usize) -> i64 {
        let n = self.extents[axis];
        if i < n.div_ceil(2) {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Frequency vector of flat FFT bin `flat`.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut xi = [0.0; 3];
        for a in 0..self.dim() {
            xi[a] = self.freq_index(a, idx[a]) as f64 / (self.extents[a] as f64 * self.spacing[a]);
        }
        xi
    }

    /// Nearest grid index of coordinate `x` along `axis`, if it lies on the grid.
    pub fn on_grid_index(&self, axis: usize, x: f64) -> Option<usize> {
        let u = (x - self.origin[axis]) / self.spacing[axis];
        let r = u.round();
        if (u - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.extents[axis] {
            Some(r as usize)
        } else {
            None
        }
    }

    /// The grid enlarged `factor` times per axis around the same centre.
    pub fn padded(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        let extents: Vec<usize> = self.extents.iter().map(|n| n * factor).collect();
        let origin = (0..self.dim())
            .map(|a| self.origin[a] - ((extents[a] - self.extents[a]) / 2) as f64 * self.spacing[a])
            .collect();
        Self {
            origin,
            spacing: self.spacing.clone(),
            extents,
        }
    }

    /// Offset (per axis) of this grid inside `outer`, when aligned.
    pub fn offset_in(&self, outer: &GridSpec) -> Result<Vec<usize>> {
        check_dim(self.dim(), outer.dim())?;
        (0..self.dim())
            .map(|a| {
                if (self.spacing[a] - outer.spacing[a]).abs() > 1e-12 * self.spacing[a] {
                    return Err(Error::Resolution("grids have different spacing".into()));
                }
                let i = outer
                    .on_grid_index(a, self.origin[a])
                    .ok_or_else(|| Error::Resolution("grids are not aligned".into()))?;
                if i + self.extents[a] > outer.extents[a] {
                    return Err(Error::Resolution("grid does not fit in the outer grid".into()));
                }
                Ok(i)
            })
            .collect()
    }
}

/// Complex samples of a function on a [`GridSpec`], optionally tagged with a closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub samples: Vec<Complex64>,
    pub tag: Option<ClosedForm>,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        check_dim(grid.len(), samples.len())?;
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("samples must be finite".into()));
        }
        Ok(Self { grid, samples, tag: None })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); n],
            tag: None,
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(grid: GridSpec, f: F) -> Self {
        let d = grid.dim();
        let samples = (0..grid.len()).map(|i| f(&grid.point(i)[..d])).collect();
        Self { grid, samples, tag: None }
    }

    pub fn with_tag(mut self, tag: Option<ClosedForm>) -> Self {
        self.tag = tag;
        self
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `∫ f` by the trapezoid (rectangle) rule.
    pub fn integral(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn l1_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// `⟨f, g⟩ = ∫ f conj(g)` on a shared grid.
    pub fn inner(&self, other: &SampledFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::Resolution("inner product needs identical grids".into()));
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.grid.cell_volume())
    }

    /// Embeds the samples into a larger aligned grid, zero elsewhere.
    pub fn embed(&self, outer: &GridSpec) -> Result<SampledFunction> {
        let off = self.grid.offset_in(outer)?;
        let mut out = SampledFunction::zeros(outer.clone());
        let d = self.dim();
        for i in 0..self.grid.len() {
            let idx = self.grid.unravel(i);
            let mut j = [0; 3];
            for a in 0..d {
                j[a] = idx[a] + off[a];
            }
            out.samples[outer.ravel(&j[..d])] = self.samples[i];
        }
        out.tag = self.tag.clone();
        Ok(out)
    }

    /// Restricts the samples to an aligned sub-grid.
    pub fn crop(&self, inner: &GridSpec) -> Result<SampledFunction> {
        let off = inner.offset_in(&self.grid)?;
        let d = self.dim();
        let samples = (0..inner.len())
            .map(|i| {
                let idx = inner.unravel(i);
                let mut j = [0; 3];
                for a in 0..d {
                    j[a] = idx[a] + off[a];
                }
                self.samples[self.grid.ravel(&j[..d])]
            })
            .collect();
        Ok(SampledFunction {
            grid: inner.clone(),
            samples,
            tag: self.tag.clone(),
        })
    }

    /// Smallest box (in grid indices) containing all samples above `tol·max|f|`.
    pub fn support_box(&self, tol: f64) -> Option<(Vec<usize>, Vec<usize>)> {
        let peak = self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return None;
        }
        let d = self.dim();
        let mut lo = vec![usize::MAX; d];
        let mut hi = vec![0; d];
        for (i, z) in self.samples.iter().enumerate() {
            if z.norm() > tol * peak {
                let idx = self.grid.unravel(i);
                for a in 0..d {
                    lo[a] = lo[a].min(idx[a]);
                    hi[a] = hi[a].max(idx[a]);
                }
            }
        }
        Some((lo, hi))
    }
}

/// Cached forward and inverse plans for one set of extents.
#[derive(Clone)]
pub struct FftNd {
    extents: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("extents", &self.extents).finish()
    }
}

impl FftNd {
    pub fn new(extents: &[usize]) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        Self {
            extents: extents.to_vec(),
            forward: extents.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: extents.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// In-place transform, unnormalized in both directions.
    pub fn process(&self, data: &mut [Complex64], inverse: bool) {
        let extents = &self.extents;
        let total: usize = extents.iter().product();
        debug_assert_eq!(total, data.len());
        let plans = if inverse { &self.inverse } else { &self.forward };
        for (axis, plan) in plans.iter().enumerate() {
            let n = extents[axis];
            if n == 1 {
                continue;
            }
            let stride: usize = extents[axis + 1..].iter().product();
            if stride == 1 {
                plan.process(data);
                continue;
            }
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let outer = total / (n * stride);
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * n * stride + s;
                    for k in 0..n {
                        line[k] = data[base + k * stride];
                    }
                    plan.process(&mut line);
                    for k in 0..n {
                        data[base + k * stride] = line[k];
                    }
                }
            }
        }
    }
}

/// In-place multi-dimensional FFT (unnormalized in both directions).
pub fn fft_nd(data: &mut [Complex64], extents: &[usize], inverse: bool) {
    FftNd::new(extents).process(data, inverse);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ravel_roundtrip_and_points() {
        let g = GridSpec::new(vec![-1.0, 0.0], vec![0.5, 0.25], vec![4, 6]).unwrap();
        for i in 0..g.len() {
            let idx = g.unravel(i);
            assert_eq!(g.ravel(&idx[..2]), i);
        }
        assert_eq!(g.point(7), [-0.5, 0.25, 0.0]);
        assert_eq!(g.freq_index(1, 4), -2);
        assert_eq!(g.periods(), vec![2.0, 1.5]);
    }

    #[test]
    fn fft_matches_direct_dft() {
        let ext = [4usize, 6];
        let data: Vec<Complex64> = (0..24).map(|i| Complex64::new(i as f64, (i * i) as f64 % 5.0)).collect();
        let mut f = data.clone();
        fft_nd(&mut f, &ext, false);
        for k0 in 0..4 {
            for k1 in 0..6 {
                let mut s = Complex64::new(0.0, 0.0);
                for n0 in 0..4 {
                    for n1 in 0..6 {
                        let ph = -2.0 * std::f64::consts::PI * ((k0 * n0) as f64 / 4.0 + (k1 * n1) as f64 / 6.0);
                        s += data[n0 * 6 + n1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - f[k0 * 6 + k1]).norm() < 1e-10);
            }
        }
        fft_nd(&mut f, &ext, true);
        for (a, b) in f.iter().zip(&data) {
            assert!((a / 24.0 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn embed_crop_roundtrip() {
        let g = GridSpec::centered(2, 8, 0.5).unwrap();
        let f = SampledFunction::from_fn(g.clone(), |x| Complex64::new(x[0] - x[1], x[0] * x[1]));
        let big = g.padded(4);
        let e = f.embed(&big).unwrap();
        assert!((e.l2_norm() - f.l2_norm()).abs() < 1e-14);
        let back = e.crop(&g).unwrap();
        assert_eq!(back.samples, f.samples);
    }
}
