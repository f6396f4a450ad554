//! Discrete wavelet systems `(π(z_i)ψ)_i` on a periodized window.
//!
//! Signals live on the torus of a [`GridSpec`]; a [`TestSpace`] selects grid
//! frequencies `T`, and a vector `u ∈ ℂ^T` stands for the band-limited signal
//! with `f̂(ξ) = L^{d/2} u_ξ`, so that `‖u‖₂ = ‖f‖_{L²}`. The periodized atom
//! `π(x, h)ψ` has coefficients `|det h|^{1/2} ψ̂(hᵀξ) e^{-2πi⟨ξ,x⟩}`, evaluated
//! from the continuous spectrum of `ψ`.

mod bounds;
mod design;
mod norms;

pub use bounds::{frame_bounds, reconstruct, BoundMethod, FrameOptions, FrameReport, Reconstruction};
pub use design::{adapted_set, spectral_profile, ShearletDesign, SpectralProfile};
pub use norms::{besov_sequence_norm, coefficient_norm, WeightSpec};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::fourier::{FourierSource, Spectrum};
use crate::grid::{FftNd, GridSpec, SampledFunction};
use crate::groups::{AffinePoint, GroupElement};
use crate::orbit::OrbitGeometry;
use crate::par::Execution;
use crate::sampling::SamplingSet;

/// Frequency band `{ξ : dist(ξ, 𝒪ᶜ) ≥ min_orbit_distance, |ξ|_∞ ≤ max_frequency}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub geometry: OrbitGeometry,
    pub min_orbit_distance: f64,
    pub max_frequency: f64,
}

/// Serializable summary of a test space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSpaceDescription {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub extents: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_orbit_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_frequency: Option<f64>,
    pub dimension: usize,
}

/// Periodized window times a set of grid frequencies.
#[derive(Clone, Debug)]
pub struct TestSpace {
    grid: GridSpec,
    band: Option<Band>,
    ks: Vec<[i64; 3]>,
    xi: Vec<[f64; 3]>,
    fft_pos: Vec<usize>,
    kmin: [i64; 3],
    span: [usize; 3],
}

impl TestSpace {
    /// Every grid frequency.
    pub fn full(grid: GridSpec) -> Self {
        Self::build(grid, None, |_| true)
    }

    pub fn new(grid: GridSpec, band: Band) -> Result<Self> {
        check_dim(band.geometry.dim(), grid.dim())?;
        if !(band.max_frequency > 0.0) || !(band.min_orbit_distance >= 0.0) {
            return Err(Error::Domain("band limits must be positive".into()));
        }
        let b = band.clone();
        let space = Self::build(grid, Some(band), move |xi| {
            xi.iter().all(|v| v.abs() <= b.max_frequency) && b.geometry.dist(xi) >= b.min_orbit_distance
        });
        if space.ks.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(space)
    }

    /// Grid frequencies satisfying `keep`.
    pub fn with_filter<F: Fn(&[f64]) -> bool>(grid: GridSpec, keep: F) -> Result<Self> {
        let space = Self::build(grid, None, keep);
        if space.ks.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(space)
    }

    fn build<F: Fn(&[f64]) -> bool>(grid: GridSpec, band: Option<Band>, keep: F) -> Self {
        let d = grid.dim();
        let mut ks = Vec::new();
        let mut xi = Vec::new();
        let mut fft_pos = Vec::new();
        for flat in 0..grid.len() {
            let f = grid.frequency(flat);
            if !keep(&f[..d]) {
                continue;
            }
            let idx = grid.unravel(flat);
            let mut k = [0i64; 3];
            for a in 0..d {
                k[a] = grid.freq_index(a, idx[a]);
            }
            ks.push(k);
            xi.push(f);
            fft_pos.push(flat);
        }
        let mut kmin = [0i64; 3];
        let mut span = [1usize; 3];
        for a in 0..d {
            let lo = ks.iter().map(|k| k[a]).min().unwrap_or(0);
            let hi = ks.iter().map(|k| k[a]).max().unwrap_or(0);
            kmin[a] = lo;
            span[a] = (hi - lo + 1) as usize;
        }
        Self {
            grid,
            band,
            ks,
            xi,
            fft_pos,
            kmin,
            span,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Number of frequencies in `T`.
    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    pub fn frequencies(&self) -> &[[f64; 3]] {
        &self.xi
    }

    pub fn description(&self) -> TestSpaceDescription {
        TestSpaceDescription {
            origin: self.grid.origin.clone(),
            spacing: self.grid.spacing.clone(),
            extents: self.grid.extents.clone(),
            min_orbit_distance: self.band.as_ref().map(|b| b.min_orbit_distance),
            max_frequency: self.band.as_ref().map(|b| b.max_frequency),
            dimension: self.len(),
        }
    }

    fn volume(&self) -> f64 {
        self.grid.periods().iter().product()
    }

    /// `e^{-2πi⟨ξ, origin⟩}` for every frequency of `T`.
    fn origin_phase(&self, sign: f64) -> Vec<Complex64> {
        let d = self.dim();
        self.xi
            .iter()
            .map(|xi| {
                let ph: f64 = (0..d).map(|a| xi[a] * self.grid.origin[a]).sum();
                Complex64::from_polar(1.0, sign * 2.0 * PI * ph)
            })
            .collect()
    }

    /// Coordinates `u_ξ = f̂(ξ)/L^{d/2}` of the projection of `f` onto `T`.
    pub fn coordinates(&self, f: &SampledFunction) -> Result<Vec<Complex64>> {
        if f.grid != self.grid {
            return Err(Error::Resolution("signal grid differs from the test-space grid".into()));
        }
        let mut buf = f.samples.clone();
        FftNd::new(&self.grid.extents).process(&mut buf, false);
        let scale = self.grid.cell_volume() / self.volume().sqrt();
        let phase = self.origin_phase(-1.0);
        Ok(self.fft_pos.iter().zip(phase).map(|(&p, ph)| buf[p] * ph * scale).collect())
    }

    /// Inverse of [`TestSpace::coordinates`]: the band-limited signal on the grid.
    pub fn signal(&self, u: &[Complex64]) -> Result<SampledFunction> {
        check_dim(self.len(), u.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let scale = self.volume().sqrt() / self.grid.cell_volume() / self.grid.len() as f64;
        for ((&p, ph), v) in self.fft_pos.iter().zip(self.origin_phase(1.0)).zip(u) {
            buf[p] = v * ph * scale;
        }
        FftNd::new(&self.grid.extents).process(&mut buf, true);
        SampledFunction::new(self.grid.clone(), buf)
    }

    /// Per-axis tables of `e^{2πi s k x_a / L_a}` for `k` over the span of `T`.
    fn phase_tables(&self, x: &[f64], sign: f64) -> [Vec<Complex64>; 3] {
        let periods = self.grid.periods();
        let mut out: [Vec<Complex64>; 3] = Default::default();
        for a in 0..self.dim() {
            let theta = sign * 2.0 * PI * x[a] / periods[a];
            let step = Complex64::from_polar(1.0, theta);
            let mut cur = Complex64::from_polar(1.0, theta * self.kmin[a] as f64);
            let mut tab = Vec::with_capacity(self.span[a]);
            for j in 0..self.span[a] {
                // Re-anchor periodically to keep the recurrence exact to rounding.
                if j % 64 == 0 {
                    cur = Complex64::from_polar(1.0, theta * (self.kmin[a] + j as i64) as f64);
                }
                tab.push(cur);
                cur *= step;
            }
            out[a] = tab;
        }
        out
    }

    #[inline]
    fn table_product(&self, tabs: &[Vec<Complex64>; 3], t: usize) -> Complex64 {
        let k = &self.ks[t];
        let mut z = tabs[0][(k[0] - self.kmin[0]) as usize];
        for a in 1..self.dim() {
            z *= tabs[a][(k[a] - self.kmin[a]) as usize];
        }
        z
    }
}

/// Translation layout of one slice.
#[derive(Clone, Debug)]
enum Layout {
    /// A full coset `offset + stride·m` of the grid, `m ∈ ∏ ℤ/M_a`; `order[m]` is the
    /// position within the slice of the point with multi-index `m`.
    Lattice {
        folded: Vec<usize>,
        offset_x: Vec<f64>,
        order: Vec<usize>,
    },
    Direct,
}

#[derive(Clone, Debug)]
struct SlicePlan {
    h: GroupElement,
    indices: Vec<usize>,
    layout: Layout,
    v: Option<Vec<Complex64>>,
}

/// Entries of `ψ̂(hᵀξ)` cached across applications up to this many values.
const CACHE_BUDGET: usize = 1 << 22;
/// Slices per block in the fixed-order reduction.
const BLOCK: usize = 8;

/// A wavelet system restricted to a test space.
pub struct FrameSystem {
    space: TestSpace,
    psi: Arc<dyn FourierSource>,
    points: Vec<AffinePoint>,
    slices: Vec<SlicePlan>,
    owner: Vec<usize>,
    ffts: HashMap<Vec<usize>, FftNd>,
    exec: Execution,
}

impl std::fmt::Debug for FrameSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrameSystem")
            .field("points", &self.points.len())
            .field("slices", &self.slices.len())
            .field("test_space", &self.space.len())
            .finish()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn detect_lattice(grid: &GridSpec, xs: &[&[f64]]) -> Option<Layout> {
    let d = grid.dim();
    let mut idx: Vec<[usize; 3]> = Vec::with_capacity(xs.len());
    for x in xs {
        let mut n = [0usize; 3];
        for a in 0..d {
            let t = (x[a] - grid.origin[a]) / grid.spacing[a];
            let r = t.round();
            if (t - r).abs() > 1e-8 {
                return None;
            }
            n[a] = (r as i64).rem_euclid(grid.extents[a] as i64) as usize;
        }
        idx.push(n);
    }
    let mut stride = vec![0usize; d];
    let mut offset = vec![0usize; d];
    let mut folded = vec![0usize; d];
    for a in 0..d {
        let n0 = idx[0][a];
        let mut g = grid.extents[a];
        for n in &idx {
            g = gcd(g, (n[a] + grid.extents[a] - n0) % grid.extents[a]);
        }
        stride[a] = g;
        offset[a] = n0 % g;
        folded[a] = grid.extents[a] / g;
    }
    let total: usize = folded.iter().product();
    if total != xs.len() {
        return None;
    }
    let mut order = vec![usize::MAX; total];
    for (pos, n) in idx.iter().enumerate() {
        let mut flat = 0;
        for a in 0..d {
            flat = flat * folded[a] + (n[a] - offset[a]) / stride[a];
        }
        if order[flat] != usize::MAX {
            return None;
        }
        order[flat] = pos;
    }
    let offset_x = (0..d).map(|a| grid.origin[a] + offset[a] as f64 * grid.spacing[a]).collect();
    Some(Layout::Lattice { folded, offset_x, order })
}

impl FrameSystem {
    pub fn new(psi: Arc<dyn FourierSource>, set: &SamplingSet, space: TestSpace, exec: Execution) -> Result<Self> {
        check_dim(space.dim(), set.dim())?;
        check_dim(space.dim(), psi.dim())?;
        let points = set.points().to_vec();
        let mut ffts = HashMap::new();
        let mut slices: Vec<SlicePlan> = set
            .slices()
            .into_iter()
            .map(|s| {
                let xs: Vec<&[f64]> = s.indices.iter().map(|&i| points[i].x.as_slice()).collect();
                let layout = detect_lattice(space.grid(), &xs).unwrap_or(Layout::Direct);
                if let Layout::Lattice { folded, .. } = &layout {
                    ffts.entry(folded.clone()).or_insert_with(|| FftNd::new(folded));
                }
                SlicePlan {
                    h: s.h,
                    indices: s.indices,
                    layout,
                    v: None,
                }
            })
            .collect();
        let mut owner = vec![0; points.len()];
        for (j, s) in slices.iter().enumerate() {
            for &i in &s.indices {
                owner[i] = j;
            }
        }
        let mut sys = Self {
            space,
            psi,
            points,
            slices: Vec::new(),
            owner,
            ffts,
            exec,
        };
        if sys.space.len() * slices.len() <= CACHE_BUDGET {
            let vs = exec.map(&slices, |s| sys.spectrum(&s.h));
            for (s, v) in slices.iter_mut().zip(vs) {
                s.v = Some(v);
            }
        }
        sys.slices = slices;
        Ok(sys)
    }

    /// System for a tagged or untagged sampled atom.
    pub fn from_sampled(psi: &SampledFunction, set: &SamplingSet, space: TestSpace, exec: Execution) -> Result<Self> {
        Self::new(Arc::new(Spectrum::of(psi)), set, space, exec)
    }

    pub fn space(&self) -> &TestSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[AffinePoint] {
        &self.points
    }

    pub fn exec(&self) -> Execution {
        self.exec
    }

    /// `v_ξ = |det h|^{1/2} ψ̂(hᵀξ) / L^{d/2}` over `T`.
    fn spectrum(&self, h: &GroupElement) -> Vec<Complex64> {
        let d = self.space.dim();
        let scale = h.abs_det().sqrt() / self.space.volume().sqrt();
        self.space
            .xi
            .iter()
            .map(|xi| {
                let eta = h.dual_action(&xi[..d]);
                self.psi.fourier(&eta.as_slice()[..d]) * scale
            })
            .collect()
    }

    fn slice_v<'a>(&self, s: &'a SlicePlan) -> std::borrow::Cow<'a, [Complex64]> {
        match &s.v {
            Some(v) => std::borrow::Cow::Borrowed(v),
            None => std::borrow::Cow::Owned(self.spectrum(&s.h)),
        }
    }

    fn fold_index(&self, t: usize, folded: &[usize]) -> usize {
        let k = &self.space.ks[t];
        let mut flat = 0;
        for (a, m) in folded.iter().enumerate() {
            flat = flat * m + k[a].rem_euclid(*m as i64) as usize;
        }
        flat
    }

    /// Coefficients `⟨u, π(z)ψ⟩` for the points of one slice, in slice order.
    fn slice_analysis(&self, s: &SlicePlan, v: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
        let sp = &self.space;
        match &s.layout {
            Layout::Lattice { folded, offset_x, order } => {
                let tabs = sp.phase_tables(offset_x, 1.0);
                let mut buf = vec![Complex64::new(0.0, 0.0); order.len()];
                for t in 0..sp.len() {
                    if u[t] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    buf[self.fold_index(t, folded)] += u[t] * v[t].conj() * sp.table_product(&tabs, t);
                }
                self.ffts[folded].process(&mut buf, true);
                let mut out = vec![Complex64::new(0.0, 0.0); order.len()];
                for (m, &pos) in order.iter().enumerate() {
                    out[pos] = buf[m];
                }
                out
            }
            Layout::Direct => {
                let g: Vec<Complex64> = u.iter().zip(v).map(|(a, b)| a * b.conj()).collect();
                s.indices
                    .iter()
                    .map(|&i| {
                        let tabs = sp.phase_tables(&self.points[i].x, 1.0);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (t, gt) in g.iter().enumerate() {
                            acc += gt * sp.table_product(&tabs, t);
                        }
                        acc
                    })
                    .collect()
            }
        }
    }

    /// Adds `Σ_z c_z π(z)ψ` (projected onto `T`) for one slice to `acc`.
    fn slice_synthesis(&self, s: &SlicePlan, v: &[Complex64], c: &[Complex64], acc: &mut [Complex64]) {
        let sp = &self.space;
        match &s.layout {
            Layout::Lattice { folded, offset_x, order } => {
                let mut buf: Vec<Complex64> = order.iter().map(|&pos| c[pos]).collect();
                self.ffts[folded].process(&mut buf, false);
                let tabs = sp.phase_tables(offset_x, -1.0);
                for t in 0..sp.len() {
                    acc[t] += v[t] * sp.table_product(&tabs, t) * buf[self.fold_index(t, folded)];
                }
            }
            Layout::Direct => {
                let mut w = vec![Complex64::new(0.0, 0.0); sp.len()];
                for (pos, &i) in s.indices.iter().enumerate() {
                    if c[pos] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let tabs = sp.phase_tables(&self.points[i].x, -1.0);
                    for (t, wt) in w.iter_mut().enumerate() {
                        *wt += c[pos] * sp.table_product(&tabs, t);
                    }
                }
                for t in 0..sp.len() {
                    acc[t] += v[t] * w[t];
                }
            }
        }
    }

    /// Coordinates of the atom `π(z_i)ψ` on `T`.
    pub fn atom(&self, i: usize) -> Result<Vec<Complex64>> {
        if i >= self.points.len() {
            return Err(Error::Dimension {
                expected: self.points.len(),
                got: i + 1,
            });
        }
        let v = self.slice_v(&self.slices[self.owner[i]]);
        let tabs = self.space.phase_tables(&self.points[i].x, -1.0);
        Ok((0..self.space.len()).map(|t| v[t] * self.space.table_product(&tabs, t)).collect())
    }

    /// Analysis operator `u ↦ (⟨u, π(z_i)ψ⟩)_i` in sampling-set order.
    pub fn analyze(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.space.len(), u.len())?;
        let per_slice = self.exec.map(&self.slices, |s| {
            let v = self.slice_v(s);
            self.slice_analysis(s, &v, u)
        });
        let mut out = vec![Complex64::new(0.0, 0.0); self.points.len()];
        for (s, c) in self.slices.iter().zip(per_slice) {
            for (&i, ci) in s.indices.iter().zip(c) {
                out[i] = ci;
            }
        }
        Ok(out)
    }

    /// Synthesis operator `c ↦ P_T Σ_i c_i π(z_i)ψ`.
    pub fn synthesize(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.points.len(), c.len())?;
        Ok(self.reduce_blocks(|s, v, acc| {
            let cs: Vec<Complex64> = s.indices.iter().map(|&i| c[i]).collect();
            self.slice_synthesis(s, v, &cs, acc);
        }))
    }

    /// Frame operator `S = synthesis ∘ analysis` on `T`.
    pub fn apply(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.space.len(), u.len())?;
        Ok(self.reduce_blocks(|s, v, acc| {
            let cs = self.slice_analysis(s, v, u);
            self.slice_synthesis(s, v, &cs, acc);
        }))
    }

    /// Sums per-slice contributions over fixed blocks, then blocks in order.
    fn reduce_blocks<F>(&self, f: F) -> Vec<Complex64>
    where
        F: Fn(&SlicePlan, &[Complex64], &mut [Complex64]) + Sync + Send,
    {
        let n = self.space.len();
        let blocks = self.slices.len().div_ceil(BLOCK);
        let partial = self.exec.map_range(blocks, |b| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for s in &self.slices[b * BLOCK..((b + 1) * BLOCK).min(self.slices.len())] {
                let v = self.slice_v(s);
                f(s, &v, &mut acc);
            }
            acc
        });
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for p in partial {
            for (o, x) in out.iter_mut().zip(p) {
                *o += x;
            }
        }
        out
    }

    /// Dense Hermitian matrix of `S` on `T`, assembled from per-slice translation kernels
    /// `K(ν) = Σ_x e^{-2πi⟨ν, x⟩}` over differences of frequency indices.
    pub fn gram_matrix(&self) -> Result<DMatrix<Complex64>> {
        let sp = &self.space;
        let n = sp.len();
        let d = sp.dim();
        let ext: Vec<usize> = (0..d).map(|a| 2 * sp.span[a] - 1).collect();
        let kernel_len: usize = ext.iter().product();
        let periods = sp.grid.periods();
        let blocks = self.slices.len().div_ceil(BLOCK);
        let partial = self.exec.map_range(blocks, |b| {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for s in &self.slices[b * BLOCK..((b + 1) * BLOCK).min(self.slices.len())] {
                let v = self.slice_v(s);
                let mut kernel = vec![Complex64::new(0.0, 0.0); kernel_len];
                for &i in &s.indices {
                    let x = &self.points[i].x;
                    let tabs: Vec<Vec<Complex64>> = (0..d)
                        .map(|a| {
                            let half = sp.span[a] as i64 - 1;
                            (-half..=half)
                                .map(|nu| Complex64::from_polar(1.0, -2.0 * PI * nu as f64 * x[a] / periods[a]))
                                .collect()
                        })
                        .collect();
                    for (flat, kv) in kernel.iter_mut().enumerate() {
                        let mut rem = flat;
                        let mut z = Complex64::new(1.0, 0.0);
                        for a in (0..d).rev() {
                            z *= tabs[a][rem % ext[a]];
                            rem /= ext[a];
                        }
                        *kv += z;
                    }
                }
                for r in 0..n {
                    for c in 0..n {
                        let mut flat = 0;
                        for a in 0..d {
                            let nu = sp.ks[r][a] - sp.ks[c][a] + sp.span[a] as i64 - 1;
                            flat = flat * ext[a] + nu as usize;
                        }
                        m[(r, c)] += v[r] * v[c].conj() * kernel[flat];
                    }
                }
            }
            m
        });
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for p in partial {
            out += p;
        }
        Ok(out)
    }
}

/// Frame coefficients indexed by sampling-set entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientArray {
    pub values: Vec<Complex64>,
    /// Position of each value in the sampling set.
    pub index: Vec<usize>,
    /// Dilation index `j` (slice number) of each value.
    pub slice: Vec<usize>,
    /// `|det h_j|` of each value.
    pub abs_det: Vec<f64>,
    /// Scale parameter of `h_j` (the `r` of `rS` for similitudes).
    pub scale: Vec<f64>,
    /// Control weight `v(z_i) > 0` of each value.
    pub weights: Vec<f64>,
    /// Atoms whose support misses the signal window.
    pub truncated: Vec<bool>,
}

impl CoefficientArray {
    pub fn new(values: Vec<Complex64>, set: &SamplingSet) -> Result<Self> {
        check_dim(set.len(), values.len())?;
        let mut slice = vec![0; set.len()];
        for (j, s) in set.slices().iter().enumerate() {
            for &i in &s.indices {
                slice[i] = j;
            }
        }
        Ok(Self {
            index: (0..values.len()).collect(),
            abs_det: set.points().iter().map(|p| p.h.abs_det()).collect(),
            scale: set.points().iter().map(|p| p.h.scale().abs()).collect(),
            weights: vec![1.0; values.len()],
            truncated: vec![false; values.len()],
            slice,
            values,
        })
    }

    /// Arbitrary synthetic array from `(j, |det h_j|, scale_j, value)` rows.
    pub fn from_rows(rows: &[(usize, f64, f64, Complex64)]) -> Result<Self> {
        if rows.iter().any(|r| !(r.1 > 0.0) || !(r.2 > 0.0)) {
            return Err(Error::Domain("determinants and scales must be positive".into()));
        }
        Ok(Self {
            values: rows.iter().map(|r| r.3).collect(),
            index: (0..rows.len()).collect(),
            slice: rows.iter().map(|r| r.0).collect(),
            abs_det: rows.iter().map(|r| r.1).collect(),
            scale: rows.iter().map(|r| r.2).collect(),
            weights: vec![1.0; rows.len()],
            truncated: vec![false; rows.len()],
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Replaces the control weights; all must be positive.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        check_dim(self.len(), weights.len())?;
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Domain("weights must be positive".into()));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

/// Support radius of `ψ` (sup-norm), from its tag or its samples.
fn support_radius(psi: &SampledFunction) -> f64 {
    if let Some(tag) = &psi.tag {
        return tag.bump.radius;
    }
    match psi.support_box(0.0) {
        Some((lo, hi)) => (0..psi.dim())
            .flat_map(|a| {
                let p0 = psi.grid.origin[a] + lo[a] as f64 * psi.grid.spacing[a];
                let p1 = psi.grid.origin[a] + hi[a] as f64 * psi.grid.spacing[a];
                [p0.abs(), p1.abs()]
            })
            .fold(0.0, f64::max),
        None => 0.0,
    }
}

/// Coefficients `W_ψ f(z_i) = ⟨f, π(z_i)ψ⟩` on the torus of `f`'s grid.
pub fn analysis(f: &SampledFunction, psi: &SampledFunction, set: &SamplingSet) -> Result<CoefficientArray> {
    let space = TestSpace::full(f.grid.clone());
    let sys = FrameSystem::from_sampled(psi, set, space, Execution::default())?;
    let u = sys.space().coordinates(f)?;
    let mut c = CoefficientArray::new(sys.analyze(&u)?, set)?;
    let radius = support_radius(psi);
    let g = &f.grid;
    for (i, p) in set.points().iter().enumerate() {
        let reach = radius * p.h.opnorm() * (p.x.len() as f64).sqrt();
        let outside = (0..g.dim()).any(|a| {
            let lo = g.origin[a];
            let hi = lo + g.periods()[a];
            p.x[a] + reach < lo || p.x[a] - reach > hi
        });
        c.truncated[i] = outside;
    }
    Ok(c)
}

/// `Σ_i c_i π(z_i)ψ` sampled on `grid` (periodized and band-limited to the grid).
pub fn synthesis(c: &CoefficientArray, psi: &SampledFunction, set: &SamplingSet, grid: &GridSpec) -> Result<SampledFunction> {
    let mut values = vec![Complex64::new(0.0, 0.0); set.len()];
    for (v, &i) in c.values.iter().zip(&c.index) {
        if i >= set.len() {
            return Err(Error::Dimension {
                expected: set.len(),
                got: i + 1,
            });
        }
        values[i] += v;
    }
    let space = TestSpace::full(grid.clone());
    let sys = FrameSystem::from_sampled(psi, set, space, Execution::default())?;
    let u = sys.synthesize(&values)?;
    sys.space().signal(&u)
}

/// Shannon-type control wavelet with `ψ̂ = 1` on `[1/2, 1) ∪ [-1, -1/2)` (d = 1).
///
/// With dyadic scales `2^j` and translations `2^j ℤ` it is an orthonormal basis.
#[derive(Clone, Copy, Debug, Default)]
pub struct ShannonControl;

impl FourierSource for ShannonControl {
    fn dim(&self) -> usize {
        1
    }

    fn fourier(&self, xi: &[f64]) -> Complex64 {
        if (0.5..1.0).contains(&xi[0]) || (-1.0..-0.5).contains(&xi[0]) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}
