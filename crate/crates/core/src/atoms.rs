//! Wavelets with vanishing moments on the orbit complement, built by
//! differentiating bumps, and numerical checks of their moments and decay.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bump::DiffOperator;
use crate::error::{Error, Result};
use crate::fourier::{FourierSource, Spectrum};
use crate::grid::{fft_nd, GridSpec, SampledFunction};
use crate::groups::Family;
use crate::orbit::{Complement, OrbitGeometry};
use crate::par::Execution;

/// Annihilating operator used for similitude groups.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilitudeOperator {
    /// `Δ^{⌈t/2⌉}`.
    #[default]
    Laplacian,
    /// `(∂₁⋯∂_d)^t`.
    MixedProduct,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    /// Closed form when the input is tagged, finite differences otherwise.
    #[default]
    Auto,
    ClosedForm,
    /// Fourier multiplier on a zero-padded grid.
    Spectral,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomOptions {
    pub similitude_operator: SimilitudeOperator,
    pub method: DerivativeMethod,
    pub pad_factor: usize,
    pub fd_accuracy: usize,
    /// Largest admissible ratio of the spectrum beyond Nyquist to its peak.
    pub alias_tol: f64,
}

impl Default for AtomOptions {
    fn default() -> Self {
        Self {
            similitude_operator: SimilitudeOperator::Laplacian,
            method: DerivativeMethod::Auto,
            pad_factor: 4,
            fd_accuracy: 8,
            alias_tol: 1e-3,
        }
    }
}

/// The family's annihilating operator of order `t`.
pub fn atom_operator(geom: &OrbitGeometry, t: u32, choice: SimilitudeOperator) -> DiffOperator {
    let d = geom.dim();
    if t == 0 {
        return DiffOperator::identity();
    }
    match geom.spec.family {
        Family::Similitude => match choice {
            SimilitudeOperator::Laplacian => DiffOperator::laplacian_power(d, t.div_ceil(2)),
            SimilitudeOperator::MixedProduct => DiffOperator::mixed_power(d, t),
        },
        Family::Diagonal => DiffOperator::mixed_power(d, t),
        Family::Shearlet => DiffOperator::partial([t, 0, 0]),
    }
}

/// `ψ = D ρ` with the family's operator of order `t` and default options.
pub fn build_atom(rho: &SampledFunction, geom: &OrbitGeometry, t: u32) -> Result<SampledFunction> {
    build_atom_with(rho, geom, t, &AtomOptions::default())
}

pub fn build_atom_with(rho: &SampledFunction, geom: &OrbitGeometry, t: u32, opts: &AtomOptions) -> Result<SampledFunction> {
    if rho.dim() != geom.dim() {
        return Err(Error::Dimension {
            expected: geom.dim(),
            got: rho.dim(),
        });
    }
    let op = atom_operator(geom, t, opts.similitude_operator);
    if let Some(form) = &rho.tag {
        if let Some(smooth) = form.bump.smoothness() {
            let need = op.max_axis_order() + form.operator.max_axis_order();
            if need > smooth {
                return Err(Error::Resolution(format!(
                    "a spline bump of smoothness C^{smooth} cannot carry {need} derivatives per axis"
                )));
            }
        }
    }
    check_aliasing(rho, &op, opts.alias_tol)?;
    let method = match opts.method {
        DerivativeMethod::Auto if rho.tag.is_some() => DerivativeMethod::ClosedForm,
        DerivativeMethod::Auto => DerivativeMethod::FiniteDifference,
        m => m,
    };
    match method {
        DerivativeMethod::ClosedForm => {
            let form = rho
                .tag
                .as_ref()
                .ok_or_else(|| Error::Contract("closed-form differentiation needs a tagged bump".into()))?;
            form.with_operator(&op).sample(&rho.grid)
        }
        DerivativeMethod::Spectral => Ok(spectral_apply(rho, &op, opts.pad_factor)),
        DerivativeMethod::FiniteDifference => Ok(fd_apply(rho, &op, opts.fd_accuracy)),
        DerivativeMethod::Auto => unreachable!(),
    }
}

fn nyquist(grid: &GridSpec) -> Vec<f64> {
    grid.spacing.iter().map(|h| 0.5 / h).collect()
}

fn check_aliasing(rho: &SampledFunction, op: &DiffOperator, tol: f64) -> Result<()> {
    let spec = Spectrum::of(rho);
    let d = rho.dim();
    let nyq = nyquist(&rho.grid);
    let per_axis: usize = match d {
        1 => 257,
        2 => 41,
        _ => 13,
    };
    let tagged = rho.tag.is_some();
    let reach = if tagged { 2.0 } else { 1.0 };
    let mut peak: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let total = per_axis.pow(d as u32);
    for i in 0..total {
        let mut rem = i;
        let mut xi = [0.0; 3];
        let mut outer = false;
        for a in 0..d {
            let u = (rem % per_axis) as f64 / (per_axis - 1) as f64;
            rem /= per_axis;
            xi[a] = (2.0 * u - 1.0) * reach * nyq[a];
            let limit = if tagged { 1.0 } else { 0.75 };
            outer |= xi[a].abs() >= limit * nyq[a] - 1e-12;
        }
        let v = (op.symbol(&xi[..d]) * spec.fourier(&xi[..d])).norm();
        if outer {
            tail = tail.max(v);
        } else {
            peak = peak.max(v);
        }
    }
    if peak > 0.0 && tail > tol * peak {
        return Err(Error::Resolution(format!(
            "spectrum near Nyquist is {:.2e} of its peak (limit {tol:.0e}); refine the grid",
            tail / peak
        )));
    }
    Ok(())
}

fn spectral_apply(rho: &SampledFunction, op: &DiffOperator, pad: usize) -> SampledFunction {
    let big = rho.grid.padded(pad.max(1));
    let mut f = rho.embed(&big).expect("padded grid contains the original");
    let d = big.dim();
    fft_nd(&mut f.samples, &big.extents, false);
    let odd: Vec<bool> = (0..d).map(|a| op.terms.iter().any(|(_, alpha)| alpha[a] % 2 == 1)).collect();
    for (k, z) in f.samples.iter_mut().enumerate() {
        let idx = big.unravel(k);
        let mut xi = big.frequency(k);
        for a in 0..d {
            if odd[a] && big.extents[a].is_multiple_of(2) && idx[a] == big.extents[a] / 2 {
                xi[a] = 0.0;
            }
        }
        *z *= op.symbol(&xi[..d]);
    }
    fft_nd(&mut f.samples, &big.extents, true);
    let n = big.len() as f64;
    f.samples.iter_mut().for_each(|z| *z /= n);
    let mut out = f.crop(&rho.grid).expect("aligned crop");
    out.tag = None;
    out
}

/// Fornberg weights for the `m`-th derivative at 0 on integer offsets `-p..=p`.
pub fn fd_weights(m: usize, p: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (-(p as i64)..=p as i64).map(|x| x as f64).collect();
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

fn fd_axis(data: &[Complex64], grid: &GridSpec, axis: usize, m: u32, acc: usize) -> Vec<Complex64> {
    if m == 0 {
        return data.to_vec();
    }
    let m = m as usize;
    let p = m.div_ceil(2) - 1 + acc.div_ceil(2);
    let w = fd_weights(m, p);
    let scale = grid.spacing[axis].powi(m as i32);
    let n = grid.extents[axis];
    let stride: usize = grid.extents[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let i = (flat / stride) % n;
        let mut s = Complex64::new(0.0, 0.0);
        for (k, wk) in w.iter().enumerate() {
            let j = i as i64 + k as i64 - p as i64;
            if j >= 0 && (j as usize) < n {
                s += data[(flat as i64 + (j - i as i64) * stride as i64) as usize] * wk;
            }
        }
        *o = s / scale;
    }
    out
}

fn fd_apply(rho: &SampledFunction, op: &DiffOperator, acc: usize) -> SampledFunction {
    let d = rho.dim();
    let mut total = vec![Complex64::new(0.0, 0.0); rho.samples.len()];
    for (c, alpha) in &op.terms {
        let mut cur = rho.samples.clone();
        for a in 0..d {
            cur = fd_axis(&cur, &rho.grid, a, alpha[a], acc);
        }
        for (t, v) in total.iter_mut().zip(cur) {
            *t += v * c;
        }
    }
    SampledFunction {
        grid: rho.grid.clone(),
        samples: total,
        tag: None,
    }
}

/// Multi-indices `α` with `|α| < t` in `d` variables, by increasing order.
pub fn multi_indices(d: usize, t: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for order in 0..t {
        let mut alpha = [0u32; 3];
        fn rec(d: usize, axis: usize, left: u32, alpha: &mut [u32; 3], out: &mut Vec<[u32; 3]>) {
            if axis + 1 == d {
                alpha[axis] = left;
                out.push(*alpha);
                alpha[axis] = 0;
                return;
            }
            for b in (0..=left).rev() {
                alpha[axis] = b;
                rec(d, axis + 1, left - b, alpha, out);
            }
            alpha[axis] = 0;
        }
        rec(d, 0, order, &mut alpha, &mut out);
    }
    out
}

/// Evaluates `∂^α ψ̂(ξ) = ∫ (-2πi x)^α ψ(x) e^{-2πi⟨ξ,x⟩} dx` by direct summation.
pub fn fourier_derivatives(psi: &SampledFunction, points: &[[f64; 3]], alphas: &[[u32; 3]], exec: Execution) -> Vec<Vec<Complex64>> {
    let d = psi.dim();
    let vol = psi.grid.cell_volume();
    let support: Vec<([f64; 3], Complex64)> = psi
        .samples
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(i, z)| (psi.grid.point(i), *z * vol))
        .collect();
    let factors: Vec<Complex64> = alphas.iter().map(|a| Complex64::new(0.0, -2.0 * PI).powu(a.iter().sum())).collect();
    exec.map(points, |xi| {
        let mut acc = vec![Complex64::new(0.0, 0.0); alphas.len()];
        for (x, z) in &support {
            let ph: f64 = (0..d).map(|a| xi[a] * x[a]).sum();
            let w = z * Complex64::from_polar(1.0, -2.0 * PI * ph);
            for (k, alpha) in alphas.iter().enumerate() {
                let mut m = 1.0;
                for a in 0..d {
                    m *= x[a].powi(alpha[a] as i32);
                }
                acc[k] += w * m;
            }
        }
        acc.iter().zip(&factors).map(|(a, f)| a * f).collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentOptions {
    /// Lattice points per free direction of the complement.
    pub points_per_direction: usize,
    /// Largest `|ξ|` coordinate on the complement lattice.
    pub max_frequency: f64,
    /// Also estimate `|ψ̂|_{t,t}`.
    pub with_schwartz: bool,
}

impl MomentOptions {
    pub fn for_dim(d: usize) -> Self {
        Self {
            points_per_direction: if d == 3 { 8 } else { 64 },
            max_frequency: 1e3,
            with_schwartz: true,
        }
    }
}

/// Outcome of a vanishing-moment check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub order_checked: u32,
    /// `sup |∂^α ψ̂|` over the complement lattice and `|α| < t`.
    pub max_residual_on_complement: f64,
    /// Residual divided by `‖ψ‖₁`.
    pub relative_residual: f64,
    /// `max_α |∂^α ψ̂| / ∫ |(2πx)^α ψ(x)| dx`, invariant under dilating `ψ`.
    pub scaled_residual: f64,
    pub l1_norm: f64,
    /// Worst residual per derivative order `|α|`.
    pub residual_by_order: Vec<f64>,
    pub test_points: usize,
    pub schwartz_norm_estimate: Option<f64>,
}

impl MomentReport {
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.relative_residual <= rel_tol
    }

    /// Like [`passes`](Self::passes) but against the scale-invariant residual.
    pub fn passes_scaled(&self, rel_tol: f64) -> bool {
        self.scaled_residual <= rel_tol
    }
}

/// Default relative moment tolerance.
pub const MOMENT_TOL: f64 = 1e-8;

/// Signed geometric magnitudes `±g_k`, `g_k ∈ [1e-2, max]`, `n` values in total.
fn geometric_line(n: usize, max: f64) -> Vec<f64> {
    let half = (n / 2).max(1);
    let lo: f64 = 1e-2;
    let ratio = if half > 1 { (max / lo).powf(1.0 / (half - 1) as f64) } else { 1.0 };
    let mut v = Vec::with_capacity(2 * half);
    for k in 0..half {
        let g = lo * ratio.powi(k as i32);
        v.push(g);
        v.push(-g);
    }
    v
}

/// Test lattice on the complement of the orbit.
pub fn complement_lattice(geom: &OrbitGeometry, opts: &MomentOptions) -> Vec<[f64; 3]> {
    let d = geom.dim();
    let line = geometric_line(opts.points_per_direction, opts.max_frequency);
    let mut pts = vec![[0.0; 3]];
    match geom.complement {
        Complement::Origin => {}
        Complement::AxisXi1Zero => {
            for &v in &line {
                pts.push([0.0, v, 0.0]);
            }
        }
        Complement::CoordinateHyperplanes => {
            for zero in 0..d {
                let free: Vec<usize> = (0..d).filter(|&a| a != zero).collect();
                let mut lists: Vec<Vec<f64>> = free
                    .iter()
                    .map(|_| std::iter::once(0.0).chain(line.iter().copied()).collect())
                    .collect();
                if free.is_empty() {
                    lists.clear();
                }
                let count: usize = lists.iter().map(|l| l.len()).product();
                for mut i in 0..count {
                    let mut p = [0.0; 3];
                    for (l, &a) in lists.iter().zip(&free) {
                        p[a] = l[i % l.len()];
                        i /= l.len();
                    }
                    if p.iter().any(|x| *x != 0.0) {
                        pts.push(p);
                    }
                }
            }
        }
    }
    pts
}

/// Checks `∂^α ψ̂ = 0` on the complement for `|α| < t` with default options.
pub fn check_moments(psi: &SampledFunction, geom: &OrbitGeometry, t: u32) -> Result<MomentReport> {
    check_moments_with(psi, geom, t, &MomentOptions::for_dim(geom.dim()), Execution::default())
}

pub fn check_moments_with(
    psi: &SampledFunction,
    geom: &OrbitGeometry,
    t: u32,
    opts: &MomentOptions,
    exec: Execution,
) -> Result<MomentReport> {
    if psi.dim() != geom.dim() {
        return Err(Error::Dimension {
            expected: geom.dim(),
            got: psi.dim(),
        });
    }
    let d = psi.dim();
    let points = complement_lattice(geom, opts);
    let alphas = multi_indices(d, t);
    let values = fourier_derivatives(psi, &points, &alphas, exec);
    let scales = moment_scales(psi, &alphas);
    let mut by_order = vec![0.0f64; t as usize];
    let mut scaled: f64 = 0.0;
    for row in &values {
        for ((alpha, v), s) in alphas.iter().zip(row).zip(&scales) {
            let o = alpha.iter().sum::<u32>() as usize;
            by_order[o] = by_order[o].max(v.norm());
            if *s > 0.0 {
                scaled = scaled.max(v.norm() / s);
            }
        }
    }
    let max = by_order.iter().copied().fold(0.0, f64::max);
    let l1 = psi.l1_norm();
    let schwartz = if opts.with_schwartz {
        Some(schwartz_norm_estimate_with(psi, t, t as f64, &FrequencyLattice::default_for(psi), exec)?.value)
    } else {
        None
    };
    Ok(MomentReport {
        order_checked: t,
        max_residual_on_complement: max,
        relative_residual: if l1 > 0.0 { max / l1 } else { 0.0 },
        scaled_residual: scaled,
        l1_norm: l1,
        residual_by_order: by_order,
        test_points: points.len(),
        schwartz_norm_estimate: schwartz,
    })
}

/// `∫ |(2πx)^α ψ(x)| dx` for each multi-index.
fn moment_scales(psi: &SampledFunction, alphas: &[[u32; 3]]) -> Vec<f64> {
    let d = psi.dim();
    let vol = psi.grid.cell_volume();
    alphas
        .iter()
        .map(|alpha| {
            let sum: f64 = psi
                .samples
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm() > 0.0)
                .map(|(i, z)| {
                    let x = psi.grid.point(i);
                    (0..d).map(|a| (2.0 * PI * x[a]).abs().powi(alpha[a] as i32)).product::<f64>() * z.norm()
                })
                .sum();
            sum * vol
        })
        .collect()
}

/// Uniform frequency lattice `[-extent, extent]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLattice {
    pub extent: f64,
    pub points_per_axis: usize,
}

impl FrequencyLattice {
    /// Up to the Nyquist frequency of the grid.
    pub fn default_for(psi: &SampledFunction) -> Self {
        let extent = nyquist(&psi.grid).into_iter().fold(f64::INFINITY, f64::min);
        let points_per_axis = match psi.dim() {
            1 => 257,
            2 => 33,
            _ => 9,
        };
        Self { extent, points_per_axis }
    }

    pub fn refined(&self) -> Self {
        Self {
            extent: self.extent,
            points_per_axis: 2 * self.points_per_axis - 1,
        }
    }

    pub fn points(&self, d: usize) -> Vec<[f64; 3]> {
        let n = self.points_per_axis.max(2);
        let total = n.pow(d as u32);
        (0..total)
            .map(|mut i| {
                let mut p = [0.0; 3];
                for c in p.iter_mut().take(d) {
                    *c = (2.0 * (i % n) as f64 / (n - 1) as f64 - 1.0) * self.extent;
                    i /= n;
                }
                p
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwartzEstimate {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub lattice: FrequencyLattice,
}

/// Lower estimate of `|ψ̂|_{r,m} = sup_{ξ, |α| ≤ r} (1+|ξ|)^m |∂^α ψ̂(ξ)|`.
pub fn schwartz_norm_estimate(psi: &SampledFunction, r: u32, m: f64) -> Result<SchwartzEstimate> {
    schwartz_norm_estimate_with(psi, r, m, &FrequencyLattice::default_for(psi), Execution::default())
}

pub fn schwartz_norm_estimate_with(
    psi: &SampledFunction,
    r: u32,
    m: f64,
    lattice: &FrequencyLattice,
    exec: Execution,
) -> Result<SchwartzEstimate> {
    if !(m >= 0.0 && m.is_finite()) || lattice.points_per_axis < 2 || !(lattice.extent > 0.0) {
        return Err(Error::Domain("Schwartz norm needs m >= 0 and a nondegenerate lattice".into()));
    }
    let d = psi.dim();
    let points = lattice.points(d);
    let alphas = multi_indices(d, r + 1);
    let values = fourier_derivatives(psi, &points, &alphas, exec);
    let mut best = 0.0;
    let mut arg = vec![0.0; d];
    for (p, row) in points.iter().zip(&values) {
        let n: f64 = p[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
        let w = (1.0 + n).powf(m);
        for v in row {
            let val = w * v.norm();
            if val > best {
                best = val;
                arg = p[..d].to_vec();
            }
        }
    }
    Ok(SchwartzEstimate {
        value: best,
        argmax: arg,
        lattice: *lattice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::{build_bump, BumpKind};
    use crate::groups::DilationGroupSpec;

    fn rho(d: usize) -> SampledFunction {
        let grid = GridSpec::centered(d, 64, 1.0 / 16.0).unwrap();
        build_bump(BumpKind::default(), 1.0, &grid).unwrap()
    }

    fn geom(spec: DilationGroupSpec) -> OrbitGeometry {
        OrbitGeometry::new(spec).unwrap()
    }

    #[test]
    fn fornberg_matches_known_stencils() {
        let w = fd_weights(1, 1);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let w = fd_weights(2, 2);
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 4).len(), 4);
        assert_eq!(multi_indices(2, 3).len(), 6);
        assert_eq!(multi_indices(3, 2).len(), 4);
    }

    #[test]
    fn first_derivative_has_zero_mean() {
        let g = geom(DilationGroupSpec::similitude(1));
        let psi = build_atom_with(
            &rho(1),
            &g,
            1,
            &AtomOptions {
                similitude_operator: SimilitudeOperator::MixedProduct,
                ..AtomOptions::default()
            },
        )
        .unwrap();
        assert!(psi.integral().norm() < 1e-14);
    }

    #[test]
    fn undifferentiated_bump_fails_at_order_one() {
        let g = geom(DilationGroupSpec::similitude(1));
        let r = check_moments(&rho(1), &g, 1).unwrap();
        assert!((r.max_residual_on_complement - 1.0).abs() < 1e-12);
        assert!(!r.passes(MOMENT_TOL));
    }

    #[test]
    fn moments_vanish_per_family() {
        for spec in [
            DilationGroupSpec::similitude(2),
            DilationGroupSpec::diagonal(2),
            DilationGroupSpec::shearlet(0.5),
        ] {
            let g = geom(spec);
            for t in [2, 5] {
                let psi = build_atom(&rho(2), &g, t).unwrap();
                let r = check_moments(&psi, &g, t).unwrap();
                assert!(r.passes(MOMENT_TOL), "{spec:?} t={t}: {}", r.relative_residual);
                assert!(r.schwartz_norm_estimate.unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn odd_function_has_vanishing_mean_on_axis() {
        let g = geom(DilationGroupSpec::shearlet(0.5));
        let psi = build_atom(&rho(2), &g, 1).unwrap();
        let r = check_moments(&psi, &g, 1).unwrap();
        assert!(r.max_residual_on_complement < 1e-14);
    }

    #[test]
    fn derivative_methods_agree() {
        let g = geom(DilationGroupSpec::similitude(1));
        let r = rho(1);
        let opts = |method| AtomOptions {
            method,
            ..AtomOptions::default()
        };
        let exact = build_atom_with(&r, &g, 4, &opts(DerivativeMethod::ClosedForm)).unwrap();
        let peak = exact.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (m, tol) in [(DerivativeMethod::Spectral, 1e-4), (DerivativeMethod::FiniteDifference, 1e-2)] {
            let approx = build_atom_with(&r, &g, 4, &opts(m)).unwrap();
            let err = exact
                .samples
                .iter()
                .zip(&approx.samples)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < tol * peak, "{m:?}: {err} vs peak {peak}");
        }
    }

    #[test]
    fn spline_smoothness_limits_order() {
        let g = geom(DilationGroupSpec::shearlet(0.5));
        assert!(matches!(build_atom(&rho(2), &g, 15), Err(Error::Resolution(_))));
    }

    #[test]
    fn shearlet_symbol_factorizes() {
        let g = geom(DilationGroupSpec::shearlet(0.5));
        let r = rho(2);
        let psi = build_atom(&r, &g, 3).unwrap();
        let (ps, rs) = (Spectrum::sampled(&psi), Spectrum::sampled(&r));
        for xi in [[0.4, 1.0], [-1.3, 0.2], [2.0, -3.0]] {
            let lhs = ps.fourier(&xi) / Complex64::new(0.0, 2.0 * PI * xi[0]).powu(3);
            let rhs = rs.fourier(&xi);
            assert!((lhs - rhs).norm() < 1e-8 * rhs.norm().max(1e-300), "{xi:?}");
        }
    }

    #[test]
    fn schwartz_norm_of_nonnegative_bump_is_its_mass() {
        let r = rho(1);
        let s = schwartz_norm_estimate(&r, 0, 0.0).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert_eq!(s.argmax, vec![0.0]);
    }
}
