//! The continuous wavelet transform `W_ψ f(x,h) = ⟨f, π(x,h)ψ⟩` on
//! translation grids, decay checks for `W_ψ ψ`, and numerical inversion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::atoms::{schwartz_norm_estimate, MomentReport, MOMENT_TOL};
use crate::error::{Error, Result};
use crate::fourier::{FourierSource, Spectrum};
use crate::grid::{fft_nd, GridSpec, SampledFunction};
use crate::groups::{DilationGroupSpec, Family, GroupElement};
use crate::orbit::OrbitGeometry;
use crate::par::Execution;
use crate::phi::{phi_bound_shearlet, phi_ell, shearlet_min_order};
use crate::quadrature::QuadratureConfig;

/// Default zero-padding factor for slice transforms.
pub const PAD_FACTOR: usize = 4;

/// `x ↦ W_ψ f(x, h)` on `f`'s grid.
pub fn analyze_slice(f: &SampledFunction, psi: &SampledFunction, h: &GroupElement) -> Result<SampledFunction> {
    analyze_slice_with(f, &Spectrum::of(psi), h, PAD_FACTOR)
}

/// `W_ψ f(·, h)` with a precomputed spectrum of `ψ`.
pub fn analyze_slice_with(f: &SampledFunction, psi: &dyn FourierSource, h: &GroupElement, pad: usize) -> Result<SampledFunction> {
    let full = analyze_slice_padded(f, psi, h, pad)?;
    full.crop(&f.grid)
}

/// `W_ψ f(·, h)` on the padded periodic grid.
pub fn analyze_slice_padded(f: &SampledFunction, psi: &dyn FourierSource, h: &GroupElement, pad: usize) -> Result<SampledFunction> {
    if psi.dim() != f.dim() || h.dim() != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: psi.dim().max(h.dim()),
        });
    }
    let big = f.grid.padded(pad.max(1));
    let mut g = f.embed(&big)?;
    g.tag = None;
    fft_nd(&mut g.samples, &big.extents, false);
    apply_slice_multiplier(&mut g.samples, &big, psi, h, false);
    fft_nd(&mut g.samples, &big.extents, true);
    let n = big.len() as f64;
    g.samples.iter_mut().for_each(|z| *z /= n);
    Ok(g)
}

/// Multiplies spectrum bins by `|det h|^{1/2} conj(ψ̂(hᵀξ))` (or by `ψ̂(hᵀξ)` for synthesis).
fn apply_slice_multiplier(data: &mut [Complex64], grid: &GridSpec, psi: &dyn FourierSource, h: &GroupElement, synth: bool) {
    let d = grid.dim();
    let s = h.abs_det().sqrt();
    for (k, z) in data.iter_mut().enumerate() {
        let xi = grid.frequency(k);
        let hx = h.dual_action(&xi[..d]);
        let v = psi.fourier(&hx.as_slice()[..d]) * s;
        *z *= if synth { v } else { v.conj() };
    }
}

/// `W_ψ f(·, h)` from continuous spectra, sampled on `grid` (which must cover its support).
pub fn analyze_slice_spectral(
    fhat: &dyn FourierSource,
    psi: &dyn FourierSource,
    h: &GroupElement,
    grid: &GridSpec,
) -> Result<SampledFunction> {
    let d = grid.dim();
    if fhat.dim() != d || psi.dim() != d || h.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            got: fhat.dim(),
        });
    }
    let s = h.abs_det().sqrt();
    let mut data: Vec<Complex64> = (0..grid.len())
        .map(|k| {
            let xi = grid.frequency(k);
            let hx = h.dual_action(&xi[..d]);
            let ph: f64 = (0..d).map(|a| xi[a] * grid.origin[a]).sum();
            fhat.fourier(&xi[..d]) * psi.fourier(&hx.as_slice()[..d]).conj() * s * Complex64::from_polar(1.0, 2.0 * PI * ph)
        })
        .collect();
    fft_nd(&mut data, &grid.extents, true);
    let vol: f64 = grid.periods().iter().product();
    data.iter_mut().for_each(|z| *z /= vol);
    SampledFunction::new(grid.clone(), data)
}

/// Direct space-domain evaluation of `⟨f, π(x,h)ψ⟩` for a closed-form `ψ` (reference oracle).
pub fn coefficient_direct(f: &SampledFunction, psi: &crate::bump::ClosedForm, x: &[f64], h: &GroupElement) -> Complex64 {
    let d = f.dim();
    let s = h.abs_det().powf(-0.5);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, z) in f.samples.iter().enumerate() {
        let y = f.grid.point(i);
        let mut diff = [0.0; 3];
        for a in 0..d {
            diff[a] = y[a] - x[a];
        }
        let u = h.apply_inverse(&diff[..d]);
        acc += z * psi.value(&u.as_slice()[..d]) * s;
    }
    acc * f.grid.cell_volume()
}

/// Envelope used by [`decay_envelope_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayEnvelope {
    /// `Φ_{r-m}(h)` by quadrature.
    Phi { quad: QuadratureConfig },
    /// The shearlet bound `(|a|+|a|^{-1})^{-r₁}(1+|b|)^{-r₂}` in place of `Φ_{r-m}`.
    Shearlet { r1: u32, r2: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    pub envelope: DecayEnvelope,
    /// Translation grid on which `W_ψψ(·, h)` is evaluated; must cover its support.
    pub x_grid: GridSpec,
    /// Overrides the estimate of `|ψ̂|_{r,r}`.
    pub schwartz_norm: Option<f64>,
    pub exec: Execution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub c_star: f64,
    pub argsup_x: Vec<f64>,
    pub argsup_h: Vec<f64>,
    pub schwartz_norm: f64,
    /// `(h params, sup_x ratio)` per dilation.
    pub per_h: Vec<(Vec<f64>, f64)>,
    pub points_tested: usize,
}

/// Fits `C* = sup |W_ψψ(x,h)| / RHS(x,h)` for the decay estimate
/// `|W_ψψ(x,h)| ≤ C |ψ̂|²_{r,r} (1+|x|)^{-m} |det h|^{1/2} (1+‖h‖)^m Φ_{r-m}(h)`.
pub fn decay_envelope_check(
    psi: &SampledFunction,
    moments: &MomentReport,
    geom: &OrbitGeometry,
    h_grid: &[GroupElement],
    r: u32,
    m: u32,
    opts: &DecayOptions,
) -> Result<DecayReport> {
    if moments.order_checked < r || !(moments.passes(MOMENT_TOL) || moments.passes_scaled(MOMENT_TOL)) {
        return Err(Error::Contract(format!(
            "decay check needs verified moments of order {r}; report covers order {} with relative residual {:.2e} (scaled {:.2e})",
            moments.order_checked, moments.relative_residual, moments.scaled_residual
        )));
    }
    if !(0 < m && m < r) {
        return Err(Error::Domain(format!("need 0 < m < r, got m={m}, r={r}")));
    }
    if h_grid.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = geom.dim();
    if let DecayEnvelope::Shearlet { r1, r2 } = opts.envelope {
        if geom.spec.family != Family::Shearlet {
            return Err(Error::InvalidSpec("shearlet envelope needs a shearlet group".into()));
        }
        let need = shearlet_min_order(geom.spec.c(), r1, r2);
        if r - m < need {
            return Err(Error::Condition(format!("r - m = {} is below the required order {need}", r - m)));
        }
    }
    let schwartz = match opts.schwartz_norm {
        Some(v) => v,
        None => schwartz_norm_estimate(psi, r, r as f64)?.value,
    };
    let spec = Spectrum::of(psi);
    let results: Vec<Result<(f64, Vec<f64>, usize)>> = opts.exec.map(h_grid, |h| {
        let envelope = match opts.envelope {
            DecayEnvelope::Phi { quad } => phi_ell(h, r - m, &quad)?.value,
            DecayEnvelope::Shearlet { r1, r2 } => phi_bound_shearlet(h, r - m, r1, r2)?,
        };
        let w = analyze_slice_spectral(&spec, &spec, h, &opts.x_grid)?;
        let pre = schwartz * schwartz * h.abs_det().sqrt() * (1.0 + h.opnorm()).powi(m as i32) * envelope;
        let mut best = 0.0;
        let mut arg = vec![0.0; d];
        for (i, z) in w.samples.iter().enumerate() {
            let x = w.grid.point(i);
            let nx: f64 = x[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
            let ratio = z.norm() / (pre * (1.0 + nx).powi(-(m as i32)));
            if ratio > best {
                best = ratio;
                arg = x[..d].to_vec();
            }
        }
        Ok((best, arg, w.samples.len()))
    });
    let mut report = DecayReport {
        c_star: 0.0,
        argsup_x: vec![0.0; d],
        argsup_h: h_grid[0].params().to_vec(),
        schwartz_norm: schwartz,
        per_h: Vec::with_capacity(h_grid.len()),
        points_tested: 0,
    };
    for (h, res) in h_grid.iter().zip(results) {
        let (best, arg, n) = res?;
        report.points_tested += n;
        report.per_h.push((h.params().to_vec(), best));
        if best > report.c_star {
            report.c_star = best;
            report.argsup_x = arg;
            report.argsup_h = h.params().to_vec();
        }
    }
    Ok(report)
}

/// A node of a quadrature rule on `H` with its Haar weight.
#[derive(Clone, Debug, PartialEq)]
pub struct HNode {
    pub h: GroupElement,
    pub weight: f64,
}

/// Log-uniform scales `r ∈ [r_min, r_max]` (optionally both signs) for `d = 1`, weighted by `dr/|r|`.
pub fn similitude_quadrature_1d(r_min: f64, r_max: f64, per_octave: usize, both_signs: bool) -> Result<Vec<HNode>> {
    if !(0.0 < r_min && r_min < r_max) || per_octave == 0 {
        return Err(Error::Domain("need 0 < r_min < r_max and per_octave > 0".into()));
    }
    let du = std::f64::consts::LN_2 / per_octave as f64;
    let n = ((r_max / r_min).ln() / du).round() as usize;
    let spec = DilationGroupSpec::similitude(1);
    let mut nodes = Vec::new();
    for k in 0..=n {
        let r = r_min * (k as f64 * du).exp();
        let w = if k == 0 || k == n { 0.5 * du } else { du };
        for sign in if both_signs { vec![1.0, -1.0] } else { vec![1.0] } {
            nodes.push(HNode {
                h: GroupElement::new(spec, &[sign * r])?,
                weight: w,
            });
        }
    }
    Ok(nodes)
}

/// Shearlet nodes: log-uniform `a ∈ ±[a_min, a_max]`, uniform `b ∈ [-b_max, b_max]`, weighted by `da db / a²`.
pub fn shearlet_quadrature(c: f64, a_min: f64, a_max: f64, per_octave: usize, b_max: f64, nb: usize) -> Result<Vec<HNode>> {
    if !(0.0 < a_min && a_min < a_max) || per_octave == 0 || nb < 2 || !(b_max > 0.0) {
        return Err(Error::Domain("invalid shearlet quadrature ranges".into()));
    }
    let du = std::f64::consts::LN_2 / per_octave as f64;
    let n = ((a_max / a_min).ln() / du).round() as usize;
    let db = 2.0 * b_max / (nb - 1) as f64;
    let mut nodes = Vec::new();
    for k in 0..=n {
        let a = a_min * (k as f64 * du).exp();
        let wa = if k == 0 || k == n { 0.5 * du } else { du };
        for j in 0..nb {
            let b = -b_max + j as f64 * db;
            let wb = if j == 0 || j == nb - 1 { 0.5 * db } else { db };
            for sign in [1.0, -1.0] {
                nodes.push(HNode {
                    h: GroupElement::shearlet(c, sign * a, b)?,
                    weight: wa * wb / a,
                });
            }
        }
    }
    Ok(nodes)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousReconstruction {
    pub function: SampledFunction,
    pub c_psi: f64,
    /// `c_ψ` from every other node, as a stability probe.
    pub c_psi_coarse: f64,
    pub admissibility_warning: bool,
    pub relative_error: f64,
}

/// Slices `W_ψ f(·, h)` on the padded grid for each node.
pub fn continuous_slices(f: &SampledFunction, psi: &SampledFunction, nodes: &[HNode], exec: Execution) -> Result<Vec<SampledFunction>> {
    let spec = Spectrum::of(psi);
    exec.map(nodes, |n| analyze_slice_padded(f, &spec, &n.h, PAD_FACTOR))
        .into_iter()
        .collect()
}

/// Discretized inversion `f ≈ c_ψ^{-1} Σ_h w_h ∫ W_ψ f(x,h) π(x,h)ψ dx / |det h|`.
///
/// `slices` come from [`continuous_slices`]; `target` is the original signal (for the grid and
/// the error report).
pub fn reconstruct_continuous(
    target: &SampledFunction,
    slices: &[SampledFunction],
    psi: &SampledFunction,
    nodes: &[HNode],
) -> Result<ContinuousReconstruction> {
    if slices.len() != nodes.len() || slices.is_empty() {
        return Err(Error::Dimension {
            expected: nodes.len(),
            got: slices.len(),
        });
    }
    let big = slices[0].grid.clone();
    let d = big.dim();
    let spec = Spectrum::of(psi);
    let mut acc = vec![Complex64::new(0.0, 0.0); big.len()];
    for (w, node) in slices.iter().zip(nodes) {
        if w.grid != big {
            return Err(Error::Resolution("slices must share one grid".into()));
        }
        let mut data = w.samples.clone();
        fft_nd(&mut data, &big.extents, false);
        apply_slice_multiplier(&mut data, &big, &spec, &node.h, true);
        let scale = node.weight / node.h.abs_det();
        for (a, v) in acc.iter_mut().zip(data) {
            *a += v * scale;
        }
    }
    let mut fhat = target.embed(&big)?.samples;
    fft_nd(&mut fhat, &big.extents, false);
    let (mut kbest, mut best) = (0, -1.0);
    for (k, z) in fhat.iter().enumerate() {
        let xi = big.frequency(k);
        let inside = OrbitGeometry::new(*nodes[0].h.spec())?.contains(&xi[..d]);
        if inside && z.norm() > best {
            best = z.norm();
            kbest = k;
        }
    }
    let xi_ref = big.frequency(kbest);
    let multiplier = |stride: usize, scale: f64| -> f64 {
        nodes
            .iter()
            .step_by(stride)
            .map(|n| {
                let hx = n.h.dual_action(&xi_ref[..d]);
                n.weight * scale * spec.fourier(&hx.as_slice()[..d]).norm_sqr()
            })
            .sum()
    };
    let c_psi = multiplier(1, 1.0);
    let c_psi_coarse = multiplier(2, 2.0);
    let empty = target.samples.iter().all(|z| z.norm() == 0.0);
    if !(c_psi > 0.0) && !empty {
        return Err(Error::Contract(
            "ψ̂ vanishes on the sampled dilations at the reference frequency".into(),
        ));
    }
    fft_nd(&mut acc, &big.extents, true);
    let n = big.len() as f64;
    let norm = if c_psi > 0.0 { c_psi * n } else { n };
    acc.iter_mut().for_each(|z| *z /= norm);
    let full = SampledFunction::new(big, acc)?;
    let function = full.crop(&target.grid)?;
    let f_norm = target.l2_norm();
    let diff: f64 = function
        .samples
        .iter()
        .zip(&target.samples)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * target.grid.cell_volume().sqrt();
    let relative_error = if f_norm > 0.0 { diff / f_norm } else { diff };
    Ok(ContinuousReconstruction {
        function,
        c_psi,
        c_psi_coarse,
        admissibility_warning: c_psi > 0.0 && ((c_psi - c_psi_coarse) / c_psi).abs() > 0.1,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::build_atom;
    use crate::bump::{build_bump, BumpKind};
    use crate::groups::Rotation;

    fn atom_1d(t: u32, n: usize, h: f64) -> (SampledFunction, OrbitGeometry) {
        let grid = GridSpec::centered(1, n, h).unwrap();
        let geom = OrbitGeometry::new(DilationGroupSpec::similitude(1)).unwrap();
        let rho = build_bump(BumpKind::default(), 1.0, &grid).unwrap();
        (build_atom(&rho, &geom, t).unwrap(), geom)
    }

    #[test]
    fn self_coefficient_is_energy() {
        let (psi, _) = atom_1d(4, 256, 1.0 / 32.0);
        let id = GroupElement::identity(DilationGroupSpec::similitude(1)).unwrap();
        let w = analyze_slice(&psi, &psi, &id).unwrap();
        let i0 = w.grid.on_grid_index(0, 0.0).unwrap();
        let e = psi.l2_norm().powi(2);
        assert!((w.samples[i0].re - e).abs() < 1e-9 * e);
    }

    #[test]
    fn parseval_matches_direct_sum() {
        let (psi, _) = atom_1d(2, 96, 1.0 / 16.0);
        let grid = psi.grid.clone();
        let f = SampledFunction::from_fn(grid, |x| Complex64::new((-(x[0] - 0.3).powi(2) * 3.0).exp(), 0.2 * x[0]));
        let form = psi.tag.clone().unwrap();
        let h = GroupElement::new(DilationGroupSpec::similitude(1), &[-1.5]).unwrap();
        let w = analyze_slice(&f, &psi, &h).unwrap();
        for x in [-1.0, -0.25, 0.5, 1.25] {
            let i = w.grid.on_grid_index(0, x).unwrap();
            let direct = coefficient_direct(&f, &form, &[x], &h);
            let scale = f.l2_norm() * psi.l2_norm();
            assert!((w.samples[i] - direct).norm() < 1e-6 * scale, "x={x}: {} vs {direct}", w.samples[i]);
        }
    }

    #[test]
    fn translation_covariance() {
        let (psi, _) = atom_1d(3, 128, 1.0 / 16.0);
        let shift = 8;
        let grid = psi.grid.clone();
        let f = SampledFunction::from_fn(grid.clone(), |x| Complex64::new((-(x[0]).powi(2) * 8.0).exp(), 0.0));
        let mut g = SampledFunction::zeros(grid.clone());
        for i in 0..grid.len() - shift {
            g.samples[i + shift] = f.samples[i];
        }
        let h = GroupElement::new(DilationGroupSpec::similitude(1), &[0.7]).unwrap();
        let wf = analyze_slice(&f, &psi, &h).unwrap();
        let wg = analyze_slice(&g, &psi, &h).unwrap();
        for i in 20..grid.len() - 20 - shift {
            assert!((wg.samples[i + shift] - wf.samples[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn slice_energy_matches_plancherel() {
        let (psi, _) = atom_1d(4, 128, 1.0 / 16.0);
        let f = SampledFunction::from_fn(psi.grid.clone(), |x| Complex64::new((-(x[0] + 0.2).powi(2) * 10.0).exp(), 0.0));
        let h = GroupElement::new(DilationGroupSpec::similitude(1), &[1.3]).unwrap();
        let spec = Spectrum::of(&psi);
        let w = analyze_slice_padded(&f, &spec, &h, PAD_FACTOR).unwrap();
        let lhs: f64 = w.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * w.grid.cell_volume();
        let big = w.grid.clone();
        let mut fh = f.embed(&big).unwrap().samples;
        fft_nd(&mut fh, &big.extents, false);
        let dxi = 1.0 / big.periods()[0];
        let vol = big.cell_volume();
        let rhs: f64 = fh
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let xi = big.frequency(k)[0];
                (z * vol).norm_sqr() * spec.fourier(&[1.3 * xi]).norm_sqr() * 1.3
            })
            .sum::<f64>()
            * dxi;
        assert!((lhs - rhs).abs() < 1e-6 * rhs, "{lhs} vs {rhs}");
    }

    #[test]
    fn dilation_covariance_on_grid_points() {
        let grid = GridSpec::centered(2, 96, 1.0 / 16.0).unwrap();
        let geom = OrbitGeometry::new(DilationGroupSpec::similitude(2)).unwrap();
        let rho = build_bump(BumpKind::default(), 1.0, &grid).unwrap();
        let psi = build_atom(&rho, &geom, 2).unwrap();
        let form = rho.tag.clone().unwrap();
        let g = GroupElement::similitude(2.0, Rotation::Angle(0.0)).unwrap();
        // π(0,g)f(y) = |det g|^{-1/2} f(g^{-1}y).
        let gf = SampledFunction::from_fn(grid.clone(), |y| Complex64::new(0.5 * form.value(&[0.5 * y[0], 0.5 * y[1]]), 0.0));
        let h = GroupElement::similitude(2.0, Rotation::Angle(0.4)).unwrap();
        let lhs = analyze_slice(&gf, &psi, &h).unwrap();
        let rhs = analyze_slice(&rho, &psi, &g.inverse().compose(&h).unwrap()).unwrap();
        let peak = rhs.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (ix, iy) in [(48usize, 48usize), (52, 44), (40, 56), (60, 50)] {
            let a = lhs.samples[lhs.grid.ravel(&[ix, iy])];
            let b = rhs.samples[rhs.grid.ravel(&[24 + ix / 2, 24 + iy / 2])];
            assert!((a - b).norm() < 1e-8 * peak, "{a} vs {b}");
        }
    }

    #[test]
    fn inversion_of_the_atom_itself() {
        let (psi, _) = atom_1d(6, 256, 1.0 / 16.0);
        let nodes = similitude_quadrature_1d(1.0 / 256.0, 256.0, 8, true).unwrap();
        let slices = continuous_slices(&psi, &psi, &nodes, Execution::default()).unwrap();
        let rec = reconstruct_continuous(&psi, &slices, &psi, &nodes).unwrap();
        assert!(rec.relative_error < 1e-2, "{}", rec.relative_error);
        assert!(!rec.admissibility_warning);
        let zero = SampledFunction::zeros(psi.grid.clone());
        let zs = continuous_slices(&zero, &psi, &nodes, Execution::default()).unwrap();
        let rz = reconstruct_continuous(&zero, &zs, &psi, &nodes).unwrap();
        assert!(rz.function.samples.iter().all(|z| z.norm() == 0.0));
    }
}
