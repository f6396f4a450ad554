//! Frame-bound estimation and conjugate-gradient reconstruction on a test space.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FrameSystem, TestSpace, TestSpaceDescription};
use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::par::Execution;
use crate::sampling::SamplingSet;

/// Largest test space for which the dense Gram matrix is diagonalized.
pub const GRAM_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// Dense Gram matrix up to [`GRAM_LIMIT`], Lanczos beyond.
    Auto,
    GramEigen,
    PowerIteration,
    Lanczos,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameOptions {
    pub method: BoundMethod,
    /// Tolerance on the extremal Rayleigh quotients, relative to `B`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Relative residual at which conjugate gradients stops.
    pub cg_tol: f64,
    pub seed: u64,
    /// Run a seeded reconstruction probe and report its error.
    pub probe: bool,
    pub exec: Execution,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self {
            method: BoundMethod::Auto,
            tol: 1e-6,
            max_iterations: 2000,
            cg_tol: 1e-8,
            seed: 0,
            probe: true,
            exec: Execution::default(),
        }
    }
}

/// Extremal eigenvalues of the frame operator on a test space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    #[serde(rename = "lower_A")]
    pub lower_a: f64,
    #[serde(rename = "upper_B")]
    pub upper_b: f64,
    pub method: BoundMethod,
    pub test_space: TestSpaceDescription,
    /// Relative error of a seeded reconstruction probe (0 when not run).
    pub reconstruction_error: f64,
    pub iterations: usize,
}

impl FrameReport {
    pub fn ratio(&self) -> f64 {
        self.upper_b / self.lower_a
    }
}

/// Result of applying `S⁻¹ S` to a signal.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub signal: SampledFunction,
    /// `‖g − P_T f‖ / ‖P_T f‖`.
    pub relative_error: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let s = norm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    v
}

struct Extremes {
    lower: f64,
    upper: f64,
    iterations: usize,
}

fn gram_extremes(sys: &FrameSystem) -> Result<Extremes> {
    let g = sys.gram_matrix()?;
    let n = g.nrows();
    let herm = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm).eigenvalues;
    let lower = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Extremes {
        lower,
        upper,
        iterations: n,
    })
}

fn power_extremes(sys: &FrameSystem, opts: &FrameOptions) -> Result<Extremes> {
    let n = sys.space().len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let run = |shift: f64, rng: &mut ChaCha8Rng| -> Result<(f64, usize)> {
        let mut v = random_unit(n, rng);
        let mut prev = f64::NAN;
        for it in 1..=opts.max_iterations {
            let mut w = sys.apply(&v)?;
            if shift != 0.0 {
                w.iter_mut().zip(&v).for_each(|(a, b)| *a = b * shift - *a);
            }
            let rq = dot(&w, &v).re;
            let s = norm(&w);
            if s == 0.0 {
                return Ok((0.0, it));
            }
            v = w.into_iter().map(|z| z / s).collect();
            if (rq - prev).abs() <= opts.tol * rq.abs().max(f64::MIN_POSITIVE) {
                return Ok((rq, it));
            }
            prev = rq;
        }
        Ok((prev, opts.max_iterations))
    };
    let (upper, i1) = run(0.0, &mut rng)?;
    let (top, i2) = run(upper, &mut rng)?;
    Ok(Extremes {
        lower: upper - top,
        upper,
        iterations: i1 + i2,
    })
}

/// Lanczos with full reorthogonalization; stops when both extreme Ritz pairs have
/// residual below `tol · B`.
fn lanczos_extremes(sys: &FrameSystem, opts: &FrameOptions) -> Result<Extremes> {
    let n = sys.space().len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let max_k = opts.max_iterations.min(n);
    let mut basis: Vec<Vec<Complex64>> = vec![random_unit(n, &mut rng)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = (0.0, 0.0);
    for k in 0..max_k {
        let mut w = sys.apply(&basis[k])?;
        let a = dot(&w, &basis[k]).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (mut imin, mut imax) = (0, 0);
        for i in 0..m {
            if eig.eigenvalues[i] < eig.eigenvalues[imin] {
                imin = i;
            }
            if eig.eigenvalues[i] > eig.eigenvalues[imax] {
                imax = i;
            }
        }
        let lower = eig.eigenvalues[imin];
        let upper = eig.eigenvalues[imax];
        last = (lower, upper);
        let res_min = b * eig.eigenvectors[(m - 1, imin)].abs();
        let res_max = b * eig.eigenvectors[(m - 1, imax)].abs();
        let tol = opts.tol * upper.abs().max(f64::MIN_POSITIVE);
        if (res_min <= tol && res_max <= tol) || b <= tol || k + 1 == n {
            return Ok(Extremes {
                lower,
                upper,
                iterations: k + 1,
            });
        }
        beta.push(b);
        basis.push(w.into_iter().map(|z| z / b).collect());
    }
    Ok(Extremes {
        lower: last.0,
        upper: last.1,
        iterations: max_k,
    })
}

/// Conjugate gradients for `S g = rhs` on the test space.
fn conjugate_gradient(sys: &FrameSystem, rhs: &[Complex64], tol: f64, max_iter: usize) -> Result<(Vec<Complex64>, usize, f64, bool)> {
    let n = rhs.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0, true));
    }
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    for it in 1..=max_iter {
        let sp = sys.apply(&p)?;
        let step = rr / dot(&sp, &p).re;
        for i in 0..n {
            x[i] += p[i] * step;
            r[i] -= sp[i] * step;
        }
        let rr_new = dot(&r, &r).re;
        let res = rr_new.sqrt() / bnorm;
        if res <= tol {
            return Ok((x, it, res, true));
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
        rr = rr_new;
    }
    Ok((x, max_iter, rr.sqrt() / bnorm, false))
}

fn cg_budget(cond: f64) -> usize {
    if cond.is_finite() {
        (10.0 * cond).ceil().max(10.0) as usize
    } else {
        10
    }
}

impl FrameSystem {
    /// Extremal Rayleigh quotients of `S` on the test space.
    pub fn bounds(&self, opts: &FrameOptions) -> Result<FrameReport> {
        let n = self.space().len();
        let method = match opts.method {
            BoundMethod::Auto if n <= GRAM_LIMIT => BoundMethod::GramEigen,
            BoundMethod::Auto => BoundMethod::Lanczos,
            m => m,
        };
        let ext = match method {
            BoundMethod::GramEigen => gram_extremes(self)?,
            BoundMethod::PowerIteration => power_extremes(self, opts)?,
            _ => lanczos_extremes(self, opts)?,
        };
        let upper = ext.upper.max(0.0);
        let lower = ext.lower.clamp(0.0, upper);
        if !(lower >= 1e-12 * upper) || upper == 0.0 {
            return Err(Error::NotAFrame { lower, upper });
        }
        let mut report = FrameReport {
            lower_a: lower,
            upper_b: upper,
            method,
            test_space: self.space().description(),
            reconstruction_error: 0.0,
            iterations: ext.iterations,
        };
        if opts.probe {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
            let u = random_unit(n, &mut rng);
            let (g, _, _) = self.reconstruct_coordinates(&u, report.ratio(), opts.cg_tol)?;
            let diff: Vec<Complex64> = g.iter().zip(&u).map(|(a, b)| a - b).collect();
            report.reconstruction_error = norm(&diff);
        }
        Ok(report)
    }

    /// `S⁻¹ S u` by conjugate gradients with at most `10·cond` iterations.
    pub fn reconstruct_coordinates(&self, u: &[Complex64], cond: f64, tol: f64) -> Result<(Vec<Complex64>, usize, f64)> {
        self.solve(&self.apply(u)?, cond, tol)
    }

    /// `S⁻¹ rhs` by conjugate gradients; returns the solution, iterations and relative residual.
    pub fn solve(&self, rhs: &[Complex64], cond: f64, tol: f64) -> Result<(Vec<Complex64>, usize, f64)> {
        let (g, it, res, ok) = conjugate_gradient(self, rhs, tol, cg_budget(cond))?;
        if !ok {
            return Err(Error::IllConditioned {
                iterations: it,
                residual: res,
                partial: Box::new(self.space().signal(&g)?),
            });
        }
        Ok((g, it, res))
    }

    /// Reconstructs `f` from its frame coefficients on the test space.
    pub fn reconstruct(&self, f: &SampledFunction, report: &FrameReport, tol: f64) -> Result<Reconstruction> {
        let u = self.space().coordinates(f)?;
        let (g, iterations, residual) = self.reconstruct_coordinates(&u, report.ratio(), tol)?;
        let diff: Vec<Complex64> = g.iter().zip(&u).map(|(a, b)| a - b).collect();
        let un = norm(&u);
        let relative_error = if un == 0.0 { norm(&diff) } else { norm(&diff) / un };
        Ok(Reconstruction {
            signal: self.space().signal(&g)?,
            relative_error,
            iterations,
            residual,
        })
    }
}

fn require_separated(set: &SamplingSet) -> Result<()> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if set.separation_certificate.is_none() {
        return Err(Error::Contract("sampling set carries no separation certificate".into()));
    }
    Ok(())
}

/// Frame bounds of `(π(z)ψ)_{z ∈ Z}` on `space`; `Z` must be certified separated.
pub fn frame_bounds(psi: &SampledFunction, set: &SamplingSet, space: TestSpace, opts: &FrameOptions) -> Result<FrameReport> {
    require_separated(set)?;
    FrameSystem::from_sampled(psi, set, space, opts.exec)?.bounds(opts)
}

/// `S⁻¹ S f` on `space`, with relative error against the projection of `f`.
pub fn reconstruct(
    f: &SampledFunction,
    psi: &SampledFunction,
    set: &SamplingSet,
    space: TestSpace,
    report: &FrameReport,
    opts: &FrameOptions,
) -> Result<Reconstruction> {
    require_separated(set)?;
    if !(report.lower_a > 0.0) {
        return Err(Error::NotAFrame {
            lower: report.lower_a,
            upper: report.upper_b,
        });
    }
    FrameSystem::from_sampled(psi, set, space, opts.exec)?.reconstruct(f, report, opts.cg_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::ShannonControl;
    use crate::grid::GridSpec;
    use crate::groups::{DilationGroupSpec, GroupElement};
    use crate::sampling::{build_sliced, Neighborhood};
    use std::sync::Arc;

    /// Dyadic Shannon system `ψ_{j,k}` with `h = 2^j`, `x = 2^j k` covering the window.
    fn shannon(grid: &GridSpec, j_range: std::ops::RangeInclusive<i32>) -> SamplingSet {
        let spec = DilationGroupSpec::similitude(1);
        let period = grid.periods()[0];
        let (hs, xs): (Vec<_>, Vec<_>) = j_range
            .map(|j| {
                let s = 2f64.powi(j);
                let count = (period / s).round() as usize;
                let xs: Vec<Vec<f64>> = (0..count).map(|k| vec![grid.origin[0] + s * k as f64]).collect();
                (GroupElement::new(spec, &[s]).unwrap(), xs)
            })
            .unzip();
        build_sliced(&hs, &xs).unwrap()
    }

    fn band_space(grid: GridSpec, lo: f64, hi: f64) -> TestSpace {
        TestSpace::with_filter(grid, |xi| (lo..=hi).contains(&xi[0].abs())).unwrap()
    }

    #[test]
    fn shannon_control_is_tight() {
        let grid = GridSpec::new(vec![-16.0], vec![0.125], vec![256]).unwrap();
        let set = shannon(&grid, -2..=3);
        let space = band_space(grid, 0.125, 3.9);
        let sys = FrameSystem::new(Arc::new(ShannonControl), &set, space, Execution::Sequential).unwrap();
        for method in [BoundMethod::GramEigen, BoundMethod::Lanczos, BoundMethod::PowerIteration] {
            let opts = FrameOptions {
                method,
                ..FrameOptions::default()
            };
            let r = sys.bounds(&opts).unwrap();
            assert!(
                (r.lower_a - 1.0).abs() < 1e-6 && (r.upper_b - 1.0).abs() < 1e-6,
                "{method:?}: {r:?}"
            );
            assert!(r.reconstruction_error < 1e-8);
        }
    }

    #[test]
    fn dropping_a_scale_breaks_the_frame() {
        let grid = GridSpec::new(vec![-16.0], vec![0.125], vec![256]).unwrap();
        let set = shannon(&grid, -1..=3);
        let space = band_space(grid, 0.125, 3.9);
        let sys = FrameSystem::new(Arc::new(ShannonControl), &set, space, Execution::Sequential).unwrap();
        assert!(matches!(sys.bounds(&FrameOptions::default()), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn methods_agree_and_frame_inequality_holds() {
        let grid = GridSpec::centered(1, 128, 0.125).unwrap();
        let spec = DilationGroupSpec::similitude(1);
        let hs: Vec<GroupElement> = (-3..=3).map(|j| GroupElement::new(spec, &[1.5f64.powi(j)]).unwrap()).collect();
        let xs: Vec<Vec<Vec<f64>>> = hs
            .iter()
            .map(|h| {
                let step = 0.5 * h.scale();
                let n = (16.0 / step).floor() as i64;
                (-n..n).map(|k| vec![k as f64 * step]).collect()
            })
            .collect();
        let mut set = build_sliced(&hs, &xs).unwrap();
        set.certify_separation(&Neighborhood::new(0.1, 0.1, 0.0).unwrap()).unwrap();
        let psi = crate::atoms::build_atom(
            &crate::bump::build_bump(Default::default(), 1.0, &GridSpec::centered(1, 256, 1.0 / 32.0).unwrap()).unwrap(),
            &crate::orbit::OrbitGeometry::new(spec).unwrap(),
            2,
        )
        .unwrap();
        let space = band_space(grid.clone(), 0.3, 1.5);
        let opts = FrameOptions::default();
        let gram = frame_bounds(&psi, &set, space.clone(), &opts).unwrap();
        let lanczos = frame_bounds(
            &psi,
            &set,
            space.clone(),
            &FrameOptions {
                method: BoundMethod::Lanczos,
                ..opts.clone()
            },
        )
        .unwrap();
        assert!((gram.lower_a - lanczos.lower_a).abs() < 1e-6 * gram.upper_b);
        assert!((gram.upper_b - lanczos.upper_b).abs() < 1e-6 * gram.upper_b);
        let sys = FrameSystem::from_sampled(&psi, &set, space.clone(), Execution::Sequential).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let u = random_unit(space.len(), &mut rng);
            let e: f64 = sys.analyze(&u).unwrap().iter().map(|c| c.norm_sqr()).sum();
            assert!(gram.lower_a * (1.0 - 1e-4) <= e && e <= gram.upper_b * (1.0 + 1e-4));
        }
        let f = space.signal(&random_unit(space.len(), &mut rng)).unwrap();
        let rec = reconstruct(&f, &psi, &set, space.clone(), &gram, &opts).unwrap();
        assert!(rec.relative_error < 1e-6, "{}", rec.relative_error);
        let zero = reconstruct(&SampledFunction::zeros(grid), &psi, &set, space, &gram, &opts).unwrap();
        assert!(zero.signal.samples.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn uncertified_sets_are_rejected() {
        let grid = GridSpec::centered(1, 64, 0.25).unwrap();
        let set = shannon(&grid, 0..=1);
        let psi = SampledFunction::zeros(grid.clone());
        let err = frame_bounds(&psi, &set, TestSpace::full(grid), &FrameOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
