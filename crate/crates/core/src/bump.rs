//! Compactly supported bump functions, constant-coefficient differential
//! operators, and closed forms of `D ρ` in space and frequency.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{check_dim, Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::quadrature::{integrate_scalar, QuadratureConfig};

/// Shape of the one-dimensional bump profile; the `d`-dimensional bump is the tensor product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BumpKind {
    /// Centered cardinal B-spline of the given order (piecewise polynomial, `C^{order-2}`).
    PolynomialSpline { order: u32 },
    /// The mollifier `exp(-1/(1-x²))`.
    SmoothExponential,
}

impl Default for BumpKind {
    fn default() -> Self {
        BumpKind::PolynomialSpline { order: 16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub kind: BumpKind,
    pub radius: f64,
}

/// Minimum number of samples across the support.
pub const MIN_SAMPLES_ACROSS: f64 = 16.0;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Cardinal B-spline of order `k` supported on `[0, k]` (Cox–de Boor).
pub fn cardinal_bspline(k: u32, y: f64) -> f64 {
    if k == 0 || y <= 0.0 || y >= k as f64 {
        return 0.0;
    }
    let k = k as usize;
    let j = y.floor() as usize;
    let mut n = vec![0.0; k + 1];
    n[j] = 1.0;
    for r in 2..=k {
        for i in 0..=(k - r) {
            let fi = i as f64;
            n[i] = ((y - fi) * n[i] + (fi + r as f64 - y) * n[i + 1]) / (r - 1) as f64;
        }
    }
    n[0]
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn mollifier_kernel(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn mollifier_mass() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| {
        let cfg = QuadratureConfig {
            abs_tol: 0.0,
            rel_tol: 1e-14,
            max_intervals: 2000,
        };
        integrate_scalar(mollifier_kernel, -1.0, 1.0, &cfg).values[0]
    })
}

const MOLL_STEPS_PER_UNIT: usize = 1024;
const MOLL_FFT_LEN: usize = 65536;
const MOLL_NU_MAX: f64 = 400.0;

/// Table of the unit-radius mollifier's Fourier transform on `ν = k/64`, `k ≥ 0`.
fn mollifier_ft_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 1.0 / MOLL_STEPS_PER_UNIT as f64;
        let n = MOLL_FFT_LEN;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..=MOLL_STEPS_PER_UNIT {
            let g = mollifier_kernel(i as f64 * h);
            buf[i] = Complex64::new(g, 0.0);
            if i > 0 {
                buf[n - i] = Complex64::new(g, 0.0);
            }
        }
        FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
        let z = mollifier_mass();
        buf[..=n / 2].iter().map(|c| c.re * h / z).collect()
    })
}

fn table_spacing() -> f64 {
    MOLL_STEPS_PER_UNIT as f64 / MOLL_FFT_LEN as f64
}

/// Lagrange interpolation on unit-spaced nodes `start..start+m` of `value(j)`.
pub(crate) fn lagrange_uniform<F: Fn(i64) -> f64>(u: f64, m: usize, value: F) -> f64 {
    let start = u.floor() as i64 - (m as i64 / 2 - 1);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..m {
        let node = start + j as i64;
        let diff = u - node as f64;
        if diff == 0.0 {
            return value(node);
        }
        let w = if j % 2 == 0 { 1.0 } else { -1.0 } * binomial((m - 1) as u32, j as u32) / diff;
        num += w * value(node);
        den += w;
    }
    num / den
}

impl BumpSpec {
    pub fn new(kind: BumpKind, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("bump radius must be positive, got {radius}")));
        }
        if let BumpKind::PolynomialSpline { order } = kind {
            if order < 2 {
                return Err(Error::Domain("spline order must be at least 2".into()));
            }
        }
        Ok(Self { kind, radius })
    }

    /// Knot spacing of the spline profile.
    pub fn knot_spacing(&self) -> Option<f64> {
        match self.kind {
            BumpKind::PolynomialSpline { order } => Some(2.0 * self.radius / order as f64),
            BumpKind::SmoothExponential => None,
        }
    }

    /// Highest derivative order that is still continuous (`None` = unlimited).
    pub fn smoothness(&self) -> Option<u32> {
        match self.kind {
            BumpKind::PolynomialSpline { order } => Some(order - 2),
            BumpKind::SmoothExponential => None,
        }
    }

    /// `m`-th derivative of the normalized 1-D profile.
    pub fn profile_derivative(&self, m: u32, x: f64) -> f64 {
        let r = self.radius;
        match self.kind {
            BumpKind::PolynomialSpline { order } => {
                if m >= order {
                    return 0.0;
                }
                let w = 2.0 * r / order as f64;
                let y = x / w + order as f64 / 2.0;
                let mut s = 0.0;
                for i in 0..=m {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    s += sign * binomial(m, i) * cardinal_bspline(order - m, y - i as f64);
                }
                s / w.powi(m as i32 + 1)
            }
            BumpKind::SmoothExponential => {
                let u = x / r;
                if u.abs() >= 1.0 {
                    return 0.0;
                }
                let p = mollifier_poly(m);
                let one_minus = 1.0 - u * u;
                let pv = p.iter().rev().fold(0.0, |acc, c| acc * u + c);
                mollifier_kernel(u) * pv / one_minus.powi(2 * m as i32) / (r.powi(m as i32 + 1) * mollifier_mass())
            }
        }
    }

    /// Fourier transform of the normalized 1-D profile (real and even).
    pub fn profile_fourier(&self, nu: f64) -> f64 {
        match self.kind {
            BumpKind::PolynomialSpline { order } => {
                let w = 2.0 * self.radius / order as f64;
                sinc(w * nu).powi(order as i32)
            }
            BumpKind::SmoothExponential => {
                let v = (nu * self.radius).abs();
                if v > MOLL_NU_MAX {
                    return 0.0;
                }
                let table = mollifier_ft_table();
                lagrange_uniform(v / table_spacing(), 12, |j| table[j.unsigned_abs() as usize])
            }
        }
    }
}

/// Coefficients (ascending) of `P_m` with `g^{(m)}(u) = g(u) P_m(u) / (1-u²)^{2m}`.
fn mollifier_poly(m: u32) -> Vec<f64> {
    let mut p = vec![1.0];
    for k in 0..m {
        let k = k as f64;
        let deg = p.len() + 3;
        let mut next = vec![0.0; deg];
        // -2u P
        for (i, c) in p.iter().enumerate() {
            next[i + 1] -= 2.0 * c;
        }
        // (1 - 2u² + u⁴) P'
        for (i, c) in p.iter().enumerate().skip(1) {
            let dc = c * i as f64;
            next[i - 1] += dc;
            next[i + 1] -= 2.0 * dc;
            next[i + 3] += dc;
        }
        // 4k u (1 - u²) P
        for (i, c) in p.iter().enumerate() {
            next[i + 1] += 4.0 * k * c;
            next[i + 3] -= 4.0 * k * c;
        }
        while next.len() > 1 && *next.last().unwrap() == 0.0 {
            next.pop();
        }
        p = next;
    }
    p
}

/// A constant-coefficient operator `Σ c_α ∂^α` in up to three variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffOperator {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl DiffOperator {
    pub fn identity() -> Self {
        Self {
            terms: vec![(1.0, [0; 3])],
        }
    }

    pub fn partial(alpha: [u32; 3]) -> Self {
        Self { terms: vec![(1.0, alpha)] }
    }

    /// `Δ^k` in `d` variables, expanded by the multinomial theorem.
    pub fn laplacian_power(d: usize, k: u32) -> Self {
        let mut terms = Vec::new();
        let mut beta = [0u32; 3];
        fn rec(d: usize, axis: usize, left: u32, beta: &mut [u32; 3], k: u32, out: &mut Vec<(f64, [u32; 3])>) {
            if axis + 1 == d {
                beta[axis] = left;
                let mut coef = (1..=k).map(f64::from).product::<f64>();
                for b in beta.iter().take(d) {
                    coef /= (1..=*b).map(f64::from).product::<f64>();
                }
                out.push((coef, [2 * beta[0], 2 * beta[1], 2 * beta[2]]));
                beta[axis] = 0;
                return;
            }
            for b in 0..=left {
                beta[axis] = b;
                rec(d, axis + 1, left - b, beta, k, out);
            }
            beta[axis] = 0;
        }
        rec(d, 0, k, &mut beta, k, &mut terms);
        Self { terms }
    }

    /// `(∂₁⋯∂_d)^t`.
    pub fn mixed_power(d: usize, t: u32) -> Self {
        let mut alpha = [0; 3];
        alpha.iter_mut().take(d).for_each(|a| *a = t);
        Self::partial(alpha)
    }

    pub fn is_identity(&self) -> bool {
        self.terms.len() == 1 && self.terms[0] == (1.0, [0; 3])
    }

    /// Largest per-axis derivative order.
    pub fn max_axis_order(&self) -> u32 {
        self.terms.iter().flat_map(|(_, a)| a.iter().copied()).max().unwrap_or(0)
    }

    pub fn order(&self) -> u32 {
        self.terms.iter().map(|(_, a)| a.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Composition `self ∘ other`.
    pub fn then(&self, other: &DiffOperator) -> DiffOperator {
        let mut terms: Vec<(f64, [u32; 3])> = Vec::new();
        for (c1, a1) in &self.terms {
            for (c2, a2) in &other.terms {
                let a = [a1[0] + a2[0], a1[1] + a2[1], a1[2] + a2[2]];
                match terms.iter_mut().find(|(_, b)| *b == a) {
                    Some(t) => t.0 += c1 * c2,
                    None => terms.push((c1 * c2, a)),
                }
            }
        }
        DiffOperator { terms }
    }

    /// Fourier symbol `Σ c_α (2πiξ)^α`.
    pub fn symbol(&self, xi: &[f64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (c, alpha) in &self.terms {
            let mut v = Complex64::new(*c, 0.0);
            for (j, &a) in alpha.iter().enumerate().take(xi.len()) {
                if a > 0 {
                    v *= Complex64::new(0.0, 2.0 * PI * xi[j]).powu(a);
                }
            }
            s += v;
        }
        s
    }
}

/// Closed form `amplitude · D ρ(· − center)` of a sampled function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub bump: BumpSpec,
    pub dim: usize,
    pub operator: DiffOperator,
    pub amplitude: f64,
    pub center: Vec<f64>,
}

impl ClosedForm {
    pub fn bump(bump: BumpSpec, dim: usize) -> Self {
        Self {
            bump,
            dim,
            operator: DiffOperator::identity(),
            amplitude: 1.0,
            center: vec![0.0; dim],
        }
    }

    pub fn with_operator(&self, op: &DiffOperator) -> Self {
        Self {
            operator: op.then(&self.operator),
            ..self.clone()
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let max = self.operator.max_axis_order() as usize;
        let mut table = [[0.0; 64]; 3];
        for j in 0..d {
            let y = x[j] - self.center[j];
            if y.abs() >= self.bump.radius {
                return 0.0;
            }
            for (m, slot) in table[j].iter_mut().enumerate().take(max + 1) {
                *slot = self.bump.profile_derivative(m as u32, y);
            }
        }
        let mut s = 0.0;
        for (c, alpha) in &self.operator.terms {
            let mut v = *c;
            for j in 0..d {
                v *= table[j][alpha[j] as usize];
            }
            s += v;
        }
        self.amplitude * s
    }

    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        let mut rho = self.amplitude;
        let mut phase = 0.0;
        for j in 0..self.dim {
            rho *= self.bump.profile_fourier(xi[j]);
            phase -= 2.0 * PI * xi[j] * self.center[j];
        }
        if rho == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.operator.symbol(&xi[..self.dim]) * Complex64::from_polar(rho, phase)
    }

    /// Samples the closed form on `grid`.
    pub fn sample(&self, grid: &GridSpec) -> Result<SampledFunction> {
        check_dim(self.dim, grid.dim())?;
        let f = SampledFunction::from_fn(grid.clone(), |x| Complex64::new(self.value(x), 0.0));
        Ok(f.with_tag(Some(self.clone())))
    }
}

/// Samples the normalized tensor-product bump of the given kind on `grid`.
pub fn build_bump(kind: BumpKind, radius: f64, grid: &GridSpec) -> Result<SampledFunction> {
    let spec = BumpSpec::new(kind, radius)?;
    let d = grid.dim();
    for a in 0..d {
        let across = 2.0 * radius / grid.spacing[a];
        if across < MIN_SAMPLES_ACROSS {
            return Err(Error::Resolution(format!(
                "only {across:.1} samples across the support on axis {a}; at least {MIN_SAMPLES_ACROSS} are needed"
            )));
        }
        let lo = grid.origin[a];
        let hi = lo + (grid.extents[a] - 1) as f64 * grid.spacing[a];
        if lo > -radius || hi < radius {
            return Err(Error::Resolution(format!(
                "grid axis {a} does not contain the support [-{radius}, {radius}]"
            )));
        }
    }
    let mut form = ClosedForm::bump(spec, d);
    let raw = form.sample(grid)?;
    let mass = raw.integral().re;
    if !(mass > 0.0) {
        return Err(Error::Resolution("bump integrates to zero on this grid".into()));
    }
    form.amplitude = 1.0 / mass;
    form.sample(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spline(order: u32) -> BumpSpec {
        BumpSpec::new(BumpKind::PolynomialSpline { order }, 1.0).unwrap()
    }

    #[test]
    fn bspline_partition_of_unity_and_symmetry() {
        for k in [2u32, 4, 7, 16] {
            for y in [0.1, 0.37, 0.9] {
                let s: f64 = (0..k as i32).map(|i| cardinal_bspline(k, y + i as f64)).sum();
                assert!((s - 1.0).abs() < 1e-13, "k={k} y={y} s={s}");
            }
            assert!((cardinal_bspline(k, 0.3) - cardinal_bspline(k, k as f64 - 0.3)).abs() < 1e-14);
        }
        assert!((cardinal_bspline(2, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn profile_derivatives_match_finite_differences() {
        for spec in [spline(16), BumpSpec::new(BumpKind::SmoothExponential, 1.3).unwrap()] {
            for m in 0..5 {
                for x in [-0.7, -0.2, 0.15, 0.55] {
                    let h = 1e-5;
                    let fd = (spec.profile_derivative(m, x + h) - spec.profile_derivative(m, x - h)) / (2.0 * h);
                    let exact = spec.profile_derivative(m + 1, x);
                    assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "m={m} x={x} {fd} {exact}");
                }
            }
        }
    }

    #[test]
    fn profile_fourier_matches_quadrature() {
        let cfg = QuadratureConfig {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 4000,
        };
        for spec in [spline(8), BumpSpec::new(BumpKind::SmoothExponential, 0.8).unwrap()] {
            for nu in [0.0, 0.3, 1.7, 4.2] {
                let r = spec.radius;
                let direct = integrate_scalar(|x| spec.profile_derivative(0, x) * (2.0 * PI * nu * x).cos(), -r, r, &cfg).values[0];
                assert!((direct - spec.profile_fourier(nu)).abs() < 1e-10, "nu={nu}");
            }
        }
    }

    #[test]
    fn mollifier_bump_is_normalized_and_even() {
        let grid = GridSpec::centered(1, 64, 1.0 / 16.0).unwrap();
        let rho = build_bump(BumpKind::SmoothExponential, 1.0, &grid).unwrap();
        assert!((rho.integral().re - 1.0).abs() < 1e-10);
        let n = rho.samples.len();
        let mid = n / 2;
        for k in 1..20 {
            assert!((rho.samples[mid + k] - rho.samples[mid - k]).norm() < 1e-15);
        }
        assert!(rho.samples.iter().all(|z| z.re >= 0.0));
        let form = rho.tag.as_ref().unwrap();
        assert!((form.value(&[0.5]) - rho.samples[mid + 8].re).abs() < 1e-15);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = GridSpec::centered(1, 64, 0.25).unwrap();
        assert!(matches!(build_bump(BumpKind::default(), 1.0, &grid), Err(Error::Resolution(_))));
    }

    #[test]
    fn laplacian_expansion() {
        let op = DiffOperator::laplacian_power(2, 2);
        assert_eq!(op.terms.len(), 3);
        let s = op.symbol(&[0.3, -0.4]);
        let r2 = (2.0 * PI).powi(2) * 0.25;
        assert!((s.re - r2 * r2).abs() < 1e-10 && s.im.abs() < 1e-12);
        let mixed = DiffOperator::partial([1, 0, 0]).then(&DiffOperator::partial([0, 2, 0]));
        assert_eq!(mixed.terms, vec![(1.0, [1, 2, 0])]);
    }
}
