//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands on finite intervals, half-lines and the whole line.
//!
//! Unbounded pieces are mapped onto `[0, 1)` with `x = a ± u/(1-u)`, so
//! integrands only need algebraic decay. All components share the same
//! nodes, which keeps pointwise inequalities between components intact.

use serde::{Deserialize, Serialize};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            max_intervals: 4000,
        }
    }
}

impl QuadratureConfig {
    /// Purely relative accuracy, for integrals whose magnitude spans many decades.
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Result of a vector-valued integration.
#[derive(Clone, Debug, PartialEq)]
pub struct Integral {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
enum Map {
    Finite,
    Upper(f64),
    Lower(f64),
}

impl Map {
    #[inline]
    fn apply(self, u: f64) -> (f64, f64) {
        match self {
            Map::Finite => (u, 1.0),
            Map::Upper(a) => {
                let v = 1.0 - u;
                (a + u / v, 1.0 / (v * v))
            }
            Map::Lower(b) => {
                let v = 1.0 - u;
                (b - u / v, 1.0 / (v * v))
            }
        }
    }
}

struct Piece {
    map: Map,
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
}

fn gk15<F>(f: &F, map: Map, lo: f64, hi: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [f64]),
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut abs_k = vec![0.0; dim];
    let mut fvals = vec![0.0; 15 * dim];

    for (i, &x) in XGK.iter().enumerate() {
        let nodes: &[f64] = if i == 7 { &[0.0] } else { &[-1.0, 1.0] };
        for (s, &sign) in nodes.iter().enumerate() {
            let u = centre + sign * half * x;
            let (xv, jac) = map.apply(u);
            f(xv, buf);
            let slot = if i == 7 { 14 } else { 2 * i + s };
            for k in 0..dim {
                let v = buf[k] * jac;
                let v = if v.is_finite() { v } else { 0.0 };
                fvals[slot * dim + k] = v;
                kron[k] += WGK[i] * v;
                abs_k[k] += WGK[i] * v.abs();
                if i % 2 == 1 {
                    gauss[k] += WG[i / 2] * v;
                } else if i == 7 {
                    gauss[k] += WG[3] * v;
                }
            }
        }
    }

    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for k in 0..dim {
        let mean = kron[k] * 0.5;
        let mut asc = 0.0;
        for (i, &w) in WGK.iter().enumerate() {
            if i == 7 {
                asc += w * (fvals[14 * dim + k] - mean).abs();
            } else {
                asc += w * ((fvals[2 * i * dim + k] - mean).abs() + (fvals[(2 * i + 1) * dim + k] - mean).abs());
            }
        }
        let resasc = asc * half.abs();
        let resabs = abs_k[k] * half.abs();
        let mut err = ((kron[k] - gauss[k]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        values[k] = kron[k] * half;
        errors[k] = err;
    }
    (values, errors)
}

/// Integrates a vector-valued `f` over the real line, splitting at `breakpoints`.
///
/// `f(x, out)` writes `dim` components into `out`.
pub fn integrate_line<F>(f: F, breakpoints: &[f64], dim: usize, cfg: &QuadratureConfig) -> Integral
where
    F: Fn(f64, &mut [f64]),
{
    integrate_line_controlled(f, breakpoints, dim, dim, cfg)
}

/// Like [`integrate_line`], but only the first `controlled` components drive
/// refinement and convergence; the rest are carried along.
pub fn integrate_line_controlled<F>(f: F, breakpoints: &[f64], dim: usize, controlled: usize, cfg: &QuadratureConfig) -> Integral
where
    F: Fn(f64, &mut [f64]),
{
    let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite()).collect();
    if pts.is_empty() {
        pts.push(0.0);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    let mut segs = vec![(Map::Lower(pts[0]), 0.0, 1.0)];
    for w in pts.windows(2) {
        segs.push((Map::Finite, w[0], w[1]));
    }
    segs.push((Map::Upper(*pts.last().unwrap()), 0.0, 1.0));
    adapt(f, segs, dim, controlled.min(dim), cfg)
}

/// Integrates over `[a, b]` with optional interior breakpoints.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, breakpoints: &[f64], dim: usize, cfg: &QuadratureConfig) -> Integral
where
    F: Fn(f64, &mut [f64]),
{
    let mut pts = vec![a, b];
    pts.extend(breakpoints.iter().copied().filter(|x| *x > a && *x < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let segs = pts.windows(2).map(|w| (Map::Finite, w[0], w[1])).collect();
    adapt(f, segs, dim, dim, cfg)
}

/// Integrates over `[a, ∞)` with optional interior breakpoints.
pub fn integrate_half_line<F>(f: F, a: f64, breakpoints: &[f64], dim: usize, cfg: &QuadratureConfig) -> Integral
where
    F: Fn(f64, &mut [f64]),
{
    let mut pts = vec![a];
    pts.extend(breakpoints.iter().copied().filter(|x| x.is_finite() && *x > a));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut segs: Vec<_> = pts.windows(2).map(|w| (Map::Finite, w[0], w[1])).collect();
    segs.push((Map::Upper(*pts.last().unwrap()), 0.0, 1.0));
    adapt(f, segs, dim, dim, cfg)
}

/// Scalar convenience wrapper around [`integrate_interval`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Integral
where
    F: Fn(f64) -> f64,
{
    integrate_interval(|x, out: &mut [f64]| out[0] = f(x), a, b, &[], 1, cfg)
}

fn adapt<F>(f: F, segs: Vec<(Map, f64, f64)>, dim: usize, controlled: usize, cfg: &QuadratureConfig) -> Integral
where
    F: Fn(f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim.max(1)];
    let mut pieces: Vec<Piece> = segs
        .into_iter()
        .filter(|(_, lo, hi)| hi > lo)
        .map(|(map, lo, hi)| {
            let (values, errors) = gk15(&f, map, lo, hi, dim, &mut buf);
            Piece {
                map,
                lo,
                hi,
                values,
                errors,
            }
        })
        .collect();
    let mut evaluations = 15 * pieces.len();

    let totals = |pieces: &[Piece]| {
        let mut v = vec![0.0; dim];
        let mut e = vec![0.0; dim];
        for p in pieces {
            for k in 0..dim {
                v[k] += p.values[k];
                e[k] += p.errors[k];
            }
        }
        (v, e)
    };

    loop {
        let (values, errors) = totals(&pieces);
        let targets: Vec<f64> = values.iter().map(|v| cfg.target(*v)).collect();
        let done = (0..controlled).all(|k| errors[k] <= targets[k]);
        if done || pieces.len() >= cfg.max_intervals {
            return Integral {
                values,
                errors,
                evaluations,
                converged: done,
            };
        }
        let score = |p: &Piece| {
            (0..controlled)
                .map(|k| p.errors[k] / targets[k].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (i, score(p)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            // Interval can no longer be split in floating point.
            let (values, errors) = totals(&pieces);
            let mut errors = errors;
            for k in 0..dim {
                errors[k] += p.errors[k];
            }
            let values: Vec<f64> = values.iter().zip(&p.values).map(|(a, b)| a + b).collect();
            return Integral {
                values,
                errors,
                evaluations,
                converged: false,
            };
        }
        for (lo, hi) in [(p.lo, mid), (mid, p.hi)] {
            let (values, errors) = gk15(&f, p.map, lo, hi, dim, &mut buf);
            pieces.push(Piece {
                map: p.map,
                lo,
                hi,
                values,
                errors,
            });
        }
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let r = integrate_scalar(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &Default::default());
        assert!((r.values[0] - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn lorentzian_on_line() {
        let cfg = QuadratureConfig::relative(1e-10);
        let r = integrate_line(|x, o: &mut [f64]| o[0] = 1.0 / (1.0 + x * x), &[0.0], 1, &cfg);
        assert!((r.values[0] - PI).abs() < 1e-9, "{}", r.values[0]);
    }

    #[test]
    fn kinked_integrand_with_breakpoint() {
        let cfg = QuadratureConfig::relative(1e-12);
        let f = |x: f64, o: &mut [f64]| o[0] = (x - 0.3).abs();
        let r = integrate_interval(f, 0.0, 1.0, &[0.3], 1, &cfg);
        assert!((r.values[0] - (0.045 + 0.245)).abs() < 1e-14);
        let r2 = integrate_interval(f, 0.0, 1.0, &[], 1, &cfg);
        assert!((r2.values[0] - 0.29).abs() < 1e-11);
    }

    #[test]
    fn half_line_power_tail() {
        let cfg = QuadratureConfig::relative(1e-10);
        let r = integrate_half_line(|x, o: &mut [f64]| o[0] = (1.0 + x).powi(-6), 0.0, &[], 1, &cfg);
        assert!((r.values[0] - 0.2).abs() < 1e-10);
    }

    #[test]
    fn components_share_nodes_and_keep_order() {
        let cfg = QuadratureConfig::relative(1e-8);
        let f = |x: f64, o: &mut [f64]| {
            let a = 1.0 / (1.0 + x.abs());
            o[0] = a.powi(3);
            o[1] = a.powi(4);
        };
        let r = integrate_line(f, &[0.0], 2, &cfg);
        assert!(r.values[1] <= r.values[0]);
        assert!((r.values[0] - 1.0).abs() < 1e-7);
        assert!((r.values[1] - 2.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn reports_failure_when_budget_exhausted() {
        let cfg = QuadratureConfig {
            abs_tol: 0.0,
            rel_tol: 1e-15,
            max_intervals: 3,
        };
        let r = integrate_scalar(|x| (1.0 / x).sin() * x.sqrt(), 1e-6, 1.0, &cfg);
        assert!(!r.converged);
    }
}
