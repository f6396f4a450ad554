//! Continuous-frequency evaluation of `ψ̂` for sampled functions.
//!
//! Tagged functions use their closed form. Untagged ones use the DTFT of the
//! samples, tabulated on an oversampled FFT grid and read back by tensor
//! Lagrange interpolation.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::bump::{lagrange_uniform, ClosedForm};
use crate::grid::{fft_nd, SampledFunction};

/// Anything whose Fourier transform `∫ f(x) e^{-2πi⟨ξ,x⟩} dx` can be evaluated pointwise.
pub trait FourierSource: Send + Sync {
    fn dim(&self) -> usize;
    fn fourier(&self, xi: &[f64]) -> Complex64;
}

impl FourierSource for ClosedForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn fourier(&self, xi: &[f64]) -> Complex64 {
        ClosedForm::fourier(self, xi)
    }
}

const OVERSAMPLE: usize = 8;
const LAGRANGE_ORDER: usize = 12;

/// Tabulated DTFT `Δ^d Σ_n f_n e^{-2πi⟨ξ, x_n⟩}`, restricted to the Nyquist band
/// (the Fourier transform of the trigonometric interpolant).
#[derive(Clone, Debug)]
pub struct DtftTable {
    dim: usize,
    spacing: Vec<f64>,
    extents: Vec<usize>,
    table_extents: Vec<usize>,
    centre: Vec<f64>,
    table: Vec<Complex64>,
}

impl DtftTable {
    pub fn new(f: &SampledFunction) -> Self {
        let d = f.dim();
        let g = &f.grid;
        let table_extents: Vec<usize> = g.extents.iter().map(|n| n * OVERSAMPLE).collect();
        let total: usize = table_extents.iter().product();
        let mut buf = vec![Complex64::new(0.0, 0.0); total];
        for (i, z) in f.samples.iter().enumerate() {
            let idx = g.unravel(i);
            let flat = idx[..d].iter().zip(&table_extents).fold(0, |acc, (i, n)| acc * n + i);
            buf[flat] = *z;
        }
        fft_nd(&mut buf, &table_extents, false);
        let centre = (0..d)
            .map(|a| g.origin[a] + (g.extents[a] - 1) as f64 / 2.0 * g.spacing[a])
            .collect();
        Self {
            dim: d,
            spacing: g.spacing.clone(),
            extents: g.extents.clone(),
            table_extents,
            centre,
            table: buf,
        }
    }

    /// Table entry `m` (any integer per axis) of the centred trigonometric polynomial.
    fn entry(&self, m: &[i64]) -> Complex64 {
        let mut flat = 0usize;
        let mut phase = 0.0;
        for a in 0..self.dim {
            let big = self.table_extents[a] as i64;
            flat = flat * big as usize + m[a].rem_euclid(big) as usize;
            let c = (self.extents[a] - 1) as f64 / 2.0;
            phase += 2.0 * PI * m[a] as f64 * c / big as f64;
        }
        self.table[flat] * Complex64::from_polar(1.0, phase)
    }
}

impl FourierSource for DtftTable {
    fn dim(&self) -> usize {
        self.dim
    }

    fn fourier(&self, xi: &[f64]) -> Complex64 {
        let d = self.dim;
        let mut u = [0.0; 3];
        let mut phase = 0.0;
        let mut vol = 1.0;
        for a in 0..d {
            if xi[a].abs() * self.spacing[a] > 0.5 {
                return Complex64::new(0.0, 0.0);
            }
            u[a] = xi[a] * self.table_extents[a] as f64 * self.spacing[a];
            phase -= 2.0 * PI * xi[a] * self.centre[a];
            vol *= self.spacing[a];
        }
        let value = match d {
            1 => interp(u[0], |j| self.entry(&[j])),
            2 => interp(u[0], |j| interp(u[1], |k| self.entry(&[j, k]))),
            _ => interp(u[0], |j| interp(u[1], |k| interp(u[2], |l| self.entry(&[j, k, l])))),
        };
        value * Complex64::from_polar(vol, phase)
    }
}

fn interp<F: Fn(i64) -> Complex64>(u: f64, f: F) -> Complex64 {
    let nodes: Vec<(i64, Complex64)> = {
        let start = u.floor() as i64 - (LAGRANGE_ORDER as i64 / 2 - 1);
        (0..LAGRANGE_ORDER as i64).map(|j| (start + j, f(start + j))).collect()
    };
    let re = lagrange_uniform(u, LAGRANGE_ORDER, |j| lookup(&nodes, j).re);
    let im = lagrange_uniform(u, LAGRANGE_ORDER, |j| lookup(&nodes, j).im);
    Complex64::new(re, im)
}

fn lookup(nodes: &[(i64, Complex64)], j: i64) -> Complex64 {
    nodes[(j - nodes[0].0) as usize].1
}

/// Fourier evaluator for a sampled function: closed form when tagged, DTFT table otherwise.
#[derive(Clone, Debug)]
pub enum Spectrum {
    Closed(ClosedForm),
    Table(DtftTable),
}

impl Spectrum {
    pub fn of(f: &SampledFunction) -> Self {
        match &f.tag {
            Some(form) => Spectrum::Closed(form.clone()),
            None => Spectrum::Table(DtftTable::new(f)),
        }
    }

    /// Always uses the sampled values, ignoring any closed-form tag.
    pub fn sampled(f: &SampledFunction) -> Self {
        Spectrum::Table(DtftTable::new(f))
    }
}

impl FourierSource for Spectrum {
    fn dim(&self) -> usize {
        match self {
            Spectrum::Closed(c) => c.dim,
            Spectrum::Table(t) => t.dim,
        }
    }

    fn fourier(&self, xi: &[f64]) -> Complex64 {
        match self {
            Spectrum::Closed(c) => c.fourier(xi),
            Spectrum::Table(t) => t.fourier(xi),
        }
    }
}

/// Direct DTFT `Δ^d Σ_n f_n e^{-2πi⟨ξ, x_n⟩}` (reference evaluator).
pub fn dtft_direct(f: &SampledFunction, xi: &[f64]) -> Complex64 {
    let d = f.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for (i, z) in f.samples.iter().enumerate() {
        if z.re == 0.0 && z.im == 0.0 {
            continue;
        }
        let x = f.grid.point(i);
        let ph: f64 = (0..d).map(|a| xi[a] * x[a]).sum();
        s += z * Complex64::from_polar(1.0, -2.0 * PI * ph);
    }
    s * f.grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::{build_bump, BumpKind};
    use crate::grid::GridSpec;

    #[test]
    fn table_matches_direct_dtft_1d() {
        let grid = GridSpec::new(vec![-1.3], vec![0.05], vec![60]).unwrap();
        let f = SampledFunction::from_fn(grid, |x| Complex64::new((-x[0] * x[0] * 4.0).exp(), x[0].sin()));
        let t = DtftTable::new(&f);
        assert_eq!(t.fourier(&[10.01]), Complex64::new(0.0, 0.0));
        for xi in [0.0, 0.13, -1.77, 3.3, 9.99] {
            let a = t.fourier(&[xi]);
            let b = dtft_direct(&f, &[xi]);
            assert!((a - b).norm() < 1e-9, "xi={xi}: {a} vs {b}");
        }
    }

    #[test]
    fn table_matches_direct_dtft_2d() {
        let grid = GridSpec::new(vec![-0.6, -0.4], vec![0.1, 0.08], vec![12, 10]).unwrap();
        let f = SampledFunction::from_fn(grid, |x| Complex64::new(x[0] - x[1] * x[1], 0.3 * x[0] * x[1]));
        let t = DtftTable::new(&f);
        for xi in [[0.0, 0.0], [0.7, -1.1], [-2.4, 3.9]] {
            assert!((t.fourier(&xi) - dtft_direct(&f, &xi)).norm() < 1e-11);
        }
    }

    #[test]
    fn closed_form_agrees_with_samples() {
        let grid = GridSpec::centered(2, 64, 1.0 / 16.0).unwrap();
        let rho = build_bump(BumpKind::default(), 1.0, &grid).unwrap();
        let closed = Spectrum::of(&rho);
        let sampled = Spectrum::sampled(&rho);
        for xi in [[0.0, 0.0], [0.5, -0.25], [1.5, 2.0]] {
            assert!((closed.fourier(&xi) - sampled.fourier(&xi)).norm() < 1e-9);
        }
    }
}
