//! Greedy n-term approximation in a frame and the `ℓ^p` summability diagnostic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::frames::{FrameReport, FrameSystem};

/// Relative size below which a new atom is treated as linearly dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Atoms ordered once by the magnitude of the canonical dual coefficients.
    LargestDualCoeff,
    /// Orthogonal matching pursuit: the atom best correlated with the current residual.
    OmpLite,
}

/// Error curve `E_n` of a greedy approximation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxCurve {
    pub n_values: Vec<usize>,
    /// `E_n` in L² units, one per entry of `n_values`.
    pub errors: Vec<f64>,
    pub p: f64,
    /// `(Σ_n n^{-p/2} E_n^p)^{1/p}` over the computed range.
    pub summability_lhs: f64,
    /// `‖c‖_p` of the canonical dual coefficients.
    pub coeff_p_norm: f64,
    /// Selected atoms in order.
    pub selected: Vec<usize>,
    pub warnings: Vec<String>,
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn p_norm(values: &[Complex64], p: f64) -> f64 {
    values.iter().map(|c| c.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(Σ_{n} n^{-p/2} E_n^p)^{1/p}`.
pub fn summability_sum(n_values: &[usize], errors: &[f64], p: f64) -> f64 {
    n_values
        .iter()
        .zip(errors)
        .map(|(&n, e)| (n as f64).powf(-p / 2.0) * e.powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Incrementally orthonormalized span of selected atoms.
struct Span {
    basis: Vec<Vec<Complex64>>,
    residual: Vec<Complex64>,
}

impl Span {
    fn new(target: &[Complex64]) -> Self {
        Self {
            basis: Vec::new(),
            residual: target.to_vec(),
        }
    }

    /// Adds an atom; returns `false` when it is numerically dependent on the span.
    fn push(&mut self, atom: &[Complex64]) -> bool {
        let size = norm(atom);
        let mut w = atom.to_vec();
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let r = norm(&w);
        if size == 0.0 || r <= RANK_TOL * size {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= r);
        let c = dot(&self.residual, &w);
        self.residual.iter_mut().zip(&w).for_each(|(x, y)| *x -= c * y);
        self.basis.push(w);
        true
    }

    fn error(&self) -> f64 {
        norm(&self.residual)
    }
}

impl FrameSystem {
    /// Canonical dual coefficients `⟨S⁻¹u, π(z_i)ψ⟩`.
    pub fn dual_coefficients(&self, u: &[Complex64], report: &FrameReport, tol: f64) -> Result<Vec<Complex64>> {
        let (g, _, _) = self.solve(u, report.ratio(), tol)?;
        self.analyze(&g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxOptions {
    pub strategy: Strategy,
    pub p: f64,
    /// Conjugate-gradient tolerance for the dual coefficients.
    pub cg_tol: f64,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::LargestDualCoeff,
            p: 1.5,
            cg_tol: 1e-10,
        }
    }
}

/// Greedy n-term approximation of `u` (test-space coordinates) for `n = 1..=n_max`.
///
/// Each `E_n` is the distance from `u` to the span of the first `n` selected atoms,
/// an upper bound for the best n-term error.
pub fn greedy_n_term(sys: &FrameSystem, u: &[Complex64], report: &FrameReport, n_max: usize, opts: &ApproxOptions) -> Result<ApproxCurve> {
    check_dim(sys.space().len(), u.len())?;
    if n_max == 0 || n_max > sys.len() {
        return Err(Error::Domain(format!("n_max must lie in 1..={}, got {n_max}", sys.len())));
    }
    if !(opts.p >= 1.0) {
        return Err(Error::Domain(format!("p = {} below 1", opts.p)));
    }
    let dual = sys.dual_coefficients(u, report, opts.cg_tol)?;
    let mut span = Span::new(u);
    let mut selected = Vec::with_capacity(n_max);
    let mut taken = vec![false; sys.len()];
    let mut errors = Vec::with_capacity(n_max);
    let mut warnings = Vec::new();
    let order: Vec<usize> = match opts.strategy {
        Strategy::LargestDualCoeff => {
            let mut idx: Vec<usize> = (0..sys.len()).collect();
            idx.sort_by(|&a, &b| dual[b].norm().total_cmp(&dual[a].norm()).then(a.cmp(&b)));
            idx
        }
        Strategy::OmpLite => Vec::new(),
    };
    let norms: Vec<f64> = match opts.strategy {
        Strategy::OmpLite => (0..sys.len()).map(|i| sys.atom(i).map(|a| norm(&a))).collect::<Result<_>>()?,
        Strategy::LargestDualCoeff => Vec::new(),
    };
    for n in 1..=n_max {
        let pick = match opts.strategy {
            Strategy::LargestDualCoeff => order[n - 1],
            Strategy::OmpLite => {
                let corr = sys.analyze(&span.residual)?;
                let mut best: Option<(usize, f64)> = None;
                for (i, c) in corr.iter().enumerate() {
                    if taken[i] || norms[i] == 0.0 {
                        continue;
                    }
                    let score = c.norm() / norms[i];
                    if best.is_none_or(|(_, s)| score > s) {
                        best = Some((i, score));
                    }
                }
                match best {
                    Some((i, _)) => i,
                    None => (0..sys.len()).find(|&i| !taken[i]).unwrap_or(0),
                }
            }
        };
        taken[pick] = true;
        selected.push(pick);
        if !span.push(&sys.atom(pick)?) {
            warnings.push(format!(
                "atom {pick} is linearly dependent on the selection at n = {n}; kept the previous fit"
            ));
        }
        errors.push(span.error());
    }
    let n_values: Vec<usize> = (1..=n_max).collect();
    Ok(ApproxCurve {
        summability_lhs: summability_sum(&n_values, &errors, opts.p),
        coeff_p_norm: p_norm(&dual, opts.p),
        n_values,
        errors,
        p: opts.p,
        selected,
        warnings,
    })
}

/// Largest set size accepted by [`exhaustive_errors`].
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Exact best n-term errors `E_n`, `n = 1..=|Z|`, by search over all subsets.
pub fn exhaustive_errors(atoms: &[Vec<Complex64>], u: &[Complex64]) -> Result<Vec<f64>> {
    let m = atoms.len();
    if m == 0 || m > EXHAUSTIVE_LIMIT {
        return Err(Error::Domain(format!(
            "exhaustive search needs 1..={EXHAUSTIVE_LIMIT} atoms, got {m}"
        )));
    }
    let dim = u.len();
    for a in atoms {
        check_dim(dim, a.len())?;
    }
    let target = DVector::from_column_slice(u);
    let mut best = vec![norm(u); m + 1];
    for mask in 1u32..(1 << m) {
        let cols: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let a = DMatrix::from_fn(dim, cols.len(), |r, c| atoms[cols[c]][r]);
        let svd = a.svd(true, false);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            continue;
        }
        let u_mat = svd.u.as_ref().ok_or_else(|| Error::Condition("SVD did not return U".into()))?;
        let mut residual = target.clone();
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s > RANK_TOL * smax {
                let q = u_mat.column(k);
                let c = q.dotc(&residual);
                residual -= q * c;
            }
        }
        let e = residual.norm();
        best[cols.len()] = best[cols.len()].min(e);
    }
    Ok(best[1..].to_vec())
}

/// Outcome of the `ℓ^p` summability diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub lhs: f64,
    pub rhs_norm: f64,
    pub fitted_c: f64,
    pub finite: bool,
}

/// Compares `(Σ n^{-p/2} E_n^p)^{1/p}` with `‖c‖_p` for `p ∈ [1, 2)`.
pub fn summability_check(curve: &ApproxCurve, coeffs: &[Complex64], p: f64) -> Result<SummabilityReport> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [1, 2)")));
    }
    let lhs = summability_sum(&curve.n_values, &curve.errors, p);
    let rhs_norm = p_norm(coeffs, p);
    Ok(SummabilityReport {
        lhs,
        rhs_norm,
        fitted_c: if rhs_norm > 0.0 { lhs / rhs_norm } else { 0.0 },
        finite: lhs.is_finite(),
    })
}

/// Fitted constants for truncations of `curve` at each `n_max`, and whether they
/// stay within `rel` of the final one.
pub fn summability_stability(
    curve: &ApproxCurve,
    coeffs: &[Complex64],
    p: f64,
    n_maxes: &[usize],
    rel: f64,
) -> Result<(Vec<SummabilityReport>, bool)> {
    let mut reports = Vec::with_capacity(n_maxes.len());
    for &n in n_maxes {
        let k = curve.n_values.iter().take_while(|&&v| v <= n).count();
        let truncated = ApproxCurve {
            n_values: curve.n_values[..k].to_vec(),
            errors: curve.errors[..k].to_vec(),
            ..curve.clone()
        };
        reports.push(summability_check(&truncated, coeffs, p)?);
    }
    let stable = match reports.last() {
        Some(last) => reports
            .iter()
            .all(|r| r.finite && (r.fitted_c - last.fitted_c).abs() <= rel * last.fitted_c.max(f64::MIN_POSITIVE)),
        None => false,
    };
    Ok((reports, stable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::build_atom;
    use crate::bump::build_bump;
    use crate::frames::{FrameOptions, TestSpace};
    use crate::grid::GridSpec;
    use crate::groups::{DilationGroupSpec, GroupElement};
    use crate::orbit::OrbitGeometry;
    use crate::par::Execution;
    use crate::sampling::build_sliced;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_system() -> FrameSystem {
        let spec = DilationGroupSpec::similitude(1);
        let rho = build_bump(Default::default(), 1.0, &GridSpec::centered(1, 128, 1.0 / 32.0).unwrap()).unwrap();
        let psi = build_atom(&rho, &OrbitGeometry::new(spec).unwrap(), 2).unwrap();
        let grid = GridSpec::centered(1, 16, 0.25).unwrap();
        let space = TestSpace::with_filter(grid, |xi| (0.25..=0.75).contains(&xi[0].abs())).unwrap();
        let hs = [GroupElement::new(spec, &[0.8]).unwrap(), GroupElement::new(spec, &[0.5]).unwrap()];
        let xs: Vec<Vec<Vec<f64>>> = (0..2).map(|_| (0..8).map(|k| vec![-2.0 + 0.5 * k as f64]).collect()).collect();
        let set = build_sliced(&hs, &xs).unwrap();
        FrameSystem::from_sampled(&psi, &set, space, Execution::Sequential).unwrap()
    }

    fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn single_atom_is_exact_after_one_term() {
        let sys = small_system();
        let report = sys.bounds(&FrameOptions::default()).unwrap();
        let u = sys.atom(5).unwrap();
        for strategy in [Strategy::OmpLite, Strategy::LargestDualCoeff] {
            let opts = ApproxOptions {
                strategy,
                ..ApproxOptions::default()
            };
            let curve = greedy_n_term(&sys, &u, &report, 4, &opts).unwrap();
            if strategy == Strategy::OmpLite {
                assert!(curve.errors[0] < 1e-10 * norm(&u), "{:?}", curve.errors);
                let s = summability_check(&curve, &[Complex64::new(1.0, 0.0)], 1.5).unwrap();
                assert!(s.lhs < 1e-9);
            }
            assert!(curve.errors.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn greedy_dominates_exhaustive_and_matches_at_ends() {
        let sys = small_system();
        let report = sys.bounds(&FrameOptions::default()).unwrap();
        let atoms: Vec<_> = (0..sys.len()).map(|i| sys.atom(i).unwrap()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random(sys.space().len(), &mut rng);
        let opts = ApproxOptions {
            strategy: Strategy::OmpLite,
            ..ApproxOptions::default()
        };
        let curve = greedy_n_term(&sys, &u, &report, sys.len(), &opts).unwrap();
        let exact = exhaustive_errors(&atoms, &u).unwrap();
        for (e, g) in exact.iter().zip(&curve.errors) {
            assert!(*e <= g + 1e-10);
        }
        assert!((exact[0] - curve.errors[0]).abs() < 1e-8);
        assert!((exact[sys.len() - 1] - curve.errors[sys.len() - 1]).abs() < 1e-8);
    }

    #[test]
    fn two_separated_atoms() {
        let spec = DilationGroupSpec::similitude(1);
        let rho = build_bump(Default::default(), 1.0, &GridSpec::centered(1, 128, 1.0 / 32.0).unwrap()).unwrap();
        let psi = build_atom(&rho, &OrbitGeometry::new(spec).unwrap(), 2).unwrap();
        let grid = GridSpec::centered(1, 128, 0.125).unwrap();
        let space = TestSpace::with_filter(grid, |xi| (0.3..=1.5).contains(&xi[0].abs())).unwrap();
        let hs: Vec<GroupElement> = (-2..=2).map(|j| GroupElement::new(spec, &[1.5f64.powi(j)]).unwrap()).collect();
        let xs: Vec<Vec<Vec<f64>>> = hs
            .iter()
            .map(|h| {
                let step = 0.5 * h.scale();
                let n = (8.0 / step).floor() as i64;
                (-n..n).map(|k| vec![k as f64 * step]).collect()
            })
            .collect();
        let set = build_sliced(&hs, &xs).unwrap();
        let sys = FrameSystem::from_sampled(&psi, &set, space, Execution::Sequential).unwrap();
        let report = sys.bounds(&FrameOptions::default()).unwrap();
        let near = |x: f64| set.points().iter().position(|p| p.h == hs[2] && (p.x[0] - x).abs() < 1e-9).unwrap();
        let (a, b) = (sys.atom(near(-6.0)).unwrap(), sys.atom(near(5.0)).unwrap());
        let u: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * 2.0 + y * 0.5).collect();
        let opts = ApproxOptions {
            strategy: Strategy::OmpLite,
            ..ApproxOptions::default()
        };
        let curve = greedy_n_term(&sys, &u, &report, 3, &opts).unwrap();
        assert!(curve.errors[1] < 1e-8 * norm(&u), "{:?}", curve.errors);
        assert!((curve.errors[0] - 0.5 * norm(&b)).abs() < 1e-3 * norm(&b));
    }

    #[test]
    fn domain_errors() {
        let sys = small_system();
        let report = sys.bounds(&FrameOptions::default()).unwrap();
        let u = sys.atom(0).unwrap();
        let curve = greedy_n_term(&sys, &u, &report, 2, &ApproxOptions::default()).unwrap();
        assert!(summability_check(&curve, &[], 2.0).is_err());
        assert!(summability_check(&curve, &[], 0.5).is_err());
        assert!(greedy_n_term(&sys, &u, &report, sys.len() + 1, &ApproxOptions::default()).is_err());
        assert!(exhaustive_errors(&vec![vec![Complex64::new(1.0, 0.0)]; 17], &[Complex64::new(1.0, 0.0)]).is_err());
    }
}
