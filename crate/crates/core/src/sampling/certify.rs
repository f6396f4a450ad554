//! Separation and density certificates.
//!
//! `z_i U ∩ z_j U ≠ ∅` iff `z_j⁻¹ z_i ∈ U U⁻¹`. Writing `z_j⁻¹ z_i = (y, k)`,
//! this holds iff `k ∈ W W⁻¹` and `y ∈ V + kV`; the latter is decided exactly
//! by the distance from `y` to the ellipsoid `k V`.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

use super::{Construction, DensityCertificate, Neighborhood, SamplingSet, SeparationCertificate, Window, TOUCH};
use crate::error::{check_dim, Error, Result};
use crate::groups::{AffinePoint, DilationGroupSpec, Family, GroupElement, Rotation, RotationList};
use crate::par::Execution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub separated: bool,
    /// Lexicographically first overlapping pair `(i, j)`, `i < j`.
    pub witness: Option<(usize, usize)>,
    pub pairs_tested: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub dense: bool,
    /// First test point (in generation order) outside every `z_i U`, as `(x, params)`.
    pub uncovered: Option<(Vec<f64>, Vec<f64>)>,
    pub test_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    /// Lattice nodes per window axis (endpoints included).
    pub lattice_per_axis: usize,
    /// Additional uniformly random test points.
    pub monte_carlo: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            lattice_per_axis: 9,
            monte_carlo: 2000,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

/// Euclidean distance from `y` to the ellipsoid `k B̄(ρ)`.
fn dist_to_ellipsoid(y: &Vector3<f64>, k: &Matrix3<f64>, kinv: &Matrix3<f64>, rho: f64) -> f64 {
    if (kinv * y).norm() <= rho {
        return 0.0;
    }
    let ktk = k.tr_mul(k);
    let kty = k.tr_mul(y);
    let w_of = |lambda: f64| {
        (ktk + Matrix3::identity() * lambda)
            .try_inverse()
            .map(|m| m * kty)
            .unwrap_or_else(Vector3::zeros)
    };
    let (mut lo, mut hi) = (0.0, kty.norm() / rho);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if w_of(mid).norm() > rho {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    (y - k * w_of(hi)).norm()
}

/// Whether `z_i U ∩ z_j U ≠ ∅`.
pub(crate) fn overlaps(zi: &AffinePoint, zj: &AffinePoint, u: &Neighborhood) -> Result<bool> {
    let k = zj.h.inverse().compose(&zi.h)?;
    if !u.contains_quotient(&k) {
        return Ok(false);
    }
    let dx: Vec<f64> = zi.x.iter().zip(&zj.x).map(|(a, b)| a - b).collect();
    let y = zj.h.apply_inverse(&dx);
    let rho = u.translation_radius;
    Ok(dist_to_ellipsoid(&y, k.matrix(), k.inverse_matrix(), rho) < rho * (1.0 - TOUCH))
}

type Cell = [i64; 3];

fn cell_of(x: &[f64], size: f64) -> Cell {
    let mut c = [0; 3];
    for (ci, xi) in c.iter_mut().zip(x) {
        *ci = (xi / size).floor() as i64;
    }
    c
}

fn neighbours(c: Cell, dim: usize) -> Vec<Cell> {
    let mut out = vec![c];
    for axis in 0..dim {
        let mut next = Vec::with_capacity(out.len() * 3);
        for base in &out {
            for off in -1..=1 {
                let mut n = *base;
                n[axis] += off;
                next.push(n);
            }
        }
        out = next;
    }
    out
}

struct SpatialHash {
    size: f64,
    cells: HashMap<Cell, Vec<usize>>,
}

impl SpatialHash {
    fn new(points: &[AffinePoint], indices: &[usize], size: f64) -> Self {
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for &i in indices {
            cells.entry(cell_of(&points[i].x, size)).or_default().push(i);
        }
        Self { size, cells }
    }

    fn near(&self, x: &[f64], dim: usize) -> impl Iterator<Item = usize> + '_ {
        neighbours(cell_of(x, self.size), dim)
            .into_iter()
            .filter_map(|c| self.cells.get(&c))
            .flat_map(|v| v.iter().copied())
    }
}

/// Exact pairwise test of `z_i U ∩ z_j U = ∅` for all `i ≠ j`.
pub fn certify_separated(set: &SamplingSet, u: &Neighborhood) -> Result<SeparationReport> {
    certify_separated_with(set, u, Execution::default())
}

pub fn certify_separated_with(set: &SamplingSet, u: &Neighborhood, exec: Execution) -> Result<SeparationReport> {
    let slices = set.slices();
    let points = set.points();
    let dim = set.dim();
    let rho = u.translation_radius;
    let pairs: Vec<(usize, usize)> = (0..slices.len()).flat_map(|a| (a..slices.len()).map(move |b| (a, b))).collect();
    let results = exec.map(&pairs, |&(a, b)| -> Result<(Option<(usize, usize)>, usize)> {
        let (sa, sb) = (&slices[a], &slices[b]);
        let k = sb.h.inverse().compose(&sa.h)?;
        if !u.contains_quotient(&k) {
            return Ok((None, 0));
        }
        let reach = rho * (1.0 + k.opnorm()) * sb.h.opnorm();
        let hash = SpatialHash::new(points, &sa.indices, reach);
        let mut first: Option<(usize, usize)> = None;
        let mut tested = 0;
        for &j in &sb.indices {
            for i in hash.near(&points[j].x, dim) {
                if i == j || (a == b && i > j) {
                    continue;
                }
                tested += 1;
                if overlaps(&points[i], &points[j], u)? {
                    let pair = (i.min(j), i.max(j));
                    if first.is_none_or(|f| pair < f) {
                        first = Some(pair);
                    }
                }
            }
        }
        Ok((first, tested))
    });
    let mut witness: Option<(usize, usize)> = None;
    let mut pairs_tested = 0;
    for r in results {
        let (w, t) = r?;
        pairs_tested += t;
        if let Some(p) = w {
            if witness.is_none_or(|f| p < f) {
                witness = Some(p);
            }
        }
    }
    Ok(SeparationReport {
        separated: witness.is_none(),
        witness,
        pairs_tested,
    })
}

/// Number of `H`-coordinates spanned by a lattice axis.
fn h_axes(spec: &DilationGroupSpec) -> usize {
    match spec.family {
        Family::Similitude => 1 + usize::from(spec.dim == 2),
        Family::Diagonal => spec.dim,
        Family::Shearlet => 2,
    }
}

fn axis_nodes(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    if hi <= lo || m <= 1 {
        return vec![lo];
    }
    (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect()
}

/// Builds a test point from window coordinates `[x..., h-coords...]`.
fn assemble(spec: &DilationGroupSpec, coords: &[f64], sign: f64, rotation: Option<Rotation>) -> Result<AffinePoint> {
    let d = spec.dim;
    let x = coords[..d].to_vec();
    let hc = &coords[d..];
    let h = match spec.family {
        Family::Similitude => match d {
            1 => GroupElement::new(*spec, &[sign * hc[0].exp()])?,
            2 => GroupElement::new(*spec, &[hc[0].exp(), hc[1]])?,
            _ => GroupElement::similitude(hc[0].exp(), rotation.unwrap_or(Rotation::identity(3)?))?,
        },
        Family::Diagonal => {
            let p: Vec<f64> = hc
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let s = if i == 0 { sign } else { 1.0 };
                    s * v.exp()
                })
                .collect();
            GroupElement::new(*spec, &p)?
        }
        Family::Shearlet => GroupElement::new(*spec, &[sign * hc[0].exp(), hc[1]])?,
    };
    AffinePoint::new(x, h)
}

fn window_ranges(spec: &DilationGroupSpec, w: &Window) -> Result<Vec<(f64, f64)>> {
    check_dim(spec.dim, w.x_min.len())?;
    check_dim(spec.dim, w.x_max.len())?;
    let mut ranges: Vec<(f64, f64)> = w.x_min.iter().zip(&w.x_max).map(|(a, b)| (*a, *b)).collect();
    match spec.family {
        Family::Similitude => {
            ranges.push(w.log_scale);
            if spec.dim == 2 {
                ranges.push((-PI, PI));
            }
        }
        Family::Diagonal => ranges.extend(std::iter::repeat_n(w.log_scale, spec.dim)),
        Family::Shearlet => {
            ranges.push(w.log_scale);
            ranges.push(w.aux);
        }
    }
    if ranges.iter().any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
        return Err(Error::Domain("window ranges must be finite and ordered".into()));
    }
    Ok(ranges)
}

/// Lattice test points of the window followed by `monte_carlo` seeded random points.
pub(crate) fn window_points(spec: &DilationGroupSpec, w: &Window, opts: &DensityOptions) -> Result<Vec<AffinePoint>> {
    let ranges = window_ranges(spec, w)?;
    debug_assert_eq!(ranges.len(), spec.dim + h_axes(spec));
    let signs: &[f64] = if w.both_signs { &[1.0, -1.0] } else { &[1.0] };
    let rotations: Vec<Option<Rotation>> = if spec.family == Family::Similitude && spec.dim == 3 {
        RotationList::so3(2.0 * 3f64.sqrt())?.rotations.into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let nodes: Vec<Vec<f64>> = ranges.iter().map(|(a, b)| axis_nodes(*a, *b, opts.lattice_per_axis)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; nodes.len()];
    'outer: loop {
        let coords: Vec<f64> = idx.iter().zip(&nodes).map(|(i, n)| n[*i]).collect();
        for &s in signs {
            for r in &rotations {
                out.push(assemble(spec, &coords, s, *r)?);
            }
        }
        let mut axis = nodes.len();
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < nodes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.monte_carlo {
        let coords: Vec<f64> = ranges
            .iter()
            .map(|(a, b)| if b > a { rng.random_range(*a..*b) } else { *a })
            .collect();
        let s = signs[rng.random_range(0..signs.len())];
        let r = if rotations[0].is_some() {
            Some(Rotation::random(3, &mut rng)?)
        } else {
            None
        };
        out.push(assemble(spec, &coords, s, r)?);
    }
    Ok(out)
}

/// Verifies `window ⊂ ⋃ z_i U` on lattice and Monte-Carlo test points.
pub fn certify_dense(set: &SamplingSet, u: &Neighborhood, window: &Window) -> Result<DensityReport> {
    certify_dense_with(set, u, window, &DensityOptions::default())
}

pub fn certify_dense_with(set: &SamplingSet, u: &Neighborhood, window: &Window, opts: &DensityOptions) -> Result<DensityReport> {
    let spec = set.spec();
    let tests = window_points(spec, window, opts)?;
    let slices = set.slices();
    let points = set.points();
    let rho = u.translation_radius;
    let hashes: Vec<SpatialHash> = slices
        .iter()
        .map(|s| SpatialHash::new(points, &s.indices, rho * s.h.opnorm()))
        .collect();
    let inverses: Vec<GroupElement> = slices.iter().map(|s| s.h.inverse()).collect();
    let covered = opts.exec.map(&tests, |g| -> Result<bool> {
        for (s, hinv) in inverses.iter().enumerate() {
            if !u.contains_dilation(&hinv.compose(&g.h)?) {
                continue;
            }
            for i in hashes[s].near(&g.x, spec.dim) {
                let dx: Vec<f64> = g.x.iter().zip(&points[i].x).map(|(a, b)| a - b).collect();
                if hinv.apply(&dx).norm() < rho {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    });
    let mut uncovered = None;
    for (g, c) in tests.iter().zip(covered) {
        if !c? {
            uncovered = Some((g.x.clone(), g.h.params().to_vec()));
            break;
        }
    }
    Ok(DensityReport {
        dense: uncovered.is_none(),
        uncovered,
        test_points: tests.len(),
    })
}

impl SamplingSet {
    /// Runs [`certify_separated`] and records the certificate on success.
    pub fn certify_separation(&mut self, u: &Neighborhood) -> Result<SeparationReport> {
        let report = certify_separated(self, u)?;
        self.separation_certificate = report.separated.then_some(SeparationCertificate { neighborhood: *u });
        Ok(report)
    }

    /// Runs [`certify_dense_with`] and records the certificate on success.
    pub fn certify_density(&mut self, u: &Neighborhood, window: &Window, opts: &DensityOptions) -> Result<DensityReport> {
        let report = certify_dense_with(self, u, window, opts)?;
        self.density_certificate = report.dense.then(|| DensityCertificate {
            neighborhood: *u,
            window: window.clone(),
            test_points: report.test_points,
        });
        Ok(report)
    }
}

/// Greedy maximal `U`-separated extension of `seed` by the window's lattice nodes.
///
/// Every candidate is either kept or lies in some `z_i U U⁻¹`, so the result is
/// `U U⁻¹`-dense on the candidate lattice.
pub fn greedy_separated_extension(
    seed: Option<&SamplingSet>,
    spec: DilationGroupSpec,
    u: &Neighborhood,
    window: &Window,
    lattice_per_axis: usize,
) -> Result<SamplingSet> {
    let opts = DensityOptions {
        lattice_per_axis,
        monte_carlo: 0,
        ..DensityOptions::default()
    };
    let candidates = window_points(&spec, window, &opts)?;
    let mut chosen: Vec<AffinePoint> = seed.map(|s| s.points().to_vec()).unwrap_or_default();
    for c in candidates {
        let mut free = true;
        for z in &chosen {
            if overlaps(&c, z, u)? {
                free = false;
                break;
            }
        }
        if free {
            chosen.push(c);
        }
    }
    SamplingSet::new(spec, chosen, Construction::Generic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{build_product_grid, build_rotation_scale_grid, Lattice, TranslationRange};

    fn integers(step: f64, m: i64) -> SamplingSet {
        let spec = DilationGroupSpec::similitude(1);
        build_product_grid(&[GroupElement::identity(spec).unwrap()], &Lattice::cubic(1, step, m).unwrap(), None).unwrap()
    }

    #[test]
    fn integers_are_separated() {
        let u = Neighborhood::new(0.5, 0.1, 0.0).unwrap();
        let r = certify_separated(&integers(1.0, 20), &u).unwrap();
        assert!(r.separated, "{r:?}");
        let r = certify_separated(&integers(1.0, 20), &Neighborhood::new(0.51, 0.1, 0.0).unwrap()).unwrap();
        assert!(!r.separated);
    }

    #[test]
    fn duplicate_point_is_reported() {
        let spec = DilationGroupSpec::similitude(1);
        let id = GroupElement::identity(spec).unwrap();
        let pts = vec![
            AffinePoint::new(vec![0.0], id.clone()).unwrap(),
            AffinePoint::new(vec![1.0], id.clone()).unwrap(),
            AffinePoint::new(vec![1.0], id).unwrap(),
        ];
        let set = SamplingSet::with_duplicates(spec, pts).unwrap();
        let r = certify_separated(&set, &Neighborhood::new(0.4, 0.1, 0.0).unwrap()).unwrap();
        assert_eq!(r.witness, Some((1, 2)));
    }

    #[test]
    fn integers_dense_even_integers_not() {
        let u = Neighborhood::new(0.6, 0.1, 0.0).unwrap();
        let w = Window::translations(vec![-10.0], vec![10.0]);
        assert!(certify_dense(&integers(1.0, 12), &u, &w).unwrap().dense);
        let r = certify_dense(&integers(2.0, 6), &u, &w).unwrap();
        assert!(!r.dense);
        let x = r.uncovered.unwrap().0[0];
        let nearest_odd = (x - 1.0) / 2.0;
        assert!((nearest_odd - nearest_odd.round()).abs() < 0.2 / 2.0, "x = {x}");
    }

    #[test]
    fn rotation_scale_grid_separated_and_dense() {
        let spec = DilationGroupSpec::similitude(2);
        let (d1, d2) = (0.5, 0.5);
        let rot = RotationList::so2(0.3).unwrap();
        let set = build_rotation_scale_grid(spec, d1, d2, &rot, -3..=3, &TranslationRange::Window { length: 12.0 }).unwrap();
        let u = Neighborhood::new(d2 / 2.0, (1.0 + d1).ln() / 2.0, rot.covering_radius).unwrap();
        assert!(certify_separated(&set, &u).unwrap().separated);
        let dense_u = Neighborhood::new(d2 * 0.75, (1.0 + d1).ln() * 0.51, rot.covering_radius * 1.01).unwrap();
        let w = Window {
            x_min: vec![-1.0, -1.0],
            x_max: vec![1.0, 1.0],
            log_scale: (-0.8, 0.8),
            aux: (0.0, 0.0),
            both_signs: false,
        };
        let opts = DensityOptions {
            lattice_per_axis: 5,
            monte_carlo: 500,
            ..DensityOptions::default()
        };
        let r = certify_dense_with(&set, &dense_u, &w, &opts).unwrap();
        assert!(r.dense, "{r:?}");
        let sparse = build_rotation_scale_grid(
            spec,
            d1,
            d2,
            &RotationList::so2(1.0).unwrap(),
            -3..=3,
            &TranslationRange::Window { length: 12.0 },
        )
        .unwrap();
        assert!(!certify_dense_with(&sparse, &dense_u, &w, &opts).unwrap().dense);
    }

    #[test]
    fn shearlet_overlap_agrees_with_sampling() {
        let spec = DilationGroupSpec::shearlet(0.5);
        let u = Neighborhood::new(0.5, 0.2, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let elt = |rng: &mut ChaCha8Rng, s: f64| {
            AffinePoint::new(
                vec![rng.random_range(-s..s), rng.random_range(-s..s)],
                GroupElement::new(spec, &[rng.random_range(-0.5..0.5f64).exp(), rng.random_range(-0.6..0.6)]).unwrap(),
            )
            .unwrap()
        };
        let unit = |rng: &mut ChaCha8Rng| {
            let r = u.translation_radius * rng.random_range(0.0..1.0f64).sqrt();
            let t = rng.random_range(0.0..2.0 * PI);
            AffinePoint::new(
                vec![r * t.cos(), r * t.sin()],
                GroupElement::new(spec, &[rng.random_range(-0.2..0.2f64).exp(), rng.random_range(-0.3..0.3)]).unwrap(),
            )
            .unwrap()
        };
        for _ in 0..200 {
            let (zi, zj) = (elt(&mut rng, 1.5), elt(&mut rng, 1.5));
            let predicted = overlaps(&zi, &zj, &u).unwrap();
            let mut found = false;
            for _ in 0..3000 {
                let g = zi.compose(&unit(&mut rng)).unwrap();
                let back = zj.invert().compose(&g).unwrap();
                let r = (back.x[0].powi(2) + back.x[1].powi(2)).sqrt();
                if r < u.translation_radius && u.contains_dilation(&back.h) {
                    found = true;
                    break;
                }
            }
            if found {
                assert!(predicted, "sampled a common point but overlap test says disjoint");
            }
        }
    }

    #[test]
    fn greedy_extension_is_separated_and_dense() {
        let spec = DilationGroupSpec::shearlet(0.5);
        let u = Neighborhood::new(0.4, 0.15, 0.2).unwrap();
        let w = Window {
            x_min: vec![-1.0, -1.0],
            x_max: vec![1.0, 1.0],
            log_scale: (-0.5, 0.5),
            aux: (-0.5, 0.5),
            both_signs: false,
        };
        let set = greedy_separated_extension(None, spec, &u, &w, 7).unwrap();
        assert!(certify_separated(&set, &u).unwrap().separated);
        let slack = Neighborhood::new(u.translation_radius + 0.4, u.log_scale + 0.1, u.aux + 0.1).unwrap();
        let hull = slack.product_hull(&spec);
        let opts = DensityOptions {
            lattice_per_axis: 4,
            monte_carlo: 500,
            ..DensityOptions::default()
        };
        let r = certify_dense_with(&set, &hull, &w, &opts).unwrap();
        assert!(r.dense, "{r:?}");
    }
}
