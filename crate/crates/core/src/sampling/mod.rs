//! Discrete sampling sets in `G = ℝ^d ⋊ H`: rotation–scale grids, product
//! grids `{(h_j x_k, h_j)}`, and certificates for separation and density.

mod certify;

pub use certify::{
    certify_dense, certify_dense_with, certify_separated, certify_separated_with, greedy_separated_extension, DensityOptions,
    DensityReport, SeparationReport,
};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::ops::RangeInclusive;

use crate::error::{check_dim, Error, Result};
/// Relative slack under which touching closures still count as disjoint.
pub(crate) const TOUCH: f64 = 1e-9;

use crate::groups::{AffinePoint, AffineRecord, DilationGroupSpec, Family, GroupElement, RotationList};

/// A neighbourhood `U = V × W` of the identity.
///
/// `V` is the open translation ball of radius `translation_radius`. `W` is a box
/// in the coordinates in which the Haar measure of `H` factorises:
/// * similitude: `|log r| < log_scale`, rotation angle `< aux`;
/// * diagonal: `|log a_i| < log_scale` for every `i`;
/// * shearlet: `|log a| < log_scale`, `|b| < aux`.
///
/// Scales in `W` are positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub translation_radius: f64,
    pub log_scale: f64,
    #[serde(default)]
    pub aux: f64,
}

impl Neighborhood {
    pub fn new(translation_radius: f64, log_scale: f64, aux: f64) -> Result<Self> {
        if !(translation_radius > 0.0) || !(log_scale > 0.0) || !(aux >= 0.0) {
            return Err(Error::Domain(format!(
                "neighbourhood sizes must be positive, got ({translation_radius}, {log_scale}, {aux})"
            )));
        }
        Ok(Self {
            translation_radius,
            log_scale,
            aux,
        })
    }

    /// Whether `h ∈ W`.
    pub fn contains_dilation(&self, h: &GroupElement) -> bool {
        let p = h.params();
        match h.spec().family {
            Family::Similitude => {
                let scale_ok = p[0] > 0.0 && p[0].ln().abs() < self.log_scale;
                scale_ok && (h.dim() == 1 || h.rotation().map(|r| r.angle()).unwrap_or(0.0) < self.aux)
            }
            Family::Diagonal => p.iter().all(|a| *a > 0.0 && a.ln().abs() < self.log_scale),
            Family::Shearlet => p[0] > 0.0 && p[0].ln().abs() < self.log_scale && p[1].abs() < self.aux,
        }
    }

    /// Whether `k ∈ W W⁻¹`. Pairs whose closures merely touch count as outside.
    pub fn contains_quotient(&self, k: &GroupElement) -> bool {
        let p = k.params();
        let w = 2.0 * self.log_scale * (1.0 - TOUCH);
        let scale_ok = |a: f64| a > 0.0 && a.ln().abs() < w;
        match k.spec().family {
            Family::Similitude => {
                scale_ok(p[0]) && (k.dim() == 1 || k.rotation().map(|r| r.angle()).unwrap_or(0.0) < 2.0 * self.aux * (1.0 - TOUCH))
            }
            Family::Diagonal => p.iter().all(|a| scale_ok(*a)),
            Family::Shearlet => {
                // k = w₂w₁⁻¹ = (κ, α₁^{-c}(β₂ − κβ₁)) with α₁, κα₁ ∈ (e^{-w}, e^{w}).
                let (kappa, lambda) = (p[0], p[1]);
                if !scale_ok(kappa) {
                    return false;
                }
                let w = self.log_scale;
                let c = k.spec().c();
                let lo = (-w).max(-w - kappa.ln());
                let hi = w.min(w - kappa.ln());
                let best = if c >= 0.0 { lo } else { hi };
                lambda.abs() * (c * best).exp() < self.aux * (1.0 + kappa) * (1.0 - TOUCH)
            }
        }
    }

    /// A neighbourhood containing `U U⁻¹`, used to certify density of maximal separated families.
    pub fn product_hull(&self, spec: &DilationGroupSpec) -> Self {
        let w = self.log_scale;
        let c = spec.c().abs();
        let (norm, aux) = match spec.family {
            Family::Shearlet => {
                let shear = self.aux * (1.0 + (2.0 * w).exp()) * (c * w).exp();
                ((2.0 * w * c.max(1.0)).exp() + shear, shear)
            }
            _ => ((2.0 * w).exp(), 2.0 * self.aux),
        };
        Self {
            translation_radius: self.translation_radius * (1.0 + norm),
            log_scale: 2.0 * w,
            aux,
        }
    }
}

/// How a sampling set was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    /// Rotation–scale grid `((1+δ₁)^{-j} R(δ₂k), (1+δ₁)^{-j} R)`.
    RotationScale {
        delta1: f64,
        delta2: f64,
        rotations: usize,
        covering_radius: f64,
    },
    /// Product grid `{(h_j x_k, h_j)}`.
    Product {
        dilations: usize,
        lattice: Lattice,
    },
    /// Slices with individually chosen translation lattices.
    Sliced {
        slices: usize,
    },
    Generic,
}

/// Rectangular lattice `origin + step ⊙ k`, `k_min ≤ k ≤ k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub origin: Vec<f64>,
    pub step: Vec<f64>,
    pub k_min: Vec<i64>,
    pub k_max: Vec<i64>,
}

impl Lattice {
    pub fn new(origin: Vec<f64>, step: Vec<f64>, k_min: Vec<i64>, k_max: Vec<i64>) -> Result<Self> {
        let d = origin.len();
        check_dim(d, step.len())?;
        check_dim(d, k_min.len())?;
        check_dim(d, k_max.len())?;
        if step.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Domain("lattice steps must be positive".into()));
        }
        Ok(Self {
            origin,
            step,
            k_min,
            k_max,
        })
    }

    /// `δℤ^d ∩ [-m δ, m δ]^d`.
    pub fn cubic(dim: usize, step: f64, m: i64) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![step; dim], vec![-m; dim], vec![m; dim])
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::new();
        if self.k_min.iter().zip(&self.k_max).any(|(a, b)| a > b) {
            return out;
        }
        let mut k = self.k_min.clone();
        loop {
            out.push((0..d).map(|a| self.origin[a] + self.step[a] * k[a] as f64).collect());
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if k[axis] < self.k_max[axis] {
                    k[axis] += 1;
                    break;
                }
                k[axis] = self.k_min[axis];
            }
        }
    }
}

/// Index range for the translation multi-index `k`.
#[derive(Clone, Debug, PartialEq)]
pub enum TranslationRange {
    /// `lo ≤ k ≤ hi` componentwise.
    Box { lo: Vec<i64>, hi: Vec<i64> },
    /// Every `k` whose translation lies in `[-L/2, L/2)^d`.
    Window { length: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub neighborhood: Neighborhood,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCertificate {
    pub neighborhood: Neighborhood,
    pub window: Window,
    pub test_points: usize,
}

/// Bounded window in `G`: a translation box times a box of `H`-coordinates.
///
/// `aux` is the shear range for the shearlet family and is ignored otherwise;
/// rotations always range over the whole rotation group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: Vec<f64>,
    pub x_max: Vec<f64>,
    pub log_scale: (f64, f64),
    #[serde(default)]
    pub aux: (f64, f64),
    #[serde(default)]
    pub both_signs: bool,
}

impl Window {
    /// Translations only: `H`-part reduced to the identity.
    pub fn translations(x_min: Vec<f64>, x_max: Vec<f64>) -> Self {
        Self {
            x_min,
            x_max,
            log_scale: (0.0, 0.0),
            aux: (0.0, 0.0),
            both_signs: false,
        }
    }
}

/// A contiguous group of points sharing one dilation.
#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    pub h: GroupElement,
    pub indices: Vec<usize>,
}

/// A finite family `Z = (z_i)` of pairwise distinct points of `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSet {
    spec: DilationGroupSpec,
    points: Vec<AffinePoint>,
    pub construction: Construction,
    pub separation_certificate: Option<SeparationCertificate>,
    pub density_certificate: Option<DensityCertificate>,
}

fn point_key(p: &AffinePoint) -> Vec<u64> {
    p.x.iter().chain(p.h.params()).map(|v| (v + 0.0).to_bits()).collect()
}

impl SamplingSet {
    pub fn new(spec: DilationGroupSpec, points: Vec<AffinePoint>, construction: Construction) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if *p.h.spec() != spec {
                return Err(Error::InvalidSpec("point from a different group".into()));
            }
            if !seen.insert(point_key(p)) {
                return Err(Error::Contract(format!("duplicate sampling point {:?}", p.record())));
            }
        }
        Ok(Self {
            spec,
            points,
            construction,
            separation_certificate: None,
            density_certificate: None,
        })
    }

    /// Builds a set without the distinctness check (used to exhibit separation failures).
    pub fn with_duplicates(spec: DilationGroupSpec, points: Vec<AffinePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(Self {
            spec,
            points,
            construction: Construction::Generic,
            separation_certificate: None,
            density_certificate: None,
        })
    }

    pub fn spec(&self) -> &DilationGroupSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn points(&self) -> &[AffinePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Removes a point. Density is no longer guaranteed, so its certificate is dropped;
    /// subsets of separated sets stay separated.
    pub fn remove_point(&mut self, i: usize) -> Result<AffinePoint> {
        if i >= self.points.len() {
            return Err(Error::Domain(format!("index {i} out of range")));
        }
        if self.points.len() == 1 {
            return Err(Error::EmptySet);
        }
        self.density_certificate = None;
        Ok(self.points.remove(i))
    }

    /// Points grouped by dilation, in order of first appearance.
    pub fn slices(&self) -> Vec<Slice> {
        let mut slices: Vec<Slice> = Vec::new();
        let mut index: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
        for (i, p) in self.points.iter().enumerate() {
            let key: Vec<u64> = p.h.params().iter().map(|v| (v + 0.0).to_bits()).collect();
            match index.get(&key) {
                Some(&s) => slices[s].indices.push(i),
                None => {
                    index.insert(key, slices.len());
                    slices.push(Slice {
                        h: p.h.clone(),
                        indices: vec![i],
                    });
                }
            }
        }
        slices
    }

    /// Writes one `{"x": [...], "params": [...]}` record per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for p in &self.points {
            serde_json::to_writer(&mut w, &p.record())?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(spec: DilationGroupSpec, r: R) -> Result<Self> {
        let mut points = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: AffineRecord = serde_json::from_str(&line)?;
            points.push(AffinePoint::from_record(spec, &rec)?);
        }
        Self::new(spec, points, Construction::Generic)
    }

    /// Metadata that accompanies the JSONL point list.
    pub fn header(&self) -> SamplingHeader {
        SamplingHeader {
            spec: self.spec,
            construction: self.construction.clone(),
            separation_certificate: self.separation_certificate.clone(),
            density_certificate: self.density_certificate.clone(),
            points: self.points.len(),
        }
    }

    pub fn from_parts(header: SamplingHeader, points: Vec<AffinePoint>) -> Result<Self> {
        let mut set = Self::new(header.spec, points, header.construction)?;
        check_dim(header.points, set.len())?;
        set.separation_certificate = header.separation_certificate;
        set.density_certificate = header.density_certificate;
        Ok(set)
    }
}

/// JSON sidecar for a sampling set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingHeader {
    pub spec: DilationGroupSpec,
    pub construction: Construction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation_certificate: Option<SeparationCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_certificate: Option<DensityCertificate>,
    pub points: usize,
}

/// Rotation–scale grid with points
/// `((1+δ₁)^{-j} R_ℓ(δ₂k), (1+δ₁)^{-j} R_ℓ)`, so that `π(z)ψ` is the atom
/// `(1+δ₁)^{jd/2} ψ((1+δ₁)^j R_ℓ⁻¹ t − δ₂k)`.
///
/// On success the set carries a separation certificate for
/// `V = B(δ₂/2)`, `W = {|log r| < log(1+δ₁)/2, angle < half the minimal rotation gap}`.
pub fn build_rotation_scale_grid(
    spec: DilationGroupSpec,
    delta1: f64,
    delta2: f64,
    rotations: &RotationList,
    j_range: RangeInclusive<i64>,
    k_range: &TranslationRange,
) -> Result<SamplingSet> {
    spec.validate_elements()?;
    if spec.family != Family::Similitude {
        return Err(Error::InvalidSpec("rotation-scale grids need the similitude family".into()));
    }
    if !(delta1 > 0.0) || !(delta2 > 0.0) {
        return Err(Error::Domain(format!("δ₁, δ₂ must be positive, got {delta1}, {delta2}")));
    }
    if rotations.rotations.is_empty() || j_range.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = spec.dim;
    if rotations.rotations.iter().any(|r| r.dim() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: rotations.rotations[0].dim(),
        });
    }
    let mut points = Vec::new();
    for j in j_range {
        let s = (1.0 + delta1).powi(-(j as i32));
        for rot in &rotations.rotations {
            let h = GroupElement::similitude(s, *rot)?;
            let (ks, window) = translation_indices(d, s * delta2, k_range)?;
            for k in ks {
                let v: Vec<f64> = k.iter().map(|ki| delta2 * *ki as f64).collect();
                let x = h.apply(&v).as_slice()[..d].to_vec();
                if window.is_some_and(|l| !in_window(&x, l)) {
                    continue;
                }
                points.push(AffinePoint::new(x, h.clone())?);
            }
        }
    }
    let mut set = SamplingSet::new(
        spec,
        points,
        Construction::RotationScale {
            delta1,
            delta2,
            rotations: rotations.rotations.len(),
            covering_radius: rotations.covering_radius,
        },
    )?;
    let u = Neighborhood::new(delta2 / 2.0, (1.0 + delta1).ln() / 2.0, min_rotation_gap(rotations) / 2.0)?;
    if certify_separated(&set, &u)?.separated {
        set.separation_certificate = Some(SeparationCertificate { neighborhood: u });
    }
    Ok(set)
}

fn min_rotation_gap(list: &RotationList) -> f64 {
    let r = &list.rotations;
    let mut gap = std::f64::consts::PI;
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            gap = gap.min(r[i].distance(&r[j]));
        }
    }
    gap
}

/// Candidate multi-indices, plus the window length when points must be filtered.
fn translation_indices(d: usize, spacing: f64, range: &TranslationRange) -> Result<(Vec<Vec<i64>>, Option<f64>)> {
    let (lo, hi, window) = match range {
        TranslationRange::Box { lo, hi } => {
            check_dim(d, lo.len())?;
            check_dim(d, hi.len())?;
            (lo.clone(), hi.clone(), None)
        }
        TranslationRange::Window { length } => {
            if !(*length > 0.0) {
                return Err(Error::Domain("window length must be positive".into()));
            }
            let m = ((d as f64).sqrt() * length / 2.0 / spacing).ceil() as i64 + 1;
            (vec![-m; d], vec![m; d], Some(*length))
        }
    };
    let lattice = Lattice::new(vec![0.0; d], vec![1.0; d], lo, hi)?;
    let ks = lattice
        .points()
        .into_iter()
        .map(|k| k.iter().map(|v| v.round() as i64).collect())
        .collect();
    Ok((ks, window))
}

fn in_window(x: &[f64], length: f64) -> bool {
    x.iter().all(|v| *v >= -length / 2.0 && *v < length / 2.0)
}

/// Product grid `{(h_j x_k, h_j)}` over a dilation list and a translation lattice.
///
/// When the dilations are `W`-separated and the lattice is `V`-separated in the
/// sense of `|x_k − x_l| ≥ 2ρ`, the product is `V × W`-separated; the certificate
/// is recorded after an explicit check.
pub fn build_product_grid(h_list: &[GroupElement], lattice: &Lattice, certify_with: Option<Neighborhood>) -> Result<SamplingSet> {
    let first = h_list.first().ok_or(Error::EmptySet)?;
    let spec = *first.spec();
    check_dim(spec.dim, lattice.dim())?;
    let xs = lattice.points();
    if xs.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut points = Vec::with_capacity(h_list.len() * xs.len());
    for h in h_list {
        for x in &xs {
            let hx = h.apply(x).as_slice()[..spec.dim].to_vec();
            points.push(AffinePoint::new(hx, h.clone())?);
        }
    }
    let mut set = SamplingSet::new(
        spec,
        points,
        Construction::Product {
            dilations: h_list.len(),
            lattice: lattice.clone(),
        },
    )?;
    if let Some(u) = certify_with {
        if certify_separated(&set, &u)?.separated {
            set.separation_certificate = Some(SeparationCertificate { neighborhood: u });
        }
    }
    Ok(set)
}

/// Slices with independently chosen translation sets: `{(x, h_j) : x ∈ X_j}`.
pub fn build_sliced(h_list: &[GroupElement], translations: &[Vec<Vec<f64>>]) -> Result<SamplingSet> {
    let first = h_list.first().ok_or(Error::EmptySet)?;
    let spec = *first.spec();
    check_dim(h_list.len(), translations.len())?;
    let mut points = Vec::new();
    for (h, xs) in h_list.iter().zip(translations) {
        for x in xs {
            points.push(AffinePoint::new(x.clone(), h.clone())?);
        }
    }
    SamplingSet::new(spec, points, Construction::Sliced { slices: h_list.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Rotation;

    #[test]
    fn single_point_grid() {
        let spec = DilationGroupSpec::similitude(1);
        let set = build_rotation_scale_grid(
            spec,
            1.0,
            1.0,
            &RotationList::trivial(1).unwrap(),
            0..=0,
            &TranslationRange::Box { lo: vec![0], hi: vec![0] },
        )
        .unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.points()[0], AffinePoint::identity(spec).unwrap());
    }

    #[test]
    fn scales_are_geometric_and_spacing_shrinks() {
        let spec = DilationGroupSpec::similitude(1);
        let (d1, d2) = (0.5, 0.25);
        let set = build_rotation_scale_grid(
            spec,
            d1,
            d2,
            &RotationList::trivial(1).unwrap(),
            -1..=2,
            &TranslationRange::Box { lo: vec![-3], hi: vec![3] },
        )
        .unwrap();
        let slices = set.slices();
        assert_eq!(slices.len(), 4);
        for (i, s) in slices.iter().enumerate() {
            let j = i as i32 - 1;
            let scale = (1.0 + d1).powi(-j);
            assert!((s.h.scale() - scale).abs() < 1e-14 * scale);
            let xs: Vec<f64> = s.indices.iter().map(|&i| set.points()[i].x[0]).collect();
            for w in xs.windows(2) {
                assert!((w[1] - w[0] - d2 * scale).abs() < 1e-14);
            }
        }
        assert!(set.separation_certificate.is_some());
    }

    #[test]
    fn rotated_spacing_in_2d() {
        let spec = DilationGroupSpec::similitude(2);
        let rot = RotationList {
            rotations: vec![Rotation::Angle(0.3)],
            covering_radius: std::f64::consts::PI,
        };
        let set = build_rotation_scale_grid(
            spec,
            1.0,
            0.5,
            &rot,
            1..=1,
            &TranslationRange::Box {
                lo: vec![0, 0],
                hi: vec![1, 0],
            },
        )
        .unwrap();
        let (a, b) = (&set.points()[0].x, &set.points()[1].x);
        let step = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        assert!((step - 0.25).abs() < 1e-14);
        assert!(((b[1] - a[1]) / (b[0] - a[0]) - 0.3f64.tan()).abs() < 1e-12);
    }

    #[test]
    fn duplicates_rejected_and_removal_drops_density() {
        let spec = DilationGroupSpec::similitude(1);
        let id = GroupElement::identity(spec).unwrap();
        let p = AffinePoint::new(vec![0.0], id.clone()).unwrap();
        assert!(SamplingSet::new(spec, vec![p.clone(), p.clone()], Construction::Generic).is_err());
        let mut set = build_product_grid(&[id], &Lattice::cubic(1, 1.0, 3).unwrap(), None).unwrap();
        set.density_certificate = Some(DensityCertificate {
            neighborhood: Neighborhood::new(0.6, 0.1, 0.0).unwrap(),
            window: Window::translations(vec![-3.0], vec![3.0]),
            test_points: 1,
        });
        set.remove_point(3).unwrap();
        assert!(set.density_certificate.is_none());
    }

    #[test]
    fn singleton_product_and_jsonl_roundtrip() {
        let spec = DilationGroupSpec::shearlet(0.5);
        let h = GroupElement::shearlet(0.5, 2.0, 0.25).unwrap();
        let set = build_product_grid(std::slice::from_ref(&h), &Lattice::cubic(2, 0.5, 0).unwrap(), None).unwrap();
        assert_eq!(set.len(), 1);
        let many = build_product_grid(
            &[h, GroupElement::identity(spec).unwrap()],
            &Lattice::cubic(2, 0.5, 2).unwrap(),
            None,
        )
        .unwrap();
        let mut buf = Vec::new();
        many.write_jsonl(&mut buf).unwrap();
        let back = SamplingSet::read_jsonl(spec, &buf[..]).unwrap();
        assert_eq!(back.points(), many.points());
        assert_eq!(back.slices().len(), 2);
    }

    #[test]
    fn quotient_membership_matches_sampling() {
        use rand::{Rng, SeedableRng};
        let spec = DilationGroupSpec::shearlet(0.5);
        let u = Neighborhood::new(1.0, 0.3, 0.2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let a1 = rng.random_range(-0.3..0.3f64).exp();
            let a2 = rng.random_range(-0.3..0.3f64).exp();
            let w1 = GroupElement::new(spec, &[a1, rng.random_range(-0.2..0.2)]).unwrap();
            let w2 = GroupElement::new(spec, &[a2, rng.random_range(-0.2..0.2)]).unwrap();
            assert!(u.contains_dilation(&w1) && u.contains_dilation(&w2));
            assert!(u.contains_quotient(&w2.compose(&w1.inverse()).unwrap()));
        }
        let far = GroupElement::new(spec, &[1.0, 0.5]).unwrap();
        assert!(!u.contains_quotient(&far));
    }
}
