//! The envelope integrals `Φ_ℓ(h) = ∫ A(ξ)^ℓ A(hᵀξ)^ℓ dξ`, their analytic
//! bounds, embedding indices, moment orders and control weights.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::groups::{DilationGroupSpec, Family, GroupElement};
use crate::orbit::{OrbitGeometry, GOLDEN_SWITCH};
use crate::quadrature::{integrate_half_line, integrate_line, integrate_line_controlled, QuadratureConfig};

/// A quadrature value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub value: f64,
    pub error: f64,
}

fn check_convergence(dim: usize, ell: u32) -> Result<()> {
    if 2 * ell as usize <= dim {
        return Err(Error::Divergent(format!(
            "the integrand decays like |ξ|^(-2ℓ) = |ξ|^(-{}) in dimension {dim}",
            2 * ell
        )));
    }
    Ok(())
}

#[inline]
fn powers(base: f64, ells: &[u32], out: &mut [f64]) {
    for (o, &l) in out.iter_mut().zip(ells) {
        *o = base.powi(l as i32);
    }
}

/// Roots of `|p + t e| = radius` in `t`.
fn circle_crossings(p: &[f64], e: &[f64], radius: f64, out: &mut Vec<f64>) {
    let a: f64 = e.iter().map(|x| x * x).sum();
    if a == 0.0 {
        return;
    }
    let b: f64 = p.iter().zip(e).map(|(x, y)| x * y).sum();
    let c: f64 = p.iter().map(|x| x * x).sum::<f64>() - radius * radius;
    let disc = b * b - a * c;
    if disc > 0.0 {
        let s = disc.sqrt();
        out.push((-b - s) / a);
        out.push((-b + s) / a);
    }
}

/// Breakpoints along the line `p + t e` for one argument of the integrand.
fn line_features(geom: &OrbitGeometry, p: &[f64], e: &[f64], out: &mut Vec<f64>) {
    let a: f64 = e.iter().map(|x| x * x).sum();
    if a == 0.0 {
        return;
    }
    let b: f64 = p.iter().zip(e).map(|(x, y)| x * y).sum();
    out.push(-b / a);
    for i in 0..p.len() {
        if e[i] != 0.0 {
            out.push(-p[i] / e[i]);
        }
    }
    if geom.spec.family == Family::Diagonal {
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                for s in [1.0, -1.0] {
                    let den = e[i] - s * e[j];
                    if den != 0.0 {
                        out.push(-(p[i] - s * p[j]) / den);
                    }
                }
            }
        }
    }
    circle_crossings(p, e, GOLDEN_SWITCH, out);
    circle_crossings(p, e, 1.0, out);
}

struct PhiIntegrand<'a> {
    geom: OrbitGeometry,
    h: &'a GroupElement,
    ells: &'a [u32],
}

impl PhiIntegrand<'_> {
    #[inline]
    fn eval(&self, xi: &[f64], out: &mut [f64]) {
        let d = xi.len();
        let a1 = self.geom.envelope_raw(xi);
        let hx = self.h.dual_action(xi);
        let a2 = self.geom.envelope_raw(&hx.as_slice()[..d]);
        powers(a1 * a2, self.ells, out);
    }

    fn breakpoints(&self, p: &[f64], e: &[f64]) -> Vec<f64> {
        let d = p.len();
        let mut pts = vec![0.0];
        line_features(&self.geom, p, e, &mut pts);
        let hp = self.h.dual_action(p);
        let he = self.h.dual_action(e);
        line_features(&self.geom, &hp.as_slice()[..d], &he.as_slice()[..d], &mut pts);
        pts.retain(|t| t.is_finite());
        pts
    }
}

/// Integrates over the line `ξ₁ ↦ (ξ₁, rest)`, writing values then error estimates.
fn inner_line(f: &PhiIntegrand, rest: &[f64], cfg: &QuadratureConfig, out: &mut [f64]) {
    let k = f.ells.len();
    let d = rest.len() + 1;
    let mut p = [0.0; 3];
    p[1..d].copy_from_slice(rest);
    let mut e = [0.0; 3];
    e[0] = 1.0;
    let bps = f.breakpoints(&p[..d], &e[..d]);
    let r = integrate_line(
        |t, o: &mut [f64]| {
            let mut xi = p;
            xi[0] = t;
            f.eval(&xi[..d], o);
        },
        &bps,
        k,
        cfg,
    );
    out[..k].copy_from_slice(&r.values);
    for i in 0..k {
        out[k + i] = r.errors[i] + if r.converged { 0.0 } else { r.values[i].abs() };
    }
}

fn outer_breakpoints(h: &GroupElement, d: usize) -> Vec<f64> {
    let mut pts = vec![0.0];
    for s in [GOLDEN_SWITCH, 1.0] {
        pts.extend([s, -s]);
        let col: f64 = (0..d).map(|i| h.matrix()[(0, i)].powi(2)).sum::<f64>().sqrt();
        if d == 2 && col > 0.0 {
            let y = s * col / h.abs_det();
            pts.extend([y, -y]);
        }
    }
    pts
}

/// `Φ_ℓ(h)` for several `ℓ` at once, sharing quadrature nodes.
pub fn phi_ell_multi(h: &GroupElement, ells: &[u32], cfg: &QuadratureConfig) -> Result<Vec<PhiValue>> {
    let d = h.dim();
    for &l in ells {
        check_convergence(d, l)?;
    }
    let k = ells.len();
    let geom = OrbitGeometry::new(*h.spec())?;
    let f = PhiIntegrand { geom, h, ells };
    let (values, errors, converged) = match d {
        1 => {
            let s = h.scale().abs();
            let mut bps = vec![0.0];
            for x in [GOLDEN_SWITCH, 1.0, GOLDEN_SWITCH / s, 1.0 / s] {
                bps.extend([x, -x]);
            }
            let r = integrate_line(|t, o: &mut [f64]| f.eval(&[t], o), &bps, k, cfg);
            (r.values, r.errors, r.converged)
        }
        2 => {
            let inner_cfg = QuadratureConfig {
                abs_tol: cfg.abs_tol * 0.1,
                rel_tol: cfg.rel_tol * 0.1,
                ..*cfg
            };
            let r = integrate_line_controlled(
                |y, o: &mut [f64]| inner_line(&f, &[y], &inner_cfg, o),
                &outer_breakpoints(h, 2),
                2 * k,
                k,
                cfg,
            );
            let errs = (0..k).map(|i| r.errors[i] + r.values[k + i]).collect();
            (r.values[..k].to_vec(), errs, r.converged)
        }
        3 => {
            let mid_cfg = QuadratureConfig {
                abs_tol: cfg.abs_tol * 0.1,
                rel_tol: cfg.rel_tol * 0.1,
                ..*cfg
            };
            let inner_cfg = QuadratureConfig {
                abs_tol: cfg.abs_tol * 0.01,
                rel_tol: cfg.rel_tol * 0.01,
                ..*cfg
            };
            let bps = [0.0, GOLDEN_SWITCH, -GOLDEN_SWITCH, 1.0, -1.0];
            let r = integrate_line_controlled(
                |z, o: &mut [f64]| {
                    let m = integrate_line_controlled(
                        |y, o2: &mut [f64]| inner_line(&f, &[y, z], &inner_cfg, o2),
                        &bps,
                        2 * k,
                        k,
                        &mid_cfg,
                    );
                    for i in 0..k {
                        o[i] = m.values[i];
                        o[k + i] = m.values[k + i] + m.errors[i];
                    }
                },
                &bps,
                2 * k,
                k,
                cfg,
            );
            let errs = (0..k).map(|i| r.errors[i] + r.values[k + i]).collect();
            (r.values[..k].to_vec(), errs, r.converged)
        }
        _ => return Err(Error::InvalidSpec(format!("Φ quadrature supports d <= 3, got {d}"))),
    };
    let out: Vec<PhiValue> = values
        .iter()
        .zip(&errors)
        .map(|(&value, &error)| PhiValue { value, error })
        .collect();
    if !converged {
        let worst = out.iter().fold(out[0], |acc, v| if v.error > acc.error { *v } else { acc });
        return Err(Error::Accuracy {
            value: worst.value,
            error: worst.error,
        });
    }
    Ok(out)
}

/// `Φ_ℓ(h)` by adaptive quadrature over `ℝ^d`.
pub fn phi_ell(h: &GroupElement, ell: u32, cfg: &QuadratureConfig) -> Result<PhiValue> {
    Ok(phi_ell_multi(h, &[ell], cfg)?[0])
}

/// Surface area of the unit sphere in `ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 2.0) * sphere_area(d - 2),
    }
}

/// Similitude `Φ_ℓ` through its radial reduction
/// `|S^{d-1}| ∫₀^∞ a(s)^ℓ a(|r|s)^ℓ s^{d-1} ds` with `a(s) = min(s, 1/(1+s))`.
pub fn phi_similitude_radial(dim: usize, r: f64, ell: u32, cfg: &QuadratureConfig) -> Result<PhiValue> {
    check_convergence(dim, ell)?;
    if !(r != 0.0 && r.is_finite()) {
        return Err(Error::InvalidElement(format!("scale must be finite and nonzero, got {r}")));
    }
    let r = r.abs();
    let a = |s: f64| s.min(1.0 / (1.0 + s));
    let res = integrate_half_line(
        |s, o: &mut [f64]| o[0] = (a(s) * a(r * s)).powi(ell as i32) * s.powi(dim as i32 - 1),
        0.0,
        &[GOLDEN_SWITCH, GOLDEN_SWITCH / r, 1.0, 1.0 / r],
        1,
        cfg,
    );
    let area = sphere_area(dim);
    if !res.converged {
        return Err(Error::Accuracy {
            value: area * res.values[0],
            error: area * res.errors[0],
        });
    }
    Ok(PhiValue {
        value: area * res.values[0],
        error: area * res.errors[0],
    })
}

/// `min(r^{ℓ-d}, r^{d-ℓ})`, the similitude envelope of `Φ_ℓ` up to a constant.
pub fn phi_bound_similitude(h: &GroupElement, ell: u32) -> Result<f64> {
    if h.spec().family != Family::Similitude {
        return Err(Error::InvalidSpec("similitude element required".into()));
    }
    let d = h.dim() as i32;
    if ell as i32 <= d {
        return Err(Error::Condition(format!("the similitude bound needs ℓ > d = {d}, got {ell}")));
    }
    let r = h.scale().abs();
    let e = ell as i32 - d;
    Ok(r.powi(e).min(r.powi(-e)))
}

/// Smallest `t` with `t ≥ 3r₁ + (3+6|c|)r₂ + 6|c| + 2`.
pub fn shearlet_min_order(c: f64, r1: u32, r2: u32) -> u32 {
    let c = c.abs();
    let need = 3.0 * r1 as f64 + (3.0 + 6.0 * c) * r2 as f64 + 6.0 * c + 2.0;
    (need - 1e-12).ceil() as u32
}

/// `(|a|+|a|^{-1})^{-r₁} (1+|b|)^{-r₂}`, valid when `t` meets [`shearlet_min_order`].
pub fn phi_bound_shearlet(h: &GroupElement, t: u32, r1: u32, r2: u32) -> Result<f64> {
    if h.spec().family != Family::Shearlet {
        return Err(Error::InvalidSpec("shearlet element required".into()));
    }
    if r2 <= 1 {
        return Err(Error::Condition(format!("the shearlet bound needs r₂ > 1, got {r2}")));
    }
    let need = shearlet_min_order(h.spec().c(), r1, r2);
    if t < need {
        return Err(Error::Condition(format!(
            "the shearlet bound with r₁ = {r1}, r₂ = {r2} needs t >= {need}, got {t}"
        )));
    }
    let (a, b) = (h.params()[0].abs(), h.params()[1].abs());
    Ok((a + 1.0 / a).powi(-(r1 as i32)) * (1.0 + b).powi(-(r2 as i32)))
}

/// Weight parameters: translation exponent `s`, integrability `p`, `q`, an
/// optional Besov smoothness, and the family-specific majorant exponents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(default)]
    pub s: f64,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "two")]
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub besov_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<f64>,
}

fn two() -> f64 {
    2.0
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self {
            s: 0.0,
            p: 2.0,
            q: 2.0,
            besov_alpha: None,
            beta: None,
            alpha: None,
            u1: None,
            u2: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyParams {
    Similitude { beta: f64 },
    Diagonal { alpha: f64 },
    Shearlet { u1: f64, u2: f64 },
}

impl WeightSpec {
    pub fn similitude(beta: f64, s: f64) -> Self {
        Self {
            beta: Some(beta),
            s,
            ..Self::default()
        }
    }

    pub fn diagonal(alpha: f64, s: f64) -> Self {
        Self {
            alpha: Some(alpha),
            s,
            ..Self::default()
        }
    }

    pub fn shearlet(u1: f64, u2: f64, s: f64) -> Self {
        Self {
            u1: Some(u1),
            u2: Some(u2),
            s,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let fin = [self.s]
            .into_iter()
            .chain(self.besov_alpha)
            .chain(self.beta)
            .chain(self.alpha)
            .chain(self.u1)
            .chain(self.u2)
            .all(f64::is_finite);
        if !fin || self.s < 0.0 {
            return Err(Error::Domain("weight exponents must be finite and s >= 0".into()));
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v >= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in [1, ∞], got {v}")));
            }
        }
        Ok(())
    }

    /// The family-specific exponents, checked against `spec`.
    pub fn family_params(&self, spec: &DilationGroupSpec) -> Result<FamilyParams> {
        self.validate()?;
        let nonneg = |name: &str, v: Option<f64>| -> Result<f64> {
            match v {
                Some(x) if x >= 0.0 => Ok(x),
                Some(x) => Err(Error::Domain(format!("{name} must be >= 0, got {x}"))),
                None => Err(Error::Domain(format!("{name} is required for the {:?} family", spec.family))),
            }
        };
        match spec.family {
            Family::Similitude => Ok(FamilyParams::Similitude {
                beta: nonneg("beta", self.beta)?,
            }),
            Family::Diagonal => Ok(FamilyParams::Diagonal {
                alpha: nonneg("alpha", self.alpha)?,
            }),
            Family::Shearlet => Ok(FamilyParams::Shearlet {
                u1: nonneg("u1", self.u1)?,
                u2: nonneg("u2", self.u2.or(Some(0.0)))?,
            }),
        }
    }

    fn inv(x: f64) -> f64 {
        if x.is_infinite() {
            0.0
        } else {
            1.0 / x
        }
    }

    /// `w(h)`: the Besov weight `r^{-α-d/2+d/q}` when a Besov smoothness is set
    /// (similitude only), otherwise `1`.
    pub fn w(&self, h: &GroupElement) -> Result<f64> {
        match self.besov_alpha {
            None => Ok(1.0),
            Some(alpha) => {
                if h.spec().family != Family::Similitude {
                    return Err(Error::Domain("the Besov weight is defined for the similitude family".into()));
                }
                let d = h.dim() as f64;
                Ok(h.scale().abs().powf(-alpha - d / 2.0 + d * Self::inv(self.q)))
            }
        }
    }
}

/// Embedding index, moment order and the weight data that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub family: Family,
    pub dim: usize,
    pub index_ell: u32,
    /// The formula value before rounding up.
    pub index_raw: f64,
    pub moment_order_t: u32,
    pub weight: WeightSpec,
    pub family_params: FamilyParams,
    /// `m(h) = w₀(h)|det h|^{-1/2}(1+‖h‖)^{m_exponent}`.
    pub embedding_weight_m_description: String,
    pub m_exponent: f64,
    /// A moment order quoted in the literature for this configuration, when it
    /// differs from the composed value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quoted_moment_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Smallest integer strictly greater than `x`.
pub fn smallest_integer_above(x: f64) -> u32 {
    (x.floor() + 1.0).max(1.0) as u32
}

fn ceil_index(x: f64) -> u32 {
    (x - 1e-12).ceil().max(1.0) as u32
}

pub fn embedding_index(spec: &DilationGroupSpec, w: &WeightSpec) -> Result<EmbeddingReport> {
    spec.validate()?;
    let fp = w.family_params(spec)?;
    let d = spec.dim as f64;
    let s = w.s;
    let raw = match fp {
        FamilyParams::Similitude { beta } => beta + 2.0 * s + 2.5 * d + 3.0,
        FamilyParams::Diagonal { alpha } => d * (alpha + 2.0 * s + 5.5),
        FamilyParams::Shearlet { u1, u2 } => {
            let c = spec.c().abs();
            3.0 * u1 + (9.0 + 9.0 * c) * u2 + 18.0 * (1.0 + c) * s + 73.5 * c + 81.5
        }
    };
    let ell = ceil_index(raw);
    let t = smallest_integer_above(ell as f64 + s + d + 1.0);
    let m_exponent = 2.0 * (s + d + 1.0);
    let (quoted, note) = match fp {
        FamilyParams::Shearlet { u1, u2 } if (spec.c() - 0.5).abs() < 1e-12 && u1 == 2.0 && u2 == 0.0 && s == 0.0 => (
            Some(127),
            Some(format!(
                "the literature quotes moment order k >= 127 for this case; \
                     composing ℓ = {ell} with t > ℓ + s + d + 1 gives t = {t}"
            )),
        ),
        _ => (None, None),
    };
    Ok(EmbeddingReport {
        family: spec.family,
        dim: spec.dim,
        index_ell: ell,
        index_raw: raw,
        moment_order_t: t,
        weight: *w,
        family_params: fp,
        embedding_weight_m_description: format!("m(h) = w0(h) |det h|^(-1/2) (1 + ||h||)^{m_exponent}"),
        m_exponent,
        quoted_moment_order: quoted,
        note,
    })
}

/// The control-weight majorant
/// `(w(h)+w(h⁻¹))·max(Δ_G^{-1/q}, Δ_G^{1/q-1})·(|det h|^{1/q-1/p}+|det h|^{1/p-1/q})·(1+‖h‖+‖h⁻¹‖)^s`.
pub fn control_weight_majorant(spec: &DilationGroupSpec, w: &WeightSpec, h: &GroupElement) -> Result<f64> {
    if h.spec() != spec {
        return Err(Error::InvalidSpec("element does not belong to the given group".into()));
    }
    w.validate()?;
    let hinv = h.inverse();
    let (ip, iq) = (WeightSpec::inv(w.p), WeightSpec::inv(w.q));
    let delta = h.modular_g();
    let det = h.abs_det();
    let ww = w.w(h)? + w.w(&hinv)?;
    let modular = delta.powf(-iq).max(delta.powf(iq - 1.0));
    let dets = det.powf(iq - ip) + det.powf(ip - iq);
    let trans = (1.0 + h.opnorm() + h.inverse_opnorm()).powf(w.s);
    Ok(ww * modular * dets * trans)
}

/// Exponent `2d + |α − d/2 + d/q|` of `(r + 1/r)` majorizing the similitude
/// Besov control weight.
pub fn besov_majorant_exponent(d: usize, alpha: f64, q: f64) -> f64 {
    let d = d as f64;
    2.0 * d + (alpha - d / 2.0 + d * WeightSpec::inv(q)).abs()
}

/// Smallest integer above `|α − d/2 + d/q| + 11d/2 + 3`.
pub fn moment_order_for_besov(d: usize, alpha: f64, q: f64) -> Result<u32> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::Domain(format!("q must lie in [1, ∞), got {q}")));
    }
    let df = d as f64;
    let bound = (alpha - df / 2.0 + df / q).abs() + 5.5 * df + 3.0;
    Ok(smallest_integer_above(bound))
}

/// The moment order obtained by composing the similitude index formula with
/// the Besov majorant exponent (`β = 2d + |α − d/2 + d/q|`, `s = 0`).
pub fn moment_order_for_besov_composed(d: usize, alpha: f64, q: f64) -> Result<u32> {
    let beta = besov_majorant_exponent(d, alpha, q);
    let rep = embedding_index(&DilationGroupSpec::similitude(d), &WeightSpec::similitude(beta, 0.0))?;
    Ok(rep.moment_order_t)
}
