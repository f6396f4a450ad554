//! Weighted mixed `ℓ^{p,q}` norms of frame coefficients grouped by dilation.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::CoefficientArray;
use crate::error::{check_dim, Error, Result};

/// Control weight `v(z_i)` used by [`coefficient_norm`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// The weights stored in the array.
    Stored,
    /// `v ≡ 1`.
    Unit,
    /// `v(x, h) = r^exponent` with `r` the scale of `h`.
    ScalePower { exponent: f64 },
    /// `v(x, rS) = r^{-α - d/2 + d/q}`.
    Besov { alpha: f64, dim: usize },
    /// One weight per coefficient.
    Explicit { weights: Vec<f64> },
}

impl WeightSpec {
    fn resolve(&self, c: &CoefficientArray, q: f64) -> Result<Vec<f64>> {
        let w = match self {
            WeightSpec::Stored => c.weights.clone(),
            WeightSpec::Unit => vec![1.0; c.len()],
            WeightSpec::ScalePower { exponent } => c.scale.iter().map(|r| r.powf(*exponent)).collect(),
            WeightSpec::Besov { alpha, dim } => {
                let d = *dim as f64;
                let e = -alpha - d / 2.0 + d * recip(q);
                c.scale.iter().map(|r| r.powf(e)).collect()
            }
            WeightSpec::Explicit { weights } => {
                check_dim(c.len(), weights.len())?;
                weights.clone()
            }
        };
        if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain("weights must be positive and finite".into()));
        }
        Ok(w)
    }
}

fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent {p} outside [1, ∞]")))
    }
}

fn lp(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        // Scaling by the maximum keeps large exponents from overflowing.
        let v: Vec<f64> = values.collect();
        let m = v.iter().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * v.iter().map(|x| (x / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Groups coefficient positions by dilation index, in ascending index order.
fn groups(c: &CoefficientArray) -> BTreeMap<usize, Vec<usize>> {
    let mut g: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &j) in c.slice.iter().enumerate() {
        g.entry(j).or_default().push(i);
    }
    g
}

/// `(Σ_j |det h_j|^{q/p-1} (Σ_k (|c_{j,k}| v_{j,k} |det h_j|^{1/p-1/q})^p)^{q/p})^{1/q}`,
/// with the usual supremum at `p = ∞` or `q = ∞`.
pub fn coefficient_norm(c: &CoefficientArray, p: f64, q: f64, weight: &WeightSpec) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let v = weight.resolve(c, q)?;
    let e = recip(p) - recip(q);
    // |det|^{(q/p-1)/q} = |det|^{1/p-1/q}, so each group contributes
    // |det|^{2(1/p-1/q)} X_j to an ℓ^q sum.
    let per_group = groups(c).into_values().map(|idx| {
        let det = c.abs_det[idx[0]];
        let inner = lp(idx.iter().map(|&i| c.values[i].norm() * v[i] * det.powf(e)), p);
        det.powf(e) * inner
    });
    Ok(lp(per_group, q))
}

/// `(Σ_j (Σ_k (r_j^{-α-d/2+d/p} |c_{j,k}|)^p)^{q/p})^{1/q}` for similitude scales `r_j`.
pub fn besov_sequence_norm(c: &CoefficientArray, alpha: f64, p: f64, q: f64, dim: usize) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let d = dim as f64;
    let e = -alpha - d / 2.0 + d * recip(p);
    let per_group = groups(c)
        .into_values()
        .map(|idx| lp(idx.iter().map(|&i| c.scale[i].powf(e) * c.values[i].norm()), p));
    Ok(lp(per_group, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn array(rows: &[(usize, f64, f64, f64)]) -> CoefficientArray {
        let r: Vec<_> = rows
            .iter()
            .map(|&(j, det, s, v)| (j, det, s, Complex64::new(v, -0.5 * v)))
            .collect();
        CoefficientArray::from_rows(&r).unwrap()
    }

    #[test]
    fn two_two_unit_is_euclidean() {
        let c = array(&[(0, 4.0, 2.0, 1.0), (0, 4.0, 2.0, -3.0), (1, 0.25, 0.5, 2.0)]);
        let l2 = c.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let got = coefficient_norm(&c, 2.0, 2.0, &WeightSpec::Unit).unwrap();
        assert!((got - l2).abs() <= 1e-15 * l2);
    }

    #[test]
    fn single_coefficient_picks_up_combined_weight() {
        let c = array(&[(3, 8.0, 2.0, 1.5)]);
        let (p, q) = (1.5, 3.0);
        let got = coefficient_norm(&c, p, q, &WeightSpec::ScalePower { exponent: 0.7 }).unwrap();
        let want = c.values[0].norm() * 2f64.powf(0.7) * 8f64.powf(2.0 * (1.0 / p - 1.0 / q));
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn besov_weight_matches_sequence_norm() {
        let rows: Vec<_> = (-2..=2)
            .flat_map(|j| (0..4).map(move |k| (j, k)))
            .map(|(j, k)| {
                let r = 2f64.powi(j);
                ((j + 2) as usize, r * r, r, 0.3 + k as f64 - 0.2 * j as f64)
            })
            .collect();
        let c = array(&rows);
        for p in [1.0, 1.5, 2.0, 4.0] {
            let a = coefficient_norm(&c, p, p, &WeightSpec::Besov { alpha: 0.8, dim: 2 }).unwrap();
            let b = besov_sequence_norm(&c, 0.8, p, p, 2).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn infinite_exponents() {
        let c = array(&[(0, 1.0, 1.0, 1.0), (0, 1.0, 1.0, -3.0), (1, 1.0, 1.0, 2.0)]);
        let sup = coefficient_norm(&c, f64::INFINITY, f64::INFINITY, &WeightSpec::Unit).unwrap();
        assert_eq!(sup, c.values[1].norm());
        assert!(coefficient_norm(&c, 0.5, 1.0, &WeightSpec::Unit).is_err());
    }

    proptest! {
        #[test]
        fn is_a_norm(
            a in prop::collection::vec(-5.0f64..5.0, 6),
            b in prop::collection::vec(-5.0f64..5.0, 6),
            t in -3.0f64..3.0,
            p in 1.0f64..4.0,
            q in 1.0f64..4.0,
        ) {
            let mk = |v: &[f64]| array(&[
                (0, 2.0, 1.4, v[0]), (0, 2.0, 1.4, v[1]), (1, 0.5, 0.7, v[2]),
                (1, 0.5, 0.7, v[3]), (2, 3.0, 1.7, v[4]), (2, 3.0, 1.7, v[5]),
            ]);
            let w = WeightSpec::ScalePower { exponent: -0.4 };
            let (ca, cb) = (mk(&a), mk(&b));
            let na = coefficient_norm(&ca, p, q, &w).unwrap();
            let nb = coefficient_norm(&cb, p, q, &w).unwrap();
            let scaled = coefficient_norm(&ca.scaled(Complex64::new(t, 0.0)), p, q, &w).unwrap();
            prop_assert!((scaled - t.abs() * na).abs() <= 1e-12 * (1.0 + scaled));
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ns = coefficient_norm(&mk(&sum), p, q, &w).unwrap();
            prop_assert!(ns <= na + nb + 1e-10);
        }
    }
}
