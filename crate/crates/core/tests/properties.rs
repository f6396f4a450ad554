use dilation_frames::atoms::build_atom;
use dilation_frames::bump::{build_bump, BumpKind};
use dilation_frames::frames::{BoundMethod, FrameOptions, FrameSystem, TestSpace};
use dilation_frames::groups::Rotation;
use dilation_frames::phi::{phi_bound_similitude, phi_similitude_radial};
use dilation_frames::quadrature::QuadratureConfig;
use dilation_frames::sampling::{build_product_grid, certify_separated, Lattice, Neighborhood};
use dilation_frames::{DilationGroupSpec, Execution, GridSpec, GroupElement, OrbitGeometry};
use nalgebra::Matrix3;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn element(family: u8, p: [f64; 3], signs: [bool; 2]) -> GroupElement {
    let s = |b: bool| if b { -1.0 } else { 1.0 };
    match family {
        0 => GroupElement::similitude(p[0].exp(), Rotation::Angle(2.0 * p[1])).unwrap(),
        1 => GroupElement::diagonal(&[s(signs[0]) * p[0].exp(), s(signs[1]) * p[1].exp()]).unwrap(),
        _ => GroupElement::shearlet(0.5, s(signs[0]) * p[0].exp(), 2.0 * p[2]).unwrap(),
    }
}

fn close(a: &Matrix3<f64>, b: &Matrix3<f64>) -> bool {
    (a - b).abs().max() <= 1e-10 * (1.0 + a.abs().max())
}

fn arb_element() -> impl Strategy<Value = (u8, [f64; 3], [bool; 2])> {
    (0u8..3, prop::array::uniform3(-1.5f64..1.5), prop::array::uniform2(any::<bool>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms((f, p, s) in arb_element(), (_, q, t) in arb_element(), (_, r, u) in arb_element()) {
        let (g, h, k) = (element(f, p, s), element(f, q, t), element(f, r, u));
        let gh_k = g.compose(&h).unwrap().compose(&k).unwrap();
        let g_hk = g.compose(&h.compose(&k).unwrap()).unwrap();
        prop_assert!(close(gh_k.matrix(), g_hk.matrix()));
        prop_assert!(close(g.compose(&h).unwrap().matrix(), &(g.matrix() * h.matrix())));
        let e = GroupElement::identity(*g.spec()).unwrap();
        prop_assert!(close(g.compose(&g.inverse()).unwrap().matrix(), e.matrix()));
        prop_assert!(close(g.compose(&e).unwrap().matrix(), g.matrix()));
        let det = g.compose(&h).unwrap().det();
        prop_assert!((det - g.det() * h.det()).abs() <= 1e-10 * det.abs());
    }

    #[test]
    fn product_grids_of_separated_factors_are_separated(
        delta in 0.05f64..0.8,
        step in 0.1f64..2.0,
        scales in 2i32..6,
        m in 1i64..5,
        shrink in 0.5f64..0.95,
    ) {
        let spec = DilationGroupSpec::similitude(1);
        let hs: Vec<GroupElement> = (0..scales)
            .map(|j| GroupElement::new(spec, &[(j as f64 * delta).exp()]).unwrap())
            .collect();
        let lattice = Lattice::cubic(1, step, m).unwrap();
        let u = Neighborhood::new(shrink * step / 2.0, shrink * delta / 2.0, 0.0).unwrap();
        let set = build_product_grid(&hs, &lattice, Some(u)).unwrap();
        prop_assert_eq!(set.len(), scales as usize * (2 * m as usize + 1));
        prop_assert!(certify_separated(&set, &u).unwrap().separated);
        prop_assert!(set.separation_certificate.is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn similitude_phi_stays_within_its_envelope(log_r in -4.0f64..4.0, case in 0usize..3) {
        let (d, ell) = [(1usize, 3u32), (2, 4), (2, 6)][case];
        let cfg = QuadratureConfig::relative(1e-7);
        let spec = DilationGroupSpec::similitude(d);
        let h = |r: f64| match d {
            1 => GroupElement::new(spec, &[r]).unwrap(),
            _ => GroupElement::similitude(r, Rotation::identity(2).unwrap()).unwrap(),
        };
        let ratio = |r: f64| phi_similitude_radial(d, r, ell, &cfg).unwrap().value / phi_bound_similitude(&h(r), ell).unwrap();
        let r = log_r.exp();
        // The ratio increases towards its small-scale limit.
        let (limit, here) = (ratio(1e-3), ratio(r));
        prop_assert!(here.is_finite() && here > 0.0);
        prop_assert!(here <= 1.01 * limit, "ratio {here} at r = {r} vs {limit} at r = 1e-3");
    }
}

#[test]
fn frame_inequality_holds_for_random_signals() {
    let spec = DilationGroupSpec::similitude(1);
    let rho = build_bump(BumpKind::default(), 1.0, &GridSpec::centered(1, 128, 1.0 / 32.0).unwrap()).unwrap();
    let psi = build_atom(&rho, &OrbitGeometry::new(spec).unwrap(), 2).unwrap();
    let hs: Vec<GroupElement> = [1.0, 0.8, 0.64].iter().map(|r| GroupElement::new(spec, &[*r]).unwrap()).collect();
    let set = build_product_grid(&hs, &Lattice::cubic(1, 0.5, 8).unwrap(), None).unwrap();
    let grid = GridSpec::centered(1, 32, 0.25).unwrap();
    let space = TestSpace::with_filter(grid, |xi| (0.25..=1.0).contains(&xi[0].abs())).unwrap();
    let sys = FrameSystem::from_sampled(&psi, &set, space, Execution::Sequential).unwrap();
    let report = sys
        .bounds(&FrameOptions {
            method: BoundMethod::GramEigen,
            exec: Execution::Sequential,
            ..FrameOptions::default()
        })
        .unwrap();
    assert!(report.lower_a > 0.0 && report.ratio().is_finite());

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let u: Vec<Complex64> = (0..sys.space().len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let energy: f64 = sys.analyze(&u).unwrap().iter().map(|z| z.norm_sqr()).sum();
        let slack = 1e-9 * report.upper_b * norm2;
        assert!(energy >= report.lower_a * norm2 - slack, "lower frame bound violated");
        assert!(energy <= report.upper_b * norm2 + slack, "upper frame bound violated");
    }
}
