//! End-to-end shearlet pipeline: embedding indices, the Φ₂₀ envelope sweep, the
//! decay constant of a high-order atom and the frame bounds of an adapted grid.
//!
//! ```text
//! cargo run --release --example shearlet_sweep -- [out_dir] [--quick]
//! ```
//!
//! Each table is printed and written as CSV to `out_dir` (default `shearlet-sweep`).
//! `--quick` skips the refined grids.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dilation_frames::atoms::{build_atom, check_moments};
use dilation_frames::bump::{build_bump, BumpKind};
use dilation_frames::cwt::{decay_envelope_check, DecayEnvelope, DecayOptions};
use dilation_frames::fourier::Spectrum;
use dilation_frames::frames::{adapted_set, spectral_profile, BoundMethod, FrameOptions, FrameSystem, ShearletDesign, TestSpace};
use dilation_frames::phi::{embedding_index, phi_bound_shearlet, phi_ell, WeightSpec};
use dilation_frames::quadrature::QuadratureConfig;
use dilation_frames::{DilationGroupSpec, Execution, GridSpec, GroupElement, OrbitGeometry};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

struct Table {
    name: &'static str,
    csv: String,
}

impl Table {
    fn new(name: &'static str, header: &str) -> Self {
        println!("\n== {name} ==\n{header}");
        Self {
            name,
            csv: format!("{header}\n"),
        }
    }

    fn row(&mut self, cells: &[String]) {
        let line = cells.join(",");
        println!("{line}");
        writeln!(self.csv, "{line}").unwrap();
    }

    fn save(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join(format!("{}.csv", self.name)), &self.csv)?;
        Ok(())
    }
}

fn indices() -> Result<Table> {
    let mut t = Table::new("embedding_index", "family,weight,ell,t,quoted_t");
    let runs = [
        (DilationGroupSpec::similitude(2), WeightSpec::similitude(4.0, 0.0), "beta=4 s=0"),
        (DilationGroupSpec::diagonal(2), WeightSpec::diagonal(3.0, 0.0), "alpha=3 s=0"),
        (
            DilationGroupSpec::shearlet(0.5),
            WeightSpec::shearlet(2.0, 0.0, 0.0),
            "u1=2 u2=0 s=0",
        ),
    ];
    for (spec, w, label) in runs {
        let r = embedding_index(&spec, &w)?;
        let quoted = r.quoted_moment_order.map(|q| q.to_string()).unwrap_or_default();
        t.row(&[
            format!("{:?}", spec.family).to_lowercase(),
            label.into(),
            r.index_ell.to_string(),
            r.moment_order_t.to_string(),
            quoted,
        ]);
    }
    Ok(t)
}

/// `Φ₂₀(h) / envelope(h)` maximised over shears, one row per dilation `a`.
fn envelope_sweep(per_octave: usize, b_step: f64, t: &mut Table) -> Result<f64> {
    let quad = QuadratureConfig::relative(1e-6);
    let nb = (4.0 / b_step).round() as i64;
    let mut sup: f64 = 0.0;
    for i in -3 * per_octave as i64..=3 * per_octave as i64 {
        let a = 2f64.powf(i as f64 / per_octave as f64);
        let mut hs = Vec::new();
        for k in -nb..=nb {
            for s in [1.0, -1.0] {
                hs.push(GroupElement::shearlet(0.5, s * a, k as f64 * b_step)?);
            }
        }
        let ratios = Execution::default().map(&hs, |h| -> std::result::Result<f64, dilation_frames::Error> {
            Ok(phi_ell(h, 20, &quad)?.value / phi_bound_shearlet(h, 20, 1, 2)?)
        });
        let mut row_max: f64 = 0.0;
        for r in ratios {
            row_max = row_max.max(r?);
        }
        sup = sup.max(row_max);
        t.row(&[
            per_octave.to_string(),
            b_step.to_string(),
            format!("{a:.6}"),
            format!("{row_max:.6e}"),
        ]);
    }
    Ok(sup)
}

fn decay(per_octave: usize, b_step: f64, dx: f64, t: &mut Table) -> Result<()> {
    let spec = DilationGroupSpec::shearlet(0.5);
    let geom = OrbitGeometry::new(spec)?;
    let rho = build_bump(
        BumpKind::PolynomialSpline { order: 32 },
        2.0,
        &GridSpec::centered(2, 128, 1.0 / 16.0)?,
    )?;
    let psi = build_atom(&rho, &geom, 22)?;
    let moments = check_moments(&psi, &geom, 22)?;
    let mut hs = Vec::new();
    let nb = (3.0 / b_step).round() as i64;
    for i in 0..=2 * per_octave as i64 {
        let a = 2f64.powf(i as f64 / per_octave as f64);
        for k in -nb..=nb {
            hs.push(GroupElement::shearlet(0.5, a, k as f64 * b_step)?);
        }
    }
    let opts = DecayOptions {
        envelope: DecayEnvelope::Shearlet { r1: 1, r2: 2 },
        x_grid: GridSpec::centered(2, (32.0 / dx) as usize, dx)?,
        schwartz_norm: moments.schwartz_norm_estimate,
        exec: Execution::default(),
    };
    let r = decay_envelope_check(&psi, &moments, &geom, &hs, 22, 2, &opts)?;
    t.row(&[
        per_octave.to_string(),
        b_step.to_string(),
        dx.to_string(),
        format!("{:.4e}", r.c_star),
        format!("{:.3}", r.argsup_h[0]),
        format!("{:.3}", r.argsup_h[1]),
        format!("{:.3e}", r.schwartz_norm),
    ]);
    Ok(())
}

fn frame(n: usize, t_moments: u32, t: &mut Table) -> Result<()> {
    let spec = DilationGroupSpec::shearlet(0.5);
    let geom = OrbitGeometry::new(spec)?;
    let rho = build_bump(BumpKind::default(), 1.0, &GridSpec::centered(2, 128, 1.0 / 32.0)?)?;
    let psi = build_atom(&rho, &geom, t_moments)?;
    let spectrum = Spectrum::of(&psi);
    let profile = spectral_profile(&spectrum, 5.0, 0.0025)?;
    let (lo, hi) = (0.5, 3.5);
    let space = TestSpace::with_filter(GridSpec::centered(2, n, 1.0 / 16.0)?, |xi| {
        xi[0].abs() >= lo && xi[0].abs().max(xi[1].abs()) <= hi
    })?;
    let dim = space.len();
    let hs = ShearletDesign::default().dilations(&profile, lo, hi)?;
    let set = adapted_set(&spectrum, &space, &hs, 1e-2, profile.max)?;
    let sys = FrameSystem::from_sampled(&psi, &set, space, Execution::default())?;
    let r = sys.bounds(&FrameOptions {
        method: BoundMethod::Lanczos,
        ..FrameOptions::default()
    })?;
    t.row(&[
        format!("{n}x{n}"),
        t_moments.to_string(),
        dim.to_string(),
        set.len().to_string(),
        format!("{:.6e}", r.lower_a),
        format!("{:.6e}", r.upper_b),
        format!("{:.4}", r.ratio()),
        format!("{:.2e}", r.reconstruction_error),
    ]);
    Ok(())
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let quick = args.iter().any(|a| a == "--quick");
    let dir = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .map(PathBuf::from)
        .unwrap_or_else(|| "shearlet-sweep".into());
    std::fs::create_dir_all(&dir)?;

    indices()?.save(&dir)?;

    let mut env = Table::new("envelope_sup", "per_octave,b_step,a,max_b_ratio");
    let coarse = envelope_sweep(2, 1.0, &mut env)?;
    if !quick {
        let fine = envelope_sweep(4, 0.5, &mut env)?;
        println!(
            "sup {coarse:.4e} -> {fine:.4e}, drift {:.2}%",
            100.0 * (fine - coarse).abs() / coarse
        );
    }
    env.save(&dir)?;

    let mut dec = Table::new("decay_constant", "per_octave,b_step,dx,c_star,argsup_a,argsup_b,schwartz_norm");
    decay(2, 1.0, 1.0 / 16.0, &mut dec)?;
    if !quick {
        decay(4, 0.5, 1.0 / 32.0, &mut dec)?;
    }
    dec.save(&dir)?;

    let mut fr = Table::new("frame_bounds", "window,t,dim_T,points,A,B,B_over_A,reconstruction_error");
    frame(128, 4, &mut fr)?;
    if !quick {
        frame(256, 4, &mut fr)?;
    }
    fr.save(&dir)?;
    println!("\ntables written to {}", dir.display());
    Ok(())
}
