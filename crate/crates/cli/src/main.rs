//! `dframes`: command-line front end for the dilation-frames library.

mod files;
mod manifest;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dilation_frames::approx::{greedy_n_term, summability_check, ApproxOptions, Strategy};
use dilation_frames::atoms::{build_atom_with, check_moments_with, AtomOptions, MomentOptions};
use dilation_frames::bump::{build_bump, BumpKind};
use dilation_frames::cwt::analyze_slice;
use dilation_frames::frames::{analysis, coefficient_norm, BoundMethod, FrameOptions, FrameSystem, WeightSpec};
use dilation_frames::groups::{ElementRecord, RotationList};
use dilation_frames::phi::{embedding_index, phi_ell};
use dilation_frames::quadrature::QuadratureConfig;
use dilation_frames::sampling::{build_rotation_scale_grid, Neighborhood, TranslationRange};
use dilation_frames::{DilationGroupSpec, Execution, GridSpec, GroupElement, OrbitGeometry};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use files::{BandConfig, FrameDir, SpaceConfig};
use manifest::{Output, RunInfo};

#[derive(Parser)]
#[command(name = "dframes", version, about = "Wavelet frames over matrix dilation groups")]
struct Cli {
    /// Directory receiving the artifacts and `manifest.json`.
    #[arg(long, global = true, default_value = "dframes-out")]
    out: PathBuf,
    /// Worker threads (0 = all cores, 1 = sequential). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embedding indices and moment orders.
    #[command(subcommand)]
    Embed(EmbedCmd),
    /// The envelope integrals Φ_ℓ.
    #[command(subcommand)]
    Phi(PhiCmd),
    /// Vanishing-moment atoms.
    #[command(subcommand)]
    Atom(AtomCmd),
    /// Continuous wavelet transform.
    #[command(subcommand)]
    Cwt(CwtCmd),
    /// Sampling sets.
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Frames on finite test spaces.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Nonlinear n-term approximation.
    #[command(subcommand)]
    Approx(ApproxCmd),
}

#[derive(Subcommand)]
enum EmbedCmd {
    /// Embedding index ℓ and moment order t for a group and weight.
    Index(EmbedIndexArgs),
}

#[derive(Args, Serialize)]
struct EmbedIndexArgs {
    /// Group descriptor, e.g. '{"family":"similitude","dim":2}'.
    #[arg(long)]
    group: String,
    /// Weight parameters, e.g. '{"beta":4,"s":0}'.
    #[arg(long)]
    weights: String,
}

#[derive(Subcommand)]
enum PhiCmd {
    /// Φ_ℓ(h) on a grid of group parameters.
    Compute(PhiComputeArgs),
}

#[derive(Args, Serialize)]
struct PhiComputeArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    ell: u32,
    /// Parameter grid, e.g. '{"axes":[{"lo":0.5,"hi":2,"n":5,"log":true}]}', one axis per group parameter.
    #[arg(long)]
    grid: String,
    #[arg(long, default_value_t = 1e-8)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
}

#[derive(Subcommand)]
enum AtomCmd {
    /// Builds ψ = Dρ with vanishing moments of order t.
    Build(AtomBuildArgs),
    /// Checks the vanishing moments of an atom file.
    CheckMoments(CheckMomentsArgs),
}

#[derive(Args, Serialize)]
struct AtomBuildArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    t: u32,
    /// Sample grid, e.g. '{"origin":[-4],"spacing":[0.03125],"extents":[256]}'.
    #[arg(long)]
    grid: String,
    /// Bump profile, e.g. '{"kind":"polynomial_spline","order":16}' or '{"kind":"smooth_exponential"}'.
    #[arg(long, default_value = r#"{"kind":"polynomial_spline","order":16}"#)]
    bump: String,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
}

#[derive(Args, Serialize)]
struct CheckMomentsArgs {
    #[arg(long)]
    atom: PathBuf,
    #[arg(long)]
    group: String,
    #[arg(long)]
    t: u32,
    #[arg(long, default_value_t = dilation_frames::atoms::MOMENT_TOL)]
    tol: f64,
}

#[derive(Subcommand)]
enum CwtCmd {
    /// W_ψ f(·, h) on the signal grid.
    Slice(CwtSliceArgs),
}

#[derive(Args, Serialize)]
struct CwtSliceArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    atom: PathBuf,
    #[arg(long)]
    group: String,
    /// Dilation, e.g. '{"params":[2.0]}'.
    #[arg(long)]
    h: String,
}

#[derive(Subcommand)]
enum SampleCmd {
    /// Rotation–scale grid ((1+δ₁)^{-j} R(δ₂k), (1+δ₁)^{-j} R) for similitude groups.
    #[command(name = "rotation-scale", alias = "build-thm12")]
    RotationScale(RotationScaleArgs),
    /// Certifies that a set is separated for a neighbourhood of the identity.
    Certify(CertifyArgs),
}

#[derive(Args, Serialize)]
struct RotationScaleArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    delta1: f64,
    #[arg(long)]
    delta2: f64,
    /// `signs`, `trivial` or `so2:<covering radius>`.
    #[arg(long, default_value = "signs")]
    rotations: String,
    #[arg(long, allow_hyphen_values = true)]
    j_min: i64,
    #[arg(long, allow_hyphen_values = true)]
    j_max: i64,
    /// Side length of the translation window [-L/2, L/2)^d.
    #[arg(long)]
    window: f64,
}

#[derive(Args, Serialize)]
struct CertifyArgs {
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    translation_radius: f64,
    #[arg(long)]
    log_scale: f64,
    #[arg(long, default_value_t = 0.0)]
    aux: f64,
}

#[derive(Subcommand)]
enum FrameCmd {
    /// Frame bounds on a test space; writes a frame directory.
    Bounds(FrameBoundsArgs),
    /// S⁻¹S f on the test space of a frame directory.
    Reconstruct(ReconstructArgs),
    /// Frame coefficients ⟨f, π(z)ψ⟩ of a signal.
    Analyze(AnalyzeArgs),
    /// Seeded random real signal in the test space of a frame directory.
    RandomSignal(RandomSignalArgs),
    /// Weighted mixed ℓ^{p,q} norm of a coefficient file.
    CoeffNorm(CoeffNormArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum Method {
    Auto,
    Gram,
    Power,
    Lanczos,
}

impl From<Method> for BoundMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => BoundMethod::Auto,
            Method::Gram => BoundMethod::GramEigen,
            Method::Power => BoundMethod::PowerIteration,
            Method::Lanczos => BoundMethod::Lanczos,
        }
    }
}

#[derive(Args, Serialize)]
struct FrameBoundsArgs {
    #[arg(long)]
    atom: PathBuf,
    #[arg(long)]
    set: PathBuf,
    /// Signal grid, as for `atom build`.
    #[arg(long)]
    grid: String,
    /// Test-space band, e.g. '{"min_orbit_distance":0.5,"max_frequency":4}'.
    #[arg(long)]
    band: String,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-8)]
    cg_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the seeded reconstruction probe.
    #[arg(long)]
    no_probe: bool,
}

#[derive(Args, Serialize)]
struct ReconstructArgs {
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    cg_tol: f64,
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    atom: PathBuf,
    #[arg(long)]
    set: PathBuf,
}

#[derive(Args, Serialize)]
struct RandomSignalArgs {
    #[arg(long)]
    frame: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct CoeffNormArgs {
    #[arg(long)]
    coeffs: PathBuf,
    /// Inner exponent (`inf` allowed).
    #[arg(long)]
    p: f64,
    /// Outer exponent (`inf` allowed).
    #[arg(long)]
    q: f64,
    /// Weight, e.g. '{"kind":"unit"}', '{"kind":"besov","alpha":0.5,"dim":2}'.
    #[arg(long, default_value = r#"{"kind":"unit"}"#)]
    weights: String,
}

#[derive(Subcommand)]
enum ApproxCmd {
    /// Greedy n-term error curve E_n and the summability diagnostic.
    EnCurve(EnCurveArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum StrategyArg {
    LargestDual,
    Omp,
}

#[derive(Args, Serialize)]
struct EnCurveArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    frame: PathBuf,
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    #[arg(long, default_value_t = 256)]
    nmax: usize,
    #[arg(long, value_enum, default_value = "largest-dual")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 1e-10)]
    cg_tol: f64,
}

fn parse<T: DeserializeOwned>(flag: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).with_context(|| format!("invalid --{flag}"))
}

fn to_value<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("argument structs serialize")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamAxis {
    lo: f64,
    hi: f64,
    n: usize,
    #[serde(default)]
    log: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamGrid {
    axes: Vec<ParamAxis>,
}

impl ParamAxis {
    fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| {
                let t = i as f64 / (self.n - 1) as f64;
                if self.log {
                    (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + t * (self.hi - self.lo)
                }
            })
            .collect()
    }
}

fn param_points(grid: &ParamGrid, spec: &DilationGroupSpec) -> Result<Vec<Vec<f64>>> {
    if grid.axes.len() != spec.param_len() {
        bail!(
            "invalid --grid: axes: expected {} axes for this group, got {}",
            spec.param_len(),
            grid.axes.len()
        );
    }
    for (i, a) in grid.axes.iter().enumerate() {
        if a.log && !(a.lo > 0.0 && a.hi > 0.0) {
            bail!("invalid --grid: axes[{i}]: log spacing needs positive bounds");
        }
    }
    let mut points = vec![Vec::new()];
    for axis in &grid.axes {
        let vals = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    if grid.axes.is_empty() || points.is_empty() {
        bail!("empty parameter grid");
    }
    Ok(points)
}

fn rotations(text: &str, dim: usize) -> Result<RotationList> {
    Ok(match text {
        "signs" => RotationList::signs(),
        "trivial" => RotationList::trivial(dim)?,
        s => match s.strip_prefix("so2:") {
            Some(r) => RotationList::so2(r.parse().context("invalid --rotations radius")?)?,
            None => bail!("invalid --rotations: expected signs, trivial or so2:<radius>"),
        },
    })
}

struct Ctx {
    out: Output,
    exec: Execution,
    workers: usize,
}

impl Ctx {
    fn finish(self, command: &str, config: Value, seed: Option<u64>, tolerances: Value, summary: Value) -> Result<()> {
        self.out.commit(&RunInfo {
            command: command.to_string(),
            config,
            seed,
            tolerances,
            workers: self.workers,
        })?;
        println!("{}", serde_json::to_string_pretty(&summary)?);
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global()?;
    }
    let workers = rayon::current_num_threads();
    let exec = if workers == 1 { Execution::Sequential } else { Execution::Parallel };
    let ctx = Ctx {
        out: Output::new(&cli.out),
        exec,
        workers,
    };
    match cli.command {
        Command::Embed(EmbedCmd::Index(a)) => embed_index(ctx, a),
        Command::Phi(PhiCmd::Compute(a)) => phi_compute(ctx, a),
        Command::Atom(AtomCmd::Build(a)) => atom_build(ctx, a),
        Command::Atom(AtomCmd::CheckMoments(a)) => atom_check(ctx, a),
        Command::Cwt(CwtCmd::Slice(a)) => cwt_slice(ctx, a),
        Command::Sample(SampleCmd::RotationScale(a)) => sample_grid(ctx, a),
        Command::Sample(SampleCmd::Certify(a)) => sample_certify(ctx, a),
        Command::Frame(FrameCmd::Bounds(a)) => frame_bounds(ctx, a),
        Command::Frame(FrameCmd::Reconstruct(a)) => frame_reconstruct(ctx, a),
        Command::Frame(FrameCmd::Analyze(a)) => frame_analyze(ctx, a),
        Command::Frame(FrameCmd::RandomSignal(a)) => frame_random_signal(ctx, a),
        Command::Frame(FrameCmd::CoeffNorm(a)) => frame_coeff_norm(ctx, a),
        Command::Approx(ApproxCmd::EnCurve(a)) => approx_curve(ctx, a),
    }
}

fn embed_index(mut ctx: Ctx, a: EmbedIndexArgs) -> Result<()> {
    let spec: DilationGroupSpec = parse("group", &a.group)?;
    let weights: dilation_frames::phi::WeightSpec = parse("weights", &a.weights)?;
    let report = embedding_index(&spec, &weights)?;
    ctx.out.add_json("embedding.json", &report)?;
    let config = json!({ "group": spec, "weights": weights });
    ctx.finish("embed index", config, None, Value::Null, serde_json::to_value(&report)?)
}

fn phi_compute(mut ctx: Ctx, a: PhiComputeArgs) -> Result<()> {
    let spec: DilationGroupSpec = parse("group", &a.group)?;
    let grid: ParamGrid = parse("grid", &a.grid)?;
    let points = param_points(&grid, &spec)?;
    let quad = QuadratureConfig {
        abs_tol: a.abs_tol,
        rel_tol: a.rel_tol,
        ..QuadratureConfig::default()
    };
    let rows = ctx.exec.map(&points, |p| -> Result<Vec<String>> {
        let h = GroupElement::new(spec, p)?;
        let v = phi_ell(&h, a.ell, &quad)?;
        let mut row: Vec<String> = p.iter().map(|x| format!("{x:e}")).collect();
        row.push(format!("{:e}", v.value));
        row.push(format!("{:e}", v.error));
        Ok(row)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let header: Vec<String> = (0..spec.param_len())
        .map(|i| format!("param{i}"))
        .chain(["phi".into(), "error".into()])
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.out.add_csv("phi.csv", &header, rows.clone());
    let summary = json!({ "points": rows.len(), "file": ctx.out.dir().join("phi.csv") });
    let tol = to_value(&quad);
    ctx.finish("phi compute", to_value(&a), None, tol, summary)
}

fn atom_build(mut ctx: Ctx, a: AtomBuildArgs) -> Result<()> {
    let spec: DilationGroupSpec = parse("group", &a.group)?;
    let grid: GridSpec = parse("grid", &a.grid)?;
    let kind: BumpKind = parse("bump", &a.bump)?;
    let geom = OrbitGeometry::new(spec)?;
    let rho = build_bump(kind, a.radius, &grid)?;
    let opts = AtomOptions::default();
    let psi = build_atom_with(&rho, &geom, a.t, &opts)?;
    let meta = json!({ "group": spec, "t": a.t, "bump": kind, "radius": a.radius });
    files::add_function(&mut ctx.out, "atom.bin", &psi, "atom", meta)?;
    let summary = json!({ "samples": psi.samples.len(), "l1_norm": psi.l1_norm(), "l2_norm": psi.l2_norm() });
    ctx.finish("atom build", to_value(&a), None, to_value(&opts), summary)
}

fn atom_check(mut ctx: Ctx, a: CheckMomentsArgs) -> Result<()> {
    let spec: DilationGroupSpec = parse("group", &a.group)?;
    let geom = OrbitGeometry::new(spec)?;
    let psi = files::load_function(&a.atom)?;
    let opts = MomentOptions::for_dim(spec.dim);
    let report = check_moments_with(&psi, &geom, a.t, &opts, ctx.exec)?;
    let passes = report.passes(a.tol);
    ctx.out.add_json("moments.json", &json!({ "report": report, "passes": passes }))?;
    let summary = json!({ "passes": passes, "relative_residual": report.relative_residual, "scaled_residual": report.scaled_residual });
    let tol = json!({ "moment_tol": a.tol, "lattice": opts });
    ctx.finish("atom check-moments", to_value(&a), None, tol, summary)
}

fn cwt_slice(mut ctx: Ctx, a: CwtSliceArgs) -> Result<()> {
    let spec: DilationGroupSpec = parse("group", &a.group)?;
    let rec: ElementRecord = parse("h", &a.h)?;
    let h = GroupElement::from_record(spec, &rec)?;
    let f = files::load_function(&a.signal)?;
    let psi = files::load_function(&a.atom)?;
    let w = analyze_slice(&f, &psi, &h)?;
    files::add_function(&mut ctx.out, "slice.bin", &w, "cwt_slice", json!({ "group": spec, "h": rec }))?;
    let peak = w.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    ctx.finish(
        "cwt slice",
        to_value(&a),
        None,
        Value::Null,
        json!({ "samples": w.samples.len(), "max_abs": peak }),
    )
}

fn sample_grid(mut ctx: Ctx, a: RotationScaleArgs) -> Result<()> {
    let spec: DilationGroupSpec = parse("group", &a.group)?;
    let rots = rotations(&a.rotations, spec.dim)?;
    let set = build_rotation_scale_grid(
        spec,
        a.delta1,
        a.delta2,
        &rots,
        a.j_min..=a.j_max,
        &TranslationRange::Window { length: a.window },
    )?;
    files::add_set(&mut ctx.out, "set.jsonl", &set)?;
    let summary = json!({ "points": set.len(), "certified": set.separation_certificate.is_some() });
    ctx.finish("sample rotation-scale", to_value(&a), None, Value::Null, summary)
}

fn sample_certify(mut ctx: Ctx, a: CertifyArgs) -> Result<()> {
    let mut set = files::load_set(&a.set)?;
    let u = Neighborhood::new(a.translation_radius, a.log_scale, a.aux)?;
    let report = set.certify_separation(&u)?;
    ctx.out.add_json("separation.json", &report)?;
    if report.separated {
        files::add_set(&mut ctx.out, "set.jsonl", &set)?;
    }
    ctx.finish("sample certify", to_value(&a), None, Value::Null, serde_json::to_value(&report)?)
}

fn frame_options(a: &FrameBoundsArgs, exec: Execution) -> FrameOptions {
    FrameOptions {
        method: a.method.into(),
        tol: a.tol,
        max_iterations: a.max_iterations,
        cg_tol: a.cg_tol,
        seed: a.seed,
        probe: !a.no_probe,
        exec,
    }
}

fn frame_bounds(mut ctx: Ctx, a: FrameBoundsArgs) -> Result<()> {
    let psi = files::load_function(&a.atom)?;
    let set = files::load_set(&a.set)?;
    let space = SpaceConfig {
        group: *set.spec(),
        grid: parse("grid", &a.grid)?,
        band: parse::<BandConfig>("band", &a.band)?,
    };
    let opts = frame_options(&a, ctx.exec);
    let report = dilation_frames::frames::frame_bounds(&psi, &set, space.build()?, &opts)?;
    files::add_function(&mut ctx.out, "atom.bin", &psi, "atom", Value::Null)?;
    files::add_set(&mut ctx.out, "set.jsonl", &set)?;
    ctx.out.add_json("space.json", &space)?;
    ctx.out.add_json("report.json", &report)?;
    ctx.out.add_csv(
        "bounds.csv",
        &["A", "B", "B_over_A", "reconstruction_error"],
        [vec![
            format!("{:e}", report.lower_a),
            format!("{:e}", report.upper_b),
            format!("{:e}", report.ratio()),
            format!("{:e}", report.reconstruction_error),
        ]],
    );
    let tol = json!({ "tol": a.tol, "max_iterations": a.max_iterations, "cg_tol": a.cg_tol });
    let summary = json!({ "A": report.lower_a, "B": report.upper_b, "B_over_A": report.ratio(), "reconstruction_error": report.reconstruction_error });
    ctx.finish("frame bounds", to_value(&a), Some(a.seed), tol, summary)
}

fn frame_reconstruct(mut ctx: Ctx, a: ReconstructArgs) -> Result<()> {
    let frame = FrameDir::load(&a.frame)?;
    let report = frame
        .report
        .clone()
        .context("frame directory has no report.json; run `frame bounds` first")?;
    let f = files::load_function(&a.signal)?;
    let sys = FrameSystem::from_sampled(&frame.atom, &frame.set, frame.space.build()?, ctx.exec)?;
    let rec = sys.reconstruct(&f, &report, a.cg_tol)?;
    files::add_function(&mut ctx.out, "reconstruction.bin", &rec.signal, "reconstruction", Value::Null)?;
    ctx.out.add_csv(
        "reconstruct.csv",
        &["relative_error", "iterations", "residual"],
        [vec![
            format!("{:e}", rec.relative_error),
            rec.iterations.to_string(),
            format!("{:e}", rec.residual),
        ]],
    );
    let summary = json!({ "relative_error": rec.relative_error, "iterations": rec.iterations, "residual": rec.residual });
    ctx.finish("frame reconstruct", to_value(&a), None, json!({ "cg_tol": a.cg_tol }), summary)
}

fn frame_analyze(mut ctx: Ctx, a: AnalyzeArgs) -> Result<()> {
    let f = files::load_function(&a.signal)?;
    let psi = files::load_function(&a.atom)?;
    let set = files::load_set(&a.set)?;
    let c = analysis(&f, &psi, &set)?;
    files::add_coefficients(&mut ctx.out, "coeffs.bin", &c)?;
    let truncated = c.truncated.iter().filter(|t| **t).count();
    ctx.finish(
        "frame analyze",
        to_value(&a),
        None,
        Value::Null,
        json!({ "coefficients": c.len(), "truncated": truncated }),
    )
}

fn frame_random_signal(mut ctx: Ctx, a: RandomSignalArgs) -> Result<()> {
    let frame = FrameDir::load(&a.frame)?;
    let space = frame.space.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let u: Vec<Complex64> = (0..space.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut f = space.signal(&u)?;
    for z in &mut f.samples {
        z.im = 0.0;
    }
    files::add_function(&mut ctx.out, "signal.bin", &f, "signal", json!({ "seed": a.seed }))?;
    ctx.finish(
        "frame random-signal",
        to_value(&a),
        Some(a.seed),
        Value::Null,
        json!({ "samples": f.samples.len(), "l2_norm": f.l2_norm() }),
    )
}

fn frame_coeff_norm(mut ctx: Ctx, a: CoeffNormArgs) -> Result<()> {
    let c = files::load_coefficients(&a.coeffs)?;
    let w: WeightSpec = parse("weights", &a.weights)?;
    let norm = coefficient_norm(&c, a.p, a.q, &w)?;
    let result = json!({ "p": a.p, "q": a.q, "weights": w, "norm": norm, "coefficients": c.len() });
    ctx.out.add_json("coeff_norm.json", &result)?;
    ctx.finish("frame coeff-norm", to_value(&a), None, Value::Null, result)
}

fn approx_curve(mut ctx: Ctx, a: EnCurveArgs) -> Result<()> {
    let frame = FrameDir::load(&a.frame)?;
    let report = frame
        .report
        .clone()
        .context("frame directory has no report.json; run `frame bounds` first")?;
    let f = files::load_function(&a.signal)?;
    let sys = FrameSystem::from_sampled(&frame.atom, &frame.set, frame.space.build()?, ctx.exec)?;
    let u = sys.space().coordinates(&f)?;
    let opts = ApproxOptions {
        strategy: match a.strategy {
            StrategyArg::LargestDual => Strategy::LargestDualCoeff,
            StrategyArg::Omp => Strategy::OmpLite,
        },
        p: a.p,
        cg_tol: a.cg_tol,
    };
    let nmax = a.nmax.min(sys.len());
    let curve = greedy_n_term(&sys, &u, &report, nmax, &opts)?;
    let dual = sys.dual_coefficients(&u, &report, a.cg_tol)?;
    let check = summability_check(&curve, &dual, a.p)?;
    ctx.out.add_csv(
        "en_curve.csv",
        &["n", "E_n"],
        curve
            .n_values
            .iter()
            .zip(&curve.errors)
            .map(|(n, e)| vec![n.to_string(), format!("{e:e}")]),
    );
    let summary = json!({
        "p": a.p,
        "nmax": nmax,
        "summability_lhs": check.lhs,
        "coeff_p_norm": check.rhs_norm,
        "fitted_C": check.fitted_c,
        "finite": check.finite,
        "warnings": curve.warnings,
    });
    ctx.out.add_json("en_summary.json", &summary)?;
    ctx.finish("approx en-curve", to_value(&a), None, json!({ "cg_tol": a.cg_tol }), summary)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
