//! `billiard`: dimension-bound pipeline for open billiards on the command
//! line. Subcommands: validate | bounds | orbit | hull | simulate | plot.
//! Exit codes: 0 success, 1 domain-condition failure, 2 parse/usage error,
//! 3 numerical non-convergence.

mod config;
mod report;
mod svg;

use std::path::{Path, PathBuf};

use billiard_core::constants::{build_domain, compute_constants, Mode};
use billiard_core::dimension::{dimension_bounds, g_extrema, BoundVariant};
use billiard_core::dynamics::{simulate, PhasePoint};
use billiard_core::geometry::no_eclipse_check;
use billiard_core::orbits::{
    all_closest_pairs, find_periodic_orbit, hull_h, test_hull_conjecture, OrbitError,
    SymbolSequence,
};
use billiard_core::{Billiard, Tolerances};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{BilliardConfig, ConfigError};
use report::{ConstantsOut, ModeReport, Provenance, RunReport};

#[derive(Parser)]
#[command(name = "billiard", version, about = "Hausdorff-dimension bounds and dynamics for open billiards")]
struct Cli {
    /// Path to the JSON billiard configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named tolerance set overriding the config (default|strict|fast).
    #[arg(long, global = true)]
    tolerance_profile: Option<String>,
    /// Write the machine-readable report to this file.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Seed for randomized conjecture sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Natural,
    Adjusted,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Eq1,
    Eq2,
    Eq7,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotWhat {
    Billiard,
    Hull,
    Orbit,
    Domain,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the no-eclipse condition triple by triple.
    Validate,
    /// Run the full constants -> domain -> g -> dimension-bound pipeline.
    Bounds {
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = VariantArg::All)]
        variant: VariantArg,
    },
    /// Find the periodic orbit with a given symbol sequence (1-based).
    Orbit {
        #[arg(long)]
        sequence: String,
        /// Override the sweep budget of the orbit minimizer.
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Closest-pair hull, optionally with the orbit-containment test.
    Hull {
        #[arg(long)]
        test_conjecture: bool,
        #[arg(long, default_value_t = 6)]
        max_period: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Trace a trajectory and its front-curvature/contraction data.
    Simulate {
        /// Start position, comma-separated coordinates.
        #[arg(long)]
        q: String,
        /// Start direction, comma-separated coordinates.
        #[arg(long)]
        v: String,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Emit an SVG figure.
    Plot {
        #[arg(long, value_enum)]
        what: PlotWhat,
        #[arg(long)]
        out: PathBuf,
        /// Orbit symbol sequence for --what orbit (1-based).
        #[arg(long)]
        sequence: Option<String>,
    },
}

struct Failure {
    code: i32,
    msg: String,
}

impl Failure {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        Self {
            code,
            msg: msg.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Domain(_) => 1,
            ConfigError::NonConvergence(_) => 3,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

fn geometry_failure(e: billiard_core::geometry::GeometryError) -> Failure {
    use billiard_core::geometry::GeometryError as G;
    let code = match e {
        G::NoConvergence => 3,
        G::EclipseViolation(_) | G::NotDisjoint(_, _) | G::TooFewObstacles(_) => 1,
        _ => 3,
    };
    Failure::new(code, e.to_string())
}

fn orbit_failure(e: OrbitError) -> Failure {
    match e {
        OrbitError::InadmissibleSequence(_) => Failure::new(2, e.to_string()),
        OrbitError::NoConvergence => Failure::new(3, e.to_string()),
        OrbitError::Geometry(g) => geometry_failure(g),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            std::process::exit(f.code);
        }
    }
}

struct Ctx {
    cfg: BilliardConfig,
    cfg_text: String,
    tol: Tolerances,
    profile: Option<String>,
    json: Option<PathBuf>,
    seed: Option<u64>,
}

fn load_ctx(cli: &Cli) -> Result<Ctx, Failure> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Failure::new(2, "--config PATH is required"))?;
    let cfg = BilliardConfig::load(path)?;
    let cfg_text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("cannot read config: {e}")))?;
    let tol = cfg.tolerances(cli.tolerance_profile.as_deref())?;
    Ok(Ctx {
        cfg,
        cfg_text,
        tol,
        profile: cli.tolerance_profile.clone(),
        json: cli.json.clone(),
        seed: cli.seed,
    })
}

fn run(cli: &Cli) -> Result<i32, Failure> {
    let ctx = load_ctx(cli)?;
    match &cli.cmd {
        Cmd::Validate => dispatch!(ctx, cmd_validate(&ctx)),
        Cmd::Bounds { mode, variant } => dispatch!(ctx, cmd_bounds(&ctx, *mode, *variant)),
        Cmd::Orbit { sequence, max_iter } => {
            dispatch!(ctx, cmd_orbit(&ctx, sequence, *max_iter))
        }
        Cmd::Hull {
            test_conjecture,
            max_period,
            samples,
        } => dispatch!(ctx, cmd_hull(&ctx, *test_conjecture, *max_period, *samples)),
        Cmd::Simulate { q, v, steps } => dispatch!(ctx, cmd_simulate(&ctx, q, v, *steps)),
        Cmd::Plot {
            what,
            out,
            sequence,
        } => cmd_plot(&ctx, *what, out, sequence.as_deref()),
    }
}

/// Build the billiard at the configured dimension and call the generic
/// handler.
macro_rules! dispatch {
    ($ctx:expr, $handler:ident ( $($args:expr),* )) => {
        match $ctx.cfg.dimension {
            2 => {
                let b = $ctx.cfg.build_2d(&$ctx.tol)?;
                $handler(&b, $($args),*)
            }
            3 => {
                let b = $ctx.cfg.build_3d(&$ctx.tol)?;
                $handler(&b, $($args),*)
            }
            _ => unreachable!("dimension validated at load"),
        }
    };
}
use dispatch;

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    if let Some(p) = path {
        let mut s = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::new(2, format!("serialization failed: {e}")))?;
        s.push('\n');
        std::fs::write(p, s).map_err(|e| Failure::new(2, format!("cannot write {p:?}: {e}")))?;
    }
    Ok(())
}

fn cmd_validate<const D: usize>(b: &Billiard<D>, ctx: &Ctx) -> Result<i32, Failure> {
    let rep = no_eclipse_check(b, &ctx.tol);
    for t in &rep.triples {
        println!(
            "triple (K{} | K{}, K{}): margin {:>12.6}  {}",
            t.blocked + 1,
            t.pair.0 + 1,
            t.pair.1 + 1,
            t.margin,
            if t.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "no-eclipse condition: {}",
        if rep.all_pass { "pass" } else { "FAIL" }
    );
    write_json(ctx.json.as_deref(), &rep)?;
    Ok(if rep.all_pass { 0 } else { 1 })
}

fn cmd_bounds<const D: usize>(
    b: &Billiard<D>,
    ctx: &Ctx,
    mode: ModeArg,
    variant: VariantArg,
) -> Result<i32, Failure> {
    let modes: &[Mode] = match mode {
        ModeArg::Natural => &[Mode::Natural],
        ModeArg::Adjusted => &[Mode::Adjusted],
        ModeArg::Both => &[Mode::Natural, Mode::Adjusted],
    };
    let variants: &[BoundVariant] = match variant {
        VariantArg::Eq1 => &[BoundVariant::TwoSidedEq1],
        VariantArg::Eq2 => &[BoundVariant::AlphaScaledEq2],
        VariantArg::Eq7 => &[BoundVariant::GeneralEq7],
        VariantArg::All => &[
            BoundVariant::TwoSidedEq1,
            BoundVariant::AlphaScaledEq2,
            BoundVariant::GeneralEq7,
        ],
    };
    let mut mode_reports = Vec::new();
    for &m in modes {
        let constants =
            compute_constants(b, m, ctx.cfg.kappa_reading, &ctx.tol).map_err(geometry_failure)?;
        let domain = build_domain(&constants);
        let gx = g_extrema(&domain);
        let bounds = variants
            .iter()
            .map(|&v| dimension_bounds(b.len(), &gx, &constants, ctx.cfg.k0_plus, v))
            .collect();
        mode_reports.push(ModeReport {
            constants: ConstantsOut::from_report(&constants),
            domain,
            g_extrema: gx,
            bounds,
        });
    }
    let report = RunReport {
        schema_version: config::SCHEMA_VERSION,
        provenance: Provenance::new(&ctx.cfg_text, ctx.profile.as_deref(), ctx.tol, ctx.seed),
        modes: mode_reports,
    };
    report::emit(ctx.json.as_deref(), &report.to_json(), &report.to_text())
        .map_err(|e| Failure::new(2, format!("cannot write report: {e}")))?;
    Ok(0)
}

fn parse_sequence(s: &str, u: usize) -> Result<SymbolSequence, Failure> {
    let symbols: Vec<usize> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Failure::new(2, format!("bad symbol '{t}' in sequence")))
                .and_then(|n| {
                    if n == 0 {
                        Err(Failure::new(2, "symbols are 1-based".to_string()))
                    } else {
                        Ok(n - 1)
                    }
                })
        })
        .collect::<Result<_, _>>()?;
    SymbolSequence::periodic(symbols, u).map_err(orbit_failure)
}

#[derive(Serialize)]
struct OrbitOut {
    sequence: Vec<usize>,
    points: Vec<Vec<f64>>,
    length: f64,
    residual: f64,
}

fn cmd_orbit<const D: usize>(
    b: &Billiard<D>,
    ctx: &Ctx,
    sequence: &str,
    max_iter: Option<usize>,
) -> Result<i32, Failure> {
    let seq = parse_sequence(sequence, b.len())?;
    let mut tol = ctx.tol;
    if let Some(n) = max_iter {
        tol.orbit_sweeps = n;
    }
    let orbit = find_periodic_orbit(b, &seq, &tol).map_err(orbit_failure)?;
    println!("periodic orbit {sequence}:");
    for (j, p) in orbit.points.iter().enumerate() {
        let coords: Vec<String> = p.iter().map(|c| format!("{c:>12.8}")).collect();
        println!("  q{} on K{}: ({})", j + 1, seq.symbols()[j] + 1, coords.join(", "));
    }
    println!("  length F  = {:.10}", orbit.length);
    println!("  residual  = {:.3e}", orbit.residual);
    let out = OrbitOut {
        sequence: seq.symbols().iter().map(|s| s + 1).collect(),
        points: orbit.points.iter().map(|p| p.iter().copied().collect()).collect(),
        length: orbit.length,
        residual: orbit.residual,
    };
    write_json(ctx.json.as_deref(), &out)?;
    Ok(0)
}

#[derive(Serialize)]
struct HullOut {
    vertices: Vec<Vec<f64>>,
    degenerate: bool,
    pair_points: Vec<Vec<f64>>,
    conjecture: Option<billiard_core::orbits::ConjectureReport>,
}

fn cmd_hull<const D: usize>(
    b: &Billiard<D>,
    ctx: &Ctx,
    test_conjecture: bool,
    max_period: usize,
    samples: usize,
) -> Result<i32, Failure> {
    let pairs = all_closest_pairs(b, &ctx.tol).map_err(geometry_failure)?;
    let hull = hull_h(&pairs);
    println!(
        "hull H: {} vertices{}",
        hull.vertices.len(),
        if hull.degenerate { " (degenerate)" } else { "" }
    );
    for v in &hull.vertices {
        let coords: Vec<String> = v.iter().map(|c| format!("{c:>12.8}")).collect();
        println!("  ({})", coords.join(", "));
    }
    let conjecture = if test_conjecture {
        let rep = test_hull_conjecture(b, max_period, samples, ctx.seed.unwrap_or(0), &ctx.tol)
            .map_err(orbit_failure)?;
        println!(
            "orbit containment: {} orbits tested, {} solver failures, max outward violation {:.3e}{}",
            rep.orbits_tested,
            rep.solver_failures,
            rep.max_violation,
            match &rep.worst_sequence {
                Some(w) => format!(
                    " (sequence {})",
                    w.iter().map(|s| (s + 1).to_string()).collect::<Vec<_>>().join(",")
                ),
                None => String::new(),
            }
        );
        Some(rep)
    } else {
        None
    };
    let out = HullOut {
        vertices: hull.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
        degenerate: hull.degenerate,
        pair_points: pairs
            .all_points()
            .iter()
            .map(|p| p.iter().copied().collect())
            .collect(),
        conjecture,
    };
    write_json(ctx.json.as_deref(), &out)?;
    Ok(0)
}

fn parse_point<const D: usize>(s: &str, what: &str) -> Result<nalgebra::SVector<f64, D>, Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::new(2, format!("bad coordinate '{t}' in {what}")))
        })
        .collect::<Result<_, _>>()?;
    if parts.len() != D {
        return Err(Failure::new(
            2,
            format!("{what} needs {D} coordinates, got {}", parts.len()),
        ));
    }
    let mut v = nalgebra::SVector::<f64, D>::zeros();
    for (i, c) in parts.iter().enumerate() {
        v[i] = *c;
    }
    Ok(v)
}

#[derive(Serialize)]
struct SimRow {
    step: usize,
    obstacle: usize,
    q: Vec<f64>,
    flight: f64,
    angle: f64,
    curvature_lo: f64,
    curvature_hi: f64,
    delta_lo: f64,
    delta_hi: f64,
}

#[derive(Serialize)]
struct SimOut {
    rows: Vec<SimRow>,
    delta_product_lo: f64,
    delta_product_hi: f64,
    escaped: bool,
}

fn cmd_simulate<const D: usize>(
    b: &Billiard<D>,
    ctx: &Ctx,
    q: &str,
    v: &str,
    steps: usize,
) -> Result<i32, Failure> {
    let q0 = parse_point::<D>(q, "--q")?;
    let v0 = parse_point::<D>(v, "--v")?;
    if v0.norm() < 1e-12 {
        return Err(Failure::new(2, "--v must be a nonzero direction"));
    }
    if b.obstacles().iter().any(|k| k.contains(&q0)) {
        return Err(Failure::new(2, "--q lies inside an obstacle"));
    }
    let x0 = PhasePoint::new(q0, v0);
    let traj = simulate(&x0, b, steps, None, &ctx.tol)
        .map_err(|e| Failure::new(3, format!("simulation failed: {e}")))?;
    println!("{:>4} {:>3} {:>12} {:>10} {:>22} {:>22}", "step", "K", "flight", "angle", "front curvature", "delta");
    let mut rows = Vec::new();
    for (m, ev) in traj.events.iter().enumerate() {
        let eig = traj.fronts[m + 1].eigenvalues();
        let (klo, khi) = (eig[0], *eig.last().unwrap());
        let (dlo, dhi) = traj.deltas[m];
        println!(
            "{:>4} {:>3} {:>12.6} {:>10.6} [{:>9.4}, {:>9.4}] [{:>9.6}, {:>9.6}]",
            m + 1,
            ev.obstacle + 1,
            ev.flight,
            ev.angle,
            klo,
            khi,
            dlo,
            dhi
        );
        rows.push(SimRow {
            step: m + 1,
            obstacle: ev.obstacle + 1,
            q: ev.q.iter().copied().collect(),
            flight: ev.flight,
            angle: ev.angle,
            curvature_lo: klo,
            curvature_hi: khi,
            delta_lo: dlo,
            delta_hi: dhi,
        });
    }
    let (plo, phi) = traj.delta_product();
    println!("delta product: [{plo:.6e}, {phi:.6e}]");
    if traj.escaped {
        println!("trajectory escapes after {} reflections", traj.events.len());
    }
    let out = SimOut {
        rows,
        delta_product_lo: plo,
        delta_product_hi: phi,
        escaped: traj.escaped,
    };
    write_json(ctx.json.as_deref(), &out)?;
    Ok(0)
}

fn cmd_plot(
    ctx: &Ctx,
    what: PlotWhat,
    out: &Path,
    sequence: Option<&str>,
) -> Result<i32, Failure> {
    let svg_text = match what {
        PlotWhat::Domain => {
            // Works at any ambient dimension.
            macro_rules! domain_for {
                ($b:expr) => {{
                    let nat = compute_constants(&$b, Mode::Natural, ctx.cfg.kappa_reading, &ctx.tol)
                        .map_err(geometry_failure)?;
                    let adj =
                        compute_constants(&$b, Mode::Adjusted, ctx.cfg.kappa_reading, &ctx.tol)
                            .map_err(geometry_failure)?;
                    svg::domain_svg(&build_domain(&nat), &build_domain(&adj))
                }};
            }
            match ctx.cfg.dimension {
                2 => {
                    let b = ctx.cfg.build_2d(&ctx.tol)?;
                    domain_for!(b)
                }
                3 => {
                    let b = ctx.cfg.build_3d(&ctx.tol)?;
                    domain_for!(b)
                }
                _ => unreachable!(),
            }
        }
        _ => {
            if ctx.cfg.dimension != 2 {
                return Err(Failure::new(
                    2,
                    "billiard/hull/orbit plots need a 2-dimensional config",
                ));
            }
            let b = ctx.cfg.build_2d(&ctx.tol)?;
            let pairs = all_closest_pairs(&b, &ctx.tol).map_err(geometry_failure)?;
            let hull = hull_h(&pairs);
            match what {
                PlotWhat::Billiard | PlotWhat::Hull => svg::billiard_svg(&b, &pairs, &hull),
                PlotWhat::Orbit => {
                    let seq_str = sequence
                        .ok_or_else(|| Failure::new(2, "--sequence is required for orbit plots"))?;
                    let seq = parse_sequence(seq_str, b.len())?;
                    let orbit = find_periodic_orbit(&b, &seq, &ctx.tol).map_err(orbit_failure)?;
                    svg::orbit_svg(&b, &pairs, &hull, &orbit.points)
                }
                PlotWhat::Domain => unreachable!(),
            }
        }
    };
    std::fs::write(out, svg_text)
        .map_err(|e| Failure::new(2, format!("cannot write {out:?}: {e}")))?;
    println!("wrote {}", out.display());
    Ok(0)
}
