//! `hcone` command-line front end.
//!
//! Exit status: 0 on success or a passing check, 1 when a check fails, 2 on
//! usage, parse or input errors.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use hcone_core::calibrate::{
    distributional_divergence, verify_minimality_certificate, AuditOptions, CalibrationField, TestFunction,
};
use hcone_core::cone::{classify, SurfaceSpec};
use hcone_core::export::{export_figure_data, export_mesh, write_segments_csv, FigureSpec, MeshSpec};
use hcone_core::hgroup::{balayage_area, lift_curve, HPoint, PlanarCurve};
use hcone_core::perimeter::{
    perimeter_of_graph, perturbation_test, plane, symmetric_eps, truncation_convergence, Domain2D, GraphFunction,
    PerturbOptions,
};
use hcone_core::{ArcFamily, ConeSurface, Error, Vec2};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HCONE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "hcone", version, about = "Minimal cones in the first Heisenberg group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ArcsArg {
    /// Arc family JSON file.
    #[arg(long, value_name = "FILE")]
    pub arcs: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Height u(x, y) of the cone at one or more points.
    Eval {
        #[command(flatten)]
        arcs: ArcsArg,
        /// Planar point; repeat for several.
        #[arg(long, value_name = "X,Y", value_parser = parse_point, required = true, allow_hyphen_values = true)]
        at: Vec<Vec2>,
    },
    /// Gradient of u, with both one-sided limits on interface rays.
    Grad {
        #[command(flatten)]
        arcs: ArcsArg,
        /// Planar point; repeat for several.
        #[arg(long, value_name = "X,Y", value_parser = parse_point, required = true, allow_hyphen_values = true)]
        at: Vec<Vec2>,
    },
    /// Horizontal lift of a polyline, or of the characteristic line through a point.
    Lift {
        /// Polyline CSV (x,y per line; `#` comments).
        #[arg(long, value_name = "FILE", conflicts_with = "through")]
        curve: Option<PathBuf>,
        /// Starting height of the lift.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        /// Lift the characteristic line through this point of the cone.
        #[arg(long, value_name = "X,Y", value_parser = parse_point, requires = "arcs", allow_hyphen_values = true)]
        through: Option<Vec2>,
        #[arg(long, value_name = "FILE")]
        arcs: Option<PathBuf>,
        /// Length of the characteristic segment from its foot.
        #[arg(long, default_value_t = 2.0)]
        length: f64,
        /// Write lifted points as CSV `x,y,t`.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Singular set and a sampled check that the horizontal normal vanishes there.
    Singular {
        #[command(flatten)]
        arcs: ArcsArg,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Whether the cone is C1, with a witness ray when it is not.
    CheckC1 {
        #[command(flatten)]
        arcs: ArcsArg,
    },
    /// Classify a C1 minimal cone.
    Classify {
        #[arg(long, value_name = "FILE", conflicts_with_all = ["vertical_plane", "horizontal_plane"])]
        arcs: Option<PathBuf>,
        /// Vertical plane through the origin with this planar normal.
        #[arg(long, value_name = "NX,NY", value_parser = parse_point, allow_hyphen_values = true)]
        vertical_plane: Option<Vec2>,
        #[arg(long)]
        horizontal_plane: bool,
    },
    /// Calibration certificate: normal agreement, divergence and interface flux.
    CheckCalibration {
        #[command(flatten)]
        arcs: ArcsArg,
        /// Also integrate against 20 smooth test functions on an N x N grid over [-4,4]^2.
        #[arg(long, value_name = "N")]
        audit_grid: Option<usize>,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Perimeter of the subgraph over a planar domain.
    Perimeter {
        /// Arc family; the plane t = 0 when omitted.
        #[arg(long, value_name = "FILE")]
        arcs: Option<PathBuf>,
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Random bump perturbations; fails if any lowers the perimeter.
    Perturb {
        #[arg(long, value_name = "FILE")]
        arcs: Option<PathBuf>,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Magnitudes; each is tried with both signs.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05", allow_hyphen_values = true)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Fixed tolerance instead of calibrating on the plane.
        #[arg(long)]
        tol: Option<f64>,
        /// Per-trial CSV `trial,eps,delta,cx,cy,radius,amplitude`.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Sup-norm differences between truncations of an infinite family.
    Truncate {
        #[command(flatten)]
        arcs: ArcsArg,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        ks: Vec<usize>,
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Swing of the transverse derivative across tail arcs near the accumulation ray.
    ProbeOscillation {
        #[command(flatten)]
        arcs: ArcsArg,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Number of tail arcs to probe.
        #[arg(long, default_value_t = 12)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Triangle mesh of the graph over a disk.
    Mesh {
        #[command(flatten)]
        arcs: ArcsArg,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Spokes per turn before interface rays are added.
        #[arg(long, default_value_t = 64)]
        angular: usize,
        #[arg(long, default_value_t = 32)]
        radial: usize,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Line segments of the ruling arrangement as CSV.
    Figure {
        #[command(flatten)]
        arcs: ArcsArg,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Characteristic lines per half-sector.
        #[arg(long, default_value_t = 8)]
        lines: usize,
        #[arg(long, default_value_t = 48)]
        rays: usize,
        /// Add calibration arrows.
        #[arg(long)]
        with_field: bool,
        #[arg(long, default_value_t = 16)]
        field_grid: usize,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Validate an arc family and print it in normalized form.
    Normalize {
        #[command(flatten)]
        arcs: ArcsArg,
    },
}

#[derive(Args, Debug, Clone)]
pub struct DomainArgs {
    /// `disk:R`, `disk:R@CX,CY` or `rect:X0,Y0,X1,Y1`.
    #[arg(long, default_value = "disk:1")]
    pub domain: String,
    /// Grid resolution (cells across).
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
}

impl DomainArgs {
    fn parse(&self) -> Result<Domain2D, Error> {
        let base: Domain2D = self.domain.split('/').next().unwrap_or_default().parse()?;
        base.with_resolution(self.grid)
    }
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("{x:?}: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("{y:?}: {e}"))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(format!("non-finite point {s:?}"));
    }
    Ok(Vec2::new(x, y))
}

/// Outcome of a command: JSON for stdout and whether the check passed.
struct Report {
    body: serde_json::Value,
    pass: bool,
}

impl Report {
    fn ok(body: impl Serialize) -> Result<Self, Error> {
        Ok(Self { body: serde_json::to_value(body)?, pass: true })
    }

    fn check(body: impl Serialize, pass: bool) -> Result<Self, Error> {
        Ok(Self { body: serde_json::to_value(body)?, pass })
    }
}

fn load_family(path: &Path) -> Result<ArcFamily, Error> {
    let text = std::fs::read_to_string(path)?;
    ArcFamily::from_json_str(&text)
}

fn load_cone(path: &Path) -> Result<ConeSurface, Error> {
    Ok(ConeSurface::new(load_family(path)?))
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn execute(cmd: Command) -> Result<Report, Error> {
    match cmd {
        Command::Eval { arcs, at } => {
            let cone = load_cone(&arcs.arcs)?;
            let rows: Vec<_> = at.iter().map(|&v| json!({ "at": [v.x, v.y], "value": cone.evaluate(v) })).collect();
            Report::ok(single_or_list(rows))
        }
        Command::Grad { arcs, at } => {
            let cone = load_cone(&arcs.arcs)?;
            let rows: Vec<_> = at
                .iter()
                .map(|&v| json!({ "at": [v.x, v.y], "gradient": cone.gradient(v) }))
                .collect();
            Report::ok(single_or_list(rows))
        }
        Command::Lift { curve, t0, through, arcs, length, out } => {
            let (points, area) = match (curve, through, arcs) {
                (Some(path), _, _) => {
                    let c = PlanarCurve::from_csv(BufReader::new(File::open(path)?))?;
                    let area = balayage_area(&c).ok();
                    (lift_curve(&c, t0), area)
                }
                (None, Some(v), Some(arcs)) => {
                    let cone = load_cone(&arcs)?;
                    let ray = cone.characteristic_ray(v)?;
                    (ray.lift(length, 64), None)
                }
                _ => return Err(Error::Parse("lift needs --curve FILE or --through X,Y with --arcs FILE".into())),
            };
            if let Some(out) = out {
                write_points_csv(&points, create(&out)?)?;
            }
            let last = *points.last().expect("lift has vertices");
            Report::ok(json!({
                "vertices": points.len(),
                "start": points[0],
                "end": last,
                "balayage_area": area,
            }))
        }
        Command::Singular { arcs, radius, samples } => {
            let cone = load_cone(&arcs.arcs)?;
            let audit = cone.audit_singular_set(radius, samples, 1e-3)?;
            // N is linear along rays, so rounding grows with the radius
            let pass = audit.max_on_ray <= 1e-12 * radius.max(1.0);
            Report::check(audit, pass)
        }
        Command::CheckC1 { arcs } => {
            let cone = load_cone(&arcs.arcs)?;
            let r = cone.is_c1();
            let pass = r.c1;
            Report::check(r, pass)
        }
        Command::Classify { arcs, vertical_plane, horizontal_plane } => {
            let cone;
            let spec = match (arcs, vertical_plane, horizontal_plane) {
                (Some(path), None, false) => {
                    cone = load_cone(&path)?;
                    SurfaceSpec::Cone(&cone)
                }
                (None, Some(normal), false) => SurfaceSpec::VerticalPlane { normal },
                (None, None, true) => SurfaceSpec::HorizontalPlane,
                _ => {
                    return Err(Error::Parse(
                        "classify needs exactly one of --arcs, --vertical-plane, --horizontal-plane".into(),
                    ))
                }
            };
            match classify(spec) {
                Ok(c) => Report::ok(c),
                Err(Error::NotC1(reason)) => Report::check(json!({ "c1": false, "reason": reason }), false),
                Err(e) => Err(e),
            }
        }
        Command::CheckCalibration { arcs, audit_grid, seed } => {
            let cone = load_cone(&arcs.arcs)?;
            let opts = AuditOptions { seed, ..AuditOptions::default() };
            let cert = verify_minimality_certificate(&cone, &opts)?;
            let field = CalibrationField::build(&cone)?;
            let mut pass = cert.pass;
            let audit = match audit_grid {
                Some(n) => {
                    use rand::{Rng, SeedableRng};
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    let values: Vec<f64> = (0..20)
                        .map(|_| {
                            let phi = TestFunction {
                                center: Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                                radius: rng.gen_range(0.5..1.5),
                            };
                            distributional_divergence(&field, &phi, 4.0, n, 6)
                        })
                        .collect();
                    let worst = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                    pass &= worst < 1e-4;
                    Some(json!({ "grid": n, "test_functions": values.len(), "max_abs": worst, "pass": worst < 1e-4 }))
                }
                None => None,
            };
            Report::check(
                json!({
                    "pass": pass,
                    "certificate": cert,
                    "regions": field.decomposition().regions,
                    "interfaces": field.decomposition().interfaces,
                    "distributional_audit": audit,
                }),
                pass,
            )
        }
        Command::Perimeter { arcs, domain } => {
            let dom = domain.parse()?;
            let value = match arcs {
                Some(path) => perimeter_of_graph(&load_cone(&path)?, &dom),
                None => perimeter_of_graph(&plane(), &dom),
            };
            Report::ok(json!({ "domain": dom, "perimeter": value }))
        }
        Command::Perturb { arcs, domain, trials, eps, seed, tol, csv } => {
            let dom = domain.parse()?;
            let opts = PerturbOptions { trials, eps: symmetric_eps(&eps), seed, tol };
            let report = match arcs {
                Some(path) => run_perturb(&load_cone(&path)?, &dom, &opts),
                None => run_perturb(&plane(), &dom, &opts),
            };
            if let Some(path) = csv {
                let mut w = csv::Writer::from_writer(create(&path)?);
                w.write_record(["trial", "eps", "delta", "cx", "cy", "radius", "amplitude"])?;
                for t in &report.trials {
                    for &(e, d) in &t.deltas {
                        w.serialize((t.trial, e, d, t.bump.center.x, t.bump.center.y, t.bump.radius, t.bump.amplitude))?;
                    }
                }
                w.flush()?;
            }
            let pass = report.pass;
            Report::check(
                json!({
                    "pass": pass,
                    "n": report.n,
                    "trials": report.trials.len(),
                    "eps": opts.eps,
                    "tol": report.tol,
                    "min_delta": report.min_delta,
                    "worst": report.worst.map(|(trial, eps)| json!({
                        "trial": trial,
                        "eps": eps,
                        "bump": report.trials[trial].bump,
                    })),
                }),
                pass,
            )
        }
        Command::Truncate { arcs, ks, domain } => {
            let family = load_family(&arcs.arcs)?;
            let dom = domain.parse()?;
            let r = truncation_convergence(&family, &dom, &ks)?;
            let pass = r.pass;
            Report::check(r, pass)
        }
        Command::ProbeOscillation { arcs, radius, count, samples } => {
            let cone = load_cone(&arcs.arcs)?;
            Report::ok(cone.oscillation_probe(radius, count, samples)?)
        }
        Command::Mesh { arcs, radius, angular, radial, out } => {
            let cone = load_cone(&arcs.arcs)?;
            let spec = MeshSpec::new(radius, angular, radial)?;
            let mesh = export_mesh(&cone, &spec)?;
            let mut w = create(&out)?;
            mesh.write_obj(&mut w)?;
            w.flush()?;
            Report::ok(json!({
                "path": out,
                "vertices": mesh.vertices.len(),
                "faces": mesh.faces.len(),
                "spec": spec,
            }))
        }
        Command::Figure { arcs, radius, lines, rays, with_field, field_grid, out } => {
            let cone = load_cone(&arcs.arcs)?;
            let spec = FigureSpec {
                radius,
                rays_per_turn: rays,
                lines_per_half: lines,
                field_grid: with_field.then_some(field_grid),
            };
            let segs = export_figure_data(&cone, &spec)?;
            write_segments_csv(&segs, create(&out)?)?;
            let mut counts = std::collections::BTreeMap::new();
            for s in &segs {
                *counts.entry(serde_json::to_value(s.kind)?.as_str().unwrap_or("").to_string()).or_insert(0usize) += 1;
            }
            Report::ok(json!({ "path": out, "segments": segs.len(), "by_kind": counts }))
        }
        Command::Normalize { arcs } => Report::ok(load_family(&arcs.arcs)?.to_json_value()),
    }
}

fn run_perturb<G: GraphFunction + ?Sized>(
    u: &G,
    dom: &Domain2D,
    opts: &PerturbOptions,
) -> hcone_core::perimeter::PerturbationReport {
    perturbation_test(u, dom, opts)
}

fn single_or_list(mut rows: Vec<serde_json::Value>) -> serde_json::Value {
    if rows.len() == 1 {
        rows.pop().unwrap()
    } else {
        serde_json::Value::Array(rows)
    }
}

fn write_points_csv<W: Write>(points: &[HPoint], w: W) -> Result<(), Error> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y", "t"])?;
    for p in points {
        wr.serialize((p.x, p.y, p.t))?;
    }
    wr.flush()?;
    Ok(())
}

/// Size the global thread pool from `HCONE_THREADS` when set.
pub fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_ENV}={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Run with the given arguments (including the program name), writing the
/// JSON report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    match execute(cli.command) {
        Ok(report) => {
            if let Err(e) = hcone_core::json::to_writer(&mut *out, &report.body) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
            let _ = writeln!(out);
            if report.pass {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
