//! Command-line driver. `run` parses arguments, writes reports and returns the
//! process exit code: 0 success, 1 verdict failure, 2 usage or input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::hdg::{self, HdgRow, StabilityThresholds};
use crate::inequalities::{self, AuditConfig, AuditMode, GammaRule, IneqId, Sweep, Thresholds, ALL_IDS};
use crate::mesh::{build_structured, check_regularity, load_mesh, save_mesh, TagRule};
use crate::report::{fmt_f, loglog_svg, write_atomic, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest relative residual accepted by `hdg solve` and `hdg converge`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Errors below this count as exact reproduction and are exempt from the rate check.
pub const EXACT_TOL: f64 = 1e-10;
/// Slack on the expected rate k + 1 in `hdg converge`.
pub const ORDER_SLACK: f64 = 0.2;

#[derive(Parser, Debug)]
#[command(
    name = "hdgkit",
    version,
    about = "HDG Poisson solver and discrete inequality audits on triangle meshes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate or validate meshes.
    #[command(subcommand)]
    Mesh(MeshCmd),
    /// Estimate inequality constants over refinement levels 1..=L (n = 2^l).
    Audit(AuditArgs),
    /// HDG experiments.
    #[command(subcommand)]
    Hdg(HdgCmd),
}

#[derive(Subcommand, Debug)]
enum MeshCmd {
    /// Structured n×n unit-square mesh in the text format.
    Gen {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=1024))]
        n: u32,
        #[arg(long, value_enum, default_value_t = Tags::Dirichlet)]
        tags: Tags,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a mesh file and print its shape-regularity report.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Tags {
    Dirichlet,
    LeftDirichlet,
    Neumann,
}

impl From<Tags> for TagRule {
    fn from(t: Tags) -> TagRule {
        match t {
            Tags::Dirichlet => TagRule::AllDirichlet,
            Tags::LeftDirichlet => TagRule::LeftDirichlet,
            Tags::Neumann => TagRule::AllNeumann,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Eigen,
    Sample,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Gamma {
    Left,
    Bottom,
    All,
}

impl From<Gamma> for GammaRule {
    fn from(g: Gamma) -> GammaRule {
        match g {
            Gamma::Left => GammaRule::Left,
            Gamma::Bottom => GammaRule::Bottom,
            Gamma::All => GammaRule::All,
        }
    }
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Inequality IDs, comma separated, or `all`.
    #[arg(long, value_delimiter = ',', required = true)]
    ineq: Vec<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=4))]
    k: u32,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=7))]
    levels: u32,
    #[arg(long, value_enum, default_value_t = Mode::Eigen)]
    mode: Mode,
    /// Random draws per level; a cross-check in eigen mode when --seed is given.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Required in sample mode.
    #[arg(long)]
    seed: Option<u64>,
    /// Boundary part Γ for the inequalities that use one.
    #[arg(long, value_enum, default_value_t = Gamma::Left)]
    gamma: Gamma,
    #[arg(long, default_value_t = Thresholds::default().max_ratio)]
    max_ratio: f64,
    #[arg(long, default_value_t = Thresholds::default().max_slope)]
    max_slope: f64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log-log plot of λ against h.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum HdgCmd {
    /// Solve on the finest level only (n = 2^levels).
    Solve(HdgArgs),
    /// Error table and observed orders over levels 1..=L.
    Converge(HdgArgs),
    /// Energy table over levels 1..=L with the boundedness verdict.
    Stability(HdgArgs),
}

#[derive(Args, Debug)]
struct HdgArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=4))]
    k: u32,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=7))]
    levels: u32,
    /// Stabilization τ > 0.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value = "manufactured-sine")]
    problem: String,
    /// Stability verdict: largest allowed max E / min E.
    #[arg(long, default_value_t = StabilityThresholds::default().max_ratio)]
    max_ratio: f64,
    /// Stability verdict: largest allowed |slope| of log E against log h.
    #[arg(long, default_value_t = StabilityThresholds::default().max_slope)]
    max_slope: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

struct Failure(i32, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    let res = match cli.cmd {
        Cmd::Mesh(MeshCmd::Gen { n, tags, out }) => mesh_gen(n as usize, tags.into(), out.as_deref(), stdout),
        Cmd::Mesh(MeshCmd::Check { file }) => mesh_check(&file, stdout),
        Cmd::Audit(a) => audit(&a, stdout, stderr),
        Cmd::Hdg(h) => hdg_cmd(h, stdout, stderr),
    };
    match res {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Failure::from),
    }
}

fn mesh_gen(n: usize, tags: TagRule, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, Failure> {
    emit(out, &save_mesh(&build_structured(n, tags)), stdout)?;
    Ok(EXIT_OK)
}

fn mesh_check(file: &Path, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", file.display())))?;
    let mesh = load_mesh(&text).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", file.display())))?;
    let r = check_regularity(&mesh);
    writeln!(
        stdout,
        "vertices {}\ncells {}\nfaces {}\nh_max {}\nkappa {}\ntheta {}\nmin_angle {}\nhanging_node_free {}\nstatus {}",
        mesh.n_vertices(),
        mesh.n_cells(),
        mesh.n_faces(),
        fmt_f(mesh.h_max()),
        fmt_f(r.kappa),
        fmt_f(r.theta),
        fmt_f(r.min_angle),
        r.hanging_node_free,
        if r.ok() { "ok" } else { "violation" }
    )?;
    Ok(if r.ok() { EXIT_OK } else { EXIT_VERDICT })
}

fn parse_ids(names: &[String]) -> Result<Vec<IneqId>, Failure> {
    let mut ids = Vec::new();
    for n in names {
        if n == "all" {
            ids.extend(ALL_IDS.iter().filter(|i| !i.is_negative_control()));
        } else {
            ids.push(IneqId::parse(n)?);
        }
    }
    Ok(ids)
}

fn audit(a: &AuditArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let ids = parse_ids(&a.ineq)?;
    let mode = match a.mode {
        Mode::Eigen => AuditMode::Eigen,
        Mode::Sample => AuditMode::Sample,
    };
    if matches!(mode, AuditMode::Sample) && a.seed.is_none() {
        return Err(Failure(EXIT_USAGE, "--seed is required with --mode sample".into()));
    }
    let cfg = AuditConfig {
        mode,
        samples: if a.seed.is_some() { a.samples } else { 0 },
        seed: a.seed,
        gamma: a.gamma.into(),
        thresholds: Thresholds {
            max_ratio: a.max_ratio,
            max_slope: a.max_slope,
        },
        ..AuditConfig::default()
    };
    let sweeps = ids
        .iter()
        .map(|&id| inequalities::sweep(id, a.k as usize, a.levels as usize, &cfg))
        .collect::<Result<Vec<Sweep>, _>>()?;

    let mut csv = String::new();
    writeln!(csv, "# hdgkit audit").unwrap();
    writeln!(
        csv,
        "# k={} levels={} mesh=structured n=2^l tags=dirichlet gamma={} mode={} samples={} seed={} null_tol={:e}",
        a.k,
        a.levels,
        cfg.gamma.name(),
        mode.name(),
        cfg.samples,
        a.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
        cfg.null_tol
    )
    .unwrap();
    writeln!(
        csv,
        "# verdict: >= 4 levels, no unbounded level, max/min <= {}, |slope| <= {}",
        a.max_ratio, a.max_slope
    )
    .unwrap();
    for s in &sweeps {
        writeln!(
            csv,
            "# {}: {} ratio={} slope={} unbounded={}",
            s.rows[0].id.name(),
            if s.verdict.pass { "pass" } else { "fail" },
            fmt_f(s.verdict.ratio),
            fmt_f(s.verdict.slope),
            s.verdict.unbounded
        )
        .unwrap();
    }
    writeln!(csv, "{}", inequalities::CSV_HEADER).unwrap();
    for s in &sweeps {
        for line in s.csv_lines() {
            writeln!(csv, "{line}").unwrap();
        }
    }
    emit(a.out.as_deref(), &csv, stdout)?;

    if let Some(p) = &a.svg {
        let series: Vec<Series> = sweeps
            .iter()
            .map(|s| Series {
                label: s.rows[0].id.name().into(),
                points: s.rows.iter().filter_map(|r| r.value().map(|v| (r.h_max, v))).collect(),
            })
            .collect();
        let svg = loglog_svg(&format!("inequality constants, k = {}", a.k), "h", "lambda", &series);
        emit(Some(p), &svg, stdout)?;
    }

    let failed: Vec<&str> = sweeps
        .iter()
        .filter(|s| !s.verdict.pass)
        .map(|s| s.rows[0].id.name())
        .collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        writeln!(stderr, "verdict fail: {}", failed.join(", "))?;
        Ok(EXIT_VERDICT)
    }
}

fn hdg_cmd(cmd: HdgCmd, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let (name, args) = match &cmd {
        HdgCmd::Solve(a) => ("solve", a),
        HdgCmd::Converge(a) => ("converge", a),
        HdgCmd::Stability(a) => ("stability", a),
    };
    let problem = hdg::problem(&args.problem)?;
    if !(args.tau > 0.0 && args.tau.is_finite()) {
        return Err(Failure(
            EXIT_USAGE,
            format!("--tau must be positive and finite, got {}", args.tau),
        ));
    }
    let (k, levels) = (args.k as usize, args.levels as usize);
    let th = StabilityThresholds {
        max_ratio: args.max_ratio,
        max_slope: args.max_slope,
    };

    let mut notes = Vec::new();
    let mut unstable = false;
    let rows = match cmd {
        HdgCmd::Solve(_) => vec![hdg::solve_level(&problem, k, levels, args.tau)?],
        HdgCmd::Converge(_) => hdg::converge(&problem, k, levels, args.tau)?,
        HdgCmd::Stability(_) => {
            let (rows, v) = hdg::stability_sweep(&problem, k, levels, args.tau, th)?;
            notes.push(format!(
                "# stability: {} ratio={} slope={}",
                if v.pass { "pass" } else { "fail" },
                fmt_f(v.ratio),
                fmt_f(v.slope)
            ));
            unstable = !v.pass;
            rows
        }
    };
    let mut failures = check_rows(name, k, &rows);
    if unstable {
        failures.push("energy not bounded uniformly in h".into());
    }

    let mut csv = String::new();
    writeln!(csv, "# hdgkit hdg {name}").unwrap();
    writeln!(
        csv,
        "# problem={} k={} levels={} tau={} mesh=structured n=2^l tags={}",
        problem.name,
        k,
        levels,
        args.tau,
        problem.tags.name()
    )
    .unwrap();
    match name {
        "stability" => writeln!(
            csv,
            "# verdict: >= 4 levels, max/min E <= {}, |slope| <= {}",
            th.max_ratio, th.max_slope
        ),
        "converge" => writeln!(
            csv,
            "# verdict: residual <= {RESIDUAL_TOL:e}, last order_u >= k+1-{ORDER_SLACK} unless err_u <= {EXACT_TOL:e}"
        ),
        _ => writeln!(csv, "# verdict: residual <= {RESIDUAL_TOL:e}"),
    }
    .unwrap();
    for r in &rows {
        if let Some(q) = r.quadrature_error {
            writeln!(csv, "# quadrature_error level={} value={}", r.level, fmt_f(q)).unwrap();
        }
    }
    for n in &notes {
        writeln!(csv, "{n}").unwrap();
    }
    writeln!(csv, "{}", hdg::CSV_HEADER).unwrap();
    for r in &rows {
        writeln!(csv, "{}", r.csv_line()).unwrap();
    }
    emit(args.out.as_deref(), &csv, stdout)?;

    if let Some(p) = &args.svg {
        let pts = |f: &dyn Fn(&HdgRow) -> Option<f64>| -> Vec<(f64, f64)> {
            rows.iter().filter_map(|r| f(r).map(|v| (r.h_max, v))).collect()
        };
        let series = if name == "stability" {
            vec![Series {
                label: "energy".into(),
                points: pts(&|r| Some(r.energy)),
            }]
        } else {
            vec![
                Series {
                    label: "err_u".into(),
                    points: pts(&|r| r.err_u),
                },
                Series {
                    label: "err_p".into(),
                    points: pts(&|r| r.err_p),
                },
            ]
        };
        let title = format!("{} {}, k = {}", problem.name, name, k);
        emit(
            Some(p),
            &loglog_svg(&title, "h", if name == "stability" { "E" } else { "error" }, &series),
            stdout,
        )?;
    }

    if failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        for f in &failures {
            writeln!(stderr, "verdict fail: {f}")?;
        }
        Ok(EXIT_VERDICT)
    }
}

fn check_rows(name: &str, k: usize, rows: &[HdgRow]) -> Vec<String> {
    let mut out = Vec::new();
    for r in rows {
        // NaN residuals fail too
        let ok = r.residual <= RESIDUAL_TOL;
        if !ok {
            out.push(format!("level {} residual {}", r.level, fmt_f(r.residual)));
        }
    }
    if name == "converge" {
        if let Some(last) = rows.last() {
            let exact = last.err_u.is_some_and(|e| e <= EXACT_TOL);
            if let (Some(o), false) = (last.order_u, exact) {
                if o < (k + 1) as f64 - ORDER_SLACK {
                    out.push(format!("order_u {} below {}", fmt_f(o), k + 1));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("hdgkit").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn help_and_usage_codes() {
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
        assert_eq!(run_capture(&["audit"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["hdg", "solve", "--k", "5"]).0, EXIT_USAGE);
        assert_eq!(
            run_capture(&["audit", "--ineq", "brenner-mean", "--levels", "8"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn unknown_id_lists_valid_ones() {
        let (code, _, err) = run_capture(&["audit", "--ineq", "nope"]);
        assert_eq!(code, EXIT_USAGE);
        for id in ALL_IDS {
            assert!(err.contains(id.name()), "{err}");
        }
    }

    #[test]
    fn sample_mode_needs_seed() {
        let (code, _, err) = run_capture(&["audit", "--ineq", "brenner-mean", "--mode", "sample"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--seed"));
    }

    #[test]
    fn mesh_gen_vertex_count() {
        let (code, out, _) = run_capture(&["mesh", "gen", "--n", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(load_mesh(&out).unwrap().n_vertices(), 9);
    }

    #[test]
    fn unknown_problem_and_bad_tau() {
        let (code, _, err) = run_capture(&["hdg", "solve", "--problem", "nope"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("manufactured-sine"));
        assert_eq!(run_capture(&["hdg", "solve", "--tau", "0"]).0, EXIT_USAGE);
    }
}
