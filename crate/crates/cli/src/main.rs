//! `krein` — Casimir energies of spheres and plates from the command line.
//!
//! Subcommands:
//!
//! * `energy`    — one configuration → one CSV row (energy + error budget)
//! * `scan`      — sphere–plate sweep over `L/a` → re-plottable table
//! * `integrand` — dump `ln det M(iκ)` at the quadrature nodes
//! * `fermionic` — fermionic vacuum energy over a Fermi-momentum grid
//! * `reference` — evaluate a named closed-form curve
//! * `cylinder`  — integrate a user-tabulated per-length profile
//!
//! stdout carries only CSV (header row mandatory, `.` decimal separator,
//! LF line endings, shortest round-trip float formatting); every diagnostic
//! goes to stderr. Output is deterministic byte for byte given identical
//! inputs. Exit codes: 0 success, 1 input error, 2 convergence failure.
//! The environment variable `KREIN_THREADS` caps internal parallelism.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use krein::energy::{
    casimir_energy, cylinder_energy_per_length, fermionic_energy_exact, integrand_samples,
    sphere_plate_energy_l_cut, EnergyEstimate, QuadratureSpec,
};
use krein::geometry::{Bc, Geometry, SphereSpec};
use krein::reference::{
    asymptotic_series_truncated, em_casimir_polder_l_gt_0, fermionic_sphere_plate,
    fermionic_two_sphere, pfa_leading, pwave_asymptote, semiclassical_sphere_plate,
    swave_sphere_plate_asymptote, SeriesFamily,
};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "krein",
    version,
    about = "Exact Casimir energies of non-overlapping spheres and plates",
    long_about = "Exact Casimir energies of non-overlapping spheres and plates, computed \
                  from the log-determinant of the multi-scattering matrix on the \
                  Wick-rotated axis.\n\nstdout carries only CSV; diagnostics go to stderr. \
                  Exit codes: 0 success, 1 input error, 2 convergence failure. \
                  KREIN_THREADS caps internal parallelism."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Casimir energy of one configuration as a single CSV row.
    Energy(EnergyArgs),
    /// Sweep the Dirichlet sphere–plate energy over a range of gaps.
    Scan(ScanArgs),
    /// Tabulate the energy integrand ln det M(iκ) at the quadrature nodes.
    Integrand(IntegrandArgs),
    /// Fermionic vacuum energy of an identical Dirichlet pair over a k_F grid.
    Fermionic(FermionicArgs),
    /// Evaluate a named closed-form reference expression.
    Reference(ReferenceArgs),
    /// Integrate a tabulated profile into an energy per unit length.
    Cylinder(CylinderArgs),
}

/// Boundary condition on a surface.
#[derive(Copy, Clone, Debug, ValueEnum)]
enum BcArg {
    /// Dirichlet: the field vanishes on the surface.
    #[value(name = "D", alias = "d")]
    D,
    /// Neumann: the normal derivative vanishes on the surface.
    #[value(name = "N", alias = "n")]
    N,
}

impl From<BcArg> for Bc {
    fn from(b: BcArg) -> Bc {
        match b {
            BcArg::D => Bc::Dirichlet,
            BcArg::N => Bc::Neumann,
        }
    }
}

/// Quadrature and truncation overrides shared by the evaluating commands.
#[derive(Args, Clone)]
struct QuadOpts {
    /// Upper cutoff κ_max of the Wick-rotated integral
    /// (default: 10 / smallest surface gap).
    #[arg(long = "kmax")]
    kmax: Option<f64>,
    /// Number of geometrically graded integration panels.
    #[arg(long)]
    panels: Option<usize>,
    /// Gauss–Legendre nodes per panel.
    #[arg(long)]
    nodes: Option<usize>,
    /// Relative tolerance for the partial-wave truncation.
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
    /// Fixed initial partial-wave truncation (skips the automatic choice).
    #[arg(long = "lmax-init")]
    lmax_init: Option<u32>,
    /// Safety addend on the automatic truncation choice.
    #[arg(long)]
    safety: Option<u32>,
}

impl QuadOpts {
    fn spec(&self, gap: Option<f64>) -> QuadratureSpec {
        let mut q = match gap {
            Some(g) if g > 0.0 => QuadratureSpec::for_gap(g),
            _ => QuadratureSpec::default(),
        };
        if let Some(k) = self.kmax {
            q.k_max = k;
        }
        if let Some(p) = self.panels {
            q.panels = p;
        }
        if let Some(n) = self.nodes {
            q.nodes_per_panel = n;
        }
        q.rel_tol = self.rtol;
        if let Some(l) = self.lmax_init {
            q.l_max_init = Some(l);
        }
        if let Some(s) = self.safety {
            q.safety = s;
        }
        q
    }
}

/// Where the CSV goes.
#[derive(Args, Clone)]
struct OutOpt {
    /// Write the CSV to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Configuration source: a geometry file, or an inline sphere–plate pair.
#[derive(Args, Clone)]
struct GeomOpts {
    /// Geometry file (one `sphere a=… center=x,y,z bc=D|N` per line,
    /// `#` comments allowed).
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// Inline sphere–plate: sphere radius (requires --gap).
    #[arg(long)]
    a: Option<f64>,
    /// Inline sphere–plate: surface-to-surface gap L (requires --a).
    #[arg(long)]
    gap: Option<f64>,
    /// Plate boundary condition for the inline form (the sphere is
    /// Dirichlet; use a geometry file for other sphere conditions).
    #[arg(long, default_value = "D")]
    bc: BcArg,
}

/// A parsed configuration: the geometry plus the inline parameters when the
/// sphere–plate shortcut was used (they unlock the l-cut evaluation path).
struct ConfigSource {
    geom: Geometry,
    inline_plate: Option<(f64, f64, Bc)>,
}

impl ConfigSource {
    /// Length scale that sets the default wavenumber cutoff: the physical
    /// surface–plate gap for the inline form (the image pair it expands to
    /// has twice that surface gap, which would halve the cutoff and dodge
    /// the upfront proximity refusal), otherwise the smallest surface gap
    /// in the file geometry.
    fn gap_hint(&self) -> Option<f64> {
        self.inline_plate
            .map(|(_, gap, _)| gap)
            .or_else(|| self.geom.min_gap())
    }
}

impl GeomOpts {
    fn load(&self) -> Result<ConfigSource, CliError> {
        match (&self.geometry, self.a, self.gap) {
            (Some(path), None, None) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Input(format!("cannot read {}: {e}", path.display()))
                })?;
                let geom = Geometry::from_file_str(&text)?;
                Ok(ConfigSource {
                    geom,
                    inline_plate: None,
                })
            }
            (None, Some(a), Some(gap)) => {
                let plate: Bc = self.bc.into();
                let geom = Geometry::sphere_plate(a, gap, plate, Bc::Dirichlet)?;
                Ok(ConfigSource {
                    geom,
                    inline_plate: Some((a, gap, plate)),
                })
            }
            _ => Err(CliError::Input(
                "give either --geometry <file>, or both --a and --gap".into(),
            )),
        }
    }
}

#[derive(Args)]
struct EnergyArgs {
    #[command(flatten)]
    geom: GeomOpts,
    /// Remove the l = 0 channel (inline sphere–plate form only).
    #[arg(long = "drop-l0")]
    drop_l0: bool,
    #[command(flatten)]
    quad: QuadOpts,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct ScanArgs {
    /// Sphere radius.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Range start, as L/a (log-spaced range; needs --to and --points).
    #[arg(long)]
    from: Option<f64>,
    /// Range end, as L/a.
    #[arg(long)]
    to: Option<f64>,
    /// Number of log-spaced points in [--from, --to].
    #[arg(long)]
    points: Option<usize>,
    /// Explicit comma-separated L/a values (alternative to a range).
    #[arg(long, value_delimiter = ',')]
    list: Vec<f64>,
    #[command(flatten)]
    quad: QuadOpts,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct IntegrandArgs {
    #[command(flatten)]
    geom: GeomOpts,
    #[command(flatten)]
    quad: QuadOpts,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct FermionicArgs {
    /// Sphere radius (both spheres).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Center-to-center distance of the Dirichlet pair.
    #[arg(long)]
    r: f64,
    /// First Fermi momentum.
    #[arg(long)]
    from: f64,
    /// Last Fermi momentum.
    #[arg(long)]
    to: f64,
    /// Number of evenly spaced grid points in [--from, --to].
    #[arg(long)]
    points: usize,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct ReferenceArgs {
    /// Parameters as key=value pairs, e.g. `family=D_all_l a=1 R=5`.
    /// Families and their parameters:
    /// D_all_l, D_l_positive, N_l_positive (a, R, optional order ≤ 6);
    /// swave_plate, pwave_plate, pfa, semiclassical_plate (a, L);
    /// em_casimir_polder (a, R); fermionic_pair, fermionic_plate (a, r, kF).
    #[arg(value_name = "KEY=VALUE", required = true)]
    params: Vec<String>,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct CylinderArgs {
    /// CSV table of the per-length profile: header row, then `k4,value`
    /// rows with strictly increasing k4 (linear interpolation between rows,
    /// clamped beyond the ends).
    #[arg(long)]
    table: PathBuf,
    #[command(flatten)]
    quad: QuadOpts,
    #[command(flatten)]
    out: OutOpt,
}

/// Errors at the command-line level, each mapped to an exit code.
enum CliError {
    /// Bad flags, files, or parameters → exit 1.
    Input(String),
    /// Library-reported failure; convergence failures → exit 2, the rest → 1.
    Core(krein::Error),
}

impl From<krein::Error> for CliError {
    fn from(e: krein::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Core(e) if e.is_convergence_failure() => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("krein: {e}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("krein: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Apply the `KREIN_THREADS` cap before any parallel work starts.
fn configure_threads() -> Result<(), CliError> {
    match std::env::var("KREIN_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                CliError::Input(format!("KREIN_THREADS must be a positive integer, got {v:?}"))
            })?;
            if n == 0 {
                return Err(CliError::Input(
                    "KREIN_THREADS must be a positive integer, got 0".into(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .ok();
            Ok(())
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::Input(format!("KREIN_THREADS: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Energy(args) => cmd_energy(args),
        Cmd::Scan(args) => cmd_scan(args),
        Cmd::Integrand(args) => cmd_integrand(args),
        Cmd::Fermionic(args) => cmd_fermionic(args),
        Cmd::Reference(args) => cmd_reference(args),
        Cmd::Cylinder(args) => cmd_cylinder(args),
    }
}

/// Emit the finished CSV to the chosen sink.
fn emit(out: &OutOpt, csv: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn warn_tail(est: &EnergyEstimate) {
    if est.tail_warning {
        eprintln!(
            "krein: warning: the integrand tail beyond k_max = {} could not be certified \
             below the requested tolerance; raise --kmax",
            est.k_max_used
        );
    }
}

fn estimate_row(est: &EnergyEstimate) -> String {
    let mut csv = String::from("value,quad_error,trunc_error,l_max_used,node_count\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{}",
        est.value, est.quad_error, est.trunc_error, est.l_max_used, est.node_count
    );
    csv
}

fn cmd_energy(args: EnergyArgs) -> Result<(), CliError> {
    let src = args.geom.load()?;
    let quad = args.quad.spec(src.gap_hint());
    let est = match (args.drop_l0, src.inline_plate) {
        (false, _) => casimir_energy(&src.geom, &quad, args.quad.rtol)?,
        (true, Some((a, gap, plate))) => {
            sphere_plate_energy_l_cut(a, gap, true, plate, Bc::Dirichlet, &quad, args.quad.rtol)?
        }
        (true, None) => {
            return Err(CliError::Input(
                "--drop-l0 applies to the inline sphere–plate form (--a/--gap) only".into(),
            ))
        }
    };
    warn_tail(&est);
    emit(&args.out, &estimate_row(&est))
}

fn cmd_scan(args: ScanArgs) -> Result<(), CliError> {
    let ratios: Vec<f64> = if !args.list.is_empty() {
        if args.from.is_some() || args.to.is_some() || args.points.is_some() {
            return Err(CliError::Input(
                "give either --list or a --from/--to/--points range, not both".into(),
            ));
        }
        args.list.clone()
    } else {
        let (from, to, points) = match (args.from, args.to, args.points) {
            (Some(f), Some(t), Some(p)) => (f, t, p),
            _ => {
                return Err(CliError::Input(
                    "a scan needs --from, --to, and --points (or --list)".into(),
                ))
            }
        };
        if points == 0 {
            return Err(CliError::Input("empty scan range: --points is 0".into()));
        }
        if !(from > 0.0 && to >= from && from.is_finite() && to.is_finite()) {
            return Err(CliError::Input(format!(
                "scan range must satisfy 0 < from <= to, got {from}..{to}"
            )));
        }
        (0..points)
            .map(|i| {
                if points == 1 {
                    from
                } else {
                    from * (to / from).powf(i as f64 / (points - 1) as f64)
                }
            })
            .collect()
    };
    if ratios.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(CliError::Input(
            "every L/a in the scan must be positive and finite".into(),
        ));
    }

    let a = args.a;
    let mut csv = String::from("L_over_a,E,E_normalized,series4,series6,swave_asymptote\n");
    for &ratio in &ratios {
        let gap = ratio * a;
        let quad = args.quad.spec(Some(gap));
        let est = sphere_plate_energy_l_cut(
            a,
            gap,
            false,
            Bc::Dirichlet,
            Bc::Dirichlet,
            &quad,
            args.quad.rtol,
        )?;
        warn_tail(&est);
        let normalized = est.value / pfa_leading(a, gap);
        let s4 = asymptotic_series_truncated(SeriesFamily::DirichletAllL, a, gap + a, 4)?;
        let s6 = asymptotic_series_truncated(SeriesFamily::DirichletAllL, a, gap + a, 6)?;
        let sw = swave_sphere_plate_asymptote(a, gap);
        let _ = writeln!(csv, "{ratio},{},{normalized},{s4},{s6},{sw}", est.value);
    }
    emit(&args.out, &csv)
}

fn cmd_integrand(args: IntegrandArgs) -> Result<(), CliError> {
    let src = args.geom.load()?;
    let quad = args.quad.spec(src.gap_hint());
    let rows = integrand_samples(&src.geom, &quad, args.quad.rtol)?;
    let mut csv = String::from("k4,ln_det\n");
    for (k4, ld) in rows {
        let _ = writeln!(csv, "{k4},{ld}");
    }
    emit(&args.out, &csv)
}

fn cmd_fermionic(args: FermionicArgs) -> Result<(), CliError> {
    if args.points == 0 {
        return Err(CliError::Input("empty grid: --points is 0".into()));
    }
    if !(args.from > 0.0 && args.to >= args.from)
        || !args.from.is_finite()
        || !args.to.is_finite()
    {
        return Err(CliError::Input(format!(
            "Fermi-momentum range must satisfy 0 < from <= to, got {}..{}",
            args.from, args.to
        )));
    }
    let geom = Geometry::new(vec![
        SphereSpec::new(args.a, [0.0, 0.0, 0.0], Bc::Dirichlet),
        SphereSpec::new(args.a, [0.0, 0.0, args.r], Bc::Dirichlet),
    ])?;
    let mut csv = String::from("k_F,E_exact,E_closed_form\n");
    for i in 0..args.points {
        let kf = if args.points == 1 {
            args.from
        } else {
            args.from + (args.to - args.from) * i as f64 / (args.points - 1) as f64
        };
        let est = fermionic_energy_exact(&geom, kf)?;
        let cf = fermionic_two_sphere(args.a, args.r, kf);
        let _ = writeln!(csv, "{kf},{},{cf}", est.value);
    }
    emit(&args.out, &csv)
}

fn cmd_reference(args: ReferenceArgs) -> Result<(), CliError> {
    let mut family: Option<String> = None;
    let mut a: Option<f64> = None;
    let mut big_r: Option<f64> = None;
    let mut gap: Option<f64> = None;
    let mut r: Option<f64> = None;
    let mut kf: Option<f64> = None;
    let mut order: u32 = 6;
    for p in &args.params {
        let (key, val) = p.split_once('=').ok_or_else(|| {
            CliError::Input(format!("parameter {p:?} is not key=value"))
        })?;
        let num = || -> Result<f64, CliError> {
            val.parse::<f64>()
                .map_err(|e| CliError::Input(format!("bad value for {key}: {val:?} ({e})")))
        };
        match key {
            "family" => family = Some(val.to_string()),
            "a" => a = Some(num()?),
            "R" => big_r = Some(num()?),
            "L" => gap = Some(num()?),
            "r" => r = Some(num()?),
            "kF" => kf = Some(num()?),
            "order" => {
                order = val.parse::<u32>().map_err(|e| {
                    CliError::Input(format!("bad value for order: {val:?} ({e})"))
                })?
            }
            other => return Err(CliError::Input(format!("unknown parameter {other:?}"))),
        }
    }
    let family = family.ok_or_else(|| CliError::Input("missing family=…".into()))?;
    let need = |x: Option<f64>, name: &str| {
        x.ok_or_else(|| CliError::Input(format!("family {family} needs {name}=…")))
    };
    let series = |f: SeriesFamily| -> Result<f64, CliError> {
        Ok(asymptotic_series_truncated(
            f,
            need(a, "a")?,
            need(big_r, "R")?,
            order,
        )?)
    };
    let value = match family.as_str() {
        "D_all_l" => series(SeriesFamily::DirichletAllL)?,
        "D_l_positive" => series(SeriesFamily::DirichletLPositive)?,
        "N_l_positive" => series(SeriesFamily::NeumannLPositive)?,
        "swave_plate" => swave_sphere_plate_asymptote(need(a, "a")?, need(gap, "L")?),
        "pwave_plate" => pwave_asymptote(need(a, "a")?, need(gap, "L")?),
        "pfa" => pfa_leading(need(a, "a")?, need(gap, "L")?),
        "semiclassical_plate" => semiclassical_sphere_plate(need(a, "a")?, need(gap, "L")?),
        "em_casimir_polder" => em_casimir_polder_l_gt_0(need(a, "a")?, need(big_r, "R")?),
        "fermionic_pair" => {
            fermionic_two_sphere(need(a, "a")?, need(r, "r")?, need(kf, "kF")?)
        }
        "fermionic_plate" => {
            fermionic_sphere_plate(need(a, "a")?, need(r, "r")?, need(kf, "kF")?)
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown family {other:?}; known: D_all_l, D_l_positive, N_l_positive, \
                 swave_plate, pwave_plate, pfa, semiclassical_plate, em_casimir_polder, \
                 fermionic_pair, fermionic_plate"
            )))
        }
    };
    let csv = format!("family,value\n{family},{value}\n");
    emit(&args.out, &csv)
}

fn cmd_cylinder(args: CylinderArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.table)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.table.display())))?;
    let mut ks: Vec<f64> = Vec::new();
    let mut vs: Vec<f64> = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) => {
            let h = header.trim_end_matches('\r');
            if h.split(',').all(|f| f.trim().parse::<f64>().is_ok()) {
                return Err(CliError::Input(
                    "table line 1: expected a header row, found numbers".into(),
                ));
            }
        }
        None => return Err(CliError::Input("table is empty".into())),
    }
    for (idx, raw) in lines {
        let line = idx + 1;
        let t = raw.trim_end_matches('\r').trim();
        if t.is_empty() {
            continue;
        }
        let (ks_str, vs_str) = t.split_once(',').ok_or_else(|| {
            CliError::Input(format!("table line {line}: expected `k4,value`, got {t:?}"))
        })?;
        let k: f64 = ks_str.trim().parse().map_err(|e| {
            CliError::Input(format!("table line {line}: bad k4 {ks_str:?} ({e})"))
        })?;
        let v: f64 = vs_str.trim().parse().map_err(|e| {
            CliError::Input(format!("table line {line}: bad value {vs_str:?} ({e})"))
        })?;
        if !k.is_finite() || !v.is_finite() {
            return Err(CliError::Input(format!(
                "table line {line}: non-finite entry"
            )));
        }
        if let Some(&last) = ks.last() {
            if k <= last {
                return Err(CliError::Input(format!(
                    "table line {line}: k4 must be strictly increasing ({k} after {last})"
                )));
            }
        }
        ks.push(k);
        vs.push(v);
    }
    if ks.len() < 2 {
        return Err(CliError::Input(
            "table needs at least two data rows".into(),
        ));
    }

    let k_last = *ks.last().expect("table has rows");
    // linear interpolation, clamped to the end values outside the table
    let interp = move |x: f64| -> f64 {
        if x <= ks[0] {
            return vs[0];
        }
        if x >= ks[ks.len() - 1] {
            return vs[vs.len() - 1];
        }
        let j = ks.partition_point(|&k| k < x);
        let (k0, k1) = (ks[j - 1], ks[j]);
        let t = (x - k0) / (k1 - k0);
        vs[j - 1] + t * (vs[j] - vs[j - 1])
    };

    let mut quad = args.quad.spec(None);
    if args.quad.kmax.is_none() {
        // default the cutoff to the table's reach rather than a geometry gap
        quad.k_max = k_last;
    }
    let est = cylinder_energy_per_length(interp, &quad)?;
    warn_tail(&est);
    emit(&args.out, &estimate_row(&est))
}
