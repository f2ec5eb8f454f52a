//! `mechquot` — decide geodesic accessibility and mechanical-quotient
//! existence for affine connection control systems, build the reduced
//! system in adapted coordinates, and cross-check quotients numerically.
//!
//! Exit codes: 0 the queried property holds, 1 it provably fails, 2 input
//! error, 3 resource-cap abort, 4 internal inconsistency (the two decision
//! routes disagreed).

use clap::{Parser, Subcommand, ValueEnum};
use mechquot_core::accessibility::is_geodesically_accessible;
use mechquot_core::distribution::SymClosureOptions;
use mechquot_core::quotient::{build_quotient_system, check_both_routes};
use mechquot_core::report::Report;
use mechquot_core::simulate::{check_commutation, integrate, trajectory_csv, Trajectory};
use mechquot_core::sysfile::{self, SystemFile};
use mechquot_core::verify::run_identity_suite;
use mechquot_core::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mechquot", version, about = "mechanical quotients of affine connection control systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide geodesic accessibility at a point via the symmetric-product closure
    CheckAccessibility {
        file: PathBuf,
        /// Named point from the file; defaults to `default` or the origin
        #[arg(long)]
        point: Option<String>,
        /// Cap on closure rounds
        #[arg(long)]
        max_level: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check the four quotient conditions on a named distribution (both routes)
    CheckQuotient {
        file: PathBuf,
        #[arg(long)]
        distribution: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Construct the reduced system in adapted coordinates and emit it
    BuildQuotient {
        file: PathBuf,
        #[arg(long)]
        distribution: String,
        /// Write the emitted system file here instead of inlining it in the report
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Integrate a scenario with fixed-step RK4
    Simulate {
        file: PathBuf,
        #[arg(long)]
        scenario: String,
        /// Write the trajectory as CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario step size
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compare a projected trajectory against the target system's own run
    CheckCommutation {
        file: PathBuf,
        #[arg(long)]
        scenario: String,
        /// Write the projected trajectory as CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario step size
        #[arg(long)]
        dt: Option<f64>,
        /// Override the scenario residual tolerance
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the exact bracket-identity suite with randomized fields
    VerifyIdentities {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::CapExceeded(_) => 3,
        Error::Internal(_) => 4,
        Error::NotAdapted(_)
        | Error::DependenceViolation(_)
        | Error::QuotientConditionsFailed(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (format, outcome) = match cli.cmd {
        Cmd::CheckAccessibility {
            file,
            point,
            max_level,
            format,
        } => (format, cmd_check_accessibility(&file, point.as_deref(), max_level)),
        Cmd::CheckQuotient {
            file,
            distribution,
            format,
        } => (format, cmd_check_quotient(&file, &distribution)),
        Cmd::BuildQuotient {
            file,
            distribution,
            out,
            format,
        } => (format, cmd_build_quotient(&file, &distribution, out.as_deref())),
        Cmd::Simulate {
            file,
            scenario,
            out,
            dt,
            format,
        } => (format, cmd_simulate(&file, &scenario, out.as_deref(), dt)),
        Cmd::CheckCommutation {
            file,
            scenario,
            out,
            dt,
            tol,
            format,
        } => (
            format,
            cmd_check_commutation(&file, &scenario, out.as_deref(), dt, tol),
        ),
        Cmd::VerifyIdentities { file, seed, format } => {
            (format, cmd_verify_identities(&file, seed))
        }
    };
    match outcome {
        Ok((report, holds)) => {
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Machine => print!("{}", report.to_json()),
            }
            if holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn load(file: &Path) -> Result<SystemFile> {
    sysfile::parse_path(file)
}

fn write_csv(path: &Path, traj: &Trajectory, coords: &[String]) -> Result<()> {
    std::fs::write(path, trajectory_csv(traj, coords))?;
    Ok(())
}

fn cmd_check_accessibility(
    file: &Path,
    point: Option<&str>,
    max_level: Option<usize>,
) -> Result<(Report, bool)> {
    let f = load(file)?;
    let (point_name, x0) = f.resolve_point(point)?;
    let opts = SymClosureOptions {
        max_rounds: max_level,
        ..SymClosureOptions::default()
    };
    let rep = is_geodesically_accessible(&f.system, &x0, &opts)?;
    let n = f.system.dim();
    let mut r = Report::new("check-accessibility");
    r.text("point", &point_name);
    r.int("dimension", n as i64);
    r.int("sym_rank_generic", rep.sym_rank_generic as i64);
    r.int("sym_rank_at_point", rep.sym_rank_at_point as i64);
    r.bool("singular_at_point", rep.singular_at_point);
    r.int("closure_rounds", rep.closure_rounds as i64);
    r.list("closure_fields", rep.closure_fields.clone());
    r.text(
        "sym_rank",
        format!("{} of {}", rep.sym_rank_at_point, n),
    );
    r.bool("geodesically_accessible", rep.geodesically_accessible);
    Ok((r, rep.geodesically_accessible))
}

fn cmd_check_quotient(file: &Path, distribution: &str) -> Result<(Report, bool)> {
    let f = load(file)?;
    let d = f.distribution(distribution)?;
    let (direct, lifted) = check_both_routes(&f.system, d)?;
    let mut r = Report::new("check-quotient");
    r.text("distribution", distribution);
    r.int("generic_rank", d.generic_rank() as i64);
    r.bool("involutive", direct.involutive);
    r.bool("connection_restricts", direct.connection_restricts);
    r.bool("curvature_invariance", direct.curvature_ok);
    r.bool("controls_invariant", direct.controls_invariant);
    r.bool("overall", direct.overall);
    r.list(
        "witnesses",
        direct
            .witnesses
            .iter()
            .map(|w| format!("{}: {} = {}", w.condition, w.context, w.field))
            .collect(),
    );
    r.text("note", direct.note);
    r.bool("lifted_route_invariant", lifted.invariant);
    r.int("lifted_rank", lifted.lifted_rank as i64);
    r.list(
        "lifted_witnesses",
        lifted
            .witnesses
            .iter()
            .map(|w| format!("{}: {} = {}", w.condition, w.context, w.field))
            .collect(),
    );
    r.bool("routes_agree", true);
    Ok((r, direct.overall))
}

fn cmd_build_quotient(
    file: &Path,
    distribution: &str,
    out: Option<&Path>,
) -> Result<(Report, bool)> {
    let f = load(file)?;
    let d = f.distribution(distribution)?;
    let q = build_quotient_system(&f.system, d)?;
    let chart = f.system.chart();
    let mut r = Report::new("build-quotient");
    r.text("distribution", distribution);
    r.list(
        "kept_coordinates",
        q.kept
            .iter()
            .map(|&i| chart.base_coords()[i].clone())
            .collect(),
    );
    r.list(
        "struck_coordinates",
        q.killed
            .iter()
            .map(|&i| chart.base_coords()[i].clone())
            .collect(),
    );
    r.int("quotient_dimension", q.kept.len() as i64);
    match &q.system {
        Some(sys) => {
            let text = sysfile::emit(sys);
            // the emitted file must survive its own parser
            sysfile::parse(&text)?;
            match out {
                Some(p) => {
                    std::fs::write(p, &text)?;
                    r.text("emitted_to", p.display().to_string());
                }
                None => r.list(
                    "quotient_file",
                    text.lines().map(|l| l.to_string()).collect(),
                ),
            }
        }
        None => r.text("note", "quotient is zero-dimensional; no system file to emit"),
    }
    Ok((r, true))
}

fn cmd_simulate(
    file: &Path,
    scenario: &str,
    out: Option<&Path>,
    dt_flag: Option<f64>,
) -> Result<(Report, bool)> {
    let f = load(file)?;
    let sc = f.scenario(scenario)?;
    let flow = f.flow(sc.source.as_deref())?;
    let u = sc.control_or_zero(flow.input_count());
    let dt = dt_flag.unwrap_or(sc.dt);
    let traj = integrate(&flow, &sc.x0, &u, sc.t_end, dt)?;
    let mut r = Report::new("simulate");
    r.text("scenario", scenario);
    r.text("source", sc.source.as_deref().unwrap_or("main"));
    r.float("t_end", sc.t_end);
    r.float("dt", dt);
    r.int("steps", (traj.times.len() - 1) as i64);
    let last = traj.states.last().expect("trajectory has at least x0");
    r.list(
        "final_state",
        flow.coords()
            .iter()
            .zip(last)
            .map(|(c, v)| format!("{c} = {v}"))
            .collect(),
    );
    if let Some(p) = out {
        write_csv(p, &traj, flow.coords())?;
        r.text("csv", p.display().to_string());
    }
    Ok((r, true))
}

fn cmd_check_commutation(
    file: &Path,
    scenario: &str,
    out: Option<&Path>,
    dt_flag: Option<f64>,
    tol_flag: Option<f64>,
) -> Result<(Report, bool)> {
    let f = load(file)?;
    let sc = f.scenario(scenario)?;
    let setup = f.commutation_setup(scenario)?;
    let (source, target, map) = (setup.source, setup.target, setup.map);
    let u = sc.control_or_zero(source.input_count());
    let dt = dt_flag.unwrap_or(sc.dt);
    let tol = tol_flag.unwrap_or(sc.tol);
    let rep = check_commutation(&source, &target, &map, &sc.x0, &u, sc.t_end, dt, tol)?;
    let mut r = Report::new("check-commutation");
    r.text("scenario", scenario);
    r.text("source", sc.source.as_deref().unwrap_or("main"));
    r.text("target", setup.target_desc);
    r.float("t_end", sc.t_end);
    r.float("dt", dt);
    r.int("steps", rep.steps as i64);
    r.float("residual", rep.residual);
    r.float("tol", tol);
    r.bool("pass", rep.pass);
    if let Some(p) = out {
        write_csv(p, &rep.projected, &map.target_coords)?;
        r.text("csv", p.display().to_string());
    }
    Ok((r, rep.pass))
}

fn cmd_verify_identities(file: &Path, seed: u64) -> Result<(Report, bool)> {
    let f = load(file)?;
    let suite = run_identity_suite(f.system.connection(), seed, 5, 3)?;
    let mut r = Report::new("verify-identities");
    r.int("seed", seed as i64);
    r.int("trials", suite.trials as i64);
    r.list(
        "identities",
        suite
            .tallies
            .iter()
            .map(|(name, held)| format!("{name}: held {held}/{}", suite.trials))
            .collect(),
    );
    if !suite.failures.is_empty() {
        r.list("violations", suite.failures.clone());
    }
    r.bool("all_identities_hold", suite.all_pass());
    Ok((r, suite.all_pass()))
}
