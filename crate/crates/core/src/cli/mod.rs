//! `thermowalk` command line: band, winding, sweep and edge subcommands.

pub mod config;

use std::f64::consts::{FRAC_PI_4, PI};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bloch::{
    band_structure, band_structure_with_tol, check_chiral_symmetry, winding_number, SymmetryClass,
    WalkParameters, DEFAULT_TOL_GAP,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gibbs::{Precision, EXTENDED_PRECISION_BELOW_T};
use crate::realspace::{
    build_floquet, find_edge_states, quasienergy_spectrum, thermal_position_distribution,
    CoinProfile,
};
use crate::scan::{
    format_significant, run_sweep_with, summarize, write_csv, write_csv_to, Progress,
};

pub use config::{load_sweep_config, parse_sweep_config, SweepFile, SWEEP_SCHEMA};

/// Tolerance of `band --verify` on `|n_k . A|`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "thermowalk",
    version,
    about = "Thermal fidelity and edge states of split-step quantum walks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the quasienergy band and Bloch vectors on the k-grid.
    Band(BandArgs),
    /// Winding number of the Bloch vector around the chiral axis.
    Winding(WindingArgs),
    /// Fidelity and Delta over a (theta, T) grid described by a config file.
    Sweep(SweepArgs),
    /// Thermal position distribution of a ring with a domain wall.
    Edge(EdgeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Band(_) => "band",
            Command::Winding(_) => "winding",
            Command::Sweep(_) => "sweep",
            Command::Edge(_) => "edge",
        }
    }
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct WalkArgs {
    #[arg(long, default_value = "bdi", value_parser = parse_class)]
    pub class: SymmetryClass,
    /// Second coin angle in radians.
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "theta2_pi_fraction"
    )]
    pub theta2: Option<f64>,
    /// Second coin angle as a multiple of pi, e.g. `1/4` or `-3/4`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pi_fraction, conflicts_with = "theta2")]
    pub theta2_pi_fraction: Option<f64>,
    /// Override the class value of the first coin angle (radians).
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
}

impl WalkArgs {
    pub fn params(&self) -> WalkParameters {
        let theta2 = self
            .theta2
            .or(self.theta2_pi_fraction)
            .expect("clap enforces one angle flag");
        let p = WalkParameters::new(self.class, theta2);
        match self.theta1 {
            Some(t1) => p.with_theta1(t1),
            None => p,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BandArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long, default_value_t = 512)]
    pub nk: usize,
    /// Samples with `sin E` below this are flagged degenerate.
    #[arg(long, default_value_t = DEFAULT_TOL_GAP)]
    pub tol_gap: f64,
    /// Check that every Bloch vector lies in the chiral plane.
    #[arg(long)]
    pub verify: bool,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WindingArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long, default_value_t = 512)]
    pub nk: usize,
    /// Print the signed value for the built-in orientation instead of the magnitude.
    #[arg(long)]
    pub signed: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Sweep description (`thermowalk.sweep/v1`).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output` from the config; without either the CSV goes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_execution)]
    pub execution: Option<Execution>,
    /// Suppress per-column progress lines.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EdgeArgs {
    #[arg(long, default_value = "bdi", value_parser = parse_class)]
    pub class: SymmetryClass,
    /// Second coin angle left of and at the wall (radians).
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0 * FRAC_PI_4)]
    pub theta2_left: f64,
    /// Second coin angle right of the wall (radians).
    #[arg(long, allow_hyphen_values = true, default_value_t = FRAC_PI_4)]
    pub theta2_right: f64,
    #[arg(long, default_value_t = 128)]
    pub sites: usize,
    /// Wall site; defaults to `sites / 2`.
    #[arg(long)]
    pub wall: Option<usize>,
    /// Comma-separated temperatures.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 1.0])]
    pub temperatures: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_class(s: &str) -> std::result::Result<SymmetryClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_execution(s: &str) -> std::result::Result<Execution, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `p/q`, `p` or a decimal, times pi.
pub fn parse_pi_fraction(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("expected a rational multiple of pi such as 1/4, got {s:?}");
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            num / den
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value * PI)
    } else {
        Err(bad())
    }
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Config(_) => 2,
        Error::Domain(_)
        | Error::GapClosed { .. }
        | Error::Resolution { .. }
        | Error::IllDefinedLimit(_) => 3,
        Error::Numerical { .. } => 4,
        Error::Io { .. } => 1,
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Error::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_context(path: Option<&Path>) -> impl Fn(io::Error) -> Error + '_ {
    move |e| Error::io(path.unwrap_or(Path::new("<stdout>")), e)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Band(a) => cmd_band(&a),
        Command::Winding(a) => cmd_winding(&a, &mut io::stdout().lock()),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Edge(a) => cmd_edge(&a),
    }
}

pub fn cmd_band(args: &BandArgs) -> Result<()> {
    let params = args.walk.params();
    let band = band_structure_with_tol(&params, args.nk, args.tol_gap)?;
    if args.verify {
        let worst = check_chiral_symmetry(&band, &params.chiral_axis());
        eprintln!("verify: max |n.A| = {worst:.3e}");
        if worst.is_nan() || worst >= VERIFY_TOL {
            return Err(Error::Numerical {
                what: "chiral-plane verification",
                residual: worst,
            });
        }
    }
    let path = args.out.as_deref();
    let mut w = open_output(path)?;
    let write = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "k,E,n_x,n_y,n_z,degenerate")?;
        for s in &band.samples {
            let fields = [s.k, s.energy, s.n.x, s.n.y, s.n.z].map(|v| format_significant(v, 12));
            writeln!(w, "{},{}", fields.join(","), u8::from(s.degenerate))?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_context(path))
}

pub fn cmd_winding(args: &WindingArgs, out: &mut dyn Write) -> Result<()> {
    let params = args.walk.params();
    let band = band_structure(&params, args.nk)?;
    let nu = winding_number(&band, &params.chiral_axis())?;
    let shown = if args.signed { nu } else { nu.abs() };
    writeln!(out, "{shown}").map_err(io_context(None))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let file = load_sweep_config(&args.config)?;
    let config = file.sweep;
    if config.temperature.min < EXTENDED_PRECISION_BELOW_T
        && config.precision != Precision::ExtendedLowT
    {
        eprintln!(
            "warning: temperatures below {EXTENDED_PRECISION_BELOW_T} are evaluated with the extended-low-t path"
        );
    }
    let exec = args.execution.or(file.execution).unwrap_or_default();
    let progress = if args.quiet {
        Progress::Silent
    } else {
        Progress::Stderr
    };
    let out = run_sweep_with(&config, exec, progress)?;
    let summary = summarize(&out.records);
    let target = args.out.clone().or(file.output);
    let mut report: Box<dyn Write> = match &target {
        Some(path) => {
            write_csv(&out.records, path)?;
            Box::new(io::stdout().lock())
        }
        None => {
            write_csv_to(&out.records, io::stdout().lock()).map_err(io_context(None))?;
            Box::new(io::stderr().lock())
        }
    };
    let mut lines = vec![format!(
        "points: {} ({} flagged), bands built: {}",
        summary.points, summary.flagged, out.bands_built
    )];
    if let Some((theta, t, f)) = summary.min_fidelity {
        lines.push(format!("min F = {f:.12} at theta = {theta:.6}, T = {t:.6}"));
    }
    lines.push(format!("max |Delta| = {:.6e}", summary.max_abs_delta));
    if let Some(path) = &target {
        lines.push(format!("wrote {}", path.display()));
    }
    for line in lines {
        writeln!(report, "{line}").map_err(io_context(None))?;
    }
    Ok(())
}

pub fn cmd_edge(args: &EdgeArgs) -> Result<()> {
    if args.temperatures.is_empty() {
        return Err(Error::invalid("no temperatures given"));
    }
    let mut profile =
        CoinProfile::domain_wall(args.class, args.theta2_left, args.theta2_right, args.sites);
    if let Some(w) = args.wall {
        profile.wall = w;
    }
    let spectrum = quasienergy_spectrum(&build_floquet(&profile)?)?;
    let edges = find_edge_states(&spectrum, 1e-6, 5.0);
    eprintln!("edge states: {}", edges.len());
    for e in &edges {
        eprintln!(
            "  eps = {:+.3e}, IPR = {:.4}, peak at x = {}",
            e.quasienergy, e.ipr, e.peak_site
        );
    }
    let blocks = args
        .temperatures
        .iter()
        .map(|&t| thermal_position_distribution(&spectrum, t).map(|p| (t, p)))
        .collect::<Result<Vec<_>>>()?;
    let path = args.out.as_deref();
    let mut w = open_output(path)?;
    let write = |w: &mut dyn Write| -> io::Result<()> {
        for (i, (t, p)) in blocks.iter().enumerate() {
            if i > 0 {
                writeln!(w)?;
            }
            writeln!(w, "T,x,p")?;
            let t = format_significant(*t, 12);
            for (x, px) in p.iter().enumerate() {
                writeln!(w, "{t},{x},{}", format_significant(*px, 12))?;
            }
        }
        w.flush()
    };
    write(&mut w).map_err(io_context(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn pi_fractions() {
        assert!((parse_pi_fraction("1/4").unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((parse_pi_fraction("-3/4").unwrap() + 3.0 * FRAC_PI_4).abs() < 1e-15);
        assert!((parse_pi_fraction("0.5").unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(parse_pi_fraction("1/0").is_err());
        assert!(parse_pi_fraction("pi/4").is_err());
    }

    #[test]
    fn angle_flags_are_exclusive_and_required() {
        assert!(Cli::try_parse_from(["thermowalk", "band"]).is_err());
        assert!(Cli::try_parse_from([
            "thermowalk",
            "band",
            "--theta2",
            "0.1",
            "--theta2-pi-fraction",
            "1/4"
        ])
        .is_err());
        let cli =
            Cli::try_parse_from(["thermowalk", "winding", "--theta2-pi-fraction", "-1/4"]).unwrap();
        let Command::Winding(a) = cli.command else {
            panic!()
        };
        assert!((a.walk.params().theta2 + FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn winding_output() {
        let cli = Cli::try_parse_from(["thermowalk", "winding", "--theta2", "0.7853981633974483"])
            .unwrap();
        let Command::Winding(a) = cli.command else {
            panic!()
        };
        let mut buf = Vec::new();
        cmd_winding(&a, &mut buf).unwrap();
        assert_eq!(buf, b"1\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(exit_code(&Error::Config(vec![])), 2);
        assert_eq!(
            exit_code(&Error::GapClosed {
                k: 0.0,
                energy: 0.0
            }),
            3
        );
        assert_eq!(
            exit_code(&Error::Numerical {
                what: "x",
                residual: 1.0
            }),
            4
        );
    }
}
