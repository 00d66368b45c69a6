//! Fidelity and Uhlmann-departure sweeps over the (theta, T) plane.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::bloch::{band_structure, gap_diagnostics, BlochBand, SymmetryClass, WalkParameters};
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::gibbs::{fidelity_and_delta, GibbsFamily, Precision, ThermalPoint};

pub const CSV_HEADER: &str = "theta,T,F,Delta,gap0,gapPi,degenerate_count";

/// Significant digits written to CSV.
pub const CSV_DIGITS: usize = 12;

/// Closed interval sampled as `min + i * step` up to `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        GridAxis { min, max, step }
    }

    /// A single point.
    pub fn point(value: f64) -> Self {
        GridAxis::new(value, value, 1.0)
    }

    /// Number of grid points, never zero.
    pub fn count(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count())
            .map(|i| self.min + i as f64 * self.step)
            .collect()
    }

    fn check(&self, name: &str, issues: &mut Vec<String>) {
        if !(self.min.is_finite() && self.max.is_finite()) {
            issues.push(format!("{name}: bounds must be finite"));
        } else if self.max < self.min {
            issues.push(format!(
                "{name}: max ({}) is below min ({})",
                self.max, self.min
            ));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            issues.push(format!("{name}.step: must be positive, got {}", self.step));
        }
    }
}

/// Offset `(d_theta, d_T)` between the two compared points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub theta: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub class: SymmetryClass,
    pub family: GibbsFamily,
    pub theta: GridAxis,
    pub temperature: GridAxis,
    pub displacement: Displacement,
    pub n_k: usize,
    pub precision: Precision,
}

impl Default for SweepConfig {
    /// BDI, SP1, theta in [-pi, pi] step 0.01, T in [0.01, 1] step 0.01, N_k = 512, dq = (0.01, 0.01).
    fn default() -> Self {
        SweepConfig {
            class: SymmetryClass::Bdi,
            family: GibbsFamily::Sp1,
            theta: GridAxis::new(-std::f64::consts::PI, std::f64::consts::PI, 0.01),
            temperature: GridAxis::new(0.01, 1.0, 0.01),
            displacement: Displacement {
                theta: 0.01,
                temperature: 0.01,
            },
            n_k: 512,
            precision: Precision::Standard,
        }
    }
}

impl SweepConfig {
    /// Every violated invariant, as `key: message` lines.
    pub fn issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        self.theta.check("theta", &mut issues);
        self.temperature.check("temperature", &mut issues);
        if self.temperature.min.is_nan() || self.temperature.min <= 0.0 {
            issues.push(format!(
                "temperature.min: must be positive, got {}",
                self.temperature.min
            ));
        }
        let d = self.displacement;
        for (key, v) in [
            ("displacement.theta", d.theta),
            ("displacement.temperature", d.temperature),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                issues.push(format!("{key}: must be finite and non-negative, got {v}"));
            }
        }
        if d.theta == 0.0 && d.temperature == 0.0 {
            issues.push("displacement: theta and temperature offsets are both zero".into());
        }
        if self.n_k < 8 || !self.n_k.is_multiple_of(2) {
            issues.push(format!(
                "n_k: must be even and at least 8, got {}",
                self.n_k
            ));
        }
        issues
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    pub fn point_count(&self) -> usize {
        self.theta.count() * self.temperature.count()
    }
}

/// One grid point. `F` and `Delta` are NaN when the point failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub theta: f64,
    pub temperature: f64,
    pub fidelity: f64,
    pub delta: f64,
    pub gap0: f64,
    pub gap_pi: f64,
    pub degenerate_count: usize,
}

impl SweepRecord {
    pub fn is_flagged(&self) -> bool {
        self.fidelity.is_nan() || self.delta.is_nan()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Progress {
    #[default]
    Silent,
    /// One line per finished theta column on standard error.
    Stderr,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    /// Band structures computed during the sweep.
    pub bands_built: usize,
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    Ok(run_sweep_with(config, Execution::default(), Progress::Silent)?.records)
}

pub fn run_sweep_with(
    config: &SweepConfig,
    exec: Execution,
    progress: Progress,
) -> Result<SweepOutput> {
    config.validate()?;
    let thetas = config.theta.values();
    let temps = config.temperature.values();
    let bands_built = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let columns = map_ordered(exec, &thetas, |&theta| {
        let column = sweep_column(config, theta, &temps, &bands_built);
        if progress == Progress::Stderr {
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!("[sweep] column {n}/{} theta = {theta:.6}", thetas.len());
        }
        column
    });
    Ok(SweepOutput {
        records: columns.into_iter().flatten().collect(),
        bands_built: bands_built.into_inner(),
    })
}

fn build_band(config: &SweepConfig, theta: f64, counter: &AtomicUsize) -> Result<BlochBand> {
    counter.fetch_add(1, Ordering::Relaxed);
    band_structure(&WalkParameters::new(config.class, theta), config.n_k)
}

fn sweep_column(
    config: &SweepConfig,
    theta: f64,
    temps: &[f64],
    counter: &AtomicUsize,
) -> Vec<SweepRecord> {
    let d = config.displacement;
    let band = build_band(config, theta, counter);
    let shifted = if d.theta == 0.0 {
        None
    } else {
        Some(build_band(config, theta + d.theta, counter))
    };
    let (gap0, gap_pi, degenerate_count) = match &band {
        Ok(b) => {
            let g = gap_diagnostics(b);
            (g.gap0, g.gap_pi, b.degenerate_count())
        }
        Err(_) => (f64::NAN, f64::NAN, 0),
    };
    temps
        .iter()
        .map(|&t| {
            let evaluated = band.as_ref().map_err(|_| ()).and_then(|b| {
                let b_prime = match &shifted {
                    None => b,
                    Some(Ok(s)) => s,
                    Some(Err(_)) => return Err(()),
                };
                let p = ThermalPoint::new(b, t).map_err(|_| ())?;
                let q = ThermalPoint::new(b_prime, t + d.temperature).map_err(|_| ())?;
                fidelity_and_delta(&p, &q, config.family, config.precision).map_err(|_| ())
            });
            let (fidelity, delta) = match evaluated {
                Ok(fd) if fd.fidelity.is_finite() && fd.delta.is_finite() => {
                    (fd.fidelity, fd.delta)
                }
                _ => (f64::NAN, f64::NAN),
            };
            SweepRecord {
                theta,
                temperature: t,
                fidelity,
                delta,
                gap0,
                gap_pi,
                degenerate_count,
            }
        })
        .collect()
}

/// `%.{digits}g`-style formatting; non-finite values become `nan`, `inf`, `-inf`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv_to<W: Write>(records: &[SweepRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let fields = [
            r.theta,
            r.temperature,
            r.fidelity,
            r.delta,
            r.gap0,
            r.gap_pi,
        ]
        .map(|v| format_significant(v, CSV_DIGITS));
        writeln!(w, "{},{}", fields.join(","), r.degenerate_count)?;
    }
    w.flush()
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::invalid("no records to write"));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(records, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Headline numbers of a finished sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSummary {
    pub points: usize,
    pub flagged: usize,
    /// `(theta, T, F)` at the smallest fidelity.
    pub min_fidelity: Option<(f64, f64, f64)>,
    pub max_abs_delta: f64,
}

pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let mut summary = SweepSummary {
        points: records.len(),
        flagged: 0,
        min_fidelity: None,
        max_abs_delta: 0.0,
    };
    for r in records {
        if r.is_flagged() {
            summary.flagged += 1;
            continue;
        }
        if summary.min_fidelity.is_none_or(|(_, _, f)| r.fidelity < f) {
            summary.min_fidelity = Some((r.theta, r.temperature, r.fidelity));
        }
        summary.max_abs_delta = summary.max_abs_delta.max(r.delta.abs());
    }
    summary
}
