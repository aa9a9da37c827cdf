//! Command-line front end: `sweep`, `echo-verify` and `table`, all writing
//! RFC-4180 CSV with unit-suffixed columns.

pub mod config;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimator::comparison_table;
use crate::hamiltonian::{
    build_published_echo_sequence, design_refocusing_sequence, verify_echo, EchoReport,
    EchoSequence, IdealClockSpec, TemporalConvention,
};
use crate::protocol::{analytic_probability, sample_shots, sweep, PartyConfig, ProtocolConfig};
use crate::rng::derive_seed;

pub use config::{DeltaGrid, ExperimentConfig, MoleculeFile, PartySpec, Preset, TableSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qcsync",
    version,
    about = "Multiparty quantum clock synchronization simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact (and optionally sampled) outcome probabilities over an offset grid.
    Sweep(CommonArgs),
    /// Fidelity of the published and the designed echo sequences.
    EchoVerify(CommonArgs),
    /// Monte Carlo offset-accuracy grid, protocols × frequencies.
    Table(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML experiment configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration.
    #[arg(long, value_enum, value_name = "NAME")]
    pub preset: Option<Preset>,
    /// Overrides the configured seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match (&self.config, self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(preset)) => preset.config(),
            (None, None) => {
                return Err(Error::Config(
                    "one of --config or --preset is required".into(),
                ))
            }
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if self.out.is_some() {
            config.out = self.out.clone();
        }
        Ok(config)
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let args = match &cli.command {
        Command::Sweep(a) | Command::EchoVerify(a) | Command::Table(a) => a.clone(),
    };
    let outcome = args.resolve().and_then(|config| {
        let csv = match cli.command {
            Command::Sweep(_) => sweep_csv(&config)?,
            Command::EchoVerify(_) => echo_csv(&config)?,
            Command::Table(_) => table_csv(&config)?,
        };
        emit(&config, &csv)
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e @ Error::Io { .. }) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn emit(config: &ExperimentConfig, bytes: &[u8]) -> Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

struct CsvOut(csv::Writer<Vec<u8>>);

impl CsvOut {
    fn new(header: &[&str]) -> Result<Self> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(header).map_err(csv_err)?;
        Ok(Self(w))
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.0.write_record(fields).map_err(csv_err)
    }

    fn finish(self) -> Result<Vec<u8>> {
        self.0.into_inner().map_err(|e| Error::Io {
            path: "<csv buffer>".into(),
            source: std::io::Error::other(e.to_string()),
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io {
        path: "<csv buffer>".into(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn require_grid(config: &ExperimentConfig) -> Result<Vec<f64>> {
    config
        .delta
        .as_ref()
        .map(DeltaGrid::values)
        .ok_or_else(|| Error::Config("delta: an offset grid is required".into()))
}

/// One row per (kind, Δ, listed party).
pub fn sweep_csv(config: &ExperimentConfig) -> Result<Vec<u8>> {
    let deltas = require_grid(config)?;
    if config.parties.is_empty() {
        return Err(Error::Config(
            "parties: at least one clock is required for a sweep".into(),
        ));
    }
    let mut out = CsvOut::new(&[
        "kind",
        "delta_s",
        "party",
        "omega_hz",
        "p_exact",
        "p_analytic",
        "p_sampled",
    ])?;
    for kind in &config.kinds {
        let n = kind.num_qubits();
        let omega = config.clock_omegas(n);
        let parties = (0..n)
            .map(|index| PartyConfig {
                index,
                omega: omega[index],
                delta: 0.0,
            })
            .collect();
        let template = ProtocolConfig::new(*kind, config.standard_index, parties)?;
        let tables = sweep(&template, &deltas)?;
        for (di, (table, &delta)) in tables.iter().zip(&deltas).enumerate() {
            let record = match config.shots {
                Some(shots) => Some(sample_shots(
                    table,
                    shots,
                    derive_seed(config.seed, 0, di as u64),
                )?),
                None => None,
            };
            for party in &config.parties {
                let outcome = table.party(party.index).ok_or_else(|| {
                    Error::Config(format!("party {} missing from {kind}", party.index))
                })?;
                let omega = omega[party.index];
                let sampled = record.as_ref().and_then(|r| {
                    r.parties
                        .iter()
                        .find(|c| c.index == party.index)
                        .and_then(|c| c.empirical_pos_given_pos())
                });
                out.row([
                    kind.label(),
                    delta.to_string(),
                    party.index.to_string(),
                    party.omega_hz.to_string(),
                    opt(outcome.p_pos_given_pos),
                    analytic_probability(*kind, omega, delta)?.to_string(),
                    opt(sampled),
                ])?;
            }
        }
    }
    out.finish()
}

/// One row per protocol kind, one `std_<f>hz_us` column per frequency.
pub fn table_csv(config: &ExperimentConfig) -> Result<Vec<u8>> {
    let table = config.table.as_ref().ok_or_else(|| {
        Error::Config("table: a [table] section with omegas_hz is required".into())
    })?;
    let shots = config
        .shots
        .ok_or_else(|| Error::Config("shots: required for table".into()))?;
    let trials = config
        .trials
        .ok_or_else(|| Error::Config("trials: required for table".into()))?;
    let omegas: Vec<f64> = table.omegas_hz.iter().map(|f| 2.0 * PI * f).collect();
    let report = comparison_table(
        &omegas,
        &config.kinds,
        table.phase_rad,
        shots,
        trials,
        config.seed,
    )?;

    let std_cols: Vec<String> = table
        .omegas_hz
        .iter()
        .map(|f| format!("std_{f}hz_us"))
        .collect();
    let mut header = vec!["kind", "shots", "trials", "seed", "phase_rad"];
    header.extend(std_cols.iter().map(String::as_str));
    header.push("flags");
    let mut out = CsvOut::new(&header)?;
    for (row, kind) in report.cells.iter().zip(&report.kinds) {
        let mut fields = vec![
            kind.label(),
            shots.to_string(),
            trials.to_string(),
            config.seed.to_string(),
            table.phase_rad.to_string(),
        ];
        fields.extend(row.iter().map(|c| (c.std_s * 1e6).to_string()));
        let flags: Vec<String> = row
            .iter()
            .zip(&table.omegas_hz)
            .filter(|(c, _)| c.flags.any())
            .map(|(c, f)| format!("{f}hz:{}", c.flags.describe()))
            .collect();
        fields.push(flags.join(";"));
        out.row(fields)?;
    }
    out.finish()
}

fn join_ints<I: IntoIterator<Item = i64>>(values: I) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn echo_row(
    out: &mut CsvOut,
    delta: f64,
    name: &str,
    seq: &EchoSequence,
    report: &EchoReport,
) -> Result<()> {
    let (count, seg, qubit_sums, pair_sums) = match &report.sign_table {
        Some(t) => {
            let n = t.per_qubit_sums.len();
            let pairs = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .map(|(a, b)| t.per_pair_sums[a][b]);
            (
                t.segment_count.to_string(),
                t.segment_duration().to_string(),
                join_ints(t.per_qubit_sums.iter().copied()),
                join_ints(pairs),
            )
        }
        None => Default::default(),
    };
    let residuals: Vec<String> = report.residuals.iter().map(ToString::to_string).collect();
    out.row([
        delta.to_string(),
        name.to_string(),
        report.fidelity.to_string(),
        seq.events().len().to_string(),
        count,
        seg,
        qubit_sums,
        pair_sums,
        residuals.join(" "),
    ])
}

/// Fidelity report of the published sequence (both conventions, four-qubit
/// molecules only) and of the designed sequence, per offset.
pub fn echo_csv(config: &ExperimentConfig) -> Result<Vec<u8>> {
    let path = config
        .molecule
        .as_ref()
        .ok_or_else(|| Error::Config("molecule: echo-verify needs a molecule file".into()))?;
    let molecule = MoleculeFile::load(path)?.to_spec()?;
    let n = molecule.num_qubits();
    if config.standard_index >= n {
        return Err(Error::Config(format!(
            "standard_index: {} out of range for a {n}-qubit molecule",
            config.standard_index
        )));
    }
    if let Some(p) = config.parties.iter().find(|p| p.index >= n) {
        return Err(Error::Config(format!(
            "parties: qubit {} not in the molecule",
            p.index
        )));
    }
    // Listed parties use their nominal (compensated) frequency; the rest keep
    // the molecule's shift.
    let mut omega = molecule.omega().to_vec();
    for p in &config.parties {
        omega[p.index] = 2.0 * PI * p.omega_hz;
    }
    omega[config.standard_index] = 0.0;
    let ideal = IdealClockSpec::new(config.standard_index, omega)?;
    let deltas = require_grid(config)?;

    let mut out = CsvOut::new(&[
        "delta_s",
        "sequence",
        "fidelity",
        "event_count",
        "segment_count",
        "segment_s",
        "per_qubit_sums",
        "per_pair_sums",
        "residuals",
    ])?;
    for &delta in &deltas {
        if delta < 0.0 {
            return Err(Error::Config(format!(
                "delta: echo offsets must be ≥ 0, got {delta}"
            )));
        }
        if n == 4 {
            for conv in [
                TemporalConvention::RightToLeft,
                TemporalConvention::LeftToRight,
            ] {
                let seq = build_published_echo_sequence(delta, conv)?;
                let report = verify_echo(&seq, &molecule, &ideal, delta)?;
                echo_row(
                    &mut out,
                    delta,
                    &format!("published_{}", conv.label()),
                    &seq,
                    &report,
                )?;
            }
        }
        let seq = design_refocusing_sequence(n, config.standard_index, delta)?;
        let report = verify_echo(&seq, &molecule, &ideal, delta)?;
        echo_row(&mut out, delta, "designed", &seq, &report)?;
    }
    out.finish()
}
