//! `ffwd`: batch runner for adaptive-circuit experiments.
//!
//! Every command writes its artifacts first and `manifest.json` last, via a
//! temporary file and a rename. Failures exit nonzero with one JSON line on
//! stderr and leave no manifest behind.

mod output;
mod protocol;

use clap::{Parser, Subcommand, ValueEnum};
use ffwd::circuit::{to_text, Topology};
use ffwd::engine::{bitstring, EngineError};
use ffwd::metrology::{tvd, Backend, MetrologyError, Runner};
use ffwd::noise::{load_device, packaged_device, NoiseError, NoiseModel};
use ffwd::protocols::{verify::min_fidelity, ProtocolError};
use ffwd::suite::{self, SuiteError, SuiteOptions, SCHEMA_VERSION};
use output::{Manifest, OutDir};
use protocol::{ProtocolArgs, ProtocolKind};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Environment variable naming the default device calibration file.
pub const DEVICE_ENV: &str = "FFWD_DEVICE";

#[derive(Debug, Parser)]
#[command(name = "ffwd", version, about = "Simulate and benchmark adaptive quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args, Serialize)]
struct DeviceArg {
    /// Device calibration file; the packaged 8-qubit ring when unset.
    #[arg(long, env = DEVICE_ENV)]
    device: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Engine {
    Trajectory,
    Density,
    Stabilizer,
    Enumerate,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one protocol, execute it, and write its results.
    Run(RunArgs),
    /// Run the full experiment set noiselessly and under device noise.
    ReproducePaper(ReproduceArgs),
    /// Print or save a protocol circuit.
    EmitCircuit(EmitArgs),
    /// Load a calibration file and report its contents.
    ValidateDevice(ValidateArgs),
}

#[derive(Debug, clap::Args, Serialize)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, value_enum, default_value = "trajectory")]
    engine: Engine,
    /// `none`, `device` (the device file), or a calibration file path.
    #[arg(long, default_value = "none")]
    noise: String,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Dynamical decoupling on idle spectators.
    #[arg(long)]
    dd: bool,
    #[command(flatten)]
    device: DeviceArg,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Debug, clap::Args, Serialize)]
struct ReproduceArgs {
    #[command(flatten)]
    device: DeviceArg,
    /// Sample this many trajectories per circuit instead of exact evolution.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    dd: bool,
    /// Skip cycle benchmarking.
    #[arg(long)]
    no_cb: bool,
    #[arg(long, default_value = "reproduction")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, clap::Args)]
struct EmitArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    device: DeviceArg,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ValidateArgs {
    /// Calibration file; falls back to the device variable, then the
    /// packaged file.
    path: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: "usage", message: message.into(), code: 2 }
    }

    pub(crate) fn new(kind: &'static str, message: impl ToString) -> Self {
        Self { kind, message: message.to_string(), code: 1 }
    }

    fn line(&self) -> String {
        json!({ "error": { "kind": self.kind, "message": self.message.replace('\n', " ") } }).to_string()
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        Self::new("protocol", e)
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        Self::new("engine", e)
    }
}

impl From<MetrologyError> for CliError {
    fn from(e: MetrologyError) -> Self {
        Self::new("metrology", e)
    }
}

impl From<NoiseError> for CliError {
    fn from(e: NoiseError) -> Self {
        Self::new("device", e)
    }
}

impl From<SuiteError> for CliError {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::NoiselessCheck { .. } => Self::new("noiseless_check", e),
            other => Self::new("suite", other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new("io", e)
    }
}

fn load(path: Option<&Path>) -> Result<(Topology, NoiseModel), CliError> {
    match path {
        Some(p) => load_device(p).map_err(|e| CliError::new("device", format!("{}: {e}", p.display()))),
        None => Ok(packaged_device()?),
    }
}

fn resolve_noise(spec: &str, device: Option<&Path>) -> Result<Option<NoiseModel>, CliError> {
    match spec {
        "none" => Ok(None),
        "device" => Ok(Some(load(device)?.1)),
        path => Ok(Some(load(Some(Path::new(path)))?.1)),
    }
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let mut out = OutDir::create(&args.out)?;
    let started = output::now();
    let (topology, _) = load(args.device.device.as_deref())?;
    let noise = resolve_noise(&args.noise, args.device.device.as_deref())?.map(|n| n.with_dd(args.dd));
    let built = args.protocol.build(&topology)?;
    let mut summary = serde_json::Map::new();
    summary.insert("protocol".into(), json!(built.pc.name));
    if let Some(t) = &built.target {
        summary.insert("target".into(), json!(t));
    }

    if args.engine == Engine::Enumerate {
        if noise.is_some() {
            return Err(CliError::new("engine", "the enumerate engine runs noiseless circuits only"));
        }
        let reports = built.base.verify()?;
        // Reported at the oracle's 1e-9 resolution.
        let worst = (min_fidelity(&reports) * 1e9).round() / 1e9;
        let branches: Vec<Value> = reports
            .iter()
            .map(|r| json!({ "cbits": r.cbits.to_string(), "probability": r.probability, "fidelity": r.fidelity }))
            .collect();
        out.write_json(
            "branches.json",
            &json!({ "schema_version": SCHEMA_VERSION, "protocol": built.pc.name, "branches": branches }),
        )?;
        let mut csv = String::from("schema_version,cbits,probability,fidelity\n");
        for r in &reports {
            csv.push_str(&format!("{SCHEMA_VERSION},{},{},{}\n", r.cbits, r.probability, r.fidelity));
        }
        out.write("branches.csv", &csv)?;
        summary.insert("branches".into(), json!(reports.len()));
        summary.insert("min_branch_fidelity".into(), json!(worst));
        let line = match &built.target {
            Some(t) => format!("target={t}, min branch fidelity={worst:?}"),
            None => format!("branches={}, min branch fidelity={worst:?}", reports.len()),
        };
        summary.insert("summary".into(), json!(line));
        println!("{line}");
    } else {
        let backend = match args.engine {
            Engine::Density => Backend::Exact,
            Engine::Trajectory => Backend::Trajectory { shots: args.shots, seed: args.seed },
            Engine::Stabilizer => Backend::Stabilizer { shots: args.shots, seed: args.seed },
            Engine::Enumerate => unreachable!("handled above"),
        };
        if args.engine == Engine::Stabilizer && noise.is_some() {
            return Err(CliError::new("engine", "the stabilizer engine runs noiseless circuits only"));
        }
        let (circuit, bits) = built.pc.measured();
        if args.engine == Engine::Stabilizer && !circuit.is_clifford() {
            return Err(CliError::new("engine", "the stabilizer engine needs a Clifford circuit"));
        }
        let dist = Runner { backend, noise }.distribution(&circuit, &bits, 0)?;
        let ideal = Runner::exact(None).distribution(&circuit, &bits, 0)?;
        let distance = tvd(&dist, &ideal)?;
        out.write("distribution.json", &dist.to_json())?;
        out.write("distribution.csv", &dist.to_csv())?;
        let outputs: Vec<String> = built.pc.outputs.iter().map(|q| format!("q{q}")).collect();
        summary.insert("outputs".into(), json!(outputs));
        summary.insert("tvd_to_ideal".into(), json!(distance));
        summary.insert("success".into(), json!(1.0 - distance));
        if args.protocol.protocol == ProtocolKind::Ghz {
            let all1 = (1u64 << bits.len()) - 1;
            summary.insert("p_all0".into(), json!(dist.probability(0)));
            summary.insert("p_all1".into(), json!(dist.probability(all1)));
            summary.insert("all1_bitstring".into(), json!(bitstring(all1, bits.len())));
        }
        let line = format!("success={:.6}, tvd={distance:.6}", 1.0 - distance);
        summary.insert("summary".into(), json!(line));
        println!("{line}");
    }
    let config = serde_json::to_value(args).map_err(|e| CliError::new("internal", e))?;
    out.finish(Manifest::new("run", config, started, Value::Object(summary)))
}

fn reproduce(args: &ReproduceArgs) -> Result<(), CliError> {
    let mut out = OutDir::create(&args.out)?;
    let started = output::now();
    let (topology, noise) = load(args.device.device.as_deref())?;
    let options = SuiteOptions {
        shots: args.shots,
        seed: args.seed,
        dd_active: args.dd,
        include_cb: !args.no_cb,
        ..SuiteOptions::default()
    };
    let report = suite::reproduce(&topology, &noise, &options)?;
    out.write("summary.csv", &report.to_csv())?;
    out.write_json("report.json", &report)?;
    for g in &report.noisy.ghz {
        let mut csv = String::from("schema_version,phase,noisy_parity,noiseless_parity\n");
        let ideal = report.noiseless.ghz.iter().find(|x| x.n == g.n).map(|x| &x.curve.parity);
        for (i, (phi, p)) in g.curve.phases.iter().zip(&g.curve.parity).enumerate() {
            let q = ideal.and_then(|v| v.get(i)).copied().unwrap_or(f64::NAN);
            csv.push_str(&format!("{SCHEMA_VERSION},{phi},{p},{q}\n"));
        }
        out.write(&format!("ghz{}_parity.csv", g.n), &csv)?;
    }
    for b in &report.noisy.bell {
        let mut csv = String::from("schema_version,phase,parity\n");
        for (phi, p) in b.curve.phases.iter().zip(&b.curve.parity) {
            csv.push_str(&format!("{SCHEMA_VERSION},{phi},{p}\n"));
        }
        out.write(&format!("bell_{}_parity.csv", b.target), &csv)?;
    }
    out.write("truth_table_cnot_unitary.csv", &report.noisy.cnot_unitary.to_csv())?;
    out.write("truth_table_cnot_adaptive.csv", &report.noisy.cnot_adaptive.to_csv())?;
    out.write("truth_table_cxx.csv", &report.noisy.cxx.to_csv())?;
    let mut ptm = String::from("schema_version,row,i,x,y,z\n");
    for (label, row) in ["i", "x", "y", "z"].iter().zip(&report.noisy.teleport_ptm.r) {
        ptm.push_str(&format!("{SCHEMA_VERSION},{label},{},{},{},{}\n", row[0], row[1], row[2], row[3]));
    }
    out.write("teleport_ptm.csv", &ptm)?;
    if !report.noisy.cb.is_empty() {
        let mut csv = String::from("schema_version,measured,spectator,dd,pauli,m,mean\n");
        for c in &report.noisy.cb {
            for d in &c.decays {
                for (m, y) in &d.points {
                    csv.push_str(&format!(
                        "{SCHEMA_VERSION},{},{},{},{},{m},{y}\n",
                        c.measured, d.spectator, c.dd_active, d.pauli
                    ));
                }
            }
        }
        out.write("cb_decays.csv", &csv)?;
    }
    for r in &report.rows {
        println!("{:<28} noiseless={:<8.4} simulated={:<8.4} published={}", r.metric, r.noiseless, r.simulated, r.published.as_deref().unwrap_or("-"));
    }
    let summary: serde_json::Map<String, Value> =
        report.rows.iter().map(|r| (r.metric.clone(), json!({ "simulated": r.simulated, "published": r.published }))).collect();
    let config = serde_json::to_value(args).map_err(|e| CliError::new("internal", e))?;
    out.finish(Manifest::new("reproduce-paper", config, started, Value::Object(summary)))
}

fn emit(args: &EmitArgs) -> Result<(), CliError> {
    let (topology, _) = load(args.device.device.as_deref())?;
    let built = args.protocol.build(&topology)?;
    let circuit = built.pc.circuit();
    let text = match args.format {
        Format::Text => to_text(&circuit),
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "protocol": built.pc.name,
                "inputs": built.pc.inputs,
                "outputs": built.pc.outputs,
                "depth": ffwd::circuit::depth(&circuit),
                "circuit": serde_json::to_value(&circuit).map_err(|e| CliError::new("internal", e))?,
                "corrections": serde_json::to_value(&built.pc.rule).map_err(|e| CliError::new("internal", e))?,
            });
            serde_json::to_string_pretty(&doc).map_err(|e| CliError::new("internal", e))? + "\n"
        }
    };
    match &args.out {
        Some(path) => output::write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn validate_device(args: &ValidateArgs) -> Result<(), CliError> {
    let path = args.path.clone().or_else(|| std::env::var_os(DEVICE_ENV).map(PathBuf::from));
    let (topology, noise) = load(path.as_deref())?;
    let strong: Vec<Value> = noise
        .crosstalk
        .pairs
        .iter()
        .filter(|p| p.lambda > noise.crosstalk.strong_threshold)
        .map(|p| json!([p.measured, p.spectator]))
        .collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "valid": true,
        "path": path.map(|p| p.display().to_string()),
        "num_qubits": topology.num_qubits,
        "edges": topology.edges().collect::<Vec<_>>(),
        "crosstalk_pairs": noise.crosstalk.pairs.len(),
        "strong_pairs": strong,
        "warnings": noise.coherence.warnings(),
    });
    println!("{doc}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{}", CliError::usage(first.trim_start_matches("error: ")).line());
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::ReproducePaper(a) => reproduce(a),
        Command::EmitCircuit(a) => emit(a),
        Command::ValidateDevice(a) => validate_device(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code)
        }
    }
}
