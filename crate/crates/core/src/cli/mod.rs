//! The `hiaer` command-line tool.
//!
//! Exit codes: 0 success, 1 file or format error, 2 usage or configuration
//! error, 3 invalid network / spike train / key, 4 capacity or overflow,
//! 5 divergence found by `diff`. Failures print one line,
//! `error[<kind>]: <message>`, on stderr.

mod config;

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{RunConfig, DEFAULT_BOARDS_PER_SERVER, DEFAULT_CORES_PER_BOARD};

use crate::compiler::{
    compile_placement, estimate_footprint, image_stats, partition, Allocator, CompileError, CompileOptions,
    IndexPolicy, ImageFormatError, LocatorEntry, MemoryGeometry, MemoryImage, Placement, SynapseEntry, Workload,
    SLOTS_PER_ROW,
};
use crate::generate::{random_network, random_raster, rng, GenParams};
use crate::metrics::{report, MetricsError, NetworkSummary};
use crate::network::{
    parse_network, serialize_network, DocumentError, SpikeRaster, SpikeTrainError, ValidatedNetwork, ValidationError,
};
use crate::oracle::{diff_runs, oracle_run, DiffError, OracleError};
use crate::router::{emit_system, load_any, run_system, RouterError, RoutingTable, System};
use crate::runtime::{RunOptions, RunOutput, RuntimeError};
use config::one_line;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Capacity(_) => 4,
            CliError::Divergence(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Format(_) => "format",
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Capacity(_) => "capacity",
            CliError::Divergence(_) => "divergence",
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::InvalidPartition(_) => CliError::Usage(e.to_string()),
            _ => CliError::Capacity(e.to_string()),
        }
    }
}

impl From<RuntimeError> for CliError {
    fn from(e: RuntimeError) -> Self {
        match e {
            RuntimeError::CorruptImage(_) => CliError::Format(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<RouterError> for CliError {
    fn from(e: RouterError) -> Self {
        match e {
            RouterError::Runtime(r) => r.into(),
            RouterError::TopologyMismatch { .. } => CliError::Capacity(e.to_string()),
            _ => CliError::Format(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DiffError> for CliError {
    fn from(e: DiffError) -> Self {
        match e {
            DiffError::Oracle(o) => o.into(),
            DiffError::System(s) => s.into(),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "hiaer", version, about = "Compile, run and check spiking networks on a modeled segmented-memory core fabric")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a network document into a memory image (one core) or a system container.
    Compile(CompileArgs),
    /// Execute a compiled image or system on a spike train.
    Run(RunArgs),
    /// Execute a network document on the reference simulator.
    Simulate(SimulateArgs),
    /// Run image and reference side by side and report the first divergence.
    Diff(DiffArgs),
    /// Occupancy statistics of a compiled image or system.
    Stats(StatsArgs),
    /// Decode the locator and synapse entries of one source, or one row.
    InspectMemory(InspectArgs),
    /// Read, and optionally rewrite, one synapse weight in a compiled image.
    Synapse(SynapseArgs),
    /// Analytical memory footprint of a synthetic workload.
    Footprint(FootprintArgs),
    /// Write a random network and optionally a random spike train.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AllocatorArg {
    Packed,
    Naive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IndexArg {
    Balanced,
    Sequential,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Network document (JSON).
    #[arg(long)]
    pub net: PathBuf,
    /// Output image or system file.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    /// Number of cores to partition onto.
    #[arg(long, default_value_t = 1)]
    pub cores: usize,
    /// Maximum neurons per core.
    #[arg(long)]
    pub capacity: Option<usize>,
    /// Explicit placement: lines of `<neuron key> <core>`; overrides the block partitioner.
    #[arg(long)]
    pub assignment: Option<PathBuf>,
    /// Memory per core: a row count, `rows=<n>`, or a size such as 8GiB.
    #[arg(long, default_value = "8GiB")]
    pub geometry: MemoryGeometry,
    #[arg(long, value_enum, default_value = "packed")]
    pub allocator: AllocatorArg,
    /// How local neuron indices are chosen.
    #[arg(long, value_enum, default_value = "balanced")]
    pub index_policy: IndexArg,
    /// Run configuration (TOML); its topology must hold the cores.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Compiled image or system file.
    #[arg(long)]
    pub img: PathBuf,
    /// Input spike train; no inputs when omitted.
    #[arg(long)]
    pub spikes: Option<PathBuf>,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append final membranes as `# membrane <key> <value>` lines.
    #[arg(long)]
    pub membranes: bool,
    /// Append the counter and cost report as `#` comment lines.
    #[arg(long)]
    pub counters: bool,
    /// Also write the report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Run configuration (TOML): topology and cost model.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub spikes: Option<PathBuf>,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append final membranes as `# membrane <key> <value>` lines.
    #[arg(long)]
    pub membranes: bool,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub img: PathBuf,
    #[arg(long)]
    pub spikes: Option<PathBuf>,
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub img: PathBuf,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("what").required(true).args(["neuron", "axon", "row"]))]
pub struct InspectArgs {
    #[arg(long)]
    pub img: PathBuf,
    /// Core to inspect; defaults to the core holding the key, or 0.
    #[arg(long)]
    pub core: Option<usize>,
    #[arg(long)]
    pub neuron: Option<String>,
    /// User axon key, or the key of a remote neuron served by a relay axon.
    #[arg(long)]
    pub axon: Option<String>,
    /// Synapse-region row, relative to the region start.
    #[arg(long)]
    pub row: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynapseArgs {
    #[arg(long)]
    pub img: PathBuf,
    /// Presynaptic axon or neuron key.
    #[arg(long)]
    pub pre: String,
    /// Postsynaptic neuron key.
    #[arg(long)]
    pub post: String,
    /// New weight; requires --out.
    #[arg(long, requires = "out", allow_negative_numbers = true)]
    pub set: Option<i64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FootprintArgs {
    #[arg(long, default_value_t = 4_000_000)]
    pub neurons: u64,
    #[arg(long, default_value_t = 0)]
    pub axons: u64,
    /// Mean outgoing synapses per neuron.
    #[arg(long, default_value_t = 250.0)]
    pub fanout: f64,
    #[arg(long, default_value = "8GiB")]
    pub geometry: MemoryGeometry,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output network document.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub max_neurons: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_synapses: usize,
    /// Give every LIF model a silent noise shift.
    #[arg(long)]
    pub no_noise: bool,
    /// Also write a random spike train here.
    #[arg(long)]
    pub spikes: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub steps: u64,
    /// Per-axon, per-step spike probability.
    #[arg(long, default_value_t = 0.1)]
    pub rate: f64,
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), reason: e.to_string() })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io { path: path.into(), reason: e.to_string() })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io { path: path.into(), reason: e.to_string() })
}

fn load_network(path: &Path) -> Result<ValidatedNetwork, CliError> {
    let text = read_text(path)?;
    let def = parse_network(&text).map_err(|e: DocumentError| CliError::Validation(format!("{}: {e}", path.display())))?;
    def.validate().map_err(|e: ValidationError| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_spikes(path: Option<&Path>) -> Result<SpikeRaster, CliError> {
    match path {
        None => Ok(SpikeRaster::new()),
        Some(p) => SpikeRaster::parse(&read_text(p)?)
            .map_err(|e: SpikeTrainError| CliError::Validation(format!("{}: {e}", p.display()))),
    }
}

fn load_system(path: &Path, cfg: &RunConfig) -> Result<(Vec<MemoryImage>, RoutingTable), CliError> {
    let (images, routes) =
        load_any(&read_bytes(path)?).map_err(|e: ImageFormatError| CliError::Format(format!("{}: {e}", path.display())))?;
    let table = RoutingTable::new(&images, routes, cfg.topology_for(images.len()))?;
    Ok((images, table))
}

fn load_assignment(path: &Path, net: &ValidatedNetwork) -> Result<Vec<u32>, CliError> {
    let text = read_text(path)?;
    let mut cores = vec![None; net.num_neurons()];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: &str| CliError::Usage(format!("{} line {}: {why}", path.display(), i + 1));
        let mut parts = line.split_whitespace();
        let (Some(key), Some(core), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad("expected '<neuron key> <core>'"));
        };
        let n = net.neuron_index(key).ok_or_else(|| bad(&format!("unknown neuron '{key}'")))?;
        let c: u32 = core.parse().map_err(|_| bad(&format!("bad core '{core}'")))?;
        if cores[n as usize].replace(c).is_some() {
            return Err(bad(&format!("neuron '{key}' assigned twice")));
        }
    }
    cores
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| {
                CliError::Usage(format!("{}: neuron '{}' has no core", path.display(), net.neuron_keys()[i]))
            })
        })
        .collect()
}

fn emit_run(out: &mut String, raster: &SpikeRaster, keys: &[String], membranes: Option<&[i32]>) {
    out.push_str(&raster.to_text());
    if let Some(values) = membranes {
        for (k, v) in keys.iter().zip(values) {
            let _ = writeln!(out, "# membrane {k} {v}");
        }
    }
}

fn cmd_compile(a: &CompileArgs, out: &mut String) -> Result<(), CliError> {
    let net = load_network(&a.net)?;
    let cfg = RunConfig::load(a.config.as_deref())?;
    let opts = CompileOptions {
        cores: a.cores,
        capacity: a.capacity.unwrap_or(usize::MAX),
        geometry: a.geometry,
        allocator: match a.allocator {
            AllocatorArg::Packed => Allocator::Packed,
            AllocatorArg::Naive => Allocator::Naive,
        },
        index_policy: match a.index_policy {
            IndexArg::Balanced => IndexPolicy::Balanced,
            IndexArg::Sequential => IndexPolicy::Sequential,
        },
    };
    let placement = match &a.assignment {
        Some(p) => Placement::from_assignment(&net, a.cores, load_assignment(p, &net)?, a.capacity)?,
        None => partition(&net, opts.cores, opts.capacity)?,
    };
    let compiled = compile_placement(&net, placement, &opts)?;
    let table = crate::router::build_routing(&compiled.images, cfg.topology_for(compiled.images.len()))?;
    let bytes = if compiled.images.len() == 1 {
        crate::compiler::emit_image(&compiled.images[0])
    } else {
        emit_system(&compiled.images, table.routes())
    };
    write_file(&a.out, &bytes)?;

    let stats: Vec<_> = compiled.images.iter().map(image_stats).collect();
    let valid: u64 = stats.iter().map(|s| s.valid_entries).sum();
    let slots: u64 = stats.iter().map(|s| s.allocated_slots).sum();
    let _ = writeln!(out, "cores = {}", compiled.images.len());
    let _ = writeln!(out, "neurons = {}", net.num_neurons());
    let _ = writeln!(out, "axons = {}", net.num_axons());
    let _ = writeln!(out, "synapses = {}", net.num_synapses());
    let _ = writeln!(out, "routes = {}", table.routes().len());
    let _ = writeln!(out, "synapse_rows = {}", stats.iter().map(|s| s.synapse_rows as u64).sum::<u64>());
    let _ = writeln!(out, "density = {:.6}", if slots == 0 { 0.0 } else { valid as f64 / slots as f64 });
    let _ = writeln!(out, "bytes = {}", bytes.len());
    Ok(())
}

fn summary(images: &[MemoryImage]) -> NetworkSummary {
    let stats: Vec<_> = images.iter().map(image_stats).collect();
    let valid: u64 = stats.iter().map(|s| s.valid_entries).sum();
    let slots: u64 = stats.iter().map(|s| s.allocated_slots).sum();
    let mut axon_keys: Vec<&str> = images
        .iter()
        .flat_map(|img| img.axon_labels().iter())
        .filter_map(|l| match l {
            crate::compiler::AxonLabel::Input(k) => Some(k.as_str()),
            crate::compiler::AxonLabel::Relay(_) => None,
        })
        .collect();
    axon_keys.sort_unstable();
    axon_keys.dedup();
    NetworkSummary {
        neurons: images.iter().map(MemoryImage::num_neurons).sum(),
        axons: axon_keys.len(),
        synapses: stats.iter().map(|s| s.user_synapses as usize).sum(),
        cores: images.len(),
        density: if slots == 0 { 0.0 } else { valid as f64 / slots as f64 },
    }
}

fn cmd_run(a: &RunArgs, out: &mut String) -> Result<(), CliError> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let (images, table) = load_system(&a.img, &cfg)?;
    let raster = load_spikes(a.spikes.as_deref())?;
    let net = summary(&images);
    let result = run_system(images, table, &raster, a.steps, RunOptions { seed: a.seed, traces: false })?;
    let run: &RunOutput = &result.run;
    emit_run(out, &run.raster, &run.neuron_keys, a.membranes.then_some(&run.final_membranes[..]));
    if a.counters || a.report.is_some() {
        let text = report(&net, run, &result.per_core, Some(&result.traffic), &cfg.cost)?;
        if a.counters {
            for line in text.lines() {
                let _ = writeln!(out, "# {line}").map(|_| ());
            }
        }
        if let Some(p) = &a.report {
            write_file(p, text.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, out: &mut String) -> Result<(), CliError> {
    let net = load_network(&a.net)?;
    let raster = load_spikes(a.spikes.as_deref())?;
    let result = oracle_run(&net, &raster, a.steps, a.seed, false)?;
    emit_run(out, &result.raster, net.neuron_keys(), a.membranes.then_some(&result.final_membranes[..]));
    Ok(())
}

fn cmd_diff(a: &DiffArgs, out: &mut String) -> Result<(), CliError> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let net = load_network(&a.net)?;
    let (images, table) = load_system(&a.img, &cfg)?;
    let raster = load_spikes(a.spikes.as_deref())?;
    match diff_runs(&net, images, table, &raster, a.steps, a.seed)? {
        None => {
            let _ = writeln!(out, "no divergence over {} steps", a.steps);
            Ok(())
        }
        Some(d) => {
            let _ = writeln!(out, "divergence at {d}");
            Err(CliError::Divergence(d.to_string()))
        }
    }
}

fn cmd_stats(a: &StatsArgs, out: &mut String) -> Result<(), CliError> {
    let (images, routes) =
        load_any(&read_bytes(&a.img)?).map_err(|e| CliError::Format(format!("{}: {e}", a.img.display())))?;
    let net = summary(&images);
    let _ = writeln!(out, "[system]");
    let _ = writeln!(out, "cores = {}", net.cores);
    let _ = writeln!(out, "neurons = {}", net.neurons);
    let _ = writeln!(out, "axons = {}", net.axons);
    let _ = writeln!(out, "synapses = {}", net.synapses);
    let _ = writeln!(out, "routes = {}", routes.len());
    let _ = writeln!(out, "density = {:.6}", net.density);
    for (i, img) in images.iter().enumerate() {
        let s = image_stats(img);
        let relays = img.axon_labels().iter().filter(|l| matches!(l, crate::compiler::AxonLabel::Relay(_))).count();
        let _ = writeln!(out, "\n[[core]]");
        let _ = writeln!(out, "index = {i}");
        let _ = writeln!(out, "neurons = {}", img.num_neurons());
        let _ = writeln!(out, "axons = {}", img.num_axons() - relays);
        let _ = writeln!(out, "relay_axons = {relays}");
        let _ = writeln!(out, "memory_rows = {}", img.geometry().total_rows);
        let _ = writeln!(out, "axon_locator_rows = {}", s.axon_rows);
        let _ = writeln!(out, "neuron_locator_rows = {}", s.neuron_rows);
        let _ = writeln!(out, "synapse_rows = {}", s.synapse_rows);
        let _ = writeln!(out, "valid_entries = {}", s.valid_entries);
        let _ = writeln!(out, "user_synapses = {}", s.user_synapses);
        let _ = writeln!(out, "allocated_slots = {}", s.allocated_slots);
        let _ = writeln!(out, "density = {:.6}", s.density);
    }
    Ok(())
}

fn describe_locator(loc: &LocatorEntry, raw: u64) -> String {
    let mut flags = Vec::new();
    if loc.is_valid() {
        flags.push("valid");
    }
    if loc.is_placeholder() {
        flags.push("placeholder");
    }
    format!(
        "base_row={} row_count={} model={} flags={} raw={raw:#018x}",
        loc.base_row,
        loc.row_count,
        loc.model_id,
        if flags.is_empty() { "none".into() } else { flags.join(",") }
    )
}

fn describe_entry(e: &SynapseEntry, raw: u64) -> String {
    if !e.valid {
        return format!("empty raw={raw:#018x}");
    }
    format!(
        "owner={} target={} weight={}{} raw={raw:#018x}",
        e.owner,
        e.target,
        e.weight,
        if e.output { " output" } else { "" }
    )
}

fn cmd_inspect(a: &InspectArgs, out: &mut String) -> Result<(), CliError> {
    use crate::network::Source;
    let (images, _) = load_any(&read_bytes(&a.img)?).map_err(|e| CliError::Format(format!("{}: {e}", a.img.display())))?;
    let find = |key: &str, pick: &dyn Fn(&MemoryImage) -> Option<u32>| -> Result<(usize, u32), CliError> {
        let candidates: Vec<usize> = match a.core {
            Some(c) if c >= images.len() => {
                return Err(CliError::Usage(format!("core {c} out of range ({} cores)", images.len())))
            }
            Some(c) => vec![c],
            None => (0..images.len()).collect(),
        };
        candidates
            .into_iter()
            .find_map(|c| pick(&images[c]).map(|i| (c, i)))
            .ok_or_else(|| CliError::Validation(format!("unknown key '{key}'")))
    };

    let (core, source) = if let Some(key) = &a.neuron {
        let (c, n) = find(key, &|img| img.neuron_by_key(key))?;
        (c, Source::Neuron(n))
    } else if let Some(key) = &a.axon {
        let (c, ax) = find(key, &|img| img.input_axon(key).or_else(|| img.relay_axon(key)))?;
        (c, Source::Axon(ax))
    } else {
        let c = a.core.unwrap_or(0);
        let img = images
            .get(c)
            .ok_or_else(|| CliError::Usage(format!("core {c} out of range ({} cores)", images.len())))?;
        let row = a.row.expect("clap enforces one of neuron/axon/row");
        if row >= img.synapse_region_rows() as u64 {
            return Err(CliError::Usage(format!("row {row} outside the synapse region ({} rows)", img.synapse_region_rows())));
        }
        let _ = writeln!(out, "core = {c}");
        let _ = writeln!(out, "row = {row} (absolute {})", img.synapse_region_start() + row);
        for (col, &raw) in img.synapse_row(row).iter().enumerate() {
            let lane = (row as usize % 2) * SLOTS_PER_ROW + col;
            let _ = writeln!(out, "  col {col} lane {lane:2}: {}", describe_entry(&SynapseEntry::decode(raw), raw));
        }
        return Ok(());
    };

    let img = &images[core];
    let _ = writeln!(out, "core = {core}");
    let slot = match source {
        Source::Neuron(n) => {
            let info = &img.neurons()[n as usize];
            let _ = writeln!(out, "neuron = {} (local {n}, global {})", info.key, info.global);
            img.neuron_locator_slot(n)
        }
        Source::Axon(ax) => {
            let label = &img.axon_labels()[ax as usize];
            let kind = match label {
                crate::compiler::AxonLabel::Input(_) => "input",
                crate::compiler::AxonLabel::Relay(_) => "relay",
            };
            let _ = writeln!(out, "axon = {} ({kind}, local {ax})", label.key());
            ax as usize
        }
    };
    let raw = img.raw_slots()[slot];
    let loc = LocatorEntry::decode(raw);
    let _ = writeln!(out, "owner = {}", img.source_ordinal(source));
    let _ = writeln!(out, "locator slot {slot}: {}", describe_locator(&loc, raw));
    for (at, e) in img.region_entries(source) {
        let raw = img.synapse_row(at.row)[at.col];
        let target = img.neurons().get(e.target as usize).map(|n| n.key.as_str()).filter(|_| !loc.is_placeholder());
        let _ = writeln!(
            out,
            "  row {} col {} lane {:2}: {}{}",
            at.row,
            at.col,
            at.lane(),
            describe_entry(&e, raw),
            target.map(|k| format!(" -> {k}")).unwrap_or_default()
        );
    }
    Ok(())
}

fn cmd_synapse(a: &SynapseArgs, out: &mut String) -> Result<(), CliError> {
    let bytes = read_bytes(&a.img)?;
    let (images, routes) = load_any(&bytes).map_err(|e| CliError::Format(format!("{}: {e}", a.img.display())))?;
    let single = bytes.starts_with(crate::compiler::IMAGE_MAGIC);
    let table = RoutingTable::new(&images, routes.clone(), crate::router::Topology::fitting(images.len(), 1, 1))?;
    let mut sys = System::new(images, table, 0)?;
    let old = sys.read_synapse(&a.pre, &a.post)?;
    let _ = writeln!(out, "weight = {old}");
    if let (Some(w), Some(path)) = (a.set, &a.out) {
        sys.write_synapse(&a.pre, &a.post, w)?;
        let _ = writeln!(out, "new_weight = {}", sys.read_synapse(&a.pre, &a.post)?);
        let images = sys.into_images();
        let bytes =
            if single { crate::compiler::emit_image(&images[0]) } else { emit_system(&images, &routes) };
        write_file(path, &bytes)?;
    }
    Ok(())
}

fn cmd_footprint(a: &FootprintArgs, out: &mut String) -> Result<(), CliError> {
    if !(a.fanout.is_finite() && a.fanout >= 0.0) {
        return Err(CliError::Usage(format!("fanout must be a non-negative number, got {}", a.fanout)));
    }
    let r = estimate_footprint(Workload { neurons: a.neurons, axons: a.axons, fanout: a.fanout }, a.geometry);
    out.push_str(&r.to_text());
    Ok(())
}

fn cmd_generate(a: &GenerateArgs, out: &mut String) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.rate) {
        return Err(CliError::Usage(format!("rate must be in [0, 1], got {}", a.rate)));
    }
    let mut r = rng(a.seed);
    let p = GenParams { max_neurons: a.max_neurons.max(1), max_synapses: a.max_synapses, noise: !a.no_noise, ..Default::default() };
    let def = random_network(&mut r, &p);
    let net = def.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    write_file(&a.out, serialize_network(&def).as_bytes())?;
    let _ = writeln!(out, "neurons = {}", net.num_neurons());
    let _ = writeln!(out, "axons = {}", net.num_axons());
    let _ = writeln!(out, "synapses = {}", net.num_synapses());
    if let Some(path) = &a.spikes {
        let raster = random_raster(&mut r, &net, a.steps, a.rate);
        write_file(path, raster.to_text().as_bytes())?;
        let _ = writeln!(out, "input_events = {}", raster.event_count());
    }
    Ok(())
}

/// Executes a parsed command, returning what it prints on stdout. On a
/// divergence the returned error comes with the report already in `out`.
pub fn execute(cli: &Cli, out: &mut String) -> Result<(), CliError> {
    match &cli.command {
        Command::Compile(a) => cmd_compile(a, out),
        Command::Run(a) => cmd_run(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Diff(a) => cmd_diff(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::InspectMemory(a) => cmd_inspect(a, out),
        Command::Synapse(a) => cmd_synapse(a, out),
        Command::Footprint(a) => cmd_footprint(a, out),
        Command::Generate(a) => cmd_generate(a, out),
    }
}

/// Full entry point: parses `args`, runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return 2;
        }
    };
    let mut out = String::new();
    let result = execute(&cli, &mut out);
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    if lock.write_all(out.as_bytes()).and_then(|_| lock.flush()).is_err() {
        return 1;
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
