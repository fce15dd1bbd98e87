//! Thin command-line front end. All logic lives in the library; every
//! capability is also demonstrated by a runnable example under `examples/`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use puretomo::bases::{
    disentangled_five_bases, locc_schedule, original_five_bases, two_n_plus_one_bases, BasisJson,
    MeasurementBasis,
};
use puretomo::error::{Error, Result};
use puretomo::experiment::{
    graph_dump, run_experiment, run_sweep, ExperimentConfig, Method, ReconMode, Selection,
    ShotSpec, StateSpec, SweepConfig,
};
use puretomo::graph::EstimationGraph;
use puretomo::hwopt::{
    best_fixed_length_path, exhaustive_paths_oracle, DeviceGraph, DeviceGraphFile,
};
use puretomo::measure::{ingest_pauli_counts, render_label, NoiseModel, PauliCountsFile};
use puretomo::state::StateVectorJson;

#[derive(Parser)]
#[command(
    name = "puretomo",
    about = "Entanglement-free pure-state tomography: simulate, reconstruct, certify",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one tomography experiment and emit a JSON report.
    Run(RunArgs),
    /// Evaluate a sweep grid and emit CSV rows.
    Sweep(SweepArgs),
    /// Dump a measurement-basis family as JSON.
    Bases(BasesArgs),
    /// Dump an estimation graph (and optionally its reconstruction tree).
    Graph(GraphArgs),
    /// Select the best fixed-length qubit chain on a device graph.
    Hwopt(HwoptArgs),
    /// Relabel externally measured Pauli-subset counts onto the product family.
    Ingest(IngestArgs),
    /// Run the built-in brute-force oracles and print pass/fail lines.
    Oracle(OracleArgs),
    /// Serialize a prepared state as JSON amplitudes.
    DumpState(DumpStateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON file holding an ExperimentConfig (flags are ignored when given).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    n: Option<usize>,
    /// Shots per basis.
    #[arg(long, conflicts_with_all = ["budget", "exact"])]
    shots: Option<u64>,
    /// Total shot budget split across bases (remainder to computational).
    #[arg(long, conflicts_with = "exact")]
    budget: Option<u64>,
    /// Use exact outcome probabilities instead of sampling.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value = "graph-state")]
    state: StateArg,
    /// Amplitude JSON file for --state file.
    #[arg(long)]
    state_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: u32,
    #[arg(long, default_value_t = 0.0)]
    noise_readout: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_depol: f64,
    /// Rotate away zero amplitudes before measuring, undo afterwards.
    #[arg(long)]
    prerotate: bool,
    #[arg(long, default_value_t = 32)]
    candidates: usize,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    selection: SelectionArg,
    #[arg(long, value_enum, default_value = "tree")]
    recon: ReconArg,
    #[arg(long, default_value_t = 16)]
    bootstrap: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the sampled counts in the shared counts schema.
    #[arg(long)]
    counts_out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum MethodArg {
    Five,
    #[value(name = "2n+1")]
    TwoNPlusOne,
}

#[derive(Copy, Clone, ValueEnum)]
enum StateArg {
    GraphState,
    Ghz,
    Random,
    File,
}

#[derive(Copy, Clone, ValueEnum)]
enum SelectionArg {
    Auto,
    Benchmark,
    Blind,
}

#[derive(Copy, Clone, ValueEnum)]
enum ReconArg {
    Tree,
    Chain,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file holding a SweepConfig.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasesArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "2n+1")]
    family: FamilyArg,
    /// Dump only the basis with this id.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum FamilyArg {
    #[value(name = "2n+1")]
    TwoNPlusOne,
    Five,
    Original,
    Locc,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    n: usize,
    /// "uniform" or a JSON file with 2^n weights.
    #[arg(long, default_value = "uniform")]
    weights: String,
    #[arg(long, value_enum, default_value = "hypercube")]
    family: GraphFamilyArg,
    /// Prune vertices at or below this weight before dumping.
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// Include the default reconstruction tree.
    #[arg(long)]
    tree: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum GraphFamilyArg {
    Hypercube,
    Cycle,
}

#[derive(Args)]
struct HwoptArgs {
    /// Device calibration JSON: {directed, nodes: [{id, weight}], edges: [{a, b, weight}]}.
    #[arg(long)]
    device: PathBuf,
    /// Number of physical qubits in the chain.
    #[arg(long)]
    length: usize,
    /// Also run the exhaustive oracle (graphs up to 16 nodes).
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// Pauli-keyed counts JSON.
    #[arg(long)]
    pauli: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Random device graphs for the path-selection check.
    #[arg(long, default_value_t = 50)]
    trials: u64,
}

#[derive(Args)]
struct DumpStateArgs {
    #[arg(long, value_enum, default_value = "graph-state")]
    state: StateArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    min_weight: f64,
    #[arg(long)]
    state_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bases(args) => cmd_bases(args),
        Command::Graph(args) => cmd_graph(args),
        Command::Hwopt(args) => cmd_hwopt(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::DumpState(args) => cmd_dump_state(args),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn state_spec(arg: StateArg, file: &Option<PathBuf>, min_weight: f64) -> Result<StateSpec> {
    Ok(match arg {
        StateArg::GraphState => StateSpec::GraphState,
        StateArg::Ghz => StateSpec::Ghz,
        StateArg::Random => StateSpec::Random { min_weight },
        StateArg::File => {
            let path = file
                .as_ref()
                .ok_or_else(|| Error::schema("state_file", "--state file needs --state-file"))?;
            let json: StateVectorJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            StateSpec::Amplitudes(json)
        }
    })
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let config: ExperimentConfig = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => {
            let method = match args.method {
                Some(MethodArg::Five) => Method::Five,
                Some(MethodArg::TwoNPlusOne) => Method::TwoNPlusOne,
                None => {
                    return Err(Error::schema(
                        "method",
                        "--method required without --config",
                    ))
                }
            };
            let n = args
                .n
                .ok_or_else(|| Error::schema("n", "--n required without --config"))?;
            let shots = if args.exact {
                ShotSpec::Exact
            } else if let Some(b) = args.budget {
                ShotSpec::TotalBudget(b)
            } else if let Some(s) = args.shots {
                ShotSpec::PerBasis(s)
            } else {
                return Err(Error::schema(
                    "shots",
                    "one of --shots/--budget/--exact required",
                ));
            };
            let noise = if args.noise_readout > 0.0 || args.noise_depol > 0.0 {
                Some(NoiseModel::new(args.noise_readout, args.noise_depol)?)
            } else {
                None
            };
            ExperimentConfig {
                method,
                n,
                shots,
                noise,
                seed: args.seed,
                repetitions: args.repetitions,
                state: state_spec(args.state, &args.state_file, 1e-3)?,
                prerotate: args.prerotate,
                candidates: args.candidates,
                tau: args.tau,
                selection: match args.selection {
                    SelectionArg::Auto => Selection::Auto,
                    SelectionArg::Benchmark => Selection::Benchmark,
                    SelectionArg::Blind => Selection::Blind,
                },
                reconstruction: match args.recon {
                    ReconArg::Tree => ReconMode::Tree,
                    ReconArg::Chain => ReconMode::Chain,
                },
                bootstrap: args.bootstrap,
            }
        }
    };
    let report = run_experiment(&config)?;
    if let Some(path) = &args.counts_out {
        let file =
            puretomo::experiment::simulate_counts_file(&config, puretomo::measure::BitOrder::Msb)?;
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    }
    emit(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let config: SweepConfig = serde_json::from_str(&std::fs::read_to_string(&args.config)?)?;
    let csv = run_sweep(&config)?;
    emit(&args.out, &csv)
}

fn family(arg: FamilyArg, n: usize) -> Result<(String, Vec<MeasurementBasis>)> {
    Ok(match arg {
        FamilyArg::TwoNPlusOne => ("2n+1".to_string(), two_n_plus_one_bases(n)?),
        FamilyArg::Five => ("five".to_string(), disentangled_five_bases(n)?.to_vec()),
        FamilyArg::Original => ("original".to_string(), original_five_bases(n)?.to_vec()),
        FamilyArg::Locc => {
            let mut out = Vec::new();
            for b_c in [false, true] {
                for b_s in [false, true] {
                    out.push(locc_schedule(n, b_c, b_s)?.projector_basis());
                }
            }
            ("locc".to_string(), out)
        }
    })
}

#[derive(serde::Serialize)]
struct BasesDump {
    n: usize,
    family: String,
    bases: Vec<BasisJson>,
}

fn cmd_bases(args: BasesArgs) -> Result<()> {
    let (family_name, bases) = family(args.family, args.n)?;
    let selected: Vec<BasisJson> = bases
        .iter()
        .filter(|b| args.basis.as_ref().map_or(true, |id| &b.id == id))
        .map(|b| b.to_json())
        .collect();
    if selected.is_empty() {
        return Err(Error::schema(
            "basis",
            format!("no basis named {:?} in family {family_name}", args.basis),
        ));
    }
    let dump = BasesDump {
        n: args.n,
        family: family_name,
        bases: selected,
    };
    emit(&args.out, &serde_json::to_string_pretty(&dump)?)
}

fn cmd_graph(args: GraphArgs) -> Result<()> {
    let dim = 1usize << args.n;
    let weights: Vec<f64> = if args.weights == "uniform" {
        vec![1.0 / dim as f64; dim]
    } else {
        serde_json::from_str(&std::fs::read_to_string(&args.weights)?)?
    };
    let graph = match args.family {
        GraphFamilyArg::Hypercube => EstimationGraph::hypercube(args.n, weights)?,
        GraphFamilyArg::Cycle => EstimationGraph::rotated_cycle(args.n, weights)?,
    };
    let (pruned, _) = graph.prune_and_check_connectivity(args.tau);
    let dump = graph_dump(&pruned, args.tree)?;
    emit(&args.out, &serde_json::to_string_pretty(&dump)?)
}

#[derive(serde::Serialize)]
struct HwoptDump {
    chain: puretomo::hwopt::QubitPath,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<puretomo::hwopt::QubitPath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
}

fn cmd_hwopt(args: HwoptArgs) -> Result<()> {
    let file: DeviceGraphFile = serde_json::from_str(&std::fs::read_to_string(&args.device)?)?;
    let device = DeviceGraph::from_file(&file)?;
    let chain = best_fixed_length_path(&device, args.length)?;
    let oracle = if args.oracle {
        Some(exhaustive_paths_oracle(&device, args.length)?)
    } else {
        None
    };
    let gap = oracle.as_ref().map(|o| chain.cost - o.cost);
    emit(
        &args.out,
        &serde_json::to_string_pretty(&HwoptDump { chain, oracle, gap })?,
    )
}

// the shared counts schema plus per-basis edge annotations; parsers of the
// plain schema can read this directly
#[derive(serde::Serialize)]
struct IngestDump {
    n: usize,
    bit_order: puretomo::measure::BitOrder,
    seed: u64,
    bases: Vec<IngestEntry>,
}

#[derive(serde::Serialize)]
struct IngestEntry {
    id: String,
    shots: u64,
    counts: BTreeMap<String, u64>,
    edges: Vec<[usize; 2]>,
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let file: PauliCountsFile = serde_json::from_str(&std::fs::read_to_string(&args.pauli)?)?;
    let ingested = ingest_pauli_counts(&file)?;
    let dump = IngestDump {
        n: file.n,
        bit_order: file.bit_order,
        seed: file.seed,
        bases: ingested
            .iter()
            .map(|s| IngestEntry {
                id: s.basis.id.clone(),
                shots: s.counts.shots,
                counts: s
                    .counts
                    .counts
                    .iter()
                    .map(|(&l, &c)| (render_label(l, file.n, file.bit_order), c))
                    .collect(),
                edges: s.basis.edges().iter().map(|&(a, b)| [a, b]).collect(),
            })
            .collect(),
    };
    emit(&args.out, &serde_json::to_string_pretty(&dump)?)
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let mut all_pass = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        all_pass &= pass;
        println!("{}: {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };

    // closed-form spanning-tree count vs matrix-tree determinant
    for n in 1..=4 {
        let closed = puretomo::graph::spanning_tree_count(n);
        let det = puretomo::oracle::hypercube_spanning_trees_matrix_tree(n);
        check(
            &format!("spanning-tree count n={n}"),
            num_bigint::BigInt::from(closed.clone()) == det,
            format!("closed form {closed}, determinant {det}"),
        );
    }

    // rotation keeps consecutive labels adjacent (bit-level, n = 2..=16)
    let mut ok = true;
    for n in 2..=16usize {
        let mask = (1usize << n) - 1;
        for j in 0..=mask {
            let a = puretomo::bits::rotate_label(j);
            let b = puretomo::bits::rotate_label((j + 1) & mask);
            if (a ^ b).count_ones() != 1 {
                ok = false;
            }
        }
    }
    check(
        "rotated successors at Hamming distance one",
        ok,
        "n = 2..=16, exhaustive".to_string(),
    );

    // every generated basis vector is separable (Schmidt check)
    let mut ok = true;
    let mut vectors = 0usize;
    for n in 2..=6 {
        for basis in disentangled_five_bases(n)?.iter() {
            for v in &basis.vectors {
                vectors += 1;
                ok &= puretomo::bases::is_product_vector(n, v)?.is_product;
            }
        }
        for basis in two_n_plus_one_bases(n)? {
            for v in &basis.vectors {
                vectors += 1;
                ok &= puretomo::bases::is_product_vector(n, &v)?.is_product;
            }
        }
    }
    check(
        "separability of generated bases",
        ok,
        format!("{vectors} vectors, n = 2..=6"),
    );

    // heuristic chain selection never beats the exhaustive oracle
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
    let mut never_lower = true;
    let mut matched = 0u64;
    let mut found = 0u64;
    for _ in 0..args.trials {
        let n = rng.gen_range(4..=12usize);
        let nodes: Vec<puretomo::hwopt::DeviceNodeFile> = (0..n)
            .map(|i| puretomo::hwopt::DeviceNodeFile {
                id: i as u32,
                weight: rng.gen::<f64>() * 0.2,
            })
            .collect();
        let mut order: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut edges: Vec<puretomo::hwopt::DeviceEdgeFile> = order
            .windows(2)
            .map(|p| puretomo::hwopt::DeviceEdgeFile {
                a: p[0],
                b: p[1],
                weight: rng.gen::<f64>() * 0.3,
            })
            .collect();
        for _ in 0..n {
            let a = rng.gen_range(0..n as u32);
            let b = rng.gen_range(0..n as u32);
            if a != b
                && !edges
                    .iter()
                    .any(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            {
                edges.push(puretomo::hwopt::DeviceEdgeFile {
                    a,
                    b,
                    weight: rng.gen::<f64>() * 0.3,
                });
            }
        }
        let device = DeviceGraph::from_file(&DeviceGraphFile {
            directed: false,
            nodes,
            edges,
        })?;
        let d = rng.gen_range(2..=n.min(6));
        let oracle = exhaustive_paths_oracle(&device, d)?;
        match best_fixed_length_path(&device, d) {
            Ok(h) => {
                found += 1;
                if h.cost < oracle.cost - 1e-12 {
                    never_lower = false;
                }
                if (h.cost - oracle.cost).abs() <= 1e-12 {
                    matched += 1;
                }
            }
            Err(Error::NoChain(_)) => {}
            Err(e) => return Err(e),
        }
    }
    check(
        "fixed-length chain heuristic vs exhaustive oracle",
        never_lower,
        format!(
            "{} trials: heuristic found {found}, matched the optimum {matched} times",
            args.trials
        ),
    );

    if all_pass {
        Ok(())
    } else {
        Err(Error::schema("oracle", "one or more oracle checks failed"))
    }
}

fn cmd_dump_state(args: DumpStateArgs) -> Result<()> {
    let spec = state_spec(args.state, &args.state_file, args.min_weight)?;
    let state = puretomo::experiment::prepare_state(&spec, args.n, args.seed)?;
    emit(&args.out, &serde_json::to_string_pretty(&state.to_json())?)
}
