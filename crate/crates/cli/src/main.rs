mod config;
mod kernel;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use rnsla::matrix::{
    choose_hybrid_k, compress_values, csr_to_ell, csr_to_slcoo, gen_ffs_like, load_matrix, matrix_stats,
    plant_dependent_row, reorder_row_categories, split_hybrid, write_matrix, CooMatrix, FileEncoding, GeneratorParams,
    SparseMatrix,
};
use rnsla::rns::{Flavor, RnsBasis};
use rnsla::spmv::{benchmark, Format, Partitioning, SpmvOptions, SpmvPlan};
use rnsla::wiedemann::{
    check_kernel, matrix_digest, resume, solve, Checkpoint, CheckpointConfig, SolveOptions, MAX_ATTEMPTS,
};
use rnsla::{BigUint, Error};
use serde_json::json;

use config::RunConfig;
use kernel::{parse_hex, KernelFile};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_VERIFY: u8 = 4;
const EXIT_SOLVER: u8 = 5;
const EXIT_INTERRUPTED: u8 = 6;

/// 217-bit prime used when `--ell` is not given.
const DEFAULT_ELL: &str = "1400000000000000000000000000000000000000000000000000017";

#[derive(Parser)]
#[command(
    name = "rnsla",
    version,
    about = "Exact sparse linear algebra modulo a large prime, in RNS"
)]
struct Cli {
    /// Worker threads for products.
    #[arg(long, global = true, env = "RNSLA_WORKERS", default_value_t = 1)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an FFS-like matrix.
    Gen(GenArgs),
    /// Convert between binary and text encodings.
    Convert(ConvertArgs),
    /// Matrix statistics.
    Stats(StatsArgs),
    /// Throughput of repeated products.
    Bench(BenchArgs),
    /// Find a kernel vector.
    Solve(SolveArgs),
    /// Check a kernel vector.
    Verify(VerifyArgs),
    /// Oracle equivalence on generated instances.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    row_weight: usize,
    /// Fraction of +-1 coefficients.
    #[arg(long, default_value_t = 0.927)]
    pm1: f64,
    #[arg(long, default_value_t = 16)]
    max_coeff: u32,
    #[arg(long)]
    dense_cols: Option<usize>,
    #[arg(long, default_value_t = 0.75)]
    decay: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace one row by the sum of two others.
    #[arg(long)]
    singular: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Binary,
    Text,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Output encoding; by default from the extension (.mtx/.txt are text).
    #[arg(long, value_enum)]
    encoding: Option<Encoding>,
    /// Pass the matrix through an in-memory format (csr, compressed, coo,
    /// slcoo:S, ell, hybrid[:K]) and check nothing is lost.
    #[arg(long)]
    via: Option<String>,
}

#[derive(Args)]
struct StatsArgs {
    matrix: PathBuf,
    /// Also report column counts summed over windows of this width.
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args, Clone)]
struct BasisArgs {
    /// Prime modulus in hex.
    #[arg(long, default_value = DEFAULT_ELL)]
    ell: String,
    #[arg(long, value_enum, default_value_t = FlavorArg::Integer)]
    flavor: FlavorArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Integer,
    Float,
}

#[derive(Args, Clone)]
struct PlanArgs {
    #[arg(long, default_value = "csr")]
    format: String,
    #[arg(long)]
    reorder: bool,
    #[arg(long)]
    compress: bool,
    #[arg(long)]
    balance: bool,
    #[arg(long, default_value = "scalar")]
    partitioning: String,
}

#[derive(Args)]
struct BenchArgs {
    matrix: PathBuf,
    #[command(flatten)]
    basis: BasisArgs,
    #[command(flatten)]
    plan: PlanArgs,
    #[arg(long, default_value_t = 20)]
    iterations: usize,
    /// Every format and flag combination instead of the one given.
    #[arg(long)]
    sweep: bool,
}

#[derive(Args)]
struct SolveArgs {
    matrix: PathBuf,
    #[command(flatten)]
    basis: BasisArgs,
    #[command(flatten)]
    plan: PlanArgs,
    /// Defaults to 0, or to the checkpoint's seed with --resume.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = MAX_ATTEMPTS)]
    max_attempts: usize,
    /// Kernel vector output.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Krylov iterations between checkpoints.
    #[arg(long, default_value_t = 100, requires = "checkpoint")]
    interval: usize,
    /// Stop after writing the checkpoint at this iteration.
    #[arg(long, requires = "checkpoint")]
    halt_after: Option<usize>,
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    matrix: PathBuf,
    kernel: PathBuf,
    /// Expected modulus in hex; defaults to the one in the kernel header.
    #[arg(long)]
    ell: Option<String>,
}

#[derive(Args)]
struct SelftestArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, default_value_t = 3)]
    count: usize,
    #[arg(long, default_value_t = 80)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_)
            | Error::Json(_)
            | Error::MalformedHeader(_)
            | Error::MalformedRecord { .. }
            | Error::IndexOutOfRange { .. }
            | Error::CoefficientOutOfRange { .. }
            | Error::ZeroCoefficient(_)
            | Error::Unsorted(_)
            | Error::Duplicate { .. }
            | Error::MalformedBasis(_)
            | Error::Checkpoint(_) => EXIT_IO,
            Error::InvalidParameter(_) | Error::UnsupportedWidth(_) | Error::ZeroModulus => EXIT_USAGE,
            Error::Interrupted { .. } => EXIT_INTERRUPTED,
            _ => EXIT_SOLVER,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers.max(1);
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a, workers),
        Command::Convert(a) => cmd_convert(a, workers),
        Command::Stats(a) => cmd_stats(a, workers),
        Command::Bench(a) => cmd_bench(a, workers),
        Command::Solve(a) => cmd_solve(a, workers),
        Command::Verify(a) => cmd_verify(a, workers),
        Command::Selftest(a) => cmd_selftest(a, workers),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rnsla: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(value: serde_json::Value) {
    println!("{value}");
}

fn load(path: &Path) -> Result<CooMatrix, Failure> {
    load_matrix(path).map_err(|e| {
        let f = Failure::from(e);
        Failure::new(f.code, format!("{}: {}", path.display(), f.message))
    })
}

fn parse_ell(s: &str) -> Result<BigUint, Failure> {
    match parse_hex(s) {
        Some(l) if l > BigUint::from(1u32) => Ok(l),
        _ => Err(Failure::new(EXIT_USAGE, format!("bad modulus `{s}`"))),
    }
}

fn flavor(f: FlavorArg) -> Flavor {
    match f {
        FlavorArg::Integer => Flavor::Integer,
        FlavorArg::Float => Flavor::Float,
    }
}

fn build_basis(args: &BasisArgs, m: &CooMatrix) -> Result<RnsBasis, Failure> {
    let ell = parse_ell(&args.ell)?;
    let r = m.to_csr().max_row_norm().max(1);
    Ok(RnsBasis::build(&ell, r, flavor(args.flavor))?)
}

fn spmv_options(args: &PlanArgs, workers: usize) -> Result<SpmvOptions, Failure> {
    Ok(SpmvOptions {
        format: args.format.parse()?,
        workers,
        partitioning: args.partitioning.parse()?,
        balance: args.balance,
        use_compression: args.compress,
        use_reordering: args.reorder,
        check_bounds: false,
    })
}

fn base_config(sub: &str, workers: usize) -> RunConfig {
    RunConfig {
        subcommand: sub.into(),
        workers,
        ..RunConfig::default()
    }
}

fn with_basis(mut c: RunConfig, b: &BasisArgs, basis: &RnsBasis) -> RunConfig {
    c.ell = Some(format!("{:x}", parse_hex(&b.ell).unwrap_or_default()));
    c.k = Some(basis.k());
    c.flavor = Some(basis.flavor().to_string());
    c
}

fn with_plan(mut c: RunConfig, o: &SpmvOptions) -> RunConfig {
    c.format = Some(o.format.to_string());
    c.reorder = o.use_reordering;
    c.compress = o.use_compression;
    c.balance = o.balance;
    c.partitioning = Some(o.partitioning.to_string());
    c.workers = o.workers;
    c
}

fn cmd_gen(a: GenArgs, workers: usize) -> CliResult {
    let mut params = GeneratorParams::ffs_like(a.n, a.row_weight, a.seed);
    params.pct_pm1 = a.pm1;
    params.max_coeff = a.max_coeff;
    params.decay = a.decay;
    if let Some(d) = a.dense_cols {
        params.dense_cols = d;
    }
    let mut m = gen_ffs_like(&params)?;
    if a.singular {
        m = plant_dependent_row(&m, a.seed)?;
    }
    rnsla::matrix::store_matrix(&m, &a.output)?;
    let mut config = base_config("gen", workers);
    config.seed = Some(a.seed);
    config.outputs = vec![a.output.clone()];
    emit(json!({
        "config": config,
        "params": {
            "n": params.n,
            "mean_row_weight": params.mean_row_weight,
            "pct_pm1": params.pct_pm1,
            "max_coeff": params.max_coeff,
            "dense_cols": params.dense_cols,
            "decay": params.decay,
            "singular": a.singular,
        },
        "nnz": m.nnz(),
        "digest": matrix_digest(&m),
    }));
    Ok(())
}

/// Round trip through an in-memory format; returns a short description of it.
fn pass_through(m: &CooMatrix, via: &str) -> Result<String, Failure> {
    let csr = m.to_csr();
    let (back, desc) = if via == "compressed" {
        let c = compress_values(&reorder_row_categories(&csr))?;
        let d = format!("compressed data length {} for nnz {}", c.data().len(), c.nnz());
        (c.triplets(), d)
    } else {
        match via.parse::<Format>()? {
            Format::Csr => (csr.triplets(), "csr".to_string()),
            Format::Coo => (csr.to_coo().triplets(), "coo".to_string()),
            Format::Slcoo(s) => {
                let x = csr_to_slcoo(&csr, s)?;
                (x.triplets(), format!("slcoo slice {s}, {} slices", x.n_slices()))
            }
            Format::Ell => {
                let x = csr_to_ell(&csr, csr.max_row_len())?;
                (x.triplets(), format!("ell width {}", x.width()))
            }
            Format::Hybrid(k) => {
                let k = k.unwrap_or_else(|| choose_hybrid_k(&csr));
                let x = split_hybrid(&csr, k)?;
                (
                    x.triplets(),
                    format!("hybrid width {k}, tail nnz {}", x.coo_tail().nnz()),
                )
            }
        }
    };
    if back != m.triplets() {
        return Err(Failure::new(
            EXIT_VERIFY,
            format!("conversion through {via} lost entries"),
        ));
    }
    Ok(desc)
}

fn cmd_convert(a: ConvertArgs, workers: usize) -> CliResult {
    let m = load(&a.input)?;
    let via = a.via.as_deref().map(|v| pass_through(&m, v)).transpose()?;
    let enc = match a.encoding {
        Some(Encoding::Binary) => FileEncoding::Binary,
        Some(Encoding::Text) => FileEncoding::Text,
        None => FileEncoding::from_path(&a.output),
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(&a.output)?);
    write_matrix(&m, &mut out, enc)?;
    std::io::Write::flush(&mut out)?;
    let mut config = base_config("convert", workers);
    config.matrices = vec![a.input];
    config.format = a.via;
    config.outputs = vec![a.output];
    emit(json!({
        "config": config,
        "encoding": match enc { FileEncoding::Binary => "binary", FileEncoding::Text => "text" },
        "via": via,
        "nnz": m.nnz(),
    }));
    Ok(())
}

fn cmd_stats(a: StatsArgs, workers: usize) -> CliResult {
    let m = load(&a.matrix)?;
    let s = matrix_stats(&m);
    let mut config = base_config("stats", workers);
    config.matrices = vec![a.matrix];
    let mut out = json!({ "config": config, "stats": s, "digest": matrix_digest(&m) });
    if let Some(w) = a.window {
        out["column_profile"] = json!(s.column_profile(w));
    }
    emit(out);
    Ok(())
}

fn sweep_options(workers: usize, partitioning: Partitioning) -> Vec<SpmvOptions> {
    let mut out = Vec::new();
    for format in Format::ALL {
        for flags in 0..8u32 {
            let use_compression = flags & 1 != 0;
            if use_compression && format != Format::Csr {
                continue;
            }
            out.push(SpmvOptions {
                format,
                workers,
                partitioning,
                balance: flags & 4 != 0,
                use_compression,
                use_reordering: flags & 2 != 0,
                check_bounds: false,
            });
        }
    }
    out
}

fn cmd_bench(a: BenchArgs, workers: usize) -> CliResult {
    let m = load(&a.matrix)?;
    let basis = build_basis(&a.basis, &m)?;
    let base = spmv_options(&a.plan, workers)?;
    let runs = if a.sweep {
        sweep_options(workers, base.partitioning)
    } else {
        vec![base]
    };
    for opts in runs {
        let plan = SpmvPlan::new(&m, &basis, opts)?;
        let report = benchmark(&plan, a.iterations)?;
        let mut config = with_plan(with_basis(base_config("bench", workers), &a.basis, &basis), &opts);
        config.matrices = vec![a.matrix.clone()];
        config.iterations = Some(a.iterations);
        emit(json!({ "config": config, "basis": basis.describe(), "report": report }));
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs, workers: usize) -> CliResult {
    let m = load(&a.matrix)?;
    if m.n_rows() != m.n_cols() {
        return Err(Failure::new(
            EXIT_USAGE,
            format!("matrix is {}x{}, not square", m.n_rows(), m.n_cols()),
        ));
    }
    let basis = build_basis(&a.basis, &m)?;
    let opts = spmv_options(&a.plan, workers)?;
    let plan = SpmvPlan::new(&m, &basis, opts)?;
    let from = a.resume.as_deref().map(Checkpoint::load).transpose()?;
    let seed = a.seed.or(from.as_ref().map(|c| c.seed)).unwrap_or(0);
    let mut solve_opts = SolveOptions::new(seed);
    solve_opts.max_attempts = a.max_attempts;
    solve_opts.checkpoint = a.checkpoint.as_ref().map(|path| CheckpointConfig {
        path: path.clone(),
        interval: a.interval,
        halt_after: a.halt_after,
    });
    let (w, report) = match &from {
        Some(c) => resume(&plan, &solve_opts, c)?,
        None => solve(&plan, &solve_opts)?,
    };
    let file = KernelFile {
        ell: basis.ell().clone(),
        coords: w,
    };
    std::fs::write(&a.output, file.render())?;
    let mut config = with_plan(with_basis(base_config("solve", workers), &a.basis, &basis), &opts);
    config.matrices = vec![a.matrix];
    config.seed = Some(seed);
    config.checkpoint = a.checkpoint;
    config.checkpoint_interval = solve_opts.checkpoint.as_ref().map(|c| c.interval);
    config.resume = a.resume;
    config.outputs = vec![a.output];
    emit(json!({ "config": config, "basis": basis.describe(), "report": report }));
    Ok(())
}

fn cmd_verify(a: VerifyArgs, workers: usize) -> CliResult {
    let m = load(&a.matrix)?;
    let k = KernelFile::load(&a.kernel)?.map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", a.kernel.display())))?;
    if let Some(ell) = &a.ell {
        if parse_ell(ell)? != k.ell {
            return Err(Failure::new(EXIT_VERIFY, "modulus differs from the kernel file header"));
        }
    }
    if k.coords.len() != m.n_cols() {
        return Err(Failure::new(
            EXIT_VERIFY,
            format!(
                "dimension mismatch: vector has {}, matrix has {} columns",
                k.coords.len(),
                m.n_cols()
            ),
        ));
    }
    if k.coords.iter().all(|c| (c % &k.ell).is_zero()) {
        return Err(Failure::new(EXIT_VERIFY, "zero vector"));
    }
    if !check_kernel(&m, &k.coords, &k.ell) {
        return Err(Failure::new(EXIT_VERIFY, "not a kernel vector: A w != 0"));
    }
    let mut config = base_config("verify", workers);
    config.matrices = vec![a.matrix];
    config.ell = Some(format!("{:x}", k.ell));
    emit(json!({ "config": config, "kernel": a.kernel, "verified": true }));
    Ok(())
}

fn cmd_selftest(a: SelftestArgs, workers: usize) -> CliResult {
    let ell = parse_ell(&a.basis.ell)?;
    let outcomes = selftest::run(&ell, flavor(a.basis.flavor), a.count, a.n, a.seed);
    let mut failed = 0;
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += usize::from(!o.passed);
    }
    let mut config = base_config("selftest", workers);
    config.seed = Some(a.seed);
    emit(json!({ "config": config, "checks": outcomes.len(), "failed": failed }));
    if failed > 0 {
        return Err(Failure::new(EXIT_VERIFY, format!("{failed} selftest check(s) failed")));
    }
    Ok(())
}
