use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nttmul::bench::{self, BenchConfig, Kernel};
use nttmul::counter::OpCounter;
use nttmul::io::{self, PolyFile};
use nttmul::modarith::Variant;
use nttmul::params::{build_plan, NttPlan, PrimeSource};
use nttmul::polymul::{multiply, Method};
use nttmul::rns::{polymul_rns, RnsBasis};
use nttmul::verify::{self, Fault, Grid, VerifyConfig};
use nttmul::Error;

#[derive(Parser)]
#[command(
    name = "nttmul",
    version,
    about = "Negacyclic NTT polynomial multiplication toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an NTT-friendly prime and root and write a plan file.
    Params(ParamsArgs),
    /// Multiply two polynomial files.
    Convolve(ConvolveArgs),
    /// Run the oracle-equivalence and counter suites.
    Verify(VerifyArgs),
    /// Time one kernel and emit a CSV row.
    Bench(BenchArgs),
    /// Print operation counts per multiplication method.
    CountOps(CountOpsArgs),
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    bits: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of distinct primes (more than one writes an RNS basis).
    #[arg(long, default_value_t = 1)]
    primes: usize,
    #[arg(long, default_value_t = Variant::Proposed)]
    variant: Variant,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvolveArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// naive, ntt, ntt-radix4, ntt-2d, fused or rns.
    #[arg(long, default_value = "fused")]
    method: String,
    #[arg(long)]
    out: PathBuf,
    /// Write the binary polynomial format.
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// `default` or a grid file.
    #[arg(long, default_value = "default")]
    grid: String,
    /// Random vectors per grid cell; reduction suites use 10^4 times as many.
    #[arg(long, default_value_t = 10)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corrupt one twiddle of every plan before the suites run.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated kernel names.
    #[arg(long, value_delimiter = ',', required = true)]
    kernel: Vec<Kernel>,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 30)]
    bits: u32,
    #[arg(long, default_value_t = Variant::Proposed)]
    variant: Variant,
    #[arg(long, default_value_t = 1000)]
    reps: u64,
    #[arg(long, default_value_t = 10)]
    warmup: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CountOpsArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Restrict the table to one method.
    #[arg(long)]
    method: Option<Method>,
}

enum Failure {
    Input(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Params(a) => cmd_params(a),
        Command::Convolve(a) => cmd_convolve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::CountOps(a) => cmd_count_ops(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_params(a: ParamsArgs) -> Result<(), Failure> {
    let plans = if a.primes == 1 {
        let source = PrimeSource::Generate {
            bits: a.bits,
            seed: a.seed,
        };
        vec![build_plan(a.n, source, a.variant)?]
    } else {
        RnsBasis::generate(a.n, a.bits, a.primes, a.variant, a.seed)?
            .plans()
            .to_vec()
    };
    io::write_file(&a.out, io::plans_to_text(&plans).as_bytes())?;
    for p in &plans {
        println!("q = {}  psi = {}", p.q(), p.psi());
    }
    Ok(())
}

fn single_plan(plans: Vec<NttPlan>, method: &str) -> Result<NttPlan, Error> {
    if plans.len() != 1 {
        return Err(Error::Shape(format!(
            "method `{method}` needs a single-prime plan, found {} primes",
            plans.len()
        )));
    }
    Ok(plans.into_iter().next().unwrap())
}

fn check_header(p: &PolyFile, n: usize, q: &num_bigint::BigUint, what: &str) -> Result<(), Error> {
    if p.len() != n {
        return Err(Error::Shape(format!(
            "{what} has {} coefficients, plan has n = {n}",
            p.len()
        )));
    }
    if &p.modulus != q {
        return Err(Error::Shape(format!(
            "{what} is modulo {}, plan is modulo {q}",
            p.modulus
        )));
    }
    Ok(())
}

fn cmd_convolve(a: ConvolveArgs) -> Result<(), Failure> {
    let plans = io::read_plans(&a.plan)?;
    let pa = io::read_poly(&a.a)?;
    let pb = io::read_poly(&a.b)?;
    let product = if a.method == "rns" {
        let basis = RnsBasis::from_plans(plans)?;
        check_header(&pa, basis.n(), basis.big_q(), "a")?;
        check_header(&pb, basis.n(), basis.big_q(), "b")?;
        let c = polymul_rns(&pa.coeffs, &pb.coeffs, &basis, &mut nttmul::NoCount)?;
        PolyFile {
            modulus: basis.big_q().clone(),
            coeffs: c,
        }
    } else {
        let method: Method = a.method.parse().map_err(|msg: String| {
            Error::Shape(format!(
                "{msg}; expected naive, ntt, ntt-radix4, ntt-2d, fused or rns"
            ))
        })?;
        let plan = single_plan(plans, &a.method)?;
        let q = num_bigint::BigUint::from(plan.q());
        check_header(&pa, plan.n(), &q, "a")?;
        check_header(&pb, plan.n(), &q, "b")?;
        let (_, x) = pa.to_words()?;
        let (_, y) = pb.to_words()?;
        let c = multiply(&x, &y, &plan, method, &mut nttmul::NoCount)?;
        PolyFile::from_words(plan.q(), &c)
    };
    let bytes = if a.binary {
        product.to_binary()?
    } else {
        product.to_text().into_bytes()
    };
    io::write_file(&a.out, &bytes)?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let grid = if a.grid == "default" {
        Grid::default()
    } else {
        let bytes = io::read_file(a.grid.as_ref())?;
        String::from_utf8_lossy(&bytes).parse()?
    };
    let mut cfg = VerifyConfig::new(grid, a.samples, a.seed);
    if a.inject_fault {
        cfg.fault = Some(Fault::CorruptTwiddle);
    }
    let reports = verify::run(&cfg);
    for r in &reports {
        println!("{r}");
    }
    match reports.iter().find(|r| !r.passed()) {
        Some(r) => Err(Failure::Verification(r.to_string())),
        None => Ok(()),
    }
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let mut records = Vec::with_capacity(a.kernel.len());
    for &kernel in &a.kernel {
        let cfg = BenchConfig {
            kernel,
            n: a.n,
            bits: a.bits,
            variant: a.variant,
            reps: a.reps,
            warmup: a.warmup,
            workers: a.workers,
            seed: a.seed,
        };
        records.push(bench::run(&cfg)?);
    }
    match &a.csv {
        Some(path) => bench::append_csv(path, &records)?,
        None => {
            println!("{}", bench::CSV_HEADER);
            for r in &records {
                println!("{}", r.csv_row());
            }
        }
    }
    Ok(())
}

fn cmd_count_ops(a: CountOpsArgs) -> Result<(), Failure> {
    let plans = io::read_plans(&a.plan)?;
    let plan = single_plan(plans, "count-ops")?;
    let zero = vec![0u64; plan.n()];
    let methods: Vec<Method> = match a.method {
        Some(m) => vec![m],
        None => Method::ALL.to_vec(),
    };
    println!(
        "{:<12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "method", "modmul", "addsub", "half", "negations", "twiddles"
    );
    for m in methods {
        let mut c = OpCounter::default();
        multiply(&zero, &zero, &plan, m, &mut c)?;
        println!(
            "{:<12} {:>12} {:>12} {:>12} {:>12} {:>12}",
            m.name(),
            c.modmul,
            c.addsub,
            c.half,
            c.negations,
            c.twiddle_loads
        );
    }

    if plan.n() < 4 {
        return Ok(());
    }
    let mut unfused = OpCounter::default();
    multiply(
        &zero,
        &zero,
        &plan,
        Method::Ntt(nttmul::Backend::Radix2),
        &mut unfused,
    )?;
    let mut fused = OpCounter::default();
    multiply(&zero, &zero, &plan, Method::Fused, &mut fused)?;
    let d = fused - unfused;
    println!();
    println!(
        "fused - ntt: modmul {:+} half {:+} addsub {:+} negations {:+}",
        d.modmul, d.half, d.addsub, d.negations
    );
    let n = plan.n() as i64;
    if (d.modmul, d.half, d.addsub, d.negations) != (-n / 2, -n, -n / 2, n / 4) {
        return Err(Failure::Verification(format!(
            "fusion deltas differ from (-{}, -{}, -{}, +{})",
            n / 2,
            n,
            n / 2,
            n / 4
        )));
    }
    Ok(())
}
