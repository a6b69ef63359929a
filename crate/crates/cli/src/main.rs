use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vvmult::harness::{self, ExperimentConfig, Suite};

#[derive(Parser)]
#[command(
    name = "vvmult",
    version,
    about = "Seeded numerical experiments for vector-valued Fourier multipliers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition of unity of the Littlewood-Paley family on the grid.
    PartitionCheck(Common),
    /// Analysis/synthesis roundtrip of the phi-transform on random fields.
    Roundtrip(Common),
    /// Continuous against discrete Triebel-Lizorkin norms of random fields.
    Norms(Common),
    /// Fefferman-Stein and Peetre maximal inequalities.
    Maximal(Common),
    /// Decomposition of random sequences into infinity-atoms.
    Atoms(Common),
    /// Single-scale multiplier estimate.
    #[command(name = "lemma61")]
    SingleScale(Common),
    /// Vector-valued multiplier estimate in L^p(l^q).
    #[command(name = "theorem11")]
    VectorValued(Common),
    /// Multiplier estimate in the F_inf norms, swept over mu.
    #[command(name = "theorem12")]
    FInfinity(Common),
    /// Single multiplier on homogeneous Triebel-Lizorkin norms.
    #[command(name = "corollary13")]
    Homogeneous(Common),
    /// Radial integrals and decay check of the sharpness example.
    Counterexample(Common),
    /// Compact-support embedding between Sobolev exponents.
    Embedding(Common),
    /// Report violated hypotheses for a suite without running it.
    Validate {
        /// Suite name, e.g. theorem11.
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kmin: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    kmax: Option<i32>,
    /// Accepts `inf`.
    #[arg(long)]
    p: Option<f64>,
    /// Accepts `inf`.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Log exponent of the sharpness example.
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated mu values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu: Option<Vec<i32>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "VVMULT_OUT_DIR", default_value = "vvmult-out")]
    out: PathBuf,
}

impl Common {
    fn config(&self, suite: Suite) -> Result<ExperimentConfig, u8> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    eprintln!("cannot read {}: {e}", path.display());
                    3
                })?;
                let cfg = ExperimentConfig::from_json(&text).map_err(|e| {
                    eprintln!("invalid config {}: {e}", path.display());
                    1
                })?;
                ExperimentConfig { suite, ..cfg }
            }
            None => ExperimentConfig::preset(suite),
        };
        let c = &mut cfg.params;
        macro_rules! set {
            ($field:ident, $value:expr) => {
                if let Some(v) = $value.clone() {
                    c.$field = v;
                }
            };
        }
        set!(dim, self.dim);
        set!(n, self.n);
        set!(half_width, self.half_width);
        set!(k_min, self.kmin);
        set!(k_max, self.kmax);
        set!(p, self.p);
        set!(q, self.q);
        set!(s, self.s);
        set!(r, self.r);
        set!(mu, self.mu);
        set!(trials, self.trials);
        set!(seed, self.seed);
        if self.gamma.is_some() {
            c.gamma = self.gamma;
        }
        Ok(cfg)
    }
}

fn run_suite(suite: Suite, common: &Common) -> u8 {
    let cfg = match common.config(suite) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let report = match harness::run(&cfg) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("{}: {e}", suite.name());
            return harness::exit_code(&e);
        }
    };
    match harness::write_report(&report, &common.out) {
        Ok(paths) => {
            print!("{}", harness::summary_text(&report));
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("{}: {e}", suite.name());
            return harness::exit_code(&e);
        }
    }
    if report.passed() {
        0
    } else {
        2
    }
}

fn validate(name: &str, common: &Common) -> u8 {
    let Some(suite) = Suite::from_name(name) else {
        eprintln!("unknown suite {name}");
        return 1;
    };
    let cfg = match common.config(suite) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let violations = harness::validate(&cfg);
    if violations.is_empty() {
        println!("{name}: no violations");
        return 0;
    }
    for v in &violations {
        println!("violated: {v}");
    }
    1
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::PartitionCheck(c) => run_suite(Suite::PartitionCheck, c),
        Command::Roundtrip(c) => run_suite(Suite::Roundtrip, c),
        Command::Norms(c) => run_suite(Suite::Norms, c),
        Command::Maximal(c) => run_suite(Suite::Maximal, c),
        Command::Atoms(c) => run_suite(Suite::Atoms, c),
        Command::SingleScale(c) => run_suite(Suite::SingleScale, c),
        Command::VectorValued(c) => run_suite(Suite::VectorValued, c),
        Command::FInfinity(c) => run_suite(Suite::FInfinity, c),
        Command::Homogeneous(c) => run_suite(Suite::Homogeneous, c),
        Command::Counterexample(c) => run_suite(Suite::Counterexample, c),
        Command::Embedding(c) => run_suite(Suite::Embedding, c),
        Command::Validate { suite, common } => validate(suite, common),
    };
    ExitCode::from(code)
}
