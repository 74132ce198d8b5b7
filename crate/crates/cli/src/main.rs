use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use fracgrad_core::report::Status;
use fracgrad_core::verify::{self, EXPERIMENTS};

mod config;
mod output;

#[derive(Parser, Debug)]
#[command(name = "fracgrad", version, about = "Fractional-gradient experiments on sampled fields")]
struct Cli {
    /// TOML config; missing sections and keys take their defaults.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set lemma1.alphas=0.3,0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory; one subdirectory per experiment.
    #[arg(long, short, env = "FRACGRAD_OUT", default_value = "fracgrad-out", global = true)]
    out: PathBuf,

    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0, global = true)]
    threads: usize,

    /// Print only failures and errors.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,

    /// Also print the files written.
    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Riesz potential: oracle, closed form, semigroup, three paths.
    Potential,
    /// Lorentz norm exactness and the Lebesgue/Lorentz chain.
    Lorentz,
    /// Ball covers, slab and projection lower bounds, slab potential.
    Content,
    /// Pointwise maximal-function bound on the configured sets.
    Lemma1,
    /// Uniform and additive parts of the pointwise bound.
    Splitting,
    /// Lorentz ratio against perimeter and volume, under dilation.
    Lemma2,
    /// Sobolev-Lorentz ratio of a bump.
    Sobolev,
    /// Classical inequalities against their sharp constants.
    Classical,
    /// Logarithmic blow-up of the cube potential below a face.
    Counterexample {
        /// Dimension (overrides counterexample.d).
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated offsets (overrides counterexample.s).
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
    },
    /// Weak-type lower bounds on thin planes.
    Weaktype,
    /// Trace ratio under mollification.
    Tracefail,
    /// Every experiment in turn.
    All,
    /// Print the effective config as TOML.
    Config,
}

impl Command {
    fn names(&self) -> Vec<&'static str> {
        match self {
            Command::Potential => vec!["potential"],
            Command::Lorentz => vec!["lorentz"],
            Command::Content => vec!["content"],
            Command::Lemma1 => vec!["lemma1"],
            Command::Splitting => vec!["splitting"],
            Command::Lemma2 => vec!["lemma2"],
            Command::Sobolev => vec!["sobolev"],
            Command::Classical => vec!["classical"],
            Command::Counterexample { .. } => vec!["counterexample"],
            Command::Weaktype => vec!["weaktype"],
            Command::Tracefail => vec!["tracefail"],
            Command::All => EXPERIMENTS.to_vec(),
            Command::Config => vec![],
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let mut overrides = cli.overrides.clone();
    if let Command::Counterexample { d, s } = &cli.command {
        if let Some(d) = d {
            overrides.push(format!("counterexample.d={d}"));
        }
        if let Some(s) = s {
            let list: Vec<String> = s.iter().map(|v| format!("{v:e}")).collect();
            overrides.push(format!("counterexample.s=[{}]", list.join(",")));
        }
    }
    let cfg = config::load(cli.config.as_deref(), &overrides)?;
    if let Command::Config = cli.command {
        print!("{}", toml::to_string(&cfg)?);
        return Ok(true);
    }
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    let mut ok = true;
    for name in cli.command.names() {
        let mut outcome = verify::run(name, &cfg)?;
        let path = output::write_outcome(&cli.out.join(name), &mut outcome)?;
        let report = &outcome.report;
        ok &= report.overall() != Status::Fail;
        if cli.quiet {
            for line in report.summary().lines().filter(|l| l.starts_with("[FAIL]")) {
                println!("{line}");
            }
        } else {
            print!("{}", report.summary());
        }
        if cli.verbose {
            println!("wrote {} ({} files)", path.display(), report.files.len());
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
