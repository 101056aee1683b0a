//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed certification, 2 usage or runtime error.
//! JSON results carry `seed` and `timestamp` fields (the latter dropped by
//! `--no-timestamp`); the resolved seed is also printed to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{coverage_experiment, run_bound};
use crate::complexity::{rademacher, HypothesisClass, SignDraws};
use crate::config::ExperimentConfig;
use crate::data::Pool;
use crate::error::{Error, Result};
use crate::hypotheses::{certify, train, Domain, Hypothesis};
use crate::ipm::{empirical_ipm, Generator, IpmSpec};
use crate::query::{al_loop, write_curve_csv};
use crate::rng::derive_seed;
use crate::task::{make_builtin_task, BUILTIN_TASKS};

#[derive(Debug, Parser)]
#[command(name = "alrisk", version, about = "IPM-based risk bounds for active learning")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Root seed; overrides the seed in a config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Omit the timestamp field from JSON output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    #[value(alias = "kantorovich")]
    K,
    #[value(alias = "total-variation")]
    Tv,
}

impl From<GeneratorArg> for Generator {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::K => Generator::Kantorovich,
            GeneratorArg::Tv => Generator::TotalVariation,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Empirical IPM between two CSV samples.
    Ipm {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum)]
        generator: GeneratorArg,
        /// Bins per axis for total variation.
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Checks a hypothesis (JSON) against its setting's condition.
    Certify {
        model: PathBuf,
        #[arg(long)]
        mx: f64,
        #[arg(long, default_value_t = 0.0)]
        my: f64,
    },
    /// Rademacher estimate of the trained class on a queried sample.
    Rademacher { config: PathBuf },
    /// Full bound report for one queried sample.
    Bound { config: PathBuf },
    /// Active-learning loop; writes the learning curve as CSV.
    AlRun {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Repeated bound evaluations; writes per-repetition CSV and prints the coverage.
    Coverage {
        config: PathBuf,
        #[arg(long)]
        reps: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Lists the builtin tasks.
    Tasks,
}

struct Output<'a> {
    out: &'a mut dyn Write,
    seed: u64,
    timestamp: bool,
}

impl Output<'_> {
    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let mut v = serde_json::to_value(value)?;
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("seed".into(), self.seed.into());
            if self.timestamp {
                let now = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs());
                map.insert("timestamp".into(), now.into());
            }
        }
        serde_json::to_writer_pretty(&mut *self.out, &v)?;
        writeln!(self.out)?;
        Ok(())
    }
}

/// Writes `bytes` next to `path` and renames over it.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn read_pool(path: &Path) -> Result<Pool> {
    Pool::read_csv(std::fs::File::open(path)?, None, None)
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn seed_of(command: &Command, flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match command {
        Command::Rademacher { config }
        | Command::Bound { config }
        | Command::AlRun { config, .. }
        | Command::Coverage { config, .. } => Ok(ExperimentConfig::load(config)?.seed),
        _ => Ok(0),
    }
}

#[derive(Serialize)]
struct TaskListing {
    name: &'static str,
    dim: usize,
    mx: f64,
    my: f64,
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let seed = seed_of(&cli.command, cli.global.seed)?;
    writeln!(err, "seed={seed}")?;
    let mut o = Output {
        out,
        seed,
        timestamp: !cli.global.no_timestamp,
    };
    match cli.command {
        Command::Ipm {
            a,
            b,
            generator,
            bins,
        } => {
            let (pa, pb) = (read_pool(&a)?, read_pool(&b)?);
            if pa.dim() != pb.dim() {
                return Err(Error::DimensionMismatch {
                    expected: pa.dim(),
                    got: pb.dim(),
                });
            }
            let spec = IpmSpec::new(generator.into()).with_bins(bins);
            o.json(&empirical_ipm(pa.points(), pb.points(), &spec)?)?;
        }
        Command::Certify { model, mx, my } => {
            let h: Hypothesis = serde_json::from_str(&std::fs::read_to_string(model)?)?;
            let c = certify(&h, &Domain::new(mx, my));
            o.json(&c)?;
            return Ok(if c.passes { 0 } else { 1 });
        }
        Command::Rademacher { config } => {
            let cfg = load_config(&config, cli.global.seed)?;
            let task = cfg.task()?;
            let domain = cfg.domain(&task);
            let queried = cfg
                .query_distribution
                .sample(&task, cfg.sample_size, derive_seed(seed, 1))?;
            let h = train(
                cfg.setting,
                &queried,
                &domain,
                &cfg.model,
                &cfg.optimizer,
                derive_seed(seed, 2),
            )?
            .hypothesis;
            let rad = rademacher(
                &HypothesisClass::constrained(h, &domain)?,
                &queried,
                SignDraws::Random(cfg.mc.num_sigma),
                &cfg.inner,
                derive_seed(seed, 3),
            )?;
            o.json(&rad)?;
        }
        Command::Bound { config } => {
            let cfg = load_config(&config, cli.global.seed)?;
            o.json(&run_bound(&cfg, seed)?.report)?;
        }
        Command::AlRun { config, output } => {
            let cfg = load_config(&config, cli.global.seed)?;
            let records = al_loop(&cfg)?;
            let mut buf = Vec::new();
            write_curve_csv(&records, &mut buf)?;
            write_atomic(&output, &buf)?;
        }
        Command::Coverage {
            config,
            reps,
            output,
        } => {
            let cfg = load_config(&config, cli.global.seed)?;
            let res = coverage_experiment(&cfg, reps)?;
            let mut buf = Vec::new();
            res.write_csv(&mut buf)?;
            write_atomic(&output, &buf)?;
            for f in &res.failures {
                writeln!(
                    err,
                    "rep {} failed: rhs={} true_risk={} rad={} rad_std_error={}",
                    f.rep, f.rhs, f.true_risk, f.rad, f.rad_std_error
                )?;
            }
            writeln!(o.out, "{}", res.summary_line())?;
        }
        Command::Tasks => {
            let listing: Vec<TaskListing> = BUILTIN_TASKS
                .iter()
                .map(|&name| {
                    let t = make_builtin_task(name).expect("registry names resolve");
                    TaskListing {
                        name,
                        dim: t.dim(),
                        mx: t.domain_bound,
                        my: t.label_bound,
                    }
                })
                .collect();
            for t in &listing {
                writeln!(o.out, "{}\tdim={}\tM_X={}\tM_Y={}", t.name, t.dim, t.mx, t.my)?;
            }
        }
    }
    Ok(0)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
