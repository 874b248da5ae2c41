use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use concgt::analysis::BoundReport;
use concgt::disjunct::{build_disjunct, find_violation, verification_work, DEFAULT_VERIFY_CAP};
use concgt::harness::{emit_results, run_campaign, Campaign, InstanceMode, OutputFormat, Scheme};
use concgt::randomized::SchemeConfig;
use concgt::{BitMatrix, Instance};

#[derive(Parser)]
#[command(name = "concgt", version, about = "Concomitant group testing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Monte Carlo campaign and write one record per trial.
    Run {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        n: usize,
        /// Set sizes (bounds for the deterministic schemes), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Error probability of the Monte Carlo schemes.
        #[arg(long, conflicts_with = "alpha")]
        epsilon: Option<f64>,
        /// Per-attempt failure bound of the Las Vegas scheme.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Use this instance in every trial instead of sampling.
        #[arg(long)]
        instance_file: Option<PathBuf>,
        /// Sample each set size uniformly in 1..=s_i.
        #[arg(long)]
        at_most: bool,
        /// Record wall time per trial (output is then not reproducible).
        #[arg(long)]
        timing: bool,
        /// Row constant of the one-shot standard group testing design.
        #[arg(long)]
        c0: Option<f64>,
        /// Cap on Las Vegas attempts.
        #[arg(long)]
        max_attempts: Option<usize>,
    },
    /// Print the counting lower bound and the hypergraph baseline as JSON.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// Check a matrix file for the (u, v)-disjunct property.
    CheckDisjunct {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        u: usize,
        #[arg(long)]
        v: usize,
    },
    /// Sample a random (n, 2, v)-disjunct candidate and write it.
    BuildDisjunct {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        v: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Resample until the matrix passes the brute-force check.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            scheme,
            n,
            sizes,
            trials,
            seed,
            epsilon,
            alpha,
            out,
            format,
            instance_file,
            at_most,
            timing,
            c0,
            max_attempts,
        } => {
            let scheme: Scheme = scheme.parse()?;
            let error = match (scheme, epsilon, alpha) {
                (Scheme::LasVegas, None, Some(a)) => a,
                (Scheme::LasVegas, Some(_), None) => bail!("las-vegas takes --alpha, not --epsilon"),
                (_, _, Some(_)) if scheme != Scheme::LasVegas => bail!("--alpha only applies to las-vegas"),
                (_, Some(e), None) => e,
                _ => 0.01,
            };
            let mut campaign = Campaign::new(scheme, n, &sizes, error, trials, seed);
            campaign.timing = timing;
            campaign.config = SchemeConfig {
                c0: c0.unwrap_or(SchemeConfig::default().c0),
                max_attempts: max_attempts.unwrap_or(SchemeConfig::default().max_attempts),
                ..SchemeConfig::default()
            };
            campaign.instance_mode = match (instance_file, at_most) {
                (Some(path), false) => {
                    InstanceMode::Fixed(Instance::read(&path).with_context(|| format!("reading {}", path.display()))?)
                }
                (Some(_), true) => bail!("--instance-file and --at-most are exclusive"),
                (None, true) => InstanceMode::AtMost,
                (None, false) => InstanceMode::Exact,
            };
            let output = run_campaign(&campaign)?;
            let format = match format {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
            emit_results(&output.records, format, &out).with_context(|| format!("writing {}", out.display()))?;
            let meta = meta_path(&out);
            serde_json::to_writer_pretty(BufWriter::new(File::create(&meta)?), &output.summary)?;
            println!("{}", serde_json::to_string_pretty(&output.summary)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds { n, sizes } => {
            let report = BoundReport::new(n, &sizes)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckDisjunct { file, u, v } => {
            let matrix = BitMatrix::read(&file).with_context(|| format!("reading {}", file.display()))?;
            if u + v > matrix.n() {
                bail!("u + v = {} exceeds the {} columns", u + v, matrix.n());
            }
            let work = verification_work(matrix.n(), u, v);
            if work > DEFAULT_VERIFY_CAP {
                eprintln!("warning: brute force over {work} column choices");
            }
            match find_violation(&matrix, u, v) {
                None => {
                    println!("PASS");
                    Ok(ExitCode::SUCCESS)
                }
                Some(w) => {
                    println!("FAIL designated={:?} others={:?}", w.designated, w.others);
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::BuildDisjunct {
            n,
            v,
            seed,
            verify,
            out,
        } => {
            let cert = build_disjunct(n, 2, v, seed, verify)?;
            cert.matrix
                .write(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "rows={} n={} u=2 v={} verified={}",
                cert.matrix.t(),
                n,
                v,
                cert.verified
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Summary and PRNG metadata live next to the records.
fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}
