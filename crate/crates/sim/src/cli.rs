//! The `sim` command line, callable in-process.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{export_csv, mean, pooled_t_test, run_simulation, std_dev, Population, SimConfig};
use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use ipr_core::Condition;

#[derive(Parser)]
#[command(name = "sim", version, about = "Simulate peer review rounds and compare samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Run seeded simulations and write metrics.csv into --out
    Run {
        #[arg(long)]
        cohort: usize,
        #[arg(long, default_value_t = 1)]
        rounds: u32,
        /// blind-random, identified-random or identified-incentive; repeatable, all three by default
        #[arg(long = "condition")]
        conditions: Vec<Condition>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Review fan-out
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// JSON population file
        #[arg(long)]
        agents: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pooled two-sample t-test between two files of numbers
    Stats {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

/// Executes one parsed invocation, writing the human-readable report to `out`.
pub fn run(cli: Cli, report: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Cmd::Run { cohort, rounds, conditions, seed, k, agents, out } => {
            let population = match agents {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    Population::from_json(&text)?
                }
                None => Population::default(),
            };
            let conditions = if conditions.is_empty() { Condition::ALL.to_vec() } else { conditions };
            let mut metrics = Vec::new();
            for condition in conditions {
                let config = SimConfig { cohort, rounds, condition, seed, k, population: population.clone() };
                let rounds = run_simulation(config)?;
                if let Some(last) = rounds.last() {
                    writeln!(
                        report,
                        "{:<22} round {:>3}  usefulness {:.3} (n={})  assortativity {:.3}",
                        condition.slug(),
                        last.round,
                        last.usefulness.mean.unwrap_or(f64::NAN),
                        last.usefulness.n,
                        last.assortativity.value
                    )?;
                }
                metrics.extend(rounds);
            }
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let path = out.join("metrics.csv");
            export_csv(&metrics, &path)?;
            writeln!(report, "wrote {}", path.display())?;
            Ok(())
        }
        Cmd::Stats { a, b } => {
            let a = read_sample(&a)?;
            let b = read_sample(&b)?;
            for (name, xs) in [("a", &a), ("b", &b)] {
                let sd = std_dev(xs).map(|s| format!("{s}")).unwrap_or_else(|_| "undefined".into());
                writeln!(report, "{name}: n={} mean={} std={}", xs.len(), mean(xs)?, sd)?;
            }
            let t = pooled_t_test(&a, &b)?;
            writeln!(report, "t={} df={} p={}", t.t, t.df, t.p)?;
            Ok(())
        }
    }
}

/// Numbers separated by whitespace, commas or newlines. `#` starts a comment.
fn read_sample(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or_default();
        for token in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            match token.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => bail!("{}: not a number: {token:?}", path.display()),
            }
        }
    }
    Ok(out)
}
