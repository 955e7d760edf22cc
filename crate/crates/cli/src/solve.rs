//! `rfcs solve`: run one method on one instance file.

use crate::methods::{run_method, Method, SolveOptions};
use crate::{io_err, resolve_seed, CliError, CliResult};
use clap::Args;
use rfcs_core::files::{parse_instance, serialize_solution};
use rfcs_core::split::{ConstraintSemantics, LMode, TwMode};
use std::path::PathBuf;

#[derive(Args)]
pub struct SolveArgs {
    /// Instance file
    #[arg(long)]
    instance: PathBuf,
    /// nn, nn+ls-split, nn+ls-tsp, policy:<paramfile> or oracle
    #[arg(long)]
    method: String,
    /// Time-window accounting: travel-time or service-only
    #[arg(long, default_value = "travel-time")]
    tw_mode: String,
    /// Distance-limit accounting: include-return or path-only
    #[arg(long, default_value = "include-return")]
    l_mode: String,
    /// Objective evaluations allowed for local search
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Also try every cyclic rotation of the final tour
    #[arg(long)]
    rotate: bool,
    /// For policy methods: best of this many sampled rollouts on top of greedy
    #[arg(long)]
    samples: Option<usize>,
    /// Write the solution JSON here
    #[arg(long)]
    out: Option<PathBuf>,
}

pub(crate) fn parse_sem(tw_mode: &str, l_mode: &str) -> CliResult<ConstraintSemantics> {
    let tw: TwMode = tw_mode.parse().map_err(CliError::Usage)?;
    let l: LMode = l_mode.parse().map_err(CliError::Usage)?;
    Ok(ConstraintSemantics { tw_mode: tw, l_mode: l })
}

pub fn run(args: SolveArgs) -> CliResult<()> {
    let method = Method::parse(&args.method)?;
    let sem = parse_sem(&args.tw_mode, &args.l_mode)?;
    let text = std::fs::read_to_string(&args.instance)
        .map_err(|e| io_err(&format!("reading {}", args.instance.display()), e))?;
    let inst = parse_instance(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.instance.display())))?;
    let opts = SolveOptions {
        sem,
        budget: args.budget,
        seed: resolve_seed(args.seed)?,
        rotate: args.rotate,
        samples: args.samples,
    };
    let outcome = run_method(&inst, &method, &opts)?;
    let stem = args
        .instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| args.instance.display().to_string());
    println!(
        "instance={} variant={} n={} method={} tw_mode={} l_mode={} feasible={} cost={} wall_ms={:.3}",
        stem,
        inst.flags.canonical_name(),
        inst.n,
        method.label(),
        sem.tw_mode.label(),
        sem.l_mode.label(),
        outcome.feasible(),
        outcome.cost,
        outcome.wall.as_secs_f64() * 1e3,
    );
    match outcome.solution {
        Some(sol) => {
            if let Some(out) = args.out {
                let body = serialize_solution(&sol).map_err(|e| CliError::Internal(e.to_string()))?;
                std::fs::write(&out, body).map_err(|e| io_err(&format!("writing {}", out.display()), e))?;
            }
            Ok(())
        }
        None => Err(CliError::Infeasible(format!(
            "no feasible split exists for this tour of {}",
            stem
        ))),
    }
}
