//! `rfcs train`: train the route-first policy, write parameters and the
//! learning curve.

use crate::solve::parse_sem;
use crate::{io_err, resolve_seed, CliError, CliResult};
use clap::Args;
use rfcs_core::instance::{ScaleProfile, VariantFlags};
use rfcs_core::policy::{serialize_params, train, LrSchedule, TrainConfig};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "CVRP")]
    variant: String,
    #[arg(long)]
    epochs: usize,
    /// Instances per update
    #[arg(long, default_value_t = 64)]
    batch: usize,
    /// Stochastic rollouts per instance; their mean is the baseline
    #[arg(long, default_value_t = 8)]
    rollouts: usize,
    /// Initial learning rate
    #[arg(long, default_value_t = 0.2)]
    lr: f64,
    /// Multiplier applied at each decay epoch
    #[arg(long, default_value_t = 0.5)]
    lr_decay: f64,
    /// Comma-separated decay epochs; defaults to 60% and 80% of epochs
    #[arg(long, value_delimiter = ',')]
    lr_decay_at: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "n50")]
    profile: String,
    #[arg(long, default_value = "travel-time")]
    tw_mode: String,
    #[arg(long, default_value = "include-return")]
    l_mode: String,
    /// Held-out instances evaluated greedily after each epoch
    #[arg(long, default_value_t = 64)]
    eval: usize,
    /// Also learn the softmax temperature
    #[arg(long)]
    train_temperature: bool,
    /// Output directory for params.json and curve.csv
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: TrainArgs) -> CliResult<()> {
    let flags: VariantFlags = args
        .variant
        .parse()
        .map_err(|e: rfcs_core::instance::UnknownVariant| CliError::Usage(e.to_string()))?;
    let profile: ScaleProfile = args.profile.parse().map_err(CliError::Usage)?;
    let milestones = args
        .lr_decay_at
        .unwrap_or_else(|| vec![args.epochs * 6 / 10, args.epochs * 8 / 10]);
    let cfg = TrainConfig {
        n: args.n,
        flags,
        profile,
        rollouts_per_instance: args.rollouts,
        batch_size: args.batch,
        epochs: args.epochs,
        lr: LrSchedule {
            initial: args.lr,
            decay: args.lr_decay,
            milestones,
        },
        seed: resolve_seed(args.seed)?,
        sem: parse_sem(&args.tw_mode, &args.l_mode)?,
        eval_instances: args.eval,
        train_temperature: args.train_temperature,
    };
    let (params, curve) = train(&cfg).map_err(|e| match e {
        rfcs_core::policy::PolicyError::Config(_) | rfcs_core::policy::PolicyError::Generate(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Internal(other.to_string()),
    })?;
    for row in &curve {
        println!(
            "epoch {:>4}  held-out mean cost {:.6}  grad norm {:.6}",
            row.epoch, row.mean_cost, row.grad_norm
        );
    }

    std::fs::create_dir_all(&args.out)
        .map_err(|e| io_err(&format!("creating {}", args.out.display()), e))?;
    let params_path = args.out.join("params.json");
    std::fs::write(&params_path, serialize_params(&params, &cfg.digest()))
        .map_err(|e| io_err(&format!("writing {}", params_path.display()), e))?;
    let mut csv = String::from("epoch,mean_cost,grad_norm\n");
    for row in &curve {
        let _ = writeln!(csv, "{},{},{}", row.epoch, row.mean_cost, row.grad_norm);
    }
    let curve_path = args.out.join("curve.csv");
    std::fs::write(&curve_path, csv)
        .map_err(|e| io_err(&format!("writing {}", curve_path.display()), e))?;
    println!(
        "wrote {} and {}",
        params_path.display(),
        curve_path.display()
    );
    Ok(())
}
