//! `rfcs gen`: write seeded instance files plus a manifest.

use crate::{io_err, resolve_seed, CliError, CliResult};
use clap::Args;
use rfcs_core::files::{serialize_instance, to_json_string};
use rfcs_core::instance::{generate_instance, ScaleProfile, VariantFlags};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args)]
pub struct GenArgs {
    /// Customers per instance
    #[arg(long)]
    n: usize,
    /// Variant name, e.g. CVRP or OVRPBLTW (MB in place of B for mixed backhaul)
    #[arg(long)]
    variant: String,
    /// Number of instances
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Base seed; instance i uses base + i
    #[arg(long)]
    seed: Option<u64>,
    /// Capacity profile: n50, n100 or q<int>
    #[arg(long, default_value = "n50")]
    profile: String,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct Manifest {
    version: u32,
    variant: String,
    n: usize,
    profile: String,
    count: usize,
    base_seed: u64,
    files: Vec<String>,
}

pub fn run(args: GenArgs) -> CliResult<()> {
    let flags: VariantFlags = args
        .variant
        .parse()
        .map_err(|e: rfcs_core::instance::UnknownVariant| CliError::Usage(e.to_string()))?;
    let profile: ScaleProfile = args
        .profile
        .parse()
        .map_err(CliError::Usage)?;
    let base_seed = resolve_seed(args.seed)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| io_err(&format!("creating {}", args.out.display()), e))?;

    let mut files = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let seed = base_seed.wrapping_add(i as u64);
        let inst = generate_instance(args.n, flags, profile, seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let name = format!("{}_n{}_s{}_{:04}.json", flags.canonical_name(), args.n, base_seed, i);
        let path = args.out.join(&name);
        std::fs::write(&path, serialize_instance(&inst))
            .map_err(|e| io_err(&format!("writing {}", path.display()), e))?;
        files.push(name);
    }

    let manifest = Manifest {
        version: 1,
        variant: flags.canonical_name(),
        n: args.n,
        profile: profile.label(),
        count: args.count,
        base_seed,
        files,
    };
    let path = args.out.join("manifest.json");
    std::fs::write(&path, to_json_string(&manifest))
        .map_err(|e| io_err(&format!("writing {}", path.display()), e))?;
    println!("wrote {} instances to {}", args.count, args.out.display());
    Ok(())
}
