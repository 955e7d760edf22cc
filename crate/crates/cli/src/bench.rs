//! `rfcs bench`: run a method matrix over a variant matrix, validate
//! every solution, and aggregate mean cost and gap against a reference
//! method.

use crate::methods::{load_policy, run_method, Method, SolveOptions};
use crate::solve::parse_sem;
use crate::{io_err, resolve_seed, CliError, CliResult};
use clap::Args;
use rayon::prelude::*;
use rfcs_core::files::serialize_solution;
use rfcs_core::instance::{generate_instance, ScaleProfile, VariantFlags, VARIANT_NAMES};
use rfcs_core::oracle::MAX_SOLVE_N;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated variant names, or `all` for the full sixteen
    #[arg(long, default_value = "all", value_delimiter = ',')]
    variants: Vec<String>,
    /// Comma-separated methods (see `rfcs solve --help`)
    #[arg(long, default_value = "nn,nn+ls-split", value_delimiter = ',')]
    methods: Vec<String>,
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Instances per variant
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Objective evaluations allowed per local search run
    #[arg(long, default_value_t = 500)]
    budget: usize,
    /// Method whose cost anchors the gap column; defaults to the first
    #[arg(long)]
    reference: Option<String>,
    #[arg(long, default_value = "n50")]
    profile: String,
    #[arg(long, default_value = "travel-time")]
    tw_mode: String,
    #[arg(long, default_value = "include-return")]
    l_mode: String,
    /// Worker threads for instance-level parallelism
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory for rows.csv, summary.csv and solution files
    #[arg(long)]
    out: Option<PathBuf>,
}

pub const ROWS_SCHEMA_VERSION: u32 = 1;

struct Row {
    instance_id: String,
    variant: String,
    n: usize,
    method: String,
    feasible: bool,
    cost: f64,
    wall_ms: f64,
    failure: Option<String>,
    solution_json: Option<String>,
}

pub fn run(args: BenchArgs) -> CliResult<()> {
    let methods: Vec<Method> = args
        .methods
        .iter()
        .map(|m| Method::parse(m))
        .collect::<CliResult<_>>()?;
    if methods.is_empty() {
        return Err(CliError::Usage("no methods given".into()));
    }
    for method in &methods {
        if let Method::Policy(path) = method {
            load_policy(path)?; // surface a bad file before the sweep
        }
        if matches!(method, Method::Oracle) && args.n > MAX_SOLVE_N {
            return Err(CliError::Infeasible(format!(
                "oracle method is capped at {MAX_SOLVE_N} customers, sweep uses n={}",
                args.n
            )));
        }
    }
    let reference = match &args.reference {
        Some(name) => {
            let parsed = Method::parse(name)?;
            if !methods.iter().any(|m| m.short() == parsed.short()) {
                return Err(CliError::Usage(format!(
                    "reference method `{name}` is not in the method list"
                )));
            }
            parsed.short()
        }
        None => methods[0].short(),
    };

    let variant_names: Vec<String> = if args.variants.iter().any(|v| v == "all") {
        VARIANT_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.variants.clone()
    };
    let variants: Vec<VariantFlags> = variant_names
        .iter()
        .map(|v| {
            v.parse()
                .map_err(|e: rfcs_core::instance::UnknownVariant| CliError::Usage(e.to_string()))
        })
        .collect::<CliResult<_>>()?;
    let profile: ScaleProfile = args.profile.parse().map_err(CliError::Usage)?;
    let sem = parse_sem(&args.tw_mode, &args.l_mode)?;
    let base_seed = resolve_seed(args.seed)?;
    // n and capacity constraints are the same for every variant; probe
    // once so the worker pool never sees a generation error
    generate_instance(args.n, variants[0], profile, base_seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let tasks: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..args.count).map(move |i| (v, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let keep_solutions = args.out.is_some();
    let rows: Vec<Row> = pool.install(|| {
        tasks
            .par_iter()
            .flat_map_iter(|&(v, i)| {
                let flags = variants[v];
                let seed = base_seed.wrapping_add(i as u64);
                let inst = generate_instance(args.n, flags, profile, seed)
                    .expect("sweep parameters were validated");
                let instance_id = format!("{}_{:04}", flags.canonical_name(), i);
                methods
                    .iter()
                    .map(|method| {
                        let opts = SolveOptions {
                            sem,
                            budget: args.budget,
                            seed,
                            rotate: false,
                            samples: None,
                        };
                        match run_method(&inst, method, &opts) {
                            Ok(outcome) => Row {
                                instance_id: instance_id.clone(),
                                variant: flags.canonical_name(),
                                n: args.n,
                                method: method.short(),
                                feasible: outcome.feasible(),
                                cost: outcome.cost,
                                wall_ms: outcome.wall.as_secs_f64() * 1e3,
                                failure: None,
                                solution_json: outcome.solution.as_ref().and_then(|sol| {
                                    keep_solutions
                                        .then(|| serialize_solution(sol).expect("feasible cost is finite"))
                                }),
                            },
                            Err(err) => Row {
                                instance_id: instance_id.clone(),
                                variant: flags.canonical_name(),
                                n: args.n,
                                method: method.short(),
                                feasible: false,
                                cost: f64::INFINITY,
                                wall_ms: 0.0,
                                failure: Some(format!("{err:?}")),
                                solution_json: None,
                            },
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    });

    let summary = summarize(&rows, &variant_names, &methods, &reference);
    print_table(&summary, &reference);

    if let Some(out) = &args.out {
        write_outputs(out, &rows, &summary, &reference, sem)?;
    }

    let failures: Vec<&Row> = rows.iter().filter(|r| r.failure.is_some()).collect();
    if !failures.is_empty() {
        for row in &failures {
            eprintln!(
                "failed: {} {} {}: {}",
                row.variant,
                row.instance_id,
                row.method,
                row.failure.as_deref().unwrap_or("")
            );
        }
        return Err(CliError::Internal(format!(
            "{} of {} runs failed validation or errored",
            failures.len(),
            rows.len()
        )));
    }
    Ok(())
}

struct Aggregate {
    variant: String,
    method: String,
    instances: usize,
    feasible: usize,
    mean_cost: f64,
    mean_gap_pct: f64,
}

fn summarize(rows: &[Row], variants: &[String], methods: &[Method], reference: &str) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for variant in variants {
        let by = |method: &str| -> Vec<&Row> {
            rows.iter()
                .filter(|r| &r.variant == variant && r.method == method)
                .collect()
        };
        let ref_rows = by(reference);
        for method in methods {
            let label = method.short();
            let mine = by(&label);
            let feasible: Vec<&&Row> = mine.iter().filter(|r| r.feasible).collect();
            let mean_cost = if feasible.is_empty() {
                f64::NAN
            } else {
                feasible.iter().map(|r| r.cost).sum::<f64>() / feasible.len() as f64
            };
            // per-instance gap against the reference, where both are feasible
            let mut gaps = Vec::new();
            for row in &mine {
                if !row.feasible {
                    continue;
                }
                if let Some(other) = ref_rows
                    .iter()
                    .find(|r| r.instance_id == row.instance_id && r.feasible)
                {
                    gaps.push((row.cost - other.cost) / other.cost * 100.0);
                }
            }
            let mean_gap_pct = if gaps.is_empty() {
                f64::NAN
            } else {
                gaps.iter().sum::<f64>() / gaps.len() as f64
            };
            out.push(Aggregate {
                variant: variant.clone(),
                method: label,
                instances: mine.len(),
                feasible: feasible.len(),
                mean_cost,
                mean_gap_pct,
            });
        }
    }
    out
}

fn print_table(summary: &[Aggregate], reference: &str) {
    println!(
        "{:<10} {:<14} {:>5} {:>5} {:>12} {:>12}",
        "variant", "method", "inst", "feas", "mean_cost", "gap_vs_ref"
    );
    for agg in summary {
        let cost = if agg.mean_cost.is_nan() {
            "-".to_string()
        } else {
            format!("{:.4}", agg.mean_cost)
        };
        let gap = if agg.mean_gap_pct.is_nan() {
            "-".to_string()
        } else {
            format!("{:+.2}%", agg.mean_gap_pct)
        };
        println!(
            "{:<10} {:<14} {:>5} {:>5} {:>12} {:>12}",
            agg.variant, agg.method, agg.instances, agg.feasible, cost, gap
        );
    }
    println!("reference method: {reference}");
}

fn write_outputs(
    out: &PathBuf,
    rows: &[Row],
    summary: &[Aggregate],
    reference: &str,
    sem: rfcs_core::split::ConstraintSemantics,
) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(|e| io_err(&format!("creating {}", out.display()), e))?;

    let mut rows_csv = String::from(
        "schema_version,instance_id,variant,n,method,tw_mode,l_mode,feasible,cost,wall_ms,status\n",
    );
    for row in rows {
        let _ = writeln!(
            rows_csv,
            "{ROWS_SCHEMA_VERSION},{},{},{},{},{},{},{},{},{:.3},{}",
            row.instance_id,
            row.variant,
            row.n,
            row.method,
            sem.tw_mode.label(),
            sem.l_mode.label(),
            row.feasible,
            row.cost,
            row.wall_ms,
            if row.failure.is_some() { "failed" } else { "ok" },
        );
    }
    let path = out.join("rows.csv");
    std::fs::write(&path, rows_csv).map_err(|e| io_err(&format!("writing {}", path.display()), e))?;

    let mut summary_csv =
        String::from("schema_version,variant,method,instances,feasible,mean_cost,mean_gap_pct,reference\n");
    for agg in summary {
        let _ = writeln!(
            summary_csv,
            "{ROWS_SCHEMA_VERSION},{},{},{},{},{},{},{}",
            agg.variant, agg.method, agg.instances, agg.feasible, agg.mean_cost, agg.mean_gap_pct, reference,
        );
    }
    let path = out.join("summary.csv");
    std::fs::write(&path, summary_csv)
        .map_err(|e| io_err(&format!("writing {}", path.display()), e))?;

    let solutions = out.join("solutions");
    std::fs::create_dir_all(&solutions)
        .map_err(|e| io_err(&format!("creating {}", solutions.display()), e))?;
    for row in rows {
        if let Some(json) = &row.solution_json {
            let name = format!("{}_{}.json", row.instance_id, row.method.replace(['+', ':'], "-"));
            let path = solutions.join(name);
            std::fs::write(&path, json)
                .map_err(|e| io_err(&format!("writing {}", path.display()), e))?;
        }
    }
    Ok(())
}
