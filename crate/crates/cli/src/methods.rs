//! Solve methods shared by `solve` and `bench`.

use crate::{CliError, CliResult};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rfcs_core::instance::{Instance, Solution};
use rfcs_core::oracle::{brute_force_solve, MAX_SOLVE_N};
use rfcs_core::policy::{derive_seed, parse_params, rollout, PolicyParams, SampleMode};
use rfcs_core::routefirst::{local_search, nearest_neighbor_tour, rotate_best, Objective, SearchBudget};
use rfcs_core::split::{split, ConstraintSemantics, GiantTour};
use rfcs_core::validate::validate_solution;
use std::path::PathBuf;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub enum Method {
    Nn,
    NnLsSplit,
    NnLsTsp,
    Policy(PathBuf),
    Oracle,
}

impl Method {
    pub fn parse(text: &str) -> CliResult<Method> {
        match text {
            "nn" => Ok(Method::Nn),
            "nn+ls-split" => Ok(Method::NnLsSplit),
            "nn+ls-tsp" => Ok(Method::NnLsTsp),
            "oracle" => Ok(Method::Oracle),
            other => match other.strip_prefix("policy:") {
                Some(path) if !path.is_empty() => Ok(Method::Policy(PathBuf::from(path))),
                _ => Err(CliError::Usage(format!(
                    "unknown method `{other}`; expected nn, nn+ls-split, nn+ls-tsp, policy:<paramfile> or oracle"
                ))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Method::Nn => "nn".into(),
            Method::NnLsSplit => "nn+ls-split".into(),
            Method::NnLsTsp => "nn+ls-tsp".into(),
            Method::Policy(path) => format!("policy:{}", path.display()),
            Method::Oracle => "oracle".into(),
        }
    }

    /// Short name safe for file names and report columns.
    pub fn short(&self) -> String {
        match self {
            Method::Policy(_) => "policy".into(),
            other => other.label(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub sem: ConstraintSemantics,
    pub budget: usize,
    pub seed: u64,
    pub rotate: bool,
    pub samples: Option<usize>,
}

pub struct Outcome {
    pub solution: Option<Solution>,
    pub cost: f64,
    pub wall: Duration,
}

impl Outcome {
    pub fn feasible(&self) -> bool {
        self.solution.is_some()
    }
}

pub fn load_policy(path: &PathBuf) -> CliResult<PolicyParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| crate::io_err(&format!("reading {}", path.display()), e))?;
    let (params, _) = parse_params(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(params)
}

fn policy_tour(
    inst: &Instance,
    params: &PolicyParams,
    opts: &SolveOptions,
) -> CliResult<GiantTour> {
    let internal = |e: rfcs_core::policy::PolicyError| CliError::Internal(e.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = rollout(inst, params, SampleMode::Greedy, opts.sem, &mut rng).map_err(internal)?;
    if let Some(k) = opts.samples {
        for i in 0..k {
            let mut sample_rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 0x414d50, i as u64));
            let t = rollout(inst, params, SampleMode::Sample, opts.sem, &mut sample_rng).map_err(internal)?;
            if t.reward > best.reward {
                best = t;
            }
        }
    }
    best.tour(inst.n).map_err(|e| CliError::Internal(e.to_string()))
}

/// Run one method on one instance. Returns an infeasible outcome
/// (no solution, infinite cost) rather than an error when the splitter
/// finds no feasible cut; refuses oracle runs past the size cap.
pub fn run_method(inst: &Instance, method: &Method, opts: &SolveOptions) -> CliResult<Outcome> {
    let started = Instant::now();
    if let Method::Oracle = method {
        if inst.n > MAX_SOLVE_N {
            return Err(CliError::Infeasible(format!(
                "oracle method is capped at {MAX_SOLVE_N} customers, instance has {}",
                inst.n
            )));
        }
        let result = brute_force_solve(inst, opts.sem)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        return Ok(Outcome {
            cost: result.optimal_cost,
            solution: result.optimal_solution,
            wall: started.elapsed(),
        });
    }

    let tour = match method {
        Method::Nn => nearest_neighbor_tour(inst, 1),
        Method::NnLsSplit | Method::NnLsTsp => {
            let objective = if matches!(method, Method::NnLsSplit) {
                Objective::SplitCost
            } else {
                Objective::TspLength
            };
            let start = nearest_neighbor_tour(inst, 1);
            let budget = SearchBudget::new(opts.budget.max(1), opts.seed);
            local_search(inst, &start, objective, &budget, opts.sem)
        }
        Method::Policy(path) => {
            let params = load_policy(path)?;
            policy_tour(inst, &params, opts)?
        }
        Method::Oracle => unreachable!(),
    };
    let tour = if opts.rotate {
        rotate_best(inst, &tour, opts.sem, false)
    } else {
        tour
    };
    let result = split(inst, &tour, opts.sem);
    let solution = result.to_solution(&tour);
    if let Some(sol) = &solution {
        let report = validate_solution(inst, sol, opts.sem)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        if !report.is_feasible() {
            return Err(CliError::Internal(format!(
                "solver emitted an invalid solution: {}",
                report.violations[0]
            )));
        }
    }
    Ok(Outcome {
        solution,
        cost: result.total_cost,
        wall: started.elapsed(),
    })
}
