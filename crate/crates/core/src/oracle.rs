//! Brute-force references for small instances.
//!
//! Everything here recomputes feasibility and cost with its own route
//! simulator, deliberately sharing no logic with the splitter, so the
//! two can certify each other on small inputs.

use crate::instance::{Instance, Solution};
use crate::split::{ConstraintSemantics, GiantTour, LMode, TwMode};
use itertools::Itertools;
use thiserror::Error;

/// Enumerating 2^(n-1) cut sets stays tractable up to here.
pub const MAX_SPLIT_N: usize = 20;
/// Enumerating n! permutations stays tractable up to here.
pub const MAX_SOLVE_N: usize = 9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} customers, brute force is capped at {max}")]
    TooLarge { n: usize, max: usize },
}

/// Certified optimum over every permutation and every cut.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub optimal_cost: f64,
    pub optimal_solution: Option<Solution>,
    pub search_space_size: u64,
    pub feasible: bool,
}

/// Simulate `route` as a single vehicle route and return its cost, or
/// `None` if any active constraint is violated.
pub fn simulate_route(inst: &Instance, route: &[usize], sem: ConstraintSemantics) -> Option<f64> {
    assert!(!route.is_empty());
    let flags = inst.flags;

    let delivered: i64 = route.iter().map(|&c| inst.demand[c].max(0)).sum();
    let picked: i64 = route.iter().map(|&c| (-inst.demand[c]).max(0)).sum();
    if delivered > inst.capacity || picked > inst.capacity {
        return None;
    }
    if flags.backhaul {
        if flags.mixed_backhaul {
            let mut load = delivered;
            for &c in route {
                load -= inst.demand[c];
                if load < 0 || load > inst.capacity {
                    return None;
                }
            }
        } else {
            let first_pickup = route.iter().position(|&c| inst.demand[c] < 0);
            let last_delivery = route.iter().rposition(|&c| inst.demand[c] > 0);
            if let (Some(p), Some(d)) = (first_pickup, last_delivery) {
                if p < d {
                    return None;
                }
            }
        }
    }

    let mut path = inst.dist(0, route[0]);
    for pair in route.windows(2) {
        path += inst.dist(pair[0], pair[1]);
    }
    let total = if flags.open {
        path
    } else {
        path + inst.dist(*route.last().unwrap(), 0)
    };

    if flags.dist_limit {
        let measured = match sem.l_mode {
            LMode::IncludeReturn => total,
            LMode::PathOnly => path,
        };
        if measured > inst.limit {
            return None;
        }
    }

    if flags.time_window {
        let mut clock = 0.0f64;
        let mut prev = 0usize;
        for &c in route {
            clock = match sem.tw_mode {
                TwMode::TravelTime => {
                    let arrival = clock + inst.dist(prev, c);
                    arrival.max(inst.tw_start[c]) + inst.service[c]
                }
                TwMode::ServiceOnly => clock.max(inst.tw_start[c]) + inst.service[c],
            };
            if clock > inst.tw_end[c] {
                return None;
            }
            prev = c;
        }
    }

    Some(total)
}

fn plan_cost(inst: &Instance, order: &[usize], cuts: u64, sem: ConstraintSemantics) -> Option<f64> {
    let n = order.len();
    let mut cost = 0.0;
    let mut from = 0;
    for end in 1..=n {
        // a set bit at gap `end-1` closes the route after position end-1
        if end == n || cuts & (1u64 << (end - 1)) != 0 {
            cost += simulate_route(inst, &order[from..end], sem)?;
            from = end;
        }
    }
    Some(cost)
}

fn best_cut(inst: &Instance, order: &[usize], sem: ConstraintSemantics) -> (f64, u64) {
    let n = order.len();
    let mut best = f64::INFINITY;
    let mut best_cuts = 0u64;
    for cuts in 0..(1u64 << (n - 1)) {
        if let Some(cost) = plan_cost(inst, order, cuts, sem) {
            if cost < best {
                best = cost;
                best_cuts = cuts;
            }
        }
    }
    (best, best_cuts)
}

fn cuts_to_routes(order: &[usize], cuts: u64) -> Vec<Vec<usize>> {
    let n = order.len();
    let mut routes = Vec::new();
    let mut from = 0;
    for end in 1..=n {
        if end == n || cuts & (1u64 << (end - 1)) != 0 {
            routes.push(order[from..end].to_vec());
            from = end;
        }
    }
    routes
}

/// Minimum total cost over every way of cutting `tour` into consecutive
/// routes, by exhaustive enumeration. Infinity when no cut is feasible.
pub fn brute_force_split(
    inst: &Instance,
    tour: &GiantTour,
    sem: ConstraintSemantics,
) -> Result<f64, OracleError> {
    let n = tour.len();
    if n > MAX_SPLIT_N {
        return Err(OracleError::TooLarge { n, max: MAX_SPLIT_N });
    }
    Ok(best_cut(inst, tour.order(), sem).0)
}

/// Exact optimum over all permutations of the customers, each split
/// optimally by enumeration. Every routing plan is some permutation with
/// some cut set, so this is the global optimum.
pub fn brute_force_solve(inst: &Instance, sem: ConstraintSemantics) -> Result<OracleResult, OracleError> {
    let n = inst.n;
    if n > MAX_SOLVE_N {
        return Err(OracleError::TooLarge { n, max: MAX_SOLVE_N });
    }
    let mut best = f64::INFINITY;
    let mut best_plan: Option<(Vec<usize>, u64)> = None;
    let mut space = 0u64;
    for perm in (1..=n).permutations(n) {
        space += 1;
        let (cost, cuts) = best_cut(inst, &perm, sem);
        if cost < best {
            best = cost;
            best_plan = Some((perm, cuts));
        }
    }
    match best_plan {
        Some((order, cuts)) => Ok(OracleResult {
            optimal_cost: best,
            optimal_solution: Some(Solution {
                routes: cuts_to_routes(&order, cuts),
                cost: best,
            }),
            search_space_size: space,
            feasible: true,
        }),
        None => Ok(OracleResult {
            optimal_cost: f64::INFINITY,
            optimal_solution: None,
            search_space_size: space,
            feasible: false,
        }),
    }
}
