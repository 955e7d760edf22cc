//! Standalone feasibility checker for routing plans.
//!
//! The checker recomputes everything from instance data and collects
//! every violation it finds, rather than stopping at the first. It
//! shares no feasibility or cost code with the splitter, so it can vouch
//! for the splitter's output.

use crate::instance::{Instance, Solution};
use crate::split::{ConstraintSemantics, LMode, TwMode};
use thiserror::Error;

/// The solution is malformed and cannot be checked.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("route {route} refers to unknown customer {customer}")]
    UnknownCustomer { route: usize, customer: usize },
    #[error("route {route} is empty")]
    EmptyRoute { route: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MissingCustomer { customer: usize },
    DuplicateCustomer { customer: usize },
    LinehaulOverload { route: usize, load: i64 },
    PickupOverload { route: usize, load: i64 },
    RunningLoadOutOfRange { route: usize, position: usize, load: i64 },
    Precedence { route: usize, position: usize },
    TimeWindow { route: usize, position: usize, completion: f64, deadline: f64 },
    DistanceLimit { route: usize, length: f64, limit: f64 },
    CostMismatch { reported: f64, computed: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingCustomer { customer } => write!(f, "customer {customer} is never visited"),
            Violation::DuplicateCustomer { customer } => write!(f, "customer {customer} is visited more than once"),
            Violation::LinehaulOverload { route, load } => write!(f, "route {route} delivers {load}, over capacity"),
            Violation::PickupOverload { route, load } => write!(f, "route {route} picks up {load}, over capacity"),
            Violation::RunningLoadOutOfRange { route, position, load } => {
                write!(f, "route {route} carries {load} after stop {position}")
            }
            Violation::Precedence { route, position } => {
                write!(f, "route {route} delivers at stop {position} after a pickup")
            }
            Violation::TimeWindow { route, position, completion, deadline } => {
                write!(f, "route {route} stop {position} finishes at {completion:.6} past deadline {deadline:.6}")
            }
            Violation::DistanceLimit { route, length, limit } => {
                write!(f, "route {route} measures {length:.6}, over limit {limit:.6}")
            }
            Violation::CostMismatch { reported, computed } => {
                write!(f, "reported cost {reported:.9} differs from recomputed {computed:.9}")
            }
        }
    }
}

/// Everything found wrong with a solution, plus the recomputed cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub computed_cost: f64,
    pub sem: ConstraintSemantics,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn route_length(inst: &Instance, route: &[usize]) -> f64 {
    let mut len = inst.dist(0, route[0]);
    for pair in route.windows(2) {
        len += inst.dist(pair[0], pair[1]);
    }
    len
}

const COST_TOLERANCE: f64 = 1e-9;

/// Check `sol` against `inst` under the given feasibility conventions.
///
/// A clean report (no violations) means the plan covers every customer
/// exactly once, every route is feasible, and the reported cost matches
/// the recomputed one.
pub fn validate_solution(
    inst: &Instance,
    sol: &Solution,
    sem: ConstraintSemantics,
) -> Result<ValidationReport, StructureError> {
    for (r, route) in sol.routes.iter().enumerate() {
        if route.is_empty() {
            return Err(StructureError::EmptyRoute { route: r });
        }
        for &c in route {
            if c == 0 || c > inst.n {
                return Err(StructureError::UnknownCustomer { route: r, customer: c });
            }
        }
    }

    let mut violations = Vec::new();

    let mut visits = vec![0usize; inst.n + 1];
    for route in &sol.routes {
        for &c in route {
            visits[c] += 1;
        }
    }
    for c in 1..=inst.n {
        match visits[c] {
            0 => violations.push(Violation::MissingCustomer { customer: c }),
            1 => {}
            _ => violations.push(Violation::DuplicateCustomer { customer: c }),
        }
    }

    let flags = inst.flags;
    let mut computed_cost = 0.0;
    for (r, route) in sol.routes.iter().enumerate() {
        let delivered: i64 = route.iter().map(|&c| inst.demand[c].max(0)).sum();
        let picked: i64 = route.iter().map(|&c| (-inst.demand[c]).max(0)).sum();
        if delivered > inst.capacity {
            violations.push(Violation::LinehaulOverload { route: r, load: delivered });
        }
        if picked > inst.capacity {
            violations.push(Violation::PickupOverload { route: r, load: picked });
        }
        if flags.backhaul {
            if flags.mixed_backhaul {
                let mut load = delivered;
                for (p, &c) in route.iter().enumerate() {
                    load -= inst.demand[c];
                    if load < 0 || load > inst.capacity {
                        violations.push(Violation::RunningLoadOutOfRange { route: r, position: p, load });
                    }
                }
            } else {
                let mut pickup_seen = false;
                for (p, &c) in route.iter().enumerate() {
                    if inst.demand[c] < 0 {
                        pickup_seen = true;
                    } else if pickup_seen {
                        violations.push(Violation::Precedence { route: r, position: p });
                    }
                }
            }
        }

        if flags.time_window {
            let mut clock = 0.0f64;
            let mut prev = 0usize;
            for (p, &c) in route.iter().enumerate() {
                clock = match sem.tw_mode {
                    TwMode::TravelTime => {
                        let arrival = clock + inst.dist(prev, c);
                        arrival.max(inst.tw_start[c]) + inst.service[c]
                    }
                    TwMode::ServiceOnly => clock.max(inst.tw_start[c]) + inst.service[c],
                };
                if clock > inst.tw_end[c] {
                    violations.push(Violation::TimeWindow {
                        route: r,
                        position: p,
                        completion: clock,
                        deadline: inst.tw_end[c],
                    });
                }
                prev = c;
            }
        }

        let path = route_length(inst, route);
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
                violations.push(Violation::DistanceLimit { route: r, length: measured, limit: inst.limit });
            }
        }
        computed_cost += total;
    }

    if (sol.cost - computed_cost).abs() > COST_TOLERANCE {
        violations.push(Violation::CostMismatch { reported: sol.cost, computed: computed_cost });
    }

    Ok(ValidationReport { violations, computed_cost, sem })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, ScaleProfile, VariantFlags};
    use crate::split::{split, ConstraintSemantics, GiantTour};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sem() -> ConstraintSemantics {
        ConstraintSemantics::default()
    }

    #[test]
    fn feasible_two_route_plan_is_clean() {
        let inst = Instance::basic(
            vec![[0.0, 0.0], [0.3, 0.4], [0.6, 0.8], [0.1, 0.0]],
            vec![0, 10, 10, 10],
            40,
            VariantFlags::cvrp(),
        );
        let routes = vec![vec![1, 2], vec![3]];
        let cost = {
            let a = inst.dist(0, 1) + inst.dist(1, 2) + inst.dist(2, 0);
            let b = 2.0 * inst.dist(0, 3);
            a + b
        };
        let sol = Solution { routes, cost };
        let report = validate_solution(&inst, &sol, sem()).unwrap();
        assert!(report.is_feasible(), "{:?}", report.violations);
        assert!((report.computed_cost - cost).abs() < 1e-12);
        // stateless: a second call reproduces the report exactly
        assert_eq!(validate_solution(&inst, &sol, sem()).unwrap(), report);
    }

    #[test]
    fn linehaul_overload_is_one_violation() {
        let inst = Instance::basic(
            vec![[0.0, 0.0], [0.2, 0.1], [0.5, 0.5]],
            vec![0, 21, 20],
            40,
            VariantFlags::cvrp(),
        );
        let routes = vec![vec![1, 2]];
        let cost = inst.dist(0, 1) + inst.dist(1, 2) + inst.dist(2, 0);
        let report = validate_solution(&inst, &Solution { routes, cost }, sem()).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            report.violations[0],
            Violation::LinehaulOverload { route: 0, load: 41 }
        ));
    }

    #[test]
    fn coverage_violations_are_reported() {
        let inst = Instance::basic(
            vec![[0.0, 0.0], [0.2, 0.1], [0.5, 0.5], [0.7, 0.1]],
            vec![0, 5, 5, 5],
            40,
            VariantFlags::cvrp(),
        );
        let routes = vec![vec![1, 1]];
        let cost = inst.dist(0, 1) + inst.dist(1, 1) + inst.dist(1, 0);
        let report = validate_solution(&inst, &Solution { routes, cost }, sem()).unwrap();
        assert!(report.violations.contains(&Violation::DuplicateCustomer { customer: 1 }));
        assert!(report.violations.contains(&Violation::MissingCustomer { customer: 2 }));
        assert!(report.violations.contains(&Violation::MissingCustomer { customer: 3 }));
    }

    #[test]
    fn structural_errors_are_not_violations() {
        let inst = Instance::basic(
            vec![[0.0, 0.0], [0.2, 0.1]],
            vec![0, 5],
            40,
            VariantFlags::cvrp(),
        );
        let bad = Solution { routes: vec![vec![7]], cost: 0.0 };
        assert_eq!(
            validate_solution(&inst, &bad, sem()),
            Err(StructureError::UnknownCustomer { route: 0, customer: 7 })
        );
        let empty = Solution { routes: vec![vec![1], vec![]], cost: 0.0 };
        assert_eq!(
            validate_solution(&inst, &empty, sem()),
            Err(StructureError::EmptyRoute { route: 1 })
        );
    }

    #[test]
    fn split_results_validate_clean_across_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0;
        for (i, flags) in VariantFlags::all_sixteen().iter().cycle().take(200).enumerate() {
            let inst = generate_instance(12, *flags, ScaleProfile::N50, 1000 + i as u64).unwrap();
            let tour = GiantTour::random(12, &mut rng);
            let res = split(&inst, &tour, sem());
            if let Some(sol) = res.to_solution(&tour) {
                let report = validate_solution(&inst, &sol, sem()).unwrap();
                assert!(
                    report.is_feasible(),
                    "variant {} seed {}: {:?}",
                    flags.canonical_name(),
                    1000 + i,
                    report.violations
                );
                checked += 1;
            }
        }
        assert!(checked > 100, "only {checked} feasible splits");
    }
}
