//! Heuristic giant-tour construction and improvement.
//!
//! The tours produced here are always evaluated by the splitter; local
//! search can optimize either the split cost itself or the plain tour
//! length, which makes the two objectives directly comparable under an
//! equal evaluation budget.

use crate::instance::Instance;
use crate::split::{split_impl, ConstraintSemantics, GiantTour};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Total cost of the optimal split of the tour.
    SplitCost,
    /// Length of the closed tour depot -> customers -> depot.
    TspLength,
}

/// Search effort cap. The count covers objective evaluations, whichever
/// objective is chosen, so runs with different objectives are
/// comparable. Identical inputs and seed give identical output.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub max_evaluations: usize,
    pub seed: u64,
}

impl SearchBudget {
    pub fn new(max_evaluations: usize, seed: u64) -> Self {
        assert!(max_evaluations >= 1);
        SearchBudget { max_evaluations, seed }
    }
}

/// Length of the closed giant tour through the depot.
pub fn tsp_length(inst: &Instance, order: &[usize]) -> f64 {
    let mut len = inst.dist(0, order[0]);
    for pair in order.windows(2) {
        len += inst.dist(pair[0], pair[1]);
    }
    len + inst.dist(*order.last().unwrap(), 0)
}

/// Greedy construction: from `start`, repeatedly append the nearest
/// unvisited customer, ties broken by lowest index.
pub fn nearest_neighbor_tour(inst: &Instance, start: usize) -> GiantTour {
    let n = inst.n;
    assert!((1..=n).contains(&start), "start customer {start} out of range");
    let mut visited = vec![false; n + 1];
    let mut order = Vec::with_capacity(n);
    visited[start] = true;
    order.push(start);
    let mut current = start;
    while order.len() < n {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for c in 1..=n {
            if !visited[c] {
                let d = inst.dist(current, c);
                if d < best_dist {
                    best_dist = d;
                    best = c;
                }
            }
        }
        visited[best] = true;
        order.push(best);
        current = best;
    }
    GiantTour::from_order_unchecked(order)
}

enum Move {
    /// Reverse positions i..=j.
    TwoOpt { i: usize, j: usize },
    /// Remove `len` positions at `start`, reinsert so the segment begins
    /// at `dest` (measured in the shortened tour).
    OrOpt { start: usize, len: usize, dest: usize },
}

fn enumerate_moves(n: usize) -> Vec<Move> {
    let mut moves = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            moves.push(Move::TwoOpt { i, j });
        }
    }
    for len in 1..=3usize.min(n.saturating_sub(1)) {
        for start in 0..=n - len {
            for dest in 0..=n - len {
                if dest != start {
                    moves.push(Move::OrOpt { start, len, dest });
                }
            }
        }
    }
    moves
}

fn apply_move(order: &[usize], mv: &Move) -> Vec<usize> {
    let mut next = order.to_vec();
    match *mv {
        Move::TwoOpt { i, j } => next[i..=j].reverse(),
        Move::OrOpt { start, len, dest } => {
            let segment: Vec<usize> = next.drain(start..start + len).collect();
            next.splice(dest..dest, segment);
        }
    }
    next
}

fn evaluate(
    inst: &Instance,
    order: &[usize],
    objective: Objective,
    sem: ConstraintSemantics,
    evals: &mut usize,
) -> f64 {
    *evals += 1;
    match objective {
        Objective::SplitCost => split_impl(inst, order, sem).total_cost,
        Objective::TspLength => tsp_length(inst, order),
    }
}

/// First-improvement 2-opt and Or-opt over the giant tour.
///
/// Each pass scans the move set in a seeded random order and applies
/// the first strictly improving move; the search stops at a local
/// optimum or when the budget runs out. The result never scores worse
/// than the input under the chosen objective.
pub fn local_search(
    inst: &Instance,
    tour: &GiantTour,
    objective: Objective,
    budget: &SearchBudget,
    sem: ConstraintSemantics,
) -> GiantTour {
    let n = tour.len();
    let mut order = tour.order().to_vec();
    let mut evals = 0usize;
    let mut current = evaluate(inst, &order, objective, sem, &mut evals);
    if n < 2 {
        return GiantTour::from_order_unchecked(order);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut moves = enumerate_moves(n);
    'passes: loop {
        // Fisher-Yates over the move order
        for i in (1..moves.len()).rev() {
            let j = rng.gen_range(0..=i);
            moves.swap(i, j);
        }
        for mv in &moves {
            if evals >= budget.max_evaluations {
                break 'passes;
            }
            let candidate = apply_move(&order, mv);
            let cost = evaluate(inst, &candidate, objective, sem, &mut evals);
            if cost < current {
                order = candidate;
                current = cost;
                continue 'passes;
            }
        }
        break; // full pass without improvement
    }
    GiantTour::from_order_unchecked(order)
}

/// Evaluate every cyclic rotation of `tour` (optionally also each
/// rotation reversed) by split cost and keep the best; ties go to the
/// smallest offset, non-reversed first.
pub fn rotate_best(
    inst: &Instance,
    tour: &GiantTour,
    sem: ConstraintSemantics,
    include_reversals: bool,
) -> GiantTour {
    let n = tour.len();
    let order = tour.order();
    let mut best = order.to_vec();
    let mut best_cost = split_impl(inst, order, sem).total_cost;
    let consider = |candidate: Vec<usize>, best: &mut Vec<usize>, best_cost: &mut f64| {
        let cost = split_impl(inst, &candidate, sem).total_cost;
        if cost < *best_cost {
            *best_cost = cost;
            *best = candidate;
        }
    };
    for offset in 1..n {
        let mut rotated = Vec::with_capacity(n);
        rotated.extend_from_slice(&order[offset..]);
        rotated.extend_from_slice(&order[..offset]);
        consider(rotated, &mut best, &mut best_cost);
    }
    if include_reversals {
        for offset in 0..n {
            let mut rotated = Vec::with_capacity(n);
            rotated.extend_from_slice(&order[offset..]);
            rotated.extend_from_slice(&order[..offset]);
            rotated.reverse();
            consider(rotated, &mut best, &mut best_cost);
        }
    }
    GiantTour::from_order_unchecked(best)
}
