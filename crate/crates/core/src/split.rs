//! Exact dynamic-programming split of a giant tour into vehicle routes.
//!
//! Given a permutation of all customers, `split` finds the cheapest way
//! to cut it into contiguous segments such that every segment is a
//! feasible single-vehicle route under the instance's active
//! constraints. With `p[i]` the cheapest cost of serving the first `i`
//! tour positions,
//!
//! ```text
//! p[i] = min over j < i of  p[j] + cost(segment j+1..i)
//! ```
//!
//! where an infeasible segment costs infinity. Segments are extended one
//! customer at a time, so the whole solve is O(n^2) extensions; the
//! inner loop breaks early as soon as a violation can never be repaired
//! by extending further (loads, precedence, time windows and the path
//! length against the limit are all monotone in the extension).

use crate::instance::Instance;
use rand::Rng;
use thiserror::Error;

/// Reward assigned to a tour whose split has no feasible cut.
pub const INFEASIBLE_REWARD: f64 = -1.0e6;

/// Time-window accounting mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwMode {
    /// The clock advances by travel, waiting and service; serving a
    /// customer must finish by its deadline.
    #[default]
    TravelTime,
    /// The clock advances by waiting and service only, with no travel
    /// term. Kept for comparison runs.
    ServiceOnly,
}

/// Distance-limit accounting mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LMode {
    /// The mandatory return arc of a closed route counts against the
    /// limit.
    #[default]
    IncludeReturn,
    /// Only the outbound path is measured. Kept for comparison runs.
    PathOnly,
}

/// Feasibility conventions, fixed for the lifetime of a solve and
/// recorded in every result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConstraintSemantics {
    pub tw_mode: TwMode,
    pub l_mode: LMode,
}

impl std::str::FromStr for TwMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "travel-time" => Ok(TwMode::TravelTime),
            "service-only" => Ok(TwMode::ServiceOnly),
            other => Err(format!("unknown tw mode `{other}`; expected travel-time or service-only")),
        }
    }
}

impl std::str::FromStr for LMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "include-return" => Ok(LMode::IncludeReturn),
            "path-only" => Ok(LMode::PathOnly),
            other => Err(format!("unknown l mode `{other}`; expected include-return or path-only")),
        }
    }
}

impl TwMode {
    pub fn label(self) -> &'static str {
        match self {
            TwMode::TravelTime => "travel-time",
            TwMode::ServiceOnly => "service-only",
        }
    }
}

impl LMode {
    pub fn label(self) -> &'static str {
        match self {
            LMode::IncludeReturn => "include-return",
            LMode::PathOnly => "path-only",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TourError {
    #[error("tour is empty")]
    Empty,
    #[error("tour has length {len} but the instance has {n} customers")]
    WrongLength { len: usize, n: usize },
    #[error("customer {customer} is repeated or out of range")]
    NotAPermutation { customer: usize },
}

/// A permutation of the customers 1..=n, depot excluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GiantTour(Vec<usize>);

impl GiantTour {
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self, TourError> {
        if order.is_empty() {
            return Err(TourError::Empty);
        }
        if order.len() != n {
            return Err(TourError::WrongLength { len: order.len(), n });
        }
        let mut seen = vec![false; n + 1];
        for &c in &order {
            if c == 0 || c > n || seen[c] {
                return Err(TourError::NotAPermutation { customer: c });
            }
            seen[c] = true;
        }
        Ok(GiantTour(order))
    }

    /// Customers in index order.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        GiantTour((1..=n).collect())
    }

    /// Uniformly random permutation drawn from `rng`.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1);
        let mut order: Vec<usize> = (1..=n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        GiantTour(order)
    }

    /// Callers must pass a valid permutation of 1..=len.
    pub(crate) fn from_order_unchecked(order: Vec<usize>) -> Self {
        GiantTour(order)
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_order(self) -> Vec<usize> {
        self.0
    }
}

/// Outcome of one split.
///
/// `boundaries` holds the end position (exclusive) of each route in tour
/// coordinates; route `k` covers `tour[boundaries[k-1]..boundaries[k]]`
/// with an implicit leading 0. Concatenating the segments reproduces the
/// input tour. When no feasible cut exists, `feasible` is false,
/// `total_cost` is infinity and both vectors are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub total_cost: f64,
    pub boundaries: Vec<usize>,
    pub route_costs: Vec<f64>,
    pub feasible: bool,
    pub sem: ConstraintSemantics,
}

impl SplitResult {
    pub fn num_routes(&self) -> usize {
        self.boundaries.len()
    }

    /// Materialize the routes; `None` when infeasible.
    pub fn to_solution(&self, tour: &GiantTour) -> Option<crate::instance::Solution> {
        if !self.feasible {
            return None;
        }
        let order = tour.order();
        let mut routes = Vec::with_capacity(self.boundaries.len());
        let mut from = 0;
        for &to in &self.boundaries {
            routes.push(order[from..to].to_vec());
            from = to;
        }
        Some(crate::instance::Solution {
            routes,
            cost: self.total_cost,
        })
    }
}

enum Extend {
    /// Segment ending here is a feasible route of the given total cost.
    Candidate(f64),
    /// This endpoint is ruled out (return arc breaks the limit) but a
    /// longer segment may still work.
    Skip,
    /// No extension of this segment can ever be feasible.
    Dead,
}

/// Incremental scan of one segment, extended customer by customer.
struct SegmentScan<'a> {
    inst: &'a Instance,
    sem: ConstraintSemantics,
    prev: usize,
    line_load: i64,
    pickup_load: i64,
    seen_pickup: bool,
    net: i64,
    min_net: i64,
    clock: f64,
    path: f64,
}

impl<'a> SegmentScan<'a> {
    fn new(inst: &'a Instance, sem: ConstraintSemantics) -> Self {
        SegmentScan {
            inst,
            sem,
            prev: 0,
            line_load: 0,
            pickup_load: 0,
            seen_pickup: false,
            net: 0,
            min_net: 0,
            clock: 0.0,
            path: 0.0,
        }
    }

    fn extend(&mut self, c: usize) -> Extend {
        let inst = self.inst;
        let flags = inst.flags;
        let q = inst.demand[c];
        self.line_load += q.max(0);
        self.pickup_load += (-q).max(0);
        if flags.mixed_backhaul {
            // The vehicle leaves the depot holding the segment's whole
            // linehaul total, so the peak onboard load is that total
            // minus the lowest prefix of net demand served so far.
            self.net += q;
            self.min_net = self.min_net.min(self.net);
            if self.line_load - self.min_net > inst.capacity {
                return Extend::Dead;
            }
        } else {
            if self.line_load > inst.capacity || self.pickup_load > inst.capacity {
                return Extend::Dead;
            }
            if flags.backhaul && self.seen_pickup && q > 0 {
                return Extend::Dead; // delivery after a pickup
            }
        }
        if q < 0 {
            self.seen_pickup = true;
        }

        let arc = inst.dist(self.prev, c);
        self.path += arc;
        self.prev = c;

        if flags.time_window {
            match self.sem.tw_mode {
                TwMode::TravelTime => {
                    let start = (self.clock + arc).max(inst.tw_start[c]);
                    self.clock = start + inst.service[c];
                }
                TwMode::ServiceOnly => {
                    self.clock = self.clock.max(inst.tw_start[c]) + inst.service[c];
                }
            }
            if self.clock > inst.tw_end[c] {
                return Extend::Dead;
            }
        }

        if flags.dist_limit && self.path > inst.limit {
            return Extend::Dead;
        }

        if flags.open {
            return Extend::Candidate(self.path);
        }
        let total = self.path + inst.dist(c, 0);
        if flags.dist_limit && self.sem.l_mode == LMode::IncludeReturn && total > inst.limit {
            return Extend::Skip;
        }
        Extend::Candidate(total)
    }
}

pub(crate) fn segment_cost_impl(inst: &Instance, seg: &[usize], sem: ConstraintSemantics) -> Option<f64> {
    let mut scan = SegmentScan::new(inst, sem);
    let mut cost = None;
    for &c in seg {
        cost = match scan.extend(c) {
            Extend::Dead => return None,
            Extend::Skip => None,
            Extend::Candidate(total) => Some(total),
        };
    }
    cost
}

/// Cost of serving the tour positions `start..end` (half-open, 0-based)
/// as one route, or `None` when that segment cannot be a feasible route.
///
/// The route runs depot, `tour[start]`, .., `tour[end-1]` and returns to
/// the depot unless routes are open.
pub fn segment_route_cost(
    inst: &Instance,
    tour: &GiantTour,
    start: usize,
    end: usize,
    sem: ConstraintSemantics,
) -> Option<f64> {
    assert!(start < end && end <= tour.len(), "bad segment {start}..{end}");
    segment_cost_impl(inst, &tour.order()[start..end], sem)
}

pub(crate) fn split_impl(inst: &Instance, order: &[usize], sem: ConstraintSemantics) -> SplitResult {
    let n = order.len();
    debug_assert_eq!(n, inst.n);
    let mut best = vec![f64::INFINITY; n + 1];
    let mut back = vec![usize::MAX; n + 1];
    best[0] = 0.0;
    for t in 0..n {
        if !best[t].is_finite() {
            continue;
        }
        let mut scan = SegmentScan::new(inst, sem);
        for i in t + 1..=n {
            match scan.extend(order[i - 1]) {
                Extend::Dead => break,
                Extend::Skip => continue,
                Extend::Candidate(cost) => {
                    let total = best[t] + cost;
                    // strict improvement keeps the smallest predecessor on ties
                    if total < best[i] {
                        best[i] = total;
                        back[i] = t;
                    }
                }
            }
        }
    }

    if !best[n].is_finite() {
        return SplitResult {
            total_cost: f64::INFINITY,
            boundaries: Vec::new(),
            route_costs: Vec::new(),
            feasible: false,
            sem,
        };
    }

    let mut boundaries = Vec::new();
    let mut at = n;
    while at > 0 {
        boundaries.push(at);
        at = back[at];
    }
    boundaries.reverse();

    let mut route_costs = Vec::with_capacity(boundaries.len());
    let mut from = 0;
    for &to in &boundaries {
        let cost = segment_cost_impl(inst, &order[from..to], sem)
            .expect("segment chosen by the DP must be feasible");
        route_costs.push(cost);
        from = to;
    }
    debug_assert_eq!(route_costs.iter().fold(0.0, |acc, c| acc + c), best[n]);

    SplitResult {
        total_cost: best[n],
        boundaries,
        route_costs,
        feasible: true,
        sem,
    }
}

/// Optimal split of `tour` into feasible routes.
pub fn split(inst: &Instance, tour: &GiantTour, sem: ConstraintSemantics) -> SplitResult {
    split_impl(inst, tour.order(), sem)
}

/// Negated split cost, with a large negative sentinel when the tour has
/// no feasible split, so that training can penalize such permutations.
pub fn split_reward(inst: &Instance, tour: &GiantTour, sem: ConstraintSemantics) -> f64 {
    let result = split(inst, tour, sem);
    if result.feasible {
        -result.total_cost
    } else {
        INFEASIBLE_REWARD
    }
}
