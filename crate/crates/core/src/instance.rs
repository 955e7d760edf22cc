//! Problem instances for the sixteen CVRP variants.
//!
//! An [`Instance`] carries every field any variant can need; fields of
//! inactive constraints hold documented placeholder values so all
//! variants share one data layout. Generation is fully seeded and
//! reproducible: each field group draws from its own ChaCha8 stream, so
//! adding or removing one group never shifts the values of another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Scheduling horizon: depot window end and the upper anchor for time
/// window placement. Recorded in every instance file.
pub const DEFAULT_HORIZON: f64 = 4.6;

/// Which side constraints are active on an instance.
///
/// The sixteen standard variants are the settings of (open, backhaul,
/// dist_limit, time_window) with `mixed_backhaul = false`. Mixed
/// backhaul refines the backhaul variant: instead of requiring all
/// deliveries before any pickup, it only requires the onboard load to
/// stay within [0, capacity] at every stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VariantFlags {
    pub open: bool,
    pub backhaul: bool,
    pub mixed_backhaul: bool,
    pub dist_limit: bool,
    pub time_window: bool,
}

/// Canonical names of the sixteen variants, in the usual table order.
pub const VARIANT_NAMES: [&str; 16] = [
    "CVRP", "OVRP", "VRPB", "VRPL", "VRPTW", "OVRPB", "OVRPL", "OVRPTW", "VRPBL", "VRPBTW",
    "VRPLTW", "OVRPBL", "OVRPBTW", "OVRPLTW", "VRPBLTW", "OVRPBLTW",
];

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown variant `{0}`; expected one of {}, optionally with MB in place of B", VARIANT_NAMES.join(", "))]
pub struct UnknownVariant(pub String);

impl VariantFlags {
    pub fn cvrp() -> Self {
        Self::default()
    }

    /// `mixed_backhaul` only makes sense as a refinement of `backhaul`.
    pub fn is_valid(&self) -> bool {
        !self.mixed_backhaul || self.backhaul
    }

    /// All sixteen standard variants, in [`VARIANT_NAMES`] order.
    pub fn all_sixteen() -> [VariantFlags; 16] {
        VARIANT_NAMES.map(|name| name.parse().expect("canonical names parse"))
    }

    pub fn canonical_name(&self) -> String {
        if !self.backhaul && !self.dist_limit && !self.time_window {
            return if self.open { "OVRP".into() } else { "CVRP".into() };
        }
        let mut name = String::new();
        if self.open {
            name.push('O');
        }
        name.push_str("VRP");
        if self.backhaul {
            name.push_str(if self.mixed_backhaul { "MB" } else { "B" });
        }
        if self.dist_limit {
            name.push('L');
        }
        if self.time_window {
            name.push_str("TW");
        }
        name
    }
}

impl std::str::FromStr for VariantFlags {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        let err = || UnknownVariant(s.to_string());
        if upper == "CVRP" {
            return Ok(VariantFlags::cvrp());
        }
        let mut flags = VariantFlags::cvrp();
        let mut rest = upper.as_str();
        if let Some(r) = rest.strip_prefix('O') {
            flags.open = true;
            rest = r;
        }
        rest = rest.strip_prefix("VRP").ok_or_else(err)?;
        if !flags.open && rest.is_empty() {
            return Err(err()); // plain "VRP" is spelled CVRP
        }
        if let Some(r) = rest.strip_prefix("MB") {
            flags.backhaul = true;
            flags.mixed_backhaul = true;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('B') {
            flags.backhaul = true;
            rest = r;
        }
        if let Some(r) = rest.strip_prefix('L') {
            flags.dist_limit = true;
            rest = r;
        }
        if let Some(r) = rest.strip_prefix("TW") {
            flags.time_window = true;
            rest = r;
        }
        if rest.is_empty() {
            Ok(flags)
        } else {
            Err(err())
        }
    }
}

impl std::fmt::Display for VariantFlags {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.canonical_name())
    }
}

/// Capacity profile used by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleProfile {
    /// Capacity 40, the 50-customer training setting.
    N50,
    /// Capacity 50, the 100-customer training setting.
    N100,
    Custom(i64),
}

impl ScaleProfile {
    pub fn capacity(self) -> i64 {
        match self {
            ScaleProfile::N50 => 40,
            ScaleProfile::N100 => 50,
            ScaleProfile::Custom(q) => q,
        }
    }

    pub fn label(self) -> String {
        match self {
            ScaleProfile::N50 => "n50".into(),
            ScaleProfile::N100 => "n100".into(),
            ScaleProfile::Custom(q) => format!("q{q}"),
        }
    }
}

impl std::str::FromStr for ScaleProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n50" => Ok(ScaleProfile::N50),
            "n100" => Ok(ScaleProfile::N100),
            other => match other.strip_prefix('q').and_then(|q| q.parse::<i64>().ok()) {
                Some(q) => Ok(ScaleProfile::Custom(q)),
                None => Err(format!("unknown profile `{s}`; expected n50, n100 or q<int>")),
            },
        }
    }
}

/// How an instance was generated, kept for reproducibility.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub variant: String,
    pub profile: String,
    pub seed: u64,
}

/// One routing problem. Node 0 is the depot, customers are 1..=n.
///
/// Placeholders for inactive constraints: time windows span `[0,
/// horizon]` with zero service everywhere, and `limit` is
/// `f64::INFINITY`. Demands are positive for deliveries (linehaul) and
/// negative for pickups (backhaul).
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub n: usize,
    /// `(x, y)` per node, inside the unit square; index 0 is the depot.
    pub coords: Vec<[f64; 2]>,
    pub demand: Vec<i64>,
    pub capacity: i64,
    pub tw_start: Vec<f64>,
    pub tw_end: Vec<f64>,
    pub service: Vec<f64>,
    pub limit: f64,
    pub horizon: f64,
    pub flags: VariantFlags,
    pub seed_info: Option<SeedInfo>,
}

impl Instance {
    /// Customers with unit-square coordinates and placeholder time and
    /// distance fields. Handy for small hand-built cases.
    pub fn basic(coords: Vec<[f64; 2]>, demand: Vec<i64>, capacity: i64, flags: VariantFlags) -> Self {
        assert_eq!(coords.len(), demand.len());
        assert!(!coords.is_empty(), "need at least the depot");
        let n = coords.len() - 1;
        Instance {
            n,
            coords,
            demand,
            capacity,
            tw_start: vec![0.0; n + 1],
            tw_end: vec![DEFAULT_HORIZON; n + 1],
            service: vec![0.0; n + 1],
            limit: f64::INFINITY,
            horizon: DEFAULT_HORIZON,
            flags,
            seed_info: None,
        }
    }

    /// Euclidean distance between nodes `i` and `j`.
    ///
    /// Panics if either index exceeds `n`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        let [xi, yi] = self.coords[i];
        let [xj, yj] = self.coords[j];
        let dx = xi - xj;
        let dy = yi - yj;
        (dx * dx + dy * dy).sqrt()
    }

    /// Largest depot-to-customer distance.
    pub fn max_depot_distance(&self) -> f64 {
        (1..=self.n).map(|c| self.dist(0, c)).fold(0.0, f64::max)
    }
}

/// One routing plan: ordered routes of customer indices, depot omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub routes: Vec<Vec<usize>>,
    pub cost: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("cannot generate an instance with zero customers")]
    EmptyInstance,
    #[error("mixed_backhaul requires backhaul")]
    InvalidFlags,
    #[error("capacity {0} is below the largest possible demand (9)")]
    CapacityTooSmall(i64),
}

// One ChaCha8 stream per field group, so the groups are independent.
const STREAM_COORDS: u64 = 0;
const STREAM_DEMANDS: u64 = 1;
const STREAM_BACKHAUL: u64 = 2;
const STREAM_SERVICE: u64 = 3;
const STREAM_TIME_WINDOWS: u64 = 4;
const STREAM_LIMIT: u64 = 5;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample one instance.
///
/// Distributions: coordinates uniform on the unit square (depot first,
/// then customers, x before y); demands uniform on {1..9}; with
/// backhauls, round(0.2 n) customers picked without replacement get
/// their demand negated; service uniform on [0.15, 0.18]; window length
/// uniform on [0.18, 0.2] with the start offset uniform on [0, horizon -
/// length]; distance limit uniform on [2 Dmax, 3] where Dmax is the
/// largest depot-customer distance. The same `(n, flags, profile, seed)`
/// always produces a bit-identical instance.
pub fn generate_instance(
    n: usize,
    flags: VariantFlags,
    profile: ScaleProfile,
    seed: u64,
) -> Result<Instance, GenerateError> {
    if n == 0 {
        return Err(GenerateError::EmptyInstance);
    }
    if !flags.is_valid() {
        return Err(GenerateError::InvalidFlags);
    }
    let capacity = profile.capacity();
    if capacity < 9 {
        return Err(GenerateError::CapacityTooSmall(capacity));
    }

    let mut coord_rng = stream_rng(seed, STREAM_COORDS);
    let mut coords = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let x = coord_rng.gen::<f64>();
        let y = coord_rng.gen::<f64>();
        coords.push([x, y]);
    }

    let mut demand = vec![0i64; n + 1];
    let mut demand_rng = stream_rng(seed, STREAM_DEMANDS);
    for d in demand.iter_mut().skip(1) {
        *d = demand_rng.gen_range(1..=9);
    }
    if flags.backhaul {
        let pickups = (0.2 * n as f64).round() as usize;
        // partial Fisher-Yates; the first `pickups` entries are the draw
        let mut idx: Vec<usize> = (1..=n).collect();
        let mut backhaul_rng = stream_rng(seed, STREAM_BACKHAUL);
        for i in 0..pickups {
            let j = backhaul_rng.gen_range(i..n);
            idx.swap(i, j);
        }
        for &c in &idx[..pickups] {
            demand[c] = -demand[c];
        }
    }

    let horizon = DEFAULT_HORIZON;
    let mut tw_start = vec![0.0; n + 1];
    let mut tw_end = vec![horizon; n + 1];
    let mut service = vec![0.0; n + 1];
    if flags.time_window {
        let mut service_rng = stream_rng(seed, STREAM_SERVICE);
        for s in service.iter_mut().skip(1) {
            *s = service_rng.gen_range(0.15..0.18);
        }
        let mut tw_rng = stream_rng(seed, STREAM_TIME_WINDOWS);
        for c in 1..=n {
            let length = tw_rng.gen_range(0.18..0.2);
            let start = tw_rng.gen_range(0.0..horizon - length);
            tw_start[c] = start;
            tw_end[c] = start + length;
        }
    }

    let mut inst = Instance {
        n,
        coords,
        demand,
        capacity,
        tw_start,
        tw_end,
        service,
        limit: f64::INFINITY,
        horizon,
        flags,
        seed_info: Some(SeedInfo {
            variant: flags.canonical_name(),
            profile: profile.label(),
            seed,
        }),
    };
    if flags.dist_limit {
        let dmax = inst.max_depot_distance();
        let mut limit_rng = stream_rng(seed, STREAM_LIMIT);
        inst.limit = limit_rng.gen_range(2.0 * dmax..3.0);
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_three_four_five() {
        let inst = Instance::basic(
            vec![[0.0, 0.0], [0.3, 0.4]],
            vec![0, 5],
            40,
            VariantFlags::cvrp(),
        );
        assert!((inst.dist(0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(inst.dist(1, 1), 0.0);
        assert_eq!(inst.dist(0, 1), inst.dist(1, 0));
    }

    #[test]
    fn generate_n50_cvrp_profile() {
        let inst = generate_instance(50, VariantFlags::cvrp(), ScaleProfile::N50, 7).unwrap();
        assert_eq!(inst.capacity, 40);
        assert_eq!(inst.n, 50);
        assert!(inst.demand[1..].iter().all(|&q| (1..=9).contains(&q)));
        assert!(inst.coords.iter().all(|&[x, y]| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)));
        assert_eq!(inst.demand[0], 0);
        assert_eq!(inst.limit, f64::INFINITY);
        assert_eq!(inst.tw_end[0], inst.horizon);
    }

    #[test]
    fn generate_single_customer_custom_capacity() {
        let inst = generate_instance(1, VariantFlags::cvrp(), ScaleProfile::Custom(9), 3).unwrap();
        assert_eq!(inst.capacity, 9);
        assert!(inst.demand[1].abs() <= inst.capacity);
    }

    #[test]
    fn generate_backhaul_counts() {
        let flags: VariantFlags = "VRPB".parse().unwrap();
        let inst = generate_instance(50, flags, ScaleProfile::N50, 11).unwrap();
        let negatives = inst.demand[1..].iter().filter(|&&q| q < 0).count();
        assert_eq!(negatives, 10);
        assert!(inst.demand[1..].iter().all(|&q| q != 0 && q.abs() <= 9));
    }

    #[test]
    fn generate_rejects_bad_requests() {
        assert_eq!(
            generate_instance(0, VariantFlags::cvrp(), ScaleProfile::N50, 1),
            Err(GenerateError::EmptyInstance)
        );
        let bad = VariantFlags {
            mixed_backhaul: true,
            ..VariantFlags::cvrp()
        };
        assert_eq!(
            generate_instance(5, bad, ScaleProfile::N50, 1),
            Err(GenerateError::InvalidFlags)
        );
        assert_eq!(
            generate_instance(5, VariantFlags::cvrp(), ScaleProfile::Custom(5), 1),
            Err(GenerateError::CapacityTooSmall(5))
        );
    }

    #[test]
    fn variant_names_round_trip() {
        for name in VARIANT_NAMES {
            let flags: VariantFlags = name.parse().unwrap();
            assert!(flags.is_valid());
            assert_eq!(flags.canonical_name(), name);
            assert!(!flags.mixed_backhaul);
        }
        let mb: VariantFlags = "OVRPMBTW".parse().unwrap();
        assert!(mb.mixed_backhaul && mb.backhaul && mb.open && mb.time_window);
        assert_eq!(mb.canonical_name(), "OVRPMBTW");
        assert!("XYZ".parse::<VariantFlags>().is_err());
        assert!("VRP".parse::<VariantFlags>().is_err());
        assert!("c vrp".parse::<VariantFlags>().is_err());
    }

    #[test]
    fn time_window_fields_only_when_active() {
        let tw: VariantFlags = "VRPTW".parse().unwrap();
        let inst = generate_instance(30, tw, ScaleProfile::N50, 5).unwrap();
        for c in 1..=30 {
            let len = inst.tw_end[c] - inst.tw_start[c];
            assert!((0.18..=0.2).contains(&len), "window length {len}");
            assert!((0.15..=0.18).contains(&inst.service[c]));
            assert!(inst.tw_start[c] >= 0.0 && inst.tw_end[c] <= inst.horizon);
        }
        let plain = generate_instance(30, VariantFlags::cvrp(), ScaleProfile::N50, 5).unwrap();
        assert!(plain.service[1..].iter().all(|&s| s == 0.0));
        assert!(plain.tw_start[1..].iter().all(|&r| r == 0.0));
        assert!(plain.tw_end[1..].iter().all(|&d| d == plain.horizon));
    }

    #[test]
    fn distance_matches_high_precision_recomputation() {
        let inst = generate_instance(50, VariantFlags::cvrp(), ScaleProfile::N50, 77).unwrap();
        for i in 0..=50 {
            for j in 0..=50 {
                let [xi, yi] = inst.coords[i];
                let [xj, yj] = inst.coords[j];
                let reference = (xi - xj).hypot(yi - yj);
                assert!((inst.dist(i, j) - reference).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn demand_magnitudes_have_the_right_mean() {
        // 200 instances x 50 customers; |q| ~ U{1..9} has mean 5 and
        // sd 2.582, so a 3-sigma band for the sample mean is +-0.0775
        let flags: VariantFlags = "VRPBLTW".parse().unwrap();
        let mut total = 0i64;
        let mut count = 0usize;
        for seed in 0..200u64 {
            let inst = generate_instance(50, flags, ScaleProfile::N50, 100_000 + seed).unwrap();
            total += inst.demand[1..].iter().map(|q| q.abs()).sum::<i64>();
            count += 50;
        }
        assert_eq!(count, 10_000);
        let mean = total as f64 / count as f64;
        assert!((mean - 5.0).abs() <= 0.0775, "sample mean {mean}");
    }

    #[test]
    fn distance_limit_range() {
        let flags: VariantFlags = "VRPL".parse().unwrap();
        for seed in 0..20 {
            let inst = generate_instance(40, flags, ScaleProfile::N50, seed).unwrap();
            let dmax = inst.max_depot_distance();
            assert!(inst.limit >= 2.0 * dmax && inst.limit <= 3.0);
        }
    }
}
