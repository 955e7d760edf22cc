//! Instance and solution files.
//!
//! Both formats are UTF-8 JSON. Floating-point numbers are written with
//! 17 significant digits so parsing reproduces the exact f64 bits; a
//! missing distance limit is stored as `null`.
//!
//! Instance file layout:
//!
//! ```json
//! {"version":1,"n":2,"flags":{"o":false,"b":false,"mb":false,"l":false,"tw":false},
//!  "capacity":40,"horizon":4.6,"depot":[x,y],
//!  "customers":[{"x":..,"y":..,"q":..,"r":..,"s":..,"d":..},..],
//!  "limit":null,"seed_info":{"variant":"CVRP","profile":"n50","seed":7}}
//! ```
//!
//! The depot's own window is implicit: `[0, horizon]` with zero service.

use crate::instance::{Instance, SeedInfo, Solution, VariantFlags};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid file: {0}")]
    Invalid(String),
    #[error("refusing to serialize a non-finite cost")]
    NonFiniteCost,
}

/// Writes every f64 with 17 significant digits.
struct SigFig17;

impl serde_json::ser::Formatter for SigFig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any value to compact JSON with 17-digit floats and a
/// trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFig17);
    value
        .serialize(&mut ser)
        .expect("in-memory json serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits utf-8")
}

pub const INSTANCE_FILE_VERSION: u32 = 1;
pub const SOLUTION_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct FlagsFile {
    o: bool,
    b: bool,
    mb: bool,
    l: bool,
    tw: bool,
}

#[derive(Serialize, Deserialize)]
struct CustomerFile {
    x: f64,
    y: f64,
    q: i64,
    r: f64,
    s: f64,
    d: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    n: usize,
    flags: FlagsFile,
    capacity: i64,
    horizon: f64,
    depot: [f64; 2],
    customers: Vec<CustomerFile>,
    limit: Option<f64>,
    seed_info: Option<SeedInfo>,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    version: u32,
    routes: Vec<Vec<usize>>,
    cost: f64,
}

pub fn serialize_instance(inst: &Instance) -> String {
    let file = InstanceFile {
        version: INSTANCE_FILE_VERSION,
        n: inst.n,
        flags: FlagsFile {
            o: inst.flags.open,
            b: inst.flags.backhaul,
            mb: inst.flags.mixed_backhaul,
            l: inst.flags.dist_limit,
            tw: inst.flags.time_window,
        },
        capacity: inst.capacity,
        horizon: inst.horizon,
        depot: inst.coords[0],
        customers: (1..=inst.n)
            .map(|c| CustomerFile {
                x: inst.coords[c][0],
                y: inst.coords[c][1],
                q: inst.demand[c],
                r: inst.tw_start[c],
                s: inst.service[c],
                d: inst.tw_end[c],
            })
            .collect(),
        limit: if inst.limit.is_finite() { Some(inst.limit) } else { None },
        seed_info: inst.seed_info.clone(),
    };
    to_json_string(&file)
}

fn invalid(msg: impl Into<String>) -> FileError {
    FileError::Invalid(msg.into())
}

fn check_unit(value: f64, what: &str) -> Result<(), FileError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(invalid(format!("{what} = {value} is outside the unit square")));
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<Instance, FileError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.version != INSTANCE_FILE_VERSION {
        return Err(invalid(format!("unsupported instance file version {}", file.version)));
    }
    if file.customers.len() != file.n {
        return Err(invalid(format!(
            "n = {} but {} customers are listed",
            file.n,
            file.customers.len()
        )));
    }
    if file.n == 0 {
        return Err(invalid("instance has no customers"));
    }
    let flags = VariantFlags {
        open: file.flags.o,
        backhaul: file.flags.b,
        mixed_backhaul: file.flags.mb,
        dist_limit: file.flags.l,
        time_window: file.flags.tw,
    };
    if !flags.is_valid() {
        return Err(invalid("flags: mb requires b"));
    }
    if file.capacity < 1 {
        return Err(invalid(format!("capacity {} must be positive", file.capacity)));
    }
    if !(file.horizon.is_finite() && file.horizon > 0.0) {
        return Err(invalid(format!("horizon {} must be positive", file.horizon)));
    }
    check_unit(file.depot[0], "depot x")?;
    check_unit(file.depot[1], "depot y")?;

    let n = file.n;
    let mut coords = Vec::with_capacity(n + 1);
    coords.push(file.depot);
    let mut demand = vec![0i64];
    let mut tw_start = vec![0.0f64];
    let mut tw_end = vec![file.horizon];
    let mut service = vec![0.0f64];
    for (i, c) in file.customers.iter().enumerate() {
        let who = format!("customer {}", i + 1);
        check_unit(c.x, &format!("{who} x"))?;
        check_unit(c.y, &format!("{who} y"))?;
        if c.q == 0 {
            return Err(invalid(format!("{who}: demand must be nonzero")));
        }
        if c.q.abs() > file.capacity {
            return Err(invalid(format!("{who}: |demand| {} exceeds capacity", c.q.abs())));
        }
        if !(c.r.is_finite() && c.s.is_finite() && c.d.is_finite()) {
            return Err(invalid(format!("{who}: non-finite time field")));
        }
        if c.r < 0.0 || c.s < 0.0 || c.d < c.r || c.d > file.horizon {
            return Err(invalid(format!(
                "{who}: window [{}, {}] with service {} is out of order or past the horizon",
                c.r, c.d, c.s
            )));
        }
        coords.push([c.x, c.y]);
        demand.push(c.q);
        tw_start.push(c.r);
        tw_end.push(c.d);
        service.push(c.s);
    }

    let limit = match file.limit {
        Some(l) if l.is_finite() && l > 0.0 => l,
        Some(l) => return Err(invalid(format!("limit {l} must be positive and finite"))),
        None => f64::INFINITY,
    };

    Ok(Instance {
        n,
        coords,
        demand,
        capacity: file.capacity,
        tw_start,
        tw_end,
        service,
        limit,
        horizon: file.horizon,
        flags,
        seed_info: file.seed_info,
    })
}

pub fn serialize_solution(sol: &Solution) -> Result<String, FileError> {
    if !sol.cost.is_finite() {
        return Err(FileError::NonFiniteCost);
    }
    Ok(to_json_string(&SolutionFile {
        version: SOLUTION_FILE_VERSION,
        routes: sol.routes.clone(),
        cost: sol.cost,
    }))
}

pub fn parse_solution(text: &str) -> Result<Solution, FileError> {
    let file: SolutionFile = serde_json::from_str(text)?;
    if file.version != SOLUTION_FILE_VERSION {
        return Err(invalid(format!("unsupported solution file version {}", file.version)));
    }
    if !file.cost.is_finite() {
        return Err(invalid("solution cost must be finite"));
    }
    Ok(Solution { routes: file.routes, cost: file.cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, ScaleProfile, VariantFlags};

    #[test]
    fn round_trip_generated_instances() {
        for (i, flags) in VariantFlags::all_sixteen().iter().enumerate() {
            let inst = generate_instance(20, *flags, ScaleProfile::N50, 40 + i as u64).unwrap();
            let text = serialize_instance(&inst);
            let back = parse_instance(&text).unwrap();
            assert_eq!(back, inst, "variant {}", flags.canonical_name());
            // serialization itself is deterministic
            assert_eq!(serialize_instance(&back), text);
        }
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let inst = generate_instance(5, VariantFlags::cvrp(), ScaleProfile::N50, 1).unwrap();
        let text = serialize_instance(&inst);
        let cut = &text[..text.len() / 2];
        assert!(parse_instance(cut).is_err());
    }

    #[test]
    fn hand_written_fixture_parses_to_stated_fields() {
        let text = r#"{
            "version": 1,
            "n": 3,
            "flags": {"o": false, "b": true, "mb": false, "l": true, "tw": false},
            "capacity": 40,
            "horizon": 4.6,
            "depot": [0.5, 0.5],
            "customers": [
                {"x": 0.25, "y": 0.5,  "q": 4,  "r": 0.0, "s": 0.0, "d": 4.6},
                {"x": 0.75, "y": 0.5,  "q": -2, "r": 0.0, "s": 0.0, "d": 4.6},
                {"x": 0.5,  "y": 0.125,"q": 9,  "r": 0.0, "s": 0.0, "d": 4.6}
            ],
            "limit": 2.5,
            "seed_info": null
        }"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.n, 3);
        assert_eq!(inst.flags.canonical_name(), "VRPBL");
        assert_eq!(inst.capacity, 40);
        assert_eq!(inst.coords[0], [0.5, 0.5]);
        assert_eq!(inst.coords[2], [0.75, 0.5]);
        assert_eq!(inst.demand, vec![0, 4, -2, 9]);
        assert_eq!(inst.limit, 2.5);
        assert_eq!(inst.tw_end[3], 4.6);
        assert!(inst.seed_info.is_none());
    }

    #[test]
    fn semantic_errors_are_diagnosed() {
        let base = r#"{"version":1,"n":1,"flags":{"o":false,"b":false,"mb":false,"l":false,"tw":false},
            "capacity":40,"horizon":4.6,"depot":[0.5,0.5],
            "customers":[{"x":0.1,"y":0.1,"q":QQ,"r":0.0,"s":0.0,"d":4.6}],
            "limit":null,"seed_info":null}"#;
        assert!(matches!(
            parse_instance(&base.replace("QQ", "0")),
            Err(FileError::Invalid(msg)) if msg.contains("nonzero")
        ));
        assert!(matches!(
            parse_instance(&base.replace("QQ", "41")),
            Err(FileError::Invalid(msg)) if msg.contains("capacity")
        ));
        assert!(matches!(
            parse_instance(&base.replace("\"x\":0.1", "\"x\":1.5").replace("QQ", "5")),
            Err(FileError::Invalid(msg)) if msg.contains("unit square")
        ));
    }

    #[test]
    fn infinite_limit_round_trips_as_null() {
        let inst = generate_instance(4, VariantFlags::cvrp(), ScaleProfile::N50, 9).unwrap();
        assert!(inst.limit.is_infinite());
        let text = serialize_instance(&inst);
        assert!(text.contains("\"limit\":null"));
        assert!(parse_instance(&text).unwrap().limit.is_infinite());
    }

    #[test]
    fn solution_round_trip_and_guards() {
        let sol = Solution { routes: vec![vec![1, 3], vec![2]], cost: 1.25 };
        let text = serialize_solution(&sol).unwrap();
        assert_eq!(parse_solution(&text).unwrap(), sol);
        let bad = Solution { routes: vec![vec![1]], cost: f64::INFINITY };
        assert!(matches!(serialize_solution(&bad), Err(FileError::NonFiniteCost)));
    }
}
