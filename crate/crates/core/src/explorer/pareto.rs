//! Pareto-frontier extraction over design points.
//!
//! The core routine works on raw objective rows so it can be checked
//! against a brute-force dominance oracle; a typed wrapper maps design
//! points onto named objectives with their fixed optimization directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explorer::grid::DesignPoint;

/// Whether an objective is better small or better large.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Named objectives a [`DesignPoint`] can compete on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointObjective {
    TestError,
    ThroughputFps,
    MemoryBits,
    CAvg,
}

impl PointObjective {
    pub fn direction(self) -> Direction {
        match self {
            PointObjective::TestError => Direction::Minimize,
            PointObjective::ThroughputFps => Direction::Maximize,
            PointObjective::MemoryBits => Direction::Minimize,
            PointObjective::CAvg => Direction::Minimize,
        }
    }

    /// The point's value on this objective; `None` when the point was not
    /// trained (estimate-only or failed) and the objective needs accuracy.
    pub fn value(self, p: &DesignPoint) -> Option<f64> {
        match self {
            PointObjective::TestError => p.test_error,
            PointObjective::ThroughputFps => Some(p.throughput_fps),
            PointObjective::MemoryBits => Some(p.memory_bits as f64),
            PointObjective::CAvg => Some(p.c_avg),
        }
    }
}

impl std::fmt::Display for PointObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PointObjective::TestError => "test_error",
            PointObjective::ThroughputFps => "throughput_fps",
            PointObjective::MemoryBits => "memory_bits",
            PointObjective::CAvg => "c_avg",
        })
    }
}

impl std::str::FromStr for PointObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<PointObjective> {
        match s.trim().to_ascii_lowercase().as_str() {
            "test_error" | "error" => Ok(PointObjective::TestError),
            "throughput_fps" | "throughput" => Ok(PointObjective::ThroughputFps),
            "memory_bits" | "memory" => Ok(PointObjective::MemoryBits),
            "c_avg" | "resource" => Ok(PointObjective::CAvg),
            other => Err(Error::arg(format!(
                "unknown objective '{other}' (expected test_error, throughput_fps, memory_bits, or c_avg)"
            ))),
        }
    }
}

/// A frontier over a point list: which indices are non-dominated under
/// which objectives. Indices refer to the list the frontier was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub objectives: Vec<PointObjective>,
    /// Ascending indices of the non-dominated points.
    pub members: Vec<usize>,
}

impl ParetoFront {
    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `a` dominates `b` iff it is no worse on every objective and strictly
/// better on at least one. Equal rows do not dominate each other.
pub fn dominates(a: &[f64], b: &[f64], directions: &[Direction]) -> bool {
    debug_assert_eq!(a.len(), directions.len());
    debug_assert_eq!(b.len(), directions.len());
    let mut strictly_better = false;
    for ((&va, &vb), dir) in a.iter().zip(b).zip(directions) {
        let (va, vb) = match dir {
            Direction::Minimize => (va, vb),
            Direction::Maximize => (vb, va),
        };
        if va > vb {
            return false;
        }
        if va < vb {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Indices of the non-dominated rows, ascending.
///
/// Rows are lexicographically sorted in canonical (all-minimize) space and
/// scanned once: in that order a row can only be dominated by rows sorted
/// before it, so each candidate is checked against the frontier built so
/// far rather than against every other row.
pub fn non_dominated(rows: &[Vec<f64>], directions: &[Direction]) -> Result<Vec<usize>> {
    if rows.is_empty() {
        return Err(Error::arg("pareto frontier of an empty point set"));
    }
    if directions.is_empty() {
        return Err(Error::arg("pareto frontier needs at least one objective"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != directions.len() {
            return Err(Error::shape(format!(
                "objective row {i} has {} values, expected {}",
                row.len(),
                directions.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg(format!("objective row {i} contains a non-finite value")));
        }
    }

    // Canonical space: negate maximized axes so everything minimizes.
    let canon: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(directions)
                .map(|(&v, d)| match d {
                    Direction::Minimize => v,
                    Direction::Maximize => -v,
                })
                .collect()
        })
        .collect();
    let all_min = vec![Direction::Minimize; directions.len()];

    let mut order: Vec<usize> = (0..canon.len()).collect();
    order.sort_by(|&a, &b| {
        canon[a]
            .iter()
            .zip(&canon[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut front: Vec<usize> = Vec::new();
    'candidates: for &i in &order {
        for &j in &front {
            if dominates(&canon[j], &canon[i], &all_min) {
                continue 'candidates;
            }
        }
        front.push(i);
    }
    front.sort_unstable();
    Ok(front)
}

/// Frontier of `points` under `objectives`. Points missing a value on any
/// requested objective (untrained points competing on accuracy) cannot be
/// members and do not dominate anyone; they are simply off the frontier.
pub fn pareto_front(points: &[DesignPoint], objectives: &[PointObjective]) -> Result<ParetoFront> {
    if points.is_empty() {
        return Err(Error::arg("pareto frontier of an empty point set"));
    }
    if objectives.is_empty() {
        return Err(Error::arg("pareto frontier needs at least one objective"));
    }
    let mut rows = Vec::new();
    let mut owners = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let row: Option<Vec<f64>> = objectives.iter().map(|o| o.value(p)).collect();
        if let Some(row) = row {
            rows.push(row);
            owners.push(i);
        }
    }
    if rows.is_empty() {
        return Err(Error::arg(format!(
            "no point carries all requested objectives ({})",
            objectives
                .iter()
                .map(|o| o.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let directions: Vec<Direction> = objectives.iter().map(|o| o.direction()).collect();
    let members = non_dominated(&rows, &directions)?
        .into_iter()
        .map(|local| owners[local])
        .collect();
    Ok(ParetoFront {
        objectives: objectives.to_vec(),
        members,
    })
}
