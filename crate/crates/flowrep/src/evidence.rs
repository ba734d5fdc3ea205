//! Rating ingestion and aggregation into the indirect-evidence matrix.
//!
//! A rating event is one transaction judgment: `rater` judged `ratee` with a
//! ternary rating in {-1, 0, +1} and a positive criticality weight. Events
//! aggregate per ordered pair into
//!
//! ```text
//! A[ratee][rater] = 1/2 + 1/2 * (Σ rating·weight) / (Σ weight)
//! ```
//!
//! which maps the weighted mean rating affinely onto `[0, 1]`. Pairs that
//! never interacted keep the neutral value 1/2; the diagonal stays zero
//! because self-ratings are rejected at ingestion.
//!
//! The log wire format is CSV with a required header:
//!
//! ```text
//! rater,ratee,rating,weight[,timestamp]
//! ```

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::EvidenceMatrix;

/// 1-based user identifier, as used in the wire formats.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct UserId(pub u32);

impl UserId {
    /// 0-based matrix index.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        Self(index as u32 + 1)
    }
}

impl std::fmt::Display for UserId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One transaction judgment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingEvent {
    pub rater: UserId,
    pub ratee: UserId,
    /// Ternary rating: -1 negative, 0 neutral, +1 positive.
    pub rating: i8,
    /// Transaction criticality; must be positive.
    pub weight: f64,
    /// Stored for completeness; the metric does not use it.
    pub timestamp: Option<u64>,
}

/// Ordered collection of rating events over a fixed user population.
#[derive(Debug, Clone, Default)]
pub struct TransactionLog {
    user_count: usize,
    events: Vec<RatingEvent>,
}

impl TransactionLog {
    pub fn new(user_count: usize) -> Self {
        Self {
            user_count,
            events: Vec::new(),
        }
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn events(&self) -> &[RatingEvent] {
        &self.events
    }

    /// Validates and appends one event. Self-ratings, non-ternary ratings,
    /// non-positive weights and out-of-range user ids are rejected.
    pub fn push(&mut self, event: RatingEvent) -> Result<()> {
        let n = self.user_count as u32;
        for id in [event.rater, event.ratee] {
            if id.0 < 1 || id.0 > n {
                return Err(Error::InvalidInstance(format!(
                    "user id {id} outside [1,{n}]"
                )));
            }
        }
        if event.rater == event.ratee {
            return Err(Error::InvalidInstance(format!(
                "self-rating by user {} rejected",
                event.rater
            )));
        }
        if !matches!(event.rating, -1 | 0 | 1) {
            return Err(Error::InvalidInstance(format!(
                "rating {} not in {{-1, 0, +1}}",
                event.rating
            )));
        }
        if !(event.weight.is_finite() && event.weight > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "weight {} must be a positive real",
                event.weight
            )));
        }
        self.events.push(event);
        Ok(())
    }

    /// Parses the CSV wire format. The header line is required; the
    /// `timestamp` column is optional.
    pub fn from_csv_str(text: &str, user_count: usize) -> Result<Self> {
        let mut log = Self::new(user_count);
        let mut lines = text.lines().enumerate();
        let (header_no, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: "empty log file, header line required".into(),
            })?;
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        let with_timestamp = match fields.as_slice() {
            ["rater", "ratee", "rating", "weight"] => false,
            ["rater", "ratee", "rating", "weight", "timestamp"] => true,
            _ => {
                return Err(Error::Parse {
                    line: header_no + 1,
                    message: format!(
                        "expected header `rater,ratee,rating,weight[,timestamp]`, got {header:?}"
                    ),
                })
            }
        };
        for (idx, line) in lines {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let expected = if with_timestamp { 5 } else { 4 };
            // the timestamp column stays optional per record
            if parts.len() != expected && !(with_timestamp && parts.len() == 4) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {expected} fields, got {}", parts.len()),
                });
            }
            let parse_u32 = |s: &str, what: &str| -> Result<u32> {
                s.parse().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad {what} {s:?}: {e}"),
                })
            };
            let rating: i8 = parts[2].parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad rating {:?}: {e}", parts[2]),
            })?;
            let weight: f64 = parts[3].parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad weight {:?}: {e}", parts[3]),
            })?;
            let timestamp = match parts.get(4) {
                Some(s) if !s.is_empty() => Some(s.parse().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad timestamp {s:?}: {e}"),
                })?),
                _ => None,
            };
            let event = RatingEvent {
                rater: UserId(parse_u32(parts[0], "rater id")?),
                ratee: UserId(parse_u32(parts[1], "ratee id")?),
                rating,
                weight,
                timestamp,
            };
            log.push(event).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(log)
    }

    pub fn read_path(path: &Path, user_count: usize) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?, user_count)
    }

    /// Parses a log, taking the population size from `user_count` or, when
    /// absent, from the largest user id referenced.
    pub fn from_csv_str_auto(text: &str, user_count: Option<usize>) -> Result<Self> {
        let n = match user_count {
            Some(n) => n,
            None => infer_user_count(text)?,
        };
        Self::from_csv_str(text, n)
    }

    pub fn read_path_auto(path: &Path, user_count: Option<usize>) -> Result<Self> {
        Self::from_csv_str_auto(&std::fs::read_to_string(path)?, user_count)
    }
}

fn infer_user_count(text: &str) -> Result<usize> {
    let mut max_id = 0u32;
    let mut header_seen = false;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        for field in trimmed.split(',').take(2) {
            let id: u32 = field.trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad user id {:?}: {e}", field.trim()),
            })?;
            max_id = max_id.max(id);
        }
    }
    if max_id < 2 {
        return Err(Error::InvalidInstance(
            "cannot infer a population of at least 2 users from the log".into(),
        ));
    }
    Ok(max_id as usize)
}

/// Aggregates a transaction log into the indirect-evidence matrix.
///
/// For each ordered pair with at least one event, the cell is the affine map
/// of the weight-averaged rating onto `[0, 1]`; untouched pairs get the
/// neutral 1/2 and the diagonal is zero.
pub fn aggregate(log: &TransactionLog) -> Result<EvidenceMatrix> {
    let n = log.user_count();
    if n < 2 {
        return Err(Error::InvalidInstance(format!(
            "aggregation needs at least 2 users, got {n}"
        )));
    }
    // (ratee, rater) cell -> (Σ rating·weight, Σ weight)
    let mut cells: HashMap<(usize, usize), (f64, f64)> = HashMap::new();
    for event in log.events() {
        let key = (event.ratee.index(), event.rater.index());
        let cell = cells.entry(key).or_insert((0.0, 0.0));
        cell.0 += f64::from(event.rating) * event.weight;
        cell.1 += event.weight;
    }
    let mut entries = DMatrix::from_element(n, n, 0.5);
    for i in 0..n {
        entries[(i, i)] = 0.0;
    }
    for ((x, y), (rating_sum, weight_sum)) in cells {
        // weight_sum > 0 is guaranteed by ingestion validation
        let value = 0.5 + 0.5 * rating_sum / weight_sum;
        entries[(x, y)] = value.clamp(0.0, 1.0);
    }
    EvidenceMatrix::from_matrix(entries)
}

/// Outcome of the irreducibility check.
///
/// `component` is empty when the matrix is irreducible; otherwise it lists
/// the 0-based members of one strongly connected component that does not
/// cover the whole graph.
#[derive(Debug, Clone, Serialize)]
pub struct IrreducibilityReport {
    pub irreducible: bool,
    pub component: Vec<usize>,
}

/// Checks whether the digraph with an edge x→y whenever `A[x][y] > 0` is
/// strongly connected (matrix irreducibility).
pub fn check_irreducible(a: &EvidenceMatrix) -> IrreducibilityReport {
    let n = a.n();
    let forward = reachable_from(a, 0, false);
    let backward = reachable_from(a, 0, true);
    if forward.iter().all(|&r| r) && backward.iter().all(|&r| r) {
        return IrreducibilityReport {
            irreducible: true,
            component: Vec::new(),
        };
    }
    // the strongly connected component of vertex 0 is a proper subset here
    let component = (0..n).filter(|&v| forward[v] && backward[v]).collect();
    IrreducibilityReport {
        irreducible: false,
        component,
    }
}

fn reachable_from(a: &EvidenceMatrix, start: usize, reverse: bool) -> Vec<bool> {
    let n = a.n();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            let edge = if reverse { a.get(w, v) } else { a.get(v, w) };
            if edge > 0.0 && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}
