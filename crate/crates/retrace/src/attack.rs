//! Top-level pipeline: candidate generation, average-speed filtering and
//! final popularity ranking.
//!
//! Popularity mapping is decoupled: the graph passed in already carries
//! P(e) counts (usually loaded from a sidecar produced once per corpus).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cornering::{CorneringLog, TripAttributes};
use crate::error::{Error, Result};
use crate::graph::{RoadGraph, VertexId};
use crate::search::{getting_popular_paths, CandidatePath, SearchParams};

/// One ranked candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    /// 1-based; average popularity is non-increasing with rank.
    pub rank: usize,
    pub avg_popularity: f64,
    pub distance_km: f64,
    pub path: CandidatePath,
}

/// Candidate paths ordered by average popularity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub entries: Vec<RankedEntry>,
}

impl RankedResult {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Keep exactly the candidates whose distance lies in the closed band
/// `[0.9, 1.1] * s_average * total_time`.
///
/// The deletion inequalities are strict, so boundary values survive.
///
/// ```
/// use retrace::attack::speed_filter;
/// use retrace::graph::VertexId;
/// use retrace::search::CandidatePath;
///
/// // 30 km/h for 600 s puts the band at [4.5, 5.5] km
/// let path = |d: f64| CandidatePath {
///     vertices: vec![VertexId(0), VertexId(1)],
///     turn_marks: vec![1],
///     closed: true,
///     distance_km: d,
/// };
/// let kept = speed_filter(vec![path(5.0), path(5.6)], 30.0, 600);
/// assert_eq!(kept.len(), 1);
/// assert_eq!(kept[0].distance_km, 5.0);
/// ```
pub fn speed_filter(
    paths: Vec<CandidatePath>,
    s_average_kmh: f64,
    total_time_s: u64,
) -> Vec<CandidatePath> {
    let st = s_average_kmh * total_time_s as f64 / 3600.0;
    let (lo, hi) = (0.9 * st, 1.1 * st);
    paths
        .into_iter()
        .filter(|p| p.distance_km >= lo && p.distance_km <= hi)
        .collect()
}

/// The full reconstruction: search, filter by the speed band, rank.
///
/// An empty result is a valid outcome (reported, not an error); a start
/// vertex missing from the graph is an error.
pub fn retrieve_driver_paths(
    g: &RoadGraph,
    trip: &TripAttributes,
    mc: &CorneringLog,
    params: &SearchParams,
) -> Result<RankedResult> {
    if !g.contains_vertex(trip.start_vertex) {
        return Err(Error::UnknownVertex(trip.start_vertex));
    }
    let candidates = getting_popular_paths(g, trip.start_vertex, mc, params)?;
    let surviving = speed_filter(candidates, trip.s_average_kmh, trip.total_time_s);
    rank(g, surviving)
}

/// Attach 1-based ranks to an already popularity-sorted candidate list.
pub fn rank(g: &RoadGraph, paths: Vec<CandidatePath>) -> Result<RankedResult> {
    let mut entries = Vec::with_capacity(paths.len());
    for (i, path) in paths.into_iter().enumerate() {
        let avg_popularity = if path.vertices.len() >= 2 {
            g.path_avg_popularity(&path.vertices)?
        } else {
            0.0
        };
        entries.push(RankedEntry {
            rank: i + 1,
            avg_popularity,
            distance_km: path.distance_km,
            path,
        });
    }
    Ok(RankedResult { entries })
}

/// Serialized form of one result line.
#[derive(Debug, Serialize, Deserialize)]
struct ResultLine {
    rank: usize,
    avg_popularity: f64,
    distance_km: f64,
    vertices: Vec<u64>,
    turn_marks: Vec<usize>,
}

/// Write the result as JSON-lines, one object per ranked path.
pub fn write_result_jsonl(result: &RankedResult, out: &mut impl Write) -> Result<()> {
    for e in &result.entries {
        let line = ResultLine {
            rank: e.rank,
            avg_popularity: e.avg_popularity,
            distance_km: e.distance_km,
            vertices: e.path.vertices.iter().map(|v| v.0).collect(),
            turn_marks: e.path.turn_marks.clone(),
        };
        serde_json::to_writer(&mut *out, &line)?;
        writeln!(out).map_err(|err| Error::io("<writer>", err))?;
    }
    Ok(())
}

/// Read a JSON-lines result back into memory.
pub fn read_result_jsonl(source: impl std::io::BufRead) -> Result<RankedResult> {
    let mut entries = Vec::new();
    for line in source.lines() {
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ResultLine = serde_json::from_str(&line)?;
        entries.push(RankedEntry {
            rank: parsed.rank,
            avg_popularity: parsed.avg_popularity,
            distance_km: parsed.distance_km,
            path: CandidatePath {
                vertices: parsed.vertices.into_iter().map(VertexId).collect(),
                turn_marks: parsed.turn_marks,
                closed: true,
                distance_km: parsed.distance_km,
            },
        });
    }
    Ok(RankedResult { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_with_distance(d: f64) -> CandidatePath {
        CandidatePath {
            vertices: vec![VertexId(0), VertexId(1)],
            turn_marks: vec![1],
            closed: true,
            distance_km: d,
        }
    }

    #[test]
    fn band_midpoint_kept() {
        // S = 30 km/h, T = 600 s: band [4.5, 5.5] km
        let kept = speed_filter(vec![path_with_distance(5.0)], 30.0, 600);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn band_boundaries_kept_beyond_dropped() {
        let st = 30.0 * 600.0 / 3600.0; // 5.0 km
        let paths = vec![
            path_with_distance(0.9 * st),
            path_with_distance(1.1 * st),
            path_with_distance(1.1 * st + 0.001), // one meter past
            path_with_distance(0.9 * st - 0.001),
        ];
        let kept = speed_filter(paths, 30.0, 600);
        let dists: Vec<f64> = kept.iter().map(|p| p.distance_km).collect();
        assert_eq!(dists, vec![0.9 * st, 1.1 * st]);
    }

    #[test]
    fn empty_input_empty_output() {
        assert!(speed_filter(Vec::new(), 30.0, 600).is_empty());
    }

    #[test]
    fn filter_is_idempotent() {
        let paths: Vec<CandidatePath> = (0..20)
            .map(|i| path_with_distance(i as f64 * 0.5))
            .collect();
        let once = speed_filter(paths.clone(), 30.0, 600);
        let twice = speed_filter(once.clone(), 30.0, 600);
        assert_eq!(once, twice);
    }

    #[test]
    fn jsonl_round_trip() {
        let g = {
            use crate::geo::GeoPoint;
            let mut g = RoadGraph::new();
            g.add_vertex(VertexId(0), GeoPoint::new(0.0, 0.0).unwrap());
            g.add_vertex(VertexId(1), GeoPoint::new(0.0, 0.01).unwrap());
            g.add_edge(VertexId(0), VertexId(1), 50.0, Some(1.0)).unwrap();
            g
        };
        let result = rank(&g, vec![path_with_distance(1.0)]).unwrap();
        let mut buf = Vec::new();
        write_result_jsonl(&result, &mut buf).unwrap();
        let back = read_result_jsonl(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back, result);
    }
}
