//! Reconstruction-quality metrics: geometric deviation between a candidate
//! and the true route, and the standing of the closest candidate.

use crate::attack::RankedResult;
use crate::error::{Error, Result};
use crate::geo::{haversine_km, point_segment_km, GeoPoint};
use crate::graph::{RoadGraph, VertexId};

/// Sampling step along polylines when discretizing the deviation metric.
const SAMPLE_STEP_KM: f64 = 0.05;

fn polyline(g: &RoadGraph, path: &[VertexId]) -> Result<Vec<GeoPoint>> {
    path.iter()
        .map(|&v| {
            g.vertex(v)
                .map(|vv| vv.location)
                .ok_or(Error::UnknownVertex(v))
        })
        .collect()
}

/// Vertices plus points every [`SAMPLE_STEP_KM`] along each segment.
fn sample(points: &[GeoPoint]) -> Vec<GeoPoint> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        out.push(w[0]);
        let d = haversine_km(w[0], w[1]);
        let n = (d / SAMPLE_STEP_KM).floor() as usize;
        for k in 1..=n {
            let t = k as f64 / (n + 1) as f64;
            let lat = w[0].lat_deg + t * (w[1].lat_deg - w[0].lat_deg);
            let lon = w[0].lon_deg + t * (w[1].lon_deg - w[0].lon_deg);
            if let Ok(p) = GeoPoint::new(lat, lon) {
                out.push(p);
            }
        }
    }
    if let Some(last) = points.last() {
        out.push(*last);
    }
    out
}

fn directed_max_km(from: &[GeoPoint], to: &[GeoPoint]) -> f64 {
    let mut worst = 0.0f64;
    for &p in from {
        let mut best = f64::INFINITY;
        for w in to.windows(2) {
            best = best.min(point_segment_km(p, w[0], w[1]));
            if best == 0.0 {
                break;
            }
        }
        if to.len() == 1 {
            best = haversine_km(p, to[0]);
        }
        worst = worst.max(best);
    }
    worst
}

/// Discrete symmetric Hausdorff distance between two vertex paths, in km.
///
/// Both polylines are sampled every 50 m; each sample is measured against
/// the other polyline's segments and the worst point in either direction
/// wins. Identical paths give exactly zero.
pub fn max_deviation_km(g: &RoadGraph, a: &[VertexId], b: &[VertexId]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::PathTooShort {
            need: 1,
            got: a.len().min(b.len()),
        });
    }
    let pa = polyline(g, a)?;
    let pb = polyline(g, b)?;
    if a == b {
        return Ok(0.0);
    }
    let sa = sample(&pa);
    let sb = sample(&pb);
    Ok(directed_max_km(&sa, &pb).max(directed_max_km(&sb, &pa)))
}

/// The rank of the candidate geometrically closest to the true route.
///
/// Ties on deviation resolve to the lowest rank. An empty result has no
/// standing and is an error.
pub fn closest_standing(
    g: &RoadGraph,
    result: &RankedResult,
    truth: &[VertexId],
) -> Result<usize> {
    if result.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut best_rank = 0usize;
    let mut best_dev = f64::INFINITY;
    for e in &result.entries {
        let dev = max_deviation_km(g, &e.path.vertices, truth)?;
        if dev < best_dev {
            best_dev = dev;
            best_rank = e.rank;
        }
    }
    Ok(best_rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::rank;
    use crate::eval::world::{generate_synthetic_world, WorldConfig};
    use crate::search::CandidatePath;

    fn grid_world() -> crate::eval::world::SyntheticWorld {
        let cfg = WorldConfig {
            rows: 3,
            cols: 3,
            jitter_frac: 0.0,
            trace_count: 0,
            ..WorldConfig::default()
        };
        generate_synthetic_world(&cfg, 1).unwrap()
    }

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    #[test]
    fn identical_paths_zero_deviation() {
        let w = grid_world();
        let d = max_deviation_km(&w.graph, &[v(0), v(1), v(4)], &[v(0), v(1), v(4)]).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn parallel_rows_deviate_by_spacing() {
        // rows 0 and 1 of a 1 km grid run about 1 km apart
        let w = grid_world();
        let d = max_deviation_km(&w.graph, &[v(0), v(1), v(2)], &[v(3), v(4), v(5)]).unwrap();
        assert!((d - 1.0).abs() < 0.02, "got {d}");
    }

    #[test]
    fn deviation_is_symmetric() {
        let w = grid_world();
        let a = [v(0), v(1), v(4)];
        let b = [v(0), v(3), v(4)];
        let ab = max_deviation_km(&w.graph, &a, &b).unwrap();
        let ba = max_deviation_km(&w.graph, &b, &a).unwrap();
        assert_eq!(ab, ba);
        assert!(ab > 0.0);
    }

    #[test]
    fn prefix_path_still_deviates() {
        // a strict prefix lies on the longer path but not vice versa
        let w = grid_world();
        let d = max_deviation_km(&w.graph, &[v(0), v(1)], &[v(0), v(1), v(2)]).unwrap();
        assert!(d > 0.9, "got {d}");
    }

    #[test]
    fn closest_standing_picks_true_route() {
        let w = grid_world();
        let mk = |vs: &[u64]| CandidatePath {
            vertices: vs.iter().map(|&i| VertexId(i)).collect(),
            turn_marks: vec![2],
            closed: true,
            distance_km: w
                .graph
                .path_distance_km(&vs.iter().map(|&i| VertexId(i)).collect::<Vec<_>>())
                .unwrap(),
        };
        let ranked = rank(&w.graph, vec![mk(&[0, 1, 4]), mk(&[0, 3, 4])]).unwrap();
        assert_eq!(
            closest_standing(&w.graph, &ranked, &[v(0), v(3), v(4)]).unwrap(),
            2
        );
        assert_eq!(
            closest_standing(&w.graph, &ranked, &[v(0), v(1), v(4)]).unwrap(),
            1
        );
    }

    #[test]
    fn empty_result_is_error() {
        let w = grid_world();
        let err = closest_standing(&w.graph, &RankedResult::default(), &[v(0)]).unwrap_err();
        assert!(matches!(err, Error::NoCandidates));
    }
}
