//! Seed-deterministic synthetic road worlds: a perturbed grid with highway
//! corridors and a GPS trace corpus generated by biased random walks.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::graph::{RoadGraph, VertexId};
use crate::popularity::{Trace, TraceCorpus};

/// Kilometers per degree of latitude.
const KM_PER_DEG: f64 = std::f64::consts::PI * crate::geo::EARTH_RADIUS_KM / 180.0;

/// Coarse road taxonomy used by the trip-type analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoadClass {
    Residential,
    Highway,
}

/// Parameters of the generated world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub rows: usize,
    pub cols: usize,
    /// Nominal grid spacing, kilometers.
    pub cell_km: f64,
    pub residential_speed_kmh: f64,
    pub highway_speed_kmh: f64,
    /// Grid rows whose horizontal edges are highways.
    pub highway_rows: Vec<usize>,
    /// Grid columns whose vertical edges are highways.
    pub highway_cols: Vec<usize>,
    /// Vertex jitter as a fraction of the cell size; keep below ~0.15 so
    /// grid corners stay above the turn threshold and straights below it.
    pub jitter_frac: f64,
    /// Random walks in the trace corpus.
    pub trace_count: usize,
    /// Edges per walk.
    pub trace_len: usize,
    /// Relative weight of highway edges during walks (popularity skew).
    pub highway_bias: f64,
    /// GPS fixes emitted per traversed edge.
    pub points_per_edge: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            rows: 6,
            cols: 6,
            cell_km: 1.0,
            residential_speed_kmh: 50.0,
            highway_speed_kmh: 90.0,
            highway_rows: vec![2],
            highway_cols: vec![3],
            jitter_frac: 0.08,
            trace_count: 40,
            trace_len: 30,
            highway_bias: 10.0,
            points_per_edge: 3,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid must be at least 2x2, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.cell_km > 0.0) {
            return Err(Error::InvalidConfig("cell_km must be positive".into()));
        }
        if !(0.0..=0.3).contains(&self.jitter_frac) {
            return Err(Error::InvalidConfig(
                "jitter_frac must lie in [0, 0.3]".into(),
            ));
        }
        if !(self.residential_speed_kmh > 0.0 && self.highway_speed_kmh > 0.0) {
            return Err(Error::InvalidConfig("speeds must be positive".into()));
        }
        Ok(())
    }
}

/// A generated world: graph (popularity unmapped), trace corpus and the
/// per-edge road-class labels.
#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub graph: RoadGraph,
    pub corpus: TraceCorpus,
    pub classes: BTreeMap<(VertexId, VertexId), RoadClass>,
}

impl SyntheticWorld {
    pub fn edge_class(&self, from: VertexId, to: VertexId) -> Option<RoadClass> {
        self.classes.get(&(from, to)).copied()
    }
}

/// Generate a perturbed-grid world. Identical `(config, seed)` pairs give
/// bit-identical worlds.
pub fn generate_synthetic_world(config: &WorldConfig, seed: u64) -> Result<SyntheticWorld> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell_deg = config.cell_km / KM_PER_DEG;
    let jitter = config.jitter_frac * cell_deg;

    let mut graph = RoadGraph::new();
    let id = |r: usize, c: usize| VertexId((r * config.cols + c) as u64);
    for r in 0..config.rows {
        for c in 0..config.cols {
            let dlat = if jitter > 0.0 {
                rng.gen_range(-jitter..jitter)
            } else {
                0.0
            };
            let dlon = if jitter > 0.0 {
                rng.gen_range(-jitter..jitter)
            } else {
                0.0
            };
            let p = GeoPoint::new(r as f64 * cell_deg + dlat, c as f64 * cell_deg + dlon)?;
            graph.add_vertex(id(r, c), p);
        }
    }

    let mut classes = BTreeMap::new();
    let add_road = |graph: &mut RoadGraph,
                        classes: &mut BTreeMap<(VertexId, VertexId), RoadClass>,
                        a: VertexId,
                        b: VertexId,
                        class: RoadClass|
     -> Result<()> {
        let speed = match class {
            RoadClass::Residential => config.residential_speed_kmh,
            RoadClass::Highway => config.highway_speed_kmh,
        };
        graph.add_edge(a, b, speed, None)?;
        graph.add_edge(b, a, speed, None)?;
        classes.insert((a, b), class);
        classes.insert((b, a), class);
        Ok(())
    };
    for r in 0..config.rows {
        for c in 0..config.cols {
            if c + 1 < config.cols {
                let class = if config.highway_rows.contains(&r) {
                    RoadClass::Highway
                } else {
                    RoadClass::Residential
                };
                add_road(&mut graph, &mut classes, id(r, c), id(r, c + 1), class)?;
            }
            if r + 1 < config.rows {
                let class = if config.highway_cols.contains(&c) {
                    RoadClass::Highway
                } else {
                    RoadClass::Residential
                };
                add_road(&mut graph, &mut classes, id(r, c), id(r + 1, c), class)?;
            }
        }
    }

    let corpus = generate_corpus(&graph, &classes, config, &mut rng)?;
    Ok(SyntheticWorld {
        graph,
        corpus,
        classes,
    })
}

fn generate_corpus(
    graph: &RoadGraph,
    classes: &BTreeMap<(VertexId, VertexId), RoadClass>,
    config: &WorldConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TraceCorpus> {
    let vertices: Vec<VertexId> = graph.vertices().map(|v| v.id).collect();
    // start walks preferentially at highway-incident vertices so corridor
    // traffic dominates residential traffic
    let start_weights: Vec<f64> = vertices
        .iter()
        .map(|&v| {
            let on_highway = graph
                .successors(v)
                .map(|succs| {
                    succs
                        .iter()
                        .any(|e| classes.get(&(e.from, e.to)) == Some(&RoadClass::Highway))
                })
                .unwrap_or(false);
            if on_highway {
                config.highway_bias
            } else {
                1.0
            }
        })
        .collect();
    let start_total: f64 = start_weights.iter().sum();

    // hop distance to the nearest highway-incident vertex; off-highway
    // steps prefer edges that shrink it, so walks revert to the corridor
    // instead of wandering residential streets indefinitely
    let mut dist_to_highway: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut frontier: Vec<VertexId> = vertices
        .iter()
        .zip(&start_weights)
        .filter(|(_, w)| **w > 1.0)
        .map(|(v, _)| *v)
        .collect();
    for &v in &frontier {
        dist_to_highway.insert(v, 0);
    }
    let mut depth = 0usize;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for v in frontier {
            for e in graph.successors(v)? {
                if let std::collections::btree_map::Entry::Vacant(slot) =
                    dist_to_highway.entry(e.to)
                {
                    slot.insert(depth);
                    next.push(e.to);
                }
            }
        }
        frontier = next;
    }

    let mut traces = Vec::with_capacity(config.trace_count);
    for i in 0..config.trace_count {
        let mut points = Vec::new();
        let mut current = {
            let mut pick = rng.gen_range(0.0..start_total);
            let mut chosen = vertices.len() - 1;
            for (j, w) in start_weights.iter().enumerate() {
                if pick < *w {
                    chosen = j;
                    break;
                }
                pick -= w;
            }
            vertices[chosen]
        };
        let mut previous: Option<VertexId> = None;
        for _ in 0..config.trace_len {
            let succs = graph.successors(current)?;
            let choices: Vec<_> = succs
                .iter()
                .filter(|e| Some(e.to) != previous)
                .collect();
            let choices = if choices.is_empty() {
                succs.iter().collect()
            } else {
                choices
            };
            if choices.is_empty() {
                break;
            }
            let here = dist_to_highway.get(&current).copied().unwrap_or(usize::MAX);
            let weights: Vec<f64> = choices
                .iter()
                .map(|e| match classes.get(&(e.from, e.to)) {
                    Some(RoadClass::Highway) => config.highway_bias,
                    _ => {
                        let there =
                            dist_to_highway.get(&e.to).copied().unwrap_or(usize::MAX);
                        if there < here {
                            3.0
                        } else {
                            1.0
                        }
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            let mut pick = rng.gen_range(0.0..total);
            let mut chosen = 0;
            for (j, w) in weights.iter().enumerate() {
                if pick < *w {
                    chosen = j;
                    break;
                }
                pick -= w;
            }
            let edge = choices[chosen];
            let a = graph.vertex(edge.from).unwrap().location;
            let b = graph.vertex(edge.to).unwrap().location;
            for k in 0..config.points_per_edge {
                let t = (k as f64 + 0.5) / config.points_per_edge as f64;
                points.push(GeoPoint::new(
                    a.lat_deg + t * (b.lat_deg - a.lat_deg),
                    a.lon_deg + t * (b.lon_deg - a.lon_deg),
                )?);
            }
            previous = Some(current);
            current = edge.to;
        }
        traces.push(Trace {
            name: format!("walk{i:04}"),
            points,
        });
    }
    Ok(TraceCorpus { traces })
}

/// Fold popularity onto undirected roads: both directions of a twin pair
/// get the sum of their counts. Trace fixes lie on the shared segment
/// geometry, so the nearest-edge tie-break parks every count on the
/// lower-keyed direction; this restores a per-road traffic proxy.
pub fn symmetrize_popularity(g: &RoadGraph) -> RoadGraph {
    let mut counts: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();
    for e in g.edges() {
        let total = e.popularity
            + g.edge(e.to, e.from)
                .map(|twin| twin.popularity)
                .unwrap_or(0);
        counts.insert((e.from, e.to), total);
    }
    g.clone().with_popularities(&counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::map_popularities;

    #[test]
    fn small_world_counts() {
        let cfg = WorldConfig {
            rows: 2,
            cols: 2,
            trace_count: 0,
            ..WorldConfig::default()
        };
        let w = generate_synthetic_world(&cfg, 1).unwrap();
        assert_eq!(w.graph.vertex_count(), 4);
        assert_eq!(w.graph.edge_count(), 8);
    }

    #[test]
    fn same_seed_identical_world() {
        let cfg = WorldConfig::default();
        let a = generate_synthetic_world(&cfg, 42).unwrap();
        let b = generate_synthetic_world(&cfg, 42).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.classes, b.classes);
    }

    #[test]
    fn different_seed_different_world() {
        let cfg = WorldConfig::default();
        let a = generate_synthetic_world(&cfg, 1).unwrap();
        let b = generate_synthetic_world(&cfg, 2).unwrap();
        assert_ne!(a.graph, b.graph);
    }

    #[test]
    fn invalid_dims_rejected() {
        let cfg = WorldConfig {
            rows: 1,
            ..WorldConfig::default()
        };
        assert!(generate_synthetic_world(&cfg, 1).is_err());
    }

    #[test]
    fn highway_skew_shows_in_mapped_popularity() {
        let cfg = WorldConfig {
            rows: 5,
            cols: 5,
            highway_rows: vec![2],
            highway_cols: vec![],
            trace_count: 60,
            trace_len: 40,
            highway_bias: 10.0,
            ..WorldConfig::default()
        };
        let w = generate_synthetic_world(&cfg, 9).unwrap();
        let (mapped, _) = map_popularities(&w.graph, &w.corpus, 0.5, 0.5).unwrap();
        let mapped = symmetrize_popularity(&mapped);
        let (mut hw_sum, mut hw_n, mut res_sum, mut res_n) = (0u64, 0u64, 0u64, 0u64);
        for e in mapped.edges() {
            match w.classes[&(e.from, e.to)] {
                RoadClass::Highway => {
                    hw_sum += e.popularity;
                    hw_n += 1;
                }
                RoadClass::Residential => {
                    res_sum += e.popularity;
                    res_n += 1;
                }
            }
        }
        let hw_avg = hw_sum as f64 / hw_n as f64;
        let res_avg = res_sum as f64 / res_n as f64;
        assert!(
            hw_avg >= 3.0 * res_avg,
            "highway avg {hw_avg} not >= 3x residential avg {res_avg}"
        );
    }

    #[test]
    fn symmetrize_sums_twin_pairs() {
        let cfg = WorldConfig {
            rows: 2,
            cols: 2,
            trace_count: 0,
            ..WorldConfig::default()
        };
        let w = generate_synthetic_world(&cfg, 3).unwrap();
        let mut counts = BTreeMap::new();
        counts.insert((VertexId(0), VertexId(1)), 5u64);
        counts.insert((VertexId(1), VertexId(0)), 2u64);
        let g = w.graph.with_popularities(&counts);
        let s = symmetrize_popularity(&g);
        assert_eq!(s.edge(VertexId(0), VertexId(1)).unwrap().popularity, 7);
        assert_eq!(s.edge(VertexId(1), VertexId(0)).unwrap().popularity, 7);
    }
}
