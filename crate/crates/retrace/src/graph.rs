//! The directed road-network model: intersections, roads and their weights.
//!
//! Every edge carries three weights: the legal speed limit, the road length
//! and a popularity count assigned by the popularity mapper. Path-level
//! aggregates (distance, average legal speed, average popularity, turn
//! count) live here too.
//!
//! A `RoadGraph` is immutable once built; popularity assignment produces a
//! new graph before any search starts, so concurrent readers need no
//! synchronization.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{bearing_deg, classify_turn, haversine_km, GeoPoint, TurnKind};

/// Opaque intersection identifier, unique within a graph.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An intersection and its location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub location: GeoPoint,
}

/// A directed road between two intersections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    /// Road length d(e), kilometers.
    pub length_km: f64,
    /// Legal speed limit W(e), km/h.
    pub legal_speed_kmh: f64,
    /// Popularity count P(e): corpus GPS fixes nearest to this road.
    pub popularity: u64,
}

/// Model bounds on road lengths and inter-turn distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphBounds {
    pub min_road_km: f64,
    pub max_road_km: f64,
    pub max_turn_km: f64,
}

impl GraphBounds {
    pub fn new(min_road_km: f64, max_road_km: f64, max_turn_km: f64) -> Result<Self> {
        if !(min_road_km > 0.0 && min_road_km <= max_road_km && min_road_km <= max_turn_km) {
            return Err(Error::InvalidValue {
                field: "GraphBounds".into(),
                message: format!(
                    "need 0 < min_road ({min_road_km}) <= max_road ({max_road_km}) \
                     and min_road <= max_turn ({max_turn_km})"
                ),
            });
        }
        Ok(GraphBounds {
            min_road_km,
            max_road_km,
            max_turn_km,
        })
    }
}

/// Directed road graph with at most one edge per ordered vertex pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoadGraph {
    vertices: BTreeMap<VertexId, Vertex>,
    edges: BTreeMap<(VertexId, VertexId), Edge>,
}

impl RoadGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: VertexId, location: GeoPoint) {
        self.vertices.insert(id, Vertex { id, location });
    }

    /// Insert a directed edge. `length_km = None` computes the great-circle
    /// distance between the endpoints.
    pub fn add_edge(
        &mut self,
        from: VertexId,
        to: VertexId,
        legal_speed_kmh: f64,
        length_km: Option<f64>,
    ) -> Result<()> {
        let loc_from = self
            .vertices
            .get(&from)
            .ok_or(Error::DanglingEdge { from, to, missing: from })?
            .location;
        let loc_to = self
            .vertices
            .get(&to)
            .ok_or(Error::DanglingEdge { from, to, missing: to })?
            .location;
        if self.edges.contains_key(&(from, to)) {
            return Err(Error::DuplicateEdge(from, to));
        }
        let length_km = match length_km {
            Some(l) if l > 0.0 => l,
            Some(l) => {
                return Err(Error::InvalidValue {
                    field: format!("edge ({from}, {to}) length_km"),
                    message: format!("must be positive, got {l}"),
                })
            }
            None => haversine_km(loc_from, loc_to),
        };
        if legal_speed_kmh <= 0.0 {
            return Err(Error::InvalidValue {
                field: format!("edge ({from}, {to}) legal_speed_kmh"),
                message: format!("must be positive, got {legal_speed_kmh}"),
            });
        }
        self.edges.insert(
            (from, to),
            Edge {
                from,
                to,
                length_km,
                legal_speed_kmh,
                popularity: 0,
            },
        );
        Ok(())
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.get(&id)
    }

    pub fn contains_vertex(&self, id: VertexId) -> bool {
        self.vertices.contains_key(&id)
    }

    pub fn edge(&self, from: VertexId, to: VertexId) -> Option<&Edge> {
        self.edges.get(&(from, to))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing edges of `v`, ordered by destination id ascending so beam
    /// tie-breaks stay deterministic.
    pub fn successors(&self, v: VertexId) -> Result<Vec<&Edge>> {
        if !self.vertices.contains_key(&v) {
            return Err(Error::UnknownVertex(v));
        }
        Ok(self
            .edges
            .range((v, VertexId(0))..=(v, VertexId(u64::MAX)))
            .map(|(_, e)| e)
            .collect())
    }

    /// Initial bearing of the edge `(from, to)`, degrees from north.
    pub fn edge_bearing_deg(&self, from: VertexId, to: VertexId) -> Result<f64> {
        let e = self
            .edges
            .get(&(from, to))
            .ok_or(Error::MissingEdge(from, to))?;
        let a = self.vertices[&e.from].location;
        let b = self.vertices[&e.to].location;
        bearing_deg(a, b)
    }

    /// Sum of edge lengths along `path`; a single-vertex path is 0 km.
    pub fn path_distance_km(&self, path: &[VertexId]) -> Result<f64> {
        if path.is_empty() {
            return Err(Error::PathTooShort { need: 1, got: 0 });
        }
        let mut total = 0.0;
        for pair in path.windows(2) {
            let e = self
                .edges
                .get(&(pair[0], pair[1]))
                .ok_or(Error::MissingEdge(pair[0], pair[1]))?;
            total += e.length_km;
        }
        Ok(total)
    }

    /// Unweighted mean of edge legal speeds: sum of W(e) over edge count.
    pub fn path_avg_legal_speed_kmh(&self, path: &[VertexId]) -> Result<f64> {
        let (sum, count) = self.edge_sum(path, |e| e.legal_speed_kmh)?;
        Ok(sum / count as f64)
    }

    /// Mean popularity over the path's edges.
    pub fn path_avg_popularity(&self, path: &[VertexId]) -> Result<f64> {
        let (sum, count) = self.edge_sum(path, |e| e.popularity as f64)?;
        Ok(sum / count as f64)
    }

    fn edge_sum(&self, path: &[VertexId], f: impl Fn(&Edge) -> f64) -> Result<(f64, usize)> {
        if path.len() < 2 {
            return Err(Error::PathTooShort {
                need: 2,
                got: path.len(),
            });
        }
        let mut sum = 0.0;
        for pair in path.windows(2) {
            let e = self
                .edges
                .get(&(pair[0], pair[1]))
                .ok_or(Error::MissingEdge(pair[0], pair[1]))?;
            sum += f(e);
        }
        Ok((sum, path.len() - 1))
    }

    /// Number of interior vertices where consecutive edge bearings form a
    /// turning event.
    pub fn turn_count(&self, path: &[VertexId]) -> Result<usize> {
        if path.len() < 2 {
            // no interior vertices, but still validate connectivity
            self.path_distance_km(path)?;
            return Ok(0);
        }
        let mut count = 0;
        for w in path.windows(3) {
            let prev = self.edge_bearing_deg(w[0], w[1])?;
            let next = self.edge_bearing_deg(w[1], w[2])?;
            if classify_turn(prev, next).kind != TurnKind::Straight {
                count += 1;
            }
        }
        // validate the final edge even when the path has exactly 2 vertices
        let last = path.len() - 1;
        if self.edges.get(&(path[last - 1], path[last])).is_none() {
            return Err(Error::MissingEdge(path[last - 1], path[last]));
        }
        Ok(count)
    }

    /// Replace popularity counts wholesale from an edge-keyed map.
    pub fn with_popularities(mut self, counts: &BTreeMap<(VertexId, VertexId), u64>) -> Self {
        for (key, edge) in self.edges.iter_mut() {
            edge.popularity = counts.get(key).copied().unwrap_or(0);
        }
        self
    }

    /// Check every edge length against the model bounds.
    pub fn validate_bounds(&self, bounds: &GraphBounds) -> Result<()> {
        let offending: Vec<String> = self
            .edges
            .values()
            .filter(|e| e.length_km < bounds.min_road_km || e.length_km > bounds.max_road_km)
            .map(|e| format!("({}, {}) length {:.6} km", e.from, e.to, e.length_km))
            .collect();
        if offending.is_empty() {
            Ok(())
        } else {
            Err(Error::BoundsViolation(offending.join("; ")))
        }
    }

    /// Geographic bounding box over all vertices.
    pub fn bounding_box(&self) -> Result<(GeoPoint, GeoPoint)> {
        let mut it = self.vertices.values();
        let first = it.next().ok_or(Error::EmptyGraph)?;
        let mut min_lat = first.location.lat_deg;
        let mut max_lat = min_lat;
        let mut min_lon = first.location.lon_deg;
        let mut max_lon = min_lon;
        for v in it {
            min_lat = min_lat.min(v.location.lat_deg);
            max_lat = max_lat.max(v.location.lat_deg);
            min_lon = min_lon.min(v.location.lon_deg);
            max_lon = max_lon.max(v.location.lon_deg);
        }
        Ok((
            GeoPoint {
                lat_deg: min_lat,
                lon_deg: min_lon,
            },
            GeoPoint {
                lat_deg: max_lat,
                lon_deg: max_lon,
            },
        ))
    }
}

// ---------------------------------------------------------------------------
// Canonical file formats
// ---------------------------------------------------------------------------

/// Load a graph from the canonical nodes/edges CSV formats.
///
/// Nodes: header `id,lat,lon`. Edges: header `from,to,legal_speed_kmh,length_km`
/// where `length_km` may be empty (computed from the endpoints). Popularity is
/// not part of the edge file; see the sidecar format.
pub fn load_graph(
    nodes: impl Read,
    edges: impl Read,
    bounds: Option<&GraphBounds>,
) -> Result<RoadGraph> {
    let mut g = RoadGraph::new();
    let mut rdr = csv::Reader::from_reader(nodes);
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2; // header is line 1
        let rec = rec.map_err(|e| parse_err("nodes", line, e.to_string()))?;
        if rec.len() != 3 {
            return Err(parse_err("nodes", line, format!("expected 3 fields, got {}", rec.len())));
        }
        let id: u64 = parse_field(&rec[0], "nodes", line, "id")?;
        let lat: f64 = parse_field(&rec[1], "nodes", line, "lat")?;
        let lon: f64 = parse_field(&rec[2], "nodes", line, "lon")?;
        let p = GeoPoint::new(lat, lon)
            .map_err(|e| parse_err("nodes", line, e.to_string()))?;
        g.add_vertex(VertexId(id), p);
    }

    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(edges);
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err("edges", line, e.to_string()))?;
        if rec.len() < 3 {
            return Err(parse_err("edges", line, format!("expected >= 3 fields, got {}", rec.len())));
        }
        let from: u64 = parse_field(&rec[0], "edges", line, "from")?;
        let to: u64 = parse_field(&rec[1], "edges", line, "to")?;
        let speed: f64 = parse_field(&rec[2], "edges", line, "legal_speed_kmh")?;
        let length = match rec.get(3) {
            None | Some("") => None,
            Some(s) => Some(parse_field::<f64>(s, "edges", line, "length_km")?),
        };
        g.add_edge(VertexId(from), VertexId(to), speed, length)?;
    }

    if let Some(b) = bounds {
        g.validate_bounds(b)?;
    }
    Ok(g)
}

fn parse_err(path: &str, line: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message,
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, path: &str, line: usize, field: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad {field}: {s:?}")))
}

/// Write the graph back out in the canonical nodes/edges formats.
pub fn save_graph(g: &RoadGraph, nodes: &mut impl Write, edges: &mut impl Write) -> Result<()> {
    let io_err = |e: std::io::Error| Error::io("<writer>", e);
    writeln!(nodes, "id,lat,lon").map_err(io_err)?;
    for v in g.vertices() {
        writeln!(nodes, "{},{},{}", v.id, v.location.lat_deg, v.location.lon_deg)
            .map_err(io_err)?;
    }
    writeln!(edges, "from,to,legal_speed_kmh,length_km").map_err(io_err)?;
    for e in g.edges() {
        writeln!(edges, "{},{},{},{}", e.from, e.to, e.legal_speed_kmh, e.length_km)
            .map_err(io_err)?;
    }
    Ok(())
}

/// Read a popularity sidecar (`from,to,popularity`) into an edge-keyed map.
pub fn load_popularity_sidecar(source: impl Read) -> Result<BTreeMap<(VertexId, VertexId), u64>> {
    let mut counts = BTreeMap::new();
    let reader = BufReader::new(source);
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| parse_err("popularity", line_no, e.to_string()))?;
        if i == 0 {
            if line.trim() != "from,to,popularity" {
                return Err(parse_err("popularity", 1, format!("bad header: {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(parse_err("popularity", line_no, format!("expected 3 fields: {line:?}")));
        }
        let from: u64 = parse_field(parts[0], "popularity", line_no, "from")?;
        let to: u64 = parse_field(parts[1], "popularity", line_no, "to")?;
        let pop: u64 = parse_field(parts[2], "popularity", line_no, "popularity")?;
        counts.insert((VertexId(from), VertexId(to)), pop);
    }
    Ok(counts)
}

/// Write a popularity sidecar covering every edge of `g`.
pub fn save_popularity_sidecar(g: &RoadGraph, out: &mut impl Write) -> Result<()> {
    let io_err = |e: std::io::Error| Error::io("<writer>", e);
    writeln!(out, "from,to,popularity").map_err(io_err)?;
    for e in g.edges() {
        writeln!(out, "{},{},{}", e.from, e.to, e.popularity).map_err(io_err)?;
    }
    Ok(())
}

/// Convenience: load graph plus optional popularity sidecar from disk paths.
pub fn load_graph_files(
    nodes_path: &Path,
    edges_path: &Path,
    popularity_path: Option<&Path>,
) -> Result<RoadGraph> {
    let nodes = std::fs::File::open(nodes_path).map_err(|e| Error::io(nodes_path, e))?;
    let edges = std::fs::File::open(edges_path).map_err(|e| Error::io(edges_path, e))?;
    let mut g = load_graph(nodes, edges, None)?;
    if let Some(p) = popularity_path {
        let f = std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
        let counts = load_popularity_sidecar(f)?;
        g = g.with_popularities(&counts);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    /// rows x cols grid, `cell_deg` spacing, bidirectional edges, speed 50.
    pub(crate) fn grid(rows: u64, cols: u64, cell_deg: f64) -> RoadGraph {
        let mut g = RoadGraph::new();
        for r in 0..rows {
            for c in 0..cols {
                g.add_vertex(
                    v(r * cols + c),
                    GeoPoint::new(r as f64 * cell_deg, c as f64 * cell_deg).unwrap(),
                );
            }
        }
        for r in 0..rows {
            for c in 0..cols {
                let id = r * cols + c;
                if c + 1 < cols {
                    g.add_edge(v(id), v(id + 1), 50.0, None).unwrap();
                    g.add_edge(v(id + 1), v(id), 50.0, None).unwrap();
                }
                if r + 1 < rows {
                    g.add_edge(v(id), v(id + cols), 50.0, None).unwrap();
                    g.add_edge(v(id + cols), v(id), 50.0, None).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn load_explicit_length() {
        let nodes = "id,lat,lon\n1,0,0\n2,0,0.01\n";
        let edges = "from,to,legal_speed_kmh,length_km\n1,2,50,1.5\n";
        let g = load_graph(nodes.as_bytes(), edges.as_bytes(), None).unwrap();
        assert_eq!(g.edge(v(1), v(2)).unwrap().length_km, 1.5);
    }

    #[test]
    fn load_computed_length() {
        let nodes = "id,lat,lon\n1,0,0\n2,1,0\n";
        let edges = "from,to,legal_speed_kmh,length_km\n1,2,50,\n";
        let g = load_graph(nodes.as_bytes(), edges.as_bytes(), None).unwrap();
        assert_abs_diff_eq!(
            g.edge(v(1), v(2)).unwrap().length_km,
            111.19492664455873,
            epsilon = 1e-9
        );
    }

    #[test]
    fn load_dangling_edge_is_error() {
        let nodes = "id,lat,lon\n1,0,0\n";
        let edges = "from,to,legal_speed_kmh,length_km\n1,2,50,1\n";
        let err = load_graph(nodes.as_bytes(), edges.as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::DanglingEdge { .. }));
    }

    #[test]
    fn duplicate_edge_is_error() {
        let mut g = RoadGraph::new();
        g.add_vertex(v(1), GeoPoint::new(0.0, 0.0).unwrap());
        g.add_vertex(v(2), GeoPoint::new(0.0, 0.01).unwrap());
        g.add_edge(v(1), v(2), 50.0, None).unwrap();
        assert!(matches!(
            g.add_edge(v(1), v(2), 60.0, None),
            Err(Error::DuplicateEdge(..))
        ));
    }

    #[test]
    fn successors_ordering_and_leaf() {
        let mut g = RoadGraph::new();
        for (id, lon) in [(1u64, 0.0), (7, 0.01), (3, 0.02)] {
            g.add_vertex(v(id), GeoPoint::new(0.0, lon).unwrap());
        }
        g.add_edge(v(1), v(7), 50.0, None).unwrap();
        g.add_edge(v(1), v(3), 50.0, None).unwrap();
        let succ = g.successors(v(1)).unwrap();
        assert_eq!(
            succ.iter().map(|e| e.to).collect::<Vec<_>>(),
            vec![v(3), v(7)]
        );
        assert!(g.successors(v(3)).unwrap().is_empty());
        assert!(g.successors(v(99)).is_err());
    }

    #[test]
    fn grid_interior_vertex_has_four_successors() {
        let g = grid(3, 3, 0.01);
        assert_eq!(g.successors(v(4)).unwrap().len(), 4);
    }

    #[test]
    fn path_distance() {
        let mut g = RoadGraph::new();
        for (id, lon) in [(1u64, 0.0), (2, 0.01), (3, 0.02)] {
            g.add_vertex(v(id), GeoPoint::new(0.0, lon).unwrap());
        }
        g.add_edge(v(1), v(2), 50.0, Some(1.0)).unwrap();
        g.add_edge(v(2), v(3), 50.0, Some(2.5)).unwrap();
        assert_eq!(g.path_distance_km(&[v(1)]).unwrap(), 0.0);
        assert_eq!(g.path_distance_km(&[v(1), v(2), v(3)]).unwrap(), 3.5);
        assert!(matches!(
            g.path_distance_km(&[v(1), v(3)]),
            Err(Error::MissingEdge(..))
        ));
    }

    #[test]
    fn grid_block_distance_is_four_cells() {
        let g = grid(3, 3, 0.01);
        let cell = g.edge(v(0), v(1)).unwrap().length_km;
        let d = g
            .path_distance_km(&[v(0), v(1), v(4), v(3), v(0)])
            .unwrap();
        assert_abs_diff_eq!(d, 4.0 * cell, epsilon = 1e-6);
    }

    #[test]
    fn avg_legal_speed_is_unweighted_mean() {
        let mut g = RoadGraph::new();
        for (id, lon) in [(1u64, 0.0), (2, 0.01), (3, 0.05)] {
            g.add_vertex(v(id), GeoPoint::new(0.0, lon).unwrap());
        }
        g.add_edge(v(1), v(2), 30.0, None).unwrap();
        g.add_edge(v(2), v(3), 90.0, None).unwrap();
        assert_eq!(g.path_avg_legal_speed_kmh(&[v(1), v(2)]).unwrap(), 30.0);
        // unweighted by length, exactly as the W-path formula divides by
        // edge count
        assert_eq!(
            g.path_avg_legal_speed_kmh(&[v(1), v(2), v(3)]).unwrap(),
            60.0
        );
        assert!(g.path_avg_legal_speed_kmh(&[v(1)]).is_err());
    }

    #[test]
    fn avg_popularity() {
        let mut g = grid(1, 4, 0.01);
        let mut counts = BTreeMap::new();
        counts.insert((v(0), v(1)), 1u64);
        counts.insert((v(1), v(2)), 1);
        counts.insert((v(2), v(3)), 4);
        g = g.with_popularities(&counts);
        assert_eq!(g.path_avg_popularity(&[v(0), v(1), v(2)]).unwrap(), 1.0);
        assert_eq!(
            g.path_avg_popularity(&[v(0), v(1), v(2), v(3)]).unwrap(),
            2.0
        );
    }

    #[test]
    fn turn_count_straight_and_corners() {
        let g = grid(3, 3, 0.01);
        // straight corridor
        assert_eq!(g.turn_count(&[v(0), v(1), v(2)]).unwrap(), 0);
        // single 90-degree corner
        assert_eq!(g.turn_count(&[v(0), v(1), v(4)]).unwrap(), 1);
        // U-shape: east, north, west
        assert_eq!(g.turn_count(&[v(0), v(1), v(4), v(3)]).unwrap(), 2);
    }

    #[test]
    fn turn_count_bounded_by_interior_vertices() {
        let g = grid(3, 3, 0.01);
        let path = [v(0), v(1), v(4), v(3), v(0)];
        assert!(g.turn_count(&path).unwrap() <= path.len() - 2);
    }

    #[test]
    fn bounds_validation() {
        let g = grid(2, 2, 0.01); // ~1.1 km cells
        let ok = GraphBounds::new(0.5, 2.0, 2.0).unwrap();
        let tight = GraphBounds::new(2.0, 3.0, 3.0).unwrap();
        assert!(g.validate_bounds(&ok).is_ok());
        assert!(g.validate_bounds(&tight).is_err());
    }

    #[test]
    fn save_load_round_trip_is_identical() {
        let g = grid(3, 3, 0.013);
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        save_graph(&g, &mut nodes, &mut edges).unwrap();
        let g2 = load_graph(nodes.as_slice(), edges.as_slice(), None).unwrap();
        let mut nodes2 = Vec::new();
        let mut edges2 = Vec::new();
        save_graph(&g2, &mut nodes2, &mut edges2).unwrap();
        assert_eq!(nodes, nodes2);
        assert_eq!(edges, edges2);
        assert_eq!(g, g2);
    }

    #[test]
    fn popularity_sidecar_round_trip() {
        let mut g = grid(2, 2, 0.01);
        let mut counts = BTreeMap::new();
        counts.insert((v(0), v(1)), 3u64);
        counts.insert((v(1), v(0)), 7);
        g = g.with_popularities(&counts);
        let mut buf = Vec::new();
        save_popularity_sidecar(&g, &mut buf).unwrap();
        let loaded = load_popularity_sidecar(buf.as_slice()).unwrap();
        assert_eq!(loaded.get(&(v(0), v(1))), Some(&3));
        assert_eq!(loaded.get(&(v(1), v(0))), Some(&7));
    }
}
