//! Popularity mapping: count, for every road, the corpus GPS fixes whose
//! nearest edge it is.
//!
//! A uniform lat/lon grid index stands in for a Voronoi diagram: identical
//! semantics (the exact global-minimum edge), simpler correctness argument.
//! The index query expands search rings until the best distance found is
//! provably no farther than anything still unscanned, so it agrees with a
//! linear scan on every input.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::{point_segment_km, GeoPoint};
use crate::graph::{RoadGraph, VertexId};

/// Kilometers per degree of latitude (and of longitude at the equator).
const KM_PER_DEG: f64 = std::f64::consts::PI * crate::geo::EARTH_RADIUS_KM / 180.0;

/// Default cell size for the spatial index.
pub const DEFAULT_CELL_KM: f64 = 0.5;

/// Points farther than this from every edge are discarded as off-network
/// noise.
pub const DEFAULT_CUTOFF_KM: f64 = 0.5;

/// One vehicle's ordered GPS log.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub name: String,
    pub points: Vec<GeoPoint>,
}

/// An ordered collection of per-vehicle traces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceCorpus {
    pub traces: Vec<Trace>,
}

impl TraceCorpus {
    pub fn total_points(&self) -> usize {
        self.traces.iter().map(|t| t.points.len()).sum()
    }
}

/// Parse one trace file: headerless CSV, `lat,lon` or `lat,lon,timestamp`
/// per line. Timestamps are ignored; the mapper consumes coordinates only.
pub fn parse_trace(name: &str, source: impl Read) -> Result<Trace> {
    let reader = BufReader::new(source);
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            path: name.to_string(),
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() < 2 {
            return Err(Error::Parse {
                path: name.to_string(),
                line: line_no,
                message: format!("expected lat,lon[,timestamp]: {line:?}"),
            });
        }
        let lat: f64 = parts[0].trim().parse().map_err(|_| Error::Parse {
            path: name.to_string(),
            line: line_no,
            message: format!("bad latitude {:?}", parts[0]),
        })?;
        let lon: f64 = parts[1].trim().parse().map_err(|_| Error::Parse {
            path: name.to_string(),
            line: line_no,
            message: format!("bad longitude {:?}", parts[1]),
        })?;
        points.push(GeoPoint::new(lat, lon).map_err(|e| Error::Parse {
            path: name.to_string(),
            line: line_no,
            message: e.to_string(),
        })?);
    }
    Ok(Trace {
        name: name.to_string(),
        points,
    })
}

/// Load every file in a directory as one trace each, in filename order.
pub fn load_corpus_dir(dir: &Path) -> Result<TraceCorpus> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?
        .into_iter()
        .filter(|e| e.path().is_file())
        .map(|e| e.path())
        .collect();
    entries.sort();
    let mut traces = Vec::new();
    for path in entries {
        let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let name = path.display().to_string();
        traces.push(parse_trace(&name, file)?);
    }
    Ok(TraceCorpus { traces })
}

/// Uniform grid over the graph's bounding box, padded by one cell, with a
/// one-cell guard ring on every inserted edge.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    origin_lat: f64,
    origin_lon: f64,
    cell_lat_deg: f64,
    cell_lon_deg: f64,
    rows: usize,
    cols: usize,
    cells: Vec<Vec<(VertexId, VertexId)>>,
    /// Conservative lower bound on any cell extent, km.
    cell_min_km: f64,
}

impl SpatialIndex {
    fn cell_of(&self, p: GeoPoint) -> Option<(usize, usize)> {
        let r = (p.lat_deg - self.origin_lat) / self.cell_lat_deg;
        let c = (p.lon_deg - self.origin_lon) / self.cell_lon_deg;
        if r < 0.0 || c < 0.0 {
            return None;
        }
        let (r, c) = (r as usize, c as usize);
        if r >= self.rows || c >= self.cols {
            return None;
        }
        Some((r, c))
    }
}

/// Build the spatial index with the given cell size.
pub fn build_spatial_index(g: &RoadGraph, cell_km: f64) -> Result<SpatialIndex> {
    if !(cell_km > 0.0) {
        return Err(Error::InvalidValue {
            field: "cell_km".into(),
            message: format!("must be positive, got {cell_km}"),
        });
    }
    let (lo, hi) = g.bounding_box()?;
    let cell_lat_deg = cell_km / KM_PER_DEG;
    let max_abs_lat = lo.lat_deg.abs().max(hi.lat_deg.abs()) + cell_lat_deg;
    let cos_lat = max_abs_lat.min(89.0).to_radians().cos();
    let mid_lat = ((lo.lat_deg + hi.lat_deg) / 2.0).to_radians();
    let cell_lon_deg = cell_km / (KM_PER_DEG * mid_lat.cos());
    // lon degrees shrink toward the poles; bound by the worst latitude in
    // the padded box
    let cell_min_km = (cell_lat_deg * KM_PER_DEG).min(cell_lon_deg * KM_PER_DEG * cos_lat);

    let origin_lat = lo.lat_deg - cell_lat_deg;
    let origin_lon = lo.lon_deg - cell_lon_deg;
    let rows = (((hi.lat_deg - origin_lat) / cell_lat_deg).ceil() as usize + 2).max(1);
    let cols = (((hi.lon_deg - origin_lon) / cell_lon_deg).ceil() as usize + 2).max(1);

    let mut idx = SpatialIndex {
        origin_lat,
        origin_lon,
        cell_lat_deg,
        cell_lon_deg,
        rows,
        cols,
        cells: vec![Vec::new(); rows * cols],
        cell_min_km,
    };

    for e in g.edges() {
        let a = g.vertex(e.from).expect("edge endpoints exist").location;
        let b = g.vertex(e.to).expect("edge endpoints exist").location;
        let r0 = ((a.lat_deg.min(b.lat_deg) - origin_lat) / cell_lat_deg) as isize - 1;
        let r1 = ((a.lat_deg.max(b.lat_deg) - origin_lat) / cell_lat_deg) as isize + 1;
        let c0 = ((a.lon_deg.min(b.lon_deg) - origin_lon) / cell_lon_deg) as isize - 1;
        let c1 = ((a.lon_deg.max(b.lon_deg) - origin_lon) / cell_lon_deg) as isize + 1;
        for r in r0.max(0)..=r1.min(rows as isize - 1) {
            for c in c0.max(0)..=c1.min(cols as isize - 1) {
                idx.cells[r as usize * cols + c as usize].push((e.from, e.to));
            }
        }
    }
    Ok(idx)
}

/// The edge minimizing the point-to-segment distance to `p`; ties broken by
/// `(from, to)` ascending. Exact: agrees with [`nearest_edge_linear`].
pub fn nearest_edge<'g>(g: &'g RoadGraph, idx: &SpatialIndex, p: GeoPoint) -> Option<&'g Edge> {
    let (pr, pc) = match idx.cell_of(p) {
        Some(cell) => cell,
        // outside the padded box: the ring-bound argument does not apply
        None => return nearest_edge_linear(g, p),
    };
    let mut best: Option<(f64, (VertexId, VertexId))> = None;
    let max_ring = idx.rows.max(idx.cols);
    for ring in 0..=max_ring {
        for (r, c) in ring_cells(pr, pc, ring, idx.rows, idx.cols) {
            for &key in &idx.cells[r * idx.cols + c] {
                let e = g.edge(key.0, key.1).expect("indexed edge exists");
                let a = g.vertex(e.from).unwrap().location;
                let b = g.vertex(e.to).unwrap().location;
                let d = point_segment_km(p, a, b);
                let cand = (d, key);
                match best {
                    Some(cur) if !better(cand, cur) => {}
                    _ => best = Some(cand),
                }
            }
        }
        if let Some((d, _)) = best {
            // anything unscanned lies beyond `ring` whole cells from p
            if d <= ring as f64 * idx.cell_min_km {
                break;
            }
        }
    }
    best.and_then(|(_, key)| g.edge(key.0, key.1))
}

fn better(a: (f64, (VertexId, VertexId)), b: (f64, (VertexId, VertexId))) -> bool {
    (a.0, a.1) < (b.0, b.1)
}

fn ring_cells(
    pr: usize,
    pc: usize,
    ring: usize,
    rows: usize,
    cols: usize,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let (pr, pc, ring) = (pr as isize, pc as isize, ring as isize);
    let mut push = |r: isize, c: isize| {
        if r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols {
            out.push((r as usize, c as usize));
        }
    };
    if ring == 0 {
        push(pr, pc);
        return out;
    }
    for c in (pc - ring)..=(pc + ring) {
        push(pr - ring, c);
        push(pr + ring, c);
    }
    for r in (pr - ring + 1)..=(pr + ring - 1) {
        push(r, pc - ring);
        push(r, pc + ring);
    }
    out
}

use crate::graph::Edge;

/// Reference linear scan over all edges; the oracle the index is checked
/// against.
pub fn nearest_edge_linear<'g>(g: &'g RoadGraph, p: GeoPoint) -> Option<&'g Edge> {
    let mut best: Option<(f64, &Edge)> = None;
    for e in g.edges() {
        let a = g.vertex(e.from).unwrap().location;
        let b = g.vertex(e.to).unwrap().location;
        let d = point_segment_km(p, a, b);
        let replace = match best {
            None => true,
            Some((bd, be)) => (d, e.from, e.to) < (bd, be.from, be.to),
        };
        if replace {
            best = Some((d, e));
        }
    }
    best.map(|(_, e)| e)
}

/// Counters reported after a mapping run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MappingSummary {
    pub points_processed: usize,
    pub points_discarded: usize,
    pub max_popularity: u64,
}

/// Assign P(e) to every edge: the exact count of corpus points whose
/// nearest edge it is. Points farther than `cutoff_km` from every edge are
/// discarded and reported.
///
/// ```
/// use retrace::popularity::{map_popularities, Trace, TraceCorpus};
/// use retrace::geo::GeoPoint;
/// # use retrace::graph::{RoadGraph, VertexId};
/// # let mut g = RoadGraph::new();
/// # g.add_vertex(VertexId(0), GeoPoint::new(0.0, 0.0)?);
/// # g.add_vertex(VertexId(1), GeoPoint::new(0.0, 0.01)?);
/// # g.add_edge(VertexId(0), VertexId(1), 50.0, None)?;
///
/// let corpus = TraceCorpus {
///     traces: vec![Trace {
///         name: "vehicle0".into(),
///         points: vec![GeoPoint::new(0.0001, 0.005)?],
///     }],
/// };
/// let (mapped, summary) = map_popularities(&g, &corpus, 0.5, 0.5)?;
/// assert_eq!(summary.points_processed, 1);
/// assert_eq!(mapped.edge(VertexId(0), VertexId(1)).unwrap().popularity, 1);
/// # Ok::<(), retrace::Error>(())
/// ```
pub fn map_popularities(
    g: &RoadGraph,
    corpus: &TraceCorpus,
    cell_km: f64,
    cutoff_km: f64,
) -> Result<(RoadGraph, MappingSummary)> {
    let idx = build_spatial_index(g, cell_km)?;
    let mut counts: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();
    let mut summary = MappingSummary::default();
    for trace in &corpus.traces {
        for &p in &trace.points {
            summary.points_processed += 1;
            let e = nearest_edge(g, &idx, p).ok_or(Error::EmptyGraph)?;
            let a = g.vertex(e.from).unwrap().location;
            let b = g.vertex(e.to).unwrap().location;
            if point_segment_km(p, a, b) > cutoff_km {
                summary.points_discarded += 1;
                continue;
            }
            *counts.entry((e.from, e.to)).or_insert(0) += 1;
        }
    }
    summary.max_popularity = counts.values().copied().max().unwrap_or(0);
    Ok((g.clone().with_popularities(&counts), summary))
}
