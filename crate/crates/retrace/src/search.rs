//! The attack's combinatorial core: straight-leg enumeration between
//! cornering events, turn-by-turn recursion over the cornering log, and the
//! escalating driver-path search with popularity ranking.
//!
//! A candidate grows leg by leg. Each leg starts at the vertex reached by
//! the previous cornering event and runs straight (heading changes below
//! the turn threshold) until a turn matching the next logged event closes
//! it. A leg extension is admitted only while its accumulated distance
//! stays below the average-legal-speed distance budget for the event's
//! time gap, and below the straight-leg cap Y. At every expansion only the
//! `h` most popular opened continuations survive (the beam).
//!
//! All searches are pure functions over an immutable graph.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cornering::{CorneringLog, TurnDirection};
use crate::error::{Error, Result};
use crate::geo::{classify_turn_with, TurnKind, TURN_ANGLE_MIN_DEG};
use crate::graph::{RoadGraph, VertexId};

/// A partially or fully reconstructed driver path.
///
/// `turn_marks` are indices into `vertices` flagged as matched cornering
/// events; a marked vertex is the one reached by the edge that completed
/// the turn. Index 0 is never marked. Closed paths are never extended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePath {
    pub vertices: Vec<VertexId>,
    pub turn_marks: Vec<usize>,
    pub closed: bool,
    /// Cached total length; always equals the recomputed path distance.
    pub distance_km: f64,
}

impl CandidatePath {
    /// A single-vertex open path with zero distance.
    pub fn single(v: VertexId) -> Self {
        CandidatePath {
            vertices: vec![v],
            turn_marks: Vec::new(),
            closed: false,
            distance_km: 0.0,
        }
    }

    pub fn turns(&self) -> usize {
        self.turn_marks.len()
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().expect("paths are never empty")
    }

    /// Identity key ignoring the cached distance: vertex sequence plus
    /// marks.
    pub fn key(&self) -> (&[VertexId], &[usize]) {
        (&self.vertices, &self.turn_marks)
    }

    fn close(mut self) -> Self {
        self.closed = true;
        self
    }

    fn extended(&self, g: &RoadGraph, to: VertexId) -> Result<Self> {
        let e = g
            .edge(self.end(), to)
            .ok_or(Error::MissingEdge(self.end(), to))?;
        let mut next = self.clone();
        next.vertices.push(to);
        next.distance_km += e.length_km;
        Ok(next)
    }

    fn mark_last(mut self) -> Self {
        self.turn_marks.push(self.vertices.len() - 1);
        self
    }

    /// Graft `leg` (whose first vertex equals this path's end) onto this
    /// path, offsetting the leg's turn marks.
    fn grafted(&self, leg: &CandidatePath) -> Self {
        debug_assert_eq!(self.end(), leg.vertices[0]);
        let base = self.vertices.len() - 1;
        let mut out = self.clone();
        out.vertices.extend_from_slice(&leg.vertices[1..]);
        out.turn_marks
            .extend(leg.turn_marks.iter().map(|&i| i + base));
        out.distance_km += leg.distance_km;
        out.closed = false;
        out
    }

    /// True when the path's final vertex carries a turn mark.
    fn ends_on_turn(&self) -> bool {
        self.turn_marks.last() == Some(&(self.vertices.len() - 1))
    }
}

/// Tuning knobs for the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Beam width h: opened continuations kept per expansion. `None`
    /// disables the beam entirely.
    pub beam_width: Option<usize>,
    /// m: new turning events permitted per search call before escalation.
    pub max_new_turns: usize,
    /// Y: straight-leg distance cap, kilometers.
    pub y_km: f64,
    /// Floor legal speed seeding the distance budget.
    pub residential_speed_kmh: f64,
    /// Heading changes at or above this angle are turning events.
    pub turn_angle_min_deg: f64,
    /// Reuse continuations already computed for the same (vertex, event)
    /// pair instead of searching again. Pure optimization.
    pub reuse: bool,
    /// Optional post-filter: maximum distance between consecutive
    /// same-direction turns. Off by default.
    pub max_turn_spacing_km: Option<f64>,
}

impl Default for SearchParams {
    /// The operating point used throughout: h = 2, m = 3, Y = 10 km.
    fn default() -> Self {
        SearchParams {
            beam_width: Some(2),
            max_new_turns: 3,
            y_km: 10.0,
            residential_speed_kmh: 50.0,
            turn_angle_min_deg: TURN_ANGLE_MIN_DEG,
            reuse: true,
            max_turn_spacing_km: None,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == Some(0) {
            return Err(Error::InvalidValue {
                field: "beam_width".into(),
                message: "must be at least 1 (omit to disable the beam)".into(),
            });
        }
        if self.max_new_turns == 0 {
            return Err(Error::InvalidValue {
                field: "max_new_turns".into(),
                message: "must be at least 1".into(),
            });
        }
        if !(self.y_km > 0.0) {
            return Err(Error::InvalidValue {
                field: "y_km".into(),
                message: format!("must be positive, got {}", self.y_km),
            });
        }
        if !(self.residential_speed_kmh > 0.0) {
            return Err(Error::InvalidValue {
                field: "residential_speed_kmh".into(),
                message: format!("must be positive, got {}", self.residential_speed_kmh),
            });
        }
        Ok(())
    }
}

/// Hop bound driving the runtime analysis: ceil(max_dist / min_road).
pub fn derived_alpha(max_dist_km: f64, min_road_km: f64) -> u64 {
    (max_dist_km / min_road_km).ceil() as u64
}

/// Instrumentation counters, reported alongside results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Times a path end had its successors enumerated.
    pub node_expansions: u64,
}

type LegKey = (VertexId, u64, TurnDirection);

struct Ctx<'g> {
    g: &'g RoadGraph,
    params: &'g SearchParams,
    stats: SearchStats,
    leg_cache: HashMap<LegKey, Vec<CandidatePath>>,
}

impl<'g> Ctx<'g> {
    fn new(g: &'g RoadGraph, params: &'g SearchParams) -> Self {
        Ctx {
            g,
            params,
            stats: SearchStats::default(),
            leg_cache: HashMap::new(),
        }
    }
}

/// One opened continuation queued for recursion, with the running legal
/// speed sum cached to keep the budget test O(1).
struct Opened {
    path: CandidatePath,
    speed_sum: f64,
    avg_popularity: f64,
}

/// Enumerate closed straight legs from the end of `path` until vertices
/// turning in `turn_dir`, within the `dt_s` time budget.
///
/// Every returned path is closed. It either ends at a turn-marked vertex
/// whose entering edge turns in `turn_dir` relative to the previous edge,
/// or it ends where extension became impossible (dead end, exhausted
/// distance budget, opposite-direction turn).
pub fn straight_path_finder(
    g: &RoadGraph,
    dt_s: f64,
    turn_dir: TurnDirection,
    path: &CandidatePath,
    from_turn: bool,
    params: &SearchParams,
) -> Result<Vec<CandidatePath>> {
    straight_path_finder_with_stats(g, dt_s, turn_dir, path, from_turn, params)
        .map(|(paths, _)| paths)
}

/// [`straight_path_finder`] also reporting expansion counters.
pub fn straight_path_finder_with_stats(
    g: &RoadGraph,
    dt_s: f64,
    turn_dir: TurnDirection,
    path: &CandidatePath,
    from_turn: bool,
    params: &SearchParams,
) -> Result<(Vec<CandidatePath>, SearchStats)> {
    params.validate()?;
    if !(dt_s > 0.0) {
        return Err(Error::InvalidValue {
            field: "dt_s".into(),
            message: format!("must be positive, got {dt_s}"),
        });
    }
    if path.closed {
        return Err(Error::InvalidValue {
            field: "path".into(),
            message: "closed paths are never extended".into(),
        });
    }
    let mut ctx = Ctx::new(g, params);
    let speed_sum = path
        .vertices
        .windows(2)
        .map(|w| {
            g.edge(w[0], w[1])
                .map(|e| e.legal_speed_kmh)
                .ok_or(Error::MissingEdge(w[0], w[1]))
        })
        .sum::<Result<f64>>()?;
    let mut out = Vec::new();
    spf_rec(
        &mut ctx,
        dt_s / 3600.0,
        turn_dir,
        path.clone(),
        speed_sum,
        from_turn,
        path.distance_km,
        &mut out,
    )?;
    Ok((out, ctx.stats))
}

#[allow(clippy::too_many_arguments)]
fn spf_rec(
    ctx: &mut Ctx,
    dt_h: f64,
    turn_dir: TurnDirection,
    path: CandidatePath,
    speed_sum: f64,
    from_turn: bool,
    entry_distance_km: f64,
    out: &mut Vec<CandidatePath>,
) -> Result<()> {
    let last = path.end();
    let succs = ctx.g.successors(last)?;
    ctx.stats.node_expansions += 1;

    if succs.is_empty() {
        out.push(path.close());
        return Ok(());
    }

    let prev_bearing = if path.vertices.len() >= 2 {
        let n = path.vertices.len();
        Some(ctx.g.edge_bearing_deg(path.vertices[n - 2], path.vertices[n - 1])?)
    } else {
        None
    };

    let edge_count = path.vertices.len() - 1;
    let wanted = match turn_dir {
        TurnDirection::Left => TurnKind::TurnLeft,
        TurnDirection::Right => TurnKind::TurnRight,
    };

    let mut opened: Vec<Opened> = Vec::new();
    let mut self_closed = false;
    for e in succs {
        let ext_dist = path.distance_km + e.length_km;
        let ext_speed_sum = speed_sum + e.legal_speed_kmh;
        let w_avg = ext_speed_sum / (edge_count + 1) as f64;
        let within_budget =
            ext_dist < w_avg * dt_h && ext_dist - entry_distance_km <= ctx.params.y_km;

        // With no previous edge the angle cannot be computed; every
        // successor is a straight continuation.
        let kind = match prev_bearing {
            None => TurnKind::Straight,
            Some(pb) => {
                let nb = ctx.g.edge_bearing_deg(last, e.to)?;
                classify_turn_with(pb, nb, ctx.params.turn_angle_min_deg).kind
            }
        };

        enum Action {
            Open,
            CloseWithTurn,
            CloseSelf,
        }
        let action = match kind {
            TurnKind::Straight => Action::Open,
            k if k == wanted && from_turn => Action::Open,
            k if k == wanted => Action::CloseWithTurn,
            _ => Action::CloseSelf,
        };

        match action {
            Action::Open if within_budget => {
                let ext = path.extended(ctx.g, e.to)?;
                let avg_popularity = ctx.g.path_avg_popularity(&ext.vertices)?;
                opened.push(Opened {
                    path: ext,
                    speed_sum: ext_speed_sum,
                    avg_popularity,
                });
            }
            Action::CloseWithTurn if within_budget => {
                out.push(path.extended(ctx.g, e.to)?.mark_last().close());
            }
            // inadmissible extensions close the current path, once
            _ => {
                if !self_closed {
                    out.push(path.clone().close());
                    self_closed = true;
                }
            }
        }
    }

    // keep the h most popular opened continuations
    opened.sort_by(|a, b| {
        b.avg_popularity
            .total_cmp(&a.avg_popularity)
            .then(a.path.distance_km.total_cmp(&b.path.distance_km))
            .then_with(|| a.path.vertices.cmp(&b.path.vertices))
    });
    if let Some(h) = ctx.params.beam_width {
        opened.truncate(h);
    }

    for o in opened {
        spf_rec(
            ctx,
            dt_h,
            turn_dir,
            o.path,
            o.speed_sum,
            false,
            entry_distance_km,
            out,
        )?;
    }
    Ok(())
}

/// One straight leg from `v` toward cornering event `k`, computed through
/// the cache when reuse is on. `dt_s` must be the gap to the event in whole
/// seconds.
fn leg(
    ctx: &mut Ctx,
    v: VertexId,
    dt_s: u64,
    dir: TurnDirection,
) -> Result<Vec<CandidatePath>> {
    let key = (v, dt_s, dir);
    if ctx.params.reuse {
        if let Some(cached) = ctx.leg_cache.get(&key) {
            return Ok(cached.clone());
        }
    }
    let mut out = Vec::new();
    spf_rec(
        ctx,
        dt_s as f64 / 3600.0,
        dir,
        CandidatePath::single(v),
        0.0,
        true,
        0.0,
        &mut out,
    )?;
    if ctx.params.reuse {
        ctx.leg_cache.insert(key, out.clone());
    }
    Ok(out)
}

/// Extend `path` turn by turn through the cornering log until every
/// returned path is closed or holds `m_cap` turn marks.
///
/// `trip_time_s` is the time of the path's last matched event (0 at trip
/// start).
pub fn finding_paths(
    g: &RoadGraph,
    trip_time_s: u64,
    path: &CandidatePath,
    mc: &CorneringLog,
    m_cap: usize,
    params: &SearchParams,
) -> Result<Vec<CandidatePath>> {
    params.validate()?;
    let mut ctx = Ctx::new(g, params);
    fp(&mut ctx, trip_time_s, path, mc, m_cap)
}

fn fp(
    ctx: &mut Ctx,
    trip_time_s: u64,
    path: &CandidatePath,
    mc: &CorneringLog,
    m_cap: usize,
) -> Result<Vec<CandidatePath>> {
    if path.closed {
        return Err(Error::InvalidValue {
            field: "path".into(),
            message: "closed paths are never extended".into(),
        });
    }
    let k = path.turns();
    if k >= mc.len() {
        return Err(Error::ExhaustedCorneringLog(mc.len()));
    }
    let event = mc.events()[k];
    if event.t_offset_s <= trip_time_s {
        return Err(Error::InvalidValue {
            field: "trip_time_s".into(),
            message: format!(
                "event {k} at t={} is not after trip time {trip_time_s}",
                event.t_offset_s
            ),
        });
    }
    let dt = event.t_offset_s - trip_time_s;
    let legs = leg(ctx, path.end(), dt, event.direction)?;

    let mut out = Vec::new();
    for l in &legs {
        let grafted = path.grafted(l);
        if l.ends_on_turn() {
            let done = grafted.turns() == mc.len();
            let p = if done { grafted.close() } else { grafted };
            if p.closed || p.turns() >= m_cap {
                out.push(p);
            } else {
                let t = mc.events()[p.turns() - 1].t_offset_s;
                out.extend(fp(ctx, t, &p, mc, m_cap)?);
            }
        } else {
            // dead end or exhausted budget: the grafted path cannot
            // complete this event
            out.push(grafted.close());
        }
    }
    Ok(out)
}

/// Run the full search from `start`: escalate the per-call turn cap in
/// rounds of `m`, prune dead-end paths between rounds, and rank the
/// complete candidates by average popularity (ties: shorter distance, then
/// lexicographic vertex sequence).
///
/// ```
/// use retrace::cornering::{CorneringLog, TurnDirection, TurnEvent};
/// use retrace::search::{getting_popular_paths, SearchParams};
/// # use retrace::geo::GeoPoint;
/// # use retrace::graph::{RoadGraph, VertexId};
/// # let mut g = RoadGraph::new();
/// # for (id, lat, lon) in [(0, 0.0, 0.0), (1, 0.0, 0.01), (2, 0.0, 0.02), (3, -0.01, 0.02)] {
/// #     g.add_vertex(VertexId(id), GeoPoint::new(lat, lon)?);
/// # }
/// # for (a, b) in [(0, 1), (1, 2), (2, 3)] {
/// #     g.add_edge(VertexId(a), VertexId(b), 50.0, Some(1.0))?;
/// # }
///
/// let mc = CorneringLog::new(vec![TurnEvent {
///     direction: TurnDirection::Right,
///     t_offset_s: 300,
/// }])?;
/// let candidates = getting_popular_paths(&g, VertexId(0), &mc, &SearchParams::default())?;
/// assert_eq!(candidates.len(), 1);
/// assert_eq!(candidates[0].turn_marks, vec![3]);
/// # Ok::<(), retrace::Error>(())
/// ```
pub fn getting_popular_paths(
    g: &RoadGraph,
    start: VertexId,
    mc: &CorneringLog,
    params: &SearchParams,
) -> Result<Vec<CandidatePath>> {
    getting_popular_paths_with_stats(g, start, mc, params).map(|(paths, _)| paths)
}

/// [`getting_popular_paths`] also reporting expansion counters.
pub fn getting_popular_paths_with_stats(
    g: &RoadGraph,
    start: VertexId,
    mc: &CorneringLog,
    params: &SearchParams,
) -> Result<(Vec<CandidatePath>, SearchStats)> {
    params.validate()?;
    if !g.contains_vertex(start) {
        return Err(Error::UnknownVertex(start));
    }
    let mut ctx = Ctx::new(g, params);
    let m = params.max_new_turns;

    let mut c = 1usize;
    let mut paths = fp(&mut ctx, 0, &CandidatePath::single(start), mc, m * c)?;
    // bounded by ceil(|mc| / m) rounds; the +1 guards the degenerate cases
    let max_rounds = mc.len().div_ceil(m) + 1;
    for _ in 0..max_rounds {
        // dead-end pruning: closed without completing the log
        paths.retain(|p| !(p.closed && p.turns() < mc.len()));
        let (open, closed): (Vec<_>, Vec<_>) = paths.into_iter().partition(|p| !p.closed);
        if open.is_empty() {
            paths = closed;
            break;
        }
        c += 1;
        paths = closed;
        for p in open {
            let t = mc.events()[p.turns() - 1].t_offset_s;
            paths.extend(fp(&mut ctx, t, &p, mc, m * c)?);
        }
    }

    paths.retain(|p| p.closed && p.turns() == mc.len());
    if let Some(max_turn_km) = params.max_turn_spacing_km {
        let mut kept = Vec::with_capacity(paths.len());
        for p in paths {
            if turn_spacing_ok(g, &p, mc, max_turn_km)? {
                kept.push(p);
            }
        }
        paths = kept;
    }
    rank_by_popularity(g, &mut paths)?;
    Ok((paths, ctx.stats))
}

/// Same-direction turn spacing post-filter (model constraint X_turn):
/// consecutive turns in the same direction may be at most `max_turn_km`
/// apart along the path.
fn turn_spacing_ok(
    g: &RoadGraph,
    p: &CandidatePath,
    mc: &CorneringLog,
    max_turn_km: f64,
) -> Result<bool> {
    for (k, w) in p.turn_marks.windows(2).enumerate() {
        if mc.events()[k].direction == mc.events()[k + 1].direction {
            let d = g.path_distance_km(&p.vertices[w[0]..=w[1]])?;
            if d > max_turn_km {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sort candidates by average popularity descending with deterministic
/// tie-breaks.
pub fn rank_by_popularity(g: &RoadGraph, paths: &mut [CandidatePath]) -> Result<()> {
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let pop = if p.vertices.len() >= 2 {
            g.path_avg_popularity(&p.vertices)?
        } else {
            0.0
        };
        keyed.push((pop, i));
    }
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| {
        keyed[b]
            .0
            .total_cmp(&keyed[a].0)
            .then(paths[a].distance_km.total_cmp(&paths[b].distance_km))
            .then_with(|| paths[a].vertices.cmp(&paths[b].vertices))
    });
    let reordered: Vec<CandidatePath> = order.iter().map(|&i| paths[i].clone()).collect();
    paths.clone_from_slice(&reordered);
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::cornering::TurnEvent;
    use crate::geo::GeoPoint;

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    fn vertex(g: &mut RoadGraph, id: u64, lat: f64, lon: f64) {
        g.add_vertex(v(id), GeoPoint::new(lat, lon).unwrap());
    }

    fn no_beam() -> SearchParams {
        SearchParams {
            beam_width: None,
            ..SearchParams::default()
        }
    }

    fn mc(events: &[(TurnDirection, u64)]) -> CorneringLog {
        CorneringLog::new(
            events
                .iter()
                .map(|&(direction, t_offset_s)| TurnEvent {
                    direction,
                    t_offset_s,
                })
                .collect(),
        )
        .unwrap()
    }

    /// Directed corridor 0 -> 1 -> 2 heading east, then 2 -> 3 bending
    /// south (a right turn).
    fn corridor_with_right_branch() -> RoadGraph {
        let mut g = RoadGraph::new();
        vertex(&mut g, 0, 0.0, 0.0);
        vertex(&mut g, 1, 0.0, 0.01);
        vertex(&mut g, 2, 0.0, 0.02);
        vertex(&mut g, 3, -0.01, 0.02);
        g.add_edge(v(0), v(1), 50.0, None).unwrap();
        g.add_edge(v(1), v(2), 50.0, None).unwrap();
        g.add_edge(v(2), v(3), 50.0, None).unwrap();
        g
    }

    fn key_set(paths: &[CandidatePath]) -> BTreeSet<(Vec<u64>, Vec<usize>)> {
        paths
            .iter()
            .map(|p| {
                (
                    p.vertices.iter().map(|u| u.0).collect(),
                    p.turn_marks.clone(),
                )
            })
            .collect()
    }

    #[test]
    fn dead_end_closes_without_mark() {
        let mut g = RoadGraph::new();
        vertex(&mut g, 0, 0.0, 0.0);
        vertex(&mut g, 1, 0.0, 0.01);
        g.add_edge(v(0), v(1), 50.0, None).unwrap();
        let out = straight_path_finder(
            &g,
            600.0,
            TurnDirection::Right,
            &CandidatePath::single(v(0)),
            true,
            &no_beam(),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].closed);
        assert!(out[0].turn_marks.is_empty());
        assert_eq!(out[0].vertices, vec![v(0), v(1)]);
    }

    #[test]
    fn corridor_branch_detected_as_turn() {
        let g = corridor_with_right_branch();
        let out = straight_path_finder(
            &g,
            600.0,
            TurnDirection::Right,
            &CandidatePath::single(v(0)),
            true,
            &no_beam(),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        let p = &out[0];
        assert!(p.closed);
        assert_eq!(p.vertices, vec![v(0), v(1), v(2), v(3)]);
        // the mark sits on the vertex reached by the turning edge
        assert_eq!(p.turn_marks, vec![3]);
    }

    #[test]
    fn exhausted_budget_closes_without_mark() {
        let g = corridor_with_right_branch();
        // each edge is ~1.1 km at 50 km/h; 10 seconds buys ~0.14 km
        let out = straight_path_finder(
            &g,
            10.0,
            TurnDirection::Right,
            &CandidatePath::single(v(0)),
            true,
            &no_beam(),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].closed);
        assert!(out[0].turn_marks.is_empty());
        assert_eq!(out[0].vertices, vec![v(0)]);
    }

    #[test]
    fn opposite_turn_closes_without_mark() {
        let g = corridor_with_right_branch();
        let out = straight_path_finder(
            &g,
            600.0,
            TurnDirection::Left,
            &CandidatePath::single(v(0)),
            true,
            &no_beam(),
        )
        .unwrap();
        // the bend at vertex 2 turns right; hunting a left turn dies there
        assert_eq!(out.len(), 1);
        assert!(out[0].turn_marks.is_empty());
        assert_eq!(out[0].vertices, vec![v(0), v(1), v(2)]);
    }

    /// Three straight continuations with popularity 5, 3, 1; each one
    /// reaches a right turn two edges out.
    fn popularity_star() -> RoadGraph {
        let mut g = RoadGraph::new();
        vertex(&mut g, 0, 0.0, 0.0);
        // branch east (P=5), north (P=3), west (P=1)
        vertex(&mut g, 1, 0.0, 0.01);
        vertex(&mut g, 2, 0.01, 0.0);
        vertex(&mut g, 3, 0.0, -0.01);
        // right-turn exits: east heading turns south, north heading turns
        // east, west heading turns north
        vertex(&mut g, 4, -0.01, 0.01);
        vertex(&mut g, 5, 0.01, 0.01);
        vertex(&mut g, 6, 0.01, -0.01);
        g.add_edge(v(0), v(1), 50.0, None).unwrap();
        g.add_edge(v(0), v(2), 50.0, None).unwrap();
        g.add_edge(v(0), v(3), 50.0, None).unwrap();
        g.add_edge(v(1), v(4), 50.0, None).unwrap();
        g.add_edge(v(2), v(5), 50.0, None).unwrap();
        g.add_edge(v(3), v(6), 50.0, None).unwrap();
        let mut counts = std::collections::BTreeMap::new();
        counts.insert((v(0), v(1)), 5u64);
        counts.insert((v(0), v(2)), 3u64);
        counts.insert((v(0), v(3)), 1u64);
        g.with_popularities(&counts)
    }

    #[test]
    fn beam_keeps_two_most_popular_branches() {
        let g = popularity_star();
        let params = SearchParams {
            beam_width: Some(2),
            ..SearchParams::default()
        };
        let out = straight_path_finder(
            &g,
            600.0,
            TurnDirection::Right,
            &CandidatePath::single(v(0)),
            true,
            &params,
        )
        .unwrap();
        let touched: BTreeSet<VertexId> =
            out.iter().flat_map(|p| p.vertices.iter().copied()).collect();
        assert!(touched.contains(&v(1)) && touched.contains(&v(2)));
        // the P=1 branch through vertex 3 yields no descendants
        assert!(!touched.contains(&v(3)));
    }

    #[test]
    fn beamless_search_keeps_all_branches() {
        let g = popularity_star();
        let out = straight_path_finder(
            &g,
            600.0,
            TurnDirection::Right,
            &CandidatePath::single(v(0)),
            true,
            &no_beam(),
        )
        .unwrap();
        let marked: Vec<_> = out.iter().filter(|p| !p.turn_marks.is_empty()).collect();
        assert_eq!(marked.len(), 3);
    }

    #[test]
    fn closed_path_rejected() {
        let g = corridor_with_right_branch();
        let closed = CandidatePath::single(v(0)).close();
        assert!(straight_path_finder(
            &g,
            600.0,
            TurnDirection::Right,
            &closed,
            true,
            &no_beam()
        )
        .is_err());
    }

    #[test]
    fn finding_paths_exhausted_log_is_error() {
        let g = corridor_with_right_branch();
        let log = mc(&[(TurnDirection::Right, 120)]);
        let mut p = CandidatePath::single(v(0));
        p.turn_marks.push(0); // fabricate a path already holding |mc| turns
        p.vertices.push(v(1));
        let err = finding_paths(&g, 0, &p, &log, 3, &no_beam()).unwrap_err();
        assert!(matches!(err, Error::ExhaustedCorneringLog(1)));
    }

    #[test]
    fn single_feasible_turn_single_candidate() {
        let g = corridor_with_right_branch();
        let log = mc(&[(TurnDirection::Right, 300)]);
        let out = getting_popular_paths(&g, v(0), &log, &no_beam()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].vertices, vec![v(0), v(1), v(2), v(3)]);
        assert_eq!(out[0].turn_marks, vec![3]);
        assert!(out[0].closed);
    }

    #[test]
    fn start_without_successors_empty_result() {
        let mut g = RoadGraph::new();
        vertex(&mut g, 0, 0.0, 0.0);
        vertex(&mut g, 1, 0.0, 0.01);
        g.add_edge(v(1), v(0), 50.0, None).unwrap();
        let log = mc(&[(TurnDirection::Right, 60)]);
        let out = getting_popular_paths(&g, v(0), &log, &no_beam()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn unknown_start_is_error() {
        let g = corridor_with_right_branch();
        let log = mc(&[(TurnDirection::Right, 60)]);
        assert!(matches!(
            getting_popular_paths(&g, v(99), &log, &no_beam()),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn sort_contract_highest_popularity_first() {
        let mut g = RoadGraph::new();
        vertex(&mut g, 0, 0.0, 0.0);
        vertex(&mut g, 1, 0.0, 0.01);
        vertex(&mut g, 2, 0.01, 0.0);
        g.add_edge(v(0), v(1), 50.0, None).unwrap();
        g.add_edge(v(0), v(2), 50.0, None).unwrap();
        let mut counts = std::collections::BTreeMap::new();
        counts.insert((v(0), v(1)), 2u64);
        counts.insert((v(0), v(2)), 4u64);
        let g = g.with_popularities(&counts);
        let mk = |to: u64| CandidatePath {
            vertices: vec![v(0), v(to)],
            turn_marks: vec![1],
            closed: true,
            distance_km: g.edge(v(0), v(to)).unwrap().length_km,
        };
        let mut paths = vec![mk(1), mk(2)];
        rank_by_popularity(&g, &mut paths).unwrap();
        assert_eq!(paths[0].vertices[1], v(2));
        assert_eq!(paths[1].vertices[1], v(1));
    }

    fn grid_2d(rows: u64, cols: u64) -> RoadGraph {
        let mut g = RoadGraph::new();
        for r in 0..rows {
            for c in 0..cols {
                vertex(&mut g, r * cols + c, r as f64 * 0.01, c as f64 * 0.01);
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
    fn reuse_on_off_identical_sets() {
        let g = grid_2d(4, 4);
        let log = mc(&[(TurnDirection::Right, 180), (TurnDirection::Left, 420)]);
        let with = getting_popular_paths(&g, v(0), &log, &no_beam()).unwrap();
        let without = getting_popular_paths(
            &g,
            v(0),
            &log,
            &SearchParams {
                reuse: false,
                ..no_beam()
            },
        )
        .unwrap();
        assert_eq!(key_set(&with), key_set(&without));
        assert!(!with.is_empty());
    }

    #[test]
    fn returned_turns_match_log_geometry() {
        let g = grid_2d(4, 4);
        let log = mc(&[(TurnDirection::Left, 180), (TurnDirection::Right, 420)]);
        let out = getting_popular_paths(&g, v(0), &log, &no_beam()).unwrap();
        assert!(!out.is_empty());
        for p in &out {
            assert_eq!(p.turns(), log.len());
            assert!(p.closed);
            assert_eq!(*p.turn_marks.last().unwrap(), p.vertices.len() - 1);
            for (k, &mark) in p.turn_marks.iter().enumerate() {
                assert!(mark >= 2, "a mark needs a preceding edge pair");
                let pb = g
                    .edge_bearing_deg(p.vertices[mark - 2], p.vertices[mark - 1])
                    .unwrap();
                let nb = g
                    .edge_bearing_deg(p.vertices[mark - 1], p.vertices[mark])
                    .unwrap();
                let kind = classify_turn_with(pb, nb, TURN_ANGLE_MIN_DEG).kind;
                let expected = match log.events()[k].direction {
                    TurnDirection::Left => TurnKind::TurnLeft,
                    TurnDirection::Right => TurnKind::TurnRight,
                };
                assert_eq!(kind, expected);
            }
        }
    }

    #[test]
    fn budget_never_violated_post_hoc() {
        let g = grid_2d(4, 4);
        let log = mc(&[(TurnDirection::Left, 180), (TurnDirection::Right, 420)]);
        let out = getting_popular_paths(&g, v(0), &log, &no_beam()).unwrap();
        for p in &out {
            let mut seg_start = 0usize;
            let mut prev_t = 0u64;
            for (k, &mark) in p.turn_marks.iter().enumerate() {
                let seg = &p.vertices[seg_start..=mark];
                let d = g.path_distance_km(seg).unwrap();
                let w = g.path_avg_legal_speed_kmh(seg).unwrap();
                let dt_h = (log.events()[k].t_offset_s - prev_t) as f64 / 3600.0;
                assert!(d < w * dt_h, "segment {k} violates its budget");
                prev_t = log.events()[k].t_offset_s;
                seg_start = mark;
            }
        }
    }

    #[test]
    fn beam_result_is_subset_of_wider_beam() {
        let g = grid_2d(4, 4);
        let log = mc(&[(TurnDirection::Left, 180), (TurnDirection::Right, 420)]);
        let mut prev: Option<BTreeSet<_>> = None;
        for beam in [Some(1), Some(2), Some(4), None] {
            let out = getting_popular_paths(
                &g,
                v(0),
                &log,
                &SearchParams {
                    beam_width: beam,
                    ..SearchParams::default()
                },
            )
            .unwrap();
            let set = key_set(&out);
            if let Some(p) = &prev {
                assert!(p.is_subset(&set), "beam {beam:?} lost paths");
            }
            prev = Some(set);
        }
    }

    #[test]
    fn ranking_invariant_under_popularity_scaling() {
        let g = grid_2d(4, 4);
        let log = mc(&[(TurnDirection::Left, 180), (TurnDirection::Right, 420)]);
        let mut counts = std::collections::BTreeMap::new();
        for (i, e) in g.edges().enumerate() {
            counts.insert((e.from, e.to), (i % 7 + 1) as u64);
        }
        let g1 = g.clone().with_popularities(&counts);
        let scaled: std::collections::BTreeMap<_, _> =
            counts.iter().map(|(&k, &c)| (k, c * 13)).collect();
        let g2 = g.with_popularities(&scaled);
        let a = getting_popular_paths(&g1, v(0), &log, &no_beam()).unwrap();
        let b = getting_popular_paths(&g2, v(0), &log, &no_beam()).unwrap();
        let order = |paths: &[CandidatePath]| -> Vec<Vec<u64>> {
            paths
                .iter()
                .map(|p| p.vertices.iter().map(|u| u.0).collect())
                .collect()
        };
        assert_eq!(order(&a), order(&b));
    }

    #[test]
    fn turn_spacing_filter_drops_spread_turns() {
        let g = grid_2d(4, 4);
        let log = mc(&[(TurnDirection::Left, 180), (TurnDirection::Left, 500)]);
        let all = getting_popular_paths(&g, v(0), &log, &no_beam()).unwrap();
        let tight = getting_popular_paths(
            &g,
            v(0),
            &log,
            &SearchParams {
                max_turn_spacing_km: Some(2.5),
                ..no_beam()
            },
        )
        .unwrap();
        assert!(tight.len() < all.len());
        for p in &tight {
            let d = g
                .path_distance_km(&p.vertices[p.turn_marks[0]..=p.turn_marks[1]])
                .unwrap();
            assert!(d <= 2.5);
        }
    }

    #[test]
    fn expansions_counted() {
        let g = corridor_with_right_branch();
        let (_, stats) = straight_path_finder_with_stats(
            &g,
            600.0,
            TurnDirection::Right,
            &CandidatePath::single(v(0)),
            true,
            &no_beam(),
        )
        .unwrap();
        // expansions at vertices 0, 1 and 2
        assert_eq!(stats.node_expansions, 3);
    }
}
