//! Exhaustive enumeration oracle for validating the search.
//!
//! A plain depth-first walk over the same admission rules: straight
//! continuations under the distance budget, event-consuming turns, leg
//! reset at each matched event. No beam, no caching, no shared code with
//! the production search beyond the geometry primitives, so agreement is
//! meaningful evidence.

use crate::cornering::{CorneringLog, TurnDirection};
use crate::error::{Error, Result};
use crate::geo::{classify_turn_with, TurnKind};
use crate::graph::{RoadGraph, VertexId};
use crate::search::CandidatePath;

/// Oracle knobs; deliberately independent of [`crate::search::SearchParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub turn_angle_min_deg: f64,
    pub y_km: f64,
    /// Hard stop on node expansions; exhaustive search on an oversized
    /// instance fails loudly instead of hanging.
    pub expansion_cap: u64,
    /// Optional `(s_average_kmh, total_time_s)` speed band applied to the
    /// enumerated set.
    pub speed_band: Option<(f64, u64)>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            turn_angle_min_deg: crate::geo::TURN_ANGLE_MIN_DEG,
            y_km: 10.0,
            expansion_cap: 2_000_000,
            speed_band: None,
        }
    }
}

struct Walk<'g> {
    g: &'g RoadGraph,
    mc: &'g CorneringLog,
    cfg: &'g OracleConfig,
    expansions: u64,
    out: Vec<CandidatePath>,
}

/// Every complete candidate for `(start, mc)`: paths whose straight legs
/// respect the per-event distance budget and the leg cap, whose marked
/// turns match the log in order and direction, and which end at the vertex
/// marked by the final event.
pub fn oracle_enumerate(
    g: &RoadGraph,
    start: VertexId,
    mc: &CorneringLog,
    cfg: &OracleConfig,
) -> Result<Vec<CandidatePath>> {
    if !g.contains_vertex(start) {
        return Err(Error::UnknownVertex(start));
    }
    let mut walk = Walk {
        g,
        mc,
        cfg,
        expansions: 0,
        out: Vec::new(),
    };
    let mut vertices = vec![start];
    let mut marks = Vec::new();
    walk.dfs(&mut vertices, &mut marks, 0.0, 0, 0, Leg::fresh())?;
    if let Some((s_avg, total_s)) = cfg.speed_band {
        let st = s_avg * total_s as f64 / 3600.0;
        let (lo, hi) = (0.9 * st, 1.1 * st);
        walk.out
            .retain(|p| p.distance_km >= lo && p.distance_km <= hi);
    }
    Ok(walk.out)
}

/// Leg-local accumulator; reset whenever an event is matched.
#[derive(Clone, Copy)]
struct Leg {
    edges: usize,
    dist_km: f64,
    speed_sum: f64,
}

impl Leg {
    fn fresh() -> Self {
        Leg {
            edges: 0,
            dist_km: 0.0,
            speed_sum: 0.0,
        }
    }
}

impl Walk<'_> {
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        vertices: &mut Vec<VertexId>,
        marks: &mut Vec<usize>,
        total_dist: f64,
        event_idx: usize,
        trip_time_s: u64,
        leg: Leg,
    ) -> Result<()> {
        self.expansions += 1;
        if self.expansions > self.cfg.expansion_cap {
            return Err(Error::ExpansionCapExceeded(self.cfg.expansion_cap));
        }
        let event = self.mc.events()[event_idx];
        debug_assert!(event.t_offset_s > trip_time_s);
        let dt_h = (event.t_offset_s - trip_time_s) as f64 / 3600.0;
        let wanted = match event.direction {
            TurnDirection::Left => TurnKind::TurnLeft,
            TurnDirection::Right => TurnKind::TurnRight,
        };
        let last = *vertices.last().unwrap();
        let succs = self.g.successors(last)?;
        for e in succs {
            let ext = Leg {
                edges: leg.edges + 1,
                dist_km: leg.dist_km + e.length_km,
                speed_sum: leg.speed_sum + e.legal_speed_kmh,
            };
            let avg = ext.speed_sum / ext.edges as f64;
            if !(ext.dist_km < avg * dt_h && ext.dist_km <= self.cfg.y_km) {
                continue;
            }
            let kind = if leg.edges == 0 {
                TurnKind::Straight
            } else {
                let n = vertices.len();
                let pb = self.g.edge_bearing_deg(vertices[n - 2], vertices[n - 1])?;
                let nb = self.g.edge_bearing_deg(last, e.to)?;
                classify_turn_with(pb, nb, self.cfg.turn_angle_min_deg).kind
            };
            if kind == TurnKind::Straight {
                vertices.push(e.to);
                self.dfs(
                    vertices,
                    marks,
                    total_dist + e.length_km,
                    event_idx,
                    trip_time_s,
                    ext,
                )?;
                vertices.pop();
            } else if kind == wanted {
                vertices.push(e.to);
                marks.push(vertices.len() - 1);
                if event_idx + 1 == self.mc.len() {
                    self.out.push(CandidatePath {
                        vertices: vertices.clone(),
                        turn_marks: marks.clone(),
                        closed: true,
                        distance_km: total_dist + e.length_km,
                    });
                } else {
                    self.dfs(
                        vertices,
                        marks,
                        total_dist + e.length_km,
                        event_idx + 1,
                        event.t_offset_s,
                        Leg::fresh(),
                    )?;
                }
                marks.pop();
                vertices.pop();
            }
            // an opposite-direction turn is a dead branch
        }
        Ok(())
    }
}
