//! Ground-truth trip simulation: drive a route at known speeds and derive
//! the attacker-visible view (cornering log, average speed, total time).

use serde::{Deserialize, Serialize};

use super::world::{RoadClass, SyntheticWorld};
use crate::cornering::{CorneringLog, TripAttributes, TurnDirection, TurnEvent};
use crate::error::{Error, Result};
use crate::geo::{classify_turn_with, TurnKind};
use crate::graph::{RoadGraph, VertexId};
use crate::search::SearchParams;

/// A simulated trip with its derived attacker inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthTrip {
    pub route: Vec<VertexId>,
    /// Per-edge travel speeds, km/h; each at most the edge's legal speed.
    pub edge_speeds_kmh: Vec<f64>,
    pub mc: CorneringLog,
    pub trip: TripAttributes,
    pub edge_classes: Vec<RoadClass>,
    pub distance_km: f64,
}

/// The trajectory taxonomy of the trip-type analysis. Trips that never
/// touch a highway get the fourth label and are excluded from the
/// three-way comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TripType {
    ResidentialToHighway,
    ResidentialHighwayResidential,
    StartsFromHighway,
    AllResidential,
}

/// Drive `route` at the given per-edge speeds and derive the cornering log
/// and trip attributes. Event times are the instants the corner vertices
/// are reached, rounded to whole seconds.
pub fn simulate_trip(
    world: &SyntheticWorld,
    route: &[VertexId],
    edge_speeds_kmh: &[f64],
    turn_angle_min_deg: f64,
) -> Result<GroundTruthTrip> {
    let g = &world.graph;
    if route.len() < 2 {
        return Err(Error::PathTooShort {
            need: 2,
            got: route.len(),
        });
    }
    if edge_speeds_kmh.len() != route.len() - 1 {
        return Err(Error::InvalidValue {
            field: "edge_speeds_kmh".into(),
            message: format!(
                "expected {} per-edge speeds, got {}",
                route.len() - 1,
                edge_speeds_kmh.len()
            ),
        });
    }

    let mut edge_classes = Vec::with_capacity(route.len() - 1);
    let mut cumulative_s = vec![0.0f64];
    let mut distance_km = 0.0;
    for (i, pair) in route.windows(2).enumerate() {
        let e = g
            .edge(pair[0], pair[1])
            .ok_or(Error::MissingEdge(pair[0], pair[1]))?;
        let v = edge_speeds_kmh[i];
        if !(v > 0.0) || v > e.legal_speed_kmh {
            return Err(Error::InvalidValue {
                field: format!("edge_speeds_kmh[{i}]"),
                message: format!("must be in (0, {}], got {v}", e.legal_speed_kmh),
            });
        }
        edge_classes.push(
            world
                .edge_class(pair[0], pair[1])
                .ok_or(Error::UnlabeledEdge(pair[0], pair[1]))?,
        );
        distance_km += e.length_km;
        cumulative_s.push(cumulative_s[i] + e.length_km / v * 3600.0);
    }

    let mut events = Vec::new();
    for (i, w) in route.windows(3).enumerate() {
        let prev = g.edge_bearing_deg(w[0], w[1])?;
        let next = g.edge_bearing_deg(w[1], w[2])?;
        let class = classify_turn_with(prev, next, turn_angle_min_deg);
        let direction = match class.kind {
            TurnKind::Straight => continue,
            TurnKind::TurnLeft => TurnDirection::Left,
            TurnKind::TurnRight => TurnDirection::Right,
        };
        events.push(TurnEvent {
            direction,
            // the corner vertex is route[i + 1]
            t_offset_s: cumulative_s[i + 1].round() as u64,
        });
    }
    if events.is_empty() {
        return Err(Error::NoTurnEvents);
    }
    let mc = CorneringLog::new(events)?;
    let total_time_s = cumulative_s.last().unwrap().round().max(1.0) as u64;
    let s_average_kmh = distance_km / (total_time_s as f64 / 3600.0);
    let trip = TripAttributes::new(route[0], s_average_kmh, total_time_s)?;
    Ok(GroundTruthTrip {
        route: route.to_vec(),
        edge_speeds_kmh: edge_speeds_kmh.to_vec(),
        mc,
        trip,
        edge_classes,
        distance_km,
    })
}

/// Type a trip from its first-edge class and the class sequence.
pub fn classify_trip_type(trip: &GroundTruthTrip) -> Result<TripType> {
    let first = *trip
        .edge_classes
        .first()
        .ok_or_else(|| Error::InvalidValue {
            field: "edge_classes".into(),
            message: "empty".into(),
        })?;
    let last = *trip.edge_classes.last().unwrap();
    let any_highway = trip.edge_classes.contains(&RoadClass::Highway);
    Ok(match (first, last, any_highway) {
        (RoadClass::Highway, _, _) => TripType::StartsFromHighway,
        (_, RoadClass::Highway, _) => TripType::ResidentialToHighway,
        (_, _, true) => TripType::ResidentialHighwayResidential,
        (_, _, false) => TripType::AllResidential,
    })
}

/// Check whether a ground-truth route satisfies every per-leg admission
/// rule of the search for its own derived cornering log: straight legs
/// between events, per-extension distance budgets, the straight-leg cap,
/// and the detectability of each logged turn.
///
/// Routes passing this check are guaranteed to appear in the beam-disabled
/// candidate set.
pub fn route_feasible(
    g: &RoadGraph,
    route: &[VertexId],
    mc: &CorneringLog,
    params: &SearchParams,
) -> Result<bool> {
    let mut event_idx = 0usize;
    let mut trip_time = 0u64;
    // leg state
    let mut leg_dist = 0.0f64;
    let mut leg_speed_sum = 0.0f64;
    let mut leg_edges = 0usize;
    let mut leg_start = 0usize; // route index where the current leg began

    for i in 0..route.len() - 1 {
        if event_idx >= mc.len() {
            // edges after the final event: candidates end at the final
            // turn-marked vertex, so trailing edges make recovery
            // impossible
            return Ok(false);
        }
        let event = mc.events()[event_idx];
        if event.t_offset_s <= trip_time {
            return Ok(false);
        }
        let dt_h = (event.t_offset_s - trip_time) as f64 / 3600.0;
        let e = g
            .edge(route[i], route[i + 1])
            .ok_or(Error::MissingEdge(route[i], route[i + 1]))?;
        let ext_dist = leg_dist + e.length_km;
        let avg = (leg_speed_sum + e.legal_speed_kmh) / (leg_edges + 1) as f64;
        if !(ext_dist < avg * dt_h && ext_dist <= params.y_km) {
            return Ok(false);
        }

        // classify this step the way the search would
        let is_corner = if i == leg_start {
            // leg-first edge: no previous bearing, always straight
            false
        } else {
            let prev = g.edge_bearing_deg(route[i - 1], route[i])?;
            let next = g.edge_bearing_deg(route[i], route[i + 1])?;
            let class = classify_turn_with(prev, next, params.turn_angle_min_deg);
            match class.kind {
                TurnKind::Straight => false,
                TurnKind::TurnLeft => {
                    if event.direction != crate::cornering::TurnDirection::Left {
                        return Ok(false); // opposite-direction turn mid-leg
                    }
                    true
                }
                TurnKind::TurnRight => {
                    if event.direction != crate::cornering::TurnDirection::Right {
                        return Ok(false);
                    }
                    true
                }
            }
        };

        if is_corner {
            // the corner is at route[i]; the marked vertex is route[i + 1]
            trip_time = event.t_offset_s;
            event_idx += 1;
            leg_dist = 0.0;
            leg_speed_sum = 0.0;
            leg_edges = 0;
            leg_start = i + 1;
        } else {
            leg_dist = ext_dist;
            leg_speed_sum += e.legal_speed_kmh;
            leg_edges += 1;
        }
    }
    // every event consumed and the route ends exactly at the last marked
    // vertex
    Ok(event_idx == mc.len())
}
