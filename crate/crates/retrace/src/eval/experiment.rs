//! End-to-end evaluation runs: generate a world, simulate feasible trips,
//! attack each one and aggregate reconstruction metrics.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{closest_standing, max_deviation_km};
use super::trip::{classify_trip_type, route_feasible, simulate_trip, GroundTruthTrip, TripType};
use super::world::{generate_synthetic_world, symmetrize_popularity, SyntheticWorld, WorldConfig};
use crate::attack::retrieve_driver_paths;
use crate::error::{Error, Result};
use crate::graph::{RoadGraph, VertexId};
use crate::popularity::{map_popularities, DEFAULT_CELL_KM, DEFAULT_CUTOFF_KM};
use crate::search::SearchParams;

/// Attempts per trip before giving up on finding a feasible route.
const TRIP_ATTEMPTS: usize = 500;

/// Everything a run needs; identical configs with identical seeds produce
/// identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub world: WorldConfig,
    pub trip_count: usize,
    pub params: SearchParams,
    pub seed: u64,
    /// Route length bounds in edges.
    pub min_route_edges: usize,
    pub max_route_edges: usize,
    /// Driving speed as a fraction of each edge's legal speed. Keep below
    /// 1.0 or the strict distance budget rejects every route.
    pub speed_frac: f64,
    /// Fold mapped popularity onto undirected roads before attacking.
    pub symmetrize: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            world: WorldConfig::default(),
            trip_count: 20,
            params: SearchParams::default(),
            seed: 0,
            min_route_edges: 4,
            max_route_edges: 10,
            speed_frac: 0.7,
            symmetrize: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.params.validate()?;
        if self.min_route_edges < 2 || self.min_route_edges > self.max_route_edges {
            return Err(Error::InvalidConfig(format!(
                "route edge bounds [{}, {}] are invalid",
                self.min_route_edges, self.max_route_edges
            )));
        }
        if !(self.speed_frac > 0.0 && self.speed_frac < 1.0) {
            return Err(Error::InvalidConfig(
                "speed_frac must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Result of attacking one simulated trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripOutcome {
    pub index: usize,
    pub trip_type: TripType,
    pub distance_km: f64,
    pub total_time_s: u64,
    pub s_average_kmh: f64,
    pub turn_events: usize,
    pub candidate_count: usize,
    /// 1-based rank of the geometrically closest candidate; `None` when
    /// the attack produced no candidates.
    pub closest_standing: Option<usize>,
    pub first_deviation_km: Option<f64>,
    pub median_deviation_km: Option<f64>,
    pub random_deviation_km: Option<f64>,
    pub error: Option<String>,
}

/// Run-level summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trips: usize,
    pub trips_with_candidates: usize,
    pub top_standing_fraction: f64,
    pub mean_closest_standing: f64,
    pub mean_first_deviation_km: f64,
    pub mean_median_deviation_km: f64,
    pub mean_random_deviation_km: f64,
    pub spearman_distance_vs_standing: Option<f64>,
    pub spearman_time_vs_standing: Option<f64>,
    pub spearman_speed_vs_standing: Option<f64>,
}

/// A full evaluation report: config echo, per-trip rows and aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub outcomes: Vec<TripOutcome>,
    pub aggregates: Aggregates,
}

/// Sample a feasible ground-truth trip by biased random walk with
/// resampling. Walks prefer straight continuations so the first corner
/// lands far enough from the start for the distance budget, and the route
/// is truncated at the vertex marked by its final corner.
pub fn sample_trip(
    world: &SyntheticWorld,
    g: &RoadGraph,
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<GroundTruthTrip> {
    let vertices: Vec<VertexId> = g.vertices().map(|v| v.id).collect();
    for _ in 0..TRIP_ATTEMPTS {
        let len = rng.gen_range(config.min_route_edges..=config.max_route_edges);
        let mut route = vec![vertices[rng.gen_range(0..vertices.len())]];
        let mut prev: Option<VertexId> = None;
        for step in 0..len {
            let current = *route.last().unwrap();
            let succs = g.successors(current)?;
            let choices: Vec<_> = succs.iter().filter(|e| Some(e.to) != prev).collect();
            if choices.is_empty() {
                break;
            }
            // straight-preference keeps corners sparse; early steps are
            // forced straight when possible so the first leg earns its
            // distance budget
            let straight: Vec<_> = choices
                .iter()
                .filter(|e| {
                    route.len() < 2
                        || g.edge_bearing_deg(route[route.len() - 2], current)
                            .and_then(|pb| {
                                g.edge_bearing_deg(current, e.to).map(|nb| {
                                    crate::geo::classify_turn_with(
                                        pb,
                                        nb,
                                        config.params.turn_angle_min_deg,
                                    )
                                    .kind
                                        == crate::geo::TurnKind::Straight
                                })
                            })
                            .unwrap_or(false)
                })
                .copied()
                .collect();
            let force_straight = step < 3 && !straight.is_empty();
            let go_straight = !straight.is_empty() && (force_straight || rng.gen_bool(0.7));
            let pool = if go_straight { &straight } else { &choices };
            let e = pool[rng.gen_range(0..pool.len())];
            prev = Some(current);
            route.push(e.to);
        }
        if route.len() < 3 {
            continue;
        }
        // truncate at the vertex marked by the last corner
        let mut last_corner: Option<usize> = None;
        for j in 1..route.len() - 1 {
            let pb = g.edge_bearing_deg(route[j - 1], route[j])?;
            let nb = g.edge_bearing_deg(route[j], route[j + 1])?;
            let kind =
                crate::geo::classify_turn_with(pb, nb, config.params.turn_angle_min_deg).kind;
            if kind != crate::geo::TurnKind::Straight {
                last_corner = Some(j);
            }
        }
        let Some(j) = last_corner else { continue };
        route.truncate(j + 2);
        if route.len() - 1 < config.min_route_edges {
            continue;
        }
        let speeds: Vec<f64> = route
            .windows(2)
            .map(|w| {
                g.edge(w[0], w[1])
                    .map(|e| e.legal_speed_kmh * config.speed_frac)
                    .ok_or(Error::MissingEdge(w[0], w[1]))
            })
            .collect::<Result<_>>()?;
        let trip = match simulate_trip(world, &route, &speeds, config.params.turn_angle_min_deg)
        {
            Ok(t) => t,
            Err(Error::NoTurnEvents) => continue,
            Err(e) => return Err(e),
        };
        if route_feasible(g, &route, &trip.mc, &config.params)? {
            return Ok(trip);
        }
    }
    Err(Error::InvalidConfig(format!(
        "no feasible trip found in {TRIP_ATTEMPTS} attempts; widen the route bounds"
    )))
}

/// Run the full evaluation. Per-trip attack failures are recorded in the
/// outcome rows, not fatal; generation failures are fatal because they
/// indicate a misconfigured world.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let world = generate_synthetic_world(&config.world, config.seed)?;
    let (mapped, _) = map_popularities(
        &world.graph,
        &world.corpus,
        DEFAULT_CELL_KM,
        DEFAULT_CUTOFF_KM,
    )?;
    let g = if config.symmetrize {
        symmetrize_popularity(&mapped)
    } else {
        mapped
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
    let mut outcomes = Vec::with_capacity(config.trip_count);
    for index in 0..config.trip_count {
        let truth = sample_trip(&world, &g, config, &mut rng)?;
        let trip_type = classify_trip_type(&truth)?;
        let mut outcome = TripOutcome {
            index,
            trip_type,
            distance_km: truth.distance_km,
            total_time_s: truth.trip.total_time_s,
            s_average_kmh: truth.trip.s_average_kmh,
            turn_events: truth.mc.len(),
            candidate_count: 0,
            closest_standing: None,
            first_deviation_km: None,
            median_deviation_km: None,
            random_deviation_km: None,
            error: None,
        };
        match retrieve_driver_paths(&g, &truth.trip, &truth.mc, &config.params) {
            Ok(result) if !result.is_empty() => {
                outcome.candidate_count = result.len();
                outcome.closest_standing = Some(closest_standing(&g, &result, &truth.route)?);
                let dev = |i: usize| -> Result<f64> {
                    max_deviation_km(&g, &result.entries[i].path.vertices, &truth.route)
                };
                outcome.first_deviation_km = Some(dev(0)?);
                let median = (result.len() + 1) / 2 - 1;
                outcome.median_deviation_km = Some(dev(median)?);
                outcome.random_deviation_km = Some(dev(rng.gen_range(0..result.len()))?);
            }
            Ok(_) => {}
            Err(e) => outcome.error = Some(e.to_string()),
        }
        outcomes.push(outcome);
    }

    let aggregates = aggregate(&outcomes);
    Ok(EvalReport {
        config: config.clone(),
        outcomes,
        aggregates,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn aggregate(outcomes: &[TripOutcome]) -> Aggregates {
    let with: Vec<&TripOutcome> = outcomes
        .iter()
        .filter(|o| o.closest_standing.is_some())
        .collect();
    let standings: Vec<f64> = with
        .iter()
        .map(|o| o.closest_standing.unwrap() as f64)
        .collect();
    let pairs = |f: fn(&TripOutcome) -> f64| -> (Vec<f64>, Vec<f64>) {
        (with.iter().map(|o| f(o)).collect(), standings.clone())
    };
    let (d, s1) = pairs(|o| o.distance_km);
    let (t, s2) = pairs(|o| o.total_time_s as f64);
    let (v, s3) = pairs(|o| o.s_average_kmh);
    Aggregates {
        trips: outcomes.len(),
        trips_with_candidates: with.len(),
        top_standing_fraction: if with.is_empty() {
            f64::NAN
        } else {
            with.iter()
                .filter(|o| o.closest_standing == Some(1))
                .count() as f64
                / with.len() as f64
        },
        mean_closest_standing: mean(standings.iter().copied()),
        mean_first_deviation_km: mean(with.iter().filter_map(|o| o.first_deviation_km)),
        mean_median_deviation_km: mean(with.iter().filter_map(|o| o.median_deviation_km)),
        mean_random_deviation_km: mean(with.iter().filter_map(|o| o.random_deviation_km)),
        spearman_distance_vs_standing: spearman(&d, &s1),
        spearman_time_vs_standing: spearman(&t, &s2),
        spearman_speed_vs_standing: spearman(&v, &s3),
    }
}

/// Fractional ranks with ties averaged.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// fewer than two pairs or either variable is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let mx = mean(rx.iter().copied());
    let my = mean(ry.iter().copied());
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Write `report.json` plus the CSV series the analysis scripts expect.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join("report.json");
    let mut f = File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
    serde_json::to_writer_pretty(&mut f, report)?;
    writeln!(f).map_err(|e| Error::io(&json_path, e))?;

    let with: Vec<&TripOutcome> = report
        .outcomes
        .iter()
        .filter(|o| o.closest_standing.is_some())
        .collect();
    let series = |name: &str, header: &str, rows: &dyn Fn(&TripOutcome) -> String| -> Result<()> {
        let path = dir.join(name);
        let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        writeln!(f, "{header}").map_err(|e| Error::io(&path, e))?;
        for o in &with {
            writeln!(f, "{}", rows(o)).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    };
    let standing = |o: &TripOutcome| o.closest_standing.unwrap();
    series("standings_vs_distance.csv", "distance_km,standing", &|o| {
        format!("{},{}", o.distance_km, standing(o))
    })?;
    series("standings_vs_time.csv", "total_time_s,standing", &|o| {
        format!("{},{}", o.total_time_s, standing(o))
    })?;
    series("standings_vs_speed.csv", "s_average_kmh,standing", &|o| {
        format!("{},{}", o.s_average_kmh, standing(o))
    })?;
    series(
        "deviation_vs_distance.csv",
        "distance_km,first_deviation_km",
        &|o| format!("{},{}", o.distance_km, o.first_deviation_km.unwrap()),
    )?;
    series(
        "deviation_vs_time.csv",
        "total_time_s,first_deviation_km",
        &|o| format!("{},{}", o.total_time_s, o.first_deviation_km.unwrap()),
    )?;
    series(
        "deviation_vs_speed.csv",
        "s_average_kmh,first_deviation_km",
        &|o| format!("{},{}", o.s_average_kmh, o.first_deviation_km.unwrap()),
    )?;

    let mut by_type: BTreeMap<String, (usize, f64, f64)> = BTreeMap::new();
    for o in &with {
        let e = by_type
            .entry(format!("{:?}", o.trip_type))
            .or_insert((0, 0.0, 0.0));
        e.0 += 1;
        e.1 += o.closest_standing.unwrap() as f64;
        e.2 += o.first_deviation_km.unwrap();
    }
    let path = dir.join("type_comparison.csv");
    let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    writeln!(f, "trip_type,count,mean_standing,mean_first_deviation_km")
        .map_err(|e| Error::io(&path, e))?;
    for (ty, (n, s, d)) in by_type {
        writeln!(f, "{ty},{n},{},{}", s / n as f64, d / n as f64)
            .map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
