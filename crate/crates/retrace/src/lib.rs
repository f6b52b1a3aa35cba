//! Reconstruction of driver trajectories from usage-based-insurance
//! telematics data.
//!
//! Given a road graph weighted with GPS-trace popularities, a trip's
//! starting intersection, its cornering-event log, average speed and total
//! time, this crate enumerates and ranks the candidate paths the driver may
//! have taken. An evaluation harness measures reconstruction quality on
//! synthetic worlds.
//!
//! The pipeline, end to end:
//!
//! 1. [`popularity`] assigns a traffic-volume proxy to every road from a
//!    corpus of GPS traces (nearest-edge counting).
//! 2. [`search`] enumerates candidate paths consistent with the cornering
//!    log under per-leg time budgets, beam-pruned by popularity.
//! 3. [`attack`] filters candidates to the ±10% average-speed distance band
//!    and ranks the survivors by average popularity.
//! 4. [`eval`] generates seeded synthetic worlds, simulates ground-truth
//!    trips and scores the reconstruction.
//!
//! A complete attack on a five-vertex toy network:
//!
//! ```
//! use retrace::attack::retrieve_driver_paths;
//! use retrace::cornering::{CorneringLog, TripAttributes, TurnDirection, TurnEvent};
//! use retrace::geo::GeoPoint;
//! use retrace::graph::{RoadGraph, VertexId};
//! use retrace::search::SearchParams;
//!
//! // an eastbound corridor 0 -> 1 -> 2 that forks south (3) and north (4)
//! let mut g = RoadGraph::new();
//! for (id, lat, lon) in [(0, 0.0, 0.0), (1, 0.0, 0.01), (2, 0.0, 0.02),
//!                        (3, -0.01, 0.02), (4, 0.01, 0.02)] {
//!     g.add_vertex(VertexId(id), GeoPoint::new(lat, lon)?);
//! }
//! for (a, b) in [(0, 1), (1, 2), (2, 3), (2, 4)] {
//!     g.add_edge(VertexId(a), VertexId(b), 50.0, Some(1.0))?;
//! }
//! let mut pops = std::collections::BTreeMap::new();
//! pops.insert((VertexId(2), VertexId(3)), 8u64);
//! let g = g.with_popularities(&pops);
//!
//! // the attacker sees: start 0, one right turn at t=300s, 36 km/h, 300 s
//! let mc = CorneringLog::new(vec![TurnEvent {
//!     direction: TurnDirection::Right,
//!     t_offset_s: 300,
//! }])?;
//! let trip = TripAttributes::new(VertexId(0), 36.0, 300)?;
//!
//! let result = retrieve_driver_paths(&g, &trip, &mc, &SearchParams::default())?;
//! assert_eq!(result.len(), 1);
//! assert_eq!(
//!     result.entries[0].path.vertices,
//!     vec![VertexId(0), VertexId(1), VertexId(2), VertexId(3)]
//! );
//! # Ok::<(), retrace::Error>(())
//! ```
//!
//! See the book under `book/` for a guided tour.

pub mod attack;
pub mod cornering;
pub mod error;
pub mod eval;
pub mod geo;
pub mod graph;
pub mod popularity;
pub mod search;

pub use error::{Error, Result};
