//! Ground-truth experiments: synthetic world generation, trip simulation,
//! a brute-force enumeration oracle and reconstruction-quality metrics.

mod experiment;
mod metrics;
mod oracle;
mod trip;
mod world;

pub use experiment::{
    run_experiment, sample_trip, spearman, write_report, Aggregates, EvalReport,
    ExperimentConfig, TripOutcome,
};
pub use metrics::{closest_standing, max_deviation_km};
pub use oracle::{oracle_enumerate, OracleConfig};
pub use trip::{classify_trip_type, route_feasible, simulate_trip, GroundTruthTrip, TripType};
pub use world::{
    generate_synthetic_world, symmetrize_popularity, RoadClass, SyntheticWorld, WorldConfig,
};
