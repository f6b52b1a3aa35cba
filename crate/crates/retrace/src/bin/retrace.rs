//! Command-line front end: popularity mapping, the attack itself, synthetic
//! world simulation and full evaluation runs.
//!
//! Machine-readable output goes to files or standard output; diagnostics go
//! to standard error. Exit status is 0 exactly when no component failed; an
//! empty attack result is a reported outcome, not a failure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retrace::attack::{retrieve_driver_paths, write_result_jsonl};
use retrace::cornering::{
    parse_cornering_log, parse_trip_attributes, serialize_cornering_log,
    serialize_trip_attributes,
};
use retrace::error::Error;
use retrace::eval::{
    run_experiment, write_report, ExperimentConfig, WorldConfig,
};
use retrace::graph::{load_graph_files, save_graph, save_popularity_sidecar};
use retrace::popularity::{
    load_corpus_dir, map_popularities, DEFAULT_CELL_KM, DEFAULT_CUTOFF_KM,
};
use retrace::search::SearchParams;

#[derive(Parser)]
#[command(name = "retrace", version, about = "Driver path reconstruction from cornering logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArgs {
    /// Vertex CSV: id,lat,lon
    #[arg(long = "graph-nodes")]
    graph_nodes: PathBuf,
    /// Edge CSV: from,to,legal_speed_kmh[,length_km]
    #[arg(long = "graph-edges")]
    graph_edges: PathBuf,
}

#[derive(Args)]
struct ParamArgs {
    /// Beam width h, at least 1
    #[arg(long, default_value_t = 2)]
    beam: usize,
    /// Turn cap m per search round
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Straight-leg distance cap Y, kilometers
    #[arg(long = "y-km", default_value_t = 10.0)]
    y_km: f64,
    /// Floor legal speed seeding the distance budget, km/h
    #[arg(long = "residential-speed", default_value_t = 50.0)]
    residential_speed: f64,
}

impl ParamArgs {
    fn to_params(&self) -> SearchParams {
        SearchParams {
            beam_width: Some(self.beam),
            max_new_turns: self.m,
            y_km: self.y_km,
            residential_speed_kmh: self.residential_speed,
            ..SearchParams::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Count GPS trace points onto their nearest edges and write the
    /// popularity sidecar
    BuildPopularity {
        #[command(flatten)]
        graph: GraphArgs,
        /// Directory of trace CSVs: lat,lon[,timestamp]
        #[arg(long)]
        traces: PathBuf,
        /// Output popularity sidecar CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct and rank candidate driver paths for one trip
    Attack {
        #[command(flatten)]
        graph: GraphArgs,
        /// Popularity sidecar CSV: from,to,popularity
        #[arg(long)]
        popularity: PathBuf,
        /// Cornering event log CSV: direction,t_offset_s
        #[arg(long)]
        mc: PathBuf,
        /// Trip attributes CSV: start_vertex,s_average_kmh,total_time_s
        #[arg(long)]
        trip: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Output JSON-lines file; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic world and ground-truth trips into a directory
    Simulate {
        #[arg(long, default_value_t = 6)]
        rows: usize,
        #[arg(long, default_value_t = 6)]
        cols: usize,
        /// Ground-truth trips to simulate
        #[arg(long, default_value_t = 1)]
        trips: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded end-to-end experiment and write the report
    Evaluate {
        #[arg(long, default_value_t = 6)]
        rows: usize,
        #[arg(long, default_value_t = 6)]
        cols: usize,
        /// Trips to simulate and attack
        #[arg(long, default_value_t = 20)]
        trips: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: ParamArgs,
        /// Output directory for report.json and CSV series
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> retrace::Result<()> {
    match cli.command {
        Command::BuildPopularity { graph, traces, out } => {
            let g = load_graph_files(&graph.graph_nodes, &graph.graph_edges, None)?;
            let corpus = load_corpus_dir(&traces)?;
            if corpus.total_points() == 0 {
                eprintln!("warning: trace corpus is empty; sidecar will be all zeros");
            }
            let (mapped, summary) =
                map_popularities(&g, &corpus, DEFAULT_CELL_KM, DEFAULT_CUTOFF_KM)?;
            let mut f = BufWriter::new(File::create(&out).map_err(|e| Error::io(&out, e))?);
            save_popularity_sidecar(&mapped, &mut f)?;
            f.flush().map_err(|e| Error::io(&out, e))?;
            println!(
                "mapped {} points ({} discarded), max edge popularity {}",
                summary.points_processed, summary.points_discarded, summary.max_popularity
            );
            Ok(())
        }
        Command::Attack {
            graph,
            popularity,
            mc,
            trip,
            params,
            out,
        } => {
            let g = load_graph_files(&graph.graph_nodes, &graph.graph_edges, Some(&popularity))?;
            let mc = parse_cornering_log(BufReader::new(
                File::open(&mc).map_err(|e| Error::io(&mc, e))?,
            ))?;
            let trip = parse_trip_attributes(BufReader::new(
                File::open(&trip).map_err(|e| Error::io(&trip, e))?,
            ))?;
            let result = retrieve_driver_paths(&g, &trip, &mc, &params.to_params())?;
            match out {
                Some(path) => {
                    let mut f =
                        BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
                    write_result_jsonl(&result, &mut f)?;
                    f.flush().map_err(|e| Error::io(&path, e))?;
                }
                None => {
                    let stdout = std::io::stdout();
                    write_result_jsonl(&result, &mut stdout.lock())?;
                }
            }
            eprintln!("{} candidate path(s)", result.len());
            Ok(())
        }
        Command::Simulate {
            rows,
            cols,
            trips,
            seed,
            out,
        } => cmd_simulate(rows, cols, trips, seed, &out),
        Command::Evaluate {
            rows,
            cols,
            trips,
            seed,
            params,
            out,
        } => {
            let config = ExperimentConfig {
                world: WorldConfig {
                    rows,
                    cols,
                    ..WorldConfig::default()
                },
                trip_count: trips,
                params: params.to_params(),
                seed,
                ..ExperimentConfig::default()
            };
            let report = run_experiment(&config)?;
            write_report(&report, &out)?;
            eprintln!(
                "evaluated {} trip(s), {} with candidates",
                report.aggregates.trips, report.aggregates.trips_with_candidates
            );
            Ok(())
        }
    }
}

fn cmd_simulate(
    rows: usize,
    cols: usize,
    trips: usize,
    seed: u64,
    out: &std::path::Path,
) -> retrace::Result<()> {
    use rand::SeedableRng;

    let config = ExperimentConfig {
        world: WorldConfig {
            rows,
            cols,
            ..WorldConfig::default()
        },
        seed,
        ..ExperimentConfig::default()
    };
    let world = retrace::eval::generate_synthetic_world(&config.world, seed)?;
    let (mapped, _) = map_popularities(
        &world.graph,
        &world.corpus,
        DEFAULT_CELL_KM,
        DEFAULT_CUTOFF_KM,
    )?;
    let g = retrace::eval::symmetrize_popularity(&mapped);

    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let create = |name: &str| -> retrace::Result<BufWriter<File>> {
        let path = out.join(name);
        Ok(BufWriter::new(
            File::create(&path).map_err(|e| Error::io(&path, e))?,
        ))
    };
    let (mut nodes, mut edges) = (create("nodes.csv")?, create("edges.csv")?);
    save_graph(&g, &mut nodes, &mut edges)?;
    let mut sidecar = create("popularity.csv")?;
    save_popularity_sidecar(&g, &mut sidecar)?;

    let traces_dir = out.join("traces");
    std::fs::create_dir_all(&traces_dir).map_err(|e| Error::io(&traces_dir, e))?;
    for trace in &world.corpus.traces {
        let path = traces_dir.join(format!("{}.csv", trace.name));
        let mut f = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
        for p in &trace.points {
            writeln!(f, "{},{}", p.lat_deg, p.lon_deg).map_err(|e| Error::io(&path, e))?;
        }
        f.flush().map_err(|e| Error::io(&path, e))?;
    }

    let mut rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
    for i in 0..trips {
        let truth = retrace::eval::sample_trip(&world, &g, &config, &mut rng)?;
        let mut mc_file = create(&format!("trip{i:03}.mc.csv"))?;
        serialize_cornering_log(&truth.mc, &mut mc_file)?;
        let mut trip_file = create(&format!("trip{i:03}.trip.csv"))?;
        serialize_trip_attributes(&truth.trip, &mut trip_file)?;
        let route_path = out.join(format!("trip{i:03}.route.csv"));
        let mut route_file =
            BufWriter::new(File::create(&route_path).map_err(|e| Error::io(&route_path, e))?);
        writeln!(route_file, "vertex").map_err(|e| Error::io(&route_path, e))?;
        for v in &truth.route {
            writeln!(route_file, "{}", v.0).map_err(|e| Error::io(&route_path, e))?;
        }
    }
    eprintln!(
        "wrote {rows}x{cols} world with {} trace(s) and {trips} trip(s) to {}",
        world.corpus.traces.len(),
        out.display()
    );
    Ok(())
}
