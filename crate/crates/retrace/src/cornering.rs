//! Attacker inputs: the cornering-event log (MC file) and trip attributes.
//!
//! Cornering times are offsets in whole seconds from the trip start, not
//! wall clock. The direction vocabulary is binary left/right.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::VertexId;

/// Which way the driver turned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TurnDirection {
    Left,
    Right,
}

impl TurnDirection {
    fn parse(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "l" | "left" => Some(TurnDirection::Left),
            "r" | "right" => Some(TurnDirection::Right),
            _ => None,
        }
    }

    fn token(self) -> &'static str {
        match self {
            TurnDirection::Left => "L",
            TurnDirection::Right => "R",
        }
    }
}

/// One detected cornering event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnEvent {
    pub direction: TurnDirection,
    /// Seconds since trip start; the instant the turn vertex is reached.
    pub t_offset_s: u64,
}

/// The ordered cornering log. Times are strictly increasing and the log is
/// never empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorneringLog {
    events: Vec<TurnEvent>,
}

impl CorneringLog {
    pub fn new(events: Vec<TurnEvent>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyCorneringLog);
        }
        for (i, pair) in events.windows(2).enumerate() {
            if pair[1].t_offset_s <= pair[0].t_offset_s {
                return Err(Error::NonMonotonicLog { row: i + 2 });
            }
        }
        Ok(CorneringLog { events })
    }

    pub fn events(&self) -> &[TurnEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        false // by construction; kept for clippy's len/is_empty pairing
    }

    pub fn last_time_s(&self) -> u64 {
        self.events.last().expect("log is never empty").t_offset_s
    }
}

/// What the attacker knows about the trip besides the cornering log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripAttributes {
    pub start_vertex: VertexId,
    pub s_average_kmh: f64,
    pub total_time_s: u64,
}

impl TripAttributes {
    pub fn new(start_vertex: VertexId, s_average_kmh: f64, total_time_s: u64) -> Result<Self> {
        if !(s_average_kmh > 0.0) {
            return Err(Error::InvalidValue {
                field: "s_average_kmh".into(),
                message: format!("must be positive, got {s_average_kmh}"),
            });
        }
        if total_time_s == 0 {
            return Err(Error::InvalidValue {
                field: "total_time_s".into(),
                message: "must be positive".into(),
            });
        }
        Ok(TripAttributes {
            start_vertex,
            s_average_kmh,
            total_time_s,
        })
    }
}

/// Parse an MC file: headerless CSV, `direction,t_offset_s` per row, with
/// direction one of L/R (long forms accepted, case-insensitive).
///
/// ```
/// use retrace::cornering::{parse_cornering_log, TurnDirection};
/// let log = parse_cornering_log("R,30\nL,75\n".as_bytes()).unwrap();
/// assert_eq!(log.len(), 2);
/// assert_eq!(log.events()[0].direction, TurnDirection::Right);
/// ```
pub fn parse_cornering_log(source: impl Read) -> Result<CorneringLog> {
    let reader = BufReader::new(source);
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| parse_err("mc", row, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let dir_token = parts.next().unwrap_or_default();
        let time_token = parts
            .next()
            .ok_or_else(|| parse_err("mc", row, "missing time field".into()))?;
        let direction = TurnDirection::parse(dir_token)
            .ok_or_else(|| parse_err("mc", row, format!("unknown direction token {dir_token:?}")))?;
        let t_offset_s: u64 = time_token
            .trim()
            .parse()
            .map_err(|_| parse_err("mc", row, format!("bad time {time_token:?}")))?;
        events.push(TurnEvent {
            direction,
            t_offset_s,
        });
    }
    CorneringLog::new(events)
}

/// Write a cornering log in the MC format.
pub fn serialize_cornering_log(log: &CorneringLog, out: &mut impl Write) -> Result<()> {
    for e in log.events() {
        writeln!(out, "{},{}", e.direction.token(), e.t_offset_s)
            .map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

/// Parse a trip file: one CSV row `start_vertex,s_average_kmh,total_time_s`.
///
/// Whether the start vertex exists in the graph is checked by the attack,
/// not here.
pub fn parse_trip_attributes(source: impl Read) -> Result<TripAttributes> {
    let reader = BufReader::new(source);
    let line = reader
        .lines()
        .map(|l| l.map_err(|e| parse_err("trip", 1, e.to_string())))
        .find(|l| match l {
            Ok(s) => !s.trim().is_empty(),
            Err(_) => true,
        })
        .ok_or_else(|| parse_err("trip", 1, "empty file".into()))??;
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != 3 {
        return Err(parse_err("trip", 1, format!("expected 3 fields: {line:?}")));
    }
    let start: u64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| parse_err("trip", 1, format!("bad start vertex {:?}", parts[0])))?;
    let speed: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| parse_err("trip", 1, format!("bad average speed {:?}", parts[1])))?;
    let time: i64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| parse_err("trip", 1, format!("bad total time {:?}", parts[2])))?;
    if time <= 0 {
        return Err(Error::InvalidValue {
            field: "total_time_s".into(),
            message: format!("must be positive, got {time}"),
        });
    }
    TripAttributes::new(VertexId(start), speed, time as u64)
}

/// Write trip attributes in the single-row trip format.
pub fn serialize_trip_attributes(trip: &TripAttributes, out: &mut impl Write) -> Result<()> {
    writeln!(
        out,
        "{},{},{}",
        trip.start_vertex, trip.s_average_kmh, trip.total_time_s
    )
    .map_err(|e| Error::io("<writer>", e))
}

fn parse_err(path: &str, line: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_basic_log() {
        let log = parse_cornering_log("R,30\nL,75\n".as_bytes()).unwrap();
        assert_eq!(
            log.events(),
            &[
                TurnEvent {
                    direction: TurnDirection::Right,
                    t_offset_s: 30
                },
                TurnEvent {
                    direction: TurnDirection::Left,
                    t_offset_s: 75
                },
            ]
        );
    }

    #[test]
    fn long_form_directions_accepted() {
        let log = parse_cornering_log("left,10\nRIGHT,20\n".as_bytes()).unwrap();
        assert_eq!(log.events()[0].direction, TurnDirection::Left);
        assert_eq!(log.events()[1].direction, TurnDirection::Right);
    }

    #[test]
    fn non_monotonic_times_rejected() {
        let err = parse_cornering_log("R,30\nR,20\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NonMonotonicLog { row: 2 }));
    }

    #[test]
    fn unknown_direction_rejected() {
        assert!(parse_cornering_log("X,10\n".as_bytes()).is_err());
    }

    #[test]
    fn empty_log_rejected() {
        assert!(matches!(
            parse_cornering_log("".as_bytes()),
            Err(Error::EmptyCorneringLog)
        ));
    }

    #[test]
    fn parse_trip() {
        let t = parse_trip_attributes("5,28.4,600".as_bytes()).unwrap();
        assert_eq!(t.start_vertex, VertexId(5));
        assert_eq!(t.s_average_kmh, 28.4);
        assert_eq!(t.total_time_s, 600);
    }

    #[test]
    fn trip_rejects_nonpositive_values() {
        assert!(parse_trip_attributes("5,0,600".as_bytes()).is_err());
        assert!(parse_trip_attributes("5,28.4,-1".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn log_round_trips(
            dirs in proptest::collection::vec(proptest::bool::ANY, 1..20),
            gaps in proptest::collection::vec(1u64..500, 1..20),
        ) {
            let n = dirs.len().min(gaps.len());
            let mut t = 0u64;
            let events: Vec<TurnEvent> = (0..n).map(|i| {
                t += gaps[i];
                TurnEvent {
                    direction: if dirs[i] { TurnDirection::Left } else { TurnDirection::Right },
                    t_offset_s: t,
                }
            }).collect();
            let log = CorneringLog::new(events).unwrap();
            let mut buf = Vec::new();
            serialize_cornering_log(&log, &mut buf).unwrap();
            let parsed = parse_cornering_log(buf.as_slice()).unwrap();
            prop_assert_eq!(parsed, log);
        }
    }
}
