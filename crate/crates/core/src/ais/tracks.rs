use std::collections::BTreeMap;
use std::io::Read;

use super::AisError;

/// One AIS-style position report in along-river coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoint {
    pub vessel_id: String,
    pub timestamp: f64,
    /// Bow position along the river axis, m.
    pub longitudinal_position: f64,
    /// Lateral position of the centerline, m.
    pub lateral_position: f64,
    /// Signed ground speed along the axis, m/s.
    pub speed_ground: f64,
    pub length: f64,
    pub beam: f64,
    /// Local stream speed along the axis, m/s, when recorded.
    pub stream_speed: Option<f64>,
}

pub const TRACK_COLUMNS: [&str; 7] = [
    "vessel_id",
    "timestamp_s",
    "x_m",
    "y_m",
    "speed_mps",
    "length_m",
    "beam_m",
];
pub const STREAM_COLUMN: &str = "stream_mps";

/// All reports of one vessel in strictly increasing time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub vessel_id: String,
    pub points: Vec<TrackPoint>,
}

/// Parses the track CSV. Rows may appear in any order; they are grouped by
/// vessel and sorted by time. Reported line numbers are 1-based and count
/// the header.
pub fn read_tracks<R: Read>(input: R) -> Result<Vec<Track>, AisError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| AisError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let has_stream = match names.as_slice() {
        n if n == TRACK_COLUMNS => false,
        n if n.len() == 8 && n[..7] == TRACK_COLUMNS && n[7] == STREAM_COLUMN => true,
        _ => {
            return Err(AisError::Malformed {
                line: 1,
                message: format!(
                    "expected header {}[,{}], got {}",
                    TRACK_COLUMNS.join(","),
                    STREAM_COLUMN,
                    names.join(",")
                ),
            })
        }
    };

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| AisError::Malformed {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let num = |i: usize| -> Result<f64, AisError> {
            let field = record.get(i).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| AisError::Malformed {
                line,
                message: format!("column {} is not a number: {field:?}", names[i]),
            })?;
            if !v.is_finite() {
                return Err(AisError::Malformed {
                    line,
                    message: format!("column {} is not finite", names[i]),
                });
            }
            Ok(v)
        };
        let vessel_id = record.get(0).unwrap_or("").to_string();
        if vessel_id.is_empty() {
            return Err(AisError::Malformed {
                line,
                message: "empty vessel_id".into(),
            });
        }
        let point = TrackPoint {
            vessel_id,
            timestamp: num(1)?,
            longitudinal_position: num(2)?,
            lateral_position: num(3)?,
            speed_ground: num(4)?,
            length: num(5)?,
            beam: num(6)?,
            stream_speed: if has_stream && !record.get(7).unwrap_or("").is_empty() {
                Some(num(7)?)
            } else {
                None
            },
        };
        if point.length <= 0.0 || point.beam <= 0.0 {
            return Err(AisError::Malformed {
                line,
                message: "length_m and beam_m must be positive".into(),
            });
        }
        points.push((line, point));
    }
    group_tracks(points)
}

fn group_tracks(points: Vec<(usize, TrackPoint)>) -> Result<Vec<Track>, AisError> {
    let mut by_vessel: BTreeMap<String, Vec<(usize, TrackPoint)>> = BTreeMap::new();
    for (line, p) in points {
        by_vessel
            .entry(p.vessel_id.clone())
            .or_default()
            .push((line, p));
    }
    let mut tracks = Vec::with_capacity(by_vessel.len());
    for (vessel_id, mut pts) in by_vessel {
        pts.sort_by(|a, b| a.1.timestamp.total_cmp(&b.1.timestamp));
        for w in pts.windows(2) {
            if w[1].1.timestamp <= w[0].1.timestamp {
                return Err(AisError::Malformed {
                    line: w[1].0.max(w[0].0),
                    message: format!(
                        "duplicate timestamp {} for vessel {vessel_id}",
                        w[1].1.timestamp
                    ),
                });
            }
        }
        tracks.push(Track {
            vessel_id,
            points: pts.into_iter().map(|(_, p)| p).collect(),
        });
    }
    Ok(tracks)
}

/// Groups already-parsed points (any order) into tracks.
pub fn tracks_from_points(points: Vec<TrackPoint>) -> Result<Vec<Track>, AisError> {
    group_tracks(points.into_iter().map(|p| (0, p)).collect())
}
