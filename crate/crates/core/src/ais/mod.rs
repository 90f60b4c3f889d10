//! Headway calibration from AIS-style vessel tracks: detect following
//! situations and fit the lognormal time-gap distribution used by the
//! safety reward.

mod events;
mod fit;
mod synthetic;
mod tracks;

pub use events::{
    classify_pair, extract_events, nearest_in_time, write_events_csv, ExtractOptions,
    FollowingEvent,
};
pub use fit::{
    fit_lognormal, histogram_report, write_histogram_csv, HistogramBin, LognormalFit, HISTOGRAM_MAX,
};
pub use synthetic::{lognormal_pair_corpus, write_tracks_csv};
pub use tracks::{
    read_tracks, tracks_from_points, Track, TrackPoint, STREAM_COLUMN, TRACK_COLUMNS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AisError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("time-gap sample {0} is not positive")]
    NonPositiveSample(f64),
    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("bin width must be positive, got {0}")]
    InvalidBinWidth(f64),
}
