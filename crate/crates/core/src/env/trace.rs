use std::io::Write;

/// One row of an exported training episode trace.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRow {
    pub t: f64,
    pub x_f: f64,
    pub v_f: f64,
    pub power: f64,
    pub x_l: f64,
    pub v_l: f64,
    pub gap: f64,
    pub time_gap: f64,
    pub h: f64,
    pub a_cross: f64,
    pub v_str: f64,
    pub r_safety: f64,
    pub r_comfort: f64,
    pub reward: f64,
}

pub const TRACE_HEADER: [&str; 14] = [
    "t",
    "x_f",
    "v_f",
    "P",
    "x_l",
    "v_l",
    "gap",
    "T",
    "h",
    "A_cross",
    "v_str",
    "r_safety",
    "r_comfort",
    "r",
];

impl TraceRow {
    fn fields(&self) -> [f64; 14] {
        [
            self.t,
            self.x_f,
            self.v_f,
            self.power,
            self.x_l,
            self.v_l,
            self.gap,
            self.time_gap,
            self.h,
            self.a_cross,
            self.v_str,
            self.r_safety,
            self.r_comfort,
            self.reward,
        ]
    }
}

pub fn write_trace_csv<W: Write>(out: W, rows: &[TraceRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for row in rows {
        w.write_record(row.fields().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
