//! Trace CSV files and gaze-script files.
//!
//! Trace CSV: header `time_s,v_p_uV,v_ref_uV`, one row per sample, sample `i`
//! at `t = i / fs`. The sample rate is inferred from the timestamps, so a
//! file needs at least two rows.
//!
//! Script: one event per line as `direction,onset_s,duration_s,amplitude_uV`.
//! Blank lines, `#` comments and a header line starting with `direction` are
//! skipped.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{Direction, GazeEvent, SampleTrace};
use crate::error::{Error, Result};

pub const TRACE_COLUMNS: [&str; 3] = ["time_s", "v_p_uV", "v_ref_uV"];

/// Relative timestamp jitter tolerated when inferring the sample rate.
const UNIFORMITY_TOL: f64 = 1e-6;

pub fn write_trace_csv<W: Write>(trace: &SampleTrace, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for (i, (p, r)) in trace.v_p_uv().iter().zip(trace.v_ref_uv()).enumerate() {
        w.write_record([trace.time_s(i).to_string(), p.to_string(), r.to_string()])?;
    }
    w.flush()
}

pub fn save_trace_csv(trace: &SampleTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_csv(trace, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_trace_csv(path: impl AsRef<Path>) -> Result<SampleTrace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace_csv(file, path)
}

pub(crate) fn read_trace_csv<R: Read>(input: R, path: &Path) -> Result<SampleTrace> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let mut columns = [0usize; 3];
    for (slot, name) in columns.iter_mut().zip(TRACE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))?;
    }

    let (mut t, mut v_p, mut v_ref) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut values = [0.0; 3];
        for ((value, &col), name) in values.iter_mut().zip(&columns).zip(TRACE_COLUMNS) {
            let field = record
                .get(col)
                .ok_or_else(|| parse_err(line, format!("missing value for `{name}`")))?;
            *value = field
                .parse()
                .map_err(|_| parse_err(line, format!("`{field}` is not a number ({name})")))?;
        }
        t.push(values[0]);
        v_p.push(values[1]);
        v_ref.push(values[2]);
    }

    if t.len() < 2 {
        return Err(parse_err(
            t.len() + 1,
            "need at least two rows to infer the sample rate".into(),
        ));
    }
    let fs = infer_sample_rate(&t);
    for (i, pair) in t.windows(2).enumerate() {
        let step = (pair[1] - pair[0]) * fs;
        if (step - 1.0).abs().is_nan() || (step - 1.0).abs() > UNIFORMITY_TOL {
            return Err(parse_err(
                i + 3,
                format!("non-uniform timestamp step {} s (expected {} s)", pair[1] - pair[0], 1.0 / fs),
            ));
        }
    }
    SampleTrace::new(fs, v_p, v_ref)
}

fn infer_sample_rate(t: &[f64]) -> f64 {
    let fs = (t.len() - 1) as f64 / (t[t.len() - 1] - t[0]);
    let snapped = fs.round();
    if (fs - snapped).abs() <= 1e-6 * fs {
        snapped
    } else {
        fs
    }
}

pub fn parse_script(text: &str, path: &Path) -> Result<Vec<GazeEvent>> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() || content.to_ascii_lowercase().starts_with("direction") {
            continue;
        }
        let err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(format!(
                "expected 4 fields `direction,onset_s,duration_s,amplitude_uV`, found {}",
                fields.len()
            )));
        }
        let direction: Direction = fields[0].parse().map_err(err)?;
        let number = |i: usize, name: &str| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| err(format!("`{}` is not a number ({name})", fields[i])))
        };
        events.push(GazeEvent::new(
            direction,
            number(1, "onset_s")?,
            number(2, "duration_s")?,
            number(3, "amplitude_uV")?,
        ));
    }
    Ok(events)
}

pub fn load_script(path: impl AsRef<Path>) -> Result<Vec<GazeEvent>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_script(&text, path)
}
