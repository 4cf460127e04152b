//! CSV input and output: field traces in, tabular reports out.
//!
//! Every table is UTF-8 with a header row and `.` as the decimal
//! separator. Floats are written with `Display`, which round-trips.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use qeos_core::lockin::{PhaseSample, TraceRow};
use qeos_core::thz::{FieldUnits, Spectrum, ThzWaveform};

use crate::error::CliError;

/// Relative wobble tolerated in the time column before the grid is
/// rejected as non-uniform.
const GRID_TOLERANCE: f64 = 1e-6;

/// Reads a `t_s,value` trace with a header row into a waveform, checking
/// that the time column is a uniform, increasing grid.
pub fn read_trace(path: &Path, units: FieldUnits) -> Result<ThzWaveform, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|err| CliError::data(format!("cannot open {}: {err}", path.display())))?;
    let mut times: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|err| CliError::data(format!("{}: {err}", path.display())))?;
        if record.len() != 2 {
            return Err(CliError::data(format!(
                "{}: data row {} has {} fields, expected 2 (t_s,value)",
                path.display(),
                row + 1,
                record.len()
            )));
        }
        times.push(parse_number(path, row, &record[0])?);
        values.push(parse_number(path, row, &record[1])?);
    }
    waveform_from_columns(path, &times, values, units)
}

fn parse_number(path: &Path, row: usize, text: &str) -> Result<f64, CliError> {
    text.parse().map_err(|_| {
        CliError::data(format!(
            "{}: data row {}: not a number: {text:?}",
            path.display(),
            row + 1
        ))
    })
}

fn waveform_from_columns(
    path: &Path,
    times: &[f64],
    values: Vec<f64>,
    units: FieldUnits,
) -> Result<ThzWaveform, CliError> {
    if times.len() < 2 {
        return Err(CliError::data(format!(
            "{}: need at least 2 data rows, got {}",
            path.display(),
            times.len()
        )));
    }
    let t0 = times[0];
    let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(CliError::data(format!(
            "{}: time column must increase uniformly",
            path.display()
        )));
    }
    for (i, &t) in times.iter().enumerate() {
        let expected = t0 + i as f64 * dt;
        if (t - expected).abs() > GRID_TOLERANCE * dt {
            return Err(CliError::data(format!(
                "{}: non-uniform time grid: data row {} is {:+.3e} s off the grid",
                path.display(),
                i + 1,
                t - expected
            )));
        }
    }
    ThzWaveform::new(values, dt, t0, units)
        .map_err(|err| CliError::data(format!("{}: {err}", path.display())))
}

fn open_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    csv::Writer::from_path(path)
        .map_err(|err| CliError::data(format!("cannot write {}: {err}", path.display())))
}

fn write_failed(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::data(format!("writing {} failed: {err}", path.display()))
}

/// Writes a phase trace as `delay_s,phi_rad,se_rad,k_used`.
pub fn write_trace_rows(path: &Path, rows: &[TraceRow]) -> Result<(), CliError> {
    let mut writer = open_writer(path)?;
    writer
        .write_record(["delay_s", "phi_rad", "se_rad", "k_used"])
        .map_err(|err| write_failed(path, err))?;
    for row in rows {
        writer
            .write_record([
                row.delay_s.to_string(),
                row.phi_rad.to_string(),
                row.se_rad.to_string(),
                row.k_used.to_string(),
            ])
            .map_err(|err| write_failed(path, err))?;
    }
    writer.flush().map_err(|err| write_failed(path, err))
}

/// Writes a reconstructed field as `delay_s,field_v_per_m`.
pub fn write_field(path: &Path, field: &[(f64, f64)]) -> Result<(), CliError> {
    let mut writer = open_writer(path)?;
    writer
        .write_record(["delay_s", "field_v_per_m"])
        .map_err(|err| write_failed(path, err))?;
    for (delay_s, field_v_per_m) in field {
        writer
            .write_record([delay_s.to_string(), field_v_per_m.to_string()])
            .map_err(|err| write_failed(path, err))?;
    }
    writer.flush().map_err(|err| write_failed(path, err))
}

/// Writes per-window raw phases as `window_index,phi_raw,valid`.
pub fn write_window_samples(path: &Path, samples: &[PhaseSample]) -> Result<(), CliError> {
    let mut writer = open_writer(path)?;
    writer
        .write_record(["window_index", "phi_raw", "valid"])
        .map_err(|err| write_failed(path, err))?;
    for sample in samples {
        writer
            .write_record([
                sample.index.to_string(),
                sample.value.to_string(),
                sample.valid.to_string(),
            ])
            .map_err(|err| write_failed(path, err))?;
    }
    writer.flush().map_err(|err| write_failed(path, err))
}

/// Writes a waveform as `t_s,field_v_per_m`.
pub fn write_waveform(path: &Path, waveform: &ThzWaveform) -> Result<(), CliError> {
    let mut writer = open_writer(path)?;
    writer
        .write_record(["t_s", "field_v_per_m"])
        .map_err(|err| write_failed(path, err))?;
    for (t, value) in waveform.times().zip(waveform.samples()) {
        writer
            .write_record([t.to_string(), value.to_string()])
            .map_err(|err| write_failed(path, err))?;
    }
    writer.flush().map_err(|err| write_failed(path, err))
}

/// Writes a power spectrum as `frequency_hz,power` to any sink; `label`
/// names the sink in error messages. A consumer that stops reading mid
/// stream (a closed pipe) is not a failure — the rows it took are intact.
pub fn write_spectrum<W: Write>(out: W, spectrum: &Spectrum, label: &str) -> Result<(), CliError> {
    match try_write_spectrum(out, spectrum) {
        Ok(()) => Ok(()),
        Err(err) if is_broken_pipe(&err) => Ok(()),
        Err(err) => Err(CliError::data(format!("writing {label} failed: {err}"))),
    }
}

fn try_write_spectrum<W: Write>(out: W, spectrum: &Spectrum) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["frequency_hz", "power"])?;
    for (frequency, power) in spectrum.frequencies.iter().zip(&spectrum.power) {
        writer.write_record([frequency.to_string(), power.to_string()])?;
    }
    Ok(writer.flush()?)
}

fn is_broken_pipe(err: &csv::Error) -> bool {
    matches!(err.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe)
}

/// [`write_spectrum`] into a file.
pub fn write_spectrum_path(path: &Path, spectrum: &Spectrum) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|err| CliError::data(format!("cannot write {}: {err}", path.display())))?;
    write_spectrum(file, spectrum, &path.display().to_string())
}
