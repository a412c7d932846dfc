//! Plain CSV exports and imports. Floats are written in Rust's shortest
//! round-trip form, so reading a file back reproduces the values exactly.

use std::io::Write;
use std::path::Path;

use vtol_core::harness::{RunReport, Telemetry, TelemetryRow, SIM_LOG_COLUMNS, TELEMETRY_COLUMNS};
use vtol_core::lti::{DigitalFilter, FrequencyResponse};
use vtol_core::plant::AeroTable;
use vtol_core::sysid::{FrfEstimate, SweepRecord};

use crate::error::{Error, Result};

pub const SWEEP_COLUMNS: [&str; 4] = ["t", "u_injected", "u_total", "omega_meas"];
pub const FRF_COLUMNS: [&str; 4] = ["freq_hz", "re", "im", "coherence"];
pub const BODE_COLUMNS: [&str; 3] = ["freq_hz", "mag_db", "phase_deg"];
pub const BIQUAD_COLUMNS: [&str; 6] = ["section", "b0", "b1", "b2", "a1", "a2"];
pub const AERO_COLUMNS: [&str; 4] = ["alpha_rad", "V_ms", "CL", "CD"];

/// `-` selects standard output.
fn open(path: &Path) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = if path == Path::new("-") {
        Box::new(std::io::stdout().lock())
    } else {
        Box::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?)
    };
    Ok(csv::Writer::from_writer(sink))
}

/// Writes a header and numeric rows.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = open(path)?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        let r = r.as_ref();
        if r.len() != header.len() {
            return Err(Error::csv(path, format!("row has {} values for {} columns", r.len(), header.len())));
        }
        w.write_record(r.iter().map(|v| v.to_string())).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a header and numeric rows; every field must parse as a float.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| Error::csv(path, e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::csv(path, format!("line {}: {e}", i + 2)))?;
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_telemetry(path: &Path, tel: &Telemetry) -> Result<()> {
    write_table(path, &TELEMETRY_COLUMNS, tel.rows.iter().map(|r| r.to_values()))
}

pub fn read_telemetry(path: &Path) -> Result<Telemetry> {
    let (header, rows) = read_table(path)?;
    if header != TELEMETRY_COLUMNS {
        return Err(Error::csv(path, "not a telemetry log (header mismatch)"));
    }
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, v)| TelemetryRow::from_values(v).ok_or_else(|| Error::csv(path, format!("line {}: bad flags", i + 2))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Telemetry {
        rows,
        sim_log: Vec::new(),
    })
}

/// Plant-side log `t,px,...,m4,sat_flag`; nothing is written when the run
/// has no plant log (linear-axis mode).
pub fn write_sim_log(path: &Path, tel: &Telemetry) -> Result<()> {
    write_table(path, &SIM_LOG_COLUMNS, tel.sim_log.iter().map(|r| r.to_values()))
}

pub fn write_aero_table(path: &Path, table: &AeroTable) -> Result<()> {
    write_table(path, &AERO_COLUMNS, table.rows().map(|(a, v, cl, cd)| [a, v, cl, cd]))
}

/// Rectangular `alpha_rad,V_ms,CL,CD` grid, rows in any order.
pub fn read_aero_table(path: &Path) -> Result<AeroTable> {
    let (header, rows) = read_table(path)?;
    if header != AERO_COLUMNS {
        return Err(Error::csv(path, format!("expected header {}", AERO_COLUMNS.join(","))));
    }
    let nodes: Vec<_> = rows.iter().map(|r| (r[0], r[1], r[2], r[3])).collect();
    AeroTable::from_rows(&nodes).map_err(|e| Error::csv(path, e))
}

pub fn write_sweep(path: &Path, rec: &SweepRecord) -> Result<()> {
    write_table(
        path,
        &SWEEP_COLUMNS,
        (0..rec.len()).map(|k| [rec.t[k], rec.u_injected[k], rec.u_total[k], rec.omega_meas[k]]),
    )
}

pub fn write_frf(path: &Path, frf: &FrfEstimate) -> Result<()> {
    write_table(
        path,
        &FRF_COLUMNS,
        (0..frf.len()).map(|k| [frf.freqs[k], frf.h[k].re, frf.h[k].im, frf.coherence[k]]),
    )
}

pub fn write_bode(path: &Path, fr: &FrequencyResponse) -> Result<()> {
    let mag = fr.magnitude_db();
    write_table(
        path,
        &BODE_COLUMNS,
        (0..fr.len()).map(|k| [fr.freqs()[k], mag[k], fr.phase_deg()[k]]),
    )
}

pub fn write_biquads(path: &Path, filt: &DigitalFilter) -> Result<()> {
    write_table(
        path,
        &BIQUAD_COLUMNS,
        filt.cascade.sections().iter().enumerate().map(|(i, s)| {
            let c = s.coefficients();
            [i as f64, c[0], c[1], c[2], c[3], c[4]]
        }),
    )
}

/// `name,value` pairs of the report metrics.
pub fn write_metrics(path: &Path, rep: &RunReport) -> Result<()> {
    let mut w = open(path)?;
    w.write_record(["name", "value"]).map_err(|e| Error::csv(path, e))?;
    for (k, v) in &rep.metrics {
        w.write_record([k.clone(), v.to_string()]).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
