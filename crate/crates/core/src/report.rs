//! Plain-text and CSV writers for design, Monte Carlo, ambiguity and CRLB
//! results. Nothing here writes wall-clock values, so equal inputs give
//! byte-identical files.

use std::io::{self, Write};

use crate::ambiguity::AmbiguitySurface;
use crate::evaluator::MonteCarloReport;
use crate::optimizer::DesignReport;
use crate::signal::SwitchingSequence;

fn perm_string(seq: &SwitchingSequence) -> String {
    seq.perm().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

/// Design summary followed by an `iteration,cost,best_cost` block.
pub fn write_design_report<W: Write>(mut w: W, report: &DesignReport) -> io::Result<()> {
    writeln!(w, "initial_sequence = {}", perm_string(&report.initial))?;
    writeln!(w, "initial_cost = {}", report.initial_cost)?;
    writeln!(w, "best_sequence = {}", perm_string(&report.best))?;
    writeln!(w, "best_cost = {}", report.best_cost)?;
    writeln!(w, "final_sequence = {}", perm_string(&report.last))?;
    writeln!(w, "final_cost = {}", report.last_cost)?;
    writeln!(w, "returned = {}", if report.return_final { "final" } else { "best" })?;
    writeln!(w, "initial_temperature = {}", report.initial_temperature)?;
    writeln!(w, "accepted_moves = {}", report.accepted)?;
    writeln!(w, "iterations = {}", report.trace.len())?;
    writeln!(w)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["iteration", "cost", "best_cost"])?;
    for (i, (c, b)) in report.trace.iter().zip(&report.best_trace).enumerate() {
        csv.write_record([(i + 1).to_string(), c.to_string(), b.to_string()])?;
    }
    csv.flush()
}

/// One row per (sequence, SNR). Azimuth in degrees, Doppler in Hz.
pub fn write_monte_carlo_csv<W: Write>(w: W, report: &MonteCarloReport) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "sequence",
        "snr_db",
        "azimuth_rmse_deg",
        "azimuth_log_mse",
        "doppler_rmse_hz",
        "doppler_log_mse",
        "azimuth_crlb_deg2",
        "doppler_crlb_hz2",
        "azimuth_log_crlb",
        "doppler_log_crlb",
    ])?;
    for seq in &report.sequences {
        for m in &seq.metrics {
            csv.write_record([
                seq.name.clone(),
                m.snr_db.to_string(),
                m.azimuth_rmse.to_string(),
                m.azimuth_log_mse.to_string(),
                m.doppler_rmse.to_string(),
                m.doppler_log_mse.to_string(),
                m.azimuth_crlb.to_string(),
                m.doppler_crlb.to_string(),
                m.azimuth_crlb.log10().to_string(),
                m.doppler_crlb.log10().to_string(),
            ])?;
        }
    }
    csv.flush()
}

/// Two columns `azimuth_deg,cdf`.
pub fn write_cdf_csv<W: Write>(w: W, cdf: &[(f64, f64)]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["azimuth_deg", "cdf"])?;
    for (x, f) in cdf {
        csv.write_record([x.to_string(), f.to_string()])?;
    }
    csv.flush()
}

/// Matrix block: the first row holds the column-axis values, every other
/// row starts with its row-axis value. A 1-D sweep has a single `value`
/// column.
pub fn write_surface_csv<W: Write>(w: W, surface: &AmbiguitySurface) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let corner = match &surface.cols {
        Some(c) => format!("{}\\{}", surface.rows.axis.label(), c.axis.label()),
        None => surface.rows.axis.label().to_string(),
    };
    let mut header = vec![corner];
    match &surface.cols {
        Some(c) => header.extend(c.values.iter().map(|v| v.to_string())),
        None => header.push("value".into()),
    }
    csv.write_record(&header)?;
    for (i, r) in surface.rows.values.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend((0..surface.ncols()).map(|j| surface.get(i, j).to_string()));
        csv.write_record(&row)?;
    }
    csv.flush()
}

/// `parameter,fim_diagonal,crlb` rows.
pub fn write_crlb_csv<W: Write>(w: W, rows: &[(String, f64, f64)]) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["parameter", "fim_diagonal", "crlb"])?;
    for (p, d, v) in rows {
        csv.write_record([p.clone(), d.to_string(), v.to_string()])?;
    }
    csv.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{SurfaceAxis, SweepAxis};

    #[test]
    fn surface_layout() {
        let s = AmbiguitySurface {
            rows: SweepAxis { axis: SurfaceAxis::AzimuthTx, values: vec![0.0, 1.0] },
            cols: Some(SweepAxis { axis: SurfaceAxis::DopplerOffset, values: vec![-5.0, 5.0] }),
            values: vec![1.0, 0.5, 0.25, 0.125],
        };
        let mut out = Vec::new();
        write_surface_csv(&mut out, &s).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].ends_with(",-5,5"));
        assert_eq!(lines[1], "0,1,0.5");
        assert_eq!(lines[2], "1,0.25,0.125");
    }

    #[test]
    fn cdf_layout() {
        let mut out = Vec::new();
        write_cdf_csv(&mut out, &[(0.0, 0.0), (90.0, 1.0)]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "azimuth_deg,cdf\n0,0\n90,1\n");
    }
}
