//! CSV emitters. Every file starts with a header row; floats are written in
//! shortest round-trip form.

use std::io::{self, Write};

use super::{ErrorSeries, OracleCheckRow, RateFitResult, SupMomentSeries};

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::Writer::from_writer(out)
}

fn io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// `n,is_exchange_step,moment_estimate,bound`
pub fn write_sup_moment<W: Write>(out: W, series: &SupMomentSeries) -> io::Result<()> {
    let mut w = writer(out);
    w.write_record(["n", "is_exchange_step", "moment_estimate", "bound"])
        .map_err(io)?;
    for r in &series.rows {
        w.write_record([
            r.n.to_string(),
            (r.is_exchange_step as u8).to_string(),
            r.moment_estimate.to_string(),
            r.bound.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
}

/// `n,error,reference_type,M,K,runs`, one row per series per step.
pub fn write_errors<W: Write>(out: W, series: &[&ErrorSeries]) -> io::Result<()> {
    let mut w = writer(out);
    w.write_record(["n", "error", "reference_type", "M", "K", "runs"])
        .map_err(io)?;
    for s in series {
        for (i, e) in s.errors.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                e.to_string(),
                s.reference.as_str().to_string(),
                s.m_pes.to_string(),
                s.k_per_pe.to_string(),
                s.runs.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()
}

/// `run,M,K,rmse`: per-run root of the time-averaged squared error.
pub fn write_run_summaries<W: Write>(out: W, series: &[&ErrorSeries]) -> io::Result<()> {
    let mut w = writer(out);
    w.write_record(["run", "M", "K", "rmse"]).map_err(io)?;
    for s in series {
        for (run, mse) in s.per_run_mse.iter().enumerate() {
            w.write_record([
                run.to_string(),
                s.m_pes.to_string(),
                s.k_per_pe.to_string(),
                mse.sqrt().to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()
}

/// `M,error,fitted_value`
pub fn write_rate_points<W: Write>(
    out: W,
    points: &[(usize, f64)],
    fit: &RateFitResult,
) -> io::Result<()> {
    let mut w = writer(out);
    w.write_record(["M", "error", "fitted_value"]).map_err(io)?;
    for &(m, e) in points {
        w.write_record([m.to_string(), e.to_string(), fit.fitted(m).to_string()])
            .map_err(io)?;
    }
    w.flush()
}

/// `C,zeta,residual`, one row.
pub fn write_rate_summary<W: Write>(out: W, fit: &RateFitResult) -> io::Result<()> {
    let mut w = writer(out);
    w.write_record(["C", "zeta", "residual"]).map_err(io)?;
    w.write_record([
        fit.c_fit.to_string(),
        fit.zeta_fit.to_string(),
        fit.residual.to_string(),
    ])
    .map_err(io)?;
    w.flush()
}

/// `M,K,MK,mean_max_error`
pub fn write_oracle_check<W: Write>(out: W, rows: &[OracleCheckRow]) -> io::Result<()> {
    let mut w = writer(out);
    w.write_record(["M", "K", "MK", "mean_max_error"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.m_pes.to_string(),
            r.k_per_pe.to_string(),
            r.total_particles().to_string(),
            r.mean_max_error.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
}
