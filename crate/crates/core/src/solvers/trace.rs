use std::io::Write;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One recorded iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    /// `‖θ_τ − μθ*‖`, present when the problem carries an oracle.
    pub error: Option<f64>,
    /// `‖y − Xθ_τ‖`; absent when residual tracking is off.
    pub residual: Option<f64>,
    /// Elapsed time since the start of the solve; zero unless timing is
    /// enabled, so traces stay reproducible byte for byte.
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub theta_hat: Array1<f64>,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl SolverTrace {
    /// Error column; panics if the problem had no oracle.
    pub fn errors(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.error.expect("trace recorded without an oracle"))
            .collect()
    }

    pub fn iters(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.iter).collect()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.error)
    }

    /// Mean error over the last `window` records.
    pub fn plateau(&self, window: usize) -> Option<f64> {
        plateau(&self.errors(), window)
    }

    /// CSV with header `iter,error,residual,wall_ms`; missing values are
    /// left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,error,residual,wall_ms")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{}",
                r.iter,
                fmt_opt(r.error),
                fmt_opt(r.residual),
                fmt_f64(r.wall_ms)
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

/// Mean of the last `window` values (all of them if fewer).
pub fn plateau(values: &[f64], window: usize) -> Option<f64> {
    if values.is_empty() || window == 0 {
        return None;
    }
    let tail = &values[values.len().saturating_sub(window)..];
    Some(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Column-wise average of traces recorded at the same iterations.
///
/// Traces are combined in the given order, so the result does not depend
/// on how they were produced.
pub fn mean_trace(traces: &[SolverTrace]) -> Option<SolverTrace> {
    let first = traces.first()?;
    let k = traces.len() as f64;
    let records = first
        .records
        .iter()
        .enumerate()
        .map(|(j, r0)| {
            let column = |pick: fn(&TraceRecord) -> Option<f64>| -> Option<f64> {
                let mut sum = 0.0;
                for t in traces {
                    sum += pick(&t.records[j])?;
                }
                Some(sum / k)
            };
            TraceRecord {
                iter: r0.iter,
                error: column(|r| r.error),
                residual: column(|r| r.residual),
                wall_ms: column(|r| Some(r.wall_ms)).unwrap_or(0.0),
            }
        })
        .collect();
    let mut theta_hat = Array1::zeros(first.theta_hat.len());
    for t in traces {
        theta_hat += &t.theta_hat;
    }
    Some(SolverTrace {
        records,
        theta_hat: theta_hat / k,
    })
}
