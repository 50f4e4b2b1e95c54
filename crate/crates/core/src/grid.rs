//! Parameter grids written as `start:stop:step`, a comma list, or a single
//! value. Ranges include `stop` when it is hit within rounding.

use crate::error::{Error, Result};

const MAX_POINTS: usize = 1_000_000;

fn number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
        line: 1,
        reason: format!("not a number: {s:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line: 1,
            reason: format!("not finite: {s:?}"),
        });
    }
    Ok(v)
}

pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |reason: String| Error::Parse { line: 1, reason };
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(bad("empty grid".into()));
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad(format!("expected start:stop:step, got {spec:?}")));
        };
        return range(number(start)?, number(stop)?, number(step)?);
    }
    spec.split(',').map(number).collect()
}

pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    let bad = |reason: String| Error::Parse { line: 1, reason };
    if step.is_nan() || step <= 0.0 || step.is_infinite() {
        return Err(bad(format!("step must be positive, got {step}")));
    }
    if stop < start {
        return Err(bad(format!("stop {stop} is below start {start}")));
    }
    let span = (stop - start) / step;
    if !span.is_finite() || span > MAX_POINTS as f64 {
        return Err(bad(format!("grid has more than {MAX_POINTS} points")));
    }
    let n = (span + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| {
            let x = start + i as f64 * step;
            let tol = 1e-12 * x.abs().max(1.0);
            let tidy = (x * 1e12).round() / 1e12;
            if (x - stop).abs() <= tol {
                stop
            } else if (x - tidy).abs() <= tol {
                tidy
            } else {
                x
            }
        })
        .collect())
}
