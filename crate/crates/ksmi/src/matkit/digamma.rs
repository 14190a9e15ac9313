//! Digamma function, accurate to ~1e-12 on the positive axis: recurrence-shift
//! up to x >= 10, then the asymptotic (Bernoulli) series.

use crate::error::{Error, Result};

/// psi(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::invalid_arg(
            "x",
            format!("digamma needs x > 0, got {x}"),
        ));
    }
    let mut value = 0.0;
    let mut t = x;
    while t < 10.0 {
        value -= 1.0 / t;
        t += 1.0;
    }
    // psi(t) ~ ln t - 1/(2t) - sum B_2k / (2k t^2k)
    let inv2 = 1.0 / (t * t);
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    Ok(value + t.ln() - 0.5 / t - series)
}
