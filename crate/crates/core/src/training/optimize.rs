//! Choice of the activation interval `M`.
//!
//! The proposed scheme spends `QV + KM = ((N−1)/M + 1)V + KM` pilots. Up to
//! the constant `V`, that is `F(M) = (N−1)V/M + KM`, minimised at
//! `√((N−1)V/K)` and capped by the abnormal-ring threshold.

use crate::beampattern::m_threshold;
use crate::error::{Error, Result};
use crate::geometry::ArrayConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationPlan {
    /// Continuous optimum `min(M_th, √((N−1)V/K))`.
    pub m_star: f64,
    pub m_threshold: f64,
    /// Chosen interval: the feasible value nearest to `m_star`, or `m_star`
    /// itself when integer feasibility is not requested.
    pub m: f64,
    /// `F(m)`.
    pub objective: f64,
    /// Total pilots `QV + KM` at `m`.
    pub pilots: f64,
    /// Every feasible `M` (divisor of `N−1` not above `M_th`) with `F(M)`.
    pub feasible: Vec<(usize, f64)>,
    /// Feasible values attaining the smallest `F`.
    pub minimisers: Vec<usize>,
}

fn objective(n: usize, v: usize, k: usize, m: f64) -> f64 {
    (n - 1) as f64 * v as f64 / m + k as f64 * m
}

/// Optimal activation interval for `N` antennas, `V` range samples and `K`
/// users. Ties in distance to the optimum resolve to the smaller `M`.
pub fn optimize_activation(n: usize, v: usize, k: usize, integer_feasible: bool) -> Result<ActivationPlan> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArray(format!("antenna count must be odd and at least 3, got {n}")));
    }
    if v == 0 || k == 0 {
        return Err(Error::Config("range samples and users must both be positive".into()));
    }
    // M_th depends on N only; the carrier is irrelevant here
    let m_th = m_threshold(&ArrayConfig::new(n, 1e9)?);
    let m_star = m_th.min(((n - 1) as f64 * v as f64 / k as f64).sqrt());

    let feasible: Vec<(usize, f64)> = (1..=n - 1)
        .filter(|m| (n - 1).is_multiple_of(*m) && *m as f64 <= m_th)
        .map(|m| (m, objective(n, v, k, m as f64)))
        .collect();
    if feasible.is_empty() {
        return Err(Error::Infeasible(format!("no divisor of {} lies below M_th = {m_th:.2}", n - 1)));
    }
    let best_f = feasible.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let minimisers = feasible.iter().filter(|x| (x.1 - best_f).abs() <= 1e-9 * best_f).map(|x| x.0).collect();

    let m = if integer_feasible {
        // ascending scan with strict improvement keeps the smaller M on ties
        feasible
            .iter()
            .map(|x| x.0 as f64)
            .fold(None, |acc: Option<f64>, m| match acc {
                Some(a) if (a - m_star).abs() <= (m - m_star).abs() => Some(a),
                _ => Some(m),
            })
            .unwrap()
    } else {
        m_star
    };
    let obj = objective(n, v, k, m);
    Ok(ActivationPlan { m_star, m_threshold: m_th, m, objective: obj, pilots: obj + v as f64, feasible, minimisers })
}
