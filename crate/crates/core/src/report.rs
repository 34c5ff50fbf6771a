use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIters,
    Stalled,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Stalled => "stalled",
        })
    }
}

/// Which residual a history records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// `‖saddle·u − rhs‖ / ‖rhs‖` for the unaugmented KKT system.
    SaddleRelative,
    /// Fixed-point residual `‖u − T(u)‖`.
    FixedPoint,
    /// `‖b − Ax‖ / ‖b‖` for the system a Krylov method is solving.
    KrylovRelative,
    /// `‖b − Ax‖`, the residual GMRES minimizes.
    KrylovResidual,
    /// Residual in the norm induced by the inverse preconditioner, which
    /// MINRES and CR minimize.
    PreconditionedResidual,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::SaddleRelative => "saddle_relative",
            Metric::FixedPoint => "fixed_point",
            Metric::KrylovRelative => "krylov_relative",
            Metric::KrylovResidual => "krylov_residual",
            Metric::PreconditionedResidual => "preconditioned_residual",
        })
    }
}

/// Outcome of an iterative solve. Both histories hold one entry per
/// iterate, starting with the initial point, so their length is
/// `iterations + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub status: Status,
    /// History of the metric used for termination.
    pub residual_history: Vec<f64>,
    pub metric: Metric,
    /// History of the solver's own residual, logged alongside.
    pub native_history: Vec<f64>,
    pub native_metric: Metric,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Per-iteration geometric rate `(r_j / r_i)^{1/(j−i)}` fitted by least
/// squares on `log r` over the index window `[from, to]`. Zero or
/// non-finite entries are skipped.
pub fn fitted_rate(history: &[f64], from: usize, to: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (from..=to.min(history.len().saturating_sub(1)))
        .filter(|&k| history[k] > 0.0 && history[k].is_finite())
        .map(|k| (k as f64, history[k].ln()))
        .collect();
    let slope = least_squares_slope(&pts)?;
    Some(slope.exp())
}

/// Slope of the least-squares line through `pts`.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_of_exact_geometric_sequence() {
        let h: Vec<f64> = (0..50).map(|k| 3.0 * 0.9f64.powi(k)).collect();
        assert!((fitted_rate(&h, 10, 40).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn slope_needs_two_points() {
        assert!(least_squares_slope(&[(1.0, 1.0)]).is_none());
        assert_eq!(least_squares_slope(&[(0.0, 1.0), (2.0, 2.0)]), Some(0.5));
    }
}
