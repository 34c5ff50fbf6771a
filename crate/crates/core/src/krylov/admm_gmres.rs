use super::{gmres_with, KrylovConfig, LinearOperator};
use crate::admm::FixedPointMap;
use crate::error::KrylovError;
use crate::linalg::{axpy, sub};
use crate::report::Metric;
use crate::SolveReport;

/// `h ↦ h − [T(u₀+h) − T(u₀)] = (I − G)h`, evaluated through the map only.
struct IMinusG<'a, T: ?Sized> {
    map: &'a T,
    u0: &'a [f64],
    tu0: &'a [f64],
}

impl<T: FixedPointMap + ?Sized> LinearOperator for IMinusG<'_, T> {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn apply(&self, h: &[f64]) -> Vec<f64> {
        let shifted: Vec<f64> = self.u0.iter().zip(h).map(|(a, b)| a + b).collect();
        let mut out = h.to_vec();
        axpy(-1.0, &self.map.apply(&shifted), &mut out);
        axpy(1.0, self.tu0, &mut out);
        out
    }
}

/// GMRES-accelerated fixed-point iteration: solves `(I − G)Δu = u₀ − T(u₀)`
/// by GMRES and returns `u₀ − Δu`.
///
/// Iteration `k` minimizes the fixed-point residual `‖u − T(u)‖` over
/// `u₀ + span{r, Gr, …, G^{k−1}r}`, so it is never worse than `k` plain
/// steps. That residual is the native history; termination is on the map's
/// gate residual.
pub fn admm_gmres<T: FixedPointMap + ?Sized>(
    map: &T,
    u0: &[f64],
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport), KrylovError> {
    if u0.len() != map.dim() {
        return Err(KrylovError::Dimension {
            operator: map.dim(),
            vector: u0.len(),
        });
    }
    let tu0 = map.apply(u0);
    let r = sub(u0, &tu0);
    let op = IMinusG { map, u0, tu0: &tu0 };
    let mut gate = |du: &[f64]| map.gate_residual(&sub(u0, du));
    let (du, mut rep) = gmres_with(&op, &r, None, cfg, Some(&mut gate))?;
    rep.native_metric = Metric::FixedPoint;
    Ok((sub(u0, &du), rep))
}
