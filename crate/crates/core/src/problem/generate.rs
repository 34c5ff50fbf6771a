use std::f64::consts::PI;

use super::EcqpProblem;
use crate::error::ProblemError;
use crate::linalg::{haar_orthogonal, DenseMatrix, Rng};

/// Random instance with prescribed conditioning.
///
/// `A = U_A Σ_A V_Aᵀ`, `B = U_B Σ_B V_Bᵀ`, `D = U_D Σ_D U_Dᵀ` with Haar
/// orthogonal factors and i.i.d. log-normal `exp(s·N(0,1))` singular values;
/// one `s` is shared by all three. `c`, `p`, `d` are standard Gaussian. The
/// draw order is fixed, so a seed reproduces the instance exactly.
pub fn random_problem(n: usize, m: usize, l: usize, s: f64, seed: u64) -> Result<EcqpProblem, ProblemError> {
    if !(1 <= l && l <= m && m <= n) {
        return Err(ProblemError::Dimension(format!(
            "need 1 <= l <= m <= n, got n={n} m={m} l={l}"
        )));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(ProblemError::Parameter(format!("log-std-dev s must be >= 0, got {s}")));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let u_a = haar_orthogonal(m, &mut rng);
    let u_b = haar_orthogonal(m, &mut rng);
    let u_d = haar_orthogonal(n, &mut rng);
    let v_a = haar_orthogonal(n, &mut rng);
    let v_b = haar_orthogonal(l, &mut rng);
    let sigma_a: Vec<f64> = (0..m).map(|_| rng.lognormal(s)).collect();
    let sigma_b: Vec<f64> = (0..l).map(|_| rng.lognormal(s)).collect();
    let sigma_d: Vec<f64> = (0..n).map(|_| rng.lognormal(s)).collect();

    // U Σ Vᵀ with Σ rectangular-diagonal only touches the leading columns of V.
    let us_a = DenseMatrix::from_fn(m, m, |i, j| u_a[(i, j)] * sigma_a[j]);
    let a = us_a.matmul_t(&v_a.submatrix(0, 0, n, m));
    let us_b = DenseMatrix::from_fn(m, l, |i, j| u_b[(i, j)] * sigma_b[j]);
    let b = us_b.matmul_t(&v_b);
    let us_d = DenseMatrix::from_fn(n, n, |i, j| u_d[(i, j)] * sigma_d[j]);
    let hessian = us_d.matmul_t(&u_d).symmetrized();

    let c = rng.gaussian_vec(n);
    let p = rng.gaussian_vec(l);
    let d = rng.gaussian_vec(m);
    EcqpProblem::new(hessian, a, b, c, p, d)
}

/// Instance on which ADMM-GMRES converges no faster than
/// `(√κ−1)/(√κ+1)` per iteration: `A = I_m`,
/// `D = diag(κ^{-1/2} I, κ^{1/2} I)`, `B = [cos Θ; sin Θ]` with
/// `Θ = π/(2m)·diag(1, 3, …, m−1)`. Then `μ = κ^{-1/2}`, `L = κ^{1/2}` and the
/// eigenvalues of `K(√(μL))` sit evenly on a circle.
pub fn worst_case_problem(m: usize, kappa: f64, seed: u64) -> Result<EcqpProblem, ProblemError> {
    if m == 0 || m % 2 != 0 {
        return Err(ProblemError::Dimension(format!("worst case needs even m >= 2, got {m}")));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(ProblemError::Parameter(format!("kappa must be >= 1, got {kappa}")));
    }
    let half = m / 2;
    let root = kappa.sqrt();
    let diag: Vec<f64> = (0..m).map(|i| if i < half { 1.0 / root } else { root }).collect();
    let theta = |j: usize| PI / (2.0 * m as f64) * (2 * j + 1) as f64;
    let b = DenseMatrix::from_fn(m, half, |i, j| match i.cmp(&half) {
        std::cmp::Ordering::Less if i == j => theta(j).cos(),
        _ if i >= half && i - half == j => theta(j).sin(),
        _ => 0.0,
    });
    let mut rng = Rng::seed_from_u64(seed);
    let c = rng.gaussian_vec(m);
    let p = rng.gaussian_vec(half);
    let d = rng.gaussian_vec(m);
    EcqpProblem::new(DenseMatrix::from_diag(&diag), DenseMatrix::identity(m), b, c, p, d)
}

/// One draw of a random conditioning sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepInstance {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub s: f64,
    pub seed: u64,
}

impl SweepInstance {
    pub fn build(&self) -> Result<EcqpProblem, ProblemError> {
        random_problem(self.n, self.m, self.l, self.s, self.seed)
    }
}

/// `m` uniform on `1..=n`, `ℓ` uniform on `1..=m`, `s` uniform on
/// `[s_min, s_max]`, and a fresh problem seed.
pub fn sample_sweep_instance(n: usize, s_min: f64, s_max: f64, rng: &mut Rng) -> SweepInstance {
    let m = rng.uniform_int(1, n);
    let l = rng.uniform_int(1, m);
    let s = rng.uniform_range(s_min, s_max);
    let seed = rng.next_u64();
    SweepInstance { n, m, l, s, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, spectral_norm};
    use crate::problem::{spectral_constants, FactoredProblem};

    #[test]
    fn s_zero_is_perfectly_conditioned() {
        let prob = random_problem(20, 9, 4, 0.0, 3).unwrap();
        let resid = frobenius_norm(&prob.hessian.sub(&DenseMatrix::identity(20)));
        assert!(resid < 1e-12);
        let sc = spectral_constants(&prob).unwrap();
        assert!((sc.kappa - 1.0).abs() < 1e-6);
    }

    #[test]
    fn seeds_reproduce() {
        let a = random_problem(10, 6, 2, 1.3, 77).unwrap();
        let b = random_problem(10, 6, 2, 1.3, 77).unwrap();
        assert_eq!(a, b);
        let c = random_problem(10, 6, 2, 1.3, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn singular_values_are_lognormal_draws() {
        let prob = random_problem(8, 8, 8, 1.0, 4).unwrap();
        // AAᵀ = U_A Σ² U_Aᵀ, so ‖A‖ equals the largest drawn σ.
        let mut rng = Rng::seed_from_u64(4);
        for _ in 0..5 {
            haar_orthogonal(8, &mut rng);
        }
        let sig: Vec<f64> = (0..8).map(|_| rng.lognormal(1.0)).collect();
        let top = sig.iter().cloned().fold(0.0, f64::max);
        assert!((spectral_norm(&prob.a).unwrap() - top).abs() < 1e-10 * top);
    }

    #[test]
    fn dimension_errors() {
        assert!(random_problem(3, 4, 1, 1.0, 0).is_err());
        assert!(random_problem(3, 2, 3, 1.0, 0).is_err());
        assert!(random_problem(3, 2, 1, -1.0, 0).is_err());
        assert!(worst_case_problem(5, 10.0, 0).is_err());
    }

    #[test]
    fn worst_case_b_is_orthonormal() {
        for &m in &[2usize, 4, 10] {
            let prob = worst_case_problem(m, 1e4, 0).unwrap();
            let btb = prob.b.t_matmul(&prob.b);
            assert!(frobenius_norm(&btb.sub(&DenseMatrix::identity(m / 2))) < 1e-14);
            let fp = FactoredProblem::new(prob).unwrap();
            assert!((fp.constants.kappa - 1e4).abs() < 1e-6);
        }
    }

    #[test]
    fn sweep_sampler_respects_ranges() {
        let mut rng = Rng::seed_from_u64(0);
        for _ in 0..200 {
            let inst = sample_sweep_instance(15, 0.5, 2.0, &mut rng);
            assert!(1 <= inst.l && inst.l <= inst.m && inst.m <= 15);
            assert!((0.5..=2.0).contains(&inst.s));
        }
    }
}
