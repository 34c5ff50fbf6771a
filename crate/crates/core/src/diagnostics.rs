//! Spectral diagnostics of the core matrix
//!
//! ```text
//! K(β) = [Qᵀ; −Pᵀ] [(β⁻¹D̃ + I)⁻¹ − (βD̃⁻¹ + I)⁻¹] [Q  P]
//! ```
//!
//! where `B = [Q P] [R; 0]`. The nonzero eigenvalues of the ADMM iteration
//! matrix are exactly `½ + ½Λ{K}`, so every convergence quantity (‖K‖, δ,
//! κ_X, ν) is read off this m×m matrix.

use num_complex::Complex64;

use crate::error::{LinalgError, ProblemError};
use crate::linalg::{
    condition_2_complex, frobenius_norm, gen_eig, spectral_norm, sym_eig, DenseMatrix, Lu,
};
use crate::precond::{BlockDiagonal, Constraint, ReducedSystem, SaddleMethod, SchurSystem};
use crate::problem::{assemble_kkt, FactoredProblem, SpectralConstants};

/// `K(β)` with the QR factors used to build it.
#[derive(Debug, Clone)]
pub struct KMatrixReport {
    pub beta: f64,
    pub k: DenseMatrix,
    pub q: DenseMatrix,
    pub p: DenseMatrix,
    /// `(γ−1)/(γ+1)`.
    pub norm_closed_form: f64,
    pub norm_numeric: f64,
}

impl KMatrixReport {
    pub fn m(&self) -> usize {
        self.k.rows()
    }

    pub fn l(&self) -> usize {
        self.q.cols()
    }
}

pub fn build_k(fp: &FactoredProblem, beta: f64) -> Result<KMatrixReport, LinalgError> {
    let m = fp.m();
    // (β⁻¹λ + 1)⁻¹ − (β/λ + 1)⁻¹ = (β − λ)/(β + λ)
    let scaled = DenseMatrix::from_fn(m, m, |i, j| {
        let l = fp.lambda[j];
        fp.v[(i, j)] * (beta - l) / (beta + l)
    });
    let core = scaled.matmul_t(&fp.v).symmetrized();
    let q_full = &fp.qr_b.q;
    let mut k = q_full.t_matmul(&core.matmul(q_full));
    let l = fp.l();
    for i in l..m {
        k.row_mut(i).iter_mut().for_each(|v| *v = -*v);
    }
    let gamma = fp.constants.gamma(beta);
    Ok(KMatrixReport {
        beta,
        norm_numeric: spectral_norm(&k)?,
        norm_closed_form: (gamma - 1.0) / (gamma + 1.0),
        k,
        q: fp.qr_b.q_range(),
        p: fp.qr_b.q_complement(),
    })
}

/// Eigenvalues with `|Im λ|` above this fraction of `max(‖K‖, 1)` count as
/// complex.
pub const COMPLEX_TOL: f64 = 1e-8;

/// `(δ, δ_lb)` from the eigenvalues of `K`.
///
/// `δ = 1 − max Re λ / ‖K‖` over the complex eigenvalues, and `2` when
/// there are none. The lower bound uses the norms of the diagonal blocks
/// `X = K[..ℓ, ..ℓ]` and `Y = K[ℓ.., ℓ..]`, which bound the real part of
/// any complex eigenvalue of `[[X, Z], [−Zᵀ, Y]]`.
pub fn compute_delta(report: &KMatrixReport, eigenvalues: &[Complex64]) -> Result<(f64, f64), LinalgError> {
    let norm = report.norm_closed_form;
    // κ = 1 up to roundoff: K vanishes and both quantities are vacuous.
    if norm <= 8.0 * f64::EPSILON {
        return Ok((2.0, 2.0));
    }
    let thresh = COMPLEX_TOL * norm.max(1.0);
    let max_re = eigenvalues
        .iter()
        .filter(|z| z.im.abs() > thresh)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let delta = if max_re.is_finite() { 1.0 - max_re / norm } else { 2.0 };
    let (m, l) = (report.m(), report.l());
    let x = spectral_norm(&report.k.submatrix(0, 0, l, l))?;
    let y = spectral_norm(&report.k.submatrix(l, l, m - l, m - l))?;
    let delta_lb = 1.0 - (x + y) / (2.0 * norm);
    Ok((delta, delta_lb))
}

/// Condition number of the unit-column eigenvector matrix of `K`;
/// `f64::INFINITY` when `K` is numerically defective.
pub fn compute_kappa_x(report: &KMatrixReport) -> Result<f64, LinalgError> {
    let eig = gen_eig(&report.k, true)?;
    let mut x = eig.vectors.expect("eigenvectors requested");
    x.normalize_columns();
    match condition_2_complex(&x) {
        Ok(c) => Ok(c.max(1.0)),
        Err(LinalgError::Singular) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// `ν(K) = ‖KᵀK − KKᵀ‖_F^{1/2} / ‖K‖_F` and its upper bound
/// `(8 min(ℓ, m−ℓ))^{1/4} ‖K‖ / ‖K‖_F`.
pub fn compute_nu(report: &KMatrixReport) -> (f64, f64) {
    let fro = frobenius_norm(&report.k);
    if fro == 0.0 {
        return (0.0, 0.0);
    }
    let (m, l) = (report.m(), report.l());
    let comm = report.k.t_matmul(&report.k).sub(&report.k.matmul_t(&report.k));
    let nu = frobenius_norm(&comm).sqrt() / fro;
    let bound = (8.0 * l.min(m - l) as f64).powf(0.25) * report.norm_numeric / fro;
    (nu, bound)
}

/// `ν` of an arbitrary square matrix.
pub fn nonnormality(a: &DenseMatrix) -> f64 {
    let fro = frobenius_norm(a);
    if fro == 0.0 {
        return 0.0;
    }
    frobenius_norm(&a.t_matmul(a).sub(&a.matmul_t(a))).sqrt() / fro
}

#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub beta: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// Disk radius `a = (γ−1)/(γ+1) = ‖K‖`.
    pub disk_radius: f64,
    pub norm_numeric: f64,
    pub eigenvalues: Vec<Complex64>,
    pub delta: f64,
    pub delta_lb: f64,
    pub kappa_x: f64,
    pub nu: f64,
    pub nu_bound: f64,
}

impl DiagnosticsReport {
    /// Largest eigenvalue modulus minus the disk radius; nonpositive up to
    /// roundoff.
    pub fn disk_excess(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max) - self.disk_radius
    }
}

pub fn diagnose(fp: &FactoredProblem, beta: f64) -> Result<DiagnosticsReport, LinalgError> {
    let report = build_k(fp, beta)?;
    let eigenvalues = gen_eig(&report.k, false)?.values;
    let (delta, delta_lb) = compute_delta(&report, &eigenvalues)?;
    let kappa_x = compute_kappa_x(&report)?;
    let (nu, nu_bound) = compute_nu(&report);
    Ok(DiagnosticsReport {
        beta,
        kappa: fp.constants.kappa,
        gamma: fp.constants.gamma(beta),
        disk_radius: report.norm_closed_form,
        norm_numeric: report.norm_numeric,
        eigenvalues,
        delta,
        delta_lb,
        kappa_x,
        nu,
        nu_bound,
    })
}

/// Per-iteration convergence rates predicted by the theory, without the
/// problem-dependent constant prefactors. `ks[i]` is the iteration index.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurves {
    pub ks: Vec<usize>,
    /// `(γ/(γ+1))^{k−2}`, plain ADMM.
    pub admm: Vec<f64>,
    /// `a^{k−2}`, the worst-case GMRES rate.
    pub worst_case: Vec<f64>,
    /// `1/|T_k(1/a)|`.
    pub chebyshev_exact: Vec<f64>,
    /// `2((√γ−1)/(√γ+1))^k`.
    pub chebyshev: Vec<f64>,
    /// `((√γ−1)/(√γ+1))^{δ(k−2)/6}`.
    pub disk_segment: Vec<f64>,
    /// `(1 − δ/2)^{k/2}`.
    pub outlier_damping: Vec<f64>,
}

pub fn bound_curves(constants: &SpectralConstants, beta: f64, delta: f64, k_max: usize) -> Result<BoundCurves, ProblemError> {
    bound_curves_for_gamma(constants.gamma(beta), delta, k_max)
}

pub fn bound_curves_for_gamma(gamma: f64, delta: f64, k_max: usize) -> Result<BoundCurves, ProblemError> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(ProblemError::Parameter(format!("gamma must be finite and >= 1, got {gamma}")));
    }
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(ProblemError::Parameter(format!("delta must lie in (0, 2], got {delta}")));
    }
    let a = (gamma - 1.0) / (gamma + 1.0);
    if a >= 1.0 {
        return Err(ProblemError::Parameter("disk radius >= 1, iteration does not contract".into()));
    }
    let sg = gamma.sqrt();
    let cheb_rate = (sg - 1.0) / (sg + 1.0);
    let ks: Vec<usize> = (0..=k_max).collect();
    let shifted = |k: usize| k.saturating_sub(2) as f64;
    Ok(BoundCurves {
        admm: ks.iter().map(|&k| (gamma / (gamma + 1.0)).powf(shifted(k))).collect(),
        worst_case: ks.iter().map(|&k| a.powf(shifted(k))).collect(),
        chebyshev_exact: chebyshev_inverse(a, k_max),
        chebyshev: ks.iter().map(|&k| 2.0 * cheb_rate.powi(k as i32)).collect(),
        disk_segment: ks.iter().map(|&k| cheb_rate.powf(delta * shifted(k) / 6.0)).collect(),
        outlier_damping: ks.iter().map(|&k| (1.0 - delta / 2.0).powf(k as f64 / 2.0)).collect(),
        ks,
    })
}

/// `1/|T_k(1/a)|` for `k = 0..=k_max` by the three-term recurrence.
fn chebyshev_inverse(a: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0);
    if a == 0.0 {
        out.resize(k_max + 1, 0.0);
        return out;
    }
    let x = 1.0 / a;
    let (mut prev, mut cur) = (1.0f64, x);
    for _ in 1..=k_max {
        out.push(1.0 / cur.abs());
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
        if !cur.is_finite() {
            // Past overflow the bound is zero to working precision.
            cur = f64::INFINITY;
        }
    }
    out
}

/// Greedy pairing of two complex multisets by smallest distance; returns
/// the largest paired distance, or infinity if the sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

/// Result of comparing the dense iteration-matrix spectrum with `K`.
#[derive(Debug, Clone)]
pub struct SpectrumTransfer {
    pub nonzero_count: usize,
    pub m: usize,
    /// Multiset distance between the nonzero eigenvalues of `G` and
    /// `½ + ½Λ{K}`.
    pub max_error: f64,
}

/// Eigenvalues of the dense ADMM iteration matrix with modulus above `tol`,
/// compared against `½ + ½Λ{K(β)}`.
pub fn spectrum_transfer(fp: &FactoredProblem, beta: f64, tol: f64) -> Result<SpectrumTransfer, LinalgError> {
    let (g, _) = assemble_kkt(&fp.problem, beta).iteration_matrix()?;
    let g_eigs: Vec<Complex64> = gen_eig(&g, false)?.values.into_iter().filter(|z| z.norm() > tol).collect();
    let k = build_k(fp, beta)?;
    let predicted: Vec<Complex64> = gen_eig(&k.k, false)?
        .values
        .into_iter()
        .map(|z| 0.5 + 0.5 * z)
        .collect();
    Ok(SpectrumTransfer {
        nonzero_count: g_eigs.len(),
        m: fp.m(),
        max_error: multiset_distance(&g_eigs, &predicted),
    })
}

/// `S^{-1/2}` of a symmetric positive definite matrix.
fn inv_sqrt(s: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let eig = sym_eig(s)?;
    if eig.min() <= 0.0 {
        return Err(LinalgError::NotPositiveDefinite { pivot: 0 });
    }
    Ok(eig.reconstruct_with(|x| 1.0 / x.sqrt()).symmetrized())
}

/// Dense spectrum of the preconditioned operator `M⁻¹H` for the methods
/// with a spectral characterization. The symmetric positive definite
/// preconditioners are applied as `M^{-1/2} H M^{-1/2}`, which keeps the
/// eigensolve symmetric. HSS has no closed-form spectrum and is rejected.
pub fn preconditioned_spectrum(fp: &FactoredProblem, method: SaddleMethod) -> Result<Vec<Complex64>, LinalgError> {
    let real = |v: Vec<f64>| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    match method {
        SaddleMethod::BlkDiag => {
            // M^{-1/2} H M^{-1/2} = [[0, Eᵀ], [E, −I]] with
            // E = C^{-1/2} B (βBᵀB)^{-1/2} and C^{-1/2} = D̃^{1/2}. Writing
            // the −I block exactly keeps the −1 cluster at roundoff level.
            let b = &fp.problem.b;
            let beta = BlockDiagonal::new(fp).beta;
            let (m, l) = (fp.m(), fp.l());
            let root_b = inv_sqrt(&b.t_matmul(b).scale(beta))?;
            let mut cb = DenseMatrix::zeros(m, l);
            for j in 0..l {
                let col = fp.dtilde_fn_apply(&b.column(j), f64::sqrt);
                for (i, v) in col.into_iter().enumerate() {
                    cb[(i, j)] = v;
                }
            }
            let e = cb.matmul(&root_b);
            let mut t = DenseMatrix::zeros(l + m, l + m);
            t.set_block(l, 0, &e);
            t.set_block(0, l, &e.transpose());
            for i in 0..m {
                t[(l + i, l + i)] = -1.0;
            }
            Ok(real(sym_eig(&t)?.values))
        }
        SaddleMethod::ConstrII => {
            let b = &fp.problem.b;
            let root = inv_sqrt(&b.t_matmul(b))?;
            let s = SchurSystem::new(fp).dense();
            Ok(real(sym_eig(&root.matmul(&s).matmul(&root).symmetrized())?.values))
        }
        SaddleMethod::ConstrI => {
            let m2 = Constraint::new(fp).dense();
            let h = ReducedSystem::new(fp).dense();
            Ok(gen_eig(&Lu::new(&m2)?.solve_matrix(&h), false)?.values)
        }
        SaddleMethod::Hss => Err(LinalgError::Shape("no spectral characterization for hss".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{random_problem, worst_case_problem, EcqpProblem};

    fn fp(n: usize, m: usize, l: usize, s: f64, seed: u64) -> FactoredProblem {
        FactoredProblem::new(random_problem(n, m, l, s, seed).unwrap()).unwrap()
    }

    fn diag_problem(dt: &[f64], l: usize) -> FactoredProblem {
        // With A = I, D̃ = D.
        let m = dt.len();
        let d = dt.to_vec();
        let b = DenseMatrix::from_fn(m, l, |i, j| if i == j { 1.0 } else { 0.0 });
        let prob = EcqpProblem::new(
            DenseMatrix::from_diag(&d),
            DenseMatrix::identity(m),
            b,
            vec![0.0; m],
            vec![0.0; l],
            vec![1.0; m],
        )
        .unwrap();
        FactoredProblem::new(prob).unwrap()
    }

    #[test]
    fn norm_closed_form_example() {
        let f = diag_problem(&[0.1, 1.0, 10.0], 1);
        let r = build_k(&f, 1.0).unwrap();
        assert!((r.norm_closed_form - 9.0 / 11.0).abs() < 1e-14);
        assert!((r.norm_numeric - 9.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn unit_condition_gives_zero_k() {
        let f = diag_problem(&[2.0, 2.0, 2.0], 2);
        let r = build_k(&f, 2.0).unwrap();
        assert!(r.k.max_abs() < 1e-14);
        let (delta, lb) = compute_delta(&r, &[]).unwrap();
        assert_eq!((delta, lb), (2.0, 2.0));
        assert_eq!(compute_nu(&r).0, 0.0);
    }

    #[test]
    fn norm_closed_form_random() {
        for seed in 0..10 {
            let f = fp(20, 12, 5, 1.5, seed);
            let c = &f.constants;
            for beta in [c.optimal_beta(), c.mu, c.l] {
                let r = build_k(&f, beta).unwrap();
                assert!((r.norm_numeric - r.norm_closed_form).abs() <= 1e-8 * (1.0 + r.norm_closed_form));
            }
        }
    }

    #[test]
    fn worst_case_small_is_scaled_rotation() {
        let f = FactoredProblem::new(worst_case_problem(4, 100.0, 1).unwrap()).unwrap();
        let r = build_k(&f, f.constants.optimal_beta()).unwrap();
        let a = 9.0 / 11.0;
        // Scaled orthogonal: KᵀK = a²I.
        let ktk = r.k.t_matmul(&r.k);
        assert!(ktk.sub(&DenseMatrix::identity(4).scale(a * a)).max_abs() < 1e-12);
        let d = diagnose(&f, f.constants.optimal_beta()).unwrap();
        assert!(d.eigenvalues.iter().all(|z| (z.norm() - a).abs() < 1e-10));
        // Eigenvalues a·exp(±iπ(2j+1)/m): here the angles ±π/4 and ±3π/4.
        let max_re = d.eigenvalues.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        assert!((max_re - a * (std::f64::consts::FRAC_PI_4).cos()).abs() < 1e-10);
        assert!((d.delta - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-10);
        assert!((d.kappa_x - 1.0).abs() < 1e-6);
        assert!(d.nu < 1e-6);
    }

    #[test]
    fn worst_case_delta_shrinks_with_m() {
        let delta = |m| {
            let f = FactoredProblem::new(worst_case_problem(m, 1e4, 2).unwrap()).unwrap();
            diagnose(&f, f.constants.optimal_beta()).unwrap().delta
        };
        assert!(delta(64) < delta(8));
    }

    #[test]
    fn nonnormality_examples() {
        let nil = DenseMatrix::from_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        // ‖diag(1, −1)‖_F^{1/2} / 1
        assert!((nonnormality(&nil) - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(nonnormality(&DenseMatrix::from_diag(&[1.0, 2.0])), 0.0);
    }

    #[test]
    fn random_invariants_hold() {
        for seed in 0..15 {
            let f = fp(24, 14, 6, 1.0, 100 + seed);
            let d = diagnose(&f, f.constants.optimal_beta()).unwrap();
            assert!(d.delta_lb <= d.delta + 1e-12, "{} > {}", d.delta_lb, d.delta);
            assert!(d.nu <= d.nu_bound + 1e-12);
            assert!(d.nu <= 2f64.sqrt());
            assert!(d.disk_excess() <= 1e-8);
            assert!(d.kappa_x >= 1.0);
        }
    }

    #[test]
    fn g_spectrum_is_half_plus_half_k() {
        for seed in 0..5 {
            let f = fp(16, 10, 4, 1.0, 200 + seed);
            for beta in [f.constants.optimal_beta(), f.constants.l] {
                let t = spectrum_transfer(&f, beta, 1e-6).unwrap();
                assert_eq!(t.nonzero_count, t.m);
                assert!(t.max_error < 1e-6, "{}", t.max_error);
            }
        }
    }

    #[test]
    fn chebyshev_examples() {
        let c = bound_curves_for_gamma(3.0, 1.0, 4).unwrap();
        // γ = 3 gives a = 0.5 and T₂(2) = 7.
        assert!((c.chebyshev_exact[2] - 1.0 / 7.0).abs() < 1e-15);
        assert!(c.chebyshev_exact[2] <= c.chebyshev[2]);
        assert!((c.chebyshev[2] - 2.0 * ((3f64.sqrt() - 1.0) / (3f64.sqrt() + 1.0)).powi(2)).abs() < 1e-15);
        assert_eq!(c.ks, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn bound_curve_edge_cases() {
        let c = bound_curves_for_gamma(1.0, 2.0, 5).unwrap();
        assert!(c.worst_case[3..].iter().all(|&v| v == 0.0));
        assert!(c.chebyshev_exact[1..].iter().all(|&v| v == 0.0));
        assert!(c.outlier_damping[1..].iter().all(|&v| v == 0.0));
        // The plain ADMM rate stays at 1/2 per step even when K = 0.
        assert!((c.admm[3] - 0.5).abs() < 1e-15);
        assert!(bound_curves_for_gamma(0.5, 1.0, 5).is_err());
        assert!(bound_curves_for_gamma(2.0, 0.0, 5).is_err());
        assert!(bound_curves_for_gamma(f64::INFINITY, 1.0, 5).is_err());
    }

    #[test]
    fn quarter_power_rate_at_optimal_beta() {
        // With β = √(μL), γ = √κ, so the Chebyshev rate is
        // (κ^{1/4} − 1)/(κ^{1/4} + 1).
        let c = bound_curves_for_gamma(100.0, 1.0, 3).unwrap();
        assert!((c.chebyshev[1] / 2.0 - 9.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_curve_dominates_exact() {
        for gamma in [1.5, 10.0, 1e4] {
            let c = bound_curves_for_gamma(gamma, 1.0, 200).unwrap();
            for (e, b) in c.chebyshev_exact.iter().zip(&c.chebyshev).skip(1) {
                assert!(*e <= b * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn preconditioned_spectra_match_theory() {
        let f = fp(20, 12, 5, 0.8, 9);
        let (m, l) = (12, 5);
        let tol = 1e-6;
        let blk = preconditioned_spectrum(&f, SaddleMethod::BlkDiag).unwrap();
        let n_minus_one = blk.iter().filter(|z| (z.re + 1.0).abs() <= tol).count();
        assert_eq!(n_minus_one, m - l);
        let c = &f.constants;
        let schur = preconditioned_spectrum(&f, SaddleMethod::ConstrII).unwrap();
        assert!(schur.iter().all(|z| z.re >= c.mu - tol && z.re <= c.l + tol));
        let con = preconditioned_spectrum(&f, SaddleMethod::ConstrI).unwrap();
        let beta = c.optimal_beta();
        let (lo, hi) = (1.0 / (c.l * beta), 1.0 / (c.mu * beta));
        let ones = con.iter().filter(|z| (*z - 1.0).norm() <= tol).count();
        assert!(ones >= 2 * l);
        let rest: Vec<_> = con.iter().filter(|z| (*z - 1.0).norm() > tol).collect();
        assert!(rest.iter().all(|z| z.im.abs() < tol && z.re >= lo - tol && z.re <= hi + tol));
        assert!(preconditioned_spectrum(&f, SaddleMethod::Hss).is_err());
    }

    #[test]
    fn preconditioned_spectra_match_plain_eigensolve() {
        let f = fp(16, 9, 4, 0.7, 21);
        let h = ReducedSystem::new(&f).dense();
        for (method, m) in [
            (SaddleMethod::BlkDiag, BlockDiagonal::new(&f).dense()),
            (SaddleMethod::ConstrI, Constraint::new(&f).dense()),
        ] {
            let want = gen_eig(&Lu::new(&m).unwrap().solve_matrix(&h), false).unwrap().values;
            let got = preconditioned_spectrum(&f, method).unwrap();
            assert!(multiset_distance(&got, &want) < 1e-8, "{method}");
        }
        let b = &f.problem.b;
        let s = SchurSystem::new(&f).dense();
        let want = gen_eig(&Lu::new(&b.t_matmul(b)).unwrap().solve_matrix(&s), false).unwrap().values;
        let got = preconditioned_spectrum(&f, SaddleMethod::ConstrII).unwrap();
        assert!(multiset_distance(&got, &want) < 1e-8);
        assert!(preconditioned_spectrum(&f, SaddleMethod::Hss).is_err());
    }

    #[test]
    fn multiset_distance_basics() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let b = [Complex64::new(0.0, 1.0), Complex64::new(1.0, 1e-9)];
        assert!(multiset_distance(&a, &b) < 2e-9);
        assert_eq!(multiset_distance(&a, &b[..1]), f64::INFINITY);
    }
}
