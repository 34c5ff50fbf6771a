use super::EcqpProblem;
use crate::error::LinalgError;
use crate::linalg::{DenseMatrix, Lu};

/// Dense assemblies of the augmented system `H(β)u = v(β)`, its
/// Gauss–Seidel splitting `H = M − N` and the unaugmented saddle system.
/// `u = [x; z; y]` uses the scaled dual `y = λ/β`.
#[derive(Debug, Clone)]
pub struct KktSystem {
    pub h: DenseMatrix,
    pub v: Vec<f64>,
    pub m: DenseMatrix,
    pub n: DenseMatrix,
    pub saddle: DenseMatrix,
    pub saddle_rhs: Vec<f64>,
}

impl KktSystem {
    /// Dense `G = M⁻¹N` and `b = M⁻¹v`.
    pub fn iteration_matrix(&self) -> Result<(DenseMatrix, Vec<f64>), LinalgError> {
        let lu = Lu::new(&self.m)?;
        Ok((lu.solve_matrix(&self.n), lu.solve(&self.v)))
    }
}

pub fn assemble_kkt(prob: &EcqpProblem, beta: f64) -> KktSystem {
    let (n, m, l) = (prob.n(), prob.m(), prob.l());
    let dim = n + l + m;
    let (a, b) = (&prob.a, &prob.b);
    let ata = a.t_matmul(a);
    let atb = a.t_matmul(b);
    let btb = b.t_matmul(b);
    let at = a.transpose();
    let bt = b.transpose();
    let x11 = prob.hessian.scale(1.0 / beta).add(&ata);
    let eye = DenseMatrix::identity(m);

    let mut h = DenseMatrix::zeros(dim, dim);
    h.set_block(0, 0, &x11);
    h.set_block(0, n, &atb);
    h.set_block(0, n + l, &at);
    h.set_block(n, 0, &atb.transpose());
    h.set_block(n, n, &btb);
    h.set_block(n, n + l, &bt);
    h.set_block(n + l, 0, a);
    h.set_block(n + l, n, b);

    let mut mm = DenseMatrix::zeros(dim, dim);
    mm.set_block(0, 0, &x11);
    mm.set_block(n, 0, &atb.transpose());
    mm.set_block(n, n, &btb);
    mm.set_block(n + l, 0, a);
    mm.set_block(n + l, n, b);
    mm.set_block(n + l, n + l, &eye.scale(-1.0));

    let mut nn = DenseMatrix::zeros(dim, dim);
    nn.set_block(0, n, &atb.scale(-1.0));
    nn.set_block(0, n + l, &at.scale(-1.0));
    nn.set_block(n, n + l, &bt.scale(-1.0));
    nn.set_block(n + l, n + l, &eye.scale(-1.0));

    let mut v = a.matvec_t(&prob.d);
    for (vi, ci) in v.iter_mut().zip(&prob.c) {
        *vi -= ci / beta;
    }
    let mut v2 = b.matvec_t(&prob.d);
    for (vi, pi) in v2.iter_mut().zip(&prob.p) {
        *vi -= pi / beta;
    }
    v.extend(v2);
    v.extend_from_slice(&prob.d);

    let mut saddle = DenseMatrix::zeros(dim, dim);
    saddle.set_block(0, 0, &prob.hessian);
    saddle.set_block(0, n + l, &at);
    saddle.set_block(n, n + l, &bt);
    saddle.set_block(n + l, 0, a);
    saddle.set_block(n + l, n, b);
    let mut saddle_rhs: Vec<f64> = prob.c.iter().map(|x| -x).collect();
    saddle_rhs.extend(prob.p.iter().map(|x| -x));
    saddle_rhs.extend_from_slice(&prob.d);

    KktSystem {
        h,
        v,
        m: mm,
        n: nn,
        saddle,
        saddle_rhs,
    }
}

/// Exact solution of the saddle system, with the unscaled multiplier `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Dense LU solve of the saddle system; the reference answer in tests.
pub fn solve_saddle_dense(prob: &EcqpProblem) -> Result<SaddleSolution, LinalgError> {
    let kkt = assemble_kkt(prob, 1.0);
    let sol = Lu::new(&kkt.saddle)?.solve(&kkt.saddle_rhs);
    let (n, l) = (prob.n(), prob.l());
    Ok(SaddleSolution {
        x: sol[..n].to_vec(),
        z: sol[n..n + l].to_vec(),
        lambda: sol[n + l..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::random_problem;

    #[test]
    fn scalar_assembly_by_hand() {
        let one = |x: f64| DenseMatrix::from_diag(&[x]);
        let prob = EcqpProblem::new(one(2.0), one(1.0), one(1.0), vec![0.0], vec![0.0], vec![0.0]).unwrap();
        let kkt = assemble_kkt(&prob, 1.0);
        let expect = DenseMatrix::from_rows(&[&[3.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 0.0]]);
        assert_eq!(kkt.h, expect);
    }

    #[test]
    fn splitting_is_exact() {
        let prob = random_problem(9, 5, 2, 1.0, 8).unwrap();
        let kkt = assemble_kkt(&prob, 0.7);
        assert_eq!(kkt.h.sub(&kkt.m.sub(&kkt.n)).max_abs(), 0.0);
    }

    #[test]
    fn dense_saddle_solution_has_tiny_residual() {
        let prob = random_problem(14, 8, 3, 1.0, 2).unwrap();
        let sol = solve_saddle_dense(&prob).unwrap();
        assert!(prob.saddle_residual(&sol.x, &sol.z, &sol.lambda) < 1e-10);
    }

    #[test]
    fn augmented_fixed_point_is_saddle_solution() {
        let prob = random_problem(10, 6, 3, 0.5, 21).unwrap();
        let beta = 1.7;
        let kkt = assemble_kkt(&prob, beta);
        let u = Lu::new(&kkt.h).unwrap().solve(&kkt.v);
        let (n, l) = (prob.n(), prob.l());
        let lambda: Vec<f64> = u[n + l..].iter().map(|y| beta * y).collect();
        assert!(prob.saddle_residual(&u[..n], &u[n..n + l], &lambda) < 1e-10);
    }
}
