use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DenseMatrix, Qr};

/// Seedable generator used for every random draw in the crate.
///
/// Backed by ChaCha8 (counter-based stream cipher), so a seed reproduces the
/// same stream bit-for-bit on every platform. Gaussians use the Box–Muller
/// transform; the second variate of each pair is cached.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl Rng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer on `lo..=hi`.
    pub fn uniform_int(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.gen_range(lo..=hi)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen::<u64>()
    }

    /// Standard normal variate.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// `exp(s · N(0,1))`.
    pub fn lognormal(&mut self, s: f64) -> f64 {
        (s * self.gaussian()).exp()
    }

    pub fn gaussian_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.gaussian()).collect()
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| self.gaussian())
    }
}

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the columns of Q sign-corrected by the signs of R's diagonal.
pub fn haar_orthogonal(dim: usize, rng: &mut Rng) -> DenseMatrix {
    assert!(dim >= 1, "haar_orthogonal needs dim >= 1");
    loop {
        let g = rng.gaussian_matrix(dim, dim);
        // A Gaussian matrix is singular with probability zero; redraw if
        // roundoff says otherwise.
        let Ok(qr) = Qr::new(&g) else { continue };
        let mut q = qr.q;
        for (j, rjj) in qr.r.diagonal().iter().enumerate() {
            if *rjj < 0.0 {
                for i in 0..dim {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        return q;
    }
}
