use num_complex::Complex64;

use super::{ComplexMatrix, DenseMatrix};
use crate::error::LinalgError;

/// Eigenvalues (and optionally unit-norm eigenvectors) of a real square matrix.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<Complex64>,
    /// Columns have unit Euclidean norm; column `j` belongs to `values[j]`.
    pub vectors: Option<ComplexMatrix>,
}

/// Eigenvalues of a general real matrix: Householder reduction to upper
/// Hessenberg form, then the Francis double-shift QR iteration. Complex
/// eigenvalues come out as exact conjugate pairs.
pub fn gen_eig(m: &DenseMatrix, want_vectors: bool) -> Result<EigenPairs, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite(0, 0));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: want_vectors.then(|| ComplexMatrix::zeros(0, 0)),
        });
    }
    let mut h = m.clone();
    let mut v = DenseMatrix::identity(n);
    hessenberg(&mut h, &mut v, want_vectors);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    hqr2(&mut h, &mut v, &mut d, &mut e, want_vectors)?;

    let values: Vec<Complex64> = d.iter().zip(&e).map(|(&re, &im)| Complex64::new(re, im)).collect();
    let vectors = want_vectors.then(|| {
        let mut x = ComplexMatrix::zeros(n, n);
        let mut j = 0;
        while j < n {
            if e[j] == 0.0 {
                for i in 0..n {
                    x[(i, j)] = Complex64::new(v[(i, j)], 0.0);
                }
                j += 1;
            } else {
                // Pair (j, j+1): vector for d + i e is v_j + i v_{j+1}.
                for i in 0..n {
                    let re = v[(i, j)];
                    let im = v[(i, j + 1)];
                    x[(i, j)] = Complex64::new(re, im);
                    x[(i, j + 1)] = Complex64::new(re, -im);
                }
                j += 2;
            }
        }
        x.normalize_columns();
        x
    });
    Ok(EigenPairs { values, vectors })
}

fn hessenberg(h: &mut DenseMatrix, v: &mut DenseMatrix, want_vectors: bool) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hsum = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hsum += ort[i] * ort[i];
        }
        let mut g = hsum.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hsum -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hsum;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hsum;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }
    if !want_vectors {
        return;
    }
    for m in (1..high).rev() {
        if h[(m, m - 1)] == 0.0 {
            continue;
        }
        for i in (m + 1)..=high {
            ort[i] = h[(i, m - 1)];
        }
        for j in m..=high {
            let mut g = 0.0;
            for i in m..=high {
                g += ort[i] * v[(i, j)];
            }
            g = (g / ort[m]) / h[(m, m - 1)];
            for i in m..=high {
                v[(i, j)] += g * ort[i];
            }
        }
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

#[allow(clippy::many_single_char_names)]
fn hqr2(
    h: &mut DenseMatrix,
    v: &mut DenseMatrix,
    d: &mut [f64],
    e: &mut [f64],
    want_vectors: bool,
) -> Result<(), LinalgError> {
    const MAX_SWEEPS_PER_ROOT: usize = 200;
    let nn = h.rows();
    let low = 0usize;
    let high = nn - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q): (f64, f64);
    let (mut r, mut s, mut z) = (0.0f64, 0.0f64, 0.0f64);
    let (mut t, mut w, mut x, mut y): (f64, f64, f64, f64);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    while n >= low as isize {
        let nu = n as usize;
        // Look for a single small subdiagonal element.
        let mut l = nu;
        while l > low {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // One root.
            h[(nu, nu)] += exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            // Two roots.
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (nu - 1)..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                if want_vectors {
                    for i in low..=high {
                        z = v[(i, nu - 1)];
                        v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                        v[(i, nu)] = q * v[(i, nu)] - p * z;
                    }
                }
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form shift.
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter == 10 {
                // Exceptional shift.
                exshift += x;
                for i in low..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_SWEEPS_PER_ROOT {
                return Err(LinalgError::NoConvergence { iterations: iter });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                    if want_vectors {
                        for i in low..=high {
                            p = x * v[(i, k)] + y * v[(i, k + 1)];
                            if notlast {
                                p += z * v[(i, k + 2)];
                                v[(i, k + 2)] -= p * r;
                            }
                            v[(i, k)] -= p;
                            v[(i, k + 1)] -= p * q;
                        }
                    }
                }
                k += 1;
            }
        }
    }

    if !want_vectors || norm == 0.0 {
        return Ok(());
    }

    // Back-substitute to find vectors of the upper-triangular form.
    for nb in (0..nn).rev() {
        p = d[nb];
        q = e[nb];
        if q == 0.0 {
            let mut l = nb;
            h[(nb, nb)] = 1.0;
            for i in (0..nb).rev() {
                w = h[(i, i)] - p;
                r = 0.0;
                for j in l..=nb {
                    r += h[(i, j)] * h[(j, nb)];
                }
                if e[i] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        h[(i, nb)] = if w != 0.0 { -r / w } else { -r / (eps * norm) };
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        t = (x * s - z * r) / q;
                        h[(i, nb)] = t;
                        h[(i + 1, nb)] = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    t = h[(i, nb)].abs();
                    if (eps * t) * t > 1.0 {
                        for j in i..=nb {
                            h[(j, nb)] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            let n1 = nb - 1;
            let mut l = n1;
            if h[(nb, n1)].abs() > h[(n1, nb)].abs() {
                h[(n1, n1)] = q / h[(nb, n1)];
                h[(n1, nb)] = -(h[(nb, nb)] - p) / h[(nb, n1)];
            } else {
                let (cr, ci) = cdiv(0.0, -h[(n1, nb)], h[(n1, n1)] - p, q);
                h[(n1, n1)] = cr;
                h[(n1, nb)] = ci;
            }
            h[(nb, n1)] = 0.0;
            h[(nb, nb)] = 1.0;
            for i in (0..n1).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=nb {
                    ra += h[(i, j)] * h[(j, n1)];
                    sa += h[(i, j)] * h[(j, nb)];
                }
                w = h[(i, i)] - p;
                if e[i] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        h[(i, n1)] = cr;
                        h[(i, nb)] = ci;
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        let mut vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                        let vi = (d[i] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        h[(i, n1)] = cr;
                        h[(i, nb)] = ci;
                        if x.abs() > z.abs() + q.abs() {
                            h[(i + 1, n1)] = (-ra - w * h[(i, n1)] + q * h[(i, nb)]) / x;
                            h[(i + 1, nb)] = (-sa - w * h[(i, nb)] - q * h[(i, n1)]) / x;
                        } else {
                            let (cr, ci) = cdiv(-r - y * h[(i, n1)], -s - y * h[(i, nb)], z, q);
                            h[(i + 1, n1)] = cr;
                            h[(i + 1, nb)] = ci;
                        }
                    }
                    t = h[(i, n1)].abs().max(h[(i, nb)].abs());
                    if (eps * t) * t > 1.0 {
                        for j in i..=nb {
                            h[(j, n1)] /= t;
                            h[(j, nb)] /= t;
                        }
                    }
                }
            }
        }
    }

    // Back-transform to eigenvectors of the original matrix.
    for j in (low..nn).rev() {
        for i in low..=high {
            let mut acc = 0.0;
            for k in low..=j.min(high) {
                acc += v[(i, k)] * h[(k, j)];
            }
            v[(i, j)] = acc;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn rotation_has_imaginary_unit_pair() {
        let m = DenseMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let ev = sorted(gen_eig(&m, false).unwrap().values);
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn triangular_matrix_eigenvalues_are_diagonal() {
        let m = DenseMatrix::from_rows(&[&[1.0, 5.0, 2.0], &[0.0, -2.0, 7.0], &[0.0, 0.0, 3.0]]);
        let ev = sorted(gen_eig(&m, true).unwrap().values);
        for (got, want) in ev.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((got.re - want).abs() < 1e-13 && got.im == 0.0);
        }
    }

    #[test]
    fn eigenvectors_satisfy_definition_and_pairs_conjugate() {
        let mut rng = Rng::seed_from_u64(5);
        for &n in &[3usize, 10, 40] {
            let m = DenseMatrix::from_fn(n, n, |_, _| rng.gaussian());
            let pairs = gen_eig(&m, true).unwrap();
            let x = pairs.vectors.as_ref().unwrap();
            let scale = crate::linalg::frobenius_norm(&m);
            for (j, lam) in pairs.values.iter().enumerate() {
                let col = x.column(j);
                let nrm: f64 = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                assert!((nrm - 1.0).abs() < 1e-12);
                for i in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += m[(i, k)] * col[k];
                    }
                    assert!((acc - lam * col[i]).norm() < 1e-10 * scale, "n={n} j={j}");
                }
            }
            let ev = pairs.values;
            for lam in &ev {
                if lam.im != 0.0 {
                    assert!(ev.iter().any(|mu| mu.re == lam.re && mu.im == -lam.im));
                }
            }
        }
    }

    #[test]
    fn values_only_matches_full() {
        let mut rng = Rng::seed_from_u64(9);
        let m = DenseMatrix::from_fn(25, 25, |_, _| rng.gaussian());
        let a = sorted(gen_eig(&m, false).unwrap().values);
        let b = sorted(gen_eig(&m, true).unwrap().values);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}
