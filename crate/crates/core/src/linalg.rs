//! Small dense eigenvalue and root-finding kernels.
//!
//! The matrices here are at most a few dozen rows, so the kernels favour
//! simplicity: balancing plus elimination to Hessenberg form plus Francis
//! double-shift QR for nonsymmetric matrices, implicit QL for symmetric
//! tridiagonals, and Aberth-Ehrlich iteration for polynomial roots.

use crate::error::{Error, Result};
use crate::poly::Poly;
use nalgebra::DMatrix;
use num_complex::Complex64;

const MAX_QR_ITERATIONS: usize = 60;
const MAX_QL_ITERATIONS: usize = 60;
const MAX_ABERTH_ITERATIONS: usize = 500;

/// Rescales rows and columns by powers of two to equalise their norms.
/// Eigenvalues are unchanged exactly.
pub fn balance(a: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                c += a[(j, i)].abs();
                r += a[(i, j)].abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Reduces to upper Hessenberg form by Gaussian elimination with pivoting.
pub fn to_hessenberg(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for m in 1..n.saturating_sub(1) {
        let mut pivot = m;
        for j in m..n {
            if a[(j, m - 1)].abs() > a[(pivot, m - 1)].abs() {
                pivot = j;
            }
        }
        let x = a[(pivot, m - 1)];
        if pivot != m {
            a.swap_rows(pivot, m);
            a.swap_columns(pivot, m);
        }
        if x == 0.0 {
            continue;
        }
        for i in m + 1..n {
            let y = a[(i, m - 1)] / x;
            if y == 0.0 {
                continue;
            }
            for j in m - 1..n {
                let v = a[(m, j)];
                a[(i, j)] -= y * v;
            }
            for j in 0..n {
                let v = a[(j, i)];
                a[(j, m)] += y * v;
            }
        }
    }
    for j in 0..n {
        for i in j + 2..n {
            a[(i, j)] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.
///
/// The matrix is overwritten. Fails with a numeric error, naming the
/// iteration count, if an eigenvalue does not converge.
pub fn hessenberg_eigenvalues(a: &mut DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(w);
    }
    let eps = f64::EPSILON;
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // look for a negligible subdiagonal element
            let mut l = nu;
            while l > 0 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= eps * s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(nu, nu)];
            if l == nu {
                w[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[(nu - 1, nu - 1)];
            let mut wv = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l + 1 == nu {
                let p = 0.5 * (y - x);
                let q = p * p + wv;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    w[nu - 1] = Complex64::new(x + z, 0.0);
                    w[nu] = if z != 0.0 {
                        Complex64::new(x - wv / z, 0.0)
                    } else {
                        Complex64::new(x + z, 0.0)
                    };
                } else {
                    w[nu] = Complex64::new(x + p, -z);
                    w[nu - 1] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == MAX_QR_ITERATIONS {
                return Err(Error::Numeric(format!(
                    "QR iteration did not converge after {its} iterations at row {nu}"
                )));
            }
            if its % 10 == 0 && its > 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                wv = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r): (f64, f64, f64);
            let mut z;
            let mut m = nu - 2;
            loop {
                z = a[(m, m)];
                let rr = x - z;
                let s = y - z;
                p = (rr * s - wv) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - s;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nu - 1 {
                a[(i + 2, i)] = 0.0;
                if i != m {
                    a[(i + 2, i - 1)] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k + 1 != nu { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != nu {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * z;
                        }
                        a[(k + 1, j)] -= pp * y;
                        a[(k, j)] -= pp * x;
                    }
                    let mmin = nu.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != nu {
                            pp += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(w)
}

/// Eigenvalues of a general real square matrix, sorted by (real, imaginary) part.
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !matrix.is_square() {
        return Err(Error::Domain("matrix must be square".into()));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let mut a = matrix.clone();
    balance(&mut a);
    to_hessenberg(&mut a);
    let mut w = hessenberg_eigenvalues(&mut a)?;
    sort_complex(&mut w);
    Ok(w)
}

/// Sorts by real part, then imaginary part.
pub fn sort_complex(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts, with the first component of each normalised eigenvector.
///
/// `diag` has length `n`, `off` length `n - 1` (`off[i]` couples `i` and `i+1`).
/// Output is sorted by eigenvalue.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::Domain(
            "need n diagonal and n-1 off-diagonal entries".into(),
        ));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_QL_ITERATIONS {
                return Err(Error::Numeric(format!(
                    "QL iteration did not converge after {iter} iterations at row {l}"
                )));
            }
            iter += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    Ok((
        order.iter().map(|&i| d[i]).collect(),
        order.iter().map(|&i| z[i]).collect(),
    ))
}

fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of `p` by simultaneous Aberth-Ehrlich iteration,
/// followed by one Newton polish per root. Sorted by (real, imaginary) part.
pub fn polynomial_roots(p: &Poly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if p.is_zero() {
        return Err(Error::Domain(
            "zero polynomial has no finite root set".into(),
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    let coeffs: Vec<f64> = p.coeffs().iter().map(|c| c / lead).collect();
    // Fujiwara-type bound on the root moduli
    let radius = (0..n)
        .map(|i| coeffs[i].abs().powf(1.0 / (n - i) as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let centre = -coeffs[n - 1] / n as f64;
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * (i as f64 + 0.25) / n as f64 + 0.4;
            Complex64::new(centre, 0.0) + Complex64::from_polar(radius, angle)
        })
        .collect();
    // a root is settled once |p(z)| is within the rounding bound of Horner's rule
    let abs_coeffs: Vec<f64> = coeffs.iter().map(|c| c.abs()).collect();
    let noise = |z: Complex64| {
        let r = z.norm();
        let bound = abs_coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c);
        4.0 * (n as f64 + 1.0) * f64::EPSILON * bound
    };
    let mut settled = vec![false; n];
    for _ in 0..MAX_ABERTH_ITERATIONS {
        for i in 0..n {
            if settled[i] {
                continue;
            }
            let (pv, dpv) = eval_with_derivative(&coeffs, z[i]);
            if pv.norm() <= noise(z[i]) {
                settled[i] = true;
                continue;
            }
            let ratio = pv / dpv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                // roots at or near zero: the residual bound vanishes, so stop on the step
                settled[i] = step.norm() <= f64::EPSILON * z[i].norm().max(f64::EPSILON * radius);
            }
        }
        if settled.iter().all(|&s| s) {
            break;
        }
    }
    if let Some(i) = settled.iter().position(|&s| !s) {
        return Err(Error::Numeric(format!(
            "root iteration left z = {} unsettled after {MAX_ABERTH_ITERATIONS} iterations",
            z[i]
        )));
    }
    for zi in &mut z {
        let (pv, dpv) = eval_with_derivative(&coeffs, *zi);
        let step = pv / dpv;
        if step.is_finite() {
            *zi -= step;
        }
    }
    sort_complex(&mut z);
    Ok(z)
}

/// Characteristic polynomial `det(xI - H)` of an upper Hessenberg matrix by
/// the expansion along the last column.
pub fn hessenberg_charpoly(h: &DMatrix<f64>) -> Poly {
    let n = h.nrows();
    let mut p = vec![Poly::one()];
    for i in 0..n {
        let mut next = &Poly::linear_monic(h[(i, i)]) * &p[i];
        let mut sub = 1.0;
        for m in 1..=i {
            sub *= h[(i - m + 1, i - m)];
            next = next.add_scaled(&p[i - m], &(-h[(i - m, i)] * sub));
        }
        p.push(next);
    }
    p.pop().unwrap_or_else(Poly::one)
}

/// Greedy nearest matching of two multisets of the same size: returns the
/// largest distance between matched pairs, or infinity on a size mismatch.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut unused: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0f64;
    for x in a {
        let (idx, dist) = unused
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes match");
        worst = worst.max(dist);
        unused.swap_remove(idx);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(values: &[f64]) -> Vec<Complex64> {
        values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    #[test]
    fn eigenvalues_of_small_matrices() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.25, -0.5]);
        let w = eigenvalues(&a).unwrap();
        let s = 5f64.sqrt();
        assert!(multiset_distance(&w, &real(&[(-1.0 - s) / 4.0, (-1.0 + s) / 4.0])) < 1e-15);

        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let w = eigenvalues(&rot).unwrap();
        let want = [Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)];
        assert!(multiset_distance(&w, &want) < 1e-15);
    }

    #[test]
    fn eigenvalues_of_companion_matrix() {
        let roots = [-2.0, -0.5, 0.25, 1.0, 3.0, 7.0];
        let p = Poly::from_roots(&roots);
        let n = roots.len();
        let mut c = DMatrix::zeros(n, n);
        for i in 1..n {
            c[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            c[(i, n - 1)] = -p.coeff(i);
        }
        let w = eigenvalues(&c).unwrap();
        assert!(multiset_distance(&w, &real(&roots)) < 1e-10);
    }

    #[test]
    fn eigenvalues_of_a_dense_nonsymmetric_matrix() {
        // upper triangular plus a similarity transform keeps the spectrum {1..8}
        let n = 8;
        let t = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                (i + 1) as f64
            } else if j > i {
                0.3
            } else {
                0.0
            }
        });
        let s = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0
            } else {
                1.0 / (1 + i + 2 * j) as f64
            }
        });
        let a = &s * t * s.try_inverse().unwrap();
        let w = eigenvalues(&a).unwrap();
        let want: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        assert!(multiset_distance(&w, &real(&want)) < 1e-9);
    }

    #[test]
    fn tridiagonal_eigen_chebyshev_t() {
        // symmetrised T Jacobi matrix, n = 2: zeros +-1/sqrt 2
        let (w, z) = symmetric_tridiagonal_eigen(&[0.0, 0.0], &[0.5f64.sqrt()]).unwrap();
        assert!((w[0] + 0.5f64.sqrt()).abs() < 1e-15);
        assert!((w[1] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((z[0] * z[0] - 0.5).abs() < 1e-15);

        let n = 12;
        let off = vec![0.5; n - 1];
        let (w, z) = symmetric_tridiagonal_eigen(&vec![0.0; n], &off).unwrap();
        for (j, x) in w.iter().enumerate() {
            let want = -((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((x - want).abs() < 1e-14);
        }
        assert!((z.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn aberth_roots() {
        let p = Poly::from_roots(&[0.1, -0.7, 0.3, 0.95, -0.2]);
        let r = polynomial_roots(&p).unwrap();
        assert!(multiset_distance(&r, &real(&[0.1, -0.7, 0.3, 0.95, -0.2])) < 1e-13);

        // x^2 + 1
        let r = polynomial_roots(&Poly::new(vec![1.0, 0.0, 1.0])).unwrap();
        assert!(multiset_distance(&r, &[Complex64::i(), -Complex64::i()]) < 1e-15);

        // odd polynomial with a root at zero
        let p = Poly::from_roots(&[-0.9, -0.5, 0.0, 0.5, 0.9]);
        let r = polynomial_roots(&p).unwrap();
        assert!(multiset_distance(&r, &real(&[-0.9, -0.5, 0.0, 0.5, 0.9])) < 1e-14);
    }

    #[test]
    fn hessenberg_charpoly_matches_expansion() {
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.0, 7.0, 8.0]);
        // det(xI - H) = x^3 - 14x^2 + 3x - 18 (trace 14, principal 2-minors sum 3, det 18)
        let p = hessenberg_charpoly(&h);
        assert_eq!(p.coeffs(), &[-18.0, 3.0, -14.0, 1.0]);
    }

    #[test]
    fn multiset_distance_is_order_free() {
        let a = real(&[1.0, 2.0, 3.0]);
        let b = real(&[3.0, 1.0, 2.0 + 1e-9]);
        assert!((multiset_distance(&a, &b) - 1e-9).abs() < 1e-15);
        assert_eq!(multiset_distance(&a, &b[..2]), f64::INFINITY);
    }
}
