use alloc::vec::Vec;

use crate::numerics::Matrix;

/// Cyclic Jacobi rotations: slow but independent of the QR-based
/// production path.
pub fn jacobi_oracle(s: &Matrix) -> (Vec<f64>, Matrix) {
    let n = s.nrows();
    let mut a = s.clone();
    let mut v = Matrix::identity(n, n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s_ = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s_ * akq;
                    a[(k, q)] = s_ * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s_ * aqk;
                    a[(q, k)] = s_ * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s_ * vkq;
                    v[(k, q)] = s_ * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = Matrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &v.column(i));
    }
    (vals, vecs)
}

pub fn same_up_to_sign(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    a.column_iter().zip(b.column_iter()).all(|(x, y)| {
        let d1 = (x - y).amax();
        let d2 = (x + y).amax();
        d1.min(d2) <= tol
    })
}
