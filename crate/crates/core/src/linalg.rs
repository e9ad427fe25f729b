//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Hermitian eigendecomposition with eigenpairs sorted by descending eigenvalue.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    // Symmetrize first; callers build their matrices from sums of outer
    // products and tiny asymmetries would otherwise leak into the solver.
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Real part of `w^H D w`.
pub fn quad_form(d: &CMatrix, w: &CVector) -> f64 {
    w.dotc(&(d * w)).re
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Rotates `w` so its largest-magnitude entry is real and positive.
pub fn canonical_phase(w: &CVector) -> CVector {
    let pivot = w
        .iter()
        .enumerate()
        .fold((0usize, -1.0f64), |best, (i, z)| {
            if z.norm() > best.1 + 1e-12 {
                (i, z.norm())
            } else {
                best
            }
        })
        .0;
    let z = w[pivot];
    if z.norm() == 0.0 {
        return w.clone();
    }
    let rot = z.conj() / z.norm();
    w.map(|x| x * rot)
}

/// Principal eigenpair of a Hermitian matrix.
///
/// When the top eigenvalue is repeated (within `tie_tol` relative), the
/// eigenvector inside the top eigenspace maximizing `w^H tie_break w` is
/// returned instead of an arbitrary basis vector.
pub fn principal_eigen(m: &CMatrix, tie_break: Option<&CMatrix>, tie_tol: f64) -> (f64, CVector) {
    let (values, vectors) = hermitian_eigen(m);
    let top = values[0];
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let k = values
        .iter()
        .take_while(|&&v| (top - v) <= tie_tol * scale)
        .count();
    let w = match tie_break {
        Some(d) if k > 1 => {
            let basis = vectors.columns(0, k).into_owned();
            let reduced = basis.adjoint() * d * &basis;
            let (_, inner) = hermitian_eigen(&reduced);
            let coeffs = inner.column(0).into_owned();
            let w = &basis * coeffs;
            let n = w.norm();
            w.unscale(n)
        }
        _ => vectors.column(0).into_owned(),
    };
    (top, canonical_phase(&w))
}
