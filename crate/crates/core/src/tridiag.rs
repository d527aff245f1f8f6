/// Solves the tridiagonal system `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`
/// in place with the Thomas algorithm. `sub[0]` and `sup[n-1]` are ignored.
///
/// No pivoting: callers pass diagonally dominant systems.
pub fn thomas_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    assert!(n > 0 && sub.len() == n && diag.len() == n && sup.len() == n);
    let mut c = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}
