//! Dense complex SVD helpers. Matrices are nalgebra types; the
//! factorizations come from faer, whose complex SVD stays accurate on the
//! sparse, highly structured matrices produced by monomial bases.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub(crate) type CMatrix = DMatrix<Complex64>;
pub(crate) type CVector = DVector<Complex64>;

/// `(U, s, V)` with `a = U diag(s) V^H`, singular values descending. `full`
/// returns square `U` and `V`; otherwise both have `min(rows, cols)` columns.
fn svd(a: &CMatrix, full: bool) -> (CMatrix, Vec<f64>, CMatrix) {
    let (rows, cols) = a.shape();
    let m = Mat::<Complex64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let f = if full { m.svd() } else { m.thin_svd() }.expect("SVD did not converge");
    let (u, v) = (f.U(), f.V());
    let s = f.S().column_vector().iter().map(|z| z.re).collect();
    (
        CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
        s,
        CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
    )
}

/// Orthonormal basis (as columns) of the null space of `a`. A right singular
/// vector is null when its singular value is `<= tol`.
#[cfg(test)]
pub(crate) fn null_space(a: &CMatrix, tol: f64) -> CMatrix {
    null_space_with_defect(a, tol).0
}

/// Kept singular values below `AMBIGUITY * tol` are too close to the cutoff
/// for the rank decision to be trusted.
pub(crate) const AMBIGUITY: f64 = 1e3;

/// `sqrt(Σ σ²)` over the singular values that are discarded (index `>= rank`)
/// or kept but within `AMBIGUITY` of `tol`.
pub(crate) fn rank_defect(s: &[f64], rank: usize, tol: f64) -> f64 {
    s.iter()
        .enumerate()
        .filter(|&(i, &x)| i >= rank || x < AMBIGUITY * tol)
        .map(|(_, x)| x * x)
        .sum::<f64>()
        .sqrt()
}

/// Null space together with its [`rank_defect`].
pub(crate) fn null_space_with_defect(a: &CMatrix, tol: f64) -> (CMatrix, f64) {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return (CMatrix::zeros(0, 0), 0.0);
    }
    if rows == 0 {
        return (CMatrix::identity(cols, cols), 0.0);
    }
    let (_, s, v) = svd(a, true);
    let rank = s.iter().take_while(|&&x| x > tol).count();
    let defect = rank_defect(s.as_slice(), rank, tol);
    (v.columns(rank, cols - rank).into_owned(), defect)
}

/// Singular values of `a`, descending.
pub(crate) fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    svd(a, false).1
}

/// Thin SVD `a = U diag(s) V^H`, with singular triples sorted by descending
/// singular value. Returns `(U, s, V)`.
pub(crate) fn sorted_svd(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (rows, cols) = a.shape();
    if rows.min(cols) == 0 {
        return (CMatrix::zeros(rows, 0), Vec::new(), CMatrix::zeros(cols, 0));
    }
    svd(a, false)
}

/// Minimum-norm least-squares solution of `a x = b`, ignoring singular values
/// `<= tol`.
pub(crate) fn lstsq(a: &CMatrix, b: &CVector, tol: f64) -> CVector {
    let (u, s, v) = sorted_svd(a);
    let mut x = CVector::zeros(a.ncols());
    for (j, &sj) in s.iter().enumerate() {
        if sj <= tol {
            break;
        }
        let coef = u.column(j).dotc(b) / sj;
        x += v.column(j) * coef;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rank_defect_counts_values_near_the_cutoff() {
        // 1e-6 is safely above 1e3 * tol, 5e-8 is not
        assert_eq!(rank_defect(&[1.0, 1e-6], 2, 1e-10), 0.0);
        assert_eq!(rank_defect(&[1.0, 5e-8], 2, 1e-10), 5e-8);
        let both = (5e-8f64.powi(2) + 1e-11f64.powi(2)).sqrt();
        assert_eq!(rank_defect(&[1.0, 5e-8, 1e-11], 2, 1e-10), both);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        // x + y = 0 in C^3
        let a = CMatrix::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let n = null_space(&a, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).norm() < 1e-12);
        assert!((n.adjoint() * &n - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    #[allow(clippy::approx_constant)] // entries copied verbatim from the failing case
    fn sparse_structured_svd_reconstructs() {
        // nalgebra 0.35's complex SVD returns a wrong factorization for this matrix
        let entries = [
            (4, 0, 0.7071067811865476, -0.7071067811865476),
            (6, 0, 1.5358339437250385e-32, 1.1478110869380887e-33),
            (7, 0, -4.816556478343442e-47, 1.7658122932092103e-47),
            (8, 0, -5.597960442256572e-48, 2.5158945638887814e-48),
            (10, 0, -6.04240179923754e-48, 7.263600348583262e-48),
            (11, 0, 1.8456556727844323e-48, 2.7117402538026968e-48),
            (12, 0, 5.2047892338804415e-48, 4.7449021697642906e-48),
            (13, 0, -4.260185533737843e-49, 7.526216750342824e-49),
            (6, 1, 2.74622207338952e-17, -8.889417104778203e-17),
            (7, 1, 0.07911343812752746, -0.15469241465865385),
            (8, 1, -0.3607673693210507, -0.9163286670119438),
            (10, 1, -6.244663884823428e-32, -5.426044274835518e-32),
            (11, 1, 8.142680041352409e-33, 2.0584560826854328e-33),
            (12, 1, 1.979056601410924e-33, 5.7297445375781e-33),
            (13, 1, -6.386219653720385e-34, -9.193129326602453e-33),
            (6, 2, 3.712128547070335e-18, -1.9934795128021054e-16),
            (7, 2, 0.06142951168339494, -0.982872186934322),
            (8, 2, 0.12285902336679023, 0.12285902336679026),
            (10, 2, -2.3338033881203184e-31, -1.1500963974647885e-31),
            (11, 2, 3.0324077352466775e-32, 4.5156179021919856e-33),
            (12, 2, -4.7838154370728133e-32, 1.0328929166555032e-32),
            (13, 2, -3.4478790630659884e-32, -1.173449926541785e-32),
            (6, 3, 0.30134640509651633, -0.43239810581590643),
            (7, 3, -2.508325683584596e-16, 3.0357074489575966e-16),
            (8, 3, -1.802923767947652e-18, 7.179050275099145e-17),
            (10, 3, -3.095460435568233e-16, -6.577642078250205e-16),
            (11, 3, 4.0083384604232e-17, 7.593693135688286e-17),
            (12, 3, -1.3773305765840156e-16, -4.857918395478932e-17),
            (13, 3, -3.2612947414560615e-17, -5.919342463581702e-17),
            (10, 4, -0.30949613149343097, 0.026400844999154315),
            (11, 4, -0.6822680949535915, 0.11796459826698089),
            (12, 4, -0.26292485255811254, 0.39544424436156217),
            (13, 4, 0.06333503999275782, -0.44112672142567194),
            (10, 5, -0.1258122765949051, -0.04610873687468135),
            (11, 5, 0.41310731906385467, -0.03970919857141827),
            (12, 5, -0.16787888206560903, -0.3279635093868076),
            (13, 5, -0.22336222242322123, -0.790048551032004),
            (10, 6, 0.7332644913746978, 0.14591564311100902),
            (11, 6, -0.4328951995071282, 0.1371680069780839),
            (12, 6, -0.14950605806391984, -0.42765465404549896),
            (13, 6, -0.13012612903093812, -0.11245052649359527),
            (10, 7, 0.5675146617841776, 0.06722584964325146),
            (11, 7, 0.26644797547651666, -0.26674385300997466),
            (12, 7, -0.000512774498011648, 0.6584148855497008),
            (13, 7, 0.16951805274498655, -0.2627055240911939),
        ];
        let mut a = CMatrix::zeros(15, 8);
        for (i, j, re, im) in entries {
            a[(i, j)] = Complex64::new(re, im);
        }
        let (u, s, v) = sorted_svd(&a);
        let sd = CMatrix::from_diagonal(&CVector::from_iterator(s.len(), s.iter().map(|&x| c(x))));
        assert!((&a - &u * sd * v.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_injective_map_is_trivial() {
        let a = CMatrix::identity(3, 2);
        assert_eq!(null_space(&a, 1e-12).ncols(), 0);
    }

    #[test]
    fn lstsq_matches_exact_solution() {
        let a = CMatrix::from_row_slice(3, 2, &[c(1.0), c(0.0), c(0.0), c(2.0), c(0.0), c(0.0)]);
        let b = CVector::from_vec(vec![c(3.0), c(4.0), c(1.0)]);
        let x = lstsq(&a, &b, 1e-12);
        assert!((x[0] - c(3.0)).norm() < 1e-12 && (x[1] - c(2.0)).norm() < 1e-12);
    }

    proptest! {
        // sparse entries on small integers, the shape monomial bases produce
        #[test]
        fn svd_reconstructs_sparse_matrices(
            rows in 1usize..24,
            cols in 1usize..24,
            entries in proptest::collection::vec((-3i8..=3, -2i8..=2, 0u8..4), 24 * 24),
        ) {
            let a = CMatrix::from_fn(rows, cols, |i, j| {
                let (re, im, keep) = entries[i * 24 + j];
                if keep == 0 { Complex64::new(re as f64, im as f64) } else { c(0.0) }
            });
            let (u, s, v) = sorted_svd(&a);
            let k = s.len();
            prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
            let sigma = CMatrix::from_diagonal(&CVector::from_iterator(k, s.iter().map(|&x| c(x))));
            let scale = a.norm().max(1.0);
            prop_assert!((&u * sigma * v.adjoint() - &a).norm() <= 1e-12 * scale);
            prop_assert!((u.adjoint() * &u - CMatrix::identity(k, k)).norm() <= 1e-12);
            prop_assert!((v.adjoint() * &v - CMatrix::identity(k, k)).norm() <= 1e-12);
        }
    }
}
