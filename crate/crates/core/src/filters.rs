//! Filter matrices in translation and coset form, unitarity checks,
//! unitary completion, and the dyadic filter identities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Dilation, FreqGrid};
use crate::linalg::{dot_conj, norm, CMatrix};
use crate::par;
use crate::trigpoly::TrigPoly2;

/// Near-dependence threshold for Gram-Schmidt candidates.
pub const SKIP_THRESHOLD: f64 = 1e-8;

/// Maximum partial-isometry deviation accepted by [`complete_pointwise`].
pub const POINTWISE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixForm {
    Translation,
    Coset,
}

/// A matrix of trigonometric polynomials in either form.
#[derive(Clone, Debug)]
pub struct FilterMatrix {
    pub form: MatrixForm,
    pub dilation: Dilation,
    pub entries: Vec<Vec<TrigPoly2>>,
}

impl FilterMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.dilation.det()
    }

    pub fn eval(&self, xi: [f64; 2]) -> CMatrix {
        CMatrix::from_fn(self.rows(), self.cols(), |r, c| self.entries[r][c].eval(xi))
    }

    /// Samples at every node of `grid` in row-major node order.
    pub fn sample(&self, grid: &FreqGrid) -> Vec<CMatrix> {
        par::map_range(grid.n * grid.n, |idx| {
            self.eval(grid.node(idx / grid.n, idx % grid.n))
        })
    }
}

fn check_filter_count(filters: &[TrigPoly2], t: &Dilation) -> Result<()> {
    if filters.is_empty() {
        return Err(Error::NoFilters);
    }
    if filters.len() > t.det() {
        return Err(Error::TooManyFilters {
            filters: filters.len(),
            cosets: t.det(),
        });
    }
    Ok(())
}

/// Entry `(l, i)` is `m_{f_l}(ξ + 2πT⁻¹d_i)`.
pub fn translation_matrix(filters: &[TrigPoly2], t: Dilation) -> Result<FilterMatrix> {
    check_filter_count(filters, &t)?;
    let digits = t.digits();
    let entries = filters
        .iter()
        .map(|f| {
            digits
                .digits
                .iter()
                .map(|&d| f.translate(t.dual_shift(d)))
                .collect()
        })
        .collect();
    Ok(FilterMatrix {
        form: MatrixForm::Translation,
        dilation: t,
        entries,
    })
}

/// Entry `(l, p)` is `μ_{f_l,p}(ξ) = (1/√t) Σ_k c_{f_l}(d_p + Tk) e^{-i⟨ξ,Tk⟩}`.
pub fn coset_matrix(filters: &[TrigPoly2], t: Dilation) -> Result<FilterMatrix> {
    check_filter_count(filters, &t)?;
    let digits = t.digits();
    let det = t.det();
    let sqrt_t = (det as f64).sqrt();
    let entries = filters
        .iter()
        .map(|f| {
            let mut parts: Vec<Vec<((i64, i64), Complex64)>> = vec![Vec::new(); det];
            for ((j, k), c) in f.terms() {
                let freq = (-j, -k);
                let p = t.coset_index(freq);
                let d = digits.digits[p];
                let tk = (freq.0 - d.0, freq.1 - d.1);
                parts[p].push(((-tk.0, -tk.1), c * sqrt_t));
            }
            parts.into_iter().map(TrigPoly2::from_terms).collect()
        })
        .collect();
    Ok(FilterMatrix {
        form: MatrixForm::Coset,
        dilation: t,
        entries,
    })
}

/// The unitary `D(ξ)` with `U = U′D`:
/// `D_{p,i} = (1/√t) e^{-i⟨ξ,d_p⟩} e^{-i⟨2πT⁻¹d_i, d_p⟩}`.
pub fn phase_matrix(t: Dilation, xi: [f64; 2]) -> CMatrix {
    let digits = t.digits().digits;
    let scale = 1.0 / (t.det() as f64).sqrt();
    CMatrix::from_fn(digits.len(), digits.len(), |p, i| {
        let dp = digits[p];
        let s = t.dual_shift(digits[i]);
        let angle = xi[0] * dp.0 as f64
            + xi[1] * dp.1 as f64
            + s[0] * dp.0 as f64
            + s[1] * dp.1 as f64;
        Complex64::from_polar(scale, -angle)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitarityVerdict {
    Unitary,
    PartialIsometry,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitarityReport {
    /// max over nodes of `‖MM* − I‖∞`
    pub row_deviation: f64,
    /// max over nodes of `‖M*M − I‖∞`, square matrices only
    pub column_deviation: Option<f64>,
    pub verdict: UnitarityVerdict,
}

/// Classifies a family of sampled matrices.
pub fn check_unitarity(samples: &[CMatrix], tol: f64) -> UnitarityReport {
    let square = samples.iter().all(|m| m.rows() == m.cols());
    let devs = par::map_range(samples.len(), |i| {
        let m = &samples[i];
        let col = if square {
            m.column_orthonormality_deviation()
        } else {
            0.0
        };
        (m.row_orthonormality_deviation(), col)
    });
    let row_deviation = devs.iter().map(|d| d.0).fold(0.0, f64::max);
    let column_deviation = square.then(|| devs.iter().map(|d| d.1).fold(0.0, f64::max));
    let verdict = if row_deviation > tol {
        UnitarityVerdict::Neither
    } else if column_deviation.is_some_and(|c| c <= tol) {
        UnitarityVerdict::Unitary
    } else {
        UnitarityVerdict::PartialIsometry
    };
    UnitarityReport {
        row_deviation,
        column_deviation,
        verdict,
    }
}

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for b in basis {
        let c = dot_conj(v, b);
        for (x, y) in v.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
}

/// Extends orthonormal rows to a square unitary by Gram-Schmidt over the
/// standard basis vectors in index order.
pub fn complete_constant(rows: &CMatrix) -> Result<CMatrix> {
    let deviation = rows.row_orthonormality_deviation();
    if deviation > 1e-10 || rows.rows() > rows.cols() {
        return Err(Error::NotOrthonormal { deviation });
    }
    let t = rows.cols();
    let mut basis = rows.to_rows();
    for e in 0..t {
        if basis.len() == t {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); t];
        v[e] = Complex64::new(1.0, 0.0);
        orthogonalize(&mut v, &basis);
        orthogonalize(&mut v, &basis);
        let len = norm(&v);
        if len < SKIP_THRESHOLD {
            continue;
        }
        basis.push(v.into_iter().map(|z| z / len).collect());
    }
    Ok(CMatrix::from_rows(&basis))
}

/// Appends the row orthogonal to a `(t−1)×t` partial isometry: the conjugated
/// cofactor vector, normalized, with its largest-modulus entry made real
/// positive (ties to the lowest index).
pub fn complete_pointwise(m: &CMatrix) -> Result<CMatrix> {
    complete_pointwise_at(m, "<unlabelled>")
}

pub fn complete_pointwise_at(m: &CMatrix, node: &str) -> Result<CMatrix> {
    let t = m.cols();
    assert_eq!(m.rows() + 1, t, "need one row fewer than columns");
    let deviation = m.row_orthonormality_deviation();
    if deviation > POINTWISE_TOLERANCE {
        return Err(Error::NotPartialIsometry {
            node: node.to_string(),
            deviation,
        });
    }
    let padded = m.vstack(&CMatrix::zeros(1, t));
    let last = t - 1;
    let mut w: Vec<Complex64> = (0..t)
        .map(|j| {
            let sign = if (last + j).is_multiple_of(2) { 1.0 } else { -1.0 };
            (padded.minor(last, j).determinant() * sign).conj()
        })
        .collect();
    let len = norm(&w);
    if len < SKIP_THRESHOLD {
        return Err(Error::RankDeficient {
            node: node.to_string(),
        });
    }
    let mut pivot = 0;
    let mut best = 0.0;
    for (j, z) in w.iter().enumerate() {
        // strict comparison with slack keeps the lowest index on ties
        if z.norm() > best + 1e-12 {
            best = z.norm();
            pivot = j;
        }
    }
    let phase = w[pivot].conj() / w[pivot].norm();
    for z in &mut w {
        *z = *z * phase / len;
    }
    Ok(padded_with_row(m, &w))
}

fn padded_with_row(m: &CMatrix, row: &[Complex64]) -> CMatrix {
    m.vstack(&CMatrix::from_rows(&[row.to_vec()]))
}

/// Dyadic detail filters
/// `e^{-iξ₁} conj(m^A(ξ + (π,0)))` and `e^{-iξ₂} conj(m^B(ξ + (0,π)))`.
pub fn detail_filters_dyadic(phi_a: &TrigPoly2, phi_b: &TrigPoly2) -> (TrigPoly2, TrigPoly2) {
    let psi_a = &TrigPoly2::monomial(-1, 0, 1.0) * &phi_a.translate([PI, 0.0]).conj();
    let psi_b = &TrigPoly2::monomial(0, -1, 1.0) * &phi_b.translate([0.0, PI]).conj();
    (psi_a, psi_b)
}

/// `m^A(ξ₁, βξ₂) m^B(ξ) − m^A(ξ) m^B(αξ₁, ξ₂)`.
pub fn intertwine_residual(phi_a: &TrigPoly2, phi_b: &TrigPoly2, alpha: u32, beta: u32) -> TrigPoly2 {
    let lhs = &phi_a.substitute_scale(1, beta) * phi_b;
    let rhs = phi_a * &phi_b.substitute_scale(alpha, 1);
    &lhs - &rhs
}

/// Separable pair from univariate marginals.
pub fn tensor_filters(f1: &TrigPoly2, f2: &TrigPoly2) -> Result<(TrigPoly2, TrigPoly2)> {
    if f1.depends_on(1) || f2.depends_on(0) {
        return Err(Error::NotUnivariate);
    }
    Ok((f1.clone(), f2.clone()))
}

/// Two-channel conjugate-mirror filter from lattice angles:
/// `|m(ξ)|² + |m(ξ+π)|² = 1` for any angles. With the angles summing to
/// `π/4` the filter is low-pass (`m(0) = 1`). `axis` selects ξ₁ (0) or ξ₂ (1).
pub fn conjugate_mirror_filter(angles: &[f64], axis: usize) -> TrigPoly2 {
    let taps = conjugate_mirror_taps(angles);
    let scaled: Vec<f64> = taps.iter().map(|h| h / 2f64.sqrt()).collect();
    if axis == 0 {
        TrigPoly2::from_taps_x(&scaled)
    } else {
        TrigPoly2::from_taps_y(&scaled)
    }
}

/// Unit-norm taps orthogonal to their even shifts.
pub fn conjugate_mirror_taps(angles: &[f64]) -> Vec<f64> {
    let Some((&first, rest)) = angles.split_first() else {
        return vec![1.0];
    };
    let (s, c) = first.sin_cos();
    let mut even = vec![c];
    let mut odd = vec![s];
    for &theta in rest {
        let (s, c) = theta.sin_cos();
        let len = even.len() + 1;
        let mut shifted = vec![0.0; len];
        shifted[1..].copy_from_slice(&odd);
        even.push(0.0);
        let new_even: Vec<f64> = (0..len).map(|n| c * even[n] - s * shifted[n]).collect();
        let new_odd: Vec<f64> = (0..len).map(|n| s * even[n] + c * shifted[n]).collect();
        even = new_even;
        odd = new_odd;
    }
    even.iter()
        .zip(&odd)
        .flat_map(|(&e, &o)| [e, o])
        .collect()
}

/// An argument `m(s₁ξ₁ + πk₁, s₂ξ₂ + πk₂)` of a filter evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tap {
    pub scale: [u8; 2],
    pub shift_pi: [u8; 2],
}

impl Tap {
    pub const fn new(scale: [u8; 2], shift_pi: [u8; 2]) -> Self {
        Self { scale, shift_pi }
    }

    pub fn point(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.scale[0] as f64 * xi[0] + PI * self.shift_pi[0] as f64,
            self.scale[1] as f64 * xi[1] + PI * self.shift_pi[1] as f64,
        ]
    }
}

/// The four-term commuting-lattice functional
/// `f = A^{π,0}_{1,2}A^{0,0}_{1,1}·conj(B^{0,0}_{1,1}B^{0,π}_{2,1})
///    − A^{0,0}_{1,2}A^{π,0}_{1,1}·conj(B^{π,0}_{1,1}B^{0,π}_{2,1})
///    − A^{π,0}_{1,2}A^{0,π}_{1,1}·conj(B^{0,π}_{1,1}B^{0,0}_{2,1})
///    + A^{0,0}_{1,2}A^{π,π}_{1,1}·conj(B^{π,π}_{1,1}B^{0,0}_{2,1})`
/// with `A^{a,b}_{s₁,s₂} = m^A(s₁ξ₁ + a, s₂ξ₂ + b)`.
pub fn commuting_lattice_functional(
    ma: impl Fn(Tap) -> Complex64,
    mb: impl Fn(Tap) -> Complex64,
) -> Complex64 {
    let a = |s: [u8; 2], k: [u8; 2]| ma(Tap::new(s, k));
    let b = |s: [u8; 2], k: [u8; 2]| mb(Tap::new(s, k));
    let t1 = a([1, 2], [1, 0]) * a([1, 1], [0, 0]) * (b([1, 1], [0, 0]) * b([2, 1], [0, 1])).conj();
    let t2 = a([1, 2], [0, 0]) * a([1, 1], [1, 0]) * (b([1, 1], [1, 0]) * b([2, 1], [0, 1])).conj();
    let t3 = a([1, 2], [1, 0]) * a([1, 1], [0, 1]) * (b([1, 1], [0, 1]) * b([2, 1], [0, 0])).conj();
    let t4 = a([1, 2], [0, 0]) * a([1, 1], [1, 1]) * (b([1, 1], [1, 1]) * b([2, 1], [0, 0])).conj();
    t1 - t2 - t3 + t4
}

/// [`commuting_lattice_functional`] for polynomial filters at `ξ`.
pub fn commuting_lattice_residual(phi_a: &TrigPoly2, phi_b: &TrigPoly2, xi: [f64; 2]) -> Complex64 {
    commuting_lattice_functional(
        |tap| phi_a.eval(tap.point(xi)),
        |tap| phi_b.eval(tap.point(xi)),
    )
}

/// The 3×4 translation-form matrix of `{φ, ψ^A, ψ^B}` for `T = AB` in the
/// bidyadic case; columns follow the digit order of `diag(2,2)`.
pub fn dyadic_detail_matrix(
    eta: [f64; 2],
    ma: impl Fn(Tap) -> Complex64,
    mb: impl Fn(Tap) -> Complex64,
) -> CMatrix {
    let mut m = CMatrix::zeros(3, 4);
    for (col, d) in [[0u8, 0], [0, 1], [1, 0], [1, 1]].into_iter().enumerate() {
        let b_here = mb(Tap::new([1, 1], d));
        let a_here = ma(Tap::new([1, 1], d));
        let ph1 = Complex64::from_polar(1.0, -(eta[0] + PI * d[0] as f64));
        let ph2 = Complex64::from_polar(1.0, -(eta[1] + PI * d[1] as f64));
        m[(0, col)] = ma(Tap::new([1, 2], [d[0], 0])) * b_here;
        m[(1, col)] = ph1 * ma(Tap::new([1, 2], [d[0] + 1, 0])).conj() * b_here;
        m[(2, col)] = ph2 * a_here * mb(Tap::new([2, 1], [0, d[1] + 1])).conj();
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::DilationPair;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn triadic_phi() -> TrigPoly2 {
        TrigPoly2::from_taps_x(&[1.0 / 3.0; 3])
    }

    fn random_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)])
            .collect()
    }

    #[test]
    fn triadic_translation_row_is_unit() {
        let t = DilationPair::triadic().a();
        let u = translation_matrix(&[triadic_phi()], t).unwrap();
        assert_eq!((u.rows(), u.cols()), (1, 3));
        for xi in random_points(20, 1) {
            let row = u.eval(xi);
            let sq: f64 = row.row(0).iter().map(|z| z.norm_sqr()).sum();
            assert!((sq - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dyadic_haar_row_at_origin() {
        let u = translation_matrix(&[TrigPoly2::from_taps_x(&[0.5, 0.5])], DilationPair::dyadic().a())
            .unwrap();
        let row = u.eval([0.0, 0.0]);
        assert!((row[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(row[(0, 1)].norm() < 1e-15);
        // column 0 is the untranslated filter
        assert_eq!(u.entries[0][0], TrigPoly2::from_taps_x(&[0.5, 0.5]));
    }

    #[test]
    fn too_many_filters() {
        let f = TrigPoly2::constant(1.0);
        let err = translation_matrix(&[f.clone(), f.clone(), f], DilationPair::dyadic().a()).unwrap_err();
        assert!(err.to_string().starts_with("more filters than cosets"));
        assert!(coset_matrix(&[], DilationPair::dyadic().a()).is_err());
    }

    #[test]
    fn triadic_coset_row_is_constant() {
        let u = coset_matrix(&[triadic_phi()], DilationPair::triadic().a()).unwrap();
        for p in 0..3 {
            assert!(u.entries[0][p].approx_eq(&TrigPoly2::constant(1.0 / 3f64.sqrt()), 1e-15));
        }
    }

    #[test]
    fn single_coefficient_coset_row() {
        let t = DilationPair::new(2, 3).unwrap().ab();
        let f = TrigPoly2::from_filter_coeffs(6, [((0, 0), c(6.0, 0.0))]);
        let u = coset_matrix(&[f], t).unwrap();
        let row = u.eval([0.4, -1.1]);
        assert!((row[(0, 0)] - c(6f64.sqrt(), 0.0)).norm() < 1e-14);
        for p in 1..6 {
            assert!(row[(0, p)].norm() < 1e-15);
        }
    }

    #[test]
    fn factorization_holds_for_triadic_bank() {
        let t = DilationPair::triadic().ab();
        let phi = &triadic_phi() * &TrigPoly2::from_taps_y(&[1.0 / 3.0; 3]);
        let w = PI * 2.0 / 3.0;
        let mut bank = vec![phi];
        for shift in [[w, 0.0], [0.0, w], [w, w], [2.0 * w, w]] {
            bank.push(bank[0].translate(shift));
        }
        let u = translation_matrix(&bank, t).unwrap();
        let uc = coset_matrix(&bank, t).unwrap();
        for xi in random_points(20, 2) {
            let lhs = u.eval(xi);
            let rhs = &uc.eval(xi) * &phase_matrix(t, xi);
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn phase_matrix_is_unitary() {
        let t = DilationPair::new(2, 3).unwrap().power(1, 2).unwrap();
        for xi in random_points(5, 3) {
            let d = phase_matrix(t, xi);
            assert!(d.row_orthonormality_deviation() < 1e-12);
            assert!(d.column_orthonormality_deviation() < 1e-12);
        }
    }

    #[test]
    fn scaled_row_is_neither() {
        let mut m = CMatrix::identity(3);
        m.scale_row(1, c(2.0, 0.0));
        let report = check_unitarity(&[m], 1e-12);
        assert_eq!(report.verdict, UnitarityVerdict::Neither);
        assert!((report.row_deviation - 3.0).abs() < 1e-12);
    }

    #[test]
    fn complete_identity_rows() {
        let rows = CMatrix::from_fn(2, 4, |r, c| if r == c { 1.0.into() } else { 0.0.into() });
        let u = complete_constant(&rows).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn complete_constant_row() {
        let s = 1.0 / 3f64.sqrt();
        let rows = CMatrix::from_real_rows(&[vec![s, s, s]]);
        let u = complete_constant(&rows).unwrap();
        assert_eq!(u.rows(), 3);
        assert!(u.row(0).iter().zip(rows.row(0)).all(|(a, b)| (a - b).norm() < 1e-15));
        assert!(check_unitarity(&[u], 1e-12).verdict == UnitarityVerdict::Unitary);
    }

    #[test]
    fn complete_constant_rejects_non_orthonormal() {
        let rows = CMatrix::from_real_rows(&[vec![1.0, 1.0, 0.0]]);
        assert!(matches!(complete_constant(&rows), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn pointwise_identity_rows() {
        let rows = CMatrix::from_fn(3, 4, |r, c| if r == c { 1.0.into() } else { 0.0.into() });
        let u = complete_pointwise(&rows).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn pointwise_rejects_degenerate() {
        let rows = CMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ]);
        let err = complete_pointwise_at(&rows, "(0.5, 0.5)").unwrap_err();
        assert!(err.to_string().contains("(0.5, 0.5)"));
    }

    #[test]
    fn dyadic_haar_detail() {
        let phi = TrigPoly2::from_taps_x(&[0.5, 0.5]);
        let (psi, _) = detail_filters_dyadic(&phi, &TrigPoly2::constant(1.0));
        let expected = TrigPoly2::from_terms([((-1, 0), c(0.5, 0.0)), ((0, 0), c(-0.5, 0.0))]);
        assert!(psi.approx_eq(&expected, 1e-15));
        let u = translation_matrix(&[phi, psi], DilationPair::dyadic().a()).unwrap();
        let grid = FreqGrid::new(PI, 16);
        let report = check_unitarity(&u.sample(&grid), 1e-12);
        assert_eq!(report.verdict, UnitarityVerdict::Unitary);
    }

    #[test]
    fn trivial_refinement_detail() {
        let one = TrigPoly2::constant(1.0);
        let (psi_a, psi_b) = detail_filters_dyadic(&one, &one);
        assert_eq!(psi_a, TrigPoly2::monomial(-1, 0, 1.0));
        assert_eq!(psi_b, TrigPoly2::monomial(0, -1, 1.0));
    }

    #[test]
    fn intertwine_examples() {
        let a = TrigPoly2::from_taps_x(&[0.5, 0.5]);
        let b = TrigPoly2::from_taps_y(&[0.25, 0.5, 0.25]);
        assert!(intertwine_residual(&a, &b, 2, 2).is_empty());

        let mixed = TrigPoly2::from_terms([((0, 0), c(1.0, 0.0)), ((-1, -1), c(1.0, 0.0))]);
        let r = intertwine_residual(&mixed, &TrigPoly2::constant(1.0), 2, 2);
        assert!(r.eval([PI / 2.0, PI / 2.0]).norm() > 0.1);

        let (pa, pb) = tensor_filters(&triadic_phi(), &TrigPoly2::from_taps_y(&[1.0 / 3.0; 3])).unwrap();
        assert!(intertwine_residual(&pa, &pb, 3, 3).is_empty());
        let one = TrigPoly2::constant(1.0);
        let (pa, pb) = tensor_filters(&one, &one).unwrap();
        assert!(intertwine_residual(&pa, &pb, 2, 2).is_empty());
        assert!(tensor_filters(&mixed, &one).is_err());
    }

    #[test]
    fn lattice_taps_are_orthonormal_to_even_shifts() {
        let taps = conjugate_mirror_taps(&[0.3, -1.2, 0.7]);
        assert_eq!(taps.len(), 6);
        for shift in (0..taps.len()).step_by(2) {
            let r: f64 = (0..taps.len() - shift).map(|n| taps[n] * taps[n + shift]).sum();
            let expected = if shift == 0 { 1.0 } else { 0.0 };
            assert!((r - expected).abs() < 1e-14);
        }
        let low = conjugate_mirror_filter(&[PI / 8.0, PI / 8.0], 0);
        assert!((low.eval([0.0, 0.0]) - c(1.0, 0.0)).norm() < 1e-14);
    }

    fn angles() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-PI..PI, 1..5)
    }

    proptest! {
        #[test]
        fn separable_pairs_satisfy_functional(ax in angles(), by in angles(), x in -PI..PI, y in -PI..PI) {
            let a = conjugate_mirror_filter(&ax, 0);
            let b = conjugate_mirror_filter(&by, 1);
            prop_assert!(commuting_lattice_residual(&a, &b, [x, y]).norm() < 1e-12);
            prop_assert!(intertwine_residual(&a, &b, 2, 2).coefficient_norm() < 1e-12);
        }

        #[test]
        fn functional_sign_symmetries(seed in any::<u64>(), x in -PI..PI, y in -PI..PI) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut random_poly = || TrigPoly2::from_terms((0..6).map(|_| {
                ((rng.gen_range(-2..=2), rng.gen_range(-2..=2)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            }));
            let a = random_poly();
            let b = random_poly();
            let f = |p: [f64; 2]| commuting_lattice_residual(&a, &b, p);
            let base = f([x, y]);
            prop_assert!((f([x + PI, y]) + base).norm() < 1e-10);
            prop_assert!((f([x, y + PI]) + base).norm() < 1e-10);
            prop_assert!((f([x + PI, y + PI]) - base).norm() < 1e-10);
        }

        #[test]
        fn detail_filter_completes_unitary(ax in angles(), x in -PI..PI, y in -PI..PI) {
            let a = conjugate_mirror_filter(&ax, 0);
            let (psi, _) = detail_filters_dyadic(&a, &TrigPoly2::constant(1.0));
            let u = translation_matrix(&[a, psi], DilationPair::dyadic().a()).unwrap();
            let m = u.eval([x, y]);
            prop_assert!(m.row_orthonormality_deviation() < 1e-12);
        }

        #[test]
        fn complete_random_orthonormal_rows(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw = CMatrix::from_fn(6, 6, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let mut rows: Vec<Vec<Complex64>> = Vec::new();
            for r in 0..3 {
                let mut v = raw.row(r).to_vec();
                orthogonalize(&mut v, &rows);
                orthogonalize(&mut v, &rows);
                let n = norm(&v);
                rows.push(v.into_iter().map(|z| z / n).collect());
            }
            let input = CMatrix::from_rows(&rows);
            let u = complete_constant(&input).unwrap();
            prop_assert_eq!(check_unitarity(std::slice::from_ref(&u), 1e-12).verdict, UnitarityVerdict::Unitary);
            for r in 0..3 {
                for (a, b) in u.row(r).iter().zip(input.row(r)) {
                    prop_assert!((a - b).norm() < 1e-15);
                }
            }
        }

        #[test]
        fn pointwise_completion_of_random_unitary(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw = CMatrix::from_fn(3, 4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let mut rows: Vec<Vec<Complex64>> = Vec::new();
            for r in 0..3 {
                let mut v = raw.row(r).to_vec();
                orthogonalize(&mut v, &rows);
                orthogonalize(&mut v, &rows);
                let n = norm(&v);
                rows.push(v.into_iter().map(|z| z / n).collect());
            }
            let u = complete_pointwise(&CMatrix::from_rows(&rows)).unwrap();
            prop_assert!((u.determinant().norm() - 1.0).abs() < 1e-12);
            prop_assert_eq!(check_unitarity(std::slice::from_ref(&u), 1e-10).verdict, UnitarityVerdict::Unitary);
            let last = u.row(3);
            let pivot = last.iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(last.iter().any(|z| (z.re - pivot).abs() < 1e-14 && z.im.abs() < 1e-14));
        }
    }
}
