//! Biscaled Haar families with constant coset matrices, including the
//! triadic Latin-square wavelets.
//!
//! A family for `(α, β)` is a list of `αβ` coefficient grids of shape `α×β`.
//! Grid entry `(i, j)` multiplies the tile indicator `χ_{ij}` of
//! `[0,1/α]×[0,1/β] + (i/α, j/β)`. Flattening a grid in digit order
//! (`i·β + j`) gives one row of an orthogonal `αβ×αβ` matrix, so each grid has
//! unit Euclidean norm and describes the unit-norm function `√(αβ) Σ c_{ij} χ_{ij}`.

use ndarray::Array2;
use serde::Serialize;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filters::complete_constant;
use crate::lattice::DilationPair;
use crate::linalg::CMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct HaarFamily {
    pub alpha: usize,
    pub beta: usize,
    pub scaling: Array2<f64>,
    pub detail_a: Vec<Array2<f64>>,
    pub detail_b: Vec<Array2<f64>>,
    pub wavelets: Vec<Array2<f64>>,
    exact: Option<Vec<ExactRow>>,
}

/// `(√root / denom) · ints`
#[derive(Clone, Copy, Debug, PartialEq)]
struct ExactRow {
    root: u32,
    denom: u32,
    ints: [i32; 9],
}

impl ExactRow {
    const fn new(root: u32, denom: u32, ints: [i32; 9]) -> Self {
        Self { root, denom, ints }
    }

    fn values(&self) -> Vec<f64> {
        let s = (self.root as f64).sqrt() / self.denom as f64;
        self.ints.iter().map(|&k| s * k as f64).collect()
    }
}

// φ, ψ^A_1, ψ^A_2, ψ^B_1, ψ^B_2, ψ_1..ψ_4
const TRIADIC_ROWS: [ExactRow; 9] = [
    ExactRow::new(1, 3, [1, 1, 1, 1, 1, 1, 1, 1, 1]),
    ExactRow::new(2, 6, [1, 1, 1, 1, 1, 1, -2, -2, -2]),
    ExactRow::new(6, 6, [1, 1, 1, -1, -1, -1, 0, 0, 0]),
    ExactRow::new(2, 6, [1, 1, -2, 1, 1, -2, 1, 1, -2]),
    ExactRow::new(6, 6, [1, -1, 0, 1, -1, 0, 1, -1, 0]),
    ExactRow::new(10, 30, [5, -1, -4, -4, -1, 5, -1, 2, -1]),
    ExactRow::new(15, 30, [0, -1, 1, -4, 4, 0, 4, -3, -1]),
    ExactRow::new(15, 30, [2, -5, 3, 0, 2, -2, -2, 3, -1]),
    ExactRow::new(10, 10, [1, 0, -1, 0, 1, -1, -1, -1, 2]),
];

/// The 3×3 marginal completion `[[1/√3]*3, [1,1,−2]/√6, [1,−1,0]/√2]`.
pub fn triadic_marginal() -> CMatrix {
    let s3 = 1.0 / 3f64.sqrt();
    let s6 = 1.0 / 6f64.sqrt();
    let s2 = 1.0 / 2f64.sqrt();
    CMatrix::from_real_rows(&[
        vec![s3, s3, s3],
        vec![s6, s6, -2.0 * s6],
        vec![s2, -s2, 0.0],
    ])
}

/// The triadic family with the published wavelet coefficients.
pub fn latin_square_family() -> HaarFamily {
    let rows: Vec<Vec<f64>> = TRIADIC_ROWS.iter().map(ExactRow::values).collect();
    let mut fam = HaarFamily::from_matrix_rows(3, 3, &rows);
    fam.exact = Some(TRIADIC_ROWS.to_vec());
    fam
}

/// Generic family: both marginals completed by Gram-Schmidt, then the
/// `(α+β−1)×αβ` partial isometry completed the same way.
pub fn haar_family(alpha: u32, beta: u32) -> Result<HaarFamily> {
    let pair = DilationPair::new(alpha, beta)?;
    let ua = complete_constant(&constant_row(pair.alpha as usize))?;
    let ub = complete_constant(&constant_row(pair.beta as usize))?;
    haar_family_from_marginals(&ua, &ub)
}

/// Family built from given marginal unitaries whose first rows are constant;
/// the wavelet rows come from Gram-Schmidt completion.
pub fn haar_family_from_marginals(ua: &CMatrix, ub: &CMatrix) -> Result<HaarFamily> {
    let alpha = ua.rows();
    let beta = ub.rows();
    DilationPair::new(alpha as u32, beta as u32)?;
    let partial = separable_rows(ua, ub);
    let full = complete_constant(&partial)?;
    Ok(HaarFamily::from_matrix_rows(alpha, beta, &full.to_real_rows()))
}

fn constant_row(t: usize) -> CMatrix {
    CMatrix::from_real_rows(&[vec![1.0 / (t as f64).sqrt(); t]])
}

/// Rows `ua₀⊗ub₀`, `ua_r⊗ub₀` (r ≥ 1), `ua₀⊗ub_s` (s ≥ 1) in digit order.
pub fn separable_rows(ua: &CMatrix, ub: &CMatrix) -> CMatrix {
    let (alpha, beta) = (ua.rows(), ub.rows());
    let tensor = |ra: usize, rb: usize| -> Vec<Complex64> {
        (0..alpha * beta)
            .map(|idx| ua[(ra, idx / beta)] * ub[(rb, idx % beta)])
            .collect()
    };
    let mut rows = vec![tensor(0, 0)];
    rows.extend((1..alpha).map(|r| tensor(r, 0)));
    rows.extend((1..beta).map(|s| tensor(0, s)));
    CMatrix::from_rows(&rows)
}

/// Residuals of a Haar family; see [`HaarFamily::check`].
#[derive(Clone, Debug, Serialize)]
pub struct FamilyCheck {
    pub alpha: usize,
    pub beta: usize,
    pub wavelet_count: usize,
    pub expected_wavelets: usize,
    /// `‖MMᵀ − I‖∞`
    pub orthogonality_deviation: f64,
    /// same for the scaling and detail rows alone
    pub partial_isometry_deviation: f64,
    /// largest entrywise dot product between two distinct wavelet grids
    pub wavelet_pairwise_max: f64,
    /// distance of the scaling grid from the constant `1/√(αβ)`
    pub scaling_deviation: f64,
}

impl FamilyCheck {
    /// Names of the checks exceeding `tol`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn failures(&self, tol: f64) -> Vec<&'static str> {
        let checks = [
            ("wavelet_count", self.wavelet_count != self.expected_wavelets),
            ("orthogonality", !(self.orthogonality_deviation <= tol)),
            ("partial_isometry", !(self.partial_isometry_deviation <= tol)),
            ("wavelet_pairwise", !(self.wavelet_pairwise_max <= tol)),
            ("scaling_constant", !(self.scaling_deviation <= tol)),
        ];
        checks.iter().filter(|c| c.1).map(|c| c.0).collect()
    }
}

impl HaarFamily {
    fn from_matrix_rows(alpha: usize, beta: usize, rows: &[Vec<f64>]) -> Self {
        assert_eq!(rows.len(), alpha * beta);
        let grid = |r: &Vec<f64>| {
            Array2::from_shape_vec((alpha, beta), r.clone()).expect("row length is alpha*beta")
        };
        let a_end = alpha;
        let b_end = alpha + beta - 1;
        Self {
            alpha,
            beta,
            scaling: grid(&rows[0]),
            detail_a: rows[1..a_end].iter().map(grid).collect(),
            detail_b: rows[a_end..b_end].iter().map(grid).collect(),
            wavelets: rows[b_end..].iter().map(grid).collect(),
            exact: None,
        }
    }

    /// Family from grids listed as in [`HaarFamily::grids`].
    pub fn from_grids(alpha: usize, beta: usize, grids: &[Array2<f64>]) -> Result<Self> {
        DilationPair::new(alpha as u32, beta as u32)?;
        if grids.len() != alpha * beta {
            return Err(Error::ShapeMismatch(format!(
                "expected {} grids for ({alpha}, {beta}), got {}",
                alpha * beta,
                grids.len()
            )));
        }
        if let Some(g) = grids.iter().find(|g| g.dim() != (alpha, beta)) {
            return Err(Error::ShapeMismatch(format!(
                "grid of shape {:?}, expected ({alpha}, {beta})",
                g.dim()
            )));
        }
        let rows: Vec<Vec<f64>> = grids.iter().map(|g| g.iter().copied().collect()).collect();
        Ok(Self::from_matrix_rows(alpha, beta, &rows))
    }

    /// Runs the structural checks.
    pub fn check(&self) -> FamilyCheck {
        let t = (self.alpha * self.beta) as f64;
        let mut pairwise = 0.0f64;
        for (i, u) in self.wavelets.iter().enumerate() {
            for v in &self.wavelets[i + 1..] {
                pairwise = pairwise.max((u * v).sum().abs());
            }
        }
        FamilyCheck {
            alpha: self.alpha,
            beta: self.beta,
            wavelet_count: self.wavelets.len(),
            expected_wavelets: (self.alpha - 1) * (self.beta - 1),
            orthogonality_deviation: self.orthogonality_deviation(),
            partial_isometry_deviation: self.partial_isometry().row_orthonormality_deviation(),
            wavelet_pairwise_max: pairwise,
            scaling_deviation: self
                .scaling
                .iter()
                .map(|v| (v - 1.0 / t.sqrt()).abs())
                .fold(0.0, f64::max),
        }
    }

    /// All grids in order: scaling, A-details, B-details, wavelets.
    pub fn grids(&self) -> impl Iterator<Item = &Array2<f64>> {
        std::iter::once(&self.scaling)
            .chain(&self.detail_a)
            .chain(&self.detail_b)
            .chain(&self.wavelets)
    }

    /// Grid names matching [`HaarFamily::grids`].
    pub fn grid_names(&self) -> Vec<String> {
        let mut names = vec!["phi".to_string()];
        names.extend((1..=self.detail_a.len()).map(|i| format!("psi_a_{i}")));
        names.extend((1..=self.detail_b.len()).map(|i| format!("psi_b_{i}")));
        names.extend((1..=self.wavelets.len()).map(|i| format!("psi_{i}")));
        names
    }

    /// The `αβ×αβ` matrix whose rows are the flattened grids.
    pub fn matrix(&self) -> Array2<f64> {
        let t = self.alpha * self.beta;
        let mut m = Array2::zeros((t, t));
        for (r, g) in self.grids().enumerate() {
            for (c, v) in g.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        m
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        let m = self.matrix();
        CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)].into())
    }

    /// The first `α+β−1` rows: scaling and single-direction details.
    pub fn partial_isometry(&self) -> CMatrix {
        let full = self.to_cmatrix();
        let k = self.alpha + self.beta - 1;
        CMatrix::from_fn(k, full.cols(), |r, c| full[(r, c)])
    }

    /// `‖MMᵀ − I‖∞` of the family matrix.
    pub fn orthogonality_deviation(&self) -> f64 {
        self.to_cmatrix().row_orthonormality_deviation()
    }

    /// LaTeX-style listing in `√`-fraction notation when exact coefficients
    /// are known, decimals otherwise.
    pub fn latex(&self) -> String {
        let names = self.latex_names();
        let mut out = String::new();
        match &self.exact {
            Some(rows) => {
                for (name, row) in names.iter().zip(rows) {
                    out.push_str(&format!("{name} &= {}({})\\\\\n", scale_tex(row), combination_tex(row.ints.iter().map(|&k| k as f64), self.beta, false)));
                }
            }
            None => {
                for (name, g) in names.iter().zip(self.grids()) {
                    out.push_str(&format!("{name} &= {}\\\\\n", combination_tex(g.iter().copied(), self.beta, true)));
                }
            }
        }
        out
    }

    fn latex_names(&self) -> Vec<String> {
        let mut names = vec!["\\phi".to_string()];
        names.extend((1..=self.detail_a.len()).map(|i| format!("\\psi^A_{i}")));
        names.extend((1..=self.detail_b.len()).map(|i| format!("\\psi^B_{i}")));
        names.extend((1..=self.wavelets.len()).map(|i| format!("\\psi_{i}")));
        names
    }
}

fn scale_tex(row: &ExactRow) -> String {
    if row.root == 1 {
        format!("\\frac{{1}}{{{}}}", row.denom)
    } else {
        format!("\\frac{{\\sqrt{{{}}}}}{{{}}}", row.root, row.denom)
    }
}

fn combination_tex(values: impl Iterator<Item = f64>, beta: usize, decimal: bool) -> String {
    let mut out = String::new();
    for (idx, v) in values.enumerate() {
        if v.abs() < 1e-14 {
            continue;
        }
        let tile = format!("\\chi_{{{}{}}}", idx / beta, idx % beta);
        let sign = if v < 0.0 { "-" } else if out.is_empty() { "" } else { "+" };
        let mag = v.abs();
        let coeff = if decimal {
            format!("{mag:.6}")
        } else if mag == 1.0 {
            String::new()
        } else {
            format!("{mag}")
        };
        out.push_str(&format!("{sign}{coeff}{tile}"));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
