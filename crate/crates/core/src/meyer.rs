//! Rank-2 Meyer-type scaling functions for the bidyadic pair `A = diag(2,1)`,
//! `B = diag(1,2)`, built in the frequency domain from values on the four
//! corner squares, together with verification sweeps and the synthesis of
//! the associated wavelet.
//!
//! Frequencies are handled as exact integers in units of `π/(3n)` where `n` is
//! the grid size: `π/3 = n`, `2π/3 = 2n`, `π = 3n`, `4π/3 = 4n`. Grid node `k`
//! sits at `8k + 4 − 4n`, so every breakpoint test is an integer comparison
//! and points that land exactly on a breakpoint are detected rather than
//! guessed.

use std::cell::Cell;
use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{commuting_lattice_functional, complete_pointwise_at, dyadic_detail_matrix, Tap};
use crate::lattice::FreqGrid;
use crate::par;
use crate::separability::minor_score;

/// Value of `φ̂` on the central square.
pub const PHI_MAX: f64 = 1.0 / (2.0 * PI);

/// `1/(4π²)`, the target of the orthonormality sum.
pub const PHI_MAX_SQ: f64 = 1.0 / (4.0 * PI * PI);

/// Default grid size, a multiple of `3·2⁸`.
pub const DEFAULT_GRID: usize = 768;

/// Values of `φ̂` on the corner squares.
///
/// The corner squares are `NE = (2π/3, 4π/3)²` and its translates by
/// `−2π` in either coordinate (`NW`, `SE`, `SW`). Piecewise-constant modes
/// split every corner into a left and a right half at its vertical midline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CornerSpec {
    /// Squared values `a` on the left half of `SW` and `d` on the left half
    /// of `NE`; `b ≥ c` solve `b + c = 1/(4π²) − a − d`, `bc = ad`, and the
    /// right halves mirror the left ones under `ξ ↦ −ξ`.
    PiecewiseConstant { a: f64, d: f64 },
    /// The same layout with all four squared values given directly.
    Explicit { a: f64, b: f64, c: f64, d: f64 },
    /// Corner values of the product of two one-dimensional profiles whose
    /// corner intervals carry the fractions `pa` (east) and `pb` (north).
    Tensor { pa: f64, pb: f64 },
    /// Corners split along the diagonal `u = v` of relative coordinates:
    /// `NE = √t/2π`, `SW = 0`, `NW = √(1−t)/2π` above the diagonal and `SE`
    /// below it.
    Triangular { t: f64 },
    /// Amplitude samples on an `res×res` partition of each corner, indexed
    /// `[u][v]` with `u` along `ξ₁`.
    Samples {
        ne: Vec<Vec<f64>>,
        nw: Vec<Vec<f64>>,
        se: Vec<Vec<f64>>,
        sw: Vec<Vec<f64>>,
    },
}

impl CornerSpec {
    /// Whether the corner data is symmetric under `ξ ↦ −ξ`, making `φ` real.
    pub fn is_even(&self) -> bool {
        matches!(
            self,
            CornerSpec::PiecewiseConstant { .. } | CornerSpec::Explicit { .. }
        )
    }
}

/// JSON form `{"mode": ..., <mode parameters>, "grid_n": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeyerConfig {
    #[serde(flatten)]
    pub spec: CornerSpec,
    #[serde(default = "default_grid")]
    pub grid_n: usize,
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

/// Squared corner values `(b, c)` with `b + c = 1/(4π²) − a − d`, `bc = ad`
/// and `b ≥ c`.
pub fn solve_corner_values(a: f64, d: f64) -> Result<(f64, f64)> {
    if !(a >= 0.0 && d >= 0.0 && a.is_finite() && d.is_finite()) {
        return Err(Error::InvalidCornerSpec(format!(
            "corner values must be nonnegative (a = {a}, d = {d})"
        )));
    }
    if a + d >= PHI_MAX_SQ / 2.0 {
        return Err(Error::InvalidCornerSpec(format!(
            "need a + d < 1/(8π²) ≈ {:.6e}, got {:.6e}",
            PHI_MAX_SQ / 2.0,
            a + d
        )));
    }
    let s = PHI_MAX_SQ - a - d;
    let disc = s * s - 4.0 * a * d;
    assert!(disc >= 0.0, "discriminant is positive whenever a + d < 1/(8π²)");
    let b = 0.5 * (s + disc.sqrt());
    let c = if b > 0.0 { a * d / b } else { 0.0 };
    Ok((b, c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Central,
    Corner,
    BorderI,
    BorderJ,
    Outside,
    Unresolved,
}

impl Region {
    pub fn code(self) -> u8 {
        match self {
            Region::Outside => 0,
            Region::Central => 1,
            Region::Corner => 2,
            Region::BorderI => 3,
            Region::BorderJ => 4,
            Region::Unresolved => 5,
        }
    }
}

/// Why an exact evaluation produced no value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Miss {
    /// The point (or a point the recursion reaches) lies on a breakpoint line.
    Boundary,
    /// A quotient filter would divide by a vanishing profile value.
    Singular,
}

const NE: usize = 0;
const NW: usize = 1;
const SE: usize = 2;
const SW: usize = 3;

#[derive(Clone, Debug)]
enum Corners {
    Halves([[f64; 2]; 4]),
    Triangular { ne: f64, off: f64 },
    Samples { res: i64, amp: [Vec<f64>; 4] },
}

/// Exact evaluator for `φ̂` and its quotient filters.
#[derive(Clone, Debug)]
pub struct MeyerFunction {
    n: i64,
    corners: Corners,
}

fn halves_from_squares(a: f64, b: f64, c: f64, d: f64) -> [[f64; 2]; 4] {
    let (a, b, c, d) = (a.sqrt(), b.sqrt(), c.sqrt(), d.sqrt());
    let mut amp = [[0.0; 2]; 4];
    amp[NE] = [d, a];
    amp[NW] = [c, b];
    amp[SE] = [b, c];
    amp[SW] = [a, d];
    amp
}

fn check_amplitude(v: f64, what: &str) -> Result<()> {
    if !(0.0..=PHI_MAX * (1.0 + 1e-12)).contains(&v) {
        return Err(Error::InvalidCornerSpec(format!(
            "{what} amplitude {v} outside [0, 1/(2π)]"
        )));
    }
    Ok(())
}

impl MeyerFunction {
    pub fn new(spec: &CornerSpec, n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(4) {
            return Err(Error::InvalidGrid(n));
        }
        let corners = match spec {
            CornerSpec::PiecewiseConstant { a, d } => {
                if !(*a > 0.0 && *d > 0.0) {
                    return Err(Error::InvalidCornerSpec(format!(
                        "piecewise-constant mode needs a, d > 0 (a = {a}, d = {d})"
                    )));
                }
                let (b, c) = solve_corner_values(*a, *d)?;
                Corners::Halves(halves_from_squares(*a, b, c, *d))
            }
            CornerSpec::Explicit { a, b, c, d } => {
                for (v, name) in [(a, "a"), (b, "b"), (c, "c"), (d, "d")] {
                    if !(*v >= 0.0 && v.is_finite()) {
                        return Err(Error::InvalidCornerSpec(format!("{name} = {v} is not a nonnegative number")));
                    }
                    check_amplitude(v.sqrt(), name)?;
                }
                Corners::Halves(halves_from_squares(*a, *b, *c, *d))
            }
            CornerSpec::Tensor { pa, pb } => {
                for p in [pa, pb] {
                    if !(*p > 0.0 && *p < 1.0) {
                        return Err(Error::InvalidCornerSpec(format!(
                            "tensor fractions must lie in (0, 1), got {p}"
                        )));
                    }
                }
                let v = |x: f64, y: f64| PHI_MAX * (x * y).sqrt();
                let mut amp = [[0.0; 2]; 4];
                amp[NE] = [v(*pa, *pb); 2];
                amp[NW] = [v(1.0 - pa, *pb); 2];
                amp[SE] = [v(*pa, 1.0 - pb); 2];
                amp[SW] = [v(1.0 - pa, 1.0 - pb); 2];
                Corners::Halves(amp)
            }
            CornerSpec::Triangular { t } => {
                if !(*t > 0.0 && *t < 1.0) {
                    return Err(Error::InvalidCornerSpec(format!("t = {t} outside (0, 1)")));
                }
                Corners::Triangular {
                    ne: PHI_MAX * t.sqrt(),
                    off: PHI_MAX * (1.0 - t).sqrt(),
                }
            }
            CornerSpec::Samples { ne, nw, se, sw } => {
                let res = ne.len();
                let mut amp: [Vec<f64>; 4] = Default::default();
                for (slot, (name, arr)) in [("ne", ne), ("nw", nw), ("se", se), ("sw", sw)].into_iter().enumerate() {
                    if res == 0 || arr.len() != res || arr.iter().any(|r| r.len() != res) {
                        return Err(Error::InvalidCornerSpec(format!(
                            "corner {name} must be a nonempty square array of the same size as ne"
                        )));
                    }
                    for &v in arr.iter().flatten() {
                        check_amplitude(v, name)?;
                    }
                    amp[slot] = arr.iter().flatten().copied().collect();
                }
                Corners::Samples { res: res as i64, amp }
            }
        };
        Ok(Self { n: n as i64, corners })
    }

    pub fn grid_n(&self) -> usize {
        self.n as usize
    }

    /// Radians per integer unit.
    pub fn unit(&self) -> f64 {
        PI / (3.0 * self.n as f64)
    }

    /// Integer coordinate of grid index `k`.
    pub fn coord(&self, k: usize) -> i64 {
        8 * k as i64 + 4 - 4 * self.n
    }

    pub fn label(&self, x: i64, y: i64) -> String {
        format!("({:.6}, {:.6})", x as f64 * self.unit(), y as f64 * self.unit())
    }

    /// `φ̂` on a corner square; caller guarantees `2n < |x|, |y| < 4n`.
    fn corner(&self, x: i64, y: i64) -> std::result::Result<f64, Miss> {
        let n = self.n;
        let q = match (x > 0, y > 0) {
            (true, true) => NE,
            (false, true) => NW,
            (true, false) => SE,
            (false, false) => SW,
        };
        let u = if x > 0 { x - 2 * n } else { x + 4 * n };
        let v = if y > 0 { y - 2 * n } else { y + 4 * n };
        debug_assert!(u > 0 && u < 2 * n && v > 0 && v < 2 * n);
        match &self.corners {
            Corners::Halves(amp) => {
                if u == n {
                    return Err(Miss::Boundary);
                }
                Ok(amp[q][(u > n) as usize])
            }
            Corners::Triangular { ne, off } => {
                if u == v {
                    return Err(Miss::Boundary);
                }
                let upper = u > v;
                Ok(match q {
                    NE => *ne,
                    NW if upper => *off,
                    SE if !upper => *off,
                    _ => 0.0,
                })
            }
            Corners::Samples { res, amp } => {
                let (su, sv) = (u * res, v * res);
                if su % (2 * n) == 0 || sv % (2 * n) == 0 {
                    return Err(Miss::Boundary);
                }
                let (iu, iv) = (su / (2 * n), sv / (2 * n));
                Ok(amp[q][(iu * res + iv) as usize])
            }
        }
    }

    /// Border value from the two corner values feeding it.
    fn border(t1: f64, t2: f64) -> f64 {
        let s = t1 * t1 + t2 * t2;
        if t2 == 0.0 && t1 > 0.0 {
            PHI_MAX
        } else if s == 0.0 {
            // both feeding corners vanish: split the unit sum evenly
            PHI_MAX / 2f64.sqrt()
        } else {
            PHI_MAX * t1 / s.sqrt()
        }
    }

    /// `φ̂(x, y)` with the region that determined it.
    pub fn eval(&self, x: i64, y: i64) -> std::result::Result<(f64, Region), Miss> {
        let n = self.n;
        let (ax, ay) = (x.abs(), y.abs());
        if ax >= 4 * n || ay >= 4 * n {
            return Ok((0.0, Region::Outside));
        }
        if ax == 2 * n || ay == 2 * n {
            return Err(Miss::Boundary);
        }
        if ax < 2 * n && ay < 2 * n {
            return Ok((PHI_MAX, Region::Central));
        }
        if ax > 2 * n && ay > 2 * n {
            return Ok((self.corner(x, y)?, Region::Corner));
        }
        if ay > 2 * n {
            let (p, region) = self.unfold(x)?;
            let t1 = self.corner(2 * p, y)?;
            let t2 = self.corner(2 * p, y - 6 * n * y.signum())?;
            Ok((Self::border(t1, t2), region))
        } else {
            let (p, region) = self.unfold(y)?;
            let t1 = self.corner(x, 2 * p)?;
            let t2 = self.corner(x - 6 * n * x.signum(), 2 * p)?;
            Ok((Self::border(t1, t2), region))
        }
    }

    /// Doubles a border coordinate with `|p| < 2n` until `n < |p| < 2n`.
    fn unfold(&self, mut p: i64) -> std::result::Result<(i64, Region), Miss> {
        let n = self.n;
        if p == 0 {
            return Err(Miss::Boundary);
        }
        let mut region = Region::BorderI;
        while p.abs() < n {
            p *= 2;
            region = Region::BorderJ;
        }
        if p.abs() == n {
            return Err(Miss::Boundary);
        }
        Ok((p, region))
    }

    pub fn value(&self, x: i64, y: i64) -> std::result::Result<f64, Miss> {
        self.eval(x, y).map(|(v, _)| v)
    }

    /// Evaluation points standing in for a node: the node itself, or the four
    /// quarter-offset points of its cell when the node is on a breakpoint.
    pub fn sample_points(&self, x: i64, y: i64) -> Vec<(i64, i64)> {
        if self.value(x, y).is_ok() {
            vec![(x, y)]
        } else {
            vec![(x - 2, y - 2), (x - 2, y + 2), (x + 2, y - 2), (x + 2, y + 2)]
        }
    }

    fn reduce(&self, p: i64) -> i64 {
        let period = 6 * self.n;
        (p + 3 * self.n).rem_euclid(period) - 3 * self.n
    }

    /// Quotient filter on the open square `(−4π/3, 4π/3)²`, following the
    /// case split: zero where `|ξ_dir| > 2π/3`, `2π·φ̂(dilated)` on the central
    /// square, `φ̂(dilated)/φ̂` elsewhere. Where both vanish the value of the
    /// `2π`-translate is used.
    fn quotient_raw(&self, dir: Direction, x: i64, y: i64) -> std::result::Result<f64, Miss> {
        let n = self.n;
        let (p, q) = match dir {
            Direction::A => (x, y),
            Direction::B => (y, x),
        };
        let (ap, aq) = (p.abs(), q.abs());
        if ap == 2 * n || aq == 2 * n {
            return Err(Miss::Boundary);
        }
        if ap > 2 * n {
            return Ok(0.0);
        }
        let num = match dir {
            Direction::A => self.value(2 * x, y)?,
            Direction::B => self.value(x, 2 * y)?,
        };
        if aq < 2 * n {
            return Ok(2.0 * PI * num);
        }
        let den = self.value(x, y)?;
        match (num == 0.0, den == 0.0) {
            (_, false) => Ok(num / den),
            (true, true) => {
                // 0/0: take the value forced on the other corner-row translate
                // so the filter stays periodic
                let other = match dir {
                    Direction::A => self.value(2 * x, y - 6 * n * y.signum())?,
                    Direction::B => self.value(x - 6 * n * x.signum(), 2 * y)?,
                };
                Ok(2.0 * PI * other)
            }
            (false, true) => Err(Miss::Singular),
        }
    }

    /// The `2πZ²`-periodic filter `m^A` or `m^B` at an integer point.
    pub fn filter(&self, dir: Direction, x: i64, y: i64) -> std::result::Result<f64, Miss> {
        self.quotient_raw(dir, self.reduce(x), self.reduce(y))
    }

    /// Filter evaluation at `(s₁x + πk₁, s₂y + πk₂)`.
    fn filter_tap(&self, dir: Direction, tap: Tap, x: i64, y: i64) -> std::result::Result<f64, Miss> {
        let pi = 3 * self.n;
        self.filter(
            dir,
            tap.scale[0] as i64 * x + pi * tap.shift_pi[0] as i64,
            tap.scale[1] as i64 * y + pi * tap.shift_pi[1] as i64,
        )
    }

    /// Commuting-lattice functional `f` at an integer point.
    pub fn lattice_functional(&self, x: i64, y: i64) -> std::result::Result<Complex64, Miss> {
        let miss = Cell::new(None);
        let eval = |dir, tap| match self.filter_tap(dir, tap, x, y) {
            Ok(v) => Complex64::new(v, 0.0),
            Err(m) => {
                miss.set(Some(m));
                Complex64::new(0.0, 0.0)
            }
        };
        let f = commuting_lattice_functional(|t| eval(Direction::A, t), |t| eval(Direction::B, t));
        match miss.get() {
            Some(m) => Err(m),
            None => Ok(f),
        }
    }

    /// The 3×4 matrix of `{φ, ψ^A, ψ^B}` for `T = AB` at an integer point.
    pub fn detail_matrix(&self, x: i64, y: i64) -> std::result::Result<crate::linalg::CMatrix, Miss> {
        let miss = Cell::new(None);
        let eval = |dir, tap| match self.filter_tap(dir, tap, x, y) {
            Ok(v) => Complex64::new(v, 0.0),
            Err(m) => {
                miss.set(Some(m));
                Complex64::new(0.0, 0.0)
            }
        };
        let eta = [x as f64 * self.unit(), y as f64 * self.unit()];
        let m = dyadic_detail_matrix(eta, |t| eval(Direction::A, t), |t| eval(Direction::B, t));
        match miss.get() {
            Some(m) => Err(m),
            None => Ok(m),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    A,
    B,
}

/// Sampled `φ̂` on the midpoint grid of `[−4π/3, 4π/3]²`.
#[derive(Clone, Debug)]
pub struct FreqProfile {
    pub spec: CornerSpec,
    pub func: MeyerFunction,
    pub grid: FreqGrid,
    /// `values[(i, j)] = φ̂(ξ₁ᵢ, ξ₂ⱼ)`
    pub values: Array2<f64>,
    pub regions: Array2<Region>,
}

/// Builds the profile. Nodes on a breakpoint line are tagged
/// [`Region::Unresolved`] and take the mean of the quarter-offset points of
/// their cell.
pub fn build_profile(spec: &CornerSpec, n: usize) -> Result<FreqProfile> {
    let func = MeyerFunction::new(spec, n)?;
    let rows = par::map_range(n, |i| {
        let x = func.coord(i);
        (0..n)
            .map(|j| {
                let y = func.coord(j);
                match func.eval(x, y) {
                    Ok(v) => v,
                    Err(_) => (node_average(&func, x, y, |p| func.value(p.0, p.1).ok()), Region::Unresolved),
                }
            })
            .collect::<Vec<_>>()
    });
    let values = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j].0);
    let regions = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j].1);
    Ok(FreqProfile {
        spec: spec.clone(),
        func,
        grid: FreqGrid::meyer(n),
        values,
        regions,
    })
}

fn node_average(func: &MeyerFunction, x: i64, y: i64, f: impl Fn((i64, i64)) -> Option<f64>) -> f64 {
    let vals: Vec<f64> = func.sample_points(x, y).into_iter().filter_map(f).collect();
    if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

impl FreqProfile {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn unresolved_count(&self) -> usize {
        self.regions.iter().filter(|r| **r == Region::Unresolved).count()
    }

    fn coords(&self) -> Vec<i64> {
        (0..self.n()).map(|k| self.func.coord(k)).collect()
    }

    /// Grid indices whose coordinate lies in `[−π, π)`.
    fn cell_indices(&self) -> Vec<usize> {
        let n = self.func.n;
        (0..self.n())
            .filter(|&k| {
                let c = self.func.coord(k);
                (-3 * n..3 * n).contains(&c)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthonormalityReport {
    /// `max |S(ξ) − 1/(4π²)|` over resolved nodes of `[−π, π)²`
    pub max_deviation: f64,
    pub nodes: usize,
    pub skipped: usize,
}

/// Sums `φ̂²` over the `2πZ²` translates at every node of the fundamental cell.
pub fn orthonormality_sum(p: &FreqProfile) -> OrthonormalityReport {
    let func = &p.func;
    let n = func.n;
    let cell = p.cell_indices();
    let per_row = par::map_range(cell.len(), |a| {
        let x = func.coord(cell[a]);
        let mut worst = 0.0f64;
        let mut skipped = 0;
        for &b in &cell {
            let y = func.coord(b);
            let mut s = 0.0;
            let mut ok = true;
            for kx in -1..=1 {
                for ky in -1..=1 {
                    match func.value(x + 6 * n * kx, y + 6 * n * ky) {
                        Ok(v) => s += v * v,
                        Err(_) => ok = false,
                    }
                }
            }
            if ok {
                worst = worst.max((s - PHI_MAX_SQ).abs());
            } else {
                skipped += 1;
            }
        }
        (worst, skipped)
    });
    OrthonormalityReport {
        max_deviation: per_row.iter().map(|r| r.0).fold(0.0, f64::max),
        nodes: cell.len() * cell.len(),
        skipped: per_row.iter().map(|r| r.1).sum(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CornerReport {
    /// `max |Σ φ̂² − 1/(4π²)|` over the four corner translates
    pub sum_residual: f64,
    /// `max |φ̂_NE φ̂_SW − φ̂_NW φ̂_SE|`
    pub product_residual: f64,
    pub nodes: usize,
    pub skipped: usize,
}

/// Residuals of the corner conditions on all grid nodes of `NE`.
pub fn corner_residuals(p: &FreqProfile) -> CornerReport {
    let func = &p.func;
    let n = func.n;
    let ne: Vec<i64> = p.coords().into_iter().filter(|&c| c > 2 * n && c < 4 * n).collect();
    let rows = par::map_range(ne.len(), |a| {
        let x = ne[a];
        let mut out = (0.0f64, 0.0f64, 0usize);
        for &y in &ne {
            let vals = [(x, y), (x - 6 * n, y), (x, y - 6 * n), (x - 6 * n, y - 6 * n)]
                .map(|(u, v)| func.value(u, v));
            if vals.iter().any(|v| v.is_err()) {
                out.2 += 1;
                continue;
            }
            let [q_ne, q_nw, q_se, q_sw] = vals.map(|v| v.unwrap());
            let sum = q_ne * q_ne + q_nw * q_nw + q_se * q_se + q_sw * q_sw;
            out.0 = out.0.max((sum - PHI_MAX_SQ).abs());
            out.1 = out.1.max((q_ne * q_sw - q_nw * q_se).abs());
        }
        out
    });
    CornerReport {
        sum_residual: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        product_residual: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        nodes: ne.len() * ne.len(),
        skipped: rows.iter().map(|r| r.2).sum(),
    }
}

/// Sampled quotient filter on the fundamental cell.
#[derive(Clone, Debug)]
pub struct QuotientFilter {
    pub direction: Direction,
    /// Coordinates (radians) of the sampled nodes along each axis.
    pub axis: Vec<f64>,
    /// `NaN` where the node is unresolved.
    pub values: Array2<f64>,
    /// Max disagreement between `2πZ²` translates inside the big square.
    pub periodicity_deviation: f64,
    pub unresolved: usize,
}

/// `m^A` (or `m^B`) on `[−π, π)²` from the case split, plus a check that the
/// raw quotient agrees on every pair of translates inside `(−4π/3, 4π/3)²`.
pub fn filter_quotient(p: &FreqProfile, dir: Direction) -> Result<QuotientFilter> {
    let func = &p.func;
    let n = func.n;
    let coords = p.coords();
    let cell: Vec<i64> = p.cell_indices().into_iter().map(|k| coords[k]).collect();
    let singular = |x: i64, y: i64| Error::SingularQuotient { node: func.label(x, y) };

    let rows = par::map_range(cell.len(), |a| {
        cell.iter()
            .map(|&y| match func.filter(dir, cell[a], y) {
                Ok(v) => Ok(v),
                Err(Miss::Boundary) => Ok(f64::NAN),
                Err(Miss::Singular) => Err(singular(cell[a], y)),
            })
            .collect::<Result<Vec<f64>>>()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let values = Array2::from_shape_fn((cell.len(), cell.len()), |(i, j)| rows[i][j]);

    let periodic = par::map_range(coords.len(), |i| {
        let x = coords[i];
        let mut worst = 0.0f64;
        for &y in &coords {
            let Ok(here) = func.quotient_raw(dir, x, y) else { continue };
            for kx in -1..=1i64 {
                for ky in -1..=1i64 {
                    let (u, v) = (x + 6 * n * kx, y + 6 * n * ky);
                    if (kx, ky) == (0, 0) || u.abs() >= 4 * n || v.abs() >= 4 * n {
                        continue;
                    }
                    if let Ok(there) = func.quotient_raw(dir, u, v) {
                        worst = worst.max((here - there).abs());
                    }
                }
            }
        }
        worst
    });
    Ok(QuotientFilter {
        direction: dir,
        axis: cell.iter().map(|&c| c as f64 * func.unit()).collect(),
        unresolved: values.iter().filter(|v| v.is_nan()).count(),
        values,
        periodicity_deviation: periodic.into_iter().fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BmraReport {
    pub mode: String,
    pub grid_n: usize,
    pub unresolved_nodes: usize,
    /// `0 ≤ φ̂ ≤ 1/(2π)` at every node
    pub condition_a: bool,
    /// `φ̂ = 1/(2π)` on the central square
    pub condition_b: bool,
    /// `φ̂ = 0` on probe points outside the big square
    pub condition_c: bool,
    pub corner_sum_residual: f64,
    pub corner_product_residual: f64,
    pub orthonormality_deviation: f64,
    pub periodicity_a: f64,
    pub periodicity_b: f64,
    /// `max |φ̂(2ξ₁,ξ₂) − m^A(ξ)φ̂(ξ)|` and the `B` analogue
    pub refinement_a: f64,
    pub refinement_b: f64,
    pub intertwine_residual: f64,
    /// `max |f|` on the `L` rectangles
    pub commuting_lattice_residual: f64,
    /// `max |f(ξ+πe₁) + f(ξ)|, |f(ξ+πe₂) + f(ξ)|, |f(ξ+π(1,1)) − f(ξ)|`
    pub lattice_symmetry_residual: f64,
    /// `max |φ̂(−ξ) − φ̂(ξ)|`
    pub reality_residual: f64,
    pub reality_expected: bool,
}

/// Tolerances for [`BmraReport::failures`].
#[derive(Clone, Copy, Debug)]
pub struct BmraTolerances {
    pub corner: f64,
    pub identity: f64,
    pub reality: f64,
}

impl Default for BmraTolerances {
    fn default() -> Self {
        Self {
            corner: 1e-12,
            identity: 1e-9,
            reality: 1e-12,
        }
    }
}

impl BmraReport {
    /// Names of the checks exceeding their tolerance.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn failures(&self, tol: &BmraTolerances) -> Vec<&'static str> {
        let mut out = Vec::new();
        let checks = [
            ("condition_a", !self.condition_a),
            ("condition_b", !self.condition_b),
            ("condition_c", !self.condition_c),
            ("corner_sum_residual", !(self.corner_sum_residual <= tol.corner)),
            ("corner_product_residual", !(self.corner_product_residual <= tol.corner)),
            ("orthonormality_deviation", !(self.orthonormality_deviation <= tol.identity)),
            ("periodicity_a", !(self.periodicity_a <= tol.identity)),
            ("periodicity_b", !(self.periodicity_b <= tol.identity)),
            ("refinement_a", !(self.refinement_a <= tol.identity)),
            ("refinement_b", !(self.refinement_b <= tol.identity)),
            ("intertwine_residual", !(self.intertwine_residual <= tol.identity)),
            ("commuting_lattice_residual", !(self.commuting_lattice_residual <= tol.identity)),
            ("lattice_symmetry_residual", !(self.lattice_symmetry_residual <= tol.identity)),
            (
                "reality_residual",
                self.reality_expected && !(self.reality_residual <= tol.reality),
            ),
        ];
        for (name, failed) in checks {
            if failed {
                out.push(name);
            }
        }
        out
    }
}

fn max_over_nodes(p: &FreqProfile, f: impl Fn(i64, i64) -> Option<f64> + Sync + Send) -> f64 {
    let coords = p.coords();
    par::map_range(coords.len(), |i| {
        coords
            .iter()
            .filter_map(|&y| f(coords[i], y))
            .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

fn mode_name(spec: &CornerSpec) -> String {
    match serde_json::to_value(spec) {
        Ok(v) => v["mode"].as_str().unwrap_or("unknown").to_string(),
        Err(_) => "unknown".into(),
    }
}

/// Runs every sweep and aggregates the residuals.
pub fn verify_bmra(p: &FreqProfile) -> Result<BmraReport> {
    let func = &p.func;
    let n = func.n;

    let condition_a = p.values.iter().all(|&v| (0.0..=PHI_MAX).contains(&v));
    let condition_b = p
        .regions
        .iter()
        .zip(p.values.iter())
        .filter(|(r, _)| **r == Region::Central)
        .all(|(_, &v)| v == PHI_MAX);
    let probes = [4 * n, 4 * n + 1, 5 * n, 8 * n];
    let condition_c = probes.iter().all(|&far| {
        p.coords().iter().step_by(7).all(|&c| {
            [(far, c), (-far, c), (c, far), (c, -far)]
                .iter()
                .all(|&(x, y)| func.value(x, y) == Ok(0.0))
        })
    });

    let corners = corner_residuals(p);
    let ortho = orthonormality_sum(p);
    let qa = filter_quotient(p, Direction::A)?;
    let qb = filter_quotient(p, Direction::B)?;

    let refinement = |dir: Direction| {
        max_over_nodes(p, move |x, y| {
            let m = func.filter(dir, x, y).ok()?;
            let here = func.value(x, y).ok()?;
            let dilated = match dir {
                Direction::A => func.value(2 * x, y).ok()?,
                Direction::B => func.value(x, 2 * y).ok()?,
            };
            Some((dilated - m * here).abs())
        })
    };
    let refinement_a = refinement(Direction::A);
    let refinement_b = refinement(Direction::B);

    let intertwine_residual = max_over_nodes(p, |x, y| {
        if func.value(x, y).ok()? == 0.0 {
            return None;
        }
        let lhs = func.filter(Direction::A, x, 2 * y).ok()? * func.filter(Direction::B, x, y).ok()?;
        let rhs = func.filter(Direction::A, x, y).ok()? * func.filter(Direction::B, 2 * x, y).ok()?;
        Some((lhs - rhs).abs())
    });

    let commuting_lattice_residual = max_over_nodes(p, |x, y| {
        let in_l = |c: i64| c.abs() > n && c.abs() < 2 * n;
        if !(in_l(x) && in_l(y)) {
            return None;
        }
        func.lattice_functional(x, y).ok().map(|f| f.norm())
    });

    let pi = 3 * n;
    let lattice_symmetry_residual = max_over_nodes(p, |x, y| {
        if (x - func.coord(0)) % 32 != 0 || (y - func.coord(0)) % 32 != 0 {
            return None;
        }
        let f = func.lattice_functional(x, y).ok()?;
        let fx = func.lattice_functional(x + pi, y).ok()?;
        let fy = func.lattice_functional(x, y + pi).ok()?;
        let fxy = func.lattice_functional(x + pi, y + pi).ok()?;
        Some((fx + f).norm().max((fy + f).norm()).max((fxy - f).norm()))
    });

    let m = p.n();
    let mut reality_residual = 0.0f64;
    for ((i, j), &v) in p.values.indexed_iter() {
        reality_residual = reality_residual.max((v - p.values[(m - 1 - i, m - 1 - j)]).abs());
    }

    Ok(BmraReport {
        mode: mode_name(&p.spec),
        grid_n: p.n(),
        unresolved_nodes: p.unresolved_count(),
        condition_a,
        condition_b,
        condition_c,
        corner_sum_residual: corners.sum_residual,
        corner_product_residual: corners.product_residual,
        orthonormality_deviation: ortho.max_deviation,
        periodicity_a: qa.periodicity_deviation,
        periodicity_b: qb.periodicity_deviation,
        refinement_a,
        refinement_b,
        intertwine_residual,
        commuting_lattice_residual,
        lattice_symmetry_residual,
        reality_residual,
        reality_expected: p.spec.is_even(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub radius: i64,
    /// `Re ⟨φ, φ(·−k)⟩` at index `(k₁ + K, k₂ + K)`
    pub values: Vec<Vec<f64>>,
    pub max_imag: f64,
    pub diagonal_error: f64,
    pub max_off_diagonal: f64,
}

impl GramReport {
    pub fn value(&self, k: (i64, i64)) -> f64 {
        self.values[(k.0 + self.radius) as usize][(k.1 + self.radius) as usize]
    }
}

/// `Σ_{i,j} w(i,j) e^{i(s₁ ηᵢ k₁ + s₂ ηⱼ k₂)} · area` for `|k|∞ ≤ K`, where
/// `row(i)` yields the weights of grid row `i`. The double sum is evaluated
/// as two one-dimensional passes.
fn fourier_window(
    coords: &[f64],
    radius: i64,
    scale: f64,
    area: f64,
    row: impl Fn(usize) -> Vec<Complex64> + Sync + Send,
) -> Vec<Vec<Complex64>> {
    let ks: Vec<i64> = (-radius..=radius).collect();
    let phase: Vec<Vec<Complex64>> = coords
        .iter()
        .map(|&c| ks.iter().map(|&k| Complex64::from_polar(1.0, scale * c * k as f64)).collect())
        .collect();
    let partial = par::map_range(coords.len(), |i| {
        let w = row(i);
        let mut inner = vec![Complex64::new(0.0, 0.0); ks.len()];
        for (j, wj) in w.iter().enumerate() {
            if *wj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (b, ph) in phase[j].iter().enumerate() {
                inner[b] += wj * ph;
            }
        }
        ks.iter()
            .enumerate()
            .map(|(a, _)| inner.iter().map(|v| v * phase[i][a]).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    });
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ks.len()]; ks.len()];
    for block in &partial {
        for (a, r) in block.iter().enumerate() {
            for (b, v) in r.iter().enumerate() {
                out[a][b] += v * area;
            }
        }
    }
    out
}

fn gram_report(radius: i64, raw: Vec<Vec<Complex64>>) -> GramReport {
    let mut max_imag = 0.0f64;
    let mut max_off = 0.0f64;
    let mut diag = 0.0;
    for (a, r) in raw.iter().enumerate() {
        for (b, v) in r.iter().enumerate() {
            max_imag = max_imag.max(v.im.abs());
            if a as i64 == radius && b as i64 == radius {
                diag = (v.re - 1.0).abs();
            } else {
                max_off = max_off.max(v.norm());
            }
        }
    }
    GramReport {
        radius,
        values: raw.iter().map(|r| r.iter().map(|v| v.re).collect()).collect(),
        max_imag,
        diagonal_error: diag,
        max_off_diagonal: max_off,
    }
}

/// `⟨φ, φ(·−k)⟩ = ∫ φ̂(ξ)² e^{i⟨ξ,k⟩} dξ` for `|k|∞ ≤ K` by midpoint quadrature.
pub fn translate_gram(p: &FreqProfile, radius: i64) -> GramReport {
    let coords: Vec<f64> = (0..p.n()).map(|k| p.grid.coord(k)).collect();
    let h = p.grid.spacing();
    let raw = fourier_window(&coords, radius, 1.0, h * h, |i| {
        p.values.row(i).iter().map(|v| Complex64::new(v * v, 0.0)).collect()
    });
    gram_report(radius, raw)
}

/// [`translate_gram`] without storing the profile, for large grids.
pub fn translate_gram_streaming(spec: &CornerSpec, n: usize, radius: i64) -> Result<GramReport> {
    let func = MeyerFunction::new(spec, n)?;
    let grid = FreqGrid::meyer(n);
    let coords: Vec<f64> = (0..n).map(|k| grid.coord(k)).collect();
    let h = grid.spacing();
    let raw = fourier_window(&coords, radius, 1.0, h * h, |i| {
        let x = func.coord(i);
        (0..n)
            .map(|j| {
                let y = func.coord(j);
                let v = node_average(&func, x, y, |q| func.value(q.0, q.1).ok());
                Complex64::new(v * v, 0.0)
            })
            .collect()
    });
    Ok(gram_report(radius, raw))
}

/// Largest 2×2 minor of the sampled profile, normalized by the squared
/// largest entry.
pub fn nonseparability_score(p: &FreqProfile) -> f64 {
    minor_score(p.values.view())
}

/// The wavelet obtained by completing the `{φ, ψ^A, ψ^B}` matrix.
#[derive(Clone, Debug)]
pub struct WaveletSynthesis {
    pub grid_n: usize,
    /// `m_ψ` at the nodes `η` of the profile grid
    pub m_psi: Array2<Complex64>,
    /// `ψ̂(2η) = m_ψ(η) φ̂(η)`
    pub psi_hat: Array2<Complex64>,
    /// cell means of `|ψ̂(2η)|²`
    psi_sq: Array2<f64>,
    /// cell means of `ψ̂(2η) φ̂(2η)`
    psi_phi: Array2<Complex64>,
    /// radians of the `η` nodes
    eta: Vec<f64>,
    /// max over nodes of the 4×4 unitarity deviation
    pub unitarity_deviation: f64,
    /// max over nodes of `||det| − 1|`
    pub determinant_deviation: f64,
    pub unresolved_nodes: usize,
    /// max `|ψ̂|` on `(−2π/3, 2π/3)²`
    pub inner_square_max: f64,
    /// max `|ψ̂|` on probe points outside `(−8π/3, 8π/3)²`
    pub outside_max: f64,
}

struct NodeSample {
    m_psi: Complex64,
    psi_hat: Complex64,
    psi_sq: f64,
    psi_phi: Complex64,
    unitarity: f64,
    det: f64,
    unresolved: bool,
}

fn complete_at(func: &MeyerFunction, x: i64, y: i64) -> std::result::Result<Option<(Complex64, f64, f64)>, Error> {
    let Ok(m) = func.detail_matrix(x, y) else {
        return Ok(None);
    };
    let u = complete_pointwise_at(&m, &func.label(x, y))?;
    let dev = u
        .row_orthonormality_deviation()
        .max(u.column_orthonormality_deviation());
    let det = (u.determinant().norm() - 1.0).abs();
    Ok(Some((u[(3, 0)], dev, det)))
}

/// Pointwise completion at every node and the resulting `ψ̂`.
pub fn synthesize_wavelet(p: &FreqProfile) -> Result<WaveletSynthesis> {
    let func = &p.func;
    let n = p.n();
    let rows = par::map_range(n, |i| {
        let x = func.coord(i);
        (0..n)
            .map(|j| {
                let y = func.coord(j);
                let direct = complete_at(func, x, y)?;
                let points = match direct {
                    Some(_) => vec![(x, y)],
                    None => vec![(x - 2, y - 2), (x - 2, y + 2), (x + 2, y - 2), (x + 2, y + 2)],
                };
                let mut s = NodeSample {
                    m_psi: Complex64::new(0.0, 0.0),
                    psi_hat: Complex64::new(0.0, 0.0),
                    psi_sq: 0.0,
                    psi_phi: Complex64::new(0.0, 0.0),
                    unitarity: 0.0,
                    det: 0.0,
                    unresolved: direct.is_none(),
                };
                let mut used = 0;
                for (u, v) in points {
                    let done = if (u, v) == (x, y) { direct } else { complete_at(func, u, v)? };
                    let (Some((m, dev, det)), Ok(th), Ok(th2)) =
                        (done, func.value(u, v), func.value(2 * u, 2 * v))
                    else {
                        continue;
                    };
                    used += 1;
                    let ph = m * th;
                    s.m_psi += m;
                    s.psi_hat += ph;
                    s.psi_sq += ph.norm_sqr();
                    s.psi_phi += ph * th2;
                    if !s.unresolved {
                        s.unitarity = dev;
                        s.det = det;
                    }
                }
                if used > 0 {
                    let w = 1.0 / used as f64;
                    s.m_psi *= w;
                    s.psi_hat *= w;
                    s.psi_sq *= w;
                    s.psi_phi *= w;
                }
                Ok(s)
            })
            .collect::<Vec<Result<NodeSample>>>()
    });

    let mut failed = Vec::new();
    let mut samples = Vec::with_capacity(n * n);
    for s in rows.into_iter().flatten() {
        match s {
            Ok(s) => samples.push(s),
            Err(Error::NotPartialIsometry { node, .. }) | Err(Error::RankDeficient { node }) => {
                failed.push(node)
            }
            Err(e) => return Err(e),
        }
    }
    if !failed.is_empty() {
        failed.truncate(20);
        return Err(Error::CompletionFailed { nodes: failed });
    }

    let at = |i: usize, j: usize| &samples[i * n + j];
    let m_psi = Array2::from_shape_fn((n, n), |(i, j)| at(i, j).m_psi);
    let psi_hat = Array2::from_shape_fn((n, n), |(i, j)| at(i, j).psi_hat);
    let psi_sq = Array2::from_shape_fn((n, n), |(i, j)| at(i, j).psi_sq);
    let psi_phi = Array2::from_shape_fn((n, n), |(i, j)| at(i, j).psi_phi);
    let unitarity_deviation = samples.iter().map(|s| s.unitarity).fold(0.0, f64::max);
    let determinant_deviation = samples.iter().map(|s| s.det).fold(0.0, f64::max);
    let unresolved_nodes = samples.iter().filter(|s| s.unresolved).count();

    // ψ̂(2η) on the inner square means |η| < π/3 in each coordinate
    let nn = func.n;
    let mut inner_square_max = 0.0f64;
    for ((i, j), v) in psi_hat.indexed_iter() {
        if func.coord(i).abs() < nn && func.coord(j).abs() < nn {
            inner_square_max = inner_square_max.max(v.norm());
        }
    }
    let mut outside_max = 0.0f64;
    for far in [4 * nn + 4, 5 * nn, 8 * nn] {
        for k in (0..n).step_by(5) {
            let c = func.coord(k);
            for (x, y) in [(far, c), (-far, c), (c, far), (c, -far)] {
                // θ vanishes outside the big square, so ψ̂(2η) does too
                let th = func.value(x, y).unwrap_or(0.0);
                if th != 0.0 {
                    let m = complete_at(func, x, y)?.map(|c| c.0).unwrap_or_default();
                    outside_max = outside_max.max((m * th).norm());
                }
            }
        }
    }

    Ok(WaveletSynthesis {
        grid_n: n,
        m_psi,
        psi_hat,
        psi_sq,
        psi_phi,
        eta: (0..n).map(|k| p.grid.coord(k)).collect(),
        unitarity_deviation,
        determinant_deviation,
        unresolved_nodes,
        inner_square_max,
        outside_max,
    })
}

impl WaveletSynthesis {
    fn h(&self) -> f64 {
        self.eta[1] - self.eta[0]
    }

    /// `‖ψ‖² = ∫ |ψ̂|²`, with `ξ = 2η` so each cell has area `4h²`.
    pub fn norm_sq(&self) -> f64 {
        let h = self.h();
        self.psi_sq.sum() * 4.0 * h * h
    }

    /// `⟨ψ, φ(·−k)⟩ = ∫ ψ̂(ξ) φ̂(ξ) e^{i⟨ξ,k⟩} dξ` for `|k|∞ ≤ K`, indexed
    /// `[k₁ + K][k₂ + K]`.
    pub fn phi_inner_products(&self, radius: i64) -> Vec<Vec<Complex64>> {
        let h = self.h();
        fourier_window(&self.eta, radius, 2.0, 4.0 * h * h, |i| self.psi_phi.row(i).to_vec())
    }

    /// `ψ(x) = (1/2π) ∫ ψ̂(ξ) e^{i⟨x,ξ⟩} dξ` on a `count×count` grid of
    /// `[−half_width, half_width]²`.
    pub fn real_space(&self, half_width: f64, count: usize) -> Array2<Complex64> {
        let h = self.h();
        let xs: Vec<f64> = (0..count)
            .map(|k| {
                if count == 1 {
                    0.0
                } else {
                    -half_width + 2.0 * half_width * k as f64 / (count - 1) as f64
                }
            })
            .collect();
        // e^{i x ξ} with ξ = 2η
        let table = |x: f64| -> Vec<Complex64> {
            self.eta.iter().map(|&e| Complex64::from_polar(1.0, 2.0 * e * x)).collect()
        };
        let tables: Vec<Vec<Complex64>> = xs.iter().map(|&x| table(x)).collect();
        let n = self.eta.len();
        // inner[b][i] = Σ_j ψ̂[i][j] e^{i x_b ξ_j}
        let inner = par::map_range(count, |b| {
            (0..n)
                .map(|i| {
                    self.psi_hat
                        .row(i)
                        .iter()
                        .zip(&tables[b])
                        .map(|(p, e)| p * e)
                        .sum::<Complex64>()
                })
                .collect::<Vec<_>>()
        });
        let scale = 4.0 * h * h / (2.0 * PI);
        Array2::from_shape_fn((count, count), |(a, b)| {
            inner[b].iter().zip(&tables[a]).map(|(v, e)| v * e).sum::<Complex64>() * scale
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> CornerSpec {
        let a = 1.0 / (64.0 * PI * PI);
        CornerSpec::PiecewiseConstant { a, d: a }
    }

    #[test]
    fn corner_values_examples() {
        let (b, c) = solve_corner_values(0.0, 0.0).unwrap();
        assert!((b - PHI_MAX_SQ).abs() < 1e-18 && c == 0.0);

        let a = 1.0 / (64.0 * PI * PI);
        let (b, c) = solve_corner_values(a, a).unwrap();
        assert!((b + c - (PHI_MAX_SQ - 2.0 * a)).abs() < 1e-15);
        assert!((b * c - a * a).abs() < 1e-15);
        assert!(b >= c);

        let (b1, c1) = solve_corner_values(1e-3, 4e-3).unwrap();
        let (b2, c2) = solve_corner_values(4e-3, 1e-3).unwrap();
        assert_eq!((b1, c1), (b2, c2));

        assert!(solve_corner_values(0.01, 0.01).is_err());
        assert!(solve_corner_values(-1e-4, 0.0).is_err());
    }

    #[test]
    fn degenerate_piecewise_rejected() {
        let spec = CornerSpec::PiecewiseConstant { a: 0.0, d: 0.0 };
        assert!(matches!(build_profile(&spec, 48), Err(Error::InvalidCornerSpec(_))));
        assert!(matches!(build_profile(&example(), 30), Err(Error::InvalidGrid(30))));
    }

    #[test]
    fn central_square_value() {
        let f = MeyerFunction::new(&example(), 96).unwrap();
        assert_eq!(f.eval(4, -100), Ok((PHI_MAX, Region::Central)));
        assert_eq!(f.eval(4 * 96, 0), Ok((0.0, Region::Outside)));
        assert_eq!(f.value(2 * 96, 5), Err(Miss::Boundary));
    }

    #[test]
    fn border_i_sum_is_exact() {
        // I_(0,0,0): π/3 < ξ₁ < 2π/3, 2π/3 < ξ₂ < 4π/3
        let f = MeyerFunction::new(&example(), 96).unwrap();
        let n = 96;
        for x in [n + 4, n + 20, 2 * n - 4] {
            for y in [2 * n + 4, 3 * n - 4, 3 * n + 4, 4 * n - 4] {
                let (v, region) = f.eval(x, y).unwrap();
                assert_eq!(region, Region::BorderI);
                let w = f.value(x, y - 6 * n).unwrap();
                assert!((v * v + w * w - PHI_MAX_SQ).abs() < 1e-16);
            }
        }
        let (_, region) = f.eval(20, 3 * n + 4).unwrap();
        assert_eq!(region, Region::BorderJ);
    }

    #[test]
    fn quotient_cases() {
        let f = MeyerFunction::new(&example(), 96).unwrap();
        let n = 96;
        // central square: 2π·φ̂(2ξ₁, ξ₂)
        let m = f.filter(Direction::A, 20, 20).unwrap();
        assert!((m - 2.0 * PI * f.value(40, 20).unwrap()).abs() < 1e-15);
        // 2π/3 < |ξ₁| < π: zero
        assert_eq!(f.filter(Direction::A, 2 * n + 4, 12), Ok(0.0));
        // periodic in ξ₂ on I_(0,0,0)
        let g1 = f.quotient_raw(Direction::A, n + 12, 2 * n + 12).unwrap();
        let g2 = f.quotient_raw(Direction::A, n + 12, 2 * n + 12 - 6 * n).unwrap();
        assert!((g1 - g2).abs() < 1e-12);
    }

    #[test]
    fn small_grid_identities() {
        let p = build_profile(&example(), 96).unwrap();
        let r = verify_bmra(&p).unwrap();
        assert!(r.failures(&BmraTolerances::default()).is_empty(), "{r:#?}");
    }

    #[test]
    fn triangular_profile_identities() {
        let p = build_profile(&CornerSpec::Triangular { t: 0.4 }, 96).unwrap();
        let r = verify_bmra(&p).unwrap();
        assert!(r.failures(&BmraTolerances::default()).is_empty(), "{r:#?}");
        assert!(r.reality_residual > 0.1);
        assert!(nonseparability_score(&p) > 0.1);
        assert!(MeyerFunction::new(&CornerSpec::Triangular { t: 1.0 }, 96).is_err());
    }

    #[test]
    fn tensor_profile_matches_product_of_marginals() {
        // one-dimensional profile with corner fraction p on the positive side
        fn marginal(x: f64, p: f64) -> f64 {
            let s = 1.0 / (2.0 * PI).sqrt();
            let t = 2.0 * PI / 3.0;
            if x.abs() < t {
                s
            } else if x.abs() >= 2.0 * t {
                0.0
            } else if x > 0.0 {
                s * p.sqrt()
            } else {
                s * (1.0 - p).sqrt()
            }
        }
        let (pa, pb) = (0.3, 0.8);
        let p = build_profile(&CornerSpec::Tensor { pa, pb }, 96).unwrap();
        for ((i, j), &v) in p.values.indexed_iter() {
            if p.regions[(i, j)] == Region::Unresolved {
                continue;
            }
            let expected = marginal(p.grid.coord(i), pa) * marginal(p.grid.coord(j), pb);
            assert!((v - expected).abs() < 1e-15, "{i} {j}");
        }
        assert!(nonseparability_score(&p) <= 1e-10);
    }

    #[test]
    fn broken_corner_condition_is_reported() {
        let a = 1.0 / (64.0 * PI * PI);
        let (b, c) = solve_corner_values(a, a).unwrap();
        let spec = CornerSpec::Explicit { a, b: 1.1 * b, c, d: a };
        let p = build_profile(&spec, 96).unwrap();
        let s = orthonormality_sum(&p);
        assert!((s.max_deviation - 0.1 * b).abs() < 1e-3 * b, "{}", s.max_deviation);
    }

    #[test]
    fn config_json() {
        let cfg: MeyerConfig =
            serde_json::from_str(r#"{"mode":"piecewise-constant","a":0.001,"d":0.002,"grid_n":96}"#).unwrap();
        assert_eq!(cfg.grid_n, 96);
        assert_eq!(cfg.spec, CornerSpec::PiecewiseConstant { a: 0.001, d: 0.002 });
        let back: MeyerConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let dflt: MeyerConfig = serde_json::from_str(r#"{"mode":"triangular","t":0.5}"#).unwrap();
        assert_eq!(dflt.grid_n, DEFAULT_GRID);
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"mode":"piecewise-constant","a":0.001,"d":0.002}"#;
        let spec: CornerSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec, CornerSpec::PiecewiseConstant { a: 0.001, d: 0.002 });
        let tri: CornerSpec = serde_json::from_str(r#"{"mode":"triangular","t":0.5}"#).unwrap();
        assert!(!tri.is_even());
    }
}
