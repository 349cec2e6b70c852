//! File formats: CSV arrays, binary PGM images, subband directories with a
//! JSON manifest, and the text form of trigonometric polynomials.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::transform::{Level, SubbandTree};
use crate::trigpoly::TrigPoly2;

/// Version tag carried by every JSON document the crate writes.
pub const SCHEMA: u32 = 1;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn array_to_csv(a: ArrayView2<f64>) -> String {
    let mut out = String::new();
    for row in a.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn array_from_csv(text: &str) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(format!("line {}: bad number {c:?}", ln + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(format!(
                    "line {}: expected {} columns, found {}",
                    ln + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    Ok(Array2::from_shape_fn((rows.len(), cols), |(i, j)| rows[i][j]))
}

pub fn write_csv(path: &Path, a: ArrayView2<f64>) -> Result<()> {
    fs::write(path, array_to_csv(a))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Array2<f64>> {
    array_from_csv(&fs::read_to_string(path)?)
}

/// Complex matrix as CSV with `re,im` pairs side by side.
pub fn cmatrix_to_csv(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let cells: Vec<String> = (0..m.cols())
            .map(|j| format!("{},{}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn cmatrix_from_csv(text: &str) -> Result<CMatrix> {
    let raw = array_from_csv(text)?;
    if raw.ncols() % 2 != 0 {
        return Err(parse_err("complex CSV needs an even number of columns"));
    }
    Ok(CMatrix::from_fn(raw.nrows(), raw.ncols() / 2, |i, j| {
        Complex64::new(raw[(i, 2 * j)], raw[(i, 2 * j + 1)])
    }))
}

/// Grayscale image with samples in `0..=maxval`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pgm {
    pub maxval: u16,
    pub pixels: Array2<u16>,
}

impl Pgm {
    pub fn to_f64(&self) -> Array2<f64> {
        self.pixels.mapv(f64::from)
    }

    /// Rounds and clamps into `0..=maxval`.
    pub fn from_f64(a: ArrayView2<f64>, maxval: u16) -> Self {
        let m = f64::from(maxval);
        Pgm {
            maxval,
            pixels: a.mapv(|v| v.round().clamp(0.0, m) as u16),
        }
    }

    /// Binary `P5`; one byte per sample below 256, two big-endian otherwise.
    pub fn encode(&self) -> Vec<u8> {
        let (h, w) = self.pixels.dim();
        let mut out = format!("P5\n{w} {h}\n{}\n", self.maxval).into_bytes();
        for &p in &self.pixels {
            if self.maxval < 256 {
                out.push(p as u8);
            } else {
                out.extend_from_slice(&p.to_be_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut fields = Vec::new();
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(parse_err("truncated PGM header"));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        if fields[0] != "P5" {
            return Err(parse_err(format!("not a binary PGM (magic {:?})", fields[0])));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(format!("bad PGM header field {s:?}")));
        let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
        if maxval == 0 || maxval > 65535 {
            return Err(parse_err(format!("PGM maxval {maxval} out of range")));
        }
        pos += 1;
        let width = if maxval < 256 { 1 } else { 2 };
        let data = bytes.get(pos..).unwrap_or_default();
        if data.len() < w * h * width {
            return Err(parse_err(format!(
                "PGM data too short: need {} bytes, have {}",
                w * h * width,
                data.len()
            )));
        }
        let pixels = Array2::from_shape_fn((h, w), |(i, j)| {
            let k = (i * w + j) * width;
            if width == 1 {
                data[k] as u16
            } else {
                u16::from_be_bytes([data[k], data[k + 1]])
            }
        });
        Ok(Pgm {
            maxval: maxval as u16,
            pixels,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.encode())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::decode(&bytes)
    }
}

/// Linear min-max map onto `0..=maxval`. An all-zero array is black and
/// any other constant array is mid-gray.
pub fn heatmap(a: ArrayView2<f64>, maxval: u16) -> Pgm {
    let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = f64::from(maxval);
    let pixels = if a.is_empty() {
        Array2::zeros(a.dim())
    } else if lo == hi {
        let level = if lo == 0.0 { 0 } else { maxval.div_ceil(2) };
        Array2::from_elem(a.dim(), level)
    } else {
        a.mapv(|v| ((v - lo) / (hi - lo) * m).round() as u16)
    };
    Pgm { maxval, pixels }
}

/// Contents of `manifest.json` in a subband directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub alpha: usize,
    pub beta: usize,
    pub depth: usize,
    /// input shape `[rows, cols]`
    pub shape: [usize; 2],
    /// file name and `[rows, cols]` of every band, finest level first
    pub shapes: Vec<BandShape>,
    /// sample range of the source image, if it was one
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxval: Option<u16>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandShape {
    pub file: String,
    pub rows: usize,
    pub cols: usize,
}

fn band_files(tree: &SubbandTree) -> Vec<(String, &Array2<f64>)> {
    let mut out = Vec::new();
    for (l, level) in tree.levels.iter().enumerate() {
        let groups = [("a", &level.detail_a), ("b", &level.detail_b), ("w", &level.wavelet)];
        for (tag, bands) in groups {
            for (k, band) in bands.iter().enumerate() {
                out.push((format!("level{}_{tag}{}.csv", l + 1, k + 1), band));
            }
        }
    }
    out.push(("approx.csv".to_string(), &tree.approx));
    out
}

pub fn write_subbands(dir: &Path, tree: &SubbandTree, maxval: Option<u16>) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut shapes = Vec::new();
    for (file, band) in band_files(tree) {
        write_csv(&dir.join(&file), band.view())?;
        shapes.push(BandShape {
            file,
            rows: band.nrows(),
            cols: band.ncols(),
        });
    }
    let manifest = Manifest {
        schema: SCHEMA,
        alpha: tree.alpha,
        beta: tree.beta,
        depth: tree.depth(),
        shape: [tree.shape.0, tree.shape.1],
        shapes,
        maxval,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?)
}

pub fn read_subbands(dir: &Path) -> Result<SubbandTree> {
    let manifest = read_manifest(dir)?;
    if manifest.schema != SCHEMA {
        return Err(parse_err(format!("unsupported manifest schema {}", manifest.schema)));
    }
    let load = |file: &str| -> Result<Array2<f64>> {
        let a = read_csv(&dir.join(file))?;
        let expected = manifest.shapes.iter().find(|s| s.file == file);
        match expected {
            Some(s) if (s.rows, s.cols) == a.dim() => Ok(a),
            Some(s) => Err(Error::ShapeMismatch(format!(
                "{file}: manifest says {}x{}, file has {}x{}",
                s.rows,
                s.cols,
                a.nrows(),
                a.ncols()
            ))),
            None => Err(parse_err(format!("{file} missing from manifest"))),
        }
    };
    let per_a = manifest.alpha - 1;
    let per_b = manifest.beta - 1;
    let per_w = per_a * per_b;
    let mut levels = Vec::with_capacity(manifest.depth);
    for l in 1..=manifest.depth {
        let group = |tag: &str, count: usize| {
            (1..=count)
                .map(|k| load(&format!("level{l}_{tag}{k}.csv")))
                .collect::<Result<Vec<_>>>()
        };
        levels.push(Level {
            detail_a: group("a", per_a)?,
            detail_b: group("b", per_b)?,
            wavelet: group("w", per_w)?,
        });
    }
    Ok(SubbandTree {
        alpha: manifest.alpha,
        beta: manifest.beta,
        shape: (manifest.shape[0], manifest.shape[1]),
        levels,
        approx: load("approx.csv")?,
    })
}

pub fn write_trigpoly(path: &Path, p: &TrigPoly2) -> Result<()> {
    fs::write(path, p.to_text())?;
    Ok(())
}

pub fn read_trigpoly(path: &Path) -> Result<TrigPoly2> {
    let f = fs::File::open(path)?;
    let mut text = String::new();
    for line in BufReader::new(f).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    TrigPoly2::from_text(&text)
}
