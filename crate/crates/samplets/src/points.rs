//! Point sets with sample values, file formats, and bounding geometry.
//!
//! Supported formats:
//!
//! * CSV — one row per point, `d` coordinate columns then one value column,
//!   `.` decimal, `,` separator, optional comment/header lines starting
//!   with `#`.
//! * XYZ — whitespace-separated, same column convention.
//! * PGM — P2 (ASCII) and P5 (binary), maxval <= 65535. Pixel `(i, j)` of a
//!   `W x H` image maps to the point `((i + 0.5) / W, (j + 0.5) / H)` with
//!   value `gray / maxval`, in row-major file order.

use std::fmt::Write as _;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Minimum edge length a degenerate bounding box is expanded to.
pub const EPS_BOX: f64 = 1e-12;

/// Input file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Xyz,
    Pgm,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "xyz" => Ok(Format::Xyz),
            "pgm" => Ok(Format::Pgm),
            other => Err(Error::Validation(format!("unknown format: {other}"))),
        }
    }
}

/// `N` data sites in `R^d` plus one scalar sample value per site.
///
/// Coordinates are stored row-major: point `i` occupies
/// `coords[i * dim .. (i + 1) * dim]`. All coordinates and values are finite
/// and no two points share identical coordinates.
#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    values: Vec<f64>,
}

impl PointSet {
    /// Validates and builds a point set. Rejects empty input, non-finite
    /// entries and duplicate coordinates.
    pub fn new(dim: usize, coords: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Validation("dimension must be >= 1".into()));
        }
        if values.is_empty() {
            return Err(Error::Validation("empty point set".into()));
        }
        if coords.len() != values.len() * dim {
            return Err(Error::SizeMismatch {
                expected: values.len() * dim,
                actual: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite coordinate at point {}",
                i / dim
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite value at point {i}")));
        }
        let ps = PointSet {
            dim,
            coords,
            values,
        };
        if let Some((a, b)) = ps.find_duplicate() {
            return Err(Error::Validation(format!(
                "duplicate coordinates at points {a} and {b}"
            )));
        }
        Ok(ps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Lexicographic sort of point indices detects exact duplicates without
    /// the quadratic pair scan.
    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let n = self.count();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_unstable_by(|&a, &b| cmp_coords(self.point(a), self.point(b)));
        for w in idx.windows(2) {
            if self.point(w[0]) == self.point(w[1]) {
                return Some((w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        None
    }
}

/// Total lexicographic order on coordinate tuples.
pub(crate) fn cmp_coords(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Euclidean length of `upper - lower`.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l) * (u - l))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&x, (&l, &u))| l <= x && x <= u)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance(&self, p: &[f64]) -> f64 {
        let mut s = 0.0;
        for (m, &x) in p.iter().enumerate() {
            let d = (self.lower[m] - x).max(x - self.upper[m]).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }
}

/// Tight axis-aligned hull expanded symmetrically to the smallest enclosing
/// cube, so that dyadic subdivision yields congruent child cells. Degenerate
/// hulls are expanded to edge length [`EPS_BOX`].
pub fn bounding_box(ps: &PointSet) -> AxisBox {
    let d = ps.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..ps.count() {
        for (m, &x) in ps.point(i).iter().enumerate() {
            lo[m] = lo[m].min(x);
            hi[m] = hi[m].max(x);
        }
    }
    let mut edge: f64 = 0.0;
    for m in 0..d {
        edge = edge.max(hi[m] - lo[m]);
    }
    edge = edge.max(EPS_BOX);
    let mut lower = vec![0.0; d];
    let mut upper = vec![0.0; d];
    for m in 0..d {
        let c = 0.5 * (lo[m] + hi[m]);
        // Clamp against the tight hull so rounding can never push a point
        // outside the cube.
        lower[m] = (c - 0.5 * edge).min(lo[m]);
        upper[m] = (c + 0.5 * edge).max(hi[m]);
    }
    AxisBox { lower, upper }
}

/// Header of a parsed PGM image.
#[derive(Debug, Clone, Copy)]
pub struct PgmHeader {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
}

/// Loads a point set; `dim` is the coordinate dimension for CSV/XYZ and must
/// be 2 for PGM.
pub fn load_points(path: &Path, format: Format, dim: usize) -> Result<PointSet> {
    match format {
        Format::Csv => load_separated(path, dim, SeparatorKind::Comma),
        Format::Xyz => load_separated(path, dim, SeparatorKind::Whitespace),
        Format::Pgm => {
            if dim != 2 {
                return Err(Error::Validation(format!(
                    "pgm input is 2-dimensional, got dim = {dim}"
                )));
            }
            load_pgm(path).map(|(ps, _)| ps)
        }
    }
}

enum SeparatorKind {
    Comma,
    Whitespace,
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(buf)
}

fn load_separated(path: &Path, dim: usize, sep: SeparatorKind) -> Result<PointSet> {
    if dim < 1 {
        return Err(Error::Validation("dimension must be >= 1".into()));
    }
    let bytes = read_file(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = match sep {
            SeparatorKind::Comma => trimmed.split(',').map(str::trim).collect(),
            SeparatorKind::Whitespace => trimmed.split_whitespace().collect(),
        };
        if fields.len() != dim + 1 {
            return Err(parse_err(
                lineno,
                format!("expected {} fields, found {}", dim + 1, fields.len()),
            ));
        }
        for (k, field) in fields.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid number: {field:?}")))?;
            if k < dim {
                coords.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    PointSet::new(dim, coords, values)
}

/// Loads a PGM image as a point set at pixel centers plus the image header.
pub fn load_pgm(path: &Path) -> Result<(PointSet, PgmHeader)> {
    let bytes = read_file(path)?;
    let err = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg,
    };
    let (header, grays) = parse_pgm(&bytes).map_err(err)?;
    let (w, h) = (header.width, header.height);
    let maxval = header.maxval as f64;
    let mut coords = Vec::with_capacity(w * h * 2);
    let mut values = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            coords.push((i as f64 + 0.5) / w as f64);
            coords.push((j as f64 + 0.5) / h as f64);
            values.push(grays[j * w + i] as f64 / maxval);
        }
    }
    Ok((PointSet::new(2, coords, values)?, header))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<(PgmHeader, Vec<u32>), String> {
    let mut pos = 0usize;
    let magic = pgm_token(bytes, &mut pos).ok_or("missing magic number")?;
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        other => return Err(format!("unsupported magic number {other:?}")),
    };
    let mut dims = [0usize; 3];
    for slot in dims.iter_mut() {
        let tok = pgm_token(bytes, &mut pos).ok_or("truncated header")?;
        *slot = tok.parse().map_err(|_| format!("bad header field {tok:?}"))?;
    }
    let (width, height, maxval) = (dims[0], dims[1], dims[2] as u32);
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range 1..=65535"));
    }
    let n = width * height;
    let mut grays = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        let wide = maxval > 255;
        let needed = n * if wide { 2 } else { 1 };
        if bytes.len() < pos + needed {
            return Err("truncated raster".into());
        }
        let raster = &bytes[pos..pos + needed];
        if wide {
            for ch in raster.chunks_exact(2) {
                grays.push(u32::from(u16::from_be_bytes([ch[0], ch[1]])));
            }
        } else {
            grays.extend(raster.iter().map(|&b| u32::from(b)));
        }
    } else {
        for _ in 0..n {
            let tok = pgm_token(bytes, &mut pos).ok_or("truncated raster")?;
            let g: u32 = tok.parse().map_err(|_| format!("bad sample {tok:?}"))?;
            grays.push(g);
        }
    }
    if let Some(&g) = grays.iter().find(|&&g| g > maxval) {
        return Err(format!("sample {g} exceeds maxval {maxval}"));
    }
    Ok((
        PgmHeader {
            width,
            height,
            maxval,
        },
        grays,
    ))
}

/// Reads the next whitespace-separated token, skipping `#` comments.
fn pgm_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let end = *pos;
    if end > start {
        // Exactly one separator byte is consumed after the token so a P5
        // raster can start with any byte value.
        if *pos < bytes.len() {
            *pos += 1;
        }
        Some(String::from_utf8_lossy(&bytes[start..end]).into_owned())
    } else {
        None
    }
}

/// Writes a point set as CSV. Uses the shortest round-trip float formatting,
/// so reloading reproduces coordinates and values bit-identically.
pub fn save_csv(ps: &PointSet, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    for i in 0..ps.count() {
        line.clear();
        for &c in ps.point(i) {
            let _ = write!(line, "{c},");
        }
        let _ = writeln!(line, "{}", ps.value(i));
        out.write_all(line.as_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Writes an 8-bit binary (P5) PGM.
pub fn save_pgm(width: usize, height: usize, gray: &[u8], path: &Path) -> Result<()> {
    assert_eq!(gray.len(), width * height);
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    write!(out, "P5\n{width} {height}\n255\n").map_err(io_err)?;
    out.write_all(gray).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Infers a format from a file extension.
pub fn format_from_path(path: &Path) -> Option<Format> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "csv" => Some(Format::Csv),
        "xyz" => Some(Format::Xyz),
        "pgm" => Some(Format::Pgm),
        _ => None,
    }
}
