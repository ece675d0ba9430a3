//! Readers and writers for dense CSV, sparse binary index lists, and PGM
//! images, plus the random image-window sampler used to build dense
//! observation sets from a single picture.
//!
//! Sparse files use 1-based indices on disk and 0-based indices in memory.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, GrayImage, SparseBinaryMatrix};

pub fn load_dense_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let file = fs::File::open(path)?;
    read_dense_csv(BufReader::new(file), has_header, path)
}

/// Parses comma-separated reals. `origin` is only used in error messages.
pub fn read_dense_csv<R: BufRead>(
    reader: R,
    has_header: bool,
    origin: impl AsRef<Path>,
) -> Result<DenseMatrix> {
    let origin = origin.as_ref();
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };

    let mut n_cols = None;
    let mut values = Vec::new();
    let mut n_rows = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if idx == 0 && has_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0;
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line_no, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value: {field:?}")));
            }
            values.push(v);
            count += 1;
        }
        match n_cols {
            None => n_cols = Some(count),
            Some(c) if c != count => {
                return Err(parse_err(
                    line_no,
                    format!("expected {c} fields, found {count}"),
                ))
            }
            Some(_) => {}
        }
        n_rows += 1;
    }
    let n_cols = n_cols.ok_or_else(|| Error::Format {
        path: origin.to_path_buf(),
        msg: "no data rows".into(),
    })?;
    Ok(DenseMatrix::from_raw(n_rows, n_cols, values))
}

/// Writes one row per line. Rust's shortest round-trip float formatting makes
/// reloading exact.
pub fn write_dense_csv<W: Write>(mut w: W, m: &DenseMatrix, header: Option<&[&str]>) -> io::Result<()> {
    if let Some(h) = header {
        writeln!(w, "{}", h.join(","))?;
    }
    let mut line = String::new();
    for row in m.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub fn save_dense_csv(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let f = fs::File::create(path)?;
    write_dense_csv(io::BufWriter::new(f), m, None)?;
    Ok(())
}

/// Result of parsing a sparse file: the matrix and how many duplicate indices
/// were dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLoad {
    pub matrix: SparseBinaryMatrix,
    pub duplicates_removed: usize,
}

pub fn load_sparse_binary(path: impl AsRef<Path>) -> Result<SparseLoad> {
    let path = path.as_ref();
    let file = fs::File::open(path)?;
    read_sparse_binary(BufReader::new(file), path)
}

pub fn read_sparse_binary<R: BufRead>(reader: R, origin: impl AsRef<Path>) -> Result<SparseLoad> {
    let origin = origin.as_ref();
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => return Err(parse_error(origin, 1, "missing `d=<int>` header".into())),
    };
    let d = parse_dim_header(header.trim()).ok_or_else(|| {
        parse_error(origin, 1, format!("expected `d=<positive int>`, found {header:?}"))
    })?;
    parse_index_lines(lines, Some(d), 2, origin)
}

/// Reads headerless index lines (one row per line, 1-based indices), as in
/// the raw Dorothea files. With `d = None` the dimension is the largest
/// index seen.
pub fn read_sparse_index_lines<R: BufRead>(
    reader: R,
    d: Option<usize>,
    origin: impl AsRef<Path>,
) -> Result<SparseLoad> {
    parse_index_lines(reader.lines(), d, 1, origin.as_ref())
}

pub fn load_sparse_index_lines(path: impl AsRef<Path>, d: Option<usize>) -> Result<SparseLoad> {
    let path = path.as_ref();
    let file = fs::File::open(path)?;
    read_sparse_index_lines(BufReader::new(file), d, path)
}

fn parse_error(origin: &Path, line: usize, msg: String) -> Error {
    Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    }
}

fn parse_index_lines<I>(lines: I, d: Option<usize>, first_line: usize, origin: &Path) -> Result<SparseLoad>
where
    I: Iterator<Item = io::Result<String>>,
{
    let mut rows = Vec::new();
    let mut duplicates_removed = 0;
    let mut max_index = 0;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + first_line;
        let line = line?;
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            let one_based: usize = tok
                .parse()
                .map_err(|_| parse_error(origin, line_no, format!("not an index: {tok:?}")))?;
            if one_based < 1 || d.is_some_and(|d| one_based > d) {
                return Err(parse_error(
                    origin,
                    line_no,
                    format!("index {one_based} out of range [1, {}]", d.unwrap_or(usize::MAX)),
                ));
            }
            max_index = max_index.max(one_based);
            row.push(one_based - 1);
        }
        row.sort_unstable();
        let before = row.len();
        row.dedup();
        duplicates_removed += before - row.len();
        rows.push(row);
    }
    if duplicates_removed > 0 {
        log::warn!(
            "{}: removed {duplicates_removed} duplicate indices",
            origin.display()
        );
    }
    let d = match d {
        Some(d) => d,
        None if max_index > 0 => max_index,
        None => {
            return Err(Error::Format {
                path: origin.to_path_buf(),
                msg: "no indices to infer the dimension from".into(),
            })
        }
    };
    Ok(SparseLoad {
        matrix: SparseBinaryMatrix::new(d, rows)?,
        duplicates_removed,
    })
}

fn parse_dim_header(s: &str) -> Option<usize> {
    let rest = s.strip_prefix("d=")?;
    // the compact format appends fields after the dimension
    let num = rest.split_whitespace().next()?;
    num.parse().ok().filter(|&d| d > 0)
}

pub fn write_sparse_binary<W: Write>(mut w: W, m: &SparseBinaryMatrix) -> io::Result<()> {
    writeln!(w, "d={}", m.n_cols())?;
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|j| (j + 1).to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    decode_pgm(&bytes, path)
}

/// Decodes a P2 (ASCII) or P5 (binary) Netpbm graymap.
pub fn decode_pgm(bytes: &[u8], origin: impl AsRef<Path>) -> Result<GrayImage> {
    let origin: PathBuf = origin.as_ref().to_path_buf();
    let fmt_err = |msg: String| Error::Format {
        path: origin.clone(),
        msg,
    };
    let mut cur = PgmCursor { bytes, pos: 0 };
    let magic = cur.token().ok_or_else(|| fmt_err("empty file".into()))?;
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(fmt_err(format!(
                "unsupported magic number {:?}; only P2 and P5 are read",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "max_val"]) {
        *slot = cur
            .token()
            .and_then(|t| std::str::from_utf8(t).ok()?.parse().ok())
            .ok_or_else(|| fmt_err(format!("missing or invalid {name}")))?;
    }
    let [width, height, max_val] = header;
    if max_val == 0 || max_val > 65535 {
        return Err(fmt_err(format!("max_val {max_val} outside [1, 65535]")));
    }
    let n = width * height;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = cur.pos + 1;
        let bpp = if max_val < 256 { 1 } else { 2 };
        let raster = bytes.get(start..).unwrap_or(&[]);
        if raster.len() < n * bpp {
            return Err(fmt_err(format!(
                "truncated raster: need {} bytes, found {}",
                n * bpp,
                raster.len()
            )));
        }
        if bpp == 1 {
            pixels.extend(raster[..n].iter().map(|&b| u16::from(b)));
        } else {
            pixels.extend(
                raster[..2 * n]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]])),
            );
        }
    } else {
        for i in 0..n {
            let v = cur
                .token()
                .ok_or_else(|| fmt_err(format!("truncated raster: {i} of {n} pixels")))?;
            let v: u16 = std::str::from_utf8(v)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| fmt_err(format!("invalid pixel value at position {i}")))?;
            pixels.push(v);
        }
    }
    GrayImage::new(width, height, max_val as u16, pixels).map_err(|e| fmt_err(e.to_string()))
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    /// Next whitespace-delimited token, skipping `#` comments.
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.bytes.get(self.pos) == Some(&b'#') {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }
}

/// Encodes an image as P2 (`binary = false`) or P5.
pub fn encode_pgm(img: &GrayImage, binary: bool) -> Vec<u8> {
    let mut out = Vec::new();
    let magic = if binary { "P5" } else { "P2" };
    out.extend_from_slice(
        format!("{magic}\n{} {}\n{}\n", img.width, img.height, img.max_val).as_bytes(),
    );
    if binary {
        for &p in &img.pixels {
            if img.max_val < 256 {
                out.push(p as u8);
            } else {
                out.extend_from_slice(&p.to_be_bytes());
            }
        }
    } else {
        for row in img.pixels.chunks(img.width.max(1)) {
            let line: Vec<String> = row.iter().map(u16::to_string).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    out
}

/// Draws `count` square windows of side `window` with independently uniform
/// top-left corners (repeats allowed) and flattens each row-major into one
/// observation of dimension `window²`. Pixel values are used as-is.
pub fn sample_image_windows<R: Rng + ?Sized>(
    img: &GrayImage,
    window: usize,
    count: usize,
    rng: &mut R,
) -> Result<DenseMatrix> {
    if window == 0 || window > img.width || window > img.height {
        return Err(Error::invalid(format!(
            "window {window} does not fit a {}x{} image",
            img.width, img.height
        )));
    }
    if count == 0 {
        return Err(Error::invalid("window count must be at least 1"));
    }
    let x_positions = img.width - window + 1;
    let y_positions = img.height - window + 1;
    let d = window * window;
    let mut values = Vec::with_capacity(count * d);
    for _ in 0..count {
        let x0 = rng.random_range(0..x_positions);
        let y0 = rng.random_range(0..y_positions);
        for y in y0..y0 + window {
            let start = y * img.width + x0;
            values.extend(img.pixels[start..start + window].iter().map(|&p| f64::from(p)));
        }
    }
    Ok(DenseMatrix::from_raw(count, d, values))
}
