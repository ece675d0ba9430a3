use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use subspace_core::matrixio::{
    load_dense_csv, load_pgm, load_sparse_binary, load_sparse_index_lines, sample_image_windows,
};
use subspace_core::{seed, Data, DenseMatrix, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Sparse,
    Pgm,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input file.
    #[arg(long, short)]
    pub input: PathBuf,

    /// Input format; inferred from the extension when omitted (.csv, .pgm,
    /// anything else is sparse).
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// The CSV file starts with a header line.
    #[arg(long)]
    pub header: bool,

    /// Sparse file has no `d=<int>` header line (raw index lists).
    #[arg(long)]
    pub headerless: bool,

    /// Dimension for headerless sparse files [default: largest index].
    #[arg(long)]
    pub dim: Option<usize>,

    /// Remove all-zero columns of sparse data after loading.
    #[arg(long)]
    pub drop_empty_columns: bool,
}

/// What an input file decodes to.
pub enum Loaded {
    Data(Data),
    Image(GrayImage),
}

impl InputArgs {
    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| {
            match self.input.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
                Some(e) if e == "csv" => Format::Csv,
                Some(e) if e == "pgm" => Format::Pgm,
                _ => Format::Sparse,
            }
        })
    }

    pub fn load(&self) -> Result<Loaded> {
        let path = &self.input;
        let ctx = || format!("reading {}", path.display());
        Ok(match self.format() {
            Format::Csv => Loaded::Data(Data::Dense(load_dense_csv(path, self.header).with_context(ctx)?)),
            Format::Pgm => Loaded::Image(load_pgm(path).with_context(ctx)?),
            Format::Sparse => {
                let load = if self.headerless {
                    load_sparse_index_lines(path, self.dim)
                } else {
                    load_sparse_binary(path)
                }
                .with_context(ctx)?;
                let mut m = load.matrix;
                if self.drop_empty_columns {
                    let (kept, cols) = m.drop_empty_columns();
                    log::info!("kept {} of {} columns", cols.len(), m.n_cols());
                    m = kept;
                }
                Loaded::Data(Data::Sparse(m))
            }
        })
    }

    /// Loads tabular data; an image becomes a single row holding all its
    /// pixels.
    pub fn load_rows(&self) -> Result<Data> {
        Ok(match self.load()? {
            Loaded::Data(d) => d,
            Loaded::Image(img) => {
                let v = img.to_vector();
                Data::Dense(DenseMatrix::new(1, v.len(), v)?)
            }
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Window side length when the input is an image.
    #[arg(long, default_value_t = 50)]
    pub window: usize,

    /// Windows sampled when the input is an image.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
}

/// Loads tabular data, or samples windows when the input is an image.
pub fn load_observations(input: &InputArgs, windows: &WindowArgs, seed_value: u64) -> Result<Data> {
    Ok(match input.load()? {
        Loaded::Data(d) => d,
        Loaded::Image(img) => {
            let mut rng = seed::rng(seed::child_seed(seed_value, "windows", windows.window, 0));
            Data::Dense(sample_image_windows(&img, windows.window, windows.count, &mut rng)?)
        }
    })
}

pub fn create_output(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn finish<W: Write>(mut w: W, path: &Path) -> Result<()> {
    w.flush().with_context(|| format!("writing {}", path.display()))
}
