//! Plain-text Gram matrix format.
//!
//! ```text
//! N
//! K_00 K_01 … (N lines of N values, 17 significant digits)
//! digest=<hex> kernel=<json KernelConfig>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use qsar_kernel_core::{GramMatrix, KernelConfig};

use crate::error::{AppError, AppResult, StageExt};

const STAGE: &str = "gram-io";

pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_gram<W: Write>(w: W, g: &GramMatrix) -> AppResult<()> {
    let mut w = BufWriter::new(w);
    let io = |e| AppError::io(STAGE, "<gram output>", e);
    writeln!(w, "{}", g.size()).map_err(io)?;
    for i in 0..g.size() {
        let line: Vec<String> = g.row(i).iter().map(|v| fmt17(*v)).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    let kernel = serde_json::to_string(g.kernel_config())
        .map_err(|e| AppError::invalid(STAGE, e.to_string()))?;
    writeln!(w, "digest={} kernel={}", g.dataset_digest(), kernel).map_err(io)?;
    w.flush().map_err(io)
}

pub fn read_gram<R: Read>(r: R) -> AppResult<GramMatrix> {
    let bad = |m: String| AppError::invalid(STAGE, m);
    let mut lines = BufReader::new(r).lines();
    let mut next = |what: &str| -> AppResult<String> {
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(AppError::io(STAGE, "<gram input>", e)),
            None => Err(AppError::invalid(STAGE, format!("unexpected end of file before {what}"))),
        }
    };
    let n: usize = next("size")?
        .trim()
        .parse()
        .map_err(|_| bad("first line must be the matrix size".into()))?;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        let line = next("matrix row")?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("row {i}: unparsable value")))?;
        if row.len() != n {
            return Err(bad(format!("row {i} has {} values, expected {n}", row.len())));
        }
        entries.extend(row);
    }
    let footer = next("footer")?;
    let rest = footer
        .strip_prefix("digest=")
        .ok_or_else(|| bad("footer must start with digest=".into()))?;
    let (digest, kernel) = rest
        .split_once(" kernel=")
        .ok_or_else(|| bad("footer lacks kernel=".into()))?;
    let kernel: KernelConfig =
        serde_json::from_str(kernel).map_err(|e| bad(format!("kernel config: {e}")))?;
    kernel.validate().stage(STAGE)?;
    GramMatrix::from_entries(n, entries, kernel, digest.to_string()).stage(STAGE)
}

pub fn write_gram_path(path: &Path, g: &GramMatrix) -> AppResult<()> {
    let f = File::create(path).map_err(|e| AppError::io(STAGE, path, e))?;
    write_gram(f, g)
}

pub fn read_gram_path(path: &Path) -> AppResult<GramMatrix> {
    let f = File::open(path).map_err(|e| AppError::io(STAGE, path, e))?;
    read_gram(f)
}
