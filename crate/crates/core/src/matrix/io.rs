//! Matrix files.
//!
//! Binary layout (little endian): magic `SMZL`, `u32` version, `u64` rows,
//! `u64` cols, `u64` nnz, then nnz records `(u32 row, u32 col, i32 value)`
//! sorted by `(row, col)`.
//!
//! The text layout follows MatrixMarket coordinate files:
//!
//! ```text
//! %%MatrixMarket matrix coordinate integer general
//! %%field: integer
//! 2 2 2
//! 1 1 1
//! 2 2 1
//! ```
//!
//! Indices are 1-based. Both readers reject zero or 32-bit-overflowing
//! coefficients, out-of-range indices, unsorted and duplicate entries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{CooMatrix, SparseMatrix};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SMZL";
pub const VERSION: u32 = 1;

const TEXT_BANNER: &str = "%%MatrixMarket matrix coordinate integer general";
const TEXT_FIELD: &str = "%%field: integer";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileEncoding {
    Binary,
    Text,
}

impl FileEncoding {
    /// `.mtx` and `.txt` are text, everything else binary.
    pub fn from_path(path: &Path) -> FileEncoding {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") | Some("txt") => FileEncoding::Text,
            _ => FileEncoding::Binary,
        }
    }
}

/// Reads either encoding, detected from the first bytes.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<CooMatrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

/// Writes with the encoding implied by the file extension.
pub fn store_matrix(m: &CooMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(m, &mut w, FileEncoding::from_path(path))?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: BufRead>(mut r: R) -> Result<CooMatrix> {
    let head = r.fill_buf()?;
    if head.starts_with(b"%%") {
        read_text(r)
    } else {
        read_binary(r)
    }
}

pub fn write_matrix<W: Write>(m: &CooMatrix, w: &mut W, encoding: FileEncoding) -> Result<()> {
    match encoding {
        FileEncoding::Binary => {
            w.write_all(MAGIC)?;
            w.write_all(&VERSION.to_le_bytes())?;
            w.write_all(&(m.n_rows() as u64).to_le_bytes())?;
            w.write_all(&(m.n_cols() as u64).to_le_bytes())?;
            w.write_all(&(m.nnz() as u64).to_le_bytes())?;
            let mut rec = [0u8; 12];
            for i in 0..m.nnz() {
                rec[0..4].copy_from_slice(&m.row_id()[i].to_le_bytes());
                rec[4..8].copy_from_slice(&m.col_id()[i].to_le_bytes());
                rec[8..12].copy_from_slice(&m.data()[i].to_le_bytes());
                w.write_all(&rec)?;
            }
        }
        FileEncoding::Text => {
            writeln!(w, "{TEXT_BANNER}")?;
            writeln!(w, "{TEXT_FIELD}")?;
            writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
            for i in 0..m.nnz() {
                writeln!(w, "{} {} {}", m.row_id()[i] + 1, m.col_id()[i] + 1, m.data()[i])?;
            }
        }
    }
    Ok(())
}

/// Checks dimensions fit the 32-bit index space.
fn check_dims(n_rows: u64, n_cols: u64, nnz: u64) -> Result<(usize, usize, usize)> {
    const LIMIT: u64 = 1 << 32;
    if n_rows > LIMIT || n_cols > LIMIT {
        return Err(Error::MalformedHeader(format!(
            "dimensions {n_rows}x{n_cols} exceed 32-bit indices"
        )));
    }
    if (n_rows as u128) * (n_cols as u128) < nnz as u128 {
        return Err(Error::MalformedHeader(format!(
            "{nnz} nonzeros cannot fit in a {n_rows}x{n_cols} matrix"
        )));
    }
    Ok((n_rows as usize, n_cols as usize, nnz as usize))
}

/// Incremental validation of the record stream.
struct Validator {
    n_rows: u64,
    n_cols: u64,
    prev: Option<(u64, u64)>,
    entries: Vec<(u32, u32, i32)>,
}

impl Validator {
    fn new(n_rows: usize, n_cols: usize, nnz: usize) -> Self {
        Validator {
            n_rows: n_rows as u64,
            n_cols: n_cols as u64,
            prev: None,
            // do not trust a header-declared size for the allocation
            entries: Vec::with_capacity(nnz.min(1 << 24)),
        }
    }

    fn push(&mut self, row: u64, col: u64, value: i64) -> Result<()> {
        let entry = self.entries.len();
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::IndexOutOfRange {
                entry,
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        if value == 0 {
            return Err(Error::ZeroCoefficient(entry));
        }
        if value.unsigned_abs() >= 1 << 31 {
            return Err(Error::CoefficientOutOfRange { entry, value });
        }
        if let Some(prev) = self.prev {
            match prev.cmp(&(row, col)) {
                std::cmp::Ordering::Equal => return Err(Error::Duplicate { row, col }),
                std::cmp::Ordering::Greater => return Err(Error::Unsorted(entry)),
                std::cmp::Ordering::Less => {}
            }
        }
        self.prev = Some((row, col));
        self.entries.push((row as u32, col as u32, value as i32));
        Ok(())
    }

    fn finish(self, n_rows: usize, n_cols: usize) -> CooMatrix {
        CooMatrix::from_sorted_unchecked(n_rows, n_cols, &self.entries)
    }
}

fn read_binary<R: Read>(mut r: R) -> Result<CooMatrix> {
    let mut header = [0u8; 32];
    read_exact_or(&mut r, &mut header, || {
        Error::MalformedHeader("truncated header".into())
    })?;
    if &header[0..4] != MAGIC {
        return Err(Error::MalformedHeader("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::MalformedHeader(format!("unsupported version {version}")));
    }
    let field = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().unwrap());
    let (n_rows, n_cols, nnz) = check_dims(field(8), field(16), field(24))?;

    let mut v = Validator::new(n_rows, n_cols, nnz);
    let mut rec = [0u8; 12];
    for i in 0..nnz {
        read_exact_or(&mut r, &mut rec, || Error::MalformedRecord {
            line: i,
            reason: "truncated record".into(),
        })?;
        let row = u32::from_le_bytes(rec[0..4].try_into().unwrap());
        let col = u32::from_le_bytes(rec[4..8].try_into().unwrap());
        let value = i32::from_le_bytes(rec[8..12].try_into().unwrap());
        v.push(row as u64, col as u64, value as i64)?;
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::MalformedRecord {
            line: nnz,
            reason: "trailing bytes after the last record".into(),
        });
    }
    Ok(v.finish(n_rows, n_cols))
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], err: impl FnOnce() -> Error) -> Result<()> {
    match r.read_exact(buf) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Err(err()),
        Err(e) => Err(e.into()),
    }
}

fn read_text<R: BufRead>(r: R) -> Result<CooMatrix> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next_line = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            None => Ok(None),
            Some((i, l)) => Ok(Some((i, l?))),
        }
    };

    match next_line()? {
        Some((_, l)) if l.trim_end().eq_ignore_ascii_case(TEXT_BANNER) => {}
        _ => return Err(Error::MalformedHeader(format!("expected `{TEXT_BANNER}`"))),
    }
    let mut saw_field = false;
    let size_line = loop {
        match next_line()? {
            None => return Err(Error::MalformedHeader("missing size line".into())),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) if l.starts_with('%') => {
                if l.trim_end() == TEXT_FIELD {
                    saw_field = true;
                } else if l.starts_with("%%field:") {
                    return Err(Error::MalformedHeader(format!("unsupported `{}`", l.trim_end())));
                }
            }
            Some((_, l)) => break l,
        }
    };
    if !saw_field {
        return Err(Error::MalformedHeader(format!("missing `{TEXT_FIELD}`")));
    }
    let dims: Vec<u64> = size_line
        .split_whitespace()
        .map(|t| t.parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::MalformedHeader(format!("bad size line `{size_line}`")))?;
    if dims.len() != 3 {
        return Err(Error::MalformedHeader(format!("bad size line `{size_line}`")));
    }
    let (n_rows, n_cols, nnz) = check_dims(dims[0], dims[1], dims[2])?;

    let mut v = Validator::new(n_rows, n_cols, nnz);
    while v.entries.len() < nnz {
        let (line, text) = next_line()?.ok_or_else(|| Error::MalformedRecord {
            line: 0,
            reason: format!("expected {nnz} entries, found {}", v.entries.len()),
        })?;
        if text.trim().is_empty() || text.starts_with('%') {
            continue;
        }
        let bad = |reason: &str| Error::MalformedRecord {
            line,
            reason: reason.to_string(),
        };
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(bad("expected `row col value`"));
        }
        let row: u64 = tokens[0].parse().map_err(|_| bad("bad row index"))?;
        let col: u64 = tokens[1].parse().map_err(|_| bad("bad column index"))?;
        let value: i64 = tokens[2].parse().map_err(|_| bad("bad value"))?;
        if row == 0 || col == 0 {
            return Err(bad("indices are 1-based"));
        }
        v.push(row - 1, col - 1, value)?;
    }
    while let Some((line, text)) = next_line()? {
        if !text.trim().is_empty() {
            return Err(Error::MalformedRecord {
                line,
                reason: "entries beyond the declared count".into(),
            });
        }
    }
    Ok(v.finish(n_rows, n_cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_ffs_like, GeneratorParams};

    fn binary(m: &CooMatrix) -> Vec<u8> {
        let mut out = Vec::new();
        write_matrix(m, &mut out, FileEncoding::Binary).unwrap();
        out
    }

    fn binary_file(n_rows: u64, n_cols: u64, records: &[(u32, u32, i32)]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&n_rows.to_le_bytes());
        out.extend_from_slice(&n_cols.to_le_bytes());
        out.extend_from_slice(&(records.len() as u64).to_le_bytes());
        for &(r, c, v) in records {
            out.extend_from_slice(&r.to_le_bytes());
            out.extend_from_slice(&c.to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    #[test]
    fn identity_file() {
        let bytes = binary_file(2, 2, &[(0, 0, 1), (1, 1, 1)]);
        let m = read_matrix(&bytes[..]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(binary(&m), bytes);
    }

    #[test]
    fn distinct_errors() {
        let e = |b: Vec<u8>| read_matrix(&b[..]).unwrap_err();
        assert!(matches!(
            e(binary_file(2, 2, &[(0, 2, 1)])),
            Error::IndexOutOfRange { col: 2, .. }
        ));
        assert!(matches!(
            e(binary_file(2, 2, &[(1, 0, 1), (0, 0, 1)])),
            Error::Unsorted(1)
        ));
        assert!(matches!(
            e(binary_file(2, 2, &[(0, 0, 1), (0, 0, 2)])),
            Error::Duplicate { .. }
        ));
        assert!(matches!(
            e(binary_file(2, 2, &[(0, 0, i32::MIN)])),
            Error::CoefficientOutOfRange { .. }
        ));
        assert!(matches!(e(binary_file(2, 2, &[(0, 0, 0)])), Error::ZeroCoefficient(0)));
        let mut bad_magic = binary_file(2, 2, &[]);
        bad_magic[0] = b'X';
        assert!(matches!(e(bad_magic), Error::MalformedHeader(_)));
        let mut truncated = binary_file(2, 2, &[(0, 0, 1)]);
        truncated.pop();
        assert!(matches!(e(truncated), Error::MalformedRecord { .. }));
        let mut trailing = binary_file(2, 2, &[(0, 0, 1)]);
        trailing.push(0);
        assert!(matches!(e(trailing), Error::MalformedRecord { .. }));
    }

    #[test]
    fn text_format() {
        let text = "%%MatrixMarket matrix coordinate integer general\n%%field: integer\n2 3 2\n1 1 5\n2 3 -1\n";
        let m = read_matrix(text.as_bytes()).unwrap();
        assert_eq!(m.triplets(), vec![(0, 0, 5), (1, 2, -1)]);
        let mut out = Vec::new();
        write_matrix(&m, &mut out, FileEncoding::Text).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);

        let wide = "%%MatrixMarket matrix coordinate integer general\n%%field: integer\n1 1 1\n1 1 2147483648\n";
        assert!(matches!(
            read_matrix(wide.as_bytes()),
            Err(Error::CoefficientOutOfRange { .. })
        ));
        let oob = "%%MatrixMarket matrix coordinate integer general\n%%field: integer\n1 1 1\n1 2 1\n";
        assert!(matches!(
            read_matrix(oob.as_bytes()),
            Err(Error::IndexOutOfRange { .. })
        ));
        let no_field = "%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 1\n";
        assert!(matches!(
            read_matrix(no_field.as_bytes()),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn generator_round_trip() {
        let m = gen_ffs_like(&GeneratorParams::ffs_like(200, 10, 5)).unwrap();
        let bytes = binary(&m);
        let back = read_matrix(&bytes[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(binary(&back), bytes);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        store_matrix(&m, &path).unwrap();
        assert_eq!(load_matrix(&path).unwrap(), m);
    }
}
