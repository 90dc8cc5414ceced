//! Matrix Market interchange for [`SparseOperator`].
//!
//! Files use the standard `coordinate complex general` layout with two
//! structured comment lines right after the banner:
//!
//! ```text
//! %%MatrixMarket matrix coordinate complex general
//! %% basis-tag: z2:ball:3
//! %% boundary-mask: 6 12
//! 13 13 24
//! 1 2 1 0
//! ...
//! ```
//!
//! All indices in the file — coordinates and mask entries — are 1-based.
//! Values are written with Rust's shortest round-trip float formatting, so a
//! write/read cycle reproduces the operator bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{OpError, SparseOperator};

const BANNER: &str = "%%MatrixMarket matrix coordinate complex general";

pub fn write_matrix_market<W: Write>(op: &SparseOperator, out: &mut W) -> Result<(), OpError> {
    writeln!(out, "{BANNER}")?;
    writeln!(out, "%% basis-tag: {}", op.basis_tag())?;
    let mask: Vec<String> = op.boundary_mask().iter().map(|c| (c + 1).to_string()).collect();
    writeln!(out, "%% boundary-mask: {}", mask.join(" "))?;
    writeln!(out, "{} {} {}", op.dim(), op.dim(), op.nnz())?;
    for &(r, c, v) in op.entries() {
        writeln!(out, "{} {} {} {}", r + 1, c + 1, v.re, v.im)?;
    }
    Ok(())
}

pub fn write_matrix_market_file(op: &SparseOperator, path: impl AsRef<Path>) -> Result<(), OpError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_matrix_market(op, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(input: R) -> Result<SparseOperator, OpError> {
    let parse = |line: usize, msg: &str| OpError::Parse { line, msg: msg.to_string() };
    let mut lines = input.lines().enumerate();

    let banner = match lines.next() {
        Some((_, line)) => line.map_err(OpError::Io)?,
        None => return Err(parse(1, "empty file")),
    };
    if !banner.trim().eq_ignore_ascii_case(BANNER) {
        return Err(parse(1, &format!("expected `{BANNER}`, found `{}`", banner.trim())));
    }

    let mut basis_tag = String::new();
    let mut mask: Vec<u32> = Vec::new();
    let mut size: Option<(u32, u32, usize)> = None;
    let mut triplets: Vec<(u32, u32, Complex64)> = Vec::new();

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(OpError::Io)?;
        let text = line.trim();
        if let Some(rest) = text.strip_prefix("%%") {
            let rest = rest.trim_start();
            if let Some(tag) = rest.strip_prefix("basis-tag:") {
                basis_tag = tag.trim().to_string();
            } else if let Some(cols) = rest.strip_prefix("boundary-mask:") {
                for tok in cols.split_whitespace() {
                    let v: u32 = tok
                        .parse()
                        .map_err(|_| parse(lineno, &format!("bad mask index `{tok}`")))?;
                    if v == 0 {
                        return Err(parse(lineno, "mask indices are 1-based"));
                    }
                    mask.push(v - 1);
                }
            }
            continue;
        }
        if text.starts_with('%') || text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse(lineno, "size line must be `rows cols nnz`"));
                }
                let rows: u32 =
                    fields[0].parse().map_err(|_| parse(lineno, "bad row count"))?;
                let cols: u32 =
                    fields[1].parse().map_err(|_| parse(lineno, "bad column count"))?;
                let nnz: usize =
                    fields[2].parse().map_err(|_| parse(lineno, "bad entry count"))?;
                if rows != cols {
                    return Err(parse(lineno, "operators are square; rows != cols"));
                }
                size = Some((rows, cols, nnz));
            }
            Some((rows, _, nnz)) => {
                if triplets.len() == nnz {
                    return Err(parse(lineno, "more entries than the size line announced"));
                }
                if fields.len() != 4 {
                    return Err(parse(lineno, "entry line must be `row col re im`"));
                }
                let r: u32 = fields[0].parse().map_err(|_| parse(lineno, "bad row index"))?;
                let c: u32 = fields[1].parse().map_err(|_| parse(lineno, "bad column index"))?;
                let re: f64 = fields[2].parse().map_err(|_| parse(lineno, "bad real part"))?;
                let im: f64 = fields[3].parse().map_err(|_| parse(lineno, "bad imaginary part"))?;
                if r == 0 || c == 0 || r > rows || c > rows {
                    return Err(parse(lineno, &format!("index ({r}, {c}) out of range (1-based)")));
                }
                triplets.push((r - 1, c - 1, Complex64::new(re, im)));
            }
        }
    }

    let (dim, _, nnz) = size.ok_or_else(|| parse(1, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(parse(
            1,
            &format!("size line announced {nnz} entries, file has {}", triplets.len()),
        ));
    }
    SparseOperator::from_triplets(dim, triplets, mask, basis_tag)
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<SparseOperator, OpError> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ball, MarkedGroup};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn round_trip(op: &SparseOperator) -> SparseOperator {
        let mut buf = Vec::new();
        write_matrix_market(op, &mut buf).unwrap();
        read_matrix_market(buf.as_slice()).unwrap()
    }

    #[test]
    fn write_then_read_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let mut triplets = Vec::new();
            for col in 0..6u32 {
                for row in 0..6u32 {
                    if rng.random_range(0..4) == 0 {
                        triplets.push((
                            row,
                            col,
                            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                        ));
                    }
                }
            }
            let op = SparseOperator::from_triplets(6, triplets, [0, 5], "grid:6").unwrap();
            assert_eq!(round_trip(&op), op);
        }
    }

    #[test]
    fn zero_operator_writes_a_header_only_file() {
        let op = SparseOperator::zero(4, "empty");
        let mut buf = Vec::new();
        write_matrix_market(&op, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "4 4 0");
        assert_eq!(round_trip(&op), op);
    }

    #[test]
    fn truncated_shift_on_integer_ball_has_six_entries() {
        // On the radius-3 ball of the integers only s^3 is pushed outside,
        // so right translation keeps 6 of 7 columns.
        let g = MarkedGroup::parse("<s|>").unwrap();
        let w = ball(&g, 3, 10_000).unwrap();
        let s = g.generator(0);
        let images: Vec<Option<u32>> = (0..w.len() as u32)
            .map(|v| w.letter_image(v, s.word()[0]))
            .collect();
        let op = SparseOperator::basis_map(&images, "z:ball:3").unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&op, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data_lines = text.lines().count() - 4;
        assert_eq!(data_lines, 6);
        let mask_line = text.lines().nth(2).unwrap();
        assert_eq!(op.boundary_mask().len(), 1);
        let masked = op.boundary_mask().iter().next().unwrap();
        assert_eq!(w.element(*masked).word(), &[1, 1, 1]);
        assert_eq!(mask_line, format!("%% boundary-mask: {}", masked + 1));
    }

    #[test]
    fn malformed_files_report_line_numbers() {
        let input = "%%MatrixMarket matrix coordinate complex general\n3 3 1\n1 2 nan-ish 0\n";
        match read_matrix_market(input.as_bytes()) {
            Err(OpError::Parse { line: 3, msg }) => assert!(msg.contains("real part")),
            other => panic!("expected parse error on line 3, got {other:?}"),
        }
        let input = "%%MatrixMarket matrix coordinate real general\n";
        assert!(matches!(read_matrix_market(input.as_bytes()), Err(OpError::Parse { line: 1, .. })));
        let input = "%%MatrixMarket matrix coordinate complex general\n2 2 2\n1 1 1 0\n";
        assert!(matches!(read_matrix_market(input.as_bytes()), Err(OpError::Parse { .. })));
    }

    #[test]
    fn file_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("op.mtx");
        let op = SparseOperator::identity(3, "disk").with_mask([1]);
        write_matrix_market_file(&op, &path).unwrap();
        assert_eq!(read_matrix_market_file(&path).unwrap(), op);
    }
}
