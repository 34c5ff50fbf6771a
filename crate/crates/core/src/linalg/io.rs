use std::fs;
use std::io::Write;
use std::path::Path;

use super::DenseMatrix;
use crate::error::LinalgError;

/// Writes `rows cols` on the first line, then one matrix row per line with
/// 17 significant digits so the text round-trips exactly.
pub fn write_matrix<W: Write>(out: &mut W, m: &DenseMatrix) -> std::io::Result<()> {
    writeln!(out, "{} {}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Parses the format written by [`write_matrix`]. Whitespace layout after the
/// header is free; `#` starts a comment.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix, LinalgError> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let mut dim = |what: &str| -> Result<usize, LinalgError> {
        let tok = tokens
            .next()
            .ok_or_else(|| LinalgError::Parse(format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| LinalgError::Parse(format!("bad {what} '{tok}'")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let data = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| LinalgError::Parse(format!("bad number '{t}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if data.len() != rows * cols {
        return Err(LinalgError::Parse(format!(
            "expected {} entries for {rows}x{cols}, found {}",
            rows * cols,
            data.len()
        )));
    }
    DenseMatrix::from_row_major(rows, cols, data)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, LinalgError> {
    let text = fs::read_to_string(path)
        .map_err(|e| LinalgError::Parse(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = Rng::seed_from_u64(5);
        let m = rng.gaussian_matrix(4, 3).scale(1e-7);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let back = parse_matrix(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn comments_and_free_layout() {
        let m = parse_matrix("# test\n2 2\n1 2 3\n4 # trailing\n").unwrap();
        assert_eq!(m.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn wrong_count_and_non_finite_rejected() {
        assert!(matches!(parse_matrix("2 2\n1 2 3"), Err(LinalgError::Parse(_))));
        assert!(matches!(parse_matrix("1 1\nnan"), Err(LinalgError::NonFinite(0, 0))));
    }
}
