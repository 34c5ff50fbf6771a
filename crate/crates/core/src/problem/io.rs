use std::fs;
use std::io::Write;
use std::path::Path;

use super::EcqpProblem;
use crate::error::{LinalgError, ProblemError};
use crate::linalg::{parse_matrix, write_matrix, DenseMatrix};

/// Writes `ecqp n m l` followed by D, A, B, c, p, d in the matrix text
/// format (vectors as single columns).
pub fn write_problem<W: Write>(out: &mut W, prob: &EcqpProblem) -> std::io::Result<()> {
    writeln!(out, "ecqp {} {} {}", prob.n(), prob.m(), prob.l())?;
    write_matrix(out, &prob.hessian)?;
    write_matrix(out, &prob.a)?;
    write_matrix(out, &prob.b)?;
    for v in [&prob.c, &prob.p, &prob.d] {
        write_matrix(out, &DenseMatrix::from_columns(std::slice::from_ref(v)))?;
    }
    Ok(())
}

pub fn parse_problem(text: &str) -> Result<EcqpProblem, ProblemError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| LinalgError::Parse("empty problem file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .skip(1)
        .map(|t| t.parse().map_err(|_| LinalgError::Parse(format!("bad header '{header}'"))))
        .collect::<Result<_, _>>()?;
    if !header.starts_with("ecqp") || dims.len() != 3 {
        return Err(LinalgError::Parse(format!("bad header '{header}'")).into());
    }
    let (n, m, l) = (dims[0], dims[1], dims[2]);
    let shapes = [(n, n), (m, n), (m, l), (n, 1), (l, 1), (m, 1)];
    let rest: Vec<&str> = lines.collect();
    let mut blocks = Vec::with_capacity(6);
    let mut at = 0;
    for (rows, cols) in shapes {
        let end = at + 1 + rows;
        if end > rest.len() {
            return Err(LinalgError::Parse("truncated problem file".into()).into());
        }
        let block = parse_matrix(&rest[at..end].join("\n"))?;
        if block.rows() != rows || block.cols() != cols {
            return Err(ProblemError::Dimension(format!(
                "block is {}x{}, expected {rows}x{cols}",
                block.rows(),
                block.cols()
            )));
        }
        blocks.push(block);
        at = end;
    }
    let mut it = blocks.into_iter();
    let mut next = || it.next().expect("six blocks");
    let (hessian, a, b) = (next(), next(), next());
    let (c, p, d) = (next().column(0), next().column(0), next().column(0));
    EcqpProblem::new(hessian, a, b, c, p, d)
}

pub fn read_problem(path: &Path) -> Result<EcqpProblem, ProblemError> {
    let text = fs::read_to_string(path).map_err(|e| LinalgError::Parse(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}
