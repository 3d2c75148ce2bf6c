//! Plain-text triplet format: `# n <n>` and `# offset <v>` header lines,
//! then one `i j value` line per entry. Other `#` lines are comments.

use std::io::{BufRead, Write};

use super::{QuboError, QuboMatrix};
use crate::scalar::Scalar;

pub fn write_triplets<T: Scalar, W: Write>(q: &QuboMatrix<T>, mut w: W) -> Result<(), QuboError> {
    writeln!(w, "# n {}", q.n())?;
    writeln!(w, "# offset {}", q.offset())?;
    for (i, j, v) in q.entries() {
        writeln!(w, "{i} {j} {v}")?;
    }
    Ok(())
}

/// Reads the triplet format. Without a `# n` header the variable count is
/// one past the largest index.
pub fn read_triplets<T: Scalar, R: BufRead>(r: R) -> Result<QuboMatrix<T>, QuboError> {
    let mut n: Option<usize> = None;
    let mut offset = T::zero();
    let mut triplets = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let err = |msg: &str| QuboError::Parse { line: lineno, msg: msg.to_string() };
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(comment) = t.strip_prefix('#') {
            let mut parts = comment.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("offset"), Some(v)) => {
                    offset = T::lit(v.parse::<f64>().map_err(|_| err("bad offset"))?);
                }
                (Some("n"), Some(v)) => n = Some(v.parse().map_err(|_| err("bad variable count"))?),
                _ => {}
            }
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err("expected `i j value`"));
        }
        let i: usize = fields[0].parse().map_err(|_| err("bad row index"))?;
        let j: usize = fields[1].parse().map_err(|_| err("bad column index"))?;
        let v: f64 = fields[2].parse().map_err(|_| err("bad value"))?;
        triplets.push((i, j, T::lit(v)));
    }
    let n = n.unwrap_or_else(|| triplets.iter().map(|t| t.0.max(t.1) + 1).max().unwrap_or(0));
    QuboMatrix::from_triplets(n, offset, triplets)
}
