//! Plain-text matrix dumps for debugging.
//!
//! Header line `m n d`, then one line per row with `re im` pairs separated by
//! spaces, row-major. States add a `# truncation_loss` line after the header.

use std::fmt::Write as _;

use super::{FockConfig, TruncatedOperator, TruncatedState};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cplx, Real};

fn write_matrix<T: Real>(out: &mut String, a: &CMatrix<T>) {
    for r in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols())
            .map(|c| {
                let z = a[(r, c)];
                format!("{:e} {:e}", z.re.to_f64_lossy(), z.im.to_f64_lossy())
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn dump_operator<T: Real>(op: &TruncatedOperator<T>) -> String {
    let c = op.config;
    let mut out = format!("{} {} {}\n", c.m, c.n, c.d);
    write_matrix(&mut out, &op.entries);
    out
}

pub fn dump_state<T: Real>(state: &TruncatedState<T>) -> String {
    let c = state.config;
    let mut out = format!("{} {} {}\n", c.m, c.n, c.d);
    let _ = writeln!(
        out,
        "# truncation_loss {:e}",
        state.truncation_loss.to_f64_lossy()
    );
    write_matrix(&mut out, &state.entries);
    out
}

/// Reads either dump back as an operator.
pub fn parse_dump<T: Real>(text: &str) -> Result<TruncatedOperator<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty dump".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse().map_err(|_| Error::Parse {
                line: 1,
                msg: format!("bad header {header:?}"),
            })
        })
        .collect::<Result<_>>()?;
    let [m, n, d] = dims[..] else {
        return Err(Error::Parse {
            line: 1,
            msg: "header must be `m n d`".into(),
        });
    };
    let config = FockConfig::new(m, n, d)?;
    let dim = config.require_dense()?;
    let mut entries = CMatrix::<T>::zeros(dim, dim);
    let mut rows = 0;
    for (k, line) in lines {
        if rows == dim {
            return Err(Error::Parse {
                line: k + 1,
                msg: "too many rows".into(),
            });
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| Error::Parse {
                    line: k + 1,
                    msg: format!("bad number {t:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if vals.len() != 2 * dim {
            return Err(Error::Parse {
                line: k + 1,
                msg: format!("expected {} numbers", 2 * dim),
            });
        }
        for c in 0..dim {
            entries[(rows, c)] = cplx(T::lit(vals[2 * c]), T::lit(vals[2 * c + 1]));
        }
        rows += 1;
    }
    if rows != dim {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {dim} rows, got {rows}"),
        });
    }
    TruncatedOperator::new(config, entries)
}
