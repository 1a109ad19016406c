//! Plain-text format for [`SqueezeParam`] and [`GaussianSpec`].
//!
//! One `key = value` per line, `#` starts a comment, blank lines are ignored.
//! Complex numbers are written `re+imi` / `re-imi` (a bare real or a bare
//! `imi` is also accepted). Vectors are comma separated; matrices are row-major
//! with rows separated by `;`.
//!
//! ```text
//! m = 2
//! N = 0.5
//! theta = 0.3+0i, 0-0.1i
//! A = 0+0i, 0.2+0i; -0.2+0i, 0+0i
//! S = 1+0i, 0+0i; 0+0i, 1+0i
//! ```
//!
//! Recognized keys are `m`, `N`, `theta`, `A` and `S`. A squeezing file needs
//! only `m` plus optional `A` and `S` (missing blocks are zero).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{GaussianSpec, SqueezeParam};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::scalar::{cplx, Cplx, Real};

fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    s.parse::<f64>().ok()
}

/// Parses `re+imi`, `re-imi`, `re` or `imi`.
pub fn parse_complex(text: &str) -> Option<Cplx<f64>> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return parse_real(&s).map(|re| cplx(re, 0.0));
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = parse_real(&body[..k])?;
            let im = match &body[k..] {
                "+" => 1.0,
                "-" => -1.0,
                rest => parse_real(rest)?,
            };
            Some(cplx(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                rest => parse_real(rest)?,
            };
            Some(cplx(0.0, im))
        }
    }
}

/// Inverse of [`parse_complex`]; round-trips `f64` values exactly.
pub fn format_complex<T: Real>(z: Cplx<T>) -> String {
    let (re, im) = (z.re.to_f64_lossy(), z.im.to_f64_lossy());
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{re:?}{sign}{:?}i", im.abs())
}

fn entries(line: usize, text: &str) -> Result<Vec<Cplx<f64>>> {
    text.split(',')
        .map(|tok| {
            parse_complex(tok).ok_or_else(|| Error::Parse {
                line,
                msg: format!("bad complex number {:?}", tok.trim()),
            })
        })
        .collect()
}

fn matrix<T: Real>(line: usize, text: &str, m: usize) -> Result<CMatrix<T>> {
    let rows: Vec<&str> = text.split(';').collect();
    if rows.len() != m {
        return Err(Error::Parse {
            line,
            msg: format!("expected {m} rows, found {}", rows.len()),
        });
    }
    let mut out = CMatrix::<T>::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        let vals = entries(line, row)?;
        if vals.len() != m {
            return Err(Error::Parse {
                line,
                msg: format!("row {} has {} entries, expected {m}", i + 1, vals.len()),
            });
        }
        for (j, z) in vals.into_iter().enumerate() {
            out[(i, j)] = cplx(T::lit(z.re), T::lit(z.im));
        }
    }
    Ok(out)
}

struct Fields {
    map: BTreeMap<String, (usize, String)>,
}

impl Fields {
    fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if !allowed.contains(&key) {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key {key:?}"),
                });
            }
            if map
                .insert(key.to_string(), (line, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Self { map })
    }

    fn modes(&self) -> Result<usize> {
        let (line, v) = self.map.get("m").ok_or(Error::Parse {
            line: 0,
            msg: "missing key `m`".into(),
        })?;
        match v.parse::<usize>() {
            Ok(m) if m >= 1 => Ok(m),
            _ => Err(Error::Parse {
                line: *line,
                msg: format!("m must be a positive integer, got {v:?}"),
            }),
        }
    }

    fn squeeze<T: Real>(&self, m: usize) -> Result<SqueezeParam<T>> {
        let block = |key: &str| match self.map.get(key) {
            Some((line, v)) => matrix::<T>(*line, v, m),
            None => Ok(CMatrix::zeros(m, m)),
        };
        SqueezeParam::new(block("A")?, block("S")?)
    }
}

pub fn parse_squeeze_param<T: Real>(text: &str) -> Result<SqueezeParam<T>> {
    let fields = Fields::parse(text, &["m", "A", "S"])?;
    let m = fields.modes()?;
    fields.squeeze(m)
}

pub fn parse_gaussian_spec<T: Real>(text: &str) -> Result<GaussianSpec<T>> {
    let fields = Fields::parse(text, &["m", "N", "theta", "A", "S"])?;
    let m = fields.modes()?;
    let theta = match fields.map.get("theta") {
        Some((line, v)) => {
            let vals = entries(*line, v)?;
            if vals.len() != m {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("theta has {} entries, expected {m}", vals.len()),
                });
            }
            CVector::from_iterator(
                m,
                vals.into_iter().map(|z| cplx(T::lit(z.re), T::lit(z.im))),
            )
        }
        None => CVector::zeros(m),
    };
    let mixture = match fields.map.get("N") {
        Some((line, v)) => parse_real(v).ok_or_else(|| Error::Parse {
            line: *line,
            msg: format!("bad real number {v:?}"),
        })?,
        None => 0.0,
    };
    GaussianSpec::new(theta, fields.squeeze(m)?, T::lit(mixture))
}

fn write_matrix<T: Real>(out: &mut String, key: &str, a: &CMatrix<T>) {
    let rows: Vec<String> = a
        .row_iter()
        .map(|r| {
            r.iter()
                .map(|z| format_complex(*z))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect();
    let _ = writeln!(out, "{key} = {}", rows.join("; "));
}

pub fn write_squeeze_param<T: Real>(eta: &SqueezeParam<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "m = {}", eta.modes());
    write_matrix(&mut out, "A", eta.anti_hermitian());
    write_matrix(&mut out, "S", eta.symmetric());
    out
}

pub fn write_gaussian_spec<T: Real>(spec: &GaussianSpec<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "m = {}", spec.modes());
    let _ = writeln!(out, "N = {:?}", spec.mixture.to_f64_lossy());
    let theta: Vec<String> = spec.theta.iter().map(|z| format_complex(*z)).collect();
    let _ = writeln!(out, "theta = {}", theta.join(", "));
    write_matrix(&mut out, "A", spec.eta.anti_hermitian());
    write_matrix(&mut out, "S", spec.eta.symmetric());
    out
}
