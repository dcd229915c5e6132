//! Plain-text problem files.
//!
//! ```text
//! # comment
//! dd2d L_n L_m
//! alpha e w n s
//! omega n0 n1 m0 m1        (optional; default is the lattice minus its frame)
//! f n m value              (sparse, default 0, sites of Ω only)
//! g n m value              (sparse, default 0, sites of ∂Ω only)
//! ```
//!
//! The 1D variant starts with `dd1d L`, uses `alpha p m`, `omega n0 n1` and
//! drops the `m` coordinate from `f`/`g` lines.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::stencil::{GridProblem, Rect, Site, StencilWeights};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn fields<T: std::str::FromStr>(line: usize, tokens: &[&str], expected: usize, what: &str) -> Result<Vec<T>> {
    if tokens.len() != expected {
        return Err(parse_err(
            line,
            format!("`{what}` expects {expected} values, got {}", tokens.len()),
        ));
    }
    tokens
        .iter()
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| parse_err(line, format!("cannot parse `{t}` in `{what}` line")))
        })
        .collect()
}

enum Header {
    OneD(usize),
    TwoD(usize, usize),
}

pub fn parse_problem(text: &str) -> Result<GridProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty problem file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let header = match tokens[0] {
        "dd1d" => {
            let v: Vec<usize> = fields(hline, &tokens[1..], 1, "dd1d")?;
            Header::OneD(v[0])
        }
        "dd2d" => {
            let v: Vec<usize> = fields(hline, &tokens[1..], 2, "dd2d")?;
            Header::TwoD(v[0], v[1])
        }
        other => {
            return Err(parse_err(
                hline,
                format!("expected `dd1d` or `dd2d` header, found `{other}`"),
            ))
        }
    };
    let one_d = matches!(header, Header::OneD(_));
    let (ln, lm) = match header {
        Header::OneD(l) => (l, 1),
        Header::TwoD(a, b) => (a, b),
    };
    if ln < 3 || (!one_d && lm < 3) {
        return Err(parse_err(hline, format!("lattice {ln}x{lm} is too small")));
    }

    let mut weights: Option<StencilWeights> = None;
    let mut omega = if one_d {
        Rect::new(1, ln - 1, 0, 1)
    } else {
        Rect::new(1, ln - 1, 1, lm - 1)
    };
    let mut sources: Vec<(usize, Site, f64)> = Vec::new();
    let mut boundary: Vec<(usize, Site, f64)> = Vec::new();
    let mut seen_omega = false;

    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let args = &tokens[1..];
        match tokens[0] {
            "alpha" => {
                if weights.is_some() {
                    return Err(parse_err(line, "duplicate `alpha` line"));
                }
                weights = Some(if one_d {
                    let v: Vec<f64> = fields(line, args, 2, "alpha")?;
                    StencilWeights::one_d(v[0], v[1])
                } else {
                    let v: Vec<f64> = fields(line, args, 4, "alpha")?;
                    StencilWeights::new(v[0], v[1], v[2], v[3])
                });
            }
            "omega" => {
                if seen_omega {
                    return Err(parse_err(line, "duplicate `omega` line"));
                }
                seen_omega = true;
                omega = if one_d {
                    let v: Vec<usize> = fields(line, args, 2, "omega")?;
                    Rect::new(v[0], v[1], 0, 1)
                } else {
                    let v: Vec<usize> = fields(line, args, 4, "omega")?;
                    Rect::new(v[0], v[1], v[2], v[3])
                };
            }
            kind @ ("f" | "g") => {
                let (site, value) = if one_d {
                    if args.len() != 2 {
                        return Err(parse_err(line, format!("`{kind}` expects 2 values")));
                    }
                    let n: usize = fields(line, &args[..1], 1, kind)?[0];
                    let v: f64 = fields(line, &args[1..], 1, kind)?[0];
                    (Site::new(n, 0), v)
                } else {
                    if args.len() != 3 {
                        return Err(parse_err(line, format!("`{kind}` expects 3 values")));
                    }
                    let c: Vec<usize> = fields(line, &args[..2], 2, kind)?;
                    let v: f64 = fields(line, &args[2..], 1, kind)?[0];
                    (Site::new(c[0], c[1]), v)
                };
                if kind == "f" {
                    sources.push((line, site, value));
                } else {
                    boundary.push((line, site, value));
                }
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
    }

    let weights = weights.ok_or_else(|| parse_err(hline, "missing `alpha` line"))?;
    let mut problem =
        GridProblem::new((ln, lm), omega, weights).map_err(|e| parse_err(hline, e.to_string()))?;
    for (line, site, value) in sources {
        problem
            .set_source(site, value)
            .map_err(|e| parse_err(line, e.to_string()))?;
    }
    for (line, site, value) in boundary {
        problem
            .set_boundary(site, value)
            .map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(problem)
}

/// Serializes a problem; nonzero `f`/`g` entries only, in row-major order.
/// Values use Rust's shortest round-trip formatting.
pub fn write_problem(problem: &GridProblem) -> String {
    let mut out = String::new();
    let (ln, lm) = problem.shape();
    let w = problem.weights();
    let omega = problem.interior();
    if problem.is_one_d() {
        writeln!(out, "dd1d {ln}").unwrap();
        writeln!(out, "alpha {:?} {:?}", w.a_plus(), w.a_minus()).unwrap();
        writeln!(out, "omega {} {}", omega.n0, omega.n1).unwrap();
    } else {
        writeln!(out, "dd2d {ln} {lm}").unwrap();
        writeln!(
            out,
            "alpha {:?} {:?} {:?} {:?}",
            w.a_east, w.a_west, w.a_north, w.a_south
        )
        .unwrap();
        writeln!(out, "omega {} {} {} {}", omega.n0, omega.n1, omega.m0, omega.m1).unwrap();
    }
    let coords = |s: Site| {
        if problem.is_one_d() {
            format!("{}", s.n)
        } else {
            format!("{} {}", s.n, s.m)
        }
    };
    for site in omega.sites() {
        let v = problem.source(site).unwrap_or(0.0);
        if v != 0.0 {
            writeln!(out, "f {} {v:?}", coords(site)).unwrap();
        }
    }
    for site in problem.boundary_sites() {
        let v = problem.boundary(site).unwrap_or(0.0);
        if v != 0.0 {
            writeln!(out, "g {} {v:?}", coords(site)).unwrap();
        }
    }
    out
}
