//! Plain-text game and profile files.
//!
//! A game file is a header `k <k> range <lo> <hi>`, `k` lines of row-player
//! payoffs, a blank line, then `k` lines of column-player payoffs. Hidden-column
//! instances append a trailing `hidden <c>` line. A profile file holds two lines
//! of `k` probabilities, row strategy first.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::game::{BimatrixGame, GameError, MixedProfile, PayoffRange};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// A parsed game file.
#[derive(Debug, Clone, PartialEq)]
pub struct GameFile {
    pub game: BimatrixGame,
    pub hidden: Option<usize>,
}

fn parse_row(text: &str, line: usize, k: usize) -> Result<Vec<f64>, FormatError> {
    let vals = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| syntax(line, format!("bad number {t:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.len() != k {
        return Err(syntax(line, format!("expected {k} entries, found {}", vals.len())));
    }
    Ok(vals)
}

pub fn parse_game(text: &str) -> Result<GameFile, FormatError> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim())).collect();
    let mut it = lines.iter().copied();

    let (n, header) = it.next().ok_or_else(|| syntax(1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (k, range) = match fields.as_slice() {
        ["k", k, "range", lo, hi] => {
            let k: usize = k.parse().map_err(|_| syntax(n, format!("bad size {k:?}")))?;
            let lo: f64 = lo.parse().map_err(|_| syntax(n, format!("bad bound {lo:?}")))?;
            let hi: f64 = hi.parse().map_err(|_| syntax(n, format!("bad bound {hi:?}")))?;
            let range = PayoffRange::from_bounds(lo, hi)
                .ok_or_else(|| syntax(n, format!("unsupported range [{lo}, {hi}]")))?;
            (k, range)
        }
        _ => return Err(syntax(n, "expected `k <k> range <lo> <hi>`")),
    };
    if k == 0 {
        return Err(GameError::Empty.into());
    }

    let read_block = |it: &mut dyn Iterator<Item = (usize, &str)>| -> Result<Vec<f64>, FormatError> {
        let mut out = Vec::with_capacity(k * k);
        for _ in 0..k {
            let (n, l) = it.next().ok_or_else(|| syntax(lines.len(), "unexpected end of file"))?;
            out.extend(parse_row(l, n, k)?);
        }
        Ok(out)
    };

    let row = read_block(&mut it)?;
    match it.next() {
        Some((_, "")) => {}
        Some((n, _)) => return Err(syntax(n, "expected a blank line between the matrices")),
        None => return Err(syntax(lines.len(), "missing column-player matrix")),
    }
    let col = read_block(&mut it)?;

    let mut hidden = None;
    for (n, l) in it {
        if l.is_empty() {
            continue;
        }
        match l.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["hidden", c] if hidden.is_none() => {
                let c: usize = c.parse().map_err(|_| syntax(n, format!("bad column {c:?}")))?;
                if c >= k {
                    return Err(syntax(n, format!("hidden column {c} out of range")));
                }
                hidden = Some(c);
            }
            _ => return Err(syntax(n, "unexpected trailing content")),
        }
    }

    Ok(GameFile {
        game: BimatrixGame::new(k, row, col, range)?,
        hidden,
    })
}

fn write_block(out: &mut String, k: usize, m: &[f64]) {
    for r in m.chunks_exact(k) {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
}

pub fn format_game(game: &BimatrixGame, hidden: Option<usize>) -> String {
    let k = game.k();
    let range = game.range();
    let mut out = format!("k {k} range {} {}\n", range.lo(), range.hi());
    write_block(&mut out, k, game.row_matrix());
    out.push('\n');
    write_block(&mut out, k, game.col_matrix());
    if let Some(c) = hidden {
        writeln!(out, "hidden {c}").unwrap();
    }
    out
}

pub fn read_game(path: &Path) -> Result<GameFile, FormatError> {
    parse_game(&fs::read_to_string(path)?)
}

pub fn write_game(path: &Path, game: &BimatrixGame, hidden: Option<usize>) -> Result<(), FormatError> {
    fs::write(path, format_game(game, hidden))?;
    Ok(())
}

pub fn parse_profile(text: &str) -> Result<MixedProfile, FormatError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if lines.len() != 2 {
        return Err(syntax(1, format!("expected 2 non-empty lines, found {}", lines.len())));
    }
    let parse = |(n, l): (usize, &str)| -> Result<Vec<f64>, FormatError> {
        l.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| syntax(n, format!("bad number {t:?}: {e}"))))
            .collect()
    };
    Ok(MixedProfile::new(parse(lines[0])?, parse(lines[1])?)?)
}

pub fn format_profile(profile: &MixedProfile) -> String {
    let line = |p: &[f64]| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    format!("{}\n{}\n", line(&profile.x), line(&profile.y))
}

pub fn read_profile(path: &Path) -> Result<MixedProfile, FormatError> {
    parse_profile(&fs::read_to_string(path)?)
}

pub fn write_profile(path: &Path, profile: &MixedProfile) -> Result<(), FormatError> {
    fs::write(path, format_profile(profile))?;
    Ok(())
}

/// Serializes one record as a CSV line without a header.
pub fn csv_line<T: Serialize>(record: &T) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.serialize(record).expect("in-memory CSV write");
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV output is UTF-8")
}
