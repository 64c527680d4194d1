//! Line-oriented helpers shared by the model file formats.
//!
//! Every model file starts with `<magic> v<version>` and continues with
//! whitespace-separated records. Floats are written with Rust's shortest
//! round-trip representation so save/load is lossless.

use crate::error::{Error, Result};

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) struct LineReader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
    offset: usize,
}

impl<'a> LineReader<'a> {
    pub fn new(text: &'a str) -> Self {
        Self::with_offset(text, 0)
    }

    /// Reader whose reported line numbers start after `offset` lines.
    pub fn with_offset(text: &'a str, offset: usize) -> Self {
        LineReader {
            lines: text.lines().collect(),
            pos: 0,
            offset,
        }
    }

    pub fn line_no(&self) -> usize {
        self.offset + self.pos
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::format(self.line_no(), msg)
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        let line = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::format(self.offset + self.pos + 1, "unexpected end of input"))?;
        self.pos += 1;
        Ok(line)
    }

    pub fn expect_header(&mut self, magic: &str, version: u32) -> Result<()> {
        let line = self.next_line()?;
        let expected = format!("{magic} v{version}");
        if line.trim() != expected {
            return Err(self.err(format!("expected header {expected:?}, found {line:?}")));
        }
        Ok(())
    }

    /// Reads `key rest...` and returns `rest` (may contain spaces).
    pub fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            None if line == key => Ok(""),
            _ => Err(self.err(format!("expected {key:?} record, found {line:?}"))),
        }
    }

    pub fn keyed_parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.keyed(key)?;
        raw.trim()
            .parse()
            .map_err(|_| self.err(format!("bad value {raw:?} for {key}")))
    }

    /// Reads `n` raw lines.
    pub fn take(&mut self, n: usize) -> Result<Vec<&'a str>> {
        (0..n).map(|_| self.next_line()).collect()
    }
}

pub(crate) fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::format(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::format(line, format!("bad {what} {tok:?}")))
}

pub(crate) fn parse_opt_usize(raw: &str, line: usize) -> Result<Option<usize>> {
    match raw.trim() {
        "none" => Ok(None),
        v => v
            .parse()
            .map(Some)
            .map_err(|_| Error::format(line, format!("bad optional integer {v:?}"))),
    }
}

pub(crate) fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map_or_else(|| "none".to_string(), |d| d.to_string())
}
