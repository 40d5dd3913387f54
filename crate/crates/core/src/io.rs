//! Parity-check matrix formats: alist, dense 0/1 text and JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2::BitMatrix;

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// Tokens with 1-based line/column positions.
fn tokens(text: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut col = 0;
        for part in line.split(|c: char| c.is_whitespace()) {
            if !part.is_empty() {
                out.push((ln + 1, col + 1, part));
            }
            col += part.len() + 1;
        }
    }
    out
}

struct Cursor<'a> {
    toks: Vec<(usize, usize, &'a str)>,
    pos: usize,
    last: (usize, usize),
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<usize> {
        let Some(&(l, c, t)) = self.toks.get(self.pos) else {
            return Err(perr(self.last.0, self.last.1, format!("unexpected end of input, expected {what}")));
        };
        self.pos += 1;
        self.last = (l, c);
        t.parse::<usize>().map_err(|_| perr(l, c, format!("expected {what}, found `{t}`")))
    }

    fn here(&self) -> (usize, usize) {
        self.last
    }
}

/// Parses the alist format: "n m", max weights, column weights, row
/// weights, then 1-based column lists and row lists. Zero entries used as
/// padding are skipped. Row lists must agree with column lists.
pub fn parse_alist(text: &str) -> Result<BitMatrix> {
    let mut cur = Cursor { toks: tokens(text), pos: 0, last: (1, 1) };
    let n = cur.next("column count")?;
    let m = cur.next("row count")?;
    let max_col = cur.next("max column weight")?;
    let max_row = cur.next("max row weight")?;
    let col_w: Vec<usize> = (0..n).map(|_| cur.next("column weight")).collect::<Result<_>>()?;
    let row_w: Vec<usize> = (0..m).map(|_| cur.next("row weight")).collect::<Result<_>>()?;
    if col_w.iter().any(|&w| w > max_col) || row_w.iter().any(|&w| w > max_row) {
        let (l, c) = cur.here();
        return Err(perr(l, c, "weight exceeds declared maximum"));
    }
    if col_w.iter().sum::<usize>() != row_w.iter().sum::<usize>() {
        let (l, c) = cur.here();
        return Err(perr(l, c, "column and row weights have different totals"));
    }
    let mut cols_entries = Vec::new();
    let mut padded = None;
    for (j, &w) in col_w.iter().enumerate() {
        let mut read = 0;
        while read < w {
            let (l, c) = cur.toks.get(cur.pos).map_or(cur.here(), |t| (t.0, t.1));
            let r = cur.next("row index")?;
            if r == 0 {
                padded = Some(true);
                continue;
            }
            if r > m {
                return Err(perr(l, c, format!("row index {r} out of range 1..={m}")));
            }
            cols_entries.push((r - 1, j));
            read += 1;
        }
        if padded == Some(true) || max_col > w {
            // consume trailing zero padding on this column line, if any
            while cur.toks.get(cur.pos).is_some_and(|t| t.2 == "0") {
                cur.pos += 1;
            }
        }
    }
    let mut row_entries = Vec::new();
    for (i, &w) in row_w.iter().enumerate() {
        let mut read = 0;
        while read < w {
            let (l, c) = cur.toks.get(cur.pos).map_or(cur.here(), |t| (t.0, t.1));
            let j = cur.next("column index")?;
            if j == 0 {
                continue;
            }
            if j > n {
                return Err(perr(l, c, format!("column index {j} out of range 1..={n}")));
            }
            row_entries.push((i, j - 1));
            read += 1;
        }
        while cur.toks.get(cur.pos).is_some_and(|t| t.2 == "0") {
            cur.pos += 1;
        }
    }
    if let Some(&(l, c, t)) = cur.toks.get(cur.pos) {
        return Err(perr(l, c, format!("trailing token `{t}`")));
    }
    let a = BitMatrix::from_triplets(m, n, &cols_entries);
    let b = BitMatrix::from_triplets(m, n, &row_entries);
    if a != b || a.triplets().len() != cols_entries.len() {
        let (l, c) = cur.here();
        return Err(perr(l, c, "row lists disagree with column lists"));
    }
    Ok(a)
}

/// Writes a matrix in alist format without zero padding.
#[must_use]
pub fn write_alist(h: &BitMatrix) -> String {
    let t = h.transpose();
    let cols: Vec<Vec<usize>> = (0..h.cols()).map(|j| t.row(j).support()).collect();
    let rows: Vec<Vec<usize>> = (0..h.rows()).map(|i| h.row(i).support()).collect();
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let mut s = format!("{} {}\n", h.cols(), h.rows());
    let mc = cols.iter().map(Vec::len).max().unwrap_or(0);
    let mr = rows.iter().map(Vec::len).max().unwrap_or(0);
    s += &format!("{mc} {mr}\n");
    s += &join(&cols.iter().map(Vec::len).collect::<Vec<_>>());
    s += "\n";
    s += &join(&rows.iter().map(Vec::len).collect::<Vec<_>>());
    s += "\n";
    for c in &cols {
        s += &join(&c.iter().map(|i| i + 1).collect::<Vec<_>>());
        s += "\n";
    }
    for r in &rows {
        s += &join(&r.iter().map(|j| j + 1).collect::<Vec<_>>());
        s += "\n";
    }
    s
}

/// One row per line of `0`/`1` characters (whitespace between digits is
/// allowed). Blank lines and `#` comments are skipped.
pub fn parse_dense01(text: &str) -> Result<BitMatrix> {
    let mut rows = Vec::new();
    let mut width = None;
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let mut bits = Vec::new();
        for (col, ch) in body.chars().enumerate() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => return Err(perr(ln + 1, col + 1, format!("unexpected character `{c}`"))),
            }
        }
        match width {
            None => width = Some(bits.len()),
            Some(w) if w != bits.len() => {
                return Err(perr(ln + 1, 1, format!("row has {} entries, expected {w}", bits.len())))
            }
            _ => {}
        }
        rows.push(crate::f2::BitVector::from_bools(&bits));
    }
    Ok(BitMatrix::from_rows(width.unwrap_or(0), rows))
}

#[must_use]
pub fn write_dense01(h: &BitMatrix) -> String {
    h.row_vecs().iter().map(|r| r.to_string01() + "\n").collect()
}

/// JSON form: `{"rows": m, "cols": n, "entries": [[i, j], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[usize; 2]>,
}

pub fn parse_json_matrix(text: &str) -> Result<BitMatrix> {
    let mj: MatrixJson =
        serde_json::from_str(text).map_err(|e| perr(e.line(), e.column(), e.to_string()))?;
    for e in &mj.entries {
        if e[0] >= mj.rows || e[1] >= mj.cols {
            return Err(perr(1, 1, format!("entry {e:?} out of range")));
        }
    }
    let t: Vec<(usize, usize)> = mj.entries.iter().map(|e| (e[0], e[1])).collect();
    Ok(BitMatrix::from_triplets(mj.rows, mj.cols, &t))
}

#[must_use]
pub fn write_json_matrix(h: &BitMatrix) -> String {
    let mj = MatrixJson { rows: h.rows(), cols: h.cols(), entries: h.triplets().into_iter().map(|(i, j)| [i, j]).collect() };
    serde_json::to_string(&mj).expect("serializable")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Alist,
    Dense01,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "alist" => Ok(Format::Alist),
            "dense01" => Ok(Format::Dense01),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

pub fn parse_matrix(text: &str, format: Format) -> Result<BitMatrix> {
    match format {
        Format::Alist => parse_alist(text),
        Format::Dense01 => parse_dense01(text),
        Format::Json => parse_json_matrix(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{hamming7, repetition_cyclic};

    const REP3: &str = "3 3\n2 2\n2 2 2\n2 2 2\n1 3\n1 2\n2 3\n1 2\n2 3\n1 3\n";

    #[test]
    fn alist_rep3() {
        let h = parse_alist(REP3).unwrap();
        assert_eq!(h, repetition_cyclic(3));
        assert_eq!(parse_alist(&write_alist(&h)).unwrap(), h);
    }

    #[test]
    fn alist_with_zero_padding() {
        let text = "4 2\n1 3\n1 1 1 0\n3 0\n1\n1\n1\n0\n1 2 3\n0 0 0\n";
        let h = parse_alist(text).unwrap();
        assert_eq!(h, BitMatrix::from_strs(&["1110", "0000"]));
    }

    #[test]
    fn alist_count_mismatch() {
        let bad = "3 3\n2 2\n2 2 2\n2 2 1\n1 3\n1 2\n2 3\n1 2\n2 3\n1\n";
        match parse_alist(bad) {
            Err(Error::Parse { line, .. }) => assert!(line >= 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        let truncated = "3 3\n2 2\n2 2 2\n2 2 2\n1 3\n";
        assert!(matches!(parse_alist(truncated), Err(Error::Parse { .. })));
    }

    #[test]
    fn dense_and_json_roundtrip() {
        let h = hamming7();
        assert_eq!(parse_dense01(&write_dense01(&h)).unwrap(), h);
        assert_eq!(parse_json_matrix(&write_json_matrix(&h)).unwrap(), h);
        assert_eq!(parse_alist(&write_alist(&h)).unwrap(), h);
        assert!(matches!(parse_dense01("10\n1x\n"), Err(Error::Parse { line: 2, col: 2, .. })));
        assert!(matches!(parse_dense01("10\n111\n"), Err(Error::Parse { line: 2, .. })));
    }
}
