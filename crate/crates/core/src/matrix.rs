//! Binary pooling designs. Rows are pools, columns are items `1..=n`.

use std::fmt::Write as _;
use std::path::Path;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::instance::parse_numbers;
use crate::pool::Pool;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    rows: Vec<Pool>,
}

impl BitMatrix {
    pub fn new(n: usize, rows: Vec<Pool>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidMatrix("a design needs at least one row".into()));
        }
        if let Some(item) = rows.iter().find_map(|r| r.out_of_range(n)) {
            return Err(Error::InvalidMatrix(format!("column {item} outside 1..={n}")));
        }
        Ok(Self { n, rows })
    }

    pub fn from_supports(n: usize, supports: &[&[usize]]) -> Result<Self> {
        Self::new(n, supports.iter().map(|s| s.iter().copied().collect()).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            rows: (1..=n).map(|j| Pool::from_items([j])).collect(),
        }
    }

    pub fn t(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Pool] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Pool {
        &self.rows[i]
    }

    pub fn get(&self, row: usize, column: usize) -> bool {
        self.rows[row].contains(column)
    }

    /// For every column `1..=n`, the set of row indices holding a 1.
    /// Index 0 of the result is an empty placeholder.
    pub fn column_sets(&self) -> Vec<FixedBitSet> {
        let mut cols = vec![FixedBitSet::with_capacity(self.t()); self.n + 1];
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.items() {
                cols[j].insert(i);
            }
        }
        cols
    }

    /// Maps the design onto a subset of the real items: column `j` becomes
    /// `columns[j - 1]`.
    pub fn relabel(&self, columns: &[usize]) -> Vec<Pool> {
        assert_eq!(columns.len(), self.n, "relabel needs one item per column");
        self.rows
            .iter()
            .map(|row| row.items().map(|j| columns[j - 1]).collect())
            .collect()
    }

    /// Text format: line 1 `t n`, then `t` lines of `n` space-separated 0/1
    /// digits.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let [t, n] = parse_numbers(header, line_no)?[..] else {
            return Err(Error::Parse {
                line: line_no,
                msg: "header must be `t n`".into(),
            });
        };
        let mut rows = Vec::with_capacity(t);
        for (line_no, line) in lines {
            let digits = parse_numbers(line, line_no)?;
            if digits.len() != n {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {n} entries, got {}", digits.len()),
                });
            }
            let mut row = Pool::with_universe(n);
            for (j, &d) in digits.iter().enumerate() {
                match d {
                    0 => {}
                    1 => row.insert(j + 1),
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("entry {d} is not 0 or 1"),
                        })
                    }
                }
            }
            rows.push(row);
        }
        if rows.len() != t {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("header declares {t} rows, found {}", rows.len()),
            });
        }
        Self::new(n, rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.t(), self.n);
        for row in &self.rows {
            let line: Vec<&str> = (1..=self.n).map(|j| if row.contains(j) { "1" } else { "0" }).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let m = BitMatrix::from_supports(4, &[&[1, 2], &[], &[3, 4]]).unwrap();
        let text = m.to_text();
        assert_eq!(text, "3 4\n1 1 0 0\n0 0 0 0\n0 0 1 1\n");
        assert_eq!(BitMatrix::parse(&text).unwrap(), m);
    }

    #[test]
    fn parse_errors() {
        assert!(BitMatrix::parse("2 3\n1 0 1\n").is_err());
        assert!(BitMatrix::parse("1 3\n1 0\n").is_err());
        assert!(BitMatrix::parse("1 3\n1 0 2\n").is_err());
        assert!(BitMatrix::parse("0 3\n").is_err());
    }

    #[test]
    fn columns_and_relabel() {
        let m = BitMatrix::from_supports(3, &[&[1, 2], &[2, 3]]).unwrap();
        let cols = m.column_sets();
        assert_eq!(cols[2].ones().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(cols[3].ones().collect::<Vec<_>>(), vec![1]);
        let pools = m.relabel(&[10, 20, 30]);
        assert_eq!(pools[1], Pool::from_items([20, 30]));
    }

    #[test]
    fn rejects_out_of_range_columns() {
        assert!(BitMatrix::from_supports(3, &[&[4]]).is_err());
    }
}
