//! Graph and signal file formats.
//!
//! Graphs are Matrix Market (coordinate or array, real/integer/pattern,
//! general or symmetric). Signals are either CSV with a `node,value` header
//! and 1-based node ids, or raw little-endian `f64` in flat node order.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Pattern,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<Graph> {
    let f = fs::File::open(path.as_ref())?;
    parse_matrix_market(BufReader::new(f))
}

/// Parses a Matrix Market stream into a dense symmetric graph.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<Graph> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (ln, header) = match lines.next() {
        Some((ln, l)) => (ln, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(ln, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let layout = match words[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(ln, format!("unsupported layout '{other}'"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "pattern" if layout == Layout::Coordinate => Field::Pattern,
        other => return Err(parse_err(ln, format!("unsupported field '{other}'"))),
    };
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(ln, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('%')
        }
        Err(_) => true,
    });

    let (ln, size) = match data.next() {
        Some((ln, l)) => (ln, l?),
        None => return Err(parse_err(ln + 1, "missing size line")),
    };
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(ln, format!("bad size '{t}'"))))
        .collect::<Result<_>>()?;
    let (rows, cols) = match (layout, dims.as_slice()) {
        (Layout::Coordinate, [r, c, _]) | (Layout::Array, [r, c]) => (*r, *c),
        _ => return Err(parse_err(ln, "wrong number of size fields")),
    };
    if rows != cols || rows == 0 {
        return Err(Error::NonSquare { rows, cols });
    }
    let n = rows;
    let mut a = DMatrix::zeros(n, n);

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (ln, line) in data {
                let line = line?;
                let toks: Vec<&str> = line.split_whitespace().collect();
                let want = if field == Field::Pattern { 2 } else { 3 };
                if toks.len() != want {
                    return Err(parse_err(ln, format!("expected {want} fields")));
                }
                let idx = |t: &str| -> Result<usize> {
                    let v: usize = t.parse().map_err(|_| parse_err(ln, format!("bad index '{t}'")))?;
                    if v == 0 || v > n {
                        return Err(parse_err(ln, format!("index {v} outside 1..={n}")));
                    }
                    Ok(v - 1)
                };
                let (i, j) = (idx(toks[0])?, idx(toks[1])?);
                let v = if field == Field::Pattern {
                    1.0
                } else {
                    toks[2]
                        .parse::<f64>()
                        .map_err(|_| parse_err(ln, format!("bad value '{}'", toks[2])))?
                };
                a[(i, j)] += v;
                if symmetric && i != j {
                    a[(j, i)] += v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(0, format!("expected {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // column-major; the symmetric variant lists the lower triangle
            let mut slots = Vec::new();
            for j in 0..n {
                let start = if symmetric { j } else { 0 };
                for i in start..n {
                    slots.push((i, j));
                }
            }
            let mut k = 0;
            for (ln, line) in data {
                let line = line?;
                for t in line.split_whitespace() {
                    let v: f64 = t.parse().map_err(|_| parse_err(ln, format!("bad value '{t}'")))?;
                    let Some(&(i, j)) = slots.get(k) else {
                        return Err(parse_err(ln, "too many values"));
                    };
                    a[(i, j)] = v;
                    if symmetric {
                        a[(j, i)] = v;
                    }
                    k += 1;
                }
            }
            if k != slots.len() {
                return Err(parse_err(0, format!("expected {} values, found {k}", slots.len())));
            }
        }
    }

    let g = Graph::new(a)?;
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(g)
}

/// Writes a symmetric graph as `coordinate real symmetric` (lower triangle).
pub fn write_matrix_market(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let mut out = Vec::new();
    format_matrix_market(&mut out, g)?;
    fs::write(path, out)?;
    Ok(())
}

pub fn format_matrix_market<W: Write>(mut w: W, g: &Graph) -> Result<()> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let a = g.shift();
    let n = g.n();
    let mut entries = Vec::new();
    for j in 0..n {
        for i in j..n {
            if a[(i, j)] != 0.0 {
                entries.push((i, j, a[(i, j)]));
            }
        }
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "% written by prodsamp {}", crate::VERSION)?;
    writeln!(w, "{n} {n} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {v:?}", i + 1, j + 1)?;
    }
    Ok(())
}

/// On-disk signal encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    Csv,
    F64Le,
}

impl SignalFormat {
    /// `.csv` is CSV; anything else is raw `f64le`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => SignalFormat::Csv,
            _ => SignalFormat::F64Le,
        }
    }
}

impl std::str::FromStr for SignalFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SignalFormat::Csv),
            "f64le" | "bin" => Ok(SignalFormat::F64Le),
            other => Err(Error::BadParam(format!("unknown signal format '{other}'"))),
        }
    }
}

pub fn read_signal(path: impl AsRef<Path>, format: SignalFormat) -> Result<Vec<f64>> {
    let bytes = fs::read(path.as_ref())?;
    match format {
        SignalFormat::Csv => parse_signal_csv(bytes.as_slice()),
        SignalFormat::F64Le => decode_f64le(&bytes),
    }
}

/// Writes a signal. The CSV form carries a `#` comment line with the tool
/// version and, when given, the seed.
pub fn write_signal(path: impl AsRef<Path>, x: &[f64], format: SignalFormat, seed: Option<u64>) -> Result<()> {
    let bytes = match format {
        SignalFormat::Csv => format_signal_csv(x, seed),
        SignalFormat::F64Le => encode_f64le(x),
    };
    fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_f64le(x: &[f64]) -> Vec<u8> {
    x.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_f64le(bytes: &[u8]) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(parse_err(0, format!("{} bytes is not a whole number of f64", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn format_signal_csv(x: &[f64], seed: Option<u64>) -> Vec<u8> {
    let mut s = String::with_capacity(x.len() * 28 + 32);
    s.push_str(&format!("# prodsamp {}", crate::VERSION));
    if let Some(seed) = seed {
        s.push_str(&format!(" seed={seed}"));
    }
    s.push('\n');
    s.push_str("node,value\n");
    for (i, v) in x.iter().enumerate() {
        s.push_str(&format!("{},{v:.16e}\n", i + 1));
    }
    s.into_bytes()
}

/// Parses `node,value` CSV. Rows may come in any order but every node
/// `1..=N` must appear exactly once, where `N` is the largest id.
pub fn parse_signal_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let header_line = rdr.position().line().max(1) as usize;
    if headers.len() != 2 || &headers[0] != "node" || &headers[1] != "value" {
        return Err(parse_err(header_line, "expected header 'node,value'"));
    }
    let mut vals: Vec<Option<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(parse_err(line, "expected two fields"));
        }
        let node: usize = rec[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad node id '{}'", &rec[0])))?;
        if node == 0 {
            return Err(parse_err(line, "node ids are 1-based"));
        }
        let v: f64 = rec[1]
            .parse()
            .map_err(|_| parse_err(line, format!("bad value '{}'", &rec[1])))?;
        if vals.len() < node {
            vals.resize(node, None);
        }
        if vals[node - 1].replace(v).is_some() {
            return Err(Error::DuplicateNode(node));
        }
    }
    vals.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(Error::MissingNode(i + 1)))
        .collect()
}
