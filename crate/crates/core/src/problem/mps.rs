//! MPS / QPS reader. Free (whitespace separated) layout by default, fixed
//! column layout on request.

use crate::error::Error;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    L,
    G,
    E,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Layout {
    #[default]
    Free,
    Fixed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawProblem {
    pub name: String,
    pub maximize: bool,
    pub objective_name: String,
    pub row_names: Vec<String>,
    pub row_kinds: Vec<RowKind>,
    pub col_names: Vec<String>,
    /// Constraint coefficients (row, col, value) in file order.
    pub entries: Vec<(usize, usize, f64)>,
    pub objective: Vec<f64>,
    /// RHS value on the objective row; the objective constant is its negation.
    pub objective_rhs: f64,
    pub rhs: Vec<f64>,
    pub ranges: Vec<Option<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// QUADOBJ entries as written: one triangle of Q.
    pub quadratic: Vec<(usize, usize, f64)>,
}

impl RawProblem {
    pub fn nrows(&self) -> usize {
        self.row_names.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_names.len()
    }

    /// Row activity bounds implied by kind, rhs and range.
    pub fn row_bounds(&self, i: usize) -> (f64, f64) {
        let rhs = self.rhs[i];
        match (self.row_kinds[i], self.ranges[i]) {
            (RowKind::E, None) => (rhs, rhs),
            (RowKind::E, Some(r)) if r >= 0.0 => (rhs, rhs + r),
            (RowKind::E, Some(r)) => (rhs + r, rhs),
            (RowKind::L, None) => (f64::NEG_INFINITY, rhs),
            (RowKind::L, Some(r)) => (rhs - r.abs(), rhs),
            (RowKind::G, None) => (rhs, f64::INFINITY),
            (RowKind::G, Some(r)) => (rhs, rhs + r.abs()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Quadobj,
    Objsense,
    End,
}

pub fn parse_mps(text: &str) -> Result<RawProblem, Error> {
    parse_mps_with(text, Layout::Free)
}

pub fn parse_mps_with(text: &str, layout: Layout) -> Result<RawProblem, Error> {
    let mut p = RawProblem {
        name: String::new(),
        maximize: false,
        objective_name: String::new(),
        row_names: Vec::new(),
        row_kinds: Vec::new(),
        col_names: Vec::new(),
        entries: Vec::new(),
        objective: Vec::new(),
        objective_rhs: 0.0,
        rhs: Vec::new(),
        ranges: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
        quadratic: Vec::new(),
    };
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut section = Section::None;
    let mut seen_rows = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let is_header = !line.starts_with(' ') && !line.starts_with('\t');
        if is_header {
            let mut words = line.split_whitespace();
            let head = words.next().unwrap_or_default();
            section = match head {
                "NAME" => {
                    // Netlib files append size notes after the name
                    p.name = words.next().unwrap_or_default().to_string();
                    Section::None
                }
                "ROWS" => {
                    seen_rows = true;
                    Section::Rows
                }
                "COLUMNS" => {
                    if !seen_rows {
                        return Err(err("COLUMNS before ROWS section".into()));
                    }
                    Section::Columns
                }
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "QUADOBJ" | "QMATRIX" => Section::Quadobj,
                "OBJSENSE" => match words.next() {
                    Some(s) => {
                        p.maximize = parse_sense(s).ok_or_else(|| err(format!("unknown objective sense {s}")))?;
                        Section::None
                    }
                    None => Section::Objsense,
                },
                "ENDATA" => Section::End,
                other => return Err(err(format!("unknown section {other}"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        let fields = match layout {
            Layout::Free => line.split_whitespace().map(str::to_string).collect::<Vec<_>>(),
            Layout::Fixed => fixed_fields(line),
        };
        if fields.is_empty() {
            continue;
        }
        match section {
            Section::None | Section::End => return Err(err("data outside of a section".into())),
            Section::Objsense => {
                p.maximize = parse_sense(&fields[0]).ok_or_else(|| err(format!("unknown objective sense {}", fields[0])))?;
            }
            Section::Rows => {
                if fields.len() < 2 {
                    return Err(err("row entry needs a type and a name".into()));
                }
                let name = fields[1].clone();
                let kind = match fields[0].as_str() {
                    "N" => {
                        if p.objective_name.is_empty() {
                            p.objective_name = name;
                            continue;
                        }
                        return Err(err(format!("second objective row {name}")));
                    }
                    "L" => RowKind::L,
                    "G" => RowKind::G,
                    "E" => RowKind::E,
                    t => return Err(err(format!("unknown row type {t}"))),
                };
                if row_index.contains_key(&name) || name == p.objective_name {
                    return Err(err(format!("duplicate row {name}")));
                }
                row_index.insert(name.clone(), p.row_names.len());
                p.row_names.push(name);
                p.row_kinds.push(kind);
                p.rhs.push(0.0);
                p.ranges.push(None);
            }
            Section::Columns => {
                if fields.len() >= 3 && fields[1].contains("MARKER") {
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err("column entry needs name and one or two (row, value) pairs".into()));
                }
                let col = match col_index.get(&fields[0]) {
                    Some(&c) => c,
                    None => {
                        let c = p.col_names.len();
                        col_index.insert(fields[0].clone(), c);
                        p.col_names.push(fields[0].clone());
                        p.objective.push(0.0);
                        p.lower.push(0.0);
                        p.upper.push(f64::INFINITY);
                        c
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let v = number(&pair[1]).ok_or_else(|| err(format!("malformed number {}", pair[1])))?;
                    if pair[0] == p.objective_name {
                        p.objective[col] += v;
                    } else {
                        let r = *row_index.get(&pair[0]).ok_or_else(|| err(format!("unknown row {}", pair[0])))?;
                        p.entries.push((r, col, v));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = match fields.len() {
                    2 | 4 => &fields[..],
                    3 | 5 => &fields[1..],
                    _ => return Err(err("expected (row, value) pairs".into())),
                };
                for pair in pairs.chunks(2) {
                    let v = number(&pair[1]).ok_or_else(|| err(format!("malformed number {}", pair[1])))?;
                    if pair[0] == p.objective_name {
                        if section == Section::Rhs {
                            p.objective_rhs = v;
                        }
                        continue;
                    }
                    let r = *row_index.get(&pair[0]).ok_or_else(|| err(format!("unknown row {}", pair[0])))?;
                    if section == Section::Rhs {
                        p.rhs[r] = v;
                    } else {
                        p.ranges[r] = Some(v);
                    }
                }
            }
            Section::Bounds => {
                let kind = fields[0].as_str();
                let valued = matches!(kind, "UP" | "LO" | "FX" | "LI" | "UI");
                let (col_name, value) = if valued {
                    match fields.len() {
                        4 => (&fields[2], Some(&fields[3])),
                        3 => (&fields[1], Some(&fields[2])),
                        _ => return Err(err("bound entry needs a column and a value".into())),
                    }
                } else {
                    match fields.len() {
                        2 => (&fields[1], None),
                        3 if col_index.contains_key(&fields[2]) => (&fields[2], None),
                        3 => (&fields[1], None),
                        4 => (&fields[2], None),
                        _ => return Err(err("malformed bound entry".into())),
                    }
                };
                let c = *col_index.get(col_name).ok_or_else(|| err(format!("unknown column {col_name}")))?;
                let v = match value {
                    Some(s) => number(s).ok_or_else(|| err(format!("malformed number {s}")))?,
                    None => 0.0,
                };
                match kind {
                    "UP" | "UI" => {
                        p.upper[c] = v;
                        if v < 0.0 && p.lower[c] == 0.0 {
                            p.lower[c] = f64::NEG_INFINITY;
                        }
                    }
                    "LO" | "LI" => p.lower[c] = v,
                    "FX" => {
                        p.lower[c] = v;
                        p.upper[c] = v;
                    }
                    "FR" => {
                        p.lower[c] = f64::NEG_INFINITY;
                        p.upper[c] = f64::INFINITY;
                    }
                    "MI" => p.lower[c] = f64::NEG_INFINITY,
                    "PL" => p.upper[c] = f64::INFINITY,
                    "BV" => {
                        p.lower[c] = 0.0;
                        p.upper[c] = 1.0;
                    }
                    t => return Err(err(format!("unknown bound type {t}"))),
                }
            }
            Section::Quadobj => {
                if fields.len() != 3 {
                    return Err(err("QUADOBJ entry needs two columns and a value".into()));
                }
                let i = *col_index.get(&fields[0]).ok_or_else(|| err(format!("unknown column {}", fields[0])))?;
                let j = *col_index.get(&fields[1]).ok_or_else(|| err(format!("unknown column {}", fields[1])))?;
                let v = number(&fields[2]).ok_or_else(|| err(format!("malformed number {}", fields[2])))?;
                p.quadratic.push((i, j, v));
            }
        }
    }
    if !seen_rows {
        return Err(Error::Parse { line: text.lines().count(), message: "missing ROWS section".into() });
    }
    if p.objective_name.is_empty() {
        return Err(Error::Parse { line: text.lines().count(), message: "no objective (N) row".into() });
    }
    Ok(p)
}

fn parse_sense(s: &str) -> Option<bool> {
    match s {
        "MAX" | "MAXIMIZE" => Some(true),
        "MIN" | "MINIMIZE" => Some(false),
        _ => None,
    }
}

fn number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| !v.is_nan())
}

/// Fields of the classic fixed layout: columns 2-3, 5-12, 15-22, 25-36,
/// 40-47, 50-61 (1-based).
fn fixed_fields(line: &str) -> Vec<String> {
    const SPANS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    for (k, &(a, b)) in SPANS.iter().enumerate() {
        if a >= bytes.len() {
            break;
        }
        let field = String::from_utf8_lossy(&bytes[a..b.min(bytes.len())]).trim().to_string();
        // the code field is empty for COLUMNS/RHS/RANGES records
        if k == 0 && field.is_empty() {
            continue;
        }
        if !field.is_empty() {
            out.push(field);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = "NAME MINI
ROWS
 N obj
 E c1
COLUMNS
 x1 obj 1 c1 2
 x2 obj -1 c1 3
RHS
 rhs c1 4
ENDATA
";

    #[test]
    fn minimal_problem() {
        let p = parse_mps(MINI).unwrap();
        assert_eq!(p.name, "MINI");
        assert_eq!(p.entries, vec![(0, 0, 2.0), (0, 1, 3.0)]);
        assert_eq!(p.objective, vec![1.0, -1.0]);
        assert_eq!(p.rhs, vec![4.0]);
        assert_eq!(p.row_bounds(0), (4.0, 4.0));
    }

    #[test]
    fn missing_rows_is_error() {
        let text = "NAME X\nCOLUMNS\n x1 obj 1\nENDATA\n";
        assert!(matches!(parse_mps(text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn quadobj_and_bounds() {
        let text = "NAME Q
ROWS
 N obj
 L c1
COLUMNS
 x1 c1 1
 x2 c1 1
RHS
 RHS obj -3 c1 1
RANGES
 RNG c1 2
BOUNDS
 UP BND x1 -2
 FR BND x2
QUADOBJ
 x1 x1 2
 x2 x1 0.5
ENDATA
";
        let p = parse_mps(text).unwrap();
        assert_eq!(p.quadratic, vec![(0, 0, 2.0), (1, 0, 0.5)]);
        assert_eq!(p.objective_rhs, -3.0);
        assert_eq!(p.lower[0], f64::NEG_INFINITY);
        assert_eq!(p.upper[0], -2.0);
        assert_eq!((p.lower[1], p.upper[1]), (f64::NEG_INFINITY, f64::INFINITY));
        assert_eq!(p.row_bounds(0), (-1.0, 1.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_num = MINI.replace("rhs c1 4", "rhs c1 4x");
        assert!(matches!(parse_mps(&bad_num), Err(Error::Parse { line: 9, .. })));
        let dup = MINI.replace(" E c1", " N other");
        assert!(parse_mps(&dup).is_err());
        let unknown = MINI.replace("RHS\n", "SOS\n");
        assert!(parse_mps(&unknown).is_err());
    }

    #[test]
    fn fixed_layout() {
        let text = "NAME          FIX
ROWS
 N  COST
 L  LIM1
COLUMNS
    X ONE     COST      1.0            LIM1      1.0
RHS
    RHS       LIM1      4.0
ENDATA
";
        let p = parse_mps_with(text, Layout::Fixed).unwrap();
        assert_eq!(p.col_names, vec!["X ONE".to_string()]);
        assert_eq!(p.rhs, vec![4.0]);
    }
}
