//! MPS reader and conversion of general-form models to standard form.
//!
//! Both the fixed-column layout and the whitespace-separated free layout are
//! supported. Integrality markers are accepted and ignored.

use std::collections::HashMap;
use std::path::Path;

use crate::problem::StandardLp;
use crate::sparse::CscMatrix;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpsFormat {
    Fixed,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjSense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    pub rhs: f64,
    pub range: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
}

/// A model in the form read from the file: `min/max cᵀx + const` over
/// equality and inequality rows with column bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLp {
    pub name: String,
    pub sense: ObjSense,
    pub objective_name: String,
    /// Constant term of the objective (the negated objective-row RHS).
    pub objective_constant: f64,
    pub rows: Vec<Row>,
    pub columns: Vec<Column>,
    /// `(row, column, value)` with duplicates already summed.
    pub entries: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    ObjSense,
    End,
}

fn parse_num(tok: &str, line: usize) -> Result<f64, Error> {
    let v: f64 = tok
        .parse()
        .or_else(|_| tok.replace(['d', 'D'], "e").parse())
        .map_err(|_| Error::parse(line, format!("invalid number '{tok}'")))?;
    if v.is_nan() {
        return Err(Error::parse(line, "NaN coefficient"));
    }
    Ok(v)
}

/// Splits a data line into its fields. In fixed layout the fields occupy
/// columns 2–3, 5–12, 15–22, 25–36, 40–47 and 50–61.
fn fields(raw: &str, format: MpsFormat) -> Vec<String> {
    match format {
        MpsFormat::Free => raw.split_whitespace().map(str::to_string).collect(),
        MpsFormat::Fixed => {
            const SPANS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];
            let chars: Vec<char> = raw.chars().collect();
            let mut out: Vec<String> = SPANS
                .iter()
                .map(|&(a, b)| {
                    if a >= chars.len() {
                        String::new()
                    } else {
                        chars[a..b.min(chars.len())]
                            .iter()
                            .collect::<String>()
                            .trim()
                            .to_string()
                    }
                })
                .collect();
            out.retain(|s| !s.is_empty());
            out
        }
    }
}

pub fn read_mps_file(path: impl AsRef<Path>, format: MpsFormat) -> Result<GeneralLp, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_mps_with(&text, format)
}

/// Parses free-format MPS (which also accepts most fixed-format files whose
/// names contain no spaces).
pub fn parse_mps(text: &str) -> Result<GeneralLp, Error> {
    parse_mps_with(text, MpsFormat::Free)
}

pub fn parse_mps_with(text: &str, format: MpsFormat) -> Result<GeneralLp, Error> {
    let mut lp = GeneralLp {
        name: String::new(),
        sense: ObjSense::Min,
        objective_name: String::new(),
        objective_constant: 0.0,
        rows: Vec::new(),
        columns: Vec::new(),
        entries: Vec::new(),
    };
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut ignored_rows: Vec<String> = Vec::new();
    let mut coeffs: HashMap<(usize, usize), f64> = HashMap::new();
    let mut lower_set = Vec::new();
    let mut section = Section::None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let mut head = raw.split_whitespace();
            let keyword = head.next().unwrap_or_default().to_ascii_uppercase();
            section = match keyword.as_str() {
                "NAME" => {
                    lp.name = head.collect::<Vec<_>>().join(" ");
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "OBJSENSE" => {
                    if let Some(s) = head.next() {
                        lp.sense = parse_sense(s, line)?;
                        Section::None
                    } else {
                        Section::ObjSense
                    }
                }
                "ENDATA" => Section::End,
                other => return Err(Error::parse(line, format!("unknown section '{other}'"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        let f = fields(raw, format);
        match section {
            Section::None | Section::End => {
                return Err(Error::parse(line, "data line outside of a section"));
            }
            Section::ObjSense => {
                lp.sense = parse_sense(&f[0], line)?;
                section = Section::None;
            }
            Section::Rows => {
                if f.len() < 2 {
                    return Err(Error::parse(line, "ROWS entry needs a type and a name"));
                }
                let name = f[1].clone();
                let kind = match f[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if lp.objective_name.is_empty() {
                            lp.objective_name = name;
                        } else {
                            ignored_rows.push(name);
                        }
                        continue;
                    }
                    "E" => RowKind::Eq,
                    "L" => RowKind::Le,
                    "G" => RowKind::Ge,
                    other => return Err(Error::parse(line, format!("unknown row type '{other}'"))),
                };
                if row_index.contains_key(&name) || name == lp.objective_name {
                    return Err(Error::parse(line, format!("duplicate row '{name}'")));
                }
                row_index.insert(name.clone(), lp.rows.len());
                lp.rows.push(Row {
                    name,
                    kind,
                    rhs: 0.0,
                    range: None,
                });
            }
            Section::Columns => {
                if f.len() >= 3 && f[1].eq_ignore_ascii_case("'MARKER'") {
                    continue;
                }
                if f.len() != 3 && f.len() != 5 {
                    return Err(Error::parse(line, "COLUMNS entry needs 3 or 5 fields"));
                }
                let col = match col_index.get(&f[0]) {
                    Some(&j) => j,
                    None => {
                        col_index.insert(f[0].clone(), lp.columns.len());
                        lp.columns.push(Column {
                            name: f[0].clone(),
                            cost: 0.0,
                            lower: 0.0,
                            upper: f64::INFINITY,
                        });
                        lower_set.push(false);
                        lp.columns.len() - 1
                    }
                };
                for pair in f[1..].chunks(2) {
                    let v = parse_num(&pair[1], line)?;
                    if pair[0] == lp.objective_name {
                        lp.columns[col].cost += v;
                    } else if let Some(&row) = row_index.get(&pair[0]) {
                        *coeffs.entry((row, col)).or_insert(0.0) += v;
                    } else if !ignored_rows.contains(&pair[0]) {
                        return Err(Error::parse(line, format!("unknown row '{}'", pair[0])));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let data = if f.len() % 2 == 1 { &f[1..] } else { &f[..] };
                if data.is_empty() {
                    return Err(Error::parse(line, "missing row/value pair"));
                }
                for pair in data.chunks(2) {
                    if pair.len() != 2 {
                        return Err(Error::parse(line, "missing value"));
                    }
                    let v = parse_num(&pair[1], line)?;
                    if pair[0] == lp.objective_name {
                        if section == Section::Rhs {
                            lp.objective_constant = -v;
                        } else {
                            return Err(Error::parse(line, "range on the objective row"));
                        }
                    } else if let Some(&row) = row_index.get(&pair[0]) {
                        if section == Section::Rhs {
                            lp.rows[row].rhs = v;
                        } else {
                            lp.rows[row].range = Some(v);
                        }
                    } else if !ignored_rows.contains(&pair[0]) {
                        return Err(Error::parse(line, format!("unknown row '{}'", pair[0])));
                    }
                }
            }
            Section::Bounds => {
                if f.len() < 2 {
                    return Err(Error::parse(line, "BOUNDS entry too short"));
                }
                let kind = f[0].to_ascii_uppercase();
                let needs_value = !matches!(kind.as_str(), "FR" | "MI" | "PL" | "BV");
                let (col_name, value) = match (needs_value, f.len()) {
                    (true, 4) => (&f[2], Some(parse_num(&f[3], line)?)),
                    (true, 3) => (&f[1], Some(parse_num(&f[2], line)?)),
                    (true, _) => return Err(Error::parse(line, "bound without a value")),
                    (false, 2) => (&f[1], None),
                    (false, _) => (&f[2], None),
                };
                let &j = col_index
                    .get(col_name)
                    .ok_or_else(|| Error::parse(line, format!("unknown column '{col_name}'")))?;
                let c = &mut lp.columns[j];
                match kind.as_str() {
                    "UP" | "UI" => {
                        let v = value.unwrap();
                        if v < 0.0 && c.lower == 0.0 && !lower_set[j] {
                            log::warn!(
                                "line {line}: negative upper bound on '{col_name}' frees its lower bound"
                            );
                            c.lower = f64::NEG_INFINITY;
                        }
                        c.upper = v;
                    }
                    "LO" | "LI" => {
                        c.lower = value.unwrap();
                        lower_set[j] = true;
                    }
                    "FX" => {
                        c.lower = value.unwrap();
                        c.upper = c.lower;
                        lower_set[j] = true;
                    }
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                        lower_set[j] = true;
                    }
                    "MI" => {
                        c.lower = f64::NEG_INFINITY;
                        lower_set[j] = true;
                    }
                    "PL" => c.upper = f64::INFINITY,
                    "BV" => {
                        c.lower = 0.0;
                        c.upper = 1.0;
                        lower_set[j] = true;
                    }
                    other => return Err(Error::parse(line, format!("unsupported bound type '{other}'"))),
                }
            }
        }
    }
    if lp.objective_name.is_empty() {
        return Err(Error::parse(0, "no objective (N) row"));
    }
    let mut entries: Vec<(usize, usize, f64)> = coeffs
        .into_iter()
        .filter(|&(_, v)| v != 0.0)
        .map(|((i, j), v)| (i, j, v))
        .collect();
    entries.sort_by_key(|&(i, j, _)| (j, i));
    lp.entries = entries;
    Ok(lp)
}

fn parse_sense(tok: &str, line: usize) -> Result<ObjSense, Error> {
    match tok.to_ascii_uppercase().as_str() {
        "MIN" | "MINIMIZE" => Ok(ObjSense::Min),
        "MAX" | "MAXIMIZE" => Ok(ObjSense::Max),
        other => Err(Error::parse(line, format!("unknown objective sense '{other}'"))),
    }
}

/// How an original column is expressed in standard-form variables.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnMap {
    /// `x = lower + x'`
    Shifted {
        col: usize,
        lower: f64,
    },
    /// `x = upper − x'`
    Mirrored {
        col: usize,
        upper: f64,
    },
    /// `x = x⁺ − x⁻`
    Split {
        pos: usize,
        neg: usize,
    },
    Fixed {
        value: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardizeMap {
    pub columns: Vec<ColumnMap>,
    pub sense: ObjSense,
    pub n_standard: usize,
}

impl StandardizeMap {
    /// Objective of the original model from the standard-form objective
    /// (which already includes the offset).
    pub fn original_objective(&self, standard_objective: f64) -> f64 {
        match self.sense {
            ObjSense::Min => standard_objective,
            ObjSense::Max => -standard_objective,
        }
    }
}

/// Rewrites `lp` as `min cᵀx + offset, Ax = b, x ≥ 0`.
///
/// Ranged rows are rejected.
pub fn to_standard_form(lp: &GeneralLp) -> Result<(StandardLp, StandardizeMap), Error> {
    if let Some(r) = lp.rows.iter().find(|r| r.range.is_some()) {
        return Err(Error::Unsupported(format!("ranged row '{}'", r.name)));
    }
    let sign = match lp.sense {
        ObjSense::Min => 1.0,
        ObjSense::Max => -1.0,
    };
    let m0 = lp.rows.len();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.columns.len()];
    for &(i, j, v) in &lp.entries {
        by_col[j].push((i, v));
    }

    let mut b: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
    let mut c = Vec::new();
    let mut trip = Vec::new();
    let mut names = Vec::new();
    let mut row_names: Vec<String> = lp.rows.iter().map(|r| r.name.clone()).collect();
    let mut offset = sign * lp.objective_constant;
    let mut maps = Vec::with_capacity(lp.columns.len());
    let mut extra_rows: Vec<(usize, f64, String)> = Vec::new();

    for (j, col) in lp.columns.iter().enumerate() {
        let cost = sign * col.cost;
        let (lo, up) = (col.lower, col.upper);
        if lo > up {
            return Err(Error::Model(format!(
                "column '{}' has lower bound {lo} above upper bound {up}",
                col.name
            )));
        }
        if lo == up {
            for &(i, v) in &by_col[j] {
                b[i] -= v * lo;
            }
            offset += cost * lo;
            maps.push(ColumnMap::Fixed { value: lo });
            continue;
        }
        let k = c.len();
        if lo.is_finite() {
            for &(i, v) in &by_col[j] {
                b[i] -= v * lo;
                trip.push((i, k, v));
            }
            offset += cost * lo;
            c.push(cost);
            names.push(col.name.clone());
            if up.is_finite() {
                extra_rows.push((k, up - lo, format!("{}_ub", col.name)));
            }
            maps.push(ColumnMap::Shifted { col: k, lower: lo });
        } else if up.is_finite() {
            for &(i, v) in &by_col[j] {
                b[i] -= v * up;
                trip.push((i, k, -v));
            }
            offset += cost * up;
            c.push(-cost);
            names.push(col.name.clone());
            maps.push(ColumnMap::Mirrored { col: k, upper: up });
        } else {
            for &(i, v) in &by_col[j] {
                trip.push((i, k, v));
                trip.push((i, k + 1, -v));
            }
            c.push(cost);
            c.push(-cost);
            names.push(format!("{}+", col.name));
            names.push(format!("{}-", col.name));
            maps.push(ColumnMap::Split { pos: k, neg: k + 1 });
        }
    }

    for (i, row) in lp.rows.iter().enumerate() {
        let coef = match row.kind {
            RowKind::Eq => continue,
            RowKind::Le => 1.0,
            RowKind::Ge => -1.0,
        };
        let k = c.len();
        trip.push((i, k, coef));
        c.push(0.0);
        names.push(format!("{}_slack", row.name));
    }
    for (t, (k, width, name)) in extra_rows.into_iter().enumerate() {
        let i = m0 + t;
        let slack = c.len();
        trip.push((i, k, 1.0));
        trip.push((i, slack, 1.0));
        c.push(0.0);
        names.push(format!("{name}_slack"));
        b.push(width);
        row_names.push(name);
    }

    let n = c.len();
    let a = CscMatrix::from_triplets(b.len(), n, &trip)?;
    let mut std = StandardLp::new(a, b, c)?;
    std.offset = offset;
    std.row_names = Some(row_names);
    std.col_names = Some(names);
    Ok((
        std,
        StandardizeMap {
            columns: maps,
            sense: lp.sense,
            n_standard: n,
        },
    ))
}

/// Values of the original columns from a standard-form solution.
pub fn recover_solution(map: &StandardizeMap, x_std: &[f64]) -> Result<Vec<f64>, Error> {
    if x_std.len() != map.n_standard {
        return Err(Error::Dimension(format!(
            "standard-form solution has {} entries, expected {}",
            x_std.len(),
            map.n_standard
        )));
    }
    Ok(map
        .columns
        .iter()
        .map(|cm| match *cm {
            ColumnMap::Shifted { col, lower } => lower + x_std[col],
            ColumnMap::Mirrored { col, upper } => upper - x_std[col],
            ColumnMap::Split { pos, neg } => x_std[pos] - x_std[neg],
            ColumnMap::Fixed { value } => value,
        })
        .collect())
}

impl GeneralLp {
    /// Objective value `cᵀx + const` in the model's own sense.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.cost * v).sum::<f64>() + self.objective_constant
    }
}
