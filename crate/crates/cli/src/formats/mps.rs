//! Free-format MPS reader. Covers what solvers emit for models we write:
//! NAME, ROWS, COLUMNS with INTORG/INTEND markers, RHS, BOUNDS, ENDATA.
//! Used by the `solve-mps` subcommand and the writer round-trip checks.

use std::collections::HashMap;

use pickbatch_core::milp::{MilpModel, Sense, VarCategory, VarId};

#[derive(Debug, thiserror::Error)]
pub enum MpsReadError {
    #[error("line {line}: {message}")]
    Bad { line: usize, message: String },
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error("model error: {0}")]
    Model(#[from] pickbatch_core::milp::ModelError),
}

fn bad(line: usize, message: impl Into<String>) -> MpsReadError {
    MpsReadError::Bad {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Done,
}

/// Parses free-format MPS text into a model (minimization; the first N row
/// is the objective).
pub fn read_mps(text: &str) -> Result<MilpModel, MpsReadError> {
    let mut model = MilpModel::new("mps");
    let mut section = Section::Preamble;
    let mut objective_row: Option<String> = None;
    // name -> (sense, collected terms, rhs)
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_terms: Vec<Vec<(VarId, f64)>> = Vec::new();
    let mut row_rhs: Vec<f64> = Vec::new();
    let mut obj_terms: Vec<(VarId, f64)> = Vec::new();
    let mut vars: HashMap<String, VarId> = HashMap::new();
    let mut var_bounds: Vec<(f64, f64, bool, bool)> = Vec::new(); // lo, hi, lo_set, hi_set
    let mut integer_block = false;
    let mut integral: Vec<bool> = Vec::new();

    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let is_header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if is_header {
            match tokens[0].to_ascii_uppercase().as_str() {
                "NAME" => {
                    if let Some(name) = tokens.get(1) {
                        model.name = (*name).to_string();
                    }
                    section = Section::Preamble;
                }
                "ROWS" => section = Section::Rows,
                "COLUMNS" => section = Section::Columns,
                "RHS" => section = Section::Rhs,
                "RANGES" => section = Section::Ranges,
                "BOUNDS" => section = Section::Bounds,
                "ENDATA" => {
                    section = Section::Done;
                    break;
                }
                "OBJSENSE" | "OBJSENSE:" => section = Section::Preamble,
                other => return Err(bad(line, format!("unknown section {other}"))),
            }
            continue;
        }
        match section {
            Section::Preamble => {}
            Section::Rows => {
                let [kind, name] = tokens.as_slice() else {
                    return Err(bad(line, "ROWS entries need a type and a name"));
                };
                match kind.to_ascii_uppercase().as_str() {
                    "N" => {
                        if objective_row.is_none() {
                            objective_row = Some((*name).to_string());
                        }
                    }
                    k => {
                        let sense = match k {
                            "L" => Sense::Le,
                            "E" => Sense::Eq,
                            "G" => Sense::Ge,
                            _ => return Err(bad(line, format!("unknown row type {kind}"))),
                        };
                        row_index.insert((*name).to_string(), rows.len());
                        rows.push(((*name).to_string(), sense));
                        row_terms.push(Vec::new());
                        row_rhs.push(0.0);
                    }
                }
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    match tokens[2] {
                        "'INTORG'" => integer_block = true,
                        "'INTEND'" => integer_block = false,
                        other => return Err(bad(line, format!("unknown marker {other}"))),
                    }
                    continue;
                }
                if tokens.len() < 3 || tokens.len().is_multiple_of(2) {
                    return Err(bad(line, "COLUMNS entries pair row names with values"));
                }
                let col = tokens[0];
                let var = *vars.entry(col.to_string()).or_insert_with(|| {
                    let id = model
                        .add_var(col.to_string(), VarCategory::Continuous, 0.0, f64::INFINITY)
                        .expect("fresh variable name");
                    var_bounds.push((0.0, f64::INFINITY, false, false));
                    integral.push(integer_block);
                    id
                });
                for pair in tokens[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| bad(line, format!("bad number {}", pair[1])))?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        obj_terms.push((var, value));
                    } else {
                        let &ri = row_index
                            .get(pair[0])
                            .ok_or_else(|| bad(line, format!("unknown row {}", pair[0])))?;
                        row_terms[ri].push((var, value));
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() < 3 || tokens.len().is_multiple_of(2) {
                    return Err(bad(line, "RHS entries pair row names with values"));
                }
                for pair in tokens[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| bad(line, format!("bad number {}", pair[1])))?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        continue; // objective offset unsupported, ignored
                    }
                    let &ri = row_index
                        .get(pair[0])
                        .ok_or_else(|| bad(line, format!("unknown row {}", pair[0])))?;
                    row_rhs[ri] = value;
                }
            }
            Section::Ranges => {
                return Err(bad(line, "RANGES sections are not supported"));
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(bad(line, "BOUNDS entries need a type, set and column"));
                }
                let kind = tokens[0].to_ascii_uppercase();
                let col = tokens[2];
                let &var = vars
                    .get(col)
                    .ok_or_else(|| bad(line, format!("bound for unknown column {col}")))?;
                let idx = var.index();
                let value = || -> Result<f64, MpsReadError> {
                    tokens
                        .get(3)
                        .ok_or_else(|| bad(line, "missing bound value"))?
                        .parse()
                        .map_err(|_| bad(line, "bad bound value"))
                };
                match kind.as_str() {
                    "LO" => {
                        var_bounds[idx].0 = value()?;
                        var_bounds[idx].2 = true;
                    }
                    "UP" => {
                        var_bounds[idx].1 = value()?;
                        var_bounds[idx].3 = true;
                    }
                    "FX" => {
                        let v = value()?;
                        var_bounds[idx] = (v, v, true, true);
                    }
                    "MI" => {
                        var_bounds[idx].0 = f64::NEG_INFINITY;
                        var_bounds[idx].2 = true;
                    }
                    "PL" => {
                        var_bounds[idx].1 = f64::INFINITY;
                        var_bounds[idx].3 = true;
                    }
                    "BV" => {
                        var_bounds[idx] = (0.0, 1.0, true, true);
                        integral[idx] = true;
                    }
                    "UI" => {
                        var_bounds[idx].1 = value()?;
                        var_bounds[idx].3 = true;
                        integral[idx] = true;
                    }
                    "LI" => {
                        var_bounds[idx].0 = value()?;
                        var_bounds[idx].2 = true;
                        integral[idx] = true;
                    }
                    other => return Err(bad(line, format!("unknown bound type {other}"))),
                }
            }
            Section::Done => break,
        }
    }
    if section != Section::Done {
        return Err(MpsReadError::MissingSection("ENDATA"));
    }
    if objective_row.is_none() {
        return Err(MpsReadError::MissingSection("objective row"));
    }

    // Rebuild into a fresh model so bounds and categories are final.
    let mut out = MilpModel::new(&model.name);
    let mut mapping: Vec<VarId> = Vec::with_capacity(model.vars().len());
    for (i, v) in model.vars().iter().enumerate() {
        let (lo, hi, _, _) = var_bounds[i];
        let category = if integral[i] {
            if lo == 0.0 && hi == 1.0 {
                VarCategory::Binary
            } else {
                VarCategory::Integer
            }
        } else {
            VarCategory::Continuous
        };
        mapping.push(out.add_var(v.name.clone(), category, lo, hi)?);
    }
    for (vid, coeff) in obj_terms {
        out.add_objective_term(mapping[vid.index()], coeff);
    }
    for (ri, (name, sense)) in rows.into_iter().enumerate() {
        let terms = row_terms[ri]
            .iter()
            .map(|&(v, c)| (mapping[v.index()], c))
            .collect();
        out.add_constraint(name, terms, sense, row_rhs[ri]);
    }
    Ok(out)
}
