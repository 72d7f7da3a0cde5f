//! Flattening payloads into (row, column, value) cells and the delimited
//! table text used for chart-to-table extraction.

use serde_json::Value;

use crate::canonical::{canonicalize_answer, format_number, CanonicalAnswer};
use crate::model::{KeyPath, CATEGORIES_PATH, ROW_LABEL_KEY};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub row: String,
    pub col: String,
    pub value: f64,
}

/// Flattens the data section of `payload`.
///
/// Each entry is an object whose `label` names the row. Numeric fields become
/// one cell each; numeric arrays are aligned with `x_axis.categories` (or
/// 1-based positions when the lengths disagree).
pub fn flatten_cells(payload: &Value, data_section: &KeyPath) -> Result<Vec<Cell>, String> {
    let section = data_section
        .resolve(payload)
        .and_then(|v| v.into_iter().next())
        .ok_or_else(|| format!("data section `{data_section}` missing"))?;
    let rows = section
        .as_array()
        .ok_or_else(|| format!("data section `{data_section}` is not an array"))?;
    let categories: Vec<String> = KeyPath::new(CATEGORIES_PATH)
        .resolve(payload)
        .and_then(|v| v.into_iter().next())
        .and_then(Value::as_array)
        .map(|a| a.iter().map(value_label).collect())
        .unwrap_or_default();

    let mut cells = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let Some(obj) = row.as_object() else {
            return Err(format!("data entry {i} is not an object"));
        };
        let label = obj
            .get(ROW_LABEL_KEY)
            .map(value_label)
            .unwrap_or_else(|| format!("row {}", i + 1));
        for (key, v) in obj {
            if key == ROW_LABEL_KEY {
                continue;
            }
            match v {
                Value::Number(n) => cells.push(Cell {
                    row: label.clone(),
                    col: key.clone(),
                    value: n.as_f64().unwrap_or(0.0),
                }),
                Value::Array(items) => {
                    let aligned = categories.len() == items.len();
                    for (j, item) in items.iter().enumerate() {
                        if let Some(x) = item.as_f64() {
                            let col = if aligned {
                                categories[j].clone()
                            } else {
                                (j + 1).to_string()
                            };
                            cells.push(Cell {
                                row: label.clone(),
                                col,
                                value: x,
                            });
                        }
                    }
                }
                _ => {}
            }
        }
    }
    Ok(cells)
}

fn value_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => format_number(n.as_f64().unwrap_or(0.0)),
        other => other.to_string(),
    }
}

/// Renders cells as a `|`-delimited table: header row of column labels, one
/// line per row label. Columns and rows keep first-appearance order.
pub fn cells_to_table(cells: &[Cell]) -> String {
    let mut rows: Vec<&str> = Vec::new();
    let mut cols: Vec<&str> = Vec::new();
    for c in cells {
        if !rows.contains(&c.row.as_str()) {
            rows.push(&c.row);
        }
        if !cols.contains(&c.col.as_str()) {
            cols.push(&c.col);
        }
    }
    let mut out = String::from("label");
    for col in &cols {
        out.push_str(" | ");
        out.push_str(col);
    }
    out.push('\n');
    for row in rows {
        out.push_str(row);
        for col in &cols {
            out.push_str(" | ");
            if let Some(c) = cells.iter().find(|c| c.row == row && c.col == *col) {
                out.push_str(&format_number(c.value));
            }
        }
        out.push('\n');
    }
    out
}

/// One cell of a predicted table.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedCell {
    pub row: String,
    pub col: String,
    pub value: CanonicalAnswer,
}

/// Parses delimited table text (`|`, tab or comma). The first non-empty
/// line is the header; its first cell is the row-label column. Markdown
/// separator lines are skipped. Returns `None` when no header plus at least
/// one data row can be found.
pub fn parse_table(text: &str) -> Option<Vec<PredictedCell>> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .filter(|l| !is_separator_line(l))
        .collect();
    let header_line = lines.first()?;
    let delim = if header_line.contains('|') {
        '|'
    } else if header_line.contains('\t') {
        '\t'
    } else if header_line.contains(',') {
        ','
    } else {
        return None;
    };
    let split = |line: &str| -> Vec<String> {
        let trimmed = if delim == '|' {
            line.trim_matches('|')
        } else {
            line
        };
        trimmed.split(delim).map(|s| s.trim().to_string()).collect()
    };
    let header = split(header_line);
    if header.len() < 2 || lines.len() < 2 {
        return None;
    }
    let mut cells = Vec::new();
    for line in &lines[1..] {
        let fields = split(line);
        let Some(row) = fields.first() else { continue };
        for (j, raw) in fields.iter().enumerate().skip(1) {
            if raw.is_empty() {
                continue;
            }
            let Some(col) = header.get(j) else { break };
            cells.push(PredictedCell {
                row: row.clone(),
                col: col.clone(),
                value: canonicalize_answer(raw),
            });
        }
    }
    Some(cells)
}

fn is_separator_line(line: &str) -> bool {
    line.chars()
        .all(|c| matches!(c, '|' | '-' | ':' | ' ' | '+'))
        && line.contains('-')
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn series_payload() -> Value {
        json!({
            "title": "t",
            "x_axis": {"label": "Year", "categories": ["2020", "2021"]},
            "y_axis": {"label": "v", "unit": "u"},
            "data": [{"label": "Solar", "values": [1.5, 2]}, {"label": "Wind", "values": [3, 4.25]}]
        })
    }

    #[test]
    fn series_cells_align_with_categories() {
        let cells = flatten_cells(&series_payload(), &KeyPath::new("data")).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(
            cells[1],
            Cell {
                row: "Solar".into(),
                col: "2021".into(),
                value: 2.0
            }
        );
    }

    #[test]
    fn record_cells_use_field_names() {
        let p = json!({"data": [{"label": "A", "min": 1, "max": 5}]});
        let cells = flatten_cells(&p, &KeyPath::new("data")).unwrap();
        let cols: Vec<_> = cells.iter().map(|c| c.col.as_str()).collect();
        assert_eq!(cols, vec!["max", "min"]);
    }

    #[test]
    fn table_text_round_trips_through_parser() {
        let cells = flatten_cells(&series_payload(), &KeyPath::new("data")).unwrap();
        let text = cells_to_table(&cells);
        assert_eq!(
            text,
            "label | 2020 | 2021\nSolar | 1.5 | 2\nWind | 3 | 4.25\n"
        );
        let parsed = parse_table(&text).unwrap();
        assert_eq!(parsed.len(), 4);
        assert_eq!(parsed[3].value, CanonicalAnswer::Number(4.25));
    }

    #[test]
    fn parser_accepts_markdown_and_csv() {
        let md = "| label | x |\n|---|---|\n| a | 1 |\n";
        assert_eq!(parse_table(md).unwrap().len(), 1);
        let csv = "label,x,y\na,1,2\n";
        assert_eq!(parse_table(csv).unwrap().len(), 2);
        assert!(parse_table("no table here").is_none());
        assert!(parse_table("").is_none());
    }
}
