//! Brute-force reference scorers written without the crate's scoring code.
//! Deliberately slow and literal.

pub const TOL: f64 = 0.05;

fn squash(s: &str) -> String {
    let mut out = String::new();
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word.to_lowercase());
    }
    out
}

fn grouped(int_part: &str) -> bool {
    let groups: Vec<&str> = int_part.split(',').collect();
    if groups.len() < 2 || groups[0].is_empty() || groups[0].len() > 3 {
        return false;
    }
    groups.iter().all(|g| g.bytes().all(|b| b.is_ascii_digit()))
        && groups[1..].iter().all(|g| g.len() == 3)
}

/// Number reading: optional `%` suffix, optional comma thousands groups.
pub fn number(raw: &str) -> Option<f64> {
    let mut t = squash(raw);
    if t.ends_with('%') {
        t.pop();
        t = t.trim_end().to_string();
    }
    if t.contains(',') {
        let unsigned = t.trim_start_matches(['+', '-']);
        let int_part = unsigned.split('.').next().unwrap_or("");
        if !grouped(int_part) {
            return None;
        }
        t = t.replace(',', "");
    }
    if t.is_empty()
        || t.chars()
            .any(|c| !(c.is_ascii_digit() || "+-.eE".contains(c)))
    {
        return None;
    }
    t.parse::<f64>().ok().filter(|x| x.is_finite())
}

pub fn close(p: f64, g: f64, tol: f64) -> bool {
    if g == 0.0 {
        return p == 0.0;
    }
    (p - g).abs() <= tol * g.abs() * (1.0 + 1e-12)
}

pub fn answer_correct(pred: &str, gold: &str, tol: f64) -> bool {
    match number(gold) {
        Some(g) => number(pred).is_some_and(|p| close(p, g, tol)),
        None => {
            let g = squash(gold);
            !g.is_empty() && number(pred).is_none() && squash(pred) == g
        }
    }
}

#[derive(Debug, Clone)]
pub struct GoldCell {
    pub row: String,
    pub col: String,
    pub value: f64,
}

pub fn gold(row: &str, col: &str, value: f64) -> GoldCell {
    GoldCell {
        row: row.into(),
        col: col.into(),
        value,
    }
}

/// Pipe tables only: header line, then one line per row.
pub fn pipe_cells(text: &str) -> Vec<(String, String, String)> {
    let lines: Vec<Vec<String>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .trim_matches('|')
                .split('|')
                .map(|c| c.trim().to_string())
                .collect()
        })
        .collect();
    let Some((header, rows)) = lines.split_first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for r in rows {
        for j in 1..r.len().min(header.len()) {
            if !r[j].is_empty() {
                out.push((r[0].clone(), header[j].clone(), r[j].clone()));
            }
        }
    }
    out
}

fn best(
    i: usize,
    gold: &[GoldCell],
    pred: &[(String, String, String)],
    used: &mut Vec<bool>,
    tol: f64,
) -> usize {
    if i == gold.len() {
        return 0;
    }
    let mut top = best(i + 1, gold, pred, used, tol);
    for j in 0..pred.len() {
        if used[j] {
            continue;
        }
        let (r, c, v) = &pred[j];
        let hit = squash(r) == squash(&gold[i].row)
            && squash(c) == squash(&gold[i].col)
            && number(v).is_some_and(|x| close(x, gold[i].value, tol));
        if hit {
            used[j] = true;
            top = top.max(1 + best(i + 1, gold, pred, used, tol));
            used[j] = false;
        }
    }
    top
}

/// (precision, recall, f1) by exhaustive search over one-to-one matchings.
pub fn table_prf(gold_cells: &[GoldCell], prediction: &str, tol: f64) -> (f64, f64, f64) {
    let pred = pipe_cells(prediction);
    if pred.is_empty() || gold_cells.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let m = best(0, gold_cells, &pred, &mut vec![false; pred.len()], tol) as f64;
    let p = m / pred.len() as f64;
    let r = m / gold_cells.len() as f64;
    let f = if m == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// Ten hand-scored short answers: (prediction, gold, correct).
pub const SHORT_FIXTURE: [(&str, &str, bool); 10] = [
    ("102", "100", true),
    ("106", "100", false),
    ("tuesday", "Tuesday", true),
    ("1,040", "1000", true),
    ("Solar", "Wind", false),
    ("45%", "45", true),
    ("0", "0", true),
    ("  North   America ", "north america", true),
    ("abc", "12", false),
    ("-3.1", "-3", true),
];

/// Four gold cells; the prediction gets three right and one wrong.
pub fn table_fixture() -> (serde_json::Value, Vec<GoldCell>, &'static str) {
    let payload = serde_json::json!({
        "title": "Fixture",
        "x_axis": {"label": "Region"},
        "y_axis": {"label": "Sales", "unit": "units"},
        "data": [
            {"label": "North", "value": 10},
            {"label": "South", "value": 20},
            {"label": "East", "value": 30},
            {"label": "West", "value": 40}
        ]
    });
    let cells = vec![
        gold("North", "value", 10.0),
        gold("South", "value", 20.0),
        gold("East", "value", 30.0),
        gold("West", "value", 40.0),
    ];
    let prediction = "label | value\nNorth | 10\nSouth | 20.5\nEast | 30\nWest | 55\n";
    (payload, cells, prediction)
}
