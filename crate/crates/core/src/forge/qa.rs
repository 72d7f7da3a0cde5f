//! Leveled QA synthesis over a payload's flattened cells.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::canonical::{format_number, round_decimals};
use crate::model::QAPair;
use crate::model::QaLevel;
use crate::registry::ChartFamily;
use crate::table::Cell;

/// Everything QA phrasing needs to know about the chart.
pub struct QaContext<'a> {
    pub family: ChartFamily,
    pub display_name: &'a str,
    pub title: &'a str,
    pub dimension: &'a str,
    pub measure: &'a str,
    pub unit: &'a str,
}

#[derive(Debug, Clone)]
enum Axis {
    Col(String),
    Row(String),
}

#[derive(Debug, Clone)]
struct Group<'c> {
    axis: Axis,
    cells: Vec<&'c Cell>,
}

impl QaContext<'_> {
    fn noun(&self) -> &'static str {
        match self.family {
            ChartFamily::Series => "series",
            ChartFamily::Proportion => "category",
            ChartFamily::Point => "point",
            ChartFamily::Histogram => "bin",
            ChartFamily::BoxPlot => "group",
            ChartFamily::Candlestick => "period",
        }
    }

    fn nouns(&self) -> String {
        match self.noun() {
            "series" => "series".to_string(),
            "category" => "categories".to_string(),
            n => format!("{n}s"),
        }
    }

    fn cell_ref(&self, c: &Cell) -> String {
        match self.family {
            ChartFamily::Series => format!("value of {} in {}", c.row, c.col),
            ChartFamily::Proportion => format!("value of {}", c.row),
            ChartFamily::Histogram => format!("count of the {} bin", c.row),
            ChartFamily::Point => format!("{} value of {}", c.col, c.row),
            ChartFamily::BoxPlot | ChartFamily::Candlestick => format!("{} of {}", c.col, c.row),
        }
    }

    fn with_unit(&self, c: &Cell) -> String {
        let v = format_number(c.value);
        let unitless = matches!(c.col.as_str(), "x" | "size" | "count") || self.unit.is_empty();
        if unitless {
            v
        } else if self.unit == "%" {
            format!("{v}%")
        } else {
            format!("{v} {}", self.unit)
        }
    }

    fn col_phrase(&self, col: &str) -> String {
        match self.family {
            ChartFamily::Series => format!("value in {col}"),
            ChartFamily::Proportion => "value".to_string(),
            ChartFamily::Histogram => "count".to_string(),
            _ => format!("{col} value"),
        }
    }

    /// Subject phrase and the item the answer names, for a group.
    fn group_subject(&self, g: &Group<'_>) -> (String, String) {
        match &g.axis {
            Axis::Col(col) => (self.col_phrase(col), self.noun().to_string()),
            Axis::Row(row) => (format!("value of {row}"), self.dimension.to_lowercase()),
        }
    }

    fn item_of<'c>(&self, g: &Group<'_>, c: &'c Cell) -> &'c str {
        match g.axis {
            Axis::Col(_) => &c.row,
            Axis::Row(_) => &c.col,
        }
    }
}

fn groups<'c>(family: ChartFamily, cells: &'c [Cell]) -> Vec<Group<'c>> {
    let mut cols: Vec<&str> = Vec::new();
    let mut rows: Vec<&str> = Vec::new();
    for c in cells {
        if !cols.contains(&c.col.as_str()) {
            cols.push(&c.col);
        }
        if !rows.contains(&c.row.as_str()) {
            rows.push(&c.row);
        }
    }
    let mut out = Vec::new();
    for col in cols {
        let members: Vec<&Cell> = cells.iter().filter(|c| c.col == col).collect();
        if members.len() >= 2 {
            out.push(Group {
                axis: Axis::Col(col.to_string()),
                cells: members,
            });
        }
    }
    if family == ChartFamily::Series {
        for row in rows {
            let members: Vec<&Cell> = cells.iter().filter(|c| c.row == row).collect();
            if members.len() >= 2 {
                out.push(Group {
                    axis: Axis::Row(row.to_string()),
                    cells: members,
                });
            }
        }
    }
    out
}

fn qa(
    level: QaLevel,
    question: String,
    answer_long: String,
    answer_short: Option<String>,
) -> QAPair {
    QAPair {
        level,
        question,
        answer_long,
        answer_short,
    }
}

fn sorted_desc<'c>(g: &Group<'c>) -> Vec<&'c Cell> {
    let mut v = g.cells.clone();
    v.sort_by(|a, b| b.value.total_cmp(&a.value));
    v
}

/// Builds the 17 QAs (1 description, 1 summary, 5 literal, 5 inferential,
/// 5 reasoning). Needs at least five cells and one comparable group.
pub fn synthesize<R: Rng + ?Sized>(
    ctx: &QaContext<'_>,
    cells: &[Cell],
    rng: &mut R,
) -> Result<Vec<QAPair>, String> {
    if cells.len() < 5 {
        return Err(format!("need at least 5 data cells, found {}", cells.len()));
    }
    let groups = groups(ctx.family, cells);
    if groups.is_empty() {
        return Err("no comparable group of cells".into());
    }
    let mut out = Vec::with_capacity(17);
    out.push(description(ctx, cells));
    out.push(summary(ctx, cells));

    let mut picks: Vec<&Cell> = cells.iter().collect();
    picks.shuffle(rng);
    for c in picks.iter().take(5) {
        let r = ctx.cell_ref(c);
        out.push(qa(
            QaLevel::Literal,
            format!("What is the {r}?"),
            format!("The {r} is {}.", ctx.with_unit(c)),
            Some(format_number(c.value)),
        ));
    }

    let pick_group = |rng: &mut R| groups[rng.gen_range(0..groups.len())].clone();

    // inferential
    let g = pick_group(rng);
    let (subject, item) = ctx.group_subject(&g);
    let top = sorted_desc(&g)[0];
    out.push(qa(
        QaLevel::Inferential,
        format!("Which {item} has the highest {subject}?"),
        format!(
            "{} has the highest {subject}, at {}.",
            ctx.item_of(&g, top),
            ctx.with_unit(top)
        ),
        Some(ctx.item_of(&g, top).to_string()),
    ));

    let g = pick_group(rng);
    let (subject, item) = ctx.group_subject(&g);
    let low = *sorted_desc(&g).last().expect("group has cells");
    out.push(qa(
        QaLevel::Inferential,
        format!("Which {item} has the lowest {subject}?"),
        format!(
            "{} has the lowest {subject}, at {}.",
            ctx.item_of(&g, low),
            ctx.with_unit(low)
        ),
        Some(ctx.item_of(&g, low).to_string()),
    ));

    let g = pick_group(rng);
    let (subject, item) = ctx.group_subject(&g);
    let second = sorted_desc(&g)[1];
    out.push(qa(
        QaLevel::Inferential,
        format!("Which {item} has the second highest {subject}?"),
        format!(
            "{} ranks second with {}.",
            ctx.item_of(&g, second),
            ctx.with_unit(second)
        ),
        Some(ctx.item_of(&g, second).to_string()),
    ));

    let g = pick_group(rng);
    let pair: Vec<&&Cell> = g.cells.choose_multiple(rng, 2).collect();
    let (a, b) = (*pair[0], *pair[1]);
    let greater = a.value > b.value;
    out.push(qa(
        QaLevel::Inferential,
        format!(
            "Is the {} greater than the {}?",
            ctx.cell_ref(a),
            ctx.cell_ref(b)
        ),
        format!(
            "{}, the {} is {} while the {} is {}.",
            if greater { "Yes" } else { "No" },
            ctx.cell_ref(a),
            ctx.with_unit(a),
            ctx.cell_ref(b),
            ctx.with_unit(b)
        ),
        Some(if greater { "Yes" } else { "No" }.to_string()),
    ));

    let g = pick_group(rng);
    let (subject, item) = ctx.group_subject(&g);
    let mean = g.cells.iter().map(|c| c.value).sum::<f64>() / g.cells.len() as f64;
    let threshold = round_decimals(mean, 1);
    let above = g.cells.iter().filter(|c| c.value > threshold).count();
    let items = if item == ctx.noun() {
        ctx.nouns()
    } else {
        format!("{item} entries")
    };
    out.push(qa(
        QaLevel::Inferential,
        format!(
            "How many {items} have a {subject} above {}?",
            format_number(threshold)
        ),
        format!(
            "{above} of {} {items} exceed {}.",
            g.cells.len(),
            format_number(threshold)
        ),
        Some(above.to_string()),
    ));

    // reasoning
    let g = pick_group(rng);
    let pair: Vec<&&Cell> = g.cells.choose_multiple(rng, 2).collect();
    let (mut a, mut b) = (*pair[0], *pair[1]);
    if a.value < b.value {
        std::mem::swap(&mut a, &mut b);
    }
    let diff = round_decimals(a.value - b.value, 4);
    out.push(qa(
        QaLevel::Reasoning,
        format!(
            "What is the difference between the {} and the {}?",
            ctx.cell_ref(a),
            ctx.cell_ref(b)
        ),
        format!(
            "The {} is {} and the {} is {}, so the difference is {}.",
            ctx.cell_ref(a),
            format_number(a.value),
            ctx.cell_ref(b),
            format_number(b.value),
            format_number(diff)
        ),
        Some(format_number(diff)),
    ));

    let g = pick_group(rng);
    let (subject, item) = ctx.group_subject(&g);
    let items = if item == ctx.noun() {
        ctx.nouns()
    } else {
        format!("{item} entries")
    };
    let total = round_decimals(g.cells.iter().map(|c| c.value).sum(), 4);
    out.push(qa(
        QaLevel::Reasoning,
        format!("What is the total {subject} across all {items}?"),
        format!(
            "Adding the {} values gives {}.",
            g.cells.len(),
            format_number(total)
        ),
        Some(format_number(total)),
    ));

    let g = pick_group(rng);
    let (subject, item) = ctx.group_subject(&g);
    let items = if item == ctx.noun() {
        ctx.nouns()
    } else {
        format!("{item} entries")
    };
    let avg = round_decimals(
        g.cells.iter().map(|c| c.value).sum::<f64>() / g.cells.len() as f64,
        2,
    );
    out.push(qa(
        QaLevel::Reasoning,
        format!("What is the average {subject} across all {items}? Round to two decimals."),
        format!(
            "The {} values average to {}.",
            g.cells.len(),
            format_number(avg)
        ),
        Some(format_number(avg)),
    ));

    let g = pick_group(rng);
    let (subject, _) = ctx.group_subject(&g);
    let sorted = sorted_desc(&g);
    let (hi, lo) = (sorted[0], *sorted.last().expect("group has cells"));
    let range = round_decimals(hi.value - lo.value, 4);
    out.push(qa(
        QaLevel::Reasoning,
        format!("What is the range of the {subject} (highest minus lowest)?"),
        format!(
            "The highest is {} and the lowest is {}, a range of {}.",
            format_number(hi.value),
            format_number(lo.value),
            format_number(range)
        ),
        Some(format_number(range)),
    ));

    let g = pick_group(rng);
    let (subject, _) = ctx.group_subject(&g);
    let sorted = sorted_desc(&g);
    let (hi, lo) = (sorted[0], *sorted.last().expect("group has cells"));
    if lo.value > 0.0 {
        let ratio = round_decimals(hi.value / lo.value, 2);
        out.push(qa(
            QaLevel::Reasoning,
            format!(
                "What is the ratio of the highest to the lowest {subject}? Round to two decimals."
            ),
            format!(
                "{} divided by {} is about {}.",
                format_number(hi.value),
                format_number(lo.value),
                format_number(ratio)
            ),
            Some(format_number(ratio)),
        ));
    } else {
        let top2 = round_decimals(sorted[0].value + sorted[1].value, 4);
        out.push(qa(
            QaLevel::Reasoning,
            format!("What is the sum of the two highest values of the {subject}?"),
            format!(
                "The two highest are {} and {}, summing to {}.",
                format_number(sorted[0].value),
                format_number(sorted[1].value),
                format_number(top2)
            ),
            Some(format_number(top2)),
        ));
    }
    Ok(out)
}

fn description(ctx: &QaContext<'_>, cells: &[Cell]) -> QAPair {
    let mut rows: Vec<&str> = Vec::new();
    for c in cells {
        if !rows.contains(&c.row.as_str()) {
            rows.push(&c.row);
        }
    }
    let min = cells.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let max = cells
        .iter()
        .map(|c| c.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let unit = if ctx.unit.is_empty() {
        String::new()
    } else {
        format!(" ({})", ctx.unit)
    };
    qa(
        QaLevel::Description,
        "Describe the chart in detail.".into(),
        format!(
            "This {} chart is titled \"{}\". It presents {}{} for {} {}: {}. The {} plotted values range from {} to {}.",
            ctx.display_name,
            ctx.title,
            ctx.measure,
            unit,
            rows.len(),
            if rows.len() == 1 { ctx.noun().to_string() } else { ctx.nouns() },
            rows.join(", "),
            cells.len(),
            format_number(min),
            format_number(max)
        ),
        None,
    )
}

fn summary(ctx: &QaContext<'_>, cells: &[Cell]) -> QAPair {
    let max = cells
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("non-empty");
    let min = cells
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("non-empty");
    let avg = cells.iter().map(|c| c.value).sum::<f64>() / cells.len() as f64;
    qa(
        QaLevel::Summary,
        "Summarize the key insights of the chart.".into(),
        format!(
            "The largest figure is the {} at {}, while the smallest is the {} at {}. Across all {} values the mean is about {}.",
            ctx.cell_ref(max),
            ctx.with_unit(max),
            ctx.cell_ref(min),
            ctx.with_unit(min),
            cells.len(),
            format_number(round_decimals(avg, 2))
        ),
        None,
    )
}
