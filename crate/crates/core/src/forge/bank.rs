//! Built-in parameterized render scripts used by the offline code expert.
//!
//! Each program is a standalone matplotlib script following the
//! `script DATA_JSON OUT_PNG` convention. Its first line is a directive
//! naming the chart type and style, which lets the bundled desk shim render
//! bank scripts natively without a Python runtime.

use crate::error::{Error, Result};
use crate::model::StyleDescriptor;
use crate::registry::{default_chart_types, ChartFamily};

pub const DIRECTIVE_PREFIX: &str = "# chartforge-bank:";

const PREAMBLE: &str = include_str!("../../assets/bank/preamble.py");
const EPILOGUE: &str = include_str!("../../assets/bank/epilogue.py");
const SERIES: &str = include_str!("../../assets/bank/series.py");
const PROPORTION: &str = include_str!("../../assets/bank/proportion.py");
const POINT: &str = include_str!("../../assets/bank/point.py");
const HISTOGRAM: &str = include_str!("../../assets/bank/histogram.py");
const BOXPLOT: &str = include_str!("../../assets/bank/boxplot.py");
const CANDLESTICK: &str = include_str!("../../assets/bank/candlestick.py");

/// Chart types the bank can render, with their payload family.
pub fn bank_family(chart_type: &str) -> Option<ChartFamily> {
    default_chart_types()
        .into_iter()
        .find(|t| t.name == chart_type)
        .map(|t| t.family)
}

/// Instantiates the bank program for `chart_type` with `style`.
pub fn offline_script_bank(chart_type: &str, style: &StyleDescriptor) -> Result<String> {
    let family = bank_family(chart_type)
        .ok_or_else(|| Error::UnsupportedChartType(chart_type.to_string()))?;
    style.validate().map_err(Error::Config)?;
    let body = match family {
        ChartFamily::Series => SERIES,
        ChartFamily::Proportion => PROPORTION,
        ChartFamily::Point => POINT,
        ChartFamily::Histogram => HISTOGRAM,
        ChartFamily::BoxPlot => BOXPLOT,
        ChartFamily::Candlestick => CANDLESTICK,
    };
    let mut text = String::with_capacity(PREAMBLE.len() + body.len() + EPILOGUE.len());
    text.push_str(PREAMBLE);
    text.push_str(body);
    text.push_str(EPILOGUE);
    let annotated = if style.annotated { "true" } else { "false" };
    let annotated_py = if style.annotated { "True" } else { "False" };
    Ok(text
        .replace("{{CHART_TYPE}}", chart_type)
        .replace("{{color_scheme}}", &style.color_scheme)
        .replace("{{legend}}", &style.legend)
        .replace("{{grid}}", &style.grid)
        .replace("{{font}}", &style.font)
        .replace("{{mark_texture}}", &style.mark_texture)
        .replace("{{annotated_py}}", annotated_py)
        .replace("{{annotated}}", annotated))
}

/// Chart type and style recovered from a bank program's directive line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BankDirective {
    pub chart_type: String,
    pub style: StyleDescriptor,
}

/// Parses the directive on the first line, if the script is a bank program.
pub fn parse_directive(source: &str) -> Option<BankDirective> {
    let line = source.lines().next()?;
    let rest = line.strip_prefix(DIRECTIVE_PREFIX)?;
    let mut chart_type = None;
    let mut fields = std::collections::HashMap::new();
    for pair in rest.split_whitespace() {
        let (k, v) = pair.split_once('=')?;
        if k == "chart_type" {
            chart_type = Some(v.to_string());
        } else {
            fields.insert(k, v.to_string());
        }
    }
    let mut take = |k: &str| fields.remove(k);
    let style = StyleDescriptor {
        color_scheme: take("color_scheme")?,
        legend: take("legend")?,
        grid: take("grid")?,
        font: take("font")?,
        mark_texture: take("mark_texture")?,
        annotated: match take("annotated")?.as_str() {
            "true" => true,
            "false" => false,
            _ => return None,
        },
    };
    Some(BankDirective {
        chart_type: chart_type?,
        style,
    })
}
