//! Deterministic stand-in for the three expert roles.
//!
//! Every response is a pure function of the backend seed and the request,
//! so offline runs are reproducible byte for byte.

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::bank::offline_script_bank;
use super::qa::{synthesize, QaContext};
use super::{ExpertBackend, GenerationRequest, Role};
use crate::canonical::{format_number, normalize_value, round_decimals, sha256_hex};
use crate::config::BackendKind;
use crate::error::{Error, Result};
use crate::model::{ChartTypeSpec, JsonTemplate, KeyPath, RequiredPath, ValueKind};
use crate::registry::{topic_vocab, ChartFamily, ChartRegistry, ChartTypeDef, TopicVocab};
use crate::table::flatten_cells;

#[derive(Debug, Clone)]
pub struct OfflineBackend {
    seed: u64,
    registry: ChartRegistry,
}

impl OfflineBackend {
    pub fn new(seed: u64, registry: ChartRegistry) -> Self {
        OfflineBackend { seed, registry }
    }

    fn rng_for(&self, req: &GenerationRequest<'_>) -> ChaCha8Rng {
        let role = format!("{:?}", req.role);
        let digest = sha256_hex(&[
            &self.seed.to_string(),
            &role,
            &req.chart_type,
            req.topic.unwrap_or(""),
            &req.index.to_string(),
            &req.attempt.to_string(),
        ]);
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(&digest, &mut bytes).expect("sha256 hex is 64 chars");
        ChaCha8Rng::from_seed(bytes)
    }
}

impl ExpertBackend for OfflineBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Offline
    }

    fn complete(&self, req: &GenerationRequest<'_>) -> Result<String> {
        let def = self.registry.get(&req.chart_type)?;
        match req.role {
            Role::JsonExpert => {
                let spec = family_template(def);
                Ok(serde_json::to_string_pretty(&json!({
                    "exemplar": spec.template.exemplar,
                    "required_paths": spec.template.required_paths,
                    "data_section_path": spec.template.data_section_path,
                    "readme": spec.readme,
                }))?)
            }
            Role::DataExpert => {
                let vocab = topic_vocab(req.topic.unwrap_or("general"));
                let mut rng = self.rng_for(req);
                let payload = build_payload(def, &vocab, &mut rng);
                let section = req
                    .spec
                    .map(|s| s.template.data_section_path.clone())
                    .unwrap_or_else(|| KeyPath::new("data"));
                let cells = flatten_cells(&payload, &section).map_err(Error::Transport)?;
                let title = payload["title"].as_str().unwrap_or_default().to_string();
                let display = def.display_name();
                let ctx = QaContext {
                    family: def.family,
                    display_name: &display,
                    title: &title,
                    dimension: payload["x_axis"]["label"]
                        .as_str()
                        .unwrap_or(vocab.dimension),
                    measure: vocab.measure,
                    unit: payload["y_axis"]["unit"].as_str().unwrap_or(""),
                };
                let qas = synthesize(&ctx, &cells, &mut rng).map_err(Error::Transport)?;
                Ok(serde_json::to_string_pretty(
                    &json!({ "payload": payload, "qas": qas }),
                )?)
            }
            Role::CodeExpert => {
                let style = req
                    .style
                    .ok_or_else(|| Error::Transport("code request without a style".into()))?;
                offline_script_bank(&req.chart_type, style)
            }
        }
    }
}

fn rp(path: &str, kind: ValueKind) -> RequiredPath {
    RequiredPath::new(path, kind)
}

/// The shared template and README for a chart type.
pub fn family_template(def: &ChartTypeDef) -> ChartTypeSpec {
    use ValueKind::*;
    let display = def.display_name();
    let mut required = vec![
        rp("title", String),
        rp("x_axis", Object),
        rp("x_axis.label", String),
        rp("y_axis", Object),
        rp("y_axis.label", String),
        rp("y_axis.unit", String),
        rp("data", Array),
        rp("data[]", Object),
        rp("data[].label", String),
    ];
    let (exemplar, entry_doc): (Value, &str) = match def.family {
        ChartFamily::Series => {
            required.extend([
                rp("x_axis.categories", Array),
                rp("x_axis.categories[]", String),
                rp("data[].values", Array),
                rp("data[].values[]", Number),
            ]);
            (
                json!({
                    "title": "Energy Output by Year",
                    "x_axis": {"label": "Year", "categories": ["2021", "2022", "2023"]},
                    "y_axis": {"label": "Energy Output", "unit": "TWh"},
                    "data": [{"label": "Solar", "values": [120.5, 134.2, 151.8]}]
                }),
                "`label` names the series (shown in the legend); `values` holds one number per entry of `x_axis.categories`, in the same order.",
            )
        }
        ChartFamily::Proportion => {
            required.push(rp("data[].value", Number));
            (
                json!({
                    "title": "Market Share by Company",
                    "x_axis": {"label": "Company"},
                    "y_axis": {"label": "Market Share", "unit": "%"},
                    "data": [{"label": "Apex", "value": 34.5}, {"label": "Borealis", "value": 21.0}]
                }),
                "`label` names a category (slice, segment or stage); `value` is its magnitude in `y_axis.unit`.",
            )
        }
        ChartFamily::Point => {
            required.extend([rp("data[].x", Number), rp("data[].y", Number)]);
            let mut point = json!({"label": "Austin", "x": 42.0, "y": 310.5});
            if def.sized {
                required.push(rp("data[].size", Number));
                point["size"] = json!(12.5);
            }
            (
                json!({
                    "title": "Median Price vs. Distance",
                    "x_axis": {"label": "Distance"},
                    "y_axis": {"label": "Median Price", "unit": "thousand USD"},
                    "data": [point]
                }),
                if def.sized {
                    "`label` names the point; `x` and `y` are its coordinates; `size` scales the bubble area."
                } else {
                    "`label` names the point; `x` and `y` are its coordinates."
                },
            )
        }
        ChartFamily::Histogram => {
            required.push(rp("data[].count", Number));
            (
                json!({
                    "title": "Distribution of Daily Usage",
                    "x_axis": {"label": "Daily Usage"},
                    "y_axis": {"label": "Frequency", "unit": "count"},
                    "data": [{"label": "0-50", "count": 12}, {"label": "50-100", "count": 30}]
                }),
                "`label` is the bin range as text; `count` is the number of observations in the bin.",
            )
        }
        ChartFamily::BoxPlot => {
            for k in ["min", "q1", "median", "q3", "max"] {
                required.push(rp(&format!("data[].{k}"), Number));
            }
            (
                json!({
                    "title": "Crop Yield Spread by Crop",
                    "x_axis": {"label": "Crop"},
                    "y_axis": {"label": "Crop Yield", "unit": "t/ha"},
                    "data": [{"label": "Wheat", "min": 2.1, "q1": 3.4, "median": 4.0, "q3": 4.8, "max": 6.2}]
                }),
                "`label` names the group; `min`, `q1`, `median`, `q3`, `max` are its five-number summary in ascending order.",
            )
        }
        ChartFamily::Candlestick => {
            for k in ["open", "high", "low", "close"] {
                required.push(rp(&format!("data[].{k}"), Number));
            }
            (
                json!({
                    "title": "Alpha Corp Share Price",
                    "x_axis": {"label": "Week"},
                    "y_axis": {"label": "Share Price", "unit": "USD"},
                    "data": [{"label": "Week 1", "open": 101.2, "high": 108.0, "low": 99.5, "close": 106.4}]
                }),
                "`label` names the period; `open`, `high`, `low`, `close` are prices with `low` <= `open`,`close` <= `high`.",
            )
        }
    };
    let categories_doc = if def.family == ChartFamily::Series {
        " `x_axis.categories` lists the category names along the x axis, in drawing order."
    } else {
        ""
    };
    let readme = format!(
        "# {display} chart data format\n\n\
         A {display} chart. Each data file is one JSON object with these keys:\n\n\
         - `title` (string): the chart title shown above the plot.\n\
         - `x_axis` (object): x-axis information. `x_axis.label` is the axis title.{categories_doc}\n\
         - `y_axis` (object): y-axis information. `y_axis.label` is the measured quantity and `y_axis.unit` its unit.\n\
         - `data` (array): the raw data, one object per entry. {entry_doc}\n\n\
         Numbers are plain JSON numbers without units or thousands separators.\n"
    );
    ChartTypeSpec {
        name: def.name.clone(),
        template: JsonTemplate {
            exemplar: normalize_value(&exemplar),
            required_paths: required,
            data_section_path: KeyPath::new("data"),
        },
        readme,
    }
}

fn value_in<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    let decimals = if hi - lo > 500.0 { 0 } else { 1 };
    round_decimals(rng.gen_range(lo..hi), decimals)
}

/// `n` pairwise-distinct values in `range`.
fn distinct_values<R: Rng + ?Sized>(rng: &mut R, n: usize, range: (f64, f64)) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(n);
    let mut guard = 0;
    while out.len() < n {
        let v = value_in(rng, range);
        guard += 1;
        if !out.contains(&v) || guard > 1000 {
            out.push(v);
        }
    }
    out
}

fn ordered_slice<'a, R: Rng + ?Sized>(rng: &mut R, pool: &[&'a str], n: usize) -> Vec<&'a str> {
    let n = n.min(pool.len());
    let mut idx = index::sample(rng, pool.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i]).collect()
}

fn title_for<R: Rng + ?Sized>(rng: &mut R, vocab: &TopicVocab, def: &ChartTypeDef) -> String {
    let topic = capitalize(vocab.name);
    match rng.gen_range(0..4) {
        0 => format!("{} by {}", vocab.measure, vocab.dimension),
        1 => format!("{topic}: {} Overview", vocab.measure),
        2 => format!("{} across {}s", vocab.measure, vocab.dimension),
        _ => format!("{topic} ({})", def.display_name()),
    }
}

fn capitalize(s: &str) -> String {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

/// One random payload conforming to `family_template(def)`.
pub fn build_payload<R: Rng + ?Sized>(
    def: &ChartTypeDef,
    vocab: &TopicVocab,
    rng: &mut R,
) -> Value {
    let title = title_for(rng, vocab, def);
    let payload = match def.family {
        ChartFamily::Series => {
            let n_cats = if def.name == "radar" {
                rng.gen_range(5..=6)
            } else {
                rng.gen_range(5..=7)
            };
            let cats = ordered_slice(rng, vocab.categories, n_cats);
            let (lo, hi) = def.series;
            let n_series = rng.gen_range(lo.max(1)..=hi.max(lo).max(1));
            let names = ordered_slice(rng, vocab.series, n_series);
            let values = distinct_values(rng, n_cats * n_series, vocab.range);
            let data: Vec<Value> = names
                .iter()
                .enumerate()
                .map(|(i, name)| json!({"label": name, "values": values[i * n_cats..(i + 1) * n_cats]}))
                .collect();
            json!({
                "title": title,
                "x_axis": {"label": vocab.dimension, "categories": cats},
                "y_axis": {"label": vocab.measure, "unit": vocab.unit},
                "data": data
            })
        }
        ChartFamily::Proportion => {
            let n = rng.gen_range(5..=7);
            let labels = ordered_slice(rng, vocab.categories, n);
            let range = if vocab.range.0 < 0.0 {
                (1.0, vocab.range.1.max(10.0))
            } else {
                vocab.range
            };
            let values = distinct_values(rng, n, range);
            let data: Vec<Value> = labels
                .iter()
                .zip(values)
                .map(|(l, v)| json!({"label": l, "value": v}))
                .collect();
            json!({
                "title": title,
                "x_axis": {"label": vocab.dimension},
                "y_axis": {"label": vocab.measure, "unit": vocab.unit},
                "data": data
            })
        }
        ChartFamily::Point => {
            let n = rng.gen_range(6..=8);
            let labels = ordered_slice(rng, vocab.categories, n);
            let xs = distinct_values(rng, n, (1.0, 100.0));
            let ys = distinct_values(rng, n, vocab.range);
            let sizes = distinct_values(rng, n, (2.0, 30.0));
            let data: Vec<Value> = (0..labels.len())
                .map(|i| {
                    let mut p = json!({"label": labels[i], "x": xs[i], "y": ys[i]});
                    if def.sized {
                        p["size"] = json!(sizes[i]);
                    }
                    p
                })
                .collect();
            json!({
                "title": title,
                "x_axis": {"label": "Index Score"},
                "y_axis": {"label": vocab.measure, "unit": vocab.unit},
                "data": data
            })
        }
        ChartFamily::Histogram => {
            let bins = 6;
            let lo = vocab.range.0.floor();
            let width = ((vocab.range.1 - lo) / bins as f64).ceil().max(1.0);
            let counts = {
                let mut c: Vec<f64> = Vec::new();
                while c.len() < bins {
                    let v = rng.gen_range(1..=80) as f64;
                    if !c.contains(&v) {
                        c.push(v);
                    }
                }
                c
            };
            let data: Vec<Value> = (0..bins)
                .map(|i| {
                    let a = lo + width * i as f64;
                    json!({
                        "label": format!("{} to {}", format_number(a), format_number(a + width)),
                        "count": counts[i]
                    })
                })
                .collect();
            json!({
                "title": format!("Distribution of {}", vocab.measure),
                "x_axis": {"label": format!("{} ({})", vocab.measure, vocab.unit)},
                "y_axis": {"label": "Frequency", "unit": "count"},
                "data": data
            })
        }
        ChartFamily::BoxPlot => {
            let n = rng.gen_range(3..=4);
            let names = ordered_slice(rng, vocab.series, n);
            let values = distinct_values(rng, n * 5, vocab.range);
            let data: Vec<Value> = names
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    let mut five = values[i * 5..(i + 1) * 5].to_vec();
                    five.sort_by(f64::total_cmp);
                    json!({"label": name, "min": five[0], "q1": five[1], "median": five[2], "q3": five[3], "max": five[4]})
                })
                .collect();
            json!({
                "title": title,
                "x_axis": {"label": "Group"},
                "y_axis": {"label": vocab.measure, "unit": vocab.unit},
                "data": data
            })
        }
        ChartFamily::Candlestick => {
            let n = rng.gen_range(5..=6);
            let values = distinct_values(rng, n * 4, vocab.range);
            let data: Vec<Value> = (0..n)
                .map(|i| {
                    let mut four = values[i * 4..(i + 1) * 4].to_vec();
                    four.sort_by(f64::total_cmp);
                    let (low, high) = (four[0], four[3]);
                    let (open, close) = if rng.gen_bool(0.5) { (four[1], four[2]) } else { (four[2], four[1]) };
                    json!({"label": format!("Week {}", i + 1), "open": open, "high": high, "low": low, "close": close})
                })
                .collect();
            json!({
                "title": title,
                "x_axis": {"label": "Week"},
                "y_axis": {"label": vocab.measure, "unit": vocab.unit},
                "data": data
            })
        }
    };
    normalize_value(&payload)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{default_chart_types, DEFAULT_TOPICS};

    #[test]
    fn every_family_template_validates() {
        for def in default_chart_types() {
            let spec = family_template(&def);
            spec.validate()
                .unwrap_or_else(|e| panic!("{}: {e:?}", def.name));
        }
    }

    #[test]
    fn payloads_conform_to_their_template() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for def in default_chart_types() {
            let spec = family_template(&def);
            for vocab in DEFAULT_TOPICS.iter().take(5) {
                let p = build_payload(&def, vocab, &mut rng);
                for r in &spec.template.required_paths {
                    r.path
                        .check(&p, r.kind)
                        .unwrap_or_else(|e| panic!("{} {}: {e:?}", def.name, r.path));
                }
                let cells = flatten_cells(&p, &spec.template.data_section_path).unwrap();
                assert!(cells.len() >= 5, "{}", def.name);
            }
        }
    }
}
