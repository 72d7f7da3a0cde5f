//! Native renderer for bank scripts.
//!
//! Draws the same marks as the matplotlib bank programs into a fixed
//! 640x480 canvas. Text is drawn as glyph blocks (no font rasterizer) and
//! every drawn string is recorded for the `.png.txt` sidecar.

use image::{Rgb, RgbImage};
use serde_json::Value;

use crate::canonical::format_number;
use crate::model::StyleDescriptor;

pub const WIDTH: u32 = 640;
pub const HEIGHT: u32 = 480;

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const INK: Rgb<u8> = Rgb([40, 40, 40]);
const GRID_INK: Rgb<u8> = Rgb([205, 205, 205]);

/// A rendered chart and the strings drawn on it, in drawing order.
pub struct Rendered {
    pub image: RgbImage,
    pub strings: Vec<String>,
}

impl Rendered {
    pub fn sidecar(&self) -> String {
        let mut s = self.strings.join("\n");
        s.push('\n');
        s
    }
}

fn palette(scheme: &str) -> &'static [[u8; 3]] {
    match scheme {
        "viridis" => &[
            [68, 1, 84],
            [59, 82, 139],
            [33, 145, 140],
            [94, 201, 98],
            [253, 231, 37],
            [72, 40, 120],
            [42, 120, 142],
            [170, 220, 50],
        ],
        "pastel" => &[
            [251, 180, 174],
            [179, 205, 227],
            [204, 235, 197],
            [222, 203, 228],
            [254, 217, 166],
            [255, 255, 204],
            [229, 216, 189],
            [253, 218, 236],
        ],
        "mono_blue" => &[
            [8, 48, 107],
            [8, 81, 156],
            [33, 113, 181],
            [66, 146, 198],
            [107, 174, 214],
            [158, 202, 225],
            [198, 219, 239],
            [222, 235, 247],
        ],
        "warm" => &[
            [255, 0, 0],
            [255, 64, 0],
            [255, 128, 0],
            [255, 170, 0],
            [255, 200, 40],
            [230, 90, 60],
            [200, 40, 40],
            [255, 230, 0],
        ],
        "cool" => &[
            [0, 255, 255],
            [40, 215, 255],
            [80, 175, 255],
            [120, 135, 255],
            [160, 95, 255],
            [200, 55, 255],
            [240, 15, 255],
            [0, 200, 200],
        ],
        _ => &[
            [31, 119, 180],
            [255, 127, 14],
            [44, 160, 44],
            [214, 39, 40],
            [148, 103, 189],
            [140, 86, 75],
            [227, 119, 194],
            [127, 127, 127],
        ],
    }
}

struct Canvas<'a> {
    img: RgbImage,
    strings: Vec<String>,
    style: &'a StyleDescriptor,
}

#[derive(Clone, Copy)]
struct Rect {
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
}

impl Rect {
    fn w(&self) -> i32 {
        self.x1 - self.x0
    }
    fn h(&self) -> i32 {
        self.y1 - self.y0
    }
}

impl<'a> Canvas<'a> {
    fn new(style: &'a StyleDescriptor) -> Self {
        Canvas {
            img: RgbImage::from_pixel(WIDTH, HEIGHT, WHITE),
            strings: Vec::new(),
            style,
        }
    }

    fn color(&self, i: usize) -> Rgb<u8> {
        let p = palette(&self.style.color_scheme);
        Rgb(p[i % p.len()])
    }

    fn put(&mut self, x: i32, y: i32, c: Rgb<u8>) {
        if x >= 0 && y >= 0 && (x as u32) < WIDTH && (y as u32) < HEIGHT {
            self.img.put_pixel(x as u32, y as u32, c);
        }
    }

    fn textured(&self, x: i32, y: i32, c: Rgb<u8>) -> Rgb<u8> {
        let dark = Rgb([c[0] / 2, c[1] / 2, c[2] / 2]);
        let on = match self.style.mark_texture.as_str() {
            "hatched" => (x + y).rem_euclid(7) == 0,
            "dotted" => x.rem_euclid(5) == 0 && y.rem_euclid(5) == 0,
            "crosshatch" => (x + y).rem_euclid(8) == 0 || (x - y).rem_euclid(8) == 0,
            _ => false,
        };
        if on {
            dark
        } else {
            c
        }
    }

    fn fill(&mut self, r: Rect, c: Rgb<u8>) {
        let (x0, x1) = (r.x0.min(r.x1), r.x0.max(r.x1));
        let (y0, y1) = (r.y0.min(r.y1), r.y0.max(r.y1));
        for y in y0..y1.max(y0 + 1) {
            for x in x0..x1.max(x0 + 1) {
                let t = self.textured(x, y, c);
                self.put(x, y, t);
            }
        }
    }

    fn outline(&mut self, r: Rect, c: Rgb<u8>) {
        self.line(r.x0, r.y0, r.x1, r.y0, c, 0);
        self.line(r.x1, r.y0, r.x1, r.y1, c, 0);
        self.line(r.x1, r.y1, r.x0, r.y1, c, 0);
        self.line(r.x0, r.y1, r.x0, r.y0, c, 0);
    }

    /// Bresenham line; `dash` > 0 draws `dash` pixels on, `dash` off.
    fn line(&mut self, x0: i32, y0: i32, x1: i32, y1: i32, c: Rgb<u8>, dash: i32) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err, mut step) = (x0, y0, dx + dy, 0);
        loop {
            if dash == 0 || (step / dash) % 2 == 0 {
                self.put(x, y, c);
            }
            step += 1;
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn thick_line(&mut self, x0: i32, y0: i32, x1: i32, y1: i32, c: Rgb<u8>) {
        let dash = match self.style.mark_texture.as_str() {
            "hatched" => 6,
            "dotted" => 2,
            "crosshatch" => 4,
            _ => 0,
        };
        for o in -1..=1 {
            self.line(x0, y0 + o, x1, y1 + o, c, dash);
        }
    }

    fn disc(&mut self, cx: i32, cy: i32, r: i32, c: Rgb<u8>) {
        for y in -r..=r {
            for x in -r..=r {
                let d = x * x + y * y;
                if d <= r * r {
                    let col = if d >= (r - 1) * (r - 1) {
                        INK
                    } else {
                        self.textured(cx + x, cy + y, c)
                    };
                    self.put(cx + x, cy + y, col);
                }
            }
        }
    }

    fn glyph_width(&self) -> i32 {
        match self.style.font.as_str() {
            "mono" => 7,
            "condensed" => 5,
            _ => 6,
        }
    }

    fn text_width(&self, s: &str) -> i32 {
        s.chars().count() as i32 * self.glyph_width()
    }

    /// Draws `s` as glyph blocks with its left edge at `x` and records it.
    fn text(&mut self, x: i32, y: i32, s: &str) {
        let s = s.trim();
        if s.is_empty() {
            return;
        }
        self.strings.push(s.to_string());
        let gw = self.glyph_width();
        let serif = self.style.font == "serif";
        for (i, ch) in s.chars().enumerate() {
            if ch.is_whitespace() {
                continue;
            }
            let gx = x + i as i32 * gw;
            let tall = if ch.is_uppercase() || ch.is_ascii_digit() {
                9
            } else {
                6 + (ch as u32 % 3) as i32
            };
            for yy in (9 - tall)..9 {
                for xx in 0..gw - 2 {
                    if (xx + yy + ch as i32) % 3 != 0 || yy == 8 {
                        self.put(gx + xx, y + yy, INK);
                    }
                }
            }
            if serif {
                self.line(gx - 1, y + 9, gx + gw - 2, y + 9, INK, 0);
            }
        }
    }

    fn text_centered(&mut self, cx: i32, y: i32, s: &str) {
        let w = self.text_width(s.trim());
        self.text(cx - w / 2, y, s);
    }

    /// Vertical text, glyphs stacked top to bottom.
    fn text_vertical(&mut self, x: i32, cy: i32, s: &str) {
        let s = s.trim();
        if s.is_empty() {
            return;
        }
        self.strings.push(s.to_string());
        let n = s.chars().count() as i32;
        let mut y = cy - n * 4;
        for ch in s.chars() {
            if !ch.is_whitespace() {
                self.fill(
                    Rect {
                        x0: x,
                        y0: y,
                        x1: x + 7,
                        y1: y + 6,
                    },
                    INK,
                );
            }
            y += 8;
        }
    }

    fn value_label(&mut self, cx: i32, y: i32, v: f64) {
        if self.style.annotated {
            self.text_centered(cx, y - 11, &format_number(v));
        }
    }

    fn legend(&mut self, entries: &[(String, Rgb<u8>)], plot: Rect) {
        if entries.is_empty() {
            return;
        }
        let widest = entries
            .iter()
            .map(|(l, _)| self.text_width(l))
            .max()
            .unwrap_or(0)
            + 22;
        let h = entries.len() as i32 * 15 + 6;
        let (x, y) = match self.style.legend.as_str() {
            "upper_left" => (plot.x0 + 6, plot.y0 + 6),
            "lower_center" => (plot.x0 + (plot.w() - widest) / 2, plot.y1 - h - 6),
            "outside_right" => (plot.x1 + 10, plot.y0 + (plot.h() - h) / 2),
            _ => (plot.x1 - widest - 6, plot.y0 + 6),
        };
        let frame = Rect {
            x0: x,
            y0: y,
            x1: x + widest,
            y1: y + h,
        };
        for yy in frame.y0..frame.y1 {
            for xx in frame.x0..frame.x1 {
                self.put(xx, yy, WHITE);
            }
        }
        self.outline(frame, GRID_INK);
        for (i, (label, c)) in entries.iter().enumerate() {
            let ey = y + 5 + i as i32 * 15;
            self.fill(
                Rect {
                    x0: x + 5,
                    y0: ey,
                    x1: x + 15,
                    y1: ey + 10,
                },
                *c,
            );
            self.text(x + 19, ey, label);
        }
    }

    fn grid(&mut self, plot: Rect) {
        let dash = match self.style.grid.as_str() {
            "major" => 0,
            "dashed" => 5,
            "dotted" => 1,
            _ => return,
        };
        for i in 1..5 {
            let y = plot.y1 - plot.h() * i / 5;
            self.line(plot.x0, y, plot.x1, y, GRID_INK, dash);
        }
    }

    fn axes(&mut self, plot: Rect) {
        self.line(plot.x0, plot.y1, plot.x1, plot.y1, INK, 0);
        self.line(plot.x0, plot.y0, plot.x0, plot.y1, INK, 0);
        for i in 0..=5 {
            let y = plot.y1 - plot.h() * i / 5;
            self.line(plot.x0 - 4, y, plot.x0, y, INK, 0);
            // unrecorded tick marks stand in for numeric tick labels
            self.fill(
                Rect {
                    x0: plot.x0 - 26,
                    y0: y - 3,
                    x1: plot.x0 - 8,
                    y1: y + 3,
                },
                GRID_INK,
            );
        }
    }
}

fn str_at<'v>(v: &'v Value, path: &[&str]) -> Option<&'v str> {
    path.iter()
        .try_fold(v, |cur, k| cur.get(k))
        .and_then(Value::as_str)
}

fn num(v: &Value, key: &str) -> f64 {
    v.get(key).and_then(Value::as_f64).unwrap_or(0.0)
}

fn label_of(row: &Value) -> String {
    match row.get("label") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => format_number(n.as_f64().unwrap_or(0.0)),
        _ => String::new(),
    }
}

fn rows(payload: &Value) -> Vec<&Value> {
    payload
        .get("data")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter(|r| r.is_object()).collect())
        .unwrap_or_default()
}

fn categories(payload: &Value) -> Vec<String> {
    payload
        .get("x_axis")
        .and_then(|x| x.get("categories"))
        .and_then(Value::as_array)
        .map(|a| {
            a.iter()
                .map(|c| {
                    c.as_str()
                        .map(str::to_string)
                        .unwrap_or_else(|| c.to_string())
                })
                .collect()
        })
        .unwrap_or_default()
}

fn series_values(row: &Value) -> Vec<f64> {
    row.get("values")
        .and_then(Value::as_array)
        .map(|a| a.iter().map(|v| v.as_f64().unwrap_or(0.0)).collect())
        .unwrap_or_default()
}

/// Linear value-to-pixel mapping over `[lo, hi]`.
#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    p0: i32,
    p1: i32,
}

impl Scale {
    fn new(values: impl IntoIterator<Item = f64>, p0: i32, p1: i32, include_zero: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if include_zero {
            lo = lo.min(0.0);
            hi = hi.max(0.0);
        }
        let pad = ((hi - lo) * 0.08).max(1e-9);
        if !include_zero || lo < 0.0 {
            lo -= pad;
        }
        hi += pad;
        Scale { lo, hi, p0, p1 }
    }

    fn map(&self, v: f64) -> i32 {
        let t = (v - self.lo) / (self.hi - self.lo);
        self.p0 + ((self.p1 - self.p0) as f64 * t).round() as i32
    }
}

const SERIES_BARS: &[&str] = &["bar", "bar_3d", "grouped_bar"];

/// Renders a bank chart. Missing or malformed fields degrade to empty marks.
pub fn render_bank(chart_type: &str, style: &StyleDescriptor, payload: &Value) -> Rendered {
    let mut cv = Canvas::new(style);
    let right = if style.legend == "outside_right" {
        470
    } else {
        610
    };
    let plot = Rect {
        x0: 80,
        y0: 50,
        x1: right,
        y1: 400,
    };
    let polar = matches!(chart_type, "pie" | "ring" | "rose" | "radar");
    let boxed = !polar && !matches!(chart_type, "treemap" | "funnel");

    if boxed {
        cv.grid(plot);
        if chart_type != "heatmap" {
            cv.axes(plot);
        }
    }
    let legend = match chart_type {
        "pie" | "ring" | "rose" => draw_wedges(&mut cv, chart_type, payload, plot),
        "radar" => draw_radar(&mut cv, payload, plot),
        "heatmap" => draw_heatmap(&mut cv, payload, plot),
        "funnel" => draw_funnel(&mut cv, payload, plot),
        "treemap" => draw_treemap(&mut cv, payload, plot),
        "scatter" | "bubble" => draw_points(&mut cv, payload, plot),
        "histogram" => draw_histogram(&mut cv, payload, plot),
        "box" => draw_boxes(&mut cv, payload, plot),
        "candlestick" => draw_candles(&mut cv, payload, plot),
        _ => draw_series(&mut cv, chart_type, payload, plot),
    };
    cv.legend(&legend, plot);

    if let Some(title) = str_at(payload, &["title"]) {
        cv.text_centered(WIDTH as i32 / 2, 16, title);
    }
    let x_label = str_at(payload, &["x_axis", "label"]);
    let y_label = str_at(payload, &["y_axis", "label"]);
    let unit = str_at(payload, &["y_axis", "unit"]);
    if polar {
        let parts: Vec<&str> = [y_label, unit, x_label].into_iter().flatten().collect();
        let gap = 2 * cv.glyph_width();
        let total: i32 = parts.iter().map(|p| cv.text_width(p) + gap).sum();
        let mut x = WIDTH as i32 / 2 - total / 2;
        for part in parts {
            cv.text(x, 455, part);
            x += cv.text_width(part) + gap;
        }
    } else {
        if let Some(x) = x_label {
            cv.text_centered((plot.x0 + plot.x1) / 2, 448, x);
        }
        if let Some(y) = y_label {
            cv.text_vertical(14, (plot.y0 + plot.y1) / 2 - 30, y);
        }
        if let Some(u) = unit {
            cv.text_vertical(14, (plot.y0 + plot.y1) / 2 + 60, u);
        }
    }
    Rendered {
        image: cv.img,
        strings: cv.strings,
    }
}

fn category_ticks(cv: &mut Canvas<'_>, labels: &[String], xs: &[i32], plot: Rect) {
    for (l, &x) in labels.iter().zip(xs) {
        cv.line(x, plot.y1, x, plot.y1 + 4, INK, 0);
        cv.text_centered(x, plot.y1 + 10, l);
    }
}

fn slot_centers(n: usize, plot: Rect) -> Vec<i32> {
    let n = n.max(1) as i32;
    (0..n)
        .map(|i| plot.x0 + plot.w() * (2 * i + 1) / (2 * n))
        .collect()
}

fn draw_series(
    cv: &mut Canvas<'_>,
    chart_type: &str,
    payload: &Value,
    plot: Rect,
) -> Vec<(String, Rgb<u8>)> {
    let cats = categories(payload);
    let series: Vec<(String, Vec<f64>)> = rows(payload)
        .iter()
        .map(|r| (label_of(r), series_values(r)))
        .collect();
    let n = cats
        .len()
        .max(series.iter().map(|s| s.1.len()).max().unwrap_or(0));
    let xs = slot_centers(n, plot);
    let stacked = chart_type == "stacked_bar";
    let scale = if stacked {
        let totals = (0..n).map(|i| {
            series
                .iter()
                .map(|s| s.1.get(i).copied().unwrap_or(0.0))
                .sum::<f64>()
        });
        Scale::new(totals, plot.y1, plot.y0, true)
    } else {
        let bars = SERIES_BARS.contains(&chart_type);
        Scale::new(
            series.iter().flat_map(|s| s.1.iter().copied()),
            plot.y1,
            plot.y0,
            bars,
        )
    };
    let slot = plot.w() / n.max(1) as i32;
    let width = (slot * 8 / 10) / series.len().max(1) as i32;
    let mut bottoms = vec![0.0; n];
    let mut legend = Vec::new();
    for (k, (label, vals)) in series.iter().enumerate() {
        let c = cv.color(k);
        legend.push((label.clone(), c));
        let mut prev: Option<(i32, i32)> = None;
        for (i, &v) in vals.iter().enumerate().take(n) {
            let cx = xs[i];
            if SERIES_BARS.contains(&chart_type) {
                let x0 = cx - slot * 4 / 10 + width * k as i32;
                let top = scale.map(v);
                let base = scale.map(0.0);
                if chart_type == "bar_3d" {
                    let shade = Rgb([c[0] / 2 + 100, c[1] / 2 + 100, c[2] / 2 + 100]);
                    cv.fill(
                        Rect {
                            x0: x0 + 4,
                            y0: top - 4,
                            x1: x0 + width + 3,
                            y1: base - 4,
                        },
                        shade,
                    );
                }
                cv.fill(
                    Rect {
                        x0,
                        y0: top,
                        x1: x0 + width - 1,
                        y1: base,
                    },
                    c,
                );
                cv.value_label(x0 + width / 2, top, v);
            } else if stacked {
                let y_lo = scale.map(bottoms[i]);
                let y_hi = scale.map(bottoms[i] + v);
                cv.fill(
                    Rect {
                        x0: cx - slot * 3 / 10,
                        y0: y_hi,
                        x1: cx + slot * 3 / 10,
                        y1: y_lo,
                    },
                    c,
                );
                cv.value_label(cx, (y_lo + y_hi) / 2 + 5, v);
                bottoms[i] += v;
            } else {
                let y = scale.map(v);
                if let Some((px, py)) = prev {
                    if chart_type == "step_line" {
                        let mid = (px + cx) / 2;
                        cv.thick_line(px, py, mid, py, c);
                        cv.thick_line(mid, py, mid, y, c);
                        cv.thick_line(mid, y, cx, y, c);
                    } else {
                        cv.thick_line(px, py, cx, y, c);
                    }
                }
                if chart_type == "area" {
                    let light = Rgb([
                        (c[0] as u16 * 2 / 5 + 153) as u8,
                        (c[1] as u16 * 2 / 5 + 153) as u8,
                        (c[2] as u16 * 2 / 5 + 153) as u8,
                    ]);
                    if let Some((px, py)) = prev {
                        for x in px..cx {
                            let t = (x - px) as f64 / (cx - px).max(1) as f64;
                            let yy = py + ((y - py) as f64 * t) as i32;
                            for y2 in (yy + 2)..plot.y1 {
                                if cv.img.get_pixel(x as u32, y2 as u32) == &WHITE {
                                    cv.put(x, y2, light);
                                }
                            }
                        }
                    }
                }
                if chart_type != "step_line" {
                    cv.disc(cx, y, 3, c);
                }
                cv.value_label(cx, y, v);
                prev = Some((cx, y));
            }
        }
    }
    if chart_type == "multi_axis_line" && series.len() > 1 {
        cv.line(plot.x1, plot.y0, plot.x1, plot.y1, INK, 0);
    }
    category_ticks(cv, &cats, &xs, plot);
    legend
}

fn draw_radar(cv: &mut Canvas<'_>, payload: &Value, plot: Rect) -> Vec<(String, Rgb<u8>)> {
    let cats = categories(payload);
    let series: Vec<(String, Vec<f64>)> = rows(payload)
        .iter()
        .map(|r| (label_of(r), series_values(r)))
        .collect();
    let n = cats.len().max(3);
    let (cx, cy) = ((plot.x0 + plot.x1) / 2, (plot.y0 + plot.y1) / 2);
    let radius = (plot.h().min(plot.w()) / 2 - 20) as f64;
    let max = series
        .iter()
        .flat_map(|s| s.1.iter().copied())
        .fold(0.0_f64, f64::max)
        .max(1e-9);
    let point = |i: usize, r: f64| {
        let a = std::f64::consts::TAU * i as f64 / n as f64 - std::f64::consts::FRAC_PI_2;
        (
            cx + (r * a.cos()).round() as i32,
            cy + (r * a.sin()).round() as i32,
        )
    };
    for i in 0..n {
        let (x, y) = point(i, radius);
        cv.line(cx, cy, x, y, GRID_INK, 0);
    }
    for ring in 1..=4 {
        for i in 0..n {
            let (x0, y0) = point(i, radius * ring as f64 / 4.0);
            let (x1, y1) = point(i + 1, radius * ring as f64 / 4.0);
            cv.line(
                x0,
                y0,
                x1,
                y1,
                GRID_INK,
                if cv.style.grid == "none" { 0 } else { 3 },
            );
        }
    }
    let mut legend = Vec::new();
    for (k, (label, vals)) in series.iter().enumerate() {
        let c = cv.color(k);
        legend.push((label.clone(), c));
        let pts: Vec<(i32, i32)> = vals
            .iter()
            .take(n)
            .enumerate()
            .map(|(i, v)| point(i, radius * v.max(0.0) / max))
            .collect();
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            cv.thick_line(a.0, a.1, b.0, b.1, c);
        }
        for (&(x, y), &v) in pts.iter().zip(vals) {
            cv.disc(x, y, 3, c);
            cv.value_label(x, y, v);
        }
    }
    for (i, l) in cats.iter().enumerate() {
        let (x, y) = point(i, radius + 14.0);
        cv.text_centered(x, y - 4, l);
    }
    legend
}

fn draw_heatmap(cv: &mut Canvas<'_>, payload: &Value, plot: Rect) -> Vec<(String, Rgb<u8>)> {
    let cats = categories(payload);
    let series: Vec<(String, Vec<f64>)> = rows(payload)
        .iter()
        .map(|r| (label_of(r), series_values(r)))
        .collect();
    let n_cols = cats
        .len()
        .max(series.iter().map(|s| s.1.len()).max().unwrap_or(0))
        .max(1) as i32;
    let n_rows = series.len().max(1) as i32;
    let (lo, hi) = series
        .iter()
        .flat_map(|s| s.1.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    let (a, b) = (
        cv.color(0),
        cv.color(palette(&cv.style.color_scheme).len() / 2),
    );
    let area = Rect {
        x0: plot.x0 + 40,
        ..plot
    };
    for (r, (label, vals)) in series.iter().enumerate() {
        let y0 = area.y0 + area.h() * r as i32 / n_rows;
        let y1 = area.y0 + area.h() * (r as i32 + 1) / n_rows;
        cv.text(plot.x0 - 70, (y0 + y1) / 2 - 4, label);
        for (j, &v) in vals.iter().enumerate().take(n_cols as usize) {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            let mix = |i: usize| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8;
            let x0 = area.x0 + area.w() * j as i32 / n_cols;
            let x1 = area.x0 + area.w() * (j as i32 + 1) / n_cols;
            cv.fill(
                Rect {
                    x0,
                    y0,
                    x1: x1 - 1,
                    y1: y1 - 1,
                },
                Rgb([mix(0), mix(1), mix(2)]),
            );
            cv.value_label((x0 + x1) / 2, (y0 + y1) / 2 + 5, v);
        }
    }
    let xs: Vec<i32> = (0..n_cols)
        .map(|j| area.x0 + area.w() * (2 * j + 1) / (2 * n_cols))
        .collect();
    category_ticks(cv, &cats, &xs, area);
    Vec::new()
}

fn proportion_rows(payload: &Value) -> Vec<(String, f64)> {
    rows(payload)
        .iter()
        .map(|r| (label_of(r), num(r, "value")))
        .collect()
}

fn draw_wedges(
    cv: &mut Canvas<'_>,
    chart_type: &str,
    payload: &Value,
    plot: Rect,
) -> Vec<(String, Rgb<u8>)> {
    let items = proportion_rows(payload);
    let total: f64 = items.iter().map(|i| i.1.max(0.0)).sum::<f64>().max(1e-9);
    let max = items.iter().map(|i| i.1).fold(0.0_f64, f64::max).max(1e-9);
    let (cx, cy) = ((plot.x0 + plot.x1) / 2 - 40, (plot.y0 + plot.y1) / 2);
    let radius = (plot.h() / 2 - 10) as f64;
    let n = items.len().max(1);
    // cumulative turn fractions, clockwise from 12 o'clock
    let mut bounds = Vec::with_capacity(n + 1);
    bounds.push(0.0);
    for (i, it) in items.iter().enumerate() {
        let share = if chart_type == "rose" {
            1.0 / n as f64
        } else {
            it.1.max(0.0) / total
        };
        bounds.push(bounds[i] + share);
    }
    let r_of = |i: usize| {
        if chart_type == "rose" {
            radius * (items[i].1.max(0.0) / max).sqrt()
        } else {
            radius
        }
    };
    let inner = if chart_type == "ring" {
        radius * 0.55
    } else {
        0.0
    };
    let r_i = radius as i32;
    for y in -r_i..=r_i {
        for x in -r_i..=r_i {
            let d = ((x * x + y * y) as f64).sqrt();
            if d > radius || d < inner {
                continue;
            }
            let mut turn = (x as f64).atan2(-(y as f64)) / std::f64::consts::TAU;
            if turn < 0.0 {
                turn += 1.0;
            }
            let Some(i) = (0..items.len()).find(|&i| turn < bounds[i + 1]) else {
                continue;
            };
            if d <= r_of(i) {
                let c = cv.textured(cx + x, cy + y, cv.color(i));
                let edge = (turn - bounds[i]) * d * std::f64::consts::TAU < 1.0;
                cv.put(cx + x, cy + y, if edge { WHITE } else { c });
            }
        }
    }
    let mut legend = Vec::new();
    for (i, (label, v)) in items.iter().enumerate() {
        legend.push((label.clone(), cv.color(i)));
        let mid = (bounds[i] + bounds[i + 1]) / 2.0 * std::f64::consts::TAU;
        let r = if chart_type == "ring" {
            radius * 0.78
        } else {
            r_of(i) * 0.65
        };
        cv.value_label(
            cx + (r * mid.sin()) as i32,
            cy - (r * mid.cos()) as i32 + 5,
            *v,
        );
    }
    legend
}

fn draw_funnel(cv: &mut Canvas<'_>, payload: &Value, plot: Rect) -> Vec<(String, Rgb<u8>)> {
    let items = proportion_rows(payload);
    let top = items.iter().map(|i| i.1).fold(0.0_f64, f64::max).max(1e-9);
    let n = items.len().max(1) as i32;
    let cx = (plot.x0 + plot.x1) / 2;
    let mut legend = Vec::new();
    for (i, (label, v)) in items.iter().enumerate() {
        let c = cv.color(i);
        legend.push((label.clone(), c));
        let half = ((plot.w() / 2 - 10) as f64 * v.max(0.0) / top) as i32;
        let y0 = plot.y0 + plot.h() * i as i32 / n;
        let y1 = plot.y0 + plot.h() * (i as i32 + 1) / n - 4;
        cv.fill(
            Rect {
                x0: cx - half,
                y0,
                x1: cx + half,
                y1,
            },
            c,
        );
        cv.value_label(cx, (y0 + y1) / 2 + 5, *v);
    }
    legend
}

fn draw_treemap(cv: &mut Canvas<'_>, payload: &Value, plot: Rect) -> Vec<(String, Rgb<u8>)> {
    let items = proportion_rows(payload);
    let total: f64 = items.iter().map(|i| i.1.max(0.0)).sum::<f64>().max(1e-9);
    let mut x = plot.x0 as f64;
    let mut legend = Vec::new();
    for (i, (label, v)) in items.iter().enumerate() {
        let c = cv.color(i);
        legend.push((label.clone(), c));
        let w = plot.w() as f64 * v.max(0.0) / total;
        let x0 = x.round() as i32;
        let x1 = (x + w).round() as i32;
        cv.fill(
            Rect {
                x0,
                y0: plot.y0,
                x1: x1 - 2,
                y1: plot.y1,
            },
            c,
        );
        cv.value_label((x0 + x1) / 2, (plot.y0 + plot.y1) / 2, *v);
        x += w;
    }
    legend
}

fn draw_points(cv: &mut Canvas<'_>, payload: &Value, plot: Rect) -> Vec<(String, Rgb<u8>)> {
    let pts = rows(payload);
    let sx = Scale::new(pts.iter().map(|p| num(p, "x")), plot.x0, plot.x1, false);
    let sy = Scale::new(pts.iter().map(|p| num(p, "y")), plot.y1, plot.y0, false);
    let mut legend = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let c = cv.color(i);
        legend.push((label_of(p), c));
        let (x, y) = (sx.map(num(p, "x")), sy.map(num(p, "y")));
        let size = p.get("size").and_then(Value::as_f64);
        let r = size.map_or(4, |s| (3.0 + s.max(0.0).sqrt() * 2.2) as i32);
        cv.disc(x, y, r, c);
        if cv.style.annotated {
            let mut dx = x - 30;
            for v in [Some(num(p, "x")), Some(num(p, "y")), size]
                .into_iter()
                .flatten()
            {
                let s = format_number(v);
                cv.text(dx, y - r - 12, &s);
                dx += cv.text_width(&s) + cv.glyph_width();
            }
        }
    }
    legend
}

fn draw_histogram(cv: &mut Canvas<'_>, payload: &Value, plot: Rect) -> Vec<(String, Rgb<u8>)> {
    let bins = rows(payload);
    let scale = Scale::new(bins.iter().map(|b| num(b, "count")), plot.y1, plot.y0, true);
    let n = bins.len().max(1) as i32;
    let c = cv.color(0);
    let mut labels = Vec::new();
    let mut xs = Vec::new();
    for (i, b) in bins.iter().enumerate() {
        let x0 = plot.x0 + plot.w() * i as i32 / n;
        let x1 = plot.x0 + plot.w() * (i as i32 + 1) / n;
        let v = num(b, "count");
        let top = scale.map(v);
        cv.fill(
            Rect {
                x0,
                y0: top,
                x1,
                y1: plot.y1,
            },
            c,
        );
        cv.outline(
            Rect {
                x0,
                y0: top,
                x1,
                y1: plot.y1,
            },
            INK,
        );
        cv.value_label((x0 + x1) / 2, top, v);
        labels.push(label_of(b));
        xs.push((x0 + x1) / 2);
    }
    category_ticks(cv, &labels, &xs, plot);
    Vec::new()
}

fn draw_boxes(cv: &mut Canvas<'_>, payload: &Value, plot: Rect) -> Vec<(String, Rgb<u8>)> {
    const KEYS: [&str; 5] = ["min", "q1", "median", "q3", "max"];
    let groups = rows(payload);
    let scale = Scale::new(
        groups.iter().flat_map(|g| KEYS.map(|k| num(g, k))),
        plot.y1,
        plot.y0,
        false,
    );
    let xs = slot_centers(groups.len(), plot);
    let half = plot.w() / (groups.len().max(1) as i32 * 5);
    let mut labels = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let c = cv.color(i);
        let [lo, q1, med, q3, hi] = KEYS.map(|k| scale.map(num(g, k)));
        let x = xs[i];
        cv.line(x, lo, x, q1, INK, 0);
        cv.line(x, q3, x, hi, INK, 0);
        cv.line(x - half / 2, lo, x + half / 2, lo, INK, 0);
        cv.line(x - half / 2, hi, x + half / 2, hi, INK, 0);
        cv.fill(
            Rect {
                x0: x - half,
                y0: q3,
                x1: x + half,
                y1: q1,
            },
            c,
        );
        cv.outline(
            Rect {
                x0: x - half,
                y0: q3,
                x1: x + half,
                y1: q1,
            },
            INK,
        );
        cv.line(x - half, med, x + half, med, INK, 0);
        if cv.style.annotated {
            for k in KEYS {
                let v = num(g, k);
                cv.text(x + half + 4, scale.map(v) - 4, &format_number(v));
            }
        }
        labels.push(label_of(g));
    }
    category_ticks(cv, &labels, &xs, plot);
    Vec::new()
}

fn draw_candles(cv: &mut Canvas<'_>, payload: &Value, plot: Rect) -> Vec<(String, Rgb<u8>)> {
    let bars = rows(payload);
    let scale = Scale::new(
        bars.iter().flat_map(|b| [num(b, "low"), num(b, "high")]),
        plot.y1,
        plot.y0,
        false,
    );
    let xs = slot_centers(bars.len(), plot);
    let half = plot.w() / (bars.len().max(1) as i32 * 4);
    let (up, down) = if cv.style.color_scheme == "tab10" {
        (Rgb([44, 160, 44]), Rgb([214, 39, 40]))
    } else {
        (cv.color(0), cv.color(1))
    };
    let mut labels = Vec::new();
    for (i, b) in bars.iter().enumerate() {
        let (o, h, l, c) = (
            num(b, "open"),
            num(b, "high"),
            num(b, "low"),
            num(b, "close"),
        );
        let x = xs[i];
        cv.line(x, scale.map(l), x, scale.map(h), INK, 0);
        let body = Rect {
            x0: x - half,
            y0: scale.map(o.max(c)),
            x1: x + half,
            y1: scale.map(o.min(c)).max(scale.map(o.max(c)) + 1),
        };
        cv.fill(body, if c >= o { up } else { down });
        cv.outline(body, INK);
        if cv.style.annotated {
            for v in [o, h, l, c] {
                cv.text(x + half + 3, scale.map(v) - 4, &format_number(v));
            }
        }
        labels.push(label_of(b));
    }
    category_ticks(cv, &labels, &xs, plot);
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::offline::build_payload;
    use crate::forge::style::style_at;
    use crate::model::KeyPath;
    use crate::registry::{default_chart_types, topic_vocab};
    use crate::table::flatten_cells;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_default_type_renders_and_records_title() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for def in default_chart_types() {
            let p = build_payload(&def, &topic_vocab("tourism"), &mut rng);
            let r = render_bank(&def.name, &style_at(3, true), &p);
            assert_eq!(r.image.dimensions(), (WIDTH, HEIGHT));
            assert!(
                r.strings.iter().any(|s| s == p["title"].as_str().unwrap()),
                "{}",
                def.name
            );
            assert!(
                r.image
                    .pixels()
                    .any(|px| *px != WHITE && *px != INK && *px != GRID_INK),
                "{}",
                def.name
            );
        }
    }

    #[test]
    fn annotation_controls_value_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for def in default_chart_types() {
            let p = build_payload(&def, &topic_vocab("healthcare trends"), &mut rng);
            let values: Vec<String> = flatten_cells(&p, &KeyPath::new("data"))
                .unwrap()
                .iter()
                .map(|c| format_number(c.value))
                .collect();
            let on = render_bank(&def.name, &style_at(9, true), &p).strings;
            let off = render_bank(&def.name, &style_at(9, false), &p).strings;
            for v in &values {
                assert!(on.contains(v), "{} annotated lacks {v}", def.name);
                assert!(!off.contains(v), "{} unannotated shows {v}", def.name);
            }
        }
    }

    #[test]
    fn tolerates_garbage() {
        let r = render_bank("bar", &style_at(0, true), &serde_json::json!({"data": 5}));
        assert!(r.strings.is_empty());
    }

    #[test]
    fn styles_change_pixels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let def = &default_chart_types()[0];
        let p = build_payload(def, &topic_vocab("tourism"), &mut rng);
        let a = render_bank("bar", &style_at(0, true), &p).image;
        let b = render_bank("bar", &style_at(700, true), &p).image;
        assert_ne!(a, b);
        assert_eq!(a, render_bank("bar", &style_at(0, true), &p).image);
    }
}
