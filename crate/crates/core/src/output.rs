//! Numeric tables and their CSV/SVG renderings.
//!
//! CSV is the primary artifact: a header row, one record per data row,
//! every value in decimal notation with 12 significant digits and no
//! locale influence, newline-terminated. The same table written twice is
//! byte-identical.
//!
//! SVG output is a minimal self-contained SVG 1.1 document, either a line
//! plot (one polyline per series, optional log axes) or a heatmap with a
//! colorbar. No external renderer, font or script is referenced.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// How a table wants to be plotted; `None` means CSV only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlotHint {
    None,
    /// Line plot of `ys` columns against column `x`, optionally split into
    /// one polyline per distinct value of the `series` column.
    Lines {
        x: usize,
        ys: Vec<usize>,
        series: Option<usize>,
        log_x: bool,
        log_y: bool,
    },
    /// Matrix heatmap: first column holds row labels, remaining column
    /// headers are the numeric x grid.
    Heatmap { log_x: bool, log_y: bool },
}

/// Column-labelled matrix of f64 values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub plot: PlotHint,
}

impl Table {
    pub fn new(headers: Vec<String>, plot: PlotHint) -> Self {
        Table {
            headers,
            rows: Vec::new(),
            plot,
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn ensure_nonempty(&self) -> Result<()> {
        if self.rows.is_empty() || self.headers.is_empty() {
            return Err(Error::validation("table", "refusing to emit an empty table"));
        }
        Ok(())
    }
}

/// Decimal notation with `digits` significant digits and trailing zeros
/// trimmed. Never switches to scientific notation.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // The exponent of the scientific form is exact, unlike log10 + floor.
    let sci = format!("{:e}", x.abs());
    let exp: i32 = sci[sci.find('e').expect("scientific form") + 1..]
        .parse()
        .expect("exponent digits");
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Render the table as CSV text.
pub fn csv_string(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.headers.join(","));
    out.push('\n');
    for row in &table.rows {
        let mut first = true;
        for &v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format_significant(v, 12));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Write the table as CSV.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    table.ensure_nonempty()?;
    write_file(path, &csv_string(table))
}

/// Write the table as an SVG plot according to its plot hint.
pub fn emit_svg(table: &Table, path: &Path) -> Result<()> {
    table.ensure_nonempty()?;
    let svg = match &table.plot {
        PlotHint::None => {
            return Err(Error::validation(
                "format",
                "this experiment has no plot rendering; use csv output",
            ))
        }
        PlotHint::Lines {
            x,
            ys,
            series,
            log_x,
            log_y,
        } => render_lines(table, *x, ys, *series, *log_x, *log_y)?,
        PlotHint::Heatmap { log_x, log_y } => render_heatmap(table, *log_x, *log_y)?,
    };
    write_file(path, &svg)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;

/// Five-stop palette stretched over [0, 1] for heatmap cells.
const COLOR_STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [0x44, 0x01, 0x54]),
    (0.25, [0x3b, 0x52, 0x8b]),
    (0.5, [0x21, 0x91, 0x8c]),
    (0.75, [0x5e, 0xc9, 0x62]),
    (1.0, [0xfd, 0xe7, 0x25]),
];

/// Line colors cycled across series.
const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn from_values(values: impl Iterator<Item = f64>, log: bool) -> Result<Axis> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if log && !(v > 0.0) {
                return Err(Error::validation(
                    "plot",
                    format!("log axis requires positive values, got {v}"),
                ));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation("plot", "no finite values to plot"));
        }
        if lo == hi {
            // Degenerate span: widen symmetrically so the point is visible.
            if log {
                lo /= 2.0;
                hi *= 2.0;
            } else {
                lo -= 0.5;
                hi += 0.5;
            }
        }
        Ok(Axis { lo, hi, log })
    }

    /// Map a data value to [0, 1] along the axis.
    fn unit(&self, v: f64) -> f64 {
        if self.log {
            (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    /// Tick positions: decades for log axes, 6 even steps otherwise.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let first = self.lo.log10().ceil() as i32;
            let last = self.hi.log10().floor() as i32;
            if first > last {
                return vec![self.lo, self.hi];
            }
            (first..=last).map(|d| 10f64.powi(d)).collect()
        } else {
            let n = 6;
            (0..=n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64)
                .collect()
        }
    }
}

fn tick_label(v: f64) -> String {
    format_significant(v, 4)
}

fn svg_open(out: &mut String) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    );
}

fn draw_frame_and_ticks(
    out: &mut String,
    xaxis: &Axis,
    yaxis: &Axis,
    x_label: &str,
    y_label: &str,
) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = write!(
        out,
        "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"black\"/>\n",
        x1 - x0,
        y0 - y1
    );
    for t in xaxis.ticks() {
        let px = x0 + xaxis.unit(t) * (x1 - x0);
        let _ = write!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{y0:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
             <text x=\"{px:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"middle\">{}</text>\n",
            y0 + 6.0,
            y0 + 20.0,
            tick_label(t)
        );
    }
    for t in yaxis.ticks() {
        let py = y0 - yaxis.unit(t) * (y0 - y1);
        let _ = write!(
            out,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"end\">{}</text>\n",
            x0 - 6.0,
            x0 - 10.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn render_lines(
    table: &Table,
    x_col: usize,
    y_cols: &[usize],
    series_col: Option<usize>,
    log_x: bool,
    log_y: bool,
) -> Result<String> {
    let max_col = y_cols.iter().copied().max().unwrap_or(0).max(x_col);
    if table.headers.len() <= max_col || y_cols.is_empty() {
        return Err(Error::validation("plot", "plot hint refers to missing columns"));
    }
    let xaxis = Axis::from_values(table.rows.iter().map(|r| r[x_col]), log_x)?;
    let yaxis = Axis::from_values(
        table
            .rows
            .iter()
            .flat_map(|r| y_cols.iter().map(move |&c| r[c])),
        log_y,
    )?;

    // Split rows into series: consecutive runs of equal series-column value.
    let mut groups: Vec<(Option<f64>, Vec<&Vec<f64>>)> = Vec::new();
    match series_col {
        None => groups.push((None, table.rows.iter().collect())),
        Some(sc) => {
            for row in &table.rows {
                match groups.last_mut() {
                    Some((Some(tag), rows)) if *tag == row[sc] => rows.push(row),
                    _ => groups.push((Some(row[sc]), vec![row])),
                }
            }
        }
    }

    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let mut out = String::new();
    svg_open(&mut out);
    draw_frame_and_ticks(
        &mut out,
        &xaxis,
        &yaxis,
        &table.headers[x_col],
        &table.headers[y_cols[0]],
    );

    let mut color_idx = 0;
    let mut legend_y = MARGIN_T + 14.0;
    for (tag, rows) in &groups {
        for &yc in y_cols {
            let color = SERIES_COLORS[color_idx % SERIES_COLORS.len()];
            color_idx += 1;
            let mut points = String::new();
            for row in rows {
                let px = x0 + xaxis.unit(row[x_col]) * (x1 - x0);
                let py = y0 - yaxis.unit(row[yc]) * (y0 - y1);
                let _ = write!(points, "{px:.2},{py:.2} ");
            }
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                points.trim_end()
            );
            let label = match tag {
                Some(v) => format!(
                    "{}={} {}",
                    table.headers[series_col.expect("series column")],
                    format_significant(*v, 4),
                    table.headers[yc]
                ),
                None => table.headers[yc].clone(),
            };
            let _ = write!(
                out,
                "<line x1=\"{:.2}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" \
                 stroke=\"{color}\" stroke-width=\"1.5\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{label}</text>\n",
                x1 + 8.0,
                x1 + 28.0,
                x1 + 34.0,
                legend_y + 4.0
            );
            legend_y += 16.0;
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn color_for(unit: f64) -> String {
    let u = unit.clamp(0.0, 1.0);
    let mut rgb = COLOR_STOPS[COLOR_STOPS.len() - 1].1;
    for w in COLOR_STOPS.windows(2) {
        let (u0, c0) = w[0];
        let (u1, c1) = w[1];
        if u <= u1 {
            let f = (u - u0) / (u1 - u0);
            rgb = [
                (c0[0] as f64 + f * (c1[0] as f64 - c0[0] as f64)).round() as u8,
                (c0[1] as f64 + f * (c1[1] as f64 - c0[1] as f64)).round() as u8,
                (c0[2] as f64 + f * (c1[2] as f64 - c0[2] as f64)).round() as u8,
            ];
            break;
        }
    }
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

fn render_heatmap(table: &Table, log_x: bool, log_y: bool) -> Result<String> {
    if table.headers.len() < 2 {
        return Err(Error::validation("plot", "heatmap needs at least one value column"));
    }
    let xs: Vec<f64> = table.headers[1..]
        .iter()
        .map(|h| {
            h.parse::<f64>().map_err(|_| {
                Error::validation("plot", format!("heatmap column header {h:?} is not numeric"))
            })
        })
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let xaxis = Axis::from_values(xs.iter().copied(), log_x)?;
    let yaxis = Axis::from_values(ys.iter().copied(), log_y)?;
    let values = table.rows.iter().flat_map(|r| r[1..].iter().copied());
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for v in values {
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    if vmin == vmax {
        vmin -= 0.5;
        vmax += 0.5;
    }

    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let mut out = String::new();
    svg_open(&mut out);

    // Cell edges sit halfway (in axis space) between neighboring grid points.
    let edges = |grid: &[f64], axis: &Axis| -> Vec<f64> {
        let mut units: Vec<f64> = grid.iter().map(|&g| axis.unit(g)).collect();
        let mut e = Vec::with_capacity(grid.len() + 1);
        if units.len() == 1 {
            units.push(units[0] + 1.0);
        }
        e.push(units[0] - (units[1] - units[0]) / 2.0);
        for w in units.windows(2) {
            e.push((w[0] + w[1]) / 2.0);
        }
        let last = units[units.len() - 1];
        let prev = units[units.len() - 2];
        e.push(last + (last - prev) / 2.0);
        e
    };
    let xe = edges(&xs, &xaxis);
    let ye = edges(&ys, &yaxis);

    for (ri, row) in table.rows.iter().enumerate() {
        for (ci, &v) in row[1..].iter().enumerate() {
            let px0 = x0 + xe[ci].clamp(0.0, 1.0) * (x1 - x0);
            let px1 = x0 + xe[ci + 1].clamp(0.0, 1.0) * (x1 - x0);
            let py0 = y0 - ye[ri].clamp(0.0, 1.0) * (y0 - y1);
            let py1 = y0 - ye[ri + 1].clamp(0.0, 1.0) * (y0 - y1);
            let _ = write!(
                out,
                "<rect class=\"cell\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"{}\"/>\n",
                px0.min(px1),
                py0.min(py1),
                (px1 - px0).abs(),
                (py0 - py1).abs(),
                color_for((v - vmin) / (vmax - vmin))
            );
        }
    }
    draw_frame_and_ticks(&mut out, &xaxis, &yaxis, "column grid", &table.headers[0]);

    // Colorbar with the same palette as the cells.
    let _ = write!(
        out,
        "<defs><linearGradient id=\"cb\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n"
    );
    for (u, _) in COLOR_STOPS {
        let _ = write!(
            out,
            "<stop offset=\"{:.2}\" stop-color=\"{}\"/>\n",
            u,
            color_for(u)
        );
    }
    let bar_x = x1 + 20.0;
    let _ = write!(
        out,
        "</linearGradient></defs>\n\
         <rect x=\"{bar_x:.2}\" y=\"{y1:.2}\" width=\"18\" height=\"{:.2}\" fill=\"url(#cb)\" \
         stroke=\"black\"/>\n\
         <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n\
         <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
        y0 - y1,
        bar_x + 24.0,
        y0,
        tick_label(vmin),
        bar_x + 24.0,
        y1 + 10.0,
        tick_label(vmax)
    );
    out.push_str("</svg>\n");
    Ok(out)
}
