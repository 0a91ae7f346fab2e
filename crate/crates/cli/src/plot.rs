use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kcbo::experiments::Table;
use kcbo::KcboError;
use plotters::prelude::*;

/// Columns that label a series rather than being plotted.
const GROUP_COLUMNS: [&str; 2] = ["J", "epsilon"];

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(23, 190, 207),
];

type Series = Vec<(f64, f64)>;

/// Writes one SVG per value column of the CSV into `dir` and returns the paths.
///
/// The x axis is `t` when present, otherwise the first column. Rows are split into one
/// line per distinct value of the grouping columns. An axis whose values are all
/// positive and span more than a decade is drawn on a log10 scale.
pub fn plot_series(input: &Path, dir: &Path) -> kcbo::Result<Vec<PathBuf>> {
    let table = Table::read_csv(input)?;
    if table.columns.is_empty() || table.rows.is_empty() {
        return Err(KcboError::Config(format!("{} holds no data", input.display())));
    }
    let x_index = table.columns.iter().position(|c| c == "t").unwrap_or(0);
    let groups: Vec<usize> = (0..table.columns.len())
        .filter(|&k| k != x_index && GROUP_COLUMNS.contains(&table.columns[k].as_str()))
        .collect();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (k, name) in table.columns.iter().enumerate() {
        if k == x_index || groups.contains(&k) {
            continue;
        }
        let mut lines: BTreeMap<String, Series> = BTreeMap::new();
        for row in &table.rows {
            if let (Some(x), Some(y)) = (row[x_index], row[k]) {
                if x.is_finite() && y.is_finite() {
                    let label = groups
                        .iter()
                        .map(|&g| format!("{}={}", table.columns[g], row[g].map_or("?".into(), |v| v.to_string())))
                        .collect::<Vec<_>>()
                        .join(" ");
                    lines.entry(label).or_default().push((x, y));
                }
            }
        }
        if lines.values().all(Vec::is_empty) {
            continue;
        }
        let path = dir.join(format!("{}.svg", sanitize(name)));
        draw(&path, &table.columns[x_index], name, &lines)
            .map_err(|e| KcboError::Numerical(format!("plot {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

fn use_log(values: impl Iterator<Item = f64> + Clone) -> bool {
    let positive = values.clone().all(|v| v > 0.0);
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    positive && hi > 10.0 * lo
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.02 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn draw(
    path: &Path,
    x_name: &str,
    y_name: &str,
    lines: &BTreeMap<String, Series>,
) -> Result<(), Box<dyn std::error::Error>> {
    let all = || lines.values().flatten();
    let log_x = use_log(all().map(|p| p.0)) && x_name != "t";
    let log_y = use_log(all().map(|p| p.1));
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let (x0, x1) = bounds(all().map(|p| tx(p.0)));
    let (y0, y1) = bounds(all().map(|p| ty(p.1)));
    let label = |name: &str, log: bool| if log { format!("log10 {name}") } else { name.to_string() };

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(y_name, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)?;
    chart
        .configure_mesh()
        .x_desc(label(x_name, log_x))
        .y_desc(label(y_name, log_y))
        .draw()?;
    for (i, (name, points)) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let series = chart.draw_series(LineSeries::new(points.iter().map(|&(x, y)| (tx(x), ty(y))), &color))?;
        if !name.is_empty() {
            series.label(name.clone()).legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
        }
    }
    if lines.len() > 1 || lines.keys().any(|k| !k.is_empty()) {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()?;
    }
    root.present()?;
    Ok(())
}
