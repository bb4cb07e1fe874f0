//! CSV, JSON and SVG output for sweep records.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sweep::SweepRecord;
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Svg => "svg",
        }
    }
}

pub fn records_csv(records: &[SweepRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io {
        path: PathBuf::from("<memory>"),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn records_json(records: &[SweepRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Energy against `ε` (log axis), one polyline per `k`, next to a heat map
/// of oscillation counts over the `(k, ε)` grid.
pub fn records_svg(records: &[SweepRecord]) -> String {
    let (pw, ph, pad) = (420.0, 300.0, 50.0);
    let mut s = String::new();
    let width = 2.0 * pw + 3.0 * pad;
    let height = ph + 2.0 * pad;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let ks = distinct(records.iter().map(|r| r.k));
    let eps = distinct(records.iter().map(|r| r.epsilon));
    let finite: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.total_energy.is_finite())
        .collect();
    let (emin, emax) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.total_energy), b.max(r.total_energy))
        });
    let (emin, emax) = if emin < emax {
        (emin, emax)
    } else {
        (emin - 1.0, emin + 1.0)
    };
    let (lmin, lmax) = (eps[0].ln(), eps[eps.len() - 1].ln());
    let xs = |e: f64| {
        if lmax > lmin {
            pad + (e.ln() - lmin) / (lmax - lmin) * pw
        } else {
            pad + 0.5 * pw
        }
    };
    let ys = |v: f64| pad + ph - (v - emin) / (emax - emin) * ph;

    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">energy vs epsilon</text>"#,
        pad + pw / 2.0,
        pad - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="{}">{emin:.4}</text>"#,
        pad + ph + 15.0
    );
    let _ = writeln!(s, r#"<text x="{pad}" y="{}">{emax:.4}</text>"#, pad - 2.0);
    for (i, &k) in ks.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = finite
            .iter()
            .filter(|r| r.k == k)
            .map(|r| (xs(r.epsilon), ys(r.total_energy)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}"/>"#,
            path.join(" ")
        );
        for (x, y) in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            pad + pw - 60.0,
            pad + 15.0 + 13.0 * i as f64,
            escape(&format!("k = {k}"))
        );
    }

    let ox = 2.0 * pad + pw;
    let max_osc = records
        .iter()
        .map(|r| r.oscillations)
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let (cw, chh) = (pw / eps.len() as f64, ph / ks.len() as f64);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">oscillations over (epsilon, k)</text>"#,
        ox + pw / 2.0,
        pad - 10.0
    );
    for r in records {
        let i = eps.iter().position(|&e| e == r.epsilon).unwrap_or(0);
        let j = ks.iter().position(|&k| k == r.k).unwrap_or(0);
        let shade = (255.0 * (1.0 - r.oscillations as f64 / max_osc)).round() as u8;
        let (x, y) = (ox + i as f64 * cw, pad + ph - (j + 1) as f64 * chh);
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{chh:.2}" fill="rgb(255,{shade},{shade})" stroke="grey"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x + cw / 2.0,
            y + chh / 2.0 + 4.0,
            r.oscillations
        );
    }
    for (i, e) in eps.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{e}</text>"#,
            ox + (i as f64 + 0.5) * cw,
            pad + ph + 15.0
        );
    }
    for (j, k) in ks.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{k}</text>"#,
            ox - 4.0,
            pad + ph - (j as f64 + 0.5) * chh
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<dir>/<stem>.<ext>` for `format` and returns the path.
pub fn emit_report(
    records: &[SweepRecord],
    format: ReportFormat,
    dir: &Path,
    stem: &str,
) -> Result<PathBuf> {
    if records.is_empty() {
        return Err(LabError::EmptyReport);
    }
    let body = match format {
        ReportFormat::Csv => records_csv(records)?,
        ReportFormat::Json => records_json(records)?,
        ReportFormat::Svg => records_svg(records),
    };
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| LabError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    std::fs::write(&path, body).map_err(io(&path))?;
    Ok(path)
}
