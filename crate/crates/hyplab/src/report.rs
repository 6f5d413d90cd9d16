//! Deterministic run artifacts: RFC-4180 CSV tables, self-contained SVG
//! plots, and the run manifest with a config hash.
//!
//! All numeric formatting goes through `fmt_f64` (shortest round-trip form),
//! so identical inputs always produce identical bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("row width {got} does not match header width {want}")]
    RowWidth { got: usize, want: usize },
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Shortest round-trip decimal form; non-finite values get explicit names.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x}")
    }
}

/// RFC-4180 field quoting: quote when the field contains a comma, a quote,
/// or a line break; embedded quotes are doubled.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write a CSV table with mandatory header and CRLF line endings.
pub fn write_csv(
    path: &Path,
    headers: &[&str],
    rows: &[Vec<String>],
) -> Result<(), ReportError> {
    let mut out = String::new();
    out.push_str(&headers.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
    out.push_str("\r\n");
    for row in rows {
        if row.len() != headers.len() {
            return Err(ReportError::RowWidth { got: row.len(), want: headers.len() });
        }
        out.push_str(&row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        out.push_str("\r\n");
    }
    std::fs::write(path, out).map_err(|source| ReportError::Io { path: path.into(), source })
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Minimal line plot; axes may be logarithmic (base 10) and get decade tick
/// marks in that case.
#[derive(Clone, Debug)]
pub struct SvgPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub width: u32,
    pub height: u32,
}

impl SvgPlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        SvgPlot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
            width: 720,
            height: 480,
        }
    }

    pub fn add_series(&mut self, label: &str, points: Vec<(f64, f64)>) {
        self.series.push(Series { label: label.into(), points });
    }

    fn tx(&self, x: f64) -> f64 {
        if self.log_x { x.log10() } else { x }
    }

    fn ty(&self, y: f64) -> f64 {
        if self.log_y { y.log10() } else { y }
    }

    pub fn render(&self) -> String {
        let (w, h) = (self.width as f64, self.height as f64);
        let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 55.0);
        let (pw, ph) = (w - ml - mr, h - mt - mb);

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                let (tx, ty) = (self.tx(x), self.ty(y));
                if tx.is_finite() && ty.is_finite() {
                    xs.push(tx);
                    ys.push(ty);
                }
            }
        }
        let (x0, x1) = span(&xs);
        let (y0, y1) = span(&ys);
        let px = |x: f64| ml + (self.tx(x) - x0) / (x1 - x0) * pw;
        let py = |y: f64| mt + ph - (self.ty(y) - y0) / (y1 - y0) * ph;

        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
             viewBox=\"0 0 {} {}\">\n",
            self.width, self.height, self.width, self.height
        );
        let _ = write!(svg, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", w, h);
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
            w / 2.0,
            xml_escape(&self.title)
        );
        // frame
        let _ = write!(
            svg,
            "<rect x=\"{ml}\" y=\"{mt}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" \
             stroke=\"black\"/>\n"
        );
        // ticks: 5 per axis (decades when log)
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let vx = if self.log_x { 10f64.powf(fx) } else { fx };
            let sx = ml + pw * i as f64 / 4.0;
            let _ = write!(
                svg,
                "<line x1=\"{sx}\" y1=\"{}\" x2=\"{sx}\" y2=\"{}\" stroke=\"black\"/>\n",
                mt + ph,
                mt + ph + 5.0
            );
            let _ = write!(
                svg,
                "<text x=\"{sx}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
                mt + ph + 18.0,
                tick_label(vx)
            );
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let vy = if self.log_y { 10f64.powf(fy) } else { fy };
            let sy = mt + ph - ph * i as f64 / 4.0;
            let _ = write!(
                svg,
                "<line x1=\"{}\" y1=\"{sy}\" x2=\"{ml}\" y2=\"{sy}\" stroke=\"black\"/>\n",
                ml - 5.0
            );
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
                ml - 8.0,
                sy + 4.0,
                tick_label(vy)
            );
        }
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
            ml + pw / 2.0,
            h - 12.0,
            xml_escape(&self.x_label)
        );
        let _ = write!(
            svg,
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" \
             transform=\"rotate(-90 16 {})\">{}</text>\n",
            mt + ph / 2.0,
            mt + ph / 2.0,
            xml_escape(&self.y_label)
        );

        let palette = ["#1b6ca8", "#c23b22", "#2e8540", "#8a4f9e", "#b8860b", "#444444"];
        for (si, s) in self.series.iter().enumerate() {
            let color = palette[si % palette.len()];
            let mut d = String::new();
            for &(x, y) in &s.points {
                if !(self.tx(x).is_finite() && self.ty(y).is_finite()) {
                    continue;
                }
                let cmd = if d.is_empty() { "M" } else { "L" };
                let _ = write!(d, "{cmd}{:.2} {:.2} ", px(x), py(y));
            }
            let _ = write!(
                svg,
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                d.trim_end()
            );
            let ly = mt + 16.0 + 16.0 * si as f64;
            let _ = write!(
                svg,
                "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
                 stroke-width=\"2\"/>\n",
                ml + pw - 150.0,
                ml + pw - 125.0
            );
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n",
                ml + pw - 120.0,
                ly + 4.0,
                xml_escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }

    pub fn write(&self, path: &Path) -> Result<(), ReportError> {
        std::fs::write(path, self.render())
            .map_err(|source| ReportError::Io { path: path.into(), source })
    }
}

fn span(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Manifest echoing the resolved config plus fitted constants and verdicts;
/// the config hash ties artifacts to the exact inputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub experiment: String,
    pub config_sha256: String,
    pub seed: u64,
    pub wall_ms: u128,
    pub resolved_config: serde_json::Value,
    pub constants: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(experiment: &str, config_json: &str, seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_json.as_bytes());
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            config_sha256: format!("{:x}", hasher.finalize()),
            seed,
            wall_ms: 0,
            resolved_config: serde_json::from_str(config_json)
                .unwrap_or(serde_json::Value::Null),
            constants: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    pub fn verdict(&mut self, key: &str, value: impl std::fmt::Display) {
        self.verdicts.insert(key.to_string(), value.to_string());
    }

    pub fn output(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.outputs.push(name.to_string_lossy().into_owned());
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), ReportError> {
        let mut file = std::fs::File::create(path)
            .map_err(|source| ReportError::Io { path: path.into(), source })?;
        let json = serde_json::to_string_pretty(self)?;
        file.write_all(json.as_bytes())
            .and_then(|_| file.write_all(b"\n"))
            .map_err(|source| ReportError::Io { path: path.into(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("two\nlines"), "\"two\nlines\"");
    }

    #[test]
    fn float_formatting_roundtrips() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 136.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_bytes_deterministic() {
        let dir = std::env::temp_dir().join("hyplab-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let rows = vec![
            vec![fmt_f64(1.0 / 3.0), "x,y".to_string()],
            vec![fmt_f64(2e-9), "ok".to_string()],
        ];
        write_csv(&path, &["value", "note"], &rows).unwrap();
        let a = std::fs::read(&path).unwrap();
        write_csv(&path, &["value", "note"], &rows).unwrap();
        let b = std::fs::read(&path).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("value,note\r\n"));
        assert!(text.contains("\"x,y\""));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn row_width_checked() {
        let dir = std::env::temp_dir().join("hyplab-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.csv");
        let err = write_csv(&path, &["a", "b"], &[vec!["1".into()]]);
        assert!(matches!(err, Err(ReportError::RowWidth { got: 1, want: 2 })));
    }

    #[test]
    fn svg_renders_series() {
        let mut plot = SvgPlot::new("energy", "rho", "E");
        plot.log_x = true;
        plot.add_series("run", vec![(10.0, 1.0), (100.0, 2.0), (1000.0, 4.0)]);
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<path"));
        assert!(svg.contains("energy"));
        assert!(svg.ends_with("</svg>\n"));
        // deterministic
        assert_eq!(svg, plot.render());
    }

    #[test]
    fn manifest_hash_and_shape() {
        let cfg = "{\"experiment\":{\"kind\":\"zone-map\"}}";
        let mut m = RunManifest::new("zone-map", cfg, 7);
        m.constant("c0", 1.5);
        m.verdict("elliptic", true);
        m.output(Path::new("/tmp/out/data.csv"));
        assert_eq!(m.config_sha256.len(), 64);
        let m2 = RunManifest::new("zone-map", cfg, 7);
        assert_eq!(m.config_sha256, m2.config_sha256);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"c0\":1.5"));
        assert!(json.contains("data.csv"));
    }
}
