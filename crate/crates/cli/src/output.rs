//! CSV rows, the distribution dump and SVG heatmaps.

use std::fmt::Write as _;

use serde::Serialize;
use tricert::certify::{CertificationReport, ThresholdReport, Verdict};
use tricert::dist::TriangleDistribution;
use tricert::qmodel::{NoiseSpec, TbsmParams};

/// One CSV line. Field order is the column order.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub command: String,
    pub lambda0_sq: Option<f64>,
    pub phi_u: Option<f64>,
    pub phi_w: Option<f64>,
    pub noise_kind: Option<String>,
    pub noise_param: Option<String>,
    pub grid_m: Option<usize>,
    pub epsilon: Option<f64>,
    pub verdict: Option<String>,
    pub threshold: Option<f64>,
    pub lp_count: Option<usize>,
    pub certs_verified: Option<bool>,
    pub runtime_ms: Option<u128>,
}

impl Row {
    pub fn new(command: &str, model: Option<&TbsmParams>, noise: &[NoiseSpec]) -> Self {
        let mut r = Row { command: command.into(), ..Row::default() };
        if let Some(m) = model {
            r.lambda0_sq = Some(m.lambda0_sq);
            r.phi_u = Some(m.phi_u);
            r.phi_w = Some(m.phi_w);
        }
        if !noise.is_empty() {
            r.noise_kind = Some(noise.iter().map(|n| n.kind.name()).collect::<Vec<_>>().join("+"));
            r.noise_param = Some(noise.iter().map(|n| n.param.to_string()).collect::<Vec<_>>().join("+"));
        }
        r
    }

    pub fn with_report(mut self, rep: &CertificationReport) -> Self {
        self.grid_m = rep.grid_m;
        self.epsilon = rep.epsilon;
        self.verdict = Some(rep.verdict.label().into());
        self.threshold = rep.threshold;
        self.lp_count = Some(rep.lp_count);
        self.certs_verified = Some(rep.all_certificates_verified);
        self.runtime_ms = Some(rep.runtime_ms);
        self
    }

    pub fn with_threshold(mut self, rep: &ThresholdReport, grid_m: usize) -> Self {
        self.grid_m = Some(grid_m);
        let verdict = if rep.probes.iter().any(|p| matches!(p.verdict, Verdict::Aborted(_))) {
            "Aborted"
        } else if rep.threshold > 0.0 {
            "CertifiedNonlocal"
        } else {
            "NotCertified"
        };
        self.verdict = Some(verdict.into());
        self.threshold = Some(rep.threshold);
        self.lp_count = Some(rep.lp_count);
        self.certs_verified = Some(rep.all_certificates_verified);
        self.runtime_ms = Some(rep.runtime_ms);
        self
    }
}

pub fn write_csv(rows: &[Row], timing: bool) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        let mut r = r.clone();
        if !timing {
            r.runtime_ms = None;
        }
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.serialize(Row::default())?;
    }
    Ok(w.into_inner()?)
}

/// JSON object from outcome strings "a1a2,b1b2,c1c2" to probabilities.
pub fn dist_json(p: &TriangleDistribution) -> String {
    let label = |o: usize| format!("{}{}", o >> 1, o & 1);
    let mut s = String::from("{\n");
    let n = p.arity();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let last = a == n - 1 && b == n - 1 && c == n - 1;
                let v = p.table()[p.index(a, b, c)];
                let _ = writeln!(s, "  \"{},{},{}\": {:.16e}{}", label(a), label(b), label(c), v, if last { "" } else { "," });
            }
        }
    }
    s.push_str("}\n");
    s
}

/// Heatmap with one rectangle per cell; `values[i][j]` in [0, 1] or None
/// for cells without a result. Row i is drawn bottom-up along the y axis.
pub fn heatmap_svg(values: &[Vec<Option<f64>>], x_label: &str, y_label: &str, title: &str) -> String {
    let cell = 24.0;
    let (margin_l, margin_b, margin_t) = (60.0, 50.0, 30.0);
    let nx = values.len();
    let ny = values.first().map_or(0, Vec::len);
    let width = margin_l + cell * nx as f64 + 20.0;
    let height = margin_t + cell * ny as f64 + margin_b;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<text x="{margin_l}" y="20" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    for (i, col) in values.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            let x = margin_l + cell * i as f64;
            let y = margin_t + cell * (ny - 1 - j) as f64;
            let fill = match v {
                Some(t) => ramp(*t),
                None => "#bbbbbb".to_string(),
            };
            let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>"#);
        }
    }
    let bottom = margin_t + cell * ny as f64;
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        margin_l + cell * nx as f64 / 2.0,
        bottom + 30.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        margin_t + cell * ny as f64 / 2.0,
        margin_t + cell * ny as f64 / 2.0,
        escape(y_label)
    );
    s.push_str("</svg>\n");
    s
}

/// Two-color ramp from dark blue (0) to yellow (1).
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(40.0, 250.0), lerp(30.0, 230.0), lerp(110.0, 30.0))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
