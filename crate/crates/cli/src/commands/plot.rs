use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use qsrevent::geometry::Point2;
use qsrevent::pipeline::{embed_factor, factor_models, prepare, FactorModel, Session};

use crate::manifest::{sidecar, RunManifest};
use crate::{Outcome, Settings};

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub session: PathBuf,
    /// Factor model name: R, O1, O2, O1O2, RO1 or RO2.
    #[arg(long, default_value = "O1")]
    pub factor_model: String,
    /// Segment index within the session.
    #[arg(long, default_value_t = 0)]
    pub segment: usize,
    #[arg(long)]
    pub out: PathBuf,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub fn run(args: PlotArgs, settings: &Settings) -> anyhow::Result<Outcome> {
    let Some(factor) = FactorModel::parse_name(&args.factor_model) else {
        let names: Vec<String> = factor_models().iter().map(FactorModel::name).collect();
        return crate::usage(format!(
            "unknown factor model `{}`; valid names: {}",
            args.factor_model,
            names.join(", ")
        ));
    };
    let session =
        Session::load(&args.session).with_context(|| format!("cannot load session {}", args.session.display()))?;
    let segments = prepare(&session, settings.pipeline.rate_hz)?;
    let Some(seg) = segments.get(args.segment) else {
        return crate::usage(format!(
            "session {} has {} segments; --segment {} is out of range",
            session.id,
            segments.len(),
            args.segment
        ));
    };
    let (pca, traces) = embed_factor(seg, &factor)?;
    let title = format!(
        "{} segment {} ({}), factor {}: PC1 {:.0}%, PC2 {:.0}%",
        session.id,
        seg.index,
        seg.label,
        factor.name(),
        100.0 * pca.explained[0],
        100.0 * pca.explained[1]
    );
    let named: Vec<(String, Vec<Point2>)> = traces.into_iter().map(|(a, pts)| (a.name(), pts)).collect();
    fs::write(&args.out, render_svg(&title, &named)).with_context(|| format!("cannot write {}", args.out.display()))?;

    let cfg = settings.pipeline.to_kv_string();
    let mut manifest = RunManifest::new("plot", cfg.clone(), settings.pipeline.hash(), settings.hp.seed);
    manifest.input(&args.session);
    manifest.output(&args.out)?;
    manifest.lap("plot");
    manifest.write(&sidecar(&args.out))?;
    println!("wrote {}", args.out.display());
    Ok(Outcome::Ok)
}

/// One polyline with sample markers per trace, on equal axes.
pub fn render_svg(title: &str, traces: &[(String, Vec<Point2>)]) -> String {
    let all: Vec<Point2> = traces.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let (mut lo, mut hi) = (
        Point2::new(f64::INFINITY, f64::INFINITY),
        Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in &all {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-6);
    let centre = Point2::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |p: Point2| {
        (
            SIZE / 2.0 + (p.x - centre.x) * scale,
            SIZE / 2.0 - (p.y - centre.y) * scale,
        )
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<text x="{}" y="20" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"##,
        SIZE / 2.0,
        escape(title)
    );
    let (ax, ay) = (MARGIN / 2.0, SIZE - MARGIN / 2.0);
    let _ = writeln!(
        s,
        r##"<g stroke="#999" stroke-width="1"><line x1="{ax}" y1="{ay}" x2="{}" y2="{ay}"/><line x1="{ax}" y1="{ay}" x2="{ax}" y2="{}"/></g>"##,
        ax + 40.0,
        ay - 40.0
    );
    let _ = writeln!(
        s,
        r##"<g font-family="sans-serif" font-size="10" fill="#666"><text x="{}" y="{}">PC1</text><text x="{}" y="{}">PC2</text></g>"##,
        ax + 44.0,
        ay + 3.0,
        ax - 8.0,
        ay - 44.0
    );
    for (i, (name, pts)) in traces.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r#"<g class="trace" data-anchor="{}">"#, escape(name));
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        for (k, &p) in pts.iter().enumerate() {
            let (x, y) = map(p);
            let r = if k == 0 { 4.0 } else { 2.0 };
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{colour}"/>"#);
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{colour}">{}</text>"#,
            SIZE - MARGIN - 20.0,
            40.0 + 14.0 * i as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
