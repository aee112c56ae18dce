//! SVG drawings of `D = 2` configurations: tiling rows, `d2`-paths, spanners
//! and refined-quadtree regions. Each row of the drawing is one level.

use std::fmt::Write;

use num_traits::ToPrimitive;
use serde_json::json;

use crate::avd::build_avd_cells;
use crate::error::{Error, Result};
use crate::figures;
use crate::metrics::{d1, d2, d2_path};
use crate::quadtree::NodeKind;
use crate::spanner::{build_spanner, Role};
use crate::tiling::CellId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Tiling,
    Models,
    Spanner,
    Avd,
}

struct Canvas {
    top: i32,
    bottom: i32,
    body: String,
}

const W: f64 = 800.0;
const ROW: f64 = 40.0;
const PAD: f64 = 20.0;

impl Canvas {
    fn new(cells: &[CellId]) -> Self {
        let top = cells.iter().map(|c| c.level()).max().unwrap_or(0).max(0);
        let bottom = cells.iter().map(|c| c.level()).min().unwrap_or(0).min(top - 1);
        Canvas {
            top,
            bottom,
            body: String::new(),
        }
    }

    fn x(&self, v: f64) -> f64 {
        PAD + v * W
    }

    fn y(&self, level: i32) -> f64 {
        PAD + (self.top - level) as f64 * ROW
    }

    fn span(c: &CellId) -> (f64, f64) {
        let k = c.coords()[0].to_f64().unwrap_or(0.0);
        let s = (c.level() as f64).exp2();
        (k * s, (k + 1.0) * s)
    }

    fn cell(&mut self, c: &CellId, fill: &str, stroke: &str) {
        if c.level() < self.bottom || c.level() > self.top {
            return;
        }
        let (a, b) = Self::span(c);
        let (x0, x1) = (self.x(a.max(0.0)), self.x(b.min(1.0)));
        if x1 <= x0 {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{ROW}" fill="{fill}" stroke="{stroke}" stroke-width="0.5"/>"#,
            x0,
            self.y(c.level()),
            x1 - x0
        );
    }

    fn center(&self, c: &CellId) -> (f64, f64) {
        let (a, b) = Self::span(c);
        (self.x((a + b) / 2.0), self.y(c.level()) + ROW / 2.0)
    }

    fn line(&mut self, a: &CellId, b: &CellId, color: &str, width: f64) {
        let (p, q) = (self.center(a), self.center(b));
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="{width}"/>"#,
            p.0, p.1, q.0, q.1
        );
    }

    fn dot(&mut self, c: &CellId, color: &str, label: &str) {
        let (x, y) = self.center(c);
        let _ = writeln!(self.body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="{color}"/>"#);
        if !label.is_empty() {
            let _ = writeln!(
                self.body,
                r#"<text x="{:.3}" y="{:.3}" font-size="11" font-family="sans-serif">{label}</text>"#,
                x + 5.0,
                y - 5.0
            );
        }
    }

    fn grid(&mut self) {
        for level in self.bottom..=self.top.min(0) {
            let count = 1i64 << (-level).min(8);
            if -level > 8 {
                continue;
            }
            for k in 0..count {
                self.cell(&CellId::from_i64(level, &[k]), "none", "#bbb");
            }
        }
    }

    fn finish(self, stats: &serde_json::Value) -> String {
        let h = 2.0 * PAD + (self.top - self.bottom + 1) as f64 * ROW;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{h}\">\n<metadata>{}</metadata>\n{}</svg>\n",
            W + 2.0 * PAD,
            stats,
            self.body
        )
    }
}

fn check_planar(points: &[CellId]) -> Result<()> {
    match points.iter().find(|p| p.dim() != 2) {
        Some(p) => Err(Error::DimensionMismatch {
            expected: 2,
            got: p.dim(),
        }),
        None => Ok(()),
    }
}

fn path_cells(p: &CellId, q: &CellId) -> Vec<CellId> {
    d2_path(p, q).cells()
}

fn render_models(points: &[CellId]) -> Result<(String, serde_json::Value)> {
    let (p, q) = match points {
        [a, b, ..] => (a.clone(), b.clone()),
        _ => figures::models_pair(),
    };
    let cells = path_cells(&p, &q);
    let mut cv = Canvas::new(&cells);
    cv.grid();
    for c in &cells {
        cv.cell(c, "#fde0a0", "#c80");
    }
    for w in cells.windows(2) {
        cv.line(&w[0], &w[1], "#c00", 2.0);
    }
    cv.dot(&p, "#000", "p");
    cv.dot(&q, "#000", "q");
    let stats = json!({"figure": "models", "p": p, "q": q, "d1": d1(&p, &q), "d2": d2(&p, &q)});
    Ok((cv.finish(&stats), stats))
}

fn render_tiling(points: &[CellId]) -> Result<(String, serde_json::Value)> {
    let mut cv = Canvas::new(points);
    cv.bottom = cv.bottom.max(-8);
    cv.grid();
    for (i, p) in points.iter().enumerate() {
        cv.cell(p, "#cde", "#246");
        cv.dot(p, "#024", &format!("p{}", i + 1));
    }
    let stats = json!({"figure": "tiling", "points": points.len(), "levels": [cv.bottom, cv.top]});
    Ok((cv.finish(&stats), stats))
}

fn render_spanner(points: &[CellId], labels: &[CellId]) -> Result<(String, serde_json::Value)> {
    let g = build_spanner(points)?;
    let cells: Vec<CellId> = g.vertices.iter().filter_map(|v| v.cell.clone()).collect();
    let mut cv = Canvas::new(&cells);
    cv.grid();
    for e in &g.edges {
        if let (Some(a), Some(b)) = (&g.vertices[e.u].cell, &g.vertices[e.v].cell) {
            let color = if a.level() == b.level() { "#c00" } else { "#06c" };
            cv.line(a, b, color, 1.5);
        }
    }
    let mut steiner_names = Vec::new();
    let mut extra = 0;
    for v in &g.vertices {
        let Some(c) = &v.cell else { continue };
        match v.role {
            Role::Input => {
                let i = points.iter().position(|p| p == c).unwrap_or(0);
                cv.dot(c, "#000", &format!("p{}", i + 1));
            }
            Role::Steiner => {
                let name = match labels.iter().position(|l| l == c) {
                    Some(i) => format!("v{}", i + 1),
                    None => {
                        extra += 1;
                        format!("s{extra}")
                    }
                };
                cv.dot(c, "#c60", &name);
                steiner_names.push(json!({"name": name, "cell": c}));
            }
        }
    }
    let mut distances = serde_json::Map::new();
    if points.len() >= 6 {
        let d = g.dijkstra(g.input_vertex[2]);
        distances.insert("d_S(p3,p6)".into(), json!(d[g.input_vertex[5]]));
        distances.insert("d1(p3,p5)".into(), json!(d1(&points[2], &points[4])));
    }
    let stats = json!({
        "figure": "spanner",
        "inputs": points.len(),
        "steiner": g.steiner_count(),
        "edges": g.edge_count(),
        "steiner_vertices": steiner_names,
        "distances": distances,
    });
    Ok((cv.finish(&stats), stats))
}

fn render_avd(points: &[CellId]) -> Result<(String, serde_json::Value)> {
    let ix = build_avd_cells(points)?;
    let t = ix.tree();
    let cells: Vec<CellId> = t.nodes().iter().map(|n| n.cell.clone()).collect();
    let mut cv = Canvas::new(&cells);
    cv.bottom = cv.bottom.max(-10);
    for v in t.preorder() {
        let n = t.node(v);
        let fill = match n.kind {
            NodeKind::Leaf => "#e8f4e8",
            NodeKind::Compressed => "#f4e8f4",
            NodeKind::Ordinary => "none",
        };
        cv.cell(&n.cell, fill, "#555");
    }
    for (i, p) in points.iter().enumerate() {
        cv.dot(p, "#000", &format!("p{}", i + 1));
    }
    let st = ix.stats();
    let stats = json!({"figure": "avd", "stats": st});
    Ok((cv.finish(&stats), stats))
}

/// SVG text and a stats object for `fig`. Without points the built-in
/// example configuration of that figure is drawn.
pub fn render(fig: Figure, points: Option<&[CellId]>) -> Result<(String, serde_json::Value)> {
    if let Some(p) = points {
        check_planar(p)?;
        if p.is_empty() {
            return Err(Error::Empty);
        }
    }
    match fig {
        Figure::Models => render_models(points.unwrap_or(&[])),
        Figure::Tiling => match points {
            Some(p) => render_tiling(p),
            None => render_tiling(&figures::spanner_points()),
        },
        Figure::Spanner => match points {
            Some(p) => render_spanner(p, &[]),
            None => render_spanner(&figures::spanner_points(), &figures::spanner_steiner()),
        },
        Figure::Avd => match points {
            Some(p) => render_avd(p),
            None => {
                let p = [
                    CellId::from_i64(-3, &[2]),
                    CellId::from_i64(-5, &[11]),
                    CellId::from_i64(-6, &[27]),
                    CellId::from_i64(-4, &[7]),
                ];
                render_avd(&p)
            }
        },
    }
}
