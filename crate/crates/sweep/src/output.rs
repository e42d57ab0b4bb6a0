use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every double
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) => (if *x > 0.0 { "inf" } else { "-inf" }).into(),
            Cell::Int(i) => i.to_string(),
            Cell::Flag(b) => u8::from(*b).to_string(),
            // no quoting: keep free text out of the delimiter set
            Cell::Text(s) => s.replace([',', '\n', '\r'], ";"),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric column by name; non-numeric cells become NaN.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column_index(name) else {
            return Vec::new();
        };
        self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Rows whose `error` column is non-empty.
    pub fn error_rows(&self) -> usize {
        let Some(i) = self.column_index("error") else {
            return 0;
        };
        self.rows.iter().filter(|r| !matches!(&r[i], Cell::Text(s) if s.is_empty())).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Nine evenly spaced stops of the viridis map.
const RAMP: [(u8, u8, u8); 9] = [
    (0x44, 0x01, 0x54),
    (0x47, 0x2d, 0x7b),
    (0x3b, 0x52, 0x8b),
    (0x2c, 0x72, 0x8e),
    (0x21, 0x91, 0x8c),
    (0x28, 0xae, 0x80),
    (0x5e, 0xc9, 0x62),
    (0xad, 0xdc, 0x30),
    (0xfd, 0xe7, 0x25),
];

/// Colour for `v ∈ [0, 1]` (clamped); NaN renders grey.
pub fn ramp_colour(v: f64) -> String {
    if v.is_nan() {
        return "#808080".into();
    }
    let s = v.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (s.floor() as usize).min(RAMP.len() - 2);
    let f = s - i as f64;
    let lerp = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 110.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const PLOT: f64 = 480.0;

fn svg_open(out: &mut String, title: &str) {
    let w = MARGIN_L + PLOT + MARGIN_R;
    let h = MARGIN_T + PLOT + MARGIN_B;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_L + PLOT / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), xlabel: &str, ylabel: &str) {
    let (x0, y0) = (MARGIN_L, MARGIN_T + PLOT);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = x0 + f * PLOT;
        let py = y0 - f * PLOT;
        let _ = writeln!(out, r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick(x.0 + f * (x.1 - x.0))
        );
        let _ = writeln!(out, r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick(y.0 + f * (y.1 - y.0))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        x0 + PLOT / 2.0,
        y0 + 40.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        MARGIN_T + PLOT / 2.0,
        MARGIN_T + PLOT / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Heatmap of `values[iy][ix]` over the grid `xs × ys`, coloured on `[0, 1]`.
pub fn heatmap_svg(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], values: &[Vec<f64>]) -> String {
    let mut out = String::new();
    svg_open(&mut out, title);
    let span = |v: &[f64]| {
        let (lo, hi) = (v[0], v[v.len() - 1]);
        // cells are centred on the grid values
        let half = if v.len() > 1 { (hi - lo) / (v.len() - 1) as f64 / 2.0 } else { 0.5 };
        (lo - half, hi + half)
    };
    let (xr, yr) = (span(xs), span(ys));
    let (cw, ch) = (PLOT / xs.len() as f64, PLOT / ys.len() as f64);
    for (iy, row) in values.iter().enumerate() {
        for (ix, &v) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                MARGIN_L + ix as f64 * cw,
                MARGIN_T + PLOT - (iy + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                ramp_colour(v)
            );
        }
    }
    axes(&mut out, xr, yr, xlabel, ylabel);
    // colour bar
    let bx = MARGIN_L + PLOT + 25.0;
    let steps = 50;
    for i in 0..steps {
        let f = (i as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bx}" y="{:.3}" width="18" height="{:.3}" fill="{}"/>"#,
            MARGIN_T + PLOT * (1.0 - (i + 1) as f64 / steps as f64),
            PLOT / steps as f64 + 0.05,
            ramp_colour(f)
        );
    }
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            bx + 24.0,
            MARGIN_T + PLOT * (1.0 - f) + 4.0,
            tick(f)
        );
    }
    out.push_str("</svg>\n");
    out
}

const LINE_COLOURS: [&str; 8] = ["#440154", "#21918c", "#fde725", "#3b528b", "#5ec962", "#472d7b", "#28ae80", "#addc30"];

/// Line chart of several series over a shared `x`. Non-finite points break
/// the line. With `log_y` values are plotted as `log10` (non-positive values
/// are dropped).
pub fn line_chart_svg(title: &str, xlabel: &str, ylabel: &str, x: &[f64], series: &[(&str, Vec<f64>)], log_y: bool) -> String {
    let mut out = String::new();
    svg_open(&mut out, title);
    let tf = |v: f64| if log_y { if v > 0.0 { v.log10() } else { f64::NAN } } else { v };
    let finite = |it: &mut dyn Iterator<Item = f64>| {
        it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    };
    let mut xr = finite(&mut x.iter().copied());
    let mut yr = finite(&mut series.iter().flat_map(|(_, s)| s.iter().map(|&v| tf(v))));
    for r in [&mut xr, &mut yr] {
        if !r.0.is_finite() {
            *r = (0.0, 1.0);
        } else if r.1 - r.0 < 1e-300 {
            *r = (r.0 - 0.5, r.1 + 0.5);
        }
    }
    let px = |v: f64| MARGIN_L + (v - xr.0) / (xr.1 - xr.0) * PLOT;
    let py = |v: f64| MARGIN_T + PLOT - (v - yr.0) / (yr.1 - yr.0) * PLOT;
    for (k, (name, ys)) in series.iter().enumerate() {
        let colour = LINE_COLOURS[k % LINE_COLOURS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (&xv, &yv) in x.iter().zip(ys) {
            let yv = tf(yv);
            if xv.is_finite() && yv.is_finite() {
                let _ = write!(d, "{}{:.3},{:.3} ", if pen_down { "L" } else { "M" }, px(xv), py(yv));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, d.trim_end());
        let ly = MARGIN_T + 10.0 + 18.0 * k as f64;
        let lx = MARGIN_L + PLOT + 10.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 25.0, ly + 4.0, escape(name));
    }
    let ylabel = if log_y { format!("log10 {ylabel}") } else { ylabel.to_string() };
    axes(&mut out, xr, yr, xlabel, &ylabel);
    out.push_str("</svg>\n");
    out
}
