//! Plain-text field export: `#` header lines with the grid, regions and
//! metadata, then one whitespace-separated row per node.
//!
//! ```text
//! # flipcpw-field 1
//! # quantity potential_v
//! # grid nx ny periodic_x
//! # x_um <nx values>
//! # y_um <ny values>
//! # bounds x0 x1 y0 y1
//! # region x0 x1 y0 y1 <tag>
//! # meta <key> <value>
//! # columns i j x_um y_um conductor value [area_um2]
//! 0 0 -360 -560 - 0
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::{Error, Result};

use super::grid::Grid;
use super::region::{Material, Rect, Region};

const MAGIC: &str = "flipcpw-field 1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExportRow {
    pub i: usize,
    pub j: usize,
    pub conductor: Option<usize>,
    pub value: f64,
    /// Area the value represents, um^2 (current exports only).
    pub area_um2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldExport {
    pub quantity: String,
    pub grid: Grid,
    pub bounds: Rect,
    pub regions: Vec<Region>,
    pub meta: BTreeMap<String, String>,
    pub rows: Vec<ExportRow>,
}

impl FieldExport {
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        writeln!(w, "# {MAGIC}")?;
        writeln!(w, "# quantity {}", self.quantity)?;
        writeln!(w, "# grid {} {} {}", self.grid.nx(), self.grid.ny(), self.grid.periodic_x)?;
        writeln!(w, "# x_um {}", join(&self.grid.xs))?;
        writeln!(w, "# y_um {}", join(&self.grid.ys))?;
        let b = &self.bounds;
        writeln!(w, "# bounds {:e} {:e} {:e} {:e}", b.x0, b.x1, b.y0, b.y1)?;
        for r in &self.regions {
            let q = &r.rect;
            writeln!(w, "# region {:e} {:e} {:e} {:e} {}", q.x0, q.x1, q.y0, q.y1, r.material.tag())?;
        }
        for (k, v) in &self.meta {
            writeln!(w, "# meta {k} {v}")?;
        }
        let with_area = self.rows.iter().any(|r| r.area_um2.is_some());
        writeln!(
            w,
            "# columns i j x_um y_um conductor value{}",
            if with_area { " area_um2" } else { "" }
        )?;
        for r in &self.rows {
            let c = r.conductor.map_or("-".to_string(), |c| c.to_string());
            write!(w, "{} {} {:e} {:e} {} {:e}", r.i, r.j, self.grid.xs[r.i], self.grid.ys[r.j], c, r.value)?;
            match r.area_um2 {
                Some(a) => writeln!(w, " {a:e}")?,
                None => writeln!(w)?,
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let bad = |msg: String| Error::Format(msg);
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{s}'")));
        let mut lines = r.lines();
        let first = lines.next().transpose()?.unwrap_or_default();
        if first.trim() != format!("# {MAGIC}") {
            return Err(bad(format!("missing header '# {MAGIC}'")));
        }
        let mut quantity = None;
        let mut dims = None;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let mut bounds = None;
        let mut regions = Vec::new();
        let mut meta = BTreeMap::new();
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let mut f = h.split_whitespace();
                match f.next() {
                    Some("quantity") => quantity = f.next().map(str::to_string),
                    Some("grid") => {
                        let v: Vec<&str> = f.collect();
                        if v.len() != 3 {
                            return Err(bad("grid line needs nx ny periodic_x".into()));
                        }
                        let p = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad count '{s}'")));
                        let periodic = v[2].parse::<bool>().map_err(|_| bad(format!("bad flag '{}'", v[2])))?;
                        dims = Some((p(v[0])?, p(v[1])?, periodic));
                    }
                    Some("x_um") => xs = f.map(num).collect::<Result<_>>()?,
                    Some("y_um") => ys = f.map(num).collect::<Result<_>>()?,
                    Some("bounds") => {
                        let v: Vec<f64> = f.map(num).collect::<Result<_>>()?;
                        if v.len() != 4 {
                            return Err(bad("bounds needs 4 values".into()));
                        }
                        bounds = Some(Rect::new(v[0], v[1], v[2], v[3]));
                    }
                    Some("region") => {
                        let v: Vec<&str> = f.collect();
                        if v.len() != 5 {
                            return Err(bad("region needs 4 coordinates and a tag".into()));
                        }
                        regions.push(Region {
                            rect: Rect::new(num(v[0])?, num(v[1])?, num(v[2])?, num(v[3])?),
                            material: Material::parse_tag(v[4])?,
                        });
                    }
                    Some("meta") => {
                        if let Some(k) = f.next() {
                            meta.insert(k.to_string(), f.collect::<Vec<_>>().join(" "));
                        }
                    }
                    _ => {}
                }
                continue;
            }
            let v: Vec<&str> = line.split_whitespace().collect();
            if v.len() != 6 && v.len() != 7 {
                return Err(bad(format!("row {}: expected 6 or 7 columns", lineno + 2)));
            }
            let idx = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad index '{s}'")));
            rows.push(ExportRow {
                i: idx(v[0])?,
                j: idx(v[1])?,
                conductor: if v[4] == "-" { None } else { Some(idx(v[4])?) },
                value: num(v[5])?,
                area_um2: v.get(6).map(|s| num(s)).transpose()?,
            });
        }
        let (nx, ny, periodic) = dims.ok_or_else(|| bad("missing grid line".into()))?;
        if xs.len() != nx || ys.len() != ny {
            return Err(Error::GridMismatch(format!(
                "header declares {nx}x{ny} but lists {}x{} lines",
                xs.len(),
                ys.len()
            )));
        }
        let grid = Grid::from_lines(xs, ys, periodic)?;
        if rows.iter().any(|r| r.i >= nx || r.j >= ny) {
            return Err(Error::GridMismatch("row index outside the grid".into()));
        }
        Ok(Self {
            quantity: quantity.ok_or_else(|| bad("missing quantity".into()))?,
            grid,
            bounds: bounds.ok_or_else(|| bad("missing bounds".into()))?,
            regions,
            meta,
            rows,
        })
    }

    pub fn from_text(s: &str) -> Result<Self> {
        Self::read_from(s.as_bytes())
    }
}
