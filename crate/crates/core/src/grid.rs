//! Spatial grids (interior nodes of a 1D interval or 2D rectangle, Dirichlet
//! boundary implied) and functions sampled on them.

use crate::error::{CoreError, Result};
use std::io::{BufRead, Write};

/// Tensor grid of interior nodes. Boundary nodes are not stored: every
/// discrete operator here imposes homogeneous Dirichlet conditions, so grid
/// functions live strictly inside the domain.
///
/// When an axis contains 0 strictly inside its bounds at a node position, the
/// node coordinates are generated centered on that node so the origin is
/// exactly representable — the frequency and blow-up machinery pivots on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    /// Spatial dimension (1 or 2).
    pub dim: usize,
    /// Domain bounds per axis.
    pub bounds: Vec<(f64, f64)>,
    /// Interior node count per axis.
    pub counts: Vec<usize>,
    /// Spacing per axis: (b - a) / (count + 1).
    pub spacing: Vec<f64>,
    /// Interior node coordinates per axis, ascending.
    pub coords: Vec<Vec<f64>>,
    /// Per-axis index of the node at exactly 0, when one exists.
    pub origin: Option<Vec<usize>>,
}

fn axis_coords(a: f64, b: f64, m: usize) -> (f64, Vec<f64>, Option<usize>) {
    let h = (b - a) / (m as f64 + 1.0);
    // Does some interior node land on 0 (up to rounding of the index)?
    let fi = -a / h - 1.0;
    let i0 = fi.round();
    if a < 0.0 && b > 0.0 && (fi - i0).abs() < 1e-9 && i0 >= 0.0 && (i0 as usize) < m {
        let i0 = i0 as usize;
        // Center-indexed generation: node i0 is exactly 0.
        let coords = (0..m).map(|i| (i as f64 - i0 as f64) * h).collect();
        (h, coords, Some(i0))
    } else {
        let coords = (0..m).map(|i| a + (i as f64 + 1.0) * h).collect();
        (h, coords, None)
    }
}

impl SpatialGrid {
    /// Interior grid of the interval (a, b) with `m` nodes.
    pub fn line(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(b > a) || m == 0 {
            return Err(CoreError::InvalidGrid(format!(
                "need b > a and nodes > 0, got ({a}, {b}) with {m}"
            )));
        }
        let (h, coords, origin) = axis_coords(a, b, m);
        Ok(SpatialGrid {
            dim: 1,
            bounds: vec![(a, b)],
            counts: vec![m],
            spacing: vec![h],
            coords: vec![coords],
            origin: origin.map(|i| vec![i]),
        })
    }

    /// Interior grid of the rectangle (a0, b0) × (a1, b1).
    pub fn rectangle(axes: [(f64, f64, usize); 2]) -> Result<Self> {
        let mut spacing = Vec::new();
        let mut coords = Vec::new();
        let mut counts = Vec::new();
        let mut bounds = Vec::new();
        let mut origin = Vec::new();
        let mut all_origin = true;
        for (a, b, m) in axes {
            if !(b > a) || m == 0 {
                return Err(CoreError::InvalidGrid(format!(
                    "need b > a and nodes > 0, got ({a}, {b}) with {m}"
                )));
            }
            let (h, c, o) = axis_coords(a, b, m);
            spacing.push(h);
            coords.push(c);
            counts.push(m);
            bounds.push((a, b));
            match o {
                Some(i) => origin.push(i),
                None => all_origin = false,
            }
        }
        Ok(SpatialGrid {
            dim: 2,
            bounds,
            counts,
            spacing,
            coords,
            origin: if all_origin { Some(origin) } else { None },
        })
    }

    /// Total interior node count.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one grid cell (product of spacings) — the discrete L²
    /// weight.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Flat index of the node at the exact origin, if the grid has one.
    pub fn origin_flat(&self) -> Option<usize> {
        self.origin.as_ref().map(|ix| match self.dim {
            1 => ix[0],
            _ => ix[0] * self.counts[1] + ix[1],
        })
    }

    /// Coordinates of the node with flat index `i` (row-major, axis 0
    /// slowest).
    pub fn node(&self, i: usize) -> Vec<f64> {
        match self.dim {
            1 => vec![self.coords[0][i]],
            _ => {
                let (i0, i1) = (i / self.counts[1], i % self.counts[1]);
                vec![self.coords[0][i0], self.coords[1][i1]]
            }
        }
    }

    /// Nodes within Euclidean distance `radius` of the origin (requires an
    /// origin node).
    pub fn ball_mask(&self, radius: f64) -> Result<Vec<bool>> {
        if self.origin.is_none() {
            return Err(CoreError::InvalidGrid(
                "grid has no exact origin node".into(),
            ));
        }
        Ok((0..self.len())
            .map(|i| {
                let p = self.node(i);
                p.iter().map(|c| c * c).sum::<f64>().sqrt() < radius
            })
            .collect())
    }

    /// Structural compatibility check used by operations that combine grid
    /// functions.
    pub fn same_layout(&self, other: &SpatialGrid) -> bool {
        self.dim == other.dim && self.counts == other.counts && self.bounds == other.bounds
    }
}

/// Real values sampled at the interior nodes of a [`SpatialGrid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::GridMismatch(format!(
                "{} values on a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(CoreError::Parse(format!("non-finite sample {bad}")));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        let n = grid.len();
        GridFunction {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at every node.
    pub fn sample(grid: SpatialGrid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        GridFunction { grid, values }
    }

    /// Discrete L² inner product ⟨u, v⟩ = cell_volume · Σ uᵢvᵢ.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        if !self.grid.same_layout(&other.grid) {
            return Err(CoreError::GridMismatch("inner product".into()));
        }
        Ok(self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    /// Discrete L² norm.
    pub fn norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Writes the function as CSV: a metadata comment, a header, then one row
    /// of node coordinates and value per node (17 significant digits).
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let bounds = self
            .grid
            .bounds
            .iter()
            .map(|(a, b)| format!("{a}:{b}"))
            .collect::<Vec<_>>()
            .join(";");
        let counts = self
            .grid
            .counts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(w, "# grid dim={} bounds={} counts={}", self.grid.dim, bounds, counts)?;
        let cols = match self.grid.dim {
            1 => "x,value".to_string(),
            _ => "x,y,value".to_string(),
        };
        writeln!(w, "{cols}")?;
        for i in 0..self.grid.len() {
            let p = self.grid.node(i);
            for c in &p {
                write!(w, "{c:.17e},")?;
            }
            writeln!(w, "{:.17e}", self.values[i])?;
        }
        Ok(())
    }

    /// Reads a function written by [`GridFunction::write_csv`].
    pub fn read_csv(r: &mut impl BufRead) -> Result<Self> {
        let mut meta = String::new();
        r.read_line(&mut meta)?;
        let meta = meta.trim();
        let parse_err = |m: &str| CoreError::Parse(format!("grid-function csv: {m}"));
        let mut dim = 0usize;
        let mut bounds: Vec<(f64, f64)> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for tok in meta.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("dim=") {
                dim = v.parse().map_err(|_| parse_err("bad dim"))?;
            } else if let Some(v) = tok.strip_prefix("bounds=") {
                for pair in v.split(';') {
                    let (a, b) = pair.split_once(':').ok_or_else(|| parse_err("bad bounds"))?;
                    bounds.push((
                        a.parse().map_err(|_| parse_err("bad bound"))?,
                        b.parse().map_err(|_| parse_err("bad bound"))?,
                    ));
                }
            } else if let Some(v) = tok.strip_prefix("counts=") {
                for c in v.split(';') {
                    counts.push(c.parse().map_err(|_| parse_err("bad count"))?);
                }
            }
        }
        let grid = match dim {
            1 => SpatialGrid::line(bounds[0].0, bounds[0].1, counts[0])?,
            2 => SpatialGrid::rectangle([
                (bounds[0].0, bounds[0].1, counts[0]),
                (bounds[1].0, bounds[1].1, counts[1]),
            ])?,
            _ => return Err(parse_err("unsupported dim")),
        };
        let mut header = String::new();
        r.read_line(&mut header)?;
        let mut values = Vec::with_capacity(grid.len());
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v = line
                .rsplit(',')
                .next()
                .ok_or_else(|| parse_err("empty row"))?
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_err("bad value"))?;
            values.push(v);
        }
        GridFunction::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_line_grid_has_exact_origin() {
        let g = SpatialGrid::line(-1.0, 1.0, 199).unwrap();
        let i0 = g.origin_flat().expect("origin node");
        assert_eq!(g.coords[0][i0], 0.0);
        assert_eq!(i0, 99);
        assert!((g.spacing[0] - 0.01).abs() < 1e-15);
        // Nodes stay strictly inside the closed domain.
        assert!(g.coords[0][0] > -1.0 && g.coords[0][198] < 1.0);
    }

    #[test]
    fn asymmetric_grid_has_no_origin() {
        let g = SpatialGrid::line(0.0, std::f64::consts::PI, 50).unwrap();
        assert!(g.origin_flat().is_none());
    }

    #[test]
    fn inner_product_weighting() {
        let g = SpatialGrid::line(-1.0, 1.0, 199).unwrap();
        let ones = GridFunction::sample(g.clone(), |_| 1.0);
        // ⟨1,1⟩ = h · M = 0.01 · 199 = 1.99.
        assert!((ones.inner(&ones).unwrap() - 1.99).abs() < 1e-12);
    }

    #[test]
    fn rectangle_indexing_roundtrip() {
        let g = SpatialGrid::rectangle([(-1.0, 1.0, 5), (-2.0, 2.0, 7)]).unwrap();
        assert_eq!(g.len(), 35);
        let p = g.node(2 * 7 + 3);
        assert!((p[0] - g.coords[0][2]).abs() < 1e-15);
        assert!((p[1] - g.coords[1][3]).abs() < 1e-15);
        let o = g.origin_flat().unwrap();
        let po = g.node(o);
        assert_eq!(po, vec![0.0, 0.0]);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let g = SpatialGrid::line(-1.0, 1.0, 17).unwrap();
        let u = GridFunction::sample(g, |p| (3.1 * p[0]).sin() / 7.0);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(&mut std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(u.values, back.values);
        assert!(u.grid.same_layout(&back.grid));
    }

    #[test]
    fn ball_mask_requires_origin() {
        let g = SpatialGrid::line(0.0, 1.0, 9).unwrap();
        assert!(g.ball_mask(0.2).is_err());
        let g = SpatialGrid::line(-1.0, 1.0, 9).unwrap();
        let m = g.ball_mask(0.25).unwrap();
        assert_eq!(m.iter().filter(|b| **b).count(), 3);
    }
}
