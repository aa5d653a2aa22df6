use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// `corner + [0, side)^n` in `Z^n`, with optional grid parameters `(q, L)`
/// satisfying `q | L | side`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCube {
    n: usize,
    corner: Vec<i64>,
    side: u64,
    grid_gap: u64,
    grid_scale: u64,
}

impl GridCube {
    pub fn new(corner: Vec<i64>, side: u64) -> Result<Self> {
        if corner.is_empty() || side == 0 {
            return Err(Error::InvalidParameter("a cube needs n >= 1 and side >= 1".into()));
        }
        let volume = (side as u128).checked_pow(corner.len() as u32);
        if volume.is_none_or(|v| v > usize::MAX as u128 / 16) {
            return Err(Error::CapExceeded(format!("cube of side {side} in dimension {}", corner.len())));
        }
        Ok(Self { n: corner.len(), corner, side, grid_gap: 1, grid_scale: side })
    }

    pub fn origin(n: usize, side: u64) -> Result<Self> {
        Self::new(vec![0; n], side)
    }

    pub fn with_grid(mut self, q: u64, l: u64) -> Result<Self> {
        check_grid(self.side, q, l)?;
        self.grid_gap = q;
        self.grid_scale = l;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn corner(&self) -> &[i64] {
        &self.corner
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn grid_gap(&self) -> u64 {
        self.grid_gap
    }

    pub fn grid_scale(&self) -> u64 {
        self.grid_scale
    }

    pub fn volume(&self) -> usize {
        (self.side as usize).pow(self.n as u32)
    }

    /// Row-major index, first coordinate most significant.
    pub fn index_of(&self, point: &[i64]) -> Option<usize> {
        let side = self.side as i64;
        let mut idx = 0usize;
        for (&x, &c) in point.iter().zip(&self.corner) {
            let off = x - c;
            if off < 0 || off >= side {
                return None;
            }
            idx = idx * self.side as usize + off as usize;
        }
        Some(idx)
    }

    pub fn point_of(&self, mut index: usize) -> Vec<i64> {
        let side = self.side as usize;
        let mut p = vec![0i64; self.n];
        for i in (0..self.n).rev() {
            p[i] = self.corner[i] + (index % side) as i64;
            index /= side;
        }
        p
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        self.index_of(point).is_some()
    }

    /// Index stride of coordinate `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        (self.side as usize).pow((self.n - 1 - axis) as u32)
    }
}

pub(crate) fn check_grid(side: u64, q: u64, l: u64) -> Result<()> {
    if q == 0 || l == 0 || !l.is_multiple_of(q) || !side.is_multiple_of(l) {
        return Err(Error::InvalidParameter(format!("grid needs q | L | side, got q={q} L={l} side={side}")));
    }
    Ok(())
}

/// A real table on the points of a cube.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeTable {
    cube: GridCube,
    values: Vec<f64>,
}

impl CubeTable {
    pub fn new(cube: GridCube, values: Vec<f64>) -> Result<Self> {
        if values.len() != cube.volume() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a cube of volume {}",
                values.len(),
                cube.volume()
            )));
        }
        Ok(Self { cube, values })
    }

    pub fn constant(cube: GridCube, c: f64) -> Self {
        let len = cube.volume();
        Self { cube, values: vec![c; len] }
    }

    pub fn from_fn(cube: GridCube, f: impl Fn(&[i64]) -> f64) -> Self {
        let values = (0..cube.volume()).map(|i| f(&cube.point_of(i))).collect();
        Self { cube, values }
    }

    pub fn cube(&self) -> &GridCube {
        &self.cube
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Zero outside the cube.
    pub fn get(&self, point: &[i64]) -> f64 {
        self.cube.index_of(point).map_or(0.0, |i| self.values[i])
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &CubeTable) -> Result<CubeTable> {
        if self.cube != other.cube {
            return Err(Error::DimensionMismatch("tables live on different cubes".into()));
        }
        Ok(Self { cube: self.cube.clone(), values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() })
    }
}

/// A finite window of a set `S ⊆ Z^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSet {
    window: GridCube,
    members: Vec<bool>,
}

impl LatticeSet {
    pub fn new(window: GridCube, members: Vec<bool>) -> Result<Self> {
        if members.len() != window.volume() {
            return Err(Error::DimensionMismatch(format!(
                "{} bits for a window of volume {}",
                members.len(),
                window.volume()
            )));
        }
        Ok(Self { window, members })
    }

    pub fn from_fn(window: GridCube, f: impl Fn(&[i64]) -> bool) -> Self {
        let members = (0..window.volume()).map(|i| f(&window.point_of(i))).collect();
        Self { window, members }
    }

    pub fn full(window: GridCube) -> Self {
        let len = window.volume();
        Self { window, members: vec![true; len] }
    }

    pub fn window(&self) -> &GridCube {
        &self.window
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        self.window.index_of(point).is_some_and(|i| self.members[i])
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn density(&self) -> f64 {
        self.count() as f64 / self.members.len() as f64
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.members.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.window.point_of(i))
    }

    pub fn indicator(&self) -> CubeTable {
        CubeTable {
            cube: self.window.clone(),
            values: self.members.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Header lines `n=`, `side=`, `corner=` followed by `runs=` with the
    /// lengths of alternating runs, starting with non-members.
    pub fn to_text(&self) -> String {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u64;
        for &b in &self.members {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        let corner: Vec<String> = self.window.corner.iter().map(|c| c.to_string()).collect();
        let runs: Vec<String> = runs.iter().map(|r| r.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "n={}", self.window.n);
        let _ = writeln!(out, "side={}", self.window.side);
        let _ = writeln!(out, "corner={}", corner.join(","));
        let _ = writeln!(out, "runs={}", runs.join(","));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut side = None;
        let mut corner = None;
        let mut runs = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
            match key.trim() {
                "n" => n = Some(value.trim().parse::<usize>().map_err(|_| bad("n"))?),
                "side" => side = Some(value.trim().parse::<u64>().map_err(|_| bad("side"))?),
                "corner" => {
                    corner = Some(
                        value.split(',').map(|c| c.trim().parse::<i64>()).collect::<std::result::Result<Vec<_>, _>>().map_err(|_| bad("corner"))?,
                    )
                }
                "runs" => {
                    runs = Some(
                        value.split(',').map(|c| c.trim().parse::<u64>()).collect::<std::result::Result<Vec<_>, _>>().map_err(|_| bad("runs"))?,
                    )
                }
                other => return Err(Error::Parse(format!("line {}: unknown key {other}", lineno + 1))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing {k}"));
        let n = n.ok_or_else(|| missing("n"))?;
        let corner: Vec<i64> = corner.ok_or_else(|| missing("corner"))?;
        if corner.len() != n {
            return Err(Error::Parse(format!("corner has {} coordinates, n={n}", corner.len())));
        }
        let window = GridCube::new(corner, side.ok_or_else(|| missing("side"))?)?;
        let runs = runs.ok_or_else(|| missing("runs"))?;
        let total: u64 = runs.iter().sum();
        if total != window.volume() as u64 {
            return Err(Error::Parse(format!("runs cover {total} points, window has {}", window.volume())));
        }
        let mut members = Vec::with_capacity(window.volume());
        for (i, &r) in runs.iter().enumerate() {
            members.extend(std::iter::repeat_n(i % 2 == 1, r as usize));
        }
        Self::new(window, members)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
