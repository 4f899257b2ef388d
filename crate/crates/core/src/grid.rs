//! Grids and field containers.
//!
//! The cylindrical grid [`GridRZ`] has `n_r` radial cells of width `h = 1/n_r`
//! and `n_z = 2 n_r + 1` axial samples covering `[-1, 1]`. Measurement point
//! `i` (0-based) sits at `x_i = i h`, so the first one is on the axis, and
//! radial cell `j` covers `[j h, (j + 1) h)`.
//!
//! [`GridXYZ`] is the Cartesian companion grid with the same spacing, used to
//! evaluate norms of the revolved (three dimensional) density.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::marker::PhantomData;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Cylindrical `(r, z)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct GridRZ {
    n_r: usize,
    n_z: usize,
    h: f64,
}

#[derive(Deserialize)]
struct GridRepr {
    n_r: usize,
    n_z: usize,
    h: f64,
}

impl TryFrom<GridRepr> for GridRZ {
    type Error = Error;

    fn try_from(repr: GridRepr) -> Result<Self> {
        let grid = GridRZ::new(repr.n_r)?;
        if repr.n_z != grid.n_z || repr.h != grid.h {
            return invalid(format!(
                "grid n_r={} requires n_z={} and h={}, got n_z={} h={}",
                repr.n_r, grid.n_z, grid.h, repr.n_z, repr.h
            ));
        }
        Ok(grid)
    }
}

impl GridRZ {
    pub fn new(n_r: usize) -> Result<Self> {
        if n_r < 2 {
            return invalid(format!("n_r must be at least 2, got {n_r}"));
        }
        Ok(Self {
            n_r,
            n_z: 2 * n_r + 1,
            h: 1.0 / n_r as f64,
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Measurement abscissa `x_i = i h`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Bounds `[j h, (j + 1) h]` of radial cell `j`.
    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        (j as f64 * self.h, (j + 1) as f64 * self.h)
    }

    pub fn cell_midpoint(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h
    }

    /// Axial sample `z_k = -1 + k h`.
    pub fn z(&self, k: usize) -> f64 {
        -1.0 + k as f64 * self.h
    }

    /// Area of the `(r, z)` domain covered by the samples, `n_r n_z h^2`.
    pub fn area(&self) -> f64 {
        (self.n_r * self.n_z) as f64 * self.h * self.h
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_r, self.n_z)
    }
}

/// Cartesian `(x, y, z)` grid: `x, y` in `[-1, 1]` with `2n + 1` samples each,
/// and the same axial samples as the companion [`GridRZ`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridXYZ {
    n: usize,
    n_z: usize,
    h: f64,
}

impl GridXYZ {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Samples per horizontal axis, `2n + 1`.
    pub fn n_xy(&self) -> usize {
        2 * self.n + 1
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.n as f64) * self.h
    }

    /// Radial cell of the sample `(x_i, y_j)`, or `None` when `r >= 1`.
    ///
    /// `r / h = sqrt(a^2 + b^2)` for integer offsets `a, b`, so the cell index
    /// is an integer square root and exact.
    pub fn radial_cell(&self, i: usize, j: usize) -> Option<usize> {
        let a = i.abs_diff(self.n) as u64;
        let b = j.abs_diff(self.n) as u64;
        let m = (a * a + b * b).isqrt() as usize;
        (m < self.n).then_some(m)
    }

    /// Number of `(x, y)` samples falling in each radial cell.
    pub fn cell_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n];
        for i in 0..self.n_xy() {
            for j in 0..self.n_xy() {
                if let Some(m) = self.radial_cell(i, j) {
                    counts[m] += 1;
                }
            }
        }
        counts
    }

    fn check_companion(&self, grid: &GridRZ) -> Result<()> {
        if self.h != grid.h || self.n != grid.n_r || self.n_z != grid.n_z {
            return invalid(format!(
                "grid mismatch: cartesian h={} n={} vs cylindrical h={} n_r={}",
                self.h, self.n, grid.h, grid.n_r
            ));
        }
        Ok(())
    }
}

/// Builds the cylindrical grid and its Cartesian companion.
pub fn make_grids(n_r: usize) -> Result<(GridRZ, GridXYZ)> {
    let rz = GridRZ::new(n_r)?;
    let xyz = GridXYZ {
        n: n_r,
        n_z: rz.n_z,
        h: rz.h,
    };
    Ok((rz, xyz))
}

pub trait FieldKind {
    const NAME: &'static str;
}

/// Marker for densities indexed by (radial cell, axial sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radial;

/// Marker for projections indexed by (measurement point, axial sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection;

impl FieldKind for Radial {
    const NAME: &'static str = "radial";
}

impl FieldKind for Projection {
    const NAME: &'static str = "projection";
}

/// Finite samples on a [`GridRZ`], stored as an `n_r x n_z` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<K> {
    grid: GridRZ,
    values: DMatrix<f64>,
    _kind: PhantomData<K>,
}

/// The unknown density `u(r_j, z_k)`.
pub type RadialField = Field<Radial>;
/// Line-of-sight data `f(x_i, z_k)`.
pub type ProjectionField = Field<Projection>;

impl<K: FieldKind> Field<K> {
    pub fn zeros(grid: GridRZ) -> Self {
        Self {
            grid,
            values: DMatrix::zeros(grid.n_r, grid.n_z),
            _kind: PhantomData,
        }
    }

    pub fn from_values(grid: GridRZ, values: DMatrix<f64>) -> Result<Self> {
        if values.shape() != grid.shape() {
            return invalid(format!(
                "{} field shape {:?} does not match grid {:?}",
                K::NAME,
                values.shape(),
                grid.shape()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("{} field has a non-finite value at {pos}", K::NAME));
        }
        Ok(Self {
            grid,
            values,
            _kind: PhantomData,
        })
    }

    pub fn from_fn(grid: GridRZ, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_values(grid, DMatrix::from_fn(grid.n_r, grid.n_z, f))
    }

    pub fn grid(&self) -> &GridRZ {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j, k)]
    }

    /// Writes the CSV form: a `# grid` header line, then one row per radial
    /// index with `n_z` comma separated values.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# grid n_r={} n_z={} h={}\n",
            self.grid.n_r, self.grid.n_z, self.grid.h
        );
        for row in self.values.row_iter() {
            let mut first = true;
            for v in row.iter() {
                if !first {
                    s.push(',');
                }
                first = false;
                // `Display` for f64 prints the shortest string that parses back exactly.
                write!(s, "{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field csv".into()))??;
        let grid = parse_grid_header(&header)?;
        let mut data = Vec::with_capacity(grid.n_r * grid.n_z);
        let mut rows = 0;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let before = data.len();
            for tok in line.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad value {tok:?}: {e}")))?;
                data.push(v);
            }
            if data.len() - before != grid.n_z {
                return Err(Error::Parse(format!(
                    "row {rows} has {} values, expected {}",
                    data.len() - before,
                    grid.n_z
                )));
            }
            rows += 1;
        }
        if rows != grid.n_r {
            return Err(Error::Parse(format!("{rows} rows, expected {}", grid.n_r)));
        }
        Self::from_values(grid, DMatrix::from_row_slice(grid.n_r, grid.n_z, &data))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&FieldEnvelope::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let env: FieldEnvelope = serde_json::from_str(s)?;
        env.try_into()
    }
}

fn parse_grid_header(line: &str) -> Result<GridRZ> {
    let rest = line
        .strip_prefix("# grid")
        .ok_or_else(|| Error::Parse(format!("missing grid header, got {line:?}")))?;
    let (mut n_r, mut n_z, mut h) = (None, None, None);
    for tok in rest.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
        let bad = |_| Error::Parse(format!("bad header value {tok:?}"));
        match key {
            "n_r" => n_r = Some(val.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "n_z" => n_z = Some(val.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "h" => h = Some(val.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
        }
    }
    match (n_r, n_z, h) {
        (Some(n_r), Some(n_z), Some(h)) => GridRZ::try_from(GridRepr { n_r, n_z, h }),
        _ => Err(Error::Parse("header must carry n_r, n_z and h".into())),
    }
}

#[derive(Serialize, Deserialize)]
struct FieldEnvelope {
    grid: GridRZ,
    values: Vec<Vec<f64>>,
}

impl<K: FieldKind> From<&Field<K>> for FieldEnvelope {
    fn from(f: &Field<K>) -> Self {
        Self {
            grid: f.grid,
            values: f
                .values
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
    }
}

impl<K: FieldKind> TryFrom<FieldEnvelope> for Field<K> {
    type Error = Error;

    fn try_from(env: FieldEnvelope) -> Result<Self> {
        let grid = env.grid;
        if env.values.len() != grid.n_r || env.values.iter().any(|r| r.len() != grid.n_z) {
            return Err(Error::Parse("json field values do not match grid".into()));
        }
        let flat: Vec<f64> = env.values.into_iter().flatten().collect();
        Field::from_values(grid, DMatrix::from_row_slice(grid.n_r, grid.n_z, &flat))
    }
}

impl RadialField {
    /// Checks the ground-truth constraints: nonnegative values and an
    /// identically zero outermost radial cell.
    pub fn check_ground_truth(&self) -> Result<()> {
        if self.values.iter().any(|&v| v < 0.0) {
            return invalid("ground-truth density has negative values");
        }
        if self.values.row(self.grid.n_r - 1).iter().any(|&v| v != 0.0) {
            return invalid("ground-truth density is nonzero in the outermost radial cell");
        }
        Ok(())
    }
}

/// Pair of per-cell components: `radial` holds differences along the radial
/// index, `axial` along the axial index.
#[derive(Debug, Clone, PartialEq)]
pub struct DualField {
    pub radial: DMatrix<f64>,
    pub axial: DMatrix<f64>,
}

impl DualField {
    pub fn zeros(shape: (usize, usize)) -> Self {
        Self {
            radial: DMatrix::zeros(shape.0, shape.1),
            axial: DMatrix::zeros(shape.0, shape.1),
        }
    }

    pub fn new(radial: DMatrix<f64>, axial: DMatrix<f64>) -> Result<Self> {
        if radial.shape() != axial.shape() {
            return invalid(format!(
                "dual components differ in shape: {:?} vs {:?}",
                radial.shape(),
                axial.shape()
            ));
        }
        Ok(Self { radial, axial })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.radial.shape()
    }

    /// Per-cell Euclidean magnitude.
    pub fn magnitude(&self) -> DMatrix<f64> {
        self.radial.zip_map(&self.axial, f64::hypot)
    }

    /// Projects every cell onto the closed unit disc: `p / max(1, |p|)`.
    pub fn project_unit_ball(&mut self) {
        for (a, b) in self.radial.iter_mut().zip(self.axial.iter_mut()) {
            let scale = a.hypot(*b).max(1.0);
            *a /= scale;
            *b /= scale;
        }
    }

    pub fn dot(&self, other: &DualField) -> f64 {
        self.radial.dot(&other.radial) + self.axial.dot(&other.axial)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Samples of a revolved density on a [`GridXYZ`], stored `x`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    n_xy: usize,
    n_z: usize,
    data: Vec<f64>,
}

impl Volume {
    pub fn zeros(n_xy: usize, n_z: usize) -> Self {
        Self {
            n_xy,
            n_z,
            data: vec![0.0; n_xy * n_xy * n_z],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_xy, self.n_xy, self.n_z)
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_xy + j) * self.n_z + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Samples `u` on the Cartesian grid: the value at `(x_i, y_j, z_k)` is the
/// cell value of the radial cell containing `sqrt(x_i^2 + y_j^2)`, and zero
/// for `r >= 1`.
pub fn revolve(u: &RadialField, g3: &GridXYZ) -> Result<Volume> {
    g3.check_companion(u.grid())?;
    let n_xy = g3.n_xy();
    let mut vol = Volume::zeros(n_xy, g3.n_z);
    for i in 0..n_xy {
        for j in 0..n_xy {
            if let Some(m) = g3.radial_cell(i, j) {
                let start = vol.index(i, j, 0);
                for (k, slot) in vol.data[start..start + g3.n_z].iter_mut().enumerate() {
                    *slot = u.values[(m, k)];
                }
            }
        }
    }
    Ok(vol)
}
