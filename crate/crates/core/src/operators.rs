//! Discrete Abel transform (onion peeling), gradient and divergence.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::grid::{DualField, GridRZ, ProjectionField, RadialField};

/// Onion-peeling discretization of the Abel transform along the radial axis.
///
/// Entry `(i, j)` is the chord length of the line `x = x_i` through radial
/// cell `j`, so `(A u)_i` is exact for densities that are constant on cells.
/// The matrix is upper triangular with a strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelMatrix {
    n: usize,
    h: f64,
    entries: DMatrix<f64>,
}

impl AbelMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Full matrix, one row per line, shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.entries.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }

    fn check_len(&self, rows: usize, what: &str) -> Result<()> {
        if rows != self.n {
            return invalid(format!(
                "abel matrix is {0}x{0} but {what} has {rows} radial entries",
                self.n
            ));
        }
        Ok(())
    }
}

/// Builds the onion-peeling matrix for `g`.
///
/// With `x_i = i h` and cell `j = [j h, (j + 1) h]`, the entry is
/// `2 (sqrt(((j+1) h)^2 - x_i^2) - sqrt((j h)^2 - x_i^2))` for `j >= i`.
/// Radii are handled in units of `h` so the square roots see exact integers.
pub fn build_abel_matrix(g: &GridRZ) -> AbelMatrix {
    let n = g.n_r();
    let h = g.h();
    let chord = |j: usize, i: usize| ((j * j - i * i) as f64).sqrt();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if j < i {
            0.0
        } else {
            2.0 * h * (chord(j + 1, i) - chord(j, i))
        }
    });
    AbelMatrix { n, h, entries }
}

/// Projects `u` column by column: `f[:, k] = A u[:, k]`.
pub fn apply_abel(a: &AbelMatrix, u: &RadialField) -> Result<ProjectionField> {
    a.check_len(u.grid().n_r(), "density")?;
    ProjectionField::from_values(*u.grid(), &a.entries * u.values())
}

/// Applies `A^T` column by column.
pub fn apply_abel_transpose(a: &AbelMatrix, f: &ProjectionField) -> Result<RadialField> {
    a.check_len(f.grid().n_r(), "projection")?;
    RadialField::from_values(*f.grid(), a.entries.tr_mul(f.values()))
}

/// Forward differences divided by `h`. The last radial row of the radial
/// component and the last axial column of the axial component are zero.
pub fn gradient(u: &DMatrix<f64>, h: f64) -> DualField {
    let (nr, nz) = u.shape();
    let mut p = DualField::zeros((nr, nz));
    gradient_into(u, h, &mut p);
    p
}

pub(crate) fn gradient_into(u: &DMatrix<f64>, h: f64, p: &mut DualField) {
    let (nr, nz) = u.shape();
    let inv = 1.0 / h;
    for k in 0..nz {
        for j in 0..nr {
            let here = u[(j, k)];
            p.radial[(j, k)] = if j + 1 < nr {
                (u[(j + 1, k)] - here) * inv
            } else {
                0.0
            };
            p.axial[(j, k)] = if k + 1 < nz {
                (u[(j, k + 1)] - here) * inv
            } else {
                0.0
            };
        }
    }
}

/// Backward-difference divergence, the negative adjoint of [`gradient`].
pub fn divergence(p: &DualField, h: f64) -> Result<DMatrix<f64>> {
    if p.radial.shape() != p.axial.shape() {
        return invalid(format!(
            "dual components differ in shape: {:?} vs {:?}",
            p.radial.shape(),
            p.axial.shape()
        ));
    }
    let mut out = DMatrix::zeros(p.radial.nrows(), p.radial.ncols());
    divergence_into(p, h, &mut out);
    Ok(out)
}

pub(crate) fn divergence_into(p: &DualField, h: f64, out: &mut DMatrix<f64>) {
    let (nr, nz) = p.shape();
    let inv = 1.0 / h;
    for k in 0..nz {
        for j in 0..nr {
            // Interior: p[j] - p[j-1]. First index keeps p[j]; last keeps -p[j-1].
            let mut d = 0.0;
            if j + 1 < nr {
                d += p.radial[(j, k)];
            }
            if j > 0 {
                d -= p.radial[(j - 1, k)];
            }
            if k + 1 < nz {
                d += p.axial[(j, k)];
            }
            if k > 0 {
                d -= p.axial[(j, k - 1)];
            }
            out[(j, k)] = d * inv;
        }
    }
}
