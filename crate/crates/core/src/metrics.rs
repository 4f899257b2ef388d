//! Discrete norms and the error-bound report.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridXYZ, ProjectionField, RadialField, Volume};

/// Upper bound the aggregate ratio `c_star` is expected to respect.
pub const C_STAR_BOUND: f64 = 1.07;

/// `(h^3 sum u^2)^{1/2}` over the Cartesian samples.
pub fn norm_l2_uh(u3: &Volume, h: f64) -> f64 {
    (h.powi(3) * u3.as_slice().iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// [`norm_l2_uh`] of the revolved field without materializing the volume:
/// each radial cell is weighted by the number of Cartesian samples it covers.
pub fn norm_l2_uh_revolved(u: &RadialField, g3: &GridXYZ) -> Result<f64> {
    if u.grid().n_r() != g3.n() || u.grid().h() != g3.h() || u.grid().n_z() != g3.n_z() {
        return invalid("density grid does not match the cartesian grid");
    }
    let counts = g3.cell_counts();
    let sum: f64 = u
        .values()
        .row_iter()
        .zip(&counts)
        .map(|(row, &c)| c as f64 * row.iter().map(|v| v * v).sum::<f64>())
        .sum();
    Ok((g3.h().powi(3) * sum).sqrt())
}

/// `(h^2 sum u^2)^{1/2}` over the cylindrical samples.
pub fn norm_l2_vh(u: &DMatrix<f64>, h: f64) -> f64 {
    h * u.norm()
}

/// `h^2 sum |grad_h u|` with the per-cell Euclidean magnitude.
pub fn tv_seminorm(u: &DMatrix<f64>, h: f64) -> f64 {
    let (nr, nz) = u.shape();
    let mut sum = 0.0;
    for k in 0..nz {
        for j in 0..nr {
            let here = u[(j, k)];
            let dr = if j + 1 < nr {
                u[(j + 1, k)] - here
            } else {
                0.0
            };
            let dz = if k + 1 < nz {
                u[(j, k + 1)] - here
            } else {
                0.0
            };
            sum += dr.hypot(dz);
        }
    }
    // h^2 * (1/h) from the difference quotient
    h * sum
}

pub fn norm_linf(u: &DMatrix<f64>) -> f64 {
    u.amax()
}

/// How the noise norm `||f - f0||` entering `M1` was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseNorm<'a> {
    /// From the clean data.
    Realized(&'a ProjectionField),
    /// `sigma * sqrt(area)`, the expected norm of white noise.
    Estimated { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Larger TV seminorm of the reconstruction and the ground truth.
    pub c: f64,
    /// Larger sup-norm of the two.
    pub m: f64,
    /// `(||f* - f|| + ||f - f0||)^{1/3}`.
    pub m1: f64,
    /// `err_l2_uh / (m1 (4 c m)^{1/3})`.
    pub c_star: f64,
    /// `||u* - u0||` on the Cartesian grid.
    pub err_l2_uh: f64,
    /// `||f* - f||` on the cylindrical grid.
    pub resid_l2_vh: f64,
    /// `||f - f0||` used for `m1`.
    pub noise_l2_vh: f64,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str = "sigma2_frac,err_l2_uh,resid_l2_vh,M1,c,M,c_star";

    /// One row in the column order of [`Self::CSV_HEADER`].
    pub fn to_csv_row(&self, sigma2_frac: f64) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            sigma2_frac, self.err_l2_uh, self.resid_l2_vh, self.m1, self.c, self.m, self.c_star
        )
    }

    pub fn within_bound(&self) -> bool {
        self.c_star <= C_STAR_BOUND
    }
}

/// Builds the report from the reconstruction `u_star`, truth `u0`, the
/// reprojection `f_star = A u_star`, noisy data `f` and clean data `f0`.
pub fn bound_report(
    u_star: &RadialField,
    u0: &RadialField,
    f_star: &ProjectionField,
    f: &ProjectionField,
    f0: &ProjectionField,
    g3: &GridXYZ,
) -> Result<BoundReport> {
    bound_report_with(u_star, u0, f_star, f, NoiseNorm::Realized(f0), g3)
}

pub fn bound_report_with(
    u_star: &RadialField,
    u0: &RadialField,
    f_star: &ProjectionField,
    f: &ProjectionField,
    noise: NoiseNorm<'_>,
    g3: &GridXYZ,
) -> Result<BoundReport> {
    let grid = u_star.grid();
    if u0.grid() != grid || f_star.grid() != grid || f.grid() != grid {
        return invalid("report inputs live on different grids");
    }
    let h = grid.h();
    let resid_l2_vh = norm_l2_vh(&(f_star.values() - f.values()), h);
    let noise_l2_vh = match noise {
        NoiseNorm::Realized(f0) => {
            if f0.grid() != grid {
                return invalid("clean data lives on a different grid");
            }
            norm_l2_vh(&(f.values() - f0.values()), h)
        }
        NoiseNorm::Estimated { sigma } => sigma * grid.area().sqrt(),
    };
    let c = tv_seminorm(u_star.values(), h).max(tv_seminorm(u0.values(), h));
    let m = norm_linf(u_star.values()).max(norm_linf(u0.values()));
    let m1 = (resid_l2_vh + noise_l2_vh).cbrt();
    let diff = RadialField::from_values(*grid, u_star.values() - u0.values())?;
    let err_l2_uh = norm_l2_uh_revolved(&diff, g3)?;
    let denom = m1 * (4.0 * c * m).cbrt();
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::DegenerateInstance(format!(
            "c_star denominator vanishes (c={c}, M={m}, M1={m1})"
        )));
    }
    Ok(BoundReport {
        c,
        m,
        m1,
        c_star: err_l2_uh / denom,
        err_l2_uh,
        resid_l2_vh,
        noise_l2_vh,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grids, revolve};

    #[test]
    fn l2_uh_cases() {
        let vol = Volume::zeros(3, 4);
        assert_eq!(norm_l2_uh(&vol, 0.5), 0.0);
        let mut one = Volume::zeros(3, 4);
        one.set(1, 2, 3, -2.0);
        assert!((norm_l2_uh(&one, 0.5) - 0.5f64.powf(1.5) * 2.0).abs() < 1e-15);
    }

    #[test]
    fn unit_disc_of_height_one() {
        let (g, g3) = make_grids(128).unwrap();
        let u = RadialField::from_fn(g, |_, k| {
            let z = g.z(k);
            if (-0.5..0.5).contains(&z) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let vol = revolve(&u, &g3).unwrap();
        let n = norm_l2_uh(&vol, g.h());
        let pi_sqrt = std::f64::consts::PI.sqrt();
        assert!((n - pi_sqrt).abs() / pi_sqrt < 0.05, "{n}");
        let fast = norm_l2_uh_revolved(&u, &g3).unwrap();
        assert!((fast - n).abs() <= 1e-12 * n);
    }

    #[test]
    fn l2_vh_cases() {
        let (g, _) = make_grids(64).unwrap();
        let h = g.h();
        assert_eq!(norm_l2_vh(&DMatrix::zeros(64, g.n_z()), h), 0.0);
        let ones = DMatrix::from_element(64, g.n_z(), 1.0);
        let n = norm_l2_vh(&ones, h);
        assert!((n - 2f64.sqrt()).abs() <= h, "{n}");
        let u = DMatrix::from_fn(64, g.n_z(), |j, k| (j as f64 - k as f64).sin());
        let scaled = norm_l2_vh(&(&u * -3.0), h);
        assert!((scaled - 3.0 * norm_l2_vh(&u, h)).abs() <= 1e-14 * scaled);
    }

    #[test]
    fn tv_cases() {
        let h = 1.0 / 64.0;
        assert_eq!(tv_seminorm(&DMatrix::from_element(64, 129, 0.7), h), 0.0);
        // rectangle of side a (radial) by b (axial), away from the grid edges
        let (a, b) = (0.25, 0.5);
        let rect = DMatrix::from_fn(64, 129, |j, k| {
            let r = (j as f64 + 0.5) * h;
            let z = -1.0 + k as f64 * h;
            if (0.25..0.25 + a).contains(&r) && (-0.25..-0.25 + b).contains(&z) {
                1.0
            } else {
                0.0
            }
        });
        let tv = tv_seminorm(&rect, h);
        assert!((tv - 2.0 * (a + b)).abs() <= 4.0 * h, "{tv}");
    }

    #[test]
    fn linf_cases() {
        assert_eq!(norm_linf(&DMatrix::zeros(2, 2)), 0.0);
        assert_eq!(
            norm_linf(&DMatrix::from_row_slice(1, 3, &[1.0, -3.0, 2.0])),
            3.0
        );
    }

    #[test]
    fn degenerate_report() {
        let (g, g3) = make_grids(8).unwrap();
        let u = RadialField::zeros(g);
        let f = ProjectionField::zeros(g);
        match bound_report(&u, &u, &f, &f, &f, &g3) {
            Err(Error::DegenerateInstance(_)) => {}
            other => panic!("expected degenerate instance, got {other:?}"),
        }
    }

    #[test]
    fn estimated_noise_norm() {
        let (g, g3) = make_grids(8).unwrap();
        let u = RadialField::from_fn(g, |j, _| if j < 4 { 1.0 } else { 0.0 }).unwrap();
        let f = ProjectionField::zeros(g);
        let r =
            bound_report_with(&u, &u, &f, &f, NoiseNorm::Estimated { sigma: 0.1 }, &g3).unwrap();
        assert!((r.noise_l2_vh - 0.1 * g.area().sqrt()).abs() < 1e-15);
        assert_eq!(r.c_star, 0.0);
        assert!(r.within_bound());
        assert_eq!(r.to_csv_row(0.5).split(',').count(), 7);
    }
}
