//! Synthetic axisymmetric densities and the Gaussian noise model.
//!
//! A phantom is a list of shapes in the `(r, z)` half plane, each with a
//! level in `[0, 1]`; later shapes overwrite earlier ones. Two phantoms ship
//! built in:
//!
//! - `nested-annuli`: four concentric half-ellipses centred on the axis at
//!   `z = 0` with semi-axes 0.8, 0.6, 0.45, 0.25 and levels 0.4, 1.0, 0.2, 0.7.
//! - `four-blobs`: four disjoint components, two on the axis (half-ellipses)
//!   and two off-axis rings (rectangles in `(r, z)`).

use nalgebra::DMatrix;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{GridRZ, ProjectionField, RadialField};

/// A region of the `(r, z)` half plane with a density level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `[r0, r1) x [z0, z1]`; a cylinder, or a ring when `r0 > 0`.
    Rect {
        r: [f64; 2],
        z: [f64; 2],
        level: f64,
    },
    /// The half `r >= r0` of the ellipse centred at `(r0, (z0 + z1) / 2)`
    /// with semi-axes `r1 - r0` and `(z1 - z0) / 2`.
    HalfEllipse {
        r: [f64; 2],
        z: [f64; 2],
        level: f64,
    },
}

impl Shape {
    pub fn level(&self) -> f64 {
        match *self {
            Shape::Rect { level, .. } | Shape::HalfEllipse { level, .. } => level,
        }
    }

    fn extent(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Shape::Rect { r, z, .. } | Shape::HalfEllipse { r, z, .. } => (r, z),
        }
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        match *self {
            Shape::Rect {
                r: [r0, r1],
                z: [z0, z1],
                ..
            } => r >= r0 && r < r1 && z >= z0 && z <= z1,
            Shape::HalfEllipse {
                r: [r0, r1],
                z: [z0, z1],
                ..
            } => {
                let a = r1 - r0;
                let b = 0.5 * (z1 - z0);
                let zc = 0.5 * (z0 + z1);
                r >= r0 && ((r - r0) / a).powi(2) + ((z - zc) / b).powi(2) < 1.0
            }
        }
    }

    fn validate(&self, grid: &GridRZ) -> Result<()> {
        let ([r0, r1], [z0, z1]) = self.extent();
        let h = grid.h();
        let level = self.level();
        if !(0.0..=1.0).contains(&level) {
            return invalid(format!("shape level {level} outside [0, 1]"));
        }
        if [r0, r1, z0, z1].iter().any(|v| !v.is_finite()) || r0 >= r1 || z0 >= z1 {
            return invalid(format!(
                "shape extent r={:?} z={:?} is empty",
                [r0, r1],
                [z0, z1]
            ));
        }
        if r0 < 0.0 || r1 > 1.0 - h || z0 < -1.0 + h || z1 > 1.0 - h {
            return invalid(format!(
                "shape r={:?} z={:?} escapes the support box [0, {}) x [{}, {}]",
                [r0, r1],
                [z0, z1],
                1.0 - h,
                -1.0 + h,
                1.0 - h
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub shapes: Vec<Shape>,
}

impl PhantomSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["nested-annuli", "four-blobs"]
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let ellipse = |a: f64, zc: f64, b: f64, level: f64| Shape::HalfEllipse {
            r: [0.0, a],
            z: [zc - b, zc + b],
            level,
        };
        let shapes = match name {
            "nested-annuli" => vec![
                ellipse(0.8, 0.0, 0.8, 0.4),
                ellipse(0.6, 0.0, 0.6, 1.0),
                ellipse(0.45, 0.0, 0.45, 0.2),
                ellipse(0.25, 0.0, 0.25, 0.7),
            ],
            "four-blobs" => vec![
                ellipse(0.3, 0.55, 0.25, 1.0),
                Shape::Rect {
                    r: [0.45, 0.7],
                    z: [0.2, 0.6],
                    level: 0.6,
                },
                ellipse(0.35, -0.4, 0.3, 0.8),
                Shape::Rect {
                    r: [0.5, 0.8],
                    z: [-0.75, -0.35],
                    level: 0.5,
                },
            ],
            other => {
                return invalid(format!(
                    "unknown phantom {other:?}; built-ins are {:?}",
                    Self::builtin_names()
                ))
            }
        };
        Ok(Self { shapes })
    }
}

/// Cell value is the level of the last shape containing the point
/// `(cell midpoint, z_k)`, zero when none does.
pub fn rasterize_phantom(spec: &PhantomSpec, g: &GridRZ) -> Result<RadialField> {
    for s in &spec.shapes {
        s.validate(g)?;
    }
    RadialField::from_fn(*g, |j, k| {
        let (r, z) = (g.cell_midpoint(j), g.z(k));
        spec.shapes
            .iter()
            .rev()
            .find(|s| s.contains(r, z))
            .map_or(0.0, Shape::level)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Noise variance as a fraction of `max |f0|`.
    pub variance_fraction: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(variance_fraction: f64, seed: u64) -> Result<Self> {
        if !(variance_fraction >= 0.0 && variance_fraction.is_finite()) {
            return invalid(format!(
                "variance fraction must be finite and nonnegative, got {variance_fraction}"
            ));
        }
        Ok(Self {
            variance_fraction,
            seed,
        })
    }

    /// Standard deviation for clean data `f0`.
    pub fn sigma(&self, f0: &ProjectionField) -> f64 {
        (self.variance_fraction * f0.values().amax()).sqrt()
    }
}

/// `f0 + eta` with i.i.d. `N(0, sigma^2)` noise. Column `k` draws from ChaCha
/// stream `k` of the seeded generator, so the output depends only on the seed
/// and the grid.
pub fn add_noise(f0: &ProjectionField, ns: &NoiseSpec) -> Result<ProjectionField> {
    NoiseSpec::new(ns.variance_fraction, ns.seed)?;
    if ns.variance_fraction == 0.0 {
        return Ok(f0.clone());
    }
    let sigma = ns.sigma(f0);
    let (nr, nz) = f0.grid().shape();
    let mut values = f0.values().clone();
    for k in 0..nz {
        let mut rng = ChaCha8Rng::seed_from_u64(ns.seed);
        rng.set_stream(k as u64);
        for j in 0..nr {
            let eta: f64 = rng.sample(StandardNormal);
            values[(j, k)] += sigma * eta;
        }
    }
    ProjectionField::from_values(*f0.grid(), values)
}

/// Noise realization `f - f0`.
pub fn noise_of(f: &ProjectionField, f0: &ProjectionField) -> DMatrix<f64> {
    f.values() - f0.values()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grids;
    use crate::metrics::{norm_l2_vh, tv_seminorm};

    fn grid(n: usize) -> GridRZ {
        make_grids(n).unwrap().0
    }

    #[test]
    fn empty_spec_is_zero() {
        let u = rasterize_phantom(&PhantomSpec::default(), &grid(16)).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cylinder_on_axis() {
        let g = grid(64);
        let spec = PhantomSpec {
            shapes: vec![Shape::Rect {
                r: [0.0, 0.5],
                z: [-0.5, 0.5],
                level: 1.0,
            }],
        };
        let u = rasterize_phantom(&spec, &g).unwrap();
        for j in 0..64 {
            for k in 0..g.n_z() {
                let inside = g.cell_midpoint(j) < 0.5 && g.z(k).abs() <= 0.5;
                assert_eq!(u.get(j, k), if inside { 1.0 } else { 0.0 });
            }
        }
        u.check_ground_truth().unwrap();
        // boundary away from the axis: two caps of length 0.5 and a side of length 1
        let tv = tv_seminorm(u.values(), g.h());
        assert!((tv - 2.0).abs() <= 4.0 * g.h(), "{tv}");
    }

    #[test]
    fn later_shapes_overwrite() {
        let g = grid(32);
        let spec = PhantomSpec {
            shapes: vec![
                Shape::Rect {
                    r: [0.0, 0.5],
                    z: [-0.5, 0.5],
                    level: 1.0,
                },
                Shape::Rect {
                    r: [0.25, 0.75],
                    z: [0.0, 0.5],
                    level: 0.4,
                },
            ],
        };
        let u = rasterize_phantom(&spec, &g).unwrap();
        // (r, z) = (0.33, 0.25) lies in both
        let j = (0.33 * 32.0) as usize;
        let k = ((0.25 + 1.0) * 32.0) as usize;
        assert_eq!(u.get(j, k), 0.4);
    }

    #[test]
    fn disjoint_permutation_invariant() {
        let g = grid(64);
        let mut spec = PhantomSpec::builtin("four-blobs").unwrap();
        let a = rasterize_phantom(&spec, &g).unwrap();
        spec.shapes.reverse();
        let b = rasterize_phantom(&spec, &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn escaping_shapes_rejected() {
        let g = grid(16);
        let bad = [
            Shape::Rect {
                r: [0.0, 1.0],
                z: [-0.5, 0.5],
                level: 1.0,
            },
            Shape::Rect {
                r: [0.0, 0.5],
                z: [-1.0, 0.5],
                level: 1.0,
            },
            Shape::HalfEllipse {
                r: [0.0, 0.5],
                z: [0.0, 1.0],
                level: 1.0,
            },
            Shape::Rect {
                r: [0.0, 0.5],
                z: [-0.5, 0.5],
                level: 1.5,
            },
            Shape::Rect {
                r: [0.5, 0.2],
                z: [-0.5, 0.5],
                level: 0.5,
            },
        ];
        for s in bad {
            assert!(
                rasterize_phantom(&PhantomSpec { shapes: vec![s] }, &g).is_err(),
                "{s:?}"
            );
        }
    }

    #[test]
    fn builtins_are_ground_truth() {
        let g = grid(128);
        for name in PhantomSpec::builtin_names() {
            let u = rasterize_phantom(&PhantomSpec::builtin(name).unwrap(), &g).unwrap();
            u.check_ground_truth().unwrap();
            assert_eq!(u.values().amax(), 1.0);
        }
        assert!(PhantomSpec::builtin("nope").is_err());
    }

    #[test]
    fn json_schema() {
        let text = r#"{"shapes":[
            {"kind":"rect","r":[0.0,0.5],"z":[-0.5,0.5],"level":1.0},
            {"kind":"half_ellipse","r":[0.0,0.3],"z":[-0.2,0.4],"level":0.5}]}"#;
        let spec = PhantomSpec::from_json(text).unwrap();
        assert_eq!(spec.shapes.len(), 2);
        assert!(matches!(spec.shapes[1], Shape::HalfEllipse { level, .. } if level == 0.5));
        assert_eq!(
            PhantomSpec::from_json(&spec.to_json().unwrap()).unwrap(),
            spec
        );
        assert!(PhantomSpec::from_json(r#"{"shapes":[{"kind":"disc"}]}"#).is_err());
    }

    fn projection(n: usize) -> ProjectionField {
        let g = grid(n);
        ProjectionField::from_fn(g, |i, k| {
            let x = g.x(i);
            let z = g.z(k);
            (1.0 - x * x).max(0.0).sqrt() * (1.0 - z * z)
        })
        .unwrap()
    }

    #[test]
    fn zero_variance_is_identity() {
        let f0 = projection(16);
        let f = add_noise(&f0, &NoiseSpec::new(0.0, 9).unwrap()).unwrap();
        assert_eq!(f, f0);
        assert!(NoiseSpec::new(-0.1, 1).is_err());
    }

    #[test]
    fn seeded_determinism() {
        let f0 = projection(16);
        let a = add_noise(&f0, &NoiseSpec::new(0.01, 1).unwrap()).unwrap();
        let b = add_noise(&f0, &NoiseSpec::new(0.01, 1).unwrap()).unwrap();
        let c = add_noise(&f0, &NoiseSpec::new(0.01, 2).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_statistics() {
        let f0 = projection(128);
        let ns = NoiseSpec::new(0.0005, 42).unwrap();
        let f = add_noise(&f0, &ns).unwrap();
        let eta = noise_of(&f, &f0);
        let n = eta.len() as f64;
        let sigma = ns.sigma(&f0);
        let mean = eta.sum() / n;
        let var = eta.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - sigma * sigma).abs() <= 0.05 * sigma * sigma, "{var}");
        assert!(mean.abs() <= 4.0 * sigma / n.sqrt(), "{mean}");
        let g = f0.grid();
        let norm = norm_l2_vh(&eta, g.h());
        let expect = sigma * g.area().sqrt();
        assert!((norm - expect).abs() <= 0.1 * expect, "{norm} vs {expect}");
    }
}
