use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// A function of the radius on `[0, 1]`, together with the points where it
/// may jump or blow up like an inverse square root. Quadrature routines split
/// their integration ranges at those points.
pub trait RadialProfile {
    fn value(&self, r: f64) -> f64;

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> RadialProfile for F {
    fn value(&self, r: f64) -> f64 {
        self(r)
    }
}

/// A closure with declared breakpoints.
pub struct FnProfile<F> {
    f: F,
    breaks: Vec<f64>,
}

impl<F: Fn(f64) -> f64> FnProfile<F> {
    pub fn new(f: F, breaks: Vec<f64>) -> Self {
        Self { f, breaks }
    }
}

impl<F: Fn(f64) -> f64> RadialProfile for FnProfile<F> {
    fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

/// Step function on `[0, 1)`: `values[m]` on `[breakpoints[m], breakpoints[m+1])`
/// and zero from the last breakpoint on.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.first() != Some(&0.0) {
            return invalid("profile breakpoints must start at 0");
        }
        if values.len() + 1 != breakpoints.len() {
            return invalid(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            ));
        }
        if breakpoints
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return invalid("profile breakpoints must be strictly increasing");
        }
        if *breakpoints.last().unwrap() > 1.0 {
            return invalid("profile support must lie in [0, 1]");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("profile values must be finite");
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// The zero profile.
    pub fn zero() -> Self {
        Self {
            breakpoints: vec![0.0],
            values: Vec::new(),
        }
    }

    /// Indicator of `[0, a)`, scaled by `level`.
    pub fn step(a: f64, level: f64) -> Result<Self> {
        Self::new(vec![0.0, a], vec![level])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// End of the support.
    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn value(&self, r: f64) -> f64 {
        if r < 0.0 || r >= self.support_end() {
            return 0.0;
        }
        // index of the last breakpoint <= r
        let m = self.breakpoints.partition_point(|&b| b <= r) - 1;
        self.values[m]
    }

    /// `(location, size)` of each nonzero jump on `(0, 1]`, including the
    /// final drop to zero.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        (1..self.breakpoints.len())
            .map(|m| {
                let right = self.values.get(m).copied().unwrap_or(0.0);
                (self.breakpoints[m], right - self.values[m - 1])
            })
            .filter(|&(_, d)| d != 0.0)
            .collect()
    }

    /// Sum of absolute jump sizes.
    pub fn total_variation(&self) -> f64 {
        self.jumps().iter().map(|(_, d)| d.abs()).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.pieces().map(|(a, b, v)| (b - a) * v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.pieces()
            .map(|(a, b, v)| (b - a) * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Exact `int_a^b v`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.pieces()
            .map(|(lo, hi, v)| v * (hi.min(b) - lo.max(a)).max(0.0))
            .sum()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(m, &v)| (self.breakpoints[m], self.breakpoints[m + 1], v))
    }

    /// Closed form of the half-order integral for a step function:
    /// `(2/sqrt(pi)) sum_m v_m (sqrt((b_{m+1} - x)_+) - sqrt((b_m - x)_+))`.
    pub fn j_transform_exact(&self, x: f64) -> f64 {
        let root = |b: f64| (b - x).max(0.0).sqrt();
        let s: f64 = self.pieces().map(|(a, b, v)| v * (root(b) - root(a))).sum();
        2.0 * s / std::f64::consts::PI.sqrt()
    }

    /// Random profile with `1..=max_pieces` pieces, breakpoints uniform in
    /// `(0, 0.95)` and values uniform in `[0, 1]`.
    pub fn random<R: Rng>(rng: &mut R, max_pieces: usize) -> Self {
        let pieces = rng.random_range(1..=max_pieces);
        loop {
            let mut inner: Vec<f64> = (0..pieces)
                .map(|_| {
                    let mut b = 0.0;
                    while b == 0.0 {
                        b = rng.random_range(0.0..0.95);
                    }
                    b
                })
                .collect();
            inner.sort_by(f64::total_cmp);
            if inner.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let mut breakpoints = vec![0.0];
            breakpoints.extend(inner);
            let values = (0..pieces).map(|_| rng.random_range(0.0..=1.0)).collect();
            return Self {
                breakpoints,
                values,
            };
        }
    }
}

impl RadialProfile for PiecewiseConstantProfile {
    fn value(&self, r: f64) -> f64 {
        PiecewiseConstantProfile::value(self, r)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints[1..].to_vec()
    }
}

/// Seeded stream of random step profiles.
pub fn random_profiles(seed: u64, count: usize) -> Vec<PiecewiseConstantProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| PiecewiseConstantProfile::random(&mut rng, 8))
        .collect()
}
