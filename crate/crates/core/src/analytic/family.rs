use std::f64::consts::PI;

use super::profile::PiecewiseConstantProfile;
use crate::error::{invalid, Result};

/// Constants of the one-dimensional stability and continuity estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    /// `||v||_2 <= c_l2_2d ||v||_TV^{1/2} ||J v||_2^{1/2}`
    pub c_l2_2d: f64,
    /// `||v||_1 <= c_l1_2d ||v||_TV^{1/3} ||J v||_1^{2/3}`
    pub c_l1_2d: f64,
    /// `||J v||_2 <= young_l2 ||v||_TV`
    pub young_l2: f64,
    /// `||J v||_1 <= young_l1 ||v||_TV`
    pub young_l1: f64,
}

impl BoundConstants {
    /// `L^1` norm of the first running-average kernel at width `h`.
    pub fn kernel_k1_l1(&self, h: f64) -> f64 {
        2.0 * h.sqrt()
    }

    /// `L^1` norm of the second running-average kernel at width `h`.
    pub fn kernel_k2_l1(&self, h: f64) -> f64 {
        2.0 * (2.0 - 2f64.sqrt()) * h.sqrt()
    }
}

pub fn bound_constants() -> BoundConstants {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    BoundConstants {
        c_l2_2d: 2.0 * PI.powf(-0.25) * (1.0 + 1.0 / s3).sqrt() * (3.0 - s2).sqrt(),
        c_l1_2d: 3f64.powf(4.0 / 3.0) * PI.powf(-1.0 / 3.0) * (3.0 - s2).powf(2.0 / 3.0),
        young_l2: (2.0 / PI).sqrt(),
        young_l1: 4.0 / (3.0 * PI.sqrt()),
    }
}

/// Closed-form norms of the indicator family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyNorms {
    pub tv: f64,
    pub v_l1: f64,
    pub v_l2: f64,
    pub g_l1: f64,
    pub g_l2: f64,
}

/// `v_k(r) = chi(k r)`, the indicator of `[0, 1/k]`, and its transform
/// `g_k(x) = 2 pi^{-1/2} (1/k - x)^{1/2} chi(k x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorFamily {
    k: f64,
}

impl IndicatorFamily {
    pub fn new(k: f64) -> Result<Self> {
        if !(1.0..f64::INFINITY).contains(&k) {
            return invalid(format!("family index must be at least 1, got {k}"));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn profile(&self) -> PiecewiseConstantProfile {
        PiecewiseConstantProfile::step(1.0 / self.k, 1.0).expect("1/k lies in (0, 1]")
    }

    pub fn g(&self, x: f64) -> f64 {
        let end = 1.0 / self.k;
        if (0.0..=end).contains(&x) {
            2.0 / PI.sqrt() * (end - x).sqrt()
        } else {
            0.0
        }
    }

    pub fn norms(&self) -> FamilyNorms {
        let k = self.k;
        FamilyNorms {
            tv: 1.0,
            v_l1: 1.0 / k,
            v_l2: k.powf(-0.5),
            g_l1: 4.0 / (3.0 * PI.sqrt()) * k.powf(-1.5),
            g_l2: (2.0 / PI).sqrt() / k,
        }
    }
}

/// Convenience form returning the profile, the closed-form transform and the
/// norm table.
pub fn indicator_family(
    k: f64,
) -> Result<(PiecewiseConstantProfile, impl Fn(f64) -> f64, FamilyNorms)> {
    let fam = IndicatorFamily::new(k)?;
    Ok((fam.profile(), move |x| fam.g(x), fam.norms()))
}
