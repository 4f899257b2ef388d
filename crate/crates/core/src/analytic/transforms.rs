use std::f64::consts::{FRAC_PI_2, PI};
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use super::profile::{PiecewiseConstantProfile, RadialProfile};
use crate::error::{invalid, Result};

/// Gauss-Legendre nodes used on every smooth piece.
pub const NODES_PER_PIECE: usize = 200;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(NODES_PER_PIECE).unwrap()))
}

/// `int_a^b f` after `r = a + (b - a) sin^2(theta)`. The map has vanishing
/// derivative at both ends, which absorbs inverse-square-root endpoint
/// singularities of `f`.
pub(crate) fn integrate_piece(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let len = b - a;
    rule().integrate(0.0, FRAC_PI_2, |t| {
        let (s, c) = t.sin_cos();
        f(a + len * s * s) * len * 2.0 * s * c
    })
}

/// Integration cut points: `lo`, every breakpoint strictly inside, `hi`.
fn cuts(lo: f64, hi: f64, breaks: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = breaks.into_iter().filter(|&b| b > lo && b < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn check_unit(x: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("{what} must lie in [0, 1], got {x}"));
    }
    Ok(())
}

/// `(1/sqrt(pi)) int_x^1 v(r) / sqrt(r - x) dr`.
///
/// On the piece touching `x` the substitution `r = x + (b - x) sin^2(theta)`
/// cancels the kernel exactly: `dr / sqrt(r - x) = 2 sqrt(b - x) cos(theta)`.
pub fn j_transform<P: RadialProfile + ?Sized>(v: &P, x: f64) -> Result<f64> {
    check_unit(x, "evaluation point")?;
    let pts = cuts(x, 1.0, v.breakpoints());
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        total += if a == x {
            let len = b - x;
            let scale = 2.0 * len.sqrt();
            rule().integrate(0.0, FRAC_PI_2, |t| {
                let (s, c) = t.sin_cos();
                v.value(x + len * s * s) * scale * c
            })
        } else {
            integrate_piece(a, b, |r| v.value(r) / (r - x).sqrt())
        };
    }
    Ok(total / PI.sqrt())
}

/// `2 int_x^1 u(r) r / sqrt(r^2 - x^2) dr`, computed as
/// `2 int_0^sqrt(1 - x^2) u(sqrt(x^2 + s^2)) ds`.
pub fn abel_transform<P: RadialProfile + ?Sized>(u: &P, x: f64) -> Result<f64> {
    check_unit(x, "evaluation point")?;
    let x2 = x * x;
    let s_end = (1.0 - x2).max(0.0).sqrt();
    let breaks = v_breaks_in_s(u.breakpoints(), x);
    let pts = cuts(0.0, s_end, breaks);
    let total: f64 = pts
        .windows(2)
        .map(|w| integrate_piece(w[0], w[1], |s| u.value((x2 + s * s).sqrt())))
        .sum();
    Ok(2.0 * total)
}

fn v_breaks_in_s(breaks: Vec<f64>, x: f64) -> Vec<f64> {
    breaks
        .into_iter()
        .filter(|&b| b > x)
        .map(|b| (b * b - x * x).sqrt())
        .collect()
}

/// Running average `(1/h) int_{x-h}^x v`.
pub fn running_average<P: RadialProfile + ?Sized>(v: &P, h: f64, x: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 0.5) {
        return invalid(format!("averaging width must lie in (0, 1/2], got {h}"));
    }
    if !(x >= h && x <= 1.0) {
        return invalid(format!("evaluation point must lie in [h, 1], got {x}"));
    }
    let pts = cuts(x - h, x, v.breakpoints());
    let total: f64 = pts
        .windows(2)
        .map(|w| integrate_piece(w[0], w[1], |y| v.value(y)))
        .sum();
    Ok(total / h)
}

/// Explicit inverse of the half-order integral for step data: the
/// Stieltjes integral against the jump measure of `g` reduces to
/// `-(1/sqrt(pi)) sum_{a_m > r} d_m / sqrt(a_m - r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesInverse {
    jumps: Vec<(f64, f64)>,
}

impl StieltjesInverse {
    pub fn new(g: &PiecewiseConstantProfile) -> Result<Self> {
        if g.value(0.0) < 0.0 {
            return invalid("data must satisfy g(0) >= 0");
        }
        Ok(Self { jumps: g.jumps() })
    }

    /// Zero at and beyond the last jump.
    pub fn value(&self, r: f64) -> f64 {
        let s: f64 = self
            .jumps
            .iter()
            .filter(|&&(a, _)| a > r)
            .map(|&(a, d)| d / (a - r).sqrt())
            .sum();
        -s / PI.sqrt()
    }
}

impl RadialProfile for StieltjesInverse {
    fn value(&self, r: f64) -> f64 {
        StieltjesInverse::value(self, r)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.jumps.iter().map(|&(a, _)| a).collect()
    }
}

/// Value of the inverse at `r` in `[0, 1)`.
pub fn stieltjes_inverse(g: &PiecewiseConstantProfile, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return invalid(format!("radius must lie in [0, 1), got {r}"));
    }
    Ok(StieltjesInverse::new(g)?.value(r))
}

/// `L^1` and `L^2` norms on `[0, 1]` of a function that is smooth between
/// `breaks` except for square-root behaviour at the right end of each piece
/// (the shape of a half-order integral of a step function).
///
/// Each piece `[a, b]` is mapped by `x = b - (b - a) s^2`.
pub fn norms_on_unit<F: Fn(f64) -> f64>(g: F, breaks: &[f64]) -> (f64, f64) {
    let pts = cuts(0.0, 1.0, breaks.iter().copied());
    let (mut l1, mut l2) = (0.0, 0.0);
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        let (p1, p2) = rule()
            .as_node_weight_pairs()
            .iter()
            .map(|&(node, weight)| {
                let s = 0.5 * (node + 1.0);
                let y = g(b - len * s * s);
                let jac = 2.0 * len * s * 0.5 * weight;
                (y.abs() * jac, y * y * jac)
            })
            .fold((0.0, 0.0), |acc, t| (acc.0 + t.0, acc.1 + t.1));
        l1 += p1;
        l2 += p2;
    }
    (l1, l2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::profile::FnProfile;

    #[test]
    fn indicator_value_at_origin() {
        let v = PiecewiseConstantProfile::step(0.5, 1.0).unwrap();
        let g0 = j_transform(&v, 0.0).unwrap();
        let expect = 2.0 / PI.sqrt() * 0.5f64.sqrt();
        assert!((g0 - expect).abs() < 1e-12, "{g0} vs {expect}");
        assert!((g0 - 0.7978846).abs() < 1e-7);
    }

    #[test]
    fn zero_profile() {
        let zero = |_r: f64| 0.0;
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(j_transform(&zero, x).unwrap(), 0.0);
            assert_eq!(abel_transform(&zero, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let one = |_r: f64| 1.0;
        assert!(j_transform(&one, -0.1).is_err());
        assert!(j_transform(&one, 1.5).is_err());
        assert!(abel_transform(&one, 1.01).is_err());
    }

    #[test]
    fn gamma_identity() {
        // the half-order integral of 1/sqrt(a - r) is the constant sqrt(pi)
        let a = 0.5;
        let v = FnProfile::new(
            move |r: f64| if r < a { 1.0 / (a - r).sqrt() } else { 0.0 },
            vec![a],
        );
        for x in [0.0, 0.1, 0.25, 0.4, 0.49] {
            let g = j_transform(&v, x).unwrap();
            assert!((g - PI.sqrt()).abs() <= 1e-9, "x={x}: {g}");
        }
    }

    #[test]
    fn quadrature_matches_closed_form_for_steps() {
        for p in crate::analytic::random_profiles(11, 50) {
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                let q = j_transform(&p, x).unwrap();
                assert!((q - p.j_transform_exact(x)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn smooth_profile_against_series() {
        // v(r) = 1 - r: J v(x) = (2/sqrt(pi)) (2/3) (1 - x)^{3/2}
        let v = |r: f64| 1.0 - r;
        for x in [0.0f64, 0.2, 0.7, 1.0] {
            let expect = 4.0 / (3.0 * PI.sqrt()) * (1.0 - x).powf(1.5);
            assert!((j_transform(&v, x).unwrap() - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn disc_projection() {
        let disc = |r: f64| if r < 1.0 { 1.0 } else { 0.0 };
        for x in [0.0, 0.3, 0.7, 0.99] {
            let f = abel_transform(&disc, x).unwrap();
            assert!((f - 2.0 * (1.0 - x * x).sqrt()).abs() <= 1e-12);
        }
    }

    #[test]
    fn abel_equals_scaled_j_of_squared_variable() {
        let u = |r: f64| (1.0 - r * r).powi(2) + 0.5 * r;
        let u_breaks = PiecewiseConstantProfile::new(vec![0.0, 0.4, 0.8], vec![1.0, 0.3]).unwrap();
        // v(s) = u(sqrt(s))
        let v = |s: f64| u(s.sqrt());
        let vb = FnProfile::new(|s: f64| u_breaks.value(s.sqrt()), vec![0.16, 0.64]);
        for x in [0.0, 0.3, 0.7] {
            let lhs = abel_transform(&u, x).unwrap();
            let rhs = PI.sqrt() * j_transform(&v, x * x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8, "x={x}: {lhs} vs {rhs}");
            let lhs = abel_transform(&u_breaks, x).unwrap();
            let rhs = PI.sqrt() * j_transform(&vb, x * x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8, "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn running_average_cases() {
        let c = |_y: f64| 3.5;
        assert!((running_average(&c, 0.3, 0.6).unwrap() - 3.5).abs() < 1e-12);
        let id = |y: f64| y;
        assert!((running_average(&id, 0.2, 0.5).unwrap() - 0.4).abs() <= 1e-10);
        assert!(running_average(&id, 0.0, 0.5).is_err());
        assert!(running_average(&id, 0.6, 0.8).is_err());
        assert!(running_average(&id, 0.2, 0.1).is_err());

        let v = |y: f64| (7.0 * y).sin() + 0.3 * (31.0 * y).cos();
        let sup = (0..=1000)
            .map(|i| v(i as f64 / 1000.0).abs())
            .fold(0.0, f64::max);
        for i in 0..50 {
            let x = 0.25 + 0.75 * i as f64 / 49.0;
            assert!(running_average(&v, 0.25, x).unwrap().abs() <= sup);
        }
    }

    #[test]
    fn stieltjes_single_jump() {
        let g = PiecewiseConstantProfile::step(0.5, PI.sqrt()).unwrap();
        for r in [0.0, 0.2, 0.45] {
            let v = stieltjes_inverse(&g, r).unwrap();
            assert!((v - 1.0 / (0.5 - r).sqrt()).abs() < 1e-12);
        }
        assert_eq!(stieltjes_inverse(&g, 0.5).unwrap(), 0.0);
        assert_eq!(stieltjes_inverse(&g, 0.9).unwrap(), 0.0);
        assert!(stieltjes_inverse(&g, 1.0).is_err());
        let zero = PiecewiseConstantProfile::zero();
        assert_eq!(stieltjes_inverse(&zero, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn stieltjes_roundtrip() {
        let g = PiecewiseConstantProfile::new(vec![0.0, 0.3, 0.6], vec![1.0, 0.4]).unwrap();
        let inv = StieltjesInverse::new(&g).unwrap();
        for x in [0.0, 0.2, 0.4] {
            let back = j_transform(&inv, x).unwrap();
            assert!((back - g.value(x)).abs() <= 1e-7, "x={x}: {back}");
        }
    }

    #[test]
    fn norms_of_square_root_tail() {
        // g(x) = sqrt(0.5 - x) on [0, 0.5): L1 = (2/3) 0.5^{3/2}, L2^2 = 0.125
        let g = |x: f64| (0.5 - x).max(0.0).sqrt();
        let (l1, l2) = norms_on_unit(g, &[0.5]);
        assert!((l1 - 2.0 / 3.0 * 0.5f64.powf(1.5)).abs() < 1e-13);
        assert!((l2 - 0.125f64.sqrt()).abs() < 1e-13);
    }
}
