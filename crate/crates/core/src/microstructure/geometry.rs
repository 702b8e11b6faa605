//! Random geometry parameters and the derived tri-ply unit-cell layout.
//!
//! The cell stacks three plies of unit thickness along axis 3 in the sequence
//! `[0, -phi, +phi]`. Each ply holds one fiber per cell. A fiber cross-section
//! is an ellipse with semi-axis `alpha` across the ply thickness and `beta` in
//! the ply plane (`alpha / beta` is the radius ratio), clipped to its ply and
//! to its own periodic strip so neighbouring fibers never overlap.
//!
//! For the off-axis plies `alpha = a2 * t`; the strip width `s` is solved so
//! the clipped area fraction equals `vf2`, and the in-plane cell lengths follow
//! from requiring the fibers to run along the cell diagonals:
//! `L1 = s / sin(phi)`, `L2 = s / cos(phi)`. The 0° ply then has a strip of
//! width `L2`, and its semi-axis `alpha1` is solved for `vf1 = ratio * vf2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names of the six random inputs, in column order.
pub const PARAM_NAMES: [&str; 6] = ["vf2", "vf1_over_vf2", "a2", "a1_over_b1", "a2_over_b2", "phi"];

/// The six random micro-structure parameters of one realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Fiber volume fraction of each ±phi ply.
    pub vf2: f64,
    /// Ratio of the 0° ply fraction to `vf2`.
    pub vf1_over_vf2: f64,
    /// Through-thickness semi-axis of the ±phi fibers, as a fraction of the ply thickness.
    pub a2: f64,
    pub a1_over_b1: f64,
    pub a2_over_b2: f64,
    /// Off-axis ply angle [degrees].
    pub phi: f64,
}

/// Closed interval for one parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

/// Bounds of the uniform input hyperbox, keyed by parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryBounds {
    pub vf2: Interval,
    pub vf1_over_vf2: Interval,
    pub a2: Interval,
    pub a1_over_b1: Interval,
    pub a2_over_b2: Interval,
    pub phi: Interval,
}

impl Default for GeometryBounds {
    fn default() -> Self {
        Self {
            vf2: Interval::new(0.6, 0.74),
            vf1_over_vf2: Interval::new(0.6, 1.0),
            a2: Interval::new(0.45, 0.55),
            a1_over_b1: Interval::new(0.167, 0.25),
            a2_over_b2: Interval::new(0.167, 0.25),
            phi: Interval::new(15.0, 75.0),
        }
    }
}

impl GeometryBounds {
    pub fn as_array(&self) -> [Interval; 6] {
        [self.vf2, self.vf1_over_vf2, self.a2, self.a1_over_b1, self.a2_over_b2, self.phi]
    }

    pub fn midpoint(&self) -> GeometryParams {
        let m = self.as_array().map(|i| i.midpoint());
        GeometryParams::from_array(m)
    }
}

impl GeometryParams {
    pub fn as_array(&self) -> [f64; 6] {
        [self.vf2, self.vf1_over_vf2, self.a2, self.a1_over_b1, self.a2_over_b2, self.phi]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            vf2: v[0],
            vf1_over_vf2: v[1],
            a2: v[2],
            a1_over_b1: v[3],
            a2_over_b2: v[4],
            phi: v[5],
        }
    }

    pub fn vf1(&self) -> f64 {
        self.vf1_over_vf2 * self.vf2
    }

    pub fn validate(&self, bounds: &GeometryBounds) -> Result<()> {
        for ((name, value), interval) in PARAM_NAMES
            .iter()
            .zip(self.as_array())
            .zip(bounds.as_array())
        {
            if !value.is_finite() || !interval.contains(value) {
                return Err(Error::OutOfBounds {
                    name: (*name).to_string(),
                    value,
                    min: interval.min,
                    max: interval.max,
                });
            }
        }
        Ok(())
    }
}

/// Cross-section of one fiber: semi-axes and the periodic strip it lives in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSection {
    /// Through-thickness semi-axis.
    pub alpha: f64,
    /// In-plane semi-axis, perpendicular to the fiber axis.
    pub beta: f64,
    /// Strip width (fiber spacing) perpendicular to the fiber axis.
    pub spacing: f64,
}

impl FiberSection {
    /// Clipped cross-section area fraction of the `thickness × spacing` strip.
    pub fn area_fraction(&self, thickness: f64) -> f64 {
        clipped_ellipse_area(self.alpha, self.beta, thickness, self.spacing) / (thickness * self.spacing)
    }

    /// Membership of a point given in section coordinates (`w` across the
    /// strip, already wrapped; `z` from the ply mid-plane).
    pub fn contains(&self, w: f64, z: f64) -> bool {
        let (u, v) = (w / self.beta, z / self.alpha);
        u * u + v * v <= 1.0
    }
}

/// Derived unit-cell layout of one realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlyLayout {
    pub ply_thickness: f64,
    pub cell_lengths: [f64; 3],
    /// Off-axis angle [degrees].
    pub phi: f64,
    pub zero_ply: FiberSection,
    /// Shared by the −phi and +phi plies.
    pub angle_ply: FiberSection,
    /// Target fiber fractions per ply: [0°, −phi, +phi].
    pub target_fractions: [f64; 3],
}

/// Area of the ellipse `(w/beta)² + (z/alpha)² ≤ 1` inside `|z| ≤ h/2`, `|w| ≤ s/2`.
pub fn clipped_ellipse_area(alpha: f64, beta: f64, h: f64, s: f64) -> f64 {
    // αβ (u√(1−u²) + asin u) integrates the full ellipse height over [0, uβ].
    let strip = |u: f64| alpha * beta * (u * (1.0 - u * u).max(0.0).sqrt() + u.asin());
    let w_max = (0.5 * s).min(beta);
    let w_cut = if h < 2.0 * alpha {
        beta * (1.0 - (h / (2.0 * alpha)).powi(2)).sqrt()
    } else {
        0.0
    };
    let flat = h * w_cut.min(w_max);
    let curved = if w_max > w_cut {
        strip(w_max / beta) - strip(w_cut / beta)
    } else {
        0.0
    };
    2.0 * (flat + curved)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f(lo) and f(hi) have opposite signs.
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl PlyLayout {
    pub const PLY_THICKNESS: f64 = 1.0;

    pub fn from_params(geom: &GeometryParams) -> Result<Self> {
        let t = Self::PLY_THICKNESS;
        if !(geom.phi > 0.0 && geom.phi < 90.0) {
            return Err(Error::InfeasibleGeometry(format!(
                "phi = {} must lie strictly between 0 and 90 degrees",
                geom.phi
            )));
        }
        for (name, r) in [("a1_over_b1", geom.a1_over_b1), ("a2_over_b2", geom.a2_over_b2)] {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InfeasibleGeometry(format!("{name} = {r} must be positive")));
            }
        }
        if !(geom.a2 > 0.0) {
            return Err(Error::InfeasibleGeometry(format!("a2 = {} must be positive", geom.a2)));
        }

        let vf2 = geom.vf2;
        let vf1 = geom.vf1();
        let alpha2 = geom.a2 * t;
        let beta2 = alpha2 / geom.a2_over_b2;
        // As the strip narrows the fraction tends to the clipped height ratio.
        let max_vf2 = (2.0 * alpha2).min(t) / t;
        if !(vf2 > 0.0 && vf2 < max_vf2 * (1.0 - 1e-9)) {
            return Err(Error::InfeasibleGeometry(format!(
                "vf2 = {vf2} is not attainable: required spacing would be smaller than the fiber \
                 (limit {max_vf2} for a2 = {})",
                geom.a2
            )));
        }
        let fraction2 = |s: f64| clipped_ellipse_area(alpha2, beta2, t, s) / (t * s) - vf2;
        let mut s_hi = 2.0 * beta2;
        while fraction2(s_hi) > 0.0 {
            s_hi *= 2.0;
        }
        let spacing = bisect(1e-9 * beta2, s_hi, fraction2);

        let phi = geom.phi.to_radians();
        let l1 = spacing / phi.sin();
        let l2 = spacing / phi.cos();

        if !(vf1 > 0.0 && vf1 < 1.0) {
            return Err(Error::InfeasibleGeometry(format!("vf1 = {vf1} must lie in (0, 1)")));
        }
        let r1 = geom.a1_over_b1;
        let fraction1 = |alpha: f64| clipped_ellipse_area(alpha, alpha / r1, t, l2) / (t * l2) - vf1;
        let mut a_hi = t;
        while fraction1(a_hi) < 0.0 {
            a_hi *= 2.0;
        }
        let alpha1 = bisect(0.0, a_hi, fraction1);

        Ok(Self {
            ply_thickness: t,
            cell_lengths: [l1, l2, 3.0 * t],
            phi: geom.phi,
            zero_ply: FiberSection {
                alpha: alpha1,
                beta: alpha1 / r1,
                spacing: l2,
            },
            angle_ply: FiberSection {
                alpha: alpha2,
                beta: beta2,
                spacing,
            },
            target_fractions: [vf1, vf2, vf2],
        })
    }

    /// Ply index (0: 0°, 1: −phi, 2: +phi) and fiber membership of a point.
    /// Coordinates are wrapped into the cell first.
    pub fn classify(&self, p: [f64; 3]) -> (usize, bool) {
        let [l1, l2, l3] = self.cell_lengths;
        let t = self.ply_thickness;
        let x = p[0].rem_euclid(l1);
        let y = p[1].rem_euclid(l2);
        let z = p[2].rem_euclid(l3);
        let ply = ((z / t).floor() as usize).min(2);
        let zl = z - (ply as f64 + 0.5) * t;
        let (dx, dy) = (x - 0.5 * l1, y - 0.5 * l2);
        let (section, w) = match ply {
            0 => (&self.zero_ply, dy),
            _ => {
                let (s, c) = self.phi.to_radians().sin_cos();
                // Normal to the fiber direction (cos, ∓sin) of the −phi / +phi ply.
                let w = if ply == 1 { s * dx + c * dy } else { -s * dx + c * dy };
                (&self.angle_ply, w)
            }
        };
        let w = w - section.spacing * (w / section.spacing).round();
        (ply, section.contains(w, zl))
    }

    /// Smallest clipped semi-axis across the thickness, over both fiber families.
    pub fn min_semi_thickness(&self) -> f64 {
        let half = 0.5 * self.ply_thickness;
        self.zero_ply.alpha.min(half).min(self.angle_ply.alpha.min(half))
    }
}

/// Area of a full ellipse; used by tests and diagnostics.
pub fn ellipse_area(alpha: f64, beta: f64) -> f64 {
    PI * alpha * beta
}
