//! Closed-form synthetic signals for testing and benchmarking.
//!
//! Each generator samples a named signal at `n` sites of its natural domain,
//! deterministically per seed. The 2D signals sample a regular grid of cell
//! centers instead when `n` is a perfect dyadic square (side a power of
//! two), which is the layout the gridded tree builder expects.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng::Rng;

/// Built-in synthetic signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    /// 1D piecewise signal on `[-1, 1]` with jumps, corners and a smooth
    /// oscillation.
    F1,
    /// `h(x, y) = |x - y|` on the unit square: a corner ridge along the
    /// diagonal.
    Corner2d,
    /// Bivariate function on the unit square that is discontinuous at
    /// `(0.25, 0.25)` and continuous but not differentiable at
    /// `(0.75, 0.75)`, although all directional derivatives exist at both.
    Singular2d,
    /// Heaviside of an oscillatory pattern on the unit sphere.
    SphereHeaviside,
    /// Fixed total-degree-2 polynomial on the unit square; any basis with
    /// `q >= 2` classifies it as maximally smooth.
    Poly,
}

impl FromStr for Signal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(Signal::F1),
            "corner2d" => Ok(Signal::Corner2d),
            "singular2d" => Ok(Signal::Singular2d),
            "sphere_heaviside" => Ok(Signal::SphereHeaviside),
            "poly" => Ok(Signal::Poly),
            other => Err(Error::UnknownSignal(other.into())),
        }
    }
}

impl Signal {
    pub fn dim(self) -> usize {
        match self {
            Signal::F1 => 1,
            Signal::SphereHeaviside => 3,
            _ => 2,
        }
    }

    pub const ALL: [&'static str; 5] =
        ["f1", "corner2d", "singular2d", "sphere_heaviside", "poly"];
}

/// The 1D test signal: constant, three triangle segments, a sine burst and a
/// parabolic piece with a curvature kink at `x = 0.7`. Branch boundaries are
/// half-open at the listed breakpoints.
pub fn f1(x: f64) -> f64 {
    if x < -0.4 {
        6.0
    } else if x < -0.35 {
        0.1 * (20.0 * x + 9.0).abs() + 6.0
    } else if x < -0.15 {
        0.1 * (20.0 * x + 5.0).abs() + 6.0
    } else if x < -0.05 {
        0.1 * (20.0 * x + 1.0).abs() + 6.0
    } else if x < 0.55 {
        6.0 + (20.0 * std::f64::consts::PI * x).sin()
    } else {
        4.0 - 20.0 * (x - 0.7).abs() * (x - 0.7)
    }
}

/// `|x - y|`.
pub fn corner2d(x: f64, y: f64) -> f64 {
    (x - y).abs()
}

/// Sum of two classical bivariate singularities. Both terms are defined by
/// their limit values where the quotient degenerates: the second term
/// extends continuously by 0, the first has no limit at `(0.25, 0.25)` and
/// the value there is fixed to 0 by convention.
pub fn singular2d(x: f64, y: f64) -> f64 {
    let t1 = {
        let nx = x - 0.25;
        let ny = y - 0.25;
        let den = (nx * nx + ny * ny).sqrt();
        if den == 0.0 {
            0.0
        } else {
            ny / den
        }
    };
    let t2 = {
        let dx = x - 0.75;
        let dy = y - 0.75;
        let den = dx * dx + dy * dy;
        if den == 0.0 {
            0.0
        } else {
            dx * dx * dy / den
        }
    };
    0.5 * (t1 + t2)
}

/// Oscillatory pattern in spherical angles: mixes six-, four- and eight-fold
/// azimuthal symmetries.
pub fn sphere_pattern(theta: f64, phi: f64) -> f64 {
    0.5 * (3.0 * theta).sin() * (2.0 * phi).sin()
        + 0.3 * (2.0 * theta).cos() * phi.cos()
        + 0.2 * (4.0 * theta).sin() * phi.sin() * phi.sin()
}

/// Heaviside of [`sphere_pattern`] at a point of the unit sphere.
pub fn sphere_heaviside(p: &[f64]) -> f64 {
    let theta = p[1].atan2(p[0]);
    let phi = p[2].clamp(-1.0, 1.0).acos();
    if sphere_pattern(theta, phi) >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Fixed polynomial of total degree 2.
pub fn poly2d(x: f64, y: f64) -> f64 {
    0.5 + x - 2.0 * y + 1.5 * x * y + x * x - 0.25 * y * y
}

/// Samples a signal at `n` sites (see module docs for the site layout).
pub fn synth(signal: Signal, n: usize, seed: u64) -> Result<PointSet> {
    if n < 1 {
        return Err(Error::Validation("sample count must be >= 1".into()));
    }
    let mut rng = Rng::seed_from(seed);
    match signal {
        Signal::F1 => {
            let mut coords = Vec::with_capacity(n);
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                let x = rng.range(-1.0, 1.0);
                coords.push(x);
                values.push(f1(x));
            }
            PointSet::new(1, coords, values)
        }
        Signal::Corner2d => sample_square(n, &mut rng, corner2d),
        Signal::Singular2d => sample_square(n, &mut rng, singular2d),
        Signal::Poly => sample_square(n, &mut rng, poly2d),
        Signal::SphereHeaviside => {
            let mut coords = Vec::with_capacity(3 * n);
            let mut values = Vec::with_capacity(n);
            let mut emitted = 0usize;
            while emitted < n {
                // Normalized Gaussians are uniform on the sphere.
                let (a, b) = rng.normal_pair();
                let (c, _) = rng.normal_pair();
                let norm = (a * a + b * b + c * c).sqrt();
                if norm < 1e-12 {
                    continue;
                }
                let p = [a / norm, b / norm, c / norm];
                coords.extend_from_slice(&p);
                values.push(sphere_heaviside(&p));
                emitted += 1;
            }
            PointSet::new(3, coords, values)
        }
    }
}

/// Side length when `n` points form a grid with power-of-two side.
pub fn dyadic_square_side(n: usize) -> Option<usize> {
    let s = (n as f64).sqrt().round() as usize;
    (s * s == n && s.is_power_of_two()).then_some(s)
}

fn sample_square(n: usize, rng: &mut Rng, f: impl Fn(f64, f64) -> f64) -> Result<PointSet> {
    let mut coords = Vec::with_capacity(2 * n);
    let mut values = Vec::with_capacity(n);
    if let Some(s) = dyadic_square_side(n) {
        for j in 0..s {
            for i in 0..s {
                let x = (i as f64 + 0.5) / s as f64;
                let y = (j as f64 + 0.5) / s as f64;
                coords.push(x);
                coords.push(y);
                values.push(f(x, y));
            }
        }
    } else {
        for _ in 0..n {
            let x = rng.unit_f64();
            let y = rng.unit_f64();
            coords.push(x);
            coords.push(y);
            values.push(f(x, y));
        }
    }
    PointSet::new(2, coords, values)
}
