//! Observation sets `ω` as masks on a quadrature grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupBackend, GroupPoint, QuadratureGrid};

/// Geometric description of an open set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SetDescriptor {
    Empty,
    Full,
    /// Union of open arcs `(a, b)` of `T^1`, read modulo 1.
    Arcs(Vec<(f64, f64)>),
    /// Product of one open arc per coordinate of `T^n`.
    Box(Vec<(f64, f64)>),
    /// Open geodesic ball.
    Ball { center: GroupPoint, radius: f64 },
}

fn in_arc(x: f64, (a, b): (f64, f64)) -> bool {
    let len = b - a;
    if len >= 1.0 {
        return true;
    }
    let s = (x - a).rem_euclid(1.0);
    s > 0.0 && s < len
}

/// `∫_a^b e^{2πi n x} dx`
fn arc_integral(n: i64, (a, b): (f64, f64)) -> Complex64 {
    if n == 0 {
        return Complex64::new(b - a, 0.0);
    }
    let w = 2.0 * PI * n as f64;
    let eb = Complex64::from_polar(1.0, (n as f64 * b).rem_euclid(1.0) * 2.0 * PI);
    let ea = Complex64::from_polar(1.0, (n as f64 * a).rem_euclid(1.0) * 2.0 * PI);
    (eb - ea) / Complex64::new(0.0, w)
}

impl SetDescriptor {
    pub fn validate(&self, backend: GroupBackend) -> Result<()> {
        let check_arcs = |arcs: &[(f64, f64)]| -> Result<()> {
            for &(a, b) in arcs {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::Parameter(format!("arc ({a}, {b}) must have a < b")));
                }
            }
            Ok(())
        };
        match (self, backend) {
            (SetDescriptor::Empty | SetDescriptor::Full, _) => Ok(()),
            (SetDescriptor::Arcs(arcs), GroupBackend::Torus(1)) => check_arcs(arcs),
            (SetDescriptor::Box(arcs), GroupBackend::Torus(n)) if arcs.len() == n => check_arcs(arcs),
            (SetDescriptor::Ball { radius, .. }, _) if !(*radius > 0.0) => {
                Err(Error::Parameter(format!("ball radius must be positive, got {radius}")))
            }
            (SetDescriptor::Ball { .. }, _) => Ok(()),
            _ => Err(Error::Parameter(format!("set {self:?} is not defined on {}", backend.name()))),
        }
    }

    /// Membership predicate.
    pub fn contains(&self, backend: GroupBackend, x: &GroupPoint) -> Result<bool> {
        Ok(match (self, x) {
            (SetDescriptor::Empty, _) => false,
            (SetDescriptor::Full, _) => true,
            (SetDescriptor::Arcs(arcs), GroupPoint::Torus(v)) => arcs.iter().any(|&arc| in_arc(v[0], arc)),
            (SetDescriptor::Box(arcs), GroupPoint::Torus(v)) => {
                arcs.iter().zip(v).all(|(&arc, &xi)| in_arc(xi, arc))
            }
            (SetDescriptor::Ball { center, radius }, _) => {
                *radius >= backend.diameter() || backend.distance(center, x)? < *radius
            }
            _ => return Err(Error::Parameter(format!("point {x:?} not compatible with {self:?}"))),
        })
    }

    /// `∫_ω e^{2πi n·x} dx` when a closed form exists (torus arcs, boxes and
    /// the full group).
    pub fn character_integral(&self, n: &[i64]) -> Option<Complex64> {
        match self {
            SetDescriptor::Empty => Some(Complex64::new(0.0, 0.0)),
            SetDescriptor::Full => Some(if n.iter().all(|&v| v == 0) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }),
            SetDescriptor::Arcs(arcs) if n.len() == 1 && arcs_disjoint(arcs) => {
                Some(arcs.iter().map(|&arc| arc_integral(n[0], arc)).sum())
            }
            SetDescriptor::Box(arcs) if arcs.len() == n.len() => Some(
                arcs.iter()
                    .zip(n)
                    .map(|(&arc, &ni)| arc_integral(ni, arc))
                    .product(),
            ),
            _ => None,
        }
    }

    /// Exact Haar measure when known in closed form.
    pub fn exact_measure(&self, backend: GroupBackend) -> Option<f64> {
        match (self, backend) {
            (SetDescriptor::Ball { radius, .. }, GroupBackend::Su2) => {
                let r = radius.min(2.0 * PI);
                Some((r - r.sin()) / (2.0 * PI))
            }
            (SetDescriptor::Ball { radius, .. }, GroupBackend::Torus(1)) => Some((2.0 * radius).min(1.0)),
            (SetDescriptor::Ball { radius, .. }, GroupBackend::Torus(_)) => {
                if *radius >= backend.diameter() {
                    Some(1.0)
                } else if *radius <= 0.5 {
                    Some(PI * radius * radius)
                } else {
                    None
                }
            }
            (d, GroupBackend::Torus(n)) => d.character_integral(&vec![0; n]).map(|z| z.re),
            (SetDescriptor::Full, _) => Some(1.0),
            (SetDescriptor::Empty, _) => Some(0.0),
            _ => None,
        }
    }

    /// Compact rendering used in summaries.
    pub fn describe(&self) -> String {
        let arcs = |v: &[(f64, f64)]| v.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(";");
        match self {
            SetDescriptor::Empty => "empty".into(),
            SetDescriptor::Full => "full".into(),
            SetDescriptor::Arcs(v) => format!("arcs({})", arcs(v)),
            SetDescriptor::Box(v) => format!("box({})", arcs(v)),
            SetDescriptor::Ball { center, radius } => format!("ball(center={center:?}, radius={radius})"),
        }
    }
}

pub(crate) fn arcs_disjoint(arcs: &[(f64, f64)]) -> bool {
    let total: f64 = arcs.iter().map(|(a, b)| b - a).sum();
    if total > 1.0 {
        return false;
    }
    let mut norm: Vec<(f64, f64)> = arcs
        .iter()
        .map(|&(a, b)| {
            let s = a.rem_euclid(1.0);
            (s, s + (b - a))
        })
        .collect();
    norm.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut ok = norm.windows(2).all(|p| p[0].1 <= p[1].0);
    if let (Some(first), Some(last)) = (norm.first(), norm.last()) {
        if norm.len() > 1 {
            ok &= last.1 <= first.0 + 1.0;
        }
    }
    ok
}

/// The set `ω` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservationSet {
    pub descriptor: SetDescriptor,
    #[serde(skip)]
    pub mask: Vec<bool>,
    /// Quadrature estimate of the Haar measure.
    pub measure: f64,
    /// Set when a ball radius reached the group diameter.
    pub clipped_to_full: bool,
}

impl ObservationSet {
    pub fn new(backend: GroupBackend, descriptor: SetDescriptor, grid: &QuadratureGrid) -> Result<Self> {
        descriptor.validate(backend)?;
        let mask = grid
            .nodes
            .iter()
            .map(|x| descriptor.contains(backend, x))
            .collect::<Result<Vec<bool>>>()?;
        let measure = mask
            .iter()
            .zip(&grid.weights)
            .filter(|(m, _)| **m)
            .map(|(_, w)| *w)
            .sum();
        let clipped_to_full = matches!(&descriptor, SetDescriptor::Ball { radius, .. } if *radius >= backend.diameter());
        Ok(ObservationSet {
            descriptor,
            mask,
            measure,
            clipped_to_full,
        })
    }

    pub fn full(backend: GroupBackend, grid: &QuadratureGrid) -> Self {
        Self::new(backend, SetDescriptor::Full, grid).expect("full set is always valid")
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }
}

/// Open geodesic ball `B(center, radius)` on a grid.
pub fn geodesic_ball(
    backend: GroupBackend,
    center: GroupPoint,
    radius: f64,
    grid: &QuadratureGrid,
) -> Result<ObservationSet> {
    ObservationSet::new(backend, SetDescriptor::Ball { center, radius }, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::EulerAngles;

    #[test]
    fn torus_ball_measures() {
        let b = GroupBackend::Torus(1);
        let g = b.haar_quadrature(64).unwrap();
        let s = geodesic_ball(b, GroupPoint::torus1(0.0), 0.25, &g).unwrap();
        assert!((s.measure - 0.5).abs() <= 1.0 / 64.0 + 1e-15);
        let f = geodesic_ball(b, GroupPoint::torus1(0.0), 0.5, &g).unwrap();
        assert_eq!(f.measure, 1.0);
        assert!(f.clipped_to_full);
    }

    #[test]
    fn balls_are_nested() {
        let b = GroupBackend::Su2;
        let g = b.haar_quadrature(10).unwrap();
        let c = GroupPoint::Euler(EulerAngles::new(0.3, 1.0, 2.0));
        let small = geodesic_ball(b, c.clone(), 1.0, &g).unwrap();
        let big = geodesic_ball(b, c, 2.0, &g).unwrap();
        assert!(small.mask.iter().zip(&big.mask).all(|(s, l)| !*s || *l));
    }

    #[test]
    fn su2_cap_volume() {
        let b = GroupBackend::Su2;
        let g = b.haar_quadrature(40).unwrap();
        let s = geodesic_ball(b, b.identity(), PI, &g).unwrap();
        let exact = SetDescriptor::Ball { center: b.identity(), radius: PI }.exact_measure(b).unwrap();
        assert!((exact - 0.5).abs() < 1e-15);
        assert!((s.measure - exact).abs() < 0.02, "{}", s.measure);
    }

    #[test]
    fn arc_integrals_match_the_two_mode_example() {
        let d = SetDescriptor::Arcs(vec![(0.0, 0.5)]);
        let i1 = d.character_integral(&[1]).unwrap();
        assert!((i1 - Complex64::new(0.0, 1.0 / PI)).norm() < 1e-15);
        assert!((d.character_integral(&[0]).unwrap().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wrapped_arc_membership() {
        let d = SetDescriptor::Arcs(vec![(0.8, 1.1)]);
        let b = GroupBackend::Torus(1);
        assert!(d.contains(b, &GroupPoint::torus1(0.05)).unwrap());
        assert!(d.contains(b, &GroupPoint::torus1(0.9)).unwrap());
        assert!(!d.contains(b, &GroupPoint::torus1(0.5)).unwrap());
    }

    #[test]
    fn empty_set() {
        let b = GroupBackend::Torus(1);
        let g = b.haar_quadrature(8).unwrap();
        let s = ObservationSet::new(b, SetDescriptor::Empty, &g).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.measure, 0.0);
    }
}
