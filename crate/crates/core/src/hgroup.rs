//! Heisenberg group arithmetic.
//!
//! Points of ℍ^N are stored as the flat coordinate list
//! `(x_1..x_N, y_1..y_N, t)`. The group law is
//!
//! ```text
//! (x, y, t) ∘ (x', y', t') = (x + x', y + y', t + t' + 2⟨y, x'⟩ − 2⟨x, y'⟩)
//! ```
//!
//! with identity the origin and inverse `−ξ`. Dilations act parabolically,
//! `Φ_λ(x, y, t) = (λx, λy, λ²t)`, and the Korányi gauge
//! `|ξ| = (|z|⁴ + t²)^{1/4}` is homogeneous of degree one under them.

use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) type Coords = SmallVec<[f64; 5]>;

/// A point ξ = (x, y, t) of ℍ^N.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint {
    n: usize,
    coords: Coords,
}

impl GroupPoint {
    /// Builds a point from its horizontal halves and vertical coordinate.
    pub fn new(x: &[f64], y: &[f64], t: f64) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::domain(format!(
                "x and y must have the same positive length (got {} and {})",
                x.len(),
                y.len()
            )));
        }
        let mut coords = Coords::with_capacity(2 * x.len() + 1);
        coords.extend_from_slice(x);
        coords.extend_from_slice(y);
        coords.push(t);
        Self::checked(x.len(), coords)
    }

    /// Builds a point from the flat layout `[x_1..x_N, y_1..y_N, t]`.
    pub fn from_coords(n: usize, coords: &[f64]) -> Result<Self> {
        if n == 0 || coords.len() != 2 * n + 1 {
            return Err(Error::domain(format!(
                "expected {} coordinates for N = {n}, got {}",
                2 * n + 1,
                coords.len()
            )));
        }
        Self::checked(n, Coords::from_slice(coords))
    }

    /// Infers N from an odd-length flat coordinate list.
    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(Error::domain(format!(
                "a point of ℍ^N has 2N+1 ≥ 3 coordinates, got {}",
                coords.len()
            )));
        }
        Self::from_coords((coords.len() - 1) / 2, coords)
    }

    /// N = 1 convenience constructor.
    pub fn h1(x: f64, y: f64, t: f64) -> Result<Self> {
        Self::from_coords(1, &[x, y, t])
    }

    pub fn origin(n: usize) -> Self {
        assert!(n > 0, "N must be positive");
        GroupPoint {
            n,
            coords: smallvec::smallvec![0.0; 2 * n + 1],
        }
    }

    fn checked(n: usize, coords: Coords) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::domain(format!("non-finite coordinate {bad}")));
        }
        Ok(GroupPoint { n, coords })
    }

    /// Skips the finiteness scan; callers guarantee finite input.
    pub(crate) fn from_raw(n: usize, coords: Coords) -> Self {
        debug_assert_eq!(coords.len(), 2 * n + 1);
        GroupPoint { n, coords }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.n]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords[self.n..2 * self.n]
    }

    pub fn t(&self) -> f64 {
        self.coords[2 * self.n]
    }

    /// The horizontal part z = (x, y).
    pub fn horizontal(&self) -> &[f64] {
        &self.coords[..2 * self.n]
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    fn same_dim(&self, other: &GroupPoint) -> Result<()> {
        if self.n != other.n {
            return Err(Error::domain(format!(
                "dimension mismatch: ℍ^{} vs ℍ^{}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Group law `self ∘ other`.
    pub fn compose(&self, other: &GroupPoint) -> Result<GroupPoint> {
        self.same_dim(other)?;
        let coords = compose_coords(self.n, &self.coords, &other.coords);
        Self::checked(self.n, coords)
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint {
            n: self.n,
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    /// Parabolic dilation Φ_λ.
    pub fn dilate(&self, lambda: f64) -> Result<GroupPoint> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!(
                "dilation factor must be positive and finite, got {lambda}"
            )));
        }
        let mut coords = self.coords.clone();
        let last = coords.len() - 1;
        for c in &mut coords[..last] {
            *c *= lambda;
        }
        coords[last] *= lambda * lambda;
        Self::checked(self.n, coords)
    }

    /// Korányi gauge `((Σ x_i² + y_i²)² + t²)^{1/4}`.
    pub fn gauge_norm(&self) -> f64 {
        gauge_norm_coords(&self.coords)
    }

    /// `|other⁻¹ ∘ self|`.
    pub fn gauge_distance(&self, other: &GroupPoint) -> Result<f64> {
        self.same_dim(other)?;
        Ok(gauge_norm_coords(&compose_coords(
            self.n,
            &other.inverse().coords,
            &self.coords,
        )))
    }
}

pub(crate) fn compose_coords(n: usize, a: &[f64], b: &[f64]) -> Coords {
    let mut out: Coords = a.iter().zip(b).map(|(p, q)| p + q).collect();
    let mut twist = 0.0;
    for i in 0..n {
        twist += a[n + i] * b[i] - a[i] * b[n + i];
    }
    out[2 * n] += 2.0 * twist;
    out
}

pub(crate) fn gauge_quartic_coords(c: &[f64]) -> f64 {
    let last = c.len() - 1;
    let r2: f64 = c[..last].iter().map(|v| v * v).sum();
    r2 * r2 + c[last] * c[last]
}

pub(crate) fn gauge_norm_coords(c: &[f64]) -> f64 {
    gauge_quartic_coords(c).sqrt().sqrt()
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for GroupPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coords.len()))?;
        for c in &self.coords {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct FlatVisitor;

        impl<'de> Visitor<'de> for FlatVisitor {
            type Value = GroupPoint;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a flat array [x_1..x_N, y_1..y_N, t] of odd length ≥ 3")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<GroupPoint, A::Error> {
                let mut coords = Vec::new();
                while let Some(c) = seq.next_element::<f64>()? {
                    coords.push(c);
                }
                GroupPoint::from_flat(&coords).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_seq(FlatVisitor)
    }
}

/// Open Korányi ball `{ξ : |center⁻¹ ∘ ξ| < radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeBall {
    center: GroupPoint,
    radius: f64,
}

impl GaugeBall {
    pub fn new(center: GroupPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(GaugeBall { center, radius })
    }

    pub fn centered(n: usize, radius: f64) -> Result<Self> {
        Self::new(GroupPoint::origin(n), radius)
    }

    pub fn center(&self) -> &GroupPoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    /// Strict membership; points at distance exactly `radius` are outside.
    pub fn contains(&self, p: &GroupPoint) -> bool {
        match p.gauge_distance(&self.center) {
            Ok(d) => d < self.radius,
            Err(_) => false,
        }
    }
}

/// Homogeneous dimension Q = 2N + 2 of ℍ^N.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HomogeneousDim {
    n: usize,
}

impl HomogeneousDim {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("N must be positive"));
        }
        Ok(HomogeneousDim { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        2 * self.n + 2
    }
}
