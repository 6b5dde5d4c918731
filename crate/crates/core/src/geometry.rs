//! Planar geometry used by forwarding, recovery and relay selection.
//!
//! Coordinates are normalized: a distance of 1.0 is the reference distance at
//! which a link's channel variance equals one. The radio range `r` is given in
//! the same units.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Tolerance for membership tests on region boundaries.
const BOUNDARY_EPS: f64 = 1e-9;

/// Boundary samples used by [`farthest_point`].
pub const FARTHEST_POINT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Position) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn perp(self) -> Position {
        Position::new(-self.y, self.x)
    }

    pub fn midpoint(self, other: Position) -> Position {
        Position::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Bearing of `other` as seen from `self`, in `(-pi, pi]`.
    pub fn bearing_to(self, other: Position) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, rhs: Position) -> Position {
        Position::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, rhs: Position) -> Position {
        Position::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Position {
    type Output = Position;
    fn mul(self, k: f64) -> Position {
        Position::new(self.x * k, self.y * k)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4})", self.x, self.y)
    }
}

/// Euclidean distance.
pub fn distance(a: Position, b: Position) -> f64 {
    (a - b).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Node placement plus unit-disk connectivity. Node ids are the indices into
/// the position list, so they are unique by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Position>,
    radio_range: f64,
}

impl Topology {
    pub fn new(positions: Vec<Position>, radio_range: f64) -> Result<Self> {
        if !(radio_range > 0.0) || !radio_range.is_finite() {
            return Err(Error::InvalidRange(radio_range));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinitePosition(i));
        }
        Ok(Self { positions, radio_range })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn radio_range(&self) -> f64 {
        self.radio_range
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.positions.len()).map(NodeId)
    }

    pub fn position(&self, id: NodeId) -> Position {
        self.positions[id.0]
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.0 < self.positions.len()
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        distance(self.position(a), self.position(b))
    }

    /// Symmetric unit-disk adjacency. A node does not hear itself.
    pub fn can_hear(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.distance(a, b) <= self.radio_range
    }

    pub fn neighbors(&self, id: NodeId) -> Vec<NodeId> {
        self.ids().filter(|&other| self.can_hear(id, other)).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.positions.is_empty() {
            return 0.0;
        }
        let total: usize = self.ids().map(|id| self.neighbors(id).len()).sum();
        total as f64 / self.positions.len() as f64
    }

    /// Nodes reachable from `from` over unit-disk edges, `from` included.
    pub fn component(&self, from: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        seen[from.0] = true;
        let mut out = Vec::new();
        while let Some(u) = stack.pop() {
            out.push(u);
            for v in self.neighbors(u) {
                if !seen[v.0] {
                    seen[v.0] = true;
                    stack.push(v);
                }
            }
        }
        out.sort();
        out
    }

    pub fn connected(&self, a: NodeId, b: NodeId) -> bool {
        self.component(a).binary_search(&b).is_ok()
    }
}

/// Where a candidate sits relative to the current source and the destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProgressArea {
    /// Positive progress area: strictly closer to the destination.
    Positive,
    /// Negative progress area: in range, not closer to the destination.
    Negative,
    OutOfRange,
}

/// Progress area plus contention sub-area index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AreaIndex {
    pub area: ProgressArea,
    /// Valid only when `area != OutOfRange`.
    pub csa: usize,
}

pub fn classify(source: Position, dest: Position, cand: Position, r: f64) -> ProgressArea {
    if distance(source, cand) > r {
        ProgressArea::OutOfRange
    } else if distance(cand, dest) < distance(source, dest) {
        ProgressArea::Positive
    } else {
        ProgressArea::Negative
    }
}

fn check_nsa(nsa: usize) -> Result<()> {
    if nsa < 2 || nsa % 2 != 0 {
        return Err(Error::InvalidSubAreaCount(nsa));
    }
    Ok(())
}

/// Sub-area of a positive-progress candidate: bands of equal progress width,
/// index 0 holding the largest progress.
pub fn csa_ppa(source: Position, dest: Position, cand: Position, r: f64, nsa: usize) -> Result<usize> {
    check_nsa(nsa)?;
    if classify(source, dest, cand, r) != ProgressArea::Positive {
        return Err(Error::WrongArea { expected: "positive progress area" });
    }
    let progress = distance(source, dest) - distance(cand, dest);
    let raw = (nsa as f64 * (r - progress) / (2.0 * r)).floor();
    let upper = nsa / 2 - 1;
    Ok((raw.max(0.0) as usize).min(upper))
}

/// Sub-area of a negative-progress candidate: `nsa / 2` concentric coronas of
/// equal area around the source, offset by `nsa / 2`.
pub fn csa_npa(source: Position, dest: Position, cand: Position, r: f64, nsa: usize) -> Result<usize> {
    check_nsa(nsa)?;
    if classify(source, dest, cand, r) != ProgressArea::Negative {
        return Err(Error::WrongArea { expected: "negative progress area" });
    }
    let n = nsa / 2;
    let scaled = (n as f64).sqrt() * distance(source, cand) / r;
    let raw = (scaled * scaled).floor().max(0.0) as usize;
    Ok((raw + n).min(nsa - 1))
}

/// Classifies and indexes a candidate in one go.
pub fn area_index(source: Position, dest: Position, cand: Position, r: f64, nsa: usize) -> Result<AreaIndex> {
    let area = classify(source, dest, cand, r);
    let csa = match area {
        ProgressArea::Positive => csa_ppa(source, dest, cand, r, nsa)?,
        ProgressArea::Negative => csa_npa(source, dest, cand, r, nsa)?,
        ProgressArea::OutOfRange => 0,
    };
    Ok(AreaIndex { area, csa })
}

/// Side of the source-to-forwarder direction on which the Reuleaux apex lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ApexSide {
    /// Counterclockwise of the S->F direction.
    #[default]
    Left,
    Right,
}

/// Region in which relay candidates contend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelayArea {
    /// Intersection of the source and forwarder radio disks.
    Lens,
    /// Intersection of three disks of radius d(S,F) centered on S, F and the
    /// apex of the equilateral triangle built on SF. Any two members are at
    /// most d(S,F) apart.
    Reuleaux(ApexSide),
}

impl Default for RelayArea {
    fn default() -> Self {
        RelayArea::Reuleaux(ApexSide::Left)
    }
}

/// Apex of the equilateral triangle on segment SF.
pub fn reuleaux_apex(source: Position, forwarder: Position, side: ApexSide) -> Position {
    let along = forwarder - source;
    let normal = match side {
        ApexSide::Left => along.perp(),
        ApexSide::Right => along.perp() * -1.0,
    };
    source.midpoint(forwarder) + normal * (3f64.sqrt() / 2.0)
}

/// The disks whose intersection forms the relaying area, as (center, radius).
pub fn relaying_disks(source: Position, forwarder: Position, r: f64, area: RelayArea) -> Vec<(Position, f64)> {
    match area {
        RelayArea::Lens => vec![(source, r), (forwarder, r)],
        RelayArea::Reuleaux(side) => {
            let width = distance(source, forwarder);
            let apex = reuleaux_apex(source, forwarder, side);
            vec![(source, width), (forwarder, width), (apex, width)]
        }
    }
}

fn inside_all(disks: &[(Position, f64)], x: Position) -> bool {
    disks.iter().all(|&(c, rad)| distance(c, x) <= rad + BOUNDARY_EPS)
}

pub fn in_relaying_area(source: Position, forwarder: Position, x: Position, r: f64, area: RelayArea) -> bool {
    inside_all(&relaying_disks(source, forwarder, r, area), x)
}

/// True iff `w` lies strictly inside the circle with diameter `uv`, i.e. `w`
/// witnesses that edge `uv` is not a Gabriel edge.
pub fn gabriel_violates(u: Position, v: Position, w: Position) -> bool {
    let center = u.midpoint(v);
    let d = w - center;
    let uv = v - u;
    d.dot(d) < uv.dot(uv) / 4.0
}

/// Minimizer of `A^2 |x - S|^2 + B |x - F|^2`.
pub fn optimal_relay_point(source: Position, forwarder: Position, a: f64, b: f64) -> Result<Position> {
    let wa = a * a;
    let denom = wa + b;
    if denom == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    Ok(Position::new((wa * source.x + b * forwarder.x) / denom, (wa * source.y + b * forwarder.y) / denom))
}

/// Intersection points of two circles (none, one or two).
pub fn circle_intersections(c0: Position, r0: f64, c1: Position, r1: f64) -> Vec<Position> {
    let d = distance(c0, c1);
    if d == 0.0 || d > r0 + r1 || d < (r0 - r1).abs() {
        return Vec::new();
    }
    let a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
    let h2 = r0 * r0 - a * a;
    let unit = (c1 - c0) * (1.0 / d);
    let base = c0 + unit * a;
    if h2 <= 0.0 {
        return vec![base];
    }
    let h = h2.sqrt();
    vec![base + unit.perp() * h, base + unit.perp() * -h]
}

/// Point of the relaying area with the largest `objective`, searched over a
/// dense sampling of the area boundary (which suffices for convex objectives).
/// For a degenerate segment (`S == F`) the area collapses and `x_star` is
/// returned.
pub fn farthest_point<F>(
    source: Position,
    forwarder: Position,
    r: f64,
    area: RelayArea,
    x_star: Position,
    objective: F,
) -> Position
where
    F: Fn(Position) -> f64,
{
    if distance(source, forwarder) == 0.0 {
        return x_star;
    }
    let disks = relaying_disks(source, forwarder, r, area);
    let per_circle = FARTHEST_POINT_SAMPLES / disks.len();
    let mut best = x_star;
    let mut best_val = objective(x_star);
    let mut consider = |p: Position| {
        if inside_all(&disks, p) {
            let v = objective(p);
            if v > best_val {
                best_val = v;
                best = p;
            }
        }
    };
    for (i, &(c0, r0)) in disks.iter().enumerate() {
        for k in 0..per_circle {
            let theta = 2.0 * PI * k as f64 / per_circle as f64;
            consider(c0 + Position::new(theta.cos(), theta.sin()) * r0);
        }
        for &(c1, r1) in &disks[i + 1..] {
            for p in circle_intersections(c0, r0, c1, r1) {
                consider(p);
            }
        }
    }
    best
}

/// Intersection of closed segments `p1p2` and `q1q2`, if they cross at a
/// single point.
pub fn segment_intersection(p1: Position, p2: Position, q1: Position, q2: Position) -> Option<Position> {
    let r = p2 - p1;
    let s = q2 - q1;
    let denom = r.x * s.y - r.y * s.x;
    if denom.abs() < 1e-15 {
        return None;
    }
    let qp = q1 - p1;
    let t = (qp.x * s.y - qp.y * s.x) / denom;
    let u = (qp.x * r.y - qp.y * r.x) / denom;
    if (-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
        Some(p1 + r * t)
    } else {
        None
    }
}

/// True if the open segments cross properly (shared endpoints do not count).
pub fn segments_cross(p1: Position, p2: Position, q1: Position, q2: Position) -> bool {
    fn orient(a: Position, b: Position, c: Position) -> f64 {
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    }
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Counterclockwise angle from bearing `from` to bearing `to`, in `(0, 2pi]`.
pub fn ccw_angle(from: f64, to: f64) -> f64 {
    let mut delta = (to - from).rem_euclid(2.0 * PI);
    if delta <= 1e-12 {
        delta = 2.0 * PI;
    }
    delta
}
