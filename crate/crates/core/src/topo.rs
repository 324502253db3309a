//! Random network topologies: nodes and jammers drawn from Poisson point
//! processes over a rectangle, split into two half-planes by a straight road.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Draws rejected in a row before [`generate_topology`] gives up.
pub const MAX_REJECTED_DRAWS: u32 = 1000;

/// Default spacing between sampled road points, in meters.
pub const DEFAULT_ROAD_STEP: f64 = 1.0;

/// A position in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Euclidean distance in meters.
pub fn distance(p: Point, q: Point) -> f64 {
    p.distance(&q)
}

/// The road, as the locus `a·x + y + b = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadLine {
    pub a: f64,
    pub b: f64,
}

impl RoadLine {
    pub const fn new(a: f64, b: f64) -> Self {
        RoadLine { a, b }
    }

    /// Builds the road from the general form `cx·x + cy·y + c0 = 0`.
    ///
    /// `cy` must be non-zero: vertical roads are not representable.
    pub fn from_general(cx: f64, cy: f64, c0: f64) -> Result<Self> {
        if cy == 0.0 || !cy.is_finite() {
            return Err(Error::config("road must have a non-zero, finite y coefficient"));
        }
        Ok(RoadLine::new(cx / cy, c0 / cy))
    }

    /// Signed residual `a·x + y + b`.
    pub fn eval(&self, p: Point) -> f64 {
        self.a * p.x + p.y + self.b
    }

    pub fn y_at(&self, x: f64) -> f64 {
        -self.a * x - self.b
    }

    fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

/// Side of the road. The source always sits in plane A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Plane {
    A,
    B,
}

/// Labels `p` relative to the sign of the road residual on the source side.
pub fn plane_of(p: Point, road: RoadLine, source_side_sign: f64) -> Result<Plane> {
    let s = road.eval(p);
    if s == 0.0 {
        return Err(Error::DegeneratePosition { x: p.x, y: p.y });
    }
    if s.signum() == source_side_sign.signum() {
        Ok(Plane::A)
    } else {
        Ok(Plane::B)
    }
}

/// Axis-aligned deployment area `[0, width] × [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub const fn new(width: f64, height: f64) -> Self {
        Area { width, height }
    }

    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite() && self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::config(format!(
                "area dimensions must be positive and finite, got {} x {}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Endpoints of the road segment inside `area`, ordered by increasing x.
fn road_segment(road: RoadLine, area: Area) -> Result<(Point, Point)> {
    if !road.is_finite() {
        return Err(Error::config("road coefficients must be finite"));
    }
    let (mut lo, mut hi) = (0.0_f64, area.width);
    if road.a == 0.0 {
        let y = -road.b;
        if !(0.0..=area.height).contains(&y) {
            return Err(Error::config("road does not intersect the area"));
        }
    } else {
        let x_bottom = -road.b / road.a;
        let x_top = (-area.height - road.b) / road.a;
        lo = lo.max(x_bottom.min(x_top));
        hi = hi.min(x_bottom.max(x_top));
    }
    if hi <= lo {
        return Err(Error::config("road does not cross the interior of the area"));
    }
    Ok((Point::new(lo, road.y_at(lo)), Point::new(hi, road.y_at(hi))))
}

/// Samples the in-area road segment every `step` meters of arc length, both
/// boundary intersections included.
pub fn discretize_road(road: RoadLine, area: Area, step: f64) -> Result<Vec<Point>> {
    area.validate()?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::config(format!("road step must be positive, got {step}")));
    }
    let (start, end) = road_segment(road, area)?;
    let length = start.distance(&end);
    let dx = step / (1.0 + road.a * road.a).sqrt();

    let mut points = Vec::new();
    let mut k = 0u64;
    while (k as f64) * step < length - 1e-9 {
        let x = start.x + (k as f64) * dx;
        points.push(Point::new(x, road.y_at(x)));
        k += 1;
    }
    points.push(end);
    Ok(points)
}

/// Either a Poisson intensity (expected points over the whole area) or an exact count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointCount {
    Intensity(f64),
    Count(usize),
}

impl PointCount {
    fn validate(&self, what: &str) -> Result<()> {
        match *self {
            PointCount::Intensity(l) if !(l >= 0.0 && l.is_finite()) => Err(Error::config(format!(
                "{what} intensity must be non-negative and finite, got {l}"
            ))),
            _ => Ok(()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        match *self {
            PointCount::Count(n) => n,
            PointCount::Intensity(0.0) => 0,
            PointCount::Intensity(l) => {
                let poisson = Poisson::new(l).expect("validated intensity");
                poisson.sample(rng) as usize
            }
        }
    }
}

fn default_road_step() -> f64 {
    DEFAULT_ROAD_STEP
}

/// Everything needed to draw a topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub area_width: f64,
    pub area_height: f64,
    pub nodes: PointCount,
    pub jammers: PointCount,
    pub road: RoadLine,
    #[serde(default = "default_road_step")]
    pub road_step: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Overrides the nearest-to-origin source rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<usize>,
    /// Overrides the nearest-to-far-corner destination rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dest_id: Option<usize>,
}

impl TopologyConfig {
    /// A 100 m × 100 m field crossed by `3x + 10y − 700 = 0`, with fixed counts.
    pub fn reference(nodes: usize, jammers: usize, rng_seed: u64) -> Self {
        TopologyConfig {
            area_width: 100.0,
            area_height: 100.0,
            nodes: PointCount::Count(nodes),
            jammers: PointCount::Count(jammers),
            road: RoadLine::new(0.3, -70.0),
            road_step: DEFAULT_ROAD_STEP,
            rng_seed,
            source_id: None,
            dest_id: None,
        }
    }

    pub fn area(&self) -> Area {
        Area::new(self.area_width, self.area_height)
    }

    pub fn validate(&self) -> Result<()> {
        self.area().validate()?;
        self.nodes.validate("node")?;
        self.jammers.validate("jammer")?;
        if !(self.road_step > 0.0 && self.road_step.is_finite()) {
            return Err(Error::config(format!("road_step must be positive, got {}", self.road_step)));
        }
        road_segment(self.road, self.area())?;
        if let PointCount::Count(n) = self.nodes {
            if n < 2 {
                return Err(Error::config(format!(
                    "at least two nodes are needed for distinct source and destination, got {n}"
                )));
            }
            for (name, id) in [("source_id", self.source_id), ("dest_id", self.dest_id)] {
                if let Some(id) = id.filter(|&id| id >= n) {
                    return Err(Error::config(format!("{name} {id} out of range for {n} nodes")));
                }
            }
        }
        if let (Some(s), Some(d)) = (self.source_id, self.dest_id) {
            if s == d {
                return Err(Error::config("source_id and dest_id must differ"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub plane: Plane,
}

impl Node {
    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jammer {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub power_w: f64,
}

impl Jammer {
    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

mod point_pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Point;

    pub fn serialize<S: Serializer>(points: &[Point], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Point>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[x, y]| Point::new(x, y)).collect())
    }
}

/// An immutable network snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<Node>,
    pub jammers: Vec<Jammer>,
    pub road: RoadLine,
    #[serde(with = "point_pairs")]
    pub road_points: Vec<Point>,
    pub source_id: usize,
    pub dest_id: usize,
    pub seed: u64,
}

impl Topology {
    /// Looks a node up by id. Nodes are kept sorted by id.
    pub fn node(&self, id: usize) -> Option<&Node> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    /// Position of `id` in [`Topology::nodes`].
    pub fn index_of(&self, id: usize) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn source(&self) -> &Node {
        self.node(self.source_id).expect("validated source")
    }

    pub fn dest(&self) -> &Node {
        self.node(self.dest_id).expect("validated destination")
    }

    pub fn nodes_in(&self, plane: Plane) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.plane == plane)
    }

    /// Sign of the road residual on the source's side.
    pub fn source_side_sign(&self) -> f64 {
        self.road.eval(self.source().pos()).signum()
    }

    /// Checks the structural invariants; used after loading a document.
    pub fn validate(&self) -> Result<()> {
        if !self.road.is_finite() {
            return Err(Error::config("road coefficients must be finite"));
        }
        for pair in self.nodes.windows(2) {
            if pair[0].id >= pair[1].id {
                return Err(Error::config("node ids must be unique and sorted ascending"));
            }
        }
        let mut jammer_ids: Vec<usize> = self.jammers.iter().map(|j| j.id).collect();
        jammer_ids.sort_unstable();
        if jammer_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("jammer ids must be unique"));
        }
        if let Some(j) = self.jammers.iter().find(|j| !(j.power_w >= 0.0) || !j.x.is_finite() || !j.y.is_finite()) {
            return Err(Error::config(format!("jammer {} has invalid position or power", j.id)));
        }
        if self.source_id == self.dest_id {
            return Err(Error::config("source and destination must differ"));
        }
        let source = self
            .node(self.source_id)
            .ok_or_else(|| Error::config(format!("source id {} not found", self.source_id)))?;
        let dest = self
            .node(self.dest_id)
            .ok_or_else(|| Error::config(format!("destination id {} not found", self.dest_id)))?;
        let sign = self.road.eval(source.pos()).signum();
        for node in &self.nodes {
            if !node.x.is_finite() || !node.y.is_finite() {
                return Err(Error::config(format!("node {} has a non-finite position", node.id)));
            }
            if plane_of(node.pos(), self.road, sign)? != node.plane {
                return Err(Error::config(format!("node {} carries the wrong plane label", node.id)));
            }
        }
        if source.plane != Plane::A || dest.plane != Plane::B {
            return Err(Error::config("source must lie in plane A and destination in plane B"));
        }
        let tol = 1e-9 * self.road.b.abs().max(1.0);
        if let Some(p) = self.road_points.iter().find(|p| self.road.eval(**p).abs() > tol) {
            return Err(Error::config(format!("road point ({}, {}) is off the road", p.x, p.y)));
        }
        Ok(())
    }
}

fn nearest_to(nodes: &[Node], target: Point) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for n in nodes {
        let d = n.pos().distance(&target);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, n.id));
        }
    }
    best.map(|(_, id)| id)
}

fn uniform_point(rng: &mut ChaCha8Rng, area: Area) -> Point {
    Point::new(rng.random::<f64>() * area.width, rng.random::<f64>() * area.height)
}

fn draw_once(config: &TopologyConfig, jammer_power: f64, attempt: u32) -> Option<Topology> {
    let area = config.area();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(u64::from(attempt));

    let node_count = config.nodes.draw(&mut rng);
    let mut positions = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        // A node exactly on the road is resampled so the partition stays total.
        let p = loop {
            let p = uniform_point(&mut rng, area);
            if config.road.eval(p) != 0.0 {
                break p;
            }
        };
        positions.push(p);
    }
    let jammer_count = config.jammers.draw(&mut rng);
    let jammers: Vec<Jammer> = (0..jammer_count)
        .map(|id| {
            let p = uniform_point(&mut rng, area);
            Jammer { id, x: p.x, y: p.y, power_w: jammer_power }
        })
        .collect();

    let mut nodes: Vec<Node> = positions
        .iter()
        .enumerate()
        .map(|(id, p)| Node { id, x: p.x, y: p.y, plane: Plane::A })
        .collect();
    let source_id = match config.source_id {
        Some(id) if id < nodes.len() => id,
        Some(_) => return None,
        None => nearest_to(&nodes, Point::new(0.0, 0.0))?,
    };
    let dest_id = match config.dest_id {
        Some(id) if id < nodes.len() => id,
        Some(_) => return None,
        None => nearest_to(&nodes, Point::new(area.width, area.height))?,
    };
    if source_id == dest_id {
        return None;
    }
    let sign = config.road.eval(positions[source_id]).signum();
    for node in &mut nodes {
        node.plane = plane_of(node.pos(), config.road, sign).ok()?;
    }
    if nodes[dest_id].plane != Plane::B {
        return None;
    }
    let road_points = discretize_road(config.road, area, config.road_step).ok()?;
    Some(Topology {
        nodes,
        jammers,
        road: config.road,
        road_points,
        source_id,
        dest_id,
        seed: config.rng_seed,
    })
}

/// Draws a topology. Draws whose source and destination do not fall on
/// opposite sides of the road (which includes an empty plane) are rejected
/// and redrawn from the next RNG stream of the same seed.
pub fn generate_topology(config: &TopologyConfig, jammer_power: f64) -> Result<Topology> {
    config.validate()?;
    if !(jammer_power >= 0.0 && jammer_power.is_finite()) {
        return Err(Error::config(format!("jammer power must be non-negative, got {jammer_power}")));
    }
    (0..MAX_REJECTED_DRAWS)
        .find_map(|attempt| draw_once(config, jammer_power, attempt))
        .ok_or(Error::Generation { attempts: MAX_REJECTED_DRAWS })
}

/// For each road point, the id of the closest plane-B node (ties: smaller id).
pub fn nearest_plane_b(topology: &Topology) -> Vec<usize> {
    let plane_b: Vec<Node> = topology.nodes_in(Plane::B).cloned().collect();
    topology
        .road_points
        .iter()
        .filter_map(|r| nearest_to(&plane_b, *r))
        .collect()
}

/// Plane-B nodes that are the nearest plane-B node to at least one road point.
pub fn handoff_candidates(topology: &Topology) -> BTreeSet<usize> {
    nearest_plane_b(topology).into_iter().collect()
}
