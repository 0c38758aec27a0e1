//! Planar semimodular lattice diagrams.
//!
//! A [`Diagram`] is a finite lattice given by its cover relation together
//! with a fixed planar embedding. The embedding is stored combinatorially:
//! every element keeps its upper covers ordered left to right. Lower covers
//! are derived from the upper lists; their left-to-right order is the order
//! in which a left-first depth-first walk from the bottom discovers them.
//!
//! Everything else (order, meets, joins, 4-cells, eyes, boundary, layout) is
//! computed from these lists. Diagrams are immutable once built.

use std::collections::VecDeque;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense index of an element inside one diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub const fn new(index: usize) -> Self {
        ElementId(index as u32)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ElementId {
    fn from(index: usize) -> Self {
        ElementId::new(index)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An edge `[lower, upper]` of the diagram, `lower ≺ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[ElementId; 2]", into = "[ElementId; 2]")]
pub struct PrimeInterval {
    pub lower: ElementId,
    pub upper: ElementId,
}

impl PrimeInterval {
    pub fn new(lower: impl Into<ElementId>, upper: impl Into<ElementId>) -> Self {
        PrimeInterval {
            lower: lower.into(),
            upper: upper.into(),
        }
    }
}

impl From<[ElementId; 2]> for PrimeInterval {
    fn from([lower, upper]: [ElementId; 2]) -> Self {
        PrimeInterval { lower, upper }
    }
}

impl From<PrimeInterval> for [ElementId; 2] {
    fn from(p: PrimeInterval) -> Self {
        [p.lower, p.upper]
    }
}

impl fmt::Display for PrimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lower, self.upper)
    }
}

/// A 4-cell `(bottom, left, right, top)`: `left` and `right` are neighbouring
/// lower covers of `top` (left immediately before right) and `bottom` is
/// their meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[ElementId; 4]", into = "[ElementId; 4]")]
pub struct FourCell {
    pub bottom: ElementId,
    pub left: ElementId,
    pub right: ElementId,
    pub top: ElementId,
}

impl FourCell {
    pub fn new(
        bottom: impl Into<ElementId>,
        left: impl Into<ElementId>,
        right: impl Into<ElementId>,
        top: impl Into<ElementId>,
    ) -> Self {
        FourCell {
            bottom: bottom.into(),
            left: left.into(),
            right: right.into(),
            top: top.into(),
        }
    }

    /// The sides in the order `[o,a]`, `[o,b]`, `[a,t]`, `[b,t]`.
    pub fn edges(&self) -> [PrimeInterval; 4] {
        [
            PrimeInterval::new(self.bottom, self.left),
            PrimeInterval::new(self.bottom, self.right),
            PrimeInterval::new(self.left, self.top),
            PrimeInterval::new(self.right, self.top),
        ]
    }

    pub fn has_side(&self, edge: PrimeInterval) -> bool {
        self.edges().contains(&edge)
    }

    /// The side opposite to `edge`, if `edge` is a side of this cell.
    pub fn opposite(&self, edge: PrimeInterval) -> Option<PrimeInterval> {
        let [ol, or, lt, rt] = self.edges();
        match edge {
            e if e == ol => Some(rt),
            e if e == rt => Some(ol),
            e if e == or => Some(lt),
            e if e == lt => Some(or),
            _ => None,
        }
    }

    pub fn elements(&self) -> [ElementId; 4] {
        [self.bottom, self.left, self.right, self.top]
    }
}

impl From<[ElementId; 4]> for FourCell {
    fn from([bottom, left, right, top]: [ElementId; 4]) -> Self {
        FourCell {
            bottom,
            left,
            right,
            top,
        }
    }
}

impl From<FourCell> for [ElementId; 4] {
    fn from(c: FourCell) -> Self {
        [c.bottom, c.left, c.right, c.top]
    }
}

impl fmt::Display for FourCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.bottom, self.left, self.right, self.top
        )
    }
}

/// A broken structural rule found by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Violation {
    Empty,
    SizeMismatch { size: usize, lists: usize },
    IdOutOfRange { element: u32, cover: u32 },
    SelfCover { element: u32 },
    DuplicateCover { element: u32, cover: u32 },
    Cycle { element: u32 },
    TransitiveEdge { lower: u32, upper: u32 },
    NoJoin { a: u32, b: u32 },
    NoMeet { a: u32, b: u32 },
    LayoutLength { expected: usize, found: usize },
    LayoutNotIncreasing { lower: u32, upper: u32 },
    LayoutOrder { left: u32, right: u32 },
    LayoutCoincide { a: u32, b: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "empty"),
            Violation::SizeMismatch { size, lists } => {
                write!(f, "size-mismatch(size={size},lists={lists})")
            }
            Violation::IdOutOfRange { element, cover } => {
                write!(f, "id-out-of-range({element},{cover})")
            }
            Violation::SelfCover { element } => write!(f, "self-cover({element})"),
            Violation::DuplicateCover { element, cover } => {
                write!(f, "duplicate-cover({element},{cover})")
            }
            Violation::Cycle { element } => write!(f, "cycle({element})"),
            Violation::TransitiveEdge { lower, upper } => {
                write!(f, "transitive-edge({lower},{upper})")
            }
            Violation::NoJoin { a, b } => write!(f, "no-join({a},{b})"),
            Violation::NoMeet { a, b } => write!(f, "no-meet({a},{b})"),
            Violation::LayoutLength { expected, found } => {
                write!(f, "layout-length(expected={expected},found={found})")
            }
            Violation::LayoutNotIncreasing { lower, upper } => {
                write!(f, "layout-not-increasing({lower},{upper})")
            }
            Violation::LayoutOrder { left, right } => write!(f, "layout-order({left},{right})"),
            Violation::LayoutCoincide { a, b } => write!(f, "layout-coincide({a},{b})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("element id {0} is out of range")]
    InvalidId(usize),
    #[error("[{0},{1}] is not an edge of the diagram")]
    NotAnEdge(usize, usize),
    #[error("{0} is not a 4-cell of the diagram")]
    NotACell(FourCell),
    #[error("{0} is not below {1}")]
    NotBelow(usize, usize),
    #[error("invalid diagram: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("the diagram is not semimodular")]
    NotSemimodular,
    #[error("broken 4-cell at top {top} with lower covers {left}, {right}")]
    BrokenCell { top: usize, left: usize, right: usize },
    #[error("slimness tests disagree: no 3-antichain in J(L) = {antichain_free}, no cover-preserving diamond = {diamond_free}")]
    SlimnessMismatch {
        antichain_free: bool,
        diamond_free: bool,
    },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Wire form of a diagram: `{"size": N, "upper_covers": [[...],...], "layout": [[x,y],...] | null}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub size: usize,
    pub upper_covers: Vec<Vec<u32>>,
    #[serde(default)]
    pub layout: Option<Vec<[f64; 2]>>,
}

/// Checks every structural rule on raw upper-cover lists (and an optional
/// layout). An empty result means the lists describe a lattice diagram.
pub fn validate(upper_covers: &[Vec<ElementId>], layout: Option<&[[f64; 2]]>) -> Vec<Violation> {
    match OrderData::compute(upper_covers) {
        Ok(order) => match layout {
            Some(layout) => layout_violations(upper_covers, &order, layout),
            None => Vec::new(),
        },
        Err(v) => v,
    }
}

/// Order information derived once per diagram.
#[derive(Debug, Clone)]
struct OrderData {
    bottom: usize,
    top: usize,
    /// `up[x]` holds every `y ≥ x`.
    up: Vec<FixedBitSet>,
    /// Left-first discovery rank from the bottom.
    rank: Vec<usize>,
    height: Vec<usize>,
    meet: Vec<u32>,
    join: Vec<u32>,
    lower: Vec<Vec<ElementId>>,
}

impl OrderData {
    fn compute(upper: &[Vec<ElementId>]) -> Result<OrderData, Vec<Violation>> {
        let n = upper.len();
        if n == 0 {
            return Err(vec![Violation::Empty]);
        }
        let mut violations = Vec::new();
        for (x, covers) in upper.iter().enumerate() {
            for (i, &y) in covers.iter().enumerate() {
                if y.index() >= n {
                    violations.push(Violation::IdOutOfRange {
                        element: x as u32,
                        cover: y.0,
                    });
                } else if y.index() == x {
                    violations.push(Violation::SelfCover { element: x as u32 });
                } else if covers[..i].contains(&y) {
                    violations.push(Violation::DuplicateCover {
                        element: x as u32,
                        cover: y.0,
                    });
                }
            }
        }
        if !violations.is_empty() {
            return Err(violations);
        }

        // Kahn's algorithm, smallest id first.
        let mut indegree = vec![0usize; n];
        for covers in upper {
            for y in covers {
                indegree[y.index()] += 1;
            }
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&x| indegree[x] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(x) = ready.pop_first() {
            topo.push(x);
            for y in &upper[x] {
                indegree[y.index()] -= 1;
                if indegree[y.index()] == 0 {
                    ready.insert(y.index());
                }
            }
        }
        if topo.len() < n {
            return Err((0..n)
                .filter(|&x| indegree[x] > 0)
                .map(|x| Violation::Cycle { element: x as u32 })
                .collect());
        }

        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for &x in topo.iter().rev() {
            let mut set = FixedBitSet::with_capacity(n);
            set.insert(x);
            for y in &upper[x] {
                set.union_with(&up[y.index()]);
            }
            up[x] = set;
        }
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        for y in 0..n {
            for x in up[y].ones() {
                down[x].insert(y);
            }
        }

        for (x, covers) in upper.iter().enumerate() {
            for &y in covers {
                let shortcut = covers
                    .iter()
                    .any(|&z| z != y && up[z.index()].contains(y.index()));
                if shortcut {
                    violations.push(Violation::TransitiveEdge {
                        lower: x as u32,
                        upper: y.0,
                    });
                }
            }
        }

        let up_count: Vec<usize> = up.iter().map(|s| s.count_ones(..)).collect();
        let down_count: Vec<usize> = down.iter().map(|s| s.count_ones(..)).collect();
        let mut join = vec![u32::MAX; n * n];
        let mut meet = vec![u32::MAX; n * n];
        for x in 0..n {
            for y in x..n {
                match bound(&up[x], &up[y], &up_count) {
                    Some(j) => {
                        join[x * n + y] = j as u32;
                        join[y * n + x] = j as u32;
                    }
                    None => violations.push(Violation::NoJoin {
                        a: x as u32,
                        b: y as u32,
                    }),
                }
                match bound(&down[x], &down[y], &down_count) {
                    Some(m) => {
                        meet[x * n + y] = m as u32;
                        meet[y * n + x] = m as u32;
                    }
                    None => violations.push(Violation::NoMeet {
                        a: x as u32,
                        b: y as u32,
                    }),
                }
            }
        }
        if !violations.is_empty() {
            return Err(violations);
        }

        let bottom = topo[0];
        let top = topo[n - 1];
        let rank = discovery_rank(upper, bottom, false);
        let mut height = vec![0usize; n];
        for &x in &topo {
            for y in &upper[x] {
                height[y.index()] = height[y.index()].max(height[x] + 1);
            }
        }
        let mut lower: Vec<Vec<ElementId>> = vec![Vec::new(); n];
        for (x, covers) in upper.iter().enumerate() {
            for y in covers {
                lower[y.index()].push(ElementId::new(x));
            }
        }
        for list in &mut lower {
            list.sort_by_key(|x| rank[x.index()]);
        }

        Ok(OrderData {
            bottom,
            top,
            up,
            rank,
            height,
            meet,
            join,
            lower,
        })
    }
}

/// The least element of `a ∩ b` under the order encoded by the sets, if any.
/// Every member `j` of the intersection has its own set inside it, so `j` is
/// the bound exactly when the two sets have equal size.
fn bound(a: &FixedBitSet, b: &FixedBitSet, counts: &[usize]) -> Option<usize> {
    let mut common = a.clone();
    common.intersect_with(b);
    let total = common.count_ones(..);
    common.ones().find(|&j| counts[j] == total)
}

/// Order of first discovery in a depth-first walk from `start` that visits
/// upper covers left to right (or right to left when `reversed`).
fn discovery_rank(upper: &[Vec<ElementId>], start: usize, reversed: bool) -> Vec<usize> {
    let n = upper.len();
    let mut rank = vec![usize::MAX; n];
    let mut next = 0;
    rank[start] = next;
    next += 1;
    let mut stack = vec![(start, 0usize)];
    while let Some(&mut (x, ref mut pos)) = stack.last_mut() {
        let covers = &upper[x];
        if *pos < covers.len() {
            let i = if reversed {
                covers.len() - 1 - *pos
            } else {
                *pos
            };
            *pos += 1;
            let y = covers[i].index();
            if rank[y] == usize::MAX {
                rank[y] = next;
                next += 1;
                stack.push((y, 0));
            }
        } else {
            stack.pop();
        }
    }
    rank
}

fn layout_violations(
    upper: &[Vec<ElementId>],
    order: &OrderData,
    layout: &[[f64; 2]],
) -> Vec<Violation> {
    let n = upper.len();
    if layout.len() != n {
        return vec![Violation::LayoutLength {
            expected: n,
            found: layout.len(),
        }];
    }
    let mut out = Vec::new();
    for (x, covers) in upper.iter().enumerate() {
        for y in covers {
            if layout[y.index()][1] <= layout[x][1] {
                out.push(Violation::LayoutNotIncreasing {
                    lower: x as u32,
                    upper: y.0,
                });
            }
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if layout[a][1] != layout[b][1] {
                continue;
            }
            let (l, r) = if order.rank[a] < order.rank[b] {
                (a, b)
            } else {
                (b, a)
            };
            if layout[l][0] == layout[r][0] {
                out.push(Violation::LayoutCoincide {
                    a: a as u32,
                    b: b as u32,
                });
            } else if layout[l][0] > layout[r][0] {
                out.push(Violation::LayoutOrder {
                    left: l as u32,
                    right: r as u32,
                });
            }
        }
    }
    out
}

/// Old-id to new-id table produced when elements are removed.
pub type IdMap = Vec<Option<ElementId>>;

#[derive(Debug, Clone)]
pub struct Diagram {
    upper: Vec<Vec<ElementId>>,
    layout: Option<Vec<[f64; 2]>>,
    order: OrderData,
    edges: Vec<PrimeInterval>,
    edge_offset: Vec<usize>,
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper && self.layout == other.layout
    }
}

impl Diagram {
    /// Builds a diagram from left-to-right upper-cover lists, rejecting any
    /// input that fails [`validate`].
    pub fn new(upper_covers: Vec<Vec<ElementId>>) -> Result<Diagram, DiagramError> {
        let order = OrderData::compute(&upper_covers).map_err(DiagramError::Invalid)?;
        let mut edges = Vec::new();
        let mut edge_offset = Vec::with_capacity(upper_covers.len());
        for (x, covers) in upper_covers.iter().enumerate() {
            edge_offset.push(edges.len());
            edges.extend(covers.iter().map(|&y| PrimeInterval::new(x, y)));
        }
        Ok(Diagram {
            upper: upper_covers,
            layout: None,
            order,
            edges,
            edge_offset,
        })
    }

    pub fn from_covers(upper_covers: &[&[usize]]) -> Result<Diagram, DiagramError> {
        Diagram::new(
            upper_covers
                .iter()
                .map(|c| c.iter().map(|&i| ElementId::new(i)).collect())
                .collect(),
        )
    }

    pub fn with_layout(mut self, layout: Vec<[f64; 2]>) -> Result<Diagram, DiagramError> {
        let v = layout_violations(&self.upper, &self.order, &layout);
        if !v.is_empty() {
            return Err(DiagramError::Invalid(v));
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn from_json_str(s: &str) -> Result<Diagram, LoadError> {
        let json: DiagramJson = serde_json::from_str(s)?;
        Ok(Diagram::try_from(json)?)
    }

    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            size: self.size(),
            upper_covers: self
                .upper
                .iter()
                .map(|c| c.iter().map(|e| e.0).collect())
                .collect(),
            layout: self.layout.clone(),
        }
    }

    pub fn size(&self) -> usize {
        self.upper.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.size()).map(ElementId::new)
    }

    /// Converts an external index into an id of this diagram.
    pub fn element(&self, index: usize) -> Result<ElementId, DiagramError> {
        if index < self.size() {
            Ok(ElementId::new(index))
        } else {
            Err(DiagramError::InvalidId(index))
        }
    }

    pub fn bottom(&self) -> ElementId {
        ElementId::new(self.order.bottom)
    }

    pub fn top(&self) -> ElementId {
        ElementId::new(self.order.top)
    }

    pub fn upper_covers(&self, x: ElementId) -> &[ElementId] {
        &self.upper[x.index()]
    }

    pub fn lower_covers(&self, x: ElementId) -> &[ElementId] {
        &self.order.lower[x.index()]
    }

    pub fn all_upper_covers(&self) -> &[Vec<ElementId>] {
        &self.upper
    }

    pub fn layout_coords(&self) -> Option<&[[f64; 2]]> {
        self.layout.as_deref()
    }

    pub fn covers(&self, lower: ElementId, upper: ElementId) -> bool {
        self.upper[lower.index()].contains(&upper)
    }

    pub fn leq(&self, x: ElementId, y: ElementId) -> bool {
        self.order.up[x.index()].contains(y.index())
    }

    pub fn lt(&self, x: ElementId, y: ElementId) -> bool {
        x != y && self.leq(x, y)
    }

    pub fn comparable(&self, x: ElementId, y: ElementId) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    pub fn meet(&self, x: ElementId, y: ElementId) -> ElementId {
        ElementId(self.order.meet[x.index() * self.size() + y.index()])
    }

    pub fn join(&self, x: ElementId, y: ElementId) -> ElementId {
        ElementId(self.order.join[x.index() * self.size() + y.index()])
    }

    pub fn try_leq(&self, x: usize, y: usize) -> Result<bool, DiagramError> {
        Ok(self.leq(self.element(x)?, self.element(y)?))
    }

    pub fn try_meet(&self, x: usize, y: usize) -> Result<ElementId, DiagramError> {
        Ok(self.meet(self.element(x)?, self.element(y)?))
    }

    pub fn try_join(&self, x: usize, y: usize) -> Result<ElementId, DiagramError> {
        Ok(self.join(self.element(x)?, self.element(y)?))
    }

    /// Length of the longest chain ending in `x`.
    pub fn height(&self, x: ElementId) -> usize {
        self.order.height[x.index()]
    }

    /// Length of the lattice (longest chain from bottom to top).
    pub fn length(&self) -> usize {
        self.order.height[self.order.top]
    }

    /// Left-first discovery rank; on incomparable elements this is the
    /// left-to-right order of the embedding.
    pub fn left_rank(&self, x: ElementId) -> usize {
        self.order.rank[x.index()]
    }

    pub fn edges(&self) -> &[PrimeInterval] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Position of `p` in [`Diagram::edges`].
    pub fn edge_index(&self, p: PrimeInterval) -> Option<usize> {
        let covers = self.upper.get(p.lower.index())?;
        let pos = covers.iter().position(|&y| y == p.upper)?;
        Some(self.edge_offset[p.lower.index()] + pos)
    }

    pub fn edge(&self, lower: usize, upper: usize) -> Result<PrimeInterval, DiagramError> {
        let p = PrimeInterval::new(self.element(lower)?, self.element(upper)?);
        if self.covers(p.lower, p.upper) {
            Ok(p)
        } else {
            Err(DiagramError::NotAnEdge(lower, upper))
        }
    }

    pub fn is_edge(&self, p: PrimeInterval) -> bool {
        p.lower.index() < self.size() && p.upper.index() < self.size() && self.covers(p.lower, p.upper)
    }

    /// Re-runs every structural rule; constructed diagrams always pass.
    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.upper, self.layout.as_deref())
    }

    /// Upper semimodularity: `x ≺ y` implies `x∨z = y∨z` or `x∨z ≺ y∨z`.
    pub fn is_semimodular(&self) -> bool {
        self.semimodularity_witness().is_none()
    }

    /// A triple `(x, y, z)` with `x ≺ y` breaking semimodularity.
    pub fn semimodularity_witness(&self) -> Option<(ElementId, ElementId, ElementId)> {
        for p in &self.edges {
            for z in self.elements() {
                let a = self.join(p.lower, z);
                let b = self.join(p.upper, z);
                if a != b && !self.covers(a, b) {
                    return Some((p.lower, p.upper, z));
                }
            }
        }
        None
    }

    pub fn join_irreducibles(&self) -> Vec<ElementId> {
        self.elements()
            .filter(|&x| self.lower_covers(x).len() == 1)
            .collect()
    }

    pub fn meet_irreducibles(&self) -> Vec<ElementId> {
        self.elements()
            .filter(|&x| self.upper_covers(x).len() == 1)
            .collect()
    }

    pub fn is_doubly_irreducible(&self, x: ElementId) -> bool {
        self.lower_covers(x).len() == 1 && self.upper_covers(x).len() == 1
    }

    /// True iff the join-irreducibles contain no 3-element antichain.
    pub fn has_no_three_antichain_in_j(&self) -> bool {
        let j = self.join_irreducibles();
        for (i, &a) in j.iter().enumerate() {
            for (k, &b) in j.iter().enumerate().skip(i + 1) {
                if self.comparable(a, b) {
                    continue;
                }
                for &c in &j[k + 1..] {
                    if !self.comparable(a, c) && !self.comparable(b, c) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// True iff no element has three upper covers with a common pairwise join,
    /// i.e. the diagram contains no cover-preserving diamond.
    pub fn has_no_cover_preserving_diamond(&self) -> bool {
        for x in self.elements() {
            let ups = self.upper_covers(x);
            for i in 0..ups.len() {
                for j in (i + 1)..ups.len() {
                    let t = self.join(ups[i], ups[j]);
                    for &c in &ups[j + 1..] {
                        if self.join(ups[i], c) == t && self.join(ups[j], c) == t {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Slimness of a semimodular diagram, computed two ways that must agree.
    pub fn is_slim(&self) -> Result<bool, DiagramError> {
        if !self.is_semimodular() {
            return Err(DiagramError::NotSemimodular);
        }
        let antichain_free = self.has_no_three_antichain_in_j();
        let diamond_free = self.has_no_cover_preserving_diamond();
        if antichain_free != diamond_free {
            return Err(DiagramError::SlimnessMismatch {
                antichain_free,
                diamond_free,
            });
        }
        Ok(antichain_free)
    }

    /// All 4-cells, ordered by top and then by left position.
    pub fn enumerate_cells(&self) -> Result<Vec<FourCell>, DiagramError> {
        let mut cells = Vec::new();
        for t in self.elements() {
            for pair in self.lower_covers(t).windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let o = self.meet(a, b);
                if !self.covers(o, a) || !self.covers(o, b) {
                    return Err(DiagramError::BrokenCell {
                        top: t.index(),
                        left: a.index(),
                        right: b.index(),
                    });
                }
                cells.push(FourCell {
                    bottom: o,
                    left: a,
                    right: b,
                    top: t,
                });
            }
        }
        Ok(cells)
    }

    pub fn is_cell(&self, cell: FourCell) -> bool {
        if cell.elements().iter().any(|e| e.index() >= self.size()) {
            return false;
        }
        let lower = self.lower_covers(cell.top);
        lower
            .windows(2)
            .any(|w| w[0] == cell.left && w[1] == cell.right)
            && self.meet(cell.left, cell.right) == cell.bottom
            && self.covers(cell.bottom, cell.left)
            && self.covers(cell.bottom, cell.right)
    }

    /// Doubly irreducible elements whose lower cover has at least three upper
    /// covers and which are neither the leftmost nor the rightmost of them.
    pub fn eyes(&self) -> Vec<ElementId> {
        self.elements().filter(|&x| self.is_eye(x)).collect()
    }

    pub fn is_eye(&self, x: ElementId) -> bool {
        if !self.is_doubly_irreducible(x) {
            return false;
        }
        let ups = self.upper_covers(self.lower_covers(x)[0]);
        ups.len() >= 3 && ups[0] != x && ups[ups.len() - 1] != x
    }

    /// Removes all eyes, one at a time, until none remain. The map sends old
    /// ids to the ids of surviving elements.
    pub fn full_slimming(&self) -> Result<(Diagram, IdMap), DiagramError> {
        let mut current = self.clone();
        let mut map: IdMap = self.elements().map(Some).collect();
        while let Some(&eye) = current.eyes().first() {
            let (next, step) = current.remove_element(eye)?;
            for slot in map.iter_mut() {
                *slot = slot.and_then(|id| step[id.index()]);
            }
            current = next;
        }
        Ok((current, map))
    }

    /// Deletes `x`, splicing the cover lists. A lower cover `d` of `x` gets
    /// `u` (an upper cover of `x`) in the place of `x` only when no other
    /// path leads from `d` to `u`.
    pub fn remove_element(&self, x: ElementId) -> Result<(Diagram, IdMap), DiagramError> {
        let n = self.size();
        self.element(x.index())?;
        let map: IdMap = (0..n)
            .map(|i| match i.cmp(&x.index()) {
                std::cmp::Ordering::Less => Some(ElementId::new(i)),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(ElementId::new(i - 1)),
            })
            .collect();
        let mut upper: Vec<Vec<ElementId>> = Vec::with_capacity(n - 1);
        for d in self.elements() {
            if d == x {
                continue;
            }
            let mut list = Vec::new();
            for &y in self.upper_covers(d) {
                if y != x {
                    list.push(y);
                    continue;
                }
                for &u in self.upper_covers(x) {
                    let other_path = self
                        .upper_covers(d)
                        .iter()
                        .any(|&z| z != x && self.leq(z, u));
                    if !other_path && !list.contains(&u) {
                        list.push(u);
                    }
                }
            }
            upper.push(
                list.into_iter()
                    .map(|y| map[y.index()].expect("removed element spliced out"))
                    .collect(),
            );
        }
        Ok((Diagram::new(upper)?, map))
    }

    /// Edges on the left boundary chain (leftmost upper covers from the
    /// bottom) and on the right boundary chain.
    pub fn boundary_edges(&self) -> Vec<PrimeInterval> {
        let mut out = self.boundary_chain_edges(false);
        for p in self.boundary_chain_edges(true) {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out.sort_by_key(|&p| self.edge_index(p));
        out
    }

    pub fn boundary_elements(&self) -> Vec<ElementId> {
        let mut out = Vec::new();
        for right in [false, true] {
            let mut x = self.bottom();
            loop {
                if !out.contains(&x) {
                    out.push(x);
                }
                let ups = self.upper_covers(x);
                let Some(&next) = (if right { ups.last() } else { ups.first() }) else {
                    break;
                };
                x = next;
            }
        }
        out.sort();
        out
    }

    fn boundary_chain_edges(&self, right: bool) -> Vec<PrimeInterval> {
        let mut out = Vec::new();
        let mut x = self.bottom();
        loop {
            let ups = self.upper_covers(x);
            let Some(&next) = (if right { ups.last() } else { ups.first() }) else {
                return out;
            };
            out.push(PrimeInterval::new(x, next));
            x = next;
        }
    }

    /// A copy with drawing coordinates: `y` is the height, `x` is the
    /// difference of the left-first and right-first discovery ranks, which
    /// orders incomparable elements left to right.
    pub fn layout(&self) -> Diagram {
        let left = &self.order.rank;
        let right = discovery_rank(&self.upper, self.order.bottom, true);
        let coords = (0..self.size())
            .map(|i| {
                [
                    left[i] as f64 - right[i] as f64,
                    self.order.height[i] as f64,
                ]
            })
            .collect();
        let mut out = self.clone();
        out.layout = Some(coords);
        out
    }

    /// Upper-cover lists relabelled by left-first discovery order. Two
    /// diagrams are isomorphic as embedded diagrams iff these are equal.
    pub fn canonical_form(&self) -> Vec<Vec<u32>> {
        let rank = &self.order.rank;
        let mut out = vec![Vec::new(); self.size()];
        for x in 0..self.size() {
            out[rank[x]] = self.upper[x].iter().map(|y| rank[y.index()] as u32).collect();
        }
        out
    }

    pub fn canonically_eq(&self, other: &Diagram) -> bool {
        self.canonical_form() == other.canonical_form()
    }

    /// Elements reachable upwards from `from` using only the allowed edges.
    pub(crate) fn reach_up<F>(&self, from: ElementId, mut allowed: F) -> FixedBitSet
    where
        F: FnMut(PrimeInterval) -> bool,
    {
        let mut seen = FixedBitSet::with_capacity(self.size());
        seen.insert(from.index());
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for &y in self.upper_covers(x) {
                if !seen.contains(y.index()) && allowed(PrimeInterval::new(x, y)) {
                    seen.insert(y.index());
                    queue.push_back(y);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

impl TryFrom<DiagramJson> for Diagram {
    type Error = DiagramError;

    fn try_from(json: DiagramJson) -> Result<Self, Self::Error> {
        if json.size != json.upper_covers.len() {
            return Err(DiagramError::Invalid(vec![Violation::SizeMismatch {
                size: json.size,
                lists: json.upper_covers.len(),
            }]));
        }
        let upper = json
            .upper_covers
            .into_iter()
            .map(|c| c.into_iter().map(ElementId).collect())
            .collect();
        let d = Diagram::new(upper)?;
        match json.layout {
            Some(layout) => d.with_layout(layout),
            None => Ok(d),
        }
    }
}

impl From<Diagram> for DiagramJson {
    fn from(d: Diagram) -> Self {
        d.to_json()
    }
}

impl Serialize for Diagram {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Diagram {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = DiagramJson::deserialize(deserializer)?;
        Diagram::try_from(json).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, s7};

    fn ids(v: &[usize]) -> Vec<ElementId> {
        v.iter().map(|&i| ElementId::new(i)).collect()
    }

    #[test]
    fn leq_examples() {
        let d = fixtures::s7();
        assert!(d.leq(s7::XL, s7::TOP));
        assert!(d.leq(s7::M, s7::M));
        assert!(!d.leq(s7::A, s7::XR));
        let m3 = fixtures::mn(3);
        assert!(!m3.leq(ElementId(1), ElementId(2)));
        assert_eq!(d.try_leq(0, 99), Err(DiagramError::InvalidId(99)));
    }

    #[test]
    fn meet_join_examples() {
        let d = fixtures::s7();
        assert_eq!(d.meet(s7::A, s7::M), s7::XL);
        assert_eq!(d.join(s7::XL, s7::XR), s7::M);
        for x in d.elements() {
            assert_eq!(d.meet(d.bottom(), x), d.bottom());
            assert_eq!(d.join(x, d.top()), d.top());
        }
        let m4 = fixtures::mn(4);
        assert_eq!(m4.join(ElementId(1), ElementId(3)), ElementId(5));
        assert!(d.try_join(7, 0).is_err());
    }

    #[test]
    fn validate_examples() {
        let grid = vec![ids(&[1, 2]), ids(&[3]), ids(&[3]), vec![]];
        assert!(validate(&grid, None).is_empty());

        let no_top = vec![ids(&[1, 2]), vec![], vec![]];
        assert_eq!(
            validate(&no_top, None),
            vec![Violation::NoJoin { a: 1, b: 2 }]
        );
        assert_eq!(validate(&no_top, None)[0].to_string(), "no-join(1,2)");

        let shortcut = vec![ids(&[1, 2, 3]), ids(&[3]), ids(&[3]), vec![]];
        assert_eq!(
            validate(&shortcut, None),
            vec![Violation::TransitiveEdge { lower: 0, upper: 3 }]
        );
    }

    #[test]
    fn validate_rejects_garbage() {
        assert_eq!(validate(&[], None), vec![Violation::Empty]);
        let cyc = vec![ids(&[1]), ids(&[0])];
        assert!(matches!(validate(&cyc, None)[0], Violation::Cycle { .. }));
        let dup = vec![ids(&[1, 1]), vec![]];
        assert_eq!(
            validate(&dup, None),
            vec![Violation::DuplicateCover { element: 0, cover: 1 }]
        );
        let oob = vec![ids(&[5])];
        assert_eq!(
            validate(&oob, None),
            vec![Violation::IdOutOfRange { element: 0, cover: 5 }]
        );
        let selfie = vec![ids(&[0])];
        assert_eq!(validate(&selfie, None), vec![Violation::SelfCover { element: 0 }]);
    }

    #[test]
    fn layout_rules() {
        let grid = vec![ids(&[1, 2]), ids(&[3]), ids(&[3]), vec![]];
        // id 1 is the left atom.
        let good = [[0.0, 0.0], [-1.0, 1.0], [1.0, 1.0], [0.0, 2.0]];
        assert!(validate(&grid, Some(&good)).is_empty());
        let swapped = [[0.0, 0.0], [1.0, 1.0], [-1.0, 1.0], [0.0, 2.0]];
        assert_eq!(
            validate(&grid, Some(&swapped)),
            vec![Violation::LayoutOrder { left: 1, right: 2 }]
        );
        let flat = [[0.0, 0.0], [-1.0, 0.0], [1.0, 1.0], [0.0, 2.0]];
        assert!(validate(&grid, Some(&flat))
            .contains(&Violation::LayoutNotIncreasing { lower: 0, upper: 1 }));
    }

    #[test]
    fn semimodularity() {
        assert!(fixtures::s7().is_semimodular());
        assert!(fixtures::grid(3, 4).is_semimodular());
        let n5 = fixtures::n5();
        assert!(!n5.is_semimodular());
        assert!(n5.semimodularity_witness().is_some());
    }

    #[test]
    fn join_irreducible_examples() {
        assert_eq!(fixtures::mn(3).join_irreducibles(), ids(&[1, 2, 3]));
        assert_eq!(
            fixtures::s7().join_irreducibles(),
            vec![s7::XL, s7::XR, s7::A, s7::B]
        );
        assert_eq!(fixtures::chain(4).join_irreducibles(), ids(&[1, 2, 3]));
    }

    #[test]
    fn slimness() {
        assert_eq!(fixtures::s7().is_slim(), Ok(true));
        assert_eq!(fixtures::mn(3).is_slim(), Ok(false));
        assert_eq!(fixtures::grid(3, 3).is_slim(), Ok(true));
        assert_eq!(fixtures::n5().is_slim(), Err(DiagramError::NotSemimodular));
    }

    #[test]
    fn cells() {
        let g = fixtures::grid(2, 2);
        assert_eq!(g.enumerate_cells().unwrap().len(), 1);
        let c = g.enumerate_cells().unwrap()[0];
        assert_eq!((c.bottom, c.top), (g.bottom(), g.top()));
        assert_eq!(g.upper_covers(g.bottom())[0], c.left);

        let s = fixtures::s7();
        assert_eq!(
            s.enumerate_cells().unwrap(),
            vec![
                FourCell::new(s7::BOT, s7::XL, s7::XR, s7::M),
                FourCell::new(s7::XL, s7::A, s7::M, s7::TOP),
                FourCell::new(s7::XR, s7::M, s7::B, s7::TOP),
            ]
        );

        let m4 = fixtures::mn(4);
        assert_eq!(
            m4.enumerate_cells().unwrap(),
            vec![
                FourCell::new(0, 1, 2, 5),
                FourCell::new(0, 2, 3, 5),
                FourCell::new(0, 3, 4, 5)
            ]
        );
    }

    #[test]
    fn broken_cell_detected() {
        assert!(matches!(
            fixtures::n5().enumerate_cells(),
            Err(DiagramError::BrokenCell { .. })
        ));
    }

    #[test]
    fn eye_examples() {
        assert_eq!(fixtures::mn(4).eyes(), ids(&[2, 3]));
        assert!(fixtures::s7().eyes().is_empty());
        assert_eq!(fixtures::mn(3).eyes(), ids(&[2]));
    }

    #[test]
    fn slimming_examples() {
        let (g, map) = fixtures::mn(4).full_slimming().unwrap();
        assert!(g.canonically_eq(&fixtures::grid(2, 2)));
        assert_eq!(map[2], None);
        assert_eq!(map[3], None);
        assert_eq!(map[4], Some(ElementId(2)));
        let (s, _) = fixtures::s7().full_slimming().unwrap();
        assert_eq!(s, fixtures::s7());
    }

    #[test]
    fn boundary_examples() {
        let g = fixtures::grid(2, 2);
        assert_eq!(g.boundary_edges().len(), 4);
        let s = fixtures::s7();
        let e = |a, b| PrimeInterval::new(a, b);
        let mut want = vec![
            e(s7::BOT, s7::XL),
            e(s7::XL, s7::A),
            e(s7::A, s7::TOP),
            e(s7::BOT, s7::XR),
            e(s7::XR, s7::B),
            e(s7::B, s7::TOP),
        ];
        want.sort_by_key(|&p| s.edge_index(p));
        assert_eq!(s.boundary_edges(), want);
        let m4 = fixtures::mn(4);
        assert_eq!(
            m4.boundary_edges(),
            vec![e(0.into(), 1.into()), e(0.into(), 4.into()), e(1.into(), 5.into()), e(4.into(), 5.into())]
        );
    }

    #[test]
    fn layout_examples() {
        let c = fixtures::chain(3).layout();
        let coords = c.layout_coords().unwrap();
        assert_eq!(coords.iter().map(|p| p[1]).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        assert!(coords.iter().all(|p| p[0] == coords[0][0]));

        let g = fixtures::grid(2, 2).layout();
        let left = g.upper_covers(g.bottom())[0];
        let right = g.upper_covers(g.bottom())[1];
        let xy = g.layout_coords().unwrap();
        assert!(xy[left.index()][0] < xy[right.index()][0]);
        assert!(g.validate().is_empty());

        let s = fixtures::s7().layout();
        let xy = s.layout_coords().unwrap();
        assert!(xy[s7::A.index()][0] < xy[s7::M.index()][0]);
        assert!(xy[s7::M.index()][0] < xy[s7::B.index()][0]);
        assert!(s.validate().is_empty());
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        let s = fixtures::s7().layout();
        let text = serde_json::to_string(&s).unwrap();
        let back = Diagram::from_json_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"size":3,"upper_covers":[[1,2],[],[]],"layout":null}"#;
        assert!(matches!(
            Diagram::from_json_str(bad),
            Err(LoadError::Diagram(DiagramError::Invalid(_)))
        ));
        let mismatch = r#"{"size":4,"upper_covers":[[1],[]]}"#;
        assert!(Diagram::from_json_str(mismatch).is_err());
    }

    #[test]
    fn lower_cover_order_follows_embedding() {
        let s = fixtures::s7();
        assert_eq!(s.lower_covers(s7::TOP), &[s7::A, s7::M, s7::B]);
        assert_eq!(s.lower_covers(s7::M), &[s7::XL, s7::XR]);
    }

    #[test]
    fn remove_element_splices() {
        let g = fixtures::grid(2, 2);
        let a = g.upper_covers(g.bottom())[0];
        let (c, _) = g.remove_element(a).unwrap();
        assert!(c.canonically_eq(&fixtures::chain(3)));
        // Removing the middle of a chain closes the gap with a new edge.
        let (c2, _) = fixtures::chain(3).remove_element(ElementId(1)).unwrap();
        assert!(c2.canonically_eq(&fixtures::chain(2)));
    }
}
