//! Cell-perspectivity, swings and tilts; sequence reachability; spanning;
//! and the empirical check of the Swing Lemma against [`crate::congruence`].

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::congruence::{self, Partition};
use crate::diagram::{Diagram, DiagramError, ElementId, FourCell, PrimeInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    CellPerspective,
    Swing,
    StrongSwing,
    Tilt,
}

/// One step `r → s` together with the cell witnessing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepRelation {
    pub kind: RelationKind,
    pub cell: FourCell,
}

/// A target edge and the relation leading to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub target: PrimeInterval,
    #[serde(flatten)]
    pub relation: StepRelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceVariant {
    #[serde(rename = "SL")]
    Sl,
    #[serde(rename = "SSL")]
    Ssl,
    #[serde(rename = "SS")]
    Ss,
    #[serde(rename = "UpwardCP")]
    UpwardCp,
}

impl SequenceVariant {
    pub const ALL: [SequenceVariant; 4] = [
        SequenceVariant::Sl,
        SequenceVariant::Ssl,
        SequenceVariant::Ss,
        SequenceVariant::UpwardCp,
    ];

    /// Whether a step of `kind` may be used. Upward cell-perspectivities
    /// need the extra direction test done by [`StepGraph`].
    pub fn allows(self, kind: RelationKind) -> bool {
        use RelationKind::*;
        match self {
            SequenceVariant::Sl => matches!(kind, CellPerspective | Swing | Tilt),
            SequenceVariant::Ssl => matches!(kind, CellPerspective | StrongSwing | Tilt),
            SequenceVariant::Ss => matches!(kind, CellPerspective | Swing),
            SequenceVariant::UpwardCp => kind == CellPerspective,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SequenceVariant::Sl => "SL",
            SequenceVariant::Ssl => "SSL",
            SequenceVariant::Ss => "SS",
            SequenceVariant::UpwardCp => "UpwardCP",
        }
    }
}

impl fmt::Display for SequenceVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SequenceVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SequenceVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown sequence variant {s:?} (expected SL, SSL, SS or UpwardCP)"))
    }
}

/// `edges[0], edges[1], …` with `steps[i]` relating `edges[i]` to `edges[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSequence {
    pub variant: SequenceVariant,
    pub edges: Vec<PrimeInterval>,
    pub steps: Vec<StepRelation>,
}

impl StepSequence {
    /// Number of steps (`n` in `r_0, …, r_n`).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwingError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("span relation is not transitive: ({x},{y}) and ({y},{z}) related but ({x},{z}) not")]
    BetaNotTransitive {
        x: ElementId,
        y: ElementId,
        z: ElementId,
    },
    #[error("span relation is not a congruence: {x} and {y} related, substitution fails with {z}")]
    BetaNotCongruence {
        x: ElementId,
        y: ElementId,
        z: ElementId,
    },
}

/// Every step out of every edge, precomputed once per diagram.
///
/// Steps out of an edge are listed cell by cell in [`Diagram::enumerate_cells`]
/// order; within a cell the order is cell-perspectivity, swing, strong swing,
/// tilt. This fixes the order in which searches explore neighbours.
#[derive(Debug, Clone)]
pub struct StepGraph<'d> {
    diagram: &'d Diagram,
    cells: Vec<FourCell>,
    steps: Vec<Vec<(usize, Step)>>,
}

impl<'d> StepGraph<'d> {
    pub fn new(d: &'d Diagram) -> Result<Self, DiagramError> {
        let cells = d.enumerate_cells()?;
        let eyes = d.eyes();
        let mut steps = vec![Vec::new(); d.edge_count()];
        let index = |p: PrimeInterval| d.edge_index(p).expect("cell sides are edges");
        for &cell in &cells {
            let [ol, or, lt, rt] = cell.edges();
            for r in cell.edges() {
                let out = &mut steps[index(r)];
                let opposite = cell.opposite(r).expect("r is a side");
                out.push((
                    index(opposite),
                    Step {
                        target: opposite,
                        relation: StepRelation {
                            kind: RelationKind::CellPerspective,
                            cell,
                        },
                    },
                ));
                let mut push = |kind, target: PrimeInterval| {
                    out.push((
                        index(target),
                        Step {
                            target,
                            relation: StepRelation { kind, cell },
                        },
                    ))
                };
                // Swing: r and s are the two top sides of the cell.
                let swing_partner = if r == lt {
                    Some(rt)
                } else if r == rt {
                    Some(lt)
                } else {
                    None
                };
                if let Some(s) = swing_partner {
                    if is_interior(d.lower_covers(cell.top), s.lower) {
                        push(RelationKind::Swing, s);
                        if !eyes.contains(&r.lower) || eyes.contains(&s.lower) {
                            push(RelationKind::StrongSwing, s);
                        }
                    }
                }
                let tilt_partner = if r == ol {
                    Some(or)
                } else if r == or {
                    Some(ol)
                } else {
                    None
                };
                if let Some(s) = tilt_partner {
                    if is_interior(d.upper_covers(cell.bottom), s.upper) {
                        push(RelationKind::Tilt, s);
                    }
                }
            }
        }
        Ok(StepGraph {
            diagram: d,
            cells,
            steps,
        })
    }

    pub fn diagram(&self) -> &'d Diagram {
        self.diagram
    }

    pub fn cells(&self) -> &[FourCell] {
        &self.cells
    }

    fn index(&self, p: PrimeInterval) -> Result<usize, DiagramError> {
        self.diagram
            .edge_index(p)
            .ok_or(DiagramError::NotAnEdge(p.lower.index(), p.upper.index()))
    }

    /// All steps out of `r` of the given kind.
    pub fn targets(&self, r: PrimeInterval, kind: RelationKind) -> Result<Vec<Step>, DiagramError> {
        let i = self.index(r)?;
        Ok(self.steps[i]
            .iter()
            .filter(|(_, s)| s.relation.kind == kind)
            .map(|&(_, s)| s)
            .collect())
    }

    fn allowed(variant: SequenceVariant, from: PrimeInterval, step: &Step) -> bool {
        variant.allows(step.relation.kind)
            && (variant != SequenceVariant::UpwardCp || from.lower == step.relation.cell.bottom)
    }

    /// Steps out of `r` permitted in `variant`, with target edge indices.
    pub fn moves(
        &self,
        r: PrimeInterval,
        variant: SequenceVariant,
    ) -> Result<impl Iterator<Item = &(usize, Step)> + '_, DiagramError> {
        let i = self.index(r)?;
        Ok(self.steps[i]
            .iter()
            .filter(move |(_, s)| Self::allowed(variant, r, s)))
    }

    /// Edge indices reachable from `p`, `p` included.
    pub fn reachable_set(
        &self,
        p: PrimeInterval,
        variant: SequenceVariant,
    ) -> Result<FixedBitSet, DiagramError> {
        let start = self.index(p)?;
        let edges = self.diagram.edges();
        let mut seen = FixedBitSet::with_capacity(edges.len());
        seen.insert(start);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for (j, step) in &self.steps[i] {
                if !seen.contains(*j) && Self::allowed(variant, edges[i], step) {
                    seen.insert(*j);
                    queue.push_back(*j);
                }
            }
        }
        Ok(seen)
    }

    pub fn reachable(
        &self,
        p: PrimeInterval,
        variant: SequenceVariant,
    ) -> Result<Vec<PrimeInterval>, DiagramError> {
        let set = self.reachable_set(p, variant)?;
        let edges = self.diagram.edges();
        Ok(set.ones().map(|i| edges[i]).collect())
    }

    pub fn find_sequence(
        &self,
        p: PrimeInterval,
        q: PrimeInterval,
        variant: SequenceVariant,
    ) -> Result<Option<StepSequence>, DiagramError> {
        let start = self.index(p)?;
        let goal = self.index(q)?;
        let edges = self.diagram.edges();
        let mut parent: Vec<Option<(usize, StepRelation)>> = vec![None; edges.len()];
        let mut seen = FixedBitSet::with_capacity(edges.len());
        seen.insert(start);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            if i == goal {
                break;
            }
            for (j, step) in &self.steps[i] {
                if !seen.contains(*j) && Self::allowed(variant, edges[i], step) {
                    seen.insert(*j);
                    parent[*j] = Some((i, step.relation));
                    queue.push_back(*j);
                }
            }
        }
        if !seen.contains(goal) {
            return Ok(None);
        }
        let mut rev_edges = vec![edges[goal]];
        let mut rev_steps = Vec::new();
        let mut at = goal;
        while let Some((from, rel)) = parent[at] {
            rev_edges.push(edges[from]);
            rev_steps.push(rel);
            at = from;
        }
        rev_edges.reverse();
        rev_steps.reverse();
        Ok(Some(StepSequence {
            variant,
            edges: rev_edges,
            steps: rev_steps,
        }))
    }

    /// Every edge reaches every edge.
    pub fn strongly_connected(&self, variant: SequenceVariant) -> bool {
        let edges = self.diagram.edges();
        edges.iter().all(|&p| {
            self.reachable_set(p, variant)
                .map(|s| s.count_ones(..) == edges.len())
                .unwrap_or(false)
        })
    }

    pub fn spans(
        &self,
        r: PrimeInterval,
        u: ElementId,
        v: ElementId,
        variant: SequenceVariant,
    ) -> Result<bool, DiagramError> {
        let d = self.diagram;
        if u.index() >= d.size() || v.index() >= d.size() {
            return Err(DiagramError::InvalidId(u.index().max(v.index())));
        }
        if !d.leq(u, v) {
            return Err(DiagramError::NotBelow(u.index(), v.index()));
        }
        let allowed = self.reachable_set(r, variant)?;
        Ok(spans_with(d, &allowed, u, v))
    }

    /// The relation `{(x, y) : p spans [x∧y, x∨y]}` as a partition, after
    /// checking that it is an equivalence and a congruence.
    pub fn span_relation(
        &self,
        p: PrimeInterval,
        variant: SequenceVariant,
    ) -> Result<Partition, SwingError> {
        let d = self.diagram;
        let allowed = self.reachable_set(p, variant)?;
        let up: Vec<FixedBitSet> = d
            .elements()
            .map(|x| d.reach_up(x, |e| allowed.contains(d.edge_index(e).expect("edge"))))
            .collect();
        let related = |x: ElementId, y: ElementId| up[d.meet(x, y).index()].contains(d.join(x, y).index());
        let n = d.size();
        let classes: Vec<FixedBitSet> = d
            .elements()
            .map(|x| {
                let mut c = FixedBitSet::with_capacity(n);
                c.extend(d.elements().filter(|&y| related(x, y)).map(|y| y.index()));
                c
            })
            .collect();
        for x in d.elements() {
            for y in classes[x.index()].ones().map(ElementId::new) {
                if classes[x.index()] != classes[y.index()] {
                    let z = classes[x.index()]
                        .symmetric_difference(&classes[y.index()])
                        .next()
                        .map(ElementId::new)
                        .expect("classes differ");
                    // One of (x,z), (y,z) is related, the other is not.
                    let (a, b) = if related(x, z) { (y, x) } else { (x, y) };
                    return Err(SwingError::BetaNotTransitive { x: a, y: b, z });
                }
            }
        }
        let labels: Vec<usize> = classes
            .iter()
            .map(|c| c.minimum().expect("reflexive"))
            .collect();
        let partition = Partition::from_labels(&labels);
        if let Some((x, y, z)) = congruence::congruence_witness(d, &partition) {
            return Err(SwingError::BetaNotCongruence { x, y, z });
        }
        Ok(partition)
    }
}

fn is_interior(list: &[ElementId], x: ElementId) -> bool {
    list.len() >= 3 && list.first() != Some(&x) && list.last() != Some(&x)
}

fn spans_with(d: &Diagram, allowed: &FixedBitSet, u: ElementId, v: ElementId) -> bool {
    d.reach_up(u, |e| {
        d.leq(e.upper, v) && allowed.contains(d.edge_index(e).expect("edge"))
    })
    .contains(v.index())
}

pub fn cell_perspective_targets(d: &Diagram, r: PrimeInterval) -> Result<Vec<Step>, DiagramError> {
    StepGraph::new(d)?.targets(r, RelationKind::CellPerspective)
}

pub fn swing_targets(d: &Diagram, r: PrimeInterval) -> Result<Vec<Step>, DiagramError> {
    StepGraph::new(d)?.targets(r, RelationKind::Swing)
}

pub fn strong_swing_targets(d: &Diagram, r: PrimeInterval) -> Result<Vec<Step>, DiagramError> {
    StepGraph::new(d)?.targets(r, RelationKind::StrongSwing)
}

pub fn tilt_targets(d: &Diagram, r: PrimeInterval) -> Result<Vec<Step>, DiagramError> {
    StepGraph::new(d)?.targets(r, RelationKind::Tilt)
}

pub fn reachable(
    d: &Diagram,
    p: PrimeInterval,
    variant: SequenceVariant,
) -> Result<Vec<PrimeInterval>, DiagramError> {
    StepGraph::new(d)?.reachable(p, variant)
}

pub fn find_sequence(
    d: &Diagram,
    p: PrimeInterval,
    q: PrimeInterval,
    variant: SequenceVariant,
) -> Result<Option<StepSequence>, DiagramError> {
    StepGraph::new(d)?.find_sequence(p, q, variant)
}

/// `1_p ∨ 0_q = 1_q` and `1_p ∧ 0_q = 0_p`.
pub fn up_perspective(d: &Diagram, p: PrimeInterval, q: PrimeInterval) -> Result<bool, DiagramError> {
    for e in [p, q] {
        if !d.is_edge(e) {
            return Err(DiagramError::NotAnEdge(e.lower.index(), e.upper.index()));
        }
    }
    Ok(d.join(p.upper, q.lower) == q.upper && d.meet(p.upper, q.lower) == p.lower)
}

pub fn spans(
    d: &Diagram,
    r: PrimeInterval,
    u: ElementId,
    v: ElementId,
    variant: SequenceVariant,
) -> Result<bool, DiagramError> {
    StepGraph::new(d)?.spans(r, u, v, variant)
}

pub fn span_relation(
    d: &Diagram,
    p: PrimeInterval,
    variant: SequenceVariant,
) -> Result<Partition, SwingError> {
    StepGraph::new(d)?.span_relation(p, variant)
}

/// One edge pair on which the three answers disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub p: PrimeInterval,
    pub q: PrimeInterval,
    /// `q` collapsed by `con(p)`.
    #[serde(rename = "A")]
    pub collapsed: bool,
    /// `q` SL-reachable from `p`.
    #[serde(rename = "B")]
    pub sl: bool,
    /// `q` SSL-reachable from `p`.
    #[serde(rename = "C")]
    pub ssl: bool,
    pub witness: Option<StepSequence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwingReport {
    pub size: usize,
    pub edges: usize,
    pub pairs: usize,
    pub collapsed_pairs: usize,
    pub sl_reachable_pairs: usize,
    pub ssl_reachable_pairs: usize,
    pub discrepancies: Vec<Discrepancy>,
    pub wall_time_ms: f64,
}

impl SwingReport {
    pub fn ok(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Compares `con(p)` with SL- and SSL-reachability for every ordered edge pair.
pub fn verify_swing_lemma(d: &Diagram) -> Result<SwingReport, DiagramError> {
    let started = Instant::now();
    let graph = StepGraph::new(d)?;
    let edges = d.edges();
    let mut report = SwingReport {
        size: d.size(),
        edges: edges.len(),
        pairs: edges.len() * edges.len(),
        collapsed_pairs: 0,
        sl_reachable_pairs: 0,
        ssl_reachable_pairs: 0,
        discrepancies: Vec::new(),
        wall_time_ms: 0.0,
    };
    for &p in edges {
        let con = congruence::principal_congruence(d, p)?;
        let sl = graph.reachable_set(p, SequenceVariant::Sl)?;
        let ssl = graph.reachable_set(p, SequenceVariant::Ssl)?;
        for (j, &q) in edges.iter().enumerate() {
            let a = con.collapses_edge(q);
            let b = sl.contains(j);
            let c = ssl.contains(j);
            report.collapsed_pairs += a as usize;
            report.sl_reachable_pairs += b as usize;
            report.ssl_reachable_pairs += c as usize;
            if a != b || a != c {
                let witness = match (b, c) {
                    (true, _) => graph.find_sequence(p, q, SequenceVariant::Sl)?,
                    (false, true) => graph.find_sequence(p, q, SequenceVariant::Ssl)?,
                    _ => None,
                };
                log::warn!("swing lemma discrepancy p={p} q={q} A={a} B={b} C={c}");
                report.discrepancies.push(Discrepancy {
                    p,
                    q,
                    collapsed: a,
                    sl: b,
                    ssl: c,
                    witness,
                });
            }
        }
    }
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1000.0;
    Ok(report)
}

/// Reachable sets stored alongside their diagram. Checking one compares the
/// stored sets with `con(p)`, so a tampered fixture shows up as a
/// discrepancy; this is how the verifier tests itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachabilityFixture {
    pub diagram: Diagram,
    pub variant: SequenceVariant,
    pub reachable: Vec<ReachableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachableEntry {
    pub p: PrimeInterval,
    pub edges: Vec<PrimeInterval>,
}

impl ReachabilityFixture {
    pub fn compute(d: &Diagram, variant: SequenceVariant) -> Result<Self, DiagramError> {
        let graph = StepGraph::new(d)?;
        let reachable = d
            .edges()
            .iter()
            .map(|&p| {
                Ok(ReachableEntry {
                    p,
                    edges: graph.reachable(p, variant)?,
                })
            })
            .collect::<Result<_, DiagramError>>()?;
        Ok(ReachabilityFixture {
            diagram: d.clone(),
            variant,
            reachable,
        })
    }

    /// Pairs on which the stored set and `con(p)` disagree. The stored
    /// answer fills both the `B` and the `C` column.
    pub fn check(&self) -> Result<Vec<Discrepancy>, DiagramError> {
        let d = &self.diagram;
        let mut out = Vec::new();
        for entry in &self.reachable {
            let con = congruence::principal_congruence(d, entry.p)?;
            for &q in d.edges() {
                let a = con.collapses_edge(q);
                let b = entry.edges.contains(&q);
                if a != b {
                    out.push(Discrepancy {
                        p: entry.p,
                        q,
                        collapsed: a,
                        sl: b,
                        ssl: b,
                        witness: None,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Outcome of [`check_up_perspective_order`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub sequences: usize,
    pub counterexample: Option<Vec<PrimeInterval>>,
}

/// Enumerates every repetition-free SS-sequence with at most `max_steps`
/// steps and checks: if step `i` is an up-perspectivity, so is every step
/// `j ≤ i`.
pub fn check_up_perspective_order(d: &Diagram, max_steps: usize) -> Result<OrderCheck, DiagramError> {
    let graph = StepGraph::new(d)?;
    let edges = d.edges();
    let mut out = OrderCheck {
        sequences: 0,
        counterexample: None,
    };
    // `up[k]` records whether step k of the current path is an up-perspectivity.
    fn dfs(
        graph: &StepGraph<'_>,
        d: &Diagram,
        path: &mut Vec<usize>,
        up: &mut Vec<bool>,
        on_path: &mut FixedBitSet,
        max_steps: usize,
        out: &mut OrderCheck,
    ) {
        out.sequences += 1;
        if out.counterexample.is_some() || up.len() == max_steps {
            return;
        }
        let edges = d.edges();
        let last = *path.last().expect("non-empty path");
        let mut next: Vec<usize> = graph
            .moves(edges[last], SequenceVariant::Ss)
            .expect("edge")
            .map(|(j, _)| *j)
            .collect();
        next.dedup();
        for j in next {
            if on_path.contains(j) {
                continue;
            }
            let is_up = up_perspective(d, edges[last], edges[j]).expect("edges");
            if is_up && up.iter().any(|u| !u) {
                let mut seq: Vec<PrimeInterval> = path.iter().map(|&i| edges[i]).collect();
                seq.push(edges[j]);
                out.counterexample = Some(seq);
                return;
            }
            path.push(j);
            up.push(is_up);
            on_path.insert(j);
            dfs(graph, d, path, up, on_path, max_steps, out);
            on_path.set(j, false);
            up.pop();
            path.pop();
        }
    }
    for i in 0..edges.len() {
        let mut on_path = FixedBitSet::with_capacity(edges.len());
        on_path.insert(i);
        dfs(&graph, d, &mut vec![i], &mut Vec::new(), &mut on_path, max_steps, &mut out);
        if out.counterexample.is_some() {
            break;
        }
    }
    Ok(out)
}
