//! Congruence generation by brute-force closure, and congruence checking.

use serde::{Deserialize, Serialize};

use crate::diagram::{Diagram, DiagramError, ElementId, PrimeInterval};

/// A partition of the element set, stored as the least element of each
/// element's block. This normal form makes equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    block: Vec<ElementId>,
}

impl Partition {
    pub fn identity(size: usize) -> Self {
        Partition {
            block: (0..size).map(ElementId::new).collect(),
        }
    }

    pub fn full(size: usize) -> Self {
        Partition {
            block: vec![ElementId(0); size],
        }
    }

    /// Normalises arbitrary block labels (one label per element).
    pub fn from_labels<T: Eq + Copy>(labels: &[T]) -> Self {
        let mut block = Vec::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            let first = labels[..i].iter().position(|l| l == label).unwrap_or(i);
            block.push(ElementId::new(first));
        }
        Partition { block }
    }

    /// Builds a partition of `0..size` from explicit blocks; unlisted elements
    /// are singletons.
    pub fn from_blocks(size: usize, blocks: &[Vec<ElementId>]) -> Self {
        let mut uf = UnionFind::new(size);
        for b in blocks {
            for w in b.windows(2) {
                uf.union(w[0].index(), w[1].index());
            }
        }
        uf.into_partition()
    }

    pub fn size(&self) -> usize {
        self.block.len()
    }

    /// The least element of the block of `x`.
    pub fn representative(&self, x: ElementId) -> ElementId {
        self.block[x.index()]
    }

    pub fn collapses(&self, x: ElementId, y: ElementId) -> bool {
        self.block[x.index()] == self.block[y.index()]
    }

    pub fn collapses_edge(&self, p: PrimeInterval) -> bool {
        self.collapses(p.lower, p.upper)
    }

    pub fn blocks(&self) -> Vec<Vec<ElementId>> {
        let mut out: Vec<Vec<ElementId>> = Vec::new();
        for (i, &rep) in self.block.iter().enumerate() {
            if rep.index() == i {
                out.push(vec![rep]);
            } else {
                out.iter_mut()
                    .find(|b| b[0] == rep)
                    .expect("representative precedes its block")
                    .push(ElementId::new(i));
            }
        }
        out
    }

    pub fn block_count(&self) -> usize {
        self.block
            .iter()
            .enumerate()
            .filter(|(i, r)| r.index() == *i)
            .count()
    }

    /// The common refinement of two partitions of the same set.
    pub fn meet(&self, other: &Partition) -> Partition {
        let pairs: Vec<(ElementId, ElementId)> =
            self.block.iter().copied().zip(other.block.iter().copied()).collect();
        Partition::from_labels(&pairs)
    }

    /// Every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        (0..self.size()).all(|i| {
            other.collapses(ElementId::new(i), self.block[i])
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionJson {
    blocks: Vec<Vec<ElementId>>,
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PartitionJson {
            blocks: self.blocks(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let json = PartitionJson::deserialize(d)?;
        let mut seen = Vec::new();
        for b in &json.blocks {
            for &x in b {
                if seen.contains(&x) {
                    return Err(serde::de::Error::custom(format!(
                        "element {x} listed twice"
                    )));
                }
                seen.push(x);
            }
        }
        seen.sort();
        if seen.iter().enumerate().any(|(i, x)| x.index() != i) {
            return Err(serde::de::Error::custom("blocks do not cover 0..size"));
        }
        Ok(Partition::from_blocks(seen.len(), &json.blocks))
    }
}

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; false if they were already one.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        true
    }

    pub fn into_partition(mut self) -> Partition {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).map(|i| self.find(i)).collect();
        Partition::from_labels(&roots)
    }
}

/// Least congruence containing `pairs`, plus the sequence of merges that
/// produced it.
///
/// Worklist fixed point: every pair that merges two classes is queued, and a
/// queued pair `(x, y)` merges `(x∧z, y∧z)` and `(x∨z, y∨z)` for every `z`.
/// The equivalence generated by the queued pairs is then compatible with
/// every translation, hence a congruence.
pub fn congruence_closure_traced(
    d: &Diagram,
    pairs: &[(ElementId, ElementId)],
) -> (Partition, Vec<(ElementId, ElementId)>) {
    let mut uf = UnionFind::new(d.size());
    let mut merges = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    let mut merge = |uf: &mut UnionFind, x: ElementId, y: ElementId, queue: &mut std::collections::VecDeque<_>| {
        if uf.union(x.index(), y.index()) {
            merges.push((x, y));
            queue.push_back((x, y));
        }
    };
    for &(x, y) in pairs {
        merge(&mut uf, x, y, &mut queue);
    }
    while let Some((x, y)) = queue.pop_front() {
        for z in d.elements() {
            merge(&mut uf, d.meet(x, z), d.meet(y, z), &mut queue);
            merge(&mut uf, d.join(x, z), d.join(y, z), &mut queue);
        }
    }
    (uf.into_partition(), merges)
}

pub fn congruence_closure(d: &Diagram, pairs: &[(ElementId, ElementId)]) -> Partition {
    congruence_closure_traced(d, pairs).0
}

/// `con(p)`: the least congruence collapsing the edge `p`.
pub fn principal_congruence(d: &Diagram, p: PrimeInterval) -> Result<Partition, DiagramError> {
    if !d.is_edge(p) {
        return Err(DiagramError::NotAnEdge(p.lower.index(), p.upper.index()));
    }
    Ok(congruence_closure(d, &[(p.lower, p.upper)]))
}

/// Substitution property for meet and join, checked over every pair inside a
/// block and every element.
pub fn is_congruence(d: &Diagram, p: &Partition) -> bool {
    congruence_witness(d, p).is_none()
}

/// A triple `(x, y, z)` with `x ≡ y` but `x∧z ≢ y∧z` or `x∨z ≢ y∨z`.
pub fn congruence_witness(
    d: &Diagram,
    p: &Partition,
) -> Option<(ElementId, ElementId, ElementId)> {
    for x in d.elements() {
        for y in d.elements().filter(|&y| y > x && p.collapses(x, y)) {
            for z in d.elements() {
                if !p.collapses(d.meet(x, z), d.meet(y, z))
                    || !p.collapses(d.join(x, z), d.join(y, z))
                {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

pub fn collapses(p: &Partition, x: ElementId, y: ElementId) -> bool {
    p.collapses(x, y)
}

/// Every partition of `0..n`, via restricted growth strings. There are
/// Bell(n) of them, so keep `n` small (Bell(8) = 4140).
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn grow(labels: &mut Vec<usize>, n: usize, out: &mut Vec<Partition>) {
        if labels.len() == n {
            out.push(Partition::from_labels(labels));
            return;
        }
        let next = labels.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            labels.push(l);
            grow(labels, n, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::with_capacity(n), n, &mut out);
    out
}

/// Largest size accepted by [`least_congruence_by_enumeration`].
pub const ENUMERATION_LIMIT: usize = 10;

/// The least congruence containing `pairs`, found as the meet of all
/// congruences containing them. Independent of [`congruence_closure`]; used
/// as its oracle on small lattices.
pub fn least_congruence_by_enumeration(
    d: &Diagram,
    pairs: &[(ElementId, ElementId)],
) -> Option<Partition> {
    if d.size() > ENUMERATION_LIMIT {
        return None;
    }
    let mut least = Partition::full(d.size());
    for p in all_partitions(d.size()) {
        if pairs.iter().all(|&(x, y)| p.collapses(x, y)) && is_congruence(d, &p) {
            least = least.meet(&p);
        }
    }
    Some(least)
}
