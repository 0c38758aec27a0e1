//! Constructions of slim and planar semimodular diagrams: grids, fork
//! insertion, corner removal, eyes, `M_n`, and seeded random generators.
//!
//! Every constructor keeps the embedding valid by construction; the result
//! is always re-validated through [`Diagram::new`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Diagram, DiagramError, ElementId, FourCell};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("grid dimensions must both be at least 2, got {0}x{1}")]
    GridTooSmall(usize, usize),
    #[error("M_n needs n >= 3, got {0}")]
    MnTooSmall(usize),
    #[error("the diagram is not slim")]
    NotSlim,
    #[error("element {0} is not a corner")]
    NotACorner(ElementId),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("no good diagram of length {length} found in {attempts} attempts")]
    GenerationExhausted { length: usize, attempts: usize },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Everything needed to rebuild a generated diagram step by step. Cells and
/// corners use the element ids in force when the step was applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildRecipe {
    pub grid: [usize; 2],
    pub forks: Vec<FourCell>,
    pub corners: Vec<ElementId>,
    pub eyes: Vec<FourCell>,
    pub seed: u64,
}

/// `C_m × C_n`. Element `(i, j)` has id `i * n + j`; `(i + 1, j)` is its left
/// upper cover and `(i, j + 1)` its right one.
pub fn grid(m: usize, n: usize) -> Result<Diagram, BuildError> {
    if m < 2 || n < 2 {
        return Err(BuildError::GridTooSmall(m, n));
    }
    let id = |i: usize, j: usize| ElementId::new(i * n + j);
    let mut upper = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let mut covers = Vec::with_capacity(2);
            if i + 1 < m {
                covers.push(id(i + 1, j));
            }
            if j + 1 < n {
                covers.push(id(i, j + 1));
            }
            upper.push(covers);
        }
    }
    Ok(Diagram::new(upper)?)
}

/// `M_n`: bottom `0`, atoms `1..=n` from left to right, top `n + 1`.
pub fn make_mn(n: usize) -> Result<Diagram, BuildError> {
    if n < 3 {
        return Err(BuildError::MnTooSmall(n));
    }
    let top = ElementId::new(n + 1);
    let mut upper = vec![(1..=n).map(ElementId::new).collect::<Vec<_>>()];
    upper.extend((0..n).map(|_| vec![top]));
    upper.push(vec![]);
    Ok(Diagram::new(upper)?)
}

fn require_cell(d: &Diagram, cell: FourCell) -> Result<(), BuildError> {
    if d.is_cell(cell) {
        Ok(())
    } else {
        Err(DiagramError::NotACell(cell).into())
    }
}

fn replace(list: &mut [ElementId], old: ElementId, new: ElementId) {
    let slot = list
        .iter_mut()
        .find(|x| **x == old)
        .expect("cover to replace is present");
    *slot = new;
}

/// Inserts a fork into `cell`.
///
/// A new element `s` goes inside the cell right below its top; the two lower
/// sides `[o,a]` and `[o,b]` are split by new lower covers of `s`. The split
/// then runs down-left and down-right: while the edge just split is
/// `[u,w]` with new middle `v`, and `w` has a lower cover `z` next to `u`
/// (left of `u` on the left walk, right of it on the right walk) such that
/// `[x,z]` with `x = z ∧ u` is still an edge, a new `y` splits `[x,z]` and
/// `y ≺ v`. Neighbours and meets are taken in the original diagram.
pub fn insert_fork(d: &Diagram, cell: FourCell) -> Result<Diagram, BuildError> {
    if !d.is_slim()? {
        return Err(BuildError::NotSlim);
    }
    require_cell(d, cell)?;
    let FourCell {
        bottom: o,
        left: a,
        right: b,
        top: t,
    } = cell;

    let mut upper: Vec<Vec<ElementId>> = d.all_upper_covers().to_vec();
    let fresh = |upper: &mut Vec<Vec<ElementId>>, covers: Vec<ElementId>| {
        upper.push(covers);
        ElementId::new(upper.len() - 1)
    };
    let s = fresh(&mut upper, vec![t]);
    let yl = fresh(&mut upper, vec![a, s]);
    let yr = fresh(&mut upper, vec![s, b]);
    replace(&mut upper[o.index()], a, yl);
    replace(&mut upper[o.index()], b, yr);

    for leftwards in [true, false] {
        let (mut u, mut w, mut v) = if leftwards { (o, a, yl) } else { (o, b, yr) };
        loop {
            let lower = d.lower_covers(w);
            let pos = lower
                .iter()
                .position(|&e| e == u)
                .expect("split edge comes from the original diagram");
            let z = if leftwards {
                match pos.checked_sub(1) {
                    Some(p) => lower[p],
                    None => break,
                }
            } else {
                match lower.get(pos + 1) {
                    Some(&z) => z,
                    None => break,
                }
            };
            let x = d.meet(z, u);
            if !upper[x.index()].contains(&z) {
                break;
            }
            let covers = if leftwards { vec![z, v] } else { vec![v, z] };
            let y = fresh(&mut upper, covers);
            replace(&mut upper[x.index()], z, y);
            (u, w, v) = (x, z, y);
        }
    }
    Ok(Diagram::new(upper)?)
}

/// Doubly irreducible boundary elements whose upper cover covers exactly two
/// elements and whose lower cover is covered by exactly two.
pub fn corners(d: &Diagram) -> Result<Vec<ElementId>, BuildError> {
    if !d.is_slim()? {
        return Err(BuildError::NotSlim);
    }
    let boundary = d.boundary_elements();
    Ok(boundary
        .into_iter()
        .filter(|&x| {
            d.is_doubly_irreducible(x)
                && d.lower_covers(d.upper_covers(x)[0]).len() == 2
                && d.upper_covers(d.lower_covers(x)[0]).len() == 2
        })
        .collect())
}

/// Deletes a corner. Ids above `x` shift down by one.
pub fn remove_corner(d: &Diagram, x: ElementId) -> Result<Diagram, BuildError> {
    if !corners(d)?.contains(&x) {
        return Err(BuildError::NotACorner(x));
    }
    Ok(d.remove_element(x)?.0)
}

/// Adds an eye into `cell`; the new element gets the next free id and sits
/// between the cell's middle elements.
pub fn add_eye(d: &Diagram, cell: FourCell) -> Result<(Diagram, ElementId), BuildError> {
    require_cell(d, cell)?;
    let mut upper = d.all_upper_covers().to_vec();
    let eye = ElementId::new(upper.len());
    upper.push(vec![cell.top]);
    let below = &mut upper[cell.bottom.index()];
    let pos = below
        .iter()
        .position(|&e| e == cell.left)
        .expect("cell side is an edge");
    below.insert(pos + 1, eye);
    Ok((Diagram::new(upper)?, eye))
}

pub fn is_distributive(d: &Diagram) -> bool {
    for x in d.elements() {
        for y in d.elements() {
            for z in d.elements() {
                let lhs = d.meet(x, d.join(y, z));
                let rhs = d.join(d.meet(x, y), d.meet(x, z));
                if lhs != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// Some element strictly between bottom and top is comparable to everything.
pub fn is_glued_sum_decomposable(d: &Diagram) -> bool {
    d.elements()
        .filter(|&x| x != d.bottom() && x != d.top())
        .any(|x| d.elements().all(|y| d.comparable(x, y)))
}

/// Extra requirements on game boards besides the two structural exclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodnessCriteria {
    pub min_cells: usize,
    pub min_length: usize,
    pub max_length: usize,
}

impl Default for GoodnessCriteria {
    fn default() -> Self {
        GoodnessCriteria {
            min_cells: 4,
            min_length: 3,
            max_length: 16,
        }
    }
}

pub fn is_good(d: &Diagram, criteria: &GoodnessCriteria) -> Result<bool, BuildError> {
    if !d.is_slim()? {
        return Err(BuildError::NotSlim);
    }
    let len = d.length();
    Ok(len >= criteria.min_length
        && len <= criteria.max_length
        && d.enumerate_cells()?.len() >= criteria.min_cells
        && !is_distributive(d)
        && !is_glued_sum_decomposable(d))
}

/// Rebuilds a diagram from its recipe.
pub fn replay(recipe: &BuildRecipe) -> Result<Diagram, BuildError> {
    let mut d = grid(recipe.grid[0], recipe.grid[1])?;
    for &cell in &recipe.forks {
        d = insert_fork(&d, cell)?;
    }
    for &x in &recipe.corners {
        d = remove_corner(&d, x)?;
    }
    for &cell in &recipe.eyes {
        d = add_eye(&d, cell)?.0;
    }
    Ok(d)
}

/// A random slim semimodular diagram of the given length: a grid, then
/// `forks` forks in uniformly chosen cells, then up to `corner_removals`
/// uniformly chosen corners (fewer if the diagram runs out of corners).
pub fn random_slim(
    length: usize,
    forks: usize,
    corner_removals: usize,
    seed: u64,
) -> Result<(Diagram, BuildRecipe), BuildError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d, mut recipe) = random_slim_with(length, forks, corner_removals, &mut rng)?;
    recipe.seed = seed;
    Ok((d, recipe))
}

pub fn random_slim_with<R: Rng>(
    length: usize,
    forks: usize,
    corner_removals: usize,
    rng: &mut R,
) -> Result<(Diagram, BuildRecipe), BuildError> {
    let grid_length = length
        .checked_sub(forks)
        .filter(|&l| l >= 2)
        .ok_or_else(|| {
            BuildError::Infeasible(format!(
                "length {length} with {forks} forks leaves no grid of length >= 2"
            ))
        })?;
    // m - 1 + n - 1 = grid_length
    let m = rng.gen_range(2..=grid_length);
    let n = grid_length + 2 - m;
    let mut d = grid(m, n)?;
    let mut recipe = BuildRecipe {
        grid: [m, n],
        forks: Vec::new(),
        corners: Vec::new(),
        eyes: Vec::new(),
        seed: 0,
    };
    for _ in 0..forks {
        let cells = d.enumerate_cells()?;
        let cell = cells[rng.gen_range(0..cells.len())];
        d = insert_fork(&d, cell)?;
        recipe.forks.push(cell);
    }
    for _ in 0..corner_removals {
        let mut candidates = corners(&d)?;
        candidates.shuffle(rng);
        let mut removed = false;
        for x in candidates {
            let next = remove_corner(&d, x)?;
            if next.length() == d.length() {
                d = next;
                recipe.corners.push(x);
                removed = true;
                break;
            }
        }
        if !removed {
            break;
        }
    }
    debug_assert_eq!(d.length(), length);
    Ok((d, recipe))
}

/// [`random_slim`] followed by `eyes` eyes in uniformly chosen cells (fewer
/// if no cell is left, which happens when corner removal leaves a chain).
pub fn random_planar(
    length: usize,
    forks: usize,
    corner_removals: usize,
    eyes: usize,
    seed: u64,
) -> Result<(Diagram, BuildRecipe), BuildError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d, mut recipe) = random_slim_with(length, forks, corner_removals, &mut rng)?;
    let d = add_random_eyes(d, &mut recipe, eyes, &mut rng)?;
    recipe.seed = seed;
    Ok((d, recipe))
}

fn add_random_eyes<R: Rng>(
    mut d: Diagram,
    recipe: &mut BuildRecipe,
    eyes: usize,
    rng: &mut R,
) -> Result<Diagram, BuildError> {
    for _ in 0..eyes {
        let cells = d.enumerate_cells()?;
        if cells.is_empty() {
            break;
        }
        let cell = cells[rng.gen_range(0..cells.len())];
        d = add_eye(&d, cell)?.0;
        recipe.eyes.push(cell);
    }
    Ok(d)
}

/// A slim diagram of the given length with randomly chosen fork and corner
/// counts (`0..=length-2` forks, `0..=2` corner removals).
pub fn sample_slim<R: Rng>(length: usize, rng: &mut R) -> Result<(Diagram, BuildRecipe), BuildError> {
    let forks = rng.gen_range(0..=length.saturating_sub(2));
    let removals = rng.gen_range(0..=2);
    random_slim_with(length, forks, removals, rng)
}

/// [`sample_slim`] plus `0..=max_eyes` eyes.
pub fn sample_planar<R: Rng>(
    length: usize,
    max_eyes: usize,
    rng: &mut R,
) -> Result<(Diagram, BuildRecipe), BuildError> {
    let (d, mut recipe) = sample_slim(length, rng)?;
    let eyes = rng.gen_range(0..=max_eyes);
    let d = add_random_eyes(d, &mut recipe, eyes, rng)?;
    Ok((d, recipe))
}

/// Parameters of a seeded random test corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub count: usize,
    pub seed: u64,
    pub max_length: usize,
    pub max_size: usize,
    pub max_eyes: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            count: 200,
            seed: 7,
            max_length: 8,
            max_size: 60,
            max_eyes: 4,
        }
    }
}

/// Member `i` of the corpus: length uniform in `2..=max_length`, resampled
/// until it has at most `max_size` elements. Member `i` depends only on
/// `seed + i`, so corpora of different sizes share their prefixes.
pub fn corpus_member(spec: &CorpusSpec, i: usize) -> Result<(Diagram, BuildRecipe), BuildError> {
    let seed = spec.seed.wrapping_add(i as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GOOD_ATTEMPTS {
        let length = rng.gen_range(2..=spec.max_length.max(2));
        let (d, mut recipe) = sample_planar(length, spec.max_eyes, &mut rng)?;
        if d.size() <= spec.max_size {
            recipe.seed = seed;
            return Ok((d, recipe));
        }
    }
    Err(BuildError::GenerationExhausted {
        length: spec.max_length,
        attempts: GOOD_ATTEMPTS,
    })
}

pub fn corpus(spec: &CorpusSpec) -> Result<Vec<(Diagram, BuildRecipe)>, BuildError> {
    (0..spec.count).map(|i| corpus_member(spec, i)).collect()
}

pub const GOOD_ATTEMPTS: usize = 500;

/// Rejection-samples [`random_slim`] until the result is good.
pub fn random_good(length: usize, seed: u64) -> Result<(Diagram, BuildRecipe), BuildError> {
    random_good_with(length, &GoodnessCriteria::default(), seed)
}

pub fn random_good_with(
    length: usize,
    criteria: &GoodnessCriteria,
    seed: u64,
) -> Result<(Diagram, BuildRecipe), BuildError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GOOD_ATTEMPTS {
        let forks = if length >= 3 {
            rng.gen_range(1..=length - 2)
        } else {
            0
        };
        let removals = rng.gen_range(0..=2);
        let (d, mut recipe) = match random_slim_with(length, forks, removals, &mut rng) {
            Ok(x) => x,
            Err(BuildError::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        if is_good(&d, criteria)? {
            recipe.seed = seed;
            return Ok((d, recipe));
        }
    }
    Err(BuildError::GenerationExhausted {
        length,
        attempts: GOOD_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, s7};

    fn assert_slim_sm(d: &Diagram) {
        assert!(d.validate().is_empty());
        assert!(d.is_semimodular());
        assert_eq!(d.is_slim(), Ok(true));
    }

    #[test]
    fn grid_examples() {
        let g = grid(2, 2).unwrap();
        assert_eq!(g.size(), 4);
        assert_eq!(g.enumerate_cells().unwrap().len(), 1);
        let g = grid(3, 3).unwrap();
        assert_eq!((g.size(), g.length()), (9, 4));
        assert_eq!(g.enumerate_cells().unwrap().len(), 4);
        let g = grid(2, 5).unwrap();
        assert_eq!((g.size(), g.enumerate_cells().unwrap().len()), (10, 4));
        assert_eq!(grid(1, 3), Err(BuildError::GridTooSmall(1, 3)));
    }

    #[test]
    fn grid_counts() {
        for m in 2..6 {
            for n in 2..6 {
                let g = grid(m, n).unwrap();
                assert_eq!(g.join_irreducibles().len(), (m - 1) + (n - 1));
                assert_eq!(g.enumerate_cells().unwrap().len(), (m - 1) * (n - 1));
                assert_eq!(g.length(), m + n - 2);
            }
        }
    }

    #[test]
    fn fork_into_square_is_s7() {
        let g = grid(2, 2).unwrap();
        let cell = g.enumerate_cells().unwrap()[0];
        let d = insert_fork(&g, cell).unwrap();
        assert!(d.canonically_eq(&fixtures::s7()));
    }

    #[test]
    fn fork_into_grid32() {
        let g = grid(3, 2).unwrap();
        let cells = g.enumerate_cells().unwrap();
        // Cells are ordered by top id; the lower cell comes first.
        let lower_cell = cells[0];
        let upper_left = cells[1];
        assert_eq!(lower_cell.bottom, g.bottom());

        let d = insert_fork(&g, lower_cell).unwrap();
        assert_slim_sm(&d);
        assert_eq!((d.size(), d.length()), (9, 4));

        // The fork in the upper-left cell propagates down-right through the
        // lower cell, so one more element appears.
        let d = insert_fork(&g, upper_left).unwrap();
        assert_slim_sm(&d);
        assert_eq!((d.size(), d.length()), (10, 4));
    }

    #[test]
    fn fork_into_s7() {
        let s = fixtures::s7();
        let d = insert_fork(&s, FourCell::new(s7::XL, s7::A, s7::M, s7::TOP)).unwrap();
        assert_slim_sm(&d);
        assert_eq!(d.length(), 4);
        assert_eq!(d.size(), 11);
        assert_eq!(d.lower_covers(d.top()).len(), 4);
    }

    #[test]
    fn fork_errors() {
        let m3 = fixtures::mn(3);
        let c = m3.enumerate_cells().unwrap()[0];
        assert_eq!(insert_fork(&m3, c), Err(BuildError::NotSlim));
        let g = grid(2, 2).unwrap();
        let bogus = FourCell::new(0, 1, 2, 0);
        assert!(matches!(
            insert_fork(&g, bogus),
            Err(BuildError::Diagram(DiagramError::NotACell(_)))
        ));
    }

    #[test]
    fn corner_examples() {
        let g = grid(2, 2).unwrap();
        assert_eq!(corners(&g).unwrap(), vec![ElementId(1), ElementId(2)]);
        assert!(corners(&fixtures::s7()).unwrap().is_empty());
        assert!(corners(&fixtures::chain(4)).unwrap().is_empty());
    }

    #[test]
    fn remove_corner_examples() {
        let g = grid(2, 2).unwrap();
        let a = g.upper_covers(g.bottom())[0];
        let c = remove_corner(&g, a).unwrap();
        assert!(c.canonically_eq(&fixtures::chain(3)));

        let g = grid(3, 2).unwrap();
        // (0,1) is the only atom among the corners; (2,0) is the other one.
        assert_eq!(corners(&g).unwrap(), vec![ElementId(1), ElementId(4)]);
        let d = remove_corner(&g, ElementId(1)).unwrap();
        assert_eq!(d.size(), 5);
        assert_slim_sm(&d);

        assert_eq!(
            remove_corner(&fixtures::s7(), s7::A),
            Err(BuildError::NotACorner(s7::A))
        );
    }

    #[test]
    fn eye_examples() {
        let g = grid(2, 2).unwrap();
        let (m3, e) = add_eye(&g, g.enumerate_cells().unwrap()[0]).unwrap();
        assert!(m3.canonically_eq(&fixtures::mn(3)));
        assert_eq!(m3.eyes(), vec![e]);

        let (m4, _) = add_eye(&fixtures::mn(3), FourCell::new(0, 1, 2, 4)).unwrap();
        assert!(m4.canonically_eq(&fixtures::mn(4)));

        let (d, e) = add_eye(&fixtures::s7(), FourCell::new(s7::XL, s7::A, s7::M, s7::TOP)).unwrap();
        assert_eq!(d.eyes(), vec![e]);
        assert_eq!(d.edge_count(), fixtures::s7().edge_count() + 2);
        assert_eq!(d.enumerate_cells().unwrap().len(), 4);

        assert!(add_eye(&g, FourCell::new(0, 1, 2, 3)).is_err());
    }

    #[test]
    fn mn_examples() {
        assert_eq!(make_mn(6).unwrap().size(), 8);
        for n in 3..9 {
            let m = make_mn(n).unwrap();
            assert_eq!(m.size(), n + 2);
            let mut d = grid(2, 2).unwrap();
            for _ in 0..n - 2 {
                let c = d.enumerate_cells().unwrap()[0];
                d = add_eye(&d, c).unwrap().0;
            }
            assert!(d.canonically_eq(&m));
        }
        assert_eq!(make_mn(2), Err(BuildError::MnTooSmall(2)));
    }

    #[test]
    fn eye_then_slimming_roundtrip() {
        let s = fixtures::s7();
        for cell in s.enumerate_cells().unwrap() {
            let (d, _) = add_eye(&s, cell).unwrap();
            let (back, _) = d.full_slimming().unwrap();
            assert!(back.canonically_eq(&s));
        }
    }

    #[test]
    fn distributivity_and_decomposability() {
        assert!(is_distributive(&grid(3, 3).unwrap()));
        assert!(!is_distributive(&fixtures::s7()));
        assert!(is_glued_sum_decomposable(&fixtures::stacked_squares()));
        assert!(!is_glued_sum_decomposable(&fixtures::s7()));
        assert!(!is_glued_sum_decomposable(&grid(2, 2).unwrap()));
    }

    #[test]
    fn random_slim_examples() {
        let (d, r) = random_slim(2, 0, 0, 9).unwrap();
        assert!(d.canonically_eq(&grid(2, 2).unwrap()) || d.canonically_eq(&fixtures::chain(3)));
        assert_eq!(r.grid, [2, 2]);
        let (a, ra) = random_slim(7, 3, 2, 42).unwrap();
        let (b, rb) = random_slim(7, 3, 2, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(replay(&ra).unwrap(), a);
        assert_eq!(a.length(), 7);
        assert!(matches!(random_slim(3, 2, 0, 1), Err(BuildError::Infeasible(_))));
    }

    #[test]
    fn random_good_examples() {
        let (d, _) = random_good(6, 3).unwrap();
        assert_eq!(is_good(&d, &GoodnessCriteria::default()), Ok(true));
        assert_eq!(d.length(), 6);
        assert_eq!(random_good(6, 3).unwrap().0, d);
        assert!(matches!(
            random_good(2, 3),
            Err(BuildError::GenerationExhausted { .. })
        ));
    }

    #[test]
    fn recipe_json_shape() {
        let (_, r) = random_planar(5, 2, 1, 2, 11).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert!(v["grid"].is_array());
        assert_eq!(v["forks"][0].as_array().unwrap().len(), 4);
        assert_eq!(v["seed"], 11);
        let back: BuildRecipe = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn corpus_is_reproducible_and_bounded() {
        let spec = CorpusSpec {
            count: 30,
            ..CorpusSpec::default()
        };
        let a = corpus(&spec).unwrap();
        let b = corpus(&CorpusSpec { count: 10, ..spec }).unwrap();
        assert_eq!(a[..10], b[..]);
        for (d, recipe) in &a {
            assert!(d.size() <= 60 && d.length() <= 8);
            assert!(d.is_semimodular());
            assert_eq!(&replay(recipe).unwrap(), d);
            assert!(d.eyes().len() <= recipe.eyes.len());
        }
    }
}
