//! Small named diagrams used throughout the tests, the CLI self-checks and
//! the FFI smoke tests.

use crate::builder;
use crate::diagram::{Diagram, ElementId};

/// Element names of [`s7`].
pub mod s7 {
    use crate::diagram::ElementId;

    pub const BOT: ElementId = ElementId(0);
    pub const XL: ElementId = ElementId(1);
    pub const XR: ElementId = ElementId(2);
    pub const A: ElementId = ElementId(3);
    pub const M: ElementId = ElementId(4);
    pub const B: ElementId = ElementId(5);
    pub const TOP: ElementId = ElementId(6);
}

/// The 7-element slim semimodular lattice: the covering square with one fork.
pub fn s7() -> Diagram {
    Diagram::from_covers(&[&[1, 2], &[3, 4], &[4, 5], &[6], &[6], &[6], &[]])
        .expect("S7 fixture")
}

/// The pentagon. Not semimodular.
pub fn n5() -> Diagram {
    // 0 < a < c < 1, 0 < b < 1
    Diagram::from_covers(&[&[1, 3], &[2], &[4], &[4], &[]]).expect("N5 fixture")
}

/// `M_n`: bottom `0`, atoms `1..=n` left to right, top `n + 1`.
pub fn mn(n: usize) -> Diagram {
    builder::make_mn(n).expect("M_n fixture")
}

/// The chain with `n` elements.
pub fn chain(n: usize) -> Diagram {
    let upper: Vec<Vec<ElementId>> = (0..n)
        .map(|i| {
            if i + 1 < n {
                vec![ElementId::new(i + 1)]
            } else {
                vec![]
            }
        })
        .collect();
    Diagram::new(upper).expect("chain fixture")
}

pub fn grid(m: usize, n: usize) -> Diagram {
    builder::grid(m, n).expect("grid fixture")
}

/// Two covering squares stacked so that they share one element.
pub fn stacked_squares() -> Diagram {
    Diagram::from_covers(&[&[1, 2], &[3], &[3], &[4, 5], &[6], &[6], &[]])
        .expect("stacked squares fixture")
}
