//! Cost Hamiltonian as a per-basis-state energy table.
//!
//! The Max-Cut cost operator is diagonal in the computational basis: basis
//! state `|x>` has energy `-cut(x)`, the negated number of edges crossing the
//! partition encoded by the bits of `x`. Energies are exact integers and are
//! only converted to floating point at the simulation boundary.

use crate::error::{Error, Result};
use crate::graph::{Graph, DEFAULT_QUBIT_LIMIT};

/// Energy table of the diagonal cost Hamiltonian: `energies[x] = -cut(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostDiagonal {
    n: usize,
    energies: Vec<i32>,
}

impl CostDiagonal {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[i32] {
        &self.energies
    }

    pub fn energy(&self, index: usize) -> i32 {
        self.energies[index]
    }

    /// Smallest entry; equals minus the maximum cut of the source graph.
    pub fn min_energy(&self) -> i32 {
        self.energies.iter().copied().min().unwrap_or(0)
    }
}

/// Tabulate `-cut(x)` for every basis state of `g`.
pub fn build_cost_diagonal(g: &Graph) -> Result<CostDiagonal> {
    build_cost_diagonal_with_limit(g, DEFAULT_QUBIT_LIMIT)
}

pub fn build_cost_diagonal_with_limit(g: &Graph, limit: usize) -> Result<CostDiagonal> {
    let n = g.node_count();
    if n > limit {
        return Err(Error::SizeLimitExceeded { n, limit });
    }
    let len = 1usize << n;
    let mut energies = vec![0i32; len];
    // One linear pass per edge: subtract 1 wherever the endpoints' bits differ.
    for &(i, j) in g.edges() {
        let (i, j) = (i as usize, j as usize);
        for (x, e) in energies.iter_mut().enumerate() {
            *e -= (((x >> i) ^ (x >> j)) & 1) as i32;
        }
    }
    Ok(CostDiagonal { n, energies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cut_value, CutAssignment};

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn triangle_energies() {
        let d = build_cost_diagonal(&triangle()).unwrap();
        assert_eq!(d.energy(0b000), 0);
        assert_eq!(d.energy(0b001), -2); // vertex 0 separated cuts (0,1), (0,2)
        assert_eq!(d.energy(0b100), -2); // spec's x = 001 with vertex 2 separated
        assert_eq!(d.min_energy(), -2);
        assert_eq!(d.len(), 8);
    }

    #[test]
    fn entries_match_cut_value_and_complement_symmetry() {
        let g = crate::graph::generate_regular(8, 3, 3).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        let mask = (1usize << 8) - 1;
        for x in 0..d.len() {
            let cut = cut_value(&g, &CutAssignment::from_index(8, x as u64)).unwrap();
            assert_eq!(d.energy(x), -(cut as i32));
            assert_eq!(d.energy(x), d.energy(x ^ mask));
        }
        assert_eq!(d.energy(0), 0);
    }

    #[test]
    fn size_limit_is_enforced() {
        let g = crate::graph::generate_regular(6, 3, 1).unwrap();
        assert!(matches!(
            build_cost_diagonal_with_limit(&g, 4),
            Err(Error::SizeLimitExceeded { n: 6, limit: 4 })
        ));
    }
}
