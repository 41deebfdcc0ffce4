//! Simplicial homology over GF(2) with chosen bases, and the maps induced by
//! inclusions of subcomplexes.
//!
//! Cycle representatives are kept in the coordinates of the ambient complex,
//! so the chain-level map induced by an inclusion is the identity and the
//! homology-level map reduces to a change of basis in the larger subcomplex.

use crate::f2::F2Matrix;
use crate::filtration::{MonotoneFiltration, SimplicialComplex};
use crate::persistence::AnModule;

/// Homology of one subcomplex in one degree, with an explicit basis.
#[derive(Debug, Clone)]
pub struct HomologyBasis {
    /// Ambient ids of the simplices of the homology degree.
    chain_ids: Vec<usize>,
    /// Columns: a basis of the boundary subspace, in ambient chain coordinates.
    boundaries: F2Matrix,
    /// Columns: cycle representatives completing `boundaries` to the cycle space.
    representatives: F2Matrix,
}

impl HomologyBasis {
    pub fn dim(&self) -> usize {
        self.representatives.cols()
    }
}

/// Homology basis of the subcomplex selected by `present` (a mask over the
/// ambient complex, assumed closed under faces) in the given degree.
pub fn homology_basis(
    complex: &SimplicialComplex,
    present: &[bool],
    degree: usize,
) -> HomologyBasis {
    let chain_ids = complex.ids_of_dim(degree);
    let chain_pos: std::collections::HashMap<usize, usize> = chain_ids
        .iter()
        .enumerate()
        .map(|(pos, &id)| (id, pos))
        .collect();

    // Boundary of the present degree-q simplices, rows indexed by (q-1)-simplices.
    let present_q: Vec<usize> = chain_ids.iter().copied().filter(|&id| present[id]).collect();
    let cycles = if degree == 0 {
        // every vertex chain is a cycle
        let mut z = F2Matrix::zeros(chain_ids.len(), present_q.len());
        for (k, &id) in present_q.iter().enumerate() {
            z.set(chain_pos[&id], k, true);
        }
        z
    } else {
        let rows_below = complex.ids_of_dim(degree - 1);
        let below_pos: std::collections::HashMap<usize, usize> = rows_below
            .iter()
            .enumerate()
            .map(|(pos, &id)| (id, pos))
            .collect();
        let mut boundary = F2Matrix::zeros(rows_below.len(), present_q.len());
        for (k, &id) in present_q.iter().enumerate() {
            for f in complex.facet_ids(id) {
                boundary.set(below_pos[&f], k, true);
            }
        }
        // kernel coefficients are over present simplices; scatter to ambient coords
        let kernel = boundary.kernel_basis();
        let mut z = F2Matrix::zeros(chain_ids.len(), kernel.cols());
        for c in 0..kernel.cols() {
            for (k, &id) in present_q.iter().enumerate() {
                if kernel.get(k, c) {
                    z.set(chain_pos[&id], c, true);
                }
            }
        }
        z
    };

    // Boundaries of the present (q+1)-simplices, in ambient q-coordinates.
    let above: Vec<usize> = complex
        .ids_of_dim(degree + 1)
        .into_iter()
        .filter(|&id| present[id])
        .collect();
    let mut image = F2Matrix::zeros(chain_ids.len(), above.len());
    for (k, &id) in above.iter().enumerate() {
        for f in complex.facet_ids(id) {
            image.set(chain_pos[&f], k, true);
        }
    }
    let image_pivots = image.column_space_pivots();
    let mut boundaries = F2Matrix::zeros(chain_ids.len(), image_pivots.len());
    for (k, &c) in image_pivots.iter().enumerate() {
        for r in 0..chain_ids.len() {
            if image.get(r, c) {
                boundaries.set(r, k, true);
            }
        }
    }

    // Extend the boundary basis to the cycle space; the added columns represent homology.
    let stacked = boundaries.hstack(&cycles);
    let pivots = stacked.column_space_pivots();
    let rep_cols: Vec<usize> = pivots
        .into_iter()
        .filter(|&c| c >= boundaries.cols())
        .map(|c| c - boundaries.cols())
        .collect();
    let mut representatives = F2Matrix::zeros(chain_ids.len(), rep_cols.len());
    for (k, &c) in rep_cols.iter().enumerate() {
        for r in 0..chain_ids.len() {
            if cycles.get(r, c) {
                representatives.set(r, k, true);
            }
        }
    }

    HomologyBasis {
        chain_ids,
        boundaries,
        representatives,
    }
}

/// Matrix of the map induced on homology by an inclusion of subcomplexes.
/// `from` must be computed on a subcomplex of `to`'s, in the same degree.
///
/// # Panics
/// Panics if a representative of `from` is not a cycle of `to`'s subcomplex
/// (i.e. the subcomplexes are not nested).
pub fn induced_map(from: &HomologyBasis, to: &HomologyBasis) -> F2Matrix {
    debug_assert_eq!(from.chain_ids, to.chain_ids);
    let basis = to.boundaries.hstack(&to.representatives);
    let mut out = F2Matrix::zeros(to.dim(), from.dim());
    if from.dim() == 0 {
        return out;
    }
    let coords = basis
        .solve_many(&from.representatives)
        .expect("representative is not a cycle in the target subcomplex");
    for c in 0..from.dim() {
        for r in 0..to.dim() {
            if coords.get(to.boundaries.cols() + r, c) {
                out.set(r, c, true);
            }
        }
    }
    out
}

/// The homology module of a one-parameter filtration sampled at the given
/// levels: dimensions and induced maps between consecutive sublevel complexes,
/// computed by plain linear algebra with no reduction shortcut.
pub fn filtration_homology_module(
    filtration: &MonotoneFiltration,
    levels: &[f64],
    degree: usize,
) -> AnModule {
    assert_eq!(filtration.parameters(), 1);
    let complex = filtration.complex();
    let bases: Vec<HomologyBasis> = levels
        .iter()
        .map(|&t| {
            let present: Vec<bool> = (0..complex.len())
                .map(|id| filtration.value(id)[0] <= t)
                .collect();
            homology_basis(complex, &present, degree)
        })
        .collect();
    let dims = bases.iter().map(HomologyBasis::dim).collect();
    let maps = bases
        .windows(2)
        .map(|w| induced_map(&w[0], &w[1]))
        .collect();
    AnModule::new(dims, maps)
}
