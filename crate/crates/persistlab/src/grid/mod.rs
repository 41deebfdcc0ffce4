//! Multi-parameter persistence modules on finite grids.
//!
//! A [`GridModule`] stores pointwise dimensions and one GF(2) matrix per
//! covering pair of cells; commutativity of every square is validated at
//! construction. Modules are built from two-parameter filtrations
//! ([`grid_homology_module`]) or from free presentations
//! ([`GridModule::from_free_presentation`]).
//!
//! Invariants are read off through [`Hook`] intervals: [`hom_space`] computes
//! `Hom(k_I, M)` for a hook `I`, and the resolution machinery in this module's
//! children turns those Hom-spaces into minimal relative projective
//! resolutions and [`SignedBarcode`]s.

mod endo;
mod resolution;

pub use endo::{is_indecomposable, is_indecomposable_with_cap, DEFAULT_ENDO_CAP};
pub use resolution::{
    check_relative_exactness, minimal_hook_resolution, signed_barcode, ExactnessReport,
    ExactnessViolation, HookResolution,
};

use std::collections::HashMap;

use thiserror::Error;

use crate::f2::F2Matrix;
use crate::filtration::MonotoneFiltration;
use crate::homology::{homology_basis, induced_map};
use crate::persistence::{Bar, Barcode};

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("arrow at cell {cell:?} along axis {axis} has shape {got:?}, expected {expected:?}")]
    ArrowShape {
        cell: Vec<usize>,
        axis: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("square at cell {cell:?} over axes {axes:?} does not commute")]
    Commutativity { cell: Vec<usize>, axes: (usize, usize) },
    #[error("expected {expected} cell dimensions, got {got}")]
    DimCount { expected: usize, got: usize },
    #[error("resolution exceeded the global-dimension bound {bound}")]
    ResolutionTooLong { bound: usize },
    #[error("total dimension {total_dim} exceeds the configured cap {cap}")]
    CapExceeded { total_dim: usize, cap: usize },
    #[error("operation supports at most 2 parameters, got {n}")]
    ParameterCount { n: usize },
    #[error("internal: minimality certificate failed in degree {degree}")]
    NotMinimal { degree: usize },
}

/// A finite product grid, optionally carrying real coordinates per axis level.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    sizes: Vec<usize>,
    coords: Option<Vec<Vec<f64>>>,
}

impl Grid {
    /// # Panics
    /// Panics if any size is zero or the coordinate table does not match.
    pub fn new(sizes: Vec<usize>) -> Self {
        assert!(!sizes.is_empty() && sizes.iter().all(|&s| s > 0));
        Self { sizes, coords: None }
    }

    pub fn with_coords(sizes: Vec<usize>, coords: Vec<Vec<f64>>) -> Self {
        assert_eq!(sizes.len(), coords.len());
        for (s, c) in sizes.iter().zip(&coords) {
            assert_eq!(*s, c.len(), "coordinate count must match axis size");
        }
        Self { sizes, coords: Some(coords) }
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn cell_count(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Linear index with axis 0 slowest.
    pub fn linear(&self, cell: &[usize]) -> usize {
        debug_assert_eq!(cell.len(), self.n());
        let mut idx = 0;
        for (i, &c) in cell.iter().enumerate() {
            debug_assert!(c < self.sizes[i]);
            idx = idx * self.sizes[i] + c;
        }
        idx
    }

    pub fn cell_of(&self, mut linear: usize) -> Vec<usize> {
        let mut cell = vec![0; self.n()];
        for i in (0..self.n()).rev() {
            cell[i] = linear % self.sizes[i];
            linear /= self.sizes[i];
        }
        cell
    }

    /// All cells in linear order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        (0..self.cell_count()).map(|i| self.cell_of(i)).collect()
    }

    pub fn le(a: &[usize], b: &[usize]) -> bool {
        a.iter().zip(b).all(|(x, y)| x <= y)
    }

    /// Real coordinates of a cell: the per-axis coordinates when present,
    /// otherwise the integer grades.
    pub fn coord_of(&self, cell: &[usize]) -> Vec<f64> {
        match &self.coords {
            Some(cs) => cell.iter().enumerate().map(|(i, &c)| cs[i][c]).collect(),
            None => cell.iter().map(|&c| c as f64).collect(),
        }
    }
}

/// A persistence module on a finite grid: one vector space dimension per cell
/// and one matrix per covering pair, with all squares commuting.
#[derive(Debug, Clone)]
pub struct GridModule {
    grid: Grid,
    dims: Vec<usize>,
    /// `arrows[cell * n + axis]`, absent on the boundary along that axis.
    arrows: Vec<Option<F2Matrix>>,
}

impl GridModule {
    pub fn new(
        grid: Grid,
        dims: Vec<usize>,
        arrow_map: HashMap<(Vec<usize>, usize), F2Matrix>,
    ) -> Result<Self, GridError> {
        if dims.len() != grid.cell_count() {
            return Err(GridError::DimCount {
                expected: grid.cell_count(),
                got: dims.len(),
            });
        }
        let n = grid.n();
        let mut arrows = vec![None; grid.cell_count() * n];
        for cell in grid.cells() {
            for axis in 0..n {
                if cell[axis] + 1 == grid.sizes[axis] {
                    continue;
                }
                let mut next = cell.clone();
                next[axis] += 1;
                let expected = (dims[grid.linear(&next)], dims[grid.linear(&cell)]);
                let m = arrow_map
                    .get(&(cell.clone(), axis))
                    .cloned()
                    .unwrap_or_else(|| F2Matrix::zeros(expected.0, expected.1));
                if (m.rows(), m.cols()) != expected {
                    return Err(GridError::ArrowShape {
                        cell,
                        axis,
                        expected,
                        got: (m.rows(), m.cols()),
                    });
                }
                arrows[grid.linear(&cell) * n + axis] = Some(m);
            }
        }
        let module = Self { grid, dims, arrows };
        module.validate_commutativity()?;
        Ok(module)
    }

    /// Builds a module from parts already known to commute.
    pub(crate) fn from_parts(grid: Grid, dims: Vec<usize>, arrows: Vec<Option<F2Matrix>>) -> Self {
        let m = Self { grid, dims, arrows };
        debug_assert!(m.validate_commutativity().is_ok());
        m
    }

    pub fn zero(grid: Grid) -> Self {
        let n = grid.n();
        let cells = grid.cell_count();
        let dims = vec![0; cells];
        let mut arrows = vec![None; cells * n];
        for (i, cell) in grid.cells().iter().enumerate() {
            for axis in 0..n {
                if cell[axis] + 1 < grid.sizes[axis] {
                    arrows[i * n + axis] = Some(F2Matrix::zeros(0, 0));
                }
            }
        }
        Self { grid, dims, arrows }
    }

    /// The interval module supported on a hook.
    pub fn interval(grid: Grid, hook: &Hook) -> Self {
        let n = grid.n();
        let dims: Vec<usize> = grid
            .cells()
            .iter()
            .map(|c| usize::from(hook.contains(c)))
            .collect();
        let mut arrows = vec![None; grid.cell_count() * n];
        for (i, cell) in grid.cells().iter().enumerate() {
            for axis in 0..n {
                if cell[axis] + 1 == grid.sizes[axis] {
                    continue;
                }
                let mut next = cell.clone();
                next[axis] += 1;
                let (sd, td) = (dims[i], dims[grid.linear(&next)]);
                let mut m = F2Matrix::zeros(td, sd);
                if sd == 1 && td == 1 {
                    m.set(0, 0, true);
                }
                arrows[i * n + axis] = Some(m);
            }
        }
        Self { grid, dims, arrows }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self, cell: &[usize]) -> usize {
        self.dims[self.grid.linear(cell)]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// The arrow leaving `cell` along `axis`.
    ///
    /// # Panics
    /// Panics if the cell is on the grid boundary along that axis.
    pub fn arrow(&self, cell: &[usize], axis: usize) -> &F2Matrix {
        self.arrows[self.grid.linear(cell) * self.grid.n() + axis]
            .as_ref()
            .expect("arrow requested across the grid boundary")
    }

    fn validate_commutativity(&self) -> Result<(), GridError> {
        let n = self.grid.n();
        for cell in self.grid.cells() {
            for i in 0..n {
                for j in (i + 1)..n {
                    if cell[i] + 1 == self.grid.sizes[i] || cell[j] + 1 == self.grid.sizes[j] {
                        continue;
                    }
                    let mut via_i = cell.clone();
                    via_i[i] += 1;
                    let mut via_j = cell.clone();
                    via_j[j] += 1;
                    let path_i = self.arrow(&via_i, j).mul(self.arrow(&cell, i));
                    let path_j = self.arrow(&via_j, i).mul(self.arrow(&cell, j));
                    if path_i != path_j {
                        return Err(GridError::Commutativity { cell, axes: (i, j) });
                    }
                }
            }
        }
        Ok(())
    }

    /// Composite map from `from` to `to` (`from <= to`); path independent by
    /// commutativity.
    ///
    /// # Panics
    /// Panics unless `from <= to` in the product order.
    pub fn push(&self, from: &[usize], to: &[usize]) -> F2Matrix {
        assert!(Grid::le(from, to), "push requires comparable cells");
        let mut m = F2Matrix::identity(self.dim(from));
        let mut cur = from.to_vec();
        for axis in 0..self.grid.n() {
            while cur[axis] < to[axis] {
                m = self.arrow(&cur, axis).mul(&m);
                cur[axis] += 1;
            }
        }
        m
    }

    /// Block-diagonal direct sum; the grids must agree.
    ///
    /// # Panics
    /// Panics if the grids differ.
    pub fn direct_sum(&self, other: &GridModule) -> GridModule {
        assert_eq!(self.grid, other.grid, "direct sum needs a common grid");
        let n = self.grid.n();
        let dims: Vec<usize> = self
            .dims
            .iter()
            .zip(&other.dims)
            .map(|(a, b)| a + b)
            .collect();
        let mut arrows = vec![None; self.grid.cell_count() * n];
        for (i, cell) in self.grid.cells().iter().enumerate() {
            for axis in 0..n {
                if cell[axis] + 1 == self.grid.sizes[axis] {
                    continue;
                }
                let a = self.arrow(cell, axis);
                let b = other.arrow(cell, axis);
                let mut m = F2Matrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
                for r in 0..a.rows() {
                    for c in 0..a.cols() {
                        if a.get(r, c) {
                            m.set(r, c, true);
                        }
                    }
                }
                for r in 0..b.rows() {
                    for c in 0..b.cols() {
                        if b.get(r, c) {
                            m.set(a.rows() + r, a.cols() + c, true);
                        }
                    }
                }
                arrows[i * n + axis] = Some(m);
            }
        }
        GridModule::from_parts(self.grid.clone(), dims, arrows)
    }

    /// Cokernel presentation: generators are free summands `k_[cell, inf)` and
    /// each relation is an element of the free module at its cell. Useful for
    /// generating random finitely presented modules with bounded pointwise
    /// dimension.
    pub fn from_free_presentation(
        grid: Grid,
        generators: &[Vec<usize>],
        relations: &[(Vec<usize>, Vec<u8>)],
    ) -> GridModule {
        let n = grid.n();
        // generators visible at a cell, as indices into `generators`
        let visible = |cell: &[usize]| -> Vec<usize> {
            generators
                .iter()
                .enumerate()
                .filter(|(_, g)| Grid::le(g, cell))
                .map(|(i, _)| i)
                .collect()
        };
        // relation span and chosen complement basis per cell
        let mut rel_basis: Vec<F2Matrix> = Vec::new();
        let mut quot_basis: Vec<F2Matrix> = Vec::new();
        for cell in grid.cells() {
            let vis = visible(&cell);
            let pos: HashMap<usize, usize> = vis.iter().enumerate().map(|(p, &g)| (g, p)).collect();
            let mut rel_cols = Vec::new();
            for (rc, coeffs) in relations {
                if Grid::le(rc, &cell) {
                    let mut col = vec![0u8; vis.len()];
                    for (gi, &bit) in coeffs.iter().enumerate() {
                        if bit % 2 == 1 {
                            if let Some(&p) = pos.get(&gi) {
                                col[p] = 1;
                            }
                        }
                    }
                    rel_cols.push(col);
                }
            }
            let mut rel = F2Matrix::zeros(vis.len(), rel_cols.len());
            for (c, col) in rel_cols.iter().enumerate() {
                for (r, &bit) in col.iter().enumerate() {
                    if bit == 1 {
                        rel.set(r, c, true);
                    }
                }
            }
            let rel_pivots = rel.column_space_pivots();
            let mut rbasis = F2Matrix::zeros(vis.len(), rel_pivots.len());
            for (k, &c) in rel_pivots.iter().enumerate() {
                for r in 0..vis.len() {
                    if rel.get(r, c) {
                        rbasis.set(r, k, true);
                    }
                }
            }
            // extend to a basis of the free fiber with unit vectors
            let idty = F2Matrix::identity(vis.len());
            let stacked = rbasis.hstack(&idty);
            let pivots = stacked.column_space_pivots();
            let extra: Vec<usize> = pivots
                .into_iter()
                .filter(|&c| c >= rbasis.cols())
                .map(|c| c - rbasis.cols())
                .collect();
            let mut qbasis = F2Matrix::zeros(vis.len(), extra.len());
            for (k, &c) in extra.iter().enumerate() {
                qbasis.set(c, k, true);
            }
            rel_basis.push(rbasis);
            quot_basis.push(qbasis);
        }
        let dims: Vec<usize> = quot_basis.iter().map(F2Matrix::cols).collect();
        let mut arrows = vec![None; grid.cell_count() * n];
        for (i, cell) in grid.cells().iter().enumerate() {
            let vis_src = visible(cell);
            for axis in 0..n {
                if cell[axis] + 1 == grid.sizes[axis] {
                    continue;
                }
                let mut next = cell.clone();
                next[axis] += 1;
                let j = grid.linear(&next);
                let vis_dst = visible(&next);
                let dst_pos: HashMap<usize, usize> =
                    vis_dst.iter().enumerate().map(|(p, &g)| (g, p)).collect();
                // include the chosen complement basis into the target fiber
                let mut incl = F2Matrix::zeros(vis_dst.len(), quot_basis[i].cols());
                for c in 0..quot_basis[i].cols() {
                    for (r, &g) in vis_src.iter().enumerate() {
                        if quot_basis[i].get(r, c) {
                            incl.set(dst_pos[&g], c, true);
                        }
                    }
                }
                // reduce modulo the target relations
                let basis = rel_basis[j].hstack(&quot_basis[j]);
                let coords = basis
                    .solve_many(&incl)
                    .expect("free presentation fiber bases must span");
                let mut m = F2Matrix::zeros(quot_basis[j].cols(), quot_basis[i].cols());
                for c in 0..quot_basis[i].cols() {
                    for r in 0..quot_basis[j].cols() {
                        if coords.get(rel_basis[j].cols() + r, c) {
                            m.set(r, c, true);
                        }
                    }
                }
                arrows[i * n + axis] = Some(m);
            }
        }
        GridModule::from_parts(grid, dims, arrows)
    }
}

/// A hook interval `[p, inf) \ [q, inf)` on a grid; `q = None` encodes the
/// principal upset `[p, inf)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hook {
    pub p: Vec<usize>,
    pub q: Option<Vec<usize>>,
}

impl Hook {
    pub fn upset(p: Vec<usize>) -> Self {
        Self { p, q: None }
    }

    pub fn proper(p: Vec<usize>, q: Vec<usize>) -> Self {
        debug_assert!(Grid::le(&p, &q) && p != q, "hook needs p < q");
        Self { p, q: Some(q) }
    }

    pub fn contains(&self, cell: &[usize]) -> bool {
        Grid::le(&self.p, cell) && self.q.as_ref().is_none_or(|q| !Grid::le(q, cell))
    }

    /// The bar drawn by this hook in the grid's real coordinates.
    pub fn to_bar(&self, grid: &Grid, sign: i8) -> Bar {
        Bar {
            birth: grid.coord_of(&self.p),
            death: self.q.as_ref().map(|q| grid.coord_of(q)),
            sign,
        }
    }
}

/// Whether a nonzero morphism `k_from -> k_to` exists between hook modules:
/// the generator cell of `from` must lie in `to`'s support, and the relation
/// cell of `from` (when finite) must lie outside it.
pub(crate) fn hook_morphism_exists(from: &Hook, to: &Hook) -> bool {
    to.contains(&from.p) && from.q.as_ref().is_none_or(|q| !to.contains(q))
}

/// All hooks with `p` in the grid and `q` in the grid or infinite, in
/// lexicographic (p, q) order with upsets after proper hooks at the same `p`.
pub fn enumerate_hooks(grid: &Grid) -> Vec<Hook> {
    let cells = grid.cells();
    let mut hooks = Vec::new();
    for p in &cells {
        for q in &cells {
            if Grid::le(p, q) && p != q {
                hooks.push(Hook::proper(p.clone(), q.clone()));
            }
        }
        hooks.push(Hook::upset(p.clone()));
    }
    hooks.sort_by(|a, b| {
        (&a.p, a.q.is_none(), &a.q).cmp(&(&b.p, b.q.is_none(), &b.q))
    });
    hooks
}

/// Basis of `Hom(k_I, M)` as columns of a matrix over `M(p)`: the kernel of
/// the composite `M(p <= q)`, or all of `M(p)` for a principal upset.
pub fn hom_space(hook: &Hook, module: &GridModule) -> F2Matrix {
    match &hook.q {
        None => F2Matrix::identity(module.dim(&hook.p)),
        Some(q) => module.push(&hook.p, q).kernel_basis(),
    }
}

/// An ordered pair of bar multisets carrying opposite signs, read off the even
/// and odd terms of a minimal hook-relative resolution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignedBarcode {
    pub n: usize,
    pub positive: Vec<Bar>,
    pub negative: Vec<Bar>,
}

impl SignedBarcode {
    pub fn new(n: usize, positive: Vec<Bar>, negative: Vec<Bar>) -> Self {
        let positive = positive.into_iter().map(|b| b.with_sign(1)).collect();
        let negative = negative.into_iter().map(|b| b.with_sign(-1)).collect();
        Self { n, positive, negative }
    }

    pub fn positive_barcode(&self) -> Barcode {
        Barcode::new(self.n, self.positive.clone())
    }

    pub fn negative_barcode(&self) -> Barcode {
        Barcode::new(self.n, self.negative.clone())
    }

    pub fn same_multiset(&self, other: &SignedBarcode) -> bool {
        self.positive_barcode().same_multiset(&other.positive_barcode())
            && self.negative_barcode().same_multiset(&other.negative_barcode())
    }

    /// Cancels matched positive/negative pairs with identical supports, the
    /// reduction performed in the relative Grothendieck group.
    pub fn cancel_matched_pairs(&self) -> SignedBarcode {
        type Key = (Vec<u64>, Option<Vec<u64>>);
        let key = |b: &Bar| -> Key {
            (
                b.birth.iter().map(|x| x.to_bits()).collect(),
                b.death
                    .as_ref()
                    .map(|d| d.iter().map(|x| x.to_bits()).collect()),
            )
        };
        let mut neg: Vec<(Key, Bar)> = self.negative.iter().map(|b| (key(b), b.clone())).collect();
        let mut positive = Vec::new();
        for b in &self.positive {
            if let Some(i) = neg.iter().position(|(k, _)| *k == key(b)) {
                neg.swap_remove(i);
            } else {
                positive.push(b.clone());
            }
        }
        let negative = neg.into_iter().map(|(_, b)| b).collect();
        SignedBarcode::new(self.n, positive, negative)
    }
}

/// The homology module of a multi-parameter filtration sampled on a grid of
/// levels (one sorted coordinate list per axis).
pub fn grid_homology_module(
    filtration: &MonotoneFiltration,
    levels: &[Vec<f64>],
    degree: usize,
) -> GridModule {
    let complex = filtration.complex();
    assert!(
        complex.is_empty() || filtration.parameters() == levels.len(),
        "one level list per parameter"
    );
    let grid = Grid::with_coords(levels.iter().map(Vec::len).collect(), levels.to_vec());
    let n = grid.n();
    let bases: Vec<crate::homology::HomologyBasis> = grid
        .cells()
        .iter()
        .map(|cell| {
            let coord = grid.coord_of(cell);
            let present: Vec<bool> = (0..complex.len())
                .map(|id| {
                    filtration
                        .value(id)
                        .iter()
                        .zip(&coord)
                        .all(|(v, t)| v <= t)
                })
                .collect();
            homology_basis(complex, &present, degree)
        })
        .collect();
    let dims: Vec<usize> = bases.iter().map(crate::homology::HomologyBasis::dim).collect();
    let mut arrows = vec![None; grid.cell_count() * n];
    for (i, cell) in grid.cells().iter().enumerate() {
        for axis in 0..n {
            if cell[axis] + 1 == grid.sizes()[axis] {
                continue;
            }
            let mut next = cell.clone();
            next[axis] += 1;
            let j = grid.linear(&next);
            arrows[i * n + axis] = Some(induced_map(&bases[i], &bases[j]));
        }
    }
    GridModule::from_parts(grid, dims, arrows)
}

#[cfg(test)]
pub(crate) fn eq1_module() -> GridModule {
    // the indecomposable 3x3 module with dims 3,3,2 / 3,2,1 / 2,1,1 (bottom-up)
    let grid = Grid::new(vec![3, 3]);
    let dims_by_cell: Vec<((usize, usize), usize)> = vec![
        ((0, 0), 3),
        ((1, 0), 3),
        ((2, 0), 2),
        ((0, 1), 3),
        ((1, 1), 2),
        ((2, 1), 1),
        ((0, 2), 2),
        ((1, 2), 1),
        ((2, 2), 1),
    ];
    let mut dims = vec![0; grid.cell_count()];
    for ((x, y), d) in &dims_by_cell {
        dims[grid.linear(&[*x, *y])] = *d;
    }
    let mut arrows = HashMap::new();
    let m = |rows: &[Vec<u8>]| F2Matrix::from_rows(rows);
    // horizontal arrows (axis 0)
    arrows.insert((vec![0, 0], 0), F2Matrix::identity(3));
    arrows.insert((vec![1, 0], 0), m(&[vec![1, 1, 0], vec![0, 0, 1]]));
    arrows.insert((vec![0, 1], 0), m(&[vec![1, 0, 1], vec![0, 1, 0]]));
    arrows.insert((vec![1, 1], 0), m(&[vec![1, 1]]));
    arrows.insert((vec![0, 2], 0), m(&[vec![1, 1]]));
    arrows.insert((vec![1, 2], 0), F2Matrix::identity(1));
    // vertical arrows (axis 1)
    arrows.insert((vec![0, 0], 1), F2Matrix::identity(3));
    arrows.insert((vec![1, 0], 1), m(&[vec![1, 0, 1], vec![0, 1, 0]]));
    arrows.insert((vec![2, 0], 1), m(&[vec![1, 1]]));
    arrows.insert((vec![0, 1], 1), m(&[vec![1, 0, 0], vec![0, 1, 1]]));
    arrows.insert((vec![1, 1], 1), m(&[vec![1, 1]]));
    arrows.insert((vec![2, 1], 1), F2Matrix::identity(1));
    GridModule::new(grid, dims, arrows).expect("paper module must commute")
}
