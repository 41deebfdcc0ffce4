//! Minimal projective resolutions relative to hooks, and the signed barcodes
//! read off their terms.
//!
//! A right approximation of `M` by a sum of hook modules is assembled from
//! bases of the Hom-spaces `Hom(k_I, M)` and pruned greedily: a summand is
//! dropped whenever its structure morphism factors through the remaining ones
//! (one GF(2) solve per candidate). Minimality and the approximation property
//! are certified a posteriori. Iterating on kernels yields the resolution,
//! whose length is bounded by `2n - 2` on an n-parameter grid.

use thiserror::Error;

use super::{enumerate_hooks, hom_space, hook_morphism_exists, Grid, GridError, GridModule, Hook, SignedBarcode};
use crate::f2::F2Matrix;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExactnessViolation {
    #[error("Hom(k_I, -) not surjective in degree {degree} for hook {hook:?}")]
    HomNotSurjective { degree: usize, hook: Hook },
    #[error("differential column {summand} in degree {degree} does not land in the syzygy")]
    BrokenDifferential { degree: usize, summand: usize },
    #[error("pointwise Euler characteristic at cell {cell:?} is {got}, module has {expected}")]
    EulerMismatch { cell: Vec<usize>, expected: isize, got: isize },
    #[error("resolution does not terminate: final kernel has dimension {dim}")]
    TrailingKernel { dim: usize },
}

/// Outcome of [`check_relative_exactness`]; empty violations means the
/// resolution is a valid relative projective resolution of the module.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessReport {
    pub violations: Vec<ExactnessViolation>,
}

impl ExactnessReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A finite resolution of a grid module by sums of hook modules.
///
/// `terms[d]` lists the hook supports of the degree-`d` term.
/// `differentials[d]` is the morphism from term `d + 1` to term `d` in
/// summand coordinates (entry = coefficient of the canonical hook morphism),
/// and `augmentation[l]` is the generator image in `M(p_l)` of the l-th
/// degree-0 summand, as a column vector.
#[derive(Debug, Clone)]
pub struct HookResolution {
    pub terms: Vec<Vec<Hook>>,
    pub differentials: Vec<F2Matrix>,
    pub augmentation: Vec<F2Matrix>,
}

impl HookResolution {
    /// Homological length: index of the last term.
    pub fn length(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }
}

/// A formal direct sum of hook modules, with the local coordinate bookkeeping
/// needed to evaluate it pointwise.
struct HookSum {
    summands: Vec<Hook>,
}

impl HookSum {
    fn new(summands: Vec<Hook>) -> Self {
        Self { summands }
    }

    /// Indices of the summands supported at `cell`, in summand order; these
    /// index the local coordinates of the fiber.
    fn present(&self, cell: &[usize]) -> Vec<usize> {
        self.summands
            .iter()
            .enumerate()
            .filter(|(_, h)| h.contains(cell))
            .map(|(i, _)| i)
            .collect()
    }

    /// Internal arrow of the sum along `axis`.
    fn arrow(&self, cell: &[usize], axis: usize) -> F2Matrix {
        let mut next = cell.to_vec();
        next[axis] += 1;
        let src = self.present(cell);
        let dst = self.present(&next);
        let mut m = F2Matrix::zeros(dst.len(), src.len());
        for (c, s) in src.iter().enumerate() {
            if let Some(r) = dst.iter().position(|d| d == s) {
                m.set(r, c, true);
            }
        }
        m
    }

    /// Evaluation of the structure morphisms into `target` at one cell:
    /// column `k` is the pushforward of the k-th present summand's generator
    /// image.
    fn eval(&self, phis: &[F2Matrix], target: &GridModule, cell: &[usize]) -> F2Matrix {
        let present = self.present(cell);
        let mut m = F2Matrix::zeros(target.dim(cell), present.len());
        for (k, &l) in present.iter().enumerate() {
            let pushed = target.push(&self.summands[l].p, cell).mul(&phis[l]);
            for r in 0..pushed.rows() {
                if pushed.get(r, 0) {
                    m.set(r, k, true);
                }
            }
        }
        m
    }
}

/// One term of the tower: the approximating summands with their generator
/// images, the kernel module, and the embedding of the kernel fibers into the
/// local coordinates of the hook sum.
struct ApproximationStage {
    summands: Vec<(Hook, F2Matrix)>,
    kernel: GridModule,
    kernel_embedding: Vec<F2Matrix>,
}

/// Greedy construction of the minimal right approximation of `target` by hook
/// modules: seed with full Hom-space bases, then drop any summand whose
/// morphism factors through the others.
fn minimal_right_approximation(target: &GridModule, hooks: &[Hook]) -> Vec<(Hook, F2Matrix)> {
    let mut summands: Vec<(Hook, F2Matrix)> = Vec::new();
    for hook in hooks {
        let basis = hom_space(hook, target);
        for c in 0..basis.cols() {
            summands.push((hook.clone(), basis.column(c)));
        }
    }
    let mut kept = vec![true; summands.len()];
    for l in 0..summands.len() {
        let (hook_l, phi_l) = &summands[l];
        let mut candidates: Vec<F2Matrix> = Vec::new();
        for (j, (hook_j, phi_j)) in summands.iter().enumerate() {
            if j == l || !kept[j] || !hook_morphism_exists(hook_l, hook_j) {
                continue;
            }
            candidates.push(target.push(&hook_j.p, &hook_l.p).mul(phi_j));
        }
        if candidates.is_empty() {
            continue;
        }
        let mut mat = F2Matrix::zeros(phi_l.rows(), candidates.len());
        for (c, col) in candidates.iter().enumerate() {
            for r in 0..col.rows() {
                if col.get(r, 0) {
                    mat.set(r, c, true);
                }
            }
        }
        if mat.solve(phi_l).is_some() {
            kept[l] = false;
        }
    }
    summands
        .into_iter()
        .zip(kept)
        .filter(|(_, k)| *k)
        .map(|(s, _)| s)
        .collect()
}

/// Certifies that `summands` is a right approximation of `target` (every
/// Hom(k_I, target) is covered) and that it is minimal (no summand factors
/// through the rest).
fn certify_approximation(
    target: &GridModule,
    hooks: &[Hook],
    summands: &[(Hook, F2Matrix)],
    degree: usize,
) -> Result<(), GridError> {
    for hook in hooks {
        let want = hom_space(hook, target);
        if want.cols() == 0 {
            continue;
        }
        let mut cols = Vec::new();
        for (hook_j, phi_j) in summands {
            if hook_morphism_exists(hook, hook_j) {
                cols.push(target.push(&hook_j.p, &hook.p).mul(phi_j));
            }
        }
        let mut mat = F2Matrix::zeros(want.rows(), cols.len());
        for (c, col) in cols.iter().enumerate() {
            for r in 0..col.rows() {
                if col.get(r, 0) {
                    mat.set(r, c, true);
                }
            }
        }
        if mat.solve_many(&want).is_none() {
            return Err(GridError::NotMinimal { degree });
        }
    }
    for l in 0..summands.len() {
        let (hook_l, phi_l) = &summands[l];
        let mut cols = Vec::new();
        for (j, (hook_j, phi_j)) in summands.iter().enumerate() {
            if j != l && hook_morphism_exists(hook_l, hook_j) {
                cols.push(target.push(&hook_j.p, &hook_l.p).mul(phi_j));
            }
        }
        let mut mat = F2Matrix::zeros(phi_l.rows(), cols.len());
        for (c, col) in cols.iter().enumerate() {
            for r in 0..col.rows() {
                if col.get(r, 0) {
                    mat.set(r, c, true);
                }
            }
        }
        if mat.solve(phi_l).is_some() {
            return Err(GridError::NotMinimal { degree });
        }
    }
    Ok(())
}

/// Builds the kernel of the evaluation map of an approximation as a grid
/// module, together with the embedding of its fibers.
fn kernel_of_approximation(
    target: &GridModule,
    summands: &[(Hook, F2Matrix)],
) -> (GridModule, Vec<F2Matrix>) {
    let grid = target.grid().clone();
    let n = grid.n();
    let hooks: Vec<Hook> = summands.iter().map(|(h, _)| h.clone()).collect();
    let phis: Vec<F2Matrix> = summands.iter().map(|(_, p)| p.clone()).collect();
    let sum = HookSum::new(hooks);
    let cells = grid.cells();
    let mut embeddings = Vec::with_capacity(cells.len());
    for cell in &cells {
        let ev = sum.eval(&phis, target, cell);
        embeddings.push(ev.kernel_basis());
    }
    let dims: Vec<usize> = embeddings.iter().map(F2Matrix::cols).collect();
    let mut arrows = vec![None; cells.len() * n];
    for (i, cell) in cells.iter().enumerate() {
        for axis in 0..n {
            if cell[axis] + 1 == grid.sizes()[axis] {
                continue;
            }
            let mut next = cell.clone();
            next[axis] += 1;
            let j = grid.linear(&next);
            let pushed = sum.arrow(cell, axis).mul(&embeddings[i]);
            let coords = embeddings[j]
                .solve_many(&pushed)
                .expect("kernel is preserved by internal arrows");
            arrows[i * n + axis] = Some(coords);
        }
    }
    (GridModule::from_parts(grid, dims, arrows), embeddings)
}

fn approximate_stage(
    target: &GridModule,
    hooks: &[Hook],
    degree: usize,
) -> Result<ApproximationStage, GridError> {
    let summands = minimal_right_approximation(target, hooks);
    certify_approximation(target, hooks, &summands, degree)?;
    let (kernel, kernel_embedding) = kernel_of_approximation(target, &summands);
    Ok(ApproximationStage { summands, kernel, kernel_embedding })
}

/// Minimal projective resolution of `M` relative to hooks, by iterated
/// minimal right approximations. Supports grids with at most two parameters,
/// where the length is bounded by `2n - 2`.
pub fn minimal_hook_resolution(module: &GridModule) -> Result<HookResolution, GridError> {
    let n = module.grid().n();
    if n > 2 {
        return Err(GridError::ParameterCount { n });
    }
    let bound = 2 * n - 2;
    let hooks = enumerate_hooks(module.grid());

    let stage0 = approximate_stage(module, &hooks, 0)?;
    let mut terms = vec![stage0.summands.iter().map(|(h, _)| h.clone()).collect::<Vec<_>>()];
    let augmentation = stage0.summands.iter().map(|(_, p)| p.clone()).collect();
    let mut differentials = Vec::new();

    let mut prev_summands = stage0.summands;
    let mut prev_embedding = stage0.kernel_embedding;
    let mut kernel = stage0.kernel;
    let mut degree = 0;
    while !kernel.is_zero() {
        degree += 1;
        if degree > bound {
            return Err(GridError::ResolutionTooLong { bound });
        }
        let stage = approximate_stage(&kernel, &hooks, degree)?;
        // express each new generator image inside the previous term's fiber
        let grid = module.grid();
        let prev_sum = HookSum::new(prev_summands.iter().map(|(h, _)| h.clone()).collect());
        let mut diff = F2Matrix::zeros(prev_summands.len(), stage.summands.len());
        for (l, (hook, phi)) in stage.summands.iter().enumerate() {
            let cell_idx = grid.linear(&hook.p);
            let local = prev_embedding[cell_idx].mul(phi);
            for (row_local, &summand_idx) in prev_sum.present(&hook.p).iter().enumerate() {
                if local.get(row_local, 0) {
                    diff.set(summand_idx, l, true);
                }
            }
        }
        differentials.push(diff);
        terms.push(stage.summands.iter().map(|(h, _)| h.clone()).collect());
        prev_summands = stage.summands;
        prev_embedding = stage.kernel_embedding;
        kernel = stage.kernel;
    }

    Ok(HookResolution { terms, differentials, augmentation })
}

/// Signed barcode of a grid module: positive bars from even resolution
/// degrees, negative bars from odd degrees, drawn in the grid's coordinates.
pub fn signed_barcode(module: &GridModule) -> Result<SignedBarcode, GridError> {
    let resolution = minimal_hook_resolution(module)?;
    Ok(signed_barcode_of_resolution(&resolution, module.grid()))
}

pub(crate) fn signed_barcode_of_resolution(resolution: &HookResolution, grid: &Grid) -> SignedBarcode {
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (degree, term) in resolution.terms.iter().enumerate() {
        for hook in term {
            if degree % 2 == 0 {
                positive.push(hook.to_bar(grid, 1));
            } else {
                negative.push(hook.to_bar(grid, -1));
            }
        }
    }
    SignedBarcode::new(grid.n(), positive, negative)
}

/// Replays the resolution against `module`, verifying for every hook `I` and
/// every unrolled short exact sequence that `Hom(k_I, -)` stays exact, that
/// the differentials land in the successive syzygies and exhaust them, and
/// that the pointwise Euler characteristic reproduces the module's dimension
/// vector.
pub fn check_relative_exactness(resolution: &HookResolution, module: &GridModule) -> ExactnessReport {
    let mut violations = Vec::new();
    let grid = module.grid();
    let hooks = enumerate_hooks(grid);

    // Euler characteristic first: cheap and independent of the tower replay.
    for cell in grid.cells() {
        let mut chi = 0isize;
        for (degree, term) in resolution.terms.iter().enumerate() {
            let count = term.iter().filter(|h| h.contains(&cell)).count() as isize;
            chi += if degree % 2 == 0 { count } else { -count };
        }
        let expected = module.dim(&cell) as isize;
        if chi != expected {
            violations.push(ExactnessViolation::EulerMismatch { cell, expected, got: chi });
        }
    }

    // Replay the tower of approximations.
    let mut target = module.clone();
    let mut summands: Vec<(Hook, F2Matrix)> = resolution
        .terms
        .first()
        .map(|term| {
            term.iter()
                .cloned()
                .zip(resolution.augmentation.iter().cloned())
                .collect()
        })
        .unwrap_or_default();
    for degree in 0..resolution.terms.len() {
        // surjectivity of Hom(k_I, P_degree) -> Hom(k_I, target) for every hook
        for hook in &hooks {
            let want = hom_space(hook, &target);
            if want.cols() == 0 {
                continue;
            }
            let mut cols = Vec::new();
            for (hook_j, phi_j) in &summands {
                if hook_morphism_exists(hook, hook_j) {
                    cols.push(target.push(&hook_j.p, &hook.p).mul(phi_j));
                }
            }
            let mut mat = F2Matrix::zeros(want.rows(), cols.len());
            for (c, col) in cols.iter().enumerate() {
                for r in 0..col.rows() {
                    if col.get(r, 0) {
                        mat.set(r, c, true);
                    }
                }
            }
            if mat.solve_many(&want).is_none() {
                violations.push(ExactnessViolation::HomNotSurjective {
                    degree,
                    hook: hook.clone(),
                });
            }
        }
        let (kernel, embedding) = kernel_of_approximation(&target, &summands);
        if degree + 1 == resolution.terms.len() {
            if !kernel.is_zero() {
                violations.push(ExactnessViolation::TrailingKernel { dim: kernel.total_dim() });
            }
            break;
        }
        // reinterpret the next differential as generator images in the kernel
        let term = &resolution.terms[degree + 1];
        let diff = &resolution.differentials[degree];
        let sum = HookSum::new(summands.iter().map(|(h, _)| h.clone()).collect());
        let mut next_summands = Vec::with_capacity(term.len());
        let mut broken = false;
        for (l, hook) in term.iter().enumerate() {
            let present = sum.present(&hook.p);
            let mut local = F2Matrix::zeros(present.len(), 1);
            for (row_local, &summand_idx) in present.iter().enumerate() {
                if diff.get(summand_idx, l) {
                    local.set(row_local, 0, true);
                }
            }
            // also reject entries on summands not supported at hook.p
            for s in 0..summands.len() {
                if diff.get(s, l) && !present.contains(&s) {
                    violations.push(ExactnessViolation::BrokenDifferential { degree: degree + 1, summand: l });
                    broken = true;
                }
            }
            let cell_idx = grid.linear(&hook.p);
            match embedding[cell_idx].solve(&local) {
                Some(coords) => next_summands.push((hook.clone(), coords)),
                None => {
                    violations.push(ExactnessViolation::BrokenDifferential { degree: degree + 1, summand: l });
                    broken = true;
                }
            }
        }
        if broken {
            break;
        }
        target = kernel;
        summands = next_summands;
    }

    ExactnessReport { violations }
}
