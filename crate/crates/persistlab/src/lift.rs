//! Vectorization of (signed) barcodes and derivatives of the lifted
//! persistence map.
//!
//! A bar `[s,t)` becomes the block `(s, t, sign)` and a ray `[t, inf)` the
//! block `(t, t, sign)`; blocks are sorted lexicographically inside each sign
//! part and concatenated positive-then-negative. The map has an exact left
//! inverse [`unlift`]. For Rips filtrations of generic clouds the composite
//! cloud -> lifted barcode is differentiable and its Jacobian
//! ([`pers_jacobian`]) is assembled from the per-simplex Rips derivatives via
//! the birth/death simplex assignment of the reduction.

use thiserror::Error;

use crate::filtration::{
    rips_filtration, rips_partial, stratum_signature, FiltrationError, PointCloud,
    StratumSignature,
};
use crate::grid::SignedBarcode;
use crate::metrics::{dist1, MetricError};
use crate::persistence::{reduce, Bar, Barcode};

#[derive(Debug, Error, PartialEq)]
pub enum LiftError {
    #[error("coordinate vector length {len} is not a multiple of block size {block}")]
    BadLength { len: usize, block: usize },
    #[error("block {index} is malformed: {reason}")]
    MalformedBlock { index: usize, reason: String },
    #[error("gradient length {got} does not match {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matching distance is infinite")]
    InfiniteDistance,
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A barcode flattened to `(2n+1)`-blocks, lex-sorted within sign parts.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedBarcode {
    pub n: usize,
    /// Total number of bars; the first `positive` blocks carry sign +1.
    pub k: usize,
    pub positive: usize,
    pub coords: Vec<f64>,
}

impl LiftedBarcode {
    pub fn block_len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn block(&self, i: usize) -> &[f64] {
        let w = self.block_len();
        &self.coords[i * w..(i + 1) * w]
    }
}

fn bar_block(bar: &Bar, n: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * n + 1);
    v.extend_from_slice(&bar.birth);
    match &bar.death {
        Some(d) => v.extend_from_slice(d),
        None => v.extend_from_slice(&bar.birth),
    }
    v.push(f64::from(bar.sign));
    v
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).expect("lift coordinates are never NaN"))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn sort_blocks(blocks: &mut [(Vec<f64>, usize)]) {
    blocks.sort_by(|a, b| lex(&a.0, &b.0).then(a.1.cmp(&b.1)));
}

/// Lift of an unsigned barcode.
pub fn lift(barcode: &Barcode) -> LiftedBarcode {
    let n = barcode.n;
    let mut blocks: Vec<(Vec<f64>, usize)> = barcode
        .bars
        .iter()
        .enumerate()
        .map(|(i, b)| (bar_block(b, n), i))
        .collect();
    sort_blocks(&mut blocks);
    LiftedBarcode {
        n,
        k: blocks.len(),
        positive: blocks.len(),
        coords: blocks.into_iter().flat_map(|(b, _)| b).collect(),
    }
}

/// Lift of a signed barcode: lex-sorted positive blocks, then lex-sorted
/// negative blocks.
pub fn lift_signed(barcode: &SignedBarcode) -> LiftedBarcode {
    let n = barcode.n;
    let block_list = |bars: &[Bar]| -> Vec<(Vec<f64>, usize)> {
        let mut blocks: Vec<(Vec<f64>, usize)> = bars
            .iter()
            .enumerate()
            .map(|(i, b)| (bar_block(b, n), i))
            .collect();
        sort_blocks(&mut blocks);
        blocks
    };
    let pos = block_list(&barcode.positive);
    let neg = block_list(&barcode.negative);
    let positive = pos.len();
    let k = positive + neg.len();
    let coords = pos.into_iter().chain(neg).flat_map(|(b, _)| b).collect();
    LiftedBarcode { n, k, positive, coords }
}

/// Positions of the bars of `barcode` in the block order of [`lift`];
/// identical blocks keep their input order.
pub fn lift_order(barcode: &Barcode) -> Vec<usize> {
    let n = barcode.n;
    let mut blocks: Vec<(Vec<f64>, usize)> = barcode
        .bars
        .iter()
        .enumerate()
        .map(|(i, b)| (bar_block(b, n), i))
        .collect();
    sort_blocks(&mut blocks);
    let mut position = vec![0usize; blocks.len()];
    for (pos, (_, original)) in blocks.iter().enumerate() {
        position[*original] = pos;
    }
    position
}

/// Result of [`unlift`]: plain barcode unless some block carries sign -1.
#[derive(Debug, Clone, PartialEq)]
pub enum Unlifted {
    Unsigned(Barcode),
    Signed(SignedBarcode),
}

/// Left inverse of the lift: parses `(s, t, sign)` blocks back into bars,
/// reading `s == t` as the ray `[s, inf)`.
pub fn unlift(lifted: &LiftedBarcode) -> Result<Unlifted, LiftError> {
    let n = lifted.n;
    let w = 2 * n + 1;
    if lifted.coords.len() != w * lifted.k {
        return Err(LiftError::BadLength { len: lifted.coords.len(), block: w });
    }
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (index, chunk) in lifted.coords.chunks(w).enumerate() {
        let sign = chunk[2 * n];
        if sign != 1.0 && sign != -1.0 {
            return Err(LiftError::MalformedBlock {
                index,
                reason: format!("sign coordinate is {sign}, expected 1 or -1"),
            });
        }
        let birth = chunk[..n].to_vec();
        let death = chunk[n..2 * n].to_vec();
        let bar = if birth == death {
            Bar { birth, death: None, sign: sign as i8 }
        } else if birth.iter().zip(&death).all(|(b, d)| b <= d) {
            Bar { birth, death: Some(death), sign: sign as i8 }
        } else {
            return Err(LiftError::MalformedBlock {
                index,
                reason: format!("death {death:?} is below birth {birth:?}"),
            });
        };
        if sign > 0.0 {
            positive.push(bar);
        } else {
            negative.push(bar);
        }
    }
    if negative.is_empty() {
        Ok(Unlifted::Unsigned(Barcode::new(n, positive)))
    } else {
        Ok(Unlifted::Signed(SignedBarcode::new(n, positive, negative)))
    }
}

/// The birth/death simplex pair backing one lifted block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAssignment {
    pub birth_simplex: usize,
    pub death_simplex: Option<usize>,
}

/// Jacobian of the lifted persistence map of a Rips filtration at one cloud:
/// one row per lifted coordinate, one column per point coordinate. Sign rows
/// are identically zero and the two endpoint rows of an infinite bar agree.
#[derive(Debug, Clone)]
pub struct PersJacobian {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    /// Stratum signature the Jacobian was computed on.
    pub stratum: Vec<(usize, usize)>,
    /// Per block, the simplices carrying its finite coordinates.
    pub assignment: Vec<BlockAssignment>,
}

impl PersJacobian {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Runs reduction on the Rips filtration of a generic cloud (built up to
/// dimension `degree + 1`) and assembles the lifted degree-`degree` barcode
/// together with its Jacobian. Blocks are ordered by (lift image, birth
/// simplex, death simplex), so the assignment is deterministic under ties.
pub fn pers_jacobian(
    cloud: &PointCloud,
    degree: usize,
) -> Result<(LiftedBarcode, PersJacobian), LiftError> {
    let signature = match stratum_signature(cloud) {
        StratumSignature::Boundary => return Err(FiltrationError::StratumBoundary.into()),
        StratumSignature::Generic(sig) => sig,
    };
    let filtration = rips_filtration(cloud, degree + 1)?;
    let complex = filtration.complex().clone();
    let pairs = reduce(&filtration, degree);

    struct Entry {
        block: Vec<f64>,
        birth_simplex: usize,
        death_simplex: Option<usize>,
    }
    let mut entries: Vec<Entry> = pairs
        .pairs
        .iter()
        .filter(|p| p.degree == degree && p.death_value != Some(p.birth_value))
        .map(|p| {
            let bar = Bar {
                birth: vec![p.birth_value],
                death: p.death_value.map(|d| vec![d]),
                sign: 1,
            };
            Entry {
                block: bar_block(&bar, 1),
                birth_simplex: p.birth_simplex,
                death_simplex: p.death_simplex,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        lex(&a.block, &b.block)
            .then(a.birth_simplex.cmp(&b.birth_simplex))
            .then(a.death_simplex.cmp(&b.death_simplex))
    });

    let k = entries.len();
    let cols = cloud.len() * cloud.dim();
    let d = cloud.dim();
    let mut jacobian = PersJacobian {
        rows: 3 * k,
        cols,
        data: vec![0.0; 3 * k * cols],
        stratum: signature,
        assignment: entries
            .iter()
            .map(|e| BlockAssignment {
                birth_simplex: e.birth_simplex,
                death_simplex: e.death_simplex,
            })
            .collect(),
    };
    for (b, entry) in entries.iter().enumerate() {
        // vertices enter at the constant 0, so only positive-dimensional
        // birth simplices contribute a row
        let birth_simplex = complex.simplex(entry.birth_simplex).to_vec();
        if birth_simplex.len() > 1 {
            fill_simplex_row(jacobian.row_mut(3 * b), cloud, &birth_simplex, d)?;
        }
        match entry.death_simplex {
            Some(ds) => {
                let death_simplex = complex.simplex(ds).to_vec();
                fill_simplex_row(jacobian.row_mut(3 * b + 1), cloud, &death_simplex, d)?;
            }
            None => {
                // infinite bar: the second endpoint row copies the first
                let birth_row = jacobian.row_mut(3 * b).to_vec();
                jacobian.row_mut(3 * b + 1).copy_from_slice(&birth_row);
            }
        }
        // sign row stays zero
    }
    let coords = entries.into_iter().flat_map(|e| e.block).collect::<Vec<f64>>();
    Ok((LiftedBarcode { n: 1, k, positive: k, coords }, jacobian))
}

fn fill_simplex_row(
    row: &mut [f64],
    cloud: &PointCloud,
    simplex: &[usize],
    d: usize,
) -> Result<(), LiftError> {
    for &label in simplex {
        let partial = rips_partial(cloud, simplex, label)?;
        row[(label - 1) * d..label * d].copy_from_slice(&partial);
    }
    Ok(())
}

/// Sum of the lengths of the finite bars of a one-parameter barcode.
///
/// # Panics
/// Panics if the barcode has more than one parameter.
pub fn total_persistence(barcode: &Barcode) -> f64 {
    assert_eq!(barcode.n, 1, "total persistence is a 1-parameter functional");
    barcode
        .bars
        .iter()
        .filter_map(|b| b.death.as_ref().map(|d| d[0] - b.birth[0]))
        .sum()
}

/// Gradient of total persistence through the lift: the pattern `(-1, 1, 0)`
/// repeated per block. Infinite bars contribute zero because their two
/// lifted endpoints coincide.
pub fn total_persistence_gradient(k: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(3 * k);
    for _ in 0..k {
        g.extend_from_slice(&[-1.0, 1.0, 0.0]);
    }
    g
}

/// Chain rule: the loss gradient (a row vector over lifted coordinates)
/// times the Jacobian, producing the gradient in cloud coordinates.
pub fn chain_rule(loss_grad: &[f64], jacobian: &PersJacobian) -> Result<Vec<f64>, LiftError> {
    if loss_grad.len() != jacobian.rows {
        return Err(LiftError::DimensionMismatch {
            expected: jacobian.rows,
            got: loss_grad.len(),
        });
    }
    let mut out = vec![0.0; jacobian.cols];
    for (r, &g) in loss_grad.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        for (c, slot) in out.iter_mut().enumerate() {
            *slot += g * jacobian.get(r, c);
        }
    }
    Ok(out)
}

/// Subgradient of `B -> dist1(B, target)` in the lifted coordinates of `B`
/// (one parameter), differentiating the optimal matching's cost with the
/// matching held fixed. Matched bars get a unit entry on the endpoint
/// achieving the sup-norm cost (ties resolved toward the birth coordinate);
/// deleted bars get the half-length gradient `(-1/2, 1/2, 0)`.
pub fn dist1_loss_gradient(barcode: &Barcode, target: &Barcode) -> Result<Vec<f64>, LiftError> {
    assert_eq!(barcode.n, 1, "dist1 gradients are 1-parameter");
    let (value, matching) = dist1(barcode, target)?;
    if !value.is_finite() {
        return Err(LiftError::InfiniteDistance);
    }
    let order = lift_order(barcode);
    let mut grad = vec![0.0; 3 * barcode.len()];
    for &(i, j) in &matching.pairs {
        let (a, b) = (&barcode.bars[i], &target.bars[j]);
        let block = order[i] * 3;
        let shift_birth = (a.birth[0] - b.birth[0]).abs();
        let shift_death = match (&a.death, &b.death) {
            (Some(da), Some(db)) => Some((da[0] - db[0]).abs()),
            (None, None) => None,
            _ => unreachable!("a finite matching never pairs finite with infinite"),
        };
        let shift = shift_death.map_or(shift_birth, |sd| shift_birth.max(sd));
        // a matched pair may still realize its cost as two deletions
        let deletion = match (&a.death, &b.death) {
            (Some(da), Some(db)) => {
                Some(((da[0] - a.birth[0]) / 2.0).max((db[0] - b.birth[0]) / 2.0))
            }
            _ => None,
        };
        if let Some(del) = deletion {
            if del < shift {
                let own = (a.death.as_ref().unwrap()[0] - a.birth[0]) / 2.0;
                if own >= del {
                    grad[block] = -0.5;
                    grad[block + 1] = 0.5;
                }
                continue;
            }
        }
        let on_birth = shift_death.is_none_or(|sd| shift_birth >= sd);
        if on_birth {
            if shift_birth > 0.0 {
                grad[block] = (a.birth[0] - b.birth[0]).signum();
            }
        } else {
            grad[block + 1] =
                (a.death.as_ref().unwrap()[0] - b.death.as_ref().unwrap()[0]).signum();
        }
    }
    for &i in &matching.unmatched_left {
        let block = order[i] * 3;
        grad[block] = -0.5;
        grad[block + 1] = 0.5;
    }
    Ok(grad)
}
