//! Indecomposability of grid modules via their endomorphism algebra.
//!
//! The endomorphism algebra is the solution space of the commuting-tuple
//! equations, computed by one GF(2) kernel. A module is decomposable exactly
//! when that algebra contains an idempotent other than 0 and 1, i.e. when it
//! is not local. The search looks for witnesses among basis elements, their
//! pairwise sums, and seeded random combinations; a witness splits the module
//! through the Fitting decomposition of an endomorphism or through a coprime
//! factor of its minimal polynomial, so every `false` verdict carries a
//! certificate. `true` verdicts are exhaustive over the sampled elements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GridError, GridModule};
use crate::f2::F2Matrix;

/// Default cap on the total pointwise dimension.
pub const DEFAULT_ENDO_CAP: usize = 30;

/// [`is_indecomposable_with_cap`] with the default cap.
pub fn is_indecomposable(module: &GridModule) -> Result<bool, GridError> {
    is_indecomposable_with_cap(module, DEFAULT_ENDO_CAP)
}

/// Whether the module has no direct-sum decomposition into nonzero summands.
/// The zero module counts as decomposable by convention.
pub fn is_indecomposable_with_cap(module: &GridModule, cap: usize) -> Result<bool, GridError> {
    let total = module.total_dim();
    if total > cap {
        return Err(GridError::CapExceeded { total_dim: total, cap });
    }
    if total == 0 {
        return Ok(false);
    }
    let basis = endomorphism_basis(module);
    if basis.len() == 1 {
        return Ok(true);
    }
    let dim = total;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1dec0);
    let mut candidates: Vec<F2Matrix> = basis.clone();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            candidates.push(add(&basis[i], &basis[j]));
        }
    }
    for _ in 0..64 {
        let mut x = F2Matrix::zeros(dim, dim);
        for b in &basis {
            if rng.gen_bool(0.5) {
                x = add(&x, b);
            }
        }
        candidates.push(x);
    }
    for x in &candidates {
        if x.is_zero() || *x == F2Matrix::identity(dim) {
            continue;
        }
        if splits(x, dim, &mut rng) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Basis of `End(M)` as block-diagonal matrices on the total space of the
/// module (cells concatenated in linear order).
pub(crate) fn endomorphism_basis(module: &GridModule) -> Vec<F2Matrix> {
    let grid = module.grid();
    let n = grid.n();
    let cells = grid.cells();
    let dims: Vec<usize> = cells.iter().map(|c| module.dim(c)).collect();
    let offsets: Vec<usize> = {
        let mut acc = 0;
        let mut v = Vec::with_capacity(cells.len());
        for &d in &dims {
            v.push(acc);
            acc += d * d;
        }
        v
    };
    let unknowns = offsets.last().copied().unwrap_or(0) + dims.last().map_or(0, |d| d * d);

    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        for axis in 0..n {
            if cell[axis] + 1 == grid.sizes()[axis] {
                continue;
            }
            let mut next = cell.clone();
            next[axis] += 1;
            let j = grid.linear(&next);
            let a = module.arrow(cell, axis);
            // E_next * A - A * E_cell = 0, entry by entry
            for r in 0..dims[j] {
                for c in 0..dims[i] {
                    let mut row = Vec::new();
                    for k in 0..dims[j] {
                        if a.get(k, c) {
                            row.push(offsets[j] + r * dims[j] + k);
                        }
                    }
                    for k in 0..dims[i] {
                        if a.get(r, k) {
                            row.push(offsets[i] + k * dims[i] + c);
                        }
                    }
                    if !row.is_empty() {
                        rows.push(row);
                    }
                }
            }
        }
    }
    let mut system = F2Matrix::zeros(rows.len(), unknowns);
    for (r, cols) in rows.iter().enumerate() {
        for &c in cols {
            let flip = system.get(r, c);
            system.set(r, c, !flip);
        }
    }
    let kernel = system.kernel_basis();

    let block_offsets: Vec<usize> = {
        let mut acc = 0;
        let mut v = Vec::with_capacity(cells.len());
        for &d in &dims {
            v.push(acc);
            acc += d;
        }
        v
    };
    let total: usize = dims.iter().sum();
    (0..kernel.cols())
        .map(|col| {
            let mut m = F2Matrix::zeros(total, total);
            for (i, &d) in dims.iter().enumerate() {
                for r in 0..d {
                    for c in 0..d {
                        if kernel.get(offsets[i] + r * d + c, col) {
                            m.set(block_offsets[i] + r, block_offsets[i] + c, true);
                        }
                    }
                }
            }
            m
        })
        .collect()
}

fn add(a: &F2Matrix, b: &F2Matrix) -> F2Matrix {
    let mut out = a.clone();
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            if b.get(r, c) {
                let flip = out.get(r, c);
                out.set(r, c, !flip);
            }
        }
    }
    out
}

/// Whether the endomorphism `x` exhibits a proper direct-sum splitting of the
/// underlying module, via Fitting or via a coprime minimal-polynomial split.
fn splits(x: &F2Matrix, dim: usize, rng: &mut ChaCha8Rng) -> bool {
    for candidate in [x.clone(), add(x, &F2Matrix::identity(dim))] {
        // Fitting: V = ker(y) + im(y) for y = x^(2^k) with 2^k >= dim
        let mut y = candidate.clone();
        let mut pow = 1usize;
        while pow < dim {
            y = y.mul(&y);
            pow *= 2;
        }
        let r = y.rank();
        if r > 0 && r < dim {
            return true;
        }
    }
    // minimal-polynomial route: a coprime factorization splits V by CRT
    let mp = minimal_polynomial(x, dim);
    let rad = radical(mp);
    if let Some(g) = proper_radical_divisor(rad, rng) {
        let u = multiplicity_closure(mp, g);
        let ux = evaluate(u, x, dim);
        let r = ux.rank();
        debug_assert!(r > 0 && r < dim, "coprime split must be proper");
        return r > 0 && r < dim;
    }
    false
}

// ---------------------------------------------------------------------------
// Polynomials over GF(2) packed in a u64 (bit i = coefficient of x^i).
// Total dimensions are capped well below 64, so minimal polynomials fit.
// ---------------------------------------------------------------------------

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mul(a: u64, b: u64) -> u64 {
    let mut acc: u128 = 0;
    let mut a128 = a as u128;
    let mut b_bits = b;
    while b_bits != 0 {
        let shift = b_bits.trailing_zeros();
        acc ^= a128 << shift;
        b_bits &= b_bits - 1;
    }
    debug_assert!(acc >> 64 == 0, "polynomial product overflow");
    let _ = &mut a128;
    acc as u64
}

fn poly_rem(mut a: u64, b: u64) -> u64 {
    debug_assert!(b != 0);
    let db = degree(b);
    while degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

fn poly_div(mut a: u64, b: u64) -> u64 {
    debug_assert!(b != 0);
    let db = degree(b);
    let mut q = 0u64;
    while degree(a) >= db {
        let shift = degree(a) - db;
        q |= 1 << shift;
        a ^= b << shift;
    }
    q
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

fn poly_derivative(p: u64) -> u64 {
    // terms of odd exponent survive with exponent lowered by one
    (p & 0xAAAA_AAAA_AAAA_AAAA) >> 1
}

fn poly_sqrt(p: u64) -> u64 {
    // square polynomials over GF(2) have only even exponents
    let mut out = 0u64;
    for i in 0..32 {
        if p >> (2 * i) & 1 == 1 {
            out |= 1 << i;
        }
    }
    out
}

/// Product of the distinct irreducible factors of `p`.
fn radical(p: u64) -> u64 {
    if degree(p) <= 0 {
        return 1;
    }
    let d = poly_derivative(p);
    if d == 0 {
        return radical(poly_sqrt(p));
    }
    let w = poly_div(p, poly_gcd(p, d));
    let mut rest = p;
    loop {
        let h = poly_gcd(rest, w);
        if degree(h) <= 0 {
            break;
        }
        rest = poly_div(rest, h);
    }
    poly_mul(w, radical(rest))
}

/// A proper nonconstant divisor of the squarefree polynomial `r`, or `None`
/// when `r` is irreducible. Distinct-degree splitting is deterministic;
/// equal-degree splitting retries seeded random trace polynomials.
fn proper_radical_divisor(r: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
    let dr = degree(r);
    if dr <= 1 {
        return None;
    }
    let x = 0b10u64;
    for d in 1..=dr {
        // x^(2^d) mod r by d squarings
        let mut xp = poly_rem(x, r);
        for _ in 0..d {
            xp = poly_rem(poly_mul(xp, xp), r);
        }
        let g = poly_gcd(xp ^ poly_rem(x, r), r);
        let dg = degree(g);
        if dg > 0 && dg < dr {
            return Some(g);
        }
        if dg == dr {
            // all factors have degree exactly d
            if dr == d {
                return None;
            }
            return equal_degree_split(r, d, rng);
        }
    }
    None
}

fn equal_degree_split(r: u64, d: i32, rng: &mut ChaCha8Rng) -> Option<u64> {
    let dr = degree(r);
    for _ in 0..128 {
        let a = rng.gen::<u64>() & ((1u64 << dr) - 1);
        if degree(a) < 1 {
            continue;
        }
        // trace map a + a^2 + a^4 + ... over the degree-d subfield
        let mut t = 0u64;
        let mut pow = poly_rem(a, r);
        for _ in 0..d {
            t ^= pow;
            pow = poly_rem(poly_mul(pow, pow), r);
        }
        for cand in [t, t ^ 1] {
            let g = poly_gcd(cand, r);
            let dg = degree(g);
            if dg > 0 && dg < dr {
                return Some(g);
            }
        }
    }
    None
}

/// All factors of `m` sharing an irreducible with `g`, with multiplicity.
fn multiplicity_closure(m: u64, g: u64) -> u64 {
    let mut u = 1u64;
    let mut rest = m;
    loop {
        let h = poly_gcd(rest, g);
        if degree(h) <= 0 {
            return u;
        }
        u = poly_mul(u, h);
        rest = poly_div(rest, h);
    }
}

/// Minimal polynomial of a square matrix, as a packed GF(2) polynomial.
fn minimal_polynomial(x: &F2Matrix, dim: usize) -> u64 {
    debug_assert!(dim < 64);
    let flat = |m: &F2Matrix| -> Vec<u8> {
        let mut v = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                v.push(u8::from(m.get(r, c)));
            }
        }
        v
    };
    let mut powers = vec![F2Matrix::identity(dim)];
    for k in 1..=dim {
        let next = powers[k - 1].mul(x);
        powers.push(next);
    }
    for k in 1..=dim {
        let mut basis = F2Matrix::zeros(dim * dim, k);
        for (col, p) in powers.iter().take(k).enumerate() {
            for (row, &bit) in flat(p).iter().enumerate() {
                if bit == 1 {
                    basis.set(row, col, true);
                }
            }
        }
        let target = F2Matrix::column_from_bits(&flat(&powers[k]));
        if let Some(coeffs) = basis.solve(&target) {
            let mut poly = 1u64 << k;
            for i in 0..k {
                if coeffs.get(i, 0) {
                    poly |= 1 << i;
                }
            }
            return poly;
        }
    }
    unreachable!("a {dim}x{dim} matrix satisfies a polynomial of degree <= {dim}")
}

fn evaluate(poly: u64, x: &F2Matrix, dim: usize) -> F2Matrix {
    let mut out = F2Matrix::zeros(dim, dim);
    let mut power = F2Matrix::identity(dim);
    for i in 0..=degree(poly).max(0) as usize {
        if poly >> i & 1 == 1 {
            out = add(&out, &power);
        }
        power = power.mul(x);
    }
    out
}
