//! Matching distances between (signed) barcodes.
//!
//! Costs follow the interleaving distance on interval modules: matching two
//! bars costs the smaller of the endpoint shift and the cost of deleting
//! both, and deleting a finite hook `[p,q)` costs `min_i (q_i - p_i) / 2`
//! (exact for one parameter; the adopted matching convention for more).
//! [`bottleneck`] minimizes the largest cost over partial matchings,
//! [`dist1`] minimizes the sum, and [`signed_bottleneck`] compares the
//! cross-wise unions of positive and negative parts.

use std::cmp::Ordering;

use thiserror::Error;

use crate::grid::SignedBarcode;
use crate::persistence::{Bar, Barcode};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("barcodes have different parameter counts ({0} vs {1})")]
    ParameterMismatch(usize, usize),
    #[error("brute-force oracle capped at {cap} total bars, got {got}")]
    SizeCapExceeded { cap: usize, got: usize },
}

/// A nonnegative extended real with a total order. Differences of two
/// infinite endpoints count as zero, matching the effect of shifting both
/// endpoints of infinite bars together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    pub fn finite(v: f64) -> Self {
        debug_assert!(v.is_finite() && v >= 0.0, "finite cost expected, got {v}");
        ExtReal(v)
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn max(self, other: ExtReal) -> ExtReal {
        if self >= other { self } else { other }
    }

    fn min(self, other: ExtReal) -> ExtReal {
        if self <= other { self } else { other }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("costs are never NaN")
    }
}

fn endpoint_shift(a: &Bar, b: &Bar) -> ExtReal {
    let births = a
        .birth
        .iter()
        .zip(&b.birth)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    let deaths = match (&a.death, &b.death) {
        (None, None) => 0.0,
        (Some(da), Some(db)) => da
            .iter()
            .zip(db)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max),
        _ => return ExtReal::INFINITY,
    };
    ExtReal::finite(births.max(deaths))
}

/// Cost of leaving a bar unmatched: half the smallest side of a finite hook,
/// infinite for rays.
pub fn bar_deletion_cost(bar: &Bar) -> ExtReal {
    match &bar.death {
        None => ExtReal::INFINITY,
        Some(death) => {
            let side = death
                .iter()
                .zip(&bar.birth)
                .map(|(d, b)| d - b)
                .fold(f64::INFINITY, f64::min);
            ExtReal::finite(side / 2.0)
        }
    }
}

/// Cost of matching two bars: the endpoint shift capped by the cost of
/// deleting both. Bars of opposite sign never match.
///
/// # Panics
/// Panics if the bars have different parameter counts.
pub fn bar_cost(a: &Bar, b: &Bar) -> ExtReal {
    assert_eq!(a.parameters(), b.parameters(), "parameter count mismatch");
    if a.sign != b.sign {
        return ExtReal::INFINITY;
    }
    let shift = endpoint_shift(a, b);
    let both_deleted = bar_deletion_cost(a).max(bar_deletion_cost(b));
    shift.min(both_deleted)
}

/// A partial matching between two barcodes: matched index pairs plus the
/// unmatched (deleted) indices on each side.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialMatching {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_left: Vec<usize>,
    pub unmatched_right: Vec<usize>,
}

impl PartialMatching {
    fn from_pairs(pairs: Vec<(usize, usize)>, n_left: usize, n_right: usize) -> Self {
        let mut left = vec![true; n_left];
        let mut right = vec![true; n_right];
        for &(i, j) in &pairs {
            left[i] = false;
            right[j] = false;
        }
        Self {
            pairs,
            unmatched_left: (0..n_left).filter(|&i| left[i]).collect(),
            unmatched_right: (0..n_right).filter(|&j| right[j]).collect(),
        }
    }
}

fn check_parameters(a: &Barcode, b: &Barcode) -> Result<(), MetricError> {
    if !a.is_empty() && !b.is_empty() && a.n != b.n {
        return Err(MetricError::ParameterMismatch(a.n, b.n));
    }
    Ok(())
}

struct CostTables {
    pair: Vec<Vec<ExtReal>>,
    del_left: Vec<ExtReal>,
    del_right: Vec<ExtReal>,
}

impl CostTables {
    fn new(a: &Barcode, b: &Barcode) -> Self {
        Self {
            pair: a
                .bars
                .iter()
                .map(|x| b.bars.iter().map(|y| bar_cost(x, y)).collect())
                .collect(),
            del_left: a.bars.iter().map(bar_deletion_cost).collect(),
            del_right: b.bars.iter().map(bar_deletion_cost).collect(),
        }
    }

    /// Is there a partial matching with every cost `<= eps`? Decided through
    /// a perfect matching on the ghost-augmented bipartite graph: each bar
    /// may match a real partner (pair cost admissible) or its own ghost
    /// (deletion admissible); ghost-ghost edges are free.
    fn feasible(&self, eps: ExtReal) -> Option<PartialMatching> {
        let nl = self.del_left.len();
        let nr = self.del_right.len();
        let size = nl + nr;
        // left vertices: 0..nl real bars, nl.. ghosts of right bars
        // right vertices: 0..nr real bars, nr.. ghosts of left bars
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|li| {
                let mut edges = Vec::new();
                if li < nl {
                    for j in 0..nr {
                        if self.pair[li][j] <= eps {
                            edges.push(j);
                        }
                    }
                    if self.del_left[li] <= eps {
                        edges.push(nr + li);
                    }
                } else {
                    let j = li - nl;
                    if self.del_right[j] <= eps {
                        edges.push(j);
                    }
                    edges.extend(nr..size);
                }
                edges
            })
            .collect();
        let mut match_left: Vec<Option<usize>> = vec![None; size];
        let mut match_right: Vec<Option<usize>> = vec![None; size];
        for li in 0..size {
            let mut seen = vec![false; size];
            if !augment(li, &adj, &mut match_left, &mut match_right, &mut seen) {
                return None;
            }
        }
        let pairs = (0..nl)
            .filter_map(|i| match match_left[i] {
                Some(j) if j < nr => Some((i, j)),
                _ => None,
            })
            .collect();
        Some(PartialMatching::from_pairs(pairs, nl, nr))
    }
}

fn augment(
    li: usize,
    adj: &[Vec<usize>],
    match_left: &mut [Option<usize>],
    match_right: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &rj in &adj[li] {
        if seen[rj] {
            continue;
        }
        seen[rj] = true;
        let free = match match_right[rj] {
            None => true,
            Some(owner) => augment(owner, adj, match_left, match_right, seen),
        };
        if free {
            match_left[li] = Some(rj);
            match_right[rj] = Some(li);
            return true;
        }
    }
    false
}

/// Bottleneck distance with a witness matching: the least `eps` admitting a
/// partial matching with all pair and deletion costs `<= eps`. Feasibility is
/// piecewise constant in `eps`, so binary search over the sorted finite costs
/// finds the optimum exactly.
pub fn bottleneck(a: &Barcode, b: &Barcode) -> Result<(ExtReal, PartialMatching), MetricError> {
    check_parameters(a, b)?;
    let costs = CostTables::new(a, b);
    let mut candidates = vec![ExtReal::finite(0.0)];
    for row in &costs.pair {
        candidates.extend(row.iter().copied().filter(|c| c.is_finite()));
    }
    candidates.extend(
        costs
            .del_left
            .iter()
            .chain(&costs.del_right)
            .copied()
            .filter(|c| c.is_finite()),
    );
    candidates.sort();
    candidates.dedup();
    let mut best: Option<(ExtReal, PartialMatching)> = None;
    let (mut lo, mut hi) = (0usize, candidates.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        match costs.feasible(candidates[mid]) {
            Some(matching) => {
                best = Some((candidates[mid], matching));
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Ok(match best {
        Some(found) => found,
        None => (
            ExtReal::INFINITY,
            costs
                .feasible(ExtReal::INFINITY)
                .expect("every matching is admissible at infinite tolerance"),
        ),
    })
}

/// Sum-cost matching distance: the least total cost of a partial matching,
/// pair costs for matched bars plus deletion costs for unmatched ones.
/// Solved as a square assignment problem with per-bar deletion slots.
pub fn dist1(a: &Barcode, b: &Barcode) -> Result<(ExtReal, PartialMatching), MetricError> {
    check_parameters(a, b)?;
    let nl = a.bars.len();
    let nr = b.bars.len();
    if nl + nr == 0 {
        return Ok((ExtReal::finite(0.0), PartialMatching::default()));
    }
    let costs = CostTables::new(a, b);
    // stand-in for forbidden assignments, larger than any feasible total
    let mut big = 1.0f64;
    for c in costs
        .pair
        .iter()
        .flatten()
        .chain(&costs.del_left)
        .chain(&costs.del_right)
    {
        if c.is_finite() {
            big += c.value();
        }
    }
    let entry = |c: ExtReal| if c.is_finite() { c.value() } else { big };
    let size = nl + nr;
    let mut cost = vec![vec![big; size]; size];
    for i in 0..nl {
        for j in 0..nr {
            cost[i][j] = entry(costs.pair[i][j]);
        }
        cost[i][nr + i] = entry(costs.del_left[i]);
    }
    for j in 0..nr {
        cost[nl + j][j] = entry(costs.del_right[j]);
    }
    for i in nl..size {
        for j in nr..size {
            cost[i][j] = 0.0;
        }
    }
    let assignment = assignment_min_cost(&cost);
    let mut total = 0.0f64;
    let mut infinite = false;
    let mut pairs = Vec::new();
    for (i, &j) in assignment.iter().enumerate() {
        let c = match (i < nl, j < nr) {
            (true, true) => {
                pairs.push((i, j));
                costs.pair[i][j]
            }
            (true, false) => costs.del_left[i],
            (false, true) => costs.del_right[j],
            (false, false) => ExtReal::finite(0.0),
        };
        if c.is_finite() {
            total += c.value();
        } else {
            infinite = true;
        }
    }
    let value = if infinite { ExtReal::INFINITY } else { ExtReal::finite(total) };
    Ok((value, PartialMatching::from_pairs(pairs, nl, nr)))
}

/// Shortest-augmenting-path assignment (Jonker-Volgenant potentials form) on
/// a square all-finite cost matrix; returns the column picked for each row.
fn assignment_min_cost(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    // p[j]: row assigned to column j (n = none); column n is the sentinel
    let mut p = vec![n; n + 1];
    let mut way = vec![n; n + 1];
    for i in 0..n {
        p[n] = i;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = n;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0][j] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == n {
                break;
            }
        }
        while j0 != n {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        }
    }
    let mut out = vec![0usize; n];
    for j in 0..n {
        if p[j] != n {
            out[p[j]] = j;
        }
    }
    out
}

/// Signed bottleneck distance: bottleneck between positive(a) + negative(b)
/// and positive(b) + negative(a), all bars treated as unsigned.
pub fn signed_bottleneck(a: &SignedBarcode, b: &SignedBarcode) -> Result<ExtReal, MetricError> {
    let strip = |bars: &[Bar]| -> Vec<Bar> { bars.iter().cloned().map(|bar| bar.with_sign(1)).collect() };
    let n = a.n.max(b.n);
    let left = Barcode::new(n, [strip(&a.positive), strip(&b.negative)].concat());
    let right = Barcode::new(n, [strip(&b.positive), strip(&a.negative)].concat());
    Ok(bottleneck(&left, &right)?.0)
}

/// Exhaustive minimum over all partial matchings; the oracle for
/// [`bottleneck`], capped at 8 total bars.
pub fn bottleneck_bruteforce(a: &Barcode, b: &Barcode) -> Result<ExtReal, MetricError> {
    check_parameters(a, b)?;
    const CAP: usize = 8;
    let got = a.bars.len() + b.bars.len();
    if got > CAP {
        return Err(MetricError::SizeCapExceeded { cap: CAP, got });
    }
    let costs = CostTables::new(a, b);
    fn go(i: usize, used: &mut Vec<bool>, costs: &CostTables, current: ExtReal) -> ExtReal {
        if i == costs.del_left.len() {
            let mut worst = current;
            for (j, u) in used.iter().enumerate() {
                if !u {
                    worst = worst.max(costs.del_right[j]);
                }
            }
            return worst;
        }
        let mut best = go(i + 1, used, costs, current.max(costs.del_left[i]));
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                let sub = go(i + 1, used, costs, current.max(costs.pair[i][j]));
                used[j] = false;
                best = best.min(sub);
            }
        }
        best
    }
    let mut used = vec![false; costs.del_right.len()];
    Ok(go(0, &mut used, &costs, ExtReal::finite(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar1(b: f64, d: f64) -> Bar {
        Bar::finite(vec![b], vec![d])
    }

    fn ray1(b: f64) -> Bar {
        Bar::infinite(vec![b])
    }

    fn bc(bars: Vec<Bar>) -> Barcode {
        Barcode::new(1, bars)
    }

    #[test]
    fn identical_bars_cost_zero() {
        assert_eq!(bar_cost(&bar1(0.0, 4.0), &bar1(0.0, 4.0)), ExtReal::finite(0.0));
    }

    #[test]
    fn deletion_and_shift_costs() {
        assert_eq!(bar_deletion_cost(&bar1(0.0, 4.0)), ExtReal::finite(2.0));
        assert_eq!(bar_cost(&bar1(0.0, 4.0), &bar1(1.0, 4.0)), ExtReal::finite(1.0));
    }

    #[test]
    fn two_parameter_deletion_uses_smallest_side() {
        let b = Bar::finite(vec![0.0, 0.0], vec![3.0, 1.0]);
        assert_eq!(bar_deletion_cost(&b), ExtReal::finite(0.5));
    }

    #[test]
    fn infinite_bar_conventions() {
        assert_eq!(bar_deletion_cost(&ray1(0.0)), ExtReal::INFINITY);
        assert_eq!(bar_cost(&ray1(0.0), &ray1(3.0)), ExtReal::finite(3.0));
        assert_eq!(bar_cost(&ray1(0.0), &bar1(0.0, 9.0)), ExtReal::INFINITY);
    }

    #[test]
    fn opposite_signs_never_match() {
        let neg = bar1(0.0, 4.0).with_sign(-1);
        assert_eq!(bar_cost(&bar1(0.0, 4.0), &neg), ExtReal::INFINITY);
    }

    #[test]
    fn bottleneck_self_distance_zero() {
        let b = bc(vec![bar1(0.0, 4.0), ray1(1.0), bar1(2.0, 3.0)]);
        let (eps, m) = bottleneck(&b, &b).unwrap();
        assert_eq!(eps, ExtReal::finite(0.0));
        assert_eq!(m.pairs.len(), 3);
    }

    #[test]
    fn bottleneck_single_deletion() {
        let (eps, m) = bottleneck(&bc(vec![bar1(0.0, 4.0)]), &bc(vec![])).unwrap();
        assert_eq!(eps, ExtReal::finite(2.0));
        assert_eq!(m.unmatched_left, vec![0]);
    }

    #[test]
    fn bottleneck_prefers_cheap_match() {
        let (eps, m) = bottleneck(&bc(vec![bar1(0.0, 4.0)]), &bc(vec![bar1(1.0, 4.0)])).unwrap();
        assert_eq!(eps, ExtReal::finite(1.0));
        assert_eq!(m.pairs, vec![(0, 0)]);
    }

    #[test]
    fn bottleneck_infinite_on_unmatched_ray() {
        let (eps, _) = bottleneck(&bc(vec![ray1(0.0)]), &bc(vec![])).unwrap();
        assert_eq!(eps, ExtReal::INFINITY);
    }

    #[test]
    fn dist1_examples() {
        assert_eq!(dist1(&bc(vec![]), &bc(vec![])).unwrap().0, ExtReal::finite(0.0));
        let b = bc(vec![bar1(0.0, 4.0), bar1(2.0, 3.0)]);
        assert_eq!(dist1(&b, &b).unwrap().0, ExtReal::finite(0.0));
        let (v, m) =
            dist1(&bc(vec![bar1(0.0, 4.0), bar1(0.0, 1.0)]), &bc(vec![bar1(0.0, 4.0)])).unwrap();
        assert_eq!(v, ExtReal::finite(0.5));
        assert!(m.pairs.contains(&(0, 0)));
        assert_eq!(m.unmatched_left, vec![1]);
        let (v, _) = dist1(&bc(vec![bar1(0.0, 2.0)]), &bc(vec![bar1(0.0, 3.0)])).unwrap();
        assert_eq!(v, ExtReal::finite(1.0));
    }

    #[test]
    fn dist1_forced_infinite() {
        let (v, _) = dist1(&bc(vec![ray1(0.0)]), &bc(vec![])).unwrap();
        assert_eq!(v, ExtReal::INFINITY);
    }

    #[test]
    fn dist1_permutation_invariant() {
        let a = bc(vec![bar1(0.0, 4.0), bar1(1.0, 2.0), bar1(-1.0, 5.0)]);
        let a_perm = bc(vec![bar1(1.0, 2.0), bar1(-1.0, 5.0), bar1(0.0, 4.0)]);
        let b = bc(vec![bar1(0.5, 4.0), bar1(1.0, 6.0)]);
        assert_eq!(dist1(&a, &b).unwrap().0, dist1(&a_perm, &b).unwrap().0);
        assert_eq!(bottleneck(&a, &b).unwrap().0, bottleneck(&a_perm, &b).unwrap().0);
    }

    #[test]
    fn signed_bottleneck_examples() {
        let s1 = SignedBarcode::new(1, vec![bar1(0.0, 4.0)], vec![]);
        let empty = SignedBarcode::new(1, vec![], vec![]);
        assert_eq!(signed_bottleneck(&s1, &s1).unwrap(), ExtReal::finite(0.0));
        assert_eq!(signed_bottleneck(&s1, &empty).unwrap(), ExtReal::finite(2.0));
        let s2 = SignedBarcode::new(1, vec![bar1(0.0, 3.0)], vec![bar1(5.0, 6.0)]);
        assert_eq!(
            signed_bottleneck(&s1, &s2).unwrap(),
            signed_bottleneck(&s2, &s1).unwrap()
        );
    }

    #[test]
    fn bruteforce_basics() {
        let many = bc((0..5).map(|i| bar1(f64::from(i), f64::from(i) + 1.0)).collect());
        assert!(matches!(
            bottleneck_bruteforce(&many, &many),
            Err(MetricError::SizeCapExceeded { cap: 8, got: 10 })
        ));
        assert_eq!(bottleneck_bruteforce(&bc(vec![]), &bc(vec![])).unwrap(), ExtReal::finite(0.0));
        assert_eq!(
            bottleneck_bruteforce(&bc(vec![ray1(0.0)]), &bc(vec![])).unwrap(),
            ExtReal::INFINITY
        );
    }

    #[test]
    fn bottleneck_matches_bruteforce_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        fn gen_barcode(rng: &mut rand_chacha::ChaCha8Rng, n: usize, count: usize) -> Barcode {
            let bars = (0..count)
                .map(|_| {
                    let birth: Vec<f64> =
                        (0..n).map(|_| f64::from(rng.gen_range(-4..5i8))).collect();
                    if rng.gen_bool(0.15) {
                        Bar::infinite(birth)
                    } else {
                        let death: Vec<f64> = birth
                            .iter()
                            .map(|b| b + f64::from(rng.gen_range(0..4u8)))
                            .collect();
                        if death == birth {
                            Bar::infinite(birth)
                        } else {
                            Bar::finite(birth, death)
                        }
                    }
                })
                .collect();
            Barcode::new(n, bars)
        }
        for trial in 0..300 {
            let n = if trial % 2 == 0 { 1 } else { 2 };
            let (ca, cb) = (rng.gen_range(0..5), rng.gen_range(0..4));
            let a = gen_barcode(&mut rng, n, ca);
            let b = gen_barcode(&mut rng, n, cb);
            let fast = bottleneck(&a, &b).unwrap().0;
            let slow = bottleneck_bruteforce(&a, &b).unwrap();
            assert_eq!(fast, slow, "trial {trial}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        fn gen_barcode(rng: &mut rand_chacha::ChaCha8Rng, count: usize) -> Barcode {
            let bars = (0..count)
                .map(|_| {
                    let birth = f64::from(rng.gen_range(-3..4i8));
                    let len = f64::from(rng.gen_range(1..4u8));
                    Bar::finite(vec![birth], vec![birth + len])
                })
                .collect();
            Barcode::new(1, bars)
        }
        for _ in 0..150 {
            let (ca, cb, cc) = (rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(0..4));
            let a = gen_barcode(&mut rng, ca);
            let b = gen_barcode(&mut rng, cb);
            let c = gen_barcode(&mut rng, cc);
            let ab = bottleneck(&a, &b).unwrap().0.value();
            let bc_ = bottleneck(&b, &c).unwrap().0.value();
            let ac = bottleneck(&a, &c).unwrap().0.value();
            assert!(ac <= ab + bc_ + 1e-12, "triangle violated: {ac} > {ab} + {bc_}");
        }
    }

    /// Exhaustive interleaving oracle on an integer grid: enumerates every
    /// natural transformation between two restricted interval modules and
    /// checks the two shift-factorization identities of an eps-interleaving
    /// directly. Endpoints are scaled by 2 so that candidate costs are exact
    /// integers.
    mod interleaving_oracle {
        use super::*;

        #[derive(Debug, Clone, Copy)]
        struct IntInterval {
            birth: i64,
            death: Option<i64>,
        }

        impl IntInterval {
            fn alive(self, t: i64) -> bool {
                self.birth <= t && self.death.is_none_or(|d| t < d)
            }
        }

        /// All natural transformations `k_src -> k_dst[eps]` on the window,
        /// as support vectors over window positions. Values are constant on
        /// runs where source and shifted target are both alive, and forced
        /// to zero when the run is entered from a position where the source
        /// lives but the shifted target does not.
        fn homs(src: IntInterval, dst: IntInterval, eps: i64, window: (i64, i64)) -> Vec<Vec<bool>> {
            let (lo, hi) = window;
            let len = (hi - lo + 1) as usize;
            let both: Vec<bool> = (lo..=hi).map(|t| src.alive(t) && dst.alive(t + eps)).collect();
            let mut runs: Vec<(usize, usize, bool)> = Vec::new(); // start, end, forced zero
            let mut k = 0;
            while k < len {
                if !both[k] {
                    k += 1;
                    continue;
                }
                let start = k;
                while k < len && both[k] {
                    k += 1;
                }
                let t_prev = lo + start as i64 - 1;
                let forced = src.alive(t_prev) && !dst.alive(t_prev + eps);
                runs.push((start, k, forced));
            }
            let free: Vec<usize> = runs
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.2)
                .map(|(i, _)| i)
                .collect();
            let mut out = Vec::new();
            for mask in 0..(1u32 << free.len()) {
                let mut f = vec![false; len];
                for (bit, &run_idx) in free.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        let (s, e, _) = runs[run_idx];
                        for slot in &mut f[s..e] {
                            *slot = true;
                        }
                    }
                }
                out.push(f);
            }
            out
        }

        fn interleaved(a: IntInterval, b: IntInterval, eps: i64) -> bool {
            let mut crit = vec![a.birth, b.birth];
            crit.extend(a.death);
            crit.extend(b.death);
            let lo = crit.iter().min().unwrap() - 2 * eps - 2;
            let hi = crit.iter().max().unwrap() + 2 * eps + 2;
            let window = (lo, hi);
            let at = |f: &[bool], t: i64| -> bool {
                if t < lo || t > hi {
                    false
                } else {
                    f[(t - lo) as usize]
                }
            };
            // beyond hi - 2 eps every alive-pattern is constant, so the
            // checked range covers all behaviors
            for f in homs(a, b, eps, window) {
                'g: for g in homs(b, a, eps, window) {
                    for t in lo..=(hi - 2 * eps) {
                        if a.alive(t) {
                            let composite = at(&f, t) && at(&g, t + eps);
                            if composite != a.alive(t + 2 * eps) {
                                continue 'g;
                            }
                        }
                        if b.alive(t) {
                            let composite = at(&g, t) && at(&f, t + eps);
                            if composite != b.alive(t + 2 * eps) {
                                continue 'g;
                            }
                        }
                    }
                    return true;
                }
            }
            false
        }

        /// The closed-form pair cost (doubled so it is an integer) must be
        /// exactly the threshold where an interleaving appears.
        #[test]
        fn closed_form_matches_exhaustive_interleavings() {
            let mut intervals = vec![
                IntInterval { birth: 0, death: Some(4) },
                IntInterval { birth: 1, death: Some(4) },
                IntInterval { birth: 0, death: Some(1) },
                IntInterval { birth: 2, death: Some(7) },
                IntInterval { birth: -1, death: Some(2) },
                IntInterval { birth: 0, death: None },
                IntInterval { birth: 3, death: None },
            ];
            intervals.push(IntInterval { birth: -3, death: Some(-1) });
            for &a in &intervals {
                for &b in &intervals {
                    let bar_a = Bar {
                        birth: vec![a.birth as f64],
                        death: a.death.map(|d| vec![d as f64]),
                        sign: 1,
                    };
                    let bar_b = Bar {
                        birth: vec![b.birth as f64],
                        death: b.death.map(|d| vec![d as f64]),
                        sign: 1,
                    };
                    let closed = bar_cost(&bar_a, &bar_b);
                    // doubled endpoints keep half-integer costs integral
                    let a2 = IntInterval { birth: 2 * a.birth, death: a.death.map(|d| 2 * d) };
                    let b2 = IntInterval { birth: 2 * b.birth, death: b.death.map(|d| 2 * d) };
                    if closed.is_finite() {
                        let scaled = (closed.value() * 2.0).round() as i64;
                        assert_eq!(
                            (closed.value() * 2.0).fract(),
                            0.0,
                            "cost should be half-integral"
                        );
                        assert!(
                            interleaved(a2, b2, scaled),
                            "{a:?} vs {b:?}: not interleaved at cost {}",
                            closed.value()
                        );
                        if scaled > 0 {
                            assert!(
                                !interleaved(a2, b2, scaled - 1),
                                "{a:?} vs {b:?}: interleaved below cost {}",
                                closed.value()
                            );
                        }
                    } else {
                        for eps in [1, 5, 20, 100] {
                            assert!(
                                !interleaved(a2, b2, eps),
                                "{a:?} vs {b:?}: unexpectedly interleaved at {eps}"
                            );
                        }
                    }
                }
            }
        }

        /// Deletion cost against the "shift map vanishes" criterion.
        #[test]
        fn deletion_cost_matches_vanishing_shift() {
            for (birth, death) in [(0i64, 4i64), (1, 2), (-3, 5)] {
                let bar = bar1(birth as f64, death as f64);
                let scaled = (bar_deletion_cost(&bar).value() * 2.0).round() as i64;
                let iv = IntInterval { birth: 2 * birth, death: Some(2 * death) };
                // at eps: every alive t has t + 2 eps dead
                let all_dead = |eps: i64| (2 * birth..2 * death).all(|t| !iv.alive(t + 2 * eps));
                assert!(all_dead(scaled));
                assert!(!all_dead(scaled - 1));
            }
        }
    }
}
