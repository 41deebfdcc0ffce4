//! One-parameter persistent homology.
//!
//! [`reduce`] runs boundary-matrix column reduction over GF(2) in the order
//! fixed by [`crate::filtration::simplex_order`], attributing each bar to its
//! birth and death simplices. [`barcode_of_an_module`] extracts the barcode of
//! an abstract module over a finite total order from its rank function,
//! independently of any filtration.

use crate::f2::F2Matrix;
use crate::filtration::{simplex_order, MonotoneFiltration};

/// One bar: a right-open interval `[birth, death)` or a ray `[birth, inf)`,
/// with a sign used by signed barcodes (always +1 for ordinary barcodes).
///
/// `birth <= death` in the product order with `birth != death` when the death
/// is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub birth: Vec<f64>,
    pub death: Option<Vec<f64>>,
    pub sign: i8,
}

impl Bar {
    pub fn finite(birth: Vec<f64>, death: Vec<f64>) -> Self {
        Self { birth, death: Some(death), sign: 1 }
    }

    pub fn infinite(birth: Vec<f64>) -> Self {
        Self { birth, death: None, sign: 1 }
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.sign = sign;
        self
    }

    pub fn parameters(&self) -> usize {
        self.birth.len()
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_none()
    }
}

/// A multiset of bars over a common parameter count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    pub n: usize,
    pub bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(n: usize, bars: Vec<Bar>) -> Self {
        debug_assert!(bars.iter().all(|b| b.parameters() == n));
        Self { n, bars }
    }

    pub fn empty(n: usize) -> Self {
        Self { n, bars: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Multiset equality up to reordering, comparing coordinates exactly.
    pub fn same_multiset(&self, other: &Barcode) -> bool {
        if self.n != other.n || self.bars.len() != other.bars.len() {
            return false;
        }
        let key = |b: &Bar| {
            (
                b.birth.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                b.death.as_ref().map(|d| d.iter().map(|x| x.to_bits()).collect::<Vec<_>>()),
                b.sign,
            )
        };
        let mut a: Vec<_> = self.bars.iter().map(key).collect();
        let mut b: Vec<_> = other.bars.iter().map(key).collect();
        a.sort();
        b.sort();
        a == b
    }
}

/// Birth/death simplex attribution from boundary reduction. Pairs with equal
/// entry values are kept here and only dropped at barcode extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePairs {
    pub pairs: Vec<PersistencePair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePair {
    /// Simplex id in the complex whose arrival created the class.
    pub birth_simplex: usize,
    /// Simplex id that killed the class, or `None` for an essential class.
    pub death_simplex: Option<usize>,
    /// Homology degree of the class (dimension of the birth simplex).
    pub degree: usize,
    pub birth_value: f64,
    pub death_value: Option<f64>,
}

/// Column reduction of the boundary matrix of a one-parameter filtration.
///
/// Simplices are processed in filtration order; each zeroed column is a
/// creator and each column with pivot `low` pairs the simplex at `low` with
/// the current one. Only pairs of degree `<= max_degree` are reported.
///
/// # Panics
/// Panics if the filtration has more than one parameter.
pub fn reduce(filtration: &MonotoneFiltration, max_degree: usize) -> PersistencePairs {
    assert_eq!(filtration.parameters(), 1, "reduce requires a 1-parameter filtration");
    let complex = filtration.complex();
    let order = simplex_order(filtration);
    let position: Vec<usize> = {
        let mut pos = vec![0; order.len()];
        for (p, &id) in order.iter().enumerate() {
            pos[id] = p;
        }
        pos
    };

    // Columns indexed by order position, entries are order positions of facets.
    let mut columns: Vec<Vec<usize>> = order
        .iter()
        .map(|&id| {
            let mut col: Vec<usize> = complex.facet_ids(id).iter().map(|&f| position[f]).collect();
            col.sort_unstable();
            col
        })
        .collect();

    let mut pivot_owner: Vec<Option<usize>> = vec![None; order.len()];
    let mut death_of: Vec<Option<usize>> = vec![None; order.len()];
    let mut is_destroyer: Vec<bool> = vec![false; order.len()];

    for j in 0..columns.len() {
        loop {
            let Some(&low) = columns[j].last() else { break };
            match pivot_owner[low] {
                None => {
                    pivot_owner[low] = Some(j);
                    death_of[low] = Some(j);
                    is_destroyer[j] = true;
                    break;
                }
                Some(k) => {
                    let other = columns[k].clone();
                    columns[j] = xor_sorted(&columns[j], &other);
                }
            }
        }
    }

    let mut pairs = Vec::new();
    for (pos, &id) in order.iter().enumerate() {
        if is_destroyer[pos] {
            continue;
        }
        let degree = complex.dim_of(id);
        if degree > max_degree {
            continue;
        }
        let birth_value = filtration.value(id)[0];
        let (death_simplex, death_value) = match death_of[pos] {
            Some(dpos) => {
                let did = order[dpos];
                (Some(did), Some(filtration.value(did)[0]))
            }
            None => (None, None),
        };
        pairs.push(PersistencePair {
            birth_simplex: id,
            death_simplex,
            degree,
            birth_value,
            death_value,
        });
    }
    PersistencePairs { pairs }
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Bars of one homology degree, with zero-length pairs dropped.
pub fn barcode(pairs: &PersistencePairs, degree: usize) -> Barcode {
    let bars = pairs
        .pairs
        .iter()
        .filter(|p| p.degree == degree)
        .filter(|p| p.death_value != Some(p.birth_value))
        .map(|p| Bar {
            birth: vec![p.birth_value],
            death: p.death_value.map(|d| vec![d]),
            sign: 1,
        })
        .collect();
    Barcode::new(1, bars)
}

/// A persistence module over the finite total order `0 < 1 < ... < k-1`:
/// pointwise dimensions and the internal maps between consecutive indices.
#[derive(Debug, Clone)]
pub struct AnModule {
    dims: Vec<usize>,
    maps: Vec<F2Matrix>,
}

impl AnModule {
    /// # Panics
    /// Panics if the matrix shapes do not chain with the dimensions.
    pub fn new(dims: Vec<usize>, maps: Vec<F2Matrix>) -> Self {
        assert_eq!(maps.len() + 1, dims.len().max(1), "need one map per consecutive pair");
        for (i, m) in maps.iter().enumerate() {
            assert_eq!(m.cols(), dims[i], "map {i} has wrong source dimension");
            assert_eq!(m.rows(), dims[i + 1], "map {i} has wrong target dimension");
        }
        Self { dims, maps }
    }

    pub fn length(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn maps(&self) -> &[F2Matrix] {
        &self.maps
    }

    /// Rank of the composite map from index `i` to index `j` (`i <= j`).
    pub fn composite_rank(&self, i: usize, j: usize) -> usize {
        let mut m = F2Matrix::identity(self.dims[i]);
        for k in i..j {
            m = self.maps[k].mul(&m);
        }
        m.rank()
    }
}

/// Barcode of an [`AnModule`] with integer grades, extracted from its rank
/// function by inclusion-exclusion: the multiplicity of the interval spanning
/// indices `i..=j` is `r(i,j) - r(i-1,j) - r(i,j+1) + r(i-1,j+1)` with
/// out-of-range ranks taken as zero. Intervals reaching the last index become
/// rays `[i, inf)`.
pub fn barcode_of_an_module(module: &AnModule) -> Barcode {
    let k = module.length();
    if k == 0 {
        return Barcode::empty(1);
    }
    let rank = |i: isize, j: isize| -> isize {
        if i < 0 || j >= k as isize {
            return 0;
        }
        module.composite_rank(i as usize, j as usize) as isize
    };
    let mut bars = Vec::new();
    for i in 0..k as isize {
        for j in i..k as isize {
            let mult = rank(i, j) - rank(i - 1, j) - rank(i, j + 1) + rank(i - 1, j + 1);
            debug_assert!(mult >= 0, "negative multiplicity at [{i},{j}]");
            for _ in 0..mult {
                let birth = vec![i as f64];
                if j == k as isize - 1 {
                    bars.push(Bar::infinite(birth));
                } else {
                    bars.push(Bar::finite(birth, vec![(j + 1) as f64]));
                }
            }
        }
    }
    Barcode::new(1, bars)
}
