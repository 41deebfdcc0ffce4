//! Finite simplicial complexes, monotone multi-parameter filtrations, and the
//! Rips construction with its pointwise derivative.
//!
//! A filtration assigns to every simplex an n-vector of entry times that is
//! componentwise monotone under face inclusion; the set of such assignments is
//! a closed convex cone, and all validation here is exact (no tolerances).

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FiltrationError {
    #[error("simplex {simplex:?} is missing its face {face:?}")]
    MissingFace { simplex: Vec<usize>, face: Vec<usize> },
    #[error("simplex {0:?} has unsorted or repeated vertices")]
    BadSimplex(Vec<usize>),
    #[error("vertex ids must cover 1..={expected}, found vertex {found}")]
    BadVertexIds { expected: usize, found: usize },
    #[error("expected {expected} value vectors, got {got}")]
    ValueCountMismatch { expected: usize, got: usize },
    #[error("value vector for {simplex:?} has {got} components, expected {expected}")]
    ValueArityMismatch { simplex: Vec<usize>, expected: usize, got: usize },
    #[error(
        "monotonicity violated in component {component}: face {face:?} has value {face_value} > {coface_value} of {coface:?}"
    )]
    MonotonicityViolation {
        face: Vec<usize>,
        coface: Vec<usize>,
        component: usize,
        face_value: f64,
        coface_value: f64,
    },
    #[error("point cloud is on a stratum boundary (tied or vanishing pairwise distance)")]
    StratumBoundary,
    #[error("point cloud must contain at least one point")]
    EmptyCloud,
}

/// A finite simplicial complex with a fixed total order on its simplices.
///
/// Simplices are sorted vertex tuples over vertex ids `1..=r`, closed under
/// faces. The stored order is (dimension, lexicographic vertex tuple), which
/// serves as the tie-breaking order for filtrations.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl SimplicialComplex {
    /// Builds a complex from a list of simplices, verifying face closure and
    /// vertex-id conventions. Input order is irrelevant; simplices are
    /// re-sorted into the canonical (dimension, lexicographic) order.
    pub fn new(mut simplices: Vec<Vec<usize>>) -> Result<Self, FiltrationError> {
        for s in &simplices {
            if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FiltrationError::BadSimplex(s.clone()));
            }
        }
        simplices.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        simplices.dedup();
        let index: HashMap<_, _> = simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let r = simplices
            .iter()
            .flat_map(|s| s.iter().copied())
            .max()
            .unwrap_or(0);
        for v in 1..=r {
            if !index.contains_key(&vec![v]) {
                return Err(FiltrationError::BadVertexIds { expected: r, found: v });
            }
        }
        for s in &simplices {
            if s.len() > 1 {
                for f in facets(s) {
                    if !index.contains_key(&f) {
                        return Err(FiltrationError::MissingFace {
                            simplex: s.clone(),
                            face: f,
                        });
                    }
                }
            }
        }
        Ok(Self { simplices, index })
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn simplex(&self, id: usize) -> &[usize] {
        &self.simplices[id]
    }

    pub fn dim_of(&self, id: usize) -> usize {
        self.simplices[id].len() - 1
    }

    pub fn id_of(&self, simplex: &[usize]) -> Option<usize> {
        self.index.get(simplex).copied()
    }

    /// Ids of the codimension-1 faces of simplex `id` (empty for vertices).
    pub fn facet_ids(&self, id: usize) -> Vec<usize> {
        let s = &self.simplices[id];
        if s.len() == 1 {
            return Vec::new();
        }
        facets(s).iter().map(|f| self.index[f]).collect()
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.simplices.iter().filter(|s| s.len() == 1).count()
    }

    /// Ids of all simplices of the given dimension, in `<=_K` order.
    pub fn ids_of_dim(&self, dim: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.dim_of(i) == dim).collect()
    }
}

fn facets(s: &[usize]) -> Vec<Vec<usize>> {
    (0..s.len())
        .map(|i| {
            let mut f = s.to_vec();
            f.remove(i);
            f
        })
        .collect()
}

/// A simplexwise monotone n-parameter filtration of a complex: a point of the
/// monotonicity cone of the complex.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFiltration {
    complex: SimplicialComplex,
    values: Vec<Vec<f64>>,
    n: usize,
}

impl MonotoneFiltration {
    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, simplex_id: usize) -> &[f64] {
        &self.values[simplex_id]
    }

    pub fn parameters(&self) -> usize {
        self.n
    }
}

/// Checks all facet inequalities exactly and wraps the data into a
/// [`MonotoneFiltration`]; the first violated half-space is reported.
pub fn validate_monotone(
    values: Vec<Vec<f64>>,
    complex: SimplicialComplex,
) -> Result<MonotoneFiltration, FiltrationError> {
    if values.len() != complex.len() {
        return Err(FiltrationError::ValueCountMismatch {
            expected: complex.len(),
            got: values.len(),
        });
    }
    let n = values.first().map_or(1, Vec::len);
    for (id, v) in values.iter().enumerate() {
        if v.len() != n {
            return Err(FiltrationError::ValueArityMismatch {
                simplex: complex.simplex(id).to_vec(),
                expected: n,
                got: v.len(),
            });
        }
    }
    // Facet inequalities suffice: monotonicity is transitive along face chains.
    for id in 0..complex.len() {
        for fid in complex.facet_ids(id) {
            for i in 0..n {
                if values[fid][i] > values[id][i] {
                    return Err(FiltrationError::MonotonicityViolation {
                        face: complex.simplex(fid).to_vec(),
                        coface: complex.simplex(id).to_vec(),
                        component: i + 1,
                        face_value: values[fid][i],
                        coface_value: values[id][i],
                    });
                }
            }
        }
    }
    Ok(MonotoneFiltration { complex, values, n })
}

/// A labeled point cloud in R^d; point `i` carries the 1-based label `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, FiltrationError> {
        if points.is_empty() {
            return Err(FiltrationError::EmptyCloud);
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Point for the 1-based label.
    pub fn point(&self, label: usize) -> &[f64] {
        &self.points[label - 1]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }

    /// Largest pairwise distance (0 for a single point).
    pub fn diameter(&self) -> f64 {
        let r = self.len();
        let mut d = 0.0f64;
        for i in 1..=r {
            for j in (i + 1)..=r {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    /// Flattens into the parameter vector (point coordinates concatenated by label).
    pub fn to_flat(&self) -> Vec<f64> {
        self.points.iter().flatten().copied().collect()
    }

    /// Rebuilds a cloud from a flat parameter vector.
    ///
    /// # Panics
    /// Panics if `flat.len()` is not `r * d`.
    pub fn from_flat(flat: &[f64], d: usize) -> Self {
        assert!(d > 0 && flat.len() % d == 0, "flat vector is not r*d long");
        Self {
            points: flat.chunks(d).map(<[f64]>::to_vec).collect(),
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The Rips filtration of a labeled point cloud: vertices enter at 0 and
/// every higher simplex enters at its longest pairwise distance. Simplices are
/// built on all labels up to dimension `max_dim` (the full simplex would be
/// exponential; dimension 2 covers homology in degrees 0 and 1).
pub fn rips_filtration(
    cloud: &PointCloud,
    max_dim: usize,
) -> Result<MonotoneFiltration, FiltrationError> {
    let r = cloud.len();
    let mut simplices: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<Vec<usize>> = (1..=r).map(|v| vec![v]).collect();
    simplices.extend(current.iter().cloned());
    for _ in 0..max_dim {
        let mut next = Vec::new();
        for s in &current {
            let last = *s.last().unwrap();
            for v in (last + 1)..=r {
                let mut t = s.clone();
                t.push(v);
                next.push(t);
            }
        }
        simplices.extend(next.iter().cloned());
        current = next;
    }
    let complex = SimplicialComplex::new(simplices)?;
    let values = complex
        .simplices()
        .iter()
        .map(|s| vec![rips_value(cloud, s)])
        .collect();
    validate_monotone(values, complex)
}

/// Entry time of one simplex in the Rips filtration.
pub fn rips_value(cloud: &PointCloud, simplex: &[usize]) -> f64 {
    let mut v = 0.0f64;
    for (a, &i) in simplex.iter().enumerate() {
        for &j in &simplex[a + 1..] {
            v = v.max(cloud.distance(i, j));
        }
    }
    v
}

/// The signature of the top-dimensional stratum containing a cloud: all label
/// pairs sorted by increasing distance. `Boundary` flags tied or vanishing
/// distances, where the Rips map is not differentiable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StratumSignature {
    Generic(Vec<(usize, usize)>),
    Boundary,
}

pub fn stratum_signature(cloud: &PointCloud) -> StratumSignature {
    let r = cloud.len();
    let mut pairs: Vec<((usize, usize), f64)> = Vec::new();
    for i in 1..=r {
        for j in (i + 1)..=r {
            pairs.push(((i, j), cloud.distance(i, j)));
        }
    }
    if pairs.iter().any(|&(_, d)| d == 0.0) {
        return StratumSignature::Boundary;
    }
    pairs.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    if pairs.windows(2).any(|w| w[0].1 == w[1].1) {
        return StratumSignature::Boundary;
    }
    StratumSignature::Generic(pairs.into_iter().map(|(p, _)| p).collect())
}

/// Partial derivative of the Rips value of `simplex` with respect to the
/// coordinates of point `label`, at a cloud inside a top-dimensional stratum.
///
/// Nonzero only when `label` is an endpoint of the unique longest edge of the
/// simplex, in which case it is the unit vector pointing away from the other
/// endpoint.
pub fn rips_partial(
    cloud: &PointCloud,
    simplex: &[usize],
    label: usize,
) -> Result<Vec<f64>, FiltrationError> {
    if stratum_signature(cloud) == StratumSignature::Boundary {
        return Err(FiltrationError::StratumBoundary);
    }
    let d = cloud.dim();
    if simplex.len() < 2 || !simplex.contains(&label) {
        return Ok(vec![0.0; d]);
    }
    let (mut bi, mut bj, mut best) = (0, 0, -1.0f64);
    for (a, &i) in simplex.iter().enumerate() {
        for &j in &simplex[a + 1..] {
            let dist = cloud.distance(i, j);
            if dist > best {
                (bi, bj, best) = (i, j, dist);
            }
        }
    }
    if label != bi && label != bj {
        return Ok(vec![0.0; d]);
    }
    let other = if label == bi { bj } else { bi };
    let (p, q) = (cloud.point(label), cloud.point(other));
    Ok((0..d).map(|k| (p[k] - q[k]) / best).collect())
}

/// Ids of the simplices of a one-parameter filtration sorted by entry value,
/// with ties broken by the complex order (dimension, then lexicographic).
/// Faces always precede cofaces in the result.
pub fn simplex_order(filtration: &MonotoneFiltration) -> Vec<usize> {
    assert_eq!(filtration.parameters(), 1, "simplex_order requires n = 1");
    let mut ids: Vec<usize> = (0..filtration.complex().len()).collect();
    ids.sort_by(|&a, &b| {
        filtration.value(a)[0]
            .partial_cmp(&filtration.value(b)[0])
            .unwrap()
            .then(a.cmp(&b))
    });
    ids
}
