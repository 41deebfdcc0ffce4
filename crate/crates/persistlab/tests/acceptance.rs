//! Acceptance suite: every shipped guarantee as one test, each printing a
//! pass/fail line (run with `cargo test --test acceptance -- --nocapture` to
//! see them all).

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use persistlab::f2::F2Matrix;
use persistlab::filtration::{
    rips_filtration, stratum_signature, validate_monotone, MonotoneFiltration, PointCloud,
    SimplicialComplex, StratumSignature,
};
use persistlab::grid::{
    check_relative_exactness, grid_homology_module, is_indecomposable, minimal_hook_resolution,
    signed_barcode, Grid, GridModule, Hook, SignedBarcode,
};
use persistlab::lift::{
    chain_rule, lift, lift_signed, pers_jacobian, total_persistence, total_persistence_gradient,
    unlift, BlockAssignment, Unlifted,
};
use persistlab::metrics::{bottleneck, bottleneck_bruteforce, signed_bottleneck};
use persistlab::optim::experiment_holes;
use persistlab::persistence::{barcode, barcode_of_an_module, reduce, AnModule, Bar, Barcode};

fn report<F: FnOnce()>(name: &str, body: F) {
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body));
    match outcome {
        Ok(()) => println!("{name}: PASS"),
        Err(cause) => {
            println!("{name}: FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}

fn bar1(b: f64, d: f64) -> Bar {
    Bar::finite(vec![b], vec![d])
}

fn ray1(b: f64) -> Bar {
    Bar::infinite(vec![b])
}

#[test]
fn criterion_01_lift_golden_vectors() {
    report("criterion 1 (lift golden vectors, < 1 ms)", || {
        let start = Instant::now();
        let one = lift(&Barcode::new(1, vec![ray1(0.0), bar1(-1.0, 3.2), bar1(0.0, 2.5)]));
        let two = lift(&Barcode::new(
            2,
            vec![
                Bar::finite(vec![0.0, 0.0], vec![3.0, 2.0]),
                Bar::finite(vec![-1.0, 1.0], vec![2.0, 2.0]),
                Bar::infinite(vec![2.0, 3.0]),
            ],
        ));
        let signed = lift_signed(&SignedBarcode::new(
            2,
            vec![
                Bar::finite(vec![0.0, 0.0], vec![0.0, 1.0]),
                Bar::finite(vec![0.0, 0.0], vec![1.0, 1.0]),
            ],
            vec![Bar::finite(vec![0.0, 0.0], vec![1.0, 0.0])],
        ));
        let elapsed = start.elapsed();
        assert_eq!(one.coords, vec![-1.0, 3.2, 1.0, 0.0, 0.0, 1.0, 0.0, 2.5, 1.0]);
        assert_eq!(
            two.coords,
            vec![-1.0, 1.0, 2.0, 2.0, 1.0, 0.0, 0.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0, 3.0, 1.0]
        );
        assert_eq!(
            signed.coords,
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, -1.0]
        );
        assert!(elapsed.as_micros() < 1000, "lifting took {elapsed:?}");
    });
}

#[test]
fn criterion_02_h1_module_decomposition() {
    report("criterion 2 (rank-extracted barcode of the H1 chain)", || {
        let dims = vec![0, 3, 1, 1, 2, 1, 0, 0, 0, 0];
        let maps: Vec<F2Matrix> = (0..9)
            .map(|i| {
                if i == 4 {
                    F2Matrix::from_rows(&[vec![1, 0]])
                } else {
                    F2Matrix::zeros(dims[i + 1], dims[i])
                }
            })
            .collect();
        let extracted = barcode_of_an_module(&AnModule::new(dims, maps));
        let expected = Barcode::new(
            1,
            vec![
                bar1(4.0, 6.0),
                bar1(4.0, 5.0),
                bar1(3.0, 4.0),
                bar1(2.0, 3.0),
                bar1(1.0, 2.0),
                bar1(1.0, 2.0),
                bar1(1.0, 2.0),
            ],
        );
        assert!(extracted.same_multiset(&expected), "got {extracted:?}");
    });
}

/// The three-merges module on the 3x3 grid, with dimensions
/// (3,3,2)/(3,2,1)/(2,1,1) from bottom to top row.
fn three_merges_module() -> GridModule {
    let grid = Grid::new(vec![3, 3]);
    let mut dims = vec![0; 9];
    for ((x, y), d) in [
        ((0usize, 0usize), 3usize),
        ((1, 0), 3),
        ((2, 0), 2),
        ((0, 1), 3),
        ((1, 1), 2),
        ((2, 1), 1),
        ((0, 2), 2),
        ((1, 2), 1),
        ((2, 2), 1),
    ] {
        dims[grid.linear(&[x, y])] = d;
    }
    let m = |rows: &[Vec<u8>]| F2Matrix::from_rows(rows);
    let mut arrows = HashMap::new();
    arrows.insert((vec![0, 0], 0), F2Matrix::identity(3));
    arrows.insert((vec![1, 0], 0), m(&[vec![1, 1, 0], vec![0, 0, 1]]));
    arrows.insert((vec![0, 1], 0), m(&[vec![1, 0, 1], vec![0, 1, 0]]));
    arrows.insert((vec![1, 1], 0), m(&[vec![1, 1]]));
    arrows.insert((vec![0, 2], 0), m(&[vec![1, 1]]));
    arrows.insert((vec![1, 2], 0), F2Matrix::identity(1));
    arrows.insert((vec![0, 0], 1), F2Matrix::identity(3));
    arrows.insert((vec![1, 0], 1), m(&[vec![1, 0, 1], vec![0, 1, 0]]));
    arrows.insert((vec![2, 0], 1), m(&[vec![1, 1]]));
    arrows.insert((vec![0, 1], 1), m(&[vec![1, 0, 0], vec![0, 1, 1]]));
    arrows.insert((vec![1, 1], 1), m(&[vec![1, 1]]));
    arrows.insert((vec![2, 1], 1), F2Matrix::identity(1));
    GridModule::new(grid, dims, arrows).expect("the displayed module commutes")
}

#[test]
fn criterion_03a_three_merges_module_resolution() {
    report("criterion 3a (3x3 module: commutes, length-1 resolution, Euler, summand shift, < 5 s)", || {
        let start = Instant::now();
        let module = three_merges_module();
        // dimensions as displayed, bottom row up
        for ((x, y), d) in [
            ((0usize, 0usize), 3usize),
            ((1, 0), 3),
            ((2, 0), 2),
            ((0, 1), 3),
            ((1, 1), 2),
            ((2, 1), 1),
            ((0, 2), 2),
            ((1, 2), 1),
            ((2, 2), 1),
        ] {
            assert_eq!(module.dim(&[x, y]), d);
        }
        let resolution = minimal_hook_resolution(&module).unwrap();
        assert_eq!(resolution.length(), 1, "resolution length");
        let exactness = check_relative_exactness(&resolution, &module);
        assert!(exactness.is_ok(), "{:?}", exactness.violations);

        // adding the degree-1 hook as a summand moves one copy to degree 0
        let extra = resolution.terms[1].first().expect("degree-1 term nonempty").clone();
        let sum = module.direct_sum(&GridModule::interval(module.grid().clone(), &extra));
        let res_sum = minimal_hook_resolution(&sum).unwrap();
        let count = |term: &[Hook], h: &Hook| term.iter().filter(|x| *x == h).count();
        assert_eq!(count(&res_sum.terms[0], &extra), count(&resolution.terms[0], &extra) + 1);
        let sorted = |mut t: Vec<Hook>| {
            t.sort();
            t
        };
        assert_eq!(sorted(res_sum.terms[1].clone()), sorted(resolution.terms[1].clone()));
        assert!(start.elapsed().as_secs() < 5, "took {:?}", start.elapsed());
    });
}

#[test]
fn criterion_03b_three_merges_module_indecomposability() {
    report("criterion 3b (3x3 module indecomposable over the implemented field)", || {
        let module = three_merges_module();
        let verdict = is_indecomposable(&module).unwrap();
        // Over GF(2) — the field this library computes with — this module
        // admits the nontrivial idempotent acting as all-ones-plus-identity
        // on the rank-3 fibers, so it splits off its diagonal free summand
        // and the expected verdict cannot hold. Over fields with 2 != 0 the
        // module is indecomposable. Kept faithful rather than weakened; see
        // the unit test exhibiting the splitting.
        assert!(verdict, "decomposable over GF(2): characteristic-2 splitting exists");
    });
}

#[test]
fn criterion_04_resolution_length_bound() {
    report("criterion 4 (200 random grid modules: length <= 2, relative exactness)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for trial in 0..200 {
            let side = if trial % 2 == 0 { 3 } else { 4 };
            let grid = Grid::new(vec![side, side]);
            let gen_count = rng.gen_range(1..=3usize);
            let generators: Vec<Vec<usize>> = (0..gen_count)
                .map(|_| vec![rng.gen_range(0..side), rng.gen_range(0..side)])
                .collect();
            let relations: Vec<(Vec<usize>, Vec<u8>)> = (0..rng.gen_range(0..=3usize))
                .map(|_| {
                    (
                        vec![rng.gen_range(0..side), rng.gen_range(0..side)],
                        (0..gen_count).map(|_| rng.gen_range(0..2u8)).collect(),
                    )
                })
                .collect();
            let module = GridModule::from_free_presentation(grid, &generators, &relations);
            assert!(module.dims().iter().all(|&d| d <= 3));
            let resolution = minimal_hook_resolution(&module)
                .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
            assert!(resolution.length() <= 2, "trial {trial}: length {}", resolution.length());
            let exactness = check_relative_exactness(&resolution, &module);
            assert!(exactness.is_ok(), "trial {trial}: {:?}", exactness.violations);
        }
    });
}

#[test]
fn criterion_05_bottleneck_oracle_equivalence() {
    report("criterion 5 (500 random pairs: bottleneck == brute force)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        fn gen_barcode(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Barcode {
            let bars = (0..count)
                .map(|_| {
                    let birth: Vec<f64> =
                        (0..n).map(|_| f64::from(rng.gen_range(-40..40i8)) / 8.0).collect();
                    if rng.gen_bool(0.2) {
                        Bar::infinite(birth)
                    } else {
                        let death: Vec<f64> = birth
                            .iter()
                            .map(|b| b + f64::from(rng.gen_range(0..32u8)) / 8.0)
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
        for trial in 0..500 {
            let n = if trial % 3 == 0 { 2 } else { 1 };
            let total = rng.gen_range(0..=8usize);
            let left_count = rng.gen_range(0..=total);
            let a = gen_barcode(&mut rng, n, left_count);
            let b = gen_barcode(&mut rng, n, total - left_count);
            let fast = bottleneck(&a, &b).unwrap().0;
            let slow = bottleneck_bruteforce(&a, &b).unwrap();
            assert_eq!(fast, slow, "trial {trial}: {a:?} vs {b:?}");
        }
    });
}

fn ten_simplex_complex() -> SimplicialComplex {
    SimplicialComplex::new(vec![
        vec![1],
        vec![2],
        vec![3],
        vec![4],
        vec![1, 2],
        vec![1, 3],
        vec![2, 3],
        vec![1, 4],
        vec![2, 4],
        vec![1, 2, 3],
    ])
    .expect("ten simplices, face closed")
}

fn random_monotone(rng: &mut ChaCha8Rng, complex: &SimplicialComplex) -> MonotoneFiltration {
    let mut values: Vec<Vec<f64>> = (0..complex.len())
        .map(|_| vec![rng.gen_range(0.0..1.0)])
        .collect();
    for id in 0..complex.len() {
        for fid in complex.facet_ids(id) {
            if values[fid][0] > values[id][0] {
                values[id][0] = values[fid][0];
            }
        }
    }
    validate_monotone(values, complex.clone()).expect("max-fixed values are monotone")
}

#[test]
fn criterion_06_one_parameter_stability() {
    report("criterion 6 (200 filtration pairs: bottleneck <= sup-norm)", || {
        let complex = ten_simplex_complex();
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for trial in 0..200 {
            let f = random_monotone(&mut rng, &complex);
            let g = random_monotone(&mut rng, &complex);
            let sup: f64 = (0..complex.len())
                .map(|id| (f.value(id)[0] - g.value(id)[0]).abs())
                .fold(0.0, f64::max);
            let pairs_f = reduce(&f, 2);
            let pairs_g = reduce(&g, 2);
            for degree in 0..=2usize {
                let bf = barcode(&pairs_f, degree);
                let bg = barcode(&pairs_g, degree);
                let (eps, _) = bottleneck(&bf, &bg).unwrap();
                assert!(
                    eps.value() <= sup + 1e-12,
                    "trial {trial} degree {degree}: {} > {sup}",
                    eps.value()
                );
            }
        }
    });
}

fn small_bifiltration_complex() -> SimplicialComplex {
    SimplicialComplex::new(vec![
        vec![1],
        vec![2],
        vec![3],
        vec![4],
        vec![1, 2],
        vec![1, 3],
        vec![2, 3],
        vec![3, 4],
        vec![1, 2, 3],
    ])
    .expect("face closed")
}

fn random_bifiltration(rng: &mut ChaCha8Rng, complex: &SimplicialComplex) -> MonotoneFiltration {
    let mut values: Vec<Vec<f64>> = (0..complex.len())
        .map(|_| vec![f64::from(rng.gen_range(0..3u8)), f64::from(rng.gen_range(0..3u8))])
        .collect();
    for id in 0..complex.len() {
        for fid in complex.facet_ids(id) {
            for axis in 0..2 {
                if values[fid][axis] > values[id][axis] {
                    values[id][axis] = values[fid][axis];
                }
            }
        }
    }
    validate_monotone(values, complex.clone()).expect("max-fixed values are monotone")
}

fn perturb_bifiltration(
    rng: &mut ChaCha8Rng,
    base: &MonotoneFiltration,
) -> (MonotoneFiltration, f64) {
    let complex = base.complex().clone();
    let mut values: Vec<Vec<f64>> = base
        .values()
        .iter()
        .map(|v| {
            v.iter()
                .map(|x| (x + f64::from(rng.gen_range(-1..=1i8))).clamp(0.0, 2.0))
                .collect()
        })
        .collect();
    for id in 0..complex.len() {
        for fid in complex.facet_ids(id) {
            for axis in 0..2 {
                if values[fid][axis] > values[id][axis] {
                    values[id][axis] = values[fid][axis];
                }
            }
        }
    }
    let eps = values
        .iter()
        .zip(base.values())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0f64, f64::max);
    (
        validate_monotone(values, complex).expect("max-fixed values are monotone"),
        eps,
    )
}

#[test]
fn criterion_07_signed_stability() {
    report("criterion 7 (50 perturbation pairs: signed bottleneck <= 9 eps)", || {
        let complex = small_bifiltration_complex();
        let levels = vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for trial in 0..50 {
            let f = random_bifiltration(&mut rng, &complex);
            let (g, eps) = perturb_bifiltration(&mut rng, &f);
            let degree = trial % 2;
            let mf = grid_homology_module(&f, &levels, degree);
            let mg = grid_homology_module(&g, &levels, degree);
            let sf = signed_barcode(&mf).unwrap();
            let sg = signed_barcode(&mg).unwrap();
            let dist = signed_bottleneck(&sf, &sg).unwrap();
            assert!(
                dist.value() <= 9.0 * eps + 1e-12,
                "trial {trial} degree {degree}: {} > 9 * {eps}",
                dist.value()
            );
        }
    });
}

fn generic_cloud(rng: &mut ChaCha8Rng, points: usize) -> PointCloud {
    loop {
        let pts: Vec<Vec<f64>> = (0..points)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        if let StratumSignature::Generic(_) = stratum_signature(&cloud) {
            // keep a safety margin from the stratum boundary so small finite
            // difference steps stay inside
            let mut dists: Vec<f64> = Vec::new();
            for i in 1..=points {
                for j in (i + 1)..=points {
                    dists.push(cloud.distance(i, j));
                }
            }
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let min_gap = dists
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min)
                .min(dists[0]);
            if min_gap > 1e-3 {
                return cloud;
            }
        }
    }
}

fn lifted_by_assignment(
    cloud: &PointCloud,
    degree: usize,
    assignment: &[BlockAssignment],
) -> Vec<f64> {
    let filtration = rips_filtration(cloud, degree + 1).unwrap();
    let pairs = reduce(&filtration, degree);
    let mut out = Vec::with_capacity(assignment.len() * 3);
    for a in assignment {
        let pair = pairs
            .pairs
            .iter()
            .find(|p| p.birth_simplex == a.birth_simplex && p.death_simplex == a.death_simplex)
            .expect("pairing is stable inside the stratum");
        out.push(pair.birth_value);
        out.push(pair.death_value.unwrap_or(pair.birth_value));
        out.push(1.0);
    }
    out
}

#[test]
fn criterion_08_gradient_checks() {
    report("criterion 8 (50 clouds x degrees 0,1: Jacobian and chain rule vs FD, <= 1e-6)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        for trial in 0..50 {
            let cloud = generic_cloud(&mut rng, rng.gen_range(5..=15));
            let h = 1e-6 * cloud.diameter();
            for degree in [0usize, 1] {
                let (lifted, jacobian) = pers_jacobian(&cloud, degree).unwrap();
                let loss_grad = total_persistence_gradient(lifted.k);
                let analytic_scalar = chain_rule(&loss_grad, &jacobian).unwrap();
                for col in 0..jacobian.cols {
                    let (pt, axis) = (col / 2, col % 2);
                    let mut plus = cloud.points().to_vec();
                    let mut minus = cloud.points().to_vec();
                    plus[pt][axis] += h;
                    minus[pt][axis] -= h;
                    let fp = lifted_by_assignment(
                        &PointCloud::new(plus).unwrap(),
                        degree,
                        &jacobian.assignment,
                    );
                    let fm = lifted_by_assignment(
                        &PointCloud::new(minus).unwrap(),
                        degree,
                        &jacobian.assignment,
                    );
                    for row in 0..jacobian.rows {
                        let fd = (fp[row] - fm[row]) / (2.0 * h);
                        let analytic = jacobian.get(row, col);
                        assert!(
                            (analytic - fd).abs() <= 1e-6 * analytic.abs().max(1.0),
                            "trial {trial} degree {degree} row {row} col {col}: {analytic} vs {fd}"
                        );
                    }
                    // the same evaluations drive the scalar chain-rule check
                    let scalar = |coords: &[f64]| -> f64 {
                        coords
                            .chunks(3)
                            .map(|b| if b[0] == b[1] { 0.0 } else { b[1] - b[0] })
                            .sum()
                    };
                    let fd_scalar = (scalar(&fp) - scalar(&fm)) / (2.0 * h);
                    assert!(
                        (analytic_scalar[col] - fd_scalar).abs()
                            <= 1e-6 * analytic_scalar[col].abs().max(1.0),
                        "trial {trial} degree {degree} col {col} (chain rule): {} vs {fd_scalar}",
                        analytic_scalar[col]
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_09_optimization_behavior() {
    report("criterion 9 (dispersal warning; regularized +20% persistence, settled tail, < 60 s)", || {
        use persistlab::io::RunConfig;

        // unregularized: the objective is scale-free and the points disperse
        let start = Instant::now();
        let unregularized = RunConfig {
            seed: 9,
            steps: 500,
            lambda: 0.0,
            r: 20,
            ..RunConfig::default()
        };
        let loose = experiment_holes(&unregularized, None).unwrap();
        assert!(
            loose.state.bound_warning,
            "boundedness warning did not fire within 500 steps"
        );
        assert!(start.elapsed().as_secs() < 60, "unregularized run took {:?}", start.elapsed());

        // regularized: persistence grows and the trace settles
        let start = Instant::now();
        let regularized = RunConfig {
            seed: 9,
            steps: 400,
            lambda: 1.0,
            r: 20,
            ..RunConfig::default()
        };
        let tight = experiment_holes(&regularized, None).unwrap();
        let before = total_persistence(&tight.initial_barcode);
        let after = total_persistence(&tight.final_barcode);
        assert!(
            after >= 1.2 * before,
            "persistence went from {before} to {after}, below +20%"
        );
        let tail_start = tight.state.trace.len() * 4 / 5;
        let tail: Vec<f64> = tight.state.trace[tail_start..].iter().map(|r| r.value).collect();
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let variance =
            tail.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / tail.len() as f64;
        let mean_abs = tail.iter().map(|v| v.abs()).sum::<f64>() / tail.len() as f64;
        assert!(
            variance <= 0.05 * mean_abs,
            "tail variance {variance} exceeds 5% of mean |F| = {mean_abs}"
        );
        assert!(start.elapsed().as_secs() < 60, "regularized run took {:?}", start.elapsed());
    });
}

#[test]
fn criterion_10_left_inverse_law() {
    report("criterion 10 (1000 lift/unlift round trips, exact)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        fn gen_bars(rng: &mut ChaCha8Rng, n: usize, count: usize, sign: i8) -> Vec<Bar> {
            (0..count)
                .map(|_| {
                    let birth: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
                    let bar = if rng.gen_bool(0.25) {
                        Bar::infinite(birth)
                    } else {
                        let death =
                            birth.iter().map(|b| b + rng.gen_range(0.0001..4.0)).collect();
                        Bar::finite(birth, death)
                    };
                    bar.with_sign(sign)
                })
                .collect()
        }
        for trial in 0..1000 {
            let n = rng.gen_range(1..=2usize);
            if trial % 2 == 0 {
                let b = Barcode::new(n, gen_bars(&mut rng, n, rng.gen_range(0..6), 1));
                match unlift(&lift(&b)).unwrap() {
                    Unlifted::Unsigned(back) => {
                        assert!(back.same_multiset(&b), "trial {trial}")
                    }
                    Unlifted::Signed(_) => panic!("trial {trial}: no negative bars"),
                }
            } else {
                let pos = gen_bars(&mut rng, n, rng.gen_range(0..5), 1);
                let neg = gen_bars(&mut rng, n, rng.gen_range(1..4), -1);
                let sb = SignedBarcode::new(n, pos, neg);
                match unlift(&lift_signed(&sb)).unwrap() {
                    Unlifted::Signed(back) => {
                        assert!(back.same_multiset(&sb), "trial {trial}")
                    }
                    Unlifted::Unsigned(_) => panic!("trial {trial}: negative bars present"),
                }
            }
        }
    });
}
