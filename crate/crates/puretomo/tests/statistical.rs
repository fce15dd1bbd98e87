//! Seeded statistical invariants: sampling convergence, equivalence of
//! adaptive and static measurements, and error-propagation calibration.

use puretomo::bases::{
    computational_basis, disentangled_five_bases, two_n_plus_one_bases, LoccSchedule,
};
use puretomo::experiment::{
    run_experiment, ExperimentConfig, Method, ReconMode, Selection, ShotSpec, StateSpec,
};
use puretomo::measure::{
    outcome_probabilities, sample_counts, simulate_adaptive_run, total_variation,
};
use puretomo::recon::{edge_estimates, EdgeEstimates};
use puretomo::state::{prepare_graph_state, StateVector};

use num_complex::Complex64;

fn plus_state(n: usize) -> StateVector {
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    StateVector::from_amplitudes(n, vec![Complex64::new(amp, 0.0); dim]).unwrap()
}

#[test]
fn sampled_frequencies_converge_in_total_variation() {
    // TV to the exact distribution stays below 5/sqrt(N) in at least 99% of
    // seeded trials
    let trials = 100u64;
    let mut failures = 0u64;
    let mut total = 0u64;
    for n in [2usize, 4, 6] {
        let state = prepare_graph_state(n).unwrap();
        let bases = two_n_plus_one_bases(n).unwrap();
        for &shots in &[1_000u64, 10_000, 100_000] {
            for trial in 0..trials {
                let basis = &bases[(trial as usize) % bases.len()];
                let exact = outcome_probabilities(&state, basis, None).unwrap();
                let counts = sample_counts(&basis.id, &exact, shots, 1000 + trial, n as u64);
                let tv = total_variation(&counts.empirical(), &exact).unwrap();
                total += 1;
                if tv >= 5.0 / (shots as f64).sqrt() {
                    failures += 1;
                }
            }
        }
    }
    assert!(
        failures * 100 <= total,
        "TV bound violated in {failures}/{total} trials"
    );
}

/// Edge estimates for the odd-pair gray bases obtained from adaptive runs.
fn adaptive_estimates(state: &StateVector, shots: u64, seed: u64) -> EdgeEstimates {
    let n = state.n();
    let real = LoccSchedule::new(n, false, false).unwrap();
    let imag = LoccSchedule::new(n, false, true).unwrap();
    let comp = computational_basis(n);
    let comp_counts = {
        let exact = outcome_probabilities(state, &comp, None).unwrap();
        sample_counts(&comp.id, &exact, shots, seed, 900)
    };
    let real_counts = simulate_adaptive_run(state, &real, shots, seed, 901).unwrap();
    let imag_counts = simulate_adaptive_run(state, &imag, shots, seed, 902).unwrap();
    let bases = vec![real.projector_basis(), imag.projector_basis()];
    let dists = vec![real_counts.empirical(), imag_counts.empirical()];
    let weights = comp_counts.empirical().probabilities().to_vec();
    edge_estimates(
        &bases,
        &dists,
        &[shots as f64, shots as f64],
        &weights,
        shots as f64,
    )
}

/// The same edges estimated from static basis sampling.
fn static_estimates(state: &StateVector, shots: u64, seed: u64) -> EdgeEstimates {
    let n = state.n();
    let family = disentangled_five_bases(n).unwrap();
    let comp_counts = {
        let exact = outcome_probabilities(state, &family[0], None).unwrap();
        sample_counts(&family[0].id, &exact, shots, seed, 910)
    };
    let bases = vec![family[3].clone(), family[4].clone()];
    let dists: Vec<_> = bases
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let exact = outcome_probabilities(state, b, None).unwrap();
            sample_counts(&b.id, &exact, shots, seed, 911 + i as u64).empirical()
        })
        .collect();
    let weights = comp_counts.empirical().probabilities().to_vec();
    edge_estimates(
        &bases,
        &dists,
        &[shots as f64, shots as f64],
        &weights,
        shots as f64,
    )
}

fn welch_z(a: &[f64], b: &[f64]) -> f64 {
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let var = |xs: &[f64], m: f64| {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    let denom = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (ma - mb) / denom
    }
}

#[test]
fn adaptive_and_static_edge_estimates_are_indistinguishable() {
    // 20 seeds per route, Welch z on both components of every edge estimate;
    // z_crit = 4 keeps the Bonferroni-corrected family error below 1%
    let shots = 4000u64;
    let seeds: Vec<u64> = (0..20).collect();
    for n in [2usize, 3] {
        let state = prepare_graph_state(n).unwrap();
        let family = disentangled_five_bases(n).unwrap();
        let edges: Vec<(usize, usize)> = {
            let mut e = family[3].edges();
            e.extend(family[4].edges());
            e.sort();
            e.dedup();
            e
        };
        for &edge in &edges {
            let mut adaptive_re = Vec::new();
            let mut adaptive_im = Vec::new();
            let mut static_re = Vec::new();
            let mut static_im = Vec::new();
            for &seed in &seeds {
                let a = adaptive_estimates(&state, shots, seed);
                let s = static_estimates(&state, shots, seed);
                let (ea, es) = (&a[&edge], &s[&edge]);
                adaptive_re.push(ea.rho_hat.re);
                adaptive_im.push(ea.rho_hat.im);
                static_re.push(es.rho_hat.re);
                static_im.push(es.rho_hat.im);
            }
            let z_re = welch_z(&adaptive_re, &static_re).abs();
            let z_im = welch_z(&adaptive_im, &static_im).abs();
            assert!(
                z_re < 4.0 && z_im < 4.0,
                "n={n} edge {edge:?}: z_re={z_re:.2} z_im={z_im:.2}"
            );
        }
    }
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut ranks = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let (ra, rb) = (rank(xs), rank(ys));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mb) = (mean(&ra), mean(&rb));
    let cov: f64 = ra.iter().zip(&rb).map(|(a, b)| (a - ma) * (b - mb)).sum();
    let (sa, sb): (f64, f64) = (
        ra.iter().map(|a| (a - ma).powi(2)).sum(),
        rb.iter().map(|b| (b - mb).powi(2)).sum(),
    );
    cov / (sa * sb).sqrt()
}

#[test]
fn phase_variance_accumulates_with_tree_distance() {
    // uniform real state on n = 4: the per-vertex phase variance grows with
    // the geodesic distance from the root
    let n = 4usize;
    let state = plus_state(n);
    let bases = two_n_plus_one_bases(n).unwrap();
    let shots = 10_000u64;
    let resamples = 400u64;
    let weights_exact: Vec<f64> = state.weights();
    let graph = puretomo::graph::EstimationGraph::hypercube(n, weights_exact.clone()).unwrap();
    let (pruned, _) = graph.prune_and_check_connectivity(1e-9);
    let tree = pruned.reconstruction_tree(Some(0), None).unwrap();
    let dim = 1usize << n;
    let mut phase_samples: Vec<Vec<f64>> = vec![Vec::new(); dim];
    for r in 0..resamples {
        let dists: Vec<_> = bases
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let exact = outcome_probabilities(&state, b, None).unwrap();
                sample_counts(&b.id, &exact, shots, r, i as u64).empirical()
            })
            .collect();
        let weights = dists[0].probabilities().to_vec();
        let estimates = edge_estimates(
            &bases,
            &dists,
            &vec![shots as f64; bases.len()],
            &weights,
            shots as f64,
        );
        let result =
            puretomo::recon::reconstruct_tree(&pruned, &tree, &estimates, &weights).unwrap();
        for v in 0..dim {
            phase_samples[v].push(result.amplitudes[v].arg());
        }
    }
    let mut depths = Vec::new();
    let mut variances = Vec::new();
    for v in 1..dim {
        let xs = &phase_samples[v];
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        depths.push(tree.depth[v] as f64);
        variances.push(var);
    }
    let rho = spearman(&depths, &variances);
    assert!(rho > 0.9, "rank correlation {rho:.3}");
}

#[test]
fn empirical_edge_phase_variance_matches_the_propagation_formula() {
    // uniform real state, n = 3: the variance of arg(rho_hat) over seeded
    // resamples must match the general error-propagation formula evaluated
    // at the true probabilities within 20%
    let n = 3usize;
    let state = plus_state(n);
    let bases = two_n_plus_one_bases(n).unwrap();
    let shots = 10_000u64;
    let resamples = 1500u64;
    let weights_exact = state.weights();
    let exact_estimates = {
        let dists: Vec<_> = bases
            .iter()
            .map(|b| outcome_probabilities(&state, b, None).unwrap())
            .collect::<Vec<_>>();
        // finite-shot variances evaluated at the true probabilities
        edge_estimates(
            &bases,
            &dists,
            &vec![shots as f64; bases.len()],
            &weights_exact,
            shots as f64,
        )
    };
    let mut samples: std::collections::BTreeMap<(usize, usize), Vec<f64>> = Default::default();
    for r in 0..resamples {
        let dists: Vec<_> = bases
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let exact = outcome_probabilities(&state, b, None).unwrap();
                sample_counts(&b.id, &exact, shots, 31_000 + r, i as u64).empirical()
            })
            .collect();
        let weights = dists[0].probabilities().to_vec();
        let estimates = edge_estimates(
            &bases,
            &dists,
            &vec![shots as f64; bases.len()],
            &weights,
            shots as f64,
        );
        for (edge, est) in estimates {
            samples.entry(edge).or_default().push(est.rho_hat.arg());
        }
    }
    for (edge, xs) in samples {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let predicted = exact_estimates[&edge].var_beta;
        let ratio = var / predicted;
        assert!(
            (0.8..=1.2).contains(&ratio),
            "edge {edge:?}: empirical {var:.3e}, predicted {predicted:.3e}, ratio {ratio:.3}"
        );
    }
}

#[test]
fn five_and_product_families_coincide_statistically_at_n2() {
    // at n = 2 the two families are the same projector multiset, so their
    // fidelity distributions over seeds must agree
    let seeds: Vec<u64> = (0..30).collect();
    let mut fives = Vec::new();
    let mut products = Vec::new();
    for &seed in &seeds {
        for (method, sink) in [
            (Method::Five, &mut fives),
            (Method::TwoNPlusOne, &mut products),
        ] {
            let config = ExperimentConfig {
                method,
                n: 2,
                shots: ShotSpec::PerBasis(2000),
                noise: None,
                seed,
                repetitions: 1,
                state: StateSpec::GraphState,
                prerotate: false,
                candidates: 4,
                tau: None,
                selection: Selection::Auto,
                reconstruction: ReconMode::Tree,
                bootstrap: 0,
            };
            sink.push(run_experiment(&config).unwrap().fidelity.unwrap());
        }
    }
    let z = welch_z(&fives, &products).abs();
    assert!(z < 3.0, "fidelity distributions differ: z = {z:.2}");
    let median = |xs: &mut Vec<f64>| {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs[xs.len() / 2]
    };
    let (mut f, mut p) = (fives.clone(), products.clone());
    assert!((median(&mut f) - median(&mut p)).abs() < 0.01);
}
