//! Error propagation in the phase recursion: per-edge variances from the
//! multinomial model, their closed-form special cases, and the accumulated
//! per-vertex budget along the reconstruction tree.

use num_complex::Complex64;
use puretomo::bases::two_n_plus_one_bases;
use puretomo::experiment::{
    run_experiment, ExperimentConfig, Method, ReconMode, Selection, ShotSpec, StateSpec,
};
use puretomo::measure::outcome_probabilities;
use puretomo::recon::{edge_estimates, phase_variance_special_cases, PhaseVarianceCase};
use puretomo::state::{StateVector, StateVectorJson};

fn main() -> puretomo::Result<()> {
    let n = 3usize;
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    let state = StateVector::from_amplitudes(n, vec![Complex64::new(amp, 0.0); dim])?;
    let shots = 10_000.0;

    // per-edge variances at the true probabilities
    let bases = two_n_plus_one_bases(n)?;
    let dists: Vec<_> = bases
        .iter()
        .map(|b| outcome_probabilities(&state, b, None))
        .collect::<puretomo::Result<_>>()?;
    let weights = state.weights();
    let estimates = edge_estimates(&bases, &dists, &vec![shots; bases.len()], &weights, shots);
    let (edge, est) = estimates.iter().next().unwrap();
    println!("uniform real state, {shots} shots per basis, edge {edge:?}:");
    println!("  var Re(Lambda) {:.3e}", est.var_re_lambda);
    println!("  var Im(Lambda) {:.3e}", est.var_im_lambda);
    println!("  var |Lambda|   {:.3e}", est.var_abs_lambda);
    println!("  var beta       {:.3e}", est.var_beta);

    // closed-form special cases for comparison
    let uniform = phase_variance_special_cases(PhaseVarianceCase::Uniform {
        weight: amp * amp,
        shots,
    })?;
    let real = phase_variance_special_cases(PhaseVarianceCase::RealState {
        p_plus: 2.0 * amp * amp,
        p_minus: 0.0,
        p_imag_plus: amp * amp,
        shots,
    })?;
    println!("\nclosed forms: uniform-case 1/(4Nw) = {uniform:.3e}, real-state = {real:.3e}");
    println!("(the real-state form agrees with the propagated variance; the uniform");
    println!(" closed form assumes unnormalized pair probabilities and sits at half)");

    // accumulated per-vertex budget for a sampled run
    let config = ExperimentConfig {
        method: Method::TwoNPlusOne,
        n,
        shots: ShotSpec::PerBasis(shots as u64),
        noise: None,
        seed: 3,
        repetitions: 1,
        state: StateSpec::Amplitudes(StateVectorJson {
            n,
            amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }),
        prerotate: false,
        candidates: 1,
        tau: None,
        selection: Selection::Auto,
        reconstruction: ReconMode::Tree,
        bootstrap: 0,
    };
    let report = run_experiment(&config)?;
    println!(
        "\naccumulated phase variance by vertex (root {}):",
        report.tree.root
    );
    for (label, var) in report.phase_variances.iter().enumerate() {
        if let Some(v) = var {
            println!("  vertex {label}: {v:.3e}");
        }
    }
    Ok(())
}
