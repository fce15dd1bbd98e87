//! The GHZ state defeats direct reconstruction: only two computational
//! weights are nonzero, every probed edge loses an endpoint to pruning, and
//! the estimation graph falls apart. A local pre-rotation with no zero
//! amplitudes in the rotated frame restores exact recovery.

use puretomo::error::Error;
use puretomo::experiment::{
    run_experiment, ExperimentConfig, Method, ReconMode, Selection, ShotSpec, StateSpec,
};
use puretomo::recon::prerotate_for_zeros;
use puretomo::state::{gates, Matrix2, StateVector};

fn main() -> puretomo::Result<()> {
    let n = 4;
    let mut config = ExperimentConfig {
        method: Method::TwoNPlusOne,
        n,
        shots: ShotSpec::Exact,
        noise: None,
        seed: 1,
        repetitions: 1,
        state: StateSpec::Ghz,
        prerotate: false,
        candidates: 8,
        tau: None,
        selection: Selection::Auto,
        reconstruction: ReconMode::Tree,
        bootstrap: 0,
    };
    match run_experiment(&config) {
        Err(Error::Disconnected { components }) => {
            println!("direct reconstruction fails as expected:");
            println!("  surviving components {components:?}\n");
        }
        other => panic!("expected disconnection, got {other:?}"),
    }

    // the all-Hadamard rotation is not a remedy: the two GHZ branches
    // interfere on every label and half the rotated weights vanish
    let ghz = StateVector::ghz(n)?;
    let all_h: Vec<Matrix2> = (0..n).map(|_| gates::hadamard()).collect();
    let zeros = ghz
        .apply_local_layer(&all_h)?
        .weights()
        .iter()
        .filter(|w| **w < 1e-12)
        .count();
    println!("all-Hadamard rotation leaves {zeros}/16 weights at zero, so it is rejected");

    let layer = prerotate_for_zeros(&ghz, 1e-9, 16, config.seed)?;
    let rotated_min = ghz
        .apply_local_layer(&layer)?
        .weights()
        .into_iter()
        .fold(1.0, f64::min);
    println!("selected pre-rotation gives min rotated weight {rotated_min:.4}\n");

    config.prerotate = true;
    let report = run_experiment(&config)?;
    println!(
        "with pre-rotation: fidelity {:.12}, purity P = {:.2e}",
        report.fidelity.unwrap(),
        report.purity_p
    );
    Ok(())
}
