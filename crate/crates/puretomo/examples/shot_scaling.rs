//! Fidelity of the product-family reconstruction as the per-basis ensemble
//! grows, for the layered benchmark state on 4 qubits.

use puretomo::experiment::{
    run_experiment, ExperimentConfig, Method, ReconMode, Selection, ShotSpec, StateSpec,
};

fn main() -> puretomo::Result<()> {
    let seeds: Vec<u64> = (0..11).collect();
    println!("{:>10} {:>12} {:>12}", "shots", "median F", "worst F");
    for shots in [100u64, 1_000, 10_000, 100_000] {
        let mut fids: Vec<f64> = seeds
            .iter()
            .map(|&seed| {
                let config = ExperimentConfig {
                    method: Method::TwoNPlusOne,
                    n: 4,
                    shots: ShotSpec::PerBasis(shots),
                    noise: None,
                    seed,
                    repetitions: 1,
                    state: StateSpec::GraphState,
                    prerotate: false,
                    candidates: 32,
                    tau: None,
                    selection: Selection::Auto,
                    reconstruction: ReconMode::Tree,
                    bootstrap: 0,
                };
                Ok(run_experiment(&config)?.fidelity.unwrap())
            })
            .collect::<puretomo::Result<_>>()?;
        fids.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!(
            "{shots:>10} {:>12.6} {:>12.6}",
            fids[fids.len() / 2],
            fids[0]
        );
    }
    Ok(())
}
