//! Reconstruct from externally measured counts: Pauli-subset settings (all
//! qubits in Z except one in X or Y) map onto the 2n+1 product family, and
//! reconstruction proceeds without a known target using likelihood-based
//! candidate selection.

use std::collections::BTreeMap;

use puretomo::bases::{computational_basis, two_n_plus_one_bases};
use puretomo::graph::EstimationGraph;
use puretomo::measure::{
    ingest_pauli_counts, outcome_probabilities, render_label, sample_counts, BitOrder,
    PauliCountsFile, PauliSettingRecord,
};
use puretomo::recon::{
    edge_estimates, reconstruct_tree, select_best_reconstruction, SelectionMode,
};
use puretomo::state::{fidelity, prepare_graph_state};

fn main() -> puretomo::Result<()> {
    let n = 3usize;
    let secret = prepare_graph_state(n)?; // pretend this lives on hardware
    let shots = 50_000u64;

    // fabricate the external file: Z-only plus every single-qubit X/Y setting
    let mut settings = Vec::new();
    let mut make = |setting: &str, basis_id: &str, stream: u64| -> puretomo::Result<()> {
        let basis = match basis_id {
            "computational" => computational_basis(n),
            _ => two_n_plus_one_bases(n)?
                .into_iter()
                .find(|b| b.id == basis_id)
                .unwrap(),
        };
        let dist = outcome_probabilities(&secret, &basis, None)?;
        let table = sample_counts(basis_id, &dist, shots, 21, stream);
        let counts: BTreeMap<String, u64> = table
            .counts
            .iter()
            .map(|(&l, &c)| (render_label(l, n, BitOrder::Lsb), c))
            .collect();
        settings.push(PauliSettingRecord {
            setting: setting.to_string(),
            counts,
            y_sign: None,
        });
        Ok(())
    };
    make("ZZZ", "computational", 0)?;
    make("XZZ", "h-q0", 1)?;
    make("ZXZ", "h-q1", 2)?;
    make("ZZX", "h-q2", 3)?;
    make("YZZ", "sh-q0", 4)?;
    make("ZYZ", "sh-q1", 5)?;
    make("ZZY", "sh-q2", 6)?;
    let file = PauliCountsFile {
        n,
        bit_order: BitOrder::Lsb,
        seed: 21,
        settings,
    };

    // ingest and reconstruct blindly
    let ingested = ingest_pauli_counts(&file)?;
    println!("ingested {} settings:", ingested.len());
    for s in &ingested {
        println!(
            "  {} ({} shots) probing {} edges",
            s.counts.basis_id,
            s.counts.shots,
            s.basis.edges().len()
        );
    }
    let bases: Vec<_> = ingested.iter().map(|s| s.basis.clone()).collect();
    let counts: Vec<_> = ingested.iter().map(|s| s.counts.clone()).collect();
    let dists: Vec<_> = counts.iter().map(|c| c.empirical()).collect();
    let weights = dists[0].probabilities().to_vec();
    let estimates = edge_estimates(
        &bases,
        &dists,
        &vec![shots as f64; bases.len()],
        &weights,
        shots as f64,
    );
    let graph = EstimationGraph::hypercube(n, weights.clone())?;
    let (pruned, connected) = graph.prune_and_check_connectivity(1.0 / (10.0 * shots as f64));
    assert!(connected);
    let mut candidates = Vec::new();
    let tree = pruned.reconstruction_tree(None, None)?;
    candidates.push(reconstruct_tree(&pruned, &tree, &estimates, &weights)?);
    let mut rng = puretomo::measure::stream_rng(21, 99);
    for _ in 0..8 {
        let t = pruned.randomized_shortest_path_tree(tree.root, &mut rng)?;
        candidates.push(reconstruct_tree(&pruned, &t, &estimates, &weights)?);
    }
    let (best, ll) = select_best_reconstruction(
        candidates,
        &SelectionMode::Blind {
            bases: &bases,
            counts: &counts,
        },
    )?;
    println!("\nblind selection by multinomial log-likelihood: {ll:.1}");
    println!(
        "fidelity against the hidden target: {:.6}",
        fidelity(&best.state(), &secret)?
    );
    Ok(())
}
