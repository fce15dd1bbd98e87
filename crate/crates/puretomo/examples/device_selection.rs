//! Pick the best chain of physical qubits on a calibration graph, compare
//! the shortest-path-tree heuristic against the exhaustive optimum, and
//! benchmark the selection with the echoed-preparation Hellinger harness.

use puretomo::hwopt::{
    best_fixed_length_path, compare_selection_hellinger, exhaustive_paths_oracle, DeviceEdgeFile,
    DeviceGraph, DeviceGraphFile, DeviceNodeFile, QubitPath,
};

fn main() -> puretomo::Result<()> {
    // a ring of eight qubits: one clean arc, one noisy arc
    let device = DeviceGraph::from_file(&DeviceGraphFile {
        directed: false,
        nodes: vec![
            DeviceNodeFile {
                id: 0,
                weight: 0.002,
            },
            DeviceNodeFile {
                id: 1,
                weight: 0.001,
            },
            DeviceNodeFile {
                id: 2,
                weight: 0.003,
            },
            DeviceNodeFile {
                id: 3,
                weight: 0.002,
            },
            DeviceNodeFile {
                id: 4,
                weight: 0.25,
            },
            DeviceNodeFile {
                id: 5,
                weight: 0.30,
            },
            DeviceNodeFile {
                id: 6,
                weight: 0.28,
            },
            DeviceNodeFile {
                id: 7,
                weight: 0.26,
            },
        ],
        edges: vec![
            DeviceEdgeFile {
                a: 0,
                b: 1,
                weight: 0.004,
            },
            DeviceEdgeFile {
                a: 1,
                b: 2,
                weight: 0.003,
            },
            DeviceEdgeFile {
                a: 2,
                b: 3,
                weight: 0.005,
            },
            DeviceEdgeFile {
                a: 3,
                b: 4,
                weight: 0.02,
            },
            DeviceEdgeFile {
                a: 4,
                b: 5,
                weight: 0.22,
            },
            DeviceEdgeFile {
                a: 5,
                b: 6,
                weight: 0.25,
            },
            DeviceEdgeFile {
                a: 6,
                b: 7,
                weight: 0.21,
            },
            DeviceEdgeFile {
                a: 7,
                b: 0,
                weight: 0.02,
            },
        ],
    })?;

    let length = 4;
    let heuristic = best_fixed_length_path(&device, length)?;
    let oracle = exhaustive_paths_oracle(&device, length)?;
    println!(
        "heuristic chain {:?} at cost {:.4}",
        heuristic.nodes, heuristic.cost
    );
    println!(
        "oracle    chain {:?} at cost {:.4}",
        oracle.nodes, oracle.cost
    );
    println!("gap {:.4}\n", (heuristic.cost - oracle.cost).max(0.0));

    let control = QubitPath {
        nodes: vec![4, 5, 6, 7],
        cost: 0.0,
    };
    let seeds: Vec<u64> = (0..7).collect();
    let cmp = compare_selection_hellinger(&device, &heuristic, &control, 3000, &seeds)?;
    println!("echoed-preparation Hellinger distances to the ideal point outcome:");
    for s in &cmp.per_seed {
        println!(
            "  seed {}: optimized {:.4}  control {:.4}",
            s.seed, s.optimized, s.control
        );
    }
    println!(
        "medians: optimized {:.4}, control {:.4}",
        cmp.median_optimized, cmp.median_control
    );
    Ok(())
}
