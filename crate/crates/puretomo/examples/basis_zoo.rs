//! Tour of the measurement families for a 3-qubit system: the original five
//! bases (entangled odd pairs), their disentangled images, the 2n+1 product
//! family, and the adaptive schedules, with the edges each basis probes.

use puretomo::bases::{
    disentangled_five_bases, is_product_vector, original_five_bases, two_n_plus_one_bases,
    LoccSchedule,
};

fn main() -> puretomo::Result<()> {
    let n = 3;

    println!("original five bases (edges on the label cycle):");
    for basis in original_five_bases(n)?.iter() {
        let product = basis
            .vectors
            .iter()
            .all(|v| is_product_vector(n, v).unwrap().is_product);
        println!(
            "  {:14} edges {:?} separable: {product}",
            basis.id,
            basis.edges()
        );
    }

    println!("\ndisentangled five bases (edges on the hypercube cycle):");
    for basis in disentangled_five_bases(n)?.iter() {
        println!("  {:14} edges {:?}", basis.id, basis.edges());
    }

    println!("\n2n+1 product bases (one direction class each):");
    for basis in two_n_plus_one_bases(n)? {
        println!("  {:14} edges {:?}", basis.id, basis.edges());
    }

    println!("\nadaptive schedules and the product bases they induce:");
    for b_c in [false, true] {
        for b_s in [false, true] {
            let sched = LoccSchedule::new(n, b_c, b_s)?;
            let basis = sched.projector_basis();
            println!(
                "  b_C={} b_S={} -> {:12} edges {:?}",
                b_c as u8,
                b_s as u8,
                basis.id,
                basis.edges()
            );
        }
    }
    Ok(())
}
