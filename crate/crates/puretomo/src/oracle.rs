//! Independent brute-force oracles used by tests and the `oracle`
//! subcommand. These deliberately avoid the closed forms and fast paths they
//! cross-check.

use num_bigint::BigInt;

use crate::bits::hamming;

/// Number of spanning trees of the n-dimensional hypercube via the
/// matrix-tree theorem: determinant of the reduced Laplacian, computed
/// exactly with fraction-free Gaussian elimination.
pub fn hypercube_spanning_trees_matrix_tree(n: usize) -> BigInt {
    let dim = 1usize << n;
    let m = dim - 1; // drop vertex 0
    let mut a = vec![vec![BigInt::from(0); m]; m];
    for r in 0..m {
        a[r][r] = BigInt::from(n as i64);
        for c in 0..m {
            if r != c && hamming(r + 1, c + 1) == 1 {
                a[r][c] = BigInt::from(-1);
            }
        }
    }
    bareiss_determinant(a)
}

/// Exact integer determinant (Bareiss algorithm).
fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let m = a.len();
    if m == 0 {
        return BigInt::from(1);
    }
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..m - 1 {
        if a[k][k] == BigInt::from(0) {
            // pivot search
            let swap = (k + 1..m).find(|&r| a[r][k] != BigInt::from(0));
            match swap {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::from(0),
            }
        }
        for i in k + 1..m {
            for j in k + 1..m {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev; // exact division, Bareiss invariant
            }
        }
        prev = a[k][k].clone();
        for i in k + 1..m {
            a[i][k] = BigInt::from(0);
        }
    }
    sign * a[m - 1][m - 1].clone()
}
