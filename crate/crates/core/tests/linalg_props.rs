//! Property checks for the least-squares solver over randomly generated
//! systems.

mod common;

use abeltc_core::linalg::{solve_min_norm_ls, DenseMatrix, DEFAULT_RANK_TOL};
use common::{max_abs, Rng};

fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.range(-1.0, 1.0);
        }
    }
    m
}

fn random_vector(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.range(-1.0, 1.0)).collect()
}

#[test]
fn random_full_rank_square_systems_solve_to_small_residual() {
    let mut rng = Rng::new(0x5eed_0a01);
    for size in 2..=12usize {
        let mut solved = 0;
        while solved < 5 {
            let m = random_matrix(&mut rng, size, size);
            let b = random_vector(&mut rng, size);
            let sol = solve_min_norm_ls(&m, &b, DEFAULT_RANK_TOL).unwrap();
            if sol.condition_estimate > 1e6 {
                // A nearly singular draw; the residual bound below is only
                // meaningful for genuinely full-rank systems.
                continue;
            }
            assert_eq!(sol.rank, size);
            let mut defect = m.mul_vec(&sol.x);
            for (d, bi) in defect.iter_mut().zip(b.iter()) {
                *d -= bi;
            }
            assert!(
                max_abs(&defect) <= 1e-10 * max_abs(&b),
                "size {size}: residual {:.3e}",
                max_abs(&defect)
            );
            solved += 1;
        }
    }
}

#[test]
fn appending_zero_row_leaves_solution_unchanged() {
    let mut rng = Rng::new(0x5eed_0a02);
    for size in 2..=10usize {
        let m = random_matrix(&mut rng, size, size);
        let b = random_vector(&mut rng, size);
        let base = solve_min_norm_ls(&m, &b, DEFAULT_RANK_TOL).unwrap();

        let mut extended_rows: Vec<Vec<f64>> =
            (0..size).map(|i| (0..size).map(|j| m[(i, j)]).collect()).collect();
        extended_rows.push(vec![0.0; size]);
        let extended = DenseMatrix::from_rows(&extended_rows);
        let mut b_ext = b.clone();
        b_ext.push(0.0);
        let with_zero_row = solve_min_norm_ls(&extended, &b_ext, DEFAULT_RANK_TOL).unwrap();

        for (a, b) in base.x.iter().zip(with_zero_row.x.iter()) {
            assert!((a - b).abs() <= 1e-12, "size {size}: {a} vs {b}");
        }
    }
}

#[test]
fn min_norm_solution_is_orthogonal_to_constructed_null_space() {
    let mut rng = Rng::new(0x5eed_0a03);
    for size in 3..=8usize {
        // Duplicate column 0 into column 1, so e0 - e1 spans a known null
        // direction.
        let mut m = random_matrix(&mut rng, size, size);
        for i in 0..size {
            m[(i, 1)] = m[(i, 0)];
        }
        let b = {
            // Consistent right-hand side: b = M y for a random y.
            let y = random_vector(&mut rng, size);
            m.mul_vec(&y)
        };
        let sol = solve_min_norm_ls(&m, &b, DEFAULT_RANK_TOL).unwrap();
        assert!(sol.rank < size, "duplicated column must drop the rank");
        assert!(sol.residual_norm <= 1e-10, "residual {:.3e}", sol.residual_norm);

        let overlap = sol.x[0] - sol.x[1];
        let norm = sol.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(
            overlap.abs() <= 1e-10 * (1.0 + norm),
            "size {size}: null-space overlap {overlap:.3e}"
        );

        // Perturbing along the null direction strictly increases the norm.
        let norm_sq: f64 = sol.x.iter().map(|v| v * v).sum();
        for eps in [1e-2, -1e-2, 0.5] {
            let mut perturbed = sol.x.clone();
            perturbed[0] += eps;
            perturbed[1] -= eps;
            let perturbed_sq: f64 = perturbed.iter().map(|v| v * v).sum();
            assert!(perturbed_sq > norm_sq);
        }
    }
}
