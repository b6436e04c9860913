//! Grid check of the hitting measure against its closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{hitting_measure_closed, hitting_measure_quadrature_with_tol, ModelParams};

pub const DEFAULT_DIMS: [usize; 3] = [2, 3, 4];
pub const DEFAULT_LAMBDAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_LENGTHS: [f64; 3] = [0.1, 1.0, 5.0];
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Relative tolerance handed to the quadrature for each cell.
const CELL_QUADRATURE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CroftonCell {
    pub d: usize,
    pub lambda: f64,
    pub h: f64,
    pub gamma: f64,
    pub quadrature: f64,
    pub closed: f64,
    /// Relative error, or the absolute difference when the closed value is 0.
    pub rel_error: f64,
    pub pass: bool,
}

/// Evaluates every `(d, λ, h)` cell, in row-major order of the inputs.
pub fn verify_crofton_grid(
    dims: &[usize],
    lambdas: &[f64],
    lengths: &[f64],
    gamma: f64,
    tolerance: f64,
) -> Result<Vec<CroftonCell>> {
    let mut cells = Vec::with_capacity(dims.len() * lambdas.len() * lengths.len());
    for &d in dims {
        for &lambda in lambdas {
            for &h in lengths {
                cells.push((d, lambda, h));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(d, lambda, h)| {
            let p = ModelParams::new(d, lambda, gamma)?;
            let quadrature = hitting_measure_quadrature_with_tol(&p, h, CELL_QUADRATURE_TOL)?;
            let closed = hitting_measure_closed(d, gamma, h)?;
            let diff = (quadrature - closed).abs();
            let rel_error = if closed == 0.0 { diff } else { diff / closed.abs() };
            Ok(CroftonCell {
                d,
                lambda,
                h,
                gamma,
                quadrature,
                closed,
                rel_error,
                pass: rel_error <= tolerance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_grid_passes() {
        let cells =
            verify_crofton_grid(&DEFAULT_DIMS, &DEFAULT_LAMBDAS, &DEFAULT_LENGTHS, PI, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(cells.len(), 45);
        for c in &cells {
            assert!(c.pass, "{c:?}");
        }
        assert_eq!((cells[0].d, cells[0].lambda, cells[0].h), (2, 0.0, 0.1));
        assert_eq!((cells[44].d, cells[44].lambda, cells[44].h), (4, 1.0, 5.0));
    }

    #[test]
    fn zero_length_cells_are_exact() {
        let cells = verify_crofton_grid(&[2, 3], &[0.0, 1.0], &[0.0], PI, 0.0).unwrap();
        assert!(cells.iter().all(|c| c.pass && c.quadrature == 0.0 && c.closed == 0.0));
    }

    #[test]
    fn impossible_tolerance_fails() {
        let cells = verify_crofton_grid(&DEFAULT_DIMS, &DEFAULT_LAMBDAS, &DEFAULT_LENGTHS, PI, 1e-16).unwrap();
        assert!(cells.iter().any(|c| !c.pass));
    }
}
