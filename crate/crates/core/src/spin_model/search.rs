use serde::{Deserialize, Serialize};

use super::coupling::{block_for_direction, CouplingMatrix};
use super::cyclicity::ideal_cyclicity;
use super::tensor::{FieldOrientation, GTensor};
use crate::error::Result;
use crate::fitting::{least_squares, nelder_mead, LeastSquaresOptions, SimplexOptions};

const GRID_STEP_DEG: f64 = 2.0;
const REFINE_TOL_DEG: f64 = 1e-4;
const SEEDS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Best field direction (unit magnitude).
    pub orientation: FieldOrientation,
    /// Smallest `|g_perp|` found.
    pub min_g_perp: f64,
    /// Ideal cyclicity at that orientation.
    pub cyclicity: f64,
}

fn g_perp_abs(m: &CouplingMatrix, gg: &GTensor, ge: &GTensor, phi: f64, theta: f64) -> f64 {
    let (sp, cp) = phi.to_radians().sin_cos();
    let (st, ct) = theta.to_radians().sin_cos();
    let dir = nalgebra::Vector3::new(st * cp, st * sp, ct);
    block_for_direction(m, gg, ge, &dir)[(0, 1)].norm()
}

/// Global search for the field direction minimizing the spin-flip coupling:
/// a 2° grid over the sphere, simplex refinement of the best grid cells to
/// 1e-4°, then a Gauss–Newton polish on `|g_perp|`.
pub fn max_cyclicity_search(
    m: &CouplingMatrix,
    g_ground: &GTensor,
    g_excited: &GTensor,
) -> Result<SearchResult> {
    let f = |phi: f64, theta: f64| g_perp_abs(m, g_ground, g_excited, phi, theta);

    let n_phi = (360.0 / GRID_STEP_DEG) as usize;
    let n_theta = (180.0 / GRID_STEP_DEG) as usize + 1;
    let mut grid = Vec::with_capacity(n_phi * n_theta);
    for i in 0..n_phi {
        for j in 0..n_theta {
            let (phi, theta) = (i as f64 * GRID_STEP_DEG, j as f64 * GRID_STEP_DEG);
            grid.push((f(phi, theta), phi, theta));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));

    // distinct seeds: skip grid points adjacent to an already chosen seed
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    for &(_, phi, theta) in &grid {
        if seeds.len() == SEEDS {
            break;
        }
        let here = FieldOrientation::angles(phi, theta)?;
        let close = seeds.iter().any(|&(p, t)| {
            FieldOrientation::angles(p, t)
                .map(|s| s.angle_to(&here) < 3.0 * GRID_STEP_DEG)
                .unwrap_or(false)
        });
        if !close {
            seeds.push((phi, theta));
        }
    }

    let mut best = (f64::INFINITY, 0.0, 0.0);
    for (phi0, theta0) in seeds {
        let simplex = nelder_mead(
            |x| f(x[0], x[1]).powi(2),
            &[phi0, theta0],
            &[GRID_STEP_DEG, GRID_STEP_DEG],
            SimplexOptions {
                max_iterations: 500,
                x_tol: REFINE_TOL_DEG,
                f_tol: 0.0,
            },
        );
        let polished = least_squares(
            |x| vec![f(x[0], x[1])],
            &simplex.x,
            &["phi", "theta"],
            LeastSquaresOptions {
                simplex_iterations: 0,
                max_iterations: 100,
                rel_tol: 1e-14,
                step_tol: 1e-15,
                scale_covariance: false,
            },
        );
        let (phi, theta) = match polished {
            Ok(rep) if rep.residual_norm < f(simplex.x[0], simplex.x[1]) => {
                (rep.parameters[0].value, rep.parameters[1].value)
            }
            _ => (simplex.x[0], simplex.x[1]),
        };
        let value = f(phi, theta);
        if value < best.0 {
            best = (value, phi, theta);
        }
    }

    let orientation = FieldOrientation::angles(best.1, best.2)?;
    let block = block_for_direction(m, g_ground, g_excited, &orientation.direction());
    Ok(SearchResult {
        orientation,
        min_g_perp: block[(0, 1)].norm(),
        cyclicity: ideal_cyclicity(block[(0, 0)], block[(0, 1)])?,
    })
}
