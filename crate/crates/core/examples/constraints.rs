// Hamiltonian and momentum constraints of initial data on a torus slice,
// and the wave-gauge vector.

use spinlab::edm::{constraint_residual, wave_gauge_residual, EdmParams, InitialData};
use spinlab::grid::{curvature, MetricField, TorusGrid};

pub fn run_example() -> spinlab::Result<()> {
    let grid = TorusGrid::uniform(3, 12)?;
    let params = EdmParams::single(0.0, 0.0);
    let empty = EdmParams::new(vec![], vec![])?;
    let flat = InitialData::vacuum(MetricField::flat(&grid, 3, 0)?, 1)?;
    let (h, m) = constraint_residual(&flat, &params)?.norms();
    println!("flat vacuum: hamiltonian {h:.1e}, momentum {m:.1e}");
    assert!(h.max(m) <= 1e-13);

    // time-symmetric vacuum data: the hamiltonian constraint is the scalar curvature
    let g = MetricField::conformal(&grid, 3, 0, |x| 0.1 * x[2].sin())?;
    let r = constraint_residual(&InitialData::vacuum(g.clone(), 0)?, &empty)?;
    let (_, scal) = curvature(&g)?;
    let gap = r.hamiltonian.sub(&scal)?.max_abs();
    println!("conformal slice: hamiltonian {:.3e}, differs from scal by {gap:.1e}", r.norms().0);

    let q = wave_gauge_residual(&MetricField::flat(&grid, 3, 0)?, &g)?;
    println!("wave gauge vector of the conformal metric against flat: {:.3e}", q.max_abs());
    assert_eq!(wave_gauge_residual(&g, &g)?.max_abs(), 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("constraints example");
}
