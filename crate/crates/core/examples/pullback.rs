// The Dirac operator of a second metric pulled back to the spinors of the
// first, against transporting, differentiating and transporting back.

use nalgebra::DMatrix;
use spinlab::clifford::GammaRep;
use spinlab::grid::{MetricField, TorusGrid};
use spinlab::metric::BilinearForm;
use spinlab::random::FieldSampler;
use spinlab::spinor::{conjugated_dirac, dirac_pullback, SpinGeometry, SpinStructureTwist};

fn relative_gap(n: usize) -> spinlab::Result<f64> {
    let grid = TorusGrid::uniform(2, n)?;
    let rep = GammaRep::new(2, 0)?;
    let g = MetricField::conformal(&grid, 2, 0, |x| 0.2 * x[0].sin() + 0.1 * x[1].cos())?;
    let h = MetricField::constant(&grid, &BilinearForm::new(DMatrix::from_row_slice(2, 2, &[1.5, 0.2, 0.2, 0.8]))?)?;
    let psi = FieldSampler::new(5).spinor(&grid, &SpinStructureTwist::periodic(2), 2, 1, 1.0)?;
    let direct = dirac_pullback(&SpinGeometry::new(&rep, &g)?, &h, &psi)?;
    let oracle = conjugated_dirac(&rep, &g, &h, &psi)?;
    Ok(direct.sub(&oracle)?.max_abs() / oracle.max_abs())
}

pub fn run_example() -> spinlab::Result<()> {
    let (coarse, fine) = (relative_gap(32)?, relative_gap(64)?);
    println!("relative gap {coarse:.2e} at n=32, {fine:.2e} at n=64, ratio {:.1}", coarse / fine);
    assert!(fine <= 1e-3);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("pullback example");
}
