// Dirac spectra of flat tori: the antiperiodic circle against ℤ + ½, with
// the stencil doublers reported apart, and the square torus against ±|k|.

use spinlab::clifford::GammaRep;
use spinlab::grid::{MetricField, TorusGrid};
use spinlab::spinor::{dirac_spectrum, SpinGeometry, SpinStructureTwist};

pub fn run_example() -> spinlab::Result<()> {
    let grid = TorusGrid::new(&[128])?;
    let geom = SpinGeometry::new(&GammaRep::new(1, 0)?, &MetricField::flat(&grid, 1, 0)?)?;
    let spec = dirac_spectrum(&geom, &SpinStructureTwist::antiperiodic(1), 12)?;
    println!("circle, resolved: {:?}", spec.resolved());
    println!("circle, doublers: {:?}", spec.doublers());
    for l in spec.resolved() {
        let off = l.abs() - 0.5;
        assert!((off - off.round()).abs() < 1e-3);
    }

    let grid = TorusGrid::uniform(2, 16)?;
    let geom = SpinGeometry::new(&GammaRep::new(2, 0)?, &MetricField::flat(&grid, 2, 0)?)?;
    let spec = dirac_spectrum(&geom, &SpinStructureTwist::antiperiodic(2), 8)?;
    println!("square torus, resolved: {:?}", spec.resolved());
    for l in spec.resolved() {
        assert!((l.abs() - 0.5f64.sqrt()).abs() < 1e-3);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("flat spectrum example");
}
