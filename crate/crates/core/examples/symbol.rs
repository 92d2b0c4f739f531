// Empirical principal symbols: the Dirac operator against Clifford
// multiplication, and the square of a pulled-back operator against the
// two candidate quadratic forms.

use spinlab::clifford::GammaRep;
use spinlab::edm::{clifford_symbol, principal_symbol, pullback_symbol_report};
use spinlab::grid::TorusGrid;
use spinlab::random::FieldSampler;
use spinlab::spinor::{dirac, SpinGeometry, SpinStructureTwist};

pub fn run_example() -> spinlab::Result<()> {
    let grid = TorusGrid::uniform(2, 64)?;
    let rep = GammaRep::new(2, 0)?;
    let mut rng = FieldSampler::new(8);
    let (g, h) = rng.metric_pair(&grid, (2, 0), 1, 0.2)?;
    let omega = [0.7, -1.3];
    let base = grid.flat_index(&[20, 36]);
    let geom = SpinGeometry::new(&rep, &g)?;
    let twist = SpinStructureTwist::periodic(2);
    let empirical = principal_symbol(|psi| dirac(&geom, psi), 1, &grid, &twist, 2, &omega, base)?;
    let deviation = (&empirical - clifford_symbol(&geom, base, &omega)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    println!("Dirac symbol deviation {deviation:.1e}");
    assert!(deviation <= 1e-8);

    let report = pullback_symbol_report(&rep, &g, &h, &omega, base, 1e-6)?;
    println!(
        "square of the pulled-back operator matches {:?}: g-form {:.3e} off, h-form {:.3e} off",
        report.matches, report.g_deviation, report.h_deviation
    );
    assert!(report.g_deviation.min(report.h_deviation) <= 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("symbol example");
}
