// Derivative of the action along a random direction: Richardson-extrapolated
// differences, the exact first variation, and the calibrated residual pairing.

use spinlab::clifford::GammaRep;
use spinlab::edm::{calibration, el_consistency, first_variation, Direction, EdmFields, EdmParams};
use spinlab::grid::TorusGrid;
use spinlab::random::FieldSampler;
use spinlab::spinor::SpinStructureTwist;

pub fn run_example() -> spinlab::Result<()> {
    let grid = TorusGrid::uniform(2, 16)?;
    let rep = GammaRep::new(2, 0)?;
    let mut rng = FieldSampler::new(4);
    let params = EdmParams::single(0.7, 0.4);
    let fields = EdmFields {
        metric: rng.metric(&grid, (2, 0), 1, 0.15)?,
        spinors: vec![rng.spinor(&grid, &SpinStructureTwist::periodic(2), 2, 1, 0.5)?],
        potential: rng.one_form(&grid, 1, 0.4),
    };
    let dir = Direction::random(&mut rng, &fields, (0.1, 0.3, 0.3))?;
    let cal = calibration()?;
    let report = el_consistency(&rep, &params, &fields, &dir, 1e-3)?;
    let exact = first_variation(&rep, &params, &fields, &dir)?;
    println!("calibrated constants {:?} (misfit {:.3})", cal.c, cal.misfit);
    println!(
        "dL {:.8}, exact {exact:.8}, calibrated pairing {:.8}, relative gap {:.2e}",
        report.dl, report.pairing, report.relative_gap
    );
    assert!((exact - report.dl).abs() <= 1e-5 * exact.abs().max(1.0));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("euler-lagrange example");
}
