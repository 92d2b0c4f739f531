// Einstein–Dirac–Maxwell residuals and action: exact zeros on flat empty
// data, finite values on a random configuration.

use spinlab::clifford::GammaRep;
use spinlab::edm::{edm_residual, lagrangian, EdmFields, EdmParams};
use spinlab::grid::{MetricField, OneFormField, TorusGrid};
use spinlab::random::FieldSampler;
use spinlab::spinor::{SpinStructureTwist, SpinorField};

pub fn run_example() -> spinlab::Result<()> {
    let grid = TorusGrid::uniform(2, 16)?;
    let rep = GammaRep::new(2, 0)?;
    let twist = SpinStructureTwist::periodic(2);
    let params = EdmParams::single(0.5, 1.0);
    let flat = EdmFields {
        metric: MetricField::flat(&grid, 2, 0)?,
        spinors: vec![SpinorField::zeros(&grid, &twist, 2)],
        potential: OneFormField::zeros(&grid),
    };
    let (e, d, m) = edm_residual(&rep, &params, &flat)?.norms();
    println!("flat empty data: einstein {e:.1e}, dirac {d:.1e}, maxwell {m:.1e}");
    assert!(e.max(d).max(m) <= 1e-13);

    let mut rng = FieldSampler::new(21);
    let curved = EdmFields {
        metric: rng.metric(&grid, (2, 0), 1, 0.15)?,
        spinors: vec![rng.spinor(&grid, &twist, 2, 1, 0.5)?],
        potential: rng.one_form(&grid, 1, 0.4),
    };
    let (e, d, m) = edm_residual(&rep, &params, &curved)?.norms();
    println!("random data: einstein {e:.3e}, dirac {d:.3e}, maxwell {m:.3e}");
    println!("action {:.6}", lagrangian(&rep, &params, &curved)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("edm residual example");
}
