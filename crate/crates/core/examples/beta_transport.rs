// Identification of spinor fields for two metrics: round trip, pointwise
// isometry and intertwining of Clifford multiplication.

use spinlab::clifford::GammaRep;
use spinlab::grid::TorusGrid;
use spinlab::random::FieldSampler;
use spinlab::spinor::{beta_residuals, SpinStructureTwist};

pub fn run_example() -> spinlab::Result<()> {
    let grid = TorusGrid::uniform(2, 16)?;
    let mut rng = FieldSampler::new(11);
    for sig in [(2, 0), (1, 1)] {
        let rep = GammaRep::new(sig.0, sig.1)?;
        let (g, h) = rng.metric_pair(&grid, sig, 1, 0.2)?;
        let psi = rng.spinor(&grid, &SpinStructureTwist::antiperiodic(2), rep.spinor_dim(), 1, 1.0)?;
        let r = beta_residuals(&rep, &g, &h, &psi)?;
        println!(
            "{sig:?}: round trip {:.1e}, isometry {:.1e}, intertwining {:.1e}",
            r.round_trip, r.isometry, r.intertwining
        );
        assert!(r.round_trip <= 1e-9 && r.isometry <= 1e-9 && r.intertwining <= 1e-9);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("beta transport example");
}
