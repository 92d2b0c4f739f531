// Gamma matrices in every signature up to dimension 6, their algebraic
// residuals, and the sign flip of the spin lift along a full turn.

use nalgebra::DMatrix;
use spinlab::clifford::{spin_lift_along, CMatrix, GammaRep};

pub fn run_example() -> spinlab::Result<()> {
    for m in 1..=6 {
        for s in 0..=m {
            let rep = GammaRep::new(m - s, s)?;
            println!(
                "({}, {s}) N={:2} anticommutator {:.1e} adjoint {:.1e}",
                m - s,
                rep.spinor_dim(),
                rep.anticommutator_residual(),
                rep.adjoint_residual()
            );
            assert!(rep.anticommutator_residual() <= 1e-12 && rep.adjoint_residual() <= 1e-12);
        }
    }

    let rep = GammaRep::new(3, 0)?;
    let turn = |t: f64| {
        let (sn, cs) = (std::f64::consts::TAU * t).sin_cos();
        Ok(DMatrix::from_row_slice(3, 3, &[cs, -sn, 0.0, sn, cs, 0.0, 0.0, 0.0, 1.0]))
    };
    let lift = spin_lift_along(&rep, turn)?;
    let defect = (lift.lambda + CMatrix::identity(2, 2)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    println!("full turn lifts to -I up to {defect:.1e}");
    assert!(defect <= 1e-10);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("clifford example");
}
