// The stretch and root maps between two pointwise metrics, the frame
// rotation they induce, and horizontal transport of a frame.

use spinlab::metric::{comparison_a, comparison_b, horizontal_transport, joinable, root_residual, stretch_residual, JOIN_SAMPLES};
use spinlab::random::FieldSampler;

pub fn run_example() -> spinlab::Result<()> {
    let mut rng = FieldSampler::new(7);
    for sig in [(2, 0), (3, 1)] {
        let (g, h) = loop {
            let g = rng.form(sig, 0.3);
            let h = rng.form(sig, 0.3);
            if joinable(&g, &h, JOIN_SAMPLES) {
                break (g, h);
            }
        };
        let a = comparison_a(&g, &h)?;
        let b = comparison_b(&g, &h)?;
        let back = comparison_b(&h, &g)?;
        let round = (&back.matrix * &b.matrix - nalgebra::DMatrix::identity(sig.0 + sig.1, sig.0 + sig.1)).amax();
        println!(
            "{sig:?}: stretch {:.1e} root {:.1e} round trip {:.1e}",
            stretch_residual(&g, &h, &a.matrix),
            root_residual(&g, &h, &b.matrix),
            round
        );
        assert!(root_residual(&g, &h, &b.matrix) <= 1e-12 && round <= 1e-12);
    }

    let g = rng.form((2, 0), 0.3);
    let h = rng.form((2, 0), 0.3);
    let report = horizontal_transport(&g, &h, 32)?;
    println!("transported frame misses the root frame by {:.1e}", report.gap);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("comparison map example");
}
