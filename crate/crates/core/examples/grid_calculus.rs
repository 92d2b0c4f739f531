// Fourth-order derivatives on the torus, the d/δ adjointness that fixes the
// codifferential sign, and scalar curvature of a conformal metric.

use spinlab::grid::{
    codifferential, curvature, exterior_d, pair_one_forms, pair_two_forms, volume_integrate, MetricField, ScalarField,
    TorusGrid,
};
use spinlab::random::FieldSampler;

fn derivative_error(n: usize) -> spinlab::Result<f64> {
    let grid = TorusGrid::new(&[n])?;
    let f = ScalarField::from_fn(&grid, |x| (3.0 * x[0]).sin());
    let df = f.partial(0)?;
    Ok((0..n).fold(0.0f64, |e, p| e.max((df.value(p) - 3.0 * (3.0 * grid.point(p)[0]).cos()).abs())))
}

pub fn run_example() -> spinlab::Result<()> {
    let (coarse, fine) = (derivative_error(32)?, derivative_error(64)?);
    println!("derivative error {coarse:.2e} -> {fine:.2e}, ratio {:.1}", coarse / fine);
    assert!(coarse / fine > 14.0);

    let grid = TorusGrid::uniform(2, 24)?;
    let mut rng = FieldSampler::new(3);
    let g = rng.metric(&grid, (2, 0), 1, 0.2)?;
    let a = rng.one_form(&grid, 2, 1.0);
    let f = exterior_d(&rng.one_form(&grid, 2, 1.0));
    let left = volume_integrate(&g, &pair_one_forms(&g, &codifferential(&g, &f)?, &a))?;
    let right = volume_integrate(&g, &pair_two_forms(&g, &f, &exterior_d(&a)))?;
    println!("<δF, a> = {left:.12} and <F, da> = {right:.12}");
    assert!((left - right).abs() <= 1e-10 * left.abs().max(1.0));

    let grid = TorusGrid::uniform(2, 48)?;
    let u = |x: &[f64]| 0.1 * x[0].sin() * x[1].cos();
    let g = MetricField::conformal(&grid, 2, 0, u)?;
    let (_, scal) = curvature(&g)?;
    // scal = −2 e^{−2u} Δu and Δu = −2u for this u
    let err = (0..grid.len()).fold(0.0f64, |e, p| {
        let x = grid.point(p);
        e.max((scal.value(p) - 4.0 * u(&x) * (-2.0 * u(&x)).exp()).abs())
    });
    println!("conformal scalar curvature error {err:.1e}");
    assert!(err < 1e-4);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("grid calculus example");
}
