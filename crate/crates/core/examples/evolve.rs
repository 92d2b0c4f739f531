// Dirac evolution on the flat 1+1 cylinder: a travelling plane wave against
// the exact solution, with the conserved charge monitored.

use spinlab::cauchy::{evolve_dirac, plane_wave_solution, EvolutionConfig};

pub fn run_example() -> spinlab::Result<()> {
    let n = 256;
    let probe = EvolutionConfig::new(n, 0.5, 1, 0.0);
    let dt = 0.5 * std::f64::consts::TAU / n as f64;
    let steps = (std::f64::consts::TAU / dt).round() as usize;
    let cfg = EvolutionConfig { steps, ..probe };
    let grid = cfg.grid()?;
    let twist = cfg.spin_structure()?;
    let psi0 = plane_wave_solution(&grid, &twist, 1.0, true, 0.0)?;
    let traj = evolve_dirac(&cfg, &psi0)?;
    let t_end = *traj.times.last().expect("times");
    let exact = plane_wave_solution(&grid, &twist, 1.0, true, t_end)?;
    let err = traj.final_state.sub(&exact)?.max_abs();
    let q0 = traj.charge[0];
    let drift = traj.charge.iter().fold(0.0f64, |a, q| a.max((q - q0).abs() / q0.abs()));
    println!("{steps} steps to t = {t_end:.6}: error {err:.2e}, charge drift {drift:.1e}");
    assert!(err <= 1e-6 && drift <= 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("evolution example");
}
