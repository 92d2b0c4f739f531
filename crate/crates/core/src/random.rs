//! Seeded random smooth fields: finite trigonometric sums with decaying
//! coefficients, bounded pointwise by the requested amplitude.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{MetricField, OneFormField, ScalarField, TensorField, TorusGrid, VectorField};
use crate::metric::BilinearForm;
use crate::spinor::{SpinStructureTwist, SpinorField};

struct Mode {
    k: Vec<f64>,
    coef: Complex64,
}

type RealSampler = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

pub struct FieldSampler {
    rng: ChaCha8Rng,
}

fn frequencies(m: usize, modes: i32) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-modes..=modes).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

impl FieldSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn complex(&mut self) -> Complex64 {
        Complex64::new(self.uniform(-1.0, 1.0), self.uniform(-1.0, 1.0))
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform(-1.0, 1.0)).collect()
    }

    pub fn complex_vector(&mut self, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| self.complex()).collect()
    }

    fn modes(&mut self, m: usize, modes: i32, amplitude: f64, shift: &[f64]) -> Vec<Mode> {
        let ks = frequencies(m, modes);
        let count = ks.len() as f64;
        ks.into_iter()
            .map(|k| {
                let c = Complex64::from_polar(self.uniform(0.0, 1.0), self.uniform(0.0, 2.0 * std::f64::consts::PI));
                Mode {
                    k: k.iter().zip(shift).map(|(&a, &d)| a as f64 + d).collect(),
                    coef: c * (amplitude / count),
                }
            })
            .collect()
    }

    fn eval(modes: &[Mode], x: &[f64]) -> Complex64 {
        modes
            .iter()
            .map(|md| md.coef * Complex64::from_polar(1.0, md.k.iter().zip(x).map(|(a, b)| a * b).sum()))
            .sum()
    }

    fn real_sampler(&mut self, m: usize, modes: i32, amplitude: f64) -> RealSampler {
        let md = self.modes(m, modes, amplitude, &vec![0.0; m]);
        Box::new(move |x: &[f64]| Self::eval(&md, x).re)
    }

    /// `|f| ≤ amplitude` with frequencies up to `modes` per direction.
    pub fn scalar(&mut self, grid: &TorusGrid, modes: i32, amplitude: f64) -> ScalarField {
        let f = self.real_sampler(grid.dim(), modes, amplitude);
        ScalarField::from_fn(grid, f)
    }

    pub fn one_form(&mut self, grid: &TorusGrid, modes: i32, amplitude: f64) -> OneFormField {
        let m = grid.dim();
        let fs: Vec<_> = (0..m).map(|_| self.real_sampler(m, modes, amplitude)).collect();
        OneFormField::from_fn(grid, |x| fs.iter().map(|f| f(x)).collect())
    }

    pub fn vector_field(&mut self, grid: &TorusGrid, modes: i32, amplitude: f64) -> VectorField {
        let m = grid.dim();
        let fs: Vec<_> = (0..m).map(|_| self.real_sampler(m, modes, amplitude)).collect();
        VectorField::from_fn(grid, |x| fs.iter().map(|f| f(x)).collect())
    }

    pub fn symmetric_tensor(&mut self, grid: &TorusGrid, modes: i32, amplitude: f64) -> TensorField {
        let m = grid.dim();
        let mut fs = Vec::new();
        for _ in 0..m * (m + 1) / 2 {
            fs.push(self.real_sampler(m, modes, amplitude));
        }
        TensorField::from_fn(grid, |x| {
            let mut t = DMatrix::zeros(m, m);
            let mut c = 0;
            for i in 0..m {
                for j in i..m {
                    let v = fs[c](x);
                    t[(i, j)] = v;
                    t[(j, i)] = v;
                    c += 1;
                }
            }
            t
        })
    }

    /// `Λᵀ diag(ε) S² Λ` with `S = exp(diagonal field)` and `Λ = exp(η⁻¹ W)`
    /// for an antisymmetric field `W`, all entries bounded by `amplitude`.
    /// The straight segment to `diag(ε)` is joinable for every amplitude.
    pub fn metric(&mut self, grid: &TorusGrid, signature: (usize, usize), modes: i32, amplitude: f64) -> Result<MetricField> {
        let boost = self.boost_field(grid.dim(), modes, amplitude);
        let scales = self.scale_field(grid.dim(), modes, amplitude);
        Self::assemble(grid, signature, &boost, &scales)
    }

    /// Two random metrics `g`, `h` whose straight segment is joinable and
    /// stays joinable to `diag(ε)`. Riemannian pairs are independent draws;
    /// indefinite pairs share the field `Λ` and differ in `S`, since
    /// independent boosts generically leave the frame domain midway.
    pub fn metric_pair(
        &mut self,
        grid: &TorusGrid,
        signature: (usize, usize),
        modes: i32,
        amplitude: f64,
    ) -> Result<(MetricField, MetricField)> {
        if signature.1 == 0 {
            return Ok((
                self.metric(grid, signature, modes, amplitude)?,
                self.metric(grid, signature, modes, amplitude)?,
            ));
        }
        let boost = self.boost_field(grid.dim(), modes, amplitude);
        let g_scales = self.scale_field(grid.dim(), modes, amplitude);
        let h_scales = self.scale_field(grid.dim(), modes, amplitude);
        Ok((
            Self::assemble(grid, signature, &boost, &g_scales)?,
            Self::assemble(grid, signature, &boost, &h_scales)?,
        ))
    }

    fn boost_field(&mut self, m: usize, modes: i32, amplitude: f64) -> Vec<RealSampler> {
        (0..m * (m - 1) / 2).map(|_| self.real_sampler(m, modes, amplitude)).collect()
    }

    fn scale_field(&mut self, m: usize, modes: i32, amplitude: f64) -> Vec<RealSampler> {
        (0..m).map(|_| self.real_sampler(m, modes, amplitude)).collect()
    }

    fn assemble(
        grid: &TorusGrid,
        signature: (usize, usize),
        boost: &[RealSampler],
        scales: &[RealSampler],
    ) -> Result<MetricField> {
        let eta = BilinearForm::flat(signature.0, signature.1).matrix().clone();
        let m = grid.dim();
        MetricField::from_fn(grid, |x| {
            let mut w = DMatrix::zeros(m, m);
            let mut c = 0;
            for i in 0..m {
                for j in i + 1..m {
                    let v = boost[c](x);
                    w[(i, j)] = v;
                    w[(j, i)] = -v;
                    c += 1;
                }
            }
            let lambda = (&eta * w).exp();
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |i, _| eta[(i, i)] * (2.0 * scales[i](x)).exp()));
            let g = lambda.transpose() * d * lambda;
            (&g + g.transpose()) * 0.5
        })
    }

    /// A random pointwise form `diag(ε) + k` with `|k_ij| ≤ amplitude`.
    pub fn form(&mut self, signature: (usize, usize), amplitude: f64) -> BilinearForm {
        let (r, s) = signature;
        let m = r + s;
        let mut g = BilinearForm::flat(r, s).matrix().clone();
        for i in 0..m {
            for j in i..m {
                let v = self.uniform(-amplitude, amplitude);
                g[(i, j)] += v;
                if i != j {
                    g[(j, i)] += v;
                }
            }
        }
        BilinearForm::new(g).expect("symmetric by construction")
    }

    /// Spinor field respecting the boundary phases of `twist`.
    pub fn spinor(
        &mut self,
        grid: &TorusGrid,
        twist: &SpinStructureTwist,
        spinor_dim: usize,
        modes: i32,
        amplitude: f64,
    ) -> Result<SpinorField> {
        let m = grid.dim();
        let comps: Vec<Vec<Mode>> = (0..spinor_dim)
            .map(|_| self.modes(m, modes, amplitude, twist.delta()))
            .collect();
        SpinorField::from_fn(grid, twist, spinor_dim, |x| comps.iter().map(|md| Self::eval(md, x)).collect())
    }
}
