//! Periodic scalar and vector fields carried in nodal and Fourier form.
//!
//! A field owns a grid and caches both representations lazily: transforming is
//! done at most once per representation and the two forms are kept consistent
//! by construction (fields are immutable after creation). Spectral coefficients
//! use the convention
//!
//! ```text
//! f(x) = sum_k fhat(k) exp(2*pi*i*k.x),   fhat(k) = (1/n^3) sum_x f(x) exp(-2*pi*i*k.x)
//! ```
//!
//! so the mean of the field is the k=0 coefficient, and a unit-amplitude cosine
//! carries coefficient 1/2 at +/-k.

use ndarray::{Array3, Axis, Zip};
use num_complex::Complex64;
use once_cell::sync::OnceCell;
use rustfft::FftPlanner;

use crate::grid::Grid;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Real periodic scalar field on a [`Grid`], stored nodally and/or spectrally.
#[derive(Clone)]
pub struct ScalarField {
    grid: Grid,
    nodal: OnceCell<Array3<f64>>,
    spectral: OnceCell<Array3<Complex64>>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("n", &self.grid.n())
            .field("mean", &self.mean())
            .finish()
    }
}

/// Three-dimensional complex FFT along all axes, in place. `inverse=false`
/// applies the e^{-2*pi*i} sign (analysis); no normalization is applied here.
fn fft3_inplace(data: &mut Array3<Complex64>, inverse: bool) {
    let n = data.shape()[0];
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..3 {
        for mut lane in data.lanes_mut(Axis(axis)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process(&mut buf);
            for (v, b) in lane.iter_mut().zip(buf.iter()) {
                *v = *b;
            }
        }
    }
}

impl ScalarField {
    /// Build from nodal values; the array must be n x n x n.
    pub fn from_nodal(grid: Grid, data: Array3<f64>) -> Self {
        assert_eq!(data.shape(), [grid.n(), grid.n(), grid.n()]);
        let f = ScalarField {
            grid,
            nodal: OnceCell::new(),
            spectral: OnceCell::new(),
        };
        f.nodal.set(data).ok();
        f
    }

    /// Build from spectral coefficients. The caller is responsible for
    /// conjugate symmetry (`fhat(-k) = conj(fhat(k))`); all internal producers
    /// maintain it, and [`ScalarField::from_modes`] is the safe public entry.
    pub fn from_spectral(grid: Grid, data: Array3<Complex64>) -> Self {
        assert_eq!(data.shape(), [grid.n(), grid.n(), grid.n()]);
        let f = ScalarField {
            grid,
            nodal: OnceCell::new(),
            spectral: OnceCell::new(),
        };
        f.spectral.set(data).ok();
        f
    }

    /// The constant field with value `c`.
    pub fn constant(grid: Grid, c: f64) -> Self {
        let mut data = Array3::zeros((grid.n(), grid.n(), grid.n()));
        data[(0, 0, 0)] = Complex64::new(c, 0.0);
        ScalarField::from_spectral(grid, data)
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField::constant(grid, 0.0)
    }

    /// Real field from a list of modes: each entry `(k, c)` contributes
    /// `c e^{2 pi i k.x} + conj(c) e^{-2 pi i k.x}` (so `((k), 0.5)` is
    /// `cos(2 pi k.x)` and `((k), -0.5i)` is `sin(2 pi k.x)`).
    pub fn from_modes(grid: Grid, modes: &[([i64; 3], Complex64)]) -> Self {
        let n = grid.n();
        let mut data = Array3::zeros((n, n, n));
        for &(k, c) in modes {
            let i = (
                grid.index_of(k[0]),
                grid.index_of(k[1]),
                grid.index_of(k[2]),
            );
            let j = (
                grid.index_of(-k[0]),
                grid.index_of(-k[1]),
                grid.index_of(-k[2]),
            );
            data[i] += c;
            data[j] += c.conj();
        }
        ScalarField::from_spectral(grid, data)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Nodal values (computed from the spectral form on first access).
    pub fn nodal(&self) -> &Array3<f64> {
        self.nodal.get_or_init(|| {
            let mut data = self
                .spectral
                .get()
                .expect("field has at least one representation")
                .clone();
            fft3_inplace(&mut data, true);
            data.mapv(|z| z.re)
        })
    }

    /// Spectral coefficients (computed from the nodal form on first access).
    pub fn spectral(&self) -> &Array3<Complex64> {
        self.spectral.get_or_init(|| {
            let nodal = self
                .nodal
                .get()
                .expect("field has at least one representation");
            let mut data = nodal.mapv(|v| Complex64::new(v, 0.0));
            fft3_inplace(&mut data, false);
            let scale = 1.0 / self.grid.len() as f64;
            data.mapv_inplace(|z| z * scale);
            data
        })
    }

    /// Mean over the torus, i.e. the k=0 spectral coefficient.
    pub fn mean(&self) -> f64 {
        self.spectral()[(0, 0, 0)].re
    }

    /// Zero the k=0 coefficient only.
    pub fn project_mean_zero(&self) -> ScalarField {
        let mut data = self.spectral().clone();
        data[(0, 0, 0)] = Complex64::new(0.0, 0.0);
        ScalarField::from_spectral(self.grid, data)
    }

    /// 2/3-rule dealiasing: zero every coefficient with `max_i |k_i| > n/3`.
    pub fn dealias(&self) -> ScalarField {
        let cut = self.grid.dealias_cutoff();
        self.map_spectral(|k, z| {
            if k[0].abs() > cut || k[1].abs() > cut || k[2].abs() > cut {
                Complex64::new(0.0, 0.0)
            } else {
                z
            }
        })
    }

    /// New field with each spectral coefficient replaced by `f(k, coeff)`.
    /// `f` must preserve conjugate symmetry (true for any real even symbol).
    pub fn map_spectral<F>(&self, f: F) -> ScalarField
    where
        F: Fn([i64; 3], Complex64) -> Complex64,
    {
        let src = self.spectral();
        let mut data = src.clone();
        for ((i1, i2, i3), v) in data.indexed_iter_mut() {
            *v = f(self.grid.wavevector((i1, i2, i3)), *v);
        }
        ScalarField::from_spectral(self.grid, data)
    }

    /// Spectral derivative along `axis` (0,1,2): multiply by `2 pi i k_axis`.
    /// The unpaired Nyquist mode is zeroed to keep the result real.
    pub fn derivative(&self, axis: usize) -> ScalarField {
        let nyq = self.grid.nyquist();
        self.map_spectral(|k, z| {
            if k[axis] == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, TWO_PI * k[axis] as f64) * z
            }
        })
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_spectral(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_spectral(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map_spectral(|_, z| z * s)
    }

    pub fn add_constant(&self, c: f64) -> ScalarField {
        let mut data = self.spectral().clone();
        data[(0, 0, 0)] += Complex64::new(c, 0.0);
        ScalarField::from_spectral(self.grid, data)
    }

    fn zip_spectral<F>(&self, other: &ScalarField, f: F) -> ScalarField
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        assert_eq!(self.grid, other.grid);
        let mut data = self.spectral().clone();
        Zip::from(&mut data)
            .and(other.spectral())
            .for_each(|a, &b| *a = f(*a, b));
        ScalarField::from_spectral(self.grid, data)
    }

    /// Pointwise nodal product (no dealiasing).
    pub fn mul_nodal(&self, other: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, other.grid);
        let mut data = self.nodal().clone();
        Zip::from(&mut data)
            .and(other.nodal())
            .for_each(|a, &b| *a *= b);
        ScalarField::from_nodal(self.grid, data)
    }

    /// Nodal product followed by 2/3-rule dealiasing.
    pub fn mul_dealiased(&self, other: &ScalarField) -> ScalarField {
        self.mul_nodal(other).dealias()
    }

    /// Pointwise power `f^p` on nodal values clamped below at `floor`.
    pub fn powf_floored(&self, p: f64, floor: f64) -> ScalarField {
        ScalarField::from_nodal(self.grid, self.nodal().mapv(|v| v.max(floor).powf(p)))
    }

    pub fn min_nodal(&self) -> f64 {
        self.nodal().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_nodal(&self) -> f64 {
        self.nodal().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Quadrature inner product `(1/n^3) sum f g`.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid);
        let mut acc = 0.0;
        Zip::from(self.nodal())
            .and(other.nodal())
            .for_each(|&a, &b| acc += a * b);
        acc / self.grid.len() as f64
    }

    /// Discrete L2 norm, `sqrt((1/n^3) sum f^2)`.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Discrete Lp norm, `((1/n^3) sum |f|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p > 0.0);
        let mean: f64 =
            self.nodal().iter().map(|v| v.abs().powf(p)).sum::<f64>() / self.grid.len() as f64;
        mean.powf(1.0 / p)
    }

    /// Discrete L1 norm.
    pub fn l1_norm(&self) -> f64 {
        self.nodal().iter().map(|v| v.abs()).sum::<f64>() / self.grid.len() as f64
    }

    /// Spectral coefficient at wavenumber `k`.
    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.spectral()[(
            self.grid.index_of(k[0]),
            self.grid.index_of(k[1]),
            self.grid.index_of(k[2]),
        )]
    }
}

/// Three-component vector field; houses u and the forcing g.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(c1: ScalarField, c2: ScalarField, c3: ScalarField) -> Self {
        assert_eq!(c1.grid(), c2.grid());
        assert_eq!(c1.grid(), c3.grid());
        VectorField {
            components: [c1, c2, c3],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField::new(
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
        )
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    /// Apply `f` to each component.
    pub fn map<F>(&self, f: F) -> VectorField
    where
        F: Fn(&ScalarField) -> ScalarField,
    {
        VectorField::new(
            f(&self.components[0]),
            f(&self.components[1]),
            f(&self.components[2]),
        )
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(
            self.components[0].add(&other.components[0]),
            self.components[1].add(&other.components[1]),
            self.components[2].add(&other.components[2]),
        )
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::new(
            self.components[0].sub(&other.components[0]),
            self.components[1].sub(&other.components[1]),
            self.components[2].sub(&other.components[2]),
        )
    }

    pub fn scale(&self, s: f64) -> VectorField {
        self.map(|c| c.scale(s))
    }

    pub fn mean_vector(&self) -> [f64; 3] {
        [
            self.components[0].mean(),
            self.components[1].mean(),
            self.components[2].mean(),
        ]
    }

    pub fn project_mean_zero(&self) -> VectorField {
        self.map(|c| c.project_mean_zero())
    }

    pub fn dealias(&self) -> VectorField {
        self.map(|c| c.dealias())
    }

    /// Pointwise dot product `u . v` as a nodal scalar field (no dealiasing).
    pub fn dot_nodal(&self, other: &VectorField) -> ScalarField {
        let mut acc = self.components[0].mul_nodal(&other.components[0]);
        for i in 1..3 {
            acc = acc.add(&self.components[i].mul_nodal(&other.components[i]));
        }
        acc
    }

    /// Quadrature inner product `(1/n^3) sum u . v`.
    pub fn inner(&self, other: &VectorField) -> f64 {
        (0..3)
            .map(|i| self.components[i].inner(&other.components[i]))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}
