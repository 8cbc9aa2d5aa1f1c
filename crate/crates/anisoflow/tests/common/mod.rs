//! Shared oracles for the integration suite: dense LU solves of the assembled
//! linear operators (independent of the spectral inversion paths) and an
//! exact padded-grid product for checking the 2/3-rule dealiasing.

#![allow(dead_code)]

use anisoflow::field::{ScalarField, VectorField};
use anisoflow::grid::Grid;
use anisoflow::operators::{apply_viscous, laplacian};
use anisoflow::params::{mollify_vector, GridKernels, PhysParams};
use nalgebra::{DMatrix, DVector};
use ndarray::Array3;
use num_complex::Complex64;

/// Flatten nodal values to a vector (x3 fastest, matching the dump order).
pub fn scalar_to_vec(f: &ScalarField) -> DVector<f64> {
    let n = f.grid().n();
    let mut v = DVector::zeros(n * n * n);
    let mut idx = 0;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                v[idx] = f.nodal()[(i1, i2, i3)];
                idx += 1;
            }
        }
    }
    v
}

pub fn vec_to_scalar(grid: Grid, v: &DVector<f64>) -> ScalarField {
    let n = grid.n();
    let mut data = Array3::zeros((n, n, n));
    let mut idx = 0;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                data[(i1, i2, i3)] = v[idx];
                idx += 1;
            }
        }
    }
    ScalarField::from_nodal(grid, data)
}

pub fn vector_to_vec(u: &VectorField) -> DVector<f64> {
    let n3 = u.grid().len();
    let mut v = DVector::zeros(3 * n3);
    for (c, comp) in u.components().iter().enumerate() {
        v.rows_mut(c * n3, n3).copy_from(&scalar_to_vec(comp));
    }
    v
}

pub fn vec_to_vector(grid: Grid, v: &DVector<f64>) -> VectorField {
    let n3 = grid.len();
    VectorField::new(
        vec_to_scalar(grid, &v.rows(0, n3).into_owned()),
        vec_to_scalar(grid, &v.rows(n3, n3).into_owned()),
        vec_to_scalar(grid, &v.rows(2 * n3, n3).into_owned()),
    )
}

/// The affine continuity operator `rho -> -eps Lap rho + delta rho + div(P(rho w))`
/// assembled as a dense matrix by probing with nodal basis vectors.
fn transport_matrix(w: &VectorField, eps: f64, delta: f64) -> DMatrix<f64> {
    let grid = w.grid();
    let n3 = grid.len();
    let mut m = DMatrix::zeros(n3, n3);
    for j in 0..n3 {
        let mut e = DVector::zeros(n3);
        e[j] = 1.0;
        let rho = vec_to_scalar(grid, &e);
        let mut out = laplacian(&rho).scale(-eps).add(&rho.scale(delta));
        for ax in 0..3 {
            out = out.add(&rho.mul_dealiased(w.component(ax)).derivative(ax));
        }
        m.set_column(j, &scalar_to_vec(&out));
    }
    m
}

/// Dense LU solve of the regularized continuity equation (oracle for
/// `solve_transport`): `(-eps Lap + delta + div(. w)) rho = delta M`.
pub fn dense_solve_transport(
    v: &VectorField,
    p: &PhysParams,
    eps: f64,
    delta: f64,
) -> ScalarField {
    let grid = v.grid();
    let w = mollify_vector(v, delta);
    let m = transport_matrix(&w, eps, delta);
    let rhs = DVector::from_element(grid.len(), delta * p.mass);
    let sol = m.lu().solve(&rhs).expect("transport matrix is invertible");
    vec_to_scalar(grid, &sol)
}

/// Projection onto the symbol's null space: modes whose effective wavevector
/// (Nyquist components zeroed) vanishes.
fn flat_projection(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let n = grid.n();
    let mut data = Array3::zeros((n, n, n));
    for (idx, &z) in f.spectral().indexed_iter() {
        if grid.wavevector_eff(idx) == [0, 0, 0] {
            data[idx] = z;
        }
    }
    ScalarField::from_spectral(grid, data)
}

/// Dense LU solve of `-A w = f` (oracle for `invert_viscous`). `-A` is
/// singular on modes with vanishing effective wavevector (constants and pure
/// Nyquist modes), so the assembled matrix adds the projection onto that null
/// space; for f supported away from it this leaves the solution unchanged.
pub fn dense_invert_viscous(
    f: &VectorField,
    p: &PhysParams,
    ker: &GridKernels,
) -> VectorField {
    let grid = f.grid();
    let n3 = grid.len();
    let dim = 3 * n3;
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut e = DVector::zeros(dim);
        e[j] = 1.0;
        let u = vec_to_vector(grid, &e);
        let au = apply_viscous(&u, p, ker).scale(-1.0);
        let fixed = VectorField::new(
            au.component(0).add(&flat_projection(u.component(0))),
            au.component(1).add(&flat_projection(u.component(1))),
            au.component(2).add(&flat_projection(u.component(2))),
        );
        m.set_column(j, &vector_to_vec(&fixed));
    }
    let sol = m
        .lu()
        .solve(&vector_to_vec(f))
        .expect("augmented viscous matrix is invertible");
    vec_to_vector(grid, &sol)
}

/// Spectral restriction of a fine-grid field to a coarser grid: keep every
/// coefficient the coarse grid can represent without aliasing, drop the rest.
pub fn restrict(f: &ScalarField, coarse: Grid) -> ScalarField {
    let n = coarse.n();
    let half = (n / 2) as i64;
    let mut data = Array3::zeros((n, n, n));
    for (idx, v) in data.indexed_iter_mut() {
        let k = coarse.wavevector(idx);
        if k.iter().all(|&c| c != -half) {
            *v = f.coeff(k);
        }
    }
    ScalarField::from_spectral(coarse, data)
}

/// Exact product of two band-limited fields, computed alias-free on a grid of
/// twice the resolution and truncated back (oracle for `mul_dealiased`).
pub fn padded_product(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let grid = a.grid();
    let big = Grid::new(2 * grid.n()).unwrap();
    let embed = |f: &ScalarField| {
        let mut data = Array3::zeros((big.n(), big.n(), big.n()));
        for ((i1, i2, i3), &z) in f.spectral().indexed_iter() {
            let k = grid.wavevector((i1, i2, i3));
            data[(big.index_of(k[0]), big.index_of(k[1]), big.index_of(k[2]))] = z;
        }
        ScalarField::from_spectral(big, data)
    };
    let prod = embed(a).mul_nodal(&embed(b));
    let mut data = Array3::zeros((grid.n(), grid.n(), grid.n()));
    let half = (grid.n() / 2) as i64;
    for ((i1, i2, i3), v) in data.indexed_iter_mut() {
        let k = grid.wavevector((i1, i2, i3));
        // only wavenumbers representable without aliasing on the small grid
        if k.iter().any(|&c| c == -half) {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v = prod.coeff(k);
        }
    }
    ScalarField::from_spectral(grid, data).dealias()
}
