//! Pointwise evaluation of spectral fields on a uniform grid of the torus.
//!
//! Everything here works directly with the real sine/cosine basis functions
//! and never touches the complex lattice representation used by
//! [`bilinear_b`](super::bilinear_b), which makes it usable as an
//! independent cross-check.

use super::{Parity, StokesBasis};
use crate::Scalar;

/// Uniform `n³` grid with tabulated basis functions.
#[derive(Clone, Debug)]
pub struct PhysicalGrid<T> {
    n: usize,
    period: T,
    /// `amplitude · trig(2π k·x/L)`, mode-major.
    values: Vec<T>,
    /// `amplitude · trig'(2π k·x/L)`, mode-major.
    slopes: Vec<T>,
    wavenumbers: Vec<[T; 3]>,
    directions: Vec<[T; 3]>,
}

impl<T: Scalar> PhysicalGrid<T> {
    /// Smallest grid on which quadrature of cubic products of basis
    /// functions is exact: `3·cutoff + 1` points per side.
    pub fn exact_for_triple_products(basis: &StokesBasis<T>) -> Self {
        Self::new(basis, 3 * basis.cutoff() + 1)
    }

    pub fn new(basis: &StokesBasis<T>, n: usize) -> Self {
        let points = n * n * n;
        let m = basis.len();
        let l = basis.period().as_f64();
        let amplitude = (2.0 / l.powi(3)).sqrt();
        let mut values = Vec::with_capacity(m * points);
        let mut slopes = Vec::with_capacity(m * points);
        for mode in basis.modes() {
            let k = mode.canonical();
            for ix in 0..n {
                for iy in 0..n {
                    for iz in 0..n {
                        // phase = 2π k·x / L with x = L·j/n
                        let phase = 2.0 * std::f64::consts::PI
                            * (k[0] as f64 * ix as f64 + k[1] as f64 * iy as f64 + k[2] as f64 * iz as f64)
                            / n as f64;
                        let (s, c) = phase.sin_cos();
                        let (v, d) = match mode.parity {
                            Parity::Cos => (c, -s),
                            Parity::Sin => (s, c),
                        };
                        values.push(T::of(amplitude * v));
                        slopes.push(T::of(amplitude * d));
                    }
                }
            }
        }
        let scale = 2.0 * std::f64::consts::PI / l;
        let wavenumbers = basis
            .modes()
            .iter()
            .map(|m| m.canonical().map(|c| T::of(scale * c as f64)))
            .collect();
        let directions = basis.modes().iter().map(|m| m.direction).collect();
        Self {
            n,
            period: basis.period(),
            values,
            slopes,
            wavenumbers,
            directions,
        }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn point_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Quadrature weight `(L/n)³`.
    pub fn cell_volume(&self) -> T {
        (self.period / T::of(self.n as f64)).powi(3)
    }

    /// Velocity `u(x)` at every grid point.
    pub fn sample(&self, coefficients: &[T]) -> Vec<[T; 3]> {
        let points = self.point_count();
        let mut out = vec![[T::zero(); 3]; points];
        for (i, c) in coefficients.iter().enumerate() {
            if *c == T::zero() {
                continue;
            }
            let e = self.directions[i];
            let row = &self.values[i * points..(i + 1) * points];
            for (o, v) in out.iter_mut().zip(row) {
                let a = *c * *v;
                o[0] += a * e[0];
                o[1] += a * e[1];
                o[2] += a * e[2];
            }
        }
        out
    }

    /// Velocity gradient `g[j][m] = ∂_m u_j` at every grid point.
    pub fn gradient(&self, coefficients: &[T]) -> Vec<[[T; 3]; 3]> {
        let points = self.point_count();
        let mut out = vec![[[T::zero(); 3]; 3]; points];
        for (i, c) in coefficients.iter().enumerate() {
            if *c == T::zero() {
                continue;
            }
            let e = self.directions[i];
            let kappa = self.wavenumbers[i];
            let row = &self.slopes[i * points..(i + 1) * points];
            for (o, d) in out.iter_mut().zip(row) {
                let a = *c * *d;
                for j in 0..3 {
                    for m in 0..3 {
                        o[j][m] += a * e[j] * kappa[m];
                    }
                }
            }
        }
        out
    }

    /// `⟨h_i, f⟩` for every basis function by grid quadrature.
    pub fn project(&self, field: &[[T; 3]]) -> Vec<T> {
        let points = self.point_count();
        let w = self.cell_volume();
        (0..self.directions.len())
            .map(|i| {
                let e = self.directions[i];
                let row = &self.values[i * points..(i + 1) * points];
                let s: T = row
                    .iter()
                    .zip(field)
                    .map(|(v, f)| *v * (e[0] * f[0] + e[1] * f[1] + e[2] * f[2]))
                    .sum();
                s * w
            })
            .collect()
    }

    /// `Π (u·∇)v` by pointwise products on the grid and quadrature. Exact on
    /// a grid from [`exact_for_triple_products`](Self::exact_for_triple_products).
    pub fn transport(&self, u: &[T], v: &[T]) -> Vec<T> {
        let uu = self.sample(u);
        let gv = self.gradient(v);
        let w: Vec<[T; 3]> = uu
            .iter()
            .zip(&gv)
            .map(|(a, g)| {
                let mut out = [T::zero(); 3];
                for (j, o) in out.iter_mut().enumerate() {
                    *o = g[j][0] * a[0] + g[j][1] * a[1] + g[j][2] * a[2];
                }
                out
            })
            .collect();
        self.project(&w)
    }

    /// `L²` norm of a sampled vector field.
    pub fn l2_norm(&self, field: &[[T; 3]]) -> T {
        let s: T = field
            .iter()
            .map(|f| f[0] * f[0] + f[1] * f[1] + f[2] * f[2])
            .sum();
        (s * self.cell_volume()).sqrt()
    }

    /// Grid maximum of the Frobenius norm of `Du`; a lower estimate of `|Du|_{L∞}`.
    pub fn gradient_sup(&self, coefficients: &[T]) -> T {
        self.gradient(coefficients)
            .iter()
            .map(|g| {
                g.iter()
                    .flat_map(|row| row.iter())
                    .map(|x| *x * *x)
                    .sum::<T>()
                    .sqrt()
            })
            .fold(T::zero(), T::max)
    }
}
