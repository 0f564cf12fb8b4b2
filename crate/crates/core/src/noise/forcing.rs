use super::{NoiseSpec, WienerPath};
use crate::spectral::StokesBasis;
use crate::Scalar;

/// Noise as seen by an exponential integrator on one grid.
///
/// For mode `i` with rate `μ = νλᵢ` and step `h`, step `n` carries
///
/// ```text
/// dw   = σᵢ ΔWᵢ
/// conv = σᵢ ∫_{t_n}^{t_n+h} e^{-μ(t_n+h-s)} dWᵢ(s)
/// ```
///
/// sampled jointly and exactly: `conv` is built from the Gaussian pair
/// `(ΔW, innovation)` with the correct variance and covariance with `ΔW`.
/// The linear part of every integrator in this crate is therefore exact in
/// law, and `dw` remains the Brownian increment used by the Itô sums.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseForcing<T> {
    pub dt: T,
    pub nu: T,
    pub n_steps: usize,
    pub modes: usize,
    /// `e^{-νλᵢ dt}`.
    pub decay: Vec<T>,
    /// Row-major `n_steps × modes`.
    pub dw: Vec<T>,
    pub conv: Vec<T>,
}

/// `(Var Y, Cov(ΔW, Y))` for `Y = ∫_0^h e^{-μ(h-s)} dW(s)`.
pub(crate) fn conv_moments(mu: f64, h: f64) -> (f64, f64) {
    (-(-2.0 * mu * h).exp_m1() / (2.0 * mu), -(-mu * h).exp_m1() / mu)
}

/// `Var Y / σ²` for one step of length `h` at rate `μ`.
pub(crate) fn forcing_variance(mu: f64, h: f64) -> f64 {
    conv_moments(mu, h).0
}

impl<T: Scalar> NoiseForcing<T> {
    pub fn from_wiener(basis: &StokesBasis<T>, noise: &NoiseSpec<T>, nu: T, path: &WienerPath) -> Self {
        let m = basis.len();
        assert_eq!(path.modes, m, "wiener path has the wrong number of modes");
        assert_eq!(noise.len(), m, "noise spec has the wrong number of modes");
        let h = path.dt;
        let sqrt_h = h.sqrt();
        let mut c1 = Vec::with_capacity(m);
        let mut c2 = Vec::with_capacity(m);
        for l in basis.eigenvalues() {
            let mu = nu.as_f64() * l.as_f64();
            let (var_y, cov) = conv_moments(mu, h);
            let a = cov / sqrt_h;
            c1.push(a);
            c2.push((var_y - a * a).max(0.0).sqrt());
        }
        let mut dw = Vec::with_capacity(path.n_steps * m);
        let mut conv = Vec::with_capacity(path.n_steps * m);
        for n in 0..path.n_steps {
            for i in 0..m {
                let k = n * m + i;
                let xi = path.increments[k] / sqrt_h;
                let sigma = noise.sigmas[i];
                dw.push(sigma * T::of(path.increments[k]));
                conv.push(sigma * T::of(c1[i] * xi + c2[i] * path.innovations[k]));
            }
        }
        Self {
            dt: T::of(h),
            nu,
            n_steps: path.n_steps,
            modes: m,
            decay: decay_factors(basis, nu, T::of(h)),
            dw,
            conv,
        }
    }

    /// No noise at all.
    pub fn zero(basis: &StokesBasis<T>, nu: T, dt: T, n_steps: usize) -> Self {
        let m = basis.len();
        Self {
            dt,
            nu,
            n_steps,
            modes: m,
            decay: decay_factors(basis, nu, dt),
            dw: vec![T::zero(); n_steps * m],
            conv: vec![T::zero(); n_steps * m],
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            dw: self.dw.iter().map(|x| *x * factor).collect(),
            conv: self.conv.iter().map(|x| *x * factor).collect(),
            ..self.clone()
        }
    }

    pub fn dw_step(&self, n: usize) -> &[T] {
        &self.dw[n * self.modes..(n + 1) * self.modes]
    }

    pub fn conv_step(&self, n: usize) -> &[T] {
        &self.conv[n * self.modes..(n + 1) * self.modes]
    }

    /// Only the first `n_steps` steps.
    pub fn truncated(&self, n_steps: usize) -> Self {
        let n = n_steps.min(self.n_steps);
        Self {
            n_steps: n,
            dw: self.dw[..n * self.modes].to_vec(),
            conv: self.conv[..n * self.modes].to_vec(),
            ..self.clone()
        }
    }

    /// Steps `from..` as a new forcing starting at time 0.
    pub fn tail_from(&self, from: usize) -> Self {
        let from = from.min(self.n_steps);
        Self {
            n_steps: self.n_steps - from,
            dw: self.dw[from * self.modes..].to_vec(),
            conv: self.conv[from * self.modes..].to_vec(),
            ..self.clone()
        }
    }

    /// The same noise on a grid `factor` times coarser. Exact: increments
    /// add, and the convolution over a block is `Σ_j a^{f-1-j} conv_j` with
    /// the fine decay factor `a`.
    pub fn coarsen(&self, factor: usize) -> Self {
        assert!(factor >= 1, "coarsening factor must be positive");
        let m = self.modes;
        let n = self.n_steps / factor;
        let mut dw = vec![T::zero(); n * m];
        let mut conv = vec![T::zero(); n * m];
        for b in 0..n {
            for j in 0..factor {
                let fine = b * factor + j;
                for i in 0..m {
                    dw[b * m + i] += self.dw[fine * m + i];
                    conv[b * m + i] = self.decay[i] * conv[b * m + i] + self.conv[fine * m + i];
                }
            }
        }
        Self {
            dt: self.dt * T::of(factor as f64),
            nu: self.nu,
            n_steps: n,
            modes: m,
            decay: self.decay.iter().map(|a| a.powi(factor as i32)).collect(),
            dw,
            conv,
        }
    }
}

pub(crate) fn decay_factors<T: Scalar>(basis: &StokesBasis<T>, nu: T, dt: T) -> Vec<T> {
    basis
        .eigenvalues()
        .iter()
        .map(|l| T::of((-(nu * *l * dt).as_f64()).exp()))
        .collect()
}
