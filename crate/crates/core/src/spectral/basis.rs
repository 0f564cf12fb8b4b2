use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SpectralError;
use crate::Scalar;

/// Lightweight identity of a basis, carried by every field built on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisId {
    pub cutoff: u32,
    pub period_bits: u64,
}

/// Real trigonometric factor of a basis function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

/// One eigenfunction of the Stokes operator.
///
/// Wavevectors in the canonical half lattice `H` (first non-zero component
/// positive) carry the cosine function, their negatives the sine function:
///
/// ```text
/// h(x) = sqrt(2 / L³) · e · cos(2π k·x / L)     k ∈ H
/// h(x) = sqrt(2 / L³) · e · sin(2π k'·x / L)    k = -k', k' ∈ H
/// ```
///
/// so the pair `(k, -k)` spans the same real plane as `exp(±2πi k·x/L)`.
/// Both functions share the polarization `e` of the canonical representative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mode<T> {
    pub wavevector: [i32; 3],
    /// 1 or 2.
    pub polarization: u8,
    pub parity: Parity,
    pub eigenvalue: T,
    /// Unit polarization vector, orthogonal to the wavevector.
    pub direction: [T; 3],
}

impl<T: Scalar> Mode<T> {
    /// Canonical half-lattice representative of the wavevector.
    pub fn canonical(&self) -> [i32; 3] {
        match self.parity {
            Parity::Cos => self.wavevector,
            Parity::Sin => neg(self.wavevector),
        }
    }
}

/// A point of the canonical half lattice with the four real modes built on it.
#[derive(Clone, Debug)]
pub(crate) struct HalfPoint {
    pub lattice: usize,
    /// Mode indices `[cos·e1, cos·e2, sin·e1, sin·e2]`.
    pub modes: [usize; 4],
}

/// Output/input lattice indices of one term of the discrete convolution.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Triad {
    pub out: u32,
    pub p: u32,
    pub q: u32,
}

/// Divergence-free Fourier eigenbasis of the Stokes operator on `[0, L]³`,
/// truncated to the cube `0 < |k|∞ ≤ cutoff`.
#[derive(Clone, Debug)]
pub struct StokesBasis<T> {
    period: T,
    cutoff: usize,
    modes: Vec<Mode<T>>,
    eigenvalues: Vec<T>,
    pub(crate) half_points: Vec<HalfPoint>,
    /// Physical wave numbers `2π k / L` per lattice point.
    pub(crate) wavenumbers: Vec<[T; 3]>,
    pub(crate) triads: Vec<Triad>,
    /// `sqrt(2 / L³)`, the normalization of every real basis function.
    pub(crate) amplitude: T,
}

pub(crate) fn neg(k: [i32; 3]) -> [i32; 3] {
    [-k[0], -k[1], -k[2]]
}

fn in_half_lattice(k: [i32; 3]) -> bool {
    match k.iter().find(|c| **c != 0) {
        Some(c) => *c > 0,
        None => false,
    }
}

fn norm_sq(k: [i32; 3]) -> i64 {
    k.iter().map(|c| (*c as i64) * (*c as i64)).sum()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Polarization pair for a canonical wavevector: `e1 = k × a / |k × a|`
/// with `a` the first standard basis vector not parallel to `k`, and
/// `e2 = k × e1 / |k × e1|`.
pub fn polarization_pair(k: [i32; 3]) -> ([f64; 3], [f64; 3]) {
    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let e1 = axes
        .iter()
        .map(|a| cross(kf, *a))
        .find(|c| c.iter().any(|x| *x != 0.0))
        .map(normalized)
        .expect("non-zero wavevector is not parallel to every axis");
    let e2 = normalized(cross(kf, e1));
    (e1, e2)
}

impl<T: Scalar> StokesBasis<T> {
    /// Enumerates every mode with `0 < |k|∞ ≤ cutoff`, two polarizations per
    /// wavevector, sorted by eigenvalue and then lexicographically by
    /// `(k, polarization)`.
    pub fn new(period: T, cutoff: usize) -> Result<Self, SpectralError> {
        if cutoff == 0 {
            return Err(SpectralError::EmptyBasis);
        }
        if !(period > T::zero()) || !period.is_finite() {
            return Err(SpectralError::NonPositivePeriod(period.as_f64()));
        }
        let n = cutoff as i32;
        let side = 2 * cutoff + 1;
        let scale = 2.0 * std::f64::consts::PI / period.as_f64();

        let mut keyed = Vec::new();
        for k0 in -n..=n {
            for k1 in -n..=n {
                for k2 in -n..=n {
                    let k = [k0, k1, k2];
                    if k == [0, 0, 0] {
                        continue;
                    }
                    for p in 1..=2u8 {
                        keyed.push((norm_sq(k), k, p));
                    }
                }
            }
        }
        keyed.sort_by(|a, b| match a.0.cmp(&b.0) {
            Ordering::Equal => (a.1, a.2).cmp(&(b.1, b.2)),
            other => other,
        });

        let modes: Vec<Mode<T>> = keyed
            .iter()
            .map(|(k2, k, p)| {
                let parity = if in_half_lattice(*k) {
                    Parity::Cos
                } else {
                    Parity::Sin
                };
                let canonical = if parity == Parity::Cos { *k } else { neg(*k) };
                let (e1, e2) = polarization_pair(canonical);
                let e = if *p == 1 { e1 } else { e2 };
                Mode {
                    wavevector: *k,
                    polarization: *p,
                    parity,
                    eigenvalue: T::of(scale * scale * *k2 as f64),
                    direction: [T::of(e[0]), T::of(e[1]), T::of(e[2])],
                }
            })
            .collect();
        let eigenvalues = modes.iter().map(|m| m.eigenvalue).collect();

        let lattice_index = |k: [i32; 3]| -> usize {
            let s = side as i32;
            (((k[0] + n) * s + (k[1] + n)) * s + (k[2] + n)) as usize
        };

        let mut wavenumbers = vec![[T::zero(); 3]; side * side * side];
        for k0 in -n..=n {
            for k1 in -n..=n {
                for k2 in -n..=n {
                    wavenumbers[lattice_index([k0, k1, k2])] = [
                        T::of(scale * k0 as f64),
                        T::of(scale * k1 as f64),
                        T::of(scale * k2 as f64),
                    ];
                }
            }
        }

        // Canonical points in lattice order; modes located by search.
        let mut half_points = Vec::new();
        for k0 in -n..=n {
            for k1 in -n..=n {
                for k2 in -n..=n {
                    let k = [k0, k1, k2];
                    if !in_half_lattice(k) {
                        continue;
                    }
                    let find = |wv: [i32; 3], p: u8| {
                        modes
                            .iter()
                            .position(|m| m.wavevector == wv && m.polarization == p)
                            .expect("every lattice point has two modes")
                    };
                    half_points.push(HalfPoint {
                        lattice: lattice_index(k),
                        modes: [find(k, 1), find(k, 2), find(neg(k), 1), find(neg(k), 2)],
                    });
                }
            }
        }

        // w(k) = Σ_{p+q=k} i (û(p)·κ_q) v̂(q), only for canonical k.
        let mut triads = Vec::new();
        for (out, hp) in half_points.iter().enumerate() {
            let k = modes[hp.modes[0]].wavevector;
            for p0 in -n..=n {
                for p1 in -n..=n {
                    for p2 in -n..=n {
                        let p = [p0, p1, p2];
                        let q = [k[0] - p0, k[1] - p1, k[2] - p2];
                        if p == [0, 0, 0] || q == [0, 0, 0] || q.iter().any(|c| c.abs() > n) {
                            continue;
                        }
                        triads.push(Triad {
                            out: out as u32,
                            p: lattice_index(p) as u32,
                            q: lattice_index(q) as u32,
                        });
                    }
                }
            }
        }

        let amplitude = T::of((2.0 / period.as_f64().powi(3)).sqrt());
        Ok(Self {
            period,
            cutoff,
            modes,
            eigenvalues,
            half_points,
            wavenumbers,
            triads,
            amplitude,
        })
    }

    pub fn id(&self) -> BasisId {
        BasisId {
            cutoff: self.cutoff as u32,
            period_bits: self.period.as_f64().to_bits(),
        }
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &Mode<T> {
        &self.modes[i]
    }

    /// `λ_i`, ascending.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> T {
        self.eigenvalues[i]
    }

    /// Side of the full lattice cube, `2·cutoff + 1`.
    pub fn lattice_side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub(crate) fn lattice_len(&self) -> usize {
        self.wavenumbers.len()
    }

    /// Index of the mode with the given wavevector and polarization.
    pub fn find(&self, wavevector: [i32; 3], polarization: u8) -> Option<usize> {
        self.modes
            .iter()
            .position(|m| m.wavevector == wavevector && m.polarization == polarization)
    }

    /// Exportable description used for cross-implementation comparison.
    pub fn metadata(&self) -> BasisMetadata {
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(index, m)| ModeRecord {
                index,
                wavevector: m.wavevector,
                polarization: m.polarization,
                parity: m.parity,
                eigenvalue: m.eigenvalue.as_f64(),
                direction: m.direction.map(|x| x.as_f64()),
            })
            .collect();
        BasisMetadata {
            period: self.period.as_f64(),
            cutoff: self.cutoff,
            truncation: "cube".to_string(),
            ordering: "eigenvalue, then (wavevector, polarization) lexicographic".to_string(),
            mode_count: self.len(),
            modes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub index: usize,
    pub wavevector: [i32; 3],
    pub polarization: u8,
    pub parity: Parity,
    pub eigenvalue: f64,
    pub direction: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisMetadata {
    pub period: f64,
    pub cutoff: usize,
    pub truncation: String,
    pub ordering: String,
    pub mode_count: usize,
    pub modes: Vec<ModeRecord>,
}

impl BasisMetadata {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("basis metadata serializes")
    }

    /// SHA-256 of the compact JSON encoding, hex encoded.
    pub fn fingerprint(&self) -> String {
        let compact = serde_json::to_vec(self).expect("basis metadata serializes");
        Sha256::digest(&compact)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
