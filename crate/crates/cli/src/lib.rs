//! Config-driven runner for the snslab experiments.

pub mod config;
pub mod registry;
pub mod runner;

/// Subcommands with the statement each one checks.
pub const SUBCOMMANDS: &[(&str, &str)] = &[
    ("calibrate", "estimate and freeze C0, C*, the tail constants (C, eta) and the derivative-flow constant"),
    ("simulate", "integrate one path of the Galerkin dynamics and dump it"),
    ("ou-tails", "Gaussian tail P[sup|AZ| > K] <= C exp(-eta K^2/eps) and the Stokes-OU second moments"),
    ("det-bound", "deterministic local regularity: sup|Au| < 2K on [0, eps] under the smallness hypotheses"),
    ("blowup", "P[tau_2K < eps] <= C exp(-eta K^2/(4 eps)) for eps <= 1/(5 C* K^2)"),
    ("loglip", "|P_t 1_G(x+h) - P_t 1_G(x)| <= C_T/min(t,1) (1+|Ax|^6) |Ah| log(1/|Ah|)"),
    ("bel-check", "gradient bound |D_h P_eps psi| <= C |psi| |Ah| e^{C R^6 eps}/eps and |AD_h u|^2 <= e^{C R^6 t}|Ah|^2"),
    ("confronto", "|P_eps psi - P_eps^R psi| <= 2 P[tau_R < eps] |psi|"),
    ("chapman", "Chapman-Kolmogorov: P_{t+s}(x, G) = int P_t(x, dy) P_s(y, G)"),
    ("telescope", "telescoping comparison of two kernels over N sub-intervals"),
    ("martingale", "M_t = <u_t - u_0, phi> + int <nu Au + B(u,u), phi> ds is a martingale with the predicted quadratic variation"),
];
