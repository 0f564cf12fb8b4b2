//! Artifact writers.
//!
//! Floats go through `Display`, the shortest string that round-trips, so
//! identical reports give identical bytes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::noise::TailFit;
use crate::spectral::StokesBasis;
use crate::Scalar;

/// CSV table built row by row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// A cell for [`Table::push`].
pub enum Cell {
    F(f64),
    U(usize),
    B(bool),
    S(String),
    Opt(Option<f64>),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => x.to_string(),
            Cell::U(x) => x.to_string(),
            Cell::B(x) => u8::from(*x).to_string(),
            Cell::S(s) => s.clone(),
            Cell::Opt(x) => x.map_or_else(String::new, |v| v.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Opt(x)
    }
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row.iter().map(Cell::render).collect());
    }

    pub fn write_to<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        buf
    }

    pub fn write_file(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }
}

/// One row per `(ε, K)` bin.
pub fn tail_table(fit: &TailFit) -> Table {
    let mut t = Table::new(&["epsilon", "K", "n_exceed", "n_total", "p_hat", "ci_lo", "ci_hi", "used_in_fit", "judged", "fit_value"]);
    for b in &fit.bins {
        t.push(vec![
            b.epsilon.into(),
            b.k.into(),
            b.n_exceed.into(),
            b.n_total.into(),
            b.p_hat.into(),
            b.ci_lo.into(),
            b.ci_hi.into(),
            b.used_in_fit.into(),
            b.judged.into(),
            b.fit_value.into(),
        ]);
    }
    t
}

/// Recorded states with the chosen coefficient columns. `|Au|` and the
/// running sup are taken at the recorded steps.
pub fn trajectory_table<T: Scalar>(traj: &Trajectory<T>, columns: &[usize]) -> Table {
    let mut header = vec!["time".to_owned()];
    header.extend(columns.iter().map(|c| format!("c{c}")));
    header.extend(["a_norm", "sup_a", "past_tau_r", "blown_up"].map(String::from));
    let mut t = Table::new(&header);
    for (step, state) in &traj.states {
        let mut row: Vec<Cell> = vec![traj.time(*step).into()];
        row.extend(columns.iter().map(|c| Cell::F(state[*c].as_f64())));
        row.push(traj.a_norm[*step].into());
        row.push(traj.sup_a[*step].into());
        row.push(traj.tau_r.is_some_and(|k| k <= *step).into());
        row.push(false.into());
        t.push(row);
    }
    if let Some(time) = traj.blow_up {
        let mut row: Vec<Cell> = vec![time.into()];
        row.extend(columns.iter().map(|_| Cell::S(String::new())));
        row.extend([Cell::S(String::new()), Cell::S(String::new()), traj.tau_r.is_some().into(), true.into()]);
        t.push(row);
    }
    t
}

/// JSON sidecar for a trajectory dump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySidecar {
    pub dt: f64,
    pub nu: f64,
    pub radius: Option<f64>,
    pub cutoff_profile: String,
    pub master_seed: u64,
    pub basis_period: f64,
    pub basis_cutoff: usize,
    pub basis_fingerprint: String,
    pub tau_r_time: Option<f64>,
    /// The continuous stopping time may precede the grid time by one step.
    pub tau_r_grid_resolution: bool,
}

impl TrajectorySidecar {
    pub fn new<T: Scalar>(basis: &StokesBasis<T>, traj: &Trajectory<T>, master_seed: u64) -> Self {
        Self {
            dt: traj.dt,
            nu: traj.nu,
            radius: traj.cutoff.map(|c| c.radius),
            cutoff_profile: traj
                .cutoff
                .map_or_else(|| "none".to_owned(), |c| c.describe()),
            master_seed,
            basis_period: basis.period().as_f64(),
            basis_cutoff: basis.cutoff(),
            basis_fingerprint: basis.metadata().fingerprint(),
            tau_r_time: traj.tau_r.map(|k| traj.time(k)),
            tau_r_grid_resolution: true,
        }
    }
}
