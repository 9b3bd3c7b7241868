//! Trajectory and comparison writers. CSV is locale-independent (dot
//! decimal separator) at full double precision: 17 significant digits,
//! enough to reconstruct every f64 bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use metriplectic::integrators::Trajectory;
use metriplectic::structures::Point;

use crate::config::OutputFormat;

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for i in 1..=n {
        cols.push(format!("q{i}"));
    }
    for i in 1..=n {
        cols.push(format!("p{i}"));
    }
    cols.extend(
        ["z", "H", "S", "energy_rate", "entropy_rate"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols
}

fn trajectory_row(traj: &Trajectory, k: usize) -> Vec<f64> {
    let state = &traj.states[k];
    let m = &traj.monitors[k];
    let mut row = vec![traj.times[k]];
    row.extend_from_slice(state.q());
    row.extend_from_slice(state.p());
    row.push(state.z());
    row.push(m.hamiltonian);
    row.push(m.entropy);
    row.push(m.energy_rate);
    row.push(m.entropy_rate);
    row
}

pub fn render_trajectory(traj: &Trajectory, format: OutputFormat) -> String {
    let n = traj.field().n();
    let columns = trajectory_columns(n);
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(&columns.join(","));
            out.push('\n');
            for k in 0..traj.len() {
                let row: Vec<String> = trajectory_row(traj, k)
                    .iter()
                    .map(|v| fmt_f64(*v))
                    .collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<Vec<f64>> = (0..traj.len()).map(|k| trajectory_row(traj, k)).collect();
            serde_json::to_string_pretty(&serde_json::json!({
                "columns": columns,
                "rows": rows,
            }))
            .expect("trajectory serializes")
        }
    }
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, format: OutputFormat) -> Result<()> {
    std::fs::write(path, render_trajectory(traj, format))
        .with_context(|| format!("cannot write {}", path.display()))
}

/// Per-sample comparison of a contact and a metriplectic realization of
/// the same Hamiltonian from the same initial data.
pub struct Comparison {
    pub times: Vec<f64>,
    pub qp_distance: Vec<f64>,
    pub z_contact: Vec<f64>,
    pub z_metriplectic: Vec<f64>,
    pub h_contact: Vec<f64>,
    pub h_metriplectic: Vec<f64>,
    pub zdot_contact: Vec<f64>,
    pub zdot_metriplectic: Vec<f64>,
    /// ż_met/ż_contact with both rates re-evaluated at the sampled
    /// (q, p) on the z = 0 slice — the setting of the kinetic
    /// coincidence, where degree-2 Hamiltonians give exactly 2. NaN
    /// where the contact rate vanishes.
    pub kinetic_ratio: Vec<f64>,
}

pub const COMPARISON_COLUMNS: [&str; 10] = [
    "t",
    "qp_distance",
    "z_contact",
    "z_metriplectic",
    "H_contact",
    "H_metriplectic",
    "zdot_contact",
    "zdot_metriplectic",
    "zdot_ratio",
    "kinetic_ratio",
];

impl Comparison {
    pub fn from_trajectories(contact: &Trajectory, met: &Trajectory) -> Self {
        assert_eq!(contact.len(), met.len(), "comparison needs a common grid");
        let mut cmp = Comparison {
            times: Vec::new(),
            qp_distance: Vec::new(),
            z_contact: Vec::new(),
            z_metriplectic: Vec::new(),
            h_contact: Vec::new(),
            h_metriplectic: Vec::new(),
            zdot_contact: Vec::new(),
            zdot_metriplectic: Vec::new(),
            kinetic_ratio: Vec::new(),
        };
        for k in 0..contact.len() {
            let (a, b) = (&contact.states[k], &met.states[k]);
            let dist: f64 = a
                .q()
                .iter()
                .chain(a.p())
                .zip(b.q().iter().chain(b.p()))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            let t = contact.times[k];
            cmp.times.push(t);
            cmp.qp_distance.push(dist);
            cmp.z_contact.push(a.z());
            cmp.z_metriplectic.push(b.z());
            cmp.h_contact.push(contact.monitors[k].hamiltonian);
            cmp.h_metriplectic.push(met.monitors[k].hamiltonian);
            cmp.zdot_contact.push(contact.monitors[k].entropy_rate);
            cmp.zdot_metriplectic.push(met.monitors[k].entropy_rate);

            // Both rates at the same (q, p) with z projected to 0.
            let slice = Point::from_flat(a.n(), &{
                let mut flat = a.flat();
                *flat.last_mut().unwrap() = 0.0;
                flat
            });
            let rate_c = contact.field().entropy_rate(&slice, t).unwrap_or(f64::NAN);
            let rate_m = met.field().entropy_rate(&slice, t).unwrap_or(f64::NAN);
            cmp.kinetic_ratio.push(if rate_c.abs() > 1e-12 {
                rate_m / rate_c
            } else {
                f64::NAN
            });
        }
        cmp
    }

    /// True when the z = 0 slice rates differ by exactly the factor 2
    /// at every sample where the ratio is defined.
    pub fn kinetic_coincidence(&self) -> bool {
        let mut seen = false;
        for r in &self.kinetic_ratio {
            if r.is_nan() {
                continue;
            }
            if (r - 2.0).abs() > 1e-9 {
                return false;
            }
            seen = true;
        }
        seen
    }

    pub fn max_qp_divergence(&self) -> f64 {
        self.qp_distance.iter().fold(0.0_f64, |m, v| m.max(*v))
    }

    /// (min, max) of ż_met/ż_contact over samples where the contact rate
    /// is meaningfully nonzero.
    pub fn zdot_ratio_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for (c, m) in self.zdot_contact.iter().zip(&self.zdot_metriplectic) {
            if c.abs() > 1e-9 {
                let r = m / c;
                range = Some(match range {
                    None => (r, r),
                    Some((lo, hi)) => (lo.min(r), hi.max(r)),
                });
            }
        }
        range
    }

    fn row(&self, k: usize) -> [f64; 10] {
        let ratio = if self.zdot_contact[k].abs() > 1e-9 {
            self.zdot_metriplectic[k] / self.zdot_contact[k]
        } else {
            f64::NAN
        };
        [
            self.times[k],
            self.qp_distance[k],
            self.z_contact[k],
            self.z_metriplectic[k],
            self.h_contact[k],
            self.h_metriplectic[k],
            self.zdot_contact[k],
            self.zdot_metriplectic[k],
            ratio,
            self.kinetic_ratio[k],
        ]
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = String::new();
                out.push_str(&COMPARISON_COLUMNS.join(","));
                out.push('\n');
                for k in 0..self.times.len() {
                    let row = self.row(k);
                    let mut line = String::new();
                    for (i, v) in row.iter().enumerate() {
                        if i > 0 {
                            line.push(',');
                        }
                        let _ = write!(line, "{}", fmt_f64(*v));
                    }
                    out.push_str(&line);
                    out.push('\n');
                }
                out
            }
            OutputFormat::Json => {
                let rows: Vec<[f64; 10]> = (0..self.times.len()).map(|k| self.row(k)).collect();
                serde_json::to_string_pretty(&serde_json::json!({
                    "columns": COMPARISON_COLUMNS,
                    "rows": rows,
                }))
                .expect("comparison serializes")
            }
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.render(format))
            .with_context(|| format!("cannot write {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_formatting_round_trips() {
        for v in [0.1, -1.0 / 3.0, 2.5e-17, 123456.789, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert!(!s.contains(','));
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn column_layout() {
        assert_eq!(
            trajectory_columns(2),
            vec![
                "t",
                "q1",
                "q2",
                "p1",
                "p2",
                "z",
                "H",
                "S",
                "energy_rate",
                "entropy_rate"
            ]
        );
    }
}
