use std::io::Write;

use crate::error::Result;
use crate::scalar::Real;

/// Bumped whenever [`CSV_COLUMNS`] changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 26] = [
    "step",
    "t",
    "e_kin",
    "e_mag",
    "d_visc",
    "d_visc_lower",
    "d_mag",
    "heat_total",
    "energy_residual",
    "kinetic_residual",
    "rho_min",
    "rho_max",
    "theta_min",
    "clamp_count",
    "div_u",
    "div_h",
    "korn_ratio",
    "poincare_ratio",
    "h_norm_sqr",
    "decay_bound",
    "strain_r_norm",
    "curl_h_sqr",
    "rho_theta_l1",
    "theta_neg_power",
    "theta_p_w12",
    "iterations",
];

/// One diagnostics sample.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsRecord<T> {
    pub step: usize,
    pub t: T,
    /// `½(ρ, |u|²)`
    pub e_kin: T,
    /// `½‖H‖²`
    pub e_mag: T,
    /// `(S, D(u))`
    pub d_visc: T,
    /// `μ_low ∫(ε + |D|²)^((r−2)/2)|D|²`, the coercivity floor of `d_visc`.
    pub d_visc_lower: T,
    /// `ν‖∇×H‖²`
    pub d_mag: T,
    /// `(ρ Q(θ), 1)`
    pub heat_total: T,
    /// `E(t) − E(0) + ∫(d_visc + d_mag)`
    pub energy_residual: T,
    /// `K(t) − K(0) − ∫[(∂_t(ρu), u) − (ρu⊗u, ∇u)]`, with the diffusive
    /// density flux accounted for.
    pub kinetic_residual: T,
    pub rho_min: T,
    pub rho_max: T,
    pub theta_min: T,
    pub clamp_count: usize,
    pub div_u: T,
    pub div_h: T,
    /// `‖∇u‖ / ‖D(u)‖`
    pub korn_ratio: T,
    /// `‖H‖ / ‖∇H‖`
    pub poincare_ratio: T,
    pub h_norm_sqr: T,
    /// Right side of the magnetic decay estimate.
    pub decay_bound: T,
    /// `‖D(u)‖_r^r`
    pub strain_r_norm: T,
    pub curl_h_sqr: T,
    pub rho_theta_l1: T,
    /// `‖θ^(−λ)‖_∞`
    pub theta_neg_power: T,
    /// `‖θ^p‖²_{W^{1,2}}`, `p = (α − λ + 1)/2`
    pub theta_p_w12: T,
    pub iterations: usize,
}

impl<T: Real> DiagnosticsRecord<T> {
    pub fn energy(&self) -> T {
        self.e_kin + self.e_mag
    }

    pub fn dissipation(&self) -> T {
        self.d_visc + self.d_mag
    }

    fn fields(&self) -> [T; 23] {
        [
            self.t,
            self.e_kin,
            self.e_mag,
            self.d_visc,
            self.d_visc_lower,
            self.d_mag,
            self.heat_total,
            self.energy_residual,
            self.kinetic_residual,
            self.rho_min,
            self.rho_max,
            self.theta_min,
            self.div_u,
            self.div_h,
            self.korn_ratio,
            self.poincare_ratio,
            self.h_norm_sqr,
            self.decay_bound,
            self.strain_r_norm,
            self.curl_h_sqr,
            self.rho_theta_l1,
            self.theta_neg_power,
            self.theta_p_w12,
        ]
    }

    /// Row in [`CSV_COLUMNS`] order; floats use a fixed 17-digit form so
    /// identical runs give identical bytes.
    pub fn csv_row(&self) -> String {
        let f = self.fields().map(|x| format!("{:.17e}", x.to_f64_lossy()));
        let mut cells = Vec::with_capacity(CSV_COLUMNS.len());
        cells.push(self.step.to_string());
        cells.extend_from_slice(&f[..12]);
        cells.push(self.clamp_count.to_string());
        cells.extend_from_slice(&f[12..]);
        cells.push(self.iterations.to_string());
        cells.join(",")
    }
}

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

pub fn write_csv<T: Real, W: Write>(out: &mut W, records: &[DiagnosticsRecord<T>]) -> Result<()> {
    writeln!(out, "{}", csv_header())?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_matches_header() {
        let r = DiagnosticsRecord::<f64> {
            step: 3,
            t: 0.5,
            clamp_count: 7,
            iterations: 2,
            rho_min: 0.25,
            ..Default::default()
        };
        let row = r.csv_row();
        let cells: Vec<_> = row.split(',').collect();
        assert_eq!(cells.len(), CSV_COLUMNS.len());
        let at = |name| cells[CSV_COLUMNS.iter().position(|c| *c == name).unwrap()];
        assert_eq!(at("step"), "3");
        assert_eq!(at("clamp_count"), "7");
        assert_eq!(at("iterations"), "2");
        assert_eq!(at("t").parse::<f64>().unwrap(), 0.5);
        assert_eq!(at("rho_min").parse::<f64>().unwrap(), 0.25);
    }
}
