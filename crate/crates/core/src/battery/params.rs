use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names of the uncertain cell quantities, in canonical order.
pub const PARAMETER_NAMES: [&str; 24] = [
    "T_amb", "Ds_p", "Ds_n", "k_p", "k_n", "De_p", "De_s", "De_n", "L_a", "L_p", "L_s", "L_n",
    "L_z", "eps_p", "eps_s", "eps_n", "Rp_p", "Rp_n", "brugg_p", "brugg_s", "brugg_n", "t_plus",
    "sigma_p", "sigma_n",
];

/// Fixed constants of the LiC6/LiCoO2 cell that are not treated as uncertain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConstants {
    /// Maximum solid concentration, positive electrode (mol/m³).
    pub cs_max_p: f64,
    /// Maximum solid concentration, negative electrode (mol/m³).
    pub cs_max_n: f64,
    /// Initial electrolyte concentration (mol/m³).
    pub ce0: f64,
    /// Filler volume fractions.
    pub eps_filler_p: f64,
    pub eps_filler_n: f64,
    /// Stoichiometries at 100 % state of charge (calibrated window).
    pub theta_p_full: f64,
    pub theta_n_full: f64,
    /// Nominal capacity per unit area (Ah/m²); 1C is this value in A/m².
    pub capacity: f64,
    /// Densities (kg/m³) and specific heats (J/(kg K)) of the five layers,
    /// ordered positive collector, positive electrode, separator, negative
    /// electrode, negative collector.
    pub density: [f64; 5],
    pub heat_capacity: [f64; 5],
    /// Effective heat-transfer coefficient to ambient (W/(m² K)).
    pub h_conv: f64,
    /// Lumped series contact resistance (Ω m²).
    pub contact_resistance: f64,
    /// Activation energies (J/mol).
    pub ea_ds_p: f64,
    pub ea_ds_n: f64,
    pub ea_k_p: f64,
    pub ea_k_n: f64,
    /// Reference temperature of the Arrhenius laws and OCV tables (K).
    pub t_ref: f64,
    /// Collector conductivities (S/m).
    pub sigma_al: f64,
    pub sigma_cu: f64,
}

impl Default for CellConstants {
    fn default() -> Self {
        CellConstants {
            cs_max_p: 51554.0,
            cs_max_n: 30555.0,
            ce0: 1000.0,
            eps_filler_p: 0.025,
            eps_filler_n: 0.0326,
            theta_p_full: 0.51,
            theta_n_full: 0.90,
            capacity: 29.5,
            density: [2700.0, 2500.0, 1100.0, 2500.0, 8940.0],
            heat_capacity: [897.0, 700.0, 700.0, 700.0, 385.0],
            h_conv: 0.3,
            contact_resistance: 1.0e-3,
            ea_ds_p: 5000.0,
            ea_ds_n: 5000.0,
            ea_k_p: 5000.0,
            ea_k_n: 5000.0,
            t_ref: 298.15,
            sigma_al: 3.55e7,
            sigma_cu: 5.96e7,
        }
    }
}

/// The 24 uncertain quantities plus fixed constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParameters {
    /// Ambient (and initial) temperature, K.
    pub t_amb: f64,
    /// Solid diffusivities, m²/s.
    pub ds_p: f64,
    pub ds_n: f64,
    /// Reaction rate constants, m^2.5 mol^-0.5 s^-1.
    pub k_p: f64,
    pub k_n: f64,
    /// Electrolyte diffusivities in positive electrode, separator, negative electrode, m²/s.
    pub de_p: f64,
    pub de_s: f64,
    pub de_n: f64,
    /// Layer thicknesses, m.
    pub l_a: f64,
    pub l_p: f64,
    pub l_s: f64,
    pub l_n: f64,
    pub l_z: f64,
    /// Porosities.
    pub eps_p: f64,
    pub eps_s: f64,
    pub eps_n: f64,
    /// Particle radii, m.
    pub rp_p: f64,
    pub rp_n: f64,
    /// Bruggeman exponents.
    pub brugg_p: f64,
    pub brugg_s: f64,
    pub brugg_n: f64,
    /// Cation transference number.
    pub t_plus: f64,
    /// Solid-phase conductivities, S/m.
    pub sigma_p: f64,
    pub sigma_n: f64,
    pub constants: CellConstants,
}

/// Reference LiC6/LiCoO2 cell at its nominal values.
pub fn nominal_cell() -> CellParameters {
    CellParameters {
        t_amb: 298.15,
        ds_p: 1.0e-14,
        ds_n: 3.9e-14,
        k_p: 2.334e-11,
        k_n: 5.031e-11,
        de_p: 7.5e-10,
        de_s: 7.5e-10,
        de_n: 7.5e-10,
        l_a: 1.0e-5,
        l_p: 8.0e-5,
        l_s: 2.5e-5,
        l_n: 8.8e-5,
        l_z: 1.0e-5,
        eps_p: 0.385,
        eps_s: 0.724,
        eps_n: 0.485,
        rp_p: 2.0e-6,
        rp_n: 2.0e-6,
        brugg_p: 4.0,
        brugg_s: 4.0,
        brugg_n: 4.0,
        t_plus: 0.364,
        sigma_p: 100.0,
        sigma_n: 100.0,
        constants: CellConstants::default(),
    }
}

impl CellParameters {
    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "T_amb" => &mut self.t_amb,
            "Ds_p" => &mut self.ds_p,
            "Ds_n" => &mut self.ds_n,
            "k_p" => &mut self.k_p,
            "k_n" => &mut self.k_n,
            "De_p" => &mut self.de_p,
            "De_s" => &mut self.de_s,
            "De_n" => &mut self.de_n,
            "L_a" => &mut self.l_a,
            "L_p" => &mut self.l_p,
            "L_s" => &mut self.l_s,
            "L_n" => &mut self.l_n,
            "L_z" => &mut self.l_z,
            "eps_p" => &mut self.eps_p,
            "eps_s" => &mut self.eps_s,
            "eps_n" => &mut self.eps_n,
            "Rp_p" => &mut self.rp_p,
            "Rp_n" => &mut self.rp_n,
            "brugg_p" => &mut self.brugg_p,
            "brugg_s" => &mut self.brugg_s,
            "brugg_n" => &mut self.brugg_n,
            "t_plus" => &mut self.t_plus,
            "sigma_p" => &mut self.sigma_p,
            "sigma_n" => &mut self.sigma_n,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.clone()
            .slot(name)
            .map(|v| *v)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        *self
            .slot(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))? = value;
        Ok(())
    }

    /// Nominal cell with the named overrides applied.
    pub fn with_overrides<S: AsRef<str>>(names: &[S], values: &[f64]) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                got: values.len(),
            });
        }
        let mut cell = nominal_cell();
        for (n, &v) in names.iter().zip(values) {
            cell.set(n.as_ref(), v)?;
        }
        Ok(cell)
    }

    /// Solid volume fraction of the positive electrode.
    pub fn solid_fraction_p(&self) -> f64 {
        1.0 - self.eps_p - self.constants.eps_filler_p
    }

    pub fn solid_fraction_n(&self) -> f64 {
        1.0 - self.eps_n - self.constants.eps_filler_n
    }

    /// Heat capacity per unit area of the stack, J/(m² K).
    pub fn areal_heat_capacity(&self) -> f64 {
        let c = &self.constants;
        let lengths = [self.l_a, self.l_p, self.l_s, self.l_n, self.l_z];
        lengths
            .iter()
            .zip(c.density.iter().zip(&c.heat_capacity))
            .map(|(l, (rho, cp))| l * rho * cp)
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("T_amb", self.t_amb),
            ("Ds_p", self.ds_p),
            ("Ds_n", self.ds_n),
            ("k_p", self.k_p),
            ("k_n", self.k_n),
            ("De_p", self.de_p),
            ("De_s", self.de_s),
            ("De_n", self.de_n),
            ("L_a", self.l_a),
            ("L_p", self.l_p),
            ("L_s", self.l_s),
            ("L_n", self.l_n),
            ("L_z", self.l_z),
            ("Rp_p", self.rp_p),
            ("Rp_n", self.rp_n),
            ("brugg_p", self.brugg_p),
            ("brugg_s", self.brugg_s),
            ("brugg_n", self.brugg_n),
            ("sigma_p", self.sigma_p),
            ("sigma_n", self.sigma_n),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidCell(format!("{name} = {v} must be positive")));
            }
        }
        let fractions = [
            ("eps_p", self.eps_p),
            ("eps_s", self.eps_s),
            ("eps_n", self.eps_n),
            ("t_plus", self.t_plus),
        ];
        for (name, v) in fractions {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidCell(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if self.solid_fraction_p() <= 0.0 || self.solid_fraction_n() <= 0.0 {
            return Err(Error::InvalidCell("no solid volume left in an electrode".into()));
        }
        Ok(())
    }
}
