//! Single-particle model with electrolyte correction and a lumped thermal
//! balance.
//!
//! States are kept in normalised units so that one pair of tolerances fits
//! all of them:
//!
//! | index | state |
//! |-------|-------|
//! | 0 | state of charge |
//! | 1, 3 | volume-averaged stoichiometry, positive / negative particle |
//! | 2, 4 | volume-averaged flux term `q·R/c_max` of the polynomial particle profile |
//! | 5 | electrolyte concentration difference (positive minus negative electrode) over `c_e0` |
//! | 6 | temperature, K |
//!
//! Current density `i` is in A/m², positive while charging.

use super::ocv::{entropic_negative, entropic_positive, ocp_negative, ocp_positive};
use super::params::CellParameters;
use crate::error::{Error, Result};

pub const FARADAY: f64 = 96487.0;
pub const GAS_CONSTANT: f64 = 8.314;

pub const N_STATES: usize = 7;
pub type State = [f64; N_STATES];

pub(crate) const SOC: usize = 0;
const THETA_P: usize = 1;
const FLUX_P: usize = 2;
const THETA_N: usize = 3;
const FLUX_N: usize = 4;
const DELTA_CE: usize = 5;
pub(crate) const TEMP: usize = 6;

/// Algebraic quantities at one state and current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    pub voltage: f64,
    /// Open-circuit voltage at the average stoichiometries.
    pub ocv: f64,
    /// Anode solid–electrolyte potential difference at the separator.
    pub eta_pl: f64,
    pub theta_p_surface: f64,
    pub theta_n_surface: f64,
    /// Heat generation per unit area, W/m².
    pub heat: f64,
}

/// Temperature- and concentration-dependent electrolyte conductivity, S/m.
pub fn electrolyte_conductivity(c: f64, t: f64) -> f64 {
    let inner = -10.5 + 0.668e-3 * c + 0.494e-6 * c * c + (0.074 - 1.78e-5 * c - 8.86e-10 * c * c) * t
        + (-6.96e-5 + 2.8e-8 * c) * t * t;
    1e-4 * c * inner * inner
}

fn arrhenius(value: f64, ea: f64, t_ref: f64, t: f64) -> f64 {
    value * (ea / GAS_CONSTANT * (1.0 / t_ref - 1.0 / t)).exp()
}

/// Cell equations with geometry-dependent factors resolved once.
#[derive(Debug, Clone)]
pub struct Spme {
    cell: CellParameters,
    // specific interfacial area times thickness, per electrode
    area_p: f64,
    area_n: f64,
    // stoichiometry change per coulomb per m²
    dtheta_p: f64,
    dtheta_n: f64,
    // electrolyte ohmic path, m (divide by bulk conductivity)
    ionic_path: f64,
    ionic_path_anode: f64,
    // average-to-average diffusion resistance, s/m
    diffusion_resistance: f64,
    inv_volumes: f64,
    solid_resistance: f64,
    heat_capacity: f64,
}

impl Spme {
    pub fn new(cell: &CellParameters) -> Result<Self> {
        cell.validate()?;
        let c = &cell.constants;
        let eps_sp = cell.solid_fraction_p();
        let eps_sn = cell.solid_fraction_n();
        let a_p = 3.0 * eps_sp / cell.rp_p;
        let a_n = 3.0 * eps_sn / cell.rp_n;
        let kp = cell.eps_p.powf(cell.brugg_p);
        let ks = cell.eps_s.powf(cell.brugg_s);
        let kn = cell.eps_n.powf(cell.brugg_n);
        let ionic_path = cell.l_p / (3.0 * kp) + cell.l_s / ks + cell.l_n / (3.0 * kn);
        let diffusion_resistance = cell.l_p / (3.0 * cell.de_p * kp)
            + cell.l_s / (cell.de_s * ks)
            + cell.l_n / (3.0 * cell.de_n * kn);
        let solid_resistance = cell.l_p / (3.0 * cell.sigma_p * eps_sp)
            + cell.l_n / (3.0 * cell.sigma_n * eps_sn)
            + cell.l_a / c.sigma_al
            + cell.l_z / c.sigma_cu
            + c.contact_resistance;
        Ok(Spme {
            area_p: a_p * cell.l_p,
            area_n: a_n * cell.l_n,
            dtheta_p: 1.0 / (FARADAY * eps_sp * cell.l_p * c.cs_max_p),
            dtheta_n: 1.0 / (FARADAY * eps_sn * cell.l_n * c.cs_max_n),
            ionic_path,
            ionic_path_anode: cell.l_n / (3.0 * kn),
            diffusion_resistance,
            inv_volumes: 1.0 / (cell.eps_p * cell.l_p) + 1.0 / (cell.eps_n * cell.l_n),
            solid_resistance,
            heat_capacity: cell.areal_heat_capacity(),
            cell: cell.clone(),
        })
    }

    pub fn cell(&self) -> &CellParameters {
        &self.cell
    }

    /// 1C current density, A/m².
    pub fn one_c(&self) -> f64 {
        self.cell.constants.capacity
    }

    /// Average stoichiometries at a given state of charge.
    pub fn stoichiometry(&self, soc: f64) -> (f64, f64) {
        let c = &self.cell.constants;
        let missing = (1.0 - soc) * c.capacity * 3600.0;
        (
            c.theta_p_full + missing * self.dtheta_p,
            c.theta_n_full - missing * self.dtheta_n,
        )
    }

    /// Relaxed state at `soc` and ambient temperature.
    pub fn initial_state(&self, soc: f64) -> Result<State> {
        let (tp, tn) = self.stoichiometry(soc);
        if !(tp > 0.0 && tp < 1.0 && tn > 0.0 && tn < 1.0) {
            return Err(Error::InvalidProtocol(format!(
                "state of charge {soc} maps outside the stoichiometry range ({tp:.3}, {tn:.3})"
            )));
        }
        let mut y = [0.0; N_STATES];
        y[SOC] = soc;
        y[THETA_P] = tp;
        y[THETA_N] = tn;
        y[TEMP] = self.cell.t_amb;
        Ok(y)
    }

    fn pore_fluxes(&self, i: f64) -> (f64, f64) {
        // molar flux leaving the particle surface, mol/(m² s)
        (i / (FARADAY * self.area_p), -i / (FARADAY * self.area_n))
    }

    fn solid_diffusivities(&self, t: f64) -> (f64, f64) {
        let c = &self.cell.constants;
        (
            arrhenius(self.cell.ds_p, c.ea_ds_p, c.t_ref, t),
            arrhenius(self.cell.ds_n, c.ea_ds_n, c.t_ref, t),
        )
    }

    fn surface(&self, y: &State, i: f64, t: f64) -> (f64, f64) {
        let c = &self.cell.constants;
        let (jp, jn) = self.pore_fluxes(i);
        let (dp, dn) = self.solid_diffusivities(t);
        let rp = self.cell.rp_p;
        let rn = self.cell.rp_n;
        (
            y[THETA_P] + 8.0 / 35.0 * y[FLUX_P] - rp * jp / (35.0 * dp * c.cs_max_p),
            y[THETA_N] + 8.0 / 35.0 * y[FLUX_N] - rn * jn / (35.0 * dn * c.cs_max_n),
        )
    }

    /// Electrolyte concentrations averaged over each electrode.
    fn electrolyte(&self, y: &State) -> (f64, f64) {
        let cell = &self.cell;
        let ce0 = cell.constants.ce0;
        let vp = cell.eps_p * cell.l_p;
        let vn = cell.eps_n * cell.l_n;
        let dc = y[DELTA_CE] * ce0;
        let cp = ce0 + dc * vn / (vp + vn);
        let cn = ce0 - dc * vp / (vp + vn);
        (cp.max(1.0), cn.max(1.0))
    }

    pub fn outputs(&self, y: &State, i: f64) -> Outputs {
        let cell = &self.cell;
        let c = &cell.constants;
        let t = y[TEMP];
        let rt_f = GAS_CONSTANT * t / FARADAY;
        let (tps, tns) = self.surface(y, i, t);
        let tps_c = tps.clamp(1e-9, 1.0 - 1e-9);
        let tns_c = tns.clamp(1e-9, 1.0 - 1e-9);
        let (ce_p, ce_n) = self.electrolyte(y);
        let dt = t - c.t_ref;

        let u_p = ocp_positive(tps_c) + dt * entropic_positive(tps_c);
        let u_n = ocp_negative(tns_c) + dt * entropic_negative(tns_c);

        let k_p = arrhenius(cell.k_p, c.ea_k_p, c.t_ref, t);
        let k_n = arrhenius(cell.k_n, c.ea_k_n, c.t_ref, t);
        let i0_p = FARADAY * k_p * (ce_p * (1.0 - tps_c) * tps_c).sqrt() * c.cs_max_p;
        let i0_n = FARADAY * k_n * (ce_n * (1.0 - tns_c) * tns_c).sqrt() * c.cs_max_n;
        let eta_p = 2.0 * rt_f * (i / (2.0 * self.area_p * i0_p)).asinh();
        let eta_n = -2.0 * rt_f * (i / (2.0 * self.area_n * i0_n)).asinh();

        let kappa = electrolyte_conductivity(c.ce0, t);
        let ohmic_e = i * self.ionic_path / kappa;
        let conc = 2.0 * rt_f * (1.0 - cell.t_plus) * (ce_p / ce_n).ln();
        let voltage = u_p - u_n + eta_p - eta_n + ohmic_e + conc + i * self.solid_resistance;

        let tpa = y[THETA_P].clamp(1e-9, 1.0 - 1e-9);
        let tna = y[THETA_N].clamp(1e-9, 1.0 - 1e-9);
        let ent_p = entropic_positive(tpa);
        let ent_n = entropic_negative(tna);
        let ocv = ocp_positive(tpa) - ocp_negative(tna) + dt * (ent_p - ent_n);
        let heat = i * (voltage - ocv) + i * t * (ent_p - ent_n);

        let eta_pl = u_n + eta_n - i * self.ionic_path_anode / kappa;
        Outputs {
            voltage,
            ocv,
            eta_pl,
            theta_p_surface: tps,
            theta_n_surface: tns,
            heat,
        }
    }

    /// Time derivative of the state at current density `i`.
    pub fn rhs(&self, y: &State, i: f64) -> State {
        let cell = &self.cell;
        let c = &cell.constants;
        let t = y[TEMP];
        let (jp, jn) = self.pore_fluxes(i);
        let (dp, dn) = self.solid_diffusivities(t);
        let rp = cell.rp_p;
        let rn = cell.rp_n;
        let out = self.outputs(y, i);
        let mut dy = [0.0; N_STATES];
        dy[SOC] = i / (3600.0 * c.capacity);
        dy[THETA_P] = -3.0 * jp / (rp * c.cs_max_p);
        dy[FLUX_P] = -30.0 * dp * y[FLUX_P] / (rp * rp) - 22.5 * jp / (rp * c.cs_max_p);
        dy[THETA_N] = -3.0 * jn / (rn * c.cs_max_n);
        dy[FLUX_N] = -30.0 * dn * y[FLUX_N] / (rn * rn) - 22.5 * jn / (rn * c.cs_max_n);
        let source = (1.0 - cell.t_plus) * i / (FARADAY * c.ce0);
        dy[DELTA_CE] = (source - y[DELTA_CE] / self.diffusion_resistance) * self.inv_volumes;
        dy[TEMP] = (out.heat - c.h_conv * (t - cell.t_amb)) / self.heat_capacity;
        dy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::params::nominal_cell;

    #[test]
    fn conductivity_at_reference() {
        let k = electrolyte_conductivity(1000.0, 298.15);
        assert!(k > 1.0 && k < 1.4, "{k}");
    }

    #[test]
    fn rest_state_is_equilibrium() {
        let m = Spme::new(&nominal_cell()).unwrap();
        let y = m.initial_state(0.2).unwrap();
        let o = m.outputs(&y, 0.0);
        assert!((o.voltage - o.ocv).abs() < 1e-12);
        assert_eq!(o.heat, 0.0);
        let dy = m.rhs(&y, 0.0);
        assert!(dy.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn charging_raises_voltage_above_ocv() {
        let m = Spme::new(&nominal_cell()).unwrap();
        let y = m.initial_state(0.5).unwrap();
        let o = m.outputs(&y, 2.2 * m.one_c());
        assert!(o.voltage > o.ocv);
        assert!(o.heat > 0.0);
        assert!(o.eta_pl > 0.0);
    }

    #[test]
    fn soc_maps_into_stoichiometry_window() {
        let m = Spme::new(&nominal_cell()).unwrap();
        let (p1, n1) = m.stoichiometry(1.0);
        assert_eq!((p1, n1), (0.51, 0.90));
        let (p0, n0) = m.stoichiometry(0.2);
        assert!(p0 > p1 && n0 < n1);
        assert!(m.initial_state(-3.0).is_err());
    }
}
