//! Parameter sweeps producing one CSV row per point.

use geophase::correlator::{coincidence, normally_ordered_moment, ExperimentSetup};
use geophase::entanglement::{
    chsh_max, entanglement_entropy, exchange_entropy, output_state, OrbitalState,
};
use geophase::fock::fock_oracle_moment;
use geophase::multislit::{geometric_isolation, triple_coincidence, TripleSetup};
use geophase::optics::{closed_form_coincidence, Geometry};
use geophase::polarization::{
    geodesic_polygon_solid_angle, poincare_of, wrap, PoincarePoint, PolarizationState,
};
use geophase::Complex64;
use rayon::prelude::*;

use crate::config::{RunConfig, SpherePoint, SweepVar};
use crate::format::{format_number, format_optional};
use crate::CliError;

pub const HEADER: &str = "sweep_var,value,engine,closed_form,oracle,abs_dev";

/// Largest accepted |engine − closed form| per row.
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub sweep_var: f64,
    pub value: f64,
    pub engine: Option<f64>,
    pub closed_form: Option<f64>,
    pub oracle: Option<f64>,
    pub abs_dev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<Row>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(HEADER);
        out.push('\n');
        for r in &self.rows {
            let fields = [
                format_number(r.sweep_var),
                format_number(r.value),
                format_optional(r.engine),
                format_optional(r.closed_form),
                format_optional(r.oracle),
                format_optional(r.abs_dev),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Fails when any row's deviation exceeds [`ROW_TOLERANCE`].
    pub fn check_tolerance(&self) -> Result<(), CliError> {
        let bad: Vec<(usize, f64)> = self
            .rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.abs_dev.map(|d| (i, d)))
            .filter(|&(_, d)| !(d <= ROW_TOLERANCE))
            .collect();
        match bad.iter().max_by(|a, b| a.1.total_cmp(&b.1)) {
            None => Ok(()),
            Some(&(row, worst)) => Err(CliError::Tolerance {
                count: bad.len(),
                worst,
                row,
                tol: ROW_TOLERANCE,
            }),
        }
    }
}

pub fn run_sweep(config: &RunConfig) -> Result<SweepTable, CliError> {
    config.validate()?;
    let rows = config
        .points()
        .into_par_iter()
        .enumerate()
        .map(|(i, x)| {
            sweep_row(config, x).map_err(|source| CliError::Row {
                row: i,
                var: config.sweep.name(),
                value: x,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepTable { rows })
}

fn sweep_row(c: &RunConfig, x: f64) -> geophase::Result<Row> {
    match c.sweep {
        SweepVar::Phi34 => two_detector_row(c, x, c.phi4 + x, c.phi4, c.d_d),
        SweepVar::DetectorSeparation => two_detector_row(c, x, c.phi3, c.phi4, x),
        SweepVar::Omega => entanglement_row(c, x),
        SweepVar::CAzimuth => three_slit_row(c, x),
    }
}

fn two_detector_row(
    c: &RunConfig,
    x: f64,
    phi3: f64,
    phi4: f64,
    d_d: f64,
) -> geophase::Result<Row> {
    let g = Geometry::two_by_two(c.d_s, d_d, c.l, c.wavelength)?;
    let setup = ExperimentSetup::canonical(g.clone(), phi3, phi4, c.n_b)?;
    let value = coincidence(&setup)?;
    let closed = closed_form_coincidence(&g, phi3 - phi4)?;
    let oracle = if c.oracle {
        let m = |d: &[usize]| fock_oracle_moment(&setup, d, c.n_max).map(|o| o.value);
        Some(m(&[0, 1])? / (m(&[0])? * m(&[1])?))
    } else {
        None
    };
    Ok(Row {
        sweep_var: x,
        value,
        engine: Some(normally_ordered_moment(&setup, &[0, 1])?),
        closed_form: Some(closed),
        oracle,
        abs_dev: Some((value - closed).abs()),
    })
}

fn entanglement_row(c: &RunConfig, omega: f64) -> geophase::Result<Row> {
    let phi = OrbitalState::short();
    let psi = OrbitalState::new(
        Complex64::new(c.psi_theta.cos(), 0.0),
        Complex64::from_polar(c.psi_theta.sin(), c.psi_phase),
    )?;
    let state = output_state(&phi, &psi, omega)?;
    let value = entanglement_entropy(&state);
    let closed = exchange_entropy(phi.inner(&psi).norm_sqr(), omega)?;
    Ok(Row {
        sweep_var: omega,
        value,
        engine: Some(chsh_max(&state)),
        closed_form: Some(closed),
        oracle: None,
        abs_dev: Some((value - closed).abs()),
    })
}

fn sphere_state((theta, phi): SpherePoint) -> geophase::Result<PolarizationState> {
    let p = PoincarePoint::new(
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    )?;
    Ok(PolarizationState::from_poincare(&p))
}

fn three_slit_row(c: &RunConfig, c_phi: f64) -> geophase::Result<Row> {
    let [a, b, cc] = c.analysers;
    let states = [
        sphere_state(a)?,
        sphere_state(b)?,
        sphere_state((cc.0, c_phi))?,
    ];
    let geometry = TripleSetup::default_geometry(c.wavelength)?;
    let triple = TripleSetup::from_states(geometry, states, c.n_b)?;
    let setup = triple.setup();

    let g3 = |m3: f64, m: [f64; 3]| m3 / (m[0] * m[1] * m[2]);
    let singles = |f: &dyn Fn(&[usize]) -> geophase::Result<f64>| -> geophase::Result<[f64; 3]> {
        Ok([f(&[0])?, f(&[1])?, f(&[2])?])
    };
    let value = g3(
        triple_coincidence(&triple)?,
        singles(&|d| normally_ordered_moment(setup, d))?,
    );
    let phase = geometric_isolation(&triple)?.phase;
    let pts: Vec<PoincarePoint> = states.iter().map(poincare_of).collect();
    let half = wrap(
        0.5 * geodesic_polygon_solid_angle(&pts)?,
        2.0 * std::f64::consts::PI,
    );
    let oracle = if c.oracle {
        let m = |d: &[usize]| fock_oracle_moment(setup, d, c.n_max).map(|o| o.value);
        Some(g3(m(&[0, 1, 2])?, singles(&m)?))
    } else {
        None
    };
    Ok(Row {
        sweep_var: c_phi,
        value,
        engine: Some(phase),
        closed_form: Some(half),
        oracle,
        abs_dev: Some(wrap(phase - half, 2.0 * std::f64::consts::PI).abs()),
    })
}
