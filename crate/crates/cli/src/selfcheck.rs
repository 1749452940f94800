//! Invariant suite behind `geophase selfcheck`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::fmt;

use geophase::correlator::{coincidence, mean_count, self_correlation, ExperimentSetup};
use geophase::entanglement::{entanglement_entropy, output_state, OrbitalState};
use geophase::fock::fock_oracle_moment;
use geophase::multislit::{geometric_isolation, sorkin_parameter, SlitAmplitudes, TripleSetup};
use geophase::optics::{closed_form_coincidence, Geometry};
use geophase::polarization::{
    circular_state, geodesic_polygon_solid_angle, linear_state, pancharatnam_trace, poincare_of,
    projector_of, wrap, Handedness,
};
use geophase::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deliberate convention errors, for checking that the suite notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Uses left- instead of right-circular light on the trace side of the
    /// trace/solid-angle identity.
    FlipHandedness,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub oracle: bool,
    pub n_max: usize,
    pub fault: Option<Fault>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            oracle: true,
            n_max: 6,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        write!(f, "{tag}  {:<28} {}", self.name, self.detail)
    }
}

fn judged(name: &'static str, worst: geophase::Result<f64>, tol: f64) -> Check {
    match worst {
        Ok(w) => Check {
            name,
            status: if w <= tol { Status::Pass } else { Status::Fail },
            detail: format!("max deviation {w:.3e} (tol {tol:e})"),
        },
        Err(e) => Check {
            name,
            status: Status::Fail,
            detail: format!("error: {e}"),
        },
    }
}

pub fn run_selfcheck(opts: &Options) -> Vec<Check> {
    let mut checks = vec![
        judged(
            "trace/solid-angle identity",
            trace_identity(opts.fault),
            1e-9,
        ),
        judged("engine/closed-form grid", closed_form_grid(), 1e-9),
    ];
    checks.push(if opts.oracle {
        judged("oracle agreement", oracle_agreement(opts.n_max), 1e-3)
    } else {
        Check {
            name: "oracle agreement",
            status: Status::Skip,
            detail: "oracle disabled".into(),
        }
    });
    checks.push(judged("Sorkin parameter", Ok(sorkin_worst()), 1e-12));
    checks.push(judged("self-correlation flatness", flatness(), 1e-12));
    checks.push(judged("three-slit octant phase", octant(), 1e-9));
    checks.push(judged(
        "orthogonal exchange entropy",
        orthogonal_entropy(),
        1e-10,
    ));
    checks
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.status != Status::Fail)
}

/// Modulus 1/4 and 2·arg Tr = Ω over a grid of analyser angles. Returns the
/// larger of the two deviations.
fn trace_identity(fault: Option<Fault>) -> geophase::Result<f64> {
    let right = circular_state(Handedness::Right);
    let left = circular_state(Handedness::Left);
    let traced_right = if fault == Some(Fault::FlipHandedness) {
        left
    } else {
        right
    };
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..10 {
            let (p3, p4) = (-1.5 + 0.157 * i as f64, 0.31 * j as f64);
            let (s3, s4) = (linear_state(p3), linear_state(p4));
            let tr = pancharatnam_trace(&[
                projector_of(&traced_right),
                projector_of(&s3),
                projector_of(&left),
                projector_of(&s4),
            ])?;
            let omega = geodesic_polygon_solid_angle(&[
                poincare_of(&right),
                poincare_of(&s3),
                poincare_of(&left),
                poincare_of(&s4),
            ])?;
            let dev = if tr.degenerate {
                f64::INFINITY
            } else {
                wrap(2.0 * tr.phase()? - omega, 4.0 * PI).abs()
            };
            worst = worst.max(dev).max((tr.modulus() - 0.25).abs());
        }
    }
    Ok(worst)
}

fn closed_form_grid() -> geophase::Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let g = Geometry::two_by_two(1e-3, 2e-4 * i as f64, 1.0, 500e-9)?;
        for j in 0..10 {
            let phi34 = PI * j as f64 / 10.0;
            let s = ExperimentSetup::canonical(g.clone(), phi34, 0.0, 0.1)?;
            worst = worst.max((coincidence(&s)? - closed_form_coincidence(&g, phi34)?).abs());
        }
    }
    Ok(worst)
}

/// Largest relative deviation of oracle coincidences at n_B = 0.1.
fn oracle_agreement(n_max: usize) -> geophase::Result<f64> {
    let mut worst: f64 = 0.0;
    for (d_d, phi34) in [(0.0, 0.0), (3e-4, 0.7), (1.1e-3, 2.0)] {
        let g = Geometry::two_by_two(1e-3, d_d, 1.0, 500e-9)?;
        let s = ExperimentSetup::canonical(g, phi34, 0.0, 0.1)?;
        let m = |d: &[usize]| fock_oracle_moment(&s, d, n_max).map(|o| o.value);
        let oracle = m(&[0, 1])? / (m(&[0])? * m(&[1])?);
        let engine = coincidence(&s)?;
        worst = worst.max((oracle - engine).abs() / engine);
    }
    Ok(worst)
}

fn sorkin_worst() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut z = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    (0..1000)
        .map(|_| sorkin_parameter(&SlitAmplitudes::new(z(), z(), z())).abs())
        .fold(0.0, f64::max)
}

/// Mean counts and self-correlations at detector 3 over a φ₄ sweep.
fn flatness() -> geophase::Result<f64> {
    let g = Geometry::two_by_two(1e-3, 1e-3, 1.0, 500e-9)?;
    let reference = ExperimentSetup::canonical(g.clone(), 0.3, 0.0, 0.1)?;
    let (n0, s0) = (mean_count(&reference, 0)?, self_correlation(&reference, 0)?);
    let mut worst: f64 = 0.0;
    for k in 0..64 {
        let s = ExperimentSetup::canonical(g.clone(), 0.3, PI * k as f64 / 64.0, 0.1)?;
        worst = worst
            .max((mean_count(&s, 0)? - n0).abs() / n0)
            .max((self_correlation(&s, 0)? - s0).abs());
    }
    Ok(worst)
}

fn octant() -> geophase::Result<f64> {
    let states = [
        linear_state(0.0),
        linear_state(-FRAC_PI_4),
        circular_state(Handedness::Right),
    ];
    let phase = geometric_isolation(&TripleSetup::with_default_layout(states, 0.1)?)?.phase;
    Ok((phase - FRAC_PI_4).abs())
}

fn orthogonal_entropy() -> geophase::Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..32 {
        let out = output_state(
            &OrbitalState::short(),
            &OrbitalState::long(),
            0.4 * k as f64,
        )?;
        worst = worst.max((entanglement_entropy(&out) - 1.0).abs());
    }
    // And a non-orthogonal pair stays below one bit.
    let plus = OrbitalState::new(
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(FRAC_1_SQRT_2, 0.0),
    )?;
    let partial = entanglement_entropy(&output_state(&OrbitalState::short(), &plus, 1.0)?);
    if partial >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(worst)
}
