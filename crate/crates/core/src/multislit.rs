//! Three slits, three detectors.
//!
//! Single-particle interference is two-slit separable: the three-slit
//! probability is fixed by the one- and two-slit probabilities. The
//! third-order intensity correlation ⟨:N₄N₅N₆:⟩ of three incoherent
//! polarized sources is not, and its irreducible part carries the
//! Pancharatnam phase of the triangle spanned by the three analyser states.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::correlator::{detector_coherence_matrix, normally_ordered_moment, ExperimentSetup};
use crate::optics::Geometry;
use crate::polarization::{poincare_of, PolarizationState, Projector, ORTHOGONAL_TOL};
use crate::{Error, Result};

/// Below this ratio |(|Q₂|² − |Q₁|²)| / (|Q₁|² + |Q₂|²) the propagation
/// factors cannot separate the geometric factor from its conjugate.
pub const CONDITION_TOL: f64 = 1e-6;

const COINCIDENT_TOL: f64 = 1e-12;

/// Single-particle amplitudes for passage through slits A, B, C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitAmplitudes {
    pub psi_a: Complex64,
    pub psi_b: Complex64,
    pub psi_c: Complex64,
}

impl SlitAmplitudes {
    pub fn new(psi_a: Complex64, psi_b: Complex64, psi_c: Complex64) -> Self {
        Self {
            psi_a,
            psi_b,
            psi_c,
        }
    }
}

/// ε = P_ABC − P_AB − P_BC − P_CA + P_A + P_B + P_C.
pub fn sorkin_parameter(amps: &SlitAmplitudes) -> f64 {
    let (a, b, c) = (amps.psi_a, amps.psi_b, amps.psi_c);
    let p = |z: Complex64| z.norm_sqr();
    p(a + b + c) - p(a + b) - p(b + c) - p(c + a) + p(a) + p(b) + p(c)
}

/// Three polarized sources (A, B, C) and three unpolarised detectors
/// (4, 5, 6, stored as indices 0, 1, 2).
#[derive(Debug, Clone, PartialEq)]
pub struct TripleSetup {
    setup: ExperimentSetup,
}

impl TripleSetup {
    pub fn new(setup: ExperimentSetup) -> Result<Self> {
        if setup.num_sources() != 3 || setup.num_detectors() != 3 {
            return Err(Error::Setup(format!(
                "three-slit setup needs 3 sources and 3 detectors, got {} and {}",
                setup.num_sources(),
                setup.num_detectors()
            )));
        }
        if let Some(b) = setup
            .detector_analysers()
            .iter()
            .position(|p| !p.is_identity())
        {
            return Err(Error::Setup(format!("detector {b} must be unpolarised")));
        }
        if let Some(s) = setup
            .source_analysers()
            .iter()
            .position(|p| p.is_identity())
        {
            return Err(Error::Setup(format!("source {s} must be polarized")));
        }
        Ok(Self { setup })
    }

    pub fn from_states(
        geometry: Geometry,
        states: [PolarizationState; 3],
        n_b: f64,
    ) -> Result<Self> {
        let sources = states
            .iter()
            .map(crate::polarization::projector_of)
            .collect();
        Self::new(ExperimentSetup::new(
            geometry,
            sources,
            vec![Projector::identity(); 3],
            vec![n_b; 3],
        )?)
    }

    /// Asymmetric layout at wavelength λ: sub-millimetre triangles of slits
    /// and detectors 1 m apart, chosen so the two cyclic propagation sums
    /// have clearly different moduli.
    pub fn default_geometry(wavelength: f64) -> Result<Geometry> {
        let mm = 1e-3;
        Geometry::new(
            vec![
                Vector3::new(-0.40 * mm, 0.00, 0.0),
                Vector3::new(0.30 * mm, 0.10 * mm, 0.0),
                Vector3::new(0.05 * mm, 0.50 * mm, 0.0),
            ],
            vec![
                Vector3::new(-0.30 * mm, -0.20 * mm, 1.0),
                Vector3::new(0.45 * mm, 0.05 * mm, 1.0),
                Vector3::new(-0.10 * mm, 0.42 * mm, 1.0),
            ],
            wavelength,
            1.0,
        )
    }

    pub fn with_default_layout(states: [PolarizationState; 3], n_b: f64) -> Result<Self> {
        Self::from_states(Self::default_geometry(500e-9)?, states, n_b)
    }

    pub fn setup(&self) -> &ExperimentSetup {
        &self.setup
    }

    pub fn into_setup(self) -> ExperimentSetup {
        self.setup
    }

    /// Same analysers and layout with one source switched off.
    pub fn blocking(&self, source: usize) -> Result<Self> {
        Ok(Self {
            setup: self.setup.clone().with_occupation(source, 0.0)?,
        })
    }
}

/// ⟨:N₄N₅N₆:⟩ from the permanent engine.
pub fn triple_coincidence(setup: &TripleSetup) -> Result<f64> {
    normally_ordered_moment(&setup.setup, &[0, 1, 2])
}

/// ⟨:N₄N₅N₆:⟩ split by the cycle type of the detector permutation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleDecomposition {
    /// Tr G₄₄ · Tr G₅₅ · Tr G₆₆.
    pub pedestal: f64,
    /// Σ Tr G_aa · Tr(G_bc G_cb) over the three transpositions.
    pub pairwise: f64,
    /// 2 Re Tr(G₄₅ G₅₆ G₆₄).
    pub cyclic: f64,
}

impl TripleDecomposition {
    pub fn total(&self) -> f64 {
        self.pedestal + self.pairwise + self.cyclic
    }
}

pub fn decompose_triple(setup: &TripleSetup) -> Result<TripleDecomposition> {
    let g = detector_coherence_matrix(&setup.setup)?;
    let blk = |a: usize, b: usize| g.block(a, b);
    let tr = |m: Matrix2<Complex64>| m.trace();
    let pedestal = tr(blk(0, 0)) * tr(blk(1, 1)) * tr(blk(2, 2));
    let pairwise = tr(blk(0, 0)) * tr(blk(1, 2) * blk(2, 1))
        + tr(blk(1, 1)) * tr(blk(2, 0) * blk(0, 2))
        + tr(blk(2, 2)) * tr(blk(0, 1) * blk(1, 0));
    Ok(TripleDecomposition {
        pedestal: pedestal.re,
        pairwise: pairwise.re,
        cyclic: 2.0 * cycle_amplitude(&setup.setup)?.re,
    })
}

/// Tr(G₄₅ G₅₆ G₆₄); the cyclic term is twice its real part.
fn cycle_amplitude(setup: &ExperimentSetup) -> Result<Complex64> {
    let g = detector_coherence_matrix(setup)?;
    Ok((g.block(0, 1) * g.block(1, 2) * g.block(2, 0)).trace())
}

/// Part of Tr(G₄₅ G₅₆ G₆₄) involving all three sources, by inclusion–exclusion
/// over runs with subsets of the sources switched on.
pub fn three_source_cycle(setup: &TripleSetup) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 1u32..8 {
        let mut run = setup.setup.clone();
        for s in 0..3 {
            if mask & (1 << s) == 0 {
                run = run.with_occupation(s, 0.0)?;
            }
        }
        let sign = if (3 - mask.count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        total += sign * cycle_amplitude(&run)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolatedPhase {
    /// Ω_ABC / 2 in (−π, π].
    pub phase: f64,
    /// Fewer than three distinct analyser states; the phase is then 0.
    pub degenerate: bool,
}

/// Recovers the triangle phase arg Tr(P_A P_B P_C) from correlator runs.
///
/// The three-source part of the cycle amplitude is
/// n_A n_B n_C [conj(T)·Q₁ + T·Q₂] with T = Tr(P_A P_B P_C) and Q₁, Q₂ the
/// propagation products summed over the two orientations of the cycle.
/// Writing T = x + iy gives a real 2×2 system whose determinant is
/// |Q₂|² − |Q₁|².
pub fn geometric_isolation(setup: &TripleSetup) -> Result<IsolatedPhase> {
    let s = &setup.setup;
    let analysers = s.source_analysers();
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        if analysers[i].overlap(&analysers[j]) < ORTHOGONAL_TOL {
            return Err(Error::OrthogonalNeighbors(i, j));
        }
    }
    let occupation: f64 = s.occupations().iter().product();
    if occupation == 0.0 {
        return Err(Error::Setup(
            "geometric isolation needs all three sources on".into(),
        ));
    }
    let points: Vec<_> = analysers
        .iter()
        .map(|p| poincare_of(&state_of(p)))
        .collect();
    let coincident = |i: usize, j: usize| points[i].dot(&points[j]) > 1.0 - COINCIDENT_TOL;
    if coincident(0, 1) || coincident(1, 2) || coincident(2, 0) {
        return Ok(IsolatedPhase {
            phase: 0.0,
            degenerate: true,
        });
    }

    let k = three_source_cycle(setup)? / occupation;
    let u = |b: usize, src: usize| s.propagation(b, src);
    // Source order (s1, s2, s3) feeds the detector cycle 4→5→6→4.
    let orient = |order: [usize; 3]| -> Result<Complex64> {
        let mut q = Complex64::new(0.0, 0.0);
        for r in 0..3 {
            let (s1, s2, s3) = (order[r], order[(r + 1) % 3], order[(r + 2) % 3]);
            q += u(0, s1)?.conj()
                * u(1, s1)?
                * u(1, s2)?.conj()
                * u(2, s2)?
                * u(2, s3)?.conj()
                * u(0, s3)?;
        }
        Ok(q)
    };
    let (q1, q2) = (orient([0, 1, 2])?, orient([0, 2, 1])?);
    let det = q2.norm_sqr() - q1.norm_sqr();
    let scale = q1.norm_sqr() + q2.norm_sqr();
    if !(det.abs() > CONDITION_TOL * scale) {
        return Err(Error::IllConditioned(format!(
            "cyclic propagation sums have equal modulus (|Q1|² = {:e}, |Q2|² = {:e})",
            q1.norm_sqr(),
            q2.norm_sqr()
        )));
    }
    // k = x·(Q₁ + Q₂) + y·i(Q₂ − Q₁)
    let (a, b) = (q1 + q2, Complex64::new(0.0, 1.0) * (q2 - q1));
    let d = a.re * b.im - a.im * b.re;
    let x = (k.re * b.im - k.im * b.re) / d;
    let y = (a.re * k.im - a.im * k.re) / d;
    Ok(IsolatedPhase {
        phase: y.atan2(x),
        degenerate: false,
    })
}

/// Unit vector spanning a rank-1 projector.
fn state_of(p: &Projector) -> PolarizationState {
    let m = p.matrix();
    let col = if m[(0, 0)].re >= m[(1, 1)].re { 0 } else { 1 };
    PolarizationState::normalized(m[(0, col)], m[(1, col)])
        .expect("rank-1 projector has a nonzero column")
}
