//! Thermal-state photon counting statistics at the detectors.
//!
//! Each detector mode is a linear combination of source modes,
//! `a_b = Σ_s u_bs · P_b P_s · a_s`. Thermal sources are zero-mean Gaussian
//! states with `⟨a_s†^α a_s'^β⟩ = δ_ss' δ^αβ n_s`, so every normally ordered
//! moment of detector number operators is a sum of permanents of the
//! detector coherence matrix `G[(b,α),(b',β)] = ⟨a_b†^α a_b'^β⟩`.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::optics::{propagation_amplitude_at, Geometry, PropagationMode};
use crate::permanent::{permanent, MAX_ORDER};
use crate::polarization::{circular_state, linear_state, projector_of, Handedness, Projector};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative size of the imaginary residue tolerated in a real moment.
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSetup {
    geometry: Geometry,
    source_analysers: Vec<Projector>,
    detector_analysers: Vec<Projector>,
    occupations: Vec<f64>,
    mode: PropagationMode,
    time: f64,
}

impl ExperimentSetup {
    pub fn new(
        geometry: Geometry,
        source_analysers: Vec<Projector>,
        detector_analysers: Vec<Projector>,
        occupations: Vec<f64>,
    ) -> Result<Self> {
        let (ns, nd) = (geometry.sources().len(), geometry.detectors().len());
        if source_analysers.len() != ns || occupations.len() != ns {
            return Err(Error::Setup(format!(
                "{ns} sources but {} analysers and {} occupations",
                source_analysers.len(),
                occupations.len()
            )));
        }
        if detector_analysers.len() != nd {
            return Err(Error::Setup(format!(
                "{nd} detectors but {} analysers",
                detector_analysers.len()
            )));
        }
        if let Some(bad) = occupations.iter().find(|n| !(**n >= 0.0 && n.is_finite())) {
            return Err(Error::Setup(format!("occupation must be >= 0, got {bad}")));
        }
        Ok(Self {
            geometry,
            source_analysers,
            detector_analysers,
            occupations,
            mode: PropagationMode::default(),
            time: 0.0,
        })
    }

    /// Right/left circular sources (0, 1), linear detector analysers at
    /// `phi3` and `phi4` (detectors 0, 1), shared occupation `n_b`.
    pub fn canonical(geometry: Geometry, phi3: f64, phi4: f64, n_b: f64) -> Result<Self> {
        Self::new(
            geometry,
            vec![
                projector_of(&circular_state(Handedness::Right)),
                projector_of(&circular_state(Handedness::Left)),
            ],
            vec![
                projector_of(&linear_state(phi3)),
                projector_of(&linear_state(phi4)),
            ],
            vec![n_b, n_b],
        )
    }

    pub fn with_mode(mut self, mode: PropagationMode) -> Self {
        self.mode = mode;
        self
    }

    /// Evaluates the propagation factors at time `t` instead of t = 0.
    pub fn at_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn with_occupation(mut self, source: usize, n: f64) -> Result<Self> {
        if source >= self.occupations.len() {
            return Err(Error::Index {
                index: source,
                len: self.occupations.len(),
            });
        }
        if !(n >= 0.0 && n.is_finite()) {
            return Err(Error::Setup(format!("occupation must be >= 0, got {n}")));
        }
        self.occupations[source] = n;
        Ok(self)
    }

    pub fn with_detector_analyser(mut self, detector: usize, p: Projector) -> Result<Self> {
        let len = self.detector_analysers.len();
        *self
            .detector_analysers
            .get_mut(detector)
            .ok_or(Error::Index {
                index: detector,
                len,
            })? = p;
        Ok(self)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn source_analysers(&self) -> &[Projector] {
        &self.source_analysers
    }

    pub fn detector_analysers(&self) -> &[Projector] {
        &self.detector_analysers
    }

    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    pub fn mode(&self) -> PropagationMode {
        self.mode
    }

    pub fn num_sources(&self) -> usize {
        self.occupations.len()
    }

    pub fn num_detectors(&self) -> usize {
        self.detector_analysers.len()
    }

    pub fn propagation(&self, detector: usize, source: usize) -> Result<Complex64> {
        propagation_amplitude_at(&self.geometry, detector, source, self.mode, self.time)
    }

    /// The 2×2 map from source-mode amplitudes to detector-mode amplitudes,
    /// u_bs · P_b P_s.
    pub fn transfer(&self, detector: usize, source: usize) -> Result<Matrix2<Complex64>> {
        let u = self.propagation(detector, source)?;
        let pb = self.detector_analysers[detector].matrix();
        let ps = self.source_analysers[source].matrix();
        Ok((pb * ps) * u)
    }

    fn check_detector(&self, b: usize) -> Result<()> {
        if b < self.num_detectors() {
            Ok(())
        } else {
            Err(Error::Index {
                index: b,
                len: self.num_detectors(),
            })
        }
    }
}

/// First-order coherences between composite (detector, polarization) modes;
/// index `2·b + α`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    entries: DMatrix<Complex64>,
}

impl CoherenceMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn num_detectors(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn get(&self, b: usize, alpha: usize, b2: usize, beta: usize) -> Complex64 {
        self.entries[(2 * b + alpha, 2 * b2 + beta)]
    }

    /// The 2×2 polarization block ⟨a_b†^α a_b'^β⟩.
    pub fn block(&self, b: usize, b2: usize) -> Matrix2<Complex64> {
        self.entries.fixed_view::<2, 2>(2 * b, 2 * b2).into_owned()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn detector_coherence_matrix(setup: &ExperimentSetup) -> Result<CoherenceMatrix> {
    let nd = setup.num_detectors();
    let mut g = DMatrix::from_element(2 * nd, 2 * nd, ZERO);
    for s in 0..setup.num_sources() {
        let n = setup.occupations[s];
        if n == 0.0 {
            continue;
        }
        let transfers = (0..nd)
            .map(|b| setup.transfer(b, s))
            .collect::<Result<Vec<_>>>()?;
        for (b, mb) in transfers.iter().enumerate() {
            for (b2, mb2) in transfers.iter().enumerate() {
                // Σ_γ conj(M_b[α,γ]) M_b'[β,γ] = (conj(M_b) M_b'^T)[α,β]
                let block = mb.conjugate() * mb2.transpose() * Complex64::new(n, 0.0);
                let mut view = g.fixed_view_mut::<2, 2>(2 * b, 2 * b2);
                view += block;
            }
        }
    }
    Ok(CoherenceMatrix { entries: g })
}

pub fn mean_count(setup: &ExperimentSetup, detector: usize) -> Result<f64> {
    setup.check_detector(detector)?;
    let g = detector_coherence_matrix(setup)?;
    Ok(g.block(detector, detector).trace().re)
}

/// ⟨: N_{b₁} N_{b₂} ⋯ N_{b_k} :⟩ for a multiset of detector indices.
pub fn normally_ordered_moment(setup: &ExperimentSetup, detectors: &[usize]) -> Result<f64> {
    let g = detector_coherence_matrix(setup)?;
    moment_from_coherence(&g, detectors)
}

/// Same as [`normally_ordered_moment`] with a precomputed coherence matrix.
pub fn moment_from_coherence(g: &CoherenceMatrix, detectors: &[usize]) -> Result<f64> {
    let k = detectors.len();
    if k == 0 {
        return Err(Error::TooFew { needed: 1, got: 0 });
    }
    if k > MAX_ORDER {
        return Err(Error::Capacity {
            what: "moment order",
            requested: k,
            cap: MAX_ORDER,
        });
    }
    if let Some(&b) = detectors.iter().find(|&&b| b >= g.num_detectors()) {
        return Err(Error::Index {
            index: b,
            len: g.num_detectors(),
        });
    }

    let mut total = ZERO;
    let mut scale: f64 = 0.0;
    let mut sub = DMatrix::from_element(k, k, ZERO);
    // Each bit of `pol` picks the polarization index of one factor.
    for pol in 0u32..(1u32 << k) {
        let mode = |m: usize| 2 * detectors[m] + ((pol >> m) & 1) as usize;
        for m in 0..k {
            for n in 0..k {
                sub[(m, n)] = g.entries[(mode(m), mode(n))];
            }
        }
        let p = permanent(&sub)?;
        scale = scale.max(p.norm());
        total += p;
    }
    if total.im.abs() > IMAG_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ComplexMoment(total.im));
    }
    Ok(total.re)
}

/// Normalized cross-correlation ⟨:N_a N_b:⟩ / (⟨N_a⟩⟨N_b⟩).
pub fn coincidence_between(setup: &ExperimentSetup, a: usize, b: usize) -> Result<f64> {
    setup.check_detector(a)?;
    setup.check_detector(b)?;
    let g = detector_coherence_matrix(setup)?;
    let na = g.block(a, a).trace().re;
    let nb = g.block(b, b).trace().re;
    for (d, n) in [(a, na), (b, nb)] {
        if !(n > 0.0) {
            return Err(Error::ZeroCount(d));
        }
    }
    Ok(moment_from_coherence(&g, &[a, b])? / (na * nb))
}

/// C = ⟨:N₃N₄:⟩ / ⟨N₃⟩⟨N₄⟩ for the first two detectors.
pub fn coincidence(setup: &ExperimentSetup) -> Result<f64> {
    if setup.num_detectors() != 2 {
        return Err(Error::Setup(format!(
            "coincidence needs exactly 2 detectors, got {}",
            setup.num_detectors()
        )));
    }
    coincidence_between(setup, 0, 1)
}

/// ⟨:N_b N_b:⟩ / ⟨N_b⟩².
pub fn self_correlation(setup: &ExperimentSetup, detector: usize) -> Result<f64> {
    coincidence_between(setup, detector, detector)
}

/// One term of the expansion of ⟨:N_a N_b:⟩ obtained by splitting each of
/// the four field factors into its per-source contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WickTerm {
    /// Sources feeding a_a†, a_a, a_b†, a_b in that order.
    pub sources: [usize; 4],
    pub value: Complex64,
    /// The creation and annihilation source labels differ as multisets, so
    /// the term vanishes for mutually incoherent sources regardless of the
    /// analysers.
    pub structurally_zero: bool,
}

/// Expands ⟨:N_a N_b:⟩ term by term directly in the source modes, using
/// the pairwise source contractions rather than the detector coherence
/// matrix.
pub fn wick_expansion(setup: &ExperimentSetup, a: usize, b: usize) -> Result<Vec<WickTerm>> {
    setup.check_detector(a)?;
    setup.check_detector(b)?;
    let ns = setup.num_sources();
    let m = |det: usize| {
        (0..ns)
            .map(|s| setup.transfer(det, s))
            .collect::<Result<Vec<_>>>()
    };
    let (ma, mb) = (m(a)?, m(b)?);
    let occ = &setup.occupations;

    // ⟨a†_{s1 g1} a†_{s3 g3} a_{s4 g4} a_{s2 g2}⟩ for independent thermal modes.
    let contraction =
        |s1: usize, g1: usize, s2: usize, g2: usize, s3: usize, g3: usize, s4: usize, g4: usize| {
            let d = |x: (usize, usize), y: (usize, usize)| x == y;
            let mut w = 0.0;
            if d((s1, g1), (s2, g2)) && d((s3, g3), (s4, g4)) {
                w += occ[s1] * occ[s3];
            }
            if d((s1, g1), (s4, g4)) && d((s3, g3), (s2, g2)) {
                w += occ[s1] * occ[s3];
            }
            w
        };

    let mut terms = Vec::with_capacity(ns.pow(4));
    for s1 in 0..ns {
        for s2 in 0..ns {
            for s3 in 0..ns {
                for s4 in 0..ns {
                    let mut value = ZERO;
                    for al in 0..2 {
                        for be in 0..2 {
                            for g1 in 0..2 {
                                for g2 in 0..2 {
                                    for g3 in 0..2 {
                                        for g4 in 0..2 {
                                            let w = contraction(s1, g1, s2, g2, s3, g3, s4, g4);
                                            if w == 0.0 {
                                                continue;
                                            }
                                            value += ma[s1][(al, g1)].conj()
                                                * mb[s3][(be, g3)].conj()
                                                * mb[s4][(be, g4)]
                                                * ma[s2][(al, g2)]
                                                * w;
                                        }
                                    }
                                }
                            }
                        }
                    }
                    let mut cre = [s1, s3];
                    let mut ann = [s2, s4];
                    cre.sort_unstable();
                    ann.sort_unstable();
                    terms.push(WickTerm {
                        sources: [s1, s2, s3, s4],
                        value,
                        structurally_zero: cre != ann,
                    });
                }
            }
        }
    }
    Ok(terms)
}
