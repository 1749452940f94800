//! Source/detector layout and propagation factors.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::polarization::{
    circular_state, geodesic_polygon_solid_angle, linear_state, poincare_of, Handedness,
};
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEFAULT_FAR_FIELD_RATIO: f64 = 100.0;

/// How the source → detector amplitude u_bs is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationMode {
    /// Modulus 1/l, phase k·|r_b − r_s|.
    FarField,
    /// Modulus 1/l, phase linearized about the detector centroid c:
    /// k·(|c − r_s| + r̂_s·(r_b − c)). This is the regime the closed-form
    /// fringe describes.
    #[default]
    Linearized,
    /// Spherical wave: modulus 1/|r_b − r_s|, phase k·|r_b − r_s|.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    sources: Vec<Vector3<f64>>,
    detectors: Vec<Vector3<f64>>,
    wavelength: f64,
    distance: f64,
    far_field_ratio: f64,
}

impl Geometry {
    pub fn new(
        sources: Vec<Vector3<f64>>,
        detectors: Vec<Vector3<f64>>,
        wavelength: f64,
        distance: f64,
    ) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::Geometry(format!(
                "wavelength must be > 0, got {wavelength}"
            )));
        }
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::Geometry(format!(
                "distance l must be > 0, got {distance}"
            )));
        }
        if sources.is_empty() || detectors.is_empty() {
            return Err(Error::Geometry(
                "need at least one source and one detector".into(),
            ));
        }
        for (b, d) in detectors.iter().enumerate() {
            for (s, r) in sources.iter().enumerate() {
                let dist = (d - r).norm();
                if !(dist > 0.0 && dist.is_finite()) {
                    return Err(Error::Geometry(format!(
                        "detector {b} and source {s} coincide"
                    )));
                }
            }
        }
        Ok(Self {
            sources,
            detectors,
            wavelength,
            distance,
            far_field_ratio: DEFAULT_FAR_FIELD_RATIO,
        })
    }

    /// Two sources on the x axis at z = 0 and two detectors on the x axis at
    /// z = l, each pair centred on the z axis. Source 0 sits at −d_S/2,
    /// detector 0 at −d_D/2.
    pub fn two_by_two(
        source_separation: f64,
        detector_separation: f64,
        distance: f64,
        wavelength: f64,
    ) -> Result<Self> {
        let (hs, hd) = (0.5 * source_separation, 0.5 * detector_separation);
        Self::new(
            vec![Vector3::new(-hs, 0.0, 0.0), Vector3::new(hs, 0.0, 0.0)],
            vec![
                Vector3::new(-hd, 0.0, distance),
                Vector3::new(hd, 0.0, distance),
            ],
            wavelength,
            distance,
        )
    }

    pub fn with_far_field_ratio(mut self, ratio: f64) -> Self {
        self.far_field_ratio = ratio;
        self
    }

    pub fn with_wavelength(&self, wavelength: f64) -> Result<Self> {
        let mut g = Self::new(
            self.sources.clone(),
            self.detectors.clone(),
            wavelength,
            self.distance,
        )?;
        g.far_field_ratio = self.far_field_ratio;
        Ok(g)
    }

    pub fn sources(&self) -> &[Vector3<f64>] {
        &self.sources
    }

    pub fn detectors(&self) -> &[Vector3<f64>] {
        &self.detectors
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn far_field_ratio(&self) -> f64 {
        self.far_field_ratio
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn angular_frequency(&self) -> f64 {
        self.wavenumber() * SPEED_OF_LIGHT
    }

    pub fn source_separation(&self) -> f64 {
        max_pairwise(&self.sources)
    }

    pub fn detector_separation(&self) -> f64 {
        max_pairwise(&self.detectors)
    }

    pub fn is_far_field(&self) -> bool {
        self.check_far_field().is_ok()
    }

    pub fn check_far_field(&self) -> Result<()> {
        let separation = self.source_separation().max(self.detector_separation());
        if self.distance >= self.far_field_ratio * separation {
            Ok(())
        } else {
            Err(Error::NotFarField {
                distance: self.distance,
                ratio: self.far_field_ratio,
                separation,
            })
        }
    }

    pub fn detector_centroid(&self) -> Vector3<f64> {
        self.detectors.iter().sum::<Vector3<f64>>() / self.detectors.len() as f64
    }

    /// k·r̂_s, with r̂_s the unit vector from source `s` to the detector
    /// centroid.
    pub fn wavevector(&self, source: usize) -> Result<Vector3<f64>> {
        let r = self.source(source)?;
        let dir = self.detector_centroid() - r;
        let n = dir.norm();
        if !(n > 0.0) {
            return Err(Error::Geometry(format!(
                "source {source} sits at the detector centroid"
            )));
        }
        Ok(dir * (self.wavenumber() / n))
    }

    fn source(&self, index: usize) -> Result<&Vector3<f64>> {
        self.sources.get(index).ok_or(Error::Index {
            index,
            len: self.sources.len(),
        })
    }

    fn detector(&self, index: usize) -> Result<&Vector3<f64>> {
        self.detectors.get(index).ok_or(Error::Index {
            index,
            len: self.detectors.len(),
        })
    }
}

fn max_pairwise(points: &[Vector3<f64>]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

/// u_bs at t = 0.
pub fn propagation_amplitude(
    geometry: &Geometry,
    detector: usize,
    source: usize,
    mode: PropagationMode,
) -> Result<Complex64> {
    let rb = geometry.detector(detector)?;
    let rs = geometry.source(source)?;
    let dist = (rb - rs).norm();
    if !(dist > 0.0) {
        return Err(Error::Geometry(format!(
            "detector {detector} and source {source} coincide"
        )));
    }
    let k = geometry.wavenumber();
    let l = geometry.distance();
    let amp = match mode {
        PropagationMode::FarField => Complex64::from_polar(1.0 / l, k * dist),
        PropagationMode::Exact => Complex64::from_polar(1.0 / dist, k * dist),
        PropagationMode::Linearized => {
            let c = geometry.detector_centroid();
            // The source-to-centroid phase is large (~kl) and common to every
            // detector; keeping it as a separate factor stops its rounding
            // from leaking into the small detector-dependent part.
            let common = Complex64::from_polar(1.0 / l, k * (c - rs).norm());
            common * Complex64::from_polar(1.0, geometry.wavevector(source)?.dot(&(rb - c)))
        }
    };
    Ok(amp)
}

/// u_bs including the e^{−iωt} time factor.
pub fn propagation_amplitude_at(
    geometry: &Geometry,
    detector: usize,
    source: usize,
    mode: PropagationMode,
    time: f64,
) -> Result<Complex64> {
    let u = propagation_amplitude(geometry, detector, source, mode)?;
    Ok(u * Complex64::from_polar(1.0, -geometry.angular_frequency() * time))
}

/// The dynamical fringe phase d_D·(k₂ − k₁) with d_D = r₃ − r₄ (detector 0
/// minus detector 1) and k_i the far-field wavevectors of sources 0 and 1.
pub fn propagation_phase(geometry: &Geometry) -> Result<f64> {
    require_two_by_two(geometry)?;
    let d = geometry.detectors[0] - geometry.detectors[1];
    Ok(d.dot(&(geometry.wavevector(1)? - geometry.wavevector(0)?)))
}

/// Half the solid angle of the circuit R → linear(φ₃) → L → linear(φ₄) on
/// the Poincaré sphere, for φ₃ − φ₄ = `phi34`. Reported in (−π, π].
pub fn lune_half_angle(phi34: f64) -> f64 {
    let pts = [
        poincare_of(&circular_state(Handedness::Right)),
        poincare_of(&linear_state(phi34)),
        poincare_of(&circular_state(Handedness::Left)),
        poincare_of(&linear_state(0.0)),
    ];
    // Linear states never sit at the poles, so no edge is antipodal.
    let omega = geodesic_polygon_solid_angle(&pts).expect("lune edges are never antipodal");
    crate::polarization::wrap(0.5 * omega, 2.0 * PI)
}

/// 3/2 + 1/2·cos(propagation + Ω/2).
pub fn coincidence_from_phases(propagation: f64, half_omega: f64) -> f64 {
    1.5 + 0.5 * (propagation + half_omega).cos()
}

/// Closed-form coincidence for right/left circular sources and linear
/// detector analysers whose axes differ by `phi34`.
pub fn closed_form_coincidence(geometry: &Geometry, phi34: f64) -> Result<f64> {
    require_two_by_two(geometry)?;
    geometry.check_far_field()?;
    Ok(coincidence_from_phases(
        propagation_phase(geometry)?,
        lune_half_angle(phi34),
    ))
}

fn require_two_by_two(geometry: &Geometry) -> Result<()> {
    if geometry.sources.len() != 2 || geometry.detectors.len() != 2 {
        return Err(Error::Geometry(format!(
            "closed form needs 2 sources and 2 detectors, got {} and {}",
            geometry.sources.len(),
            geometry.detectors.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LAMBDA: f64 = 500e-9;

    #[test]
    fn rejects_bad_geometry() {
        assert!(Geometry::two_by_two(1e-3, 1e-3, 1.0, 0.0).is_err());
        assert!(Geometry::two_by_two(1e-3, 1e-3, -1.0, LAMBDA).is_err());
        let p = Vector3::new(0.0, 0.0, 0.0);
        assert!(Geometry::new(vec![p], vec![p], LAMBDA, 1.0).is_err());
    }

    #[test]
    fn full_wave_is_real() {
        let g = Geometry::new(
            vec![Vector3::zeros()],
            vec![Vector3::new(0.0, 0.0, LAMBDA)],
            LAMBDA,
            LAMBDA,
        )
        .unwrap();
        for mode in [PropagationMode::FarField, PropagationMode::Linearized] {
            let u = propagation_amplitude(&g, 0, 0, mode).unwrap();
            assert!((u - Complex64::new(1.0 / LAMBDA, 0.0)).norm() < 1e-9 / LAMBDA);
        }
    }

    #[test]
    fn exact_mode_two_wavelengths() {
        let g = Geometry::new(
            vec![Vector3::zeros()],
            vec![Vector3::new(0.0, 2.0 * LAMBDA, 0.0)],
            LAMBDA,
            1.0,
        )
        .unwrap();
        let u = propagation_amplitude(&g, 0, 0, PropagationMode::Exact).unwrap();
        assert!((u.norm() - 1.0 / (2.0 * LAMBDA)).abs() < 1e-6);
        assert!(crate::polarization::wrap(u.arg(), 2.0 * PI).abs() < 1e-9);
        assert!(propagation_amplitude(&g, 1, 0, PropagationMode::Exact).is_err());
    }

    #[test]
    fn far_field_modulus_is_one_over_l() {
        let g = Geometry::two_by_two(2e-3, 1e-3, 3.0, LAMBDA).unwrap();
        for b in 0..2 {
            for s in 0..2 {
                for mode in [PropagationMode::FarField, PropagationMode::Linearized] {
                    let u = propagation_amplitude(&g, b, s, mode).unwrap();
                    assert!((u.norm() - 1.0 / 3.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn far_field_check() {
        let g = Geometry::two_by_two(1e-2, 1e-2, 0.5, LAMBDA).unwrap();
        assert!(matches!(
            g.check_far_field(),
            Err(Error::NotFarField { .. })
        ));
        assert!(closed_form_coincidence(&g, 0.0).is_err());
        assert!(g.with_far_field_ratio(10.0).is_far_field());
    }

    #[test]
    fn closed_form_landmarks() {
        // Coincident detectors give zero baseline phase.
        let g = Geometry::two_by_two(1e-3, 0.0, 1.0, LAMBDA).unwrap();
        assert_eq!(propagation_phase(&g).unwrap(), 0.0);
        assert!((closed_form_coincidence(&g, 0.0).unwrap() - 2.0).abs() < 1e-9);
        // Ω/2 = 2φ₃₄.
        assert!((closed_form_coincidence(&g, PI / 2.0).unwrap() - 1.0).abs() < 1e-9);
        assert!((closed_form_coincidence(&g, PI / 4.0).unwrap() - 1.5).abs() < 1e-9);
        assert!((coincidence_from_phases(0.0, PI) - 1.0).abs() < 1e-15);
        assert!((coincidence_from_phases(0.0, PI / 2.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn lune_half_angle_is_twice_phi34() {
        for k in 0..50 {
            let phi = -3.0 + 0.12 * k as f64;
            let d = crate::polarization::wrap(lune_half_angle(phi) - 2.0 * phi, 2.0 * PI);
            assert!(d.abs() < 1e-9, "phi {phi}");
        }
    }

    #[test]
    fn propagation_phase_small_angle() {
        // Leading order: k d_S d_D / l.
        let (ds, dd, l) = (1e-3, 2e-3, 5.0);
        let g = Geometry::two_by_two(ds, dd, l, LAMBDA).unwrap();
        let want = 2.0 * PI / LAMBDA * ds * dd / l;
        assert!((propagation_phase(&g).unwrap() - want).abs() < want * 1e-6);
    }

    #[test]
    fn time_factor_is_global() {
        let g = Geometry::two_by_two(1e-3, 1e-3, 1.0, LAMBDA).unwrap();
        let t = 1.234e-15;
        let a = propagation_amplitude_at(&g, 0, 1, PropagationMode::Exact, t).unwrap();
        let b = propagation_amplitude(&g, 0, 1, PropagationMode::Exact).unwrap();
        assert!((a.norm() - b.norm()).abs() < 1e-12);
        let expected =
            crate::polarization::wrap(b.arg() - g.angular_frequency() * t - a.arg(), 2.0 * PI);
        assert!(expected.abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn closed_form_is_bounded_and_pi_periodic(
            phi in -10.0..10.0f64,
            dd in 1e-5..1e-2f64,
            ds in 1e-5..1e-2f64,
        ) {
            let g = Geometry::two_by_two(ds, dd, 2.0, LAMBDA).unwrap();
            let c = closed_form_coincidence(&g, phi).unwrap();
            prop_assert!((1.0..=2.0).contains(&c));
            let c2 = closed_form_coincidence(&g, phi + PI).unwrap();
            prop_assert!((c - c2).abs() < 1e-9);
        }

        #[test]
        fn geometric_part_is_achromatic(
            phi in -3.0..3.0f64,
            dd in 1e-5..1e-3f64,
        ) {
            let g = Geometry::two_by_two(1e-3, dd, 1.0, LAMBDA).unwrap();
            let g2 = g.with_wavelength(2.0 * LAMBDA).unwrap();
            let (p1, p2) = (propagation_phase(&g).unwrap(), propagation_phase(&g2).unwrap());
            prop_assert!((p1 - 2.0 * p2).abs() < 1e-9 * p1.abs().max(1.0));
            // lune_half_angle has no wavelength input; the fringe phase shift
            // under λ → 2λ is the propagation change alone.
            let h = lune_half_angle(phi);
            let shift = (p2 + h) - (p1 + h);
            prop_assert!((shift - (p2 - p1)).abs() < 1e-12);
        }
    }
}
