//! Jones vectors, analyser projectors and Poincaré-sphere geometry.
//!
//! Conventions used everywhere in this crate:
//!
//! - Jones vectors are written in the {horizontal, vertical} basis.
//! - Right circular is `(1, -i)/√2`, left circular is `(1, +i)/√2`.
//! - The Stokes map uses the Pauli basis `(σz, -σx, -σy)`: horizontal light
//!   sits at `(1, 0, 0)`, right circular at the north pole `(0, 0, 1)`, and
//!   linear light at angle θ on the equator at azimuth `-2θ`. This basis is a
//!   proper rotation of the usual `(σz, σx, σy)` ordering, so the Bargmann
//!   phase of a closed circuit equals `+Ω/2` with Ω taken by the right-hand
//!   rule (counter-clockwise seen from outside is positive).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::{Error, Result};

const NORM_TOL: f64 = 1e-12;
/// Squared overlaps below this are treated as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handedness {
    Right,
    Left,
}

/// A pure polarization state (normalized Jones vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    components: [Complex64; 2],
}

impl PolarizationState {
    /// Builds a state from an already normalized pair of amplitudes.
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let n2 = h.norm_sqr() + v.norm_sqr();
        if !((n2 - 1.0).abs() <= NORM_TOL) {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { components: [h, v] })
    }

    /// Normalizes an arbitrary nonzero pair.
    pub fn normalized(h: Complex64, v: Complex64) -> Result<Self> {
        let n = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(Self {
            components: [h / n, v / n],
        })
    }

    /// Inverse of [`poincare_of`], up to global phase.
    pub fn from_poincare(p: &PoincarePoint) -> Self {
        // h = cos(a), v = sin(a) e^{iδ} gives s1 = cos(2a),
        // s2 = -sin(2a) cos δ, s3 = -sin(2a) sin δ.
        let a = 0.5 * p.s1.clamp(-1.0, 1.0).acos();
        let delta = (-p.s3).atan2(-p.s2);
        Self {
            components: [c(a.cos()), Complex64::from_polar(a.sin(), delta)],
        }
    }

    pub fn components(&self) -> [Complex64; 2] {
        self.components
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.components[0].conj() * other.components[0]
            + self.components[1].conj() * other.components[1]
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let g = Complex64::from_polar(1.0, phase);
        Self {
            components: [self.components[0] * g, self.components[1] * g],
        }
    }
}

/// Linear polarization at `angle` radians from horizontal.
pub fn linear_state(angle: f64) -> PolarizationState {
    PolarizationState {
        components: [c(angle.cos()), c(angle.sin())],
    }
}

pub fn circular_state(handedness: Handedness) -> PolarizationState {
    let v = match handedness {
        Handedness::Right => -I,
        Handedness::Left => I,
    };
    PolarizationState {
        components: [c(FRAC_1_SQRT_2), v * FRAC_1_SQRT_2],
    }
}

/// An ideal analyser: a Hermitian idempotent 2×2 matrix.
///
/// Rank-1 projectors select one polarization state. The identity analyser
/// (rank 2) models an unpolarised detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projector {
    matrix: Matrix2<Complex64>,
    rank: u8,
}

impl Projector {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix2::identity(),
            rank: 2,
        }
    }

    /// Validates a user-supplied matrix as a rank-1 or rank-2 projector.
    pub fn from_matrix(matrix: Matrix2<Complex64>) -> Result<Self> {
        let herm = (matrix - matrix.adjoint()).camax();
        let idem = (matrix * matrix - matrix).camax();
        if herm > NORM_TOL || idem > NORM_TOL {
            return Err(Error::Setup(format!(
                "not a projector (hermiticity residual {herm:e}, idempotence residual {idem:e})"
            )));
        }
        let tr = matrix.trace().re;
        let rank = tr.round();
        if (tr - rank).abs() > NORM_TOL || !(1.0..=2.0).contains(&rank) {
            return Err(Error::Setup(format!("projector trace {tr} is not 1 or 2")));
        }
        Ok(Self {
            matrix,
            rank: rank as u8,
        })
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.matrix
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn is_identity(&self) -> bool {
        self.rank == 2
    }

    /// Tr(P Q); for rank-1 projectors this is |⟨p|q⟩|².
    pub fn overlap(&self, other: &Projector) -> f64 {
        (self.matrix * other.matrix).trace().re
    }
}

/// P = |ψ⟩⟨ψ|.
pub fn projector_of(state: &PolarizationState) -> Projector {
    let [h, v] = state.components;
    Projector {
        matrix: Matrix2::new(h * h.conj(), h * v.conj(), v * h.conj(), v * v.conj()),
        rank: 1,
    }
}

/// A point on the unit Poincaré sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincarePoint {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl PoincarePoint {
    /// Normalizes `(s1, s2, s3)` onto the sphere.
    pub fn new(s1: f64, s2: f64, s3: f64) -> Result<Self> {
        let n = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Geometry(format!(
                "Stokes vector ({s1}, {s2}, {s3}) cannot be normalized"
            )));
        }
        Ok(Self {
            s1: s1 / n,
            s2: s2 / n,
            s3: s3 / n,
        })
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.s1, self.s2, self.s3)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.as_vector().dot(&other.as_vector())
    }
}

pub fn poincare_of(state: &PolarizationState) -> PoincarePoint {
    let [h, v] = state.components;
    let hv = h.conj() * v;
    PoincarePoint {
        s1: h.norm_sqr() - v.norm_sqr(),
        s2: -2.0 * hv.re,
        s3: -2.0 * hv.im,
    }
}

/// Result of a closed projection circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PancharatnamTrace {
    pub value: Complex64,
    /// Set when some pair of consecutive states is orthogonal; `value` is
    /// then exactly zero and carries no phase.
    pub degenerate: bool,
    /// First offending pair, when degenerate.
    pub orthogonal_pair: Option<(usize, usize)>,
}

impl PancharatnamTrace {
    /// The Pancharatnam phase Ω/2, in (-π, π].
    pub fn phase(&self) -> Result<f64> {
        match self.orthogonal_pair {
            Some((a, b)) => Err(Error::OrthogonalNeighbors(a, b)),
            None => Ok(self.value.arg()),
        }
    }

    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }
}

/// Tr[P₁ P₂ ⋯ Pₙ P₁] for a closed circuit of analysers.
pub fn pancharatnam_trace(projectors: &[Projector]) -> Result<PancharatnamTrace> {
    let n = projectors.len();
    if n < 2 {
        return Err(Error::TooFew { needed: 2, got: n });
    }
    for k in 0..n {
        let next = (k + 1) % n;
        if projectors[k].overlap(&projectors[next]) < ORTHOGONAL_TOL {
            return Ok(PancharatnamTrace {
                value: Complex64::new(0.0, 0.0),
                degenerate: true,
                orthogonal_pair: Some((k, next)),
            });
        }
    }
    let mut product = *projectors[0].matrix();
    for p in &projectors[1..] {
        product *= p.matrix();
    }
    product *= projectors[0].matrix();
    Ok(PancharatnamTrace {
        value: product.trace(),
        degenerate: false,
        orthogonal_pair: None,
    })
}

/// Signed solid angle of the geodesic triangle (a, b, c).
///
/// Positive when the vertices run counter-clockwise seen from outside the
/// sphere. Returns a value in (-2π, 2π).
pub fn triangle_solid_angle(a: &PoincarePoint, b: &PoincarePoint, c: &PoincarePoint) -> f64 {
    let (a, b, c) = (a.as_vector(), b.as_vector(), c.as_vector());
    let num = a.dot(&b.cross(&c));
    let den = 1.0 + a.dot(&b) + b.dot(&c) + c.dot(&a);
    if num == 0.0 && den <= 0.0 {
        // Two antipodal vertices with the third on the connecting great
        // circle; the "triangle" is a degenerate geodesic.
        return 0.0;
    }
    2.0 * num.atan2(den)
}

/// Wraps an angle into (-period/2, period/2].
pub fn wrap(angle: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    let mut r = angle.rem_euclid(period);
    if r > half {
        r -= period;
    }
    r
}

fn fan_apex(vertices: &[PoincarePoint]) -> Vector3<f64> {
    let mut candidates: Vec<Vector3<f64>> = Vec::with_capacity(15);
    let sum: Vector3<f64> = vertices.iter().map(|v| v.as_vector()).sum();
    if sum.norm() > 1e-6 {
        candidates.push(sum.normalize());
    }
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut e = Vector3::zeros();
            e[axis] = sign;
            candidates.push(e);
        }
    }
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                candidates.push(Vector3::new(sx, sy, sz).normalize());
            }
        }
    }
    // Stay as far as possible from every antipode.
    candidates
        .into_iter()
        .map(|cand| {
            let clearance = vertices
                .iter()
                .map(|v| 1.0 + cand.dot(&v.as_vector()))
                .fold(f64::INFINITY, f64::min);
            (clearance, cand)
        })
        .fold((f64::NEG_INFINITY, Vector3::z()), |best, cur| {
            if cur.0 > best.0 {
                cur
            } else {
                best
            }
        })
        .1
}

/// Signed solid angle of the closed geodesic polygon through `vertices`.
///
/// A two-vertex (back-and-forth) path is accepted and encloses nothing. The
/// polygon is fanned into triangles from an auxiliary apex chosen away
/// from all antipodes; the sum is reported in (-2π, 2π] and is meaningful
/// modulo 4π.
pub fn geodesic_polygon_solid_angle(vertices: &[PoincarePoint]) -> Result<f64> {
    let n = vertices.len();
    if n < 2 {
        return Err(Error::TooFew { needed: 2, got: n });
    }
    for k in 0..n {
        let next = (k + 1) % n;
        if vertices[k].dot(&vertices[next]) < -1.0 + 1e-12 {
            return Err(Error::AntipodalVertices(k, next));
        }
    }
    let apex = fan_apex(vertices);
    let apex = PoincarePoint {
        s1: apex[0],
        s2: apex[1],
        s3: apex[2],
    };
    let total: f64 = (0..n)
        .map(|k| triangle_solid_angle(&apex, &vertices[k], &vertices[(k + 1) % n]))
        .sum();
    Ok(wrap(total, 4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn linear_basis_states() {
        let h = linear_state(0.0).components();
        assert!(close(h[0], c(1.0)) && close(h[1], c(0.0)));
        let v = linear_state(FRAC_PI_2).components();
        assert!(close(v[0], c(0.0)) && close(v[1], c(1.0)));
        let d = linear_state(FRAC_PI_4).components();
        assert!(close(d[0], c(FRAC_1_SQRT_2)) && close(d[1], c(FRAC_1_SQRT_2)));
    }

    #[test]
    fn circular_states_follow_convention() {
        let r = circular_state(Handedness::Right).components();
        let l = circular_state(Handedness::Left).components();
        assert!(close(r[1], Complex64::new(0.0, -FRAC_1_SQRT_2)));
        assert!(close(l[1], Complex64::new(0.0, FRAC_1_SQRT_2)));
        let ip = circular_state(Handedness::Right).inner(&circular_state(Handedness::Left));
        assert!(ip.norm() < 1e-15);
    }

    #[test]
    fn projector_examples() {
        let p = projector_of(&linear_state(0.0));
        assert_eq!(*p.matrix(), Matrix2::new(c(1.0), c(0.0), c(0.0), c(0.0)));
        let p = projector_of(&linear_state(FRAC_PI_4));
        assert!((p.matrix() - Matrix2::from_element(c(0.5))).camax() < 1e-15);
        let p = projector_of(&circular_state(Handedness::Right));
        let want = Matrix2::new(c(0.5), 0.5 * I, -0.5 * I, c(0.5));
        assert!((p.matrix() - want).camax() < 1e-15);
    }

    #[test]
    fn from_matrix_rejects_non_projectors() {
        let m = Matrix2::new(c(1.0), c(1.0), c(0.0), c(0.0));
        assert!(Projector::from_matrix(m).is_err());
        let ok = Projector::from_matrix(*projector_of(&linear_state(0.3)).matrix()).unwrap();
        assert_eq!(ok.rank(), 1);
        assert!(Projector::from_matrix(Matrix2::identity())
            .unwrap()
            .is_identity());
    }

    #[test]
    fn poincare_poles_and_equator() {
        let r = poincare_of(&circular_state(Handedness::Right));
        assert!((r.s3 - 1.0).abs() < 1e-15 && r.s1.abs() < 1e-15 && r.s2.abs() < 1e-15);
        let l = poincare_of(&circular_state(Handedness::Left));
        assert!((l.s3 + 1.0).abs() < 1e-15);
        let h = poincare_of(&linear_state(0.0));
        assert_eq!((h.s1, h.s2, h.s3), (1.0, 0.0, 0.0));
        // Explicit Stokes computation for a linear state: the polar angle
        // doubles and the azimuth runs clockwise in this basis.
        for k in 0..32 {
            let theta = -1.5 + 0.1 * k as f64;
            let p = poincare_of(&linear_state(theta));
            let (cth, sth) = (theta.cos(), theta.sin());
            assert!((p.s1 - (cth * cth - sth * sth)).abs() < 1e-14);
            assert!((p.s2 + 2.0 * cth * sth).abs() < 1e-14);
            assert!(p.s3.abs() < 1e-15);
            assert!(wrap(p.s2.atan2(p.s1) + 2.0 * theta, 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn pancharatnam_lune_examples() {
        let pr = projector_of(&circular_state(Handedness::Right));
        let pl = projector_of(&circular_state(Handedness::Left));
        let t = pancharatnam_trace(&[
            pr,
            projector_of(&linear_state(0.0)),
            pl,
            projector_of(&linear_state(0.0)),
        ])
        .unwrap();
        assert!(close(t.value, c(0.25)));
        // Brute-force overlap product over a grid.
        let r = circular_state(Handedness::Right);
        let l = circular_state(Handedness::Left);
        for i in 0..15 {
            for j in 0..15 {
                let (p3, p4) = (0.21 * i as f64 - 1.4, 0.19 * j as f64 - 1.3);
                let (s3, s4) = (linear_state(p3), linear_state(p4));
                let brute = r.inner(&s3) * s3.inner(&l) * l.inner(&s4) * s4.inner(&r);
                let t =
                    pancharatnam_trace(&[pr, projector_of(&s3), pl, projector_of(&s4)]).unwrap();
                assert!(close(t.value, brute));
                assert!((t.modulus() - 0.25).abs() < 1e-12);
                let d = wrap(t.phase().unwrap() - 2.0 * (p3 - p4), 2.0 * PI);
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthogonal_neighbors_flag_degenerate() {
        let h = projector_of(&linear_state(0.0));
        let v = projector_of(&linear_state(FRAC_PI_2));
        let d = projector_of(&linear_state(FRAC_PI_4));
        let t = pancharatnam_trace(&[h, v, d]).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.value, Complex64::new(0.0, 0.0));
        assert_eq!(t.phase(), Err(Error::OrthogonalNeighbors(0, 1)));
        assert!(pancharatnam_trace(&[h]).is_err());
    }

    #[test]
    fn solid_angle_examples() {
        let x = PoincarePoint::new(1.0, 0.0, 0.0).unwrap();
        let y = PoincarePoint::new(0.0, 1.0, 0.0).unwrap();
        let z = PoincarePoint::new(0.0, 0.0, 1.0).unwrap();
        let octant = geodesic_polygon_solid_angle(&[x, y, z]).unwrap();
        assert!((octant - FRAC_PI_2).abs() < 1e-12);
        let rev = geodesic_polygon_solid_angle(&[z, y, x]).unwrap();
        assert!((rev + FRAC_PI_2).abs() < 1e-12);
        assert_eq!(geodesic_polygon_solid_angle(&[x, x, y]).unwrap(), 0.0);
        let minus_x = PoincarePoint::new(-1.0, 0.0, 0.0).unwrap();
        assert_eq!(
            geodesic_polygon_solid_angle(&[x, minus_x, y]),
            Err(Error::AntipodalVertices(0, 1))
        );
    }

    #[test]
    fn lune_solid_angle_is_twice_the_trace_phase() {
        let r = circular_state(Handedness::Right);
        let l = circular_state(Handedness::Left);
        for k in 0..40 {
            let phi34 = -1.5 + 0.075 * k as f64;
            let (s3, s4) = (linear_state(phi34 + 0.2), linear_state(0.2));
            let pts = [r, s3, l, s4].map(|s| poincare_of(&s));
            let omega = geodesic_polygon_solid_angle(&pts).unwrap();
            assert!(
                wrap(omega - 4.0 * phi34, 4.0 * PI).abs() < 1e-9,
                "phi34 {phi34}"
            );
        }
    }

    fn state_strategy() -> impl Strategy<Value = PolarizationState> {
        (0.0..PI, -PI..PI, -PI..PI).prop_map(|(a, d, g)| {
            PolarizationState::new(
                Complex64::from_polar((a / 2.0).cos(), g),
                Complex64::from_polar((a / 2.0).sin(), g + d),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn projector_invariants(s in state_strategy(), g in -PI..PI) {
            let p = projector_of(&s);
            let m = p.matrix();
            prop_assert!((m - m.adjoint()).camax() < 1e-12);
            prop_assert!((m * m - m).camax() < 1e-12);
            prop_assert!((m.trace() - c(1.0)).norm() < 1e-12);
            let q = projector_of(&s.with_global_phase(g));
            prop_assert!((q.matrix() - m).camax() < 1e-12);
        }

        #[test]
        fn linear_projector_is_pi_periodic(theta in -10.0..10.0f64) {
            let a = projector_of(&linear_state(theta));
            let b = projector_of(&linear_state(theta + PI));
            prop_assert!((a.matrix() - b.matrix()).camax() < 1e-12);
            let (pa, pb) = (poincare_of(&linear_state(theta)), poincare_of(&linear_state(theta + PI)));
            prop_assert!((pa.as_vector() - pb.as_vector()).norm() < 1e-12);
        }

        #[test]
        fn poincare_round_trip(s in state_strategy()) {
            let p = poincare_of(&s);
            prop_assert!((p.as_vector().norm() - 1.0).abs() < 1e-12);
            let back = PolarizationState::from_poincare(&p);
            prop_assert!((s.inner(&back).norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn orthogonal_states_are_antipodal(s in state_strategy()) {
            let [h, v] = s.components();
            let o = PolarizationState::new(-v.conj(), h.conj()).unwrap();
            prop_assert!(s.inner(&o).norm() < 1e-12);
            prop_assert!((poincare_of(&s).as_vector() + poincare_of(&o).as_vector()).norm() < 1e-12);
        }

        #[test]
        fn trace_phase_matches_solid_angle(states in prop::collection::vec(state_strategy(), 3..7)) {
            let projs: Vec<_> = states.iter().map(projector_of).collect();
            let pts: Vec<_> = states.iter().map(poincare_of).collect();
            let n = states.len();
            let ok = (0..n).all(|k| projs[k].overlap(&projs[(k + 1) % n]) > 1e-6);
            prop_assume!(ok);
            let t = pancharatnam_trace(&projs).unwrap();
            let omega = geodesic_polygon_solid_angle(&pts).unwrap();
            prop_assert!(wrap(2.0 * t.phase().unwrap() - omega, 4.0 * PI).abs() < 1e-9);
            let overlaps: f64 = (0..n).map(|k| projs[k].overlap(&projs[(k + 1) % n]).sqrt()).product();
            prop_assert!((t.modulus() - overlaps).abs() < 1e-12);
        }

        #[test]
        fn trace_is_cyclic(states in prop::collection::vec(state_strategy(), 2..6), shift in 0usize..6) {
            let projs: Vec<_> = states.iter().map(projector_of).collect();
            let mut rotated = projs.clone();
            rotated.rotate_left(shift % projs.len());
            let a = pancharatnam_trace(&projs).unwrap();
            let b = pancharatnam_trace(&rotated).unwrap();
            prop_assert!((a.value - b.value).norm() < 1e-12);
        }

        #[test]
        fn solid_angle_reverses_with_orientation(states in prop::collection::vec(state_strategy(), 3..6)) {
            let pts: Vec<_> = states.iter().map(poincare_of).collect();
            let n = pts.len();
            prop_assume!((0..n).all(|k| pts[k].dot(&pts[(k + 1) % n]) > -1.0 + 1e-6));
            let fwd = geodesic_polygon_solid_angle(&pts).unwrap();
            let mut rev = pts.clone();
            rev.reverse();
            let back = geodesic_polygon_solid_angle(&rev).unwrap();
            prop_assert!(wrap(fwd + back, 4.0 * PI).abs() < 1e-9);
        }

        #[test]
        fn back_and_forth_path_encloses_nothing(a in state_strategy(), b in state_strategy()) {
            let (pa, pb) = (poincare_of(&a), poincare_of(&b));
            prop_assume!(pa.dot(&pb) > -1.0 + 1e-6);
            let omega = geodesic_polygon_solid_angle(&[pa, pb]).unwrap();
            prop_assert!(wrap(omega, 4.0 * PI).abs() < 1e-12);
            let omega = geodesic_polygon_solid_angle(&[pa, pb, pa, pb]).unwrap();
            prop_assert!(wrap(omega, 4.0 * PI).abs() < 1e-12);
        }
    }
}
