//! Orbital entanglement generated by two-photon exchange.
//!
//! Two photons prepared in orbital states |φ⟩ and |ψ⟩ (superpositions of a
//! short and a long delay-line path) reach detectors 3 and 4 either directly
//! or exchanged. The output `φ⊗ψ + e^{iΩ/2} ψ⊗φ` is entangled whenever φ and
//! ψ differ, and its entanglement is tuned by the geometric phase.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const ZERO_NORM: f64 = 1e-10;

/// α|S⟩ + β|L⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalState {
    amplitudes: [Complex64; 2],
}

impl OrbitalState {
    pub fn new(short: Complex64, long: Complex64) -> Result<Self> {
        let n2 = short.norm_sqr() + long.norm_sqr();
        if !((n2 - 1.0).abs() <= NORM_TOL) {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self {
            amplitudes: [short, long],
        })
    }

    pub fn normalized(short: Complex64, long: Complex64) -> Result<Self> {
        let n = (short.norm_sqr() + long.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(Self {
            amplitudes: [short / n, long / n],
        })
    }

    pub fn short() -> Self {
        Self {
            amplitudes: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    pub fn long() -> Self {
        Self {
            amplitudes: [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes[0].conj() * other.amplitudes[0]
            + self.amplitudes[1].conj() * other.amplitudes[1]
    }
}

/// Which detector's orbital degree of freedom is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Three,
    Four,
}

/// Normalized state on {SS, SL, LS, LL}; the first label is detector 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonOrbitalState {
    amplitudes: [Complex64; 4],
}

impl TwoPhotonOrbitalState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let n2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !((n2 - 1.0).abs() <= NORM_TOL) {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: [Complex64; 4]) -> Result<Self> {
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(n > ZERO_NORM && n.is_finite()) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            amplitudes: amplitudes.map(|a| a / n),
        })
    }

    pub fn product(a: &OrbitalState, b: &OrbitalState) -> Self {
        let (x, y) = (a.amplitudes, b.amplitudes);
        Self {
            amplitudes: [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]],
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.amplitudes
    }

    /// Amplitude as a 2×2 coefficient matrix c[i3][i4].
    fn coefficients(&self) -> [[Complex64; 2]; 2] {
        let a = self.amplitudes;
        [[a[0], a[1]], [a[2], a[3]]]
    }
}

/// Normalized φ⊗ψ + e^{iΩ/2} ψ⊗φ.
pub fn output_state(
    phi: &OrbitalState,
    psi: &OrbitalState,
    omega: f64,
) -> Result<TwoPhotonOrbitalState> {
    let direct = TwoPhotonOrbitalState::product(phi, psi).amplitudes;
    let exchange = TwoPhotonOrbitalState::product(psi, phi).amplitudes;
    let phase = Complex64::from_polar(1.0, 0.5 * omega);
    let mut amps = [Complex64::new(0.0, 0.0); 4];
    for k in 0..4 {
        amps[k] = direct[k] + phase * exchange[k];
    }
    TwoPhotonOrbitalState::normalized(amps)
}

/// 2×2 reduced density matrix of one detector's orbital state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensity {
    matrix: [[Complex64; 2]; 2],
    // |det C|² of the coefficient matrix; avoids cancellation in λ_min.
    det: f64,
}

impl ReducedDensity {
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix[0][0].re + self.matrix[1][1].re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.matrix[0][0].re;
        let d = self.matrix[1][1].re;
        let b = self.matrix[0][1];
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let hi = mean + r;
        if hi > 0.0 {
            [self.det / hi, hi]
        } else {
            [mean - r, hi]
        }
    }
}

pub fn reduced_density(state: &TwoPhotonOrbitalState, keep: Subsystem) -> ReducedDensity {
    let c = state.coefficients();
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = (0..2)
                .map(|k| match keep {
                    Subsystem::Three => c[i][k] * c[j][k].conj(),
                    Subsystem::Four => c[k][i] * c[k][j].conj(),
                })
                .sum();
        }
    }
    let det = (c[0][0] * c[1][1] - c[0][1] * c[1][0]).norm_sqr();
    ReducedDensity { matrix: m, det }
}

/// −Σ λ log₂ λ, in bits.
pub fn von_neumann_entropy(rho: &ReducedDensity) -> f64 {
    rho.eigenvalues()
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum()
}

/// Entropy of entanglement of a pure two-photon state.
pub fn entanglement_entropy(state: &TwoPhotonOrbitalState) -> f64 {
    von_neumann_entropy(&reduced_density(state, Subsystem::Three))
}

/// Entropy of the normalized exchange state from the input overlap alone.
///
/// With s = |⟨φ|ψ⟩|² the concurrence is (1 − s) / (1 + s·cos(Ω/2)), and the
/// Schmidt weights are (1 ± √(1 − C²)) / 2.
pub fn exchange_entropy(overlap_sq: f64, omega: f64) -> Result<f64> {
    if !(0.0..=1.0 + NORM_TOL).contains(&overlap_sq) {
        return Err(Error::NotNormalized(overlap_sq));
    }
    let s = overlap_sq.min(1.0);
    let den = 1.0 + s * (0.5 * omega).cos();
    if den <= ZERO_NORM {
        return Err(Error::ZeroNorm);
    }
    let conc = ((1.0 - s) / den).clamp(0.0, 1.0);
    let root = ((1.0 - conc) * (1.0 + conc)).sqrt();
    let hi = 0.5 * (1.0 + root);
    let lo = 0.25 * conc * conc / hi;
    Ok([lo, hi]
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum())
}

/// Correlation tensor T_ij = ⟨σ_i ⊗ σ_j⟩.
pub fn correlation_matrix(state: &TwoPhotonOrbitalState) -> Matrix3<f64> {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let paulis = [
        [[zero, one], [one, zero]],
        [[zero, -i], [i, zero]],
        [[one, zero], [zero, -one]],
    ];
    let c = state.coefficients();
    Matrix3::from_fn(|p, q| {
        let (sa, sb) = (&paulis[p], &paulis[q]);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        acc += c[a][b].conj() * sa[a][a2] * sb[b][b2] * c[a2][b2];
                    }
                }
            }
        }
        acc.re
    })
}

/// Maximal CHSH value over all local measurement settings,
/// 2·√(t₁² + t₂²) with t₁ ≥ t₂ the two largest singular values of the
/// correlation tensor.
pub fn chsh_max(state: &TwoPhotonOrbitalState) -> f64 {
    let mut sv: Vec<f64> = correlation_matrix(state)
        .singular_values()
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    2.0 * (sv[0] * sv[0] + sv[1] * sv[1]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn plus() -> OrbitalState {
        OrbitalState::new(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap()
    }

    #[test]
    fn identical_inputs_without_phase_give_product() {
        let phi = plus();
        let out = output_state(&phi, &phi, 0.0).unwrap();
        let prod = TwoPhotonOrbitalState::product(&phi, &phi);
        for k in 0..4 {
            assert!((out.amplitudes()[k] - prod.amplitudes()[k]).norm() < 1e-15);
        }
        assert!(entanglement_entropy(&out) < 1e-12);
    }

    #[test]
    fn destructive_exchange_is_an_error() {
        let phi = plus();
        assert_eq!(output_state(&phi, &phi, 2.0 * PI), Err(Error::ZeroNorm));
    }

    #[test]
    fn orthogonal_inputs() {
        for k in 0..16 {
            let omega = 0.8 * k as f64;
            let out = output_state(&OrbitalState::short(), &OrbitalState::long(), omega).unwrap();
            let a = out.amplitudes();
            let ph = Complex64::from_polar(FRAC_1_SQRT_2, 0.5 * omega);
            assert!(a[0].norm() < 1e-15 && a[3].norm() < 1e-15);
            assert!((a[1] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
            assert!((a[2] - ph).norm() < 1e-15);
            assert!((entanglement_entropy(&out) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn reduced_density_examples() {
        let prod = TwoPhotonOrbitalState::product(&plus(), &OrbitalState::short());
        let rho = reduced_density(&prod, Subsystem::Three);
        let ev = rho.eigenvalues();
        assert!(ev[0].abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
        assert_eq!(von_neumann_entropy(&rho), 0.0);

        let bell = TwoPhotonOrbitalState::new([c(0.0), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)])
            .unwrap();
        let rho = reduced_density(&bell, Subsystem::Four);
        assert!((rho.matrix()[0][0] - c(0.5)).norm() < 1e-15);
        assert!(rho.matrix()[0][1].norm() < 1e-15);
        assert!((von_neumann_entropy(&rho) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chsh_examples() {
        let prod = TwoPhotonOrbitalState::product(&plus(), &OrbitalState::long());
        assert!((chsh_max(&prod) - 2.0).abs() < 1e-12);
        let bell = TwoPhotonOrbitalState::new([c(0.0), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)])
            .unwrap();
        assert!((chsh_max(&bell) - 2.0 * SQRT_2).abs() < 1e-12);
        let out = output_state(&OrbitalState::short(), &plus(), 2.0 * PI).unwrap();
        assert!(chsh_max(&out) > 2.0);
    }

    #[test]
    fn entropy_depends_on_geometric_phase() {
        let (phi, psi) = (OrbitalState::short(), plus());
        assert!((phi.inner(&psi).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        let curve: Vec<f64> = (0..200)
            .map(|k| 4.0 * PI * k as f64 / 200.0)
            .map(|om| entanglement_entropy(&output_state(&phi, &psi, om).unwrap()))
            .collect();
        let (lo, hi) = curve
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        assert!(hi - lo > 0.05, "range {}", hi - lo);
        // Mirror symmetry about Ω = 2π.
        for k in 1..100 {
            assert!((curve[k] - curve[200 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn approaches_product_state_continuously() {
        let phi = OrbitalState::short();
        let mut last = f64::INFINITY;
        for k in 1..8 {
            let eps = 10f64.powi(-k);
            let psi = OrbitalState::normalized(c(1.0), c(eps)).unwrap();
            let s = entanglement_entropy(&output_state(&phi, &psi, eps).unwrap());
            assert!(s < last, "eps {eps}: {s} vs {last}");
            last = s;
        }
        assert!(last < 1e-9);
    }

    // Exact optimisation over Bob's settings for fixed Alice settings a, a':
    // max_{b,b'} = |Tᵀ(a + a')| + |Tᵀ(a − a')|.
    fn chsh_grid(state: &TwoPhotonOrbitalState) -> f64 {
        let t = correlation_matrix(state);
        let n = 120;
        let golden = PI * (3.0 - 5f64.sqrt());
        let dirs: Vec<nalgebra::Vector3<f64>> = (0..n)
            .map(|k| {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * k as f64;
                nalgebra::Vector3::new(r * th.cos(), r * th.sin(), z)
            })
            .collect();
        let mut best: f64 = 0.0;
        for a in &dirs {
            for a2 in &dirs {
                let v = (t.transpose() * (a + a2)).norm() + (t.transpose() * (a - a2)).norm();
                best = best.max(v);
            }
        }
        best
    }

    fn orbital() -> impl Strategy<Value = OrbitalState> {
        (0.0..PI, -PI..PI).prop_map(|(t, p)| {
            OrbitalState::new(
                c((t / 2.0).cos()),
                Complex64::from_polar((t / 2.0).sin(), p),
            )
            .unwrap()
        })
    }

    fn pure_state() -> impl Strategy<Value = TwoPhotonOrbitalState> {
        prop::array::uniform4((-1.0..1.0f64, -1.0..1.0f64)).prop_filter_map("zero", |v| {
            TwoPhotonOrbitalState::normalized(v.map(|(re, im)| Complex64::new(re, im))).ok()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn spectra_and_entropies_agree(s in pure_state()) {
            let (r3, r4) = (reduced_density(&s, Subsystem::Three), reduced_density(&s, Subsystem::Four));
            for rho in [r3, r4] {
                prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
                let m = rho.matrix();
                prop_assert!((m[0][1] - m[1][0].conj()).norm() < 1e-10);
                let ev = rho.eigenvalues();
                prop_assert!(ev[0] >= -1e-10 && ev[1] <= 1.0 + 1e-10);
            }
            let (e3, e4) = (r3.eigenvalues(), r4.eigenvalues());
            prop_assert!((e3[0] - e4[0]).abs() < 1e-12 && (e3[1] - e4[1]).abs() < 1e-12);
            prop_assert!((von_neumann_entropy(&r3) - von_neumann_entropy(&r4)).abs() < 1e-10);
        }

        #[test]
        fn chsh_violation_iff_entangled(s in pure_state()) {
            let e = entanglement_entropy(&s);
            let b = chsh_max(&s);
            prop_assert!(b <= 2.0 * SQRT_2 + 1e-12);
            prop_assert_eq!(b > 2.0, e > 1e-9);
        }

        #[test]
        fn closed_form_chsh_matches_setting_search(s in pure_state()) {
            let closed = chsh_max(&s);
            let grid = chsh_grid(&s);
            prop_assert!(grid <= closed + 1e-9);
            prop_assert!(grid >= closed - 0.05);
        }

        #[test]
        fn entropy_symmetries(phi in orbital(), psi in orbital(), omega in -10.0..10.0f64) {
            let out = output_state(&phi, &psi, omega);
            prop_assume!(out.is_ok());
            let e = entanglement_entropy(&out.unwrap());
            let neg = entanglement_entropy(&output_state(&phi, &psi, -omega).unwrap());
            let swapped = entanglement_entropy(&output_state(&psi, &phi, omega).unwrap());
            let shifted = entanglement_entropy(&output_state(&phi, &psi, omega + 4.0 * PI).unwrap());
            prop_assert!((e - neg).abs() < 1e-9);
            prop_assert!((e - swapped).abs() < 1e-9);
            prop_assert!((e - shifted).abs() < 1e-9);
        }

        #[test]
        fn entropy_matches_overlap_formula(phi in orbital(), psi in orbital(), omega in -10.0..10.0f64) {
            let out = output_state(&phi, &psi, omega);
            prop_assume!(out.is_ok());
            let direct = entanglement_entropy(&out.unwrap());
            let closed = exchange_entropy(phi.inner(&psi).norm_sqr(), omega).unwrap();
            prop_assert!((direct - closed).abs() < 1e-9, "{} vs {}", direct, closed);
        }

        #[test]
        fn swap_conjugates_the_exchange_phase(phi in orbital(), psi in orbital(), omega in -6.0..6.0f64) {
            // ψ⊗φ + e^{−iΩ/2}φ⊗ψ = e^{−iΩ/2}(φ⊗ψ + e^{iΩ/2}ψ⊗φ)
            let a = output_state(&phi, &psi, omega);
            prop_assume!(a.is_ok());
            let a = a.unwrap().amplitudes();
            let b = output_state(&psi, &phi, -omega).unwrap().amplitudes();
            let overlap: Complex64 = (0..4).map(|k| a[k].conj() * b[k]).sum();
            prop_assert!((overlap.norm() - 1.0).abs() < 1e-10);
        }
    }
}
