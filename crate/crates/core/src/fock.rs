//! Brute-force oracle: explicit truncated Fock space for the source modes.
//!
//! The thermal density matrix is diagonal in the number basis, so
//! `⟨A†A⟩ = Σ_n p(n) ‖A|n⟩‖²` with `A = Π a_{b α}` the product of detector
//! annihilators. Each `a_{bα}` is expanded over the source modes and applied
//! to sparse number-basis vectors. Nothing here touches the coherence matrix
//! or permanents.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::correlator::ExperimentSetup;
use crate::permanent::MAX_ORDER;
use crate::{Error, Result};

/// Default upper bound on the truncated Hilbert-space dimension.
pub const DEFAULT_MAX_DIMENSION: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMoment {
    pub value: f64,
    /// |value(n_max) − value(n_max − 1)|.
    pub truncation_error: f64,
}

pub fn fock_oracle_moment(
    setup: &ExperimentSetup,
    detectors: &[usize],
    n_max: usize,
) -> Result<OracleMoment> {
    fock_oracle_moment_with_cap(setup, detectors, n_max, DEFAULT_MAX_DIMENSION)
}

pub fn fock_oracle_moment_with_cap(
    setup: &ExperimentSetup,
    detectors: &[usize],
    n_max: usize,
    max_dimension: usize,
) -> Result<OracleMoment> {
    if n_max < 1 {
        return Err(Error::Setup("oracle truncation n_max must be >= 1".into()));
    }
    let modes = 2 * setup.num_sources();
    (n_max + 1)
        .checked_pow(modes as u32)
        .filter(|d| *d <= max_dimension)
        .ok_or(Error::Capacity {
            what: "Fock dimension",
            requested: (n_max + 1).saturating_pow(modes as u32),
            cap: max_dimension,
        })?;
    let value = truncated_moment(setup, detectors, n_max)?;
    let coarse = truncated_moment(setup, detectors, n_max - 1)?;
    Ok(OracleMoment {
        value,
        truncation_error: (value - coarse).abs(),
    })
}

fn geometric(x: f64, n_max: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..=n_max).map(|k| x.powi(k as i32)).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / z).collect()
}

fn mean_of(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}

/// Thermal distribution p_k ∝ e^{−βωk} on the truncated ladder k = 0..=n_max,
/// with β chosen so that the mean occupation is exactly `n`.
fn thermal_distribution(n: f64, n_max: usize) -> Result<Vec<f64>> {
    if n == 0.0 {
        let mut p = vec![0.0; n_max + 1];
        p[0] = 1.0;
        return Ok(p);
    }
    if n >= 0.5 * n_max as f64 {
        return Err(Error::Setup(format!(
            "occupation {n} too large for truncation n_max = {n_max}"
        )));
    }
    // The truncated mean is increasing in x = e^{−βω}; bisect on ln x.
    // Below half filling the root lies in x < 1.
    let (mut lo, mut hi) = ((n / (1.0 + n)).ln() - 1.0, 0.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_of(&geometric(mid.exp(), n_max)) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(geometric((0.5 * (lo + hi)).exp(), n_max))
}

type SparseState = HashMap<Vec<u8>, Complex64>;

fn annihilate(state: &SparseState, coeffs: &[(usize, Complex64)]) -> SparseState {
    let mut out = SparseState::with_capacity(state.len() * coeffs.len());
    for (occ, amp) in state {
        for &(mode, c) in coeffs {
            let n = occ[mode];
            if n == 0 {
                continue;
            }
            let mut next = occ.clone();
            next[mode] -= 1;
            *out.entry(next).or_default() += amp * c * (n as f64).sqrt();
        }
    }
    out
}

fn truncated_moment(setup: &ExperimentSetup, detectors: &[usize], n_max: usize) -> Result<f64> {
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
    let ns = setup.num_sources();
    let modes = 2 * ns;

    // a_{bα} = Σ_{s,γ} T_bs[α,γ] a_{sγ}, source mode index 2s + γ.
    let mut annihilators: Vec<[Vec<(usize, Complex64)>; 2]> = Vec::with_capacity(k);
    for &b in detectors {
        if b >= setup.num_detectors() {
            return Err(Error::Index {
                index: b,
                len: setup.num_detectors(),
            });
        }
        let mut per_pol: [Vec<(usize, Complex64)>; 2] = [Vec::new(), Vec::new()];
        for s in 0..ns {
            if setup.occupations()[s] == 0.0 {
                continue;
            }
            let t = setup.transfer(b, s)?;
            for (alpha, coeffs) in per_pol.iter_mut().enumerate() {
                for gamma in 0..2 {
                    let c = t[(alpha, gamma)];
                    if c.norm() > 0.0 {
                        coeffs.push((2 * s + gamma, c));
                    }
                }
            }
        }
        annihilators.push(per_pol);
    }

    let dists: Vec<Vec<f64>> = (0..modes)
        .map(|m| thermal_distribution(setup.occupations()[m / 2], n_max))
        .collect::<Result<_>>()?;
    // Modes that are certainly empty stay at zero in the enumeration.
    let ranges: Vec<usize> = dists
        .iter()
        .map(|d| {
            if d[1..].iter().all(|p| *p == 0.0) {
                0
            } else {
                n_max
            }
        })
        .collect();

    let mut occ = vec![0u8; modes];
    let mut total = 0.0;
    loop {
        let photons: usize = occ.iter().map(|&n| n as usize).sum();
        if photons >= k {
            let prob: f64 = occ
                .iter()
                .enumerate()
                .map(|(m, &n)| dists[m][n as usize])
                .product();
            if prob > 0.0 {
                for pol in 0u32..(1u32 << k) {
                    let mut state = SparseState::new();
                    state.insert(occ.clone(), Complex64::new(1.0, 0.0));
                    for (m, ann) in annihilators.iter().enumerate() {
                        state = annihilate(&state, &ann[((pol >> m) & 1) as usize]);
                        if state.is_empty() {
                            break;
                        }
                    }
                    let norm2: f64 = state.values().map(|a| a.norm_sqr()).sum();
                    total += prob * norm2;
                }
            }
        }
        // Mixed-radix increment.
        let mut m = 0;
        loop {
            if m == modes {
                return Ok(total);
            }
            if (occ[m] as usize) < ranges[m] {
                occ[m] += 1;
                break;
            }
            occ[m] = 0;
            m += 1;
        }
    }
}
