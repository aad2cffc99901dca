//! Superconducting-circuit numerics behind the collective gate: fluxonium
//! spectra and phase matrix elements, the second-order dispersive
//! quantities they feed, and the two-cavity balance trick.
//!
//! Energies are frequencies in GHz (h = 1). The circuit Hamiltonian is
//! H = 4 E_C N^2 - E_J cos(phi) + (E_L/2)(phi + 2 pi Phi_ext/Phi_0)^2,
//! diagonalized in the oscillator eigenbasis of its quadratic part.

use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::dense::{eigh_hermitian, CMat};
use crate::error::{Error, Result};

/// Circuit energies in GHz plus the external flux in units of the flux
/// quantum.
#[derive(Clone, Copy, Debug)]
pub struct FluxoniumParams {
    pub e_c: f64,
    pub e_j: f64,
    pub e_l: f64,
    /// Phi_ext / Phi_0.
    pub flux: f64,
}

impl FluxoniumParams {
    fn validate(&self) -> Result<()> {
        if !(self.e_c > 0.0) || !(self.e_l > 0.0) || !(self.e_j >= 0.0) {
            return Err(Error::InvalidArg(format!(
                "need E_C, E_L > 0 and E_J >= 0, got E_C={} E_J={} E_L={}",
                self.e_c, self.e_j, self.e_l
            )));
        }
        Ok(())
    }
}

/// Number of levels the reports work with.
pub const KEPT_LEVELS: usize = 8;

const CONVERGENCE_GHZ: f64 = 1e-6;
const DETUNING_FLOOR_GHZ: f64 = 1e-6;

/// Converged low-lying spectrum with the phase operator projected onto it.
#[derive(Clone, Debug)]
pub struct QuditSpectrum {
    /// Lowest levels, ascending, GHz.
    pub levels: Vec<f64>,
    /// phi_ll' over the kept levels; real because the Hamiltonian is a real
    /// symmetric matrix in the oscillator basis.
    pub phi: Array2<f64>,
    /// Basis size that met the doubling criterion.
    pub basis_size: usize,
    /// Largest level drift at the final doubling, GHz.
    pub convergence: f64,
}

/// Levels and kept-level phase matrix at one basis size.
fn solve_at(p: &FluxoniumParams, m: usize) -> Result<(Vec<f64>, Array2<f64>)> {
    let omega0 = (8.0 * p.e_c * p.e_l).sqrt();
    let phi_zpf = (2.0 * p.e_c / p.e_l).powf(0.25);
    let shift = 2.0 * PI * p.flux;
    let mut phi_op = CMat::zeros((m, m));
    for k in 0..m - 1 {
        let v = phi_zpf * ((k + 1) as f64).sqrt();
        phi_op[(k, k + 1)] = Complex64::new(v, 0.0);
        phi_op[(k + 1, k)] = Complex64::new(v, 0.0);
    }
    // cos(phi) from the spectral decomposition of the phi quadrature
    let (xs, q) = eigh_hermitian(&phi_op)?;
    let mut cos_diag = CMat::zeros((m, m));
    for (i, &x) in xs.iter().enumerate() {
        cos_diag[(i, i)] = Complex64::new(x.cos(), 0.0);
    }
    let cos_phi = q.dot(&cos_diag).dot(&crate::dense::dagger(&q));
    let mut h = CMat::zeros((m, m));
    for k in 0..m {
        h[(k, k)] = Complex64::new(omega0 * (k as f64 + 0.5) + 0.5 * p.e_l * shift * shift, 0.0);
    }
    h = h + &phi_op * Complex64::new(p.e_l * shift, 0.0)
        + &cos_phi * Complex64::new(-p.e_j, 0.0);
    let (vals, vecs) = eigh_hermitian(&h)?;
    let kept = KEPT_LEVELS.min(m);
    // pin each eigenvector's overall sign so matrix elements are reproducible
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(kept);
    for l in 0..kept {
        let mut col: Vec<Complex64> = (0..m).map(|r| vecs[(r, l)]).collect();
        let lead = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .unwrap();
        if col[lead].re < 0.0 {
            for c in col.iter_mut() {
                *c = -*c;
            }
        }
        cols.push(col);
    }
    let mut phi_mat = Array2::zeros((kept, kept));
    for a in 0..kept {
        for b in 0..kept {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..m - 1 {
                // tridiagonal phi: only nearest-neighbour ladder entries
                acc += cols[a][r].conj() * phi_op[(r, r + 1)] * cols[b][r + 1];
                acc += cols[a][r + 1].conj() * phi_op[(r + 1, r)] * cols[b][r];
            }
            debug_assert!(acc.im.abs() < 1e-9);
            phi_mat[(a, b)] = acc.re;
        }
    }
    Ok((vals[..kept].to_vec(), phi_mat))
}

/// Diagonalize the circuit starting from `basis_size` oscillator states,
/// doubling until the kept levels move by less than 1e-6 GHz (at most three
/// doublings before giving up).
pub fn diagonalize(p: &FluxoniumParams, basis_size: usize) -> Result<QuditSpectrum> {
    p.validate()?;
    if basis_size < 20 {
        return Err(Error::InvalidArg(format!("basis size {basis_size} below the minimum of 20")));
    }
    let mut m = basis_size;
    let (mut levels, _) = solve_at(p, m)?;
    let mut last_change = f64::INFINITY;
    for _ in 0..3 {
        let m2 = m * 2;
        let (levels2, phi2) = solve_at(p, m2)?;
        last_change = levels
            .iter()
            .zip(levels2.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        levels = levels2;
        m = m2;
        if last_change < CONVERGENCE_GHZ {
            return Ok(QuditSpectrum { levels, phi: phi2, basis_size: m, convergence: last_change });
        }
    }
    Err(Error::NotConverged { last_change })
}

/// Second-order Schrieffer-Wolff quantities for one qudit inductively
/// coupled to a cavity at frequency omega with strength g.
#[derive(Clone, Debug)]
pub struct DispersiveReport {
    /// Photon-number shift per level: chi_l = sum_{l'} g_ll'^2 (1/D_ll' - 1/D_l'l).
    pub chi: Vec<f64>,
    /// Lamb shift per level: kappa_l = sum_{l'} g_ll'^2 / D_ll'.
    pub lamb: Vec<f64>,
    /// Virtual-photon flip-flop strengths mu_ll'.
    pub flip_flop: Array2<f64>,
    /// D_ll' = eps_l - eps_l' - omega.
    pub detunings: Array2<f64>,
    /// QND strength sum_l (chi_0l - chi_1l) / 2.
    pub qnd_chi: f64,
}

pub fn dispersive_report(s: &QuditSpectrum, g: f64, omega: f64) -> Result<DispersiveReport> {
    let n = s.levels.len();
    let mut det = Array2::zeros((n, n));
    for l in 0..n {
        for lp in 0..n {
            det[(l, lp)] = s.levels[l] - s.levels[lp] - omega;
            if l != lp && det[(l, lp)].abs() < DETUNING_FLOOR_GHZ {
                return Err(Error::DegenerateDetuning { l_a: l, l_b: lp });
            }
        }
    }
    // the diagonal detuning D_ll = -omega also appears in the mu sum
    if omega.abs() < DETUNING_FLOOR_GHZ {
        return Err(Error::DegenerateDetuning { l_a: 0, l_b: 0 });
    }
    let gm = |l: usize, lp: usize| g * s.phi[(l, lp)];
    let chi_pair = |l: usize, lp: usize| -> f64 {
        if l == lp {
            return 0.0;
        }
        gm(l, lp).powi(2) * (1.0 / det[(l, lp)] - 1.0 / det[(lp, l)])
    };
    let mut chi = vec![0.0; n];
    let mut lamb = vec![0.0; n];
    for l in 0..n {
        for lp in 0..n {
            if lp == l {
                continue;
            }
            chi[l] += chi_pair(l, lp);
            lamb[l] += gm(l, lp).powi(2) / det[(l, lp)];
        }
    }
    let mut flip_flop = Array2::zeros((n, n));
    for l in 0..n {
        for lp in 0..n {
            if lp == l {
                continue;
            }
            let mut mu = 0.0;
            for lpp in 0..n {
                if lpp == l || lpp == lp {
                    continue;
                }
                mu += gm(l, lpp) * gm(lpp, lp) / 2.0
                    * (1.0 / det[(l, lp)] - 1.0 / det[(lpp, l)] + 1.0 / det[(lp, lpp)]
                        - 1.0 / det[(lpp, lp)]);
            }
            flip_flop[(l, lp)] = mu;
        }
    }
    let qnd_chi: f64 = (0..n).map(|l| (chi_pair(0, l) - chi_pair(1, l)) / 2.0).sum();
    for v in chi.iter().chain(lamb.iter()) {
        if !v.is_finite() {
            return Err(Error::InvalidArg("dispersive quantity overflowed".into()));
        }
    }
    Ok(DispersiveReport { chi, lamb, flip_flop, detunings: det, qnd_chi })
}

/// Exact Stark and Lamb shifts from the qudit-plus-one-photon block:
/// chi_l = E(l,1) - E(l,0) - omega and kappa_l = E(l,0) - eps_l, with
/// eigenvalues matched to unperturbed states by overlap. Oracle for the
/// second-order report; agreement is O(g^4).
pub fn stark_block_oracle(
    s: &QuditSpectrum,
    g: f64,
    omega: f64,
    n_photons: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nl = s.levels.len();
    let np = n_photons + 1;
    let dim = nl * np;
    let idx = |l: usize, n: usize| l * np + n;
    let mut h = CMat::zeros((dim, dim));
    for l in 0..nl {
        for n in 0..np {
            h[(idx(l, n), idx(l, n))] = Complex64::new(s.levels[l] + n as f64 * omega, 0.0);
        }
    }
    for l in 0..nl {
        for lp in 0..nl {
            let gv = g * s.phi[(l, lp)];
            if gv == 0.0 {
                continue;
            }
            for n in 0..np {
                // a: |n> -> sqrt(n)|n-1>, a^dag: |n> -> sqrt(n+1)|n+1>
                if n + 1 < np {
                    h[(idx(l, n + 1), idx(lp, n))] += Complex64::new(gv * ((n + 1) as f64).sqrt(), 0.0);
                    h[(idx(l, n), idx(lp, n + 1))] += Complex64::new(gv * ((n + 1) as f64).sqrt(), 0.0);
                }
            }
        }
    }
    let (vals, vecs) = eigh_hermitian(&h)?;
    let energy_of = |l: usize, n: usize| -> f64 {
        let target = idx(l, n);
        let mut best = (0usize, 0.0f64);
        for (k, _) in vals.iter().enumerate() {
            let w = vecs[(target, k)].norm_sqr();
            if w > best.1 {
                best = (k, w);
            }
        }
        vals[best.0]
    };
    let mut chi = Vec::with_capacity(nl);
    let mut lamb = Vec::with_capacity(nl);
    for l in 0..nl {
        let e0 = energy_of(l, 0);
        let e1 = energy_of(l, 1);
        chi.push(e1 - e0 - omega);
        lamb.push(e0 - s.levels[l]);
    }
    Ok((chi, lamb))
}

#[derive(Clone, Copy, Debug)]
pub struct DispersiveCondition {
    /// sqrt(N) |g| / |Delta_min|.
    pub ratio: f64,
    pub satisfied: bool,
    pub threshold: f64,
}

/// Adiabatic-elimination validity check: sqrt(N) |g| must stay well below
/// the smallest detuning.
pub fn dispersive_condition(
    g: f64,
    delta_min: f64,
    n_qudits: usize,
    threshold: f64,
) -> Result<DispersiveCondition> {
    if delta_min == 0.0 || !delta_min.is_finite() {
        return Err(Error::InvalidArg("detuning must be nonzero and finite".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidArg("threshold must be positive".into()));
    }
    let ratio = (n_qudits as f64).sqrt() * g.abs() / delta_min.abs();
    Ok(DispersiveCondition { ratio, satisfied: ratio < threshold, threshold })
}

#[derive(Clone, Copy, Debug)]
pub struct BalanceReport {
    pub chi_a: f64,
    /// g^2/Delta_a + g^2/Delta_b; zero when the qubit sits exactly between
    /// the two cavity modes.
    pub flip_flop_strength: f64,
}

pub fn balance_cavity_check(g: f64, delta_a: f64, delta_b: f64) -> Result<BalanceReport> {
    if delta_a == 0.0 || delta_b == 0.0 {
        return Err(Error::InvalidArg("both detunings must be nonzero".into()));
    }
    let chi_a = g * g / delta_a;
    Ok(BalanceReport { chi_a, flip_flop_strength: chi_a + g * g / delta_b })
}

/// One row of the E_J sweep table.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub e_j: f64,
    pub levels: Vec<f64>,
    /// |phi_01|, |phi_02|, |phi_03|, |phi_12|, |phi_13|.
    pub abs_phi: [f64; 5],
    pub qnd_chi: f64,
}

/// Spectrum and selection-rule data against E_J at fixed E_C, E_L, flux;
/// the QND column needs an assumed coupling and cavity frequency.
pub fn ej_sweep(
    base: &FluxoniumParams,
    ej_values: &[f64],
    basis_size: usize,
    g: f64,
    omega: f64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(ej_values.len());
    for &ej in ej_values {
        let p = FluxoniumParams { e_j: ej, ..*base };
        let s = diagonalize(&p, basis_size)?;
        let rep = dispersive_report(&s, g, omega)?;
        rows.push(SweepRow {
            e_j: ej,
            levels: s.levels[..6.min(s.levels.len())].to_vec(),
            abs_phi: [
                s.phi[(0, 1)].abs(),
                s.phi[(0, 2)].abs(),
                s.phi[(0, 3)].abs(),
                s.phi[(1, 2)].abs(),
                s.phi[(1, 3)].abs(),
            ],
            qnd_chi: rep.qnd_chi,
        });
    }
    Ok(rows)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "e_j,eps_0,eps_1,eps_2,eps_3,eps_4,eps_5,abs_phi_01,abs_phi_02,abs_phi_03,abs_phi_12,abs_phi_13,chi\n",
    );
    for r in rows {
        write!(out, "{}", r.e_j).unwrap();
        for e in &r.levels {
            write!(out, ",{e}").unwrap();
        }
        for p in &r.abs_phi {
            write!(out, ",{p}").unwrap();
        }
        writeln!(out, ",{}", r.qnd_chi).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params(e_j: f64) -> FluxoniumParams {
        FluxoniumParams { e_c: 0.5, e_j, e_l: 0.75, flux: 0.4 }
    }

    #[test]
    fn zero_junction_limit_is_harmonic() {
        let p = reference_params(0.0);
        let s = diagonalize(&p, 40).unwrap();
        let spacing = (8.0 * p.e_c * p.e_l).sqrt();
        assert!((spacing - 3.0f64.sqrt()).abs() < 1e-12);
        for l in 0..s.levels.len() - 1 {
            assert!(
                (s.levels[l + 1] - s.levels[l] - spacing).abs() < 1e-6,
                "gap {} at level {l}",
                s.levels[l + 1] - s.levels[l]
            );
        }
    }

    #[test]
    fn spectrum_is_ordered_hermitian_and_converged() {
        let s = diagonalize(&reference_params(20.0), 120).unwrap();
        assert!(s.convergence < 1e-6);
        for l in 0..s.levels.len() - 1 {
            assert!(s.levels[l] <= s.levels[l + 1]);
        }
        for a in 0..s.levels.len() {
            for b in 0..s.levels.len() {
                assert!((s.phi[(a, b)] - s.phi[(b, a)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn deep_wells_forbid_inter_well_transitions() {
        let s = diagonalize(&reference_params(20.0), 120).unwrap();
        let max_from_ground =
            (0..s.levels.len()).map(|lp| s.phi[(0, lp)].abs()).fold(0.0f64, f64::max);
        for &(a, b) in &[(0usize, 1usize), (0, 3), (1, 2)] {
            assert!(
                s.phi[(a, b)].abs() < 1e-2 * max_from_ground,
                "phi_{a}{b} = {} vs max {max_from_ground}",
                s.phi[(a, b)]
            );
        }
    }

    #[test]
    fn shallow_wells_allow_all_transitions() {
        let s = diagonalize(&reference_params(4.0), 120).unwrap();
        let r = s.phi[(0, 1)].abs() / s.phi[(0, 2)].abs();
        assert!(r > 0.1, "phi01/phi02 = {r}");
    }

    #[test]
    fn selection_rule_sharpens_monotonically_with_ej() {
        let mut prev = f64::INFINITY;
        for &ej in &[4.0, 8.0, 12.0, 16.0, 20.0] {
            let s = diagonalize(&reference_params(ej), 120).unwrap();
            let r = s.phi[(0, 1)].abs() / s.phi[(0, 2)].abs();
            assert!(r < prev, "ratio {r} did not decrease at E_J = {ej}");
            prev = r;
        }
    }

    #[test]
    fn huge_junction_exhausts_small_basis() {
        let p = FluxoniumParams { e_c: 0.5, e_j: 1e6, e_l: 0.75, flux: 0.4 };
        match diagonalize(&p, 20) {
            Err(Error::NotConverged { last_change }) => assert!(last_change > 1e-6),
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn two_level_report_matches_textbook_shift() {
        // Bare two-level qudit with unit matrix element: in the rotating-wave
        // regime chi_1 - chi_0 -> 2 g^2 / Delta.
        let eps = 5.0;
        let omega = 4.5;
        let delta = eps - omega;
        let g = 0.01;
        let mut phi = Array2::zeros((2, 2));
        phi[(0, 1)] = 1.0;
        phi[(1, 0)] = 1.0;
        let s = QuditSpectrum { levels: vec![0.0, eps], phi, basis_size: 2, convergence: 0.0 };
        let rep = dispersive_report(&s, g, omega).unwrap();
        let rwa = 2.0 * g * g / delta;
        let bloch_siegert = 2.0 * g * g / (eps + omega);
        assert!((rep.chi[1] - rep.chi[0] - rwa - bloch_siegert).abs() < 1e-12);
        assert!((rep.chi[1] - rep.chi[0] - rwa).abs() < 3.0 * bloch_siegert);
        // the same numbers must drop out of the exact block to O(g^4)
        let (chi_exact, lamb_exact) = stark_block_oracle(&s, g, omega, 8).unwrap();
        for l in 0..2 {
            assert!((rep.chi[l] - chi_exact[l]).abs() < 50.0 * g.powi(4));
            assert!((rep.lamb[l] - lamb_exact[l]).abs() < 50.0 * g.powi(4));
        }
    }

    #[test]
    fn report_discrepancy_scales_as_fourth_power() {
        let s = diagonalize(&reference_params(20.0), 120).unwrap();
        let omega = 1.9; // clear of every level gap among the kept eight
        let mut ratios = Vec::new();
        for &g in &[0.01, 0.02, 0.04] {
            let rep = dispersive_report(&s, g, omega).unwrap();
            let (chi_exact, _) = stark_block_oracle(&s, g, omega, 6).unwrap();
            let d: f64 = (0..2).map(|l| (rep.chi[l] - chi_exact[l]).abs()).fold(0.0, f64::max);
            ratios.push(d / g.powi(4));
        }
        let max = ratios.iter().cloned().fold(0.0f64, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            max / min.max(1e-30) < 50.0,
            "discrepancy/g^4 not bounded: {ratios:?}"
        );
    }

    #[test]
    fn flip_flop_vanishes_under_the_selection_rule() {
        let omega = 1.9;
        let g = 0.05;
        let deep = diagonalize(&reference_params(20.0), 120).unwrap();
        let shallow = diagonalize(&reference_params(4.0), 120).unwrap();
        let mu_deep = dispersive_report(&deep, g, omega).unwrap().flip_flop[(0, 1)].abs();
        let mu_shallow = dispersive_report(&shallow, g, omega).unwrap().flip_flop[(0, 1)].abs();
        assert!(
            mu_deep < 1e-3 * mu_shallow,
            "mu01 deep {mu_deep} vs shallow {mu_shallow}"
        );
    }

    #[test]
    fn coupling_scales_quadratically() {
        let s = diagonalize(&reference_params(20.0), 120).unwrap();
        let omega = 1.9;
        let a = dispersive_report(&s, 0.01, omega).unwrap();
        let b = dispersive_report(&s, 0.02, omega).unwrap();
        for l in 0..s.levels.len() {
            assert!((b.chi[l] - 4.0 * a.chi[l]).abs() < 1e-12);
            assert!((b.lamb[l] - 4.0 * a.lamb[l]).abs() < 1e-12);
        }
        assert!((b.qnd_chi - 4.0 * a.qnd_chi).abs() < 1e-12);
    }

    #[test]
    fn condition_examples() {
        let c = dispersive_condition(0.0, 1.0, 7, 0.1).unwrap();
        assert!(c.satisfied && c.ratio == 0.0);
        let c = dispersive_condition(0.05, 1.0, 100, 0.1).unwrap();
        assert!(!c.satisfied && (c.ratio - 0.5).abs() < 1e-15);
        let c = dispersive_condition(0.04, 1.0, 4, 0.1).unwrap();
        assert!(c.satisfied && (c.ratio - 0.08).abs() < 1e-15);
        assert!(dispersive_condition(0.1, 0.0, 4, 0.1).is_err());
    }

    #[test]
    fn balance_cavity_examples() {
        let r = balance_cavity_check(0.07, 0.9, -0.9).unwrap();
        assert_eq!(r.flip_flop_strength, 0.0);
        let r = balance_cavity_check(0.1, 1.0, -2.0).unwrap();
        assert!((r.flip_flop_strength - 0.005).abs() < 1e-15);
        assert!((r.chi_a - 0.01).abs() < 1e-15);
        let r = balance_cavity_check(0.1, 1.0, 1e12).unwrap();
        assert!((r.flip_flop_strength - 0.01).abs() < 1e-10);
        assert!(balance_cavity_check(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn sweep_csv_is_deterministic_and_ordered() {
        let base = reference_params(0.0);
        let ejs = [4.0, 12.0, 20.0];
        let rows = ej_sweep(&base, &ejs, 60, 0.05, 1.9).unwrap();
        let csv1 = sweep_to_csv(&rows);
        let rows2 = ej_sweep(&base, &ejs, 60, 0.05, 1.9).unwrap();
        assert_eq!(csv1, sweep_to_csv(&rows2));
        assert_eq!(csv1.lines().count(), 4);
        assert!(csv1.starts_with("e_j,eps_0"));
        for (line, &ej) in csv1.lines().skip(1).zip(ejs.iter()) {
            assert!(line.starts_with(&format!("{ej},")));
            assert_eq!(line.split(',').count(), 13);
        }
    }
}
