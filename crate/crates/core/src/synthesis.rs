//! Building quantum models that reproduce prescribed joint tables.
//!
//! Each setting is handled on its own: we look for an orthonormal basis
//! whose diagonal of the state, `⟨e_k|ρ|e_k⟩`, is the target table. By the
//! Schur–Horn theorem such a basis exists exactly when the spectrum of `ρ`
//! majorizes the target, and a pure state majorizes every distribution.
//! The basis is built from two-level rotations of the eigenvectors (the
//! Chan–Li recursion). If that fails, a seeded Nelder–Mead search over
//! unitary rotations of the best basis so far takes over.

use alloc::vec::Vec;

use num_complex::Complex64;
// Only needed when nothing in the build links std.
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{c, Density4, Ket4, Op4, UNIT_TOL};
use crate::measurement::{outcome_probabilities, OutcomeDistribution, Spectral4, DEFAULT_LABELS};
use crate::scenario::{JointTables, QuantumModel};

pub const SYNTHESIS_TOL: f64 = 1e-9;

const MAJORIZATION_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum StateHint {
    Vector(Ket4),
    Density(Density4),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisRequest {
    pub targets: JointTables,
    pub state_hint: Option<StateHint>,
    pub tolerance: f64,
    /// Mixed into the optimizer seed together with the request contents.
    pub seed: u64,
}

impl SynthesisRequest {
    pub fn new(targets: JointTables) -> Self {
        SynthesisRequest {
            targets,
            state_hint: None,
            tolerance: SYNTHESIS_TOL,
            seed: 0,
        }
    }

    pub fn with_state(mut self, hint: StateHint) -> Self {
        self.state_hint = Some(hint);
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthesisMethod {
    Constructive,
    Optimized,
}

impl SynthesisMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthesisMethod::Constructive => "constructive",
            SynthesisMethod::Optimized => "optimized",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult {
    pub model: QuantumModel,
    /// Largest absolute difference between model and target probabilities.
    pub residual: f64,
    pub method: SynthesisMethod,
}

/// `(0, √½, √½, 0)`, the entangled state used when no state is supplied.
pub fn default_state() -> Ket4 {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    Ket4::from_real([0.0, h, h, 0.0])
}

/// An orthonormal basis with `|⟨e_k|state⟩|² = target_k`.
pub fn basis_matching_probabilities(state: &Ket4, target: [f64; 4]) -> Result<[Ket4; 4]> {
    state.check_unit(UNIT_TOL)?;
    let target = OutcomeDistribution::new(target, 1e-10)?;
    let (d, v) = pure_frame(state);
    Ok(schur_horn(d, v, &target.0).expect("a pure state majorizes every distribution"))
}

/// An orthonormal basis with `⟨e_k|ρ|e_k⟩ = target_k`, if the spectrum of
/// `ρ` majorizes the target.
pub fn basis_matching_density(rho: &Density4, target: [f64; 4]) -> Result<Option<[Ket4; 4]>> {
    let target = OutcomeDistribution::new(target, 1e-10)?;
    let (d, v) = density_frame(rho);
    Ok(schur_horn(d, v, &target.0))
}

pub fn synthesize_model(req: &SynthesisRequest) -> Result<SynthesisResult> {
    if !(req.tolerance > 0.0 && req.tolerance.is_finite()) {
        return Err(Error::Tolerance {
            value: req.tolerance,
        });
    }
    let state = match &req.state_hint {
        None => Density4::pure(&default_state())?,
        Some(StateHint::Vector(v)) => Density4::pure(v)?,
        Some(StateHint::Density(rho)) => rho.clone(),
    };
    let (d, v) = match state.as_pure(1e-12) {
        Some(psi) => pure_frame(&psi),
        None => density_frame(&state),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(request_seed(req, &state));
    let mut method = SynthesisMethod::Constructive;
    let mut residual: f64 = 0.0;
    let mut bases = [[Ket4::zero(); 4]; 4];
    for (basis, table) in bases.iter_mut().zip(req.targets.0.iter()) {
        let target = &table.0;
        let start = schur_horn(d, v, target);
        let err = start.map(|b| basis_residual(&state, &b, target));
        let (b, e) = match (start, err) {
            (Some(b), Some(e)) if e <= req.tolerance => (b, e),
            _ => {
                method = SynthesisMethod::Optimized;
                let seed_basis = start.unwrap_or(v);
                refine_basis(&state, &seed_basis, target, req.tolerance, &mut rng)
            }
        };
        *basis = b;
        residual = residual.max(e);
    }
    if !(residual <= req.tolerance) {
        return Err(Error::Synthesis {
            best_residual: residual,
        });
    }

    let mut measurements = Vec::with_capacity(4);
    for basis in bases {
        measurements.push(Spectral4::new(basis, DEFAULT_LABELS, 1e-9)?);
    }
    let measurements: [Spectral4; 4] = measurements.try_into().expect("four settings");
    Ok(SynthesisResult {
        model: QuantumModel::new(state, measurements)?,
        residual,
        method,
    })
}

/// `(1, 0, 0, 0)` together with the state and a completion to a basis.
fn pure_frame(psi: &Ket4) -> ([f64; 4], [Ket4; 4]) {
    let mut frame = [*psi, Ket4::zero(), Ket4::zero(), Ket4::zero()];
    let mut used = [false; 4];
    for slot in 1..4 {
        // Pick the canonical vector with the largest component outside the
        // span so far; ties go to the lower index.
        let mut best: Option<(f64, Ket4, usize)> = None;
        for k in (0..4).filter(|&k| !used[k]) {
            let mut r = Ket4::basis(k);
            for f in &frame[..slot] {
                r = r - f.scale(f.inner(&r));
            }
            let n = r.norm();
            if best.map_or(true, |(bn, _, _)| n > bn + 1e-12) {
                best = Some((n, r, k));
            }
        }
        let (n, r, k) = best.expect("a canonical vector remains");
        used[k] = true;
        let mut r = r.scale(c(1.0 / n, 0.0));
        // Second pass keeps the frame orthonormal to machine precision.
        for f in &frame[..slot] {
            r = r - f.scale(f.inner(&r));
        }
        frame[slot] = r.scale(c(1.0 / r.norm(), 0.0));
    }
    ([1.0, 0.0, 0.0, 0.0], frame)
}

/// Eigenvalues in descending order with their eigenvectors.
fn density_frame(rho: &Density4) -> ([f64; 4], [Ket4; 4]) {
    let eig = rho.matrix().eigh();
    let mut d = eig.values;
    let mut v = eig.vectors;
    d.reverse();
    v.reverse();
    (d, v)
}

/// Chan–Li recursion. `d` is descending and `v` its orthonormal frame;
/// returns the basis with `⟨e_k|ρ|e_k⟩ = target_k`, or `None` if `d`
/// does not majorize the target.
fn schur_horn(d: [f64; 4], v: [Ket4; 4], target: &[f64; 4]) -> Option<[Ket4; 4]> {
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| target[j].total_cmp(&target[i]).then(i.cmp(&j)));

    let mut diag: Vec<f64> = d.to_vec();
    let mut frame: Vec<Ket4> = v.to_vec();
    let mut out = [Ket4::zero(); 4];
    for &k in &order {
        let t = target[k];
        if diag.len() == 1 {
            if (diag[0] - t).abs() > 1e-9 {
                return None;
            }
            out[k] = frame[0];
            break;
        }
        let j = (0..diag.len() - 1).find(|&j| {
            diag[j] >= t - MAJORIZATION_SLACK && t >= diag[j + 1] - MAJORIZATION_SLACK
        })?;
        let (hi, lo) = (diag[j], diag[j + 1]);
        let gap = hi - lo;
        let c2 = if gap <= 1e-15 {
            1.0
        } else {
            ((t - lo) / gap).clamp(0.0, 1.0)
        };
        let (cs, sn) = (c2.sqrt(), (1.0 - c2).sqrt());
        let u = frame[j].scale(c(cs, 0.0)) + frame[j + 1].scale(c(sn, 0.0));
        let w = frame[j + 1].scale(c(cs, 0.0)) - frame[j].scale(c(sn, 0.0));
        out[k] = u;
        diag[j + 1] = (1.0 - c2) * hi + c2 * lo;
        frame[j + 1] = w;
        diag.remove(j);
        frame.remove(j);
    }
    Some(out)
}

fn basis_residual(rho: &Density4, basis: &[Ket4; 4], target: &[f64; 4]) -> f64 {
    let mut worst: f64 = 0.0;
    for (e, t) in basis.iter().zip(target) {
        worst = worst.max((rho.matrix().expectation(e).re - t).abs());
    }
    worst
}

/// Number of real parameters of a 4×4 hermitian generator.
const GENERATOR_DIM: usize = 16;

/// `exp(iH)` for the hermitian `H` packed as 4 diagonal entries followed
/// by the real and imaginary parts of the 6 upper entries.
fn unitary_from(params: &[f64]) -> Op4 {
    let mut h = Op4::zero();
    for k in 0..4 {
        h[(k, k)] = c(params[k], 0.0);
    }
    let mut p = 4;
    for i in 0..4 {
        for j in i + 1..4 {
            let z = c(params[p], params[p + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            p += 2;
        }
    }
    let eig = h.eigh();
    let mut u = Op4::zero();
    for (lambda, vec) in eig.values.iter().zip(eig.vectors.iter()) {
        let phase = Complex64::from_polar(1.0, *lambda);
        u = u + vec.projector().scale_complex(phase);
    }
    u
}

fn rotated(u: &Op4, basis: &[Ket4; 4]) -> [Ket4; 4] {
    basis.map(|e| u.apply(&e))
}

/// Derivative-free search for a unitary `U` such that the basis `U e_k`
/// reproduces the target. Returns the best basis found and its residual.
pub fn refine_basis(
    rho: &Density4,
    start: &[Ket4; 4],
    target: &[f64; 4],
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> ([Ket4; 4], f64) {
    let mut base = *start;
    let mut best = basis_residual(rho, &base, target);
    let objective = |base: &[Ket4; 4], x: &[f64]| -> f64 {
        let b = rotated(&unitary_from(x), base);
        b.iter()
            .zip(target)
            .map(|(e, t)| {
                let d = rho.matrix().expectation(e).re - t;
                d * d
            })
            .sum()
    };

    let mut step = 0.5;
    for _ in 0..12 {
        if best <= tol {
            break;
        }
        let x0 = [0.0; GENERATOR_DIM];
        let current = base;
        let (x, _) = nelder_mead(
            |x| objective(&current, x),
            &x0,
            step,
            4000,
            tol * tol * 0.25,
            rng,
        );
        let candidate = rotated(&unitary_from(&x), &base);
        let r = basis_residual(rho, &candidate, target);
        if r < best {
            best = r;
            base = candidate;
            step = (step * 0.5).max(1e-4);
        } else {
            step = (step * 2.0).min(1.5);
        }
    }
    (base, best)
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction ½,
/// shrink ½) on a simplex of random-signed axis steps around `x0`.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    f_stop: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        let sign = if uniform01(rng) < 0.5 { -1.0 } else { 1.0 };
        x[i] += sign * step * (0.5 + uniform01(rng));
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= f_stop {
            break;
        }
        let spread = simplex[n].1 - simplex[0].1;
        if spread <= 1e-30 {
            break;
        }
        let mut centroid = alloc::vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (cj, xj) in centroid.iter_mut().zip(x) {
                *cj += xj / n as f64;
            }
        }
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(cj, wj)| cj + t * (wj - cj))
                .collect()
        };
        let worst = simplex[n].0.clone();
        let xr = along(-1.0, &worst);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-2.0, &worst);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(-0.5, &worst);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5, &worst);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            for (xj, bj) in x.iter_mut().zip(&best) {
                *xj = bj + 0.5 * (*xj - bj);
            }
            *fx = f(x);
            evals += 1;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// FNV-1a over the request contents, so equal requests draw equal streams.
fn request_seed(req: &SynthesisRequest, state: &Density4) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(req.seed);
    feed(req.tolerance.to_bits());
    for table in &req.targets.0 {
        for p in table.0 {
            feed(p.to_bits());
        }
    }
    for row in state.matrix().0.iter() {
        for z in row {
            feed(z.re.to_bits());
            feed(z.im.to_bits());
        }
    }
    h
}

/// Probabilities actually produced by a basis, for diagnostics.
pub fn basis_probabilities(rho: &Density4, basis: &[Ket4; 4]) -> Result<OutcomeDistribution> {
    let m = Spectral4::new(*basis, DEFAULT_LABELS, 1e-9)?;
    Ok(outcome_probabilities(&m, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::gram_deviation;
    use crate::lhv::{lhv_feasible, LHV_TOL};
    use crate::scenario::{
        analyze_model, chsh_delta, classify, marginal_deviation, scenario_probabilities, Category,
        ClassifyTolerance,
    };

    fn overlaps(state: &Ket4, basis: &[Ket4; 4]) -> [f64; 4] {
        basis.map(|e| e.fidelity(state))
    }

    #[test]
    fn canonical_target_from_basis_state() {
        let b = basis_matching_probabilities(&Ket4::basis(0), [1.0, 0.0, 0.0, 0.0]).unwrap();
        for (k, e) in b.iter().enumerate() {
            assert!((e.fidelity(&Ket4::basis(k)) - 1.0).abs() < 1e-15, "{k}");
        }
    }

    #[test]
    fn uniform_overlaps() {
        let s = Ket4::basis(0);
        let b = basis_matching_probabilities(&s, [0.25; 4]).unwrap();
        for p in overlaps(&s, &b) {
            assert!((p - 0.25).abs() < 1e-12);
        }
        assert!(gram_deviation(&b) < 1e-12);
    }

    #[test]
    fn certain_outcome_recovers_state() {
        let p = default_state();
        let b = basis_matching_probabilities(&p, [1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((b[0].fidelity(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_target_is_rejected() {
        let p = default_state();
        assert!(matches!(
            basis_matching_probabilities(&p, [0.5, 0.5, 0.5, 0.0]),
            Err(Error::Distribution { .. })
        ));
        assert!(matches!(
            basis_matching_probabilities(&p, [1.5, -0.5, 0.0, 0.0]),
            Err(Error::Distribution { .. })
        ));
    }

    #[test]
    fn arbitrary_targets_and_complex_state() {
        let psi = Ket4::new([c(0.1, 0.3), c(-0.5, 0.2), c(0.4, -0.4), c(0.2, 0.5)])
            .normalized()
            .unwrap();
        for target in [
            [0.1, 0.2, 0.3, 0.4],
            [0.0, 0.0, 0.0, 1.0],
            [0.7, 0.0, 0.3, 0.0],
            [0.25, 0.25, 0.25, 0.25],
        ] {
            let b = basis_matching_probabilities(&psi, target).unwrap();
            let got = overlaps(&psi, &b);
            for (g, t) in got.iter().zip(target) {
                assert!((g - t).abs() < 1e-12, "{got:?} vs {target:?}");
            }
            assert!(gram_deviation(&b) < 1e-12);
        }
    }

    fn tables(rows: [[f64; 4]; 4]) -> JointTables {
        JointTables::new(rows, 1e-12).unwrap()
    }

    #[test]
    fn beyond_tsirelson_signaling_tables() {
        let t = tables([
            [0.0, 0.5, 0.5, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]);
        let r = synthesize_model(&SynthesisRequest::new(t)).unwrap();
        assert_eq!(r.method, SynthesisMethod::Constructive);
        let got = scenario_probabilities(&r.model);
        assert!(got.max_abs_diff(&t) <= 1e-12);
        assert!((chsh_delta(&got) - 4.0).abs() < 1e-10);
        let report = analyze_model(&r.model, ClassifyTolerance::default());
        assert_eq!(report.category, Category::NonlocalNonMarginal2);
    }

    #[test]
    fn nonlocal_box_tables() {
        let t = tables([
            [0.0, 0.5, 0.5, 0.0],
            [0.5, 0.0, 0.0, 0.5],
            [0.5, 0.0, 0.0, 0.5],
            [0.5, 0.0, 0.0, 0.5],
        ]);
        let r = synthesize_model(&SynthesisRequest::new(t)).unwrap();
        let got = scenario_probabilities(&r.model);
        assert!((chsh_delta(&got) - 4.0).abs() < 1e-10);
        assert!(marginal_deviation(&got).max <= 1e-10);
        assert_eq!(classify(&got, 1e-7).category, Category::NonlocalBox);
    }

    #[test]
    fn uniform_tables() {
        let r = synthesize_model(&SynthesisRequest::new(JointTables::uniform())).unwrap();
        let got = scenario_probabilities(&r.model);
        assert!(chsh_delta(&got).abs() < 1e-12);
        assert!(lhv_feasible(&got, LHV_TOL).is_feasible());
    }

    #[test]
    fn maximally_mixed_state_reaches_only_uniform() {
        let hint = StateHint::Density(Density4::maximally_mixed());
        let ok = SynthesisRequest::new(JointTables::uniform()).with_state(hint.clone());
        assert!(synthesize_model(&ok).is_ok());

        let t = tables([[1.0, 0.0, 0.0, 0.0]; 4]);
        let bad = SynthesisRequest::new(t).with_state(hint);
        match synthesize_model(&bad) {
            Err(Error::Synthesis { best_residual }) => {
                assert!((best_residual - 0.75).abs() < 1e-9, "{best_residual}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mixed_state_within_majorization() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let rho = Density4::mixture(&[
            (0.6, Ket4::from_real([0.0, h, h, 0.0])),
            (0.4, Ket4::from_real([h, 0.0, 0.0, -h])),
        ])
        .unwrap();
        let t = tables([
            [0.5, 0.1, 0.2, 0.2],
            [0.3, 0.3, 0.2, 0.2],
            [0.6, 0.4, 0.0, 0.0],
            [0.25, 0.25, 0.25, 0.25],
        ]);
        let r = synthesize_model(&SynthesisRequest::new(t).with_state(StateHint::Density(rho)))
            .unwrap();
        assert_eq!(r.method, SynthesisMethod::Constructive);
        assert!(scenario_probabilities(&r.model).max_abs_diff(&t) <= 1e-10);
    }

    #[test]
    fn global_phase_does_not_matter() {
        let t = tables([
            [0.1, 0.2, 0.3, 0.4],
            [0.4, 0.3, 0.2, 0.1],
            [0.0, 1.0, 0.0, 0.0],
            [0.5, 0.0, 0.5, 0.0],
        ]);
        let phase = Complex64::from_polar(1.0, 1.234);
        let psi = default_state().scale(phase);
        let r =
            synthesize_model(&SynthesisRequest::new(t).with_state(StateHint::Vector(psi))).unwrap();
        assert!(scenario_probabilities(&r.model).max_abs_diff(&t) <= 1e-12);
    }

    #[test]
    fn non_positive_tolerance_is_rejected() {
        let req = SynthesisRequest::new(JointTables::uniform()).with_tolerance(0.0);
        assert!(matches!(
            synthesize_model(&req),
            Err(Error::Tolerance { .. })
        ));
    }

    #[test]
    fn refinement_converges_from_perturbed_start() {
        let psi = default_state();
        let rho = Density4::pure(&psi).unwrap();
        let target = [0.4, 0.3, 0.2, 0.1];
        let exact = basis_matching_probabilities(&psi, target).unwrap();
        let nudge = unitary_from(&[
            0.02, -0.01, 0.03, 0.0, 0.01, 0.02, -0.02, 0.0, 0.01, 0.0, 0.0, 0.01, -0.01, 0.02, 0.0,
            0.01,
        ]);
        let start = rotated(&nudge, &exact);
        let before = basis_residual(&rho, &start, &target);
        assert!(before > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (basis, residual) = refine_basis(&rho, &start, &target, 1e-9, &mut rng);
        assert!(residual <= 1e-9, "{residual}");
        assert!(gram_deviation(&basis) < 1e-12);
    }

    #[test]
    fn unitary_generator_is_unitary() {
        let params: Vec<f64> = (0..GENERATOR_DIM).map(|k| 0.3 * k as f64 - 2.0).collect();
        let u = unitary_from(&params);
        let prod = u.adjoint() * u;
        assert!(prod.max_abs_diff(&Op4::identity()) < 1e-12);
    }

    #[test]
    fn same_request_same_model() {
        let t = tables([
            [0.1, 0.2, 0.3, 0.4],
            [0.4, 0.3, 0.2, 0.1],
            [0.0, 1.0, 0.0, 0.0],
            [0.5, 0.0, 0.5, 0.0],
        ]);
        let a = synthesize_model(&SynthesisRequest::new(t).with_seed(3)).unwrap();
        let b = synthesize_model(&SynthesisRequest::new(t).with_seed(3)).unwrap();
        assert_eq!(a, b);
    }
}
