//! Mixtures of product states measured with product measurements, and the
//! CHSH bound that holds for them.

use alloc::vec::Vec;

// Only needed when nothing in the build links std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_weights, gram_deviation, kron_operator, kron_state, Density4, Ket2, Op2, DEFAULT_TOL,
    UNIT_TOL,
};
use crate::measurement::{OutcomeDistribution, Setting, Spectral4};
use crate::schmidt::{is_product_measurement, PRODUCT_TOL};

/// A two-outcome measurement on C².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectral2 {
    basis: [Ket2; 2],
    eigenvalues: [f64; 2],
}

impl Spectral2 {
    pub fn new(basis: [Ket2; 2], eigenvalues: [f64; 2]) -> Result<Self> {
        let deviation = gram_deviation(&basis);
        if !(deviation <= DEFAULT_TOL) {
            return Err(Error::Orthonormality { deviation });
        }
        Ok(Spectral2 { basis, eigenvalues })
    }

    /// Dichotomic ±1 measurement along a linear-polarizer angle `theta`:
    /// outcome 1 on `(cos θ, sin θ)`, outcome 2 on `(−sin θ, cos θ)`.
    pub fn polarizer(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Spectral2 {
            basis: [Ket2::from_real([c, s]), Ket2::from_real([-s, c])],
            eigenvalues: [1.0, -1.0],
        }
    }

    pub fn basis(&self) -> &[Ket2; 2] {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64; 2] {
        &self.eigenvalues
    }

    pub fn observable(&self) -> Op2 {
        Op2::spectral_sum(&self.basis, &self.eigenvalues)
    }

    pub fn probabilities(&self, v: &Ket2) -> [f64; 2] {
        [self.basis[0].fidelity(v), self.basis[1].fidelity(v)]
    }
}

/// Joint measurement `e_A ⊗ e_B`: slot `(i, j)` holds `a_i ⊗ b_j` with label `α_i β_j`.
pub fn product_measurement(e_a: &Spectral2, e_b: &Spectral2) -> Spectral4 {
    let mut basis = [crate::hilbert::Ket4::zero(); 4];
    let mut labels = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            basis[2 * i + j] = kron_state(&e_a.basis[i], &e_b.basis[j]);
            labels[2 * i + j] = e_a.eigenvalues[i] * e_b.eigenvalues[j];
        }
    }
    // Tensor products of orthonormal bases are orthonormal.
    Spectral4::new(basis, labels, 1e-9).expect("product of orthonormal bases")
}

/// Local observables `e_A, e_A′, e_B, e_B′` of a CHSH test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalSettings {
    pub a: Spectral2,
    pub a_prime: Spectral2,
    pub b: Spectral2,
    pub b_prime: Spectral2,
}

impl LocalSettings {
    /// The four product measurements, in setting order.
    pub fn measurements(&self) -> [Spectral4; 4] {
        Setting::ALL.map(|s| {
            let a = if s.a_primed() { &self.a_prime } else { &self.a };
            let b = if s.b_primed() { &self.b_prime } else { &self.b };
            product_measurement(a, b).with_setting(s)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub a: Ket2,
    pub b: Ket2,
}

/// `ρ = Σ w_i |a_i⟩⟨a_i| ⊗ |b_i⟩⟨b_i|`; components need not be orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMixture {
    components: Vec<MixtureComponent>,
}

impl ProductMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        check_weights(components.iter().map(|c| c.weight))?;
        for comp in &components {
            comp.a.check_unit(UNIT_TOL)?;
            comp.b.check_unit(UNIT_TOL)?;
        }
        Ok(ProductMixture { components })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }
}

pub fn product_mixture_density(m: &ProductMixture) -> Result<Density4> {
    let parts: Vec<_> = m
        .components
        .iter()
        .map(|comp| (comp.weight, kron_state(&comp.a, &comp.b)))
        .collect();
    Density4::mixture(&parts)
}

/// `p(i, j) = Σ_k w_k p_k(A_i) p_k(B_j)`.
pub fn mixture_joint_probabilities(
    m: &ProductMixture,
    e_a: &Spectral2,
    e_b: &Spectral2,
) -> OutcomeDistribution {
    let mut p = [0.0; 4];
    for comp in &m.components {
        let pa = e_a.probabilities(&comp.a);
        let pb = e_b.probabilities(&comp.b);
        for i in 0..2 {
            for j in 0..2 {
                p[2 * i + j] += comp.weight * pa[i] * pb[j];
            }
        }
    }
    OutcomeDistribution(p)
}

/// `Δ = x′y′ + x′y + xy′ − xy`, which never leaves [−2, 2] on [−1, 1]⁴.
pub fn bounded_chsh(x: f64, x_prime: f64, y: f64, y_prime: f64) -> Result<f64> {
    for v in [x, x_prime, y, y_prime] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::Domain { value: v });
        }
    }
    let delta = x_prime * y_prime + x_prime * y + x * y_prime - x * y;
    debug_assert!(delta.abs() <= 2.0 + 1e-12);
    Ok(delta)
}

/// Per-component CHSH values `δ_i` and their convex combination.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureBellBreakdown {
    pub per_component: Vec<f64>,
    pub total: f64,
    pub locals: LocalObservables,
}

/// The ±1 local observables recovered from four product measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalObservables {
    pub a: Op2,
    pub a_prime: Op2,
    pub b: Op2,
    pub b_prime: Op2,
}

/// Splits the four measurements into shared local observables and
/// evaluates `δ_i` for each component of the mixture.
pub fn mixture_delta_breakdown(
    m: &ProductMixture,
    measurements: &[Spectral4; 4],
) -> Result<MixtureBellBreakdown> {
    let locals = local_observables(measurements)?;
    let mean = |op: &Op2, v: &Ket2| op.expectation(v).re.clamp(-1.0, 1.0);
    let mut per_component = Vec::with_capacity(m.components.len());
    let mut total = 0.0;
    for comp in &m.components {
        let delta = bounded_chsh(
            mean(&locals.a, &comp.a),
            mean(&locals.a_prime, &comp.a),
            mean(&locals.b, &comp.b),
            mean(&locals.b_prime, &comp.b),
        )?;
        total += comp.weight * delta;
        per_component.push(delta);
    }
    Ok(MixtureBellBreakdown {
        per_component,
        total,
        locals,
    })
}

fn local_observables(measurements: &[Spectral4; 4]) -> Result<LocalObservables> {
    let mut factors = [(Op2::zero(), Op2::zero()); 4];
    for (s, (f, m)) in Setting::ALL
        .into_iter()
        .zip(factors.iter_mut().zip(measurements.iter()))
    {
        if let Some(&label) = m
            .eigenvalues()
            .iter()
            .find(|l| (l.abs() - 1.0).abs() > DEFAULT_TOL)
        {
            return Err(Error::Label { setting: s, label });
        }
        let structure = is_product_measurement(m, PRODUCT_TOL);
        let fact = structure
            .product()
            .ok_or(Error::ProductRequired { setting: s })?;
        *f = (
            fact.a_observable()
                .ok_or(Error::ProductRequired { setting: s })?,
            fact.b_observable()
                .ok_or(Error::ProductRequired { setting: s })?,
        );
    }
    let [(a, b), (a2, b_prime_raw), (a_prime_raw, b2), _] = factors;

    // X ⊗ Y = (−X) ⊗ (−Y): align the shared side, carry the sign over.
    let sign_against = |x: &Op2, reference: &Op2| -> Result<f64> {
        let plus = x.max_abs_diff(reference);
        let minus = x.max_abs_diff(&reference.scale(-1.0));
        let (sign, deviation) = if plus <= minus {
            (1.0, plus)
        } else {
            (-1.0, minus)
        };
        if deviation > 1e-8 {
            return Err(Error::LocalMismatch { deviation });
        }
        Ok(sign)
    };
    let b_prime = b_prime_raw.scale(sign_against(&a2, &a)?);
    let a_prime = a_prime_raw.scale(sign_against(&b2, &b)?);

    let deviation = kron_operator(&a_prime, &b_prime).max_abs_diff(&measurements[3].observable());
    if deviation > 1e-8 {
        return Err(Error::LocalMismatch { deviation });
    }
    Ok(LocalObservables {
        a,
        a_prime,
        b,
        b_prime,
    })
}
