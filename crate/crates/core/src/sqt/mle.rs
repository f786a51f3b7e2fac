use super::linear::{linear_inversion, project_to_physical};
use super::set::{CountVector, TomographySet};
use crate::error::{invalid, Result};
use crate::qcore::{c, DensityMatrix, Operator};

/// Stopping rule and safeguards for the likelihood ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Relative likelihood gain per iteration below which the ascent counts
    /// as stationary.
    pub stall_tolerance: f64,
    /// Consecutive stationary iterations that end the ascent.
    pub stall_iterations: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            gradient_tolerance: 1e-12,
            stall_tolerance: 1e-15,
            stall_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub state: DensityMatrix,
    /// Weight-normalized log-likelihood of `state`.
    pub log_likelihood: f64,
    pub iterations: usize,
    /// True when the gradient tolerance was met or the likelihood stayed
    /// stationary to machine precision; false when the iteration cap or a
    /// failed line search ended the ascent.
    pub converged: bool,
    pub gradient_norm: f64,
}

/// Real coordinates of a lower-triangular `T` with `ρ = TT†/Tr(TT†)`.
///
/// Row-major over the lower triangle: a diagonal entry contributes its real
/// part, an off-diagonal entry its real then imaginary part, `d²` in all.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyParams {
    pub values: Vec<f64>,
    dim: usize,
}

impl CholeskyParams {
    pub fn new(values: Vec<f64>, dim: usize) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(invalid(format!(
                "{} Cholesky parameters for dimension {dim}",
                values.len()
            )));
        }
        Ok(Self { values, dim })
    }

    /// Parameters of the Cholesky factor of a full-rank state.
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        let chol = rho
            .elements()
            .clone()
            .cholesky()
            .ok_or_else(|| invalid("state is not positive definite"))?;
        let t = chol.l();
        let d = rho.dim();
        let mut values = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..=a {
                values.push(t[(a, b)].re);
                if a != b {
                    values.push(t[(a, b)].im);
                }
            }
        }
        Ok(Self { values, dim: d })
    }

    pub fn lower(&self) -> Operator {
        let d = self.dim;
        let mut t = Operator::zeros(d, d);
        let mut it = self.values.iter();
        for a in 0..d {
            for b in 0..=a {
                let re = *it.next().expect("d² values");
                let im = if a != b {
                    *it.next().expect("d² values")
                } else {
                    0.0
                };
                t[(a, b)] = c(re, im);
            }
        }
        t
    }

    pub fn state(&self) -> Result<DensityMatrix> {
        let t = self.lower();
        let m = &t * t.adjoint();
        let trace = m.trace().re;
        if !(trace > 0.0 && trace.is_finite()) {
            return Err(invalid("Cholesky factor is zero"));
        }
        Ok(DensityMatrix::from_trusted(m * c(1.0 / trace, 0.0)))
    }
}

/// Per-projector likelihood coefficients `(w_i f_i, w_i (1 − f_i))` over total weight.
fn coefficients(counts: &CountVector) -> Result<Vec<(f64, f64)>> {
    let total: f64 = counts.entries.iter().map(|e| e.weight()).sum();
    if total <= 0.0 {
        return Err(invalid("no photons were recorded"));
    }
    Ok(counts
        .entries
        .iter()
        .map(|e| {
            let w = e.weight() / total;
            (w * e.frequency, w * (1.0 - e.frequency))
        })
        .collect())
}

fn probabilities(set: &TomographySet, rho: &Operator) -> Vec<f64> {
    set.projectors()
        .iter()
        .map(|psi| {
            let v = psi.amplitudes();
            (v.adjoint() * rho * v)[(0, 0)].re.clamp(0.0, 1.0)
        })
        .collect()
}

fn likelihood_from(coef: &[(f64, f64)], p: &[f64]) -> f64 {
    coef.iter()
        .zip(p)
        .map(|(&(s, f), &p)| {
            let mut l = 0.0;
            if s > 0.0 {
                l += s * p.ln();
            }
            if f > 0.0 {
                l += f * (1.0 - p).ln();
            }
            l
        })
        .sum()
}

/// Binomial log-likelihood `Σ n_i ln p_i + (N_i − n_i) ln(1 − p_i)`,
/// divided by the total photon weight.
pub fn log_likelihood(
    counts: &CountVector,
    set: &TomographySet,
    rho: &DensityMatrix,
) -> Result<f64> {
    counts.check_len(set)?;
    if rho.dim() != set.dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: set.dim(),
            actual: rho.dim(),
        });
    }
    let coef = coefficients(counts)?;
    Ok(likelihood_from(&coef, &probabilities(set, rho.elements())))
}

struct Evaluation {
    value: f64,
    gradient: Vec<f64>,
}

fn evaluate(
    coef: &[(f64, f64)],
    set: &TomographySet,
    params: &CholeskyParams,
) -> Option<Evaluation> {
    let t = params.lower();
    let m = &t * t.adjoint();
    let tau = m.trace().re;
    if !(tau > 0.0 && tau.is_finite()) {
        return None;
    }
    let rho = m * c(1.0 / tau, 0.0);
    let p = probabilities(set, &rho);
    let value = likelihood_from(coef, &p);
    if !value.is_finite() {
        return None;
    }

    // dL/dρ = Σ (s_i/p_i − f_i/(1 − p_i)) |ψ_i⟩⟨ψ_i|
    let d = set.dim();
    let mut g = Operator::zeros(d, d);
    for ((&(s, f), &pi), psi) in coef.iter().zip(&p).zip(set.projectors()) {
        let mut w = 0.0;
        if s > 0.0 {
            w += s / pi;
        }
        if f > 0.0 {
            w -= f / (1.0 - pi);
        }
        if w != 0.0 {
            g += psi.projector() * c(w, 0.0);
        }
    }
    let shift = (&g * &rho).trace().re;
    let k = g - Operator::identity(d, d) * c(shift, 0.0);
    let tk = t.adjoint() * k;

    let mut gradient = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..=a {
            let z = tk[(b, a)];
            gradient.push(2.0 * z.re / tau);
            if a != b {
                gradient.push(-2.0 * z.im / tau);
            }
        }
    }
    Some(Evaluation { value, gradient })
}

/// Maximum-likelihood state by quasi-Newton (BFGS) ascent with backtracking
/// over the Cholesky parameters, started from the projected linear-inversion
/// estimate mixed 9:1 with the maximally mixed state.
pub fn mle_estimate(counts: &CountVector, set: &TomographySet) -> Result<MleResult> {
    mle_estimate_with(counts, set, MleOptions::default())
}

pub fn mle_estimate_with(
    counts: &CountVector,
    set: &TomographySet,
    options: MleOptions,
) -> Result<MleResult> {
    counts.check_len(set)?;
    let coef = coefficients(counts)?;
    let d = set.dim();
    let start = {
        let mixed = DensityMatrix::maximally_mixed(set.n_qubits())?;
        // all-zero frequencies have no trace to normalize; start from I/d
        match linear_inversion(counts, set).and_then(|li| project_to_physical(&li)) {
            Ok(projected) => DensityMatrix::mixture(&[(0.9, &projected), (0.1, &mixed)])?,
            Err(_) => mixed,
        }
    };
    let mut params = CholeskyParams::from_state(&start)?;
    let mut current = evaluate(&coef, set, &params)
        .ok_or_else(|| invalid("likelihood undefined at the starting point"))?;

    // BFGS approximation of the inverse negative Hessian
    let n = params.values.len();
    let identity = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut h_inv = identity.clone();
    let mut converged = false;
    let mut iterations = 0;
    let mut gradient_norm = norm(&current.gradient);
    let mut stationary = 0;
    while iterations < options.max_iterations {
        if gradient_norm < options.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let g = nalgebra::DVector::from_column_slice(&current.gradient);
        let mut direction = &h_inv * &g;
        let mut slope = g.dot(&direction);
        if !(slope > 0.0) {
            h_inv = identity.clone();
            direction = g.clone();
            slope = g.dot(&g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-20 {
            let trial = CholeskyParams {
                values: params
                    .values
                    .iter()
                    .zip(direction.iter())
                    .map(|(x, p)| x + step * p)
                    .collect(),
                dim: d,
            };
            match evaluate(&coef, set, &trial) {
                Some(e) if e.value >= current.value + 1e-4 * step * slope => {
                    accepted = Some((trial, e));
                    break;
                }
                _ => step *= 0.5,
            }
        }
        let Some((trial, next)) = accepted else {
            if h_inv == identity {
                break;
            }
            h_inv = identity.clone();
            continue;
        };
        let s_vec = nalgebra::DVector::from_iterator(
            n,
            trial.values.iter().zip(&params.values).map(|(a, b)| a - b),
        );
        let y_vec = nalgebra::DVector::from_iterator(
            n,
            current
                .gradient
                .iter()
                .zip(&next.gradient)
                .map(|(a, b)| a - b),
        );
        let sy = s_vec.dot(&y_vec);
        if sy > 1e-12 * s_vec.norm() * y_vec.norm() {
            let rho_k = 1.0 / sy;
            let left = &identity - (&s_vec * y_vec.transpose()) * rho_k;
            let right = &identity - (&y_vec * s_vec.transpose()) * rho_k;
            h_inv = &left * &h_inv * &right + (&s_vec * s_vec.transpose()) * rho_k;
        }
        let gain = next.value - current.value;
        params = trial;
        current = next;
        gradient_norm = norm(&current.gradient);
        if gain <= options.stall_tolerance * current.value.abs() {
            stationary += 1;
            if stationary >= options.stall_iterations {
                converged = true;
                break;
            }
        } else {
            stationary = 0;
        }
    }
    if !converged && gradient_norm < options.gradient_tolerance {
        converged = true;
    }
    Ok(MleResult {
        state: params.state()?,
        log_likelihood: current.value,
        iterations,
        converged,
        gradient_norm,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{MeasurementBackend, PhotonBudgetConfig};
    use crate::qcore::{fidelity, PureState};
    use crate::sqt::set::{acquire_counts, CountEntry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = PureState::haar_random(2, &mut rng).density_matrix();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let rho = DensityMatrix::mixture(&[(0.6, &a), (0.4, &mixed)]).unwrap();
        let p = CholeskyParams::from_state(&rho).unwrap();
        assert_eq!(p.values.len(), 16);
        assert!((p.state().unwrap().elements() - rho.elements()).norm() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = TomographySet::standard(2).unwrap();
        let rho = PureState::haar_random(2, &mut rng).density_matrix();
        let mut b = MeasurementBackend::new(
            rho,
            PhotonBudgetConfig::per_expectation(40.0).unwrap(),
            None,
            5,
        )
        .unwrap();
        let counts = acquire_counts(&mut b, &set).unwrap();
        let coef = coefficients(&counts).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let x = CholeskyParams::from_state(&mixed).unwrap();
        let x = CholeskyParams::new(
            x.values
                .iter()
                .map(|v| v + 0.1 * (rng.random::<f64>() - 0.5))
                .collect(),
            4,
        )
        .unwrap();
        let e = evaluate(&coef, &set, &x).unwrap();
        let h = 1e-6;
        for i in 0..16 {
            let mut up = x.clone();
            up.values[i] += h;
            let mut down = x.clone();
            down.values[i] -= h;
            let fd = (evaluate(&coef, &set, &up).unwrap().value
                - evaluate(&coef, &set, &down).unwrap().value)
                / (2.0 * h);
            assert!(
                (fd - e.gradient[i]).abs() < 1e-6,
                "param {i}: {fd} vs {}",
                e.gradient[i]
            );
        }
    }

    use rand::Rng;

    #[test]
    fn exact_probabilities_recover_pure_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2] {
            let set = TomographySet::standard(n).unwrap();
            for _ in 0..3 {
                let psi = PureState::haar_random(n, &mut rng).density_matrix();
                let mut b = MeasurementBackend::ideal(psi.clone());
                let r = mle_estimate(&acquire_counts(&mut b, &set).unwrap(), &set).unwrap();
                let f = fidelity(&r.state, &psi).unwrap();
                assert!(
                    f >= 1.0 - 1e-6,
                    "n={n}: {f} after {} iterations",
                    r.iterations
                );
            }
        }
    }

    #[test]
    fn single_nonempty_projector_still_physical() {
        let set = TomographySet::standard(1).unwrap();
        let mut entries = vec![CountEntry::counted(0, 0).unwrap(); 4];
        entries[2] = CountEntry::counted(3, 3).unwrap();
        let r = mle_estimate(&CountVector { entries }, &set).unwrap();
        assert!(r.state.eigenvalues().iter().all(|&v| v >= -1e-10));
        assert!((r.state.trace() - 1.0).abs() < 1e-10);
        let none = CountVector {
            entries: vec![CountEntry::counted(0, 0).unwrap(); 4],
        };
        assert!(mle_estimate(&none, &set).is_err());
    }

    #[test]
    fn likelihood_dominates_projected_inversion() {
        let set = TomographySet::standard(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..50 {
            let psi = PureState::haar_random(1, &mut rng).density_matrix();
            let mut b = MeasurementBackend::new(
                psi,
                PhotonBudgetConfig::per_expectation(7.0).unwrap(),
                None,
                seed,
            )
            .unwrap();
            let counts = acquire_counts(&mut b, &set).unwrap();
            let r = mle_estimate(&counts, &set).unwrap();
            let li = project_to_physical(&linear_inversion(&counts, &set).unwrap()).unwrap();
            let l_li = log_likelihood(&counts, &set, &li).unwrap();
            assert!(
                r.log_likelihood >= l_li - 1e-12,
                "{} < {l_li}",
                r.log_likelihood
            );
        }
    }

    #[test]
    fn all_zero_counts_start_from_mixed() {
        for n in [1, 2] {
            let set = TomographySet::standard(n).unwrap();
            let zeros = CountVector {
                entries: vec![CountEntry::counted(0, 3).unwrap(); set.len()],
            };
            let r = mle_estimate(&zeros, &set).unwrap();
            assert!(r.state.eigenvalues()[0] >= -1e-10);
            assert!((r.state.trace() - 1.0).abs() < 1e-10);
        }
    }
}
