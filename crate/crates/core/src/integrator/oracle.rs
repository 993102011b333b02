//! Verification oracle: piecewise-constant Schrödinger-picture propagation.
//!
//! The full Hamiltonian `H₀ + W(t)` is assembled as a dense matrix from spin
//! operators on every slice, frozen at the slice midpoint, and applied through
//! its exponential summed as a Taylor series to machine precision. Nothing here
//! goes through the RK4 path or the interaction-picture right-hand side.

use num_complex::Complex64;

use crate::chain::ChainParams;
use crate::drive::Pulse;
use crate::error::{Error, Result};
use crate::state::{Picture, StateVector};

/// Largest carrier rotation allowed within one slice, radians.
pub const MAX_ROTATION_PER_SLICE: f64 = 1e-2;

const UNITARITY_TOLERANCE: f64 = 1e-9;

/// `⟨x|I^z_q|x⟩`: +½ for the ground state (bit 0).
fn iz(x: usize, q: usize) -> f64 {
    if (x >> q) & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Diagonal of `H₀ = −Σ ω_q I^z_q − 2J Σ I^z_q I^z_{q+1} − 2J′ Σ I^z_q I^z_{q+2}`.
fn static_diagonal(params: &ChainParams) -> Vec<f64> {
    let n = params.n_spins();
    (0..params.dim())
        .map(|x| {
            let mut h = 0.0;
            for q in 0..n {
                h -= params.larmor()[q] * iz(x, q);
            }
            for q in 0..n.saturating_sub(1) {
                h -= 2.0 * params.j1() * iz(x, q) * iz(x, q + 1);
            }
            for q in 0..n.saturating_sub(2) {
                h -= 2.0 * params.j2() * iz(x, q) * iz(x, q + 2);
            }
            h
        })
        .collect()
}

/// Dense `H(t)` in row-major order.
fn hamiltonian(params: &ChainParams, diag: &[f64], pulse: &Pulse, t: f64, h: &mut [Complex64]) {
    let dim = diag.len();
    h.iter_mut().for_each(|e| *e = Complex64::new(0.0, 0.0));
    for (x, &e) in diag.iter().enumerate() {
        h[x * dim + x] = Complex64::new(e, 0.0);
    }
    let z = Complex64::from_polar(1.0, pulse.carrier() * t + pulse.phase());
    let amp = -0.5 * params.rabi();
    for q in 0..params.n_spins() {
        for k in 0..dim {
            if (k >> q) & 1 == 1 {
                // I⁺_q |k⟩ = |k with spin q lowered to ground⟩
                let m = k ^ (1 << q);
                h[m * dim + k] += amp * z;
                h[k * dim + m] += amp * z.conj();
            }
        }
    }
}

fn matvec(h: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
    let dim = v.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &h[r * dim..(r + 1) * dim];
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// `ψ ← exp(−i H dt) ψ` by Taylor series.
fn apply_exponential(h: &[Complex64], dt: f64, psi: &mut [Complex64], term: &mut [Complex64], next: &mut [Complex64]) {
    term.copy_from_slice(psi);
    let factor = Complex64::new(0.0, -dt);
    for order in 1..200 {
        matvec(h, term, next);
        let scale = factor / order as f64;
        let mut size = 0.0;
        for (t, n) in term.iter_mut().zip(next.iter()) {
            *t = n * scale;
            size += t.norm_sqr();
        }
        for (p, t) in psi.iter_mut().zip(term.iter()) {
            *p += t;
        }
        if size < 1e-34 {
            break;
        }
    }
}

/// Propagates `d0` (interaction picture, at global time `t_start`) through
/// `pulse` using `n_slices` constant-Hamiltonian slices. Returns the final
/// interaction-picture state.
pub fn oracle_evolve(
    params: &ChainParams,
    d0: &StateVector,
    t_start: f64,
    pulse: &Pulse,
    n_slices: usize,
) -> Result<StateVector> {
    d0.expect_picture(Picture::Interaction)?;
    if d0.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            actual: d0.dim(),
        });
    }
    let duration = pulse.duration(params)?;
    if duration == 0.0 {
        return Ok(d0.clone());
    }
    if n_slices == 0 {
        return Err(Error::SliceCountTooSmall("need at least one slice".into()));
    }
    let dt = duration / n_slices as f64;
    let rotation = pulse.carrier().abs() * dt;
    if rotation >= MAX_ROTATION_PER_SLICE {
        return Err(Error::SliceCountTooSmall(format!(
            "carrier rotates {rotation:.3e} rad per slice (limit {MAX_ROTATION_PER_SLICE:e})"
        )));
    }

    let dim = params.dim();
    let diag = static_diagonal(params);
    let phase = |x: usize, t: f64, sign: f64| Complex64::from_polar(1.0, sign * diag[x] * t);

    // into the Schrödinger picture at t_start
    let mut psi: Vec<Complex64> = d0
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(x, a)| a * phase(x, t_start, -1.0))
        .collect();

    let mut h = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut term = vec![Complex64::new(0.0, 0.0); dim];
    let mut next = vec![Complex64::new(0.0, 0.0); dim];
    for s in 0..n_slices {
        let mid = t_start + (s as f64 + 0.5) * dt;
        hamiltonian(params, &diag, pulse, mid, &mut h);
        apply_exponential(&h, dt, &mut psi, &mut term, &mut next);
    }

    let drift = (psi.iter().map(|a| a.norm_sqr()).sum::<f64>() - d0.norm_sqr()).abs();
    if drift > UNITARITY_TOLERANCE {
        return Err(Error::SliceCountTooSmall(format!(
            "unitarity drift {drift:e} after {n_slices} slices"
        )));
    }

    let t_end = t_start + duration;
    let d: Vec<Complex64> = psi
        .iter()
        .enumerate()
        .map(|(x, a)| a * phase(x, t_end, 1.0))
        .collect();
    StateVector::new(d, Picture::Interaction)
}

/// Smallest slice count that respects [`MAX_ROTATION_PER_SLICE`] with the
/// given rotation per slice.
pub fn slices_for(params: &ChainParams, pulse: &Pulse, rotation_per_slice: f64) -> Result<usize> {
    let duration = pulse.duration(params)?;
    Ok(((pulse.carrier().abs() * duration) / rotation_per_slice).ceil().max(1.0) as usize)
}
