use crate::circuit::Gate;
use crate::linalg::{c, Matrix, I, ONE, ZERO};
use num_complex::Complex64;

fn rotation(gate: Gate) -> Option<[Complex64; 4]> {
    let (ct, st) = match gate {
        Gate::Rx(t) | Gate::Ry(t) | Gate::Rz(t) => ((t / 2.0).cos(), (t / 2.0).sin()),
        _ => return None,
    };
    Some(match gate {
        Gate::Rx(_) => [c(ct, 0.0), c(0.0, -st), c(0.0, -st), c(ct, 0.0)],
        Gate::Ry(_) => [c(ct, 0.0), c(-st, 0.0), c(st, 0.0), c(ct, 0.0)],
        _ => [c(ct, -st), ZERO, ZERO, c(ct, st)],
    })
}

/// Unitary of a gate. For two-qubit gates the first listed qubit (the
/// control) is the least-significant bit of the matrix index.
pub fn gate_matrix(gate: Gate) -> Matrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match gate {
        Gate::I => Matrix::identity(2),
        Gate::X => Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]),
        Gate::Y => Matrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
        Gate::Z => Matrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]),
        Gate::H => Matrix::from_real(2, &[h, h, h, -h]),
        Gate::S => Matrix::from_rows(&[&[ONE, ZERO], &[ZERO, I]]),
        Gate::Sdg => Matrix::from_rows(&[&[ONE, ZERO], &[ZERO, -I]]),
        Gate::Rx(_) | Gate::Ry(_) | Gate::Rz(_) => {
            let m = rotation(gate).unwrap();
            Matrix::from_rows(&[&m[..2], &m[2..]])
        }
        Gate::Cnot => {
            let mut m = Matrix::zeros(4);
            for (r, col) in [(0, 0), (3, 1), (2, 2), (1, 3)] {
                m[(r, col)] = ONE;
            }
            m
        }
        Gate::Cz => {
            let mut m = Matrix::identity(4);
            m[(3, 3)] = c(-1.0, 0.0);
            m
        }
    }
}

fn apply_2x2(v: &mut [Complex64], q: usize, m: [Complex64; 4]) {
    let bit = 1usize << q;
    for i in 0..v.len() {
        if i & bit == 0 {
            let a = v[i];
            let b = v[i | bit];
            v[i] = m[0] * a + m[1] * b;
            v[i | bit] = m[2] * a + m[3] * b;
        }
    }
}

fn phase_where(v: &mut [Complex64], mask: usize, phase: Complex64) {
    for (i, a) in v.iter_mut().enumerate() {
        if i & mask == mask {
            *a *= phase;
        }
    }
}

/// Applies a gate to a vector indexed by packed bits. With `conj` the
/// complex conjugate of the unitary is applied instead, which is what the
/// column half of a vectorized density matrix needs.
pub(crate) fn apply_gate_vec(v: &mut [Complex64], gate: Gate, qubits: &[usize], conj: bool) {
    let cj = |z: Complex64| if conj { z.conj() } else { z };
    match gate {
        Gate::I => {}
        Gate::X => {
            let bit = 1usize << qubits[0];
            for i in 0..v.len() {
                if i & bit == 0 {
                    v.swap(i, i | bit);
                }
            }
        }
        Gate::Y => apply_2x2(v, qubits[0], [ZERO, cj(-I), cj(I), ZERO]),
        Gate::Z => phase_where(v, 1 << qubits[0], c(-1.0, 0.0)),
        Gate::S => phase_where(v, 1 << qubits[0], cj(I)),
        Gate::Sdg => phase_where(v, 1 << qubits[0], cj(-I)),
        Gate::H => {
            let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            apply_2x2(v, qubits[0], [h, h, h, -h]);
        }
        Gate::Rx(_) | Gate::Ry(_) | Gate::Rz(_) => {
            let m = rotation(gate).unwrap();
            apply_2x2(v, qubits[0], [cj(m[0]), cj(m[1]), cj(m[2]), cj(m[3])]);
        }
        Gate::Cnot => {
            let cb = 1usize << qubits[0];
            let tb = 1usize << qubits[1];
            for i in 0..v.len() {
                if i & cb != 0 && i & tb == 0 {
                    v.swap(i, i | tb);
                }
            }
        }
        Gate::Cz => phase_where(v, (1 << qubits[0]) | (1 << qubits[1]), c(-1.0, 0.0)),
    }
}
