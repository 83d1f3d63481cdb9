use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QsaError, Result};
use crate::qsim::state::StateVector;

const Z0: Complex64 = Complex64::new(0.0, 0.0);
const Z1: Complex64 = Complex64::new(1.0, 0.0);

/// Gate alphabet. Controlled wraps any member, adding one control qubit;
/// its matrix controls the wrapped matrix including global phase factors,
/// which matters for controlled-Rz.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateKind {
    H,
    X,
    S,
    Sdg,
    Rx,
    Ry,
    Rz,
    Rxx,
    Cx,
    Cz,
    Controlled(Box<GateKind>),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::S | GateKind::Sdg => 1,
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Rxx | GateKind::Cx | GateKind::Cz => 2,
            GateKind::Controlled(inner) => 1 + inner.arity(),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rxx => 1,
            GateKind::Controlled(inner) => inner.param_count(),
            _ => 0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            GateKind::H => "H".into(),
            GateKind::X => "X".into(),
            GateKind::S => "S".into(),
            GateKind::Sdg => "Sdg".into(),
            GateKind::Rx => "Rx".into(),
            GateKind::Ry => "Ry".into(),
            GateKind::Rz => "Rz".into(),
            GateKind::Rxx => "Rxx".into(),
            GateKind::Cx => "CX".into(),
            GateKind::Cz => "CZ".into(),
            GateKind::Controlled(inner) => format!("C-{}", inner.name()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("C-") {
            return Ok(GateKind::Controlled(Box::new(Self::parse(rest)?)));
        }
        Ok(match s {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "S" => GateKind::S,
            "Sdg" => GateKind::Sdg,
            "Rx" => GateKind::Rx,
            "Ry" => GateKind::Ry,
            "Rz" => GateKind::Rz,
            "Rxx" => GateKind::Rxx,
            "CX" => GateKind::Cx,
            "CZ" => GateKind::Cz,
            other => return Err(QsaError::Validation(format!("unknown gate kind {other:?}"))),
        })
    }

    /// Dense matrix, row-major, dimension 2^arity. Local basis convention:
    /// the first target is the most significant local index bit.
    pub fn matrix(&self, params: &[f64]) -> Vec<Complex64> {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            GateKind::H => vec![
                Complex64::new(s2, 0.0),
                Complex64::new(s2, 0.0),
                Complex64::new(s2, 0.0),
                Complex64::new(-s2, 0.0),
            ],
            GateKind::X => vec![Z0, Z1, Z1, Z0],
            GateKind::S => vec![Z1, Z0, Z0, Complex64::new(0.0, 1.0)],
            GateKind::Sdg => vec![Z1, Z0, Z0, Complex64::new(0.0, -1.0)],
            GateKind::Rx => {
                let (c, s) = ((params[0] / 2.0).cos(), (params[0] / 2.0).sin());
                vec![
                    Complex64::new(c, 0.0),
                    Complex64::new(0.0, -s),
                    Complex64::new(0.0, -s),
                    Complex64::new(c, 0.0),
                ]
            }
            GateKind::Ry => {
                let (c, s) = ((params[0] / 2.0).cos(), (params[0] / 2.0).sin());
                vec![
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ]
            }
            GateKind::Rz => {
                // Rz(t) = diag(e^{-it/2}, e^{+it/2})
                vec![
                    Complex64::from_polar(1.0, -params[0] / 2.0),
                    Z0,
                    Z0,
                    Complex64::from_polar(1.0, params[0] / 2.0),
                ]
            }
            GateKind::Rxx => {
                let (c, s) = ((params[0] / 2.0).cos(), (params[0] / 2.0).sin());
                let cc = Complex64::new(c, 0.0);
                let ms = Complex64::new(0.0, -s);
                let mut m = vec![Z0; 16];
                m[0] = cc;
                m[3] = ms;
                m[5] = cc;
                m[6] = ms;
                m[9] = ms;
                m[10] = cc;
                m[12] = ms;
                m[15] = cc;
                m
            }
            GateKind::Cx => {
                let mut m = vec![Z0; 16];
                m[0] = Z1;
                m[5] = Z1;
                m[11] = Z1;
                m[14] = Z1;
                m
            }
            GateKind::Cz => {
                let mut m = vec![Z0; 16];
                m[0] = Z1;
                m[5] = Z1;
                m[10] = Z1;
                m[15] = -Z1;
                m
            }
            GateKind::Controlled(inner) => {
                let sub = inner.matrix(params);
                let half = 1 << inner.arity();
                let dim = 2 * half;
                let mut m = vec![Z0; dim * dim];
                for i in 0..half {
                    m[i * dim + i] = Z1;
                }
                for r in 0..half {
                    for c in 0..half {
                        m[(half + r) * dim + (half + c)] = sub[r * half + c];
                    }
                }
                m
            }
        }
    }
}

/// One gate instance: kind, target qubits and rotation angles in radians.
/// For controlled kinds the control qubits come first in `targets`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, params: Vec<f64>) -> Self {
        Self {
            kind,
            targets,
            params,
        }
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q], vec![])
    }
    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q], vec![])
    }
    pub fn s(q: usize) -> Self {
        Self::new(GateKind::S, vec![q], vec![])
    }
    pub fn sdg(q: usize) -> Self {
        Self::new(GateKind::Sdg, vec![q], vec![])
    }
    pub fn rx(q: usize, t: f64) -> Self {
        Self::new(GateKind::Rx, vec![q], vec![t])
    }
    pub fn ry(q: usize, t: f64) -> Self {
        Self::new(GateKind::Ry, vec![q], vec![t])
    }
    pub fn rz(q: usize, t: f64) -> Self {
        Self::new(GateKind::Rz, vec![q], vec![t])
    }
    pub fn rxx(a: usize, b: usize, t: f64) -> Self {
        Self::new(GateKind::Rxx, vec![a, b], vec![t])
    }
    pub fn cx(c: usize, t: usize) -> Self {
        Self::new(GateKind::Cx, vec![c, t], vec![])
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a, b], vec![])
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(QsaError::Validation(format!(
                "gate {} expects {} targets, got {}",
                self.kind.name(),
                self.kind.arity(),
                self.targets.len()
            )));
        }
        if self.params.len() != self.kind.param_count() {
            return Err(QsaError::Validation(format!(
                "gate {} expects {} params, got {}",
                self.kind.name(),
                self.kind.param_count(),
                self.params.len()
            )));
        }
        for (i, &t) in self.targets.iter().enumerate() {
            if t >= n {
                return Err(QsaError::Validation(format!(
                    "gate {} target {} out of range for {} qubits",
                    self.kind.name(),
                    t,
                    n
                )));
            }
            if self.targets[..i].contains(&t) {
                return Err(QsaError::Validation(format!(
                    "gate {} repeats target {}",
                    self.kind.name(),
                    t
                )));
            }
        }
        Ok(())
    }

    /// Wrap in a controlled form with `control` prepended to the targets.
    pub fn controlled(&self, control: usize) -> Self {
        let mut targets = Vec::with_capacity(self.targets.len() + 1);
        targets.push(control);
        targets.extend_from_slice(&self.targets);
        Self {
            kind: GateKind::Controlled(Box::new(self.kind.clone())),
            targets,
            params: self.params.clone(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut out = self.clone();
        fn invert(kind: &mut GateKind, params: &mut [f64]) {
            match kind {
                GateKind::S => *kind = GateKind::Sdg,
                GateKind::Sdg => *kind = GateKind::S,
                GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rxx => {
                    params[0] = -params[0];
                }
                GateKind::Controlled(inner) => invert(inner, params),
                _ => {}
            }
        }
        invert(&mut out.kind, &mut out.params);
        out
    }

    /// Apply to a state in place. Uses specialized kernels for the common
    /// kinds and a generic dense kernel otherwise.
    pub fn apply_to(&self, state: &mut StateVector) {
        debug_assert!(self.targets.iter().all(|&t| t < state.n()));
        let n = state.n();
        let amps = state.amps_mut();
        match (&self.kind, self.targets.as_slice()) {
            (GateKind::X, [q]) => kernel_x(amps, *q),
            (GateKind::Rz | GateKind::S | GateKind::Sdg, [q]) => {
                let m = self.kind.matrix(&self.params);
                kernel_phase(amps, *q, m[0], m[3]);
            }
            (GateKind::H | GateKind::Rx | GateKind::Ry, [q]) => {
                let m = self.kind.matrix(&self.params);
                kernel_1q(amps, *q, &m);
            }
            (GateKind::Cz, [a, b]) => kernel_cz(amps, *a, *b),
            (GateKind::Cx, [c, t]) => kernel_cx(amps, *c, *t),
            (GateKind::Controlled(inner), [c, q]) if inner.arity() == 1 => {
                let m = inner.matrix(&self.params);
                match **inner {
                    GateKind::Rz | GateKind::S | GateKind::Sdg => {
                        kernel_cphase(amps, *c, *q, m[0], m[3])
                    }
                    _ => kernel_c1q(amps, *c, *q, &m),
                }
            }
            (GateKind::Controlled(inner), [c, a, b]) if **inner == GateKind::Cz => {
                kernel_ccz(amps, *c, *a, *b)
            }
            _ => {
                let m = self.kind.matrix(&self.params);
                kernel_generic(amps, n, &self.targets, &m);
            }
        }
    }
}

fn kernel_1q(amps: &mut [Complex64], q: usize, m: &[Complex64]) {
    let step = 1usize << q;
    let mut i = 0;
    while i < amps.len() {
        for off in i..i + step {
            let a = amps[off];
            let b = amps[off + step];
            amps[off] = m[0] * a + m[1] * b;
            amps[off + step] = m[2] * a + m[3] * b;
        }
        i += 2 * step;
    }
}

fn kernel_x(amps: &mut [Complex64], q: usize) {
    let step = 1usize << q;
    let mut i = 0;
    while i < amps.len() {
        for off in i..i + step {
            amps.swap(off, off + step);
        }
        i += 2 * step;
    }
}

fn kernel_phase(amps: &mut [Complex64], q: usize, z0: Complex64, z1: Complex64) {
    let mask = 1usize << q;
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= if i & mask == 0 { z0 } else { z1 };
    }
}

fn kernel_cz(amps: &mut [Complex64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

fn kernel_cx(amps: &mut [Complex64], c: usize, t: usize) {
    let cm = 1usize << c;
    let tm = 1usize << t;
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

fn kernel_cphase(amps: &mut [Complex64], c: usize, q: usize, z0: Complex64, z1: Complex64) {
    let cm = 1usize << c;
    let qm = 1usize << q;
    for (i, a) in amps.iter_mut().enumerate() {
        if i & cm != 0 {
            *a *= if i & qm == 0 { z0 } else { z1 };
        }
    }
}

fn kernel_c1q(amps: &mut [Complex64], c: usize, q: usize, m: &[Complex64]) {
    let cm = 1usize << c;
    let qm = 1usize << q;
    for i in 0..amps.len() {
        if i & cm != 0 && i & qm == 0 {
            let j = i | qm;
            let a = amps[i];
            let b = amps[j];
            amps[i] = m[0] * a + m[1] * b;
            amps[j] = m[2] * a + m[3] * b;
        }
    }
}

fn kernel_ccz(amps: &mut [Complex64], c: usize, a: usize, b: usize) {
    let mask = (1usize << c) | (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

/// Dense kernel entry point for multi-qubit matrices built outside the
/// gate alphabet (the QPE phase-register QFT).
pub(crate) fn apply_dense(amps: &mut [Complex64], n: usize, targets: &[usize], m: &[Complex64]) {
    kernel_generic(amps, n, targets, m);
}

/// Dense kernel for arbitrary target sets. targets[0] is the most
/// significant local bit of the gate matrix.
fn kernel_generic(amps: &mut [Complex64], n: usize, targets: &[usize], m: &[Complex64]) {
    let w = targets.len();
    let dim = 1usize << w;
    let tmask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let mut local_masks = vec![0usize; dim];
    for (l, lm) in local_masks.iter_mut().enumerate() {
        for (j, &t) in targets.iter().enumerate() {
            if l >> (w - 1 - j) & 1 == 1 {
                *lm |= 1 << t;
            }
        }
    }
    let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
    for base in 0..1usize << n {
        if base & tmask != 0 {
            continue;
        }
        for l in 0..dim {
            gathered[l] = amps[base | local_masks[l]];
        }
        for r in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, g) in gathered.iter().enumerate() {
                acc += m[r * dim + c] * g;
            }
            amps[base | local_masks[r]] = acc;
        }
    }
}

impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            kind: String,
            targets: &'a [usize],
            params: &'a [f64],
        }
        Repr {
            kind: self.kind.name(),
            targets: &self.targets,
            params: &self.params,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            kind: String,
            targets: Vec<usize>,
            params: Vec<f64>,
        }
        let r = Repr::deserialize(deserializer)?;
        let kind = GateKind::parse(&r.kind).map_err(D::Error::custom)?;
        Ok(Gate::new(kind, r.targets, r.params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for kind in [
            GateKind::H,
            GateKind::Rz,
            GateKind::Cx,
            GateKind::Controlled(Box::new(GateKind::Rz)),
            GateKind::Controlled(Box::new(GateKind::Cz)),
        ] {
            assert_eq!(GateKind::parse(&kind.name()).unwrap(), kind);
        }
    }

    #[test]
    fn rz_matrix_convention() {
        let m = GateKind::Rz.matrix(&[std::f64::consts::PI]);
        assert!((m[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((m[3] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn controlled_x_equals_cx() {
        let cx = GateKind::Cx.matrix(&[]);
        let ctrl_x = GateKind::Controlled(Box::new(GateKind::X)).matrix(&[]);
        for (a, b) in cx.iter().zip(&ctrl_x) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(1);
        Gate::h(0).apply_to(&mut s);
        let v = 0.5f64.sqrt();
        assert!((s.amps()[0].re - v).abs() < 1e-12);
        assert!((s.amps()[1].re - v).abs() < 1e-12);
    }

    #[test]
    fn specialized_kernels_match_generic() {
        use crate::rng::SeedStream;
        let mut rng = SeedStream::from_u64(9, "kernels");
        let n = 4;
        let gates = vec![
            Gate::h(2),
            Gate::x(1),
            Gate::s(0),
            Gate::sdg(3),
            Gate::rx(1, 0.7),
            Gate::ry(2, -1.1),
            Gate::rz(0, 2.3),
            Gate::rxx(0, 2, 0.9),
            Gate::cx(3, 1),
            Gate::cz(0, 2),
            Gate::rz(1, 0.4).controlled(3),
            Gate::rx(2, 1.9).controlled(0),
            Gate::cz(1, 3).controlled(0),
        ];
        let mut amps = Vec::new();
        for _ in 0..1 << n {
            amps.push(Complex64::new(rng.next_normal(), rng.next_normal()));
        }
        let mut s = StateVector::from_amps(n, amps).unwrap();
        s.normalize();
        for g in gates {
            let mut fast = s.clone();
            g.apply_to(&mut fast);
            let mut slow = s.clone();
            let m = g.kind.matrix(&g.params);
            kernel_generic(slow.amps_mut(), n, &g.targets, &m);
            for (a, b) in fast.amps().iter().zip(slow.amps()) {
                assert!((a - b).norm() < 1e-12, "mismatch for {}", g.kind.name());
            }
            s = fast;
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }
}
