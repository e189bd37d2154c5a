//! Pointwise small-matrix algebra: determinants, inverses and the Cauchy action.

pub type Mat3 = [[f64; 3]; 3];
pub type Vec3 = [f64; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Levi-Civita symbol on indices `0..3`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn column(m: &Mat3, i: usize) -> Vec3 {
    [m[0][i], m[1][i], m[2][i]]
}

pub fn det3(m: &Mat3) -> f64 {
    dot(column(m, 0), cross(column(m, 1), column(m, 2)))
}

pub fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn matvec(a: &Mat3, v: Vec3) -> Vec3 {
    [dot(a[0], v), dot(a[1], v), dot(a[2], v)]
}

/// Adjugate (transposed cofactor matrix), so `adj(M) M = det(M) I`.
pub fn adjugate3(m: &Mat3) -> Mat3 {
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r1, r2) = ((j + 1) % 3, (j + 2) % 3);
            let (c1, c2) = ((i + 1) % 3, (i + 2) % 3);
            a[i][j] = m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
        }
    }
    a
}

/// `(M, det M, M⁻¹)` for a 2×2 or 3×3 matrix embedded in `Mat3`.
///
/// In 2-d only the upper-left block is used and the result is padded with the
/// identity.
pub fn det_inverse(m: &Mat3, dim: usize) -> (f64, Mat3) {
    if dim == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let mut q = IDENTITY;
        q[0][0] = m[1][1] / det;
        q[0][1] = -m[0][1] / det;
        q[1][0] = -m[1][0] / det;
        q[1][1] = m[0][0] / det;
        return (det, q);
    }
    let det = det3(m);
    let mut q = adjugate3(m);
    for row in &mut q {
        for x in row.iter_mut() {
            *x /= det;
        }
    }
    (det, q)
}

/// `𝓒(q, M) = det(M) M⁻¹ q`, evaluated through the quadratic form
/// `𝓒_k = ½ ε_{ijk} det(M_{·i}, M_{·j}, q)`.
///
/// The form is defined for every `M`, singular ones included.
pub fn cauchy_action(q: Vec3, m: &Mat3) -> Vec3 {
    let cols = [column(m, 0), column(m, 1), column(m, 2)];
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    s += e * dot(cross(cols[i], cols[j]), q);
                }
            }
        }
        *o = 0.5 * s;
    }
    out
}

/// Two-dimensional Cauchy action on a scalar: `det(M) q`.
pub fn cauchy_action_2d(q: f64, m: &[[f64; 2]; 2]) -> f64 {
    (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * q
}

pub fn frobenius(m: &Mat3) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative residuals of the three defining identities of the Cauchy action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyResiduals {
    /// `𝓒(q, MN) = 𝓒(𝓒(q, M), N)`.
    pub cyc: f64,
    /// `𝓒(q, I) = q`.
    pub idd: f64,
    /// `𝓒(q, I + N) = (1 + tr N) q − N q + 𝓒(q, N)`.
    pub nid: f64,
}

impl CauchyResiduals {
    pub fn max(&self) -> f64 {
        self.cyc.max(self.idd).max(self.nid)
    }
}

fn rel(a: Vec3, b: Vec3, scale: f64) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let e = dot(d, d).sqrt();
    if e == 0.0 {
        0.0
    } else {
        e / scale
    }
}

/// Residuals measured against the natural size of each side:
/// `|q| ‖M‖² ‖N‖²`, `|q|` and `|q| (1 + ‖N‖)²` (norms floored at 1).
pub fn cauchy_identity_residuals(q: Vec3, m: &Mat3, n: &Mat3) -> CauchyResiduals {
    let qn = dot(q, q).sqrt();
    let (mn, nn) = (frobenius(m).max(1.0), frobenius(n).max(1.0));
    let cyc = rel(cauchy_action(q, &matmul(m, n)), cauchy_action(cauchy_action(q, m), n), qn * mn * mn * nn * nn);
    let idd = rel(cauchy_action(q, &IDENTITY), q, qn);
    let mut ipn = *n;
    let mut tr = 0.0;
    for i in 0..3 {
        ipn[i][i] += 1.0;
        tr += n[i][i];
    }
    let nq = matvec(n, q);
    let cn = cauchy_action(q, n);
    let rhs = [0, 1, 2].map(|k| (1.0 + tr) * q[k] - nq[k] + cn[k]);
    let nid = rel(cauchy_action(q, &ipn), rhs, qn * (1.0 + nn) * (1.0 + nn));
    CauchyResiduals { cyc, idd, nid }
}
