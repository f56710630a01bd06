//! Fixed-size 2x2 helpers.

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

#[inline]
pub fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[inline]
pub fn norm(v: &Vec2) -> f64 {
    v[0].hypot(v[1])
}

#[inline]
pub fn det_cols(a: &Vec2, b: &Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn scale(m: &Mat2, s: f64) -> Mat2 {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

pub fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).abs());
        }
    }
    d
}

pub fn max_abs(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Eigen-decomposition of a symmetric 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    /// Eigenvalues in descending order.
    pub values: [f64; 2],
    /// Unit eigenvectors matching `values`, first nonzero component positive.
    pub vectors: [Vec2; 2],
}

/// Symmetric eigen-decomposition using the symmetrized input `(m + m^T) / 2`.
pub fn sym_eigen(m: &Mat2) -> SymEigen {
    let a = m[0][0];
    let c = m[1][1];
    let b = 0.5 * (m[0][1] + m[1][0]);
    let mean = 0.5 * (a + c);
    let half_gap = 0.5 * (a - c);
    let r = half_gap.hypot(b);
    let theta = if b == 0.0 {
        if a >= c {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        }
    } else {
        0.5 * (2.0 * b).atan2(a - c)
    };
    let (s, co) = theta.sin_cos();
    SymEigen {
        values: [mean + r, mean - r],
        vectors: [canonical_sign([co, s]), canonical_sign([-s, co])],
    }
}

fn canonical_sign(v: Vec2) -> Vec2 {
    let lead = if v[0].abs() > 1e-300 { v[0] } else { v[1] };
    if lead < 0.0 {
        [-v[0], -v[1]]
    } else {
        v
    }
}
