use super::BasisError;

/// Quadrature on a reference element: the unit segment [0, 1] (`P = f64`) or
/// the unit right triangle with vertices (0,0), (1,0), (0,1) (`P = [f64; 2]`).
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl<P: Copy> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Highest triangle exactness we hand out; beyond it the collapsed rule gets
/// large enough that callers are probably doing something wrong.
pub const MAX_TRIANGLE_DEGREE: usize = 40;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton on P_n.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * z * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss rule on [0, 1] with ⌈(deg+1)/2⌉ points.
pub fn quad_segment(deg: usize) -> QuadratureRule<f64> {
    let n = (deg + 2) / 2;
    let (x, w) = gauss_legendre(n);
    QuadratureRule {
        points: x.iter().map(|&z| 0.5 * (1.0 + z)).collect(),
        weights: w.iter().map(|&v| 0.5 * v).collect(),
        exactness: 2 * n - 1,
    }
}

/// Collapsed (Duffy) product rule: ξ = s, η = (1-s)t with Jacobian (1-s).
/// The s-direction sees one extra degree from the Jacobian.
pub fn quad_triangle(deg: usize) -> Result<QuadratureRule<[f64; 2]>, BasisError> {
    if deg > MAX_TRIANGLE_DEGREE {
        return Err(BasisError::QuadratureDegree {
            deg,
            max: MAX_TRIANGLE_DEGREE,
        });
    }
    let qs = quad_segment(deg + 1);
    let qt = quad_segment(deg);
    let mut points = Vec::with_capacity(qs.len() * qt.len());
    let mut weights = Vec::with_capacity(qs.len() * qt.len());
    for (s, ws) in qs.iter() {
        for (t, wt) in qt.iter() {
            points.push([s, (1.0 - s) * t]);
            weights.push(ws * wt * (1.0 - s));
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        exactness: qt.exactness.min(qs.exactness - 1),
    })
}
