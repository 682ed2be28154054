use super::BasisError;

pub const MAX_DEGREE: usize = 4;

/// Value with its two first partial derivatives.
#[derive(Clone, Copy, Debug)]
struct Dual {
    v: f64,
    d: [f64; 2],
}

impl Dual {
    fn cst(v: f64) -> Dual {
        Dual { v, d: [0.0; 2] }
    }
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1]],
        }
    }
    fn scale(self, a: f64) -> Dual {
        Dual {
            v: a * self.v,
            d: [a * self.d[0], a * self.d[1]],
        }
    }
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
        }
    }
}

/// Exponent pairs (p, q) ordered by total degree.
fn index_pairs(k: usize) -> Vec<(usize, usize)> {
    let mut m = Vec::new();
    for d in 0..=k {
        for q in 0..=d {
            m.push((d - q, q));
        }
    }
    m
}

/// L²-orthonormal Dubiner basis of P^k on the unit right triangle.
///
/// With s = 1 - η and z = 2ξ - s, the p-factor is the scaled Legendre
/// polynomial s^p P_p(z/s), which stays polynomial at the collapsed vertex.
/// The q-factor is the Jacobi polynomial P_q^{(2p+1,0)}(2η - 1).
/// Orthogonality is analytic; norms are fixed once by exact quadrature.
#[derive(Clone, Debug)]
pub struct TriangleBasis {
    k: usize,
    pairs: Vec<(usize, usize)>,
    norm: Vec<f64>,
}

impl TriangleBasis {
    pub fn new(k: usize) -> Result<Self, BasisError> {
        if k > MAX_DEGREE {
            return Err(BasisError::Degree { k, max: MAX_DEGREE });
        }
        let mut b = TriangleBasis {
            k,
            pairs: index_pairs(k),
            norm: vec![1.0; (k + 1) * (k + 2) / 2],
        };
        let q = super::quad_triangle(2 * k)?;
        let mut sq = vec![0.0; b.dim()];
        for (p, w) in q.iter() {
            for (acc, v) in sq.iter_mut().zip(b.eval(p)) {
                *acc += w * v * v;
            }
        }
        b.norm = sq.iter().map(|x| x.sqrt().recip()).collect();
        Ok(b)
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    fn eval_dual(&self, p: [f64; 2]) -> Vec<Dual> {
        let k = self.k;
        let xi = Dual { v: p[0], d: [1.0, 0.0] };
        let eta = Dual { v: p[1], d: [0.0, 1.0] };
        let s = eta.scale(-1.0).add(Dual::cst(1.0));
        let z = xi.scale(2.0).add(s.scale(-1.0));
        let s2 = s.mul(s);
        let mut leg = vec![Dual::cst(1.0)];
        if k >= 1 {
            leg.push(z);
        }
        for n in 1..k {
            let a = leg[n].mul(z).scale((2 * n + 1) as f64);
            let b = leg[n - 1].mul(s2).scale(-(n as f64));
            leg.push(a.add(b).scale(1.0 / (n + 1) as f64));
        }
        let x = eta.scale(2.0).add(Dual::cst(-1.0));
        let jac = |alpha: f64, q: usize| -> Vec<Dual> {
            let mut j = vec![Dual::cst(1.0)];
            if q >= 1 {
                // P_1^{(α,0)} = (α+1) + (α+2)(x-1)/2
                j.push(
                    x.add(Dual::cst(-1.0))
                        .scale(0.5 * (alpha + 2.0))
                        .add(Dual::cst(alpha + 1.0)),
                );
            }
            for n in 2..=q {
                let nf = n as f64;
                let c = 2.0 * nf + alpha;
                let a1 = 2.0 * nf * (nf + alpha) * (c - 2.0);
                let a2 = (c - 1.0) * alpha * alpha;
                let a3 = (c - 1.0) * c * (c - 2.0);
                let a4 = 2.0 * (nf + alpha - 1.0) * (nf - 1.0) * c;
                let t = x.scale(a3).add(Dual::cst(a2)).mul(j[n - 1]);
                j.push(t.add(j[n - 2].scale(-a4)).scale(1.0 / a1));
            }
            j
        };
        let jacobi: Vec<Vec<Dual>> = (0..=k).map(|pp| jac((2 * pp + 1) as f64, k - pp)).collect();
        self.pairs
            .iter()
            .zip(&self.norm)
            .map(|(&(pp, q), &c)| leg[pp].mul(jacobi[pp][q]).scale(c))
            .collect()
    }

    pub fn eval(&self, p: [f64; 2]) -> Vec<f64> {
        self.eval_dual(p).into_iter().map(|d| d.v).collect()
    }

    /// Reference gradients ∂/∂ξ, ∂/∂η of every basis function.
    pub fn grad(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        self.eval_dual(p).into_iter().map(|d| d.d).collect()
    }
}

/// Shifted Legendre polynomials √(2m+1) P_m(2t-1), orthonormal on [0, 1].
#[derive(Clone, Debug)]
pub struct SegmentBasis {
    k: usize,
}

impl SegmentBasis {
    pub fn new(k: usize) -> Result<Self, BasisError> {
        if k > MAX_DEGREE {
            return Err(BasisError::Degree { k, max: MAX_DEGREE });
        }
        Ok(SegmentBasis { k })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.k + 1
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let x = 2.0 * t - 1.0;
        let mut p = Vec::with_capacity(self.k + 1);
        p.push(1.0);
        if self.k >= 1 {
            p.push(x);
        }
        for m in 2..=self.k {
            let v = ((2 * m - 1) as f64 * x * p[m - 1] - (m - 1) as f64 * p[m - 2]) / m as f64;
            p.push(v);
        }
        p.iter()
            .enumerate()
            .map(|(m, v)| ((2 * m + 1) as f64).sqrt() * v)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polybasis::{quad_segment, quad_triangle};

    #[test]
    fn triangle_orthonormal() {
        for k in 0..=MAX_DEGREE {
            let b = TriangleBasis::new(k).unwrap();
            assert_eq!(b.dim(), (k + 1) * (k + 2) / 2);
            let q = quad_triangle(2 * k).unwrap();
            let vals: Vec<Vec<f64>> = q.points.iter().map(|&p| b.eval(p)).collect();
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    let g: f64 = vals.iter().zip(&q.weights).map(|(v, w)| w * v[i] * v[j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12, "k={k} ({i},{j}) {g}");
                }
            }
        }
        let b0 = TriangleBasis::new(0).unwrap();
        assert!((b0.eval([0.3, 0.3])[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn segment_orthonormal() {
        let b = SegmentBasis::new(2).unwrap();
        let q = quad_segment(4);
        for i in 0..3 {
            for j in 0..3 {
                let g: f64 = q.iter().map(|(t, w)| w * b.eval(t)[i] * b.eval(t)[j]).sum();
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        // √5 (6t² - 6t + 1)
        let t = 0.3;
        assert!((b.eval(t)[2] - 5f64.sqrt() * (6.0 * t * t - 6.0 * t + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for k in 1..=MAX_DEGREE {
            let b = TriangleBasis::new(k).unwrap();
            for p in [[0.2, 0.3], [0.6, 0.1], [0.1, 0.7]] {
                let g = b.grad(p);
                for (d, dir) in [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]].iter().enumerate() {
                    let fp = b.eval([p[0] + h * dir[0], p[1] + h * dir[1]]);
                    let fm = b.eval([p[0] - h * dir[0], p[1] - h * dir[1]]);
                    for i in 0..b.dim() {
                        let fd = (fp[i] - fm[i]) / (2.0 * h);
                        let an = g[i][0] * dir[0] + g[i][1] * dir[1];
                        assert!(
                            (fd - an).abs() <= 1e-6 * an.abs().max(1.0),
                            "k={k} dir {d} i {i}: {fd} vs {an}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_high_degree() {
        assert!(TriangleBasis::new(MAX_DEGREE + 1).is_err());
        assert!(SegmentBasis::new(MAX_DEGREE + 1).is_err());
    }
}
