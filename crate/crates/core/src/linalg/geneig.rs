use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, MatRef, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::eig_mat;
use super::{LinalgError, SymmetricDense};

pub const DEFAULT_NULL_TOL: f64 = 1e-10;

/// Outcome of maximizing xᵀAx / xᵀBx.
#[derive(Clone, Debug)]
pub enum GenEig {
    Bounded {
        lambda: f64,
        witness: Vec<f64>,
        /// Independent Krylov estimate of the same eigenvalue.
        krylov: f64,
    },
    /// A has energy on null(B); `witness` spans a direction with xᵀBx ≈ 0
    /// and xᵀAx > 0.
    Unbounded { witness: Vec<f64>, ratio: f64 },
}

impl GenEig {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            GenEig::Bounded { lambda, .. } => Some(*lambda),
            GenEig::Unbounded { .. } => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, GenEig::Unbounded { .. })
    }

    pub fn witness(&self) -> &[f64] {
        match self {
            GenEig::Bounded { witness, .. } | GenEig::Unbounded { witness, .. } => witness,
        }
    }
}

pub fn gen_eig_max(a: &SymmetricDense, b: &SymmetricDense, null_tol: f64) -> Result<GenEig, LinalgError> {
    if a.n() != b.n() {
        return Err(LinalgError::Dimension(a.n(), b.n()));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    gen_eig_max_dense(a.to_mat().as_ref(), b.to_mat().as_ref(), null_tol)
}

fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn quad(m: MatRef<'_, f64>, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        let mut col = 0.0;
        for i in 0..m.nrows() {
            col += m[(i, j)] * x[i];
        }
        s += col * x[j];
    }
    s
}

/// Same as [`gen_eig_max`] on full (symmetric) matrices.
///
/// When B is comfortably positive definite the whitening uses its Cholesky
/// factor; otherwise B is eigen-decomposed and its numerical null space
/// (eigenvalues ≤ null_tol·λ_max(B)) is split off and tested against A.
pub fn gen_eig_max_dense(a: MatRef<'_, f64>, b: MatRef<'_, f64>, null_tol: f64) -> Result<GenEig, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(LinalgError::Dimension(n, b.nrows()));
    }
    for j in 0..n {
        for i in 0..n {
            if !a[(i, j)].is_finite() || !b[(i, j)].is_finite() {
                return Err(LinalgError::NonFinite);
            }
        }
    }
    if n == 0 {
        return Ok(GenEig::Bounded {
            lambda: 0.0,
            witness: vec![],
            krylov: 0.0,
        });
    }
    let (w, back) = match cholesky_whiten(a, b, null_tol) {
        Some(x) => x,
        None => match eigen_whiten(a, b, null_tol)? {
            Whitened::Range(w, back) => (w, back),
            Whitened::Unbounded(g) => return Ok(g),
        },
    };
    let e = eig_mat(w.as_ref())?;
    let m = w.nrows();
    let (lmin, lmax) = (e.values[0], e.values[m - 1]);
    if lmin < -null_tol.sqrt() * lmax.abs().max(f64::MIN_POSITIVE) {
        return Err(LinalgError::Indefinite {
            which: "A",
            eig: lmin,
            scale: lmax,
        });
    }
    let y = e.vectors.col(m - 1);
    let witness: Vec<f64> = (0..n).map(|i| (0..m).map(|j| back[(i, j)] * y[j]).sum()).collect();
    let krylov = lanczos_max(w.as_ref(), 0x5eed);
    Ok(GenEig::Bounded {
        lambda: lmax.max(0.0),
        witness,
        krylov,
    })
}

/// W = L⁻¹ A L⁻ᵀ with B = L Lᵀ, and the back-transform L⁻ᵀ.
fn cholesky_whiten(a: MatRef<'_, f64>, b: MatRef<'_, f64>, null_tol: f64) -> Option<(Mat<f64>, Mat<f64>)> {
    let n = a.nrows();
    let llt = b.llt(Side::Lower).ok()?;
    let l = llt.L();
    let d: Vec<f64> = (0..n).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    let dmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
    // pivots only bound the spectrum loosely, so demand a wide margin before
    // trusting that B has no numerical null space
    let separated = dmin > null_tol.sqrt() * dmax;
    if !separated {
        return None;
    }
    let mut w = a.to_owned();
    solve_lower_triangular_in_place(l, w.as_mut(), Par::Seq);
    let mut w = w.transpose().to_owned();
    solve_lower_triangular_in_place(l, w.as_mut(), Par::Seq);
    symmetrize(&mut w);
    let mut back = Mat::<f64>::identity(n, n);
    solve_upper_triangular_in_place(l.transpose(), back.as_mut(), Par::Seq);
    Some((w, back))
}

enum Whitened {
    Range(Mat<f64>, Mat<f64>),
    Unbounded(GenEig),
}

fn eigen_whiten(a: MatRef<'_, f64>, b: MatRef<'_, f64>, null_tol: f64) -> Result<Whitened, LinalgError> {
    let n = a.nrows();
    let eb = eig_mat(b)?;
    let bmax = eb.values[n - 1].max(0.0);
    if eb.values[0] < -null_tol * bmax.max(f64::MIN_POSITIVE) {
        return Err(LinalgError::Indefinite {
            which: "B",
            eig: eb.values[0],
            scale: bmax,
        });
    }
    let cut = null_tol * bmax;
    let first = eb.values.iter().position(|&v| v > cut).unwrap_or(n);
    let q = eb.vectors.as_ref();
    if first > 0 {
        let qn = q.subcols(0, first);
        let an = qn.transpose() * a * qn;
        let a_norm = a.norm_l2();
        if an.norm_l2() > null_tol * a_norm && a_norm > 0.0 {
            let mut an = an;
            symmetrize(&mut an);
            let en = eig_mat(an.as_ref())?;
            let z = en.vectors.col(first - 1);
            let witness: Vec<f64> = (0..n).map(|i| (0..first).map(|j| qn[(i, j)] * z[j]).sum()).collect();
            let bq = quad(b, &witness).max(0.0);
            let ratio = if bq > 0.0 {
                quad(a, &witness) / bq
            } else {
                f64::INFINITY
            };
            return Ok(Whitened::Unbounded(GenEig::Unbounded { witness, ratio }));
        }
    }
    let m = n - first;
    let qr = q.subcols(first, m);
    let back = Mat::from_fn(n, m, |i, j| qr[(i, j)] / eb.values[first + j].sqrt());
    let mut w = back.transpose() * a * &back;
    symmetrize(&mut w);
    Ok(Whitened::Range(w, back))
}

/// Largest eigenvalue of a symmetric matrix by Lanczos with full
/// reorthogonalization, started from a seeded random vector. The Krylov
/// space contains every power iterate, so this is power iteration with the
/// best extraction the same matrix-vector products allow.
pub fn lanczos_max(w: MatRef<'_, f64>, seed: u64) -> f64 {
    let n = w.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut prev = f64::NEG_INFINITY;
    let max_steps = n.min(400);
    for step in 0..max_steps {
        let q = &basis[step];
        let mut r = matvec(w, q);
        let a = dot(q, &r);
        alpha.push(a);
        // two rounds of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &r);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nb = norm(&r);
        let est = tridiag_max(&alpha, &beta);
        let scale = est.abs().max(f64::MIN_POSITIVE);
        if nb <= 1e-14 * scale || step + 1 == max_steps {
            return est;
        }
        if step >= 8 && step % 4 == 0 {
            if (est - prev).abs() <= 1e-15 * scale {
                return est;
            }
            prev = est;
        }
        beta.push(nb);
        basis.push(r.into_iter().map(|x| x / nb).collect());
    }
    tridiag_max(&alpha, &beta)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn matvec(w: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    let n = w.nrows();
    let mut y = vec![0.0; n];
    for (j, &xj) in x.iter().enumerate() {
        let col = w.col(j);
        for i in 0..n {
            y[i] += col[i] * xj;
        }
    }
    y
}

/// Largest eigenvalue of the symmetric tridiagonal (alpha, beta) by Sturm
/// bisection.
fn tridiag_max(alpha: &[f64], beta: &[f64]) -> f64 {
    let m = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = beta.get(i).map_or(0.0, |b| b.abs()) + if i > 0 { beta[i - 1].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    // number of eigenvalues below x
    let count = |x: f64| {
        let mut c = 0;
        let mut d = 1.0;
        for i in 0..m {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = f64::MIN_POSITIVE;
            }
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(a: &[f64], b: &[f64]) -> GenEig {
        gen_eig_max(
            &SymmetricDense::from_diag(a),
            &SymmetricDense::from_diag(b),
            DEFAULT_NULL_TOL,
        )
        .unwrap()
    }

    #[test]
    fn diagonal_examples() {
        assert!((g(&[1.0, 1.0], &[1.0, 1.0]).lambda().unwrap() - 1.0).abs() < 1e-14);
        assert!((g(&[4.0, 0.0], &[1.0, 0.0]).lambda().unwrap() - 4.0).abs() < 1e-14);
        let u = g(&[1.0, 1.0], &[1.0, 0.0]);
        assert!(u.is_unbounded());
        let w = u.witness();
        assert!(w[0].abs() < 1e-12 && (w[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn indefinite_b_is_an_error() {
        let r = gen_eig_max(
            &SymmetricDense::from_diag(&[1.0, 1.0]),
            &SymmetricDense::from_diag(&[1.0, -0.5]),
            DEFAULT_NULL_TOL,
        );
        assert!(matches!(r, Err(LinalgError::Indefinite { which: "B", .. })));
    }

    #[test]
    fn random_pencils_agree_with_krylov_and_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, rank) in &[(5usize, 5usize), (30, 30), (40, 31), (80, 60)] {
            let ma = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let mb = Mat::from_fn(rank, n, |_, _| rng.random::<f64>() - 0.5);
            // A vanishes on null(B) by construction: A = Bᵀ C B-like sandwich
            let a = mb.transpose() * (&ma.subrows(0, rank).to_owned() * ma.subrows(0, rank).transpose()) * &mb;
            let b = mb.transpose() * &mb;
            let r = gen_eig_max_dense(a.as_ref(), b.as_ref(), DEFAULT_NULL_TOL).unwrap();
            let GenEig::Bounded {
                lambda,
                witness,
                krylov,
            } = r
            else {
                panic!("unexpected unbounded")
            };
            assert!((lambda - krylov).abs() <= 1e-8 * lambda, "{lambda} vs {krylov}");
            let rq = quad(a.as_ref(), &witness) / quad(b.as_ref(), &witness);
            assert!((rq - lambda).abs() <= 1e-8 * lambda, "{rq} vs {lambda}");
        }
    }

    #[test]
    fn sturm_bisection() {
        // tridiag(-1, 2, -1) of order 5: eigenvalues 2 - 2cos(jπ/6)
        let want = 2.0 - 2.0 * (5.0 * std::f64::consts::PI / 6.0).cos();
        let got = tridiag_max(&[2.0; 5], &[-1.0; 4]);
        assert!((got - want).abs() < 1e-14);
    }
}
