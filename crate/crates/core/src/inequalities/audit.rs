use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::form::{part_value, Part, QuadraticForm};
use super::IneqError;
use crate::linalg::{gen_eig_max_dense, GenEig, SparseSymmetric, TripletBuilder};

fn support(s: &SparseSymmetric, r: &[Vec<(usize, f64)>], mark: &mut [bool]) {
    for i in 0..s.n() {
        for (j, v) in s.row(i) {
            if v != 0.0 {
                mark[i] = true;
                mark[j] = true;
            }
        }
    }
    for row in r {
        for &(i, v) in row {
            if v != 0.0 {
                mark[i] = true;
            }
        }
    }
}

/// λ_max(A, B) after eliminating every dof outside the support of A.
///
/// With x = (y, z) and A acting on y only, max xᵀAx / xᵀBx over z is attained
/// at z = −B_ZZ⁻¹ B_ZY y, which leaves the pencil (A_YY, S) with the Schur
/// complement S = B_YY − B_YZ B_ZZ⁻¹ B_ZY. Dofs that neither form touches are
/// dropped. B_ZZ is factored sparse; at most one rank-one term of B may reach
/// into Z (it is folded into the factorization).
pub fn eigen_condensed(a: &QuadraticForm, b: &QuadraticForm, null_tol: f64) -> Result<GenEig, IneqError> {
    let n = a.n();
    let (as_, ar) = (a.sparse_sum(), a.rank_ones());
    let (bs, br) = (b.sparse_sum(), b.rank_ones());
    let mut in_a = vec![false; n];
    support(&as_, &ar, &mut in_a);
    let mut active = in_a.clone();
    support(&bs, &br, &mut active);
    let ys: Vec<usize> = (0..n).filter(|&i| in_a[i]).collect();
    let zs: Vec<usize> = (0..n).filter(|&i| active[i] && !in_a[i]).collect();
    let (ny, nz) = (ys.len(), zs.len());
    let mut yi = vec![usize::MAX; n];
    let mut zi = vec![usize::MAX; n];
    ys.iter().enumerate().for_each(|(k, &g)| yi[g] = k);
    zs.iter().enumerate().for_each(|(k, &g)| zi[g] = k);

    let mut ayy = Mat::<f64>::zeros(ny, ny);
    for i in 0..n {
        for (j, v) in as_.row(i) {
            ayy[(yi[i], yi[j])] += v;
            if i != j {
                ayy[(yi[j], yi[i])] += v;
            }
        }
    }
    for r in &ar {
        for &(i, u) in r {
            for &(j, v) in r {
                ayy[(yi[i], yi[j])] += u * v;
            }
        }
    }

    let mut byy = Mat::<f64>::zeros(ny, ny);
    let mut bzz = TripletBuilder::new(nz);
    // column j of B_ZY as (z index, value)
    let mut bzy: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ny];
    for i in 0..n {
        for (j, v) in bs.row(i) {
            match (yi[i] != usize::MAX, yi[j] != usize::MAX) {
                (true, true) => {
                    byy[(yi[i], yi[j])] += v;
                    if i != j {
                        byy[(yi[j], yi[i])] += v;
                    }
                }
                (false, false) => {
                    if zi[i] != usize::MAX && zi[j] != usize::MAX {
                        bzz.add(zi[i], zi[j], v);
                    }
                }
                (true, false) => bzy[yi[i]].push((zi[j], v)),
                (false, true) => bzy[yi[j]].push((zi[i], v)),
            }
        }
    }
    let mut coupled: Option<(Vec<f64>, Vec<f64>)> = None;
    for r in &br {
        let mut ry = vec![0.0; ny];
        let mut rz = vec![0.0; nz];
        for &(i, v) in r {
            if yi[i] != usize::MAX {
                ry[yi[i]] += v;
            } else {
                rz[zi[i]] += v;
            }
        }
        for i in 0..ny {
            if ry[i] != 0.0 {
                for j in 0..ny {
                    byy[(i, j)] += ry[i] * ry[j];
                }
            }
        }
        if rz.iter().any(|&v| v != 0.0) {
            if coupled.is_some() {
                return Err(IneqError::Condensation("more than one rank-one term couples into Z"));
            }
            coupled = Some((ry, rz));
        }
    }
    if nz == 0 {
        return Ok(gen_eig_max_dense(ayy.as_ref(), byy.as_ref(), null_tol)?);
    }
    let bzz = bzz.build();
    let fac = bzz.factor_spd(coupled.as_ref().map(|(_, rz)| rz.as_slice()))?;
    // W = B_ZZ⁻¹ B_ZY
    let mut w = Mat::<f64>::zeros(nz, ny);
    let mut rhs = vec![0.0; nz];
    for (j, col) in bzy.iter().enumerate() {
        if col.is_empty() {
            continue;
        }
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for &(z, v) in col {
            rhs[z] += v;
        }
        for (z, v) in fac.solve(&rhs).into_iter().enumerate() {
            w[(z, j)] = v;
        }
    }
    if let Some((ry, rz)) = &coupled {
        let v = fac.solve(rz);
        for j in 0..ny {
            if ry[j] != 0.0 {
                for z in 0..nz {
                    w[(z, j)] += v[z] * ry[j];
                }
            }
        }
    }
    // S = B_YY − B_YZ W
    let mut s = byy;
    for (i, col) in bzy.iter().enumerate() {
        for &(z, v) in col {
            for j in 0..ny {
                s[(i, j)] -= v * w[(z, j)];
            }
        }
    }
    if let Some((ry, rz)) = &coupled {
        let rw: Vec<f64> = (0..ny).map(|j| (0..nz).map(|z| rz[z] * w[(z, j)]).sum()).collect();
        for i in 0..ny {
            if ry[i] != 0.0 {
                for j in 0..ny {
                    s[(i, j)] -= ry[i] * rw[j];
                }
            }
        }
    }
    for i in 0..ny {
        for j in 0..i {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let g = gen_eig_max_dense(ayy.as_ref(), s.as_ref(), null_tol)?;
    let lift = |y: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (k, &g) in ys.iter().enumerate() {
            x[g] = y[k];
        }
        for (zk, &g) in zs.iter().enumerate() {
            x[g] = -(0..ny).map(|j| w[(zk, j)] * y[j]).sum::<f64>();
        }
        x
    };
    Ok(match g {
        GenEig::Bounded {
            lambda,
            witness,
            krylov,
        } => GenEig::Bounded {
            lambda,
            witness: lift(&witness),
            krylov,
        },
        GenEig::Unbounded { witness, ratio } => GenEig::Unbounded {
            witness: lift(&witness),
            ratio,
        },
    })
}

/// Largest xᵀAx / xᵀBx over `samples` i.i.d. standard normal draws; draws
/// with xᵀBx < 1e-14 are skipped. Returns (max ratio, accepted draws).
pub fn sample_max(a: &QuadraticForm, b: &QuadraticForm, samples: usize, seed: u64) -> (f64, usize) {
    let n = a.n();
    let pa = Part::Sparse(a.sparse_sum());
    let pb = Part::Sparse(b.sparse_sum());
    let (ra, rb) = (a.rank_ones(), b.rank_ones());
    let value = |p: &Part, r: &[Vec<(usize, f64)>], x: &[f64]| {
        part_value(p, x)
            + r.iter()
                .map(|r| r.iter().map(|&(i, v)| v * x[i]).sum::<f64>().powi(2))
                .sum::<f64>()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut used = 0;
    let mut x = vec![0.0; n];
    for _ in 0..samples {
        x.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
        let bx = value(&pb, &rb, &x);
        if bx < 1e-14 {
            continue;
        }
        used += 1;
        best = best.max(value(&pa, &ra, &x) / bx);
    }
    (best, used)
}

/// Dense-matrix counterpart of [`sample_max`] for small local pencils.
pub fn sample_max_dense(a: &Mat<f64>, b: &Mat<f64>, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let n = a.nrows();
    let quad = |m: &Mat<f64>, x: &[f64]| -> f64 {
        (0..n)
            .map(|i| x[i] * (0..n).map(|j| m[(i, j)] * x[j]).sum::<f64>())
            .sum()
    };
    let mut best = 0.0f64;
    let mut x = vec![0.0; n];
    for _ in 0..samples {
        x.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut *rng));
        let bx = quad(b, &x);
        if bx < 1e-14 {
            continue;
        }
        best = best.max(quad(a, &x) / bx);
    }
    best
}
