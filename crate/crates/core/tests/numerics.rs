use csi_gait::numerics::{joint_diagonalize, svd, sym_eig, total_off_energy, Matrix, SeededRng};
use proptest::prelude::*;

fn random_symmetric(n: usize, rng: &mut SeededRng) -> Matrix<f64> {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.gaussian();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

// Determinant by Gaussian elimination with partial pivoting; shares no code
// with the Jacobi solver.
fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            let (top, bottom) = a.split_at_mut(r);
            for (x, &y) in bottom[0][c..].iter_mut().zip(&top[c][c..]) {
                *x -= f * y;
            }
        }
    }
    d
}

fn char_poly(a: &Matrix<f64>, lambda: f64) -> f64 {
    let n = a.rows();
    det((0..n).map(|i| (0..n).map(|j| a[(i, j)] - if i == j { lambda } else { 0.0 }).collect()).collect())
}

/// Roots of det(A − λI) by a sign-change scan over the Gershgorin interval
/// followed by bisection.
fn char_poly_roots(a: &Matrix<f64>) -> Vec<f64> {
    let n = a.rows();
    let r = (0..n).map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let steps = 200_000;
    let mut roots = Vec::new();
    let mut x0 = -r;
    let mut f0 = char_poly(a, x0);
    for s in 1..=steps {
        let x1 = -r + 2.0 * r * s as f64 / steps as f64;
        let f1 = char_poly(a, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = char_poly(a, mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    for seed in 0..3 {
        let a = random_symmetric(6, &mut SeededRng::new(seed));
        let eig = sym_eig(&a).unwrap();
        let roots = char_poly_roots(&a);
        assert_eq!(roots.len(), 6, "seed {seed}: oracle found {roots:?}");
        let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (l, r) in eig.values.iter().zip(&roots) {
            assert!((l - r).abs() <= 1e-6 * scale, "seed {seed}: {l} vs {r}");
        }
    }
}

#[test]
fn tridiagonal_toeplitz_closed_form() {
    // eigenvalues of tridiag(b, a, b) are a + 2b·cos(kπ/(n+1))
    let n = 12;
    let (a, b) = (2.0, -1.0);
    let m = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            a
        } else if i.abs_diff(j) == 1 {
            b
        } else {
            0.0
        }
    });
    let mut expected: Vec<f64> =
        (1..=n).map(|k| a + 2.0 * b * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos()).collect();
    expected.sort_by(|x, y| y.total_cmp(x));
    let eig = sym_eig(&m).unwrap();
    for (l, e) in eig.values.iter().zip(&expected) {
        assert!((l - e).abs() < 1e-10);
    }
}

#[test]
fn determinant_is_product_of_eigenvalues() {
    let mut rng = SeededRng::new(11);
    for n in 2..=8 {
        let a = random_symmetric(n, &mut rng);
        let eig = sym_eig(&a).unwrap();
        let prod: f64 = eig.values.iter().product();
        let d = det(a.columns());
        assert!((prod - d).abs() <= 1e-6 * d.abs().max(1e-12), "n={n}: {prod} vs {d}");
        let tr: f64 = eig.values.iter().sum();
        assert!((tr - a.trace()).abs() <= 1e-8 * a.frobenius_norm());
    }
}

#[test]
fn two_by_two_svd_closed_form() {
    // AᵀA = [[25,20],[20,25]] has eigenvalues 45 and 5
    let a = Matrix::from_rows(&[vec![3.0, 0.0], vec![4.0, 5.0]]).unwrap();
    let s = svd(&a).unwrap().s;
    assert!((s[0] - 45f64.sqrt()).abs() < 1e-12);
    assert!((s[1] - 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn svd_of_psd_matrix_equals_its_spectrum() {
    let mut rng = SeededRng::new(5);
    let b = Matrix::from_fn(7, 5, |_, _| rng.gaussian());
    let a = b.t_matmul(&b).unwrap();
    let s = svd(&a).unwrap().s;
    let l = sym_eig(&a).unwrap().values;
    for (x, y) in s.iter().zip(&l) {
        assert!((x - y).abs() <= 1e-8 * l[0]);
    }
}

fn random_rotation(n: usize, rng: &mut SeededRng) -> Matrix<f64> {
    let g = Matrix::from_fn(n, n, |_, _| rng.gaussian());
    svd(&g).unwrap().u
}

#[test]
fn joint_diagonalizer_recovers_planted_rotation() {
    let mut rng = SeededRng::new(21);
    let n = 5;
    let q = random_rotation(n, &mut rng);
    let mats: Vec<Matrix<f64>> = (0..4)
        .map(|_| {
            let d = Matrix::diag(&(0..n).map(|_| rng.uniform_range(-3.0, 3.0)).collect::<Vec<_>>());
            q.matmul(&d).unwrap().matmul_t(&q).unwrap()
        })
        .collect();
    let jd = joint_diagonalize(&mats, 100, 1e-12).unwrap();
    assert!(jd.final_off_energy() < 1e-8);
    assert!(jd.off_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    // W·Q must be a signed permutation
    let p = jd.w.matmul(&q).unwrap();
    for i in 0..n {
        let row: Vec<f64> = p.row(i).iter().map(|v| v.abs()).collect();
        let big = row.iter().filter(|&&v| (v - 1.0).abs() < 1e-6).count();
        let small = row.iter().filter(|&&v| v < 1e-6).count();
        assert_eq!((big, small), (1, n - 1), "row {i}: {row:?}");
    }
}

#[test]
fn joint_diagonalization_never_worse_than_identity() {
    let mut rng = SeededRng::new(4);
    for _ in 0..10 {
        let mats: Vec<Matrix<f64>> = (0..3).map(|_| random_symmetric(6, &mut rng)).collect();
        let jd = joint_diagonalize(&mats, 100, 1e-8).unwrap();
        assert!(jd.final_off_energy() <= total_off_energy(&mats));
        assert!(jd.w.matmul_t(&jd.w).unwrap().sub(&Matrix::identity(6)).unwrap().max_abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn eig_reconstructs_and_is_orthonormal(n in 1usize..20, seed in any::<u64>()) {
        let a = random_symmetric(n, &mut SeededRng::new(seed));
        let eig = sym_eig(&a).unwrap();
        let err = eig.reconstruct().sub(&a).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-6 * a.frobenius_norm().max(1e-300));
        prop_assert!(eig.vectors.orthonormality_error() <= 1e-8);
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..n {
            let v = eig.vector(i);
            let av: Vec<f64> = (0..n).map(|r| (0..n).map(|c| a[(r, c)] * v[c]).sum()).collect();
            let resid: f64 = av.iter().zip(&v).map(|(x, y)| (x - eig.values[i] * y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(resid <= 1e-6 * eig.values[0].abs().max(eig.values[n - 1].abs()));
        }
    }

    #[test]
    fn svd_reconstructs(m in 1usize..16, n in 1usize..16, seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let a = Matrix::from_fn(m, n, |_, _| rng.gaussian());
        let d = svd(&a).unwrap();
        prop_assert!(d.reconstruct().sub(&a).unwrap().frobenius_norm() <= 1e-6 * a.frobenius_norm());
        prop_assert!(d.s.iter().all(|&s| s >= 0.0));
        prop_assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    }
}
