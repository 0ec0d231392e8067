//! Independent brute-force pipeline used as the oracle for the main
//! implementation.
//!
//! Everything here is computed from first principles with machinery disjoint
//! from the library internals: occupation tuples are enumerated with an
//! iterative odometer, multi-photon amplitudes come from matrix permanents,
//! detector transitions from the binomial formula, and the fidelity measures
//! from explicit sums.  Pure-state extraction weights reduce to a parallel /
//! not-parallel test, so no eigensolver is involved anywhere.

use num_complex::Complex64;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// All occupation tuples over `modes` modes with total `<= cutoff`,
/// lexicographic, first mode most significant.
pub fn tuples(modes: usize, cutoff: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![0usize; modes];
    loop {
        if current.iter().sum::<usize>() <= cutoff {
            out.push(current.clone());
        }
        // odometer with per-digit bound `cutoff`
        let mut pos = modes;
        loop {
            if pos == 0 {
                return sort_lex(out);
            }
            pos -= 1;
            if current[pos] < cutoff {
                current[pos] += 1;
                for digit in current.iter_mut().skip(pos + 1) {
                    *digit = 0;
                }
                break;
            }
        }
    }
}

fn sort_lex(mut v: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    v.sort();
    v
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        factorial(n) / (factorial(k) * factorial(n - k))
    }
}

/// Permanent by direct expansion over permutations (photon counts stay small).
pub fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut cols: Vec<usize> = (0..n).collect();
    let mut total = Complex64::ZERO;
    permute(&mut cols, 0, m, &mut total);
    total
}

fn permute(cols: &mut Vec<usize>, k: usize, m: &[Vec<Complex64>], total: &mut Complex64) {
    let n = cols.len();
    if k == n {
        let mut prod = Complex64::new(1.0, 0.0);
        for (row, &col) in cols.iter().enumerate() {
            prod *= m[row][col];
        }
        *total += prod;
        return;
    }
    for i in k..n {
        cols.swap(k, i);
        permute(cols, k + 1, m, total);
        cols.swap(k, i);
    }
}

/// `<out| U |in>` for a passive network with single-photon matrix `u`:
/// the permanent of the row/column-repeated submatrix over the bosonic
/// normalization.
pub fn transition_amplitude(
    u: &[Vec<Complex64>],
    in_occ: &[usize],
    out_occ: &[usize],
) -> Complex64 {
    let n_in: usize = in_occ.iter().sum();
    let n_out: usize = out_occ.iter().sum();
    if n_in != n_out {
        return Complex64::ZERO;
    }
    if n_in == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut rows = Vec::with_capacity(n_in);
    for (mode, &count) in out_occ.iter().enumerate() {
        for _ in 0..count {
            rows.push(mode);
        }
    }
    let mut cols = Vec::with_capacity(n_in);
    for (mode, &count) in in_occ.iter().enumerate() {
        for _ in 0..count {
            cols.push(mode);
        }
    }
    let sub: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| u[r][c]).collect())
        .collect();
    let norm: f64 = in_occ
        .iter()
        .chain(out_occ.iter())
        .map(|&k| factorial(k))
        .product();
    permanent(&sub) / Complex64::new(norm.sqrt(), 0.0)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut out = vec![vec![Complex64::ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

fn identity(n: usize) -> Vec<Vec<Complex64>> {
    let mut m = vec![vec![Complex64::ZERO; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0);
    }
    m
}

/// Single-photon matrix of the frozen NS layout on modes
/// `(signal, anc1, anc2)`, assembled by hand.
pub fn ns_single_photon_matrix() -> Vec<Vec<Complex64>> {
    let r1 = (3.0 - SQRT2) / 7.0;
    let r2 = 5.0 - 3.0 * SQRT2;
    let (a, al) = (r1.sqrt(), (1.0 - r1).sqrt());
    let (b, be) = (r2.sqrt(), (1.0 - r2).sqrt());
    // crossed splitter on (sig, anc1), grey side anc1: [[a, al], [al, -a]]
    let mut u1 = identity(3);
    u1[0][0] = c(a);
    u1[0][1] = c(al);
    u1[1][0] = c(al);
    u1[1][1] = c(-a);
    // crossed splitter on (sig, anc2), grey side sig: [[-b, be], [be, b]]
    let mut u2 = identity(3);
    u2[0][0] = c(-b);
    u2[0][2] = c(be);
    u2[2][0] = c(be);
    u2[2][2] = c(b);
    matmul(&u2, &u1)
}

/// Single-photon matrix of the CS layout on modes
/// `(ctl, tgt, ca1, ca2, ta1, ta2)`.
pub fn cs_single_photon_matrix() -> Vec<Vec<Complex64>> {
    let h = 1.0 / SQRT2;
    let r1 = (3.0 - SQRT2) / 7.0;
    let r2 = 5.0 - 3.0 * SQRT2;
    let (a, al) = (r1.sqrt(), (1.0 - r1).sqrt());
    let (b, be) = (r2.sqrt(), (1.0 - r2).sqrt());

    // through splitter on (ctl, tgt), grey side ctl
    let mut b_in = identity(6);
    b_in[0][0] = c(h);
    b_in[0][1] = c(h);
    b_in[1][0] = c(-h);
    b_in[1][1] = c(h);
    // NS on the control arm: crossed (ctl, ca1) then crossed (ctl, ca2)
    let mut n1a = identity(6);
    n1a[0][0] = c(a);
    n1a[0][2] = c(al);
    n1a[2][0] = c(al);
    n1a[2][2] = c(-a);
    let mut n1b = identity(6);
    n1b[0][0] = c(-b);
    n1b[0][3] = c(be);
    n1b[3][0] = c(be);
    n1b[3][3] = c(b);
    // NS on the target arm
    let mut n2a = identity(6);
    n2a[1][1] = c(a);
    n2a[1][4] = c(al);
    n2a[4][1] = c(al);
    n2a[4][4] = c(-a);
    let mut n2b = identity(6);
    n2b[1][1] = c(-b);
    n2b[1][5] = c(be);
    n2b[5][1] = c(be);
    n2b[5][5] = c(b);
    // inverse through splitter on (ctl, tgt), grey side tgt
    let mut b_out = identity(6);
    b_out[0][0] = c(h);
    b_out[0][1] = c(-h);
    b_out[1][0] = c(h);
    b_out[1][1] = c(h);

    let mut u = b_in;
    for step in [n1a, n1b, n2a, n2b, b_out] {
        u = matmul(&step, &u);
    }
    u
}

/// Binomial loss transition: probability that `m` photons register as `l`
/// clicks at efficiency `eta`.
pub fn loss_prob(eta: f64, l: usize, m: usize) -> f64 {
    if l > m {
        0.0
    } else {
        binom(m, l) * eta.powi(l as i32) * (1.0 - eta).powi((m - l) as i32)
    }
}

/// Everything the oracle computes for one device at one efficiency.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub p_click_perfect: f64,
    pub click_probability: f64,
    pub f_r: f64,
    pub f_c: f64,
    pub f_o: f64,
}

/// Full end-to-end oracle for a postselected device.
///
/// `u` is the single-photon matrix over all modes; the input is a list of
/// `(occupation, amplitude)` pairs; `signal_modes` are the output-mode
/// positions, the rest are counted; `correct` is the correct count tuple on
/// the detected modes (in mode order); `desired` maps an output-mode
/// occupation to its target amplitude.
pub fn oracle_report(
    u: &[Vec<Complex64>],
    cutoff: usize,
    input: &[(Vec<usize>, Complex64)],
    signal_modes: &[usize],
    correct: &[usize],
    desired: &dyn Fn(&[usize]) -> Complex64,
    eta: f64,
) -> OracleReport {
    let modes = u.len();
    let detector_modes: Vec<usize> = (0..modes).filter(|m| !signal_modes.contains(m)).collect();
    let basis = tuples(modes, cutoff);

    // output amplitudes
    let mut out_amp: Vec<Complex64> = vec![Complex64::ZERO; basis.len()];
    for (i, occ) in basis.iter().enumerate() {
        for (in_occ, amp) in input {
            out_amp[i] += *amp * transition_amplitude(u, in_occ, occ);
        }
    }

    // group by detector counts
    let det_counts: Vec<Vec<usize>> = tuples(detector_modes.len(), cutoff);
    let signal_basis: Vec<Vec<usize>> = tuples(signal_modes.len(), cutoff);
    let sig_index = |occ: &[usize]| -> usize {
        signal_basis.iter().position(|s| s == occ).unwrap()
    };

    // unnormalized conditional signal vectors per detector outcome
    let mut cond_vec: Vec<Vec<Complex64>> =
        vec![vec![Complex64::ZERO; signal_basis.len()]; det_counts.len()];
    for (i, occ) in basis.iter().enumerate() {
        let d: Vec<usize> = detector_modes.iter().map(|&m| occ[m]).collect();
        let s: Vec<usize> = signal_modes.iter().map(|&m| occ[m]).collect();
        let k = det_counts.iter().position(|t| t == &d).unwrap();
        cond_vec[k][sig_index(&s)] += out_amp[i];
    }
    let perfect_probs: Vec<f64> = cond_vec
        .iter()
        .map(|v| v.iter().map(|z| z.norm_sqr()).sum())
        .collect();

    let correct_pos = det_counts.iter().position(|t| t == correct).unwrap();
    let p_click_perfect = perfect_probs[correct_pos];

    // compound forward transition: announced `correct` given pre counts
    let forward_to_correct: Vec<f64> = det_counts
        .iter()
        .map(|pre| {
            pre.iter()
                .zip(correct)
                .map(|(&m, &l)| loss_prob(eta, l, m))
                .product()
        })
        .collect();

    // Bayes
    let joint: Vec<f64> = perfect_probs
        .iter()
        .zip(&forward_to_correct)
        .map(|(p, w)| p * w)
        .collect();
    let click_probability: f64 = joint.iter().sum();
    let retro: Vec<f64> = joint.iter().map(|j| j / click_probability).collect();
    let f_r = retro[correct_pos];

    // desired vector on the signal basis
    let desired_vec: Vec<Complex64> = signal_basis.iter().map(|occ| desired(occ)).collect();

    // rho_c' as an explicit matrix over the signal basis
    let dim = signal_basis.len();
    let mut rho_imperfect = vec![vec![Complex64::ZERO; dim]; dim];
    for (k, v) in cond_vec.iter().enumerate() {
        let w = forward_to_correct[k];
        if w == 0.0 {
            continue;
        }
        for x in 0..dim {
            for y in 0..dim {
                rho_imperfect[x][y] += c(w) * v[x] * v[y].conj();
            }
        }
    }
    for row in rho_imperfect.iter_mut() {
        for z in row.iter_mut() {
            *z /= c(click_probability);
        }
    }
    let mut f_o = 0.0;
    for x in 0..dim {
        for y in 0..dim {
            f_o += (desired_vec[x].conj() * rho_imperfect[x][y] * desired_vec[y]).re;
        }
    }

    // F_c: every conditional here is pure, so the extractable fraction is 1
    // for a conditional parallel to the desired state and 0 otherwise.
    let mut f_c = f_r;
    for (k, v) in cond_vec.iter().enumerate() {
        if k == correct_pos || retro[k] == 0.0 || perfect_probs[k] <= 1e-14 {
            continue;
        }
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let ip: Complex64 = desired_vec
            .iter()
            .zip(v)
            .map(|(d, z)| d.conj() * z)
            .sum();
        let overlap = ip.norm_sqr() / norm2;
        if (overlap - 1.0).abs() < 1e-12 {
            f_c += retro[k];
        }
    }

    OracleReport {
        p_click_perfect,
        click_probability,
        f_r,
        f_c,
        f_o,
    }
}

/// Oracle report for the NS gate at equal amplitudes.
pub fn ns_oracle(alpha: Complex64, beta: Complex64, gamma: Complex64, eta: f64) -> OracleReport {
    let u = ns_single_photon_matrix();
    let input = vec![
        (vec![0, 1, 0], alpha),
        (vec![1, 1, 0], beta),
        (vec![2, 1, 0], gamma),
    ];
    let desired = move |occ: &[usize]| -> Complex64 {
        match occ[0] {
            0 => alpha,
            1 => beta,
            2 => -gamma,
            _ => Complex64::ZERO,
        }
    };
    oracle_report(&u, 3, &input, &[0], &[1, 0], &desired, eta)
}

/// Oracle report for the CS gate on the `|11>` input.
pub fn cs_oracle_11(eta: f64) -> OracleReport {
    let u = cs_single_photon_matrix();
    let input = vec![(vec![1, 1, 1, 0, 1, 0], c(1.0))];
    let desired = |occ: &[usize]| -> Complex64 {
        if occ == [1, 1] {
            c(-1.0)
        } else {
            Complex64::ZERO
        }
    };
    oracle_report(&u, 4, &input, &[0, 1], &[1, 0, 1, 0], &desired, eta)
}
