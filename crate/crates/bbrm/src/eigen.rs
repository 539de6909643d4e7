//! Eigenvalues of dense complex Hermitian matrices.
//!
//! Householder reduction with reflectors chosen so every subdiagonal element comes
//! out real, which stands in for a separate phase rotation of the tridiagonal.
//! Then implicit-shift QL on the real tridiagonal.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::ensemble::HermitianMatrix;
use crate::error::{Error, Result};

pub const MAX_QL_SWEEPS: usize = 50;

/// Ascending eigenvalues. Rejects input whose asymmetry exceeds `1e-12` of its scale.
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let n = h.n;
    if h.data.len() != n * n {
        return Err(Error::InvalidParam(
            "matrix data does not match its dimension".into(),
        ));
    }
    if h.data
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::InvalidParam("matrix has non-finite entries".into()));
    }
    let scale = h.data.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let asym = h.asymmetry();
    if asym > 1e-12 * scale {
        return Err(Error::NotHermitian(asym));
    }
    let (mut d, mut e) = tridiagonalize(h);
    tql(&mut d, &mut e)?;
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// Returns the real diagonal and the `n - 1` real subdiagonal entries of a
/// tridiagonal matrix unitarily similar to `h`.
pub fn tridiagonalize(h: &HermitianMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = h.n;
    let mut a = h.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let off = k + 1;
        let alpha = a[off * n + k];
        let xnorm2: f64 = (off + 1..n).map(|i| a[i * n + k].norm_sqr()).sum();
        d[k] = a[k * n + k].re;

        if xnorm2 == 0.0 && alpha.im == 0.0 {
            e[k] = alpha.re;
            continue;
        }
        let norm = (alpha.norm_sqr() + xnorm2).sqrt();
        let beta = -norm.copysign(alpha.re);
        let tau = (Complex64::new(beta, 0.0) - alpha) / beta;
        let scal = Complex64::new(1.0, 0.0) / (alpha - beta);
        v[0] = Complex64::new(1.0, 0.0);
        for i in 1..m {
            v[i] = a[(off + i) * n + k] * scal;
        }
        e[k] = beta;

        // p = A22 v
        for i in 0..m {
            let row = &a[(off + i) * n + off..(off + i) * n + n];
            let mut s = zero;
            for j in 0..m {
                s += row[j] * v[j];
            }
            p[i] = s;
        }
        let vhp: f64 = (0..m).map(|i| (v[i].conj() * p[i]).re).sum();
        let corr = 0.5 * tau.norm_sqr() * vhp;
        for i in 0..m {
            p[i] = tau * p[i] - v[i] * corr;
        }
        // A22 -= v w^H + w v^H
        for i in 0..m {
            let vi = v[i];
            let wi = p[i];
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for j in 0..m {
                row[j] -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
    }
    if n > 0 {
        d[n - 1] = a[(n - 1) * n + (n - 1)].re;
    }
    (d, e)
}

/// Implicit QL on a symmetric tridiagonal (`d` diagonal, `e` subdiagonal of length
/// `n - 1`). Eigenvalues are left in `d`, unsorted.
pub fn tql(d: &mut [f64], e_in: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&e_in[..n - 1]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm < n - 1 {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence(MAX_QL_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = mm;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    Ok(())
}

/// `Tr (H - z)^{-1}` from the spectrum.
pub fn resolvent_trace(spectrum: &[f64], z: Complex64) -> Complex64 {
    spectrum
        .iter()
        .map(|&l| (Complex64::new(l, 0.0) - z).inv())
        .sum()
}

/// One spectrum per line, comma separated, 17 significant digits.
pub fn write_spectra_csv<W: Write>(mut out: W, spectra: &[Vec<f64>]) -> Result<()> {
    for s in spectra {
        let line: Vec<String> = s.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_spectra_csv<R: BufRead>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut spectra = Vec::new();
    for (ln, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        spectra.push(row.map_err(|_| Error::Format(format!("spectrum cache line {}", ln + 1)))?);
    }
    Ok(spectra)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(n: usize, entries: &[(usize, usize, Complex64)]) -> HermitianMatrix {
        let mut h = HermitianMatrix::zeros(n);
        for &(r, c, z) in entries {
            h.set(r, c, z);
            h.set(c, r, z.conj());
        }
        h
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tiny_cases() {
        assert_eq!(
            eigenvalues(&herm(1, &[(0, 0, c(3.0, 0.0))])).unwrap(),
            vec![3.0]
        );
        let ev = eigenvalues(&herm(2, &[(0, 0, c(2.0, 0.0)), (1, 1, c(-1.0, 0.0))])).unwrap();
        assert_eq!(ev, vec![-1.0, 2.0]);
        let ev = eigenvalues(&herm(2, &[(0, 1, c(0.0, 1.0))])).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = herm(2, &[(0, 1, c(1.0, 1.0))]);
        h.set(1, 0, c(1.0, 1.0));
        assert!(matches!(eigenvalues(&h), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn empty_matrix() {
        assert!(eigenvalues(&HermitianMatrix::zeros(0)).unwrap().is_empty());
    }

    #[test]
    fn resolvent_of_two_levels() {
        let t = resolvent_trace(&[-1.0, 1.0], c(0.0, 1.0));
        assert!((t - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let spectra = vec![vec![0.1, -2.0 / 3.0], vec![1e-300, 5.0]];
        let mut buf = Vec::new();
        write_spectra_csv(&mut buf, &spectra).unwrap();
        assert_eq!(read_spectra_csv(&buf[..]).unwrap(), spectra);
    }
}
