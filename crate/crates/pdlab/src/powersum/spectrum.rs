//! Spectral picture of the generator on the power-sum algebra.
//!
//! In any basis of power-sum monomials sorted by total degree the generator
//! acts triangularly: a degree `m` monomial maps to itself times
//! `-m (m - 1 + theta) / 2` plus terms of strictly lower degree. The eigenvalues
//! therefore depend only on `theta`, and the multiplicity at degree `m` is
//! the number of monomials of that degree, which is the number of integer
//! partitions of `m` with no unit part.

use super::{generator_apply, Monomial, PowerSumPoly};
use crate::core::{tol, PdParams};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, partition_count};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumLine {
    pub eigenvalue: f64,
    pub multiplicity: u64,
}

/// Damping rate of degree `m` observables: `m (m - 1 + theta) / 2`.
pub fn decay_rate(theta: f64, m: u32) -> f64 {
    0.5 * f64::from(m) * (f64::from(m) - 1.0 + theta)
}

fn check_degree(max_degree: u32) -> Result<()> {
    if max_degree < 2 {
        return Err(Error::Domain("max_degree must be at least 2".into()));
    }
    if max_degree > tol::MAX_SPECTRUM_DEGREE {
        return Err(Error::Capacity(format!(
            "max_degree {max_degree} exceeds {}",
            tol::MAX_SPECTRUM_DEGREE
        )));
    }
    Ok(())
}

/// Eigenvalues of the generator restricted to polynomials of total degree at
/// most `max_degree`, with multiplicities, sorted decreasing (zero first).
///
/// Independent of the discount parameter; only `theta` enters.
pub fn spectrum(params: &PdParams, max_degree: u32) -> Result<Vec<SpectrumLine>> {
    check_degree(max_degree)?;
    let theta = params.theta();
    let mut lines = vec![SpectrumLine {
        eigenvalue: 0.0,
        multiplicity: 1,
    }];
    for m in 2..=max_degree {
        let mult = partition_count(m)? - partition_count(m - 1)?;
        lines.push(SpectrumLine {
            eigenvalue: -decay_rate(theta, m),
            multiplicity: mult,
        });
    }
    Ok(lines)
}

/// All power-sum monomials of total degree at most `max_degree`, sorted by
/// degree and then lexicographically within a degree. Index 0 is the
/// constant monomial.
pub fn degree_basis(max_degree: u32) -> Result<Vec<Monomial>> {
    check_degree(max_degree)?;
    let mut basis = vec![Monomial::one()];
    for d in 2..=max_degree {
        let mut level: Vec<Monomial> = enumerate_partitions(d)?
            .into_iter()
            .filter(|p| p.parts().iter().all(|&k| k >= 2))
            .map(|p| Monomial::new(p.parts().to_vec()).expect("parts are valid orders"))
            .collect();
        level.sort();
        basis.extend(level);
    }
    Ok(basis)
}

/// Matrix of the generator on [`degree_basis`]: column `j` holds the
/// coefficients of the image of basis monomial `j`.
pub fn generator_matrix(
    params: &PdParams,
    max_degree: u32,
) -> Result<(Vec<Monomial>, Vec<Vec<f64>>)> {
    let basis = degree_basis(max_degree)?;
    let index: std::collections::HashMap<&Monomial, usize> =
        basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let n = basis.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for (j, mono) in basis.iter().enumerate() {
        let image = generator_apply(params, &PowerSumPoly::monomial(mono.clone(), 1.0));
        for (target, coeff) in image.terms() {
            let i = *index
                .get(target)
                .ok_or_else(|| Error::Numeric(format!("image monomial {target:?} left the basis")))?;
            matrix[i][j] = *coeff;
        }
    }
    Ok((basis, matrix))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(alpha: f64, theta: f64) -> PdParams {
        PdParams::new_two_param(alpha, theta).unwrap()
    }

    #[test]
    fn spectrum_hand_values_at_unit_theta() {
        let lines = spectrum(&tp(0.5, 1.0), 6).unwrap();
        let eigs: Vec<f64> = lines.iter().map(|l| l.eigenvalue).collect();
        let mults: Vec<u64> = lines.iter().map(|l| l.multiplicity).collect();
        assert_eq!(eigs, vec![0.0, -2.0, -4.5, -8.0, -12.5, -18.0]);
        assert_eq!(mults, vec![1, 1, 1, 2, 2, 4]);
    }

    #[test]
    fn spectrum_ignores_discount() {
        for theta in [0.5, 1.0, 2.0] {
            let a = spectrum(&tp(0.2, theta), 8).unwrap();
            let b = spectrum(&tp(0.7, theta), 8).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn basis_counts_partitions_without_units() {
        let basis = degree_basis(8).unwrap();
        // degree counts: 1 constant, then 1, 1, 2, 2, 4, 4, 7 for degrees 2..8
        assert_eq!(basis.len(), 1 + 1 + 1 + 2 + 2 + 4 + 4 + 7);
        assert_eq!(basis[0], Monomial::one());
        for w in basis.windows(2) {
            assert!(w[0].degree() < w[1].degree() || w[0] < w[1]);
        }
    }

    #[test]
    fn matrix_is_triangular_with_closed_form_diagonal() {
        for params in [tp(0.2, 0.5), tp(0.7, 0.5), tp(0.0, 2.0)] {
            let (basis, matrix) = generator_matrix(&params, 8).unwrap();
            for (i, row) in matrix.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    let (di, dj) = (basis[i].degree(), basis[j].degree());
                    if i == j {
                        let expect = -decay_rate(params.theta(), dj);
                        assert!((v - expect).abs() < 1e-12, "diagonal at degree {dj}");
                    } else if v != 0.0 {
                        // a dropped phi_2 factor loses two degrees, anything
                        // else loses one; degree never stays level off-diagonal
                        assert!(
                            di + 2 == dj || di + 1 == dj,
                            "unexpected entry ({i}, {j}) = {v} with degrees {di}, {dj}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_multiplicities_match_spectrum() {
        let params = tp(0.3, 1.0);
        let (basis, matrix) = generator_matrix(&params, 6).unwrap();
        let lines = spectrum(&params, 6).unwrap();
        for line in &lines {
            let count = basis
                .iter()
                .enumerate()
                .filter(|(i, _)| (matrix[*i][*i] - line.eigenvalue).abs() < 1e-12)
                .count() as u64;
            assert_eq!(count, line.multiplicity, "eigenvalue {}", line.eigenvalue);
        }
        assert_eq!(
            lines.iter().map(|l| l.multiplicity).sum::<u64>(),
            basis.len() as u64
        );
    }

    #[test]
    fn degree_guards() {
        assert!(spectrum(&tp(0.5, 0.5), 1).is_err());
        assert!(spectrum(&tp(0.5, 0.5), tol::MAX_SPECTRUM_DEGREE + 1).is_err());
    }
}
