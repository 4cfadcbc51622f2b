use super::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::geometry::TorusPoint;
use serde::Serialize;

/// Dispersion of a finite multiset on the torus: the largest distance any
/// torus point can have to the set, which equals half the largest circular
/// gap after sorting.
pub fn dispersion(points: &[TorusPoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet {
            context: "dispersion of an empty multiset",
        });
    }
    let mut vals: Vec<f64> = points.iter().map(|p| p.value()).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut max_gap = vals[0] + 1.0 - vals[vals.len() - 1];
    for w in vals.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    Ok(max_gap / 2.0)
}

/// Exact dispersion of a multiset of dyadic rationals.
pub fn dispersion_dyadic(points: &[DyadicRational]) -> Result<DyadicRational> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet {
            context: "dispersion of an empty multiset",
        });
    }
    let d = points.iter().map(|p| p.log2_denominator()).max().unwrap();
    let mut scaled: Vec<u128> = points
        .iter()
        .map(|p| p.scaled_numerator(d))
        .collect::<Result<_>>()?;
    scaled.sort_unstable();
    let modulus = 1u128 << d;
    let mut max_gap = scaled[0] + modulus - scaled[scaled.len() - 1];
    for w in scaled.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    DyadicRational::from_parts(max_gap, d + 1)
}

/// A dispersion evaluation request: the first `n` terms, shifted by `m` in
/// the index and tilted by `-i * xi` on the torus.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DispersionQuery {
    pub n: u64,
    pub m: u64,
    pub xi: f64,
}

/// Dispersion of the transformed multiset `{ a_(i+m) - i*xi : i in [1, n] }`.
pub fn perturbed_dispersion(seq: impl Fn(u64) -> f64, query: &DispersionQuery) -> Result<f64> {
    if query.n == 0 {
        return Err(Error::EmptyPointSet {
            context: "perturbed dispersion needs n >= 1",
        });
    }
    let pts: Vec<TorusPoint> = (1..=query.n)
        .map(|i| TorusPoint::new(seq(i + query.m) - i as f64 * query.xi))
        .collect();
    dispersion(&pts)
}

/// Exact variant of [`perturbed_dispersion`] for dyadic sequences and a
/// dyadic tilt.
pub fn perturbed_dispersion_dyadic(
    seq: impl Fn(u64) -> Result<DyadicRational>,
    n: u64,
    m: u64,
    xi: DyadicRational,
) -> Result<DyadicRational> {
    if n == 0 {
        return Err(Error::EmptyPointSet {
            context: "perturbed dispersion needs n >= 1",
        });
    }
    let pts: Vec<DyadicRational> = (1..=n)
        .map(|i| seq(i + m)?.sub_scaled(i, xi))
        .collect::<Result<_>>()?;
    dispersion_dyadic(&pts)
}

/// Lower bound for the super-uniform dispersion of the first `n` terms,
/// measured over the finite ranges `m in [0, m_max]` and the dyadic grid
/// `xi = g / 2^xi_grid_log2`. The true supremum ranges over all of `N_0`
/// and the torus, so only a lower bound is reported; certified upper bounds
/// come from the block certification chain instead.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaLowerBound {
    pub value: f64,
    pub best_m: u64,
    pub best_xi: f64,
}

pub fn delta_lower_bound(
    seq: impl Fn(u64) -> f64 + Sync,
    n: u64,
    m_max: u64,
    xi_grid_log2: u32,
) -> Result<DeltaLowerBound> {
    use rayon::prelude::*;
    if n == 0 {
        return Err(Error::EmptyPointSet {
            context: "super-uniform dispersion needs n >= 1",
        });
    }
    let grid = 1u64 << xi_grid_log2;
    let best = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let mut best = (f64::NEG_INFINITY, 0u64, 0.0f64);
            for g in 0..grid {
                let xi = g as f64 / grid as f64;
                let d = perturbed_dispersion(&seq, &DispersionQuery { n, m, xi })
                    .expect("n >= 1 checked above");
                if d > best.0 {
                    best = (d, m, xi);
                }
            }
            best
        })
        // Deterministic reduction: prefer the larger value, break ties on
        // the smaller (m, xi).
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX, f64::INFINITY),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(DeltaLowerBound {
        value: best.0,
        best_m: best.1,
        best_xi: best.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(vals: &[f64]) -> Vec<TorusPoint> {
        vals.iter().map(|v| TorusPoint::new(*v)).collect()
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(&pts(&[0.0, 0.5])).unwrap(), 0.25);
        assert_eq!(dispersion(&pts(&[0.0])).unwrap(), 0.5);
        assert_eq!(dispersion(&pts(&[0.0, 0.25, 0.5, 0.75])).unwrap(), 0.125);
    }

    #[test]
    fn dispersion_empty_is_an_error() {
        assert!(dispersion(&[]).is_err());
    }

    #[test]
    fn dyadic_dispersion_matches_float() {
        let d = [
            DyadicRational::from_parts(0, 1).unwrap(),
            DyadicRational::from_parts(1, 2).unwrap(),
            DyadicRational::from_parts(1, 1).unwrap(),
        ];
        let exact = dispersion_dyadic(&d).unwrap();
        // {0, 1/4, 1/2}: largest gap is 1/2, dispersion 1/4.
        assert_eq!(exact.value_f64(), 0.25);
    }

    #[test]
    fn perturbed_collapses_to_plain_dispersion_at_zero() {
        let seq = |i: u64| (i as f64 * 0.37).fract();
        let q = DispersionQuery { n: 20, m: 0, xi: 0.0 };
        let plain: Vec<TorusPoint> = (1..=20).map(|i| TorusPoint::new(seq(i))).collect();
        assert_eq!(
            perturbed_dispersion(seq, &q).unwrap(),
            dispersion(&plain).unwrap()
        );
    }

    #[test]
    fn perturbed_constant_sequence_example() {
        // a == 0, N=3, xi=1/3: transformed set {2/3, 1/3, 0}, dispersion 1/6.
        let q = DispersionQuery { n: 3, m: 0, xi: 1.0 / 3.0 };
        let d = perturbed_dispersion(|_| 0.0, &q).unwrap();
        assert!((d - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn tilt_is_torus_periodic() {
        let seq = |i: u64| (i as f64 * 0.61).fract();
        let a = perturbed_dispersion(seq, &DispersionQuery { n: 15, m: 2, xi: 0.3 }).unwrap();
        let b = perturbed_dispersion(seq, &DispersionQuery { n: 15, m: 2, xi: 1.3 }).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            // Adding terms can only shrink gaps.
            #[test]
            fn coverage_is_monotone_in_n(
                n in 1u64..60,
                m in 0u64..20,
                xi in 0.0..1.0f64,
                mult in 0.01..0.99f64,
            ) {
                let seq = move |i: u64| (i as f64 * mult).fract();
                let d1 = perturbed_dispersion(seq, &DispersionQuery { n, m, xi }).unwrap();
                let d2 = perturbed_dispersion(seq, &DispersionQuery { n: n + 7, m, xi }).unwrap();
                prop_assert!(d2 <= d1 + 1e-12);
            }

            // The dyadic path agrees with the float path on dyadic inputs.
            #[test]
            fn dyadic_matches_float(seed in 1u64..5000, n in 1u64..40) {
                let make = |i: u64| {
                    DyadicRational::from_parts(
                        (seed.wrapping_mul(i) % 256) as u128, 8,
                    ).unwrap()
                };
                let xi = DyadicRational::from_parts((seed % 64) as u128, 6).unwrap();
                let exact =
                    perturbed_dispersion_dyadic(|i| Ok(make(i)), n, 3, xi).unwrap();
                let float = perturbed_dispersion(
                    |i| make(i).value_f64(),
                    &DispersionQuery { n, m: 3, xi: xi.value_f64() },
                )
                .unwrap();
                prop_assert!((exact.value_f64() - float).abs() < 1e-12);
            }
        }
    }
}
