//! Cross-module consistency: the labeled sampler, the diffusion ensemble,
//! the closed-form stationary law, and the quadrature oracle describe the
//! same splits of mass.

use pdlab::density::{MarginalDensity, RankedTail, TwoTypeCdf, TwoTypeParams};
use pdlab::diffusion::ensemble_stationary_positions;
use pdlab::quad::integrate;
use pdlab::rng::RngStream;
use pdlab::sampling::sample_labeled_measure;
use pdlab::stats::{ks_critical, ks_statistic};
use pdlab::PdParams;
use rand::Rng;

const ALPHA: f64 = 0.4;
const THETA: f64 = 1.1;
const P: f64 = 0.35;

/// Tracked-cell mass of one labeled draw: atoms labeled below `p`, with
/// the unbroken tail split proportionally (its atoms carry independent
/// uniform labels, and at truncation 400 the tail holds about 1e-4 mass).
fn labeled_split(params: &PdParams, rng: &mut impl Rng) -> f64 {
    let measure = sample_labeled_measure(params, 400, |r: &mut _| r.gen::<f64>(), rng)
        .expect("labeled draw");
    let mut mass = measure.residual() * P;
    for &(label, weight) in measure.atoms() {
        if label <= P {
            mass += weight;
        }
    }
    mass
}

#[test]
fn labeled_sampler_follows_the_closed_form_stationary_law() {
    let params = PdParams::new_two_param(ALPHA, THETA).unwrap();
    let tp = TwoTypeParams::new(ALPHA, THETA, P).unwrap();
    let cdf = TwoTypeCdf::new(&tp, 600).unwrap();
    let draws = 1500;
    let mut rng = RngStream::new(0x0ddba11, 0).rng();
    let mut xs: Vec<f64> = (0..draws).map(|_| labeled_split(&params, &mut rng)).collect();
    xs.sort_unstable_by(f64::total_cmp);
    let stat = ks_statistic(&xs, |x| cdf.cdf(x)).unwrap();
    let critical = ks_critical(draws, 0.01).unwrap();
    assert!(stat < critical, "ks {stat} vs critical {critical}");
}

#[test]
fn diffusion_ensemble_follows_the_same_law() {
    let tp = TwoTypeParams::new(ALPHA, THETA, P).unwrap();
    let cdf = TwoTypeCdf::new(&tp, 600).unwrap();
    let paths = 1200;
    let mut xs = ensemble_stationary_positions(&tp, 1e-3, 8.0, paths, 0x0ddba12).unwrap();
    let mean = xs.iter().sum::<f64>() / paths as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (paths - 1) as f64;
    let se = (var / paths as f64).sqrt();
    // the tracked cell keeps its seed mass in expectation
    assert!(
        (mean - P).abs() < 4.0 * se + 1e-3,
        "mean {mean} vs seed {P} (se {se})"
    );
    xs.sort_unstable_by(f64::total_cmp);
    let stat = ks_statistic(&xs, |x| cdf.cdf(x)).unwrap();
    let critical = ks_critical(paths, 0.01).unwrap();
    assert!(stat < critical, "ks {stat} vs critical {critical}");
}

#[test]
fn extreme_marginal_integrates_to_the_largest_atom_law() {
    let params = PdParams::new_two_param(0.5, 0.5).unwrap();
    let density = MarginalDensity::new(&params, 1, 40.0).unwrap();
    // positive and finite all the way into the upper corner
    let corner = density.density(&[0.999]).unwrap();
    assert!(corner.is_finite() && corner > 0.0, "corner density {corner}");
    // integral of the density across (0.55, 0.999) against the
    // largest-atom distribution from the tail table
    let tail = RankedTail::build(0.5, 0.5, 40.0).unwrap();
    let mass = integrate(
        |x| density.density(&[x]).expect("interior point"),
        0.55,
        0.999,
        1e-8,
    )
    .unwrap()
    .value;
    let want = tail.largest_atom_cdf(0.999) - tail.largest_atom_cdf(0.55);
    assert!((mass - want).abs() < 1e-6, "mass {mass} vs cdf gap {want}");
}
