//! Acceptance gate: every numerical contract the crate makes, at full size
//! and stated tolerance, one pass/fail line per criterion.
//!
//! Each test prints its verdict (visible with `--nocapture`) before
//! asserting, so a red run still reports every criterion it reached. The
//! checks themselves live in `pdlab::verify`; these tests run them at the
//! default sizes and fail loudly with the worst offending check.

use pdlab::rng::DEFAULT_SEED;
use pdlab::verify::{self, Report};

fn gate(criterion: &str, report: Report) {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!("{criterion}: {verdict}");
    if !report.pass {
        for check in report.checks.iter().filter(|c| !c.pass) {
            println!(
                "  failed: {} (actual {}, expected {}, tol {})",
                check.name, check.actual, check.expected, check.tol
            );
        }
    }
    assert!(
        report.pass,
        "{criterion} failed; worst check: {:?}",
        report.worst()
    );
}

#[test]
fn criterion_01_partition_law_normalization() {
    gate(
        "criterion 01, partition law normalization",
        verify::epsf_suite().unwrap(),
    );
}

#[test]
fn criterion_02_block_count_identity_and_growth() {
    gate(
        "criterion 02, block count identity and growth",
        verify::aux_identity_suite().unwrap(),
    );
}

#[test]
fn criterion_03_generator_zero_mean_and_symmetry() {
    gate(
        "criterion 03, generator zero mean and symmetry",
        verify::generator_suite().unwrap(),
    );
}

#[test]
fn criterion_04_spectrum_eigenvalues_and_multiplicities() {
    gate(
        "criterion 04, spectrum eigenvalues and multiplicities",
        verify::spectrum_suite().unwrap(),
    );
}

#[test]
fn criterion_05_moments_against_ranked_sampler() {
    gate(
        "criterion 05, closed-form moments vs ranked sampler",
        verify::moments_mc_suite(verify::DEFAULT_MOMENT_DRAWS, DEFAULT_SEED).unwrap(),
    );
}

#[test]
fn criterion_06_ensemble_moments_track_the_flow() {
    gate(
        "criterion 06, simulator ensemble vs exact moment flow",
        verify::diffusion_ode_suite(verify::DEFAULT_ODE_PATHS, DEFAULT_SEED).unwrap(),
    );
}

#[test]
fn criterion_07_updown_reversibility_and_occupation() {
    gate(
        "criterion 07, up-down reversibility and occupation",
        verify::updown_suite(verify::DEFAULT_UPDOWN_STEPS, DEFAULT_SEED).unwrap(),
    );
}

#[test]
fn criterion_08_two_type_stationary_law() {
    gate(
        "criterion 08, two-type stationary law",
        verify::two_type_suite(verify::DEFAULT_TWO_TYPE_PATHS, DEFAULT_SEED).unwrap(),
    );
}

#[test]
fn criterion_09_largest_atom_marginal() {
    gate(
        "criterion 09, largest atom marginal vs sampler",
        verify::ranked_marginal_suite(verify::DEFAULT_MARGINAL_DRAWS, DEFAULT_SEED).unwrap(),
    );
}

#[test]
fn criterion_10_selection_tilt() {
    gate(
        "criterion 10, selection tilt",
        verify::selection_suite(verify::DEFAULT_SELECTION_PATHS, DEFAULT_SEED).unwrap(),
    );
}
