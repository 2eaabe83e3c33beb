#!/usr/bin/env python3
"""
Basic usage example for Gaussian Locality.

This script demonstrates how to use the Gaussian Locality library
programmatically in your own Python code.
"""

from gaussian_locality import (
    ChshSetting,
    LocalityError,
    TmssParameters,
    build_lhv_model,
    certify_click_setting,
    click_families,
    evaluate_chsh,
    lossy_tmss,
    optimize_chsh,
    simulate,
)
from gaussian_locality.certifier import boundary_eta, lossy_tmss_noise_bound, region_condition

EPSILON = 0.02


def main():
    """Demonstrate basic usage of Gaussian Locality."""

    # Example 1: Certify a weakly squeezed, lossy state
    print("Example 1: Certificate")
    print("-" * 50)

    params = TmssParameters(eta=0.1, nu=1.05)
    state = lossy_tmss(params)
    alphas = (0.12, -0.48)
    certificate = certify_click_setting(state, EPSILON, alphas=alphas, betas=(-0.12, 0.48))

    print(f"t_max: {lossy_tmss_noise_bound(params.eta, params.nu):.5f}")
    print(f"Region condition: {region_condition(params.eta, params.nu, EPSILON)}")
    if certificate is None:
        print("No certificate")
    else:
        print(f"Certified with margin {certificate.margin:.3e}")

    # Example 2: Run the certified model and compare with the Born rule
    print("\nExample 2: Hidden-variable simulation")
    print("-" * 50)

    if certificate is not None:
        try:
            model = build_lhv_model(
                certificate,
                state,
                click_families(EPSILON, alphas, prefix="x"),
                click_families(EPSILON, (-0.12, 0.48), prefix="y"),
            )
            report = simulate(model, samples=100_000, seed=7)
            s_hat, s_err = report.empirical_chsh()
            print(f"max |z|: {report.max_abs_z:.2f}")
            print(f"Sampled S: {s_hat:.4f} ± {s_err:.4f}")
        except LocalityError as e:
            print(f"Simulation failed: {e}")

    # Example 3: CHSH at a point outside the region
    print("\nExample 3: CHSH violation")
    print("-" * 50)

    violating = lossy_tmss(TmssParameters(eta=0.95, nu=1.4))
    evaluation = evaluate_chsh(violating, ChshSetting.symmetric(0.12, -0.48, EPSILON))
    print(f"S at the reference setting: {evaluation.S:.4f}")

    setting, best = optimize_chsh(violating, EPSILON)
    print(f"Optimised S: {best.S:.4f} at alpha={setting.alpha}")

    # Example 4: Where the region ends for a fixed squeezing
    print("\nExample 4: Boundary transmittance")
    print("-" * 50)

    for nu in (1.05, 1.1, 1.4):
        eta = boundary_eta(nu, EPSILON)
        print(f"nu={nu}: eta* = {'none' if eta is None else f'{eta:.5f}'}")


if __name__ == "__main__":
    main()
