"""Audit design and correction arithmetic on worked examples.

Walks the sampling design (margin of error with finite-population
correction, proportional stratified allocation with design weights),
weighted agreement metrics (Cohen's kappa from a design-weighted confusion
matrix), and the compound correction multiplier applied to pair tallies.

Usage:  python3 demos/audit_math.py
"""

from __future__ import annotations

from regmap.audit import (
    WeightedConfusion,
    adjust_counts,
    compound_multiplier,
    kappa_from_confusion,
    moe_fpc,
    plan_sample,
    sample_size_for_moe,
    weighted_confusion,
)


def main() -> None:
    # --- Sampling design ---------------------------------------------------
    strata = {"crossref": 10_023, "openalex": 9_382}
    N = sum(strata.values())
    n = 1_000
    print("sampling design")
    print(f"  population N = {N:,} across strata {strata}")
    n0, n_fpc = sample_size_for_moe(0.03, p=0.5, N=N)
    print(f"  SRS n for a 3% margin at p=0.5: n0 = {n0:.2f}, with FPC {n_fpc:.2f}")
    print(f"  achieved margin at n = {n}: {moe_fpc(0.5, n, N):.5f}")
    plan = plan_sample(strata, n)
    for tag in strata:
        print(
            f"  stratum {tag:9s} n_h = {plan.allocations[tag]:4d}"
            f"  weight w_h = N_h/n_h = {plan.weights[tag]:.3f}"
        )

    # --- Weighted agreement ------------------------------------------------
    # Design-weighted confusion masses from a finished relevance audit
    # (each labeled record counts with its stratum weight w_h).
    print("\nweighted agreement (relevance stage)")
    cm = WeightedConfusion(tp=7639.846, fp=480.093, fn=96.158, tn=11166.809)
    k = kappa_from_confusion(cm)
    m = weighted_confusion(
        [("pos", "pos", cm.tp), ("pos", "neg", cm.fp),
         ("neg", "pos", cm.fn), ("neg", "neg", cm.tn)],
        positive_label="pos",
    )
    print(f"  observed agreement P_o = {k.p_o:.6f}, chance P_e = {k.p_e:.6f}")
    print(f"  kappa = {k.kappa:.6f}")
    print(f"  precision = {m.precision:.6f}, miss rate = {m.miss_rate:.6f}")

    # --- Compound multiplier -----------------------------------------------
    print("\ncompound correction multiplier")
    ms = compound_multiplier(
        prec_relevance=0.940875,
        prec_domain=0.923450,
        prec_predictor=0.760005,
        match_rdc=0.800000,
        prec_status=0.785714,
    )
    print(f"  m_other (first four stages)  = {ms.m_other:.6f}")
    print(f"  S = m_other * prec_status    = {ms.compound:.6f}")
    adj = adjust_counts(2_329, ms, kind="pairs")
    print(f"  2,329 high-confidence pairs -> corrected {adj.value:.3f}")
    unique = adjust_counts(1_749, ms, kind="unique-papers")
    print(f"  1,749 unique names stay {unique.value:.0f} ({unique.note})")


if __name__ == "__main__":
    main()
