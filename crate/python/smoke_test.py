#!/usr/bin/env python3
"""Smoke test for the normforge Python extension.

Build the module first, then run this script from the repository root:

    cargo build -p normforge-py --release
    python3 python/smoke_test.py
"""
import math
import shutil
import sys
import tempfile
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libnormforge.so",
        root / "target" / "debug" / "libnormforge.so",
    ]
    library = next((p for p in candidates if p.exists()), None)
    if library is None:
        sys.exit("libnormforge.so not found; run `cargo build -p normforge-py` first")
    staging = Path(tempfile.mkdtemp(prefix="normforge-py-"))
    shutil.copy2(library, staging / "normforge.so")
    sys.path.insert(0, str(staging))
    import normforge

    return normforge


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


def main():
    nf = load_module()

    params = nf.CommunityParams(
        benefit=10.0, cost=1.0, discount=0.8, turnover=0.1, report_error=0.2
    )
    assert close(params.delta(), 0.72) and close(params.gamma(), 0.576)

    scheme = nf.ReputationScheme(1)
    assert scheme.punishment_length == 1 and scheme.entry_reputation == 1

    dist = nf.stationary(params, scheme)
    assert close(dist[0], 0.18, 1e-12) and close(dist[1], 0.82, 1e-12)
    assert close(nf.closed_form_stationary(params, 2)[1], 0.1296, 1e-15)

    strategy = nf.SocialStrategy.named("serve-nonzero", 1)
    assert strategy.matrix == "DFDF" and strategy.action(0, 0) == "D"
    norm = nf.SocialNorm(scheme, strategy)
    report = nf.evaluate(params, norm)
    assert close(report["welfare"], 7.38, 1e-12)
    assert report["sustainable"] is True
    assert close(report["longterm_values"][1] - report["longterm_values"][0], 10.0)
    assert close(report["whitewash_incentive"], 10.0)
    assert report["whitewash_proof"] is None
    assert nf.is_sustainable(params, norm) is True

    best = nf.optimize_fixed(params, 1)
    assert best["strategy"] == "FFDF" and best["index"] == 11
    assert close(best["welfare"], 7.6716, 1e-12)
    assert best["feasible_count"] == 6 and best["cooperative"] is True

    by_length = nf.optimize_variable_m(params, 2)
    assert len(by_length["per_length"]) == 2
    assert by_length["best"]["welfare"] >= by_length["per_length"][0]["welfare"] - 1e-12

    bound = nf.whitewash_bound(params)
    assert close(bound, 11.0 / 0.424)
    whitewash = nf.optimize_whitewash(params, 1, math.ceil(bound))
    # with the constraint slack, the top-entry row reduces to the fixed problem
    top_entry = whitewash["per_entry"][1]
    assert top_entry["strategy"] == best["strategy"]
    assert close(top_entry["welfare"], best["welfare"], 1e-12)
    assert whitewash["best"]["welfare"] >= best["welfare"] - 1e-12
    assert nf.zero_welfare(params) is False

    # a gentler punishment: one-step drops instead of full resets
    gentle = nf.ReputationScheme(3, punishment_length=1)
    gentle_dist = nf.stationary(params, gentle)
    assert close(sum(gentle_dist), 1.0, 1e-12)
    gentle_report = nf.evaluate(
        params, nf.SocialNorm(gentle, nf.SocialStrategy.named("serve-upward", 3))
    )
    assert gentle_report["sustainable"] is True
    assert 0.0 < gentle_report["welfare"] < params.benefit - params.cost

    sim = nf.simulate(
        params, norm, population=200, horizon=40, burn_in=5, seed=7, rollouts=2000
    )
    again = nf.simulate(
        params, norm, population=200, horizon=40, burn_in=5, seed=7, rollouts=2000
    )
    assert sim == again, "simulation must be reproducible for one seed"
    assert sim["rng"] == "ChaCha12"
    assert abs(sim["welfare"] - 7.38) < 0.5
    assert abs(sum(sim["distribution"]) - 1.0) < 1e-9

    try:
        nf.CommunityParams(
            benefit=1.0, cost=1.0, discount=0.8, turnover=0.1, report_error=0.2
        )
    except ValueError:
        pass
    else:
        raise AssertionError("benefit <= cost must raise ValueError")

    try:
        nf.optimize_fixed(params, 4)
    except RuntimeError:
        pass
    else:
        raise AssertionError("enumeration beyond the limit must raise RuntimeError")

    assert "serve-upward" in nf.strategy_names()
    print("normforge python smoke test: ok")


if __name__ == "__main__":
    main()
