#!/usr/bin/env python3
"""Does deeper history help? Train one model on 4-cycle windows and one on
10-cycle windows, replay identically, compare fault-detection scores.

With failure behavior that mixes transient bursts and stable per-test
flakiness, the wider window wins: it can still see a flaky test whose last
few cycles happened to pass or not run.
"""

from testprio.metrics import format_table
from testprio.pipeline import ExperimentPlan, history_length_study
from testprio.simulate import IOFROL_LIKE, PAINT_CONTROL_LIKE, generate_history

for profile, seed in ((PAINT_CONTROL_LIKE, 42), (IOFROL_LIKE, 11)):
    cycles = generate_history(profile, seed=seed)
    study = history_length_study(
        ExperimentPlan(dataset=cycles, seed=3, name=profile.name), (4, 10))
    print(f"== {profile.name} ==")
    print(format_table(
        ["window", "mean_apfd", "mean_napfd"],
        [[r["window"], r["mean_apfd"], r["mean_napfd"]] for r in study.rows]))
    print(f"window 10 minus window 4: APFD {study.delta_apfd:+.4f}, "
          f"NAPFD {study.delta_napfd:+.4f}\n")
