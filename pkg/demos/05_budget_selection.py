#!/usr/bin/env python3
"""From predicted priorities to a schedule that fits the time budget.

Ranking is a stable descending sort; selection walks the ranking and takes
every test whose historical mean duration still fits, skipping (not
stopping at) tests that do not, so cheap lower-priority tests can fill
leftover budget.
"""

from testprio.prioritize import rank, select_within_budget

predictions = [
    ("ui-login", 0.91), ("payments-e2e", 0.88), ("search-index", 0.55),
    ("cart-flow", 0.55), ("smoke-api", 0.32), ("export-csv", 0.10),
]
durations = {
    "ui-login": 40.0, "payments-e2e": 210.0, "search-index": 95.0,
    "cart-flow": 30.0, "smoke-api": 12.0, "export-csv": 5.0,
}

suite = rank(predictions, durations=durations)
print("ranked suite (ties keep input order):")
for pos, t in enumerate(suite.tests, 1):
    print(f"  {pos}. {t.test_id:<13} priority {t.priority:.2f}  ~{t.mean_duration_s:.0f}s")

for budget in (60.0, 180.0, 400.0):
    result = select_within_budget(suite, budget)
    chosen = ", ".join(str(t) for t in result.order()) or "(nothing)"
    print(f"\nbudget {budget:5.0f}s -> run {chosen}")
    print(f"  used {result.used_s:.0f}s, skipped "
          f"{[tid for tid, _ in result.skipped]}")

# The expensive second-ranked test fits only the largest budget; meanwhile
# the walk keeps harvesting cheaper tests behind it.
tight = select_within_budget(suite, 60.0)
assert "payments-e2e" not in tight.order()
assert "smoke-api" in tight.order()
