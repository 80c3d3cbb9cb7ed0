"""Run the full numerical certification suite and print the report table.

Equivalent to `mixreg verify`; exits nonzero if any check fails.

Run: python demos/certification_suite.py
"""

import sys

from mixreg.verification import format_report_table, run_all

reports = run_all(seed=0)
print(format_report_table(reports))
failures = [r for r in reports if not r.passed]
print(f"\n{len(reports) - len(failures)}/{len(reports)} checks passed")
sys.exit(1 if failures else 0)
