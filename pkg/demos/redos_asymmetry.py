"""Why the gateway's FTP scanner falls over on a run of 'a's.

The pattern ``(a|a)*b`` is ambiguous: every 'a' can be matched by either
branch, so a backtracking matcher explores 2^n paths before concluding
there is no 'b'. The budgeted engine keeps a set of live states instead
and does a constant amount of work per input byte.

    python3 demos/redos_asymmetry.py
"""

from algsim.patterns import StepLimitReached, compile, match_backtracking, match_budgeted

evil = compile("(a|a)*b")
print(f"{'n':>3} {'backtracking':>14} {'budgeted':>9}")
for n in (4, 8, 12, 16, 20, 24):
    text = "a" * n
    try:
        bt = f"{match_backtracking(evil, text, max_steps=5_000_000).steps:,}"
    except StepLimitReached:
        bt = "> 5,000,000"
    print(f"{n:>3} {bt:>14} {match_budgeted(evil, text, 10**6).steps:>9}")

# both engines agree whenever the backtracker finishes
for text in ("ab", "aaab", "aaaa", "b", ""):
    assert match_backtracking(evil, text).matched == match_budgeted(evil, text, 1000).matched
print("engines agree on the short cases")
