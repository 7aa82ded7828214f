from collections import OrderedDict

# criterion number -> list of (part, passed, detail); filled by test_acceptance
ACCEPTANCE = OrderedDict()


def record(criterion, part, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
    print(f"[criterion {criterion}] {part}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[crit]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}={'ok' if p else 'FAIL'} ({d})" for name, p, d in parts)
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'} - {detail}")
