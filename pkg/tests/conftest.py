"""Shared test configuration: acceptance summary printed after the run."""
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

CRITERIA = {
    1: "prefactored weights reproduce published beta and b",
    2: "classical weights reproduce published table",
    3: "averaged sweeps equal the classical operator (periodic)",
    4: "dissipation cancels in the averaged symbol",
    5: "convergence orders, linear advection",
    6: "convergence orders, Burgers pre-shock",
    7: "prefactored vs classical L2 agreement",
    8: "prefactored march faster than classical",
    9: "Burgers exact solution residual",
    10: "boundary perturbation decays like sum|beta|/beta0",
    11: "spot check: PC6 linear error magnitude",
}

_outcomes: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    _outcomes.setdefault(props["criterion"], []).append((report.passed, props.get("detail", "")))


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_outcomes):
        results = _outcomes[num]
        ok = all(r[0] for r in results)
        label = "spot" if num == 11 else f"{num:>4}"
        tr.write_line(f"{'PASS' if ok else 'FAIL'} {label}  {CRITERIA[num]} "
                      f"({sum(r[0] for r in results)}/{len(results)})")
        for passed, detail in results:
            if detail:
                tr.write_line(f"            {'ok ' if passed else 'BAD'} {detail}")
