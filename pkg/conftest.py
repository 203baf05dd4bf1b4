"""Terminal summary: one PASS/FAIL line per acceptance criterion, collected
from every acceptance test file in the repository."""

import re

_ACCEPTANCE: dict[str, str] = {}

_CRITERIA = {
    "A1": "outcome draw uniformity (N=2, N=4; 30k ids; ±0.01; <5s)",
    "A2": "classification agrees with brute-force oracle on 1000 records",
    "A3": "corruption invariants over 500 corrupted records",
    "A4": "EM/F1 golden suite + EM=>F1 property over 10^4 fuzzed pairs",
    "A5": "PAR/CR extremes under identity and empty compressors",
    "A6": "subset manifest arithmetic (10, 4, 40.0), recomputable",
    "A7": "end-to-end pipeline determinism and report shape",
    "A8": "gateway caching, in-flight cap, adapter conformance",
    "A9": "trainer halves loss in 50 steps; gradients match finite differences",
    "A10": "served compressor passes conformance; end-to-end CR < 1.0",
}


def pytest_runtest_logreport(report):
    if "acceptance" not in report.nodeid:
        return
    m = re.search(r"test_(a\d+)_", report.nodeid)
    if m is None:
        return
    crit = m.group(1).upper()
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[crit] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=lambda c: int(c[1:])):
        status = {"passed": "PASS", "failed": "FAIL"}.get(_ACCEPTANCE[crit],
                                                          _ACCEPTANCE[crit].upper())
        terminalreporter.write_line(f"{crit} {status}  {_CRITERIA.get(crit, '')}")
