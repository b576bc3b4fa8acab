"""Evaluate a hand-written multi-responsibility test and print who it checks.

    python3 scripts/diagnose_listing.py
"""
import sys
from pathlib import Path

from srgen.emitter import parse_suite
from srgen.pipeline import evaluate_suite
from srgen.subject import parse_subject_file

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

TEST = """
test test17 {
    var v0: string = "";
    var v1: float = 0.0;
    var v2: BankAccount = new BankAccount(v0, v1);
    v2.closeAccount();
    var v3: float = 665.49;
    v2.deposit(v3);
    var v4: float = 0.05;
    v2.transferFunds(v2, v4);
    assert v2.getBalance() == 665.49 within 0.01;
}
"""


def main() -> int:
    unit = parse_subject_file(CORPUS / "bank_account.sub")
    ev = evaluate_suite(unit, parse_suite(TEST, unit))
    for rec in ev.metrics.tests:
        verdict = "single responsibility" if len(rec.responsible_methods) <= 1 else "violation"
        print(f"{rec.name}: inferred focal {rec.inferred_focal}, responsible "
              f"{rec.responsible_methods}, coherence {rec.coherence:.2f} -> {verdict}")
    return 1 if ev.failures else 0


if __name__ == "__main__":
    sys.exit(main())
