"""Print the Shannon-type certificates for the private-message claim and its ablations."""

from __future__ import annotations

from bcbound.prover import certify_claim1


def main() -> int:
    rep = certify_claim1()
    for name, rel, verdicts in rep.results:
        status = "proved" if all(v.provable for v in verdicts) else "NOT proved"
        print(f"{name:12s} {rel:2s} {status}")
    print(f"ablation (drop eq5):      {'provable' if rep.ablation.provable else 'not provable'}")
    print(f"pair ablation (eq4, eq5): {'provable' if rep.pair_ablation.provable else 'not provable'}")
    return 0 if rep.all_provable else 4


if __name__ == "__main__":
    raise SystemExit(main())
