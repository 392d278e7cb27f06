"""Watch the progressive scheduler react to three validation-score regimes.

    python demos/curriculum_trace.py

The scheduler picks between the clean level w1 and the frontier level w_p
each epoch (memory-bank argmin), and unlocks the next level when the
frontier's relative score change stalls under the dynamic threshold:

  - constant scores: stalls immediately, so the frontier climbs to w4 fast;
  - fast improvement (+20%/epoch): |dQ| stays above tau, unlocks deferred;
  - improvement that plateaus: unlocks resume once the gains flatten.
"""

from hoibench import curriculum as cur


def show(title: str, evaluator, epochs: int = 16) -> None:
    records = cur.run(evaluator, epochs)
    print(f"\n=== {title} ===")
    print(f"{'t':>3} {'chosen':>6} {'p':>2} {'N':>16} {'dq':>9} {'tau':>9}")
    for r in records:
        dq = "-" if r.dq is None else f"{r.dq:+.3f}"
        tau = "-" if r.tau is None else (f"{r.tau:9.3f}" if r.tau < 1e3 else "    large")
        print(f"{r.t:>3} {'w' + str(r.chosen):>6} {r.p:>2} {str(list(r.counts)):>16} {dq:>9} {tau:>9}")
    summary = cur.summarize(records)
    print(f"final p={summary['final_p']}, upgrades at {summary['upgrade_epochs']}, histogram {summary['chosen_histogram']}")


def main() -> None:
    show("constant scores", cur.constant_evaluator(50.0))

    show("fast improvement (+20% per epoch)", lambda t, level: 10.0 * (1.2 ** t))

    def plateau(t: int, level: int) -> float:
        return 10.0 * (1.2 ** min(t, 6))

    show("improvement that plateaus after epoch 6", plateau)


if __name__ == "__main__":
    main()
