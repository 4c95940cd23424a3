"""Scan throughput: pure Python kernel vs the compiled one.

Builds a synthetic but representative input (directives, class bodies,
data lines, expressions), then times both scan kernels over the same
text.  Run from the repository root:

    python3 benchmarks/bench_lexer.py [--lines N] [--repeat K]
"""

import argparse
import random
import time

from gtrans.lexer import _pylex

try:
    from gtrans.lexer import _speedups
except ImportError:
    _speedups = None


def build_corpus(n_lines: int, seed: int = 4) -> list[str]:
    rng = random.Random(seed)
    lines = []
    for k in range(n_lines):
        roll = rng.random()
        if roll < 0.15:
            lines.append("#if count_%d > %d * (x + 1)" % (k, rng.randrange(99)))
        elif roll < 0.25:
            lines.append("@while offset <= limit && !done")
        elif roll < 0.45:
            lines.append(
                "db %d, 0x%x, 'Q', \"str_%d\""
                % (rng.randrange(255), rng.randrange(1 << 16), k)
            )
        elif roll < 0.6:
            lines.append("class op_%d x , y { dw x dw y } alias_%d" % (k, k))
        elif roll < 0.8:
            lines.append(
                "total = total * 31 + (field_%d >> 2) %% 0x%x"
                % (k, 1 + rng.randrange(1 << 12))
            )
        else:
            lines.append("target_%d : rq %d" % (k, rng.randrange(8)))
    return lines


def best_time(scan, lines: list[str], repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for text in lines:
            scan(text)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--lines", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    lines = build_corpus(args.lines)
    chars = sum(len(s) for s in lines)
    print(f"corpus: {len(lines)} lines, {chars} chars")

    t_pure = best_time(_pylex.scan, lines, args.repeat)
    print(f"pure python : {t_pure:8.4f} s  ({len(lines) / t_pure:10.0f} lines/s)")

    if _speedups is None:
        print("compiled    : not built (run pip install -e . to build it)")
        return
    sample = [_speedups.scan(s) for s in lines[:200]]
    assert sample == [_pylex.scan(s) for s in lines[:200]], "kernels disagree"
    t_fast = best_time(_speedups.scan, lines, args.repeat)
    print(f"compiled    : {t_fast:8.4f} s  ({len(lines) / t_fast:10.0f} lines/s)")
    print(f"speedup     : {t_pure / t_fast:8.2f}x")


if __name__ == "__main__":
    main()
