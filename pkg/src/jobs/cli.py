"""Command-line dispatcher: `python -m src <verb> [options]`."""
import sys
from typing import Callable, Dict, Optional, Sequence

from src.jobs import evaluate, gen_data, report, run_unlearn, split_forget, sweep, train_original

VERBS: Dict[str, Callable[[Optional[Sequence[str]]], int]] = {
    "gen-data": gen_data.main,
    "train": train_original.main,
    "split": split_forget.main,
    "unlearn": run_unlearn.main,
    "eval": evaluate.main,
    "report": report.main,
    "sweep": sweep.main,
}


def usage() -> str:
    return "usage: python -m src {" + ",".join(VERBS) + "} [options]"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(usage())
        return 0 if argv else 2
    verb, rest = argv[0], argv[1:]
    if verb not in VERBS:
        print(f"unknown command {verb!r}\n{usage()}", file=sys.stderr)
        return 2
    return VERBS[verb](rest)


if __name__ == "__main__":
    sys.exit(main())
