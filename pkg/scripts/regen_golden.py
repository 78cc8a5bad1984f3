"""Rebuild tests/golden/ from the bundled 10,000-line corpus.

Run after an intentional change to any analysis or report output:

    python3 scripts/regen_golden.py
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

from tweetatlas.cli import main
from tweetatlas.report import REQUIRED

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "tests" / "data" / "corpus_10k.jsonl"
GOLDEN = ROOT / "tests" / "golden"


def golden_names(out: Path) -> list[str]:
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    return sorted(set(REQUIRED) | {a["path"] for a in manifest["artifacts"]})


def regenerate() -> list[str]:
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "out"
        rc = main(["run", "--input", str(CORPUS), "--out-dir", str(out)])
        if rc != 0:
            sys.exit(rc)
        names = golden_names(out)
        if GOLDEN.exists():
            shutil.rmtree(GOLDEN)
        GOLDEN.mkdir(parents=True)
        for name in names:
            shutil.copyfile(out / name, GOLDEN / name)
    return names


if __name__ == "__main__":
    for name in regenerate():
        print(name)
