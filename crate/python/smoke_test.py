"""Smoke test for the qtangle_py extension.

Build first:
    cargo build -p qtangle-python --release --features extension-module
then run:
    python3 python/smoke_test.py [path/to/libqtangle_py.so]
"""

import os
import random
import shutil
import sys
import tempfile


def load(lib_path):
    tmp = tempfile.mkdtemp()
    shutil.copy(lib_path, os.path.join(tmp, "qtangle_py.so"))
    sys.path.insert(0, tmp)
    import qtangle_py

    return qtangle_py


def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    default = os.path.join(root, "target", "release", "libqtangle_py.so")
    if not os.path.exists(default):
        default = os.path.join(root, "target", "debug", "libqtangle_py.so")
    qt = load(sys.argv[1] if len(sys.argv) > 1 else default)

    rng = random.Random(11)
    seq = "".join(rng.choice("ACGT") for _ in range(600))
    gfa = qt.pangenome([("g1", seq)], 15)
    assert "P\tg1\t" in gfa

    lines = []
    for line in gfa.splitlines():
        if line.startswith("S\t"):
            line += "\tcn:f:1"
        lines.append(line)
    annotated = "\n".join(lines) + "\n"

    q = qt.build_qubo(annotated, "oriented")
    assert q.n > 0
    sol = qt.solve(q, "oracle-walk", seed=1, gfa=annotated)
    assert abs(sol["energy"] - q.energy(sol["bits"])) < 1e-6
    contigs = qt.decode(annotated, q, sol["bits"], "strict")
    assert len(contigs) == 1, contigs

    report = qt.evaluate(seq, [c[1] for c in contigs])
    assert report["pct_covered"] == 100.0, report
    assert report["pct_identity"] == 100.0, report

    same = qt.Qubo(q.to_text(), q.layout_json())
    assert same.energy(sol["bits"]) == q.energy(sol["bits"])
    print("qtangle_py", qt.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
