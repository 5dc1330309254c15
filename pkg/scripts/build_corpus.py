"""Regenerate the shipped corpus and its golden reports.

Each artifact is written in canonical form next to a ``<stem>.report.json``
golden file holding exactly what the command-line interface prints for it
under ``--json`` (``validate`` for models and spaces, ``check-transform``
for transformations).  Run from the repository root:

    python3 scripts/build_corpus.py
"""

from __future__ import annotations

import io
import json
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np

import causalkit as ck
from causalkit import cli, examples

CORPUS = Path(__file__).resolve().parent.parent / "src" / "causalkit" / "corpus"


def golden_for(command: list[str]) -> str:
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = cli.main(command + ["--json"])
    text = buffer.getvalue()
    json.loads(text)  # golden files must be valid JSON
    return text, code


def build() -> None:
    CORPUS.mkdir(exist_ok=True)

    artifacts: dict[str, tuple[object, str]] = {}

    for name, scm_fn in [
        ("xor", examples.xor_scm),
        ("parity", examples.parity_scm),
        ("fork", examples.fork_scm),
        ("collider", examples.collider_scm),
        ("mediator-confounder", examples.mediator_confounder_scm),
        ("faithfulness-full", examples.faithfulness_full_scm),
    ]:
        artifacts[name] = (scm_fn(), "validate")

    artifacts["faithfulness-independent"] = (
        examples.faithfulness_independent_space().materialize(), "validate")

    # product inclusion: a coin embedded into its product with the xor system
    coin = examples.coin_space().materialize()
    xor_space = ck.compile_scm(examples.xor_scm()).materialize()
    incl = ck.inclusion_into_product(coin, xor_space)
    artifacts["inclusion"] = (
        ck.Transformation(incl.source, incl.target.materialize(), incl.rho,
                          kernel=incl.kernel),
        "check-transform")

    # composition counterexample, finite scale: the (X1, Y) subsystem
    # included into the two-cause system, the parity abstraction of that
    # system, and their failing composite
    comp_scm = examples.composition_scm()
    full = ck.compile_scm(comp_scm).materialize()
    t1 = ck.inclusion_transform(comp_scm, ("X1", "Y"))
    t1 = ck.Transformation(t1.source.materialize(), full, t1.rho, kernel=t1.kernel)
    artifacts["composition-inclusion"] = (t1, "check-transform")

    target = ck.CoordinateSpace.make([("X", 2), ("Y", 2)])
    table = []
    for i in range(full.space.n_outcomes):
        x1, x2, y = full.space.outcome(i)
        table.append(target.index((x1 ^ x2, y)))
    rho = ck.IndexMap(full.space.names, target.names,
                      {"X1": "X", "X2": "X", "Y": "Y"})
    pushed = ck.pushforward_space(full, table, rho, target)
    t2 = pushed.transformation
    artifacts["composition-abstraction"] = (t2, "check-transform")

    composite, _ = ck.compose(t1, t2)
    artifacts["composition-counterexample"] = (composite, "check-transform")

    # Gaussian abstraction pair with its collapsing linear map
    src, tgt, matrix, rho_map = examples.abstraction_gaussian_pair()
    artifacts["gaussian-abstraction"] = (
        ck.GaussianTransform(source=src, target=tgt, rho=rho_map, matrix=matrix),
        "check-transform")

    for name, (obj, command) in sorted(artifacts.items()):
        path = CORPUS / f"{name}.json"
        ck.dump(obj, path)
        text, code = golden_for([command, str(path)])
        (CORPUS / f"{name}.report.json").write_text(text, encoding="utf-8")
        doc = json.loads(text)
        print(f"{name:28s} {command:16s} exit={code} passed={doc['passed']}")


if __name__ == "__main__":
    build()
