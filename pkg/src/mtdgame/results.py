"""Result bundles and their JSON/CSV emission.

Numbers leave the program as decimal strings with 12 significant digits so
that the JSON and CSV forms of one bundle carry identical text.
"""
from __future__ import annotations

import csv
import io
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .pipeline import Solution
from .specdoc import spec_hash, spec_to_document


def fmt(value) -> str:
    if value is None:
        return "undefined"
    return format(float(value), ".12g")


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def metadata(spec, label: int | None = None, seed: int | None = None, started: str | None = None) -> dict:
    meta = {
        "spec_hash": spec_hash(spec),
        "tool_version": __version__,
        "solver_label": label,
        "started": started or now_iso(),
        "finished": now_iso(),
    }
    if seed is not None:
        meta["seed"] = seed
    return meta


def _matrix(probs: np.ndarray) -> list[list[str]]:
    # rows are states, entries are action probabilities
    return [[fmt(p) for p in probs[:, s]] for s in range(probs.shape[1])]


def solution_bundle(sol: Solution, started: str | None = None) -> dict:
    cert = sol.certificate
    K = sol.spec.num_states
    return {
        "metadata": metadata(sol.spec, sol.label, started=started),
        "spec": spec_to_document(sol.spec),
        "bimatrix_shape": list(sol.game.shape),
        "nash": {
            "ok": sol.nash.ok,
            "row_regret": fmt(sol.nash.row_regret),
            "col_regret": fmt(sol.nash.col_regret),
        },
        "policies": {
            "defender": _matrix(sol.defender_policy.probs),
            "attacker": _matrix(sol.attacker_policy.probs),
        },
        "values": {
            "defender": [fmt(v) for v in sol.values.defender],
            "attacker": [fmt(v) for v in sol.values.attacker],
        },
        "certificate": {
            "passed": cert.passed,
            "eps": fmt(cert.eps),
            "defender_regret": [fmt(cert.defender_regret[s]) for s in range(K)],
            "attacker_regret": [fmt(cert.attacker_regret[s]) for s in range(K)],
        },
    }


def bundle_tables(bundle: dict) -> dict[str, tuple[list[str], list[list[str]]]]:
    """Flatten a solve bundle into named CSV tables (header, rows)."""
    tables = {}
    values = bundle["values"]
    tables["values"] = (
        ["state", "value_defender", "value_attacker"],
        [[str(s + 1), d, a] for s, (d, a) in enumerate(zip(values["defender"], values["attacker"]))],
    )
    for who in ("defender", "attacker"):
        rows = []
        for s, col in enumerate(bundle["policies"][who]):
            for a, p in enumerate(col):
                rows.append([str(s + 1), str(a + 1), p])
        tables[f"{who}_policy"] = (["state", "action", "probability"], rows)
    cert = bundle["certificate"]
    tables["certificate"] = (
        ["state", "defender_regret", "attacker_regret", "passed"],
        [
            [str(s + 1), d, a, str(cert["passed"]).lower()]
            for s, (d, a) in enumerate(zip(cert["defender_regret"], cert["attacker_regret"]))
        ],
    )
    return tables


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))


def load_policies(path) -> tuple[np.ndarray, np.ndarray, dict]:
    """Read ``E`` and ``H`` back from a solve bundle written as JSON."""
    bundle = json.loads(Path(path).read_text(encoding="utf-8"))
    E = np.array([[float(p) for p in col] for col in bundle["policies"]["defender"]]).T
    H = np.array([[float(p) for p in col] for col in bundle["policies"]["attacker"]]).T
    return E, H, bundle
