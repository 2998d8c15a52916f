"""Text formats for boxes, protocols, states, reports and curves.

Floats are written with Python's shortest round-trip repr, so every
reader/writer pair reproduces its input bit for bit.
"""
from __future__ import annotations

import csv
import io
import json

import numpy as np

from .box import Box, validate_box
from .errors import MalformedWiring
from .wiring import BoolFn, Branch, PartyWiring, Protocol

# --- boxes ------------------------------------------------------------------------


def box_to_dict(b: Box) -> dict:
    return {"p": np.transpose(b.table, (2, 3, 0, 1)).tolist()}


def box_from_dict(d: dict, tol: float = 1e-12) -> Box:
    p = np.asarray(d["p"], dtype=float)
    if p.shape != (2, 2, 2, 2):
        raise MalformedWiring(f"box table must be 2x2x2x2, got {p.shape}")
    return validate_box(np.transpose(p, (2, 3, 0, 1)), tol=tol)


def dump_box(b: Box) -> str:
    return json.dumps(box_to_dict(b))


def load_box(text: str, tol: float = 1e-12) -> Box:
    return box_from_dict(json.loads(text), tol)


# --- protocols -----------------------------------------------------------------------


def _party_to_dict(w: PartyWiring) -> dict:
    return {
        "order": list(w.order),
        "input_fns": [{"table": hex(f.table), "reads": list(f.reads)} for f in w.input_fns],
        "output_fn": hex(w.output_fn),
    }


def _party_from_dict(n: int, d: dict) -> PartyWiring:
    try:
        fns = tuple(BoolFn(int(f["table"], 16), tuple(f["reads"])) for f in d["input_fns"])
        return PartyWiring(n, tuple(d["order"]), fns, int(d["output_fn"], 16))
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedWiring(f"bad party wiring: {e}") from e


def protocol_to_dict(p: Protocol) -> dict:
    return {
        "n": p.n,
        "branches": [
            {"weight": br.weight, "alice": _party_to_dict(br.alice), "bob": _party_to_dict(br.bob)}
            for br in p.branches
        ],
    }


def protocol_from_dict(d: dict) -> Protocol:
    try:
        n = int(d["n"])
        branches = d["branches"]
        return Protocol(tuple(
            Branch(float(br["weight"]), _party_from_dict(n, br["alice"]), _party_from_dict(n, br["bob"]))
            for br in branches
        ))
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedWiring(f"bad protocol file: {e}") from e


def dump_protocol(p: Protocol) -> str:
    return json.dumps(protocol_to_dict(p))


def load_protocol(text: str) -> Protocol:
    return protocol_from_dict(json.loads(text))


# --- states -----------------------------------------------------------------------------


def state_to_dict(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}


def state_from_dict(d: dict) -> np.ndarray:
    from .errors import InvalidState

    try:
        m = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidState(f"bad state file: {e}") from e
    if m.shape != (d["dim"], d["dim"]):
        raise InvalidState(f"declared dim {d['dim']} but matrix is {m.shape}")
    return m


# --- reports and tables ------------------------------------------------------------------


def report_to_dict(r) -> dict:
    return {
        "resource_q": r.resource_q,
        "best_nl": r.best_nl,
        "best_q": r.best_q,
        "wirings_examined": r.wirings_examined,
        "bound_q": r.bound_q,
        "bound_respected": r.bound_respected,
        "best_protocol": protocol_to_dict(r.best_protocol),
    }


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def sweep_csv(q_grid, reports) -> str:
    rows = [(repr(float(q)), repr(float(r.best_q)), "" if r.bound_q is None else repr(float(r.bound_q)),
             "" if r.bound_respected is None else str(r.bound_respected).lower(), r.wirings_examined)
            for q, r in zip(q_grid, reports)]
    return _csv(("q", "best_q", "bound_q", "respected", "count"), rows)


def curve_csv(curve) -> str:
    return _csv(("abscissa", "ordinate"), [(repr(float(a)), repr(float(o))) for a, o in curve.samples])


def read_curve_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    return [(float(a), float(o)) for a, o in rows[1:]]
