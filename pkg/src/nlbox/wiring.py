"""Non-communicating wirings of boxes and their exact simulation.

Boolean functions are truth tables packed into Python ints.  Bit ``i`` of a
table holds f at index ``i = x | o_0 << 1 | o_1 << 2 | ...`` where ``x`` is
the party's own input bit and ``o_j`` are the outputs of the boxes the
function reads, in the listed order.  Boxes are numbered from 0.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .box import SIMULATED_TOL, Box, chsh, is_non_signaling
from .errors import (
    ArityMismatch,
    CausalityViolation,
    MalformedWiring,
    ResourceMismatch,
    SignalingResource,
    WeightSumError,
)


@dataclass(frozen=True)
class BoolFn:
    """Truth table over (x, outputs of the boxes in ``reads``)."""

    table: int
    reads: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "reads", tuple(int(r) for r in self.reads))

    @property
    def width(self) -> int:
        return 1 << (1 + len(self.reads))

    def __call__(self, x: int, outputs: int) -> int:
        idx = x
        for j, r in enumerate(self.reads):
            idx |= ((outputs >> r) & 1) << (j + 1)
        return (self.table >> idx) & 1

    def eval_many(self, x: int, outputs: np.ndarray) -> np.ndarray:
        idx = np.full(outputs.shape, x, dtype=np.int64)
        for j, r in enumerate(self.reads):
            idx |= ((outputs >> r) & 1) << (j + 1)
        return (self.table >> idx) & 1


@dataclass(frozen=True)
class PartyWiring:
    """One party's local circuit over ``n`` boxes.

    ``order[k]`` is the box used at step ``k``; ``input_fns[k]`` gives its
    input. ``output_fn`` is a table over (x, all n box outputs by box index).
    """

    n: int
    order: tuple
    input_fns: tuple
    output_fn: int

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(o) for o in self.order))
        object.__setattr__(self, "input_fns", tuple(self.input_fns))

    @classmethod
    def from_functions(cls, n, input_fns, output_fn, order=None):
        """Tabulate callables ``input_fns[k](x, prev_outputs)`` and
        ``output_fn(x, outputs)``.

        ``prev_outputs`` is the tuple of outputs of boxes used before step k
        (in usage order); ``outputs`` is the tuple of all n box outputs in box
        order.
        """
        order = tuple(range(n)) if order is None else tuple(order)
        fns = []
        for k in range(n):
            reads = order[:k]
            table = 0
            for idx in range(1 << (1 + k)):
                x, prev = idx & 1, tuple((idx >> (j + 1)) & 1 for j in range(k))
                if input_fns[k](x, prev) & 1:
                    table |= 1 << idx
            fns.append(BoolFn(table, reads))
        out = 0
        for idx in range(1 << (1 + n)):
            x, outs = idx & 1, tuple((idx >> (j + 1)) & 1 for j in range(n))
            if output_fn(x, outs) & 1:
                out |= 1 << idx
        return cls(n, order, tuple(fns), out)

    def output(self, x: int, outputs: int) -> int:
        return (self.output_fn >> (x | (outputs << 1))) & 1

    def respond(self, x: int, outputs: np.ndarray):
        """Box inputs and final output for every full output pattern.

        ``outputs`` holds integers whose bit k is box k's output. Returns
        ``(inputs, out)`` with bit k of ``inputs`` the input fed to box k.
        """
        outputs = np.asarray(outputs, dtype=np.int64)
        inputs = np.zeros_like(outputs)
        for k, box in enumerate(self.order):
            inputs |= self.input_fns[k].eval_many(x, outputs) << box
        out = (self.output_fn >> (x | (outputs << 1))) & 1
        return inputs, out

    def encoding(self) -> tuple:
        return tuple(f.table for f in self.input_fns) + (self.output_fn,)


@dataclass(frozen=True)
class Branch:
    weight: float
    alice: PartyWiring
    bob: PartyWiring


@dataclass(frozen=True)
class Protocol:
    branches: tuple

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))

    @property
    def n(self) -> int:
        return self.branches[0].alice.n

    @classmethod
    def deterministic(cls, alice: PartyWiring, bob: PartyWiring) -> "Protocol":
        return cls((Branch(1.0, alice, bob),))


@dataclass(frozen=True)
class DistillationOutcome:
    input_q: float
    output_box: Box
    output_nl: object
    gain: float


# --- standard wirings ---------------------------------------------------------

def identity_wiring(n: int = 1, box: int = 0) -> PartyWiring:
    """Feed x into every box and output box ``box``'s output."""
    return PartyWiring.from_functions(
        n, [lambda x, prev: x] * n, lambda x, outs: outs[box]
    )


def xor_wiring(n: int) -> PartyWiring:
    return PartyWiring.from_functions(
        n, [lambda x, prev: x] * n, lambda x, outs: sum(outs) & 1
    )


def identity_protocol(n: int = 1) -> Protocol:
    return Protocol.deterministic(identity_wiring(n), identity_wiring(n))


def xor_protocol(n: int) -> Protocol:
    return Protocol.deterministic(xor_wiring(n), xor_wiring(n))


def twirl_protocol() -> Protocol:
    """Two-branch symmetrisation making E00 = E01 = E10 = -E11.

    Branch 2: Alice flips her input bit, Bob flips his output when y = 1.
    """
    alice_flip = PartyWiring.from_functions(1, [lambda x, p: x ^ 1], lambda x, o: o[0])
    bob_flip = PartyWiring.from_functions(1, [lambda y, p: y], lambda y, o: o[0] ^ y)
    ident = identity_wiring(1)
    return Protocol((Branch(0.5, ident, ident), Branch(0.5, alice_flip, bob_flip)))


def relabel_wiring(w: PartyWiring, flip_input: int, c: int, d: int) -> PartyWiring:
    """Wiring run on input ``x ^ flip_input`` whose output is XORed with ``c ^ (d & x)``."""
    fns = tuple(BoolFn(_permute_table(f.table, f.width, flip_input), f.reads) for f in w.input_fns)
    width = 1 << (1 + w.n)
    out = 0
    for idx in range(width):
        bit = (w.output_fn >> (idx ^ flip_input)) & 1
        out |= (bit ^ c ^ (d & idx & 1)) << idx
    return PartyWiring(w.n, w.order, fns, out)


def _permute_table(table: int, width: int, flip: int) -> int:
    if not flip:
        return table
    out = 0
    for idx in range(width):
        out |= ((table >> (idx ^ 1)) & 1) << idx
    return out


# --- validation ----------------------------------------------------------------

def validate_wiring(w: PartyWiring, who: str = "party") -> list:
    errs = []
    if sorted(w.order) != list(range(w.n)):
        errs.append(MalformedWiring(f"{who}: order {w.order} is not a permutation of 0..{w.n - 1}"))
        return errs
    if len(w.input_fns) != w.n:
        errs.append(MalformedWiring(f"{who}: expected {w.n} input functions, got {len(w.input_fns)}"))
        return errs
    for k, f in enumerate(w.input_fns):
        earlier = set(w.order[:k])
        late = [r for r in f.reads if r not in earlier]
        if late:
            errs.append(CausalityViolation(
                f"{who}: input of step {k} (box {w.order[k]}) reads outputs of boxes {late} "
                f"not used before it"))
        if len(set(f.reads)) != len(f.reads):
            errs.append(MalformedWiring(f"{who}: step {k} reads a box twice"))
        if f.table < 0 or f.table >> f.width:
            errs.append(MalformedWiring(f"{who}: step {k} table exceeds {f.width} bits"))
    if w.output_fn < 0 or w.output_fn >> (1 << (1 + w.n)):
        errs.append(MalformedWiring(f"{who}: output table exceeds {1 << (1 + w.n)} bits"))
    return errs


def validate_protocol(p: Protocol, tol: float = 1e-12) -> list:
    """All invariant violations of ``p``; empty when the protocol is valid."""
    errs = []
    if not p.branches:
        return [WeightSumError("protocol has no branches")]
    weights = [b.weight for b in p.branches]
    if any(w < 0 for w in weights) or abs(sum(weights) - 1) > tol:
        errs.append(WeightSumError(f"branch weights {weights} must be non-negative and sum to 1"))
    n = p.branches[0].alice.n
    for i, br in enumerate(p.branches):
        if br.alice.n != n or br.bob.n != n:
            errs.append(ArityMismatch(f"branch {i} uses a different number of boxes"))
            continue
        errs += validate_wiring(br.alice, f"branch {i} alice")
        errs += validate_wiring(br.bob, f"branch {i} bob")
    return errs


# --- simulation -----------------------------------------------------------------

def apply_wiring(p: Protocol, resources) -> Box:
    """Exact output box of protocol ``p`` run on the given resource boxes.

    Enumerates every joint output pattern of the n boxes: the pattern fixes
    each party's box inputs, and its probability is the product of the
    resource entries.
    """
    errs = validate_protocol(p)
    if errs:
        raise errs[0]
    resources = list(resources)
    n = p.n
    if len(resources) != n:
        raise ResourceMismatch(f"protocol needs {n} boxes, got {len(resources)}")
    for i, r in enumerate(resources):
        if not is_non_signaling(r, SIMULATED_TOL):
            raise SignalingResource(f"resource {i} is signaling")
    tables = [r.table for r in resources]
    patterns = np.arange(1 << n, dtype=np.int64)
    bits = [(patterns >> k) & 1 for k in range(n)]
    out = np.zeros((2, 2, 2, 2))
    for br in p.branches:
        if br.weight == 0:
            continue
        ra = [br.alice.respond(x, patterns) for x in (0, 1)]
        rb = [br.bob.respond(y, patterns) for y in (0, 1)]
        for x, y in itertools.product((0, 1), repeat=2):
            xin, aout = ra[x]
            yin, bout = rb[y]
            prob = np.ones((1 << n, 1 << n))
            for k in range(n):
                xk = ((xin >> k) & 1)[:, None]
                yk = ((yin >> k) & 1)[None, :]
                prob = prob * tables[k][bits[k][:, None], bits[k][None, :], xk, yk]
            idx = (aout[:, None] * 2 + bout[None, :]).ravel()
            acc = np.bincount(idx, weights=prob.ravel(), minlength=4)
            out[:, :, x, y] += br.weight * acc.reshape(2, 2)
    return Box(out)


def distill(p: Protocol, resource: Box) -> DistillationOutcome:
    """Run ``p`` on n copies of ``resource`` and report the CHSH gain."""
    box = apply_wiring(p, [resource] * p.n)
    val = chsh(box)
    q_in = chsh(resource).q_equiv
    return DistillationOutcome(q_in, box, val, val.q_equiv - q_in)


# --- composition ---------------------------------------------------------------

def _run_nested(outer: PartyWiring, inners, offsets, x: int, flat_out: int):
    """Evaluate outer-of-inners for one party: returns (flat inputs, output)."""
    outer_outs = 0
    flat_in = 0
    for k, i in enumerate(outer.order):
        xi = outer.input_fns[k](x, outer_outs)
        inner = inners[i]
        local_out = (flat_out >> offsets[i]) & ((1 << inner.n) - 1)
        for l, box in enumerate(inner.order):
            flat_in |= inner.input_fns[l](xi, local_out) << (offsets[i] + box)
        outer_outs |= inner.output(xi, local_out) << i
    return flat_in, outer.output(x, outer_outs)


def _flatten(outer: PartyWiring, inners) -> PartyWiring:
    offsets = list(itertools.accumulate([0] + [w.n for w in inners]))[:-1]
    total = sum(w.n for w in inners)
    order = [offsets[i] + box for i in outer.order for box in inners[i].order]
    fns = []
    for j, fb in enumerate(order):
        reads = tuple(order[:j])
        table = 0
        for idx in range(1 << (1 + j)):
            x = idx & 1
            flat_out = 0
            for t, r in enumerate(reads):
                flat_out |= ((idx >> (t + 1)) & 1) << r
            flat_in, _ = _run_nested(outer, inners, offsets, x, flat_out)
            table |= ((flat_in >> fb) & 1) << idx
        fns.append(BoolFn(table, reads))
    out = 0
    for idx in range(1 << (1 + total)):
        _, o = _run_nested(outer, inners, offsets, idx & 1, idx >> 1)
        out |= o << idx
    return PartyWiring(total, tuple(order), tuple(fns), out)


def compose(outer: Protocol, inners) -> Protocol:
    """Protocol that runs ``outer`` on the boxes produced by ``inners``.

    Box numbering of the result: inner i's boxes occupy a contiguous range,
    in the order of ``inners``.
    """
    inners = list(inners)
    if len(inners) != outer.n:
        raise ArityMismatch(f"outer protocol takes {outer.n} boxes, got {len(inners)} inner protocols")
    for p in [outer, *inners]:
        errs = validate_protocol(p)
        if errs:
            raise errs[0]
    branches = []
    for ob in outer.branches:
        for combo in itertools.product(*(q.branches for q in inners)):
            w = ob.weight * math.prod(b.weight for b in combo)
            if w == 0:
                continue
            alice = _flatten(ob.alice, [b.alice for b in combo])
            bob = _flatten(ob.bob, [b.bob for b in combo])
            branches.append(Branch(w, alice, bob))
    return Protocol(tuple(branches))


def mix(protocols, weights) -> Protocol:
    """Shared-randomness mixture of protocols over the same number of boxes."""
    branches = []
    for p, w in zip(protocols, weights):
        branches += [Branch(w * b.weight, b.alice, b.bob) for b in p.branches]
    return Protocol(tuple(branches))
